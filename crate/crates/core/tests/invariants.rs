use ddkit::linalg::{distance, expm_i, kron, spectral_norm, CMatrix, HermitianEigen, C64};
use ddkit::operators::{
    build_moos, lie_closure_of, pauli, projection_residual, sigma_x_level, sigma_z_level, Axis, MoosSpec, Operator,
};
use ddkit::sequences::{cdd_nested, first_order_schedule, net_pulse_operator, nudd, sdd_schedule, udd_times, Schedule};
use proptest::prelude::*;

fn matrix(dim: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim)
        .prop_map(move |v| CMatrix::from_vec(dim, v.into_iter().map(|(re, im)| C64::new(re, im)).collect()).unwrap())
}

fn hermitian(dim: usize) -> impl Strategy<Value = CMatrix> {
    matrix(dim).prop_map(|m| m.hermitian_part())
}

fn sized_hermitian() -> impl Strategy<Value = CMatrix> {
    (1usize..=6).prop_flat_map(hermitian)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exponential_group_law(h in sized_hermitian(), s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let a = expm_i(&h, s).unwrap();
        let b = expm_i(&h, t).unwrap();
        let ab = expm_i(&h, s + t).unwrap();
        prop_assert!(distance(&(&a * &b), &ab) < 1e-11);
        let defect = &(&a.adjoint() * &a) - &CMatrix::identity(h.dim());
        prop_assert!(spectral_norm(&defect) < 1e-12);
    }

    #[test]
    fn eigen_reconstructs(h in sized_hermitian()) {
        let e = HermitianEigen::new(&h).unwrap();
        let d = CMatrix::diagonal(&e.values.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>());
        let back = &(&e.vectors * &d) * &e.vectors.adjoint();
        prop_assert!(distance(&back, &h) < 1e-12);
        prop_assert!((e.max_abs_eigenvalue() - spectral_norm(&h)).abs() < 1e-11);
    }

    #[test]
    fn spectral_norm_bounds(a in matrix(4), b in matrix(4)) {
        let (na, nb) = (spectral_norm(&a), spectral_norm(&b));
        prop_assert!(spectral_norm(&(&a * &b)) <= na * nb * (1.0 + 1e-12) + 1e-14);
        prop_assert!(na <= a.frobenius_norm() * (1.0 + 1e-12) + 1e-14);
        prop_assert!(na + 1e-14 >= a.max_abs());
    }

    #[test]
    fn kron_mixed_product(a in matrix(2), b in matrix(3), c in matrix(2), d in matrix(3)) {
        let lhs = &kron(&a, &b) * &kron(&c, &d);
        let rhs = kron(&(&a * &c), &(&b * &d));
        prop_assert!(distance(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn udd_times_symmetric_and_increasing(n in 1usize..80) {
        let t = udd_times(n);
        prop_assert_eq!(t.len(), n);
        for k in 0..n {
            prop_assert!(t[k] > 0.0 && t[k] < 1.0);
            prop_assert!((t[k] + t[n - 1 - k] - 1.0).abs() < 1e-14);
        }
        prop_assert!(t.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn nudd_structure(n1 in 1usize..8, n2 in 1usize..8) {
        let moos = build_moos(MoosSpec::QubitFull(1)).unwrap();
        let s = nudd(&moos, &[n1, n2], true).unwrap();
        prop_assert_eq!(s.intervals, (n1 + 1) * (n2 + 1));
        prop_assert!(s.validate().is_ok());
        let total: f64 = s.interval_lengths().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-14);
        let net = net_pulse_operator(&s, &moos).unwrap();
        let defect = &(&net.matrix.adjoint() * &net.matrix) - &CMatrix::identity(2);
        prop_assert!(spectral_norm(&defect) < 1e-12);
        // The outer UDD cut points survive nesting unchanged.
        for t in udd_times(n2) {
            prop_assert!(s.events.iter().any(|e| e.t == t && e.ops.iter().any(|o| o == "X1")));
        }
    }

    #[test]
    fn schedule_json_is_bit_exact(n1 in 1usize..6, n2 in 1usize..6, mirror in any::<bool>()) {
        let moos = build_moos(MoosSpec::QubitFull(1)).unwrap();
        let mut s = nudd(&moos, &[n1, n2], true).unwrap();
        if mirror {
            s = sdd_schedule(&s);
        }
        let back = Schedule::from_json(&s.to_json()).unwrap();
        prop_assert_eq!(&back, &s);
        for (a, b) in s.events.iter().zip(&back.events) {
            prop_assert_eq!(a.t.to_bits(), b.t.to_bits());
        }
    }

    #[test]
    fn cdd_nested_counts(orders in prop::collection::vec(1usize..4, 1..=3)) {
        let moos = build_moos(MoosSpec::QubitFull(2)).unwrap().truncated(orders.len());
        let s = cdd_nested(&moos, &orders).unwrap();
        prop_assert_eq!(s.intervals, 1usize << orders.iter().sum::<usize>());
        prop_assert!(s.validate().is_ok());
    }
}

#[test]
fn level_operators_reduce_to_paulis() {
    for l_total in 1..=4 {
        let dim = 1 << l_total;
        for l in 1..=l_total {
            let q = l_total + 1 - l;
            assert_eq!(sigma_z_level(l, dim).unwrap().matrix, pauli(Axis::Z, q, l_total).unwrap().matrix);
            assert_eq!(sigma_x_level(l, dim).unwrap().matrix, pauli(Axis::X, q, l_total).unwrap().matrix);
        }
    }
}

#[test]
fn closure_ignores_generator_order() {
    let moos = build_moos(MoosSpec::QubitFull(2)).unwrap();
    let gens = moos.elements().to_vec();
    let mut reversed = gens.clone();
    reversed.reverse();
    let rotated: Vec<Operator> = gens[1..].iter().chain(&gens[..1]).cloned().collect();
    let a = lie_closure_of(&gens, 15).unwrap();
    for other in [reversed, rotated] {
        let b = lie_closure_of(&other, 15).unwrap();
        assert_eq!(a.len(), b.len());
        for op in &b {
            assert!(projection_residual(&a, &op.matrix) <= 1e-9);
        }
        for op in &a {
            assert!(projection_residual(&b, &op.matrix) <= 1e-9);
        }
    }
}

#[test]
fn composed_pulses_stay_unitary_hermitian() {
    let moos = build_moos(MoosSpec::QubitFull(2)).unwrap();
    let ops = moos.elements();
    for (i, (a, row)) in ops.iter().zip(moos.signature()).enumerate() {
        for (j, (b, &relation)) in ops.iter().zip(row).enumerate() {
            if i == j {
                continue;
            }
            let p = a.compose(b);
            // An anticommuting pair composes to an anti-Hermitian unitary, i.e. i times a MOOS-type operator.
            let fixed =
                if relation < 0 { Operator::new(p.label.clone(), p.matrix.scale(C64::new(0.0, 1.0))) } else { p };
            assert!(fixed.is_unitary_hermitian(), "{}", fixed.label);
        }
    }
}

#[test]
fn first_order_closing_returns_to_identity() {
    for l in 1..=3 {
        let moos = build_moos(MoosSpec::QubitFull(l)).unwrap();
        let s = first_order_schedule(&moos, true).unwrap();
        let net = net_pulse_operator(&s, &moos).unwrap();
        // Identity up to a global sign from anticommuting reorderings.
        let phase = net.matrix[(0, 0)];
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        let id = CMatrix::identity(moos.dim()).scale(phase);
        assert!(distance(&net.matrix, &id) < 1e-12, "L={l}");
    }
}
