use std::f64::consts::{FRAC_PI_2, PI};

use ddkit::linalg::CMatrix;
use ddkit::model::{model_ensemble, HamiltonianModel, Structure};
use ddkit::operators::{pauli, Axis};
use ddkit::pulseshape::{
    design_pulse, eta_integrals, eta_integrals_quadrature, pulse_error, pulse_error_scan, refine_iterations, Eta,
    Family, PulseError, PulseShape, Segment,
};
use proptest::prelude::*;

/// Composite Simpson on a fine uniform grid, phases from a direct running sum.
fn oracle_eta(shape: &PulseShape) -> Eta {
    // Edges of 1 to 6 equal segments fall on cell boundaries.
    let n = 240_000;
    let h = shape.tau_p / n as f64;
    let v = |t: f64| shape.envelope(t.min(shape.tau_p * (1.0 - 1e-15)));
    let area_to = |t: f64| -> f64 {
        let mut acc = 0.0;
        let mut start = 0.0;
        for s in &shape.segments {
            let end = start + s.len_frac * shape.tau_p;
            acc += s.amp * (t.min(end) - start).max(0.0);
            start = end;
        }
        acc
    };
    let a_s = area_to(shape.tau_s);
    let phi0 = area_to(shape.tau_p) - 2.0 * a_s;
    let (mut c, mut s) = (0.0, 0.0);
    for k in 0..n {
        let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
        let m = 0.5 * (a + b);
        let f = |t: f64, vt: f64| {
            let th = phi0 - 2.0 * (area_to(t) - a_s);
            ((t - shape.tau_s) * vt * th.cos(), (t - shape.tau_s) * vt * th.sin())
        };
        let vm = v(m);
        let (fa, fm, fb) = (f(a, vm), f(m, vm), f(b, vm));
        c += h / 6.0 * (fa.0 + 4.0 * fm.0 + fb.0);
        s += h / 6.0 * (fa.1 + 4.0 * fm.1 + fb.1);
    }
    Eta { eta11: c, eta12: s }
}

#[test]
fn rectangular_eta_matches_oracle() {
    let tau_p = 0.7;
    let oracle = oracle_eta(&PulseShape::rectangular(tau_p));
    let got = eta_integrals(&PulseShape::rectangular(tau_p));
    assert!((got.eta12 - oracle.eta12).abs() < 1e-10);
    assert!((got.eta12 + tau_p / PI).abs() < 1e-14);
    assert!(got.eta11.abs() < 1e-14);
}

#[test]
fn symmetric_design_zeroes_both_integrals() {
    let d = design_pulse(Family::Symmetric(3), 1.0, 0).unwrap();
    let oracle = oracle_eta(&d.shape);
    assert!(oracle.eta11.abs() < 1e-9 && oracle.eta12.abs() < 1e-9, "{oracle:?}");
    assert!((d.shape.area() - FRAC_PI_2).abs() < 1e-10);
    assert!(d.shape.validate().is_ok());
    assert!(refine_iterations(Family::Symmetric(3), &d.shape) <= 2);
}

#[test]
fn mirrored_two_amplitude_design() {
    // Amplitudes a1, a2 mirrored as a1 a2 a2 a1.
    let d = design_pulse(Family::Symmetric(4), 1.0, 0).unwrap();
    let amps: Vec<f64> = d.shape.segments.iter().map(|s| s.amp).collect();
    assert_eq!(amps[0], amps[3]);
    assert_eq!(amps[1], amps[2]);
    let oracle = oracle_eta(&d.shape);
    assert!(oracle.eta11.abs() < 1e-9 && oracle.eta12.abs() < 1e-9);
}

#[test]
fn asymmetric_design() {
    let d = design_pulse(Family::Asymmetric(4), 1.0, 3).unwrap();
    assert!(d.eta.max_abs() <= 1e-10);
    assert!(eta_integrals_quadrature(&d.shape).max_abs() <= 1e-10);
    assert!(refine_iterations(Family::Asymmetric(4), &d.shape) <= 2);
}

#[test]
fn rectangle_cannot_be_designed() {
    match design_pulse(Family::Rect, 1.0, 0) {
        Err(PulseError::TooFewParameters { residual, .. }) => assert!((residual - 1.0 / PI).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
}

#[test]
fn design_is_deterministic_and_scales() {
    let a = design_pulse(Family::Symmetric(3), 0.2, 5).unwrap();
    let b = design_pulse(Family::Symmetric(3), 0.2, 5).unwrap();
    assert_eq!(a, b);
    let unit = a.shape.with_duration(1.0);
    assert!((unit.area() - FRAC_PI_2).abs() < 1e-12);
}

#[test]
fn eta_vanishes_linearly_with_duration() {
    let base = design_pulse(Family::Symmetric(3), 1.0, 0).unwrap().shape;
    let mut shape = base.clone();
    shape.segments[1].amp += 0.3;
    shape.segments[0].amp -= 0.45;
    shape.segments[2].amp = shape.segments[0].amp;
    let e1 = eta_integrals(&shape).eta12;
    let e2 = eta_integrals(&shape.with_duration(0.01)).eta12;
    assert!(e1.abs() > 1e-3);
    assert!((e2 / e1 - 0.01).abs() < 1e-10);
}

#[test]
fn designed_pulse_error_is_second_order() {
    let z = pauli(Axis::Z, 1, 1).unwrap();
    let models = model_ensemble(Structure::General, 2, 4, 1.0, &[0, 1, 2, 3]).unwrap();
    let d = design_pulse(Family::Symmetric(3), 1.0, 0).unwrap();
    let grid = ddkit::pulseshape::default_tau_grid();
    let designed = pulse_error_scan(&d.shape, &models, &z, &grid).unwrap();
    let s = designed.fits[0].slope.unwrap();
    assert!((1.8..=2.3).contains(&s), "{s}");
    // A plain rectangle keeps its first-order error.
    let rect = pulse_error_scan(&PulseShape::rectangular(1.0), &models, &z, &grid).unwrap();
    let r = rect.fits[0].slope.unwrap();
    assert!((r - 1.0).abs() < 0.1, "{r}");
}

#[test]
fn zero_hamiltonian_any_shape() {
    let z = pauli(Axis::Z, 1, 1).unwrap();
    let m = HamiltonianModel::custom(2, 3, CMatrix::zeros(6)).unwrap();
    let d = design_pulse(Family::Symmetric(3), 0.3, 0).unwrap();
    assert!(pulse_error(&d.shape, &m, &z).unwrap() < 1e-12);
}

#[test]
fn wrong_dimension_rejected() {
    let z2 = pauli(Axis::Z, 1, 2).unwrap();
    let models = model_ensemble(Structure::General, 2, 2, 1.0, &[0]).unwrap();
    assert!(matches!(pulse_error(&PulseShape::rectangular(0.1), &models[0], &z2), Err(PulseError::Dimension { .. })));
}

fn piecewise() -> impl Strategy<Value = PulseShape> {
    (prop::collection::vec((0.1f64..1.0, -3.0f64..3.0), 1..6), 0.1f64..2.0, 0.0f64..1.0).prop_map(|(raw, tau_p, s)| {
        let total: f64 = raw.iter().map(|r| r.0).sum();
        let segments = raw.iter().map(|&(l, amp)| Segment { len_frac: l / total, amp }).collect();
        PulseShape { tau_p, tau_s: s * tau_p, segments }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closed_form_matches_quadrature(shape in piecewise()) {
        let a = eta_integrals(&shape);
        let b = eta_integrals_quadrature(&shape);
        prop_assert!((a.eta11 - b.eta11).abs() < 1e-11, "{:?} {:?}", a, b);
        prop_assert!((a.eta12 - b.eta12).abs() < 1e-11, "{:?} {:?}", a, b);
    }

    #[test]
    fn symmetric_shapes_have_no_eta11(half in prop::collection::vec(-4.0f64..4.0, 1..4), odd in any::<bool>(), tau_p in 0.05f64..3.0) {
        let mut amps = half.clone();
        let tail: Vec<f64> = half.iter().rev().skip(usize::from(odd)).copied().collect();
        amps.extend(tail);
        let shape = PulseShape::equal_segments(tau_p, &amps);
        prop_assert!(shape.phi0().abs() < 1e-12);
        prop_assert!(eta_integrals(&shape).eta11.abs() < 1e-12);
    }
}
