use std::f64::consts::FRAC_1_SQRT_2;

use ddkit::acceptance::{udd_ladder, Settings};
use ddkit::linalg::{kron, CMatrix, C64};
use ddkit::model::{model_ensemble, random_model, HamiltonianModel, Structure};
use ddkit::operators::{build_moos, pauli, Axis, MoosSpec, Operator};
use ddkit::sequences::{echo_wrap, net_pulse_operator, nudd, udd_schedule, udd_times, Schedule};
use ddkit::simulate::{
    fit_loglog, log_spaced, order_scan, order_scan_framed, preservation_error, propagate, BlockFrame, FitStatus,
    RunConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn z() -> Operator {
    pauli(Axis::Z, 1, 1).unwrap()
}

fn x() -> Operator {
    pauli(Axis::X, 1, 1).unwrap()
}

fn diagonal_partner() -> Operator {
    let m = (&x().matrix + &pauli(Axis::Y, 1, 1).unwrap().matrix).scale(C64::new(FRAC_1_SQRT_2, 0.0));
    Operator::new("R", m)
}

fn general_models() -> Vec<HamiltonianModel> {
    model_ensemble(Structure::General, 2, 4, 1.0, &(0..8).collect::<Vec<_>>()).unwrap()
}

#[test]
fn udd_two_slope() {
    let r = order_scan(&udd_schedule(&z(), 2), &vec![z()], &[z()], &general_models(), &RunConfig::default()).unwrap();
    let s = r.slope("Z1").unwrap();
    assert!((2.7..=3.5).contains(&s), "{s}");
    assert_eq!(r.samples.len(), 12 * 8);
}

#[test]
fn free_evolution_is_first_order() {
    let run = RunConfig::with_grid(1e-5, 5e-3, 12);
    let r = order_scan(&Schedule::free(), &vec![z()], &[z()], &general_models(), &run).unwrap();
    let s = r.slope("Z1").unwrap();
    assert!((0.8..=1.2).contains(&s), "{s}");
}

#[test]
fn free_evolution_on_default_grid_is_unfittable() {
    let r = order_scan(&Schedule::free(), &vec![z()], &[z()], &general_models(), &RunConfig::default()).unwrap();
    assert!(matches!(r.fits[0].status, FitStatus::Unfittable { .. }));
    assert!(r.fits[0].slope.is_none());
}

#[test]
fn commuting_hamiltonian_is_exact() {
    let h = kron(&z().matrix, &CMatrix::diagonal(&[C64::new(0.3, 0.0), C64::new(-0.7, 0.0)]));
    let m = HamiltonianModel::custom(2, 2, h).unwrap();
    let r = order_scan(&Schedule::free(), &vec![z()], &[z()], &[m], &RunConfig::default()).unwrap();
    assert_eq!(r.fits[0].status, FitStatus::Exact);
}

#[test]
fn noisy_power_law_fit() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    for p in [1.0, 2.5, 4.0] {
        let pts: Vec<(f64, f64)> = log_spaced(0.01, 1.0, 12)
            .into_iter()
            .map(|t| (t, 1e-3 * t.powf(p) * (1.0 + 0.01 * rng.random_range(-1.0..1.0))))
            .collect();
        let f = fit_loglog(&pts, 0.0, f64::INFINITY).unwrap();
        assert!((f.slope - p).abs() < 0.05, "{p} {}", f.slope);
    }
}

#[test]
fn nesting_does_not_disturb_inner_level() {
    let moos = build_moos(MoosSpec::QubitFull(1)).unwrap();
    let models = general_models();
    let run = RunConfig::default();
    let nested = order_scan(&nudd(&moos, &[2, 2], false).unwrap(), &moos, moos.elements(), &models, &run).unwrap();
    let alone = order_scan(&udd_schedule(&z(), 2), &moos, &[z()], &models, &run).unwrap();
    let (a, b) = (nested.slope("Z1").unwrap(), alone.slope("Z1").unwrap());
    assert!((a - b).abs() <= 0.3, "{a} vs {b}");
    assert!(nested.slope("X1").unwrap() >= 2.7);
}

#[test]
fn errors_grow_with_time() {
    let moos = build_moos(MoosSpec::QubitFull(1)).unwrap();
    let r = order_scan(
        &nudd(&moos, &[2, 3], false).unwrap(),
        &moos,
        moos.elements(),
        &general_models(),
        &RunConfig::default(),
    )
    .unwrap();
    for f in &r.fits {
        let inside: Vec<f64> = f.medians.iter().map(|m| m.1).filter(|e| *e > 1e-12 && *e < 1e-2).collect();
        let pairs = inside.len().saturating_sub(1);
        let up = inside.windows(2).filter(|w| w[1] >= w[0]).count();
        assert!(pairs > 0 && up as f64 >= 0.9 * pairs as f64, "{}", f.operator);
    }
}

#[test]
fn partner_frame_preserves_slope() {
    let models = general_models();
    let run = RunConfig::default();
    let s = udd_schedule(&z(), 3);
    let base = order_scan(&s, &vec![z()], &[z()], &models, &run).unwrap();
    let framed = order_scan_framed(&s, &vec![z()], &[z()], &models, &run, &BlockFrame::Conjugated(x())).unwrap();
    assert!((base.slope("Z1").unwrap() - framed.slope("Z1").unwrap()).abs() <= 0.3);
}

#[test]
fn non_partner_echo_breaks_protection() {
    let models = general_models();
    let ops = vec![z(), x(), diagonal_partner()];
    let run = RunConfig::with_grid(1e-5, 5e-3, 12);
    let wrapped = echo_wrap(&udd_schedule(&x(), 2), "R");
    let r = order_scan(&wrapped, &ops, &[x()], &models, &run).unwrap();
    let s = r.slope("X1").unwrap();
    assert!((0.7..=1.5).contains(&s), "{s}");
}

#[test]
fn scan_is_deterministic() {
    let moos = build_moos(MoosSpec::QubitFull(1)).unwrap();
    let s = nudd(&moos, &[2, 2], false).unwrap();
    let models = general_models();
    let a = order_scan(&s, &moos, moos.elements(), &models, &RunConfig::default()).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| order_scan(&s, &moos, moos.elements(), &models, &RunConfig::default()).unwrap());
    assert_eq!(a, b);
    let again = random_model(Structure::General, 2, 4, 1.0, 3).unwrap();
    assert_eq!(again.h_total, models[3].h_total);
}

#[test]
fn normalized_time_scales_with_hamiltonian() {
    // U(T) under H equals U(1) under T·H.
    let m = random_model(Structure::General, 2, 4, 1.0, 2).unwrap();
    let scaled = HamiltonianModel::custom(2, 4, m.h_total.scale_real(0.37)).unwrap();
    let s = udd_schedule(&z(), 4);
    let a = propagate(&s, &m, &vec![z()], 0.37).unwrap();
    let b = propagate(&s, &scaled, &vec![z()], 1.0).unwrap();
    assert!(ddkit::linalg::distance(&a, &b) < 1e-12);
}

#[test]
fn budget_is_enforced() {
    let moos = build_moos(MoosSpec::QubitFull(1)).unwrap();
    let s = nudd(&moos, &[40, 40], false).unwrap();
    let models = general_models();
    let run = RunConfig { t_grid: log_spaced(0.01, 0.1, 200), ..RunConfig::default() };
    assert!(order_scan(&s, &moos, moos.elements(), &models, &run).is_err());
}

#[test]
fn preservation_error_zero_for_exact_pulse() {
    let m = HamiltonianModel::custom(2, 1, z().matrix.scale_real(0.5)).unwrap();
    let s = udd_schedule(&x(), 1);
    let u = propagate(&s, &m, &vec![x()], 2.0).unwrap();
    let net = net_pulse_operator(&s, &vec![x()]).unwrap();
    assert!(preservation_error(&u, &z(), &net).unwrap() < 1e-12);
    assert!(preservation_error(&u, &x(), &net).unwrap() < 1e-12);
}

#[test]
fn tampered_udd_timing_fails_the_ladder() {
    let shifted = |n: usize| -> Vec<f64> {
        (1..=n).map(|k| (k as f64 * std::f64::consts::PI / (2 * n + 4) as f64).sin().powi(2)).collect()
    };
    let outcome = udd_ladder(&Settings::default(), &shifted);
    assert!(!outcome.passed, "{}", outcome.line());
    let honest = udd_ladder(&Settings::default(), &udd_times);
    assert!(honest.passed, "{}", honest.line());
}
