//! The acceptance criteria as runnable checks. Each check reports the
//! measured quantities next to the tolerance it was held to, and fails when
//! it runs past its time budget.

use std::f64::consts::FRAC_1_SQRT_2;
use std::time::{Duration, Instant};

use crate::linalg::C64;
use crate::model::{model_ensemble, HamiltonianModel, Structure};
use crate::operators::{
    build_moos, lie_closure, lie_closure_of, pauli, projection_residual, Axis, Moos, MoosSpec, Operator, OperatorError,
};
use crate::pulseshape::{design_pulse, pulse_error, pulse_error_scan, Family, PulseShape};
use crate::sequences::{
    cdd_nested, cdd_uniform, echo_wrap, first_order_schedule, nudd, sdd_schedule, udd_schedule, udd_times, Event,
    Schedule,
};
use crate::simulate::{median, order_scan, order_scan_framed, BlockFrame, OperatorFit, RunConfig};
use crate::tolerance::{DESIGN_TOL, HERM_TOL};

/// Shared inputs for the scaling criteria.
#[derive(Debug, Clone)]
pub struct Settings {
    pub run: RunConfig,
    pub bath_dim: usize,
    pub norm_bound: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self { run: RunConfig::default(), bath_dim: 4, norm_bound: 1.0 }
    }
}

impl Settings {
    fn models(&self, structure: Structure, sys_dim: usize) -> Result<Vec<HamiltonianModel>, String> {
        model_ensemble(structure, sys_dim, self.bath_dim, self.norm_bound, &self.run.seeds).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>3} {}: {} ({:.1} s of {} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }
}

type Check = Result<(bool, String), String>;

fn timed(id: &'static str, title: &'static str, budget_s: u64, f: impl FnOnce() -> Check) -> Outcome {
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget_s);
    let (mut passed, mut detail) = match result {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    if elapsed > budget {
        passed = false;
        detail.push_str("; over time budget");
    }
    Outcome { id, title, passed, detail, elapsed, budget }
}

fn describe(fit: Option<&OperatorFit>) -> String {
    match fit {
        None => "missing".into(),
        Some(f) => match f.slope {
            Some(s) => format!("{} slope {s:.3}", f.operator),
            None => format!("{} {:?}", f.operator, f.status),
        },
    }
}

fn slope_in(fit: Option<&OperatorFit>, lo: f64, hi: f64) -> bool {
    fit.and_then(|f| f.slope).is_some_and(|s| (lo..=hi).contains(&s))
}

fn qubit() -> (Operator, Operator) {
    (pauli(Axis::Z, 1, 1).expect("valid"), pauli(Axis::X, 1, 1).expect("valid"))
}

/// Single-operator UDD schedule from an arbitrary timing rule.
fn udd_from_times(op: &Operator, order: usize, times: &dyn Fn(usize) -> Vec<f64>) -> Schedule {
    let events: Vec<Event> = times(order).into_iter().map(|t| Event { t, ops: vec![op.label.clone()] }).collect();
    Schedule { scheme: "udd".into(), orders: vec![order], intervals: events.len() + 1, events, closing: Vec::new() }
}

/// Criterion 1 with a pluggable timing rule, so tampered timings can be shown to fail.
pub fn udd_ladder(settings: &Settings, times: &dyn Fn(usize) -> Vec<f64>) -> Outcome {
    timed("1", "UDD order ladder", 60, || {
        let (z, _) = qubit();
        let models = settings.models(Structure::General, 2)?;
        let ops = vec![z.clone()];
        let mut ok = true;
        let mut parts = Vec::new();
        for n in 1..=4 {
            let schedule = udd_from_times(&z, n, times);
            schedule.validate().map_err(|e| e.to_string())?;
            let r = order_scan(&schedule, &ops, std::slice::from_ref(&z), &models, &settings.run)
                .map_err(|e| e.to_string())?;
            let target = (n + 1) as f64;
            let (lo, hi) = if n <= 3 { (target - 0.3, target + 0.5) } else { (target - 0.5, target + 0.7) };
            ok &= slope_in(r.fit("Z1"), lo, hi);
            parts.push(format!("N={n} {} in [{lo}, {hi}]", describe(r.fit("Z1"))));
        }
        Ok((ok, parts.join(", ")))
    })
}

fn first_order(settings: &Settings) -> Outcome {
    timed("2", "first-order MOOS scheme", 60, || {
        let mut ok = true;
        let mut parts = Vec::new();
        for l in 1..=2 {
            let moos = build_moos(MoosSpec::QubitFull(l)).map_err(|e| e.to_string())?;
            let schedule = first_order_schedule(&moos, false).map_err(|e| e.to_string())?;
            let models = settings.models(Structure::General, moos.dim())?;
            let r = order_scan(&schedule, &moos, moos.elements(), &models, &settings.run).map_err(|e| e.to_string())?;
            for f in &r.fits {
                ok &= f.slope.is_some_and(|s| s >= 1.7);
                parts.push(format!("L={l} {}", describe(Some(f))));
            }
        }
        Ok((ok, format!("{} (need >= 1.7)", parts.join(", "))))
    })
}

fn sdd(settings: &Settings) -> Outcome {
    timed("3", "SDD second order", 30, || {
        let moos = build_moos(MoosSpec::QubitFull(1)).map_err(|e| e.to_string())?;
        let schedule = sdd_schedule(&first_order_schedule(&moos, false).map_err(|e| e.to_string())?);
        let models = settings.models(Structure::General, 2)?;
        let r = order_scan(&schedule, &moos, moos.elements(), &models, &settings.run).map_err(|e| e.to_string())?;
        let ok = r.fits.iter().all(|f| f.slope.is_some_and(|s| s >= 2.7));
        let parts: Vec<String> = r.fits.iter().map(|f| describe(Some(f))).collect();
        Ok((ok, format!("{} (need >= 2.7)", parts.join(", "))))
    })
}

fn cdd(settings: &Settings) -> Outcome {
    timed("4", "CDD order", 30, || {
        let moos = build_moos(MoosSpec::QubitFull(1)).map_err(|e| e.to_string())?;
        let n = 2;
        let schedule = cdd_uniform(&moos, n).map_err(|e| e.to_string())?;
        let expected = 1usize << (n * moos.len());
        let models = settings.models(Structure::General, 2)?;
        let r = order_scan(&schedule, &moos, moos.elements(), &models, &settings.run).map_err(|e| e.to_string())?;
        let ok = schedule.intervals == expected && r.fits.iter().all(|f| f.slope.is_some_and(|s| s >= 2.7));
        let parts: Vec<String> = r.fits.iter().map(|f| describe(Some(f))).collect();
        Ok((ok, format!("{} (need >= 2.7), intervals {} (expect {expected})", parts.join(", "), schedule.intervals)))
    })
}

fn nudd_even(settings: &Settings) -> Outcome {
    timed("5", "NUDD even inner order", 120, || {
        let moos = build_moos(MoosSpec::QubitFull(1)).map_err(|e| e.to_string())?;
        let schedule = nudd(&moos, &[2, 3], false).map_err(|e| e.to_string())?;
        let models = settings.models(Structure::General, 2)?;
        let r = order_scan(&schedule, &moos, moos.elements(), &models, &settings.run).map_err(|e| e.to_string())?;
        let ok = r.slope("Z1").is_some_and(|s| s >= 2.7) && r.slope("X1").is_some_and(|s| s >= 3.7);
        Ok((ok, format!("{} (need >= 2.7), {} (need >= 3.7)", describe(r.fit("Z1")), describe(r.fit("X1")))))
    })
}

fn odd_inner_counterexample(settings: &Settings) -> Outcome {
    timed("6", "odd inner order counterexample", 60, || {
        let moos = build_moos(MoosSpec::QubitFull(1)).map_err(|e| e.to_string())?;
        let schedule = nudd(&moos, &[1, 2], true).map_err(|e| e.to_string())?;
        let models = settings.models(Structure::QddCounterexample, 2)?;
        let r = order_scan(&schedule, &moos, moos.elements(), &models, &settings.run).map_err(|e| e.to_string())?;
        let ok = slope_in(r.fit("X1"), 1.7, 2.4) && r.slope("Z1").is_some_and(|s| s >= 1.7);
        Ok((
            ok,
            format!("outer {} in [1.7, 2.4], inner {} (need >= 1.7)", describe(r.fit("X1")), describe(r.fit("Z1"))),
        ))
    })
}

/// All order vectors of length `levels` with entries `>= 1` and `cost(v) <= budget`.
fn order_vectors(levels: usize, budget: usize, cost: &dyn Fn(&[usize]) -> usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack = vec![Vec::new()];
    while let Some(v) = stack.pop() {
        if v.len() == levels {
            out.push(v);
            continue;
        }
        for n in 1.. {
            let mut w = v.clone();
            w.push(n);
            let mut probe = w.clone();
            probe.resize(levels, 1);
            if cost(&probe) > budget {
                break;
            }
            stack.push(w);
        }
    }
    out
}

fn pulse_counts() -> Outcome {
    timed("7", "pulse-count formulas", 30, || {
        let budget = 1 << 10;
        let big = build_moos(MoosSpec::QubitFull(5)).map_err(|e| e.to_string())?;
        // (schedule, intervals, formula)
        let mut cases: Vec<(String, usize, usize)> = Vec::new();
        let mut bad = Vec::new();
        for l in 1..=10 {
            let s = first_order_schedule(&big.truncated(l), false).map_err(|e| e.to_string())?;
            cases.push((format!("first_order L={l}"), s.intervals, 1 << l));
        }
        for l in 1..=3 {
            let moos = big.truncated(l);
            for n in (1..).take_while(|n| n * l <= 10) {
                let s = cdd_uniform(&moos, n).map_err(|e| e.to_string())?;
                cases.push((format!("cdd L={l} N={n}"), s.intervals, 1 << (n * l)));
            }
            let sum = |v: &[usize]| 1usize << v.iter().sum::<usize>();
            for v in order_vectors(l, budget, &sum) {
                let s = cdd_nested(&moos, &v).map_err(|e| e.to_string())?;
                cases.push((format!("cdd {v:?}"), s.intervals, sum(&v)));
            }
            let product = |v: &[usize]| v.iter().map(|n| n + 1).product::<usize>();
            for v in order_vectors(l, budget, &product) {
                let s = nudd(&moos, &v, true).map_err(|e| e.to_string())?;
                cases.push((format!("nudd {v:?}"), s.intervals, product(&v)));
                if s.validate().is_err() {
                    bad.push(format!("nudd {v:?}: invalid schedule"));
                }
            }
        }
        let checked = cases.len();
        bad.extend(
            cases.into_iter().filter(|c| c.1 != c.2).map(|(what, got, want)| format!("{what}: {got} != {want}")),
        );
        let ok = bad.is_empty();
        let detail = if ok {
            format!("{checked} schedules match")
        } else {
            format!("{} of {checked} mismatched, first: {}", bad.len(), bad[0])
        };
        Ok((ok, detail))
    })
}

fn moos_invariants(moos: &Moos) -> Result<(), String> {
    for (i, a) in moos.elements().iter().enumerate() {
        let (herm, unit) = a.unitary_hermitian_residuals();
        if herm > HERM_TOL || unit > HERM_TOL {
            return Err(format!("{} not unitary Hermitian", a.label));
        }
        for b in moos.elements().iter().skip(i + 1) {
            let comm = crate::linalg::spectral_norm(&a.matrix.commutator(&b.matrix));
            let anti = crate::linalg::spectral_norm(&a.matrix.anticommutator(&b.matrix));
            if comm > HERM_TOL && anti > HERM_TOL {
                return Err(format!("{} and {} are not orthogonal", a.label, b.label));
            }
            if anti <= HERM_TOL && (a.matrix.trace().norm() > HERM_TOL || b.matrix.trace().norm() > HERM_TOL) {
                return Err(format!("anticommuting {} and {} not traceless", a.label, b.label));
            }
        }
    }
    Ok(())
}

fn moos_suites() -> Outcome {
    timed("8", "MOOS constructions", 10, || {
        let mut specs = Vec::new();
        for l in 1..=4 {
            specs.push(MoosSpec::QubitDephasing(l));
            specs.push(MoosSpec::QubitFull(l));
        }
        for m in 2..=16 {
            specs.push(MoosSpec::MlevelDiagonal(m));
            specs.push(MoosSpec::MlevelFull(m));
        }
        let count = specs.len();
        for spec in specs {
            let moos = build_moos(spec.clone()).map_err(|e| format!("{spec:?}: {e}"))?;
            moos_invariants(&moos).map_err(|e| format!("{spec:?}: {e}"))?;
        }
        let m6 = build_moos(MoosSpec::MlevelFull(6)).map_err(|e| e.to_string())?;
        let has = |l: &str| m6.labels().iter().any(|x| x == l);
        let m6_ok = has("SX1") && !has("SX2");
        let (_, x) = qubit();
        let y = pauli(Axis::Y, 1, 1).map_err(|e| e.to_string())?;
        let diag = Operator::new("D", (&x.matrix + &y.matrix).scale_real(FRAC_1_SQRT_2));
        let rejected = match build_moos(MoosSpec::Custom(vec![x, diag])) {
            Err(OperatorError::NotOrthogonal { comm, anti, .. }) => {
                let r2 = 2f64.sqrt();
                (comm - r2).abs() < 1e-10 && (anti - r2).abs() < 1e-10
            }
            _ => false,
        };
        Ok((
            m6_ok && rejected,
            format!(
                "{count} constructions valid, mlevel_full(6) labels {:?}, custom pair rejected with residuals sqrt(2): {rejected}",
                m6.labels()
            ),
        ))
    })
}

fn closure_dims() -> Outcome {
    timed("9", "Lie closure dimensions", 10, || {
        let (z, x) = qubit();
        let y = pauli(Axis::Y, 1, 1).map_err(|e| e.to_string())?;
        let dim = |gens: Vec<Operator>| lie_closure_of(&gens, 63).map(|b| b.len()).map_err(|e| e.to_string());
        let dims = [
            (dim(vec![z.clone()])?, 1),
            (dim(vec![x.clone(), y])?, 3),
            (
                lie_closure(&build_moos(MoosSpec::QubitFull(1)).map_err(|e| e.to_string())?, 3)
                    .map_err(|e| e.to_string())?
                    .len(),
                3,
            ),
            (
                lie_closure(&build_moos(MoosSpec::QubitFull(2)).map_err(|e| e.to_string())?, 15)
                    .map_err(|e| e.to_string())?
                    .len(),
                15,
            ),
        ];
        let xx = Operator::new("XX", crate::linalg::kron(&x.matrix, &x.matrix));
        let zi = pauli(Axis::Z, 1, 2).map_err(|e| e.to_string())?;
        let iz = pauli(Axis::Z, 2, 2).map_err(|e| e.to_string())?;
        let zz = crate::linalg::kron(&z.matrix, &z.matrix);
        let encoded = Moos::new(vec![xx, zi, iz]).map_err(|e| e.to_string())?;
        let basis = lie_closure(&encoded, 15).map_err(|e| e.to_string())?;
        let residual = projection_residual(&basis, &zz);
        let commutes =
            encoded.elements().iter().all(|g| crate::linalg::spectral_norm(&g.matrix.commutator(&zz)) <= HERM_TOL);
        let ok = dims.iter().all(|(a, b)| a == b) && residual <= 1e-9 && commutes;
        let got: Vec<usize> = dims.iter().map(|d| d.0).collect();
        Ok((
            ok,
            format!("dims {got:?} (expect [1, 3, 3, 15]), encoded closure: ZZ residual {residual:.1e}, generators commute with ZZ: {commutes}"),
        ))
    })
}

fn pulse_shaping(settings: &Settings) -> Outcome {
    timed("10", "finite pulse shaping", 120, || {
        let design = design_pulse(Family::Symmetric(3), 1.0, 0).map_err(|e| e.to_string())?;
        let area_err = (design.shape.area() - std::f64::consts::FRAC_PI_2).abs();
        let eta_ok = design.eta.max_abs() <= DESIGN_TOL && area_err <= 1e-10;
        let (z, _) = qubit();
        let models = settings.models(Structure::General, 2)?;
        let scan = pulse_error_scan(&design.shape, &models, &z, &crate::pulseshape::default_tau_grid())
            .map_err(|e| e.to_string())?;
        let slope_ok = slope_in(scan.fits.first(), 1.8, 2.3);
        let tau = 0.01 / settings.norm_bound;
        let errs = |shape: &PulseShape| -> Result<f64, String> {
            let mut v: Vec<f64> = models
                .iter()
                .map(|m| pulse_error(&shape.with_duration(tau), m, &z).map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?;
            Ok(median(&mut v))
        };
        let designed = errs(&design.shape)?;
        let rect = errs(&PulseShape::rectangular(1.0))?;
        let ratio = rect / designed;
        Ok((
            eta_ok && slope_ok && ratio >= 10.0,
            format!(
                "|eta| max {:.1e} (tol 1e-10), area error {area_err:.1e}, {} in [1.8, 2.3], error at tau_p=0.01 designed {designed:.2e} vs rect {rect:.2e}, ratio {ratio:.0} (need >= 10)",
                design.eta.max_abs(),
                describe(scan.fits.first()),
            ),
        ))
    })
}

fn non_moos_partner() -> Operator {
    let x = pauli(Axis::X, 1, 1).expect("valid");
    let y = pauli(Axis::Y, 1, 1).expect("valid");
    Operator::new("R", (&x.matrix + &y.matrix).scale(C64::new(FRAC_1_SQRT_2, 0.0)))
}

fn frame_property(settings: &Settings) -> Outcome {
    timed("11", "free-block conjugation property", 60, || {
        let (z, x) = qubit();
        let r = non_moos_partner();
        let models = settings.models(Structure::General, 2)?;
        let ops = vec![z.clone()];
        let schedule = udd_schedule(&z, 2);
        let scan = |frame: BlockFrame| {
            order_scan_framed(&schedule, &ops, std::slice::from_ref(&z), &models, &settings.run, &frame)
                .map_err(|e| e.to_string())
        };
        let base = scan(BlockFrame::Plain)?;
        let by_x = scan(BlockFrame::Conjugated(x))?;
        let by_r = scan(BlockFrame::Conjugated(r))?;
        let b = base.slope("Z1");
        let same = matches!((b, by_x.slope("Z1")), (Some(a), Some(c)) if (a - c).abs() <= 0.3);
        let degraded = by_r.slope("Z1").is_some_and(|s| s <= 1.5);
        Ok((
            same && degraded,
            format!(
                "baseline {}, conjugated by X {} (within 0.3), conjugated by (X+Y)/sqrt2 {} (need <= 1.5)",
                describe(base.fit("Z1")),
                describe(by_x.fit("Z1")),
                describe(by_r.fit("Z1"))
            ),
        ))
    })
}

/// spin echo of a non-partner operator around a protecting sequence.
fn non_moos_echo(settings: &Settings) -> Outcome {
    timed("11b", "echo by a non-partner operator", 60, || {
        let (z, x) = qubit();
        let r = non_moos_partner();
        let models = settings.models(Structure::General, 2)?;
        let ops = vec![z.clone(), x.clone(), r.clone()];
        // Errors here are O(T), so the window sits well below the default grid.
        let run = RunConfig { t_grid: crate::simulate::log_spaced(1e-5, 5e-3, 12), ..settings.run.clone() };
        let scan = |inner: &Operator| {
            let s = echo_wrap(&udd_schedule(inner, 2), &r.label);
            order_scan(&s, &ops, std::slice::from_ref(inner), &models, &run).map_err(|e| e.to_string())
        };
        let x_run = scan(&x)?;
        let z_run = scan(&z)?;
        let x_ok = slope_in(x_run.fit("X1"), 0.7, 1.5);
        let z_ok = z_run.slope("Z1").is_some_and(|s| s >= 2.7);
        Ok((
            x_ok && z_ok,
            format!(
                "X-protecting: {} in [0.7, 1.5]; Z-protecting (partner): {} (need >= 2.7)",
                describe(x_run.fit("X1")),
                describe(z_run.fit("Z1"))
            ),
        ))
    })
}

/// Every criterion in order.
pub fn run_all(settings: &Settings) -> Vec<Outcome> {
    vec![
        udd_ladder(settings, &udd_times),
        first_order(settings),
        sdd(settings),
        cdd(settings),
        nudd_even(settings),
        odd_inner_counterexample(settings),
        pulse_counts(),
        moos_suites(),
        closure_dims(),
        pulse_shaping(settings),
        frame_property(settings),
        non_moos_echo(settings),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_vector_enumeration() {
        let product = |v: &[usize]| v.iter().map(|n| n + 1).product::<usize>();
        let vs = order_vectors(2, 6, &product);
        let mut sorted = vs.clone();
        sorted.sort();
        assert_eq!(sorted, vec![vec![1, 1], vec![1, 2], vec![2, 1]]);
        assert!(order_vectors(1, 1 << 10, &product).iter().all(|v| product(v) <= 1024));
        assert_eq!(order_vectors(1, 1 << 10, &product).len(), 1023);
    }

    #[test]
    fn custom_schedule_matches_builder() {
        let (z, _) = qubit();
        assert_eq!(udd_from_times(&z, 3, &udd_times), udd_schedule(&z, 3));
    }

    #[test]
    fn outcome_line_format() {
        let o = timed("7", "demo", 5, || Ok((true, "fine".into())));
        assert!(o.line().starts_with("[PASS]   7 demo: fine"));
        let o = timed("7", "demo", 5, || Err("boom".into()));
        assert!(!o.passed);
        assert!(o.line().contains("error: boom"));
    }

    #[test]
    fn non_partner_is_unitary_hermitian() {
        assert!(non_moos_partner().is_unitary_hermitian());
    }
}
