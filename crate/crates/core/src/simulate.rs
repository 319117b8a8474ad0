//! Controlled propagators, the operator-preservation error, and decoupling
//! order estimates from log-log fits over the total time `T`.
//!
//! Propagation runs in the eigenbasis of the model Hamiltonian: free
//! evolution is then a diagonal phase and each pulse is a dense matrix
//! pre-rotated once per scan. Pulses are instantaneous `Ω ⊗ I_bath`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{kron, spectral_norm, CMatrix, HermitianEigen, LinalgError, C64};
use crate::model::{HamiltonianModel, ModelError};
use crate::operators::Operator;
use crate::sequences::{net_pulse_operator, OperatorLookup, Schedule, SequenceError};
use crate::tolerance::{ERROR_CEILING, ERROR_FLOOR, FIT_MIN_POINTS, FIT_RMS_MAX};

/// Upper bound on `intervals × |t_grid| × seeds` for one scan.
pub const MAX_SCAN_EXPONENTIALS: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("scan budget exceeded: {intervals} intervals x {points} times x {seeds} seeds > {MAX_SCAN_EXPONENTIALS}")]
    Budget { intervals: usize, points: usize, seeds: usize },
    #[error("log-log fit needs at least 2 points inside ({floor:.1e}, {ceiling:.1e}), found {found}")]
    TooFewPoints { found: usize, floor: f64, ceiling: f64 },
    #[error("invalid time grid: {0}")]
    BadGrid(String),
    #[error("no models supplied")]
    NoModels,
    #[error("operator dimension {got} does not divide propagator dimension {total}")]
    DimensionMismatch { got: usize, total: usize },
}

/// Time grid and fit filters for an order scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub t_grid: Vec<f64>,
    /// One random model per seed.
    pub seeds: Vec<u64>,
    pub error_floor: f64,
    pub error_ceiling: f64,
}

impl Default for RunConfig {
    /// 12 log-spaced times in `[0.02, 0.6]`, suited to `‖H‖ = 1`, and seeds 0..8.
    fn default() -> Self {
        Self {
            t_grid: log_spaced(0.02, 0.6, 12),
            seeds: (0..8).collect(),
            error_floor: ERROR_FLOOR,
            error_ceiling: ERROR_CEILING,
        }
    }
}

impl RunConfig {
    pub fn with_grid(t_min: f64, t_max: f64, points: usize) -> Self {
        Self { t_grid: log_spaced(t_min, t_max, points), ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.t_grid.len() < 2 {
            return Err(SimError::BadGrid("need at least two times".into()));
        }
        if self.t_grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(SimError::BadGrid("times must be positive and finite".into()));
        }
        if self.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SimError::BadGrid("times must be strictly increasing".into()));
        }
        if self.seeds.is_empty() {
            return Err(SimError::NoModels);
        }
        if !(self.error_floor >= 0.0 && self.error_ceiling > self.error_floor) {
            return Err(SimError::BadGrid("need 0 <= floor < ceiling".into()));
        }
        Ok(())
    }
}

pub fn log_spaced(min: f64, max: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && min > 0.0 && max > min);
    let (a, b) = (min.ln(), max.ln());
    (0..n).map(|k| if k == n - 1 { max } else { (a + (b - a) * k as f64 / (n - 1) as f64).exp() }).collect()
}

/// Ordinary least-squares line through `(ln T, ln ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    pub points_used: usize,
}

/// Fit `ln ε = slope · ln T + intercept` over points with `floor < ε < ceiling`.
pub fn fit_loglog(points: &[(f64, f64)], floor: f64, ceiling: f64) -> Result<LogLogFit, SimError> {
    let kept: Vec<(f64, f64)> =
        points.iter().filter(|(t, e)| *t > 0.0 && *e > floor && *e < ceiling).map(|(t, e)| (t.ln(), e.ln())).collect();
    if kept.len() < 2 {
        return Err(SimError::TooFewPoints { found: kept.len(), floor, ceiling });
    }
    let n = kept.len() as f64;
    let mx = kept.iter().map(|p| p.0).sum::<f64>() / n;
    let my = kept.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = kept.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = kept.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(SimError::BadGrid("all surviving points share one time".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = kept.iter().map(|p| (p.1 - (slope * p.0 + intercept)).powi(2)).sum();
    Ok(LogLogFit { slope, intercept, rms_residual: (rss / n).sqrt(), points_used: kept.len() })
}

/// Model Hamiltonian and pulses pre-rotated into the Hamiltonian eigenbasis.
pub struct Propagator {
    eig: HermitianEigen,
    bath_dim: usize,
    /// Pulses of each event, composed and rotated: `V† (P ⊗ I) V`.
    event_pulses: Vec<CMatrix>,
    closing: Option<CMatrix>,
    lengths: Vec<f64>,
    frame: Option<CMatrix>,
}

impl Propagator {
    pub fn new<L: OperatorLookup + ?Sized>(
        schedule: &Schedule,
        model: &HamiltonianModel,
        ops: &L,
    ) -> Result<Self, SimError> {
        let eig = HermitianEigen::new(&model.h_total)?;
        Self::with_eigen(schedule, model, eig, ops)
    }

    fn with_eigen<L: OperatorLookup + ?Sized>(
        schedule: &Schedule,
        model: &HamiltonianModel,
        eig: HermitianEigen,
        ops: &L,
    ) -> Result<Self, SimError> {
        let v = &eig.vectors;
        let vd = v.adjoint();
        let compose = |labels: &[String]| -> Result<Option<CMatrix>, SimError> {
            let mut acc: Option<CMatrix> = None;
            for label in labels {
                let op = ops.lookup(label).ok_or_else(|| SequenceError::UnresolvedLabel(label.clone()))?;
                let lifted = model.lift(op)?;
                acc = Some(match acc {
                    None => lifted,
                    Some(a) => &lifted * &a,
                });
            }
            Ok(acc.map(|p| &(&vd * &p) * v))
        };
        let mut event_pulses = Vec::with_capacity(schedule.events.len());
        for e in &schedule.events {
            event_pulses.push(compose(&e.ops)?.unwrap_or_else(|| CMatrix::identity(model.dim())));
        }
        let closing = compose(&schedule.closing)?;
        Ok(Self {
            eig,
            bath_dim: model.bath_dim,
            event_pulses,
            closing,
            lengths: schedule.interval_lengths(),
            frame: None,
        })
    }

    /// Replace every free block `e^{-iHτ}` by `F e^{-iHτ} F` (`F` a system operator).
    pub fn with_frame(mut self, frame: &Operator) -> Self {
        let lifted = kron(&frame.matrix, &CMatrix::identity(self.bath_dim));
        let v = &self.eig.vectors;
        self.frame = Some(&(&v.adjoint() * &lifted) * v);
        self
    }

    fn free_step(&self, w: &mut CMatrix, tau: f64) {
        let n = w.dim();
        for (i, &lambda) in self.eig.values.iter().enumerate() {
            let phase = C64::from_polar(1.0, -lambda * tau);
            for j in 0..n {
                w[(i, j)] *= phase;
            }
        }
    }

    /// Full propagator at total time `t_total`.
    pub fn at(&self, t_total: f64) -> CMatrix {
        let n = self.eig.vectors.dim();
        let mut w = CMatrix::identity(n);
        for (k, len) in self.lengths.iter().enumerate() {
            match &self.frame {
                Some(f) => {
                    w = f * &w;
                    self.free_step(&mut w, len * t_total);
                    w = f * &w;
                }
                None => self.free_step(&mut w, len * t_total),
            }
            if let Some(p) = self.event_pulses.get(k) {
                w = p * &w;
            }
        }
        if let Some(c) = &self.closing {
            w = c * &w;
        }
        let v = &self.eig.vectors;
        &(v * &w) * &v.adjoint()
    }
}

/// Controlled propagator over total time `t_total`.
pub fn propagate<L: OperatorLookup + ?Sized>(
    schedule: &Schedule,
    model: &HamiltonianModel,
    ops: &L,
    t_total: f64,
) -> Result<CMatrix, SimError> {
    Ok(Propagator::new(schedule, model, ops)?.at(t_total))
}

/// `‖U†(Ω⊗I)U − P†(Ω⊗I)P‖`, with `P = net_pulse ⊗ I`.
pub fn preservation_error(u: &CMatrix, omega: &Operator, net_pulse: &Operator) -> Result<f64, SimError> {
    let (d, total) = (omega.dim(), u.dim());
    if d == 0 || total % d != 0 || net_pulse.dim() != d {
        return Err(SimError::DimensionMismatch { got: d, total });
    }
    let id = CMatrix::identity(total / d);
    let big = kron(&omega.matrix, &id);
    let p = kron(&net_pulse.matrix, &id);
    Ok(lifted_error(u, &big, &p))
}

fn lifted_error(u: &CMatrix, big_omega: &CMatrix, p: &CMatrix) -> f64 {
    let actual = &(&u.adjoint() * big_omega) * u;
    let ideal = &(&p.adjoint() * big_omega) * p;
    spectral_norm(&(&actual - &ideal))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub seed: u64,
    pub operator: String,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FitStatus {
    Fitted,
    /// Every median error at or below the floor: an exact symmetry.
    Exact,
    Unfittable {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorFit {
    pub operator: String,
    #[serde(flatten)]
    pub status: FitStatus,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub rms_residual: Option<f64>,
    pub points_used: usize,
    /// `(T, median error over seeds)`.
    pub medians: Vec<(f64, f64)>,
}

impl OperatorFit {
    pub fn is_fitted(&self) -> bool {
        matches!(self.status, FitStatus::Fitted)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub samples: Vec<Sample>,
    pub fits: Vec<OperatorFit>,
}

impl ScalingResult {
    pub fn fit(&self, operator: &str) -> Option<&OperatorFit> {
        self.fits.iter().find(|f| f.operator == operator)
    }

    pub fn slope(&self, operator: &str) -> Option<f64> {
        self.fit(operator).and_then(|f| f.slope)
    }

    pub fn all_fitted(&self) -> bool {
        self.fits.iter().all(|f| !matches!(f.status, FitStatus::Unfittable { .. }))
    }
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Median over seeds per time, then the log-log fit.
pub(crate) fn summarize(
    operator: &str,
    t_grid: &[f64],
    errors_by_time: &[Vec<f64>],
    floor: f64,
    ceiling: f64,
) -> OperatorFit {
    let medians: Vec<(f64, f64)> =
        t_grid.iter().zip(errors_by_time).map(|(&t, errs)| (t, median(&mut errs.clone()))).collect();
    let mut out = OperatorFit {
        operator: operator.to_string(),
        status: FitStatus::Fitted,
        slope: None,
        intercept: None,
        rms_residual: None,
        points_used: 0,
        medians: medians.clone(),
    };
    if medians.iter().all(|&(_, e)| e <= floor) {
        out.status = FitStatus::Exact;
        return out;
    }
    match fit_loglog(&medians, floor, ceiling) {
        Err(e) => out.status = FitStatus::Unfittable { reason: e.to_string() },
        Ok(fit) => {
            out.points_used = fit.points_used;
            if fit.points_used < FIT_MIN_POINTS || fit.rms_residual > FIT_RMS_MAX {
                out.status = FitStatus::Unfittable {
                    reason: format!(
                        "fit rejected: {} points (need {}), rms {:.3} (max {}), tentative slope {:.3}",
                        fit.points_used, FIT_MIN_POINTS, fit.rms_residual, FIT_RMS_MAX, fit.slope
                    ),
                };
            } else {
                out.slope = Some(fit.slope);
                out.intercept = Some(fit.intercept);
                out.rms_residual = Some(fit.rms_residual);
            }
        }
    }
    out
}

/// How each free block is treated during a scan.
#[derive(Debug, Clone, Default)]
pub enum BlockFrame {
    #[default]
    Plain,
    /// Conjugate every free block by this system operator.
    Conjugated(Operator),
}

/// Sweep `T` over the grid for every model and fit the preservation error of
/// each target operator. Work is parallel over `(T, model)`; results are
/// assembled in grid order, so output does not depend on scheduling.
pub fn order_scan<L: OperatorLookup + Sync + ?Sized>(
    schedule: &Schedule,
    ops: &L,
    targets: &[Operator],
    models: &[HamiltonianModel],
    config: &RunConfig,
) -> Result<ScalingResult, SimError> {
    order_scan_framed(schedule, ops, targets, models, config, &BlockFrame::Plain)
}

pub fn order_scan_framed<L: OperatorLookup + Sync + ?Sized>(
    schedule: &Schedule,
    ops: &L,
    targets: &[Operator],
    models: &[HamiltonianModel],
    config: &RunConfig,
    frame: &BlockFrame,
) -> Result<ScalingResult, SimError> {
    config.validate()?;
    schedule.validate()?;
    if models.is_empty() {
        return Err(SimError::NoModels);
    }
    let work = schedule.intervals.saturating_mul(config.t_grid.len()).saturating_mul(models.len());
    if work > MAX_SCAN_EXPONENTIALS {
        return Err(SimError::Budget {
            intervals: schedule.intervals,
            points: config.t_grid.len(),
            seeds: models.len(),
        });
    }

    let net = net_pulse_operator(schedule, ops)?;
    let props = models
        .par_iter()
        .map(|m| {
            let p = Propagator::new(schedule, m, ops)?;
            let p = match frame {
                BlockFrame::Plain => p,
                BlockFrame::Conjugated(f) => p.with_frame(f),
            };
            let lifted: Vec<CMatrix> = targets.iter().map(|t| m.lift(t)).collect::<Result<_, _>>()?;
            let net_lifted = m.lift(&net)?;
            Ok((p, lifted, net_lifted))
        })
        .collect::<Result<Vec<_>, SimError>>()?;

    let tasks: Vec<(usize, usize)> =
        (0..config.t_grid.len()).flat_map(|ti| (0..models.len()).map(move |si| (ti, si))).collect();
    let errors: Vec<Vec<f64>> = tasks
        .par_iter()
        .map(|&(ti, si)| {
            let (prop, lifted, net_lifted) = &props[si];
            let u = prop.at(config.t_grid[ti]);
            lifted.iter().map(|o| lifted_error(&u, o, net_lifted)).collect()
        })
        .collect();

    let mut samples = Vec::with_capacity(tasks.len() * targets.len());
    for (k, target) in targets.iter().enumerate() {
        for (&(ti, si), errs) in tasks.iter().zip(&errors) {
            samples.push(Sample {
                t: config.t_grid[ti],
                seed: models[si].seed,
                operator: target.label.clone(),
                error: errs[k],
            });
        }
    }
    let fits = targets
        .iter()
        .enumerate()
        .map(|(k, target)| {
            let by_time: Vec<Vec<f64>> = (0..config.t_grid.len())
                .map(|ti| (0..models.len()).map(|si| errors[ti * models.len() + si][k]).collect())
                .collect();
            summarize(&target.label, &config.t_grid, &by_time, config.error_floor, config.error_ceiling)
        })
        .collect();
    Ok(ScalingResult { samples, fits })
}
