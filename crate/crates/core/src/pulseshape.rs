//! Finite-amplitude π pulses `H_Ω(t) = v(t) Ω` with piecewise-constant
//! envelopes, the first-order error integrals `η₁₁`, `η₁₂`, a root finder
//! that zeroes both, and a numerical check of the residual error scaling.
//!
//! With `A(t) = ∫₀ᵗ v`, the phases are `ψ(t) = 2(A(t) − A(τ_s))` and
//! `φ₀ = A(τ_p) − 2A(τ_s)`, and
//!
//! ```text
//! η₁₁ = ∫₀^τp (t − τ_s) v(t) cos(φ₀ − ψ(t)) dt
//! η₁₂ = ∫₀^τp (t − τ_s) v(t) sin(φ₀ − ψ(t)) dt
//! ```

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{kron, spectral_norm, CMatrix, HermitianEigen, LinalgError, C64};
use crate::model::{HamiltonianModel, ModelError};
use crate::operators::Operator;
use crate::simulate::{summarize, Sample, ScalingResult, SimError};
use crate::tolerance::{DESIGN_TOL, ERROR_CEILING, ERROR_FLOOR, QUAD_TOL, STEP_HALVING_TOL};

pub const NEWTON_MAX_ITERS: usize = 200;
pub const NEWTON_RESTARTS: usize = 20;
/// Minimum integrator steps over one pulse.
pub const MIN_STEPS: usize = 1000;
const LEN_FRAC_TOL: f64 = 1e-12;
const AREA_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PulseError {
    #[error("invalid pulse shape: {0}")]
    BadShape(String),
    #[error("unknown envelope family {0:?} (expected rect, sym<n> or asym<n>)")]
    UnknownFamily(String),
    #[error("family {family} has {free} free parameters, needs {needed}; residual at area pi/2 is {residual:.3e}")]
    TooFewParameters { family: Family, free: usize, needed: usize, residual: f64 },
    #[error("no root for {family}: best residual {residual:.3e} after {restarts} restarts")]
    NoRoot { family: Family, residual: f64, restarts: usize },
    #[error("integrator not converged at tau_p = {tau_p}: step halving changed the result by {discrepancy:.3e}")]
    StepHalving { tau_p: f64, discrepancy: f64 },
    #[error("omega has dimension {omega}, model system dimension is {sys}")]
    Dimension { omega: usize, sys: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub len_frac: f64,
    pub amp: f64,
}

/// Piecewise-constant envelope: segment `k` lasts `len_frac · τ_p` at amplitude `amp`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseShape {
    pub tau_p: f64,
    pub tau_s: f64,
    pub segments: Vec<Segment>,
}

impl PulseShape {
    /// Equal-length segments, centered at `τ_p / 2`.
    pub fn equal_segments(tau_p: f64, amps: &[f64]) -> Self {
        let frac = 1.0 / amps.len() as f64;
        Self { tau_p, tau_s: 0.5 * tau_p, segments: amps.iter().map(|&amp| Segment { len_frac: frac, amp }).collect() }
    }

    /// Constant amplitude `π / (2τ_p)`.
    pub fn rectangular(tau_p: f64) -> Self {
        Self::equal_segments(tau_p, &[FRAC_PI_2 / tau_p])
    }

    pub fn area(&self) -> f64 {
        self.segments.iter().map(|s| s.amp * s.len_frac * self.tau_p).sum()
    }

    /// `(start, end, amp)` of each segment in absolute time.
    pub fn breakpoints(&self) -> Vec<(f64, f64, f64)> {
        let mut t = 0.0;
        let n = self.segments.len();
        self.segments
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let start = t;
                t = if k + 1 == n { self.tau_p } else { t + s.len_frac * self.tau_p };
                (start, t, s.amp)
            })
            .collect()
    }

    pub fn envelope(&self, t: f64) -> f64 {
        self.breakpoints().iter().find(|(_, end, _)| t < *end).map_or(0.0, |s| s.2)
    }

    /// `A(t) = ∫₀ᵗ v`.
    pub fn cumulative_area(&self, t: f64) -> f64 {
        self.breakpoints().iter().map(|&(a, b, amp)| amp * (t.min(b) - a).max(0.0)).sum()
    }

    pub fn phi0(&self) -> f64 {
        self.cumulative_area(self.tau_p) - 2.0 * self.cumulative_area(self.tau_s)
    }

    /// Same shape stretched to duration `tau_p`, amplitudes rescaled to keep the area.
    pub fn with_duration(&self, tau_p: f64) -> Self {
        let r = self.tau_p / tau_p;
        Self {
            tau_p,
            tau_s: self.tau_s / r,
            segments: self.segments.iter().map(|s| Segment { len_frac: s.len_frac, amp: s.amp * r }).collect(),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.segments.len();
        (self.tau_s - 0.5 * self.tau_p).abs() <= 1e-15 * self.tau_p
            && (0..n / 2).all(|k| self.segments[k] == self.segments[n - 1 - k])
    }

    pub fn validate(&self) -> Result<(), PulseError> {
        if !(self.tau_p.is_finite() && self.tau_p > 0.0) {
            return Err(PulseError::BadShape(format!("tau_p must be positive, got {}", self.tau_p)));
        }
        if !(0.0..=self.tau_p).contains(&self.tau_s) {
            return Err(PulseError::BadShape(format!("tau_s {} outside [0, tau_p]", self.tau_s)));
        }
        if self.segments.is_empty() {
            return Err(PulseError::BadShape("no segments".into()));
        }
        if self.segments.iter().any(|s| !(s.len_frac > 0.0 && s.amp.is_finite())) {
            return Err(PulseError::BadShape("segments need len_frac > 0 and finite amp".into()));
        }
        let total: f64 = self.segments.iter().map(|s| s.len_frac).sum();
        if (total - 1.0).abs() > LEN_FRAC_TOL {
            return Err(PulseError::BadShape(format!("len_frac values sum to {total}, expected 1")));
        }
        let area = self.area();
        if (area - FRAC_PI_2).abs() > AREA_TOL {
            return Err(PulseError::BadShape(format!("area {area} is not pi/2")));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, PulseError> {
        let shape: Self = serde_json::from_str(text).map_err(|e| PulseError::BadShape(e.to_string()))?;
        shape.validate()?;
        Ok(shape)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pulse shape serializes")
    }

    /// `e^{-i·area·Ω} = cos(area) I − i sin(area) Ω`.
    pub fn ideal_pulse(&self, omega: &CMatrix) -> CMatrix {
        let area = self.area();
        let mut p = CMatrix::identity(omega.dim()).scale_real(area.cos());
        p.axpy(C64::new(0.0, -area.sin()), omega);
        p
    }
}

/// First-order error integrals of a pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eta {
    pub eta11: f64,
    pub eta12: f64,
}

impl Eta {
    pub fn max_abs(&self) -> f64 {
        self.eta11.abs().max(self.eta12.abs())
    }
}

const GL_NODES: [f64; 3] = [0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664];
const GL_WEIGHTS: [f64; 3] = [0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1];

/// 5-point Gauss–Legendre rule on `[a, b]`.
fn gauss5(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut s = GL_WEIGHTS[0] * f(m);
    for k in 1..3 {
        s += GL_WEIGHTS[k] * (f(m - h * GL_NODES[k]) + f(m + h * GL_NODES[k]));
    }
    s * h
}

/// Closed-form per-segment antiderivatives.
pub fn eta_integrals(shape: &PulseShape) -> Eta {
    let (tau_s, phi0) = (shape.tau_s, shape.phi0());
    let a_s = shape.cumulative_area(tau_s);
    let mut eta = Eta { eta11: 0.0, eta12: 0.0 };
    let mut area = 0.0;
    for (t0, t1, a) in shape.breakpoints() {
        // θ(t) = φ₀ − ψ(t) is linear on the segment with slope −2a.
        let theta0 = phi0 - 2.0 * (area - a_s);
        let theta = |t: f64| theta0 - 2.0 * a * (t - t0);
        if a == 0.0 {
        } else if (a * (t1 - t0)).abs() < 1e-2 {
            // Closed form cancels badly when the phase barely moves.
            eta.eta11 += gauss5(|t| (t - tau_s) * a * theta(t).cos(), t0, t1);
            eta.eta12 += gauss5(|t| (t - tau_s) * a * theta(t).sin(), t0, t1);
        } else {
            let c = |t: f64| -0.5 * (t - tau_s) * theta(t).sin() + theta(t).cos() / (4.0 * a);
            let s = |t: f64| 0.5 * (t - tau_s) * theta(t).cos() + theta(t).sin() / (4.0 * a);
            eta.eta11 += c(t1) - c(t0);
            eta.eta12 += s(t1) - s(t0);
        }
        area += a * (t1 - t0);
    }
    eta
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    // Endpoints are passed as (x, f(x)) pairs.
    fn rec(
        f: &dyn Fn(f64) -> f64,
        (a, fa): (f64, f64),
        fm: f64,
        (b, fb): (f64, f64),
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, (a, fa), flm, (m, fm), left, 0.5 * tol, depth - 1)
                + rec(f, (m, fm), frm, (b, fb), right, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, (a, fa), fm, (b, fb), whole, tol, 40)
}

/// Adaptive Simpson quadrature of the defining integrals, split at segment edges.
pub fn eta_integrals_quadrature(shape: &PulseShape) -> Eta {
    let (tau_s, phi0) = (shape.tau_s, shape.phi0());
    let a_s = shape.cumulative_area(tau_s);
    let psi = |t: f64| 2.0 * (shape.cumulative_area(t) - a_s);
    let pieces = shape.breakpoints();
    let tol = QUAD_TOL / pieces.len() as f64;
    let mut eta = Eta { eta11: 0.0, eta12: 0.0 };
    for &(t0, t1, amp) in &pieces {
        let fc = |t: f64| (t - tau_s) * amp * (phi0 - psi(t)).cos();
        let fs = |t: f64| (t - tau_s) * amp * (phi0 - psi(t)).sin();
        eta.eta11 += adaptive_simpson(&fc, t0, t1, tol);
        eta.eta12 += adaptive_simpson(&fs, t0, t1, tol);
    }
    eta
}

/// Envelope family searched by [`design_pulse`]. Segments have equal length
/// and `τ_s = τ_p / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Rect,
    /// Palindromic amplitudes over `n` segments.
    Symmetric(usize),
    /// Independent amplitudes over `n` segments.
    Asymmetric(usize),
}

impl Family {
    /// Independent amplitudes.
    pub fn n_params(self) -> usize {
        match self {
            Family::Rect => 1,
            Family::Symmetric(n) => n.div_ceil(2),
            Family::Asymmetric(n) => n,
        }
    }

    /// Conditions to satisfy: area, then `η₁₂`, plus `η₁₁` unless symmetry fixes it.
    fn n_conditions(self) -> usize {
        match self {
            Family::Asymmetric(_) => 3,
            _ => 2,
        }
    }

    fn amps(self, params: &[f64]) -> Vec<f64> {
        match self {
            Family::Rect | Family::Asymmetric(_) => params.to_vec(),
            Family::Symmetric(n) => (0..n).map(|k| params[k.min(n - 1 - k)]).collect(),
        }
    }

    fn params(self, shape: &PulseShape) -> Vec<f64> {
        shape.segments.iter().take(self.n_params()).map(|s| s.amp).collect()
    }

    pub fn shape(self, params: &[f64]) -> PulseShape {
        PulseShape::equal_segments(1.0, &self.amps(params))
    }

    fn residual(self, params: &[f64]) -> Vec<f64> {
        let shape = self.shape(params);
        let eta = eta_integrals(&shape);
        let mut r = vec![shape.area() - FRAC_PI_2, eta.eta12];
        if self.n_conditions() == 3 {
            r.push(eta.eta11);
        }
        r
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Rect => write!(f, "rect"),
            Family::Symmetric(n) => write!(f, "sym{n}"),
            Family::Asymmetric(n) => write!(f, "asym{n}"),
        }
    }
}

impl FromStr for Family {
    type Err = PulseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PulseError::UnknownFamily(s.to_string());
        let count = |digits: &str| digits.parse::<usize>().ok().filter(|n| (1..=64).contains(n)).ok_or_else(bad);
        if s == "rect" {
            Ok(Family::Rect)
        } else if let Some(d) = s.strip_prefix("asym") {
            Ok(Family::Asymmetric(count(d)?))
        } else if let Some(d) = s.strip_prefix("sym") {
            Ok(Family::Symmetric(count(d)?))
        } else {
            Err(bad())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub shape: PulseShape,
    pub eta: Eta,
    pub iterations: usize,
    pub restarts: usize,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solve `J x = b` for small dense systems by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let (top, bottom) = a.split_at_mut(row);
            for (x, p) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Minimum-norm (or least-squares) Newton step `−J⁺ r`.
fn newton_step(jac: &[Vec<f64>], r: &[f64]) -> Option<Vec<f64>> {
    let (m, n) = (jac.len(), jac[0].len());
    if n >= m {
        let jjt: Vec<Vec<f64>> =
            (0..m).map(|i| (0..m).map(|j| (0..n).map(|k| jac[i][k] * jac[j][k]).sum()).collect()).collect();
        let y = solve(jjt, r.iter().map(|x| -x).collect())?;
        Some((0..n).map(|k| (0..m).map(|i| jac[i][k] * y[i]).sum()).collect())
    } else {
        let jtj: Vec<Vec<f64>> =
            (0..n).map(|i| (0..n).map(|j| (0..m).map(|k| jac[k][i] * jac[k][j]).sum()).collect()).collect();
        let jtr: Vec<f64> = (0..n).map(|i| -(0..m).map(|k| jac[k][i] * r[k]).sum::<f64>()).collect();
        solve(jtj, jtr)
    }
}

/// Damped Newton from `start`. Returns parameters, residual and iterations used.
fn newton(family: Family, start: &[f64], tol: f64) -> (Vec<f64>, Vec<f64>, usize) {
    let mut x = start.to_vec();
    let mut r = family.residual(&x);
    for iter in 0..NEWTON_MAX_ITERS {
        if max_abs(&r) <= tol {
            return (x, r, iter);
        }
        let jac: Vec<Vec<f64>> = {
            let cols: Vec<Vec<f64>> = (0..x.len())
                .map(|k| {
                    let h = 1e-7 * x[k].abs().max(1.0);
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[k] += h;
                    xm[k] -= h;
                    let (rp, rm) = (family.residual(&xp), family.residual(&xm));
                    rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect()
                })
                .collect();
            (0..r.len()).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
        };
        let Some(step) = newton_step(&jac, &r) else {
            return (x, r, iter);
        };
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let current = norm(&r);
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a + lambda * s).collect();
            let rt = family.residual(&trial);
            if norm(&rt) < current || lambda < 1e-6 {
                x = trial;
                r = rt;
                break;
            }
            lambda *= 0.5;
        }
    }
    (x, r, NEWTON_MAX_ITERS)
}

/// Find amplitudes with area `π/2` and `η₁₁ = η₁₂ = 0`, then stretch to `tau_p`.
/// Restarts are drawn from a generator seeded with `seed`.
pub fn design_pulse(family: Family, tau_p: f64, seed: u64) -> Result<Design, PulseError> {
    if !(tau_p.is_finite() && tau_p > 0.0) {
        return Err(PulseError::BadShape(format!("tau_p must be positive, got {tau_p}")));
    }
    let needed = family.n_conditions();
    if family.n_params() < needed {
        let residual = max_abs(&family.residual(&vec![FRAC_PI_2; family.n_params()]));
        return Err(PulseError::TooFewParameters { family, free: family.n_params(), needed, residual });
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for restart in 0..NEWTON_RESTARTS {
        let start: Vec<f64> = (0..family.n_params())
            .map(|_| if restart == 0 { FRAC_PI_2 + rng.random_range(-0.5..0.5) } else { rng.random_range(-10.0..10.0) })
            .collect();
        let (x, r, iterations) = newton(family, &start, 0.1 * DESIGN_TOL);
        let res = max_abs(&r);
        if res <= 0.1 * DESIGN_TOL {
            let shape = family.shape(&x).with_duration(tau_p);
            let eta = eta_integrals(&shape);
            return Ok(Design { shape, eta, iterations, restarts: restart });
        }
        if res.is_finite() {
            best = best.min(res);
        }
    }
    Err(PulseError::NoRoot { family, residual: best, restarts: NEWTON_RESTARTS })
}

/// Newton iterations needed to re-converge from an existing shape.
pub fn refine_iterations(family: Family, shape: &PulseShape) -> usize {
    let unit = shape.with_duration(1.0);
    newton(family, &family.params(&unit), 0.1 * DESIGN_TOL).2
}

fn check_dims(model: &HamiltonianModel, omega: &Operator) -> Result<(), PulseError> {
    if omega.dim() != model.sys_dim {
        return Err(PulseError::Dimension { omega: omega.dim(), sys: model.sys_dim });
    }
    Ok(())
}

/// Midpoint-exponential product over `steps` steps aligned to segment edges.
fn integrate(shape: &PulseShape, h: &CMatrix, big_omega: &CMatrix, steps: usize) -> Result<CMatrix, PulseError> {
    let mut u = CMatrix::identity(h.dim());
    for (t0, t1, amp) in shape.breakpoints() {
        let n = ((steps as f64) * (t1 - t0) / shape.tau_p).ceil().max(1.0) as usize;
        let dt = (t1 - t0) / n as f64;
        // Piecewise-constant v makes every midpoint in a segment see the same generator.
        let mut k = h.clone();
        k.axpy(C64::new(amp, 0.0), big_omega);
        let step = HermitianEigen::new(&k)?.evolution(dt);
        for _ in 0..n {
            u = &step * &u;
        }
    }
    Ok(u)
}

/// `‖U(τ_p) − e^{-i(τ_p−τ_s)H} (P⊗I) e^{-iτ_s H}‖` with step-halving verification.
pub fn pulse_error(shape: &PulseShape, model: &HamiltonianModel, omega: &Operator) -> Result<f64, PulseError> {
    shape.validate()?;
    check_dims(model, omega)?;
    let big_omega = model.lift(omega)?;
    let h = &model.h_total;
    let coarse = integrate(shape, h, &big_omega, MIN_STEPS)?;
    let fine = integrate(shape, h, &big_omega, 2 * MIN_STEPS)?;
    let discrepancy = spectral_norm(&(&coarse - &fine));
    if discrepancy > STEP_HALVING_TOL {
        return Err(PulseError::StepHalving { tau_p: shape.tau_p, discrepancy });
    }
    let eig = HermitianEigen::new(h)?;
    let p = kron(&shape.ideal_pulse(&omega.matrix), &CMatrix::identity(model.bath_dim));
    let ideal = &(&eig.evolution(shape.tau_p - shape.tau_s) * &p) * &eig.evolution(shape.tau_s);
    Ok(spectral_norm(&(&fine - &ideal)))
}

/// Default pulse-duration grid for `‖H‖ = 1`.
pub fn default_tau_grid() -> Vec<f64> {
    crate::simulate::log_spaced(1e-3, 0.05, 12)
}

/// Pulse error over `tau_grid` for every model, with a log-log fit of the
/// median error against `τ_p`.
pub fn pulse_error_scan(
    shape: &PulseShape,
    models: &[HamiltonianModel],
    omega: &Operator,
    tau_grid: &[f64],
) -> Result<ScalingResult, PulseError> {
    if models.is_empty() {
        return Err(SimError::NoModels.into());
    }
    if tau_grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) || tau_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SimError::BadGrid("tau grid must be positive and strictly increasing".into()).into());
    }
    let tasks: Vec<(usize, usize)> =
        (0..tau_grid.len()).flat_map(|ti| (0..models.len()).map(move |si| (ti, si))).collect();
    let errors: Vec<f64> = tasks
        .par_iter()
        .map(|&(ti, si)| pulse_error(&shape.with_duration(tau_grid[ti]), &models[si], omega))
        .collect::<Result<_, _>>()?;
    let samples = tasks
        .iter()
        .zip(&errors)
        .map(|(&(ti, si), &error)| Sample {
            t: tau_grid[ti],
            seed: models[si].seed,
            operator: omega.label.clone(),
            error,
        })
        .collect();
    let by_time: Vec<Vec<f64>> = errors.chunks(models.len()).map(<[f64]>::to_vec).collect();
    let fit = summarize(&omega.label, tau_grid, &by_time, ERROR_FLOOR, ERROR_CEILING);
    Ok(ScalingResult { samples, fits: vec![fit] })
}

/// `η₁₂ = −τ_p/π` for the rectangular pulse.
pub fn rectangular_eta12(tau_p: f64) -> f64 {
    -tau_p / PI
}
