//! Dense complex matrices sized for small system ⊗ bath problems.
//!
//! Everything here works on row-major `dim × dim` storage. The only
//! decomposition is a cyclic Jacobi eigensolver for Hermitian matrices, which
//! backs both the matrix exponential and the spectral norm.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use thiserror::Error;

use crate::tolerance::{HERM_TOL, JACOBI_OFF_TOL};

pub type C64 = Complex64;

const MAX_JACOBI_SWEEPS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not Hermitian: max |h - h†| = {deviation:.3e} exceeds {tolerance:.1e}")]
    NotHermitian { deviation: f64, tolerance: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("expected {expected} entries for a {dim}x{dim} matrix, got {got}")]
    BadEntryCount { dim: usize, expected: usize, got: usize },
    #[error("matrix dimension must be at least 1")]
    EmptyMatrix,
}

/// Square complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        Self { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_vec(dim: usize, data: Vec<C64>) -> Result<Self, LinalgError> {
        if dim == 0 {
            return Err(LinalgError::EmptyMatrix);
        }
        if data.len() != dim * dim {
            return Err(LinalgError::BadEntryCount { dim, expected: dim * dim, got: data.len() });
        }
        Ok(Self { dim, data })
    }

    /// Build from real rows; convenient for Pauli-style literals.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        Self::from_fn(dim, |i, j| {
            assert_eq!(rows[i].len(), dim, "rows must form a square matrix");
            C64::new(rows[i][j], 0.0)
        })
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max-abs entry of `self - self†`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// `(self + self†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    /// Trace inner product `Tr(A†B) / dim`, dimension-normalized.
    pub fn inner(&self, other: &Self) -> C64 {
        check_same_dim(self, other);
        let s: C64 = self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum();
        s / self.dim as f64
    }

    /// Remove the identity component, `A - Tr(A)/d · I`.
    pub fn traceless_part(&self) -> Self {
        let shift = self.trace() / self.dim as f64;
        let mut m = self.clone();
        for i in 0..self.dim {
            m[(i, i)] -= shift;
        }
        m
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: C64, other: &Self) {
        check_same_dim(self, other);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    fn matmul_into(&self, rhs: &Self, out: &mut Self) {
        check_same_dim(self, rhs);
        let n = self.dim;
        out.data.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for (k, a) in row.iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let rhs_row = &rhs.data[k * n..(k + 1) * n];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
    }
}

fn check_same_dim(a: &CMatrix, b: &CMatrix) {
    assert_eq!(a.dim, b.dim, "matrix dimension mismatch");
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim);
        self.matmul_into(rhs, &mut out);
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        check_same_dim(self, rhs);
        CMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        check_same_dim(self, rhs);
        CMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product with `a`'s index varying slowest.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (da, db) = (a.dim, b.dim);
    let mut out = CMatrix::zeros(da * db);
    for i in 0..da {
        for j in 0..da {
            let aij = a[(i, j)];
            if aij.re == 0.0 && aij.im == 0.0 {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    out[(i * db + k, j * db + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Eigendecomposition `h = V diag(λ) V†` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors stored as columns.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// Decompose `h`, rejecting it when `max |h - h†|` exceeds [`HERM_TOL`].
    pub fn new(h: &CMatrix) -> Result<Self, LinalgError> {
        let deviation = h.hermitian_deviation();
        if deviation > HERM_TOL {
            return Err(LinalgError::NotHermitian { deviation, tolerance: HERM_TOL });
        }
        Ok(jacobi_eigen(h.hermitian_part()))
    }

    /// `e^{-i h t}` from the stored spectrum.
    pub fn evolution(&self, t: f64) -> CMatrix {
        let n = self.vectors.dim;
        let phases: Vec<C64> = self.values.iter().map(|&l| C64::from_polar(1.0, -l * t)).collect();
        let v = &self.vectors;
        CMatrix::from_fn(n, |i, j| (0..n).map(|k| v[(i, k)] * phases[k] * v[(j, k)].conj()).sum())
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

fn off_diagonal_mass(a: &CMatrix) -> f64 {
    let n = a.dim;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic complex Jacobi. Each rotation first removes the phase of the pivot
/// `a_pq` and then applies a real Givens rotation that zeroes it.
fn jacobi_eigen(mut a: CMatrix) -> HermitianEigen {
    let n = a.dim;
    let mut v = CMatrix::identity(n);
    let total = a.frobenius_norm();
    if total == 0.0 || n == 1 {
        return HermitianEigen { values: (0..n).map(|i| a[(i, i)].re).collect(), vectors: v };
    }
    let target = JACOBI_OFF_TOL * total;

    for _sweep in 0..MAX_JACOBI_SWEEPS {
        if off_diagonal_mass(&a) <= target {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Negligible pivot relative to both diagonal entries.
                if r < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    a[(p, q)] = C64::new(0.0, 0.0);
                    a[(q, p)] = C64::new(0.0, 0.0);
                    continue;
                }
                let phase = apq / r; // e^{iφ}
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let pc = phase.conj(); // e^{-iφ}

                // A <- A W, W = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] on (p, q).
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * pc * s;
                    a[(k, q)] = akp * s + akq * pc * c;
                }
                // A <- W† A.
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * phase * s;
                    a[(q, k)] = apk * s + aqk * phase * c;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * pc * s;
                    v[(k, q)] = vkp * s + vkq * pc * c;
                }
            }
        }
    }
    HermitianEigen { values: (0..n).map(|i| a[(i, i)].re).collect(), vectors: v }
}

/// `e^{-i h t}` for Hermitian `h`, via eigendecomposition.
pub fn expm_i(h: &CMatrix, t: f64) -> Result<CMatrix, LinalgError> {
    Ok(HermitianEigen::new(h)?.evolution(t))
}

/// Largest singular value, from the top eigenvalue of `m†m`.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    let scale = m.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    // Pre-scaling keeps m†m away from underflow for tiny defect matrices.
    let ms = m.scale_real(1.0 / scale);
    let gram = (&ms.adjoint() * &ms).hermitian_part();
    let eig = jacobi_eigen(gram);
    let top = eig.values.iter().cloned().fold(0.0, f64::max);
    top.max(0.0).sqrt() * scale
}

/// Spectral norm of `a - b`.
pub fn distance(a: &CMatrix, b: &CMatrix) -> f64 {
    spectral_norm(&(a - b))
}
