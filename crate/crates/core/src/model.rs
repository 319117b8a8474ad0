//! System ⊗ bath Hamiltonians with bounded spectral norm.
//!
//! Random models draw from ChaCha20 (`rand_chacha`), a counter-based stream
//! cipher generator. A model is fully determined by its [`ModelDescriptor`]:
//! the seed picks the key and each random component (bath operator, coupling
//! block) reads its own stream, so adding a component never shifts the draws
//! of another. Matrices are never serialized; they are regenerated on load.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{kron, spectral_norm, CMatrix, LinalgError, C64};
use crate::operators::{level_bits, sigma_x_level, sigma_z_level, Operator, OperatorError};
use crate::tolerance::HERM_TOL;

pub const MAX_TOTAL_DIM: usize = 256;
pub const DEFAULT_BATH_DIM: usize = 4;
pub const DEFAULT_NORM_BOUND: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("total dimension {sys}x{bath} = {total} exceeds {MAX_TOTAL_DIM}")]
    DimensionBudget { sys: usize, bath: usize, total: usize },
    #[error("invalid dimensions: system {sys}, bath {bath}")]
    BadDimensions { sys: usize, bath: usize },
    #[error("norm bound must be positive and finite, got {0}")]
    BadNorm(f64),
    #[error("{structure} models need {requirement}")]
    Unsupported { structure: &'static str, requirement: &'static str },
    #[error("operator acts on dimension {got}, model system dimension is {expected}")]
    OperatorDimension { got: usize, expected: usize },
    #[error("unknown model spec {0:?}; expected <structure>:<sys>x<bath>")]
    UnknownSpec(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    /// Dense random Hermitian on the joint space.
    General,
    /// `Σ_l Σz(l) ⊗ B_l + I ⊗ H_B`.
    PureDephasing,
    /// `I⊗J₀ + Ω₁⊗J₁ + Ω₂⊗J₂ + (iΩ₁Ω₂)⊗J₁₂` with `Ω₁ = Σz(1)`, `Ω₂ = Σx(1)`.
    QddCounterexample,
    /// Caller-supplied matrix.
    Custom,
}

impl Structure {
    pub fn name(self) -> &'static str {
        match self {
            Structure::General => "general",
            Structure::PureDephasing => "pure_dephasing",
            Structure::QddCounterexample => "qdd_counterexample",
            Structure::Custom => "custom",
        }
    }
}

impl std::str::FromStr for Structure {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "general" => Ok(Structure::General),
            "pure_dephasing" => Ok(Structure::PureDephasing),
            "qdd_counterexample" => Ok(Structure::QddCounterexample),
            _ => Err(ModelError::UnknownSpec(s.to_string())),
        }
    }
}

/// Everything needed to regenerate a random model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDescriptor {
    pub structure: Structure,
    pub sys_dim: usize,
    pub bath_dim: usize,
    pub norm_bound: f64,
    pub seed: u64,
}

impl ModelDescriptor {
    /// Parse `structure:SxB` (e.g. `general:2x4`) with the given bound and seed.
    pub fn parse(spec: &str, norm_bound: f64, seed: u64) -> Result<Self, ModelError> {
        let bad = || ModelError::UnknownSpec(spec.to_string());
        let (kind, dims) = spec.split_once(':').ok_or_else(bad)?;
        let (s, b) = dims.split_once('x').ok_or_else(bad)?;
        Ok(Self {
            structure: kind.parse()?,
            sys_dim: s.trim().parse().map_err(|_| bad())?,
            bath_dim: b.trim().parse().map_err(|_| bad())?,
            norm_bound,
            seed,
        })
    }

    pub fn build(&self) -> Result<HamiltonianModel, ModelError> {
        random_model(self.structure, self.sys_dim, self.bath_dim, self.norm_bound, self.seed)
    }
}

#[derive(Debug, Clone)]
pub struct HamiltonianModel {
    pub sys_dim: usize,
    pub bath_dim: usize,
    pub h_total: CMatrix,
    pub norm_bound: f64,
    pub seed: u64,
    pub structure: Structure,
}

impl HamiltonianModel {
    /// Wrap an explicit Hermitian matrix on `sys_dim · bath_dim`.
    pub fn custom(sys_dim: usize, bath_dim: usize, h: CMatrix) -> Result<Self, ModelError> {
        check_dims(sys_dim, bath_dim)?;
        if h.dim() != sys_dim * bath_dim {
            return Err(ModelError::BadDimensions { sys: sys_dim, bath: bath_dim });
        }
        let deviation = h.hermitian_deviation();
        if deviation > HERM_TOL {
            return Err(LinalgError::NotHermitian { deviation, tolerance: HERM_TOL }.into());
        }
        let norm_bound = spectral_norm(&h);
        Ok(Self { sys_dim, bath_dim, h_total: h, norm_bound, seed: 0, structure: Structure::Custom })
    }

    pub fn dim(&self) -> usize {
        self.h_total.dim()
    }

    /// `Ω ⊗ I_bath`.
    pub fn lift(&self, omega: &Operator) -> Result<CMatrix, ModelError> {
        if omega.dim() != self.sys_dim {
            return Err(ModelError::OperatorDimension { got: omega.dim(), expected: self.sys_dim });
        }
        Ok(kron(&omega.matrix, &CMatrix::identity(self.bath_dim)))
    }

    pub fn descriptor(&self) -> ModelDescriptor {
        ModelDescriptor {
            structure: self.structure,
            sys_dim: self.sys_dim,
            bath_dim: self.bath_dim,
            norm_bound: self.norm_bound,
            seed: self.seed,
        }
    }
}

fn check_dims(sys: usize, bath: usize) -> Result<(), ModelError> {
    if sys == 0 || bath == 0 {
        return Err(ModelError::BadDimensions { sys, bath });
    }
    let total = sys.saturating_mul(bath);
    if total > MAX_TOTAL_DIM {
        return Err(ModelError::DimensionBudget { sys, bath, total });
    }
    Ok(())
}

fn stream(seed: u64, id: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Gaussian real and imaginary parts, Hermitized as `(A + A†)/2`.
fn random_hermitian(dim: usize, rng: &mut ChaCha20Rng) -> CMatrix {
    let a = CMatrix::from_fn(dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    });
    a.hermitian_part()
}

fn rescaled(m: CMatrix, norm: f64) -> CMatrix {
    let current = spectral_norm(&m);
    if current == 0.0 {
        m
    } else {
        m.scale_real(norm / current)
    }
}

/// Deterministic random model; identical arguments give bit-identical matrices.
pub fn random_model(
    structure: Structure,
    sys_dim: usize,
    bath_dim: usize,
    norm_bound: f64,
    seed: u64,
) -> Result<HamiltonianModel, ModelError> {
    check_dims(sys_dim, bath_dim)?;
    if !(norm_bound > 0.0 && norm_bound.is_finite()) {
        return Err(ModelError::BadNorm(norm_bound));
    }
    let dim = sys_dim * bath_dim;
    let id_sys = CMatrix::identity(sys_dim);
    let h = match structure {
        Structure::General => rescaled(random_hermitian(dim, &mut stream(seed, 0)), norm_bound),
        Structure::PureDephasing => {
            if sys_dim < 2 {
                return Err(ModelError::Unsupported { structure: "pure_dephasing", requirement: "sys_dim >= 2" });
            }
            let mut h = kron(&id_sys, &random_hermitian(bath_dim, &mut stream(seed, 0)));
            for l in 1..=level_bits(sys_dim) {
                let z = sigma_z_level(l, sys_dim)?;
                let b = random_hermitian(bath_dim, &mut stream(seed, l as u64));
                h = &h + &kron(&z.matrix, &b);
            }
            rescaled(h, norm_bound)
        }
        Structure::QddCounterexample => {
            if sys_dim < 2 || sys_dim % 2 != 0 {
                return Err(ModelError::Unsupported {
                    structure: "qdd_counterexample",
                    requirement: "an even system dimension",
                });
            }
            let o1 = sigma_z_level(1, sys_dim)?.matrix;
            let o2 = sigma_x_level(1, sys_dim)?.matrix;
            // Ω₁Ω₂ is anti-Hermitian for an anticommuting pair; iΩ₁Ω₂ is the Hermitian product.
            let o12 = (&o1 * &o2).scale(C64::new(0.0, 1.0));
            let quarter = norm_bound / 4.0;
            let mut h = CMatrix::zeros(dim);
            for (k, sys) in [id_sys, o1, o2, o12].iter().enumerate() {
                let j = rescaled(random_hermitian(bath_dim, &mut stream(seed, k as u64)), quarter);
                h = &h + &kron(sys, &j);
            }
            h.hermitian_part()
        }
        Structure::Custom => {
            return Err(ModelError::Unsupported { structure: "custom", requirement: "an explicit matrix" })
        }
    };
    Ok(HamiltonianModel { sys_dim, bath_dim, h_total: h, norm_bound, seed, structure })
}

/// One random model per seed.
pub fn model_ensemble(
    structure: Structure,
    sys_dim: usize,
    bath_dim: usize,
    norm_bound: f64,
    seeds: &[u64],
) -> Result<Vec<HamiltonianModel>, ModelError> {
    seeds.iter().map(|&seed| random_model(structure, sys_dim, bath_dim, norm_bound, seed)).collect()
}

/// Split `H` into the parts commuting and anticommuting with `Ω ⊗ I`:
/// `C = (H + ΩHΩ)/2`, `A = (H − ΩHΩ)/2`.
pub fn decompose(model: &HamiltonianModel, omega: &Operator) -> Result<(CMatrix, CMatrix), ModelError> {
    let big = model.lift(omega)?;
    Ok(decompose_matrix(&model.h_total, &big))
}

pub fn decompose_matrix(h: &CMatrix, omega: &CMatrix) -> (CMatrix, CMatrix) {
    let conj = &(omega * h) * omega;
    ((h + &conj).scale_real(0.5), (h - &conj).scale_real(0.5))
}
