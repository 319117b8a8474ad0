//! Unitary Hermitian operators, mutually orthogonal operation sets (MOOS),
//! and the Lie algebra a protected MOOS generates.
//!
//! Qubit ordering: qubit 1 is the leftmost (slowest) Kronecker factor, so on
//! two qubits `pauli(Z, 2, 2) = I ⊗ σz = diag(1, -1, 1, -1)`.
//!
//! Level-bit operators on an `M`-level system use the binary digits of the
//! basis index, bit 1 being the least significant: `Σz(l)` is diagonal with
//! entry `(-1)^{m_l}` and `Σx(l)` swaps `|m⟩ ↔ |m + 2^{l-1}⟩`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{kron, spectral_norm, CMatrix, C64};
use crate::tolerance::{ORTHO_TOL, RANK_TOL};

pub const MAX_QUBITS: usize = 8;
pub const MAX_LEVELS: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("qubit index {index} out of range 1..={num_qubits} (at most {MAX_QUBITS} qubits)")]
    QubitIndex { index: usize, num_qubits: usize },
    #[error("level bit {l} out of range 1..={max} for a {dim}-level system")]
    LevelBit { l: usize, max: usize, dim: usize },
    #[error("Σx({l}) needs M/2^{l} to be an integer, but {dim} mod {modulus} = {rem}")]
    Divisibility { l: usize, dim: usize, modulus: usize, rem: usize },
    #[error("system dimension {0} outside 2..={MAX_LEVELS}")]
    Dimension(usize),
    #[error("operator {label} is not unitary Hermitian: ‖Ω - Ω†‖ = {herm:.3e}, ‖Ω² - I‖ = {square:.3e}")]
    NotUnitaryHermitian { label: String, herm: f64, square: f64 },
    #[error("pair ({a}, {b}) neither commutes nor anticommutes: ‖[a,b]‖ = {comm:.3e}, ‖{{a,b}}‖ = {anti:.3e}")]
    NotOrthogonal { a: String, b: String, comm: f64, anti: f64 },
    #[error("anticommuting pair ({a}, {b}) has a member with nonzero trace {trace:.3e}")]
    TraceObstruction { a: String, b: String, trace: f64 },
    #[error("operator {label} acts on dimension {got}, expected {expected}")]
    MixedDimensions { label: String, got: usize, expected: usize },
    #[error("duplicate operator label {0}")]
    DuplicateLabel(String),
    #[error("an MOOS needs at least one element")]
    Empty,
    #[error("Lie closure exceeded max dimension {max_dim} (reached {reached})")]
    ClosureTooLarge { max_dim: usize, reached: usize },
    #[error("malformed operator document: {0}")]
    Document(String),
    #[error("unknown MOOS spec {0:?}; expected qubit_dephasing:L, qubit_full:L, mlevel_diagonal:M or mlevel_full:M")]
    UnknownSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn letter(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }

    fn matrix(self) -> CMatrix {
        let (o, z, i) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0));
        let data = match self {
            Axis::X => vec![z, o, o, z],
            Axis::Y => vec![z, -i, i, z],
            Axis::Z => vec![o, z, z, -o],
        };
        CMatrix::from_vec(2, data).expect("2x2 literal")
    }
}

/// A labelled system operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    pub label: String,
    pub matrix: CMatrix,
}

impl Operator {
    pub fn new(label: impl Into<String>, matrix: CMatrix) -> Self {
        Self { label: label.into(), matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `(‖Ω - Ω†‖, ‖Ω² - I‖)` in spectral norm.
    pub fn unitary_hermitian_residuals(&self) -> (f64, f64) {
        let herm = spectral_norm(&(&self.matrix - &self.matrix.adjoint()));
        let square = spectral_norm(&(&(&self.matrix * &self.matrix) - &CMatrix::identity(self.dim())));
        (herm, square)
    }

    pub fn is_unitary_hermitian(&self) -> bool {
        let (h, s) = self.unitary_hermitian_residuals();
        h <= ORTHO_TOL && s <= ORTHO_TOL
    }

    /// Ordered product `self · other` with a joined label.
    pub fn compose(&self, other: &Operator) -> Operator {
        Operator::new(format!("{}*{}", self.label, other.label), &self.matrix * &other.matrix)
    }
}

/// Single-qubit Pauli operator embedded in an `num_qubits`-qubit register.
pub fn pauli(axis: Axis, qubit_index: usize, num_qubits: usize) -> Result<Operator, OperatorError> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS || qubit_index == 0 || qubit_index > num_qubits {
        return Err(OperatorError::QubitIndex { index: qubit_index, num_qubits });
    }
    let mut m = CMatrix::identity(1 << (qubit_index - 1));
    m = kron(&m, &axis.matrix());
    m = kron(&m, &CMatrix::identity(1 << (num_qubits - qubit_index)));
    Ok(Operator::new(format!("{}{}", axis.letter(), qubit_index), m))
}

/// Number of level bits `⌈log₂ M⌉`.
pub fn level_bits(dim: usize) -> usize {
    let mut bits = 0;
    while (1usize << bits) < dim {
        bits += 1;
    }
    bits
}

fn check_levels(dim: usize) -> Result<(), OperatorError> {
    if !(2..=MAX_LEVELS).contains(&dim) {
        return Err(OperatorError::Dimension(dim));
    }
    Ok(())
}

/// Diagonal `Σz(l) = I - 2 Σ_{m_l = 1} |m⟩⟨m|`.
pub fn sigma_z_level(l: usize, dim: usize) -> Result<Operator, OperatorError> {
    check_levels(dim)?;
    let max = level_bits(dim);
    if l == 0 || l > max {
        return Err(OperatorError::LevelBit { l, max, dim });
    }
    let diag: Vec<C64> =
        (0..dim).map(|m| if (m >> (l - 1)) & 1 == 1 { C64::new(-1.0, 0.0) } else { C64::new(1.0, 0.0) }).collect();
    Ok(Operator::new(format!("SZ{l}"), CMatrix::diagonal(&diag)))
}

/// Permutation `Σx(l)` exchanging basis states that differ only in bit `l`.
pub fn sigma_x_level(l: usize, dim: usize) -> Result<Operator, OperatorError> {
    check_levels(dim)?;
    let max = level_bits(dim);
    if l == 0 || l > max {
        return Err(OperatorError::LevelBit { l, max, dim });
    }
    let modulus = 1usize << l;
    if dim % modulus != 0 {
        return Err(OperatorError::Divisibility { l, dim, modulus, rem: dim % modulus });
    }
    let half = 1usize << (l - 1);
    let mut m = CMatrix::zeros(dim);
    for k in (0..dim).filter(|k| (k >> (l - 1)) & 1 == 0) {
        m[(k + half, k)] = C64::new(1.0, 0.0);
        m[(k, k + half)] = C64::new(1.0, 0.0);
    }
    Ok(Operator::new(format!("SX{l}"), m))
}

/// Which MOOS construction to build.
#[derive(Debug, Clone, PartialEq)]
pub enum MoosSpec {
    /// `{σx(l)}` for an L-qubit pure-dephasing register.
    QubitDephasing(usize),
    /// `{σz(l), σx(l)}` for a general L-qubit register, ordered Z1, X1, Z2, X2, ...
    QubitFull(usize),
    /// `{Σz(l)}` for l = 1..⌈log₂M⌉.
    MlevelDiagonal(usize),
    /// `{Σz(l) | 2^l ≤ M} ∪ {Σx(l) | M mod 2^l = 0}`, interleaved by l.
    MlevelFull(usize),
    Custom(Vec<Operator>),
}

impl std::str::FromStr for MoosSpec {
    type Err = OperatorError;

    /// Parses `kind:n`, e.g. `qubit_full:2` or `mlevel_full:6`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || OperatorError::UnknownSpec(s.to_string());
        let (kind, n) = s.split_once(':').ok_or_else(unknown)?;
        let n: usize = n.trim().parse().map_err(|_| unknown())?;
        match kind.trim() {
            "qubit_dephasing" => Ok(MoosSpec::QubitDephasing(n)),
            "qubit_full" => Ok(MoosSpec::QubitFull(n)),
            "mlevel_diagonal" => Ok(MoosSpec::MlevelDiagonal(n)),
            "mlevel_full" => Ok(MoosSpec::MlevelFull(n)),
            _ => Err(unknown()),
        }
    }
}

/// Pairwise relation measured between two MOOS members.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairResidual {
    pub commutator: f64,
    pub anticommutator: f64,
}

/// A validated mutually orthogonal operation set.
#[derive(Debug, Clone)]
pub struct Moos {
    elements: Vec<Operator>,
    /// `+1` commute, `-1` anticommute; diagonal entries are `+1`.
    signature: Vec<Vec<i8>>,
    residuals: Vec<Vec<PairResidual>>,
}

impl Moos {
    /// Validate an ordered operator list as an MOOS.
    pub fn new(elements: Vec<Operator>) -> Result<Self, OperatorError> {
        let first = elements.first().ok_or(OperatorError::Empty)?;
        let dim = first.dim();
        for (i, op) in elements.iter().enumerate() {
            if op.dim() != dim {
                return Err(OperatorError::MixedDimensions { label: op.label.clone(), got: op.dim(), expected: dim });
            }
            if elements[..i].iter().any(|o| o.label == op.label) {
                return Err(OperatorError::DuplicateLabel(op.label.clone()));
            }
            let (herm, square) = op.unitary_hermitian_residuals();
            if herm > ORTHO_TOL || square > ORTHO_TOL {
                return Err(OperatorError::NotUnitaryHermitian { label: op.label.clone(), herm, square });
            }
        }

        let n = elements.len();
        let mut signature = vec![vec![1i8; n]; n];
        let mut residuals = vec![vec![PairResidual { commutator: 0.0, anticommutator: 2.0 }; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (&elements[i], &elements[j]);
                let comm = spectral_norm(&a.matrix.commutator(&b.matrix));
                let anti = spectral_norm(&a.matrix.anticommutator(&b.matrix));
                let r = PairResidual { commutator: comm, anticommutator: anti };
                residuals[i][j] = r;
                residuals[j][i] = r;
                let sign = if comm <= ORTHO_TOL {
                    1
                } else if anti <= ORTHO_TOL {
                    -1
                } else {
                    return Err(OperatorError::NotOrthogonal { a: a.label.clone(), b: b.label.clone(), comm, anti });
                };
                if sign == -1 {
                    for op in [a, b] {
                        let trace = op.matrix.trace().norm();
                        if trace > ORTHO_TOL {
                            return Err(OperatorError::TraceObstruction {
                                a: a.label.clone(),
                                b: b.label.clone(),
                                trace,
                            });
                        }
                    }
                }
                signature[i][j] = sign;
                signature[j][i] = sign;
            }
        }
        Ok(Self { elements, signature, residuals })
    }

    pub fn elements(&self) -> &[Operator] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn signature(&self) -> &[Vec<i8>] {
        &self.signature
    }

    pub fn residuals(&self, i: usize, j: usize) -> PairResidual {
        self.residuals[i][j]
    }

    pub fn labels(&self) -> Vec<String> {
        self.elements.iter().map(|o| o.label.clone()).collect()
    }

    pub fn get(&self, label: &str) -> Option<&Operator> {
        self.elements.iter().find(|o| o.label == label)
    }

    /// Keep only the first `n` elements (used when a scheme has fewer levels).
    pub fn truncated(&self, n: usize) -> Moos {
        let n = n.min(self.len());
        Moos {
            elements: self.elements[..n].to_vec(),
            signature: self.signature[..n].iter().map(|r| r[..n].to_vec()).collect(),
            residuals: self.residuals[..n].iter().map(|r| r[..n].to_vec()).collect(),
        }
    }

    pub fn to_document(&self) -> MoosDocument {
        MoosDocument {
            dim: self.dim(),
            elements: self
                .elements
                .iter()
                .map(|o| OperatorEntry {
                    label: o.label.clone(),
                    re: o.matrix.as_slice().iter().map(|z| z.re).collect(),
                    im: o.matrix.as_slice().iter().map(|z| z.im).collect(),
                })
                .collect(),
            signature: self.signature.clone(),
        }
    }

    /// Rebuild from a document. The signature is re-measured, and a stored
    /// signature that disagrees with the measurement is rejected.
    pub fn from_document(doc: &MoosDocument) -> Result<Self, OperatorError> {
        let ops = doc
            .elements
            .iter()
            .map(|e| {
                let n = doc.dim * doc.dim;
                if e.re.len() != n || e.im.len() != n {
                    return Err(OperatorError::Document(format!(
                        "element {} needs {} re/im entries, has {}/{}",
                        e.label,
                        n,
                        e.re.len(),
                        e.im.len()
                    )));
                }
                let data = e.re.iter().zip(&e.im).map(|(&r, &i)| C64::new(r, i)).collect();
                let m = CMatrix::from_vec(doc.dim, data).map_err(|err| OperatorError::Document(err.to_string()))?;
                Ok(Operator::new(e.label.clone(), m))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let moos = Moos::new(ops)?;
        if !doc.signature.is_empty() && doc.signature != moos.signature {
            return Err(OperatorError::Document("stored signature disagrees with measured relations".into()));
        }
        Ok(moos)
    }
}

/// JSON form: `{"dim": d, "elements": [{"label", "re", "im"}], "signature": [[±1]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoosDocument {
    pub dim: usize,
    pub elements: Vec<OperatorEntry>,
    #[serde(default)]
    pub signature: Vec<Vec<i8>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorEntry {
    pub label: String,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

pub fn build_moos(spec: MoosSpec) -> Result<Moos, OperatorError> {
    let ops = match spec {
        MoosSpec::QubitDephasing(l) => (1..=l).map(|q| pauli(Axis::X, q, l)).collect::<Result<Vec<_>, _>>()?,
        MoosSpec::QubitFull(l) => {
            let mut ops = Vec::with_capacity(2 * l);
            for q in 1..=l {
                ops.push(pauli(Axis::Z, q, l)?);
                ops.push(pauli(Axis::X, q, l)?);
            }
            ops
        }
        MoosSpec::MlevelDiagonal(m) => {
            check_levels(m)?;
            (1..=level_bits(m)).map(|l| sigma_z_level(l, m)).collect::<Result<Vec<_>, _>>()?
        }
        MoosSpec::MlevelFull(m) => {
            check_levels(m)?;
            let mut ops = Vec::new();
            for l in 1..=level_bits(m) {
                if (1usize << l) <= m {
                    ops.push(sigma_z_level(l, m)?);
                }
                if m % (1usize << l) == 0 {
                    ops.push(sigma_x_level(l, m)?);
                }
            }
            ops
        }
        MoosSpec::Custom(ops) => ops,
    };
    Moos::new(ops)
}

/// Orthonormal (trace inner product, `Tr(A†B)/d`) Hermitian basis.
#[derive(Debug, Clone)]
struct HermitianSpan {
    basis: Vec<CMatrix>,
}

impl HermitianSpan {
    /// Orthogonalize `m` against the span (two passes); returns the
    /// normalized residual if it is linearly independent.
    fn reduce(&self, m: &CMatrix) -> Option<CMatrix> {
        let scale = m.inner(m).re.sqrt();
        if scale <= RANK_TOL {
            return None;
        }
        let mut r = m.scale_real(1.0 / scale);
        for _ in 0..2 {
            for b in &self.basis {
                // Real coefficient: both operands are Hermitian.
                let coeff = b.inner(&r).re;
                r.axpy(C64::new(-coeff, 0.0), b);
            }
        }
        let norm = r.inner(&r).re.sqrt();
        (norm > RANK_TOL).then(|| r.scale_real(1.0 / norm))
    }
}

/// Basis of the real Lie algebra generated from `moos` by `i[·,·]`,
/// `{·,·}` and linear combination, restricted to traceless parts.
pub fn lie_closure(moos: &Moos, max_dim: usize) -> Result<Vec<Operator>, OperatorError> {
    lie_closure_of(moos.elements(), max_dim)
}

/// Same as [`lie_closure`] for an arbitrary list of Hermitian generators.
pub fn lie_closure_of(generators: &[Operator], max_dim: usize) -> Result<Vec<Operator>, OperatorError> {
    let mut span = HermitianSpan { basis: Vec::new() };
    let push = |span: &mut HermitianSpan, m: &CMatrix| -> Result<bool, OperatorError> {
        match span.reduce(&m.hermitian_part().traceless_part()) {
            Some(b) => {
                if span.basis.len() + 1 > max_dim {
                    return Err(OperatorError::ClosureTooLarge { max_dim, reached: span.basis.len() + 1 });
                }
                span.basis.push(b);
                Ok(true)
            }
            None => Ok(false),
        }
    };

    for g in generators {
        push(&mut span, &g.matrix)?;
    }
    let i = C64::new(0.0, 1.0);
    // Every new element is paired with every element before it, including itself.
    let mut next = 0;
    while next < span.basis.len() {
        let a = span.basis[next].clone();
        for k in 0..=next {
            let b = span.basis[k].clone();
            push(&mut span, &a.commutator(&b).scale(i))?;
            push(&mut span, &a.anticommutator(&b))?;
        }
        next += 1;
    }
    Ok(span.basis.into_iter().enumerate().map(|(k, m)| Operator::new(format!("L{}", k + 1), m)).collect())
}

/// Residual norm of `m` after projection onto the span of `basis`
/// (trace-normalized). Used to compare closures.
pub fn projection_residual(basis: &[Operator], m: &CMatrix) -> f64 {
    let mut r = m.clone();
    for _ in 0..2 {
        for b in basis {
            let coeff = b.matrix.inner(&r);
            r.axpy(-coeff, &b.matrix);
        }
    }
    r.inner(&r).re.max(0.0).sqrt()
}
