use std::sync::OnceLock;

use crate::effects::{Effect, PartialState, State, IDENTITY_TOLERANCE};
use crate::error::{dim_err, Error, Result};
use crate::linalg::{fix_phase, partial_trace_second, HermMatrix, PSD_TOLERANCE};
use crate::{CMatrix, HMatrix, C64};

/// Choi eigenvalues at or below this are dropped when extracting Kraus operators.
pub const KRAUS_EIGEN_THRESHOLD: f64 = 1e-10;
/// Relative eigenvalue threshold for the single-Kraus test.
pub const SINGLE_KRAUS_TOLERANCE: f64 = 1e-8;

/// Completely positive trace-non-increasing map on `d×d` matrices.
///
/// Stored as its Choi matrix `Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)` (input slot first), so
/// entry `((i,a),(j,b))` is `⟨a|Φ(|i⟩⟨j|)|b⟩`. A Kraus list is derived on demand
/// from the Choi spectrum and cached.
#[derive(Debug, Clone)]
pub struct Operation {
    dim: usize,
    choi: HMatrix,
    kraus: OnceLock<Vec<CMatrix>>,
}

impl PartialEq for Operation {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.choi == other.choi
    }
}

/// `vec(K)` with entry `i·d + a` equal to `K[a, i]`.
fn vec_kraus(k: &CMatrix) -> Vec<C64> {
    let d = k.rows();
    let mut v = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for a in 0..d {
            v[i * d + a] = k[(a, i)];
        }
    }
    v
}

fn choi_of_kraus(dim: usize, ops: &[CMatrix]) -> HMatrix {
    let mut choi = CMatrix::zeros(dim * dim, dim * dim);
    for k in ops {
        let v = vec_kraus(k);
        choi = &choi + &CMatrix::outer(&v, &v);
    }
    HermMatrix::symmetrize(choi).expect("square")
}

impl Operation {
    /// Validates positivity of the Choi matrix and `tr_out(choi) ≤ 1 + 1e-8`.
    pub fn from_choi(dim: usize, choi: HMatrix) -> Result<Self> {
        if choi.dim() != dim * dim {
            return Err(dim_err(format!("Choi matrix of a dimension-{dim} operation must be {0}x{0}", dim * dim)));
        }
        let lo = choi.min_eigenvalue()?;
        if lo < -PSD_TOLERANCE * choi.frobenius_norm().max(1.0) {
            return Err(Error::Invariant {
                invariant: "completely-positive",
                residual: -lo,
            });
        }
        let op = Self::trusted(dim, choi);
        let hi = op.induced_matrix().max_eigenvalue()?;
        if hi > 1.0 + IDENTITY_TOLERANCE {
            return Err(Error::Invariant {
                invariant: "trace-non-increasing",
                residual: hi - 1.0,
            });
        }
        Ok(op)
    }

    /// `ρ ↦ Σ_k K_k ρ K_k†`
    pub fn from_kraus(ops: Vec<CMatrix>) -> Result<Self> {
        let dim = ops.first().map(CMatrix::rows).ok_or_else(|| dim_err("empty Kraus list"))?;
        if ops.iter().any(|k| k.shape() != (dim, dim)) {
            return Err(dim_err("Kraus operators must be square and of equal size"));
        }
        let choi = choi_of_kraus(dim, &ops);
        let op = Self::from_choi(dim, choi)?;
        let _ = op.kraus.set(ops);
        Ok(op)
    }

    pub(crate) fn trusted(dim: usize, choi: HMatrix) -> Self {
        Self {
            dim,
            choi,
            kraus: OnceLock::new(),
        }
    }

    pub(crate) fn trusted_kraus(ops: Vec<CMatrix>) -> Self {
        let dim = ops[0].rows();
        let op = Self::trusted(dim, choi_of_kraus(dim, &ops));
        let _ = op.kraus.set(ops);
        op
    }

    /// Choi matrix of a linear map given by its action on matrix units. The
    /// caller guarantees complete positivity.
    pub(crate) fn from_linear_map(dim: usize, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        let n = dim * dim;
        let mut choi = CMatrix::zeros(n, n);
        let mut data = choi.as_slice().to_vec();
        for i in 0..dim {
            for j in 0..dim {
                let unit = CMatrix::from_fn(dim, dim, |r, c| if (r, c) == (i, j) { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
                let img = f(&unit);
                for a in 0..dim {
                    for b in 0..dim {
                        data[(i * dim + a) * n + j * dim + b] = img[(a, b)];
                    }
                }
            }
        }
        choi = CMatrix::from_vec(n, n, data).expect("finite");
        Self::trusted(dim, HermMatrix::symmetrize(choi).expect("square"))
    }

    pub fn identity(dim: usize) -> Self {
        Self::trusted_kraus(vec![CMatrix::identity(dim)])
    }

    pub fn zero(dim: usize) -> Self {
        Self::trusted(dim, HMatrix::zeros(dim * dim))
    }

    /// Lüders operation `ρ ↦ a^{1/2} ρ a^{1/2}`.
    pub fn luders(a: &Effect) -> Self {
        Self::trusted_kraus(vec![a.sqrt().into_matrix()])
    }

    /// `ρ ↦ tr(ρa)·α`, with Choi matrix `aᵀ ⊗ α`.
    pub fn trivial(a: &Effect, alpha: &State) -> Result<Self> {
        if a.dim() != alpha.dim() {
            return Err(dim_err("effect and output state on different spaces"));
        }
        let choi = crate::linalg::tensor_product(&a.matrix().transpose(), alpha.matrix());
        Ok(Self::trusted(a.dim(), HermMatrix::symmetrize(choi)?))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn choi(&self) -> &HMatrix {
        &self.choi
    }

    /// Kraus operators from the Choi spectrum (eigenvalues above `1e-10`),
    /// largest eigenvalue first and phase-fixed, unless the operation was built
    /// from an explicit Kraus list.
    pub fn kraus(&self) -> &[CMatrix] {
        self.kraus.get_or_init(|| kraus_from_choi(self.dim, &self.choi))
    }

    fn induced_matrix(&self) -> HMatrix {
        let t = partial_trace_second(&self.choi, self.dim, self.dim).expect("choi has square dimension");
        HermMatrix::symmetrize(t.transpose()).expect("square")
    }

    /// Effect `a` with `tr Φ(ρ) = tr(ρ a)`.
    pub fn induced_effect(&self) -> Effect {
        Effect::trusted(self.induced_matrix())
    }

    /// `Φ(m)` for an arbitrary `d×d` matrix.
    pub fn apply_matrix(&self, m: &CMatrix) -> Result<CMatrix> {
        let d = self.dim;
        if m.shape() != (d, d) {
            return Err(dim_err(format!("operation on dimension {d} applied to {:?} matrix", m.shape())));
        }
        let mut out = CMatrix::zeros(d, d);
        let c = self.choi.matrix();
        let mut data = out.as_slice().to_vec();
        for i in 0..d {
            for j in 0..d {
                let rij = m[(i, j)];
                if rij == C64::new(0.0, 0.0) {
                    continue;
                }
                for a in 0..d {
                    for b in 0..d {
                        data[a * d + b] += rij * c[(i * d + a, j * d + b)];
                    }
                }
            }
        }
        out = CMatrix::from_vec(d, d, data)?;
        Ok(out)
    }

    pub fn apply_herm(&self, m: &HMatrix) -> Result<HMatrix> {
        HermMatrix::symmetrize(self.apply_matrix(m.matrix())?)
    }

    pub fn apply(&self, rho: &PartialState) -> Result<PartialState> {
        Ok(PartialState::trusted(self.apply_herm(rho.matrix())?))
    }

    /// `other ∘ self`: apply `self` first.
    pub fn then(&self, other: &Operation) -> Result<Operation> {
        if self.dim != other.dim {
            return Err(dim_err("composing operations on different spaces"));
        }
        let mut ops = Vec::with_capacity(self.kraus().len() * other.kraus().len());
        for s in self.kraus() {
            for t in other.kraus() {
                ops.push(t.matmul(s)?);
            }
        }
        if ops.is_empty() {
            return Ok(Operation::zero(self.dim));
        }
        Ok(Self::trusted_kraus(ops))
    }

    pub fn scaled(&self, lambda: f64) -> Operation {
        let op = Self::trusted(self.dim, self.choi.scale(lambda));
        if let Some(k) = self.kraus.get() {
            if lambda >= 0.0 {
                let r = lambda.sqrt();
                let _ = op.kraus.set(k.iter().map(|m| m.scale(r)).collect());
            }
        }
        op
    }

    pub fn add(&self, other: &Operation) -> Result<Operation> {
        if self.dim != other.dim {
            return Err(dim_err("adding operations on different spaces"));
        }
        Ok(Self::trusted(self.dim, self.choi.add(&other.choi)?))
    }

    /// Frobenius distance between Choi matrices.
    pub fn distance(&self, other: &Operation) -> Result<f64> {
        self.choi.distance(&other.choi)
    }

    /// Number of Choi eigenvalues above `1e-8` times the largest.
    pub fn kraus_rank(&self) -> usize {
        self.choi.rank(SINGLE_KRAUS_TOLERANCE).expect("Hermitian eigensolver converges")
    }

    /// Whether the operation is `ρ ↦ SρS†` for a single operator `S`.
    pub fn is_single_kraus(&self) -> bool {
        self.kraus_rank() == 1
    }
}

pub(crate) fn kraus_from_choi(dim: usize, choi: &HMatrix) -> Vec<CMatrix> {
    let e = choi.eig().expect("Hermitian eigensolver converges");
    let mut ops = Vec::new();
    for k in (0..e.values.len()).rev() {
        let lambda = e.values[k];
        if lambda <= KRAUS_EIGEN_THRESHOLD {
            break;
        }
        let mut v = e.vector(k);
        fix_phase(&mut v);
        let r = lambda.sqrt();
        ops.push(CMatrix::from_fn(dim, dim, |a, i| v[i * dim + a] * r));
    }
    ops
}

/// Trace-preserving operation.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    op: Operation,
}

impl Channel {
    /// Checks `tr_out(choi)ᵀ = 1` within `1e-8`.
    pub fn new(op: Operation) -> Result<Self> {
        let residual = op
            .induced_matrix()
            .distance(&CMatrix::identity(op.dim()))?;
        if residual > IDENTITY_TOLERANCE {
            return Err(Error::Invariant {
                invariant: "trace-preserving",
                residual,
            });
        }
        Ok(Self { op })
    }

    pub(crate) fn trusted(op: Operation) -> Self {
        Self { op }
    }

    pub fn identity(dim: usize) -> Self {
        Self::trusted(Operation::identity(dim))
    }

    /// `ρ ↦ UρU†`
    pub fn unitary(u: &CMatrix) -> Result<Self> {
        let residual = crate::linalg::unitarity_residual(u);
        if residual > 1e-9 {
            return Err(Error::Invariant {
                invariant: "unitary",
                residual,
            });
        }
        Ok(Self::trusted(Operation::trusted_kraus(vec![u.clone()])))
    }

    pub fn operation(&self) -> &Operation {
        &self.op
    }

    pub fn into_operation(self) -> Operation {
        self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn apply(&self, rho: &State) -> Result<State> {
        Ok(State::trusted(self.op.apply_herm(rho.matrix())?))
    }

    pub fn then(&self, other: &Channel) -> Result<Channel> {
        Ok(Channel::trusted(self.op.then(&other.op)?))
    }

    pub fn distance(&self, other: &Channel) -> Result<f64> {
        self.op.distance(&other.op)
    }
}
