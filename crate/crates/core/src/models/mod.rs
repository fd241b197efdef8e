//! Measurement models: a probe prepared in a state, coupled to the system by a
//! channel on `H ⊗ K`, and read out by a pointer observable on the probe.
//!
//! Operators on `H ⊗ K` follow the linear algebra tensor convention: index
//! `i·dim_K + k` for `e_i ⊗ f_k`.

mod dilation;
mod von_neumann;

use crate::effects::{State, IDENTITY_TOLERANCE};
use crate::error::{dim_err, Error, Result};
use crate::instruments::{Channel, Instrument, Operation};
use crate::label::Label;
use crate::linalg::{basis_vector, partial_trace_second, tensor_product, unitarity_residual};
use crate::observables::{is_projection, Observable};
use crate::{CMatrix, C64};

pub use dilation::{dilate_instrument, luders_positivity_check, normal_fimm_kraus_extract, simultaneous_fimms};
pub use von_neumann::{von_neumann_unitary, vn_measured, vn_model_for_commutative, VonNeumannModel};

// Probe-state and pointer eigenvalues below this contribute nothing measurable.
const NEGLIGIBLE_WEIGHT: f64 = 1e-14;

/// Coupling channel on `H ⊗ K`, kept as a unitary or a Kraus list so that the
/// (large) Choi matrix on the composite space is never formed.
#[derive(Debug, Clone, PartialEq)]
pub enum Interaction {
    Unitary(CMatrix),
    Kraus(Vec<CMatrix>),
}

impl Interaction {
    pub fn unitary(u: CMatrix) -> Result<Self> {
        let residual = unitarity_residual(&u);
        if residual > 1e-9 {
            return Err(Error::Invariant {
                invariant: "unitary",
                residual,
            });
        }
        Ok(Interaction::Unitary(u))
    }

    /// Kraus list with `Σ V_r†V_r = 1` within `1e-8`.
    pub fn kraus(ops: Vec<CMatrix>) -> Result<Self> {
        let n = ops.first().map(CMatrix::rows).ok_or_else(|| dim_err("empty Kraus list"))?;
        let mut sum = CMatrix::zeros(n, n);
        for v in &ops {
            if v.shape() != (n, n) {
                return Err(dim_err("Kraus operators must be square and of equal size"));
            }
            sum = &sum + &v.adjoint().matmul(v)?;
        }
        let residual = sum.distance(&CMatrix::identity(n))?;
        if residual > IDENTITY_TOLERANCE {
            return Err(Error::Invariant {
                invariant: "trace-preserving",
                residual,
            });
        }
        Ok(Interaction::Kraus(ops))
    }

    /// `ν₁ ⊗ ν₂`
    pub fn factorized(nu1: &Channel, nu2: &Channel) -> Self {
        let mut ops = Vec::new();
        for a in nu1.operation().kraus() {
            for b in nu2.operation().kraus() {
                ops.push(tensor_product(a, b));
            }
        }
        Interaction::Kraus(ops)
    }

    pub fn dim(&self) -> usize {
        match self {
            Interaction::Unitary(u) => u.rows(),
            Interaction::Kraus(ops) => ops[0].rows(),
        }
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        match self {
            Interaction::Unitary(u) => std::slice::from_ref(u),
            Interaction::Kraus(ops) => ops,
        }
    }

    /// `ν(m)` on `H ⊗ K`.
    pub fn apply(&self, m: &CMatrix) -> Result<CMatrix> {
        let n = self.dim();
        let mut out = CMatrix::zeros(n, n);
        for v in self.kraus_ops() {
            out = &out + &v.matmul(m)?.matmul(&v.adjoint())?;
        }
        Ok(out)
    }
}

/// Finite-dimensional measurement model `(H, K, η, ν, F)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Fimm {
    dim_h: usize,
    dim_k: usize,
    eta: State,
    nu: Interaction,
    pointer: Observable,
    sharp: bool,
}

impl Fimm {
    pub fn new(dim_h: usize, eta: State, nu: Interaction, pointer: Observable) -> Result<Self> {
        let dim_k = eta.dim();
        if pointer.dim() != dim_k {
            return Err(dim_err(format!("pointer on dimension {}, probe state on {dim_k}", pointer.dim())));
        }
        if nu.dim() != dim_h * dim_k {
            return Err(dim_err(format!(
                "interaction on dimension {}, expected {dim_h}·{dim_k}",
                nu.dim()
            )));
        }
        let sharp = pointer.effects().all(is_projection);
        Ok(Self {
            dim_h,
            dim_k,
            eta,
            nu,
            pointer,
            sharp,
        })
    }

    pub fn dim_h(&self) -> usize {
        self.dim_h
    }

    pub fn dim_k(&self) -> usize {
        self.dim_k
    }

    pub fn eta(&self) -> &State {
        &self.eta
    }

    pub fn interaction(&self) -> &Interaction {
        &self.nu
    }

    pub fn pointer(&self) -> &Observable {
        &self.pointer
    }

    pub fn is_sharp(&self) -> bool {
        self.sharp
    }

    /// Same model read out with a different pointer observable.
    pub fn with_pointer(&self, pointer: Observable) -> Result<Self> {
        Self::new(self.dim_h, self.eta.clone(), self.nu.clone(), pointer)
    }

    /// `tr[ν(ρ⊗η)(1⊗F_X)]` evaluated directly on the composite space.
    pub fn outcome_probability(&self, rho: &State, subset: &[Label]) -> Result<f64> {
        if rho.dim() != self.dim_h {
            return Err(dim_err("state on the wrong space"));
        }
        let joint = tensor_product(rho.matrix(), self.eta.matrix());
        let evolved = self.nu.apply(&joint)?;
        let f = self.pointer.effect_of_subset(subset)?;
        let readout = tensor_product(&CMatrix::identity(self.dim_h), f.matrix());
        Ok(evolved.matmul(&readout)?.trace().re)
    }

    /// `tr_K[ν(ρ⊗η)(1⊗F_X)]` evaluated directly on the composite space.
    pub fn apply_outcome(&self, rho: &CMatrix, label: &Label) -> Result<CMatrix> {
        let joint = tensor_product(rho, self.eta.matrix());
        let evolved = self.nu.apply(&joint)?;
        let f = self.pointer.effect(label)?;
        let readout = tensor_product(&CMatrix::identity(self.dim_h), f.matrix());
        partial_trace_second(&evolved.matmul(&readout)?, self.dim_h, self.dim_k)
    }
}

// `(1⊗⟨f|) V (1⊗|e⟩)` as a `dim_h × dim_h` matrix.
fn probe_block(v: &CMatrix, dim_h: usize, dim_k: usize, f: &[C64], e: &[C64]) -> CMatrix {
    CMatrix::from_fn(dim_h, dim_h, |a, i| {
        let mut acc = C64::new(0.0, 0.0);
        for c in 0..dim_k {
            let fc = f[c].conj();
            if fc == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..dim_k {
                if e[k] != C64::new(0.0, 0.0) {
                    acc += fc * v[(a * dim_k + c, i * dim_k + k)] * e[k];
                }
            }
        }
        acc
    })
}

/// The instrument `I_x(ρ) = tr_K[ν(ρ⊗η)(1⊗F_x)]` measured by a model.
///
/// With `η = Σ p_k |e_k⟩⟨e_k|`, `F_x = Σ μ_l |f_l⟩⟨f_l|` and Kraus operators `V_r`
/// of `ν`, outcome `x` has Kraus operators `√(p_k μ_l) (1⊗⟨f_l|) V_r (1⊗|e_k⟩)`.
pub fn model_instrument(m: &Fimm) -> Result<Instrument> {
    let eta = m.eta.matrix().eig()?;
    let probe: Vec<(f64, Vec<C64>)> = (0..m.dim_k)
        .filter(|&k| eta.values[k] > NEGLIGIBLE_WEIGHT)
        .map(|k| (eta.values[k], eta.vector(k)))
        .collect();
    let mut outcomes = Vec::with_capacity(m.pointer.len());
    for (label, f) in m.pointer.iter() {
        let fe = f.matrix().eig()?;
        let mut ops = Vec::new();
        for l in 0..m.dim_k {
            let mu = fe.values[l];
            if mu <= NEGLIGIBLE_WEIGHT {
                continue;
            }
            let fl = fe.vector(l);
            for (p, ek) in &probe {
                let w = (p * mu).sqrt();
                for v in m.nu.kraus_ops() {
                    ops.push(probe_block(v, m.dim_h, m.dim_k, &fl, ek).scale(w));
                }
            }
        }
        let op = if ops.is_empty() {
            Operation::zero(m.dim_h)
        } else {
            Operation::trusted_kraus(ops)
        };
        outcomes.push((label.clone(), op));
    }
    Ok(Instrument::trusted(m.dim_h, outcomes))
}

/// Observable measured by a model.
pub fn model_observable(m: &Fimm) -> Result<Observable> {
    Ok(crate::instruments::induced_observable(&model_instrument(m)?))
}

/// `U(e_i ⊗ e_k) = e_k ⊗ e_i` on `C^d ⊗ C^d`.
pub fn swap_unitary(d: usize) -> CMatrix {
    let mut data = vec![C64::new(0.0, 0.0); d * d * d * d];
    let n = d * d;
    for i in 0..d {
        for k in 0..d {
            data[(k * d + i) * n + i * d + k] = C64::new(1.0, 0.0);
        }
    }
    CMatrix::from_vec(n, n, data).expect("finite")
}

/// `(H, H, η, swap, F)`: measures the trivial instrument `ρ ↦ tr(ρF_x)·η`.
pub fn trivial_fimm(eta: State, pointer: Observable) -> Result<Fimm> {
    let d = eta.dim();
    if pointer.dim() != d {
        return Err(dim_err("probe state and pointer on different spaces"));
    }
    Fimm::new(d, eta, Interaction::Unitary(swap_unitary(d)), pointer)
}

/// Probe prepared in `|0⟩⟨0|`.
pub(crate) fn ground_state(d: usize) -> State {
    State::pure(&basis_vector(d, 0)).expect("unit vector")
}
