use crate::effects::{Effect, State};
use crate::error::{dim_err, Error, Result};
use crate::instruments::{Channel, Instrument, Operation};
use crate::linalg::{unitarity_residual, HermMatrix};
use crate::models::{Fimm, Interaction};
use crate::observables::{common_eigenbasis, Observable};
use crate::{CMatrix, HMatrix, C64};

/// Von Neumann model: system basis `ψ_i`, probe basis `φ_j` (columns of the two
/// unitaries), probe prepared in `φ_0`, and a pointer observable on the probe.
#[derive(Debug, Clone, PartialEq)]
pub struct VonNeumannModel {
    base: CMatrix,
    probe: CMatrix,
    pointer: Observable,
}

fn check_basis(u: &CMatrix) -> Result<()> {
    let residual = unitarity_residual(u);
    if residual > 1e-9 {
        return Err(Error::Invariant {
            invariant: "unitary",
            residual,
        });
    }
    Ok(())
}

impl VonNeumannModel {
    pub fn new(base: CMatrix, probe: CMatrix, pointer: Observable) -> Result<Self> {
        check_basis(&base)?;
        check_basis(&probe)?;
        if base.rows() != probe.rows() || pointer.dim() != probe.rows() {
            return Err(dim_err("von Neumann model needs equal system and probe dimensions"));
        }
        Ok(Self { base, probe, pointer })
    }

    pub fn base(&self) -> &CMatrix {
        &self.base
    }

    pub fn probe(&self) -> &CMatrix {
        &self.probe
    }

    pub fn pointer(&self) -> &Observable {
        &self.pointer
    }

    pub fn dim(&self) -> usize {
        self.base.rows()
    }

    /// The model as `(H, K, P_{φ_0}, U, F)` with the von Neumann unitary `U`.
    pub fn to_fimm(&self) -> Result<Fimm> {
        let u = von_neumann_unitary(&self.base, &self.probe)?;
        let eta = State::pure(&self.probe.column(0))?;
        Fimm::new(self.dim(), eta, Interaction::Unitary(u), self.pointer.clone())
    }
}

/// Unitary on `H ⊗ K` with `U(ψ_i⊗φ_0) = ψ_i⊗φ_i`, `U(ψ_i⊗φ_i) = ψ_i⊗φ_0` and
/// `U(ψ_i⊗φ_j) = ψ_i⊗φ_j` otherwise: for each `ψ_i`, probe levels `0` and `i` swap.
pub fn von_neumann_unitary(base: &CMatrix, probe: &CMatrix) -> Result<CMatrix> {
    check_basis(base)?;
    check_basis(probe)?;
    let d = base.rows();
    if probe.rows() != d {
        return Err(dim_err("system and probe bases differ in dimension"));
    }
    let image = |i: usize, j: usize| {
        if j == 0 {
            i
        } else if j == i {
            0
        } else {
            j
        }
    };
    let n = d * d;
    let mut u = CMatrix::zeros(n, n);
    for i in 0..d {
        let psi = base.column(i);
        for j in 0..d {
            let src = crate::linalg::tensor_vec(&psi, &probe.column(j));
            let dst = crate::linalg::tensor_vec(&psi, &probe.column(image(i, j)));
            u = &u + &CMatrix::outer(&dst, &src);
        }
    }
    Ok(u)
}

/// Closed forms for a von Neumann model: the measured instrument
/// `I_X(ρ) = Σ_ij ⟨ψ_i,ρψ_j⟩⟨φ_j,F_Xφ_i⟩ |ψ_i⟩⟨ψ_j|`, its channel
/// `ρ ↦ Σ_i P_{ψ_i} ρ P_{ψ_i}` and observable `A_X = Σ_i ⟨φ_i,F_Xφ_i⟩ P_{ψ_i}`.
pub fn vn_measured(m: &VonNeumannModel) -> Result<(Instrument, Channel, Observable)> {
    let d = m.dim();
    let psi = &m.base;
    let psi_adj = psi.adjoint();
    let phi = &m.probe;
    let mut outcomes = Vec::with_capacity(m.pointer.len());
    let mut effects = Vec::with_capacity(m.pointer.len());
    for (label, f) in m.pointer.iter() {
        // g[j][i] = ⟨φ_j, F φ_i⟩
        let g = phi.adjoint().matmul(f.matrix())?.matmul(phi)?;
        let op = Operation::from_linear_map(d, |rho| {
            let r = psi_adj.matmul(rho).expect("square").matmul(psi).expect("square");
            let masked = CMatrix::from_fn(d, d, |i, j| r[(i, j)] * g[(j, i)]);
            psi.matmul(&masked).expect("square").matmul(&psi_adj).expect("square")
        });
        outcomes.push((label.clone(), op));
        let diag: Vec<f64> = (0..d).map(|i| g[(i, i)].re).collect();
        let a = HMatrix::from_real_diag(&diag).congruence(psi)?;
        effects.push((label.clone(), Effect::trusted(a)));
    }
    let dephasing = Operation::from_linear_map(d, |rho| {
        let r = psi_adj.matmul(rho).expect("square").matmul(psi).expect("square");
        let diag = CMatrix::from_fn(d, d, |i, j| if i == j { r[(i, i)] } else { C64::new(0.0, 0.0) });
        psi.matmul(&diag).expect("square").matmul(&psi_adj).expect("square")
    });
    Ok((
        Instrument::trusted(d, outcomes),
        Channel::trusted(dephasing),
        Observable::trusted(d, effects),
    ))
}

/// Von Neumann model measuring a commutative observable: `ψ` a common
/// eigenbasis of the `A_x`, `φ` the standard basis, and
/// `F_x = Σ_j ⟨ψ_j, A_x ψ_j⟩ P_{φ_j}`.
pub fn vn_model_for_commutative(a: &Observable) -> Result<VonNeumannModel> {
    let psi = common_eigenbasis(a)?;
    let d = a.dim();
    let pointer = a
        .iter()
        .map(|(l, e)| {
            let diag: Vec<f64> = (0..d)
                .map(|j| {
                    let v = psi.column(j);
                    crate::linalg::inner(&v, &e.matrix().matvec(&v).expect("square")).re.clamp(0.0, 1.0)
                })
                .collect();
            (l.clone(), Effect::trusted(HermMatrix::from_real_diag(&diag)))
        })
        .collect();
    VonNeumannModel::new(psi, CMatrix::identity(d), Observable::trusted(d, pointer))
}
