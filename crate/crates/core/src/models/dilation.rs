use crate::effects::{Effect, IDENTITY_TOLERANCE};
use crate::error::{Error, Result};
use crate::instruments::Instrument;
use crate::label::Label;
use crate::linalg::{basis_vector, complete_to_unitary, HermMatrix};
use crate::models::{ground_state, probe_block, Fimm, Interaction};
use crate::observables::{effect_rank, Observable};
use crate::{CMatrix, HMatrix, C64};

/// Sharp-pointer model measuring a given instrument.
///
/// The probe has one level per Kraus operator `S_{x,k}` (outcome-major,
/// Kraus-index-minor; padded to at least two levels) and starts in `|0⟩`. The
/// isometry `Vψ = Σ_{x,k} (S_{x,k}ψ) ⊗ φ_{(x,k)}` fills the columns `ψ ⊗ φ_0` of the
/// interaction unitary and [`complete_to_unitary`] supplies the rest. The pointer is
/// `F_x = Σ_k P_{φ_{(x,k)}}`, so it is atomic exactly when every outcome has one
/// Kraus operator (and there are at least two outcomes).
pub fn dilate_instrument(instr: &Instrument) -> Result<Fimm> {
    let d = instr.dim();
    let counts: Vec<usize> = instr.operations().map(|op| op.kraus().len()).collect();
    let total: usize = counts.iter().sum();
    let dim_k = total.max(2);
    let n = d * dim_k;

    let mut isometry_cols = Vec::with_capacity(d);
    for i in 0..d {
        let mut col = vec![C64::new(0.0, 0.0); n];
        let e = basis_vector::<f64>(d, i);
        let mut level = 0;
        for op in instr.operations() {
            for s in op.kraus() {
                let image = s.matvec(&e)?;
                for (a, z) in image.into_iter().enumerate() {
                    col[a * dim_k + level] = z;
                }
                level += 1;
            }
        }
        isometry_cols.push(col);
    }
    let w = complete_to_unitary(&isometry_cols, n)?;
    // columns ψ_i ⊗ φ_0 sit at i·dim_k; the completion fills the remaining slots in order
    let mut order = Vec::with_capacity(n);
    let mut spare = d;
    for pos in 0..n {
        if pos % dim_k == 0 {
            order.push(pos / dim_k);
        } else {
            order.push(spare);
            spare += 1;
        }
    }
    let u = CMatrix::from_fn(n, n, |r, c| w[(r, order[c])]);

    let mut level = 0;
    let mut pointer = Vec::with_capacity(instr.len());
    let mut labels = instr.labels().peekable();
    for (idx, &count) in counts.iter().enumerate() {
        let label = labels.next().expect("one label per outcome").clone();
        let mut diag = vec![0.0; dim_k];
        for slot in diag.iter_mut().skip(level).take(count) {
            *slot = 1.0;
        }
        level += count;
        // the unused padding level goes to the last outcome
        if idx + 1 == counts.len() {
            for slot in diag.iter_mut().skip(level) {
                *slot = 1.0;
            }
        }
        pointer.push((label, Effect::trusted(HermMatrix::from_real_diag(&diag))));
    }
    Fimm::new(d, ground_state(dim_k), Interaction::Unitary(u), Observable::trusted(dim_k, pointer))
}

/// Kraus operators `S_x = (1⊗⟨φ_x|) U (1⊗|φ⟩)` of a normal model: unitary
/// interaction, pure probe state `φ` and atomic sharp pointer `F_x = P_{φ_x}`.
pub fn normal_fimm_kraus_extract(m: &Fimm) -> Result<Vec<(Label, CMatrix)>> {
    let u = match m.interaction() {
        Interaction::Unitary(u) => u,
        Interaction::Kraus(_) => return Err(Error::NotNormal("interaction is not unitary".into())),
    };
    let eta = m.eta().matrix().eig()?;
    let top = *eta.values.last().expect("non-empty");
    if (top - 1.0).abs() > IDENTITY_TOLERANCE {
        return Err(Error::NotNormal("probe state is not pure".into()));
    }
    let phi = eta.vector(m.dim_k() - 1);
    let mut out = Vec::with_capacity(m.pointer().len());
    for (label, f) in m.pointer().iter() {
        if effect_rank(f) != 1 || !crate::observables::is_projection(f) {
            return Err(Error::NotNormal(format!("pointer effect {label} is not a rank-one projection")));
        }
        let fe = f.matrix().eig()?;
        let phi_x = fe.vector(m.dim_k() - 1);
        out.push((label.clone(), probe_block(u, m.dim_h(), m.dim_k(), &phi_x, &phi)));
    }
    Ok(out)
}

/// Whether every Kraus operator of a normal model is positive semidefinite
/// within `1e-8`, which makes the measured instrument the Lüders instrument of
/// its observable.
pub fn luders_positivity_check(m: &Fimm) -> Result<bool> {
    for (_, s) in normal_fimm_kraus_extract(m)? {
        if s.hermitian_residual() > IDENTITY_TOLERANCE {
            return Ok(false);
        }
        let h = HMatrix::symmetrize(s)?;
        if h.min_eigenvalue()? < -IDENTITY_TOLERANCE {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Two models sharing probe, state and interaction (a dilation of `joint`)
/// whose sharp, commuting pointers `F¹_x = Σ_y G_{(x,y)}` and `F²_y = Σ_x G_{(x,y)}`
/// coarse-grain the joint pointer `G`.
pub fn simultaneous_fimms(joint: &Instrument, first: &[Label], second: &[Label]) -> Result<(Fimm, Fimm)> {
    if joint.len() != first.len() * second.len() {
        return Err(Error::Label(format!(
            "joint has {} outcomes, expected {}",
            joint.len(),
            first.len() * second.len()
        )));
    }
    let model = dilate_instrument(joint)?;
    let g = model.pointer();
    let (f1, f2) = crate::observables::marginals(g, first, second)?;
    Ok((model.with_pointer(f1)?, model.with_pointer(f2)?))
}
