//! Instruments: labelled families of operations whose sum is a channel.
//!
//! The map `J` sends an instrument to the observable it measures
//! ([`induced_observable`]); `K` sends an observable to its Lüders instrument
//! ([`luders_instrument`]).

mod operation;

use indexmap::IndexMap;

use crate::effects::{Effect, State, IDENTITY_TOLERANCE};
use crate::error::{dim_err, Error, Result};
use crate::label::Label;
use crate::observables::{check_weights, Observable, StochasticMatrix};
use crate::{CMatrix, HMatrix};

pub use operation::{Channel, Operation, KRAUS_EIGEN_THRESHOLD, SINGLE_KRAUS_TOLERANCE};

/// Labelled operations `I_x` with `Σ_x I_x` trace-preserving.
#[derive(Debug, Clone, PartialEq)]
pub struct Instrument {
    dim: usize,
    outcomes: IndexMap<Label, Operation>,
}

impl Instrument {
    /// Validates dimensions, labels and trace preservation of the sum within `1e-8`.
    pub fn new(outcomes: Vec<(Label, Operation)>) -> Result<Self> {
        let dim = outcomes
            .first()
            .map(|(_, o)| o.dim())
            .ok_or_else(|| Error::Label("instrument needs at least one outcome".into()))?;
        let mut map = IndexMap::with_capacity(outcomes.len());
        for (label, op) in outcomes {
            if op.dim() != dim {
                return Err(dim_err(format!("outcome {label} has dimension {}, expected {dim}", op.dim())));
            }
            if map.insert(label.clone(), op).is_some() {
                return Err(Error::Label(format!("duplicate outcome label {label}")));
            }
        }
        let instr = Self { dim, outcomes: map };
        let residual = induced_observable(&instr).normalization_residual();
        if residual > IDENTITY_TOLERANCE {
            return Err(Error::Invariant {
                invariant: "trace-preserving",
                residual,
            });
        }
        Ok(instr)
    }

    pub(crate) fn trusted(dim: usize, outcomes: Vec<(Label, Operation)>) -> Self {
        Self {
            dim,
            outcomes: outcomes.into_iter().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &Label> {
        self.outcomes.keys()
    }

    pub fn label_vec(&self) -> Vec<Label> {
        self.outcomes.keys().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Label, &Operation)> {
        self.outcomes.iter()
    }

    pub fn operations(&self) -> impl Iterator<Item = &Operation> {
        self.outcomes.values()
    }

    pub fn get(&self, label: &Label) -> Option<&Operation> {
        self.outcomes.get(label)
    }

    pub fn operation(&self, label: &Label) -> Result<&Operation> {
        self.get(label)
            .ok_or_else(|| Error::Label(format!("unknown outcome {label}")))
    }

    /// `I_X = Σ_{x∈X} I_x`
    pub fn operation_of_subset(&self, subset: &[Label]) -> Result<Operation> {
        let mut acc = Operation::zero(self.dim);
        for l in subset {
            acc = acc.add(self.operation(l)?)?;
        }
        Ok(acc)
    }

    /// Largest outcome-wise Choi distance, or `None` when label sets differ.
    pub fn max_distance(&self, other: &Instrument) -> Option<f64> {
        if self.dim != other.dim || self.len() != other.len() {
            return None;
        }
        let mut worst = 0.0f64;
        for (l, op) in self.iter() {
            worst = worst.max(op.distance(other.get(l)?).ok()?);
        }
        Some(worst)
    }

    /// Outcome-wise Choi closeness; label sets must agree exactly.
    pub fn close_to(&self, other: &Instrument, tol: f64) -> bool {
        self.max_distance(other).is_some_and(|d| d <= tol)
    }

    /// Whether every outcome is a single-Kraus operation.
    pub fn is_kraus_instrument(&self) -> bool {
        self.operations().all(Operation::is_single_kraus)
    }
}

fn same_dim(a: &Instrument, b: &Instrument) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(dim_err(format!("instruments on dimensions {} and {}", a.dim(), b.dim())));
    }
    Ok(())
}

/// `J(I)`: the observable `A_x` with `tr I_x(ρ) = tr(ρ A_x)`.
pub fn induced_observable(instr: &Instrument) -> Observable {
    let outcomes = instr
        .iter()
        .map(|(l, op)| (l.clone(), op.induced_effect()))
        .collect();
    Observable::trusted(instr.dim(), outcomes)
}

/// `K(A)`: the Lüders instrument `ρ ↦ A_x^{1/2} ρ A_x^{1/2}`.
pub fn luders_instrument(a: &Observable) -> Instrument {
    let outcomes = a
        .iter()
        .map(|(l, e)| (l.clone(), Operation::luders(e)))
        .collect();
    Instrument::trusted(a.dim(), outcomes)
}

/// `I_x(ρ) = tr(ρA_x)·α`
pub fn trivial_instrument(a: &Observable, alpha: &State) -> Result<Instrument> {
    let outcomes = a
        .iter()
        .map(|(l, e)| Ok((l.clone(), Operation::trivial(e, alpha)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Instrument::trusted(a.dim(), outcomes))
}

/// `Id_x(ρ) = λ_x ρ`
pub fn identity_instrument(dim: usize, weights: &[(Label, f64)]) -> Result<Instrument> {
    let w: Vec<f64> = weights.iter().map(|(_, w)| *w).collect();
    check_weights(&w)?;
    let id = Operation::identity(dim);
    let outcomes = weights
        .iter()
        .map(|(l, w)| (l.clone(), id.scaled(w.max(0.0))))
        .collect();
    Instrument::new(outcomes)
}

/// Instrument with one Kraus operator per outcome; requires `Σ S_x†S_x = 1` within `1e-8`.
pub fn kraus_instrument(ops: Vec<(Label, CMatrix)>) -> Result<Instrument> {
    let dim = ops.first().map(|(_, s)| s.rows()).ok_or_else(|| Error::Label("no Kraus operators".into()))?;
    let mut sum = CMatrix::zeros(dim, dim);
    for (_, s) in &ops {
        if s.shape() != (dim, dim) {
            return Err(dim_err("Kraus operators must be square and of equal size"));
        }
        sum = &sum + &s.adjoint().matmul(s)?;
    }
    let residual = sum.distance(&CMatrix::identity(dim))?;
    if residual > IDENTITY_TOLERANCE {
        return Err(Error::NotComplete { residual });
    }
    let outcomes = ops
        .into_iter()
        .map(|(l, s)| (l, Operation::trusted_kraus(vec![s])))
        .collect();
    Ok(Instrument::trusted(dim, outcomes))
}

/// `(I∘J)_{(x,y)} = J_y ∘ I_x` on `Ω_I × Ω_J`.
pub fn product(i: &Instrument, j: &Instrument) -> Result<Instrument> {
    same_dim(i, j)?;
    let mut outcomes = Vec::with_capacity(i.len() * j.len());
    for (x, ix) in i.iter() {
        for (y, jy) in j.iter() {
            outcomes.push((Label::product(x, y), ix.then(jy)?));
        }
    }
    Ok(Instrument::trusted(i.dim(), outcomes))
}

/// `Î = Σ_x I_x`
pub fn channel(i: &Instrument) -> Channel {
    let sum = i
        .operations()
        .fold(Operation::zero(i.dim()), |acc, op| acc.add(op).expect("same dimension"));
    Channel::trusted(sum)
}

/// `(J|I)_y = J_y ∘ Î`
pub fn conditioned(i: &Instrument, j: &Instrument) -> Result<Instrument> {
    same_dim(i, j)?;
    let hat = channel(i);
    let outcomes = j
        .iter()
        .map(|(y, jy)| Ok((y.clone(), hat.operation().then(jy)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Instrument::trusted(i.dim(), outcomes))
}

/// Outcome-wise mixture `Σ_i λ_i I^(i)` of instruments sharing a value space.
pub fn convex_combination(weights: &[f64], instruments: &[Instrument]) -> Result<Instrument> {
    if weights.len() != instruments.len() || instruments.is_empty() {
        return Err(Error::Weight("one weight per instrument required".into()));
    }
    check_weights(weights)?;
    let first = &instruments[0];
    for other in instruments {
        same_dim(first, other)?;
        if other.len() != first.len() || other.labels().any(|l| first.get(l).is_none()) {
            return Err(Error::Label("instruments do not share a value space".into()));
        }
    }
    let outcomes = first
        .labels()
        .map(|l| {
            let mut acc = Operation::zero(first.dim());
            for (w, instr) in weights.iter().zip(instruments) {
                acc = acc.add(&instr.operation(l)?.scaled(w.max(0.0)))?;
            }
            Ok((l.clone(), acc))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Instrument::trusted(first.dim(), outcomes))
}

/// `(ν•I)_y = Σ_x ν_{xy} I_x`
pub fn post_process(nu: &StochasticMatrix, i: &Instrument) -> Result<Instrument> {
    nu.check_sources(i.labels())?;
    let outcomes = nu
        .targets()
        .iter()
        .enumerate()
        .map(|(z, target)| {
            let mut acc = Operation::zero(i.dim());
            for (y, source) in nu.sources().iter().enumerate() {
                let w = nu.entry(y, z);
                if w != 0.0 {
                    acc = acc.add(&i.operation(source)?.scaled(w))?;
                }
            }
            Ok((target.clone(), acc))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Instrument::trusted(i.dim(), outcomes))
}

/// Hermitian basis of `d×d` matrices: diagonal units and symmetrized/antisymmetrized
/// off-diagonal units. Linear identities that hold on it hold on every state.
pub fn hermitian_spanning_set(d: usize) -> Vec<HMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in i..d {
            if i == j {
                out.push(HMatrix::projector_onto(&crate::linalg::basis_vector(d, i)));
                continue;
            }
            let re = CMatrix::from_fn(d, d, |a, b| {
                if (a, b) == (i, j) || (a, b) == (j, i) { crate::C64::new(s, 0.0) } else { crate::C64::new(0.0, 0.0) }
            });
            let im = CMatrix::from_fn(d, d, |a, b| {
                if (a, b) == (i, j) {
                    crate::C64::new(0.0, -s)
                } else if (a, b) == (j, i) {
                    crate::C64::new(0.0, s)
                } else {
                    crate::C64::new(0.0, 0.0)
                }
            });
            out.push(HMatrix::symmetrize(re).expect("square"));
            out.push(HMatrix::symmetrize(im).expect("square"));
        }
    }
    out
}

/// Largest violation of `tr[J_y(A_x∘σ)] = tr[I_x(σ)]/n` and
/// `tr[I_x(B_y∘σ)] = tr[J_y(σ)]/m` over a Hermitian spanning set, where
/// `A = J(I)`, `B = J(J)`.
pub fn complementarity_residual(i: &Instrument, j: &Instrument) -> Result<f64> {
    same_dim(i, j)?;
    let a = induced_observable(i);
    let b = induced_observable(j);
    let m = i.len() as f64;
    let n = j.len() as f64;
    let a_roots: Vec<HMatrix> = a.effects().map(Effect::sqrt).collect();
    let b_roots: Vec<HMatrix> = b.effects().map(Effect::sqrt).collect();
    let mut worst = 0.0f64;
    for sigma in hermitian_spanning_set(i.dim()) {
        for (ix, ra) in i.operations().zip(&a_roots) {
            let conditioned = ra.sandwich(&sigma)?;
            let rhs = ix.apply_herm(&sigma)?.trace().re / n;
            for jy in j.operations() {
                let lhs = jy.apply_herm(&conditioned)?.trace().re;
                worst = worst.max((lhs - rhs).abs());
            }
        }
        for (jy, rb) in j.operations().zip(&b_roots) {
            let conditioned = rb.sandwich(&sigma)?;
            let rhs = jy.apply_herm(&sigma)?.trace().re / m;
            for ix in i.operations() {
                let lhs = ix.apply_herm(&conditioned)?.trace().re;
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    Ok(worst)
}

pub fn complementary(i: &Instrument, j: &Instrument) -> Result<bool> {
    Ok(complementarity_residual(i, j)? <= IDENTITY_TOLERANCE)
}

/// The two outcome-wise marginals of an instrument on `Ω_1 × Ω_2`.
pub fn marginals(joint: &Instrument, first: &[Label], second: &[Label]) -> Result<(Instrument, Instrument)> {
    if joint.len() != first.len() * second.len() {
        return Err(Error::Label(format!(
            "joint has {} outcomes, expected {}",
            joint.len(),
            first.len() * second.len()
        )));
    }
    let d = joint.dim();
    let mut row = Vec::with_capacity(first.len());
    for x in first {
        let mut acc = Operation::zero(d);
        for y in second {
            acc = acc.add(joint.operation(&Label::product(x, y))?)?;
        }
        row.push((x.clone(), acc));
    }
    let mut col = Vec::with_capacity(second.len());
    for y in second {
        let mut acc = Operation::zero(d);
        for x in first {
            acc = acc.add(joint.operation(&Label::product(x, y))?)?;
        }
        col.push((y.clone(), acc));
    }
    Ok((Instrument::trusted(d, row), Instrument::trusted(d, col)))
}

/// Checks that `joint` on `Ω_I × Ω_J` has marginals `I` and `J` within `1e-8`.
pub fn coexist_verify(i: &Instrument, j: &Instrument, joint: &Instrument) -> Result<bool> {
    same_dim(i, j)?;
    same_dim(i, joint)?;
    let (row, col) = marginals(joint, &i.label_vec(), &j.label_vec())?;
    Ok(row.close_to(i, IDENTITY_TOLERANCE) && col.close_to(j, IDENTITY_TOLERANCE))
}

/// `P_ρ(I_X then J_Y) = tr[J_Y(I_X(ρ))]`.
pub fn joint_probability(rho: &State, i: &Instrument, x: &[Label], j: &Instrument, y: &[Label]) -> Result<f64> {
    same_dim(i, j)?;
    if rho.dim() != i.dim() {
        return Err(dim_err("state and instruments act on different spaces"));
    }
    let ix = i.operation_of_subset(x)?;
    let jy = j.operation_of_subset(y)?;
    let out = jy.apply_herm(&ix.apply_herm(rho.matrix())?)?;
    Ok(out.real_trace().clamp(0.0, 1.0))
}

/// Kraus instrument `ρ ↦ S_x ρ S_x†` from the Kraus operators of a channel,
/// one outcome `"0"…` per Choi eigenvalue above `1e-10`.
pub fn kraus_instrument_from_channel(ch: &Channel) -> Instrument {
    let ops = ch.operation().kraus().to_vec();
    let outcomes = Label::range(ops.len())
        .into_iter()
        .zip(ops)
        .map(|(l, s)| (l, Operation::trusted_kraus(vec![s])))
        .collect();
    Instrument::trusted(ch.dim(), outcomes)
}

/// Largest distance of an induced effect from the multiple of `1` with the same
/// trace. Zero exactly when every `I_x` is `λ_x` times a channel.
pub fn identity_compatibility_residual(i: &Instrument) -> f64 {
    let mut worst = 0.0f64;
    for op in i.operations() {
        let e = op.induced_effect();
        let lambda = e.matrix().real_trace() / i.dim() as f64;
        let r = e
            .matrix()
            .distance(&CMatrix::identity(i.dim()).scale(lambda))
            .unwrap_or(f64::INFINITY);
        worst = worst.max(r);
    }
    worst
}

#[cfg(test)]
mod tests;
