//! Finite observables and the ways of combining them.
//!
//! An [`Observable`] is an ordered family of effects indexed by [`Label`]s whose
//! sum is the identity. Product observables are labelled by concatenated tuples
//! (see [`Label::product`]), with the first factor's outcome varying slowest.

pub mod coexistence;
mod stochastic;

use indexmap::IndexMap;

use crate::effects::{self, Effect, State, IDENTITY_TOLERANCE};
use crate::error::{dim_err, Error, Result};
use crate::label::Label;
use crate::linalg::herm_eig;
use crate::{CMatrix, HMatrix, C64};

pub use stochastic::{check_weights, StochasticMatrix};

/// Relative eigenvalue threshold used when counting ranks.
pub const RANK_TOLERANCE: f64 = 1e-8;

/// Finite observable: effects summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    dim: usize,
    outcomes: IndexMap<Label, Effect>,
}

impl Observable {
    /// Validates labels, dimensions and `Σ_x A_x = 1` within `1e-8`.
    pub fn new(outcomes: Vec<(Label, Effect)>) -> Result<Self> {
        let dim = outcomes
            .first()
            .map(|(_, e)| e.dim())
            .ok_or_else(|| Error::Label("observable needs at least one outcome".into()))?;
        let mut map = IndexMap::with_capacity(outcomes.len());
        for (label, effect) in outcomes {
            if effect.dim() != dim {
                return Err(dim_err(format!("outcome {label} has dimension {}, expected {dim}", effect.dim())));
            }
            if map.insert(label.clone(), effect).is_some() {
                return Err(Error::Label(format!("duplicate outcome label {label}")));
            }
        }
        let obs = Self { dim, outcomes: map };
        let residual = obs.normalization_residual();
        if residual > IDENTITY_TOLERANCE {
            return Err(Error::Invariant {
                invariant: "sum-to-identity",
                residual,
            });
        }
        Ok(obs)
    }

    pub(crate) fn trusted(dim: usize, outcomes: Vec<(Label, Effect)>) -> Self {
        Self {
            dim,
            outcomes: outcomes.into_iter().collect(),
        }
    }

    /// `‖Σ_x A_x − 1‖_F`
    pub fn normalization_residual(&self) -> f64 {
        let sum = self.sum_of(self.outcomes.values());
        sum.distance(&CMatrix::identity(self.dim)).unwrap_or(f64::INFINITY)
    }

    fn sum_of<'a>(&self, effects: impl Iterator<Item = &'a Effect>) -> HMatrix {
        effects.fold(HMatrix::zeros(self.dim), |acc, e| {
            acc.add(e.matrix()).expect("same dimension")
        })
    }

    /// Identity observable `{λ_x·1}`.
    pub fn identity_observable(dim: usize, weights: &[(Label, f64)]) -> Result<Self> {
        let w: Vec<f64> = weights.iter().map(|(_, w)| *w).collect();
        check_weights(&w)?;
        let outcomes = weights
            .iter()
            .map(|(l, w)| Ok((l.clone(), Effect::scalar(dim, w.max(0.0))?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(outcomes)
    }

    /// Identity observable with `n` outcomes `"0"…` each equal to `(1/n)·1`.
    pub fn completely_random(dim: usize, n: usize) -> Self {
        let w = 1.0 / n as f64;
        let outcomes = Label::range(n)
            .into_iter()
            .map(|l| (l, Effect::scalar(dim, w).expect("1/n is a valid weight")))
            .collect();
        Self::trusted(dim, outcomes)
    }

    /// Atomic observable `{P_{u_i}}` from the columns of a unitary, labelled `"0"…`.
    pub fn from_basis(u: &CMatrix) -> Result<Self> {
        Self::from_basis_labelled(u, Label::range(u.cols()))
    }

    pub fn from_basis_labelled(u: &CMatrix, labels: Vec<Label>) -> Result<Self> {
        if !u.is_square() || labels.len() != u.cols() {
            return Err(dim_err("basis must be a square matrix with one label per column"));
        }
        let outcomes = labels
            .into_iter()
            .zip(u.columns())
            .map(|(l, col)| Ok((l, effects::atom(&col)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(outcomes)
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

    pub fn effects(&self) -> impl Iterator<Item = &Effect> {
        self.outcomes.values()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Label, &Effect)> {
        self.outcomes.iter()
    }

    pub fn get(&self, label: &Label) -> Option<&Effect> {
        self.outcomes.get(label)
    }

    pub fn effect(&self, label: &Label) -> Result<&Effect> {
        self.get(label)
            .ok_or_else(|| Error::Label(format!("unknown outcome {label}")))
    }

    /// `A_X = Σ_{x∈X} A_x`
    pub fn effect_of_subset(&self, subset: &[Label]) -> Result<Effect> {
        let mut acc = HMatrix::zeros(self.dim);
        for l in subset {
            acc = acc.add(self.effect(l)?.matrix())?;
        }
        Ok(Effect::trusted(acc))
    }

    /// Outcome-wise closeness with identical label order.
    pub fn close_to(&self, other: &Observable, tol: f64) -> bool {
        self.max_distance(other).is_some_and(|d| d <= tol)
    }

    /// Largest outcome-wise Frobenius distance, or `None` when label sets differ.
    pub fn max_distance(&self, other: &Observable) -> Option<f64> {
        if self.dim != other.dim || self.len() != other.len() {
            return None;
        }
        let mut worst = 0.0f64;
        for (l, e) in self.iter() {
            let f = other.get(l)?;
            worst = worst.max(e.matrix().distance(f.matrix()).ok()?);
        }
        Some(worst)
    }
}

fn same_dim(a: &Observable, b: &Observable) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(dim_err(format!("observables on dimensions {} and {}", a.dim(), b.dim())));
    }
    Ok(())
}

/// `A ∘ B = {A_x ∘ B_y}` on `Ω_A × Ω_B`.
pub fn seq_product(a: &Observable, b: &Observable) -> Result<Observable> {
    same_dim(a, b)?;
    let mut outcomes = Vec::with_capacity(a.len() * b.len());
    for (x, ax) in a.iter() {
        let root = ax.sqrt();
        for (y, by) in b.iter() {
            let e = Effect::trusted(root.sandwich(by.matrix())?);
            outcomes.push((Label::product(x, y), e));
        }
    }
    Ok(Observable::trusted(a.dim(), outcomes))
}

/// `(B | A)_y = Σ_x A_x ∘ B_y`: `B` conditioned by `A`.
pub fn conditioned(a: &Observable, b: &Observable) -> Result<Observable> {
    same_dim(a, b)?;
    let roots: Vec<HMatrix> = a.effects().map(Effect::sqrt).collect();
    let mut outcomes = Vec::with_capacity(b.len());
    for (y, by) in b.iter() {
        let mut acc = HMatrix::zeros(a.dim());
        for r in &roots {
            acc = acc.add(&r.sandwich(by.matrix())?)?;
        }
        outcomes.push((y.clone(), Effect::trusted(acc)));
    }
    Ok(Observable::trusted(a.dim(), outcomes))
}

/// Outcome-wise mixture `Σ_i λ_i B^(i)` of observables sharing a value space.
pub fn convex_combination(weights: &[f64], observables: &[Observable]) -> Result<Observable> {
    if weights.len() != observables.len() || observables.is_empty() {
        return Err(Error::Weight("one weight per observable required".into()));
    }
    check_weights(weights)?;
    let first = &observables[0];
    for o in observables {
        same_dim(first, o)?;
        if o.len() != first.len() || o.labels().any(|l| first.get(l).is_none()) {
            return Err(Error::Label("observables do not share a value space".into()));
        }
    }
    let outcomes = first
        .labels()
        .map(|l| {
            let mut acc = HMatrix::zeros(first.dim());
            for (w, o) in weights.iter().zip(observables) {
                acc = acc.add(&o.effect(l)?.matrix().scale(w.max(0.0)))?;
            }
            Ok((l.clone(), Effect::trusted(acc)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Observable::trusted(first.dim(), outcomes))
}

/// Post-processing `(ν•B)_z = Σ_y ν_{yz} B_y`.
pub fn post_process(nu: &StochasticMatrix, b: &Observable) -> Result<Observable> {
    nu.check_sources(b.labels())?;
    let outcomes = nu
        .targets()
        .iter()
        .enumerate()
        .map(|(z, target)| {
            let mut acc = HMatrix::zeros(b.dim());
            for (y, source) in nu.sources().iter().enumerate() {
                let w = nu.entry(y, z);
                if w != 0.0 {
                    acc = acc.add(&b.effect(source)?.matrix().scale(w))?;
                }
            }
            Ok((target.clone(), Effect::trusted(acc)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Observable::trusted(b.dim(), outcomes))
}

/// Structural properties of an observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Classification {
    /// every `A_x = λ_x·1`
    pub identity: bool,
    /// every `A_x` a rank-one projection
    pub atomic: bool,
    /// every `A_x` of rank one
    pub indecomposable: bool,
    /// all `A_x` commute pairwise
    pub commutative: bool,
    /// every `A_x` a projection
    pub sharp: bool,
}

/// Rank of an effect: eigenvalues above `1e-8` times the largest.
pub fn effect_rank(e: &Effect) -> usize {
    e.matrix().rank(RANK_TOLERANCE).expect("Hermitian eigensolver converges")
}

pub fn is_scalar_effect(e: &Effect) -> bool {
    let d = e.dim() as f64;
    let lambda = e.matrix().real_trace() / d;
    e.matrix()
        .distance(&CMatrix::identity(e.dim()).scale(lambda))
        .is_ok_and(|r| r <= IDENTITY_TOLERANCE)
}

pub fn is_projection(e: &Effect) -> bool {
    e.matrix().is_projection(IDENTITY_TOLERANCE).unwrap_or(false)
}

pub fn classify(a: &Observable) -> Classification {
    let ranks: Vec<usize> = a.effects().map(effect_rank).collect();
    let projections: Vec<bool> = a.effects().map(is_projection).collect();
    Classification {
        identity: a.effects().all(is_scalar_effect),
        atomic: ranks.iter().zip(&projections).all(|(&r, &p)| r == 1 && p),
        indecomposable: ranks.iter().all(|&r| r == 1),
        commutative: max_commutator(a, a) <= IDENTITY_TOLERANCE,
        sharp: projections.iter().all(|&p| p),
    }
}

/// Largest `‖[A_x, B_y]‖_F`.
pub fn max_commutator(a: &Observable, b: &Observable) -> f64 {
    let mut worst = 0.0f64;
    for ax in a.effects() {
        for by in b.effects() {
            let c = ax
                .matrix()
                .commutator(by.matrix())
                .map(|m| m.frobenius_norm())
                .unwrap_or(f64::INFINITY);
            worst = worst.max(c);
        }
    }
    worst
}

/// `A_x B_y = B_y A_x` for all outcomes, within `1e-8`.
pub fn commute(a: &Observable, b: &Observable) -> Result<bool> {
    same_dim(a, b)?;
    Ok(max_commutator(a, b) <= IDENTITY_TOLERANCE)
}

/// Largest violation of `A_x ∘ B_y = A_x / n` and `B_y ∘ A_x = B_y / m`.
pub fn complementarity_residual(a: &Observable, b: &Observable) -> Result<f64> {
    same_dim(a, b)?;
    let m = a.len() as f64;
    let n = b.len() as f64;
    let mut worst = 0.0f64;
    for ax in a.effects() {
        let ra = ax.sqrt();
        for by in b.effects() {
            let rb = by.sqrt();
            let ab = ra.sandwich(by.matrix())?;
            worst = worst.max(ab.distance(&ax.matrix().scale(1.0 / n))?);
            let ba = rb.sandwich(ax.matrix())?;
            worst = worst.max(ba.distance(&by.matrix().scale(1.0 / m))?);
        }
    }
    Ok(worst)
}

/// Complementarity: a definite value of either observable leaves the other
/// uniformly random.
pub fn complementary(a: &Observable, b: &Observable) -> Result<bool> {
    Ok(complementarity_residual(a, b)? <= IDENTITY_TOLERANCE)
}

/// Standard basis together with the Fourier basis `ψ_j[k] = e^{2πi jk/d}/√d`,
/// returned as unitaries whose columns are the basis vectors.
pub fn fourier_mub(d: usize) -> Result<(CMatrix, CMatrix)> {
    if d < 2 {
        return Err(dim_err("mutually unbiased bases need dimension at least 2"));
    }
    let scale = 1.0 / (d as f64).sqrt();
    let fourier = CMatrix::from_fn(d, d, |k, j| {
        let angle = 2.0 * std::f64::consts::PI * ((j * k) % d) as f64 / d as f64;
        C64::from_polar(scale, angle)
    });
    Ok((CMatrix::identity(d), fourier))
}

/// Checks that `C` on `Ω_A × Ω_B` has marginals `A` and `B` within `1e-8`.
pub fn coexist_verify(a: &Observable, b: &Observable, joint: &Observable) -> Result<bool> {
    same_dim(a, b)?;
    same_dim(a, joint)?;
    check_product_space(joint, a.labels(), b.len())?;
    let (row, col) = marginals(joint, &a.label_vec(), &b.label_vec())?;
    Ok(row.close_to(a, IDENTITY_TOLERANCE) && col.close_to(b, IDENTITY_TOLERANCE))
}

fn check_product_space<'a>(
    joint: &Observable,
    first: impl Iterator<Item = &'a Label>,
    second_len: usize,
) -> Result<()> {
    let first: Vec<_> = first.collect();
    if joint.len() != first.len() * second_len {
        return Err(Error::Label(format!(
            "joint has {} outcomes, expected {}",
            joint.len(),
            first.len() * second_len
        )));
    }
    Ok(())
}

/// The two marginals of an observable on `Ω_1 × Ω_2`.
pub fn marginals(joint: &Observable, first: &[Label], second: &[Label]) -> Result<(Observable, Observable)> {
    let d = joint.dim();
    let mut row = Vec::with_capacity(first.len());
    for x in first {
        let mut acc = HMatrix::zeros(d);
        for y in second {
            acc = acc.add(joint.effect(&Label::product(x, y))?.matrix())?;
        }
        row.push((x.clone(), Effect::trusted(acc)));
    }
    let mut col = Vec::with_capacity(second.len());
    for y in second {
        let mut acc = HMatrix::zeros(d);
        for x in first {
            acc = acc.add(joint.effect(&Label::product(x, y))?.matrix())?;
        }
        col.push((y.clone(), Effect::trusted(acc)));
    }
    Ok((Observable::trusted(d, row), Observable::trusted(d, col)))
}

/// `D_{(x,y,z)} = A_x ∘ (B_y ∘ C_z)`, a joint observable for `A`, `(B|A)` and `((C|B)|A)`.
pub fn triple_joint(a: &Observable, b: &Observable, c: &Observable) -> Result<Observable> {
    same_dim(a, b)?;
    same_dim(a, c)?;
    let bc = seq_product(b, c)?;
    seq_product(a, &bc)
}

/// `P_ρ(A_X then B_Y) = tr[ρ (A∘B)_{X×Y}]`.
pub fn joint_probability_then(
    rho: &State,
    a: &Observable,
    x: &[Label],
    b: &Observable,
    y: &[Label],
) -> Result<f64> {
    same_dim(a, b)?;
    if rho.dim() != a.dim() {
        return Err(dim_err("state and observables act on different spaces"));
    }
    let by = b.effect_of_subset(y)?;
    let mut total = 0.0;
    for l in x {
        let e = effects::seq_product(a.effect(l)?, &by)?;
        total += rho.matrix().matmul(e.matrix())?.trace().re;
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Simultaneous eigenbasis of a commutative observable, as a unitary.
///
/// Diagonalizes a random real combination `Σ c_x A_x` and accepts the basis
/// once it diagonalizes every `A_x`; coefficients are re-drawn otherwise. The
/// generator is seeded deterministically so the result depends only on `A`.
pub fn common_eigenbasis(a: &Observable) -> Result<CMatrix> {
    use rand::{Rng, SeedableRng};
    let worst = max_commutator(a, a);
    if worst > IDENTITY_TOLERANCE {
        return Err(Error::NotCommutative { residual: worst });
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed_ba5e);
    let effects: Vec<&Effect> = a.effects().collect();
    let mut best: Option<(f64, CMatrix)> = None;
    for _ in 0..32 {
        let mut combo = HMatrix::zeros(a.dim());
        for e in &effects {
            combo = combo.add(&e.matrix().scale(rng.random_range(0.5..1.5)))?;
        }
        let eig = herm_eig(&combo)?;
        let v = eig.vectors;
        let gaps_ok = eig.values.windows(2).all(|w| w[1] - w[0] > 1e-6);
        let off = effects
            .iter()
            .map(|e| off_diagonal_norm(&e.matrix().conjugate_by(&v.adjoint()).expect("square")))
            .fold(0.0f64, f64::max);
        if gaps_ok || off <= 1e-10 {
            return Ok(v);
        }
        if best.as_ref().is_none_or(|(b, _)| off < *b) {
            best = Some((off, v));
        }
    }
    let (off, v) = best.expect("at least one draw");
    if off <= IDENTITY_TOLERANCE {
        Ok(v)
    } else {
        Err(Error::NotCommutative { residual: off })
    }
}

pub(crate) fn off_diagonal_norm(m: &CMatrix) -> f64 {
    let mut s = 0.0;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

#[cfg(test)]
mod tests;
