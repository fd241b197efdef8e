//! Effects, states, the sequential product and coexistence of effect pairs.

use crate::error::{dim_err, Error, Result};
use crate::label::Label;
use crate::linalg::{normalized, HermMatrix};
use crate::observables::{coexistence, Observable};
use crate::{CMatrix, HMatrix, C64};

/// Slack allowed on spectral bounds (`0 ≤ a ≤ 1`, `ρ ≥ 0`).
pub const SPECTRAL_TOLERANCE: f64 = 1e-9;
/// Slack allowed on operator identities between effects.
pub const IDENTITY_TOLERANCE: f64 = 1e-8;

/// Hermitian operator with spectrum in `[0, 1]`.
///
/// Spectra up to `1e-9` outside the interval are accepted and the stored matrix is
/// left untouched; consumers that need exact positivity (square roots,
/// probabilities) clamp at the point of use.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    matrix: HMatrix,
}

impl Effect {
    pub fn new(matrix: HMatrix) -> Result<Self> {
        let e = matrix.eig()?;
        let lo = e.values[0];
        let hi = *e.values.last().expect("non-empty spectrum");
        let residual = (-lo).max(hi - 1.0).max(0.0);
        if residual > SPECTRAL_TOLERANCE {
            return Err(Error::Invariant {
                invariant: "effect-bounds",
                residual,
            });
        }
        Ok(Self { matrix })
    }

    /// Validates a raw matrix: Hermitian, then spectral bounds.
    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(HermMatrix::new(m)?)
    }

    /// Skips the spectral check for results that are effects by construction.
    pub(crate) fn trusted(matrix: HMatrix) -> Self {
        Self { matrix }
    }

    pub fn zero(dim: usize) -> Self {
        Self::trusted(HMatrix::zeros(dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self::trusted(HMatrix::identity(dim))
    }

    /// `λ·1` for `λ ∈ [0, 1]`.
    pub fn scalar(dim: usize, lambda: f64) -> Result<Self> {
        if !(-SPECTRAL_TOLERANCE..=1.0 + SPECTRAL_TOLERANCE).contains(&lambda) {
            return Err(Error::Invariant {
                invariant: "effect-bounds",
                residual: (-lambda).max(lambda - 1.0),
            });
        }
        Ok(Self::trusted(HMatrix::identity(dim).scale(lambda)))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &HMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> HMatrix {
        self.matrix
    }

    /// Positive square root `a^{1/2}`.
    pub fn sqrt(&self) -> HMatrix {
        self.matrix
            .sqrt()
            .expect("validated effect has a square root")
    }

    /// Scales by `λ ∈ [0, 1]`.
    pub fn scaled(&self, lambda: f64) -> Self {
        debug_assert!((0.0..=1.0 + 1e-12).contains(&lambda));
        Self::trusted(self.matrix.scale(lambda))
    }
}

/// Positive semidefinite operator with trace at most one.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialState {
    matrix: HMatrix,
}

/// Positive semidefinite operator with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    matrix: HMatrix,
}

fn check_psd(m: &HMatrix) -> Result<()> {
    let lo = m.min_eigenvalue()?;
    if lo < -SPECTRAL_TOLERANCE {
        return Err(Error::Invariant {
            invariant: "positive-semidefinite",
            residual: -lo,
        });
    }
    Ok(())
}

impl PartialState {
    pub fn new(matrix: HMatrix) -> Result<Self> {
        check_psd(&matrix)?;
        let tr = matrix.real_trace();
        if tr > 1.0 + SPECTRAL_TOLERANCE {
            return Err(Error::Invariant {
                invariant: "trace-at-most-one",
                residual: tr - 1.0,
            });
        }
        Ok(Self { matrix })
    }

    pub(crate) fn trusted(matrix: HMatrix) -> Self {
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &HMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.real_trace()
    }
}

impl State {
    pub fn new(matrix: HMatrix) -> Result<Self> {
        check_psd(&matrix)?;
        let tr = matrix.real_trace();
        if (tr - 1.0).abs() > SPECTRAL_TOLERANCE {
            return Err(Error::Invariant {
                invariant: "unit-trace",
                residual: (tr - 1.0).abs(),
            });
        }
        Ok(Self { matrix })
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(HermMatrix::new(m)?)
    }

    pub(crate) fn trusted(matrix: HMatrix) -> Self {
        Self { matrix }
    }

    /// `|φ><φ|` for the normalized input.
    pub fn pure(phi: &[C64]) -> Result<Self> {
        let v = normalized(phi)?;
        Ok(Self::trusted(HMatrix::projector_onto(&v)))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::trusted(HMatrix::identity(dim).scale(1.0 / dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &HMatrix {
        &self.matrix
    }

    pub fn as_partial(&self) -> PartialState {
        PartialState::trusted(self.matrix.clone())
    }
}

impl From<State> for PartialState {
    fn from(s: State) -> Self {
        PartialState::trusted(s.matrix)
    }
}

/// Rank-one projection `|φ><φ|`; the input is normalized first.
pub fn atom(phi: &[C64]) -> Result<Effect> {
    let v = normalized(phi)?;
    Ok(Effect::trusted(HMatrix::projector_onto(&v)))
}

/// Sequential product `a ∘ b = a^{1/2} b a^{1/2}`: measure `a`, then `b`.
pub fn seq_product(a: &Effect, b: &Effect) -> Result<Effect> {
    if a.dim() != b.dim() {
        return Err(dim_err("sequential product of effects on different spaces"));
    }
    Ok(Effect::trusted(a.sqrt().sandwich(b.matrix())?))
}

/// `a' = 1 − a`
pub fn complement(a: &Effect) -> Effect {
    Effect::trusted(
        HMatrix::identity(a.dim())
            .sub(a.matrix())
            .expect("same dimension"),
    )
}

/// `tr(ρ a)`, clamped to `[0, 1]`.
pub fn occurrence_probability(rho: &State, a: &Effect) -> Result<f64> {
    if rho.dim() != a.dim() {
        return Err(dim_err("state and effect act on different spaces"));
    }
    let p = rho.matrix().matmul(a.matrix())?.trace().re;
    Ok(p.clamp(0.0, 1.0))
}

/// `a ∘ ρ = a^{1/2} ρ a^{1/2}`: the unnormalized state after `a` occurs.
pub fn conditioned_partial_state(a: &Effect, rho: &PartialState) -> Result<PartialState> {
    if rho.dim() != a.dim() {
        return Err(dim_err("state and effect act on different spaces"));
    }
    Ok(PartialState::trusted(a.sqrt().sandwich(rho.matrix())?))
}

/// Decomposition `a = a1 + c`, `b = b1 + c` with `a1 + b1 + c ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoexistenceWitness {
    pub a1: Effect,
    pub b1: Effect,
    pub c: Effect,
}

impl CoexistenceWitness {
    /// `1 − a1 − b1 − c`, possibly slightly negative.
    pub fn remainder(&self) -> Result<HMatrix> {
        HMatrix::identity(self.c.dim())
            .sub(self.a1.matrix())?
            .sub(self.b1.matrix())?
            .sub(self.c.matrix())
    }
}

/// Checks a coexistence witness for `a`, `b`; never errors, any violation is `false`.
pub fn check_coexistence_witness(a: &Effect, b: &Effect, w: &CoexistenceWitness) -> bool {
    let d = a.dim();
    if [b.dim(), w.a1.dim(), w.b1.dim(), w.c.dim()].iter().any(|&k| k != d) {
        return false;
    }
    let close = |x: &Effect, y: &Effect, z: &Effect| {
        y.matrix()
            .add(z.matrix())
            .and_then(|s| s.distance(x.matrix()))
            .map(|r| r <= IDENTITY_TOLERANCE)
            .unwrap_or(false)
    };
    if !close(a, &w.a1, &w.c) || !close(b, &w.b1, &w.c) {
        return false;
    }
    match w.remainder().and_then(|r| r.min_eigenvalue()) {
        Ok(lo) => lo >= -SPECTRAL_TOLERANCE,
        Err(_) => false,
    }
}

/// Labels `1`, `2` used for the binary observables `{a, a'}` and `{b, b'}`.
pub fn binary_labels() -> [Label; 2] {
    [Label::from("1"), Label::from("2")]
}

/// Binary observable `{a, a'}` labelled `1`, `2`.
pub fn binary_observable(a: &Effect) -> Observable {
    let [one, two] = binary_labels();
    Observable::trusted(a.dim(), vec![(one, a.clone()), (two, complement(a))])
}

/// Joint observable on `{1,2}×{1,2}` built from a valid witness:
/// `C(1,1) = c`, `C(1,2) = a1`, `C(2,1) = b1`, `C(2,2) = 1 − a1 − b1 − c`.
///
/// Its first marginal is `{a, a'}` and its second is `{b, b'}`.
pub fn binary_observables_from_coexistence(
    a: &Effect,
    b: &Effect,
    w: &CoexistenceWitness,
) -> Result<Observable> {
    if !check_coexistence_witness(a, b, w) {
        return Err(Error::InvalidWitness);
    }
    let rest = Effect::new(w.remainder()?).map_err(|_| Error::InvalidWitness)?;
    let [one, two] = binary_labels();
    let outcomes = vec![
        (Label::product(&one, &one), w.c.clone()),
        (Label::product(&one, &two), w.a1.clone()),
        (Label::product(&two, &one), w.b1.clone()),
        (Label::product(&two, &two), rest),
    ];
    Observable::new(outcomes)
}

/// Outcome of a heuristic feasibility search. A failed search never certifies
/// that no witness exists.
#[derive(Debug, Clone)]
pub enum EffectCoexistence {
    Found(CoexistenceWitness),
    Unknown { residual: f64 },
}

/// Searches for a coexistence witness by alternating projections.
///
/// `a` and `b` coexist exactly when the binary observables `{a, a'}`, `{b, b'}`
/// admit a joint observable, so this delegates to the joint-observable search.
pub fn search_effect_coexistence(a: &Effect, b: &Effect) -> Result<EffectCoexistence> {
    if a.dim() != b.dim() {
        return Err(dim_err("effects act on different spaces"));
    }
    let outcome = coexistence::search_joint_observable(&binary_observable(a), &binary_observable(b))?;
    match outcome {
        coexistence::JointSearch::Found(joint) => {
            let [one, two] = binary_labels();
            let pick = |x: &Label, y: &Label| {
                joint
                    .get(&Label::product(x, y))
                    .cloned()
                    .expect("joint is defined on the product space")
            };
            let w = CoexistenceWitness {
                c: pick(&one, &one),
                a1: pick(&one, &two),
                b1: pick(&two, &one),
            };
            if check_coexistence_witness(a, b, &w) {
                Ok(EffectCoexistence::Found(w))
            } else {
                Ok(EffectCoexistence::Unknown { residual: f64::NAN })
            }
        }
        coexistence::JointSearch::Unknown { residual } => Ok(EffectCoexistence::Unknown { residual }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::basis_vector;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn diag(v: &[f64]) -> Effect {
        Effect::new(HMatrix::from_real_diag(v)).unwrap()
    }

    fn close(a: &HMatrix, b: &CMatrix, tol: f64) -> bool {
        a.distance(b).unwrap() <= tol
    }

    #[test]
    fn atom_examples() {
        let e1 = atom(&basis_vector(2, 0)).unwrap();
        assert!(close(e1.matrix(), &CMatrix::from_real_diag(&[1.0, 0.0]), 1e-15));

        let s = 1.0 / 2f64.sqrt();
        let plus = atom(&[c(s, 0.), c(s, 0.)]).unwrap();
        let half = CMatrix::from_fn(2, 2, |_, _| c(0.5, 0.));
        assert!(close(plus.matrix(), &half, 1e-15));

        let circ = atom(&[c(s, 0.), c(0., s)]).unwrap();
        let expected = CMatrix::from_rows(vec![vec![c(0.5, 0.), c(0., -0.5)], vec![c(0., 0.5), c(0.5, 0.)]]).unwrap();
        assert!(close(circ.matrix(), &expected, 1e-15));

        assert!(matches!(atom(&[c(0., 0.), c(0., 0.)]), Err(Error::ZeroVector)));
    }

    #[test]
    fn atoms_are_idempotent_after_normalization() {
        let a = atom(&[c(3.0, 0.), c(0., 4.0)]).unwrap();
        assert!(a.matrix().is_projection(1e-9).unwrap());
    }

    #[test]
    fn seq_product_examples() {
        let b = diag(&[0.2, 0.7]);
        let half = Effect::scalar(2, 0.5).unwrap();
        assert!(close(seq_product(&half, &b).unwrap().matrix(), &b.matrix().scale(0.5), 1e-12));

        let p = atom(&[c(0.6, 0.), c(0., 0.8)]).unwrap();
        assert!(close(seq_product(&p, &p).unwrap().matrix(), p.matrix(), 1e-9));

        let a = diag(&[0.3, 0.9]);
        assert!(close(seq_product(&a, &Effect::identity(2)).unwrap().matrix(), a.matrix(), 1e-12));
    }

    #[test]
    fn seq_product_of_atoms_scales_first_atom() {
        let alpha = [c(0.6, 0.), c(0.8, 0.)];
        let beta = [c(0., 1.0), c(1.0, 0.)];
        let a = atom(&alpha).unwrap();
        let b = atom(&beta).unwrap();
        let overlap = crate::linalg::inner(&crate::linalg::normalized(&alpha).unwrap(), &crate::linalg::normalized(&beta).unwrap()).norm_sqr();
        let r = seq_product(&a, &b).unwrap();
        assert!(close(r.matrix(), &a.matrix().scale(overlap), 1e-9));
    }

    #[test]
    fn complement_examples() {
        assert!(close(complement(&Effect::zero(2)).matrix(), &CMatrix::identity(2), 0.0));
        let half = Effect::scalar(2, 0.5).unwrap();
        assert!(close(complement(&half).matrix(), half.matrix(), 0.0));
        let a = diag(&[0.3, 0.9]);
        assert!(close(complement(&a).matrix(), &CMatrix::from_real_diag(&[0.7, 0.1]), 1e-15));
    }

    #[test]
    fn probability_examples() {
        let rho = State::pure(&basis_vector(2, 0)).unwrap();
        assert!((occurrence_probability(&rho, &Effect::identity(2)).unwrap() - 1.0).abs() < 1e-15);
        assert!((occurrence_probability(&rho, &diag(&[0.3, 0.9])).unwrap() - 0.3).abs() < 1e-15);
        let s = 1.0 / 2f64.sqrt();
        let plus = atom(&[c(s, 0.), c(s, 0.)]).unwrap();
        let mixed = State::maximally_mixed(2);
        assert!((occurrence_probability(&mixed, &plus).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn conditioned_state_examples() {
        let rho = State::new(HMatrix::from_real_diag(&[0.25, 0.75])).unwrap().as_partial();
        let out = conditioned_partial_state(&Effect::identity(2), &rho).unwrap();
        assert!(close(out.matrix(), rho.matrix(), 1e-12));

        let p0 = atom(&basis_vector(2, 0)).unwrap();
        let out = conditioned_partial_state(&p0, &State::maximally_mixed(2).as_partial()).unwrap();
        assert!(close(out.matrix(), &CMatrix::from_real_diag(&[0.5, 0.0]), 1e-15));

        let half = Effect::scalar(2, 0.5).unwrap();
        let out = conditioned_partial_state(&half, &rho).unwrap();
        assert!(close(out.matrix(), &rho.matrix().scale(0.5), 1e-12));
    }

    #[test]
    fn witness_examples() {
        let a = diag(&[0.5, 0.2]);
        let b = diag(&[0.4, 0.8]);
        let ab = HMatrix::symmetrize(a.matrix().matmul(b.matrix()).unwrap()).unwrap();
        let w = CoexistenceWitness {
            a1: Effect::new(a.matrix().sub(&ab).unwrap()).unwrap(),
            b1: Effect::new(b.matrix().sub(&ab).unwrap()).unwrap(),
            c: Effect::new(ab).unwrap(),
        };
        assert!(check_coexistence_witness(&a, &b, &w));
        let joint = binary_observables_from_coexistence(&a, &b, &w).unwrap();
        let [one, two] = binary_labels();
        let row = joint.get(&Label::product(&one, &one)).unwrap().matrix()
            .add(joint.get(&Label::product(&one, &two)).unwrap().matrix()).unwrap();
        assert!(close(&row, a.matrix(), 1e-8));
        let col = joint.get(&Label::product(&one, &one)).unwrap().matrix()
            .add(joint.get(&Label::product(&two, &one)).unwrap().matrix()).unwrap();
        assert!(close(&col, b.matrix(), 1e-8));

        let half = Effect::scalar(2, 0.5).unwrap();
        let w = CoexistenceWitness { a1: Effect::zero(2), b1: Effect::zero(2), c: half.clone() };
        assert!(check_coexistence_witness(&half, &half, &w));
        let joint = binary_observables_from_coexistence(&half, &half, &w).unwrap();
        let expected = [0.5, 0.0, 0.0, 0.5];
        for ((_, e), x) in joint.iter().zip(expected) {
            assert!(close(e.matrix(), &CMatrix::identity(2).scale(x), 1e-12));
        }

        let one_e = Effect::identity(2);
        let bad = CoexistenceWitness { a1: Effect::zero(2), b1: Effect::zero(2), c: Effect::zero(2) };
        assert!(!check_coexistence_witness(&one_e, &one_e, &bad));
        assert!(matches!(
            binary_observables_from_coexistence(&one_e, &one_e, &bad),
            Err(Error::InvalidWitness)
        ));

        let w = CoexistenceWitness { a1: Effect::zero(2), b1: Effect::zero(2), c: one_e.clone() };
        let joint = binary_observables_from_coexistence(&one_e, &one_e, &w).unwrap();
        let effects: Vec<_> = joint.effects().collect();
        assert!(close(effects[0].matrix(), &CMatrix::identity(2), 1e-12));
        assert!(effects[1..].iter().all(|e| e.matrix().frobenius_norm() < 1e-12));
    }

    #[test]
    fn effect_bounds_are_enforced() {
        assert!(matches!(
            Effect::new(HMatrix::from_real_diag(&[1.1, 0.0])),
            Err(Error::Invariant { invariant: "effect-bounds", .. })
        ));
        assert!(Effect::new(HMatrix::from_real_diag(&[1.0 + 1e-10, -1e-10])).is_ok());
    }

    #[test]
    fn heuristic_search_finds_commuting_witness() {
        let a = diag(&[0.5, 0.2]);
        let b = diag(&[0.4, 0.8]);
        match search_effect_coexistence(&a, &b).unwrap() {
            EffectCoexistence::Found(w) => assert!(check_coexistence_witness(&a, &b, &w)),
            EffectCoexistence::Unknown { residual } => panic!("search failed, residual {residual}"),
        }
    }
}
