//! Seeded random generators for the domain objects.
//!
//! All generators take any [`rand::Rng`]; the CLI and the verification suites
//! use [`seeded`] so that a seed fixes every output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::effects::{Effect, State};
use crate::error::{Error, Result};
use crate::instruments::{Channel, Instrument, Operation};
use crate::label::Label;
use crate::linalg::{herm_inv_sqrt, HermMatrix};
use crate::observables::{Observable, StochasticMatrix};
use crate::{CMatrix, HMatrix, C64};

/// Ridge added before inverting `Σ G_x G_x†` in the observable generators.
pub const INVERSE_RIDGE: f64 = 1e-12;

pub type Seeded = ChaCha8Rng;

pub fn seeded(seed: u64) -> Seeded {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Matrix of independent standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| C64::new(normal(rng) * s, normal(rng) * s))
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<C64> {
    ginibre(rng, d, 1).column(0)
}

/// Haar-random unitary: Gram–Schmidt on a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    loop {
        let g = ginibre(rng, d, d);
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
        for mut v in g.columns() {
            for _ in 0..2 {
                for u in &cols {
                    let p = crate::linalg::inner(u, &v);
                    v.iter_mut().zip(u).for_each(|(vi, ui)| *vi -= ui * p);
                }
            }
            let n = crate::linalg::vec_norm(&v);
            if n < 1e-8 {
                break;
            }
            v.iter_mut().for_each(|z| *z /= n);
            cols.push(v);
        }
        if cols.len() == d {
            return CMatrix::from_columns(&cols).expect("square");
        }
    }
}

/// Pure state vector, uniformly distributed on the unit sphere.
pub fn random_pure_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<C64> {
    loop {
        let v = random_vector(rng, d);
        if let Ok(u) = crate::linalg::normalized(&v) {
            return u;
        }
    }
}

/// Full-rank mixed state `GG†/tr(GG†)`.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, d: usize) -> State {
    let g = ginibre(rng, d, d);
    let m = g.matmul(&g.adjoint()).expect("square");
    let tr = m.trace().re;
    State::trusted(HermMatrix::symmetrize(m.scale(1.0 / tr)).expect("square"))
}

pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, d: usize) -> State {
    State::pure(&random_pure_vector(rng, d)).expect("unit vector")
}

/// `U diag(λ) U†` with `λ_i` uniform in `[0, 1]`.
pub fn random_effect<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Effect {
    let u = random_unitary(rng, d);
    let diag: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    Effect::trusted(HMatrix::from_real_diag(&diag).congruence(&u).expect("square"))
}

/// Pair of commuting effects diagonal in a common random basis.
pub fn random_commuting_effects<R: Rng + ?Sized>(rng: &mut R, d: usize) -> (Effect, Effect) {
    let u = random_unitary(rng, d);
    let mut diag = || {
        let v: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        Effect::trusted(HMatrix::from_real_diag(&v).congruence(&u).expect("square"))
    };
    (diag(), diag())
}

/// `A_x = S^{-1/2} G_x G_x† S^{-1/2}` with `S = Σ_x G_x G_x†`, outcomes `"0"…`.
pub fn random_observable<R: Rng + ?Sized>(rng: &mut R, d: usize, m: usize) -> Observable {
    let grams: Vec<HMatrix> = (0..m)
        .map(|_| {
            let g = ginibre(rng, d, d);
            HermMatrix::symmetrize(g.matmul(&g.adjoint()).expect("square")).expect("square")
        })
        .collect();
    let total = grams
        .iter()
        .fold(HMatrix::zeros(d), |acc, g| acc.add(g).expect("same dimension"));
    let inv = herm_inv_sqrt(&total, INVERSE_RIDGE).expect("sum of Gram matrices is PSD");
    let outcomes = Label::range(m)
        .into_iter()
        .zip(grams)
        .map(|(l, g)| (l, Effect::trusted(inv.sandwich(&g).expect("same dimension"))))
        .collect();
    Observable::trusted(d, outcomes)
}

/// Commutative observable: random weights on each vector of a random basis.
pub fn random_commutative_observable<R: Rng + ?Sized>(rng: &mut R, d: usize, m: usize) -> Observable {
    let u = random_unitary(rng, d);
    let weights: Vec<Vec<f64>> = (0..d).map(|_| random_simplex(rng, m)).collect();
    let outcomes = Label::range(m)
        .into_iter()
        .enumerate()
        .map(|(x, l)| {
            let diag: Vec<f64> = weights.iter().map(|w| w[x]).collect();
            (l, Effect::trusted(HMatrix::from_real_diag(&diag).congruence(&u).expect("square")))
        })
        .collect();
    Observable::trusted(d, outcomes)
}

/// Uniform point of the probability simplex with `m` vertices.
pub fn random_simplex<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..m).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Random row-stochastic matrix from `sources` to `m` targets `"0"…`.
pub fn random_stochastic<R: Rng + ?Sized>(rng: &mut R, sources: Vec<Label>, m: usize) -> StochasticMatrix {
    let rows = sources.iter().map(|_| random_simplex(rng, m)).collect();
    StochasticMatrix::new(sources, Label::range(m), rows).expect("rows lie on the simplex")
}

// Operators `G_k S^{-1/2}` with `S = Σ_k G_k†G_k`, so that `Σ_k S_k†S_k = 1`.
fn complete_kraus_family<R: Rng + ?Sized>(rng: &mut R, d: usize, count: usize) -> Vec<CMatrix> {
    let gs: Vec<CMatrix> = (0..count).map(|_| ginibre(rng, d, d)).collect();
    let total = gs.iter().fold(HMatrix::zeros(d), |acc, g| {
        acc.add(&HermMatrix::symmetrize(g.adjoint().matmul(g).expect("square")).expect("square"))
            .expect("same dimension")
    });
    let inv = herm_inv_sqrt(&total, INVERSE_RIDGE).expect("PSD");
    gs.iter().map(|g| g.matmul(inv.matrix()).expect("square")).collect()
}

/// Kraus instrument with one random operator per outcome.
pub fn random_kraus_instrument<R: Rng + ?Sized>(rng: &mut R, d: usize, m: usize) -> Instrument {
    random_instrument_with_rank(rng, d, m, 1)
}

/// Instrument whose outcomes each have `rank` Kraus operators.
pub fn random_instrument_with_rank<R: Rng + ?Sized>(rng: &mut R, d: usize, m: usize, rank: usize) -> Instrument {
    let mut ops = complete_kraus_family(rng, d, m * rank).into_iter();
    let outcomes = Label::range(m)
        .into_iter()
        .map(|l| (l, Operation::trusted_kraus(ops.by_ref().take(rank).collect())))
        .collect();
    Instrument::trusted(d, outcomes)
}

/// Instrument with one or two Kraus operators per outcome.
pub fn random_instrument<R: Rng + ?Sized>(rng: &mut R, d: usize, m: usize) -> Instrument {
    let rank = rng.random_range(1..=2);
    random_instrument_with_rank(rng, d, m, rank)
}

/// Channel with `rank` Kraus operators.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> Channel {
    Channel::trusted(Operation::trusted_kraus(complete_kraus_family(rng, d, rank)))
}

pub(crate) fn check_range(name: &str, value: usize, lo: usize, hi: usize) -> Result<()> {
    if value < lo || value > hi {
        return Err(Error::Shape(format!("{name} must lie in [{lo}, {hi}], got {value}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_residual;

    #[test]
    fn generated_objects_are_valid() {
        let mut rng = seeded(7);
        for d in 2..=4 {
            assert!(unitarity_residual(&random_unitary(&mut rng, d)) < 1e-12);
            let s = random_state(&mut rng, d);
            assert!(State::new(s.matrix().clone()).is_ok());
            assert!(Effect::new(random_effect(&mut rng, d).into_matrix()).is_ok());
            for m in 1..=4 {
                let a = random_observable(&mut rng, d, m);
                assert!(a.normalization_residual() < 1e-10, "d={d} m={m}");
                let c = random_commutative_observable(&mut rng, d, m);
                assert!(crate::observables::commute(&c, &c).unwrap());
                let i = random_instrument(&mut rng, d, m);
                let _ = Instrument::new(i.iter().map(|(l, o)| (l.clone(), o.clone())).collect()).unwrap();
            }
        }
    }

    #[test]
    fn same_seed_same_output() {
        let a = random_observable(&mut seeded(3), 3, 2);
        let b = random_observable(&mut seeded(3), 3, 2);
        assert_eq!(a, b);
    }
}
