//! Numerical search for a joint observable of two observables.
//!
//! The search alternates between the affine set of families `{C_xy}` with
//! marginals `A` and `B` and the set of families whose members are all at least
//! `SHIFT·1`. The starting point `(A_x B_y + B_y A_x)/2` already has the right
//! marginals and is positive whenever `A` and `B` commute. A failed search says
//! nothing definite: the result is then [`JointSearch::Unknown`].

use crate::effects::{Effect, SPECTRAL_TOLERANCE};
use crate::error::{dim_err, Result};
use crate::label::Label;
use crate::linalg::HermMatrix;
use crate::observables::Observable;
use crate::HMatrix;

/// Iteration cap for the alternating projections.
pub const MAX_ITERATIONS: usize = 500;
const SHIFT: f64 = 1e-10;

#[derive(Debug, Clone)]
pub enum JointSearch {
    /// A joint observable on `Ω_A × Ω_B`, labelled by product labels.
    Found(Observable),
    /// No joint observable found; `residual` is the most negative eigenvalue
    /// magnitude of the last iterate.
    Unknown { residual: f64 },
}

pub fn search_joint_observable(a: &Observable, b: &Observable) -> Result<JointSearch> {
    if a.dim() != b.dim() {
        return Err(dim_err("observables act on different spaces"));
    }
    let d = a.dim();
    let a_eff: Vec<&HMatrix> = a.effects().map(Effect::matrix).collect();
    let b_eff: Vec<&HMatrix> = b.effects().map(Effect::matrix).collect();
    let (m, n) = (a_eff.len(), b_eff.len());

    let mut c: Vec<HMatrix> = Vec::with_capacity(m * n);
    for ax in &a_eff {
        for by in &b_eff {
            let prod = ax.matmul(by)?;
            let sym = prod.try_add(&prod.adjoint())?.scale(0.5);
            c.push(HermMatrix::symmetrize(sym)?);
        }
    }

    let mut negativity = worst_negativity(&c)?;
    let mut iteration = 0;
    while negativity > SPECTRAL_TOLERANCE && iteration < MAX_ITERATIONS {
        for ci in c.iter_mut() {
            let shifted = ci.map_spectrum(|l| l.max(SHIFT))?;
            *ci = shifted;
        }
        project_marginals(&mut c, &a_eff, &b_eff, d)?;
        negativity = worst_negativity(&c)?;
        iteration += 1;
    }
    if negativity > SPECTRAL_TOLERANCE {
        return Ok(JointSearch::Unknown { residual: negativity });
    }

    let mut outcomes = Vec::with_capacity(m * n);
    let mut it = c.into_iter();
    for x in a.labels() {
        for y in b.labels() {
            let cxy = it.next().expect("m*n entries");
            outcomes.push((Label::product(x, y), Effect::new(cxy)?));
        }
    }
    Ok(JointSearch::Found(Observable::new(outcomes)?))
}

fn worst_negativity(c: &[HMatrix]) -> Result<f64> {
    let mut worst = 0.0f64;
    for ci in c {
        worst = worst.max(-ci.min_eigenvalue()?);
    }
    Ok(worst)
}

// Nearest family (entrywise in Frobenius norm) with prescribed row sums `A_x`
// and column sums `B_y`.
fn project_marginals(c: &mut [HMatrix], a: &[&HMatrix], b: &[&HMatrix], d: usize) -> Result<()> {
    let (m, n) = (a.len(), b.len());
    let mut r: Vec<HMatrix> = a.iter().map(|ax| (*ax).clone()).collect();
    let mut s: Vec<HMatrix> = b.iter().map(|by| (*by).clone()).collect();
    for x in 0..m {
        for y in 0..n {
            r[x] = r[x].sub(&c[x * n + y])?;
            s[y] = s[y].sub(&c[x * n + y])?;
        }
    }
    let mut total = HMatrix::zeros(d);
    for rx in &r {
        total = total.add(rx)?;
    }
    for sy in &s {
        total = total.add(sy)?;
    }
    let total = total.scale(0.5 / (m * n) as f64);
    for x in 0..m {
        for y in 0..n {
            let delta = r[x]
                .scale(1.0 / n as f64)
                .add(&s[y].scale(1.0 / m as f64))?
                .sub(&total)?;
            c[x * n + y] = c[x * n + y].add(&delta)?;
        }
    }
    Ok(())
}
