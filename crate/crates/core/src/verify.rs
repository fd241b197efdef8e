//! Randomized and stored-example checks of the measurement calculus, grouped
//! into named suites.
//!
//! Every suite is deterministic given the seed. A suite passes when all of its
//! closeness checks stay within tolerance and all of its separation checks
//! (stored counterexamples) show at least the required gap. The two converse
//! probes only search for counterexamples and always report `unknown`.

use std::fmt;

use rand::Rng;

use crate::effects::{
    self, atom, binary_labels, binary_observable, binary_observables_from_coexistence, check_coexistence_witness,
    CoexistenceWitness, Effect, State,
};
use crate::instruments::{
    self, channel, coexist_verify, identity_instrument, induced_observable, kraus_instrument,
    kraus_instrument_from_channel, luders_instrument, trivial_instrument, Channel, Instrument, Operation,
};
use crate::label::Label;
use crate::linalg::basis_vector;
use crate::models::{
    dilate_instrument, model_instrument, model_observable, normal_fimm_kraus_extract, luders_positivity_check,
    simultaneous_fimms, trivial_fimm, vn_measured, vn_model_for_commutative, VonNeumannModel,
};
use crate::observables::{
    self, classify, complementarity_residual, fourier_mub, joint_probability_then, max_commutator, Observable,
    StochasticMatrix,
};
use crate::random::{
    random_channel, random_commutative_observable, random_commuting_effects, random_instrument,
    random_kraus_instrument, random_observable, random_simplex, random_state, random_stochastic, random_unitary,
    seeded, Seeded,
};
use crate::{CMatrix, Error, HMatrix, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Unknown,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub id: &'static str,
    pub description: &'static str,
    pub trials: usize,
    pub max_residual: f64,
    /// Largest closeness tolerance used by the suite, after scaling.
    pub tolerance: f64,
    pub status: Status,
    pub seed: u64,
    pub notes: Vec<String>,
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<7} {:<18} trials={:<4} max_residual={:.3e} tol={:.1e} seed={}  {}",
            self.status, self.id, self.trials, self.max_residual, self.tolerance, self.seed, self.description
        )?;
        for note in &self.notes {
            write!(f, "\n        {note}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Config {
    pub seed: u64,
    /// Overrides every suite's default number of random trials.
    pub trials: Option<usize>,
    /// Multiplies closeness tolerances; separation thresholds are not scaled.
    pub tol_scale: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 42,
            trials: None,
            tol_scale: 1.0,
        }
    }
}

pub struct Suite {
    pub id: &'static str,
    pub description: &'static str,
    default_trials: usize,
    probe: bool,
    run: fn(&mut Ctx, usize) -> Result<()>,
}

const fn suite(
    id: &'static str,
    description: &'static str,
    default_trials: usize,
    run: fn(&mut Ctx, usize) -> Result<()>,
) -> Suite {
    Suite {
        id,
        description,
        default_trials,
        probe: false,
        run,
    }
}

const fn probe(
    id: &'static str,
    description: &'static str,
    default_trials: usize,
    run: fn(&mut Ctx, usize) -> Result<()>,
) -> Suite {
    Suite {
        id,
        description,
        default_trials,
        probe: true,
        run,
    }
}

static SUITES: &[Suite] = &[
    suite("lem-1.1", "commuting effects coexist via (a-ab, b-ab, ab); binary joint has the right marginals", 50, lem_1_1),
    suite("lem-1.2", "Fourier bases give complementary atomic observables; random bases do not", 8, lem_1_2),
    suite("thm-2.1", "J(K(A)) = A for random observables; K(J(I)) differs from a stored trivial instrument", 100, thm_2_1),
    suite("thm-2.2", "J is affine on instruments; K is not affine on a stored qubit pair", 100, thm_2_2),
    suite("thm-2.3", "J commutes with post-processing; K does not on a stored atomic observable", 100, thm_2_3),
    suite("lem-2.4", "instrument complementarity agrees with complementarity of the induced observables", 50, lem_2_4),
    suite("cor-2.5", "complementary Lüders instruments have complementary observables", 50, cor_2_5),
    suite("lem-2.6", "coexisting instruments induce coexisting observables and share their channel", 50, lem_2_6),
    suite("lem-3.1", "Lüders joint probabilities equal sequential-product joint probabilities", 100, lem_3_1),
    suite("thm-3.2", "Kraus instrument of a channel is an identity instrument exactly for the identity channel", 30, thm_3_2),
    suite("cor-3.3", "identity instruments have the identity channel", 50, cor_3_3),
    suite("lem-3.4", "channels of product, conditioned and composed instruments agree", 50, lem_3_4),
    suite("thm-4.1", "a dilated joint instrument splits into commuting sharp models for its marginals", 20, thm_4_1),
    suite("lem-4.2", "trivial instruments built from a joint observable coexist", 50, lem_4_2),
    suite("cor-4.3", "coexisting observables are measured by simultaneous commuting sharp models", 20, cor_4_3),
    suite("thm-4.4", "von Neumann model closed forms match the general model instrument", 50, thm_4_4),
    suite("cor-4.5", "von Neumann observables are commutative; commutative observables have a von Neumann model", 50, cor_4_5),
    suite("thm-4.6", "Kraus instruments dilate to atomic-pointer models; stored trivial instrument cannot", 20, thm_4_6),
    suite("cor-4.7", "normal models with positive Kraus blocks measure Lüders instruments", 20, cor_4_7),
    suite("thm-4.8", "swap models measure exactly the trivial instruments", 50, thm_4_8),
    suite("ex-1", "sequential product is not associative: 1/4 vs 1/2 on stored qubit atoms", 0, ex_1),
    suite("ex-2", "trivial instruments with full-rank effects are not Kraus instruments", 0, ex_2),
    suite("ex-3", "induced observable of a Kraus product is S*T*TS, not the sequential product", 100, ex_3),
    suite("ex-4", "Lüders products induce A∘B; K(A∘B) = K(A)∘K(B) exactly for commuting pairs", 100, ex_4),
    suite("ex-5", "identity instruments act as scalar weights under products and conditioning", 50, ex_5),
    suite("ex-6", "product of trivial instruments is trivial with weights tr(αB_y)", 50, ex_6),
    suite("ex-7", "joint probabilities of trivial instruments factorize", 100, ex_7),
    suite("ex-8", "Lüders joint probabilities depend only on the induced observables", 100, ex_8),
    probe("conj-2.5-converse", "search: complementary observables whose Lüders instruments are not complementary", 50, conj_2_5_converse),
    probe("conj-3.3-converse", "search: instruments with identity channel that are not identity instruments", 50, conj_3_3_converse),
];

pub fn suites() -> &'static [Suite] {
    SUITES
}

pub fn suite_ids() -> impl Iterator<Item = &'static str> {
    SUITES.iter().map(|s| s.id)
}

/// Runs the selected suites (all when `ids` is empty) in registry order.
/// An unknown id is reported as `Err` with that id.
pub fn run(ids: &[String], cfg: &Config) -> std::result::Result<Vec<Report>, String> {
    if let Some(bad) = ids.iter().find(|id| !SUITES.iter().any(|s| s.id == id.as_str())) {
        return Err(bad.clone());
    }
    Ok(SUITES
        .iter()
        .filter(|s| ids.is_empty() || ids.iter().any(|id| id == s.id))
        .map(|s| run_suite(s, cfg))
        .collect())
}

pub fn run_suite(s: &Suite, cfg: &Config) -> Report {
    let mut ctx = Ctx::new(suite_seed(cfg.seed, s.id), cfg.tol_scale);
    let n = cfg.trials.unwrap_or(s.default_trials);
    let outcome = (s.run)(&mut ctx, n);
    let mut notes: Vec<String> = ctx
        .gaps
        .iter()
        .map(|(what, gap, min, count)| match count {
            1 => format!("{what}: gap {gap:.4e} (required {min:.0e})"),
            _ => format!("{what}: smallest gap {gap:.4e} over {count} cases (required {min:.0e})"),
        })
        .collect();
    notes.extend(ctx.notes);
    let status = match outcome {
        Err(e) => {
            notes.push(format!("error: {e}"));
            Status::Fail
        }
        Ok(()) if !ctx.failures.is_empty() => Status::Fail,
        Ok(()) if s.probe => Status::Unknown,
        Ok(()) => Status::Pass,
    };
    let shown = ctx.failures.len().min(MAX_FAILURE_NOTES);
    notes.extend(ctx.failures.iter().take(shown).cloned());
    if ctx.failures.len() > shown {
        notes.push(format!("... {} more failed checks", ctx.failures.len() - shown));
    }
    Report {
        id: s.id,
        description: s.description,
        trials: ctx.trials,
        max_residual: ctx.max_residual,
        tolerance: ctx.tolerance,
        status,
        seed: cfg.seed,
        notes,
    }
}

const MAX_FAILURE_NOTES: usize = 5;

// FNV-1a of the id mixed into the user seed, so suites draw independent streams.
fn suite_seed(seed: u64, id: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in id.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    seed ^ h
}

pub struct Ctx {
    rng: Seeded,
    scale: f64,
    trials: usize,
    max_residual: f64,
    tolerance: f64,
    failures: Vec<String>,
    notes: Vec<String>,
    // (check, smallest gap seen, required gap, count)
    gaps: Vec<(String, f64, f64, usize)>,
}

impl Ctx {
    fn new(seed: u64, scale: f64) -> Self {
        Self {
            rng: seeded(seed),
            scale,
            trials: 0,
            max_residual: 0.0,
            tolerance: 0.0,
            failures: Vec::new(),
            notes: Vec::new(),
            gaps: Vec::new(),
        }
    }

    /// `residual ≤ tol · scale`.
    fn close(&mut self, what: &str, residual: f64, tol: f64) {
        let tol = tol * self.scale;
        self.tolerance = self.tolerance.max(tol);
        if residual.is_nan() {
            self.max_residual = f64::NAN;
        } else if !self.max_residual.is_nan() {
            self.max_residual = self.max_residual.max(residual);
        }
        // negated so that NaN fails
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(residual <= tol) {
            self.failures.push(format!("{what}: residual {residual:.3e} exceeds {tol:.1e}"));
        }
    }

    /// `gap ≥ min`, for counterexamples. The smallest gap per check is reported.
    fn separated(&mut self, what: &str, gap: f64, min: f64) {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(gap >= min) {
            self.failures.push(format!("{what}: gap {gap:.3e} below {min:.0e}"));
        }
        match self.gaps.iter_mut().find(|g| g.0 == what) {
            Some(g) => {
                g.1 = g.1.min(gap);
                g.3 += 1;
            }
            None => self.gaps.push((what.to_owned(), gap, min, 1)),
        }
    }

    fn holds(&mut self, what: &str, cond: bool) {
        if !cond {
            self.failures.push(format!("{what}: does not hold"));
        }
    }

    fn note(&mut self, note: String) {
        self.notes.push(note);
    }

    fn trial(&mut self) {
        self.trials += 1;
    }

    fn dim(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.random_range(lo..=hi)
    }
}

fn obs_dist(a: &Observable, b: &Observable) -> f64 {
    a.max_distance(b).unwrap_or(f64::INFINITY)
}

fn instr_dist(a: &Instrument, b: &Instrument) -> f64 {
    a.max_distance(b).unwrap_or(f64::INFINITY)
}

fn herm_dist(a: &HMatrix, b: &HMatrix) -> f64 {
    a.distance(b).unwrap_or(f64::INFINITY)
}

fn trace_with(rho: &State, e: &HMatrix) -> Result<f64> {
    Ok(rho.matrix().matmul(e)?.trace().re)
}

fn random_subset(rng: &mut Seeded, labels: &[Label]) -> Vec<Label> {
    let mut out: Vec<Label> = labels.iter().filter(|_| rng.random_bool(0.5)).cloned().collect();
    if out.is_empty() {
        out.push(labels[rng.random_range(0..labels.len())].clone());
    }
    out
}

fn diag_effect(diag: &[f64]) -> Result<Effect> {
    Effect::new(HMatrix::from_real_diag(diag))
}

/// Qubit observables of the standard and Fourier bases, labels `"0"`, `"1"`.
fn qubit_z_x() -> Result<(Observable, Observable)> {
    let (e, f) = fourier_mub(2)?;
    Ok((Observable::from_basis(&e)?, Observable::from_basis(&f)?))
}

/// Standard and Fourier bases rotated by a common random unitary.
fn rotated_mub(rng: &mut Seeded, d: usize) -> Result<(Observable, Observable)> {
    let (e, f) = fourier_mub(d)?;
    let w = random_unitary(rng, d);
    Ok((Observable::from_basis(&w.matmul(&e)?)?, Observable::from_basis(&w.matmul(&f)?)?))
}

/// Commuting pair sharing a random eigenbasis.
fn commuting_pair(rng: &mut Seeded, d: usize, m1: usize, m2: usize) -> Result<(Observable, Observable)> {
    let u = random_unitary(rng, d);
    let mut build = |m: usize| -> Result<Observable> {
        let weights: Vec<Vec<f64>> = (0..d).map(|_| random_simplex(rng, m)).collect();
        let outcomes = Label::range(m)
            .into_iter()
            .enumerate()
            .map(|(x, l)| {
                let diag: Vec<f64> = weights.iter().map(|w| w[x]).collect();
                Ok((l, Effect::new(HMatrix::from_real_diag(&diag).congruence(&u)?)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Observable::new(outcomes)
    };
    Ok((build(m1)?, build(m2)?))
}

/// Trivial qubit instrument `ρ ↦ tr(ρA_x)P_{e₁}` with `A = {diag(.7,.4), diag(.3,.6)}`;
/// both effects have full rank, so both outcome Choi matrices have rank 2.
pub fn stored_trivial_instrument() -> Result<Instrument> {
    let a = Observable::new(vec![
        (Label::from("0"), diag_effect(&[0.7, 0.4])?),
        (Label::from("1"), diag_effect(&[0.3, 0.6])?),
    ])?;
    trivial_instrument(&a, &State::pure(&basis_vector(2, 0))?)
}

/// Largest distance of an outcome from `λ_x` times the identity operation.
fn identity_instrument_residual(i: &Instrument) -> Result<f64> {
    let d = i.dim();
    let id = Operation::identity(d);
    let mut worst = 0.0f64;
    for op in i.operations() {
        let lambda = op.induced_effect().matrix().real_trace() / d as f64;
        worst = worst.max(op.distance(&id.scaled(lambda))?);
    }
    Ok(worst)
}

fn lem_1_1(ctx: &mut Ctx, n: usize) -> Result<()> {
    for _ in 0..n {
        ctx.trial();
        let d = ctx.dim(2, 4);
        let (a, b) = random_commuting_effects(&mut ctx.rng, d);
        let ab = HMatrix::symmetrize(a.matrix().matmul(b.matrix())?)?;
        let w = CoexistenceWitness {
            a1: Effect::new(a.matrix().sub(&ab)?)?,
            b1: Effect::new(b.matrix().sub(&ab)?)?,
            c: Effect::new(ab)?,
        };
        ctx.holds("witness (a-ab, b-ab, ab) is valid", check_coexistence_witness(&a, &b, &w));
        let joint = binary_observables_from_coexistence(&a, &b, &w)?;
        let labels = binary_labels();
        let (first, second) = observables::marginals(&joint, &labels, &labels)?;
        ctx.close("first marginal = {a, a'}", obs_dist(&first, &binary_observable(&a)), 1e-8);
        ctx.close("second marginal = {b, b'}", obs_dist(&second, &binary_observable(&b)), 1e-8);

        // reading the witness back off the joint observable
        let [one, two] = labels;
        let back = CoexistenceWitness {
            a1: joint.effect(&Label::product(&one, &two))?.clone(),
            b1: joint.effect(&Label::product(&two, &one))?.clone(),
            c: joint.effect(&Label::product(&one, &one))?.clone(),
        };
        ctx.holds("witness recovered from joint is valid", check_coexistence_witness(&a, &b, &back));
    }
    Ok(())
}

fn lem_1_2(ctx: &mut Ctx, n: usize) -> Result<()> {
    for d in 2..=5 {
        let (e, f) = fourier_mub(d)?;
        let a = Observable::from_basis(&e)?;
        let b = Observable::from_basis(&f)?;
        ctx.holds("Fourier observables are atomic", classify(&a).atomic && classify(&b).atomic);
        ctx.close(&format!("Fourier pair d={d} complementary"), complementarity_residual(&a, &b)?, 1e-9);
    }
    for t in 0..n {
        ctx.trial();
        let d = 2 + t % 4;
        let a = Observable::from_basis(&random_unitary(&mut ctx.rng, d))?;
        let b = Observable::from_basis(&random_unitary(&mut ctx.rng, d))?;
        ctx.separated("random bases", complementarity_residual(&a, &b)?, 1e-3);
    }
    Ok(())
}

fn thm_2_1(ctx: &mut Ctx, n: usize) -> Result<()> {
    for _ in 0..n {
        ctx.trial();
        let d = ctx.dim(2, 4);
        let m = ctx.dim(2, 4);
        let a = random_observable(&mut ctx.rng, d, m);
        let l = luders_instrument(&a);
        ctx.close("J(K(A)) = A", obs_dist(&induced_observable(&l), &a), 1e-9);
        ctx.close("K(J(L)) = L for Lüders L", instr_dist(&luders_instrument(&induced_observable(&l)), &l), 1e-9);
    }
    let t = stored_trivial_instrument()?;
    let kj = luders_instrument(&induced_observable(&t));
    ctx.separated("K(J(I)) vs stored trivial I", instr_dist(&kj, &t), 1e-3);
    Ok(())
}

fn thm_2_2(ctx: &mut Ctx, n: usize) -> Result<()> {
    for _ in 0..n {
        ctx.trial();
        let d = ctx.dim(2, 4);
        let m = ctx.dim(2, 4);
        let i1 = random_instrument(&mut ctx.rng, d, m);
        let i2 = random_instrument(&mut ctx.rng, d, m);
        let lambda: f64 = ctx.rng.random();
        let w = [lambda, 1.0 - lambda];
        let mixed = instruments::convex_combination(&w, &[i1.clone(), i2.clone()])?;
        let expected =
            observables::convex_combination(&w, &[induced_observable(&i1), induced_observable(&i2)])?;
        ctx.close("J(λI + (1-λ)I') = λJ(I) + (1-λ)J(I')", obs_dist(&induced_observable(&mixed), &expected), 1e-9);
    }
    let (z, x) = qubit_z_x()?;
    let rho = State::pure(&basis_vector(2, 0))?;
    let mix = observables::convex_combination(&[0.5, 0.5], &[z.clone(), x.clone()])?;
    let (k_mix, k_z, k_x) = (luders_instrument(&mix), luders_instrument(&z), luders_instrument(&x));
    let mut gap = 0.0f64;
    for l in mix.labels() {
        let lhs = k_mix.operation(l)?.apply_herm(rho.matrix())?;
        let rhs = k_z
            .operation(l)?
            .apply_herm(rho.matrix())?
            .scale(0.5)
            .add(&k_x.operation(l)?.apply_herm(rho.matrix())?.scale(0.5))?;
        gap = gap.max(herm_dist(&lhs, &rhs));
    }
    ctx.separated("K(Z/2 + X/2)(P_e1) vs mixture of K(Z), K(X)", gap, 1e-2);
    Ok(())
}

fn thm_2_3(ctx: &mut Ctx, n: usize) -> Result<()> {
    for _ in 0..n {
        ctx.trial();
        let d = ctx.dim(2, 4);
        let m = ctx.dim(2, 4);
        let targets = ctx.dim(1, 4);
        let i = random_instrument(&mut ctx.rng, d, m);
        let nu = random_stochastic(&mut ctx.rng, i.label_vec(), targets);
        let lhs = induced_observable(&instruments::post_process(&nu, &i)?);
        let rhs = observables::post_process(&nu, &induced_observable(&i))?;
        ctx.close("J(ν•I) = ν•J(I)", obs_dist(&lhs, &rhs), 1e-9);
    }
    let (z, _) = qubit_z_x()?;
    let nu = StochasticMatrix::new(z.label_vec(), Label::range(2), vec![vec![0.5, 0.5], vec![0.5, 0.5]])?;
    let lhs = luders_instrument(&observables::post_process(&nu, &z)?);
    let rhs = instruments::post_process(&nu, &luders_instrument(&z))?;
    ctx.separated("K(ν•Z) vs ν•K(Z) with uniform ν", instr_dist(&lhs, &rhs), 1e-3);
    Ok(())
}

// Pairs of instruments whose induced observables are complementary for kinds 0-2
// and generic for kind 3.
fn complementarity_pair(ctx: &mut Ctx, kind: usize) -> Result<(Instrument, Instrument)> {
    let d = ctx.dim(2, 3);
    match kind {
        0 => {
            let (a, b) = rotated_mub(&mut ctx.rng, d)?;
            Ok((luders_instrument(&a), luders_instrument(&b)))
        }
        1 => {
            let (a, b) = rotated_mub(&mut ctx.rng, d)?;
            let alpha = random_state(&mut ctx.rng, d);
            let beta = random_state(&mut ctx.rng, d);
            Ok((trivial_instrument(&a, &alpha)?, trivial_instrument(&b, &beta)?))
        }
        2 => {
            let (a, b) = rotated_mub(&mut ctx.rng, d)?;
            let twisted = |ctx: &mut Ctx, obs: &Observable| -> Result<Instrument> {
                let ops = obs
                    .iter()
                    .map(|(l, e)| Ok((l.clone(), random_unitary(&mut ctx.rng, d).matmul(&e.sqrt())?)))
                    .collect::<Result<Vec<_>>>()?;
                kraus_instrument(ops)
            };
            Ok((twisted(ctx, &a)?, twisted(ctx, &b)?))
        }
        _ => {
            let m1 = ctx.dim(2, 3);
            let m2 = ctx.dim(2, 3);
            Ok((random_instrument(&mut ctx.rng, d, m1), random_instrument(&mut ctx.rng, d, m2)))
        }
    }
}

fn lem_2_4(ctx: &mut Ctx, n: usize) -> Result<()> {
    let (mut yes, mut no) = (0, 0);
    for t in 0..n {
        ctx.trial();
        let (i, j) = complementarity_pair(ctx, t % 4)?;
        let instr = instruments::complementary(&i, &j)?;
        let obs = observables::complementary(&induced_observable(&i), &induced_observable(&j))?;
        ctx.holds("instrument and observable complementarity agree", instr == obs);
        if t % 4 < 3 {
            ctx.close("constructed complementary pair", instruments::complementarity_residual(&i, &j)?, 1e-8);
        }
        if instr {
            yes += 1;
        } else {
            no += 1;
        }
    }
    ctx.note(format!("{yes} complementary and {no} non-complementary pairs"));
    if n >= 4 {
        ctx.holds("both outcomes exercised", yes > 0 && no > 0);
    }
    Ok(())
}

fn cor_2_5(ctx: &mut Ctx, n: usize) -> Result<()> {
    let mut premises = 0;
    for t in 0..n {
        ctx.trial();
        let d = ctx.dim(2, 4);
        let (a, b) = if t % 2 == 0 {
            rotated_mub(&mut ctx.rng, d)?
        } else {
            let m1 = ctx.dim(2, 4);
            let m2 = ctx.dim(2, 4);
            (random_observable(&mut ctx.rng, d, m1), random_observable(&mut ctx.rng, d, m2))
        };
        if instruments::complementary(&luders_instrument(&a), &luders_instrument(&b))? {
            premises += 1;
            ctx.close("A, B complementary", complementarity_residual(&a, &b)?, 1e-8);
        }
    }
    ctx.note(format!("{premises} pairs with complementary Lüders instruments"));
    if n >= 1 {
        ctx.holds("premise exercised", premises > 0);
    }
    Ok(())
}

fn lem_2_6(ctx: &mut Ctx, n: usize) -> Result<()> {
    for _ in 0..n {
        ctx.trial();
        let d = ctx.dim(2, 3);
        let m1 = ctx.dim(2, 3);
        let m2 = ctx.dim(2, 3);
        let p = random_instrument(&mut ctx.rng, d, m1);
        let q = random_instrument(&mut ctx.rng, d, m2);
        let joint = instruments::product(&p, &q)?;
        let (i, j) = instruments::marginals(&joint, &p.label_vec(), &q.label_vec())?;
        ctx.holds("joint instrument has marginals I, J", coexist_verify(&i, &j, &joint)?);
        ctx.holds(
            "J(joint) is a joint observable for J(I), J(J)",
            observables::coexist_verify(&induced_observable(&i), &induced_observable(&j), &induced_observable(&joint))?,
        );
        ctx.close("coexisting instruments share their channel", channel(&i).distance(&channel(&j))?, 1e-9);

        // joint of K(A) with itself for a sharp A
        let a = Observable::from_basis(&random_unitary(&mut ctx.rng, d))?;
        let la = luders_instrument(&a);
        let mut outcomes = Vec::new();
        for (x, op) in la.iter() {
            for y in la.labels() {
                let o = if x == y { op.clone() } else { Operation::zero(d) };
                outcomes.push((Label::product(x, y), o));
            }
        }
        let diag = Instrument::new(outcomes)?;
        ctx.holds("K(A) coexists with itself", coexist_verify(&la, &la, &diag)?);
        ctx.holds("A coexists with itself", observables::coexist_verify(&a, &a, &induced_observable(&diag))?);
    }
    Ok(())
}

fn lem_3_1(ctx: &mut Ctx, n: usize) -> Result<()> {
    for _ in 0..n {
        ctx.trial();
        let d = ctx.dim(2, 4);
        let m1 = ctx.dim(2, 4);
        let m2 = ctx.dim(2, 4);
        let rho = random_state(&mut ctx.rng, d);
        let a = random_observable(&mut ctx.rng, d, m1);
        let b = random_observable(&mut ctx.rng, d, m2);
        let x = random_subset(&mut ctx.rng, &a.label_vec());
        let y = random_subset(&mut ctx.rng, &b.label_vec());
        let lhs = instruments::joint_probability(&rho, &luders_instrument(&a), &x, &luders_instrument(&b), &y)?;
        let rhs = joint_probability_then(&rho, &a, &x, &b, &y)?;
        ctx.close("P(K(A)_X then K(B)_Y) = P(A_X then B_Y)", (lhs - rhs).abs(), 1e-10);
    }
    Ok(())
}

fn thm_3_2(ctx: &mut Ctx, n: usize) -> Result<()> {
    for d in 2..=4 {
        let id = Channel::identity(d);
        let i = kraus_instrument_from_channel(&id);
        ctx.close(&format!("Kraus instrument of identity d={d} is an identity instrument"), identity_instrument_residual(&i)?, 1e-9);
        ctx.close("its channel is the identity", channel(&i).distance(&id)?, 1e-9);
    }
    for t in 0..n {
        ctx.trial();
        let d = ctx.dim(2, 4);
        let rank = 1 + t % 3;
        let ch = if rank == 1 {
            Channel::unitary(&random_unitary(&mut ctx.rng, d))?
        } else {
            random_channel(&mut ctx.rng, d, rank)
        };
        let i = kraus_instrument_from_channel(&ch);
        ctx.close("channel of the Kraus instrument", channel(&i).distance(&ch)?, 1e-9);
        let away = ch.distance(&Channel::identity(d))?;
        if away > 1e-3 {
            ctx.separated("non-identity channel gives a non-identity instrument", identity_instrument_residual(&i)?, 1e-3);
        }
    }
    Ok(())
}

fn cor_3_3(ctx: &mut Ctx, n: usize) -> Result<()> {
    for _ in 0..n {
        ctx.trial();
        let d = ctx.dim(2, 4);
        let m = ctx.dim(1, 4);
        let w = random_simplex(&mut ctx.rng, m);
        let weights: Vec<(Label, f64)> = Label::range(m).into_iter().zip(w).collect();
        let id = identity_instrument(d, &weights)?;
        ctx.close("channel of an identity instrument", channel(&id).distance(&Channel::identity(d))?, 1e-9);
    }
    Ok(())
}

fn lem_3_4(ctx: &mut Ctx, n: usize) -> Result<()> {
    for _ in 0..n {
        ctx.trial();
        let d = ctx.dim(2, 4);
        let m1 = ctx.dim(2, 3);
        let m2 = ctx.dim(2, 3);
        let i = random_instrument(&mut ctx.rng, d, m1);
        let j = random_instrument(&mut ctx.rng, d, m2);
        let prod = channel(&instruments::product(&i, &j)?);
        let cond = channel(&instruments::conditioned(&i, &j)?);
        let comp = channel(&i).then(&channel(&j))?;
        ctx.close("product channel = conditioned channel", prod.distance(&cond)?, 1e-9);
        ctx.close("product channel = composed channels", prod.distance(&comp)?, 1e-9);
        ctx.close("conditioned channel = composed channels", cond.distance(&comp)?, 1e-9);
    }
    Ok(())
}

fn thm_4_1(ctx: &mut Ctx, n: usize) -> Result<()> {
    for _ in 0..n {
        ctx.trial();
        let d = ctx.dim(2, 3);
        let m1 = ctx.dim(2, 3);
        let m2 = ctx.dim(2, 3);
        let p = random_instrument(&mut ctx.rng, d, m1);
        let q = random_instrument(&mut ctx.rng, d, m2);
        let joint = instruments::product(&p, &q)?;
        let (first, second) = (p.label_vec(), q.label_vec());
        let (i, j) = instruments::marginals(&joint, &first, &second)?;
        let (f1, f2) = simultaneous_fimms(&joint, &first, &second)?;
        ctx.holds("both pointers sharp", f1.is_sharp() && f2.is_sharp());
        ctx.holds("models share probe state and interaction", f1.eta() == f2.eta() && f1.interaction() == f2.interaction());
        ctx.close("pointers commute", max_commutator(f1.pointer(), f2.pointer()), 1e-8);
        ctx.close("first model measures first marginal", instr_dist(&model_instrument(&f1)?, &i), 1e-7);
        ctx.close("second model measures second marginal", instr_dist(&model_instrument(&f2)?, &j), 1e-7);
    }
    Ok(())
}

// Joint observable A∘B for A and (B|A), with the trivial joint instrument over it.
fn trivial_joint(ctx: &mut Ctx) -> Result<(Observable, Observable, Observable, State, Instrument)> {
    let d = ctx.dim(2, 3);
    let m1 = ctx.dim(2, 3);
    let m2 = ctx.dim(2, 3);
    let a = random_observable(&mut ctx.rng, d, m1);
    let b = random_observable(&mut ctx.rng, d, m2);
    let c = observables::seq_product(&a, &b)?;
    let b_given_a = observables::conditioned(&a, &b)?;
    let alpha = random_state(&mut ctx.rng, d);
    let joint = trivial_instrument(&c, &alpha)?;
    Ok((a, b_given_a, c, alpha, joint))
}

fn lem_4_2(ctx: &mut Ctx, n: usize) -> Result<()> {
    for _ in 0..n {
        ctx.trial();
        let (a, b, c, alpha, joint) = trivial_joint(ctx)?;
        ctx.holds("C is a joint observable for A, (B|A)", observables::coexist_verify(&a, &b, &c)?);
        let i = trivial_instrument(&a, &alpha)?;
        let j = trivial_instrument(&b, &alpha)?;
        ctx.holds("trivial instruments coexist", coexist_verify(&i, &j, &joint)?);
        ctx.close("first is A-compatible", obs_dist(&induced_observable(&i), &a), 1e-9);
        ctx.close("second is (B|A)-compatible", obs_dist(&induced_observable(&j), &b), 1e-9);
    }
    Ok(())
}

fn cor_4_3(ctx: &mut Ctx, n: usize) -> Result<()> {
    for _ in 0..n {
        ctx.trial();
        let (a, b, c, _, joint) = trivial_joint(ctx)?;
        let (f1, f2) = simultaneous_fimms(&joint, &a.label_vec(), &b.label_vec())?;
        ctx.holds("both pointers sharp", f1.is_sharp() && f2.is_sharp());
        ctx.close("pointers commute", max_commutator(f1.pointer(), f2.pointer()), 1e-8);
        ctx.close("first model observable = A", obs_dist(&model_observable(&f1)?, &a), 1e-7);
        ctx.close("second model observable = (B|A)", obs_dist(&model_observable(&f2)?, &b), 1e-7);
        let whole = dilate_instrument(&joint)?;
        ctx.close("joint pointer measures the joint observable", obs_dist(&model_observable(&whole)?, &c), 1e-7);
    }
    Ok(())
}

fn random_vn_model(ctx: &mut Ctx) -> Result<VonNeumannModel> {
    let d = ctx.dim(2, 3);
    let m = ctx.dim(2, 4);
    let base = random_unitary(&mut ctx.rng, d);
    let probe = random_unitary(&mut ctx.rng, d);
    let pointer = random_observable(&mut ctx.rng, d, m);
    VonNeumannModel::new(base, probe, pointer)
}

fn thm_4_4(ctx: &mut Ctx, n: usize) -> Result<()> {
    for _ in 0..n {
        ctx.trial();
        let vn = random_vn_model(ctx)?;
        let (instr, ch, obs) = vn_measured(&vn)?;
        let general = model_instrument(&vn.to_fimm()?)?;
        ctx.close("closed-form instrument = model instrument", instr_dist(&instr, &general), 1e-8);
        ctx.close("closed-form channel = model channel", ch.distance(&channel(&general))?, 1e-8);
        ctx.close("channel is idempotent", ch.then(&ch)?.distance(&ch)?, 1e-9);

        // A_x = Σ_i ⟨φ_i, F_x φ_i⟩ P_{ψ_i}
        let d = vn.dim();
        let mut expected = Vec::new();
        for (l, f) in vn.pointer().iter() {
            let mut acc = HMatrix::zeros(d);
            for i in 0..d {
                let phi = vn.probe().column(i);
                let w = crate::linalg::inner(&phi, &f.matrix().matvec(&phi)?).re;
                acc = acc.add(&HMatrix::projector_onto(&vn.base().column(i)).scale(w))?;
            }
            expected.push((l.clone(), Effect::new(acc)?));
        }
        ctx.close("observable = Σ ⟨φ_i, F φ_i⟩ P_ψi", obs_dist(&obs, &Observable::new(expected)?), 1e-9);
    }
    Ok(())
}

fn cor_4_5(ctx: &mut Ctx, n: usize) -> Result<()> {
    for _ in 0..n {
        ctx.trial();
        let vn = random_vn_model(ctx)?;
        let (_, _, obs) = vn_measured(&vn)?;
        ctx.close("measured observable is commutative", max_commutator(&obs, &obs), 1e-8);

        let d = ctx.dim(2, 3);
        let m = ctx.dim(1, 4);
        let a = random_commutative_observable(&mut ctx.rng, d, m);
        let (_, _, back) = vn_measured(&vn_model_for_commutative(&a)?)?;
        ctx.close("commutative observable round-trips", obs_dist(&back, &a), 1e-8);
    }
    Ok(())
}

fn thm_4_6(ctx: &mut Ctx, n: usize) -> Result<()> {
    for _ in 0..n {
        ctx.trial();
        let d = ctx.dim(2, 3);
        let m = ctx.dim(2, 4);
        let k = random_kraus_instrument(&mut ctx.rng, d, m);
        let model = dilate_instrument(&k)?;
        let cls = classify(model.pointer());
        ctx.holds("Kraus dilation has an atomic sharp pointer", cls.atomic && cls.sharp);
        ctx.close("Kraus dilation round trip", instr_dist(&model_instrument(&model)?, &k), 1e-7);
        for (l, s) in normal_fimm_kraus_extract(&model)? {
            let sts = HMatrix::symmetrize(s.adjoint().matmul(&s)?)?;
            let orig = k.operation(&l)?.induced_effect();
            ctx.close("extracted S*S = original S*S", herm_dist(&sts, orig.matrix()), 1e-8);
        }

        let general = random_instrument(&mut ctx.rng, d, m);
        ctx.close("general dilation round trip", instr_dist(&model_instrument(&dilate_instrument(&general)?)?, &general), 1e-7);
    }
    let t = stored_trivial_instrument()?;
    let min_rank = t.operations().map(Operation::kraus_rank).min().unwrap_or(0);
    ctx.holds("stored trivial instrument has Choi rank >= 2 everywhere", min_rank >= 2);
    let model = dilate_instrument(&t)?;
    let cls = classify(model.pointer());
    ctx.holds("its dilation pointer is sharp", cls.sharp);
    ctx.holds("its dilation pointer is not atomic", !cls.atomic);
    ctx.holds("no Kraus operators can be extracted", matches!(normal_fimm_kraus_extract(&model), Err(Error::NotNormal(_))));
    ctx.close("its dilation still measures it", instr_dist(&model_instrument(&model)?, &t), 1e-7);
    Ok(())
}

fn cor_4_7(ctx: &mut Ctx, n: usize) -> Result<()> {
    for _ in 0..n {
        ctx.trial();
        let d = ctx.dim(2, 3);
        let m = ctx.dim(2, 4);
        let a = random_observable(&mut ctx.rng, d, m);
        let l = luders_instrument(&a);
        let model = dilate_instrument(&l)?;
        ctx.holds("Lüders dilation passes the positivity check", luders_positivity_check(&model)?);
        ctx.close("Lüders dilation round trip", instr_dist(&model_instrument(&model)?, &l), 1e-7);

        let v = random_unitary(&mut ctx.rng, d);
        let ops = a.iter().map(|(x, e)| Ok((x.clone(), v.matmul(&e.sqrt())?))).collect::<Result<Vec<_>>>()?;
        let twisted = kraus_instrument(ops)?;
        let twisted_model = dilate_instrument(&twisted)?;
        if instr_dist(&twisted, &l) > 1e-3 {
            ctx.holds("non-Lüders Kraus model fails the positivity check", !luders_positivity_check(&twisted_model)?);
        }
    }
    Ok(())
}

fn thm_4_8(ctx: &mut Ctx, n: usize) -> Result<()> {
    for _ in 0..n {
        ctx.trial();
        let d = ctx.dim(2, 3);
        let m = ctx.dim(1, 4);

        // forward: a swap model measures tr(ρF_x)η
        let eta = random_state(&mut ctx.rng, d);
        let f = random_observable(&mut ctx.rng, d, m);
        let swap = trivial_fimm(eta.clone(), f.clone())?;
        ctx.close("swap model instrument is trivial", instr_dist(&model_instrument(&swap)?, &trivial_instrument(&f, &eta)?), 1e-8);

        // converse: recover (A, α) from a trivial instrument and rebuild it
        let a = random_observable(&mut ctx.rng, d, m);
        let alpha = random_state(&mut ctx.rng, d);
        let t = trivial_instrument(&a, &alpha)?;
        let recovered_a = induced_observable(&t);
        let out = channel(&t).apply(&State::maximally_mixed(d))?;
        let rebuilt = trivial_fimm(out, recovered_a)?;
        ctx.close("trivial instrument measured by a swap model", instr_dist(&model_instrument(&rebuilt)?, &t), 1e-8);
    }
    Ok(())
}

fn ex_1(ctx: &mut Ctx, _n: usize) -> Result<()> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let e1 = basis_vector::<f64>(2, 0);
    let beta = vec![C64::new(s, 0.0), C64::new(s, 0.0)];
    let a = atom(&e1)?;
    let b = atom(&beta)?;
    let c = atom(&e1)?;
    let left = effects::seq_product(&a, &effects::seq_product(&b, &c)?)?;
    let right = effects::seq_product(&effects::seq_product(&a, &b)?, &c)?;
    let p = HMatrix::projector_onto(&e1);
    ctx.close("a∘(b∘c) = P/4", herm_dist(left.matrix(), &p.scale(0.25)), 1e-10);
    ctx.close("(a∘b)∘c = P/2", herm_dist(right.matrix(), &p.scale(0.5)), 1e-10);
    let diff = right.matrix().sub(left.matrix())?.eig()?;
    let op_norm = diff.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    ctx.close("operator-norm gap = 1/4", (op_norm - 0.25).abs(), 1e-10);
    ctx.note(format!("operator-norm gap {op_norm:.17}"));
    Ok(())
}

fn ex_2(ctx: &mut Ctx, _n: usize) -> Result<()> {
    let t = stored_trivial_instrument()?;
    for (l, op) in t.iter() {
        ctx.holds(&format!("outcome {l} has Choi rank 2"), op.kraus_rank() == 2 && !op.is_single_kraus());
    }
    let (z, _) = qubit_z_x()?;
    let atomic = trivial_instrument(&z, &State::pure(&basis_vector(2, 1))?)?;
    ctx.holds("trivial instrument of an atomic observable is a Kraus instrument", atomic.is_kraus_instrument());
    Ok(())
}

fn ex_3(ctx: &mut Ctx, n: usize) -> Result<()> {
    for _ in 0..n {
        ctx.trial();
        let d = ctx.dim(2, 4);
        let m1 = ctx.dim(2, 3);
        let m2 = ctx.dim(2, 3);
        let i = random_kraus_instrument(&mut ctx.rng, d, m1);
        let j = random_kraus_instrument(&mut ctx.rng, d, m2);
        let prod = induced_observable(&instruments::product(&i, &j)?);
        let cond = induced_observable(&instruments::conditioned(&i, &j)?);
        let mut cond_expected: Vec<HMatrix> = vec![HMatrix::zeros(d); j.len()];
        for (x, si) in i.iter() {
            let s = &si.kraus()[0];
            for (k, (y, tj)) in j.iter().enumerate() {
                let t = &tj.kraus()[0];
                let ts = t.matmul(s)?;
                let expected = HMatrix::symmetrize(ts.adjoint().matmul(&ts)?)?;
                let got = prod.effect(&Label::product(x, y))?;
                ctx.close("J(I∘J) = S*T*TS", herm_dist(got.matrix(), &expected), 1e-9);
                cond_expected[k] = cond_expected[k].add(&expected)?;
            }
        }
        for (k, y) in j.labels().enumerate() {
            ctx.close("J(J|I) = Σ S*T*TS", herm_dist(cond.effect(y)?.matrix(), &cond_expected[k]), 1e-9);
        }
    }
    // S_x = U_x/√2 with U = {1, σ_x}; T†T diagonal and not commuting with σ_x
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let zero = C64::new(0.0, 0.0);
    let sigma_x = CMatrix::from_rows(vec![vec![zero, C64::new(1.0, 0.0)], vec![C64::new(1.0, 0.0), zero]])?;
    let i = kraus_instrument(vec![
        (Label::from("0"), CMatrix::identity(2).scale(r)),
        (Label::from("1"), sigma_x.scale(r)),
    ])?;
    let t = |a: f64, b: f64| CMatrix::from_real_diag(&[a.sqrt(), b.sqrt()]);
    let j = kraus_instrument(vec![(Label::from("0"), t(0.8, 0.3)), (Label::from("1"), t(0.2, 0.7))])?;
    let lhs = induced_observable(&instruments::product(&i, &j)?);
    let rhs = observables::seq_product(&induced_observable(&i), &induced_observable(&j))?;
    ctx.separated("J(I∘J) vs J(I)∘J(J) for S = U/√n", obs_dist(&lhs, &rhs), 1e-3);
    Ok(())
}

fn ex_4(ctx: &mut Ctx, n: usize) -> Result<()> {
    for _ in 0..n {
        ctx.trial();
        let d = ctx.dim(2, 4);
        let m1 = ctx.dim(2, 3);
        let m2 = ctx.dim(2, 3);
        let a = random_observable(&mut ctx.rng, d, m1);
        let b = random_observable(&mut ctx.rng, d, m2);
        let (la, lb) = (luders_instrument(&a), luders_instrument(&b));
        let ab = observables::seq_product(&a, &b)?;
        let prod = instruments::product(&la, &lb)?;
        ctx.close("J(L^A∘L^B) = A∘B", obs_dist(&induced_observable(&prod), &ab), 1e-9);
        ctx.close(
            "J(L^B|L^A) = (B|A)",
            obs_dist(&induced_observable(&instruments::conditioned(&la, &lb)?), &observables::conditioned(&a, &b)?),
            1e-9,
        );
        let product_gap = instr_dist(&luders_instrument(&ab), &prod);
        ctx.holds(
            "K(A∘B) = K(A)∘K(B) exactly when A, B commute",
            observables::commute(&a, &b)? == (product_gap <= 1e-9 * ctx.scale),
        );

        let (c, e) = commuting_pair(&mut ctx.rng, d, m1, m2)?;
        let ce = observables::seq_product(&c, &e)?;
        let gap = instr_dist(&luders_instrument(&ce), &instruments::product(&luders_instrument(&c), &luders_instrument(&e))?);
        ctx.close("commuting pair: K(A∘B) = K(A)∘K(B)", gap, 1e-9);
    }
    let (z, x) = qubit_z_x()?;
    let zx = observables::seq_product(&z, &x)?;
    let gap = instr_dist(&luders_instrument(&zx), &instruments::product(&luders_instrument(&z), &luders_instrument(&x))?);
    ctx.separated("K(Z∘X) vs K(Z)∘K(X)", gap, 1e-3);
    Ok(())
}

fn ex_5(ctx: &mut Ctx, n: usize) -> Result<()> {
    for _ in 0..n {
        ctx.trial();
        let d = ctx.dim(2, 4);
        let m1 = ctx.dim(1, 3);
        let m2 = ctx.dim(2, 3);
        let w = random_simplex(&mut ctx.rng, m1);
        let weights: Vec<(Label, f64)> = Label::range(m1).into_iter().zip(w.iter().copied()).collect();
        let id = identity_instrument(d, &weights)?;
        let j = random_instrument(&mut ctx.rng, d, m2);
        let id_then_j = instruments::product(&id, &j)?;
        let j_then_id = instruments::product(&j, &id)?;
        for (x, lambda) in &weights {
            for (y, op) in j.iter() {
                let expected = op.scaled(*lambda);
                ctx.close("(Id∘J)_(x,y) = λ_x J_y", id_then_j.operation(&Label::product(x, y))?.distance(&expected)?, 1e-9);
                ctx.close("(J∘Id)_(y,x) = λ_x J_y", j_then_id.operation(&Label::product(y, x))?.distance(&expected)?, 1e-9);
            }
        }
        ctx.close("(J|Id) = J", instr_dist(&instruments::conditioned(&id, &j)?, &j), 1e-9);
        let id_given_j = instruments::conditioned(&j, &id)?;
        let hat = channel(&j);
        for (x, lambda) in &weights {
            ctx.close("(Id|J)_x = λ_x Ĵ", id_given_j.operation(x)?.distance(&hat.operation().scaled(*lambda))?, 1e-9);
        }
    }
    Ok(())
}

fn ex_6(ctx: &mut Ctx, n: usize) -> Result<()> {
    for _ in 0..n {
        ctx.trial();
        let d = ctx.dim(2, 3);
        let m1 = ctx.dim(2, 3);
        let m2 = ctx.dim(2, 3);
        let a = random_observable(&mut ctx.rng, d, m1);
        let b = random_observable(&mut ctx.rng, d, m2);
        let alpha = random_state(&mut ctx.rng, d);
        let beta = random_state(&mut ctx.rng, d);
        let prod = instruments::product(&trivial_instrument(&a, &alpha)?, &trivial_instrument(&b, &beta)?)?;
        for (x, ax) in a.iter() {
            for (y, by) in b.iter() {
                let w = trace_with(&alpha, by.matrix())?;
                let expected = Operation::trivial(&ax.scaled(w), &beta)?;
                ctx.close(
                    "(I∘J)_(x,y) = tr(ρA_x) tr(αB_y) β",
                    prod.operation(&Label::product(x, y))?.distance(&expected)?,
                    1e-9,
                );
            }
        }
        let cond = induced_observable(&instruments::conditioned(&trivial_instrument(&a, &alpha)?, &trivial_instrument(&b, &beta)?)?);
        for (y, by) in b.iter() {
            let w = trace_with(&alpha, by.matrix())?;
            ctx.close("J(J|I)_y = tr(αB_y)·1", herm_dist(cond.effect(y)?.matrix(), &HMatrix::identity(d).scale(w)), 1e-9);
        }
    }
    Ok(())
}

fn ex_7(ctx: &mut Ctx, n: usize) -> Result<()> {
    for _ in 0..n {
        ctx.trial();
        let d = ctx.dim(2, 4);
        let m1 = ctx.dim(2, 4);
        let m2 = ctx.dim(2, 4);
        let a = random_observable(&mut ctx.rng, d, m1);
        let b = random_observable(&mut ctx.rng, d, m2);
        let alpha = random_state(&mut ctx.rng, d);
        let beta = random_state(&mut ctx.rng, d);
        let rho = random_state(&mut ctx.rng, d);
        let x = random_subset(&mut ctx.rng, &a.label_vec());
        let y = random_subset(&mut ctx.rng, &b.label_vec());
        let got = instruments::joint_probability(
            &rho,
            &trivial_instrument(&a, &alpha)?,
            &x,
            &trivial_instrument(&b, &beta)?,
            &y,
        )?;
        let expected = trace_with(&rho, a.effect_of_subset(&x)?.matrix())? * trace_with(&alpha, b.effect_of_subset(&y)?.matrix())?;
        ctx.close("P(I_X then J_Y) = tr(ρA_X) tr(αB_Y)", (got - expected).abs(), 1e-10);
    }
    Ok(())
}

fn ex_8(ctx: &mut Ctx, n: usize) -> Result<()> {
    for _ in 0..n {
        ctx.trial();
        let d = ctx.dim(2, 4);
        let m1 = ctx.dim(2, 4);
        let m2 = ctx.dim(2, 4);
        let (la, lb) = (
            luders_instrument(&random_observable(&mut ctx.rng, d, m1)),
            luders_instrument(&random_observable(&mut ctx.rng, d, m2)),
        );
        let (ja, jb) = (induced_observable(&la), induced_observable(&lb));
        let rho = random_state(&mut ctx.rng, d);
        for x in la.labels() {
            for y in lb.labels() {
                let lhs = instruments::joint_probability(&rho, &la, std::slice::from_ref(x), &lb, std::slice::from_ref(y))?;
                let rhs = joint_probability_then(&rho, &ja, std::slice::from_ref(x), &jb, std::slice::from_ref(y))?;
                ctx.close("P(I_x then J_y) = P(J(I)_x then J(J)_y)", (lhs - rhs).abs(), 1e-10);
            }
        }
    }
    Ok(())
}

fn conj_2_5_converse(ctx: &mut Ctx, n: usize) -> Result<()> {
    let mut candidates = 0;
    let mut worst = 0.0f64;
    for t in 0..n {
        ctx.trial();
        let d = ctx.dim(2, 4);
        let (a, b) = if t % 3 == 2 {
            // uniform effects {1/m}, {1/n} are complementary to each other
            let m1 = ctx.dim(1, 4);
            let m2 = ctx.dim(1, 4);
            (Observable::completely_random(d, m1), Observable::completely_random(d, m2))
        } else {
            rotated_mub(&mut ctx.rng, d)?
        };
        if complementarity_residual(&a, &b)? > 1e-8 {
            continue;
        }
        let r = instruments::complementarity_residual(&luders_instrument(&a), &luders_instrument(&b))?;
        worst = worst.max(r);
        if r > 1e-3 {
            candidates += 1;
            ctx.note(format!("candidate at trial {t}: instrument residual {r:.3e}"));
        }
    }
    if candidates == 0 {
        ctx.note(format!("no counterexample found in {n} trials (largest instrument residual {worst:.3e})"));
    }
    Ok(())
}

fn conj_3_3_converse(ctx: &mut Ctx, n: usize) -> Result<()> {
    let mut candidates = 0;
    let mut near = 0;
    for t in 0..n {
        ctx.trial();
        let d = ctx.dim(2, 3);
        let m = ctx.dim(2, 4);
        // I_x = λ_x U_x·U_x† with U_x = exp(iεH_x) and Σ λ_x H_x = 0, so the
        // channel is the identity to first order in ε while each outcome is not.
        let eps = 10f64.powf(-ctx.rng.random_range(0.0..6.0));
        let lambda = random_simplex(&mut ctx.rng, m);
        let mut hs: Vec<HMatrix> = (0..m)
            .map(|_| {
                let g = crate::random::ginibre(&mut ctx.rng, d, d);
                HMatrix::symmetrize(g).expect("square")
            })
            .collect();
        let mean = hs
            .iter()
            .zip(&lambda)
            .try_fold(HMatrix::zeros(d), |acc, (h, l)| acc.add(&h.scale(*l)))?;
        for h in &mut hs {
            *h = h.sub(&mean)?;
        }
        let mut outcomes = Vec::with_capacity(m);
        for ((l, h), w) in Label::range(m).into_iter().zip(&hs).zip(&lambda) {
            let e = h.eig()?;
            let u = CMatrix::from_fn(d, d, |r, c| {
                (0..d).fold(C64::new(0.0, 0.0), |acc, k| {
                    acc + e.vectors[(r, k)] * C64::from_polar(1.0, eps * e.values[k]) * e.vectors[(c, k)].conj()
                })
            });
            outcomes.push((l, Operation::from_kraus(vec![u.scale(w.sqrt())])?));
        }
        let instr = Instrument::new(outcomes)?;
        let channel_gap = channel(&instr).distance(&Channel::identity(d))?;
        if channel_gap > 1e-9 {
            continue;
        }
        near += 1;
        let r = identity_instrument_residual(&instr)?;
        if r > 1e-3 {
            candidates += 1;
            ctx.note(format!("candidate at trial {t}: channel gap {channel_gap:.3e}, outcome residual {r:.3e}"));
        }
    }
    if candidates == 0 {
        ctx.note(format!("no counterexample found in {n} trials ({near} with channel within 1e-9 of the identity)"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(id: &str, trials: usize) -> Report {
        let s = SUITES.iter().find(|s| s.id == id).unwrap();
        run_suite(
            s,
            &Config {
                seed: 7,
                trials: Some(trials),
                tol_scale: 1.0,
            },
        )
    }

    #[test]
    fn every_suite_passes_with_few_trials() {
        for s in SUITES {
            let r = quick(s.id, 4);
            let expected = if s.probe { Status::Unknown } else { Status::Pass };
            assert_eq!(r.status, expected, "{r}");
        }
    }

    #[test]
    fn unknown_id_is_rejected() {
        assert_eq!(run(&["thm-9.9".into()], &Config::default()), Err("thm-9.9".into()));
    }

    #[test]
    fn reports_are_reproducible() {
        let a = quick("thm-2.1", 10);
        let b = quick("thm-2.1", 10);
        assert_eq!(a, b);
    }

    #[test]
    fn tiny_tolerance_scale_fails() {
        let s = SUITES.iter().find(|s| s.id == "lem-3.4").unwrap();
        let r = run_suite(
            s,
            &Config {
                seed: 1,
                trials: Some(3),
                tol_scale: 1e-12,
            },
        );
        assert_eq!(r.status, Status::Fail);
    }
}
