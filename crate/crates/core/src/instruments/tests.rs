use super::*;
use crate::effects::PartialState;
use crate::linalg::basis_vector;
use crate::observables::{self, fourier_mub};
use crate::random::{random_kraus_instrument, random_observable, random_state, seeded};
use crate::C64;

fn z() -> Observable {
    Observable::from_basis(&CMatrix::identity(2)).unwrap()
}

fn x() -> Observable {
    Observable::from_basis(&fourier_mub(2).unwrap().1).unwrap()
}

fn p0() -> State {
    State::pure(&basis_vector(2, 0)).unwrap()
}

fn pauli_x() -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| if i != j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

#[test]
fn choi_and_kraus_application_agree() {
    let mut rng = seeded(11);
    for d in 2..=3 {
        let instr = random_kraus_instrument(&mut rng, d, 3);
        let rho = random_state(&mut rng, d);
        for op in instr.operations() {
            let s = &op.kraus()[0];
            let direct = s.matmul(rho.matrix()).unwrap().matmul(&s.adjoint()).unwrap();
            let via_choi = Operation::trusted(d, op.choi().clone()).apply_matrix(rho.matrix()).unwrap();
            assert!(direct.distance(&via_choi).unwrap() < 1e-12);
        }
    }
}

#[test]
fn operation_examples() {
    let rho = random_state(&mut seeded(1), 2);
    let id = Operation::identity(2);
    assert!(id.apply(&rho.as_partial()).unwrap().matrix().distance(rho.matrix()).unwrap() < 1e-14);
    let half = Effect::scalar(2, 0.5).unwrap();
    let t = Operation::trivial(&half, &p0()).unwrap();
    let out = t.apply(&rho.as_partial()).unwrap();
    assert!(out.matrix().distance(&p0().matrix().scale(0.5)).unwrap() < 1e-14);
    let a = crate::random::random_effect(&mut seeded(2), 2);
    let l = Operation::luders(&a).apply(&rho.as_partial()).unwrap();
    let expected = a.sqrt().sandwich(rho.matrix()).unwrap();
    assert!(l.matrix().distance(&expected).unwrap() < 1e-12);
    assert!((l.trace() - crate::effects::occurrence_probability(&rho, &a).unwrap()).abs() < 1e-12);
}

#[test]
fn single_kraus_detection() {
    let half = Effect::scalar(2, 0.5).unwrap();
    let mixed = State::maximally_mixed(2);
    assert!(!Operation::trivial(&half, &mixed).unwrap().is_single_kraus());
    assert_eq!(Operation::trivial(&half, &mixed).unwrap().kraus_rank(), 4);
    assert!(Operation::identity(3).is_single_kraus());
    assert!(Operation::luders(&crate::random::random_effect(&mut seeded(5), 3)).is_single_kraus());
}

#[test]
fn induced_observables() {
    let a = random_observable(&mut seeded(4), 3, 3);
    assert!(induced_observable(&luders_instrument(&a)).close_to(&a, 1e-9));
    let t = trivial_instrument(&a, &random_state(&mut seeded(5), 3)).unwrap();
    assert!(induced_observable(&t).close_to(&a, 1e-12));
    let id = identity_instrument(2, &[("a".into(), 0.25), ("b".into(), 0.75)]).unwrap();
    let j = induced_observable(&id);
    assert!(classify_identity(&j));
    let k = random_kraus_instrument(&mut seeded(6), 2, 2);
    for (op, e) in k.operations().zip(induced_observable(&k).effects()) {
        let s = &op.kraus()[0];
        assert!(s.adjoint().matmul(s).unwrap().distance(e.matrix()).unwrap() < 1e-12);
    }
}

fn classify_identity(a: &Observable) -> bool {
    observables::classify(a).identity
}

#[test]
fn kraus_instrument_requires_completeness() {
    let err = kraus_instrument(vec![("0".into(), CMatrix::identity(2).scale(0.5))]).unwrap_err();
    assert!(matches!(err, Error::NotComplete { .. }));
    // unitaries scaled by 1/√n measure the completely random observable
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let k = kraus_instrument(vec![("0".into(), CMatrix::identity(2).scale(s)), ("1".into(), pauli_x().scale(s))]).unwrap();
    assert!(induced_observable(&k).close_to(&Observable::completely_random(2, 2), 1e-12));
}

#[test]
fn instrument_rejects_non_trace_preserving_sum() {
    let err = Instrument::new(vec![("0".into(), Operation::identity(2).scaled(0.5))]).unwrap_err();
    assert!(matches!(err, Error::Invariant { invariant: "trace-preserving", .. }));
}

#[test]
fn luders_of_z_channel_is_dephasing() {
    let ch = channel(&luders_instrument(&z()));
    let rho = random_state(&mut seeded(8), 2);
    let out = ch.apply(&rho).unwrap();
    let m = rho.matrix();
    let expected = CMatrix::from_fn(2, 2, |i, j| if i == j { m[(i, j)] } else { C64::new(0.0, 0.0) });
    assert!(out.matrix().distance(&expected).unwrap() < 1e-12);
    let extracted = kraus_instrument_from_channel(&ch);
    assert_eq!(extracted.len(), 2);
    assert!(channel(&extracted).distance(&ch).unwrap() < 1e-10);
}

#[test]
fn identity_channel_extracts_to_identity_instrument() {
    let ch = Channel::identity(3);
    let instr = kraus_instrument_from_channel(&ch);
    assert_eq!(instr.len(), 1);
    assert!(identity_compatibility_residual(&instr) < 1e-10);
    assert!(instr.operations().next().unwrap().distance(&Operation::identity(3)).unwrap() < 1e-10);
}

#[test]
fn product_and_conditioned_with_identity_instrument() {
    let mut rng = seeded(9);
    let j = random_kraus_instrument(&mut rng, 2, 3);
    let id = identity_instrument(2, &[("p".into(), 0.4), ("q".into(), 0.6)]).unwrap();
    let prod = product(&id, &j).unwrap();
    for (y, jy) in j.iter() {
        let op = prod.operation(&Label::product(&"p".into(), y)).unwrap();
        assert!(op.distance(&jy.scaled(0.4)).unwrap() < 1e-12);
    }
    assert!(conditioned(&id, &j).unwrap().close_to(&j, 1e-12));
    let hat = channel(&j);
    let cond = conditioned(&j, &id).unwrap();
    assert!(cond.operation(&"q".into()).unwrap().distance(&hat.operation().scaled(0.6)).unwrap() < 1e-12);
}

#[test]
fn trivial_products_factor() {
    let mut rng = seeded(10);
    let a = random_observable(&mut rng, 2, 2);
    let b = random_observable(&mut rng, 2, 2);
    let alpha = random_state(&mut rng, 2);
    let beta = random_state(&mut rng, 2);
    let i = trivial_instrument(&a, &alpha).unwrap();
    let j = trivial_instrument(&b, &beta).unwrap();
    let rho = random_state(&mut rng, 2);
    let prod = product(&i, &j).unwrap();
    for (x, ax) in a.iter() {
        for (y, by) in b.iter() {
            let out = prod.operation(&Label::product(x, y)).unwrap().apply(&rho.as_partial()).unwrap();
            let w = crate::effects::occurrence_probability(&rho, ax).unwrap()
                * crate::effects::occurrence_probability(&alpha, by).unwrap();
            assert!(out.matrix().distance(&beta.matrix().scale(w)).unwrap() < 1e-12);
        }
    }
}

#[test]
fn mixtures_and_post_processing_commute_with_j() {
    let mut rng = seeded(12);
    let i1 = random_kraus_instrument(&mut rng, 2, 3);
    let i2 = random_kraus_instrument(&mut rng, 2, 3);
    let mix = convex_combination(&[0.3, 0.7], &[i1.clone(), i2.clone()]).unwrap();
    let obs_mix = observables::convex_combination(&[0.3, 0.7], &[induced_observable(&i1), induced_observable(&i2)]).unwrap();
    assert!(induced_observable(&mix).close_to(&obs_mix, 1e-12));
    let nu = crate::random::random_stochastic(&mut rng, i1.label_vec(), 2);
    let pp = post_process(&nu, &i1).unwrap();
    assert!(Instrument::new(pp.iter().map(|(l, o)| (l.clone(), o.clone())).collect()).is_ok());
    let obs_pp = observables::post_process(&nu, &induced_observable(&i1)).unwrap();
    assert!(induced_observable(&pp).close_to(&obs_pp, 1e-12));
}

#[test]
fn complementarity_of_instruments() {
    for d in 2..=4 {
        let (s, f) = fourier_mub(d).unwrap();
        let a = Observable::from_basis(&s).unwrap();
        let b = Observable::from_basis(&f).unwrap();
        assert!(complementary(&luders_instrument(&a), &luders_instrument(&b)).unwrap());
        let alpha = State::maximally_mixed(d);
        assert!(complementary(&trivial_instrument(&a, &alpha).unwrap(), &trivial_instrument(&b, &alpha).unwrap()).unwrap());
        assert!(!complementary(&luders_instrument(&a), &luders_instrument(&a)).unwrap());
    }
}

#[test]
fn coexistence_of_instruments() {
    let id = identity_instrument(2, &[("0".into(), 0.5), ("1".into(), 0.5)]).unwrap();
    let joint = identity_instrument(
        2,
        &[("0|0".into(), 0.25), ("0|1".into(), 0.25), ("1|0".into(), 0.25), ("1|1".into(), 0.25)],
    )
    .unwrap();
    assert!(coexist_verify(&id, &id, &joint).unwrap());
    assert!(!coexist_verify(&luders_instrument(&z()), &id, &joint).unwrap());
}

#[test]
fn joint_probabilities() {
    let mut rng = seeded(13);
    let rho = random_state(&mut rng, 2);
    let a = random_observable(&mut rng, 2, 2);
    let b = random_observable(&mut rng, 2, 3);
    let (la, lb) = (luders_instrument(&a), luders_instrument(&b));
    let all_a = a.label_vec();
    let all_b = b.label_vec();
    assert!((joint_probability(&rho, &la, &all_a, &lb, &all_b).unwrap() - 1.0).abs() < 1e-9);
    let xs = vec![all_a[0].clone()];
    let ys = vec![all_b[0].clone(), all_b[2].clone()];
    let p = joint_probability(&rho, &la, &xs, &lb, &ys).unwrap();
    let q = observables::joint_probability_then(&rho, &a, &xs, &b, &ys).unwrap();
    assert!((p - q).abs() < 1e-10);
    let mixed = State::maximally_mixed(2);
    let p = joint_probability(&mixed, &luders_instrument(&z()), &["0".into()], &luders_instrument(&x()), &["0".into()]).unwrap();
    assert!((p - 0.25).abs() < 1e-12);
}

#[test]
fn luders_non_linearity_in_observable() {
    let mix = observables::convex_combination(&[0.5, 0.5], &[z(), x()]).unwrap();
    let lhs = luders_instrument(&mix);
    let (kz, kx) = (luders_instrument(&z()), luders_instrument(&x()));
    let rho = p0().as_partial();
    let gap = lhs
        .labels()
        .map(|l| {
            let a = lhs.operation(l).unwrap().apply(&rho).unwrap();
            let b = kz.operation(l).unwrap().apply(&rho).unwrap();
            let c = kx.operation(l).unwrap().apply(&rho).unwrap();
            let sum = b.matrix().scale(0.5).add(&c.matrix().scale(0.5)).unwrap();
            a.matrix().distance(&sum).unwrap()
        })
        .fold(0.0f64, f64::max);
    assert!(gap >= 1e-2, "gap {gap}");
    let _ = PartialState::new(HMatrix::zeros(2)).unwrap();
}

