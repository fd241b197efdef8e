use super::*;
use crate::effects::{binary_observable, Effect};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn qubit_z() -> Observable {
    Observable::from_basis(&CMatrix::identity(2)).unwrap()
}

fn qubit_x() -> Observable {
    let (_, f) = fourier_mub(2).unwrap();
    Observable::from_basis(&f).unwrap()
}

fn diag_effect(d: &[f64]) -> Effect {
    Effect::new(HMatrix::from_real_diag(d)).unwrap()
}

#[test]
fn rejects_effects_not_summing_to_identity() {
    let e = diag_effect(&[0.5, 0.5]);
    let err = Observable::new(vec![("0".into(), e.clone()), ("1".into(), e.scaled(0.5))]).unwrap_err();
    assert!(matches!(err, Error::Invariant { invariant: "sum-to-identity", .. }));
    assert!(Observable::new(vec![("0".into(), e.clone()), ("0".into(), e)]).is_err());
}

#[test]
fn sequential_product_of_identical_sharp_observable() {
    let z = qubit_z();
    let zz = seq_product(&z, &z).unwrap();
    assert_eq!(zz.len(), 4);
    let p00 = zz.effect(&"0|0".into()).unwrap();
    assert!(p00.matrix().distance(z.effect(&"0".into()).unwrap().matrix()).unwrap() < 1e-12);
    assert!(zz.effect(&"0|1".into()).unwrap().matrix().frobenius_norm() < 1e-12);
    assert!(zz.normalization_residual() < 1e-12);
}

#[test]
fn conditioning_z_by_x_gives_uniform_coin() {
    let cond = conditioned(&qubit_x(), &qubit_z()).unwrap();
    for e in cond.effects() {
        assert!(e.matrix().distance(&CMatrix::identity(2).scale(0.5)).unwrap() < 1e-12);
    }
    // commuting observables are unchanged by conditioning
    let cond = conditioned(&qubit_z(), &qubit_z()).unwrap();
    assert!(cond.close_to(&qubit_z(), 1e-12));
}

#[test]
fn fourier_bases_are_complementary() {
    for d in 2..=5 {
        let (s, f) = fourier_mub(d).unwrap();
        let a = Observable::from_basis(&s).unwrap();
        let b = Observable::from_basis(&f).unwrap();
        assert!(complementary(&a, &b).unwrap(), "d = {d}");
        assert!(!complementary(&a, &a).unwrap());
        assert!(!commute(&a, &b).unwrap());
    }
}

#[test]
fn classification() {
    let z = qubit_z();
    let cls = classify(&z);
    assert!(cls.atomic && cls.sharp && cls.commutative && cls.indecomposable && !cls.identity);
    let t = Observable::completely_random(2, 3);
    let cls = classify(&t);
    assert!(cls.identity && cls.commutative && !cls.sharp && !cls.indecomposable);
    let noisy = binary_observable(&diag_effect(&[0.9, 0.2]));
    let cls = classify(&noisy);
    assert!(cls.commutative && !cls.sharp && !cls.identity);
}

#[test]
fn post_processing_coarse_grains() {
    let (_, f) = fourier_mub(3).unwrap();
    let a = Observable::from_basis(&f).unwrap();
    let nu = StochasticMatrix::deterministic(a.label_vec(), vec!["even".into(), "odd".into()], |l| {
        if l.to_string() == "1" { "odd".into() } else { "even".into() }
    })
    .unwrap();
    let p = post_process(&nu, &a).unwrap();
    let even = p.effect(&"even".into()).unwrap();
    let expected = a.effect_of_subset(&["0".into(), "2".into()]).unwrap();
    assert!(even.matrix().distance(expected.matrix()).unwrap() < 1e-12);
    assert!(p.normalization_residual() < 1e-12);
}

#[test]
fn convex_combination_checks_weights() {
    let z = qubit_z();
    let t = Observable::identity_observable(2, &[("0".into(), 0.5), ("1".into(), 0.5)]).unwrap();
    let mix = convex_combination(&[0.25, 0.75], &[z.clone(), t.clone()]).unwrap();
    let e0 = mix.effect(&"0".into()).unwrap();
    assert!(e0.matrix().distance(&HMatrix::from_real_diag(&[0.625, 0.375])).unwrap() < 1e-12);
    assert!(convex_combination(&[0.5, 0.6], &[z, t]).is_err());
}

#[test]
fn triple_joint_marginals() {
    let (_, f) = fourier_mub(2).unwrap();
    let a = qubit_z();
    let b = Observable::from_basis(&f).unwrap();
    let cob = binary_observable(&diag_effect(&[0.7, 0.1]));
    let d = triple_joint(&a, &b, &cob).unwrap();
    assert!(d.normalization_residual() < 1e-12);
    let bc_labels: Vec<Label> = b
        .labels()
        .flat_map(|y| cob.labels().map(move |z| Label::product(y, z)))
        .collect();
    let (first, rest) = marginals(&d, &a.label_vec(), &bc_labels).unwrap();
    assert!(first.close_to(&a, 1e-10));
    let rest_obs = Observable::trusted(2, rest.iter().map(|(l, e)| (l.clone(), e.clone())).collect());
    let (second, _) = marginals(&rest_obs, &b.label_vec(), &cob.label_vec()).unwrap();
    assert!(second.close_to(&conditioned(&a, &b).unwrap(), 1e-10));
}

#[test]
fn joint_probability_matches_sequential_effect() {
    let rho = State::pure(&[c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
    let p = joint_probability_then(&rho, &qubit_z(), &["0".into()], &qubit_x(), &["0".into()]).unwrap();
    assert!((p - 0.36 * 0.5).abs() < 1e-12);
}

#[test]
fn commuting_pair_coexists_immediately() {
    let a = binary_observable(&diag_effect(&[0.8, 0.3]));
    let b = qubit_z();
    match coexistence::search_joint_observable(&a, &b).unwrap() {
        coexistence::JointSearch::Found(joint) => assert!(coexist_verify(&a, &b, &joint).unwrap()),
        other => panic!("no joint found: {other:?}"),
    }
}

#[test]
fn noisy_unbiased_qubit_observables_coexist() {
    // (1 ± σ/2)/2 for σ = Z, X: the sharpness 1/2 pair lies well inside the
    // coexistence region.
    let half = |o: &Observable| convex_combination(&[0.5, 0.5], &[o.clone(), Observable::completely_random(2, 2)]).unwrap();
    let a = half(&qubit_z());
    let b = half(&qubit_x());
    match coexistence::search_joint_observable(&a, &b).unwrap() {
        coexistence::JointSearch::Found(joint) => assert!(coexist_verify(&a, &b, &joint).unwrap()),
        other => panic!("no joint found: {other:?}"),
    }
    // sharp non-commuting observables have no joint observable
    assert!(matches!(
        coexistence::search_joint_observable(&qubit_z(), &qubit_x()).unwrap(),
        coexistence::JointSearch::Unknown { .. }
    ));
}

#[test]
fn common_eigenbasis_diagonalizes() {
    let u = fourier_mub(3).unwrap().1;
    let a = Observable::new(vec![
        ("a".into(), Effect::new(HMatrix::from_real_diag(&[0.5, 0.5, 0.0]).congruence(&u).unwrap()).unwrap()),
        ("b".into(), Effect::new(HMatrix::from_real_diag(&[0.5, 0.5, 1.0]).congruence(&u).unwrap()).unwrap()),
    ])
    .unwrap();
    let v = common_eigenbasis(&a).unwrap();
    for e in a.effects() {
        assert!(off_diagonal_norm(&e.matrix().conjugate_by(&v.adjoint()).unwrap()) < 1e-10);
    }
    let z0 = qubit_z().effect(&"0".into()).unwrap().scaled(0.5);
    let x0 = qubit_x().effect(&"0".into()).unwrap().scaled(0.5);
    let rest = Effect::new(HMatrix::identity(2).sub(z0.matrix()).unwrap().sub(x0.matrix()).unwrap()).unwrap();
    let mixed = Observable::new(vec![("z".into(), z0), ("x".into(), x0), ("r".into(), rest)]).unwrap();
    assert!(matches!(common_eigenbasis(&mixed), Err(Error::NotCommutative { .. })));
}
