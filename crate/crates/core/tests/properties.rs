use proptest::prelude::*;

use qinstr::effects::{self, Effect};
use qinstr::instruments::{self, induced_observable, luders_instrument, Operation};
use qinstr::io::{self, Object};
use qinstr::linalg::{herm_sqrt, partial_trace_first, partial_trace_second, tensor_product};
use qinstr::models::{dilate_instrument, model_instrument, Fimm, Interaction};
use qinstr::random::{
    ginibre, random_effect, random_instrument, random_kraus_instrument, random_observable, random_state,
    random_unitary, seeded,
};
use qinstr::{CMatrix, HMatrix};

fn dims() -> impl Strategy<Value = (u64, usize)> {
    (any::<u64>(), 2usize..=4)
}

fn psd(seed: u64, d: usize) -> HMatrix {
    let g = ginibre(&mut seeded(seed), d, d);
    HMatrix::symmetrize(g.matmul(&g.adjoint()).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 48,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn sqrt_squares_back((seed, d) in dims()) {
        let m = psd(seed, d);
        let r = herm_sqrt(&m).unwrap();
        let back = r.matrix().matmul(r.matrix()).unwrap();
        let scale = 1.0 + m.matrix().frobenius_norm();
        prop_assert!(back.distance(m.matrix()).unwrap() <= 1e-10 * scale);
        prop_assert!(r.min_eigenvalue().unwrap() >= -1e-12);
    }

    #[test]
    fn partial_traces_of_products((seed, d) in dims(), k in 2usize..=3) {
        let mut rng = seeded(seed);
        let a = ginibre(&mut rng, d, d);
        let b = ginibre(&mut rng, k, k);
        let ab = tensor_product(&a, &b);
        let first = partial_trace_second(&ab, d, k).unwrap();
        let second = partial_trace_first(&ab, d, k).unwrap();
        prop_assert!(first.distance(&a.scale_c(b.trace())).unwrap() <= 1e-10);
        prop_assert!(second.distance(&b.scale_c(a.trace())).unwrap() <= 1e-10);
    }

    #[test]
    fn sequential_product_is_an_effect((seed, d) in dims()) {
        let mut rng = seeded(seed);
        let a = random_effect(&mut rng, d);
        let b = random_effect(&mut rng, d);
        let ab = effects::seq_product(&a, &b).unwrap();
        prop_assert!(Effect::new(ab.matrix().clone()).is_ok());
        // tr(ρ a∘b) is the probability of a then b, which never exceeds tr(ρa)
        let rho = random_state(&mut rng, d);
        let p_ab = effects::occurrence_probability(&rho, &ab).unwrap();
        let p_a = effects::occurrence_probability(&rho, &a).unwrap();
        prop_assert!(p_ab <= p_a + 1e-12);
    }

    #[test]
    fn induced_observable_of_luders_is_identity((seed, d) in dims(), m in 1usize..=4) {
        let a = random_observable(&mut seeded(seed), d, m);
        prop_assert!(induced_observable(&luders_instrument(&a)).max_distance(&a).unwrap() <= 1e-9);
    }

    #[test]
    fn model_instrument_is_trace_preserving((seed, d) in (any::<u64>(), 2usize..=3), m in 1usize..=3) {
        let mut rng = seeded(seed);
        let eta = random_state(&mut rng, 2);
        let u = random_unitary(&mut rng, 2 * d);
        let pointer = random_observable(&mut rng, 2, m);
        let model = Fimm::new(d, eta, Interaction::unitary(u).unwrap(), pointer).unwrap();
        let instr = model_instrument(&model).unwrap();
        let rho = random_state(&mut rng, d);
        let total: f64 = instr
            .operations()
            .map(|op| op.apply_herm(rho.matrix()).unwrap().real_trace())
            .sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn dilation_round_trip((seed, d) in (any::<u64>(), 2usize..=3), m in 1usize..=3) {
        let instr = random_instrument(&mut seeded(seed), d, m);
        let back = model_instrument(&dilate_instrument(&instr).unwrap()).unwrap();
        prop_assert!(back.max_distance(&instr).unwrap() <= 1e-8);
    }

    #[test]
    fn choi_and_kraus_forms_agree((seed, d) in dims()) {
        let mut rng = seeded(seed);
        // K†K ≤ |K|²_F·1, so two operators scaled to |K|²_F = 1/2 sum to at most 1
        let ops: Vec<CMatrix> = (0..2)
            .map(|_| {
                let g = ginibre(&mut rng, d, d);
                let n = g.frobenius_norm();
                g.scale(std::f64::consts::FRAC_1_SQRT_2 / n)
            })
            .collect();
        let from_kraus = Operation::from_kraus(ops.clone()).unwrap();
        let from_choi = Operation::from_choi(d, from_kraus.choi().clone()).unwrap();
        let x = ginibre(&mut rng, d, d);
        let direct = ops
            .iter()
            .map(|k| k.matmul(&x).unwrap().matmul(&k.adjoint()).unwrap())
            .fold(CMatrix::zeros(d, d), |acc, y| &acc + &y);
        let scale = 1.0 + direct.frobenius_norm();
        prop_assert!(from_kraus.apply_matrix(&x).unwrap().distance(&direct).unwrap() <= 1e-10 * scale);
        prop_assert!(from_choi.apply_matrix(&x).unwrap().distance(&direct).unwrap() <= 1e-9 * scale);
    }

    #[test]
    fn kraus_instrument_channel_is_composable((seed, d) in dims()) {
        let mut rng = seeded(seed);
        let i = random_kraus_instrument(&mut rng, d, 2);
        let j = random_instrument(&mut rng, d, 2);
        let lhs = instruments::channel(&instruments::product(&i, &j).unwrap());
        let rhs = instruments::channel(&i).then(&instruments::channel(&j)).unwrap();
        prop_assert!(lhs.distance(&rhs).unwrap() <= 1e-9);
    }

    #[test]
    fn documents_round_trip_byte_identically((seed, d) in dims(), m in 1usize..=3) {
        let mut rng = seeded(seed);
        let objects = [
            Object::Effect(random_effect(&mut rng, d)),
            Object::State(random_state(&mut rng, d)),
            Object::Observable(random_observable(&mut rng, d, m)),
            Object::Instrument(random_instrument(&mut rng, d, m)),
        ];
        for obj in objects {
            let text = io::to_canonical_string(&obj);
            let back = io::from_str(&text).unwrap();
            prop_assert_eq!(io::to_canonical_string(&back), text);
        }
    }
}
