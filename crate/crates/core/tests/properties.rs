use proptest::prelude::*;
use qntk_lab::datasets::{haar_state, Connectivity, Dataset, Generator, Split};
use qntk_lab::kernel::{gram, gram_sym, mse_loss, relative_generalization_error, test_residuals_final, KernelSystem};
use qntk_lab::linalg::sym_eig;
use qntk_lab::observable::LocalZObservable;
use qntk_lab::pauli::{pauli_product, Phase, PauliString};
use qntk_lab::qnn::{jacobian, qntk, train_gd, AnsatzSpec, Family, LearningRate, TrainConfig};
use qntk_lab::rng;
use qntk_lab::state::StateVector;
use rand::Rng as _;

fn word(n: usize) -> impl Strategy<Value = PauliString> {
    prop::collection::vec(0u8..4, n).prop_map(|c| PauliString::from_codes(&c).unwrap())
}

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![Just(Family::Xyz), Just(Family::Xy)]
}

proptest! {
    #[test]
    fn products_are_associative(p in word(5), q in word(5), r in word(5)) {
        let pq = pauli_product(&p, &q).unwrap();
        let left = pauli_product(&pq.word, &r).unwrap();
        let qr = pauli_product(&q, &r).unwrap();
        let right = pauli_product(&p, &qr.word).unwrap();
        prop_assert_eq!(left.word, right.word);
        prop_assert_eq!(pq.phase * left.phase, qr.phase * right.phase);
    }

    #[test]
    fn swapped_product_differs_by_commutation_sign(p in word(6), q in word(6)) {
        let pq = pauli_product(&p, &q).unwrap();
        let qp = pauli_product(&q, &p).unwrap();
        prop_assert_eq!(pq.word, qp.word);
        let expect = if p.commutes_with(&q) { qp.phase } else { qp.phase.neg() };
        prop_assert_eq!(pq.phase, expect);
        prop_assert_eq!(pauli_product(&p, &p).unwrap().phase, Phase::PlusOne);
        prop_assert!(pauli_product(&p, &p).unwrap().word.is_identity());
    }

    #[test]
    fn rotations_preserve_the_norm(h in word(4), angle in -10.0f64..10.0, seed in any::<u64>()) {
        let mut s = haar_state(4, &mut rng::stream(seed, &[])).unwrap();
        s.apply_pauli_rotation(&h, angle).unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tangent_kernel_is_psd_and_gradients_are_bounded(
        seed in any::<u64>(),
        n in 2usize..5,
        s in 1usize..3,
        depth in 1usize..16,
        fam in family(),
    ) {
        let mut r = rng::stream(seed, &[]);
        let spec = AnsatzSpec { window_size: s.min(n), depth, connectivity: Connectivity::Cyclic, family: fam };
        let ansatz = spec.build(n, &mut r).unwrap();
        let theta: Vec<f64> = (0..depth).map(|_| r.random_range(-3.0..3.0)).collect();
        let obs = LocalZObservable::sample(n, 1.0, &mut r).unwrap();
        let states: Vec<StateVector> = (0..4).map(|_| haar_state(n, &mut r).unwrap()).collect();
        let (j, z) = jacobian(&ansatz, &theta, &states, &obs).unwrap();
        let norm = obs.spectral_norm();
        for v in j.as_slice() {
            prop_assert!(v.abs() <= norm + 1e-12);
        }
        for v in &z {
            prop_assert!(v.abs() <= norm + 1e-12);
        }
        let k = qntk(&j).unwrap();
        let eig = sym_eig(&k);
        prop_assert!(eig.min() >= -1e-12 * eig.max().max(1.0));
        prop_assert!((eig.values.iter().sum::<f64>() - k.trace()).abs() < 1e-10 * k.trace().max(1.0));
        prop_assert!(eig.max() <= states.len() as f64 * norm * norm + 1e-12);
    }

    #[test]
    fn generalization_expansion_matches_direct_difference(
        seed in any::<u64>(),
        n_train in 1usize..6,
        n_test in 1usize..4,
    ) {
        let mut r = rng::stream(seed, &[]);
        let train: Vec<_> = (0..n_train).map(|_| haar_state(4, &mut r).unwrap()).collect();
        let test: Vec<_> = (0..n_test).map(|_| haar_state(4, &mut r).unwrap()).collect();
        let y_a: Vec<f64> = (0..n_train).map(|_| r.random_range(-1.0..1.0)).collect();
        let y_b: Vec<f64> = (0..n_test).map(|_| r.random_range(-1.0..1.0)).collect();
        let k = gram_sym(&train).unwrap();
        let kx = gram(&test, &train).unwrap();
        let system = KernelSystem::fit(k.clone(), y_a, 0.0).unwrap();
        let g = relative_generalization_error(&system, &kx, &y_b).unwrap();
        let r0_b: Vec<f64> = y_b.iter().map(|y| -y).collect();
        let r_inf = test_residuals_final(&kx, &k, &system.train_residuals_initial(), &r0_b, 0.0).unwrap();
        let direct = mse_loss(&r_inf) - mse_loss(&r0_b);
        prop_assert!((g.relative_error - direct).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trace_has_one_row_per_record(steps in 1usize..25, every in 1usize..8, seed in any::<u64>()) {
        let n = 3;
        let mut r = rng::stream(seed, &[]);
        let spec = AnsatzSpec { window_size: 2, depth: 6, connectivity: Connectivity::Cyclic, family: Family::Xyz };
        let ansatz = spec.build(n, &mut r).unwrap();
        let obs = LocalZObservable::sample(n, 1.0, &mut r).unwrap();
        let train = Dataset::generate(&Generator::Haar, n, 3, Split::Train, seed).unwrap()
            .with_labels(vec![0.2, -0.1, 0.4]).unwrap();
        let cfg = TrainConfig {
            learning_rate: LearningRate::Scaled { eta0: 1.0 },
            steps,
            record_every: every,
            shots: None,
            noise_std: None,
            seed,
        };
        let trace = train_gd(&ansatz, &train, None, &obs, &cfg).unwrap();
        let csv = trace.to_csv();
        prop_assert_eq!(csv.lines().count(), 1 + steps.div_ceil(every) + 1);
        prop_assert_eq!(trace.records.last().unwrap().step, steps);
    }
}
