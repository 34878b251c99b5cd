use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use qcap_core::info::{coherent_information, generalized_information, holevo_information, CQEnsemble};
use qcap_core::random::{random_channel_with, random_ensemble_with, rng_from_seed};
use qcap_core::state::PureState;
use qcap_core::space::TensorSpace;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn data_processing(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let ens = random_ensemble_with(2, 2, 3, &mut rng).unwrap();
        let n1 = random_channel_with(2, 3, 2, &mut rng).unwrap();
        let n2 = random_channel_with(3, 2, 2, &mut rng).unwrap();
        let first = generalized_information(&ens, &n1).unwrap().i_g;
        let both = generalized_information(&ens, &n1.compose(&n2).unwrap()).unwrap().i_g;
        prop_assert!(both <= first + 1e-9);
    }

    #[test]
    fn additive_on_independent_pairs(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let e1 = random_ensemble_with(2, 2, 2, &mut rng).unwrap();
        let e2 = random_ensemble_with(2, 1, 3, &mut rng).unwrap();
        let n1 = random_channel_with(2, 2, 2, &mut rng).unwrap();
        let n2 = random_channel_with(2, 3, 2, &mut rng).unwrap();
        let g1 = generalized_information(&e1, &n1).unwrap();
        let g2 = generalized_information(&e2, &n2).unwrap();
        let joint = generalized_information(&e1.tensor(&e2), &n1.tensor(&n2)).unwrap();
        prop_assert!((joint.i_g - g1.i_g - g2.i_g).abs() <= 1e-8);
        prop_assert!((joint.r_c - g1.r_c - g2.r_c).abs() <= 1e-8);
    }

    #[test]
    fn classical_rate_ignores_entry_order(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let ens = random_ensemble_with(2, 2, 4, &mut rng).unwrap();
        let ch = random_channel_with(2, 2, 3, &mut rng).unwrap();
        let a = generalized_information(&ens, &ch).unwrap();
        let b = generalized_information(&ens.reordered(&[2, 0, 3, 1]), &ch).unwrap();
        prop_assert!((a.r_c - b.r_c).abs() <= 1e-10);
        prop_assert!(a.r_c >= -1e-9);
    }
}

#[test]
fn reductions_to_coherent_and_holevo() {
    for seed in 0..30u64 {
        let mut rng = rng_from_seed(seed);
        let ch = random_channel_with(2, 2, 2, &mut rng).unwrap();
        let single = random_ensemble_with(2, 2, 1, &mut rng).unwrap();
        let psi = PureState::new(TensorSpace::new([("A", 2), ("R", 2)]).unwrap(), single.vectors()[0].clone()).unwrap();
        let g = generalized_information(&single, &ch).unwrap();
        assert_abs_diff_eq!(g.i_g, coherent_information(&psi, &ch).unwrap(), epsilon = 1e-10);

        let classical = random_ensemble_with(2, 1, 3, &mut rng).unwrap();
        let g = generalized_information(&classical, &ch).unwrap();
        assert_abs_diff_eq!(g.i_g, holevo_information(&classical, &ch).unwrap(), epsilon = 1e-10);
    }
    assert!(CQEnsemble::single(&PureState::maximally_entangled("A", "R", 2).unwrap()).is_ok());
}
