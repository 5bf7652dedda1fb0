use proptest::prelude::*;
use symext::cglmp::{AngleSet, I3Evaluator};
use symext::io::{format_sig12, StateFile};
use symext::linalg::{dagger, matmul, outer, partial_trace, tensor, ComplexMatrix};
use symext::qubit::{chen_criterion, chsh_value};
use symext::sampling::{random_mixed_state, random_pure_state, stream_rng};
use symext::symmetric::{brute_force_rdm, rdm_from_dicke, DickeState};
use symext::{DensityMatrix, C64};

fn su2(t: f64, a: f64, b: f64) -> ComplexMatrix {
    let (c, s) = (t.cos(), t.sin());
    ComplexMatrix::from_rows(&[
        vec![C64::from_polar(c, a), -C64::from_polar(s, -b)],
        vec![C64::from_polar(s, b), C64::from_polar(c, -a)],
    ])
    .unwrap()
}

fn conjugate(rho: &DensityMatrix, u: &ComplexMatrix) -> DensityMatrix {
    let m = matmul(&matmul(u, rho.matrix()).unwrap(), &dagger(u)).unwrap();
    let m = m.add(&dagger(&m)).unwrap().scale(C64::new(0.5, 0.0));
    DensityMatrix::new(m, rho.subsystem_dims().to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chsh_is_local_unitary_invariant(seed in any::<u64>(), angles in prop::array::uniform6(0.0..6.3f64)) {
        let rho = random_mixed_state(&mut stream_rng(seed, 0), &[2, 2]).unwrap();
        let u = tensor(&su2(angles[0], angles[1], angles[2]), &su2(angles[3], angles[4], angles[5]));
        let a = chsh_value(&rho).unwrap().value;
        let b = chsh_value(&conjugate(&rho, &u)).unwrap().value;
        prop_assert!((a - b).abs() < 1e-9);
        prop_assert!(a >= 0.0 && a <= 2.0 * 2f64.sqrt() + 1e-12);
        let chen = chen_criterion(&conjugate(&rho, &u)).unwrap();
        prop_assert_eq!(chen.extendible, chen_criterion(&rho).unwrap().extendible);
    }

    #[test]
    fn partial_trace_of_product(seed in any::<u64>()) {
        let mut rng = stream_rng(seed, 1);
        let a = random_mixed_state(&mut rng, &[3]).unwrap();
        let b = random_mixed_state(&mut rng, &[2]).unwrap();
        let ab = a.tensor(&b);
        prop_assert!(partial_trace(&ab, &[0]).unwrap().matrix().max_abs_diff(a.matrix()) < 1e-13);
        prop_assert!(partial_trace(&ab, &[1]).unwrap().matrix().max_abs_diff(b.matrix()) < 1e-13);
    }

    #[test]
    fn state_files_roundtrip_exactly(seed in any::<u64>(), mixed in any::<bool>()) {
        let mut rng = stream_rng(seed, 2);
        let file = if mixed {
            StateFile::from_mixed(&random_mixed_state(&mut rng, &[3, 3]).unwrap())
        } else {
            StateFile::from_pure(&random_pure_state(&mut rng, &[3, 3, 3]).unwrap())
        };
        let text = file.to_json();
        let back = StateFile::from_json(&text).unwrap();
        prop_assert_eq!(&back, &file);
        prop_assert_eq!(back.to_json(), text);
        prop_assert!(back.to_state().is_ok());
    }

    #[test]
    fn outcome_distributions_are_consistent(seed in any::<u64>(), x in prop::array::uniform12(-10.0..10.0f64)) {
        let rho = random_mixed_state(&mut stream_rng(seed, 3), &[3, 3]).unwrap();
        let p = I3Evaluator::new(&rho).unwrap().distribution(&x);
        prop_assert!(p.consistency_residual() < 1e-12);
        let (lo, _) = p.range();
        prop_assert!(lo > -1e-12);
        let generic = symext::cglmp::i3_value(&rho, &AngleSet::from_flat(&x).unwrap()).unwrap();
        prop_assert!((generic - p.i3()).abs() < 1e-12);
    }

    #[test]
    fn symmetric_marginal_matches_expansion(seed in any::<u64>(), n in 3usize..=7) {
        let psi = DickeState::random(n, &mut stream_rng(seed, 4)).unwrap();
        let closed = rdm_from_dicke(&psi).to_density_matrix().unwrap();
        let brute = brute_force_rdm(&psi).unwrap();
        prop_assert!(closed.matrix().max_abs_diff(brute.matrix()) < 1e-10);
    }

    #[test]
    fn sig12_keeps_twelve_digits(x in prop::num::f64::NORMAL) {
        let back: f64 = format_sig12(x).parse().unwrap();
        prop_assert!(((back - x) / x).abs() <= 5e-12);
    }

    #[test]
    fn pure_state_purity_is_one(seed in any::<u64>()) {
        let psi = random_pure_state(&mut stream_rng(seed, 5), &[2, 3]).unwrap();
        prop_assert!((outer(&psi).purity() - 1.0).abs() < 1e-12);
    }
}
