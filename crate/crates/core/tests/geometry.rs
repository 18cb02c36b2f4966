use knotops::geo_operads::*;
use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn v(xs: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(xs)
}

#[test]
fn suite_passes_for_small_dimensions() {
    let tol = Tolerances::default();
    for n in 3..=5 {
        let r = property_suite(n, 300, 7, &tol).unwrap();
        assert!(r.pass(), "n = {n}: {:?}", r.first_failure());
        assert!(r.checks.iter().all(|c| c.samples == 300));
    }
}

#[test]
fn suite_is_independent_of_worker_count() {
    let tol = Tolerances::default();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| property_suite(4, 100, 42, &tol).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn insertion_oracle_converges_linearly() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = random_configuration(&mut rng, 3, 3, 0.3);
    let y = random_configuration(&mut rng, 3, 3, 0.3);
    let exact = compose_bn(&theta(&x, 3, 1e-6).unwrap(), 2, &theta(&y, 3, 1e-6).unwrap()).unwrap();
    let err = |eps| theta(&insert(&x, 2, &y, eps, 1e-6).unwrap(), 3, 1e-6).unwrap().distance(&exact);
    let ratio = err(5e-4) / err(1e-3);
    assert!((0.4..=0.6).contains(&ratio), "ratio {ratio}");
    assert!(err(1e-3) < 1e-2);
    assert_eq!(insert(&x, 2, &y, 1e-3, 1e-6).unwrap().len(), 5);
    // too small a scale collapses the inserted points
    assert!(matches!(insert(&x, 2, &y, 1e-9, 1e-6), Err(GeoError::Degenerate { .. })));
}

#[test]
fn mutated_composition_is_caught() {
    let tol = Tolerances::default();
    let r = property_suite_variant(4, 200, 7, &tol, CompositionVariant::NegatedCase5).unwrap();
    assert!(!r.pass());
    let oracle = r.checks.iter().find(|c| c.check_name == "insertion_oracle_convergence").unwrap();
    assert!(!oracle.pass);
}

#[test]
fn construction_errors() {
    assert!(matches!(DirectionElement::new(3, 2, vec![v(&[1.0, 1.0, 0.0])], 1e-10), Err(GeoError::NotUnit(_))));
    assert!(matches!(DirectionElement::new(3, 3, vec![v(&[1.0, 0.0, 0.0])], 1e-10), Err(GeoError::ArityMismatch { .. })));
    assert!(DirectionElement::new(1, 1, vec![], 1e-10).is_err());
    assert!(matches!(
        Rotation::new(nalgebra::DMatrix::from_diagonal(&v(&[1.0, 1.0, -1.0])), 1e-10),
        Err(GeoError::NotRotation(_))
    ));
    let e = LabeledElement::new(DirectionElement::unit(3), vec![preferred(3)], 1e-10).unwrap();
    assert!(labeled_codegeneracy(0, &e).is_err());
    assert!(property_suite(1, 10, 0, &Tolerances::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn labeled_identities(seed in any::<u64>(), n in 2usize..6, k in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels = (0..k).map(|_| random_unit(&mut rng, n)).collect();
        let e = LabeledElement::new(random_direction(&mut rng, n, k), labels, 1e-10).unwrap();
        prop_assert!(labeled_identity_residual(&e).unwrap() <= 1e-12);
        for i in 1..=k {
            let back = labeled_codegeneracy(i, &labeled_coface(i, &e).unwrap()).unwrap();
            prop_assert_eq!(back, e.clone());
        }
    }

    #[test]
    fn theta_is_equivariant(seed in any::<u64>(), n in 2usize..6, k in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_configuration(&mut rng, n, k, 0.05);
        let mut sigma: Vec<usize> = (1..=k).collect();
        sigma.rotate_left((seed % k as u64) as usize);
        let lhs = theta(&c.permuted(&sigma).unwrap(), n, 1e-6).unwrap();
        let rhs = theta(&c, n, 1e-6).unwrap().permuted(&sigma).unwrap();
        prop_assert!(lhs.distance(&rhs) <= 1e-12);
    }

    #[test]
    fn rotations_act_compatibly(seed in any::<u64>(), n in 2usize..6, k in 1usize..5, l in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_rotation(&mut rng, n);
        prop_assert!(g.residual() <= 1e-10);
        let (a, b) = (random_direction(&mut rng, n, k), random_direction(&mut rng, n, l));
        let t = 1 + (seed as usize) % k;
        let lhs = compose_bn(&a, t, &b).unwrap().rotated(&g);
        let rhs = compose_bn(&a.rotated(&g), t, &b.rotated(&g)).unwrap();
        prop_assert!(lhs.distance(&rhs) <= 1e-12);
    }
}
