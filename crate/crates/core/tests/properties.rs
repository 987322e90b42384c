use exclt_core::characteristics::{dsharp, prokhorov, DEFAULT_R_MAX};
use exclt_core::criteria::levy_distance;
use exclt_core::empirics::{empirical_cf, TGrid};
use exclt_core::{
    mixture_cf, sample_array_replicates, stable_cf, AtomicMeasure, BaseFamily, DirectingLaw,
    MixingMeasure, NormingSequence, Prior, Randomizer, StableParams,
};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = StableParams> {
    (0.1f64..=2.0, -5.0f64..5.0, 0.01f64..5.0, -1.0f64..=1.0)
        .prop_map(|(a, g, c, b)| StableParams::new(a, g, c, b).unwrap())
}

fn measure() -> impl Strategy<Value = AtomicMeasure> {
    prop::collection::vec((-4.0f64..4.0, 0.01f64..2.0), 0..6)
        .prop_map(|atoms| AtomicMeasure::new(atoms).unwrap())
}

proptest! {
    #[test]
    fn stable_cf_is_a_characteristic_function(p in params(), t in -20.0f64..20.0) {
        let v = stable_cf(t, &p);
        prop_assert!(v.norm() <= 1.0 + 1e-12);
        prop_assert_eq!(stable_cf(0.0, &p).re, 1.0);
        let w = stable_cf(-t, &p);
        prop_assert!((w - v.conj()).norm() <= 1e-12);
    }

    #[test]
    fn mixture_cf_is_the_weighted_sum(
        p in params(),
        q in params(),
        w in 0.05f64..0.95,
        t in -10.0f64..10.0,
    ) {
        let q = StableParams::new(p.alpha(), q.gamma(), q.c(), q.beta()).unwrap();
        let mix = MixingMeasure::new(vec![(p, w), (q, 1.0 - w)]).unwrap();
        let expected = stable_cf(t, &p) * w + stable_cf(t, &q) * (1.0 - w);
        prop_assert!((mixture_cf(t, &mix) - expected).norm() <= 1e-12);
    }

    #[test]
    fn dsharp_is_a_metric(a in measure(), b in measure(), c in measure()) {
        let d = |x: &AtomicMeasure, y: &AtomicMeasure| dsharp(x, y, DEFAULT_R_MAX);
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &b) >= 0.0 && d(&a, &b) < 1.0);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-6);
    }

    #[test]
    fn prokhorov_is_symmetric(a in measure(), b in measure()) {
        prop_assert_eq!(prokhorov(&a, &a), 0.0);
        prop_assert!((prokhorov(&a, &b) - prokhorov(&b, &a)).abs() <= 1e-12);
    }

    #[test]
    fn empirical_cf_bounds(xs in prop::collection::vec(-100.0f64..100.0, 1..200)) {
        let grid = TGrid::symmetric(3.0, 0.5).unwrap();
        let v = empirical_cf(&xs, &grid).unwrap();
        let pts = grid.points();
        for (k, z) in v.iter().enumerate() {
            prop_assert!(z.norm() <= 1.0 + 1e-12);
            let mirror = pts.len() - 1 - k;
            prop_assert_eq!(*z, v[mirror].conj());
        }
    }

    #[test]
    fn levy_distance_bounds(
        a in prop::collection::vec(-3.0f64..3.0, 1..40),
        b in prop::collection::vec(-3.0f64..3.0, 1..40),
        shift in 0.0f64..0.5,
    ) {
        let d = levy_distance(&a, &b);
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!((d - levy_distance(&b, &a)).abs() <= 1e-8);
        let moved: Vec<f64> = a.iter().map(|x| x + shift).collect();
        prop_assert!(levy_distance(&a, &moved) <= shift + 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sampling_is_reproducible_and_thread_invariant(seed in any::<u64>()) {
        let law = DirectingLaw::new(
            BaseFamily::Cauchy { location: 0.0, scale: 1.0 },
            Randomizer::Scale { prior: Prior::atoms(&[(1.0, 0.5), (2.0, 0.5)]) },
        )
        .unwrap();
        let norming = NormingSequence::power(1.0);
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| sample_array_replicates(&law, &norming, 64, 3, 20, seed).unwrap())
        };
        let (one, again, four) = (run(1), run(1), run(4));
        prop_assert_eq!(one.values(), again.values());
        prop_assert_eq!(one.values(), four.values());
    }
}
