mod common;

use std::collections::BTreeMap;

use common::{dataset, dtw_memo, l2, noise};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shapesel::distance::{
    avg_shapelet_distance, class_prototypes, dba, dba_dtw_distance, dtw, medoid,
    min_shapelet_distance, shapelet_l2, DbaConfig, DtwConfig,
};
use shapesel::shapelet::{Shapelet, ShapeletSet};

fn random_set(rng: &mut ChaCha8Rng, name: &str, classes: usize, per_class: usize, w: usize) -> ShapeletSet {
    let per_class = (0..classes)
        .map(|c| {
            let list = (0..per_class)
                .map(|i| Shapelet {
                    values: noise(rng, w, 1.5),
                    class_label: c,
                    dataset_name: name.into(),
                    position: i * w,
                    score: 1.0,
                })
                .collect();
            (c, list)
        })
        .collect::<BTreeMap<_, _>>();
    ShapeletSet {
        dataset_name: name.into(),
        window: w,
        per_class,
    }
}

#[test]
fn l2_matches_direct_recomputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let a = random_set(&mut rng, "a", 1, 1, 15);
        let b = random_set(&mut rng, "b", 1, 1, 15);
        let (x, y) = (a.iter().next().unwrap(), b.iter().next().unwrap());
        assert!((shapelet_l2(x, y).unwrap() - l2(&x.values, &y.values)).abs() <= 1e-12);
    }
}

#[test]
fn avg_and_min_match_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..30 {
        let src = random_set(&mut rng, "s", 2, 5, 15);
        let tgt = random_set(&mut rng, "t", 5, 2, 15);
        let mut sum = 0.0;
        let mut min = f64::INFINITY;
        for a in src.iter() {
            for b in tgt.iter() {
                let d = l2(&a.values, &b.values);
                sum += d;
                min = min.min(d);
            }
        }
        let avg = avg_shapelet_distance(&src, &tgt).unwrap().value;
        assert!((avg - sum / 100.0).abs() <= 1e-9);
        assert_eq!(min_shapelet_distance(&src, &tgt).unwrap().value, min);
    }
}

#[test]
fn dtw_matches_memoized_recursion() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..40 {
        let (la, lb) = (rng.random_range(1..=50), rng.random_range(1..=50));
        let a = noise(&mut rng, la, 2.0);
        let b = noise(&mut rng, lb, 2.0);
        assert!((dtw(&a, &b).unwrap() - dtw_memo(&a, &b)).abs() <= 1e-9);
    }
}

#[test]
fn dba_objective_never_rises() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10 {
        let len = rng.random_range(5..30);
        let n = rng.random_range(2..8);
        let members: Vec<Vec<f64>> = (0..n).map(|_| noise(&mut rng, len, 1.0)).collect();
        let refs: Vec<&[f64]> = members.iter().map(Vec::as_slice).collect();
        let init = refs[medoid(&refs, &DtwConfig::default()).unwrap()];
        let p = dba(&refs, init, 10, 1e-6).unwrap();
        assert!(p.objective_history.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(p.objective, *p.objective_history.last().unwrap());
        assert!(p.iterations_run >= 1 && p.iterations_run <= 10);
    }
}

#[test]
fn dba_dtw_is_the_minimum_prototype_pair() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let make = |rng: &mut ChaCha8Rng, name: &str| {
        dataset(
            name,
            (0..6)
                .map(|i| {
                    let base = if i % 2 == 0 { 0.0 } else { 3.0 };
                    (noise(rng, 20, 0.5).into_iter().map(|v| v + base).collect(), i % 2)
                })
                .collect(),
        )
    };
    let src = make(&mut rng, "s");
    let tgt = make(&mut rng, "t");
    let cfg = DbaConfig::default();
    let ps = class_prototypes(&src, &cfg).unwrap();
    let pt = class_prototypes(&tgt, &cfg).unwrap();
    let mut expected = f64::INFINITY;
    for a in &ps {
        for b in &pt {
            expected = expected.min(dtw_memo(&a.values, &b.values));
        }
    }
    let got = dba_dtw_distance(&src, &tgt).unwrap().value;
    assert!((got - expected).abs() <= 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn dtw_symmetric_and_zero_on_self(
        a in prop::collection::vec(-10.0f64..10.0, 1..30),
        b in prop::collection::vec(-10.0f64..10.0, 1..30),
    ) {
        prop_assert_eq!(dtw(&a, &a).unwrap(), 0.0);
        prop_assert_eq!(dtw(&a, &b).unwrap(), dtw(&b, &a).unwrap());
        prop_assert!(dtw(&a, &b).unwrap() >= 0.0);
    }

    #[test]
    fn shapelet_measures_ordered_and_symmetric(seed in any::<u64>(), i in 1usize..4, j in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_set(&mut rng, "s", i, 3, 8);
        let t = random_set(&mut rng, "t", j, 2, 8);
        let avg = avg_shapelet_distance(&s, &t).unwrap().value;
        let min = min_shapelet_distance(&s, &t).unwrap().value;
        prop_assert!(min <= avg);
        prop_assert_eq!(avg, avg_shapelet_distance(&t, &s).unwrap().value);
        prop_assert_eq!(min, min_shapelet_distance(&t, &s).unwrap().value);
        prop_assert_eq!(min_shapelet_distance(&s, &s).unwrap().value, 0.0);
    }
}
