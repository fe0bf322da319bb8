mod common;

use common::{brute_profile, noise, random_walk};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shapesel::matrix_profile::{ab_join, ab_join_naive, ConcatenatedClassSeries, Metric};

fn concat(segments: &[Vec<f64>], w: usize) -> ConcatenatedClassSeries {
    ConcatenatedClassSeries::new(segments.iter().map(Vec::as_slice), w).unwrap()
}

fn segments(rng: &mut ChaCha8Rng, w: usize) -> Vec<Vec<f64>> {
    let n = rng.random_range(1..=3);
    (0..n)
        .map(|_| {
            let len = rng.random_range(w..=120);
            if rng.random_bool(0.5) {
                random_walk(rng, len)
            } else {
                noise(rng, len, 2.0)
            }
        })
        .collect()
}

fn assert_matches_oracle(mp: &shapesel::matrix_profile::MatrixProfile, oracle: &[Option<f64>]) {
    assert_eq!(mp.len(), oracle.len());
    for (r, want) in oracle.iter().enumerate() {
        match want {
            Some(d) => {
                assert!(!mp.mask[r], "position {r} masked");
                assert!((mp.distances[r] - d).abs() <= 1e-9, "position {r}: {} vs {d}", mp.distances[r]);
            }
            None => assert!(mp.mask[r] && mp.nn_index[r] == -1),
        }
    }
}

#[test]
fn ab_join_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let w = rng.random_range(3..=15);
        let (q, r) = (segments(&mut rng, w), segments(&mut rng, w));
        let mp = ab_join(&concat(&q, w), &concat(&r, w), false).unwrap();
        assert_matches_oracle(&mp, &brute_profile(&q, &r, w, false));
    }
}

#[test]
fn self_join_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..40 {
        let w = rng.random_range(3..=15);
        let q = segments(&mut rng, w);
        let c = concat(&q, w);
        let mp = ab_join(&c, &c, true).unwrap();
        assert_matches_oracle(&mp, &brute_profile(&q, &q, w, true));
    }
}

#[test]
fn naive_kernel_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..10 {
        let w = rng.random_range(3..=10);
        let (q, r) = (segments(&mut rng, w), segments(&mut rng, w));
        let mp = ab_join_naive(&concat(&q, w), &concat(&r, w), false, Metric::Euclidean).unwrap();
        assert_matches_oracle(&mp, &brute_profile(&q, &r, w, false));
    }
}

#[test]
fn long_rows_cross_block_boundaries() {
    // More than one 256-row block on the query side.
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let q = vec![random_walk(&mut rng, 300), noise(&mut rng, 350, 1.0)];
    let r = vec![random_walk(&mut rng, 200)];
    let mp = ab_join(&concat(&q, 12), &concat(&r, 12), false).unwrap();
    assert_matches_oracle(&mp, &brute_profile(&q, &r, 12, false));
    let c = concat(&q, 12);
    let sj = ab_join(&c, &c, true).unwrap();
    assert_matches_oracle(&sj, &brute_profile(&q, &q, 12, true));
}

fn seg_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 4..40), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distances_non_negative_and_outside_exclusion(segs in seg_strategy(), w in 2usize..5) {
        let c = concat(&segs, w);
        prop_assume!(!c.subsequences().is_empty());
        let mp = ab_join(&c, &c, true).unwrap();
        for r in 0..mp.len() {
            if !mp.mask[r] {
                prop_assert!(mp.distances[r] >= 0.0);
                let q = mp.nn_index[r] as usize;
                prop_assert!(r.abs_diff(q) >= w);
                prop_assert!(c.is_valid(q));
            }
        }
    }

    #[test]
    fn appending_reference_never_increases(q in seg_strategy(), r in seg_strategy(), extra in prop::collection::vec(-5.0f64..5.0, 4..40)) {
        let w = 3;
        let cq = concat(&q, w);
        let cr = concat(&r, w);
        prop_assume!(!cq.subsequences().is_empty() && !cr.subsequences().is_empty());
        let mut bigger = r.clone();
        bigger.push(extra);
        let before = ab_join(&cq, &cr, false).unwrap();
        let after = ab_join(&cq, &concat(&bigger, w), false).unwrap();
        for i in 0..before.len() {
            if !before.mask[i] {
                prop_assert!(after.distances[i] <= before.distances[i]);
            }
        }
    }

    #[test]
    fn permuting_series_keeps_distance_multiset(segs in seg_strategy(), r in seg_strategy(), rot in 0usize..3) {
        let w = 3;
        let cq = concat(&segs, w);
        let cr = concat(&r, w);
        prop_assume!(!cq.subsequences().is_empty() && !cr.subsequences().is_empty());
        let mut permuted = segs.clone();
        let len = permuted.len();
        permuted.rotate_left(rot % len);
        let collect = |mp: &shapesel::matrix_profile::MatrixProfile| {
            let mut v: Vec<f64> = (0..mp.len()).filter(|&i| !mp.mask[i]).map(|i| mp.distances[i]).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let a = collect(&ab_join(&cq, &cr, false).unwrap());
        let b = collect(&ab_join(&concat(&permuted, w), &cr, false).unwrap());
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }
}
