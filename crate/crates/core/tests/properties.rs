use proptest::prelude::*;
use zxc::geometry::{crossing, modz_intersection_count, segment_intersect, IntersectionResult, Point2, Segment};
use zxc::limitlab::{ks_distance, EmpiricalDistribution};
use zxc::localtime::{occupation_cross, occupation_square, LocalTimeHistogram};
use zxc::seed::derive_seed;

fn dyadic(lo: i32, hi: i32) -> impl Strategy<Value = f64> {
    (lo..hi).prop_map(|k| k as f64 / 1024.0)
}

fn segment(lo: i32, hi: i32) -> impl Strategy<Value = Segment> {
    (dyadic(lo, hi), dyadic(lo, hi), dyadic(lo, hi), dyadic(lo, hi))
        .prop_filter("non-degenerate", |(a, b, c, d)| a != c || b != d)
        .prop_map(|(a, b, c, d)| Segment::new(Point2::new(a, b), Point2::new(c, d)).unwrap())
}

fn walk_levels() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-2i64..=2, 1..400).prop_map(|steps| {
        let mut s = 0;
        let mut out = vec![0];
        for d in steps {
            s += d;
            out.push(s);
        }
        out.pop();
        out
    })
}

fn sample() -> impl Strategy<Value = EmpiricalDistribution> {
    prop::collection::vec(-50i32..50, 2..60).prop_map(|v| EmpiricalDistribution::new(v.into_iter().map(|x| x as f64 / 4.0).collect()).unwrap())
}

proptest! {
    #[test]
    fn intersection_is_symmetric(a in segment(-2048, 2048), b in segment(-2048, 2048)) {
        prop_assert_eq!(segment_intersect(&a, &b), segment_intersect(&b, &a));
        prop_assert_eq!(crossing(&a, &b), crossing(&b, &a));
    }

    #[test]
    fn modz_count_is_translation_invariant(a in segment(-1500, 2500), b in segment(-1500, 2500), i in -3i32..3, k in -3i32..3, span in 0i64..4) {
        let (dx, dy) = (i as f64, k as f64);
        prop_assert_eq!(
            modz_intersection_count(&a.translate(dx, dy), &b.translate(dx, dy), span),
            modz_intersection_count(&a, &b, span)
        );
    }

    #[test]
    fn span_zero_count_is_the_plain_crossing_in_cell(a in segment(0, 500), b in segment(0, 500)) {
        let direct = crossing(&a, &b).map(|p| p.is_some() as u32);
        prop_assert_eq!(modz_intersection_count(&a, &b, 0), direct.clone());
        if direct == Ok(1) {
            prop_assert!(matches!(segment_intersect(&a, &b), IntersectionResult::Point(_)));
        }
    }

    #[test]
    fn histogram_mass_and_bounds(levels in walk_levels()) {
        let n = levels.len() as u64;
        let h = LocalTimeHistogram::from_levels(levels.iter().copied());
        prop_assert_eq!(h.mass(), n);
        prop_assert_eq!(h.n(), n);
        let (lo, hi) = h.support().unwrap();
        prop_assert!(lo >= -2 * n as i64 && hi <= 2 * n as i64);
        prop_assert!(occupation_square(&h) <= n as u128 * h.max_count() as u128);
        prop_assert!(occupation_square(&h) >= n as u128);
    }

    #[test]
    fn cross_term_mirror_symmetry(levels in walk_levels(), s in -5i64..5) {
        let h = LocalTimeHistogram::from_levels(levels);
        prop_assert_eq!(occupation_cross(&h, s), occupation_cross(&h.mirror(), -s));
        prop_assert_eq!(occupation_cross(&h, 0), occupation_square(&h));
    }

    #[test]
    fn ks_is_a_metric(a in sample(), b in sample(), c in sample()) {
        let ab = ks_distance(&a, &b);
        prop_assert_eq!(ab, ks_distance(&b, &a));
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(ks_distance(&a, &a), 0.0);
        prop_assert!(ab <= ks_distance(&a, &c) + ks_distance(&c, &b) + 1e-12);
    }

    #[test]
    fn neighbouring_streams_differ(s in any::<u64>()) {
        prop_assert_ne!(derive_seed(s, 0), derive_seed(s, 1));
    }
}
