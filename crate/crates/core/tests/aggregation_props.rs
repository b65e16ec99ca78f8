use jab_core::{aggregate, AggregationSpec};
use proptest::prelude::*;

fn specs() -> impl Strategy<Value = AggregationSpec> {
    prop_oneof![
        Just(AggregationSpec::mean()),
        Just(AggregationSpec::median()),
        (0.0f64..0.49).prop_map(AggregationSpec::trimmed_mean),
    ]
}

proptest! {
    #[test]
    fn permutation_invariant(
        spec in specs(),
        v in prop::collection::vec(-1e3f64..1e3, 0..40),
        seed in any::<u64>(),
    ) {
        let mut w = v.clone();
        let mut s = seed;
        for i in (1..w.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            w.swap(i, (s >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(aggregate(&spec, &v).to_bits(), aggregate(&spec, &w).to_bits());
    }

    #[test]
    fn bounded(spec in specs(), v in prop::collection::vec(-1e3f64..1e3, 1..40)) {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let a = aggregate(&spec, &v);
        prop_assert!(a >= lo - 1e-9 && a <= hi + 1e-9, "{a} outside [{lo}, {hi}]");
    }

    #[test]
    fn zero_trim_is_mean(v in prop::collection::vec(-1e3f64..1e3, 0..40)) {
        prop_assert_eq!(
            aggregate(&AggregationSpec::trimmed_mean(0.0), &v),
            aggregate(&AggregationSpec::mean(), &v)
        );
    }

    #[test]
    fn mean_bounded_differences(
        v in prop::collection::vec(0.0f64..1.0, 1..40),
        idx in any::<prop::sample::Index>(),
        replacement in 0.0f64..1.0,
    ) {
        let mut w = v.clone();
        let i = idx.index(w.len());
        w[i] = replacement;
        let mean = AggregationSpec::mean();
        let change = (aggregate(&mean, &v) - aggregate(&mean, &w)).abs();
        prop_assert!(change <= 1.0 / v.len() as f64 + 1e-12);
    }
}

#[test]
fn worked_examples() {
    let v = [1.0, 2.0, 3.0, 4.0];
    assert_eq!(aggregate(&AggregationSpec::trimmed_mean(0.25), &v), 2.5);
    assert_eq!(aggregate(&AggregationSpec::median(), &v), 2.5);
    assert_eq!(aggregate(&AggregationSpec::mean(), &[]), 0.0);
}
