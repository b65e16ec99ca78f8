use jab_core::oracle::q_plus_oracle;
use jab_core::{q_minus, q_plus};
use proptest::prelude::*;

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e6f64..1e6, 1..50)
}

fn alpha() -> impl Strategy<Value = f64> {
    (1u32..1000).prop_map(|a| f64::from(a) / 1000.0)
}

proptest! {
    #[test]
    fn duality(v in values(), a in alpha()) {
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        prop_assert_eq!(q_minus(&v, a).unwrap(), -q_plus(&neg, a).unwrap());
    }

    #[test]
    fn monotone_in_alpha(v in values(), a in alpha(), b in alpha()) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(q_plus(&v, lo).unwrap() >= q_plus(&v, hi).unwrap());
        prop_assert!(q_minus(&v, lo).unwrap() <= q_minus(&v, hi).unwrap());
    }

    #[test]
    fn permutation_invariant(v in values(), a in alpha(), seed in any::<u64>()) {
        let mut w = v.clone();
        let mut s = seed;
        for i in (1..w.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            w.swap(i, (s >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(q_plus(&v, a).unwrap(), q_plus(&w, a).unwrap());
    }

    #[test]
    fn matches_oracle(v in values(), a in alpha()) {
        prop_assert_eq!(q_plus(&v, a).unwrap(), q_plus_oracle(&v, a));
    }
}

#[test]
fn overflow_and_snap() {
    let nine: Vec<f64> = (1..=9).map(f64::from).collect();
    assert_eq!(q_plus(&nine, 0.1).unwrap(), 9.0);
    assert_eq!(q_plus(&nine[..5], 0.1).unwrap(), f64::INFINITY);
    assert_eq!(q_minus(&nine[..5], 0.1).unwrap(), f64::NEG_INFINITY);
    assert!(q_plus(&[], 0.1).is_err());
}
