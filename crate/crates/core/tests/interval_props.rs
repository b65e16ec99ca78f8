use jab_core::methods::{fit_jab, inflate, predict_jab};
use jab_core::{
    AggregationSpec, BMode, Dataset, Execution, MethodConfig, RegressorSpec, SamplingMode,
    SeededRng,
};
use proptest::prelude::*;

fn data(n: usize, seed: u64) -> Dataset {
    let mut rng = SeededRng::new(seed, 11);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.uniform(), rng.uniform()]).collect();
    let ys = rows
        .iter()
        .map(|r| r[0] - 2.0 * r[1] + rng.uniform())
        .collect();
    Dataset::from_rows(&rows, ys).unwrap()
}

fn config(regressor: RegressorSpec) -> MethodConfig {
    MethodConfig {
        alpha: 0.1,
        m: 10,
        sampling: SamplingMode::WithReplacement,
        b_mode: BMode::Fixed(15),
        regressor,
        aggregation: AggregationSpec::mean(),
        seed: 0,
        execution: Execution::Sequential,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn alpha_monotone(seed in any::<u64>(), a in 0.01f64..0.5, b in 0.01f64..0.5) {
        let d = data(15, seed);
        let cfg = config(RegressorSpec::ridge());
        let (ens, res) = fit_jab(&d, &cfg.regressor, &cfg, &mut SeededRng::new(seed, 0)).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let x = [0.3, 0.6];
        let wide = predict_jab(&ens, &res, &x, lo).unwrap();
        let narrow = predict_jab(&ens, &res, &x, hi).unwrap();
        prop_assert!(wide.contains_interval(&narrow));
    }

    #[test]
    fn inflation_monotone(lo in -10.0f64..0.0, w in 0.0f64..10.0, e1 in 0.0f64..5.0, e2 in 0.0f64..5.0) {
        let iv = jab_core::PredictionInterval::new(lo, lo + w).unwrap();
        let (small, large) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        prop_assert!(inflate(&iv, large).unwrap().contains_interval(&inflate(&iv, small).unwrap()));
    }

    #[test]
    fn translation_equivariant(seed in any::<u64>(), shift in -100.0f64..100.0, which in 0usize..3) {
        let reg = [RegressorSpec::ridge(), RegressorSpec::knn(), RegressorSpec::tree()][which].clone();
        let d = data(15, seed);
        let shifted = d.shift_responses(shift).unwrap();
        let cfg = config(reg);
        let (e1, r1) = fit_jab(&d, &cfg.regressor, &cfg, &mut SeededRng::new(seed, 0)).unwrap();
        let (e2, r2) = fit_jab(&shifted, &cfg.regressor, &cfg, &mut SeededRng::new(seed, 0)).unwrap();
        let x = [0.5, 0.2];
        let a = predict_jab(&e1, &r1, &x, 0.2).unwrap();
        let b = predict_jab(&e2, &r2, &x, 0.2).unwrap();
        let tol = 1e-9 * (1.0 + shift.abs());
        prop_assert!((b.lower - a.lower - shift).abs() <= tol, "{a:?} {b:?}");
        prop_assert!((b.upper - a.upper - shift).abs() <= tol, "{a:?} {b:?}");
    }
}

#[test]
fn crossed_quantiles_are_an_empty_set() {
    let mut found = false;
    for seed in 0..200 {
        let d = data(15, seed);
        let cfg = config(RegressorSpec::ridge());
        let (ens, res) = fit_jab(&d, &cfg.regressor, &cfg, &mut SeededRng::new(seed, 0)).unwrap();
        match predict_jab(&ens, &res, &[0.3, 0.6], 0.9) {
            Err(jab_core::Error::EmptySet { lower, upper }) => {
                assert!(lower > upper);
                found = true;
            }
            Ok(iv) => assert!(iv.lower <= iv.upper),
            Err(e) => panic!("unexpected {e}"),
        }
    }
    assert!(found);
}
