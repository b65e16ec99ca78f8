//! Coverage of J+aB with random B on exchangeable data, at a few settings
//! where the guarantee should be visible with modest Monte Carlo effort.

use jab_core::harness::{
    run_experiment, DataSource, ExperimentPlan, MethodKind, MethodRun, SyntheticKind, SyntheticSpec,
};
use jab_core::{
    keep_probability, AggregationSpec, BMode, Execution, MethodConfig, RegressorSpec, SamplingMode,
};

#[test]
fn random_b_coverage_respects_the_floor() {
    let n = 30;
    let cases = [
        (
            RegressorSpec::knn(),
            AggregationSpec::median(),
            SamplingMode::WithReplacement,
        ),
        (
            RegressorSpec::tree(),
            AggregationSpec::trimmed_mean(0.25),
            SamplingMode::WithoutReplacement,
        ),
    ];
    for (regressor, aggregation, sampling) in cases {
        let m = if sampling == SamplingMode::WithReplacement {
            n
        } else {
            n / 2
        };
        let theta = keep_probability(n, m, sampling).unwrap();
        let config = MethodConfig {
            alpha: 0.2,
            m,
            sampling,
            b_mode: BMode::Random((30.0 / theta) as usize),
            regressor,
            aggregation,
            seed: 0,
            execution: Execution::Parallel,
        };
        let plan = ExperimentPlan {
            data: DataSource::Synthetic(SyntheticSpec {
                kind: SyntheticKind::Friedman {
                    p: 5,
                    noise_sd: 1.0,
                },
                seed: 2,
            }),
            n_train: n,
            n_test: 50,
            n_splits: 60,
            seed: 99,
            methods: vec![MethodRun {
                label: "jab".into(),
                kind: MethodKind::Jab,
                config,
            }],
            stability: None,
            execution: Execution::Parallel,
        };
        let report = run_experiment(&plan).unwrap();
        let cov = report.results[0].mean_coverage().unwrap();
        // 3000 test points; the 1 - 2 alpha floor is 0.6 and the nominal level 0.8.
        assert!(cov >= 0.6, "coverage {cov}");
    }
}
