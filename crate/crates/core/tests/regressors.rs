use jab_core::{Dataset, Predictor, Regressor, RegressorSpec, SeededRng};

fn data(n: usize, seed: u64) -> Dataset {
    let mut rng = SeededRng::new(seed, 3);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..3).map(|_| rng.uniform() * 2.0 - 1.0).collect())
        .collect();
    let ys = rows
        .iter()
        .map(|r| (3.0 * r[0]).sin() + r[1] * r[2] + 0.3 * rng.uniform())
        .collect();
    Dataset::from_rows(&rows, ys).unwrap()
}

fn specs() -> [RegressorSpec; 4] {
    [
        RegressorSpec::ridge(),
        RegressorSpec::knn(),
        RegressorSpec::tree(),
        RegressorSpec::forest(),
    ]
}

fn queries(seed: u64) -> Vec<Vec<f64>> {
    let mut rng = SeededRng::new(seed, 9);
    (0..10)
        .map(|_| (0..3).map(|_| rng.uniform() * 3.0 - 1.5).collect())
        .collect()
}

#[test]
fn permutation_symmetry() {
    for spec in specs() {
        for trial in 0..100u64 {
            let d = data(25, trial);
            let mut rng = SeededRng::new(trial, 1);
            let mut perm: Vec<usize> = (0..d.len()).collect();
            for i in (1..perm.len()).rev() {
                perm.swap(i, rng.below(i + 1));
            }
            let shuffled = d.select(&perm);
            let sample: Vec<usize> = (0..d.len()).collect();
            let a = spec.fit(&d, &sample, trial).unwrap();
            let b = spec.fit(&shuffled, &sample, trial).unwrap();
            for q in queries(trial) {
                assert_eq!(
                    a.predict(&q).to_bits(),
                    b.predict(&q).to_bits(),
                    "{}",
                    spec.name()
                );
            }
        }
    }
}

#[test]
fn resample_order_does_not_matter() {
    let d = data(20, 5);
    let sample = vec![3, 3, 7, 1, 19, 0, 12, 12, 12, 5];
    let mut reversed = sample.clone();
    reversed.reverse();
    for spec in specs() {
        let a = spec.fit(&d, &sample, 1).unwrap();
        let b = spec.fit(&d, &reversed, 1).unwrap();
        for q in queries(2) {
            assert_eq!(
                a.predict(&q).to_bits(),
                b.predict(&q).to_bits(),
                "{}",
                spec.name()
            );
        }
    }
}

#[test]
fn local_learners_stay_in_response_range() {
    for spec in &specs()[1..] {
        for trial in 0..20u64 {
            let d = data(30, trial);
            let lo = d.responses().iter().copied().fold(f64::INFINITY, f64::min);
            let hi = d
                .responses()
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            let sample: Vec<usize> = (0..d.len()).collect();
            let model = spec.fit(&d, &sample, trial).unwrap();
            for q in queries(trial + 100) {
                let p = model.predict(&q);
                assert!(
                    p >= lo && p <= hi,
                    "{}: {p} outside [{lo}, {hi}]",
                    spec.name()
                );
            }
        }
    }
}

#[test]
fn heavy_ridge_penalty_gives_the_mean() {
    let d = data(30, 8);
    let mean = d.responses().iter().sum::<f64>() / d.len() as f64;
    let sample: Vec<usize> = (0..d.len()).collect();
    let model = RegressorSpec::Ridge {
        lambda_factor: 1e12,
    }
    .fit(&d, &sample, 0)
    .unwrap();
    for q in queries(4) {
        assert!((model.predict(&q) - mean).abs() < 1e-6);
    }
}
