use jab_core::oracle::couple;
use jab_core::resample::exclusion_probability;
use jab_core::{draw_b, draw_sample, keep_probability, SamplingMode, SeededRng};

#[test]
fn exclusion_frequency() {
    let mut rng = SeededRng::new(1, 0);
    let draws = 10_000;
    let misses = (0..draws)
        .filter(|_| {
            !draw_sample(10, 10, SamplingMode::WithReplacement, &mut rng)
                .unwrap()
                .contains(3)
        })
        .count();
    let p = 0.9f64.powi(10);
    assert_eq!(
        exclusion_probability(10, 10, SamplingMode::WithReplacement),
        p
    );
    let se = (p * (1.0 - p) / draws as f64).sqrt();
    let freq = misses as f64 / draws as f64;
    assert!((freq - p).abs() < 3.0 * se, "{freq} vs {p}");
}

#[test]
fn distinct_count_with_replacement() {
    let n = 20;
    let mut rng = SeededRng::new(2, 0);
    let draws = 5_000;
    let counts: Vec<f64> = (0..draws)
        .map(|_| {
            let mut idx = draw_sample(n, n, SamplingMode::WithReplacement, &mut rng)
                .unwrap()
                .indices;
            idx.sort_unstable();
            idx.dedup();
            idx.len() as f64
        })
        .collect();
    let mean = counts.iter().sum::<f64>() / draws as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (draws as f64 - 1.0);
    let expected = n as f64 * (1.0 - (1.0 - 1.0 / n as f64).powi(n as i32));
    assert!(
        (mean - expected).abs() < 3.0 * (var / draws as f64).sqrt(),
        "{mean} vs {expected}"
    );
}

#[test]
fn without_replacement_is_distinct() {
    let mut rng = SeededRng::new(3, 0);
    for m in 1..=12 {
        let mut idx = draw_sample(12, m, SamplingMode::WithoutReplacement, &mut rng)
            .unwrap()
            .indices;
        idx.sort_unstable();
        idx.dedup();
        assert_eq!(idx.len(), m);
    }
    let mut full = draw_sample(5, 5, SamplingMode::WithoutReplacement, &mut rng)
        .unwrap()
        .indices;
    full.sort_unstable();
    assert_eq!(full, vec![0, 1, 2, 3, 4]);
}

fn binomial_moments(b_tilde: usize, theta: f64, draws: usize, seed: u64) {
    let mut rng = SeededRng::new(seed, 0);
    let xs: Vec<f64> = (0..draws)
        .map(|_| draw_b(b_tilde, theta, &mut rng).unwrap() as f64)
        .collect();
    let mean = xs.iter().sum::<f64>() / draws as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws as f64 - 1.0);
    let mu = b_tilde as f64 * theta;
    let sigma2 = mu * (1.0 - theta);
    let mean_se = (sigma2 / draws as f64).sqrt();
    assert!((mean - mu).abs() < 3.0 * mean_se, "mean {mean} vs {mu}");
    // Variance of the sample variance is about 2 sigma^4 / draws for a near-normal law.
    let var_se = (2.0 / draws as f64).sqrt() * sigma2;
    assert!(
        (var - sigma2).abs() < 3.0 * var_se,
        "variance {var} vs {sigma2}"
    );
}

#[test]
fn draw_b_moments() {
    binomial_moments(
        147,
        keep_probability(40, 40, SamplingMode::WithReplacement).unwrap(),
        20_000,
        4,
    );
    binomial_moments(100_000, 0.64, 10_000, 5);
    binomial_moments(30, 0.5, 20_000, 6);
}

#[test]
fn draw_b_degenerate() {
    let mut rng = SeededRng::new(0, 0);
    assert_eq!(draw_b(10, 1.0, &mut rng).unwrap(), 10);
    assert!(draw_b(10, 0.0, &mut rng).is_err());
}

#[test]
fn coupled_count_is_binomial() {
    let (n, m, b_tilde) = (9, 9, 60);
    let theta = keep_probability(n, m, SamplingMode::WithReplacement).unwrap();
    let mut rng = SeededRng::new(7, 0);
    let draws = 4_000;
    let total: usize = (0..draws)
        .map(|_| {
            let samples: Vec<_> = (0..b_tilde)
                .map(|_| draw_sample(n + 1, m, SamplingMode::WithReplacement, &mut rng).unwrap())
                .collect();
            couple(&samples, n).0
        })
        .sum();
    let mean = total as f64 / draws as f64;
    let mu = b_tilde as f64 * theta;
    let se = (mu * (1.0 - theta) / draws as f64).sqrt();
    assert!((mean - mu).abs() < 3.0 * se, "{mean} vs {mu}");
}

#[test]
fn keep_probability_examples() {
    assert!((keep_probability(4, 2, SamplingMode::WithReplacement).unwrap() - 0.64).abs() < 1e-15);
    assert!(
        (keep_probability(4, 2, SamplingMode::WithoutReplacement).unwrap() - 0.6).abs() < 1e-15
    );
}
