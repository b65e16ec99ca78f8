use super::{CanonicalRows, Predictor};

/// Euclidean k-nearest-neighbours; distance ties go to the row that comes
/// first in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    features: Vec<f64>,
    responses: Vec<f64>,
    p: usize,
    k: usize,
}

impl KnnModel {
    pub(crate) fn fit(rows: &CanonicalRows, k: usize) -> Self {
        Self {
            features: rows.features.clone(),
            responses: rows.responses.clone(),
            p: rows.p,
            k: k.min(rows.len()),
        }
    }
}

impl Predictor for KnnModel {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut dist: Vec<(f64, usize)> = self
            .features
            .chunks(self.p.max(1))
            .take(self.responses.len())
            .enumerate()
            .map(|(i, row)| {
                let d = if self.p == 0 {
                    0.0
                } else {
                    row.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum()
                };
                (d, i)
            })
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let sum: f64 = dist[..self.k].iter().map(|&(_, i)| self.responses[i]).sum();
        sum / self.k as f64
    }
}

#[cfg(test)]
mod tests {
    use crate::dataset::Dataset;
    use crate::regress::{Predictor, Regressor, RegressorSpec};

    #[test]
    fn nearest_neighbour() {
        let d = Dataset::from_rows(&[vec![0.0], vec![10.0]], vec![5.0, 7.0]).unwrap();
        let model = RegressorSpec::Knn { k: 1 }.fit(&d, &[0, 1], 0).unwrap();
        assert_eq!(model.predict(&[1.0]), 5.0);
        assert_eq!(model.predict(&[9.0]), 7.0);
    }

    #[test]
    fn k_larger_than_sample_uses_all_rows() {
        let d = Dataset::from_rows(&[vec![0.0], vec![10.0]], vec![5.0, 7.0]).unwrap();
        let model = RegressorSpec::Knn { k: 5 }.fit(&d, &[0, 1, 1], 0).unwrap();
        assert!((model.predict(&[0.0]) - 19.0 / 3.0).abs() < 1e-12);
    }
}
