use super::{median_of, CanonicalRows, Predictor};
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

/// Regression tree. Splits minimize the summed absolute deviation from the
/// child medians; leaves predict the median of their responses. Ties in
/// split quality keep the lowest feature index, then the lowest threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel {
    root: Node,
}

pub(crate) struct Growth<'a> {
    pub rows: &'a CanonicalRows,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features examined per split; `None` means all of them.
    pub features_per_split: Option<usize>,
}

impl TreeModel {
    pub(crate) fn fit(rows: &CanonicalRows, max_depth: usize, min_leaf: usize) -> Self {
        let growth = Growth {
            rows,
            max_depth,
            min_leaf,
            features_per_split: None,
        };
        Self::grow(&growth, None)
    }

    pub(crate) fn grow(growth: &Growth<'_>, mut rng: Option<&mut SeededRng>) -> Self {
        let all: Vec<usize> = (0..growth.rows.len()).collect();
        Self {
            root: build(growth, &all, 0, &mut rng),
        }
    }
}

impl Predictor for TreeModel {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf(v) => return *v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }
}

fn abs_deviation(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    let med = median_of(&mut sorted);
    sorted.iter().map(|v| (v - med).abs()).sum()
}

fn candidate_features(growth: &Growth<'_>, rng: &mut Option<&mut SeededRng>) -> Vec<usize> {
    let p = growth.rows.p;
    match (growth.features_per_split, rng.as_deref_mut()) {
        (Some(k), Some(rng)) if k < p => {
            let mut pool: Vec<usize> = (0..p).collect();
            for j in 0..k {
                let pick = j + rng.below(p - j);
                pool.swap(j, pick);
            }
            pool.truncate(k);
            pool.sort_unstable();
            pool
        }
        _ => (0..p).collect(),
    }
}

fn build(
    growth: &Growth<'_>,
    idx: &[usize],
    depth: usize,
    rng: &mut Option<&mut SeededRng>,
) -> Node {
    let rows = growth.rows;
    let ys: Vec<f64> = idx.iter().map(|&i| rows.responses[i]).collect();
    let leaf = || Node::Leaf(median_of(&mut ys.clone()));
    if depth >= growth.max_depth || idx.len() < 2 * growth.min_leaf {
        return leaf();
    }
    let parent = abs_deviation(&ys);
    if parent == 0.0 {
        return leaf();
    }

    let mut best: Option<(usize, f64, f64)> = None;
    let mut best_cost = parent * (1.0 - 1e-12);
    for feature in candidate_features(growth, rng) {
        let mut order = idx.to_vec();
        // Stable sort keeps canonical order within equal feature values.
        order.sort_by(|&a, &b| rows.row(a)[feature].total_cmp(&rows.row(b)[feature]));
        let sorted_y: Vec<f64> = order.iter().map(|&i| rows.responses[i]).collect();
        for cut in growth.min_leaf..=(order.len() - growth.min_leaf) {
            let lo = rows.row(order[cut - 1])[feature];
            let hi = rows.row(order[cut])[feature];
            if lo >= hi {
                continue;
            }
            let cost = abs_deviation(&sorted_y[..cut]) + abs_deviation(&sorted_y[cut..]);
            if cost < best_cost {
                let mut threshold = lo + (hi - lo) / 2.0;
                if threshold >= hi {
                    threshold = lo;
                }
                best_cost = cost;
                best = Some((feature, threshold, cost));
            }
        }
    }

    match best {
        None => leaf(),
        Some((feature, threshold, _)) => {
            let (left, right): (Vec<usize>, Vec<usize>) = idx
                .iter()
                .partition(|&&i| rows.row(i)[feature] <= threshold);
            Node::Split {
                feature,
                threshold,
                left: Box::new(build(growth, &left, depth + 1, rng)),
                right: Box::new(build(growth, &right, depth + 1, rng)),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::dataset::Dataset;
    use crate::regress::{Predictor, Regressor, RegressorSpec};

    #[test]
    fn step_function_is_recovered() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![f64::from(i)]).collect();
        let ys: Vec<f64> = (0..10).map(|i| if i < 5 { 1.0 } else { 9.0 }).collect();
        let d = Dataset::from_rows(&rows, ys).unwrap();
        let spec = RegressorSpec::Tree {
            max_depth: 3,
            min_leaf: 1,
        };
        let sample: Vec<usize> = (0..10).collect();
        let model = spec.fit(&d, &sample, 0).unwrap();
        assert_eq!(model.predict(&[2.0]), 1.0);
        assert_eq!(model.predict(&[4.4]), 1.0);
        assert_eq!(model.predict(&[4.6]), 9.0);
    }

    #[test]
    fn depth_one_limit_gives_median() {
        let d =
            Dataset::from_rows(&[vec![0.0], vec![1.0], vec![2.0]], vec![1.0, 4.0, 10.0]).unwrap();
        let spec = RegressorSpec::Tree {
            max_depth: 1,
            min_leaf: 2,
        };
        // Three rows cannot form two leaves of size two.
        let model = spec.fit(&d, &[0, 1, 2], 0).unwrap();
        assert_eq!(model.predict(&[0.0]), 4.0);
    }
}
