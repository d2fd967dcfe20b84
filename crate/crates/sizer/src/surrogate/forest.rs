//! Random forest regressor built from CART regression trees.
//!
//! Splits minimise the summed squared error of the two children (variance
//! reduction), thresholds sit midway between consecutive distinct feature
//! values, and ties break toward the lowest feature index then the lowest
//! threshold so training is fully deterministic. Trees grow on bootstrap
//! resamples (when enabled) and consider a random feature subset at every
//! split; per-tree RNG streams derive from the spec seed, so construction
//! may run in parallel without changing the result.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SizerError};
use crate::util::{derive_seed, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestSpec {
    pub n_estimators: usize,
    /// Depth limit; unlimited when unset (the root is depth 0).
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub bootstrap: bool,
    /// Fraction of features considered at each split.
    pub feature_subsample: f64,
    pub seed: u64,
}

impl Default for ForestSpec {
    fn default() -> Self {
        ForestSpec {
            n_estimators: 100,
            max_depth: None,
            min_samples_leaf: 1,
            bootstrap: true,
            feature_subsample: 1.0 / 3.0,
            seed: 0,
        }
    }
}

impl ForestSpec {
    pub fn with_estimators(n: usize) -> Self {
        ForestSpec {
            n_estimators: n,
            ..Default::default()
        }
    }

    /// A single exhaustive CART tree: no bootstrap, all features at every
    /// split.
    pub fn single_cart() -> Self {
        ForestSpec {
            n_estimators: 1,
            bootstrap: false,
            feature_subsample: 1.0,
            ..Default::default()
        }
    }

    pub fn describe(&self) -> String {
        format!("RF(n = {})", self.n_estimators)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// One regression tree as a flat arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn predict_one(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
    pub n_features: usize,
}

impl ForestModel {
    /// Mean of the per-tree predictions.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.n_features {
            return Err(SizerError::InvalidArgument(format!(
                "forest: expected {} features, got {}",
                self.n_features,
                x.cols()
            )));
        }
        Ok(x.iter_rows()
            .map(|row| {
                self.trees.iter().map(|t| t.predict_one(row)).sum::<f64>()
                    / self.trees.len() as f64
            })
            .collect())
    }
}

/// Fit a random forest regressor. Raw (unscaled) features are fine; trees
/// are scale-invariant.
pub fn fit_rf(spec: &ForestSpec, x: &Matrix, y: &[f64]) -> Result<ForestModel> {
    if x.rows() == 0 {
        return Err(SizerError::InvalidArgument("forest: empty training set".into()));
    }
    if x.rows() != y.len() {
        return Err(SizerError::InvalidArgument(format!(
            "forest: {} rows but {} targets",
            x.rows(),
            y.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(SizerError::InvalidArgument("forest: non-finite target".into()));
    }
    if spec.n_estimators == 0 {
        return Err(SizerError::InvalidArgument(
            "forest: n_estimators must be >= 1".into(),
        ));
    }
    if !(spec.feature_subsample > 0.0 && spec.feature_subsample <= 1.0) {
        return Err(SizerError::InvalidArgument(
            "forest: feature_subsample must be in (0, 1]".into(),
        ));
    }

    let trees: Vec<Tree> = (0..spec.n_estimators)
        .into_par_iter()
        .map(|ti| {
            let mut rng =
                ChaCha12Rng::seed_from_u64(derive_seed(spec.seed, &["tree", &ti.to_string()]));
            let rows: Vec<usize> = if spec.bootstrap {
                (0..x.rows()).map(|_| rng.random_range(0..x.rows())).collect()
            } else {
                (0..x.rows()).collect()
            };
            grow_tree(spec, x, y, rows, &mut rng)
        })
        .collect();

    Ok(ForestModel {
        trees,
        n_features: x.cols(),
    })
}

fn grow_tree(spec: &ForestSpec, x: &Matrix, y: &[f64], rows: Vec<usize>, rng: &mut impl Rng) -> Tree {
    let mut nodes = Vec::new();
    build_node(spec, x, y, rows, 0, &mut nodes, rng);
    Tree { nodes }
}

fn leaf_value(y: &[f64], rows: &[usize]) -> f64 {
    rows.iter().map(|&i| y[i]).sum::<f64>() / rows.len() as f64
}

fn build_node(
    spec: &ForestSpec,
    x: &Matrix,
    y: &[f64],
    rows: Vec<usize>,
    depth: usize,
    nodes: &mut Vec<TreeNode>,
    rng: &mut impl Rng,
) -> usize {
    let id = nodes.len();
    nodes.push(TreeNode::Leaf { value: 0.0 }); // placeholder

    let depth_capped = spec.max_depth.is_some_and(|d| depth >= d);
    let split = if depth_capped || rows.len() < 2 * spec.min_samples_leaf.max(1) {
        None
    } else {
        best_split(spec, x, y, &rows, rng)
    };

    match split {
        Some((feature, threshold)) => {
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
                rows.iter().partition(|&&i| x.get(i, feature) <= threshold);
            let left = build_node(spec, x, y, left_rows, depth + 1, nodes, rng);
            let right = build_node(spec, x, y, right_rows, depth + 1, nodes, rng);
            nodes[id] = TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            };
        }
        None => {
            nodes[id] = TreeNode::Leaf {
                value: leaf_value(y, &rows),
            };
        }
    }
    id
}

/// Best (feature, threshold) by minimum child SSE; `None` when no split
/// satisfies the leaf-size floor or reduces the error.
fn best_split(
    spec: &ForestSpec,
    x: &Matrix,
    y: &[f64],
    rows: &[usize],
    rng: &mut impl Rng,
) -> Option<(usize, f64)> {
    let d = x.cols();
    let features: Vec<usize> = if spec.feature_subsample >= 1.0 {
        (0..d).collect()
    } else {
        let k = ((d as f64 * spec.feature_subsample).ceil() as usize).clamp(1, d);
        let mut all: Vec<usize> = (0..d).collect();
        all.shuffle(rng);
        let mut chosen = all[..k].to_vec();
        chosen.sort_unstable();
        chosen
    };

    let n = rows.len() as f64;
    let total: f64 = rows.iter().map(|&i| y[i]).sum();
    let total_sq: f64 = rows.iter().map(|&i| y[i] * y[i]).sum();
    let parent_sse = total_sq - total * total / n;
    if parent_sse <= 0.0 {
        return None; // already pure
    }

    let min_leaf = spec.min_samples_leaf.max(1);
    let mut best: Option<(f64, usize, f64)> = None; // (child_sse, feature, threshold)

    let mut order: Vec<usize> = rows.to_vec();
    for &f in &features {
        order.sort_by(|&a, &b| x.get(a, f).partial_cmp(&x.get(b, f)).unwrap());
        let mut left_sum = 0.0;
        let mut left_sq = 0.0;
        for (k, &i) in order.iter().enumerate().take(order.len() - 1) {
            let v = y[i];
            left_sum += v;
            left_sq += v * v;
            let v_here = x.get(i, f);
            let v_next = x.get(order[k + 1], f);
            if v_here == v_next {
                continue; // can't separate equal values
            }
            let n_left = (k + 1) as f64;
            let n_right = n - n_left;
            if (k + 1) < min_leaf || (order.len() - k - 1) < min_leaf {
                continue;
            }
            let right_sum = total - left_sum;
            let right_sq = total_sq - left_sq;
            let child_sse = (left_sq - left_sum * left_sum / n_left)
                + (right_sq - right_sum * right_sum / n_right);
            let threshold = 0.5 * (v_here + v_next);
            let candidate = (child_sse, f, threshold);
            best = match best {
                None => Some(candidate),
                Some(cur) => {
                    // Lower SSE wins; exact ties go to the lower feature
                    // index, then the lower threshold.
                    if candidate.0 < cur.0
                        || (candidate.0 == cur.0
                            && (candidate.1 < cur.1
                                || (candidate.1 == cur.1 && candidate.2 < cur.2)))
                    {
                        Some(candidate)
                    } else {
                        Some(cur)
                    }
                }
            };
        }
    }

    best.and_then(|(child_sse, f, t)| {
        if child_sse < parent_sse {
            Some((f, t))
        } else {
            None
        }
    })
}
