//! Cross-validated grid search over model specifications.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SizerError};
use crate::util::{derive_seed, Matrix};

use super::forest::{fit_rf, ForestModel, ForestSpec};
use super::metrics::{accuracy, r2};
use super::mlp::{fit_mlp, MlpModel, MlpSpec, OutputActivation};

/// One candidate cell of a parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    Mlp(MlpSpec),
    Forest(ForestSpec),
}

impl ModelSpec {
    pub fn describe(&self) -> String {
        match self {
            ModelSpec::Mlp(s) => s.describe(),
            ModelSpec::Forest(s) => s.describe(),
        }
    }

    pub fn fit(&self, x: &Matrix, y: &[f64], seed: u64) -> Result<Model> {
        match self {
            ModelSpec::Mlp(s) => Ok(Model::Mlp(fit_mlp(s, x, y, seed)?)),
            ModelSpec::Forest(s) => {
                let mut s = s.clone();
                s.seed = seed;
                Ok(Model::Forest(fit_rf(&s, x, y)?))
            }
        }
    }
}

/// A trained model of either family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Model {
    Mlp(MlpModel),
    Forest(ForestModel),
}

impl Model {
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        match self {
            Model::Mlp(m) => m.predict(x),
            Model::Forest(m) => m.predict(x),
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Model::Mlp(m) => m.input_dim(),
            Model::Forest(m) => m.n_features,
        }
    }
}

/// Whether CV scores by classification accuracy or by R².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Classification,
    Regression,
}

/// One scored grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvCell {
    pub spec: ModelSpec,
    pub fold_scores: Vec<f64>,
    pub mean_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub best_index: usize,
    pub cells: Vec<CvCell>,
}

impl GridSearchResult {
    pub fn best_spec(&self) -> &ModelSpec {
        &self.cells[self.best_index].spec
    }
}

/// Deterministic k-fold index partition: every row lands in exactly one
/// validation fold.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, row) in idx.into_iter().enumerate() {
        folds[i % k].push(row);
    }
    folds
}

/// Exhaustive grid search with k-fold cross-validation. Returns every cell's
/// fold scores and the argmax; ties break toward the earliest cell in grid
/// order.
pub fn grid_search(
    grid: &[ModelSpec],
    task: Task,
    x: &Matrix,
    y: &[f64],
    k_folds: usize,
    seed: u64,
) -> Result<GridSearchResult> {
    if grid.is_empty() {
        return Err(SizerError::InvalidArgument("grid_search: empty grid".into()));
    }
    if k_folds < 2 {
        return Err(SizerError::InvalidArgument(
            "grid_search: k_folds must be >= 2".into(),
        ));
    }
    if x.rows() < k_folds {
        return Err(SizerError::InvalidArgument(format!(
            "grid_search: {} rows cannot fill {k_folds} folds",
            x.rows()
        )));
    }
    for spec in grid {
        if let (Task::Classification, ModelSpec::Forest(_)) = (task, spec) {
            return Err(SizerError::InvalidArgument(
                "grid_search: forest cells are regression-only".into(),
            ));
        }
        if let (Task::Classification, ModelSpec::Mlp(m)) = (task, spec) {
            if m.output != OutputActivation::Logistic {
                return Err(SizerError::InvalidArgument(
                    "grid_search: classification cells need a logistic output".into(),
                ));
            }
        }
    }

    let folds = kfold_indices(x.rows(), k_folds, derive_seed(seed, &["kfold"]));
    let mut cells = Vec::with_capacity(grid.len());
    for (ci, spec) in grid.iter().enumerate() {
        let mut fold_scores = Vec::with_capacity(k_folds);
        for (fi, val_rows) in folds.iter().enumerate() {
            let train_rows: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != fi)
                .flat_map(|(_, f)| f.iter().copied())
                .collect();
            let xt = x.select_rows(&train_rows);
            let yt: Vec<f64> = train_rows.iter().map(|&i| y[i]).collect();
            let xv = x.select_rows(val_rows);
            let yv: Vec<f64> = val_rows.iter().map(|&i| y[i]).collect();
            let model = spec.fit(
                &xt,
                &yt,
                derive_seed(seed, &["cell", &ci.to_string(), "fold", &fi.to_string()]),
            )?;
            let pred = model.predict(&xv)?;
            let score = match task {
                Task::Classification => {
                    let p: Vec<bool> = pred.iter().map(|&v| v >= 0.5).collect();
                    let t: Vec<bool> = yv.iter().map(|&v| v > 0.5).collect();
                    accuracy(&p, &t)
                }
                Task::Regression => r2(&pred, &yv),
            };
            fold_scores.push(score);
        }
        let mean_score = fold_scores.iter().sum::<f64>() / fold_scores.len() as f64;
        cells.push(CvCell {
            spec: spec.clone(),
            fold_scores,
            mean_score,
        });
    }

    let mut best_index = 0;
    for (i, c) in cells.iter().enumerate() {
        if c.mean_score > cells[best_index].mean_score {
            best_index = i;
        }
    }
    Ok(GridSearchResult { best_index, cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noisy_step_data(n: usize) -> (Matrix, Vec<f64>) {
        // Deterministic pseudo-noise on a step target; enough structure that
        // averaging many trees beats a single tree under CV.
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 / n as f64]).collect();
        let y: Vec<f64> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let base = if r[0] < 0.5 { 0.0 } else { 2.0 };
                base + ((i as f64 * 12.9898).sin() * 43758.5453).fract() - 0.5
            })
            .collect();
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn single_cell_grid_returns_it() {
        let (x, y) = noisy_step_data(40);
        let grid = vec![ModelSpec::Forest(ForestSpec::with_estimators(3))];
        let r = grid_search(&grid, Task::Regression, &x, &y, 3, 1).unwrap();
        assert_eq!(r.best_index, 0);
        assert_eq!(r.cells.len(), 1);
        assert_eq!(r.cells[0].fold_scores.len(), 3);
    }

    #[test]
    fn cv_prefers_more_trees_on_noisy_data() {
        let (x, y) = noisy_step_data(120);
        let grid = vec![
            ModelSpec::Forest(ForestSpec::with_estimators(1)),
            ModelSpec::Forest(ForestSpec::with_estimators(50)),
        ];
        let r = grid_search(&grid, Task::Regression, &x, &y, 4, 7).unwrap();
        assert_eq!(r.best_index, 1, "variance reduction should win: {:?}",
            r.cells.iter().map(|c| c.mean_score).collect::<Vec<_>>());
    }

    #[test]
    fn folds_partition_rows() {
        let folds = kfold_indices(23, 5, 3);
        let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
        for f in &folds {
            assert!(f.len() == 4 || f.len() == 5);
        }
    }

    #[test]
    fn empty_grid_rejected() {
        let (x, y) = noisy_step_data(20);
        assert!(grid_search(&[], Task::Regression, &x, &y, 3, 1).is_err());
    }

    #[test]
    fn tie_break_is_first_in_grid_order() {
        // Two identical cells: mean scores are equal, first one wins.
        let (x, y) = noisy_step_data(30);
        let grid = vec![
            ModelSpec::Forest(ForestSpec::single_cart()),
            ModelSpec::Forest(ForestSpec::single_cart()),
        ];
        let r = grid_search(&grid, Task::Regression, &x, &y, 3, 1).unwrap();
        assert_eq!(r.cells[0].mean_score, r.cells[1].mean_score);
        assert_eq!(r.best_index, 0);
    }
}
