//! Latin hypercube design-of-experiments generation and training-database
//! construction.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SizerError};
use crate::evaluator::Evaluator;
use crate::problem::{Bounds, DesignVector, MetricId, ProblemSpec, SatId};
use crate::util::{derive_seed, fnv1a64, Matrix};

/// Latin hypercube sample: `n` rows in the box described by `bounds`, with
/// exactly one point per stratum per dimension and uniform placement within
/// each stratum. Column permutations are independent.
pub fn lhs_sample(n: usize, bounds: &Bounds, rng_seed: u64) -> Result<Matrix> {
    if n == 0 {
        return Err(SizerError::InvalidArgument(
            "lhs_sample: n must be at least 1".into(),
        ));
    }
    let d = bounds.dim();
    let mut rng = ChaCha12Rng::seed_from_u64(rng_seed);
    let mut out = Matrix::zeros(n, d);
    for j in 0..d {
        let (lo, span) = (bounds.lower()[j], bounds.span(j));
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(&mut rng);
        for (i, &s) in strata.iter().enumerate() {
            let u: f64 = rng.random();
            out.set(i, j, lo + (s as f64 + u) / n as f64 * span);
        }
    }
    Ok(out)
}

/// Training database: one row per evaluated design, with every constraint
/// metric as a regression target and every (transistor, context) saturation
/// flag as a classification label.
///
/// Failed evaluations stay in the table: their targets are NaN (regressors
/// drop those rows) and their labels are `false` (an unusable design is not
/// a saturated design).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub problem: String,
    pub seed: u64,
    pub bounds: Bounds,
    pub feature_names: Vec<String>,
    pub features: Matrix,
    pub targets: BTreeMap<MetricId, Vec<f64>>,
    pub labels: BTreeMap<SatId, Vec<bool>>,
    pub failed: Vec<bool>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Feature rows and finite target values for one metric, excluding
    /// failed rows.
    pub fn regression_view(&self, id: &MetricId) -> Result<(Matrix, Vec<f64>)> {
        let col = self.targets.get(id).ok_or_else(|| {
            SizerError::InvalidArgument(format!("dataset has no target column {id}"))
        })?;
        let idx: Vec<usize> = col
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(|(i, _)| i)
            .collect();
        let y: Vec<f64> = idx.iter().map(|&i| col[i]).collect();
        Ok((self.features.select_rows(&idx), y))
    }

    /// Feature rows and boolean labels for one saturation classifier.
    pub fn classification_view(&self, id: &SatId) -> Result<(Matrix, Vec<bool>)> {
        let col = self.labels.get(id).ok_or_else(|| {
            SizerError::InvalidArgument(format!("dataset has no label column {id}"))
        })?;
        Ok((self.features.clone(), col.clone()))
    }

    fn select(&self, idx: &[usize]) -> Dataset {
        Dataset {
            problem: self.problem.clone(),
            seed: self.seed,
            bounds: self.bounds.clone(),
            feature_names: self.feature_names.clone(),
            features: self.features.select_rows(idx),
            targets: self
                .targets
                .iter()
                .map(|(k, v)| (k.clone(), idx.iter().map(|&i| v[i]).collect()))
                .collect(),
            labels: self
                .labels
                .iter()
                .map(|(k, v)| (k.clone(), idx.iter().map(|&i| v[i]).collect()))
                .collect(),
            failed: idx.iter().map(|&i| self.failed[i]).collect(),
        }
    }

    /// Stable fingerprint of the payload, recorded in bundle provenance.
    pub fn fingerprint(&self) -> u64 {
        fnv1a64(self.to_csv().as_bytes())
    }

    /// Serialise to CSV (header row plus one row per design).
    pub fn to_csv(&self) -> String {
        let mut header: Vec<String> = self.feature_names.clone();
        header.extend(self.targets.keys().map(|k| format!("metric:{k}")));
        header.extend(self.labels.keys().map(|k| format!("sat:{k}")));
        header.push("failed".into());
        let mut out = header.join(",");
        out.push('\n');
        for i in 0..self.len() {
            let mut cells: Vec<String> =
                self.features.row(i).iter().map(|v| format!("{v:e}")).collect();
            for col in self.targets.values() {
                let v = col[i];
                cells.push(if v.is_finite() {
                    format!("{v:e}")
                } else {
                    "nan".into()
                });
            }
            for col in self.labels.values() {
                cells.push(if col[i] { "1".into() } else { "0".into() });
            }
            cells.push(if self.failed[i] { "1".into() } else { "0".into() });
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Write `<path>` as CSV plus a JSON schema sidecar next to it.
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        let sidecar = schema_path(path);
        let schema = DatasetSchema {
            problem: self.problem.clone(),
            n: self.len(),
            seed: self.seed,
            bounds: self.bounds.clone(),
            feature_columns: self.feature_names.clone(),
            metric_columns: self.targets.keys().cloned().collect(),
            label_columns: self.labels.keys().cloned().collect(),
        };
        std::fs::write(sidecar, serde_json::to_string_pretty(&schema)?)?;
        Ok(())
    }

    /// Load a dataset saved by [`Dataset::save`].
    pub fn load(path: &Path) -> Result<Dataset> {
        let schema: DatasetSchema =
            serde_json::from_str(&std::fs::read_to_string(schema_path(path))?)?;
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| SizerError::Format("empty dataset csv".into()))?
            .split(',')
            .collect();
        let d = schema.feature_columns.len();
        let expected_cols = d + schema.metric_columns.len() + schema.label_columns.len() + 1;
        if header.len() != expected_cols {
            return Err(SizerError::Format(format!(
                "dataset csv has {} columns, schema expects {expected_cols}",
                header.len()
            )));
        }

        let mut features = Matrix::with_cols(d);
        let mut targets: BTreeMap<MetricId, Vec<f64>> = schema
            .metric_columns
            .iter()
            .map(|k| (k.clone(), Vec::new()))
            .collect();
        let mut labels: BTreeMap<SatId, Vec<bool>> = schema
            .label_columns
            .iter()
            .map(|k| (k.clone(), Vec::new()))
            .collect();
        let mut failed = Vec::new();

        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != expected_cols {
                return Err(SizerError::Format(format!(
                    "dataset csv row {} has {} cells, expected {expected_cols}",
                    lineno + 2,
                    cells.len()
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                if s == "nan" {
                    Ok(f64::NAN)
                } else {
                    s.parse::<f64>()
                        .map_err(|_| SizerError::Format(format!("bad number {s:?}")))
                }
            };
            let row: Vec<f64> = cells[..d].iter().map(|s| parse(s)).collect::<Result<_>>()?;
            features.push_row(&row);
            for (k, cell) in schema.metric_columns.iter().zip(&cells[d..]) {
                targets.get_mut(k).unwrap().push(parse(cell)?);
            }
            let off = d + schema.metric_columns.len();
            for (k, cell) in schema.label_columns.iter().zip(&cells[off..]) {
                labels.get_mut(k).unwrap().push(*cell == "1");
            }
            failed.push(*cells.last().unwrap() == "1");
        }

        Ok(Dataset {
            problem: schema.problem,
            seed: schema.seed,
            bounds: schema.bounds,
            feature_names: schema.feature_columns,
            features,
            targets,
            labels,
            failed,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct DatasetSchema {
    problem: String,
    n: usize,
    seed: u64,
    bounds: Bounds,
    feature_columns: Vec<String>,
    metric_columns: Vec<MetricId>,
    label_columns: Vec<SatId>,
}

fn schema_path(csv: &Path) -> std::path::PathBuf {
    csv.with_extension("schema.json")
}

/// Evaluate `n` Latin hypercube points (in parallel up to `workers`) and
/// assemble the training database. Row `i` holds exactly the `i`-th LHS
/// point regardless of worker count.
pub fn build_database(
    problem: &ProblemSpec,
    evaluator: &dyn Evaluator,
    n: usize,
    rng_seed: u64,
    workers: usize,
) -> Result<Dataset> {
    let metric_ids = {
        let mut ids = problem.constraint_metric_ids();
        for id in problem.objective_metric_ids() {
            if !ids.contains(&id) {
                ids.push(id);
            }
        }
        ids
    };
    let sat_ids = problem.saturation_ids();

    let mut targets: BTreeMap<MetricId, Vec<f64>> = metric_ids
        .iter()
        .map(|k| (k.clone(), Vec::with_capacity(n)))
        .collect();
    let mut labels: BTreeMap<SatId, Vec<bool>> = sat_ids
        .iter()
        .map(|k| (k.clone(), Vec::with_capacity(n)))
        .collect();
    let mut failed = Vec::with_capacity(n);

    let features = if n == 0 {
        Matrix::with_cols(problem.dim())
    } else {
        lhs_sample(n, &problem.bounds, derive_seed(rng_seed, &["lhs"]))?
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SizerError::Io(format!("thread pool: {e}")))?;
    let results: Vec<crate::problem::EvaluationResult> = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let x = DesignVector::new(features.row(i).to_vec()).expect("finite LHS point");
                evaluator.evaluate(&x)
            })
            .collect()
    });

    for (i, r) in results.iter().enumerate() {
        if let Some(f) = &r.failure {
            if f.is_fatal() {
                return Err(SizerError::Evaluation {
                    index: i,
                    message: f.to_string(),
                });
            }
            for col in targets.values_mut() {
                col.push(f64::NAN);
            }
            for col in labels.values_mut() {
                col.push(false);
            }
            failed.push(true);
            continue;
        }
        for (id, col) in targets.iter_mut() {
            match r.metrics.get(id) {
                Some(v) => col.push(*v),
                None => {
                    return Err(SizerError::Evaluation {
                        index: i,
                        message: format!("evaluator did not produce metric {id}"),
                    })
                }
            }
        }
        for (id, col) in labels.iter_mut() {
            match r.saturation.get(id) {
                Some(v) => col.push(*v),
                None => {
                    return Err(SizerError::Evaluation {
                        index: i,
                        message: format!("evaluator did not produce saturation flag {id}"),
                    })
                }
            }
        }
        failed.push(false);
    }

    Ok(Dataset {
        problem: problem.name.clone(),
        seed: rng_seed,
        bounds: problem.bounds.clone(),
        feature_names: problem.variable_names().iter().map(|s| s.to_string()).collect(),
        features,
        targets,
        labels,
        failed,
    })
}

/// Disjoint train/test row partition of sizes ⌊n·f⌋ and n−⌊n·f⌋, uniformly
/// shuffled; identical for identical seeds.
pub fn split(dset: &Dataset, train_fraction: f64, rng_seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(SizerError::InvalidArgument(format!(
            "split: train_fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let n = dset.len();
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(rng_seed);
    idx.shuffle(&mut rng);
    let n_train = (n as f64 * train_fraction).floor() as usize;
    Ok((dset.select(&idx[..n_train]), dset.select(&idx[n_train..])))
}
