//! Offline surrogate models: from-scratch MLP classifiers/regressors and a
//! random-forest regressor, their evaluation metrics, cross-validated grid
//! search, and a persistable bundle keyed by saturation flag and constraint
//! metric.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SizerError};
use crate::problem::{DesignVector, MetricId, SatId};
use crate::sampling::Dataset;
use crate::util::Matrix;

pub mod forest;
pub mod grid;
pub mod metrics;
pub mod mlp;

pub use forest::{fit_rf, ForestModel, ForestSpec};
pub use grid::{grid_search, GridSearchResult, Model, ModelSpec, Task};
pub use metrics::{accuracy, mae, r2};
pub use mlp::{fit_mlp, LearnConfig, MlpModel, MlpSpec, OutputActivation};

/// Per-feature standardisation fitted on training rows. Constant features
/// get unit scale so transforms stay finite; their indices are recorded so
/// callers can surface a warning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub constant_features: Vec<usize>,
}

impl Scaler {
    pub fn fit(x: &Matrix) -> Result<Scaler> {
        if x.rows() == 0 {
            return Err(SizerError::InvalidArgument("scaler: empty matrix".into()));
        }
        let n = x.rows() as f64;
        let d = x.cols();
        let mut mean = vec![0.0; d];
        for row in x.iter_rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= n;
        }
        let mut var = vec![0.0; d];
        for row in x.iter_rows() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let mut constant_features = Vec::new();
        let std: Vec<f64> = var
            .iter()
            .enumerate()
            .map(|(j, s)| {
                let sd = (s / n).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    constant_features.push(j);
                    1.0
                }
            })
            .collect();
        Ok(Scaler {
            mean,
            std,
            constant_features,
        })
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn transform(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::with_cols(x.cols());
        for row in x.iter_rows() {
            out.push_row(&self.transform_row(row));
        }
        out
    }

    pub fn inverse_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| v * s + m)
            .collect()
    }
}

/// Target-space transform for regression metrics whose range spans decades.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetTransform {
    None,
    /// Train on log10(y); requires strictly positive targets.
    Log10,
}

impl TargetTransform {
    pub fn forward(self, y: f64) -> f64 {
        match self {
            TargetTransform::None => y,
            TargetTransform::Log10 => y.log10(),
        }
    }

    pub fn inverse(self, y: f64) -> f64 {
        match self {
            TargetTransform::None => y,
            TargetTransform::Log10 => 10f64.powf(y),
        }
    }
}

/// A trained constraint regressor plus the target-space it was trained in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressorEntry {
    pub model: Model,
    pub transform: TargetTransform,
}

impl RegressorEntry {
    /// Predict in raw target units for one already-scaled feature row.
    pub fn predict_row(&self, scaled_row: &[f64]) -> Result<f64> {
        let x = Matrix::from_rows(&[scaled_row.to_vec()])?;
        let y = self.model.predict(&x)?;
        Ok(self.transform.inverse(y[0]))
    }
}

/// Per-model quality entry of the bundle's metrics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    /// What the model predicts: `sat:<id>` or `metric:<id>`.
    pub target: String,
    pub model: String,
    pub train_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mae: Option<f64>,
}

/// Where the bundle came from: enough to reproduce it and to detect reuse
/// against a different database.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub problem: String,
    pub dataset_fingerprint: u64,
    pub dataset_rows: usize,
    pub seed: u64,
    pub reports: Vec<ModelReport>,
}

/// Trained MLP saturation classifiers and MLP/RF constraint regressors,
/// plus the feature scaler they expect. Saved once, reused across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateBundle {
    pub scaler: Scaler,
    pub classifiers: BTreeMap<SatId, MlpModel>,
    pub regressors: BTreeMap<MetricId, RegressorEntry>,
    pub provenance: Provenance,
}

impl SurrogateBundle {
    /// True when every classifier predicts saturation (probability >= 0.5)
    /// for the raw design vector.
    pub fn predicts_all_saturated(&self, x: &DesignVector) -> bool {
        let row = self.scaler.transform_row(x.values());
        self.classifiers
            .values()
            .all(|m| m.forward(&row) >= 0.5)
    }

    /// Raw-unit prediction of one gated constraint metric, if the bundle has
    /// a regressor for it.
    pub fn predict_metric(&self, x: &DesignVector, id: &MetricId) -> Option<f64> {
        let entry = self.regressors.get(id)?;
        let row = self.scaler.transform_row(x.values());
        entry.predict_row(&row).ok()
    }

    /// Warn when the bundle was trained on a different database than the
    /// one supplied.
    pub fn check_provenance(&self, dataset: &Dataset) -> Option<String> {
        let fp = dataset.fingerprint();
        if fp != self.provenance.dataset_fingerprint {
            Some(format!(
                "bundle was trained on dataset {:#x}, supplied dataset is {:#x}",
                self.provenance.dataset_fingerprint, fp
            ))
        } else {
            None
        }
    }

    /// Persist as a directory: a manifest plus one weight file per model.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut manifest = BundleManifest {
            scaler: self.scaler.clone(),
            provenance: self.provenance.clone(),
            classifier_files: BTreeMap::new(),
            regressor_files: BTreeMap::new(),
        };
        for (id, model) in &self.classifiers {
            let file = format!("sat_{}.json", sanitize(&id.to_string()));
            std::fs::write(dir.join(&file), serde_json::to_string(model)?)?;
            manifest.classifier_files.insert(id.clone(), file);
        }
        for (id, entry) in &self.regressors {
            let file = format!("reg_{}.json", sanitize(&id.to_string()));
            std::fs::write(dir.join(&file), serde_json::to_string(entry)?)?;
            manifest.regressor_files.insert(id.clone(), file);
        }
        std::fs::write(
            dir.join("manifest.json"),
            serde_json::to_string_pretty(&manifest)?,
        )?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<SurrogateBundle> {
        let manifest: BundleManifest =
            serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json"))?)?;
        let mut classifiers = BTreeMap::new();
        for (id, file) in &manifest.classifier_files {
            let model: MlpModel = serde_json::from_str(&std::fs::read_to_string(dir.join(file))?)?;
            classifiers.insert(id.clone(), model);
        }
        let mut regressors = BTreeMap::new();
        for (id, file) in &manifest.regressor_files {
            let entry: RegressorEntry =
                serde_json::from_str(&std::fs::read_to_string(dir.join(file))?)?;
            regressors.insert(id.clone(), entry);
        }
        Ok(SurrogateBundle {
            scaler: manifest.scaler,
            classifiers,
            regressors,
            provenance: manifest.provenance,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct BundleManifest {
    scaler: Scaler,
    provenance: Provenance,
    classifier_files: BTreeMap<SatId, String>,
    regressor_files: BTreeMap<MetricId, String>,
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}
