//! Experiment harness: run configuration, the multi-run comparison
//! protocol, surrogate training, and report generation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SizerError};
use crate::evaluator::{
    analytic_model_for, counted, Counted, Evaluate, Evaluator, ExternalEvaluator,
    ExternalSimConfig,
};
use crate::optimizer::{run, GaConfig, GateMode, RunTrace};
use crate::problem::{problem_by_name, ProblemSpec};
use crate::sampling::{build_database, split, Dataset};
use crate::surrogate::{
    accuracy, grid_search, mae, r2, LearnConfig, MlpSpec, Model, ModelReport, ModelSpec,
    Provenance, RegressorEntry, Scaler, SurrogateBundle, TargetTransform, Task,
};
use crate::util::{derive_seed, mean, median, sample_sd, Matrix};

pub mod cli;

pub use cli::cli_main;

/// Which problem an experiment runs: a built-in name or a spec file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemChoice {
    Name(String),
    File { file: PathBuf },
}

impl ProblemChoice {
    pub fn resolve(&self) -> Result<ProblemSpec> {
        let p = match self {
            ProblemChoice::Name(name) => problem_by_name(name).ok_or_else(|| {
                SizerError::Config(format!(
                    "problem: unknown name {name:?} (expected bgr, fcoa, tsmcoa, or synthetic)"
                ))
            })?,
            ProblemChoice::File { file } => {
                let text = std::fs::read_to_string(file).map_err(|e| {
                    SizerError::Config(format!("problem.file: cannot read {}: {e}", file.display()))
                })?;
                serde_json::from_str(&text)
                    .map_err(|e| SizerError::Config(format!("problem.file: {e}")))?
            }
        };
        p.validate()?;
        Ok(p)
    }
}

/// Which evaluator backs the runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvaluatorChoice {
    /// Built-in analytic model of the problem.
    Analytic,
    /// External simulator subprocess.
    External(ExternalSimConfig),
}

impl EvaluatorChoice {
    fn build(&self, problem: &ProblemSpec) -> Result<Counted<Box<dyn Evaluate>>> {
        let model: Box<dyn Evaluate> = match self {
            EvaluatorChoice::Analytic => analytic_model_for(&problem.name).ok_or_else(|| {
                SizerError::Config(format!(
                    "evaluator: problem {:?} has no built-in analytic model; use an external evaluator",
                    problem.name
                ))
            })?,
            EvaluatorChoice::External(cfg) => Box::new(ExternalEvaluator::new(
                cfg.clone(),
                problem.variable_names().iter().map(|s| s.to_string()).collect(),
            )?),
        };
        Ok(counted(model))
    }
}

/// Surrogate-training settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainSettings {
    pub train_fraction: f64,
    pub k_folds: usize,
    /// Row cap for the cross-validation phase (the final fit always uses the
    /// full training split); 0 disables the cap.
    pub cv_rows: usize,
    /// Hidden-layer shapes tried for each saturation classifier.
    pub classifier_grid: Vec<Vec<usize>>,
    /// Hidden-layer shapes tried for each constraint regressor.
    pub regressor_mlp_grid: Vec<Vec<usize>>,
    /// Estimator counts tried for each constraint regressor.
    pub regressor_forest_grid: Vec<usize>,
    pub learning: LearnConfig,
    /// Metric names whose regression targets are trained on log10; applied
    /// only when every observed target is positive.
    pub log_metrics: Vec<String>,
}

impl Default for TrainSettings {
    fn default() -> Self {
        TrainSettings {
            train_fraction: 0.8,
            k_folds: 3,
            cv_rows: 3000,
            classifier_grid: vec![vec![32, 16]],
            regressor_mlp_grid: vec![vec![48, 24]],
            regressor_forest_grid: vec![60],
            learning: LearnConfig::default(),
            log_metrics: vec![
                "sn".into(),
                "ugb".into(),
                "f3db".into(),
                "sr".into(),
                "power".into(),
            ],
        }
    }
}

/// Full description of one comparison experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: ProblemChoice,
    pub evaluator: EvaluatorChoice,
    /// Gate modes to compare, in presentation order.
    pub modes: Vec<GateMode>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    /// GA settings; `mode` and `seed` are overridden per run.
    #[serde(default)]
    pub ga: GaConfig,
    /// Training-database size for the ML-gated modes.
    #[serde(default = "default_database_size")]
    pub database_size: usize,
    /// Where the trained bundle lives (loaded if present).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundle_path: Option<PathBuf>,
    #[serde(default = "default_true")]
    pub train_if_missing: bool,
    #[serde(default)]
    pub train: TrainSettings,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub master_seed: u64,
    /// Run the independent repetitions of each mode in parallel.
    #[serde(default)]
    pub parallel_runs: bool,
}

fn default_runs() -> usize {
    20
}

fn default_database_size() -> usize {
    20_000
}

fn default_true() -> bool {
    true
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs < 1 {
            return Err(SizerError::Config("runs: must be >= 1".into()));
        }
        if self.modes.is_empty() {
            return Err(SizerError::Config("modes: must be non-empty".into()));
        }
        self.ga.validate()?;
        if self.modes.iter().any(|m| m.uses_ml())
            && self.database_size == 0
            && self.bundle_path.is_none()
        {
            return Err(SizerError::Config(
                "database_size: ML-gated modes need a training database or a bundle_path".into(),
            ));
        }
        if !(self.train.train_fraction > 0.0 && self.train.train_fraction < 1.0) {
            return Err(SizerError::Config(
                "train.train_fraction: must be in (0, 1)".into(),
            ));
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SizerError::Config(format!("config: cannot read {}: {e}", path.display())))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| SizerError::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Per-mode aggregate over the runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub mode: GateMode,
    pub best: f64,
    pub worst: f64,
    pub mean: f64,
    pub sd: f64,
    pub mean_calls: f64,
    pub median_calls: f64,
    /// (mean_calls(SGA) - mean_calls(this)) / mean_calls(SGA), when the
    /// experiment includes the SGA baseline.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub call_reduction_vs_sga: Option<f64>,
}

/// The experiment's aggregate table (one row per mode).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub problem: String,
    pub master_seed: u64,
    pub runs: usize,
    pub modes: Vec<ModeSummary>,
    /// Evaluator calls spent building the training database, reported
    /// separately from the per-run optimisation calls.
    pub training_calls: u64,
    pub bundle_reused: bool,
}

impl SummaryTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "mode,best,worst,mean,sd,mean_calls,median_calls,call_reduction_vs_sga\n",
        );
        for m in &self.modes {
            out.push_str(&format!(
                "{},{:e},{:e},{:e},{:e},{},{},{}\n",
                m.mode.name(),
                m.best,
                m.worst,
                m.mean,
                m.sd,
                m.mean_calls,
                m.median_calls,
                m.call_reduction_vs_sga
                    .map_or(String::new(), |v| format!("{v:.4}")),
            ));
        }
        out
    }
}

fn summarize(mode: GateMode, fitness: &[f64], calls: &[f64], sga_mean_calls: Option<f64>) -> ModeSummary {
    let best = fitness.iter().cloned().fold(f64::INFINITY, f64::min);
    let worst = fitness.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    ModeSummary {
        mode,
        best,
        worst,
        mean: mean(fitness),
        sd: sample_sd(fitness),
        mean_calls: mean(calls),
        median_calls: median(calls),
        call_reduction_vs_sga: sga_mean_calls.map(|s| (s - mean(calls)) / s),
    }
}

/// Result of [`run_experiment`]: the summary plus every per-run trace
/// (traces are also written to disk under the output directory).
#[derive(Debug)]
pub struct ExperimentResult {
    pub summary: SummaryTable,
    pub traces: BTreeMap<(GateMode, usize), RunTrace>,
}

/// Execute the full comparison protocol: train or load the surrogate bundle
/// once (shared by all ML-gated modes), run `runs` seeded repetitions of
/// every mode, and write `summary.json`, `summary.csv`, and per-run trace
/// CSVs into the output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let problem = cfg.problem.resolve()?;

    let needs_ml = cfg.modes.iter().any(|m| m.uses_ml());
    let mut training_calls = 0u64;
    let mut bundle_reused = false;
    let bundle: Option<SurrogateBundle> = if needs_ml {
        let loaded = cfg
            .bundle_path
            .as_ref()
            .filter(|dir| dir.join("manifest.json").exists())
            .map(|dir| SurrogateBundle::load(dir));
        match loaded {
            Some(Ok(b)) => {
                bundle_reused = true;
                Some(b)
            }
            Some(Err(e)) => return Err(e),
            None => {
                if !cfg.train_if_missing {
                    return Err(SizerError::Config(
                        "bundle_path: bundle not found and train_if_missing is false".into(),
                    ));
                }
                let evaluator = cfg.evaluator.build(&problem)?;
                let (bundle, _) = train_models(
                    &problem,
                    &evaluator,
                    &cfg.train,
                    cfg.database_size,
                    derive_seed(cfg.master_seed, &["train"]),
                    cfg.ga.workers.max(1),
                )?;
                training_calls = evaluator.call_count();
                if let Some(dir) = &cfg.bundle_path {
                    bundle.save(dir)?;
                }
                Some(bundle)
            }
        }
    } else {
        None
    };

    let traces_dir = cfg.out_dir.join("traces");
    std::fs::create_dir_all(&traces_dir)?;

    let mut traces: BTreeMap<(GateMode, usize), RunTrace> = BTreeMap::new();
    for &mode in &cfg.modes {
        let single = |r: usize| -> Result<RunTrace> {
            let evaluator = cfg.evaluator.build(&problem)?;
            let mut ga = cfg.ga.clone();
            ga.mode = mode;
            ga.seed = derive_seed(cfg.master_seed, &[mode.name(), &r.to_string()]);
            run(
                &problem,
                &evaluator,
                &ga,
                bundle.as_ref().map(|b| b as &dyn crate::optimizer::FeasibilityPredictor),
            )
        };
        let mode_traces: Vec<RunTrace> = if cfg.parallel_runs {
            use rayon::prelude::*;
            (0..cfg.runs)
                .into_par_iter()
                .map(single)
                .collect::<Result<_>>()?
        } else {
            (0..cfg.runs).map(single).collect::<Result<_>>()?
        };
        for (r, trace) in mode_traces.into_iter().enumerate() {
            let path = traces_dir.join(format!("{}_{r}.csv", mode.name().to_lowercase()));
            std::fs::write(path, trace.to_csv())?;
            traces.insert((mode, r), trace);
        }
    }

    let sga_mean_calls = cfg.modes.contains(&GateMode::Sga).then(|| {
        mean(
            &(0..cfg.runs)
                .map(|r| traces[&(GateMode::Sga, r)].total_calls as f64)
                .collect::<Vec<_>>(),
        )
    });

    let mut modes = Vec::new();
    for &mode in &cfg.modes {
        let fitness: Vec<f64> = (0..cfg.runs)
            .map(|r| traces[&(mode, r)].best.fitness)
            .collect();
        let calls: Vec<f64> = (0..cfg.runs)
            .map(|r| traces[&(mode, r)].total_calls as f64)
            .collect();
        modes.push(summarize(mode, &fitness, &calls, sga_mean_calls));
    }

    let summary = SummaryTable {
        problem: problem.name.clone(),
        master_seed: cfg.master_seed,
        runs: cfg.runs,
        modes,
        training_calls,
        bundle_reused,
    };
    std::fs::write(
        cfg.out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    std::fs::write(cfg.out_dir.join("summary.csv"), summary.to_csv())?;

    Ok(ExperimentResult { summary, traces })
}

/// Training pipeline report: the database cost plus one row per model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub database_rows: usize,
    pub failed_rows: usize,
    pub reports: Vec<ModelReport>,
}

impl TrainReport {
    /// Plain-text metrics table (model, training time, accuracy or R²+MAE).
    pub fn render(&self) -> String {
        let mut out = format!(
            "{:<28} {:<16} {:>8} {:>10} {:>10} {:>12}\n",
            "target", "model", "time_s", "accuracy", "r2", "mae"
        );
        for r in &self.reports {
            out.push_str(&format!(
                "{:<28} {:<16} {:>8.1} {:>10} {:>10} {:>12}\n",
                r.target,
                r.model,
                r.train_seconds,
                r.accuracy.map_or(String::from("-"), |v| format!("{v:.3}")),
                r.r2.map_or(String::from("-"), |v| format!("{v:.3}")),
                r.mae.map_or(String::from("-"), |v| format!("{v:.3e}")),
            ));
        }
        out
    }
}

fn cv_cap(x: &Matrix, y: &[f64], cap: usize) -> (Matrix, Vec<f64>) {
    if cap == 0 || x.rows() <= cap {
        (x.clone(), y.to_vec())
    } else {
        let idx: Vec<usize> = (0..cap).collect();
        (x.select_rows(&idx), y[..cap].to_vec())
    }
}

/// Build the database, split it, grid-search and fit one classifier per
/// saturation flag and one regressor per constraint metric, and assemble
/// the persistable bundle with test metrics in its provenance.
pub fn train_models(
    problem: &ProblemSpec,
    evaluator: &dyn Evaluator,
    settings: &TrainSettings,
    database_size: usize,
    seed: u64,
    workers: usize,
) -> Result<(SurrogateBundle, TrainReport)> {
    let dataset = build_database(problem, evaluator, database_size, seed, workers)?;
    train_models_on(problem, &dataset, settings, seed)
}

/// As [`train_models`] but on an existing database.
pub fn train_models_on(
    problem: &ProblemSpec,
    dataset: &Dataset,
    settings: &TrainSettings,
    seed: u64,
) -> Result<(SurrogateBundle, TrainReport)> {
    if dataset.is_empty() {
        return Err(SizerError::InvalidArgument(
            "train: dataset is empty".into(),
        ));
    }
    let (train, test) = split(dataset, settings.train_fraction, derive_seed(seed, &["split"]))?;
    let scaler = Scaler::fit(&train.features)?;
    let train_scaled = scaler.transform(&train.features);
    let test_scaled = scaler.transform(&test.features);

    let mut reports = Vec::new();
    let mut classifiers = BTreeMap::new();
    for id in problem.saturation_ids() {
        let started = Instant::now();
        let (_, labels) = train.classification_view(&id)?;
        let y: Vec<f64> = labels.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        let grid: Vec<ModelSpec> = settings
            .classifier_grid
            .iter()
            .map(|hidden| {
                let mut s = MlpSpec::classifier(hidden);
                s.learning = settings.learning.clone();
                ModelSpec::Mlp(s)
            })
            .collect();
        let (cv_x, cv_y) = cv_cap(&train_scaled, &y, settings.cv_rows);
        let search = grid_search(
            &grid,
            Task::Classification,
            &cv_x,
            &cv_y,
            settings.k_folds,
            derive_seed(seed, &["cls", &id.to_string()]),
        )?;
        let best = search.best_spec().clone();
        let model = match best.fit(
            &train_scaled,
            &y,
            derive_seed(seed, &["cls_fit", &id.to_string()]),
        )? {
            Model::Mlp(m) => m,
            Model::Forest(_) => unreachable!("classifier grid is MLP-only"),
        };
        let (_, test_labels) = test.classification_view(&id)?;
        let pred: Vec<bool> = model
            .predict(&test_scaled)?
            .iter()
            .map(|&p| p >= 0.5)
            .collect();
        reports.push(ModelReport {
            target: format!("sat:{id}"),
            model: best.describe(),
            train_seconds: started.elapsed().as_secs_f64(),
            accuracy: Some(accuracy(&pred, &test_labels)),
            r2: None,
            mae: None,
        });
        classifiers.insert(id, model);
    }

    let mut regressors = BTreeMap::new();
    for id in problem.constraint_metric_ids() {
        let started = Instant::now();
        let (x_raw, y_raw) = {
            // Regression drops failed rows; features must be re-scaled with
            // the shared scaler after selection.
            let (xr, yr) = train.regression_view(&id)?;
            (scaler.transform(&xr), yr)
        };
        if x_raw.rows() == 0 {
            return Err(SizerError::InvalidArgument(format!(
                "train: no usable rows for metric {id}"
            )));
        }
        let transform = if settings.log_metrics.iter().any(|m| *m == id.name)
            && y_raw.iter().all(|&v| v > 0.0)
        {
            TargetTransform::Log10
        } else {
            TargetTransform::None
        };
        let y: Vec<f64> = y_raw.iter().map(|&v| transform.forward(v)).collect();

        let mut grid: Vec<ModelSpec> = settings
            .regressor_mlp_grid
            .iter()
            .map(|hidden| {
                let mut s = MlpSpec::regressor(hidden);
                s.learning = settings.learning.clone();
                ModelSpec::Mlp(s)
            })
            .collect();
        grid.extend(settings.regressor_forest_grid.iter().map(|&n| {
            ModelSpec::Forest(crate::surrogate::ForestSpec::with_estimators(n))
        }));
        if grid.is_empty() {
            return Err(SizerError::Config(
                "train: regressor grids are both empty".into(),
            ));
        }
        let (cv_x, cv_y) = cv_cap(&x_raw, &y, settings.cv_rows);
        let search = grid_search(
            &grid,
            Task::Regression,
            &cv_x,
            &cv_y,
            settings.k_folds,
            derive_seed(seed, &["reg", &id.to_string()]),
        )?;
        let best = search.best_spec().clone();
        let model = best.fit(&x_raw, &y, derive_seed(seed, &["reg_fit", &id.to_string()]))?;

        // Test metrics in raw units.
        let (x_test, y_test) = {
            let (xr, yr) = test.regression_view(&id)?;
            (scaler.transform(&xr), yr)
        };
        let (r2_score, mae_score) = if x_test.rows() > 0 {
            let pred: Vec<f64> = model
                .predict(&x_test)?
                .iter()
                .map(|&v| transform.inverse(v))
                .collect();
            (r2(&pred, &y_test), mae(&pred, &y_test))
        } else {
            (f64::NAN, f64::NAN)
        };
        reports.push(ModelReport {
            target: format!("metric:{id}"),
            model: best.describe(),
            train_seconds: started.elapsed().as_secs_f64(),
            accuracy: None,
            r2: Some(r2_score),
            mae: Some(mae_score),
        });
        regressors.insert(id, RegressorEntry { model, transform });
    }

    let failed_rows = dataset.failed.iter().filter(|&&f| f).count();
    let provenance = Provenance {
        problem: problem.name.clone(),
        dataset_fingerprint: dataset.fingerprint(),
        dataset_rows: dataset.len(),
        seed,
        reports: reports.clone(),
    };
    Ok((
        SurrogateBundle {
            scaler,
            classifiers,
            regressors,
            provenance,
        },
        TrainReport {
            database_rows: dataset.len(),
            failed_rows,
            reports,
        },
    ))
}

/// Align labeled (cumulative calls, best fitness) series onto one shared
/// call grid. The output CSV has a `calls` column and one column per
/// series; cells before a series' first point are empty.
pub fn align_series(series: &[(String, Vec<(u64, f64)>)]) -> Result<String> {
    if series.is_empty() {
        return Err(SizerError::InvalidArgument(
            "report: no traces given".into(),
        ));
    }
    let mut grid: Vec<u64> = series
        .iter()
        .flat_map(|(_, rows)| rows.iter().map(|(c, _)| *c))
        .collect();
    grid.sort_unstable();
    grid.dedup();

    let mut out = String::from("calls");
    for (label, _) in series {
        out.push(',');
        out.push_str(label);
    }
    out.push('\n');
    for &g in &grid {
        out.push_str(&g.to_string());
        for (_, rows) in series {
            let value = rows
                .iter()
                .take_while(|(c, _)| *c <= g)
                .last()
                .map(|(_, v)| *v);
            match value {
                Some(v) => out.push_str(&format!(",{v:e}")),
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// Convergence CSV (fitness vs cumulative evaluator calls) for a set of
/// in-memory run traces.
pub fn report_convergence(traces: &[&RunTrace]) -> Result<String> {
    let series: Vec<(String, Vec<(u64, f64)>)> = traces
        .iter()
        .map(|t| {
            let label = format!("{}_{}", t.mode.name().to_lowercase(), t.seed);
            let rows = t
                .rows
                .iter()
                .map(|r| (r.cum_calls, r.best_feasible.unwrap_or(r.best_fitness)))
                .collect();
            (label, rows)
        })
        .collect();
    align_series(&series)
}

#[cfg(test)]
mod tests;
