use super::*;
use crate::evaluator::SyntheticEvaluator;
use crate::problem::synthetic_problem;

fn synthetic_config(out: &Path, modes: Vec<GateMode>, runs: usize) -> ExperimentConfig {
    ExperimentConfig {
        problem: ProblemChoice::Name("synthetic".into()),
        evaluator: EvaluatorChoice::Analytic,
        modes,
        runs,
        ga: GaConfig {
            population: 10,
            gen_max: 15,
            ..Default::default()
        },
        database_size: 200,
        bundle_path: None,
        train_if_missing: true,
        train: TrainSettings {
            k_folds: 2,
            learning: LearnConfig {
                max_epochs: 40,
                ..Default::default()
            },
            ..Default::default()
        },
        out_dir: out.to_path_buf(),
        master_seed: 5,
        parallel_runs: false,
    }
}

#[test]
fn single_run_summary_degenerates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = synthetic_config(dir.path(), vec![GateMode::Mga], 1);
    let result = run_experiment(&cfg).unwrap();
    let m = &result.summary.modes[0];
    assert_eq!(m.best, m.worst);
    assert_eq!(m.best, m.mean);
    assert_eq!(m.sd, 0.0);
    assert_eq!(m.mean_calls, m.median_calls);
}

#[test]
fn two_mode_experiment_produces_table_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = synthetic_config(dir.path(), vec![GateMode::Sga, GateMode::Mga], 3);
    let result = run_experiment(&cfg).unwrap();
    assert_eq!(result.summary.modes.len(), 2);
    for m in &result.summary.modes {
        assert!(m.best <= m.mean && m.mean <= m.worst);
        assert!(m.sd >= 0.0);
        assert!(m.mean_calls > 0.0);
    }
    // Reduction column is the SGA-relative call saving.
    let sga = &result.summary.modes[0];
    let mga = &result.summary.modes[1];
    assert_eq!(sga.call_reduction_vs_sga, Some(0.0));
    let expected = (sga.mean_calls - mga.mean_calls) / sga.mean_calls;
    assert_eq!(mga.call_reduction_vs_sga, Some(expected));

    assert!(dir.path().join("summary.json").exists());
    assert!(dir.path().join("summary.csv").exists());
    for r in 0..3 {
        assert!(dir.path().join(format!("traces/sga_{r}.csv")).exists());
        assert!(dir.path().join(format!("traces/mga_{r}.csv")).exists());
    }
}

#[test]
fn summary_json_is_byte_identical_across_repeats() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let cfg_a = synthetic_config(dir_a.path(), vec![GateMode::Mga, GateMode::MgaMlscp], 2);
    let mut cfg_b = cfg_a.clone();
    cfg_b.out_dir = dir_b.path().to_path_buf();
    run_experiment(&cfg_a).unwrap();
    run_experiment(&cfg_b).unwrap();
    let a = std::fs::read(dir_a.path().join("summary.json")).unwrap();
    let b = std::fs::read(dir_b.path().join("summary.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn tiny_training_run_persists_a_loadable_bundle() {
    let p = synthetic_problem();
    let e = counted_synthetic();
    let settings = TrainSettings {
        k_folds: 2,
        learning: LearnConfig {
            max_epochs: 30,
            ..Default::default()
        },
        ..Default::default()
    };
    let (bundle, report) = train_models(&p, &e, &settings, 200, 9, 2).unwrap();
    assert_eq!(report.database_rows, 200);
    assert_eq!(e.call_count(), 200);
    // One regressor for the single gated constraint, no classifiers.
    assert_eq!(bundle.regressors.len(), 1);
    assert!(bundle.classifiers.is_empty());

    let dir = tempfile::tempdir().unwrap();
    bundle.save(dir.path()).unwrap();
    let loaded = SurrogateBundle::load(dir.path()).unwrap();
    assert_eq!(bundle, loaded);
}

fn counted_synthetic() -> crate::evaluator::Counted<SyntheticEvaluator> {
    crate::evaluator::counted(SyntheticEvaluator)
}

#[test]
fn metrics_table_covers_every_model() {
    use crate::evaluator::TsmcoaEvaluator;
    let p = crate::problem::tsmcoa_problem();
    let e = crate::evaluator::counted(TsmcoaEvaluator::default());
    let settings = TrainSettings {
        k_folds: 2,
        cv_rows: 150,
        learning: LearnConfig {
            max_epochs: 15,
            ..Default::default()
        },
        ..Default::default()
    };
    let (bundle, report) = train_models(&p, &e, &settings, 300, 3, 4).unwrap();
    // 8 transistors x 2 corners classifiers; 6 contexted metrics x 2
    // corners + power regressors.
    assert_eq!(bundle.classifiers.len(), 16);
    assert_eq!(bundle.regressors.len(), 13);
    assert_eq!(report.reports.len(), 16 + 13);
    let acc_rows = report.reports.iter().filter(|r| r.accuracy.is_some()).count();
    let reg_rows = report
        .reports
        .iter()
        .filter(|r| r.r2.is_some() && r.mae.is_some())
        .count();
    assert_eq!(acc_rows, 16);
    assert_eq!(reg_rows, 13);
    assert!(!report.render().is_empty());
}

#[test]
fn bundle_reuse_skips_training_calls() {
    let dir = tempfile::tempdir().unwrap();
    let bundle_dir = dir.path().join("bundle");
    let mut cfg = synthetic_config(&dir.path().join("a"), vec![GateMode::MgaMlscp], 1);
    cfg.bundle_path = Some(bundle_dir.clone());
    let first = run_experiment(&cfg).unwrap();
    assert!(first.summary.training_calls > 0);
    assert!(!first.summary.bundle_reused);

    let mut cfg2 = cfg.clone();
    cfg2.out_dir = dir.path().join("b");
    let second = run_experiment(&cfg2).unwrap();
    assert_eq!(second.summary.training_calls, 0);
    assert!(second.summary.bundle_reused);
}

#[test]
fn convergence_report_single_trace_passthrough() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = synthetic_config(dir.path(), vec![GateMode::Mga], 1);
    let result = run_experiment(&cfg).unwrap();
    let trace = &result.traces[&(GateMode::Mga, 0)];
    let csv = report_convergence(&[trace]).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    // Call counts are strictly informative: one grid row per distinct count.
    let distinct: std::collections::BTreeSet<u64> =
        trace.rows.iter().map(|r| r.cum_calls).collect();
    assert_eq!(lines.len(), 1 + distinct.len());
    assert!(lines[0].starts_with("calls,"));
}

#[test]
fn convergence_report_aligns_different_lengths() {
    let series = vec![
        ("a".to_string(), vec![(10u64, 5.0), (30, 3.0)]),
        ("b".to_string(), vec![(20u64, 4.0), (25, 2.0), (40, 1.0)]),
    ];
    let csv = align_series(&series).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "calls,a,b");
    assert_eq!(lines.len(), 1 + 5);
    // Before b's first point its cell is empty.
    assert!(lines[1].starts_with("10,"));
    assert!(lines[1].ends_with(','));
    // Carry-forward: at 30, a = 3.0 and b = 2.0.
    let at30: Vec<&str> = lines[4].split(',').collect();
    assert_eq!(at30[0], "30");
    assert_eq!(at30[1], "3e0");
    assert_eq!(at30[2], "2e0");
}

#[test]
fn convergence_report_rejects_empty_input() {
    assert!(align_series(&[]).is_err());
    assert!(report_convergence(&[]).is_err());
}

#[test]
fn config_validation_reports_field_paths() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = synthetic_config(dir.path(), vec![], 1);
    let err = cfg.validate().unwrap_err();
    assert!(err.to_string().contains("modes"), "{err}");
    cfg.modes = vec![GateMode::Mga];
    cfg.runs = 0;
    let err = cfg.validate().unwrap_err();
    assert!(err.to_string().contains("runs"), "{err}");
}

#[test]
fn experiment_config_json_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = synthetic_config(
        dir.path(),
        vec![GateMode::Sga, GateMode::MgaMlsp, GateMode::MgaMlscp],
        2,
    );
    let text = serde_json::to_string_pretty(&cfg).unwrap();
    let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(cfg, back);
    // Mode names use the published spelling.
    assert!(text.contains("\"MGA_MLSCP\""));
}
