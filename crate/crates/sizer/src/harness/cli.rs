//! Command-line interface: `sample`, `train`, `optimize`, `compare`,
//! `report`.
//!
//! Exit codes: 0 on success, 1 on configuration or argument validation
//! errors, 2 on runtime failures.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{Result, SizerError};
use crate::evaluator::Evaluator;
use crate::optimizer::{run, GateMode};
use crate::sampling::build_database;
use crate::surrogate::SurrogateBundle;
use crate::util::derive_seed;

use super::{
    align_series, run_experiment, train_models, ExperimentConfig, ModeSummary, ProblemChoice,
};

#[derive(Parser)]
#[command(
    name = "sizer",
    about = "Surrogate-gated genetic algorithm for constrained analog circuit sizing",
    version
)]
struct Cli {
    /// Experiment configuration file (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configuration's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the configuration's worker count.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Override the configuration's output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the Latin hypercube training database as CSV (+ schema).
    Sample {
        /// Built-in problem name; defaults to the configuration's problem.
        #[arg(long)]
        problem: Option<String>,
        /// Number of design points; defaults to the configuration's
        /// database_size.
        #[arg(long)]
        n: Option<usize>,
        /// Output CSV path.
        #[arg(long, default_value = "dataset.csv")]
        file: PathBuf,
    },
    /// Train the surrogate bundle and print its metrics table.
    Train {
        /// Also save the generated database next to the bundle.
        #[arg(long)]
        save_dataset: bool,
    },
    /// One optimisation run of a single gate mode.
    Optimize {
        /// SGA, MGA, MGA_MLSP, or MGA_MLSCP.
        #[arg(long)]
        mode: String,
        /// Repetition index (selects the derived seed).
        #[arg(long, default_value_t = 0)]
        run_index: usize,
    },
    /// The full multi-mode comparison protocol.
    Compare,
    /// Merge run-trace CSVs into one convergence CSV on a shared call grid.
    Report {
        /// Output CSV path.
        #[arg(long, default_value = "convergence.csv")]
        file: PathBuf,
        /// Trace CSV files produced by `optimize` or `compare`.
        traces: Vec<PathBuf>,
    },
}

/// Entry point used by both the binary and the tests.
pub fn cli_main<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e @ (SizerError::Config(_) | SizerError::InvalidArgument(_))) => {
            eprintln!("error: {e}");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli.config.as_ref().ok_or_else(|| {
        SizerError::Config("config: --config PATH is required for this command".into())
    })?;
    let mut cfg = ExperimentConfig::from_file(path)?;
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(workers) = cli.workers {
        cfg.ga.workers = workers;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Sample { problem, n, file } => {
            let cfg = load_config(&cli)?;
            let p = match problem {
                Some(name) => ProblemChoice::Name(name.clone()).resolve()?,
                None => cfg.problem.resolve()?,
            };
            let n = n.unwrap_or(cfg.database_size);
            let evaluator = cfg.evaluator.build(&p)?;
            let dataset = build_database(
                &p,
                &evaluator,
                n,
                derive_seed(cfg.master_seed, &["train"]),
                cfg.ga.workers.max(1),
            )?;
            dataset.save(file)?;
            println!(
                "wrote {} rows ({} evaluator calls) to {}",
                dataset.len(),
                evaluator.call_count(),
                file.display()
            );
            Ok(())
        }
        Command::Train { save_dataset } => {
            let cfg = load_config(&cli)?;
            let p = cfg.problem.resolve()?;
            let evaluator = cfg.evaluator.build(&p)?;
            let seed = derive_seed(cfg.master_seed, &["train"]);
            let dataset = build_database(
                &p,
                &evaluator,
                cfg.database_size,
                seed,
                cfg.ga.workers.max(1),
            )?;
            let (bundle, report) = super::train_models_on(&p, &dataset, &cfg.train, seed)?;
            for j in &bundle.scaler.constant_features {
                eprintln!("warning: feature {j} is constant in the training data");
            }
            let dir = cfg
                .bundle_path
                .clone()
                .unwrap_or_else(|| cfg.out_dir.join("bundle"));
            bundle.save(&dir)?;
            if *save_dataset {
                std::fs::create_dir_all(&cfg.out_dir)?;
                dataset.save(&cfg.out_dir.join("dataset.csv"))?;
            }
            println!(
                "database: {} rows ({} failed), {} evaluator calls",
                report.database_rows,
                report.failed_rows,
                evaluator.call_count()
            );
            print!("{}", report.render());
            println!("bundle saved to {}", dir.display());
            Ok(())
        }
        Command::Optimize { mode, run_index } => {
            let cfg = load_config(&cli)?;
            let mode = GateMode::parse(mode).ok_or_else(|| {
                SizerError::InvalidArgument(format!(
                    "mode: {mode:?} is not one of SGA, MGA, MGA_MLSP, MGA_MLSCP"
                ))
            })?;
            let p = cfg.problem.resolve()?;
            let bundle = if mode.uses_ml() {
                Some(obtain_bundle(&cfg)?)
            } else {
                None
            };
            let evaluator = cfg.evaluator.build(&p)?;
            let mut ga = cfg.ga.clone();
            ga.mode = mode;
            ga.seed = derive_seed(cfg.master_seed, &[mode.name(), &run_index.to_string()]);
            let trace = run(
                &p,
                &evaluator,
                &ga,
                bundle
                    .as_ref()
                    .map(|b| b as &dyn crate::optimizer::FeasibilityPredictor),
            )?;
            std::fs::create_dir_all(&cfg.out_dir)?;
            let path = cfg
                .out_dir
                .join(format!("{}_{run_index}.csv", mode.name().to_lowercase()));
            std::fs::write(&path, trace.to_csv())?;
            println!(
                "{}: best fitness {:e} after {} evaluator calls ({} generations, {:.1}s); trace: {}",
                mode.name(),
                trace.best.fitness,
                trace.total_calls,
                trace.rows.len() - 1,
                trace.wall_secs,
                path.display()
            );
            Ok(())
        }
        Command::Compare => {
            let cfg = load_config(&cli)?;
            let result = run_experiment(&cfg)?;
            print_summary(&result.summary.modes);
            if result.summary.training_calls > 0 {
                println!(
                    "training database: {} evaluator calls (reported separately)",
                    result.summary.training_calls
                );
            }
            if result.summary.bundle_reused {
                println!("bundle reused: zero training evaluator calls");
            }
            println!("outputs in {}", cfg.out_dir.display());
            Ok(())
        }
        Command::Report { file, traces } => {
            if traces.is_empty() {
                return Err(SizerError::InvalidArgument(
                    "report: at least one trace file is required".into(),
                ));
            }
            let mut series = Vec::new();
            for path in traces {
                series.push((trace_label(path), parse_trace_csv(path)?));
            }
            let csv = align_series(&series)?;
            std::fs::write(file, csv)?;
            println!("wrote {}", file.display());
            Ok(())
        }
    }
}

fn obtain_bundle(cfg: &ExperimentConfig) -> Result<SurrogateBundle> {
    if let Some(dir) = &cfg.bundle_path {
        if dir.join("manifest.json").exists() {
            return SurrogateBundle::load(dir);
        }
    }
    if !cfg.train_if_missing {
        return Err(SizerError::Config(
            "bundle_path: bundle not found and train_if_missing is false".into(),
        ));
    }
    let p = cfg.problem.resolve()?;
    let evaluator = cfg.evaluator.build(&p)?;
    let (bundle, _) = train_models(
        &p,
        &evaluator,
        &cfg.train,
        cfg.database_size,
        derive_seed(cfg.master_seed, &["train"]),
        cfg.ga.workers.max(1),
    )?;
    if let Some(dir) = &cfg.bundle_path {
        bundle.save(dir)?;
    }
    Ok(bundle)
}

fn trace_label(path: &std::path::Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Read the (cum_calls, best_fitness) series back out of a trace CSV.
fn parse_trace_csv(path: &std::path::Path) -> Result<Vec<(u64, f64)>> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() < 4 {
            return Err(SizerError::Format(format!(
                "{}: row {} has {} columns, expected at least 4",
                path.display(),
                i + 1,
                cells.len()
            )));
        }
        let best: f64 = cells[1]
            .parse()
            .map_err(|_| SizerError::Format(format!("{}: bad best_fitness {:?}", path.display(), cells[1])))?;
        let calls: u64 = cells[3]
            .parse()
            .map_err(|_| SizerError::Format(format!("{}: bad cum_calls {:?}", path.display(), cells[3])))?;
        rows.push((calls, best));
    }
    if rows.is_empty() {
        return Err(SizerError::Format(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    Ok(rows)
}

fn print_summary(modes: &[ModeSummary]) {
    println!(
        "{:<10} {:>12} {:>12} {:>12} {:>12} {:>12} {:>13} {:>10}",
        "mode", "best", "worst", "mean", "sd", "mean_calls", "median_calls", "vs_sga"
    );
    for m in modes {
        println!(
            "{:<10} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.1} {:>13.1} {:>10}",
            m.mode.name(),
            m.best,
            m.worst,
            m.mean,
            m.sd,
            m.mean_calls,
            m.median_calls,
            m.call_reduction_vs_sga
                .map_or(String::from("-"), |v| format!("{:.1}%", 100.0 * v)),
        );
    }
}
