//! Subprocess adapter that turns any netlist-driven simulator into an
//! [`Evaluate`] implementation.
//!
//! Per call, the adapter renders the netlist template (substituting
//! `{{variable}}` placeholders with decision-variable values), runs the
//! configured command in a fresh temporary directory, and parses the metric
//! file the simulator leaves behind. The wire format is plain text, one
//! record per line:
//!
//! ```text
//! metric <name> [<context>] <value>
//! saturation <transistor> [<context>] <0|1>
//! ```
//!
//! Parsing is whitespace-tolerant; blank lines and `#` comments are skipped;
//! any other line is an error. Timeouts, parse failures, and non-zero exits
//! become failure-marked results (still counted as calls); only a missing
//! binary is treated as a fatal setup error.

use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SizerError};
use crate::problem::{DesignVector, EvalFailure, EvaluationResult};

use super::Evaluate;

/// Placeholder in the command template replaced by the rendered netlist path.
pub const NETLIST_PLACEHOLDER: &str = "{netlist}";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalSimConfig {
    /// Command and arguments; one argument must contain `{netlist}`.
    pub command: Vec<String>,
    /// Netlist template with `{{variable}}` placeholders.
    pub netlist_template: PathBuf,
    /// Parent directory for per-call scratch directories; the system temp
    /// directory when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workdir: Option<PathBuf>,
    /// Wall-clock budget per simulation.
    pub timeout_secs: f64,
    /// Name of the metric file the simulator writes into its working
    /// directory.
    pub metric_file: String,
}

impl ExternalSimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.command.is_empty() {
            return Err(SizerError::Config("evaluator.command: must be non-empty".into()));
        }
        if !self.command.iter().any(|a| a.contains(NETLIST_PLACEHOLDER)) {
            return Err(SizerError::Config(format!(
                "evaluator.command: no argument contains the {NETLIST_PLACEHOLDER} placeholder"
            )));
        }
        if !(self.timeout_secs > 0.0) {
            return Err(SizerError::Config(
                "evaluator.timeout_secs: must be positive".into(),
            ));
        }
        if self.metric_file.is_empty() {
            return Err(SizerError::Config("evaluator.metric_file: must be non-empty".into()));
        }
        Ok(())
    }
}

/// External-simulator evaluator bound to a problem's variable names.
pub struct ExternalEvaluator {
    cfg: ExternalSimConfig,
    variable_names: Vec<String>,
    template: String,
}

impl ExternalEvaluator {
    /// Reads and validates the template: every decision variable must have a
    /// `{{name}}` placeholder and no unknown placeholders may remain.
    pub fn new(cfg: ExternalSimConfig, variable_names: Vec<String>) -> Result<Self> {
        cfg.validate()?;
        let template = std::fs::read_to_string(&cfg.netlist_template).map_err(|e| {
            SizerError::Config(format!(
                "evaluator.netlist_template: cannot read {}: {e}",
                cfg.netlist_template.display()
            ))
        })?;
        let found = placeholders(&template);
        for name in &variable_names {
            if !found.contains(name) {
                return Err(SizerError::Config(format!(
                    "evaluator.netlist_template: missing placeholder {{{{{name}}}}}"
                )));
            }
        }
        for p in &found {
            if !variable_names.iter().any(|n| n == p) {
                return Err(SizerError::Config(format!(
                    "evaluator.netlist_template: unknown placeholder {{{{{p}}}}}"
                )));
            }
        }
        Ok(ExternalEvaluator {
            cfg,
            variable_names,
            template,
        })
    }

    fn render(&self, x: &DesignVector) -> String {
        let mut out = self.template.clone();
        for (name, value) in self.variable_names.iter().zip(x.values()) {
            out = out.replace(&format!("{{{{{name}}}}}"), &format!("{value:e}"));
        }
        out
    }

    fn run_once(&self, x: &DesignVector) -> std::result::Result<EvaluationResult, EvalFailure> {
        if x.dim() != self.variable_names.len() {
            return Err(EvalFailure::Unrealizable {
                message: format!(
                    "expected {} entries, got {}",
                    self.variable_names.len(),
                    x.dim()
                ),
            });
        }
        let scratch = match &self.cfg.workdir {
            Some(dir) => tempfile::Builder::new().prefix("eval-").tempdir_in(dir),
            None => tempfile::Builder::new().prefix("eval-").tempdir(),
        }
        .map_err(|e| EvalFailure::Spawn {
            message: format!("cannot create scratch dir: {e}"),
        })?;

        let netlist_path = scratch.path().join("netlist.sp");
        std::fs::write(&netlist_path, self.render(x)).map_err(|e| EvalFailure::Spawn {
            message: format!("cannot write netlist: {e}"),
        })?;

        let netlist_str = netlist_path.to_string_lossy();
        let args: Vec<String> = self.cfg.command[1..]
            .iter()
            .map(|a| a.replace(NETLIST_PLACEHOLDER, &netlist_str))
            .collect();
        let program = self.cfg.command[0].replace(NETLIST_PLACEHOLDER, &netlist_str);

        let mut child = Command::new(&program)
            .args(&args)
            .current_dir(scratch.path())
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| EvalFailure::Spawn {
                message: format!("{program}: {e}"),
            })?;

        let deadline = Instant::now() + Duration::from_secs_f64(self.cfg.timeout_secs);
        let status = loop {
            match child.try_wait() {
                Ok(Some(status)) => break status,
                Ok(None) => {
                    if Instant::now() >= deadline {
                        let _ = child.kill();
                        let _ = child.wait();
                        return Err(EvalFailure::Timeout {
                            seconds: self.cfg.timeout_secs,
                        });
                    }
                    std::thread::sleep(Duration::from_millis(2));
                }
                Err(e) => {
                    return Err(EvalFailure::Spawn {
                        message: format!("wait failed: {e}"),
                    })
                }
            }
        };

        if !status.success() {
            let mut stderr = String::new();
            if let Some(mut pipe) = child.stderr.take() {
                use std::io::Read;
                let _ = pipe.read_to_string(&mut stderr);
            }
            stderr.truncate(400);
            return Err(EvalFailure::CommandFailed {
                status: status.code().unwrap_or(-1),
                message: stderr,
            });
        }

        let metric_path = scratch.path().join(&self.cfg.metric_file);
        let text = std::fs::read_to_string(&metric_path).map_err(|_| EvalFailure::MissingOutput {
            path: self.cfg.metric_file.clone(),
        })?;
        parse_metric_file(&text)
    }
}

impl Evaluate for ExternalEvaluator {
    fn evaluate_point(&self, x: &DesignVector) -> EvaluationResult {
        match self.run_once(x) {
            Ok(r) => r,
            Err(failure) => EvaluationResult::failed(failure),
        }
    }
}

fn placeholders(template: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(start) = rest.find("{{") {
        rest = &rest[start + 2..];
        if let Some(end) = rest.find("}}") {
            let name = rest[..end].trim().to_string();
            if !name.is_empty() && !out.contains(&name) {
                out.push(name);
            }
            rest = &rest[end + 2..];
        } else {
            break;
        }
    }
    out
}

/// Parse the metric-file wire format into an evaluation result.
pub fn parse_metric_file(text: &str) -> std::result::Result<EvaluationResult, EvalFailure> {
    let mut r = EvaluationResult::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let malformed = |msg: &str| EvalFailure::MalformedOutput {
            message: format!("line {}: {msg}: {raw:?}", lineno + 1),
        };
        match tokens[0] {
            "metric" => {
                let (name, ctx, value) = match tokens.len() {
                    3 => (tokens[1], None, tokens[2]),
                    4 => (tokens[1], Some(tokens[2]), tokens[3]),
                    _ => return Err(malformed("expected 'metric <name> [<context>] <value>'")),
                };
                let value: f64 = value
                    .parse()
                    .map_err(|_| malformed("unparsable metric value"))?;
                r.set_metric(name, ctx, value);
            }
            "saturation" => {
                let (name, ctx, flag) = match tokens.len() {
                    3 => (tokens[1], None, tokens[2]),
                    4 => (tokens[1], Some(tokens[2]), tokens[3]),
                    _ => {
                        return Err(malformed(
                            "expected 'saturation <transistor> [<context>] <0|1>'",
                        ))
                    }
                };
                let sat = match flag {
                    "0" => false,
                    "1" => true,
                    _ => return Err(malformed("saturation flag must be 0 or 1")),
                };
                r.set_saturation(name, ctx, sat);
            }
            _ => return Err(malformed("unknown record type")),
        }
    }
    Ok(r)
}
