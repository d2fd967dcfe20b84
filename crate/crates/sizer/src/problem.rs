//! Domain types for sizing problems: design vectors, bounds, constraint
//! specifications, evaluation results, and the objective formulas shared by
//! every optimisation mode.
//!
//! All quantities are SI internally (meters, ohms, amperes, watts, square
//! meters, volts); pretty units like µm² or MHz appear only at the reporting
//! boundary.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, SizerError};

mod builtin;
pub use builtin::{
    bgr_problem, builtin_problems, fcoa_problem, problem_by_name, synthetic_problem,
    tsmcoa_problem, BGR_CONTEXTS, TSMCOA_CONTEXTS,
};

/// Common metric names emitted by the built-in evaluators.
pub mod metric {
    pub const AREA: &str = "area";
    pub const POWER: &str = "power";
    pub const TC: &str = "tc";
    pub const PSRR: &str = "psrr";
    pub const DELTA_VREF: &str = "delta_vref";
    pub const VREF: &str = "vref";
    pub const NOISE: &str = "sn";
    pub const GAIN: &str = "av";
    pub const UGB: &str = "ugb";
    pub const F3DB: &str = "f3db";
    pub const PHASE_MARGIN: &str = "pm";
    pub const SLEW_RATE: &str = "sr";
}

/// A point in the D-dimensional sizing search space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignVector {
    values: Vec<f64>,
}

impl DesignVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(SizerError::InvalidArgument(
                "design vector must have at least one dimension".into(),
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(SizerError::InvalidArgument(format!(
                "design vector contains non-finite value {v}"
            )));
        }
        Ok(DesignVector { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }
}

/// Per-dimension lower/upper limits of the search space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(SizerError::InvalidArgument(
                "bounds must be non-empty and of equal length".into(),
            ));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(SizerError::InvalidArgument(format!(
                    "bounds[{i}]: require finite lower < upper, got [{l}, {u}]"
                )));
            }
        }
        Ok(Bounds { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &DesignVector) -> bool {
        x.dim() == self.dim()
            && x.values()
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *v >= *l && *v <= *u)
    }

    pub fn span(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }
}

/// Identifies a circuit metric, optionally at an evaluation corner
/// (temperature or input common-mode level).
///
/// Serialised as `name` or `name@context`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MetricId {
    pub name: String,
    pub context: Option<String>,
}

impl MetricId {
    pub fn plain(name: &str) -> Self {
        MetricId {
            name: name.to_string(),
            context: None,
        }
    }

    pub fn at(name: &str, context: &str) -> Self {
        MetricId {
            name: name.to_string(),
            context: Some(context.to_string()),
        }
    }

    pub fn with_context(name: &str, context: Option<&str>) -> Self {
        MetricId {
            name: name.to_string(),
            context: context.map(str::to_string),
        }
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.context {
            Some(c) => write!(f, "{}@{}", self.name, c),
            None => write!(f, "{}", self.name),
        }
    }
}

/// Identifies one transistor at one evaluation corner, the unit of a
/// saturation flag. Serialised as `transistor` or `transistor@context`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SatId {
    pub name: String,
    pub context: Option<String>,
}

impl SatId {
    pub fn with_context(transistor: &str, context: Option<&str>) -> Self {
        SatId {
            name: transistor.to_string(),
            context: context.map(str::to_string),
        }
    }
}

impl fmt::Display for SatId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.context {
            Some(c) => write!(f, "{}@{}", self.name, c),
            None => write!(f, "{}", self.name),
        }
    }
}

macro_rules! id_string_serde {
    ($ty:ident) => {
        impl FromStr for $ty {
            type Err = SizerError;
            fn from_str(s: &str) -> Result<Self> {
                if s.is_empty() {
                    return Err(SizerError::Format("empty identifier".into()));
                }
                match s.split_once('@') {
                    Some((n, c)) => Ok($ty {
                        name: n.to_string(),
                        context: Some(c.to_string()),
                    }),
                    None => Ok($ty {
                        name: s.to_string(),
                        context: None,
                    }),
                }
            }
        }

        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.serialize_str(&self.to_string())
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(de::Error::custom)
            }
        }
    };
}

id_string_serde!(MetricId);
id_string_serde!(SatId);

/// Direction of a specification inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparator {
    /// Metric must be greater than or equal to the threshold.
    Ge,
    /// Metric must be less than or equal to the threshold.
    Le,
}

impl Comparator {
    /// Inclusive comparison: equality passes in both directions.
    pub fn satisfied(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparator::Ge => value >= threshold,
            Comparator::Le => value <= threshold,
        }
    }
}

/// One circuit-specification constraint, e.g. `av >= 40 dB` at a corner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub metric: String,
    pub comparator: Comparator,
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
}

impl ConstraintSpec {
    pub fn new(metric: &str, comparator: Comparator, threshold: f64) -> Self {
        ConstraintSpec {
            metric: metric.to_string(),
            comparator,
            threshold,
            context: None,
        }
    }

    pub fn at(metric: &str, comparator: Comparator, threshold: f64, context: &str) -> Self {
        ConstraintSpec {
            context: Some(context.to_string()),
            ..ConstraintSpec::new(metric, comparator, threshold)
        }
    }

    pub fn metric_id(&self) -> MetricId {
        MetricId::with_context(&self.metric, self.context.as_deref())
    }

    pub fn validate(&self) -> Result<()> {
        if self.metric.is_empty() {
            return Err(SizerError::InvalidArgument("constraint metric empty".into()));
        }
        if !self.threshold.is_finite() {
            return Err(SizerError::InvalidArgument(format!(
                "constraint {} threshold not finite",
                self.metric
            )));
        }
        Ok(())
    }
}

/// Weights for the combined area + power objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedObjective {
    pub alpha: f64,
    pub beta: f64,
}

impl WeightedObjective {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 0.0 && beta >= 0.0 && alpha + beta > 0.0) {
            return Err(SizerError::InvalidArgument(format!(
                "weighted objective requires alpha >= 0, beta >= 0, alpha + beta > 0; got ({alpha}, {beta})"
            )));
        }
        Ok(WeightedObjective { alpha, beta })
    }
}

/// What the optimiser minimises.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Objective {
    /// Minimise a single named metric; `absolute` minimises its magnitude
    /// (used for the temperature coefficient, whose sign carries no merit).
    Minimize { metric: String, absolute: bool },
    /// Minimise `alpha * area + beta * power`.
    Weighted { alpha: f64, beta: f64 },
}

/// The role a decision variable plays in the circuit, which drives area
/// accounting (matched groups expand to their physical transistor count)
/// and the analytic aspect-ratio checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum VariableRole {
    /// Shared gate width of a matched transistor group.
    Width { transistors: Vec<String> },
    /// Shared gate length of a matched transistor group.
    Length { transistors: Vec<String> },
    Resistance,
    Current,
    /// Dimensionless variable of a synthetic benchmark.
    Plain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    #[serde(flatten)]
    pub role: VariableRole,
}

impl VariableSpec {
    pub fn width(name: &str, transistors: &[&str]) -> Self {
        VariableSpec {
            name: name.to_string(),
            role: VariableRole::Width {
                transistors: transistors.iter().map(|s| s.to_string()).collect(),
            },
        }
    }

    pub fn length(name: &str, transistors: &[&str]) -> Self {
        VariableSpec {
            name: name.to_string(),
            role: VariableRole::Length {
                transistors: transistors.iter().map(|s| s.to_string()).collect(),
            },
        }
    }

    pub fn plain(name: &str) -> Self {
        VariableSpec {
            name: name.to_string(),
            role: VariableRole::Plain,
        }
    }
}

/// Pure-geometry constraints checked directly on a design vector, with no
/// evaluator call.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GeometryRules {
    /// Allowed `W/L` window for every transistor group.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aspect_ratio: Option<(f64, f64)>,
    /// Allowed gate-length window (meters).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_range: Option<(f64, f64)>,
}

/// A complete sizing problem: decision variables, search space, objective,
/// constraint set, and the saturation roster checked at every corner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub name: String,
    pub variables: Vec<VariableSpec>,
    pub bounds: Bounds,
    pub objective: Objective,
    pub constraints: Vec<ConstraintSpec>,
    /// Corners at which every transistor in `transistors` must be saturated.
    /// `None` entries denote the single nominal operating point.
    pub saturation_contexts: Vec<Option<String>>,
    /// Individual transistor names (not matched groups).
    pub transistors: Vec<String>,
    /// Gate length shared by all transistors when lengths are not decision
    /// variables (meters).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_length: Option<f64>,
    #[serde(default)]
    pub geometry: GeometryRules,
}

impl ProblemSpec {
    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    /// Number of physical transistors, i.e. the sum of matched-group sizes.
    pub fn transistor_count(&self) -> usize {
        self.transistors.len()
    }

    pub fn variable_names(&self) -> Vec<&str> {
        self.variables.iter().map(|v| v.name.as_str()).collect()
    }

    /// Every (transistor, context) pair that needs a saturation flag.
    pub fn saturation_ids(&self) -> Vec<SatId> {
        let mut out = Vec::new();
        for ctx in &self.saturation_contexts {
            for t in &self.transistors {
                out.push(SatId::with_context(t, ctx.as_deref()));
            }
        }
        out
    }

    /// Metric ids of every constraint, in declaration order, deduplicated.
    pub fn constraint_metric_ids(&self) -> Vec<MetricId> {
        let mut out: Vec<MetricId> = Vec::new();
        for c in &self.constraints {
            let id = c.metric_id();
            if !out.contains(&id) {
                out.push(id);
            }
        }
        out
    }

    /// Metric ids the objective needs from an evaluation.
    pub fn objective_metric_ids(&self) -> Vec<MetricId> {
        match &self.objective {
            Objective::Minimize { metric, .. } => vec![MetricId::plain(metric)],
            Objective::Weighted { .. } => vec![
                MetricId::plain(metric::AREA),
                MetricId::plain(metric::POWER),
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.variables.is_empty() {
            return Err(SizerError::Config(format!(
                "problem {}: variables: must be non-empty",
                self.name
            )));
        }
        if self.bounds.dim() != self.variables.len() {
            return Err(SizerError::Config(format!(
                "problem {}: bounds: dimension {} does not match {} variables",
                self.name,
                self.bounds.dim(),
                self.variables.len()
            )));
        }
        for c in &self.constraints {
            c.validate()?;
        }
        if let Objective::Weighted { alpha, beta } = self.objective {
            WeightedObjective::new(alpha, beta)?;
        }
        if !self.saturation_contexts.is_empty() && self.transistors.is_empty() {
            return Err(SizerError::Config(format!(
                "problem {}: transistors: saturation contexts given but roster is empty",
                self.name
            )));
        }
        let mut names: Vec<&str> = self.variables.iter().map(|v| v.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != self.variables.len() {
            return Err(SizerError::Config(format!(
                "problem {}: variables: duplicate names",
                self.name
            )));
        }
        Ok(())
    }

    /// The gate length applying to a width variable: a paired length
    /// variable (matched by transistor group) if one exists, otherwise the
    /// problem's fixed length.
    fn length_for_group(&self, group: &[String], x: &DesignVector) -> Option<f64> {
        for (i, v) in self.variables.iter().enumerate() {
            if let VariableRole::Length { transistors } = &v.role {
                if transistors == group {
                    return Some(x.get(i));
                }
            }
        }
        self.fixed_length
    }

    /// Total gate area of the design (Σ W·L over physical transistors), if
    /// the problem has width variables.
    pub fn area_of(&self, x: &DesignVector) -> Result<Option<f64>> {
        let mut widths = Vec::new();
        let mut lengths = Vec::new();
        let mut counts = Vec::new();
        for (i, v) in self.variables.iter().enumerate() {
            if let VariableRole::Width { transistors } = &v.role {
                let l = self.length_for_group(transistors, x).ok_or_else(|| {
                    SizerError::InvalidArgument(format!(
                        "problem {}: width variable {} has no matching length",
                        self.name, v.name
                    ))
                })?;
                widths.push(x.get(i));
                lengths.push(l);
                counts.push(transistors.len());
            }
        }
        if widths.is_empty() {
            return Ok(None);
        }
        compute_area(&widths, &lengths, &counts).map(Some)
    }

    /// Aspect-ratio and length-window outcomes for a design vector.
    /// These never require an evaluator call.
    pub fn check_geometry(&self, x: &DesignVector) -> Vec<GeometryOutcome> {
        let mut out = Vec::new();
        for (i, v) in self.variables.iter().enumerate() {
            match &v.role {
                VariableRole::Width { transistors } => {
                    if let Some((lo, hi)) = self.geometry.aspect_ratio {
                        if let Some(l) = self.length_for_group(transistors, x) {
                            let ratio = x.get(i) / l;
                            out.push(GeometryOutcome {
                                variable: v.name.clone(),
                                rule: format!("{lo} <= W/L <= {hi}"),
                                value: ratio,
                                passed: ratio >= lo && ratio <= hi,
                            });
                        }
                    }
                }
                VariableRole::Length { .. } => {
                    if let Some((lo, hi)) = self.geometry.length_range {
                        let l = x.get(i);
                        out.push(GeometryOutcome {
                            variable: v.name.clone(),
                            rule: format!("{lo} <= L <= {hi}"),
                            value: l,
                            passed: l >= lo && l <= hi,
                        });
                    }
                }
                _ => {}
            }
        }
        out
    }

    /// Objective value (lower is better) extracted from an evaluation.
    /// `None` when the evaluation failed or lacks the needed metrics.
    pub fn fitness_of(&self, r: &EvaluationResult) -> Option<f64> {
        if r.failure.is_some() {
            return None;
        }
        match &self.objective {
            Objective::Minimize { metric, absolute } => {
                let v = r.metric(metric, None)?;
                Some(if *absolute { v.abs() } else { v })
            }
            Objective::Weighted { alpha, beta } => {
                let area = r.metric(metric::AREA, None)?;
                let power = r.metric(metric::POWER, None)?;
                let w = WeightedObjective {
                    alpha: *alpha,
                    beta: *beta,
                };
                Some(weighted_fitness(area, power, &w))
            }
        }
    }
}

/// Why an evaluation produced no usable metrics. A failed evaluation still
/// counts as one evaluator call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvalFailure {
    /// The analytic model has no solution at this point (e.g. square root
    /// of a negative operand, non-positive resistance).
    Unrealizable { message: String },
    /// External simulator exceeded its wall-clock budget.
    Timeout { seconds: f64 },
    /// External simulator binary could not be started.
    Spawn { message: String },
    /// External simulator exited with a non-zero status.
    CommandFailed { status: i32, message: String },
    /// Metric file was present but unparsable.
    MalformedOutput { message: String },
    /// Metric file was never produced.
    MissingOutput { path: String },
}

impl EvalFailure {
    /// Fatal failures indicate a broken setup rather than a bad design
    /// point; batch drivers abort instead of recording them row-wise.
    pub fn is_fatal(&self) -> bool {
        matches!(self, EvalFailure::Spawn { .. })
    }
}

impl fmt::Display for EvalFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalFailure::Unrealizable { message } => write!(f, "unrealizable: {message}"),
            EvalFailure::Timeout { seconds } => write!(f, "timeout after {seconds}s"),
            EvalFailure::Spawn { message } => write!(f, "spawn failed: {message}"),
            EvalFailure::CommandFailed { status, message } => {
                write!(f, "command failed (status {status}): {message}")
            }
            EvalFailure::MalformedOutput { message } => {
                write!(f, "malformed metric file: {message}")
            }
            EvalFailure::MissingOutput { path } => write!(f, "metric file not found: {path}"),
        }
    }
}

/// Named circuit metrics plus per-transistor saturation flags returned by
/// one evaluator call.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub metrics: BTreeMap<MetricId, f64>,
    pub saturation: BTreeMap<SatId, bool>,
    /// Present when the evaluation produced no usable design point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<EvalFailure>,
    /// Cached outcome of the full spice-side feasibility check, filled in by
    /// the optimiser gate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasible_spice: Option<bool>,
}

impl EvaluationResult {
    pub fn failed(failure: EvalFailure) -> Self {
        EvaluationResult {
            failure: Some(failure),
            ..Default::default()
        }
    }

    pub fn set_metric(&mut self, name: &str, context: Option<&str>, value: f64) {
        self.metrics
            .insert(MetricId::with_context(name, context), value);
    }

    pub fn set_saturation(&mut self, transistor: &str, context: Option<&str>, sat: bool) {
        self.saturation
            .insert(SatId::with_context(transistor, context), sat);
    }

    pub fn metric(&self, name: &str, context: Option<&str>) -> Option<f64> {
        self.metrics
            .get(&MetricId::with_context(name, context))
            .copied()
    }

    pub fn is_failed(&self) -> bool {
        self.failure.is_some()
    }
}

/// Outcome of one metric constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintOutcome {
    pub constraint: ConstraintSpec,
    /// Observed value; `None` when the evaluation did not produce it.
    pub value: Option<f64>,
    pub passed: bool,
    /// Normalised violation magnitude; 0 when passed, 1 when the metric was
    /// missing entirely.
    pub violation: f64,
}

/// Outcome of one pure-geometry rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryOutcome {
    pub variable: String,
    pub rule: String,
    pub value: f64,
    pub passed: bool,
}

/// Per-constraint and per-transistor feasibility breakdown of one
/// evaluation against one problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub constraints: Vec<ConstraintOutcome>,
    pub saturation: Vec<(SatId, bool)>,
    pub constraints_pass: bool,
    pub saturation_pass: bool,
    pub overall: bool,
}

impl FeasibilityReport {
    /// Sum of normalised violations, used to rank infeasible candidates.
    pub fn total_violation(&self) -> f64 {
        let c: f64 = self.constraints.iter().map(|c| c.violation).sum();
        let s = self.saturation.iter().filter(|(_, ok)| !ok).count() as f64;
        c + s
    }
}

/// Temperature coefficient of a reference voltage over the -40..125 °C
/// span, in ppm/°C. The sign is preserved; optimisation ranks by |TC|.
pub fn compute_tc(vref_m40: f64, vref_125: f64, vref_27: f64) -> Result<f64> {
    if !(vref_27 > 0.0) {
        return Err(SizerError::Domain(format!(
            "reference voltage at 27C must be positive, got {vref_27}"
        )));
    }
    Ok((vref_125 - vref_m40) * 1.0e6 / (vref_27 * 165.0))
}

/// Total gate area Σ count·W·L over matched groups (square meters).
///
/// `counts[i]` is the number of physical transistors sharing `widths[i]`
/// and `lengths[i]`, so a matched pair contributes twice.
pub fn compute_area(widths: &[f64], lengths: &[f64], counts: &[usize]) -> Result<f64> {
    if widths.len() != lengths.len() || widths.len() != counts.len() {
        return Err(SizerError::InvalidArgument(format!(
            "area: got {} widths, {} lengths, {} counts",
            widths.len(),
            lengths.len(),
            counts.len()
        )));
    }
    for (i, (w, l)) in widths.iter().zip(lengths).enumerate() {
        if !(w.is_finite() && l.is_finite() && *w > 0.0 && *l > 0.0) {
            return Err(SizerError::InvalidArgument(format!(
                "area: entry {i} must be positive and finite (W={w}, L={l})"
            )));
        }
    }
    Ok(widths
        .iter()
        .zip(lengths)
        .zip(counts)
        .map(|((w, l), c)| *c as f64 * w * l)
        .sum())
}

/// Combined objective `alpha * area + beta * power`. The harness is
/// responsible for weights that normalise the two scales.
pub fn weighted_fitness(area: f64, power: f64, w: &WeightedObjective) -> f64 {
    w.alpha * area + w.beta * power
}

/// Check every metric constraint and every saturation flag of `r` against
/// `p`. Missing data is a failure mode, not an error.
pub fn check_constraints(r: &EvaluationResult, p: &ProblemSpec) -> FeasibilityReport {
    let mut outcomes = Vec::with_capacity(p.constraints.len());
    for c in &p.constraints {
        let value = r.metric(&c.metric, c.context.as_deref());
        let (passed, violation) = match value {
            Some(v) if v.is_finite() => {
                if c.comparator.satisfied(v, c.threshold) {
                    (true, 0.0)
                } else {
                    let scale = c.threshold.abs().max(1e-30);
                    (false, (v - c.threshold).abs() / scale)
                }
            }
            _ => (false, 1.0),
        };
        outcomes.push(ConstraintOutcome {
            constraint: c.clone(),
            value,
            passed,
            violation,
        });
    }

    let mut saturation = Vec::new();
    for id in p.saturation_ids() {
        let ok = r.saturation.get(&id).copied().unwrap_or(false);
        saturation.push((id, ok));
    }

    let constraints_pass = !r.is_failed() && outcomes.iter().all(|o| o.passed);
    let saturation_pass = !r.is_failed() && saturation.iter().all(|(_, ok)| *ok);
    FeasibilityReport {
        constraints: outcomes,
        saturation,
        constraints_pass,
        saturation_pass,
        overall: constraints_pass && saturation_pass,
    }
}

#[cfg(test)]
mod tests;
