//! Elitist genetic algorithm with a pluggable feasibility gate.
//!
//! Four gate modes share one loop:
//!
//! * `SGA`  — plain GA: every candidate goes straight to the evaluator.
//! * `MGA`  — adds the linearly shrinking search-space parameter α and a
//!   third offspring stream (mutated parents).
//! * `MGA_MLSP` — MGA plus ML saturation prediction: candidates predicted
//!   non-saturated are rejected with no evaluator call.
//! * `MGA_MLSCP` — MGA plus saturation and constraint prediction: regressor
//!   estimates are compared against the constraint thresholds before any
//!   evaluator call.
//!
//! Pure-geometry constraints (aspect-ratio windows) are checked first in
//! every mode and never cost an evaluator call. A candidate enters the
//! population only after the evaluator-backed check passes, so the gate can
//! only save calls, never admit an unverified design.

use std::time::Instant;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SizerError};
use crate::evaluator::Evaluator;
use crate::problem::{
    check_constraints, Bounds, DesignVector, EvaluationResult, MetricId, ProblemSpec,
};
use crate::surrogate::SurrogateBundle;
use crate::util::derive_seed;

/// Which feasibility gate the run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GateMode {
    Sga,
    Mga,
    MgaMlsp,
    MgaMlscp,
}

impl GateMode {
    pub fn uses_ml(self) -> bool {
        matches!(self, GateMode::MgaMlsp | GateMode::MgaMlscp)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateMode::Sga => "SGA",
            GateMode::Mga => "MGA",
            GateMode::MgaMlsp => "MGA_MLSP",
            GateMode::MgaMlscp => "MGA_MLSCP",
        }
    }

    pub fn parse(s: &str) -> Option<GateMode> {
        match s.to_ascii_uppercase().as_str() {
            "SGA" => Some(GateMode::Sga),
            "MGA" => Some(GateMode::Mga),
            "MGA_MLSP" | "MGA-MLSP" => Some(GateMode::MgaMlsp),
            "MGA_MLSCP" | "MGA-MLSCP" => Some(GateMode::MgaMlscp),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population: usize,
    pub gen_max: usize,
    pub alpha_start: f64,
    pub alpha_end: f64,
    /// Candidate attempts per offspring slot before the slot falls back to
    /// its least-violating candidate with a penalised fitness.
    pub retry_budget: usize,
    pub mode: GateMode,
    pub seed: u64,
    pub workers: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population: 20,
            gen_max: 200,
            alpha_start: 1.0,
            alpha_end: 0.05,
            retry_budget: 50,
            mode: GateMode::Mga,
            seed: 0,
            workers: 1,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(SizerError::Config("ga.population: must be >= 2".into()));
        }
        if self.gen_max < 1 {
            return Err(SizerError::Config("ga.gen_max: must be >= 1".into()));
        }
        if !(self.alpha_end > 0.0 && self.alpha_end <= self.alpha_start && self.alpha_start <= 1.0)
        {
            return Err(SizerError::Config(
                "ga.alpha: require 0 < alpha_end <= alpha_start <= 1".into(),
            ));
        }
        if self.retry_budget < 1 {
            return Err(SizerError::Config("ga.retry_budget: must be >= 1".into()));
        }
        Ok(())
    }
}

/// Predictions the ML gate needs. Implemented by [`SurrogateBundle`]; tests
/// substitute stubs and evaluator-wired oracles.
pub trait FeasibilityPredictor: Sync {
    /// All saturation classifiers at their 0.5 decision threshold.
    fn predicts_all_saturated(&self, x: &DesignVector) -> bool;
    /// Raw-unit prediction for one constraint metric; `None` when the metric
    /// is not gated, leaving it to the evaluator-backed check.
    fn predict_metric(&self, x: &DesignVector, id: &MetricId) -> Option<f64>;
}

impl FeasibilityPredictor for SurrogateBundle {
    fn predicts_all_saturated(&self, x: &DesignVector) -> bool {
        SurrogateBundle::predicts_all_saturated(self, x)
    }

    fn predict_metric(&self, x: &DesignVector, id: &MetricId) -> Option<f64> {
        SurrogateBundle::predict_metric(self, x, id)
    }
}

/// A population member. Members always carry an evaluator-backed result;
/// `penalized` marks retry-budget fallbacks that never passed the check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub vector: DesignVector,
    /// Objective value, lower is better; for penalised members this is the
    /// worst feasible fitness seen so far plus the violation sum.
    pub fitness: f64,
    pub eval: EvaluationResult,
    pub penalized: bool,
    pub violation: f64,
    /// Creation sequence number; earlier creation wins fitness ties.
    pub birth: u64,
}

impl Individual {
    fn sort_key(&self) -> (bool, f64, u64) {
        (
            self.penalized,
            if self.penalized {
                self.violation
            } else {
                self.fitness
            },
            self.birth,
        )
    }
}

fn sort_population(pop: &mut [Individual]) {
    pop.sort_by(|a, b| {
        let (ap, av, ab) = a.sort_key();
        let (bp, bv, bb) = b.sort_key();
        ap.cmp(&bp)
            .then(av.total_cmp(&bv))
            .then(ab.cmp(&bb))
    });
}

/// Why the gate rejected a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectCause {
    Geometry,
    Classifier,
    Regressor,
    SpiceConstraint,
    SpiceSaturation,
    SpiceFailure,
}

/// Cumulative rejection counts by cause.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectTally {
    pub geometry: u64,
    pub classifier: u64,
    pub regressor: u64,
    pub spice_constraint: u64,
    pub spice_saturation: u64,
    pub spice_failure: u64,
}

impl RejectTally {
    fn add(&mut self, cause: RejectCause) {
        match cause {
            RejectCause::Geometry => self.geometry += 1,
            RejectCause::Classifier => self.classifier += 1,
            RejectCause::Regressor => self.regressor += 1,
            RejectCause::SpiceConstraint => self.spice_constraint += 1,
            RejectCause::SpiceSaturation => self.spice_saturation += 1,
            RejectCause::SpiceFailure => self.spice_failure += 1,
        }
    }

    fn merge(&mut self, other: &RejectTally) {
        self.geometry += other.geometry;
        self.classifier += other.classifier;
        self.regressor += other.regressor;
        self.spice_constraint += other.spice_constraint;
        self.spice_saturation += other.spice_saturation;
        self.spice_failure += other.spice_failure;
    }

    /// Rejections that happened after an evaluator call.
    pub fn spice_total(&self) -> u64 {
        self.spice_constraint + self.spice_saturation + self.spice_failure
    }
}

/// Outcome of one feasibility check.
#[derive(Debug)]
pub enum Gate {
    Passed {
        eval: EvaluationResult,
        fitness: f64,
    },
    NotPassed {
        cause: RejectCause,
        /// Present when the candidate was evaluated before failing: the
        /// result and its violation sum, used for budget-exhaustion
        /// fallbacks.
        evaluated: Option<(EvaluationResult, f64)>,
    },
}

/// The feasibility check shared by every mode (gate order: geometry, then
/// ML screens, then the evaluator-backed check).
pub fn feasibility_check(
    x: &DesignVector,
    mode: GateMode,
    predictor: Option<&dyn FeasibilityPredictor>,
    evaluator: &dyn Evaluator,
    problem: &ProblemSpec,
) -> Gate {
    let geo = problem.check_geometry(x);
    let geo_violations = geo.iter().filter(|g| !g.passed).count();
    if geo_violations > 0 {
        return Gate::NotPassed {
            cause: RejectCause::Geometry,
            evaluated: None,
        };
    }

    if mode.uses_ml() {
        let p = predictor.expect("ML gate modes require a predictor");
        if !p.predicts_all_saturated(x) {
            return Gate::NotPassed {
                cause: RejectCause::Classifier,
                evaluated: None,
            };
        }
        if mode == GateMode::MgaMlscp {
            for c in &problem.constraints {
                if let Some(pred) = p.predict_metric(x, &c.metric_id()) {
                    if !c.comparator.satisfied(pred, c.threshold) {
                        return Gate::NotPassed {
                            cause: RejectCause::Regressor,
                            evaluated: None,
                        };
                    }
                }
            }
        }
    }

    let mut eval = evaluator.evaluate(x);
    if eval.failure.is_some() {
        let worst = (problem.constraints.len() + problem.saturation_ids().len() + 1) as f64;
        return Gate::NotPassed {
            cause: RejectCause::SpiceFailure,
            evaluated: Some((eval, worst)),
        };
    }
    let report = check_constraints(&eval, problem);
    eval.feasible_spice = Some(report.overall);
    if report.overall {
        match problem.fitness_of(&eval) {
            Some(fitness) => Gate::Passed { eval, fitness },
            None => Gate::NotPassed {
                cause: RejectCause::SpiceFailure,
                evaluated: Some((eval, 1.0)),
            },
        }
    } else {
        let cause = if report.saturation_pass {
            RejectCause::SpiceConstraint
        } else {
            RejectCause::SpiceSaturation
        };
        let violation = report.total_violation();
        Gate::NotPassed {
            cause,
            evaluated: Some((eval, violation)),
        }
    }
}

enum SlotOutcome {
    Feasible {
        vector: DesignVector,
        eval: EvaluationResult,
        fitness: f64,
    },
    Exhausted {
        vector: DesignVector,
        eval: EvaluationResult,
        violation: f64,
    },
}

struct SlotResult {
    outcome: SlotOutcome,
    tally: RejectTally,
}

/// Retry a candidate generator against the gate until it passes or the
/// budget runs out; on exhaustion keep the least-violating evaluated
/// candidate (forcing one evaluation if the gate never reached the
/// evaluator).
fn fill_slot(
    problem: &ProblemSpec,
    cfg: &GaConfig,
    evaluator: &dyn Evaluator,
    predictor: Option<&dyn FeasibilityPredictor>,
    rng: &mut ChaCha12Rng,
    mut propose: impl FnMut(&mut ChaCha12Rng) -> DesignVector,
) -> SlotResult {
    let mut tally = RejectTally::default();
    let mut fallback: Option<(DesignVector, EvaluationResult, f64)> = None;
    let mut last: Option<DesignVector> = None;

    for _ in 0..cfg.retry_budget {
        let x = propose(rng);
        match feasibility_check(&x, cfg.mode, predictor, evaluator, problem) {
            Gate::Passed { eval, fitness } => {
                return SlotResult {
                    outcome: SlotOutcome::Feasible {
                        vector: x,
                        eval,
                        fitness,
                    },
                    tally,
                };
            }
            Gate::NotPassed { cause, evaluated } => {
                tally.add(cause);
                if let Some((eval, violation)) = evaluated {
                    let better = fallback
                        .as_ref()
                        .map_or(true, |(_, _, best)| violation < *best);
                    if better {
                        fallback = Some((x.clone(), eval, violation));
                    }
                }
                last = Some(x);
            }
        }
    }

    // Budget exhausted. If no candidate ever reached the evaluator (the ML
    // gate rejected them all), spend one call on the last candidate so the
    // fallback carries a real evaluation.
    let (vector, eval, violation) = fallback.unwrap_or_else(|| {
        let x = last.expect("retry budget >= 1");
        let eval = evaluator.evaluate(&x);
        let report = check_constraints(&eval, problem);
        let violation = if eval.failure.is_some() {
            (problem.constraints.len() + problem.saturation_ids().len() + 1) as f64
        } else {
            report.total_violation()
        };
        (x, eval, violation)
    });
    // The forced evaluation can turn out feasible when the ML gate was
    // wrong about the candidate; admit it normally in that case.
    if eval.failure.is_none() {
        let report = check_constraints(&eval, problem);
        if report.overall {
            if let Some(fitness) = problem.fitness_of(&eval) {
                return SlotResult {
                    outcome: SlotOutcome::Feasible {
                        vector,
                        eval,
                        fitness,
                    },
                    tally,
                };
            }
        }
    }
    SlotResult {
        outcome: SlotOutcome::Exhausted {
            vector,
            eval,
            violation,
        },
        tally,
    }
}

/// Uniform draw inside the bounds.
fn uniform_in(bounds: &Bounds, rng: &mut ChaCha12Rng) -> DesignVector {
    let values: Vec<f64> = (0..bounds.dim())
        .map(|i| rng.random_range(bounds.lower()[i]..bounds.upper()[i]))
        .collect();
    DesignVector::new(values).expect("bounds are finite")
}

/// Single-point crossover: the offspring takes `a[..point]` then
/// `b[point..]`. `point` must lie in `1..dim`; a one-dimensional vector has
/// no interior point and the offspring is a copy of `a`.
pub fn crossover(parent_a: &DesignVector, parent_b: &DesignVector, point: usize) -> DesignVector {
    let d = parent_a.dim();
    if d == 1 {
        return parent_a.clone();
    }
    assert!(point >= 1 && point < d, "crossover point out of range");
    let mut values = Vec::with_capacity(d);
    values.extend_from_slice(&parent_a.values()[..point]);
    values.extend_from_slice(&parent_b.values()[point..]);
    DesignVector::new(values).expect("parents are finite")
}

/// Search-space parameter at a generation: linear from `alpha_start` down to
/// `alpha_end` across the run.
pub fn alpha_at(gen: usize, cfg: &GaConfig) -> f64 {
    if cfg.gen_max <= 1 {
        return cfg.alpha_start;
    }
    cfg.alpha_start
        + (cfg.alpha_end - cfg.alpha_start) * gen as f64 / (cfg.gen_max - 1) as f64
}

/// Mutate a random non-empty subset of genes: each selected gene resamples
/// uniformly in a window of half-width `alpha * span / 2` around its current
/// value, with the window clipped to the bounds.
pub fn mutate(
    base: &DesignVector,
    alpha: f64,
    bounds: &Bounds,
    rng: &mut ChaCha12Rng,
) -> DesignVector {
    let d = base.dim();
    let mutation_count = rng.random_range(1..=d);
    let mut order: Vec<usize> = (0..d).collect();
    order.shuffle(rng);
    let mut values = base.values().to_vec();
    for &gene in order.iter().take(mutation_count) {
        let half = alpha * bounds.span(gene) / 2.0;
        let lo = (values[gene] - half).max(bounds.lower()[gene]);
        let hi = (values[gene] + half).min(bounds.upper()[gene]);
        if hi > lo {
            values[gene] = rng.random_range(lo..hi);
        }
    }
    DesignVector::new(values).expect("mutation keeps values finite")
}

/// One cumulative trace row, recorded at the end of each generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub generation: usize,
    /// Stored fitness of the population's best member (penalised fitness if
    /// the whole population is penalised).
    pub best_fitness: f64,
    /// Best fitness among non-penalised members, if any exist yet. This is
    /// the monotone quantity elitism guarantees.
    pub best_feasible: Option<f64>,
    pub mean_fitness: f64,
    /// Evaluator calls since the start of this run.
    pub cum_calls: u64,
    pub rejects: RejectTally,
}

/// Everything one optimisation run produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub problem: String,
    pub mode: GateMode,
    pub seed: u64,
    pub rows: Vec<TraceRow>,
    pub best: Individual,
    pub final_population: Vec<Individual>,
    pub total_calls: u64,
    pub rejects: RejectTally,
    pub wall_secs: f64,
}

impl RunTrace {
    pub fn best_fitness(&self) -> f64 {
        self.best.fitness
    }

    /// CSV with one row per generation:
    /// `generation,best_fitness,mean_fitness,cum_calls,cum_reject_classifier,cum_reject_regressor,cum_reject_spice`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "generation,best_fitness,mean_fitness,cum_calls,cum_reject_classifier,cum_reject_regressor,cum_reject_spice\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:e},{:e},{},{},{},{}\n",
                r.generation,
                r.best_fitness,
                r.mean_fitness,
                r.cum_calls,
                r.rejects.classifier,
                r.rejects.regressor,
                r.rejects.spice_total(),
            ));
        }
        out
    }
}

/// A slot's candidate generator: repeatedly proposes design vectors from
/// the slot's own RNG stream.
type Propose<'b> = Box<dyn FnMut(&mut ChaCha12Rng) -> DesignVector + Send + 'b>;

struct RunState<'a> {
    problem: &'a ProblemSpec,
    evaluator: &'a dyn Evaluator,
    predictor: Option<&'a dyn FeasibilityPredictor>,
    cfg: &'a GaConfig,
    pool: Option<rayon::ThreadPool>,
    tally: RejectTally,
    /// Worst (largest) feasible fitness observed so far; the base of every
    /// penalised fitness.
    worst_feasible: f64,
    calls_at_start: u64,
}

impl<'a> RunState<'a> {
    fn run_slots<'b>(&self, descriptors: Vec<(u64, Propose<'b>)>) -> Vec<SlotResult> {
        use rayon::prelude::*;
        let job = |(slot_seed, mut propose): (u64, Propose<'b>)| {
            let mut rng = ChaCha12Rng::seed_from_u64(slot_seed);
            fill_slot(
                self.problem,
                self.cfg,
                self.evaluator,
                self.predictor,
                &mut rng,
                &mut *propose,
            )
        };
        match &self.pool {
            Some(pool) => pool.install(|| descriptors.into_par_iter().map(job).collect()),
            None => descriptors.into_iter().map(job).collect(),
        }
    }

    /// Turn slot results into individuals, updating the penalty base from
    /// the feasible ones first so penalised fitness is deterministic.
    fn materialize(&mut self, results: Vec<SlotResult>, birth_base: u64) -> Vec<Individual> {
        for r in &results {
            self.tally.merge(&r.tally);
            if let SlotOutcome::Feasible { fitness, .. } = &r.outcome {
                self.worst_feasible = self.worst_feasible.max(*fitness);
            }
        }
        results
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                let birth = birth_base + i as u64;
                match r.outcome {
                    SlotOutcome::Feasible {
                        vector,
                        eval,
                        fitness,
                    } => Individual {
                        vector,
                        fitness,
                        eval,
                        penalized: false,
                        violation: 0.0,
                        birth,
                    },
                    SlotOutcome::Exhausted {
                        vector,
                        eval,
                        violation,
                    } => Individual {
                        vector,
                        fitness: self.worst_feasible + violation,
                        eval,
                        penalized: true,
                        violation,
                        birth,
                    },
                }
            })
            .collect()
    }

    fn trace_row(&self, generation: usize, population: &[Individual]) -> TraceRow {
        let best = &population[0];
        let best_feasible = population
            .iter()
            .find(|i| !i.penalized)
            .map(|i| i.fitness);
        let mean_fitness =
            population.iter().map(|i| i.fitness).sum::<f64>() / population.len() as f64;
        TraceRow {
            generation,
            best_fitness: best.fitness,
            best_feasible,
            mean_fitness,
            cum_calls: self.evaluator.call_count() - self.calls_at_start,
            rejects: self.tally,
        }
    }
}

/// Build the initial population: uniform resampling per slot until the gate
/// passes, subject to the retry budget.
fn init_population(state: &mut RunState<'_>) -> Vec<Individual> {
    let cfg = state.cfg;
    let problem = state.problem;
    let descriptors: Vec<(u64, Propose<'_>)> = (0..cfg.population)
        .map(|slot| {
            let seed = derive_seed(cfg.seed, &["init", &slot.to_string()]);
            let propose: Propose<'_> =
                Box::new(move |rng: &mut ChaCha12Rng| uniform_in(&problem.bounds, rng));
            (seed, propose)
        })
        .collect();
    let results = state.run_slots(descriptors);
    let mut pop = state.materialize(results, 0);
    sort_population(&mut pop);
    pop
}

/// One generation: generate the offspring streams, pool them with the
/// parents, and keep the fittest N.
fn step(state: &mut RunState<'_>, population: &[Individual], gen: usize) -> Vec<Individual> {
    let cfg = state.cfg;
    let n = cfg.population;
    let alpha = if cfg.mode == GateMode::Sga {
        1.0
    } else {
        alpha_at(gen, cfg)
    };
    // SGA has no mutated-parent stream.
    let streams: usize = if cfg.mode == GateMode::Sga { 2 } else { 3 };
    let bounds = &state.problem.bounds;

    let mut descriptors: Vec<(u64, Propose<'_>)> = Vec::with_capacity(streams * n);
    for stream in 0..streams {
        for slot in 0..n {
            let seed = derive_seed(
                cfg.seed,
                &[
                    "gen",
                    &gen.to_string(),
                    "stream",
                    &stream.to_string(),
                    "slot",
                    &slot.to_string(),
                ],
            );
            let pick_pair = move |rng: &mut ChaCha12Rng| {
                let a = population.choose(rng).expect("population non-empty");
                let b = population.choose(rng).expect("population non-empty");
                let point = if a.vector.dim() > 1 {
                    rng.random_range(1..a.vector.dim())
                } else {
                    1
                };
                crossover(&a.vector, &b.vector, point)
            };
            let propose: Propose<'_> = match stream {
                // Crossover offspring.
                0 => Box::new(pick_pair),
                // Mutated crossover offspring.
                1 => Box::new(move |rng: &mut ChaCha12Rng| {
                    let child = pick_pair(rng);
                    mutate(&child, alpha, bounds, rng)
                }),
                // Mutated parents.
                _ => Box::new(move |rng: &mut ChaCha12Rng| {
                    let a = population.choose(rng).expect("population non-empty");
                    mutate(&a.vector, alpha, bounds, rng)
                }),
            };
            descriptors.push((seed, propose));
        }
    }

    let results = state.run_slots(descriptors);
    let birth_base = (cfg.population + gen * 3 * cfg.population) as u64;
    let offspring = state.materialize(results, birth_base);

    let mut pool: Vec<Individual> = population.to_vec();
    pool.extend(offspring);
    sort_population(&mut pool);
    pool.truncate(n);
    pool
}

/// Run the configured GA. Deterministic for a fixed seed at any worker
/// count: every offspring slot draws from its own seed-derived RNG stream.
pub fn run(
    problem: &ProblemSpec,
    evaluator: &dyn Evaluator,
    cfg: &GaConfig,
    predictor: Option<&dyn FeasibilityPredictor>,
) -> Result<RunTrace> {
    cfg.validate()?;
    problem.validate()?;
    if cfg.mode.uses_ml() && predictor.is_none() {
        return Err(SizerError::Config(format!(
            "mode {} requires a trained surrogate bundle",
            cfg.mode.name()
        )));
    }

    let started = Instant::now();
    let pool = if cfg.workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.workers)
                .build()
                .map_err(|e| SizerError::Io(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };
    let mut state = RunState {
        problem,
        evaluator,
        predictor,
        cfg,
        pool,
        tally: RejectTally::default(),
        worst_feasible: 0.0,
        calls_at_start: evaluator.call_count(),
    };

    let mut population = init_population(&mut state);
    let mut rows = vec![state.trace_row(0, &population)];
    for gen in 0..cfg.gen_max {
        population = step(&mut state, &population, gen);
        rows.push(state.trace_row(gen + 1, &population));
    }

    let best = population[0].clone();
    let total_calls = evaluator.call_count() - state.calls_at_start;
    Ok(RunTrace {
        problem: problem.name.clone(),
        mode: cfg.mode,
        seed: cfg.seed,
        rows,
        best,
        final_population: population,
        total_calls,
        rejects: state.tally,
        wall_secs: started.elapsed().as_secs_f64(),
    })
}

/// The plain-GA baseline: fixed α = 1, no mutated-parent stream, no ML gate.
pub fn run_sga(
    problem: &ProblemSpec,
    evaluator: &dyn Evaluator,
    cfg: &GaConfig,
) -> Result<RunTrace> {
    let mut cfg = cfg.clone();
    cfg.mode = GateMode::Sga;
    run(problem, evaluator, &cfg, None)
}

#[cfg(test)]
mod tests;
