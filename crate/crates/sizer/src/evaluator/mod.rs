//! The "spice" abstraction: a uniform evaluator interface with analytic
//! circuit models, an external-simulator subprocess adapter, and a shared
//! atomic call counter.
//!
//! Every call to [`Evaluator::evaluate`] — including calls whose result is
//! failure-marked — increments the counter by exactly one, because a
//! diverging simulation still costs a simulation.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::problem::{DesignVector, EvaluationResult};

mod bgr;
mod external;
mod tsmcoa;

pub use bgr::{BgrEvaluator, BgrModelParams};
pub use external::{ExternalEvaluator, ExternalSimConfig};
pub use tsmcoa::{AnalyticDeviceParams, TsmcoaEvaluator};

/// A circuit model: maps a design vector to metrics and saturation flags.
/// Implementations must be pure (same input, same output) and thread-safe.
pub trait Evaluate: Sync + Send {
    fn evaluate_point(&self, x: &DesignVector) -> EvaluationResult;
}

/// An [`Evaluate`] with call accounting. One `evaluate` is "one spice call",
/// the cost unit of every experiment.
pub trait Evaluator: Sync + Send {
    fn evaluate(&self, x: &DesignVector) -> EvaluationResult;
    fn call_count(&self) -> u64;
    fn reset_count(&self);
}

/// Decorator adding a shared atomic call counter to any model.
pub struct Counted<E: Evaluate> {
    inner: E,
    count: AtomicU64,
}

impl<E: Evaluate> Counted<E> {
    pub fn new(inner: E) -> Self {
        Counted {
            inner,
            count: AtomicU64::new(0),
        }
    }

    pub fn inner(&self) -> &E {
        &self.inner
    }
}

/// Wrap a model with call counting.
pub fn counted<E: Evaluate>(e: E) -> Counted<E> {
    Counted::new(e)
}

impl<E: Evaluate> Evaluator for Counted<E> {
    fn evaluate(&self, x: &DesignVector) -> EvaluationResult {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.evaluate_point(x)
    }

    fn call_count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }

    fn reset_count(&self) {
        self.count.store(0, Ordering::Relaxed);
    }
}

impl Evaluate for Box<dyn Evaluate> {
    fn evaluate_point(&self, x: &DesignVector) -> EvaluationResult {
        self.as_ref().evaluate_point(x)
    }
}

impl<E: Evaluate + ?Sized> Evaluate for &E {
    fn evaluate_point(&self, x: &DesignVector) -> EvaluationResult {
        (*self).evaluate_point(x)
    }
}

/// Analytic model of the constrained quadratic benchmark: reports the
/// squared norm and the coordinate sum of the point.
pub struct SyntheticEvaluator;

impl Evaluate for SyntheticEvaluator {
    fn evaluate_point(&self, x: &DesignVector) -> EvaluationResult {
        let mut r = EvaluationResult::default();
        let sum_sq: f64 = x.values().iter().map(|v| v * v).sum();
        let sum: f64 = x.values().iter().sum();
        r.set_metric("sum_sq", None, sum_sq);
        r.set_metric("sum", None, sum);
        r
    }
}

/// The built-in analytic model for a named problem, if one exists.
/// The folded cascode op-amp intentionally has none; it runs only through
/// the external adapter or a user-supplied evaluator.
pub fn analytic_model_for(problem: &str) -> Option<Box<dyn Evaluate>> {
    match problem {
        "tsmcoa" => Some(Box::new(TsmcoaEvaluator::default())),
        "bgr" => Some(Box::new(BgrEvaluator::default())),
        "synthetic" => Some(Box::new(SyntheticEvaluator)),
        _ => None,
    }
}
