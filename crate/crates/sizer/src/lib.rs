//! Surrogate-gated genetic algorithm framework for constrained analog
//! circuit sizing.
//!
//! The crate is organised around an expensive circuit [`evaluator`] (an
//! analytic model or an external simulator subprocess) whose invocations are
//! the cost metric of every optimisation run. Offline machine-learning
//! models ([`surrogate`]) trained on a Latin-hypercube database
//! ([`sampling`]) screen candidate designs inside the genetic algorithm
//! ([`optimizer`]) so that the evaluator is only called for candidates the
//! models consider feasible. The [`harness`] module wraps the whole pipeline
//! in a reproducible multi-run experiment protocol with CSV/JSON reporting
//! and a command-line interface.

pub mod error;
pub mod evaluator;
pub mod harness;
pub mod optimizer;
pub mod problem;
pub mod sampling;
pub mod surrogate;
pub mod util;

pub use error::SizerError;
pub use problem::{Bounds, DesignVector, EvaluationResult, ProblemSpec};
