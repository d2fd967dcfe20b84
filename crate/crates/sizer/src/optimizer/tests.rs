use super::*;
use crate::evaluator::{counted, Evaluate, SyntheticEvaluator, TsmcoaEvaluator};
use crate::problem::{synthetic_problem, tsmcoa_problem, Comparator, ConstraintSpec};
use crate::sampling::lhs_sample;

/// Stub that predicts every candidate non-saturated.
struct NeverSaturated;

impl FeasibilityPredictor for NeverSaturated {
    fn predicts_all_saturated(&self, _x: &DesignVector) -> bool {
        false
    }
    fn predict_metric(&self, _x: &DesignVector, _id: &MetricId) -> Option<f64> {
        None
    }
}

/// Perfect predictor wired straight to an analytic model (not through any
/// counted evaluator): its predictions are the evaluator's own outputs.
struct OraclePredictor<'a, E: Evaluate> {
    model: &'a E,
}

impl<E: Evaluate> FeasibilityPredictor for OraclePredictor<'_, E> {
    fn predicts_all_saturated(&self, x: &DesignVector) -> bool {
        let r = self.model.evaluate_point(x);
        !r.is_failed() && r.saturation.values().all(|&s| s)
    }
    fn predict_metric(&self, x: &DesignVector, id: &MetricId) -> Option<f64> {
        self.model.evaluate_point(x).metrics.get(id).copied()
    }
}

fn unconstrained_problem() -> ProblemSpec {
    let mut p = synthetic_problem();
    p.constraints.clear();
    p
}

fn impossible_problem() -> ProblemSpec {
    let mut p = synthetic_problem();
    p.constraints = vec![ConstraintSpec::new("sum", Comparator::Ge, 99.0)];
    p
}

fn small_cfg(mode: GateMode, seed: u64) -> GaConfig {
    GaConfig {
        population: 10,
        gen_max: 10,
        mode,
        seed,
        ..Default::default()
    }
}

#[test]
fn crossover_examples() {
    let a = DesignVector::new(vec![1.0, 2.0]).unwrap();
    let b = DesignVector::new(vec![10.0, 20.0]).unwrap();
    assert_eq!(crossover(&a, &b, 1).values(), &[1.0, 20.0]);

    let c = crossover(&a, &a, 1);
    assert_eq!(c, a);

    // All interior points of a 4-gene vector give 3 distinct patterns.
    let a4 = DesignVector::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    let b4 = DesignVector::new(vec![9.0, 8.0, 7.0, 6.0]).unwrap();
    let patterns: Vec<Vec<f64>> = (1..4)
        .map(|p| crossover(&a4, &b4, p).values().to_vec())
        .collect();
    assert_eq!(patterns.len(), 3);
    assert_eq!(patterns[0], vec![1.0, 8.0, 7.0, 6.0]);
    assert_eq!(patterns[1], vec![1.0, 2.0, 7.0, 6.0]);
    assert_eq!(patterns[2], vec![1.0, 2.0, 3.0, 6.0]);
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                assert_ne!(patterns[i], patterns[j]);
            }
        }
    }
}

#[test]
fn alpha_schedule_endpoints_and_midpoint() {
    let cfg = GaConfig {
        gen_max: 201,
        ..Default::default()
    };
    assert_eq!(alpha_at(0, &cfg), cfg.alpha_start);
    assert_eq!(alpha_at(cfg.gen_max - 1, &cfg), cfg.alpha_end);
    let mid = alpha_at((cfg.gen_max - 1) / 2, &cfg);
    assert!((mid - 0.5 * (cfg.alpha_start + cfg.alpha_end)).abs() < 1e-12);

    let one = GaConfig {
        gen_max: 1,
        ..Default::default()
    };
    assert_eq!(alpha_at(0, &one), one.alpha_start);
}

#[test]
fn mutate_zero_alpha_is_identity() {
    let bounds = Bounds::new(vec![0.0, -5.0], vec![1.0, 5.0]).unwrap();
    let base = DesignVector::new(vec![0.3, 2.0]).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    for _ in 0..20 {
        assert_eq!(mutate(&base, 0.0, &bounds, &mut rng), base);
    }
}

#[test]
fn mutate_at_lower_bound_clips_window() {
    let bounds = Bounds::new(vec![0.0], vec![1.0]).unwrap();
    let base = DesignVector::new(vec![0.0]).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(2);
    for _ in 0..2000 {
        let m = mutate(&base, 1.0, &bounds, &mut rng);
        let v = m.get(0);
        assert!((0.0..=0.5).contains(&v), "sample {v} outside clipped window");
    }
}

#[test]
fn mutate_is_uniform_within_window() {
    // Kolmogorov-Smirnov statistic of 1e5 draws of the single gene against
    // the uniform CDF on the computed window [0.05, 0.55].
    let bounds = Bounds::new(vec![0.0], vec![1.0]).unwrap();
    let base = DesignVector::new(vec![0.3]).unwrap();
    let alpha = 0.5;
    let (lo, hi) = (0.05, 0.55);
    let n = 100_000;
    let mut rng = ChaCha12Rng::seed_from_u64(3);
    let mut draws: Vec<f64> = (0..n)
        .map(|_| mutate(&base, alpha, &bounds, &mut rng).get(0))
        .collect();
    draws.sort_by(|a, b| a.total_cmp(b));
    let mut ks: f64 = 0.0;
    for (i, v) in draws.iter().enumerate() {
        assert!((lo..=hi).contains(v));
        let cdf = (v - lo) / (hi - lo);
        let emp_hi = (i + 1) as f64 / n as f64;
        let emp_lo = i as f64 / n as f64;
        ks = ks.max((cdf - emp_lo).abs()).max((emp_hi - cdf).abs());
    }
    // 1.95 / sqrt(n) is the ~0.1% critical value.
    assert!(ks < 1.95 / (n as f64).sqrt(), "KS statistic {ks}");
}

#[test]
fn always_rejecting_classifier_never_calls_evaluator() {
    let p = tsmcoa_problem();
    let e = counted(TsmcoaEvaluator::default());
    let stub = NeverSaturated;
    let pts = lhs_sample(200, &p.bounds, 5).unwrap();
    for i in 0..pts.rows() {
        let x = DesignVector::new(pts.row(i).to_vec()).unwrap();
        match feasibility_check(&x, GateMode::MgaMlscp, Some(&stub), &e, &p) {
            Gate::NotPassed { cause, evaluated } => {
                // Geometry passes inside the bounds, so the classifier gate
                // must short-circuit everything else.
                assert_eq!(cause, RejectCause::Classifier);
                assert!(evaluated.is_none());
            }
            Gate::Passed { .. } => panic!("stub cannot pass"),
        }
    }
    assert_eq!(e.call_count(), 0);
}

#[test]
fn mlsp_with_perfect_classifiers_never_wastes_saturation_calls() {
    // Replay a fixed candidate stream through the plain gate and the
    // ML-screened gate; the perfect classifier must spend at most as many
    // evaluator calls while admitting exactly the same candidates.
    let p = tsmcoa_problem();
    let model = TsmcoaEvaluator::default();
    let oracle = OraclePredictor { model: &model };

    let plain = counted(TsmcoaEvaluator::default());
    let screened = counted(TsmcoaEvaluator::default());
    let pts = lhs_sample(400, &p.bounds, 11).unwrap();

    let mut admitted_plain = Vec::new();
    let mut admitted_screened = Vec::new();
    for i in 0..pts.rows() {
        let x = DesignVector::new(pts.row(i).to_vec()).unwrap();
        if let Gate::Passed { .. } = feasibility_check(&x, GateMode::Mga, None, &plain, &p) {
            admitted_plain.push(i);
        }
        if let Gate::Passed { .. } =
            feasibility_check(&x, GateMode::MgaMlsp, Some(&oracle), &screened, &p)
        {
            admitted_screened.push(i);
        }
    }
    assert_eq!(admitted_plain, admitted_screened);
    assert!(screened.call_count() <= plain.call_count());
    // The screened gate only pays for candidates that pass the saturation
    // screen.
    assert!(screened.call_count() < pts.rows() as u64);
    assert_eq!(plain.call_count(), pts.rows() as u64);
}

#[test]
fn sga_ignores_the_bundle() {
    let p = synthetic_problem();
    let e1 = counted(SyntheticEvaluator);
    let e2 = counted(SyntheticEvaluator);
    let cfg = small_cfg(GateMode::Sga, 9);
    let without = run(&p, &e1, &cfg, None).unwrap();
    let with = run(&p, &e2, &cfg, Some(&NeverSaturated)).unwrap();
    assert_eq!(without.rows, with.rows);
    assert_eq!(without.best, with.best);
}

#[test]
fn ml_mode_without_bundle_is_a_config_error() {
    let p = synthetic_problem();
    let e = counted(SyntheticEvaluator);
    let cfg = small_cfg(GateMode::MgaMlsp, 1);
    assert!(matches!(run(&p, &e, &cfg, None), Err(SizerError::Config(_))));
}

#[test]
fn init_on_unconstrained_problem_costs_exactly_n_calls() {
    let p = unconstrained_problem();
    let e = counted(SyntheticEvaluator);
    let cfg = small_cfg(GateMode::Mga, 4);
    let mut state = RunState {
        problem: &p,
        evaluator: &e,
        predictor: None,
        cfg: &cfg,
        pool: None,
        tally: RejectTally::default(),
        worst_feasible: 0.0,
        calls_at_start: 0,
    };
    let pop = init_population(&mut state);
    assert_eq!(pop.len(), cfg.population);
    assert_eq!(e.call_count(), cfg.population as u64);
    assert!(pop.iter().all(|i| !i.penalized));
}

#[test]
fn init_on_half_feasible_problem_costs_about_two_n() {
    // P(x1 + x2 >= 1) = 1/2 under uniform sampling, so the expected cost is
    // two candidates per slot.
    let p = synthetic_problem();
    let e = counted(SyntheticEvaluator);
    let cfg = GaConfig {
        population: 40,
        mode: GateMode::Mga,
        seed: 8,
        ..Default::default()
    };
    let mut state = RunState {
        problem: &p,
        evaluator: &e,
        predictor: None,
        cfg: &cfg,
        pool: None,
        tally: RejectTally::default(),
        worst_feasible: 0.0,
        calls_at_start: 0,
    };
    let pop = init_population(&mut state);
    assert!(pop.iter().all(|i| !i.penalized));
    let calls = e.call_count() as f64;
    let expected = 2.0 * cfg.population as f64;
    assert!(
        calls > expected * 0.6 && calls < expected * 1.8,
        "calls {calls} vs expected {expected}"
    );
}

#[test]
fn init_on_impossible_problem_exhausts_budget_and_proceeds() {
    let p = impossible_problem();
    let e = counted(SyntheticEvaluator);
    let cfg = GaConfig {
        population: 5,
        gen_max: 1,
        retry_budget: 20,
        mode: GateMode::Mga,
        seed: 2,
        ..Default::default()
    };
    {
        let mut state = RunState {
            problem: &p,
            evaluator: &e,
            predictor: None,
            cfg: &cfg,
            pool: None,
            tally: RejectTally::default(),
            worst_feasible: 0.0,
            calls_at_start: 0,
        };
        let pop = init_population(&mut state);
        assert_eq!(
            e.call_count(),
            (cfg.population * cfg.retry_budget) as u64,
            "every candidate of every slot must be evaluated"
        );
        assert!(pop.iter().all(|i| i.penalized));
        assert!(pop.iter().all(|i| i.violation > 0.0));
    }
    // The full run still completes.
    let e2 = counted(SyntheticEvaluator);
    let trace = run(&p, &e2, &cfg, None).unwrap();
    assert!(trace.best.penalized);
}

#[test]
fn elitism_keeps_parents_when_offspring_are_worse() {
    // A population already at the optimum cannot get worse.
    let p = synthetic_problem();
    let e = counted(SyntheticEvaluator);
    let cfg = GaConfig {
        population: 8,
        gen_max: 40,
        mode: GateMode::Mga,
        seed: 12,
        ..Default::default()
    };
    let trace = run(&p, &e, &cfg, None).unwrap();
    let feasible: Vec<f64> = trace
        .rows
        .iter()
        .filter_map(|r| r.best_feasible)
        .collect();
    for w in feasible.windows(2) {
        assert!(w[1] <= w[0] + 1e-15, "best fitness increased: {w:?}");
    }
}

#[test]
fn run_converges_on_synthetic_benchmark() {
    let p = synthetic_problem();
    let e = counted(SyntheticEvaluator);
    let cfg = GaConfig {
        population: 20,
        gen_max: 200,
        mode: GateMode::Mga,
        seed: 1,
        ..Default::default()
    };
    let trace = run(&p, &e, &cfg, None).unwrap();
    assert!(
        (trace.best.fitness - 0.5).abs() <= 1e-3,
        "best fitness {}",
        trace.best.fitness
    );
    let x = &trace.best.vector;
    assert!(x.get(0) + x.get(1) >= 1.0 - 1e-12);
}

#[test]
fn same_seed_gives_identical_trace_bytes() {
    let p = synthetic_problem();
    let cfg = small_cfg(GateMode::Mga, 77);
    let e1 = counted(SyntheticEvaluator);
    let e2 = counted(SyntheticEvaluator);
    let a = run(&p, &e1, &cfg, None).unwrap();
    let b = run(&p, &e2, &cfg, None).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.best, b.best);
}

#[test]
fn worker_count_does_not_change_the_trace() {
    let p = synthetic_problem();
    let mut cfg = small_cfg(GateMode::Mga, 31);
    let e1 = counted(SyntheticEvaluator);
    let a = run(&p, &e1, &cfg, None).unwrap();
    cfg.workers = 4;
    let e4 = counted(SyntheticEvaluator);
    let b = run(&p, &e4, &cfg, None).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.final_population, b.final_population);
}

#[test]
fn trace_call_accounting_matches_counter() {
    let p = synthetic_problem();
    let e = counted(SyntheticEvaluator);
    let cfg = small_cfg(GateMode::Mga, 6);
    let trace = run(&p, &e, &cfg, None).unwrap();
    assert_eq!(trace.total_calls, e.call_count());
    assert_eq!(trace.rows.last().unwrap().cum_calls, e.call_count());
    // Cumulative counts never decrease.
    for w in trace.rows.windows(2) {
        assert!(w[1].cum_calls >= w[0].cum_calls);
    }
}

#[test]
fn oracle_gate_spends_exactly_one_call_per_admission() {
    // With predictors wired to the evaluator's own outputs, every candidate
    // that reaches the evaluator passes, so the call count equals the
    // number of gate-passing candidates: no wasted calls.
    let p = synthetic_problem();
    let model = SyntheticEvaluator;
    let oracle = OraclePredictor { model: &model };
    let e = counted(SyntheticEvaluator);
    let cfg = GaConfig {
        population: 10,
        gen_max: 10,
        mode: GateMode::MgaMlscp,
        seed: 3,
        ..Default::default()
    };
    let trace = run(&p, &e, &cfg, Some(&oracle)).unwrap();
    // Admissions: N at init plus 3N per generation, with no budget
    // exhaustion anywhere (verified by the penalty flags).
    assert!(trace.final_population.iter().all(|i| !i.penalized));
    assert_eq!(trace.rejects.spice_total(), 0, "no call may be wasted");
    let admissions = (cfg.population + 3 * cfg.population * cfg.gen_max) as u64;
    assert_eq!(e.call_count(), admissions);
}

#[test]
fn bounds_respected_by_every_evaluated_candidate() {
    // Wrap the evaluator to record every x it sees.
    use std::sync::Mutex;
    struct Recording {
        inner: SyntheticEvaluator,
        seen: Mutex<Vec<DesignVector>>,
    }
    impl Evaluate for Recording {
        fn evaluate_point(&self, x: &DesignVector) -> EvaluationResult {
            self.seen.lock().unwrap().push(x.clone());
            self.inner.evaluate_point(x)
        }
    }
    let p = synthetic_problem();
    let rec = counted(Recording {
        inner: SyntheticEvaluator,
        seen: Mutex::new(Vec::new()),
    });
    let cfg = small_cfg(GateMode::Mga, 14);
    run(&p, &rec, &cfg, None).unwrap();
    for x in rec.inner().seen.lock().unwrap().iter() {
        assert!(p.bounds.contains(x), "candidate escaped bounds: {x:?}");
    }
}

#[test]
fn trace_csv_header_is_stable() {
    let p = synthetic_problem();
    let e = counted(SyntheticEvaluator);
    let cfg = GaConfig {
        population: 4,
        gen_max: 1,
        mode: GateMode::Sga,
        seed: 0,
        ..Default::default()
    };
    let trace = run(&p, &e, &cfg, None).unwrap();
    let csv = trace.to_csv();
    assert!(csv.starts_with(
        "generation,best_fitness,mean_fitness,cum_calls,cum_reject_classifier,cum_reject_regressor,cum_reject_spice\n"
    ));
    assert_eq!(csv.lines().count(), 1 + 2, "header plus init plus one step");
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        // Mutation output always stays within bounds.
        #[test]
        fn mutate_respects_bounds(
            seed in 0u64..500,
            alpha in 0.01f64..1.0,
            base in prop::collection::vec(0.0f64..1.0, 3),
        ) {
            let bounds = Bounds::new(vec![0.0; 3], vec![1.0; 3]).unwrap();
            let x = DesignVector::new(base).unwrap();
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let m = mutate(&x, alpha, &bounds, &mut rng);
            prop_assert!(bounds.contains(&m));
        }

        // Crossover output is a splice: each gene comes from one parent.
        #[test]
        fn crossover_is_a_splice(
            a in prop::collection::vec(-5.0f64..5.0, 4),
            b in prop::collection::vec(-5.0f64..5.0, 4),
            point in 1usize..4,
        ) {
            let pa = DesignVector::new(a.clone()).unwrap();
            let pb = DesignVector::new(b.clone()).unwrap();
            let c = crossover(&pa, &pb, point);
            for i in 0..4 {
                if i < point {
                    prop_assert_eq!(c.get(i), a[i]);
                } else {
                    prop_assert_eq!(c.get(i), b[i]);
                }
            }
        }
    }
}
