use super::*;
use approx::assert_relative_eq;

#[test]
fn tc_flat_reference_is_zero() {
    assert_eq!(compute_tc(1.0, 1.0, 1.0).unwrap(), 0.0);
}

#[test]
fn tc_direct_arithmetic() {
    // (1.081 - 1.080) * 1e6 / (1.0805 * 165) = 1000 / 178.2825
    let tc = compute_tc(1.080, 1.081, 1.0805).unwrap();
    assert_relative_eq!(tc, 1000.0 / 178.2825, max_relative = 1e-15);
    assert_relative_eq!(tc, 5.609084, max_relative = 1e-6);
}

#[test]
fn tc_sign_preserved_on_swap() {
    let up = compute_tc(1.080, 1.081, 1.0805).unwrap();
    let down = compute_tc(1.081, 1.080, 1.0805).unwrap();
    assert_eq!(up, -down);
    assert!(down < 0.0);
}

#[test]
fn tc_rejects_nonpositive_nominal() {
    assert!(matches!(
        compute_tc(1.0, 1.0, 0.0),
        Err(SizerError::Domain(_))
    ));
    assert!(compute_tc(1.0, 1.0, -1.0).is_err());
}

#[test]
fn area_single_transistor() {
    let a = compute_area(&[1e-6], &[1e-6], &[1]).unwrap();
    assert_relative_eq!(a, 1e-12, max_relative = 1e-15);
}

#[test]
fn area_tsmcoa_reference_column() {
    // W: 252/815/119 nm in matched pairs plus 1122/181 nm singles, L = 60 nm.
    let nm = 1e-9;
    let a = compute_area(
        &[252.0 * nm, 815.0 * nm, 119.0 * nm, 1122.0 * nm, 181.0 * nm],
        &[60.0 * nm; 5],
        &[2, 2, 2, 1, 1],
    )
    .unwrap();
    assert_relative_eq!(a, 0.2205e-12, max_relative = 5e-4);
}

#[test]
fn area_fcoa_reference_column() {
    // Groups of 2/3/2/2/2/2 transistors, L = 180 nm.
    let nm = 1e-9;
    let a = compute_area(
        &[
            8614.0 * nm,
            3376.0 * nm,
            1177.0 * nm,
            754.0 * nm,
            374.0 * nm,
            6295.0 * nm,
        ],
        &[180.0 * nm; 6],
        &[2, 3, 2, 2, 2, 2],
    )
    .unwrap();
    assert_relative_eq!(a, 8.020e-12, max_relative = 5e-4);
}

#[test]
fn area_rejects_mismatched_lengths() {
    assert!(compute_area(&[1e-6, 2e-6], &[1e-6], &[1, 1]).is_err());
    assert!(compute_area(&[1e-6], &[1e-6], &[1, 1]).is_err());
}

#[test]
fn area_rejects_nonpositive() {
    assert!(compute_area(&[0.0], &[1e-6], &[1]).is_err());
    assert!(compute_area(&[1e-6], &[-1e-6], &[1]).is_err());
}

#[test]
fn weighted_fitness_reduces_to_components() {
    let area_only = WeightedObjective::new(1.0, 0.0).unwrap();
    let both = WeightedObjective::new(1.0, 1.0).unwrap();
    assert_eq!(weighted_fitness(3.5e-12, 1e-3, &area_only), 3.5e-12);
    assert_eq!(weighted_fitness(0.0, 1e-3, &both), 1e-3);
}

#[test]
fn weighted_objective_rejects_degenerate_weights() {
    assert!(WeightedObjective::new(0.0, 0.0).is_err());
    assert!(WeightedObjective::new(-1.0, 2.0).is_err());
}

fn toy_problem() -> ProblemSpec {
    ProblemSpec {
        name: "toy".into(),
        variables: vec![VariableSpec::plain("x")],
        bounds: Bounds::new(vec![0.0], vec![1.0]).unwrap(),
        objective: Objective::Minimize {
            metric: "obj".into(),
            absolute: false,
        },
        constraints: vec![
            ConstraintSpec::new("gain", Comparator::Ge, 10.0),
            ConstraintSpec::new("power", Comparator::Le, 1e-3),
        ],
        saturation_contexts: vec![None],
        transistors: vec!["m1".into()],
        fixed_length: None,
        geometry: GeometryRules::default(),
    }
}

#[test]
fn constraints_pass_at_exact_thresholds() {
    let p = toy_problem();
    let mut r = EvaluationResult::default();
    r.set_metric("gain", None, 10.0);
    r.set_metric("power", None, 1e-3);
    r.set_saturation("m1", None, true);
    let rep = check_constraints(&r, &p);
    assert!(rep.overall, "boundary values are inclusive");
    assert_eq!(rep.total_violation(), 0.0);
}

#[test]
fn one_false_saturation_flag_fails_overall() {
    let p = toy_problem();
    let mut r = EvaluationResult::default();
    r.set_metric("gain", None, 20.0);
    r.set_metric("power", None, 1e-4);
    r.set_saturation("m1", None, false);
    let rep = check_constraints(&r, &p);
    assert!(rep.constraints_pass);
    assert!(!rep.saturation_pass);
    assert!(!rep.overall);
}

#[test]
fn missing_metric_is_a_failure_not_a_panic() {
    let p = toy_problem();
    let mut r = EvaluationResult::default();
    r.set_metric("gain", None, 20.0);
    r.set_saturation("m1", None, true);
    let rep = check_constraints(&r, &p);
    assert!(!rep.overall);
    let power = rep
        .constraints
        .iter()
        .find(|c| c.constraint.metric == "power")
        .unwrap();
    assert!(power.value.is_none());
    assert_eq!(power.violation, 1.0);
}

#[test]
fn failed_evaluation_fails_everything() {
    let p = toy_problem();
    let r = EvaluationResult::failed(EvalFailure::Unrealizable {
        message: "sqrt of negative".into(),
    });
    let rep = check_constraints(&r, &p);
    assert!(!rep.overall);
}

#[test]
fn tsmcoa_published_optimum_row_passes_formulation() {
    // Best-solution specification row: A_v = 21.87 dB, f_3dB = 12.99 MHz,
    // UGB = 152.5 MHz, PM = 60.1 deg, SR = 264 V/us, S_n = 53.36 nV/rtHz,
    // saturation met -- checked against the full constraint set.
    let p = tsmcoa_problem();
    let mut r = EvaluationResult::default();
    for ctx in TSMCOA_CONTEXTS {
        r.set_metric(metric::GAIN, Some(ctx), 21.87);
        r.set_metric(metric::F3DB, Some(ctx), 12.99e6);
        r.set_metric(metric::UGB, Some(ctx), 152.5e6);
        r.set_metric(metric::PHASE_MARGIN, Some(ctx), 60.1);
        r.set_metric(metric::SLEW_RATE, Some(ctx), 264e6);
        r.set_metric(metric::NOISE, Some(ctx), 53.36e-9);
        for t in &p.transistors {
            r.set_saturation(t, Some(ctx), true);
        }
    }
    r.set_metric(metric::POWER, None, 88e-6);
    r.set_metric(metric::AREA, None, 0.2205e-12);
    let rep = check_constraints(&r, &p);
    assert!(rep.overall, "published optimum must satisfy the formulation");
}

#[test]
fn builtin_bgr_shape() {
    let p = bgr_problem();
    assert!(p.validate().is_ok());
    assert_eq!(p.dim(), 8);
    assert_eq!(p.transistor_count(), 5);
    assert_eq!(p.saturation_ids().len(), 10);
    // Table ranges: widths up to 50 um, R1 in [500, 5k], R2 in [1k, 150k].
    assert_eq!(p.bounds.lower()[0], 180e-9);
    assert_eq!(p.bounds.upper()[0], 50e-6);
    assert_eq!(p.bounds.lower()[3], 500.0);
    assert_eq!(p.bounds.upper()[3], 5e3);
    assert_eq!(p.bounds.lower()[4], 1e3);
    assert_eq!(p.bounds.upper()[4], 150e3);
    assert_eq!(p.bounds.upper()[5], 1e-6);
}

#[test]
fn builtin_fcoa_shape() {
    let p = fcoa_problem();
    assert!(p.validate().is_ok());
    assert_eq!(p.dim(), 7);
    assert_eq!(p.transistor_count(), 13);
    assert_eq!(p.saturation_ids().len(), 13);
    let i = p.variables.iter().position(|v| v.name == "i_bias").unwrap();
    assert_eq!(p.bounds.lower()[i], 1e-6);
    assert_eq!(p.bounds.upper()[i], 1e-3);
}

#[test]
fn builtin_tsmcoa_shape() {
    let p = tsmcoa_problem();
    assert!(p.validate().is_ok());
    assert_eq!(p.dim(), 6);
    assert_eq!(p.transistor_count(), 8);
    assert_eq!(p.saturation_ids().len(), 16);
    let i = p.variables.iter().position(|v| v.name == "i_bias").unwrap();
    assert_eq!(p.bounds.lower()[i], 1e-6);
    assert_eq!(p.bounds.upper()[i], 100e-6);
}

#[test]
fn builtin_list_order() {
    let names: Vec<String> = builtin_problems().into_iter().map(|p| p.name).collect();
    assert_eq!(names, vec!["bgr", "fcoa", "tsmcoa"]);
}

#[test]
fn bgr_area_uses_per_group_lengths() {
    let p = bgr_problem();
    // Optimum-like point: W 18.81/42.12/20.96 um, L 0.81/3.23/4.39 um.
    let um = 1e-6;
    let x = DesignVector::new(vec![
        18.81 * um,
        42.12 * um,
        20.96 * um,
        4.06e3,
        108.86e3,
        0.81 * um,
        3.23 * um,
        4.39 * um,
    ])
    .unwrap();
    let a = p.area_of(&x).unwrap().unwrap();
    // 2*18.81*0.81 + 2*42.12*3.23 + 20.96*4.39 = 394.58 um^2
    assert_relative_eq!(a, 394.58e-12, max_relative = 1e-3);
}

#[test]
fn geometry_aspect_ratio_checked_without_evaluator() {
    let p = tsmcoa_problem();
    // W/L = 11999.99/60 > 200 violates the aspect window on w_12.
    let x = DesignVector::new(vec![12e-6, 600e-9, 600e-9, 600e-9, 600e-9, 10e-6]).unwrap();
    let outcomes = p.check_geometry(&x);
    assert_eq!(outcomes.len(), 5);
    assert!(!outcomes[0].passed);
    assert!(outcomes[1].passed);
}

#[test]
fn metric_id_string_roundtrip() {
    let a = MetricId::at("av", "icmr_min");
    let s = serde_json::to_string(&a).unwrap();
    assert_eq!(s, "\"av@icmr_min\"");
    let b: MetricId = serde_json::from_str(&s).unwrap();
    assert_eq!(a, b);
    let plain: MetricId = serde_json::from_str("\"power\"").unwrap();
    assert_eq!(plain, MetricId::plain("power"));
}

#[test]
fn problem_spec_json_roundtrip() {
    for p in builtin_problems() {
        let s = serde_json::to_string_pretty(&p).unwrap();
        let q: ProblemSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }
}

#[test]
fn fitness_extraction_absolute_and_weighted() {
    let p = bgr_problem();
    let mut r = EvaluationResult::default();
    r.set_metric(metric::TC, None, -3.0);
    assert_eq!(p.fitness_of(&r), Some(3.0));

    let mut pw = tsmcoa_problem();
    pw.objective = Objective::Weighted {
        alpha: 1.0,
        beta: 2.0,
    };
    let mut r = EvaluationResult::default();
    r.set_metric(metric::AREA, None, 1e-12);
    r.set_metric(metric::POWER, None, 1e-4);
    assert_relative_eq!(pw.fitness_of(&r).unwrap(), 1e-12 + 2e-4, max_relative = 1e-15);
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        // TC is antisymmetric in its endpoint arguments and invariant under
        // a common positive scale factor.
        #[test]
        fn tc_antisymmetric_and_scale_covariant(
            a in 0.5f64..2.0, b in 0.5f64..2.0, c in 0.5f64..2.0, s in 0.1f64..10.0
        ) {
            let up = compute_tc(a, b, c).unwrap();
            let down = compute_tc(b, a, c).unwrap();
            prop_assert_eq!(up, -down);
            let scaled = compute_tc(s * a, s * b, s * c).unwrap();
            prop_assert!((scaled - up).abs() <= 1e-9 * up.abs().max(1.0));
        }

        // Doubling all widths doubles the area exactly (power-of-two scaling
        // commutes with rounding).
        #[test]
        fn area_linear_in_widths(
            ws in prop::collection::vec(1e-8f64..1e-4, 1..6),
            ls in prop::collection::vec(1e-8f64..1e-5, 6),
        ) {
            let n = ws.len();
            let ls = &ls[..n];
            let counts: Vec<usize> = (1..=n).collect();
            let a = compute_area(&ws, ls, &counts).unwrap();
            let doubled: Vec<f64> = ws.iter().map(|w| 2.0 * w).collect();
            let a2 = compute_area(&doubled, ls, &counts).unwrap();
            prop_assert_eq!(2.0 * a, a2);
        }

        // Improving any metric in its satisfying direction never flips the
        // report from pass to fail.
        #[test]
        fn check_constraints_monotone(gain in 0.0f64..30.0, power in 0.0f64..3e-3, step in 0.0f64..10.0) {
            let p = toy_problem();
            let mut r = EvaluationResult::default();
            r.set_metric("gain", None, gain);
            r.set_metric("power", None, power);
            r.set_saturation("m1", None, true);
            let before = check_constraints(&r, &p);

            let mut improved = r.clone();
            improved.set_metric("gain", None, gain + step);
            let after = check_constraints(&improved, &p);
            if before.overall {
                prop_assert!(after.overall);
            }
            prop_assert!(after.total_violation() <= before.total_violation() + 1e-12);
        }
    }
}
