//! The three built-in circuit sizing problems plus a synthetic benchmark
//! used by tests and smoke runs.

use super::*;

/// Temperature corners at which the bandgap reference is checked.
pub const BGR_CONTEXTS: [&str; 2] = ["-40c", "125c"];
/// Input common-mode corners at which the two-stage op-amp is checked.
pub const TSMCOA_CONTEXTS: [&str; 2] = ["icmr_min", "icmr_max"];

/// Bandgap reference: minimise |TC| subject to PSRR, reference-voltage
/// variation, power, area, noise, geometry, and saturation at both
/// temperature corners. Eight decision variables.
pub fn bgr_problem() -> ProblemSpec {
    let um = 1e-6;
    let nm = 1e-9;
    ProblemSpec {
        name: "bgr".into(),
        variables: vec![
            VariableSpec::width("w_12", &["m1", "m2"]),
            VariableSpec::width("w_34", &["m3", "m4"]),
            VariableSpec::width("w_5", &["m5"]),
            VariableSpec {
                name: "r_1".into(),
                role: VariableRole::Resistance,
            },
            VariableSpec {
                name: "r_2".into(),
                role: VariableRole::Resistance,
            },
            VariableSpec::length("l_12", &["m1", "m2"]),
            VariableSpec::length("l_34", &["m3", "m4"]),
            VariableSpec::length("l_5", &["m5"]),
        ],
        bounds: Bounds::new(
            vec![180.0 * nm, 180.0 * nm, 180.0 * nm, 500.0, 1e3, 180.0 * nm, 180.0 * nm, 180.0 * nm],
            vec![50.0 * um, 50.0 * um, 50.0 * um, 5e3, 150e3, 1.0 * um, 1.0 * um, 1.0 * um],
        )
        .expect("static bounds"),
        objective: Objective::Minimize {
            metric: metric::TC.into(),
            absolute: true,
        },
        constraints: vec![
            ConstraintSpec::new(metric::PSRR, Comparator::Ge, 15.0),
            ConstraintSpec::new(metric::DELTA_VREF, Comparator::Le, 5e-3),
            ConstraintSpec::new(metric::POWER, Comparator::Le, 600e-6),
            ConstraintSpec::new(metric::AREA, Comparator::Le, 500e-12),
            ConstraintSpec::new(metric::NOISE, Comparator::Le, 2e-6),
        ],
        saturation_contexts: BGR_CONTEXTS.iter().map(|c| Some(c.to_string())).collect(),
        transistors: vec!["m1".into(), "m2".into(), "m3".into(), "m4".into(), "m5".into()],
        fixed_length: None,
        geometry: GeometryRules {
            aspect_ratio: Some((1.0, 100.0)),
            length_range: Some((180.0 * nm, 5.0 * um)),
        },
    }
}

/// Folded cascode op-amp: minimise gate area subject to gain, power, slew
/// rate, bandwidth, phase margin, geometry, and saturation of all thirteen
/// transistors. Seven decision variables; no built-in analytic evaluator,
/// so it runs through the external simulator adapter.
pub fn fcoa_problem() -> ProblemSpec {
    let nm = 1e-9;
    let um = 1e-6;
    // 4/3 <= W/L <= 300 with L = 180 nm pins the width range.
    let w_lo = 240.0 * nm;
    let w_hi = 54.0 * um;
    ProblemSpec {
        name: "fcoa".into(),
        variables: vec![
            VariableSpec::width("w_12", &["m1", "m2"]),
            VariableSpec::width("w_34bp", &["m3", "m4", "mbp"]),
            VariableSpec::width("w_bn5", &["mbn", "m5"]),
            VariableSpec::width("w_67", &["m6", "m7"]),
            VariableSpec::width("w_89", &["m8", "m9"]),
            VariableSpec::width("w_1011", &["m10", "m11"]),
            VariableSpec {
                name: "i_bias".into(),
                role: VariableRole::Current,
            },
        ],
        bounds: Bounds::new(
            vec![w_lo, w_lo, w_lo, w_lo, w_lo, w_lo, 1e-6],
            vec![w_hi, w_hi, w_hi, w_hi, w_hi, w_hi, 1e-3],
        )
        .expect("static bounds"),
        objective: Objective::Minimize {
            metric: metric::AREA.into(),
            absolute: false,
        },
        constraints: vec![
            ConstraintSpec::new(metric::GAIN, Comparator::Ge, 40.0),
            ConstraintSpec::new(metric::POWER, Comparator::Le, 5e-3),
            ConstraintSpec::new(metric::SLEW_RATE, Comparator::Ge, 20e6),
            ConstraintSpec::new(metric::UGB, Comparator::Ge, 40e6),
            ConstraintSpec::new(metric::PHASE_MARGIN, Comparator::Ge, 60.0),
        ],
        saturation_contexts: vec![None],
        transistors: [
            "m1", "m2", "m3", "m4", "mbp", "mbn", "m5", "m6", "m7", "m8", "m9", "m10", "m11",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect(),
        fixed_length: Some(180.0 * nm),
        geometry: GeometryRules {
            aspect_ratio: Some((4.0 / 3.0, 300.0)),
            length_range: None,
        },
    }
}

/// Two-stage Miller compensated op-amp: minimise gate area subject to the
/// full specification set at both ends of the 0.6..1.0 V input common-mode
/// range. Six decision variables.
pub fn tsmcoa_problem() -> ProblemSpec {
    let nm = 1e-9;
    let um = 1e-6;
    // 2 <= W/L <= 200 with L = 60 nm pins the width range.
    let w_lo = 120.0 * nm;
    let w_hi = 12.0 * um;
    let mut constraints = vec![ConstraintSpec::new(metric::POWER, Comparator::Le, 400e-6)];
    for ctx in TSMCOA_CONTEXTS {
        constraints.extend([
            ConstraintSpec::at(metric::GAIN, Comparator::Ge, 20.0, ctx),
            ConstraintSpec::at(metric::F3DB, Comparator::Ge, 10e6, ctx),
            ConstraintSpec::at(metric::UGB, Comparator::Ge, 100e6, ctx),
            ConstraintSpec::at(metric::PHASE_MARGIN, Comparator::Ge, 60.0, ctx),
            ConstraintSpec::at(metric::SLEW_RATE, Comparator::Ge, 100e6, ctx),
            ConstraintSpec::at(metric::NOISE, Comparator::Le, 60e-9, ctx),
        ]);
    }
    ProblemSpec {
        name: "tsmcoa".into(),
        variables: vec![
            VariableSpec::width("w_12", &["m1", "m2"]),
            VariableSpec::width("w_34", &["m3", "m4"]),
            VariableSpec::width("w_58", &["m5", "m8"]),
            VariableSpec::width("w_6", &["m6"]),
            VariableSpec::width("w_7", &["m7"]),
            VariableSpec {
                name: "i_bias".into(),
                role: VariableRole::Current,
            },
        ],
        bounds: Bounds::new(
            vec![w_lo, w_lo, w_lo, w_lo, w_lo, 1e-6],
            vec![w_hi, w_hi, w_hi, w_hi, w_hi, 100e-6],
        )
        .expect("static bounds"),
        objective: Objective::Minimize {
            metric: metric::AREA.into(),
            absolute: false,
        },
        constraints,
        saturation_contexts: TSMCOA_CONTEXTS.iter().map(|c| Some(c.to_string())).collect(),
        transistors: (1..=8).map(|i| format!("m{i}")).collect(),
        fixed_length: Some(60.0 * nm),
        geometry: GeometryRules {
            aspect_ratio: Some((2.0, 200.0)),
            length_range: None,
        },
    }
}

/// Constrained quadratic benchmark: minimise Σx² subject to x₁ + x₂ ≥ 1 on
/// the unit square. The optimum is 0.5 at (0.5, 0.5).
pub fn synthetic_problem() -> ProblemSpec {
    ProblemSpec {
        name: "synthetic".into(),
        variables: vec![VariableSpec::plain("x1"), VariableSpec::plain("x2")],
        bounds: Bounds::new(vec![0.0, 0.0], vec![1.0, 1.0]).expect("static bounds"),
        objective: Objective::Minimize {
            metric: "sum_sq".into(),
            absolute: false,
        },
        constraints: vec![ConstraintSpec::new("sum", Comparator::Ge, 1.0)],
        saturation_contexts: vec![],
        transistors: vec![],
        fixed_length: None,
        geometry: GeometryRules::default(),
    }
}

/// The three published problem formulations, in presentation order.
pub fn builtin_problems() -> Vec<ProblemSpec> {
    vec![bgr_problem(), fcoa_problem(), tsmcoa_problem()]
}

/// Look up any built-in problem (including the synthetic benchmark) by name.
pub fn problem_by_name(name: &str) -> Option<ProblemSpec> {
    match name {
        "bgr" => Some(bgr_problem()),
        "fcoa" => Some(fcoa_problem()),
        "tsmcoa" => Some(tsmcoa_problem()),
        "synthetic" => Some(synthetic_problem()),
        _ => None,
    }
}
