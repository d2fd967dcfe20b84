//! First-order model of the bandgap reference.
//!
//! Core equations: the reference voltage is a CTAT base-emitter drop plus a
//! PTAT term scaled by the resistor ratio,
//!
//! ```text
//! V_REF(T) = V_BE(T) + (R2/R1) * V_T(T) * ln(n)
//! V_BE(T)  = V_BE0 - k_ctat * (T - T0)
//! I(T)     = V_T(T) * ln(n) / R1          (per branch)
//! ```
//!
//! so the temperature coefficient crosses zero where the PTAT slope cancels
//! `k_ctat`, making the TC objective genuinely non-trivial in `R2/R1`.
//!
//! PSRR and the output noise density are smooth calibrated surrogate
//! formulas of (W/L, I), not physics: their role is to exercise constraint
//! gating. Saturation flags come from square-law V_DS margins of the mirror
//! devices at each temperature corner.
//!
//! Design vector layout: `[w_12, w_34, w_5, r_1, r_2, l_12, l_34, l_5]`.

use serde::{Deserialize, Serialize};

use crate::problem::{compute_tc, metric, DesignVector, EvalFailure, EvaluationResult};

use super::Evaluate;

/// Boltzmann constant over electron charge (V/K).
const KB_OVER_Q: f64 = 8.617333262e-5;
/// Boltzmann constant (J/K).
const K_BOLTZMANN: f64 = 1.380649e-23;

/// Model constants for the bandgap reference. Representative of a generic
/// 1.8 V process; all derived numbers are model-relative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BgrModelParams {
    /// Supply voltage (V).
    pub vdd: f64,
    /// Base-emitter voltage at the nominal temperature (V).
    pub vbe0: f64,
    /// CTAT slope of the base-emitter voltage (V/K).
    pub k_ctat: f64,
    /// Emitter-area ratio of the diode pair.
    pub diode_ratio: f64,
    /// NMOS / PMOS process transconductance µCox (A/V²).
    pub mu_cox_n: f64,
    pub mu_cox_p: f64,
    /// Flicker-noise coefficient of the calibrated noise surrogate (V²·m²·Hz).
    pub noise_kf: f64,
    /// Frequency at which the noise density is reported (Hz).
    pub noise_freq: f64,
    /// Cold / nominal / hot corner temperatures (°C).
    pub t_cold_c: f64,
    pub t_nom_c: f64,
    pub t_hot_c: f64,
}

impl Default for BgrModelParams {
    fn default() -> Self {
        BgrModelParams {
            vdd: 1.8,
            vbe0: 0.65,
            k_ctat: 2.0e-3,
            diode_ratio: 8.0,
            mu_cox_n: 400e-6,
            mu_cox_p: 200e-6,
            noise_kf: 2e-19,
            noise_freq: 1e6,
            t_cold_c: -40.0,
            t_nom_c: 27.0,
            t_hot_c: 125.0,
        }
    }
}

impl BgrModelParams {
    fn kelvin(celsius: f64) -> f64 {
        celsius + 273.15
    }

    /// Thermal voltage kT/q at a Celsius temperature.
    fn vt(celsius: f64) -> f64 {
        KB_OVER_Q * Self::kelvin(celsius)
    }

    fn vbe(&self, celsius: f64) -> f64 {
        self.vbe0 - self.k_ctat * (Self::kelvin(celsius) - Self::kelvin(self.t_nom_c))
    }

    /// Branch current at a Celsius temperature for a given R1.
    pub fn branch_current(&self, r1: f64, celsius: f64) -> f64 {
        Self::vt(celsius) * self.diode_ratio.ln() / r1
    }

    /// Reference voltage at a Celsius temperature.
    pub fn vref(&self, r1: f64, r2: f64, celsius: f64) -> f64 {
        self.vbe(celsius) + (r2 / r1) * Self::vt(celsius) * self.diode_ratio.ln()
    }
}

/// Analytic evaluator for the bandgap reference.
#[derive(Debug, Clone, Default)]
pub struct BgrEvaluator {
    pub params: BgrModelParams,
}

impl BgrEvaluator {
    pub fn new(params: BgrModelParams) -> Self {
        BgrEvaluator { params }
    }
}

impl Evaluate for BgrEvaluator {
    fn evaluate_point(&self, x: &DesignVector) -> EvaluationResult {
        let p = &self.params;
        let v: Result<[f64; 8], _> = x.values().try_into();
        let [w12, w34, w5, r1, r2, l12, l34, l5] = match v {
            Ok(a) => a,
            Err(_) => {
                return EvaluationResult::failed(EvalFailure::Unrealizable {
                    message: format!("expected 8 entries, got {}", x.dim()),
                })
            }
        };
        if !(r1 > 0.0) {
            return EvaluationResult::failed(EvalFailure::Unrealizable {
                message: format!("r_1 must be positive, got {r1}"),
            });
        }
        for (name, val) in [
            ("w_12", w12),
            ("w_34", w34),
            ("w_5", w5),
            ("l_12", l12),
            ("l_34", l34),
            ("l_5", l5),
        ] {
            if !(val > 0.0) {
                return EvaluationResult::failed(EvalFailure::Unrealizable {
                    message: format!("{name} must be positive, got {val}"),
                });
            }
        }
        if r2 < 0.0 {
            return EvaluationResult::failed(EvalFailure::Unrealizable {
                message: format!("r_2 must be non-negative, got {r2}"),
            });
        }

        let vref_cold = p.vref(r1, r2, p.t_cold_c);
        let vref_nom = p.vref(r1, r2, p.t_nom_c);
        let vref_hot = p.vref(r1, r2, p.t_hot_c);
        let tc = match compute_tc(vref_cold, vref_hot, vref_nom) {
            Ok(tc) => tc,
            Err(e) => {
                return EvaluationResult::failed(EvalFailure::Unrealizable {
                    message: e.to_string(),
                })
            }
        };

        let i_nom = p.branch_current(r1, p.t_nom_c);
        // Three equal branches: two core branches plus the output replica.
        let power = p.vdd * 3.0 * i_nom;
        let area = 2.0 * w12 * l12 + 2.0 * w34 * l34 + w5 * l5;
        // V_REF(T) is linear in T under this model, so the extremes are the
        // span endpoints.
        let delta_vref = (vref_hot - vref_cold).abs();

        // Calibrated surrogates: supply rejection improves with the mirror
        // loop gain gm_p * R2; the noise floor is thermal plus a 1/(W*L*f)
        // flicker term of the input mirror.
        let gm_p = (2.0 * p.mu_cox_p * (w12 / l12) * i_nom).sqrt();
        let psrr = 20.0 * (1.0 + gm_p * r2).log10();
        let kt = K_BOLTZMANN * BgrModelParams::kelvin(p.t_nom_c);
        let sn =
            (16.0 * kt / (3.0 * gm_p) + p.noise_kf / (w12 * l12 * p.noise_freq)).sqrt();

        let mut r = EvaluationResult::default();
        r.set_metric(metric::TC, None, tc);
        r.set_metric(metric::DELTA_VREF, None, delta_vref);
        r.set_metric(metric::POWER, None, power);
        r.set_metric(metric::AREA, None, area);
        r.set_metric(metric::PSRR, None, psrr);
        r.set_metric(metric::NOISE, None, sn);
        r.set_metric(metric::VREF, Some("-40c"), vref_cold);
        r.set_metric(metric::VREF, Some("27c"), vref_nom);
        r.set_metric(metric::VREF, Some("125c"), vref_hot);

        for (ctx, celsius) in [("-40c", p.t_cold_c), ("125c", p.t_hot_c)] {
            let i_t = p.branch_current(r1, celsius);
            let vref_t = p.vref(r1, r2, celsius);
            let vbe_t = p.vbe(celsius);
            let vov_p = (2.0 * i_t / (p.mu_cox_p * (w12 / l12))).sqrt();
            let vov_n34 = (2.0 * i_t / (p.mu_cox_n * (w34 / l34))).sqrt();
            let vov_n5 = (2.0 * i_t / (p.mu_cox_n * (w5 / l5))).sqrt();

            // Mirror headrooms: M1 sits over the diode node, M2 over the
            // reference node, M3/M4 under the branches, M5 drives the
            // replica branch from ground.
            let m1 = p.vdd - vbe_t >= vov_p;
            let m2 = p.vdd - vref_t >= vov_p;
            let m34 = vbe_t >= vov_n34;
            let m5 = vref_t >= vov_n5;
            let ctx = Some(ctx);
            r.set_saturation("m1", ctx, m1);
            r.set_saturation("m2", ctx, m2);
            r.set_saturation("m3", ctx, m34);
            r.set_saturation("m4", ctx, m34);
            r.set_saturation("m5", ctx, m5);
        }
        r
    }
}
