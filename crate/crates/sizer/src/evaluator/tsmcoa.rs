//! First-order square-law model of the two-stage Miller compensated op-amp.
//!
//! The device constants below are representative of a generic short-channel
//! CMOS class and are versioned with the crate; every number derived from
//! them is model-relative, not a statement about any foundry process.
//!
//! Design vector layout: `[w_12, w_34, w_58, w_6, w_7, i_bias]`, all widths
//! in meters, bias current in amperes, with a shared channel length.
//!
//! Stage topology: NMOS input pair M1/M2 biased by tail source M5 (mirrored
//! 1:1 from diode device M8 carrying `i_bias`), PMOS mirror load M3 (diode)
//! and M4, PMOS common-source second stage M6 loaded by NMOS sink M7
//! (mirrored from M8 with ratio `w_7 / w_58`).

use serde::{Deserialize, Serialize};

use crate::problem::{metric, DesignVector, EvalFailure, EvaluationResult};

use super::Evaluate;

/// Boltzmann constant (J/K).
const K_BOLTZMANN: f64 = 1.380649e-23;

/// Square-law device constants plus the fixed operating conditions of the
/// two-stage amplifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalyticDeviceParams {
    /// NMOS process transconductance µCox (A/V²).
    pub mu_cox_n: f64,
    /// PMOS process transconductance µCox (A/V²).
    pub mu_cox_p: f64,
    /// NMOS threshold voltage (V).
    pub vth_n: f64,
    /// PMOS threshold voltage magnitude (V).
    pub vth_p: f64,
    /// NMOS channel-length modulation (1/V).
    pub lambda_n: f64,
    /// PMOS channel-length modulation (1/V).
    pub lambda_p: f64,
    /// Supply voltage (V).
    pub vdd: f64,
    /// Load capacitance (F).
    pub cl: f64,
    /// Miller compensation capacitance (F); 0.3·CL by default.
    pub cc: f64,
    /// Shared channel length (m).
    pub channel_length: f64,
    /// Input common-mode corners (V) at which every metric is reported.
    pub icmr: (f64, f64),
    /// Temperature for thermal noise (K).
    pub temperature: f64,
}

impl Default for AnalyticDeviceParams {
    fn default() -> Self {
        let cl = 200e-15;
        AnalyticDeviceParams {
            mu_cox_n: 400e-6,
            mu_cox_p: 200e-6,
            vth_n: 0.38,
            vth_p: 0.33,
            lambda_n: 2.0,
            lambda_p: 2.0,
            vdd: 1.1,
            cl,
            cc: 0.3 * cl,
            channel_length: 60e-9,
            icmr: (0.6, 1.0),
            temperature: 300.0,
        }
    }
}

impl AnalyticDeviceParams {
    pub fn context_name(&self, corner: usize) -> &'static str {
        if corner == 0 {
            "icmr_min"
        } else {
            "icmr_max"
        }
    }
}

/// Analytic evaluator for the two-stage Miller compensated op-amp.
#[derive(Debug, Clone, Default)]
pub struct TsmcoaEvaluator {
    pub params: AnalyticDeviceParams,
}

impl TsmcoaEvaluator {
    pub fn new(params: AnalyticDeviceParams) -> Self {
        TsmcoaEvaluator { params }
    }
}

struct Operating {
    gm1: f64,
    gm3: f64,
    gm6: f64,
    vov: [f64; 8], // indexed m1..m8
    id5: f64,
    id7: f64,
    av_lin: f64,
}

impl TsmcoaEvaluator {
    /// Currents, transconductances, and overdrives; corner-independent under
    /// this model. Fails when the device equations have no real solution.
    fn operating_point(&self, x: &DesignVector) -> Result<Operating, String> {
        let p = &self.params;
        let l = p.channel_length;
        let [w12, w34, w58, w6, w7, ibias]: [f64; 6] = x
            .values()
            .try_into()
            .map_err(|_| format!("expected 6 entries, got {}", x.dim()))?;
        for (name, v) in [
            ("w_12", w12),
            ("w_34", w34),
            ("w_58", w58),
            ("w_6", w6),
            ("w_7", w7),
            ("i_bias", ibias),
        ] {
            if !(v > 0.0) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }

        // Mirror ratios from the bias branch: M5 copies i_bias 1:1 (shared
        // width with M8), M7 scales it by w_7/w_58.
        let id5 = ibias;
        let id1 = 0.5 * id5;
        let id7 = ibias * w7 / w58;

        let ovn = |w: f64, id: f64| overdrive(2.0 * id / (p.mu_cox_n * (w / l)));
        let ovp = |w: f64, id: f64| overdrive(2.0 * id / (p.mu_cox_p * (w / l)));
        let vov1 = ovn(w12, id1)?;
        let vov3 = ovp(w34, id1)?;
        let vov5 = ovn(w58, id5)?;
        let vov6 = ovp(w6, id7)?;
        let vov7 = ovn(w7, id7)?;
        let vov8 = ovn(w58, ibias)?;

        let gm1 = 2.0 * id1 / vov1;
        let gm3 = 2.0 * id1 / vov3;
        let gm6 = 2.0 * id7 / vov6;

        let ro2 = 1.0 / (p.lambda_n * id1);
        let ro4 = 1.0 / (p.lambda_p * id1);
        let ro6 = 1.0 / (p.lambda_p * id7);
        let ro7 = 1.0 / (p.lambda_n * id7);
        let av_lin = gm1 * parallel(ro2, ro4) * gm6 * parallel(ro6, ro7);

        Ok(Operating {
            gm1,
            gm3,
            gm6,
            vov: [vov1, vov1, vov3, vov3, vov5, vov6, vov7, vov8],
            id5,
            id7,
            av_lin,
        })
    }

    /// Saturation flags at one input common-mode level, by propagating node
    /// voltages through the bias chain. The test is V_DS >= V_GS - V_th with
    /// zero margin.
    fn saturation_at(&self, op: &Operating, vicm: f64) -> [bool; 8] {
        let p = &self.params;
        let [vov1, _, vov3, vov4, vov5, vov6, vov7, vov8] = op.vov;

        let v_tail = vicm - p.vth_n - vov1;
        let v_d1 = p.vdd - p.vth_p - vov3; // diode node of the M3/M4 mirror
        let v_out1 = p.vdd - p.vth_p - vov6; // set by M6's gate-source drop
        let v_out2 = 0.5 * p.vdd; // midrail convention for the output node

        let m1 = v_d1 - v_tail >= vov1;
        let m2 = v_out1 - v_tail >= vov1;
        let m3 = true; // diode connected
        let m4 = (p.vdd - v_out1) >= vov4;
        let m5 = v_tail >= vov5;
        let m6 = (p.vdd - v_out2) >= vov6;
        let m7 = v_out2 >= vov7;
        let m8 = true; // diode connected
        let _ = vov8;
        [m1, m2, m3, m4, m5, m6, m7, m8]
    }
}

impl Evaluate for TsmcoaEvaluator {
    fn evaluate_point(&self, x: &DesignVector) -> EvaluationResult {
        let p = &self.params;
        let op = match self.operating_point(x) {
            Ok(op) => op,
            Err(message) => {
                return EvaluationResult::failed(EvalFailure::Unrealizable { message })
            }
        };

        let mut r = EvaluationResult::default();
        let two_pi = std::f64::consts::TAU;
        let ugb = op.gm1 / (two_pi * p.cc);
        let sr = op.id5 / p.cc;
        let f_p2 = op.gm6 / (two_pi * p.cl);
        let pm = 90.0 - (ugb / f_p2).atan().to_degrees();
        let av_db = 20.0 * op.av_lin.log10();
        let f3db = ugb / op.av_lin;
        let kt = K_BOLTZMANN * p.temperature;
        let sn = (16.0 * kt / (3.0 * op.gm1) * (1.0 + op.gm3 / op.gm1)).sqrt();

        for (corner, vicm) in [p.icmr.0, p.icmr.1].into_iter().enumerate() {
            let ctx = Some(p.context_name(corner));
            r.set_metric(metric::GAIN, ctx, av_db);
            r.set_metric(metric::UGB, ctx, ugb);
            r.set_metric(metric::F3DB, ctx, f3db);
            r.set_metric(metric::PHASE_MARGIN, ctx, pm);
            r.set_metric(metric::SLEW_RATE, ctx, sr);
            r.set_metric(metric::NOISE, ctx, sn);
            for (i, sat) in self.saturation_at(&op, vicm).into_iter().enumerate() {
                r.set_saturation(&format!("m{}", i + 1), ctx, sat);
            }
        }

        let ibias = x.get(5);
        r.set_metric(metric::POWER, None, p.vdd * (ibias + op.id5 + op.id7));
        let l = p.channel_length;
        let area = l * (2.0 * x.get(0) + 2.0 * x.get(1) + 2.0 * x.get(2) + x.get(3) + x.get(4));
        r.set_metric(metric::AREA, None, area);
        r
    }
}

fn parallel(a: f64, b: f64) -> f64 {
    a * b / (a + b)
}

fn overdrive(operand: f64) -> Result<f64, String> {
    if operand < 0.0 {
        return Err(format!("negative square-root operand {operand}"));
    }
    let v = operand.sqrt();
    if !(v > 0.0) {
        return Err("zero overdrive voltage".into());
    }
    Ok(v)
}
