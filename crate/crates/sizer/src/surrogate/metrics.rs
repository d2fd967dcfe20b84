//! Test-set quality metrics for the trained models.

/// Fraction of matching predictions.
pub fn accuracy(pred: &[bool], truth: &[bool]) -> f64 {
    assert_eq!(pred.len(), truth.len(), "accuracy: length mismatch");
    if pred.is_empty() {
        return f64::NAN;
    }
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    hits as f64 / pred.len() as f64
}

/// Coefficient of determination, 1 - SS_res / SS_tot with SS_tot taken
/// around the truth mean. When the truth is constant the score is 1.0 for a
/// perfect fit and 0.0 otherwise.
pub fn r2(pred: &[f64], truth: &[f64]) -> f64 {
    assert_eq!(pred.len(), truth.len(), "r2: length mismatch");
    if pred.is_empty() {
        return f64::NAN;
    }
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let ss_res: f64 = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (t - p) * (t - p))
        .sum();
    let ss_tot: f64 = truth.iter().map(|t| (t - mean) * (t - mean)).sum();
    if ss_tot == 0.0 {
        return if ss_res == 0.0 { 1.0 } else { 0.0 };
    }
    1.0 - ss_res / ss_tot
}

/// Mean absolute error.
pub fn mae(pred: &[f64], truth: &[f64]) -> f64 {
    assert_eq!(pred.len(), truth.len(), "mae: length mismatch");
    if pred.is_empty() {
        return f64::NAN;
    }
    pred.iter()
        .zip(truth)
        .map(|(p, t)| (p - t).abs())
        .sum::<f64>()
        / pred.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn accuracy_trivials() {
        let t = [true, false, true, false];
        assert_eq!(accuracy(&t, &t), 1.0);
        let inv: Vec<bool> = t.iter().map(|b| !b).collect();
        assert_eq!(accuracy(&inv, &t), 0.0);
        let three = [true, false, true, true];
        assert_eq!(accuracy(&three, &t), 0.75);
    }

    #[test]
    fn r2_trivials() {
        let t = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(r2(&t, &t), 1.0);
        let mean_pred = [2.5; 4];
        assert_eq!(r2(&mean_pred, &t), 0.0);
        let bad = [4.0, 1.0, 4.0, 1.0];
        assert!(r2(&bad, &t) < 0.0);
    }

    #[test]
    fn mae_trivials() {
        let t = [1.0, 3.0];
        assert_eq!(mae(&t, &t), 0.0);
        let off: Vec<f64> = t.iter().map(|v| v + 0.5).collect();
        assert_relative_eq!(mae(&off, &t), 0.5);
        assert_eq!(mae(&[1.0, 3.0], &[2.0, 2.0]), 1.0);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // Appending one correctly-classified point never drops accuracy
            // below the old value scaled by n/(n+1).
            #[test]
            fn accuracy_monotone_under_correct_append(
                flags in prop::collection::vec((any::<bool>(), any::<bool>()), 1..50),
                extra in any::<bool>(),
            ) {
                let pred: Vec<bool> = flags.iter().map(|(p, _)| *p).collect();
                let truth: Vec<bool> = flags.iter().map(|(_, t)| *t).collect();
                let n = pred.len() as f64;
                let before = accuracy(&pred, &truth);
                let mut pred2 = pred.clone();
                let mut truth2 = truth.clone();
                pred2.push(extra);
                truth2.push(extra);
                let after = accuracy(&pred2, &truth2);
                prop_assert!(after + 1e-12 >= before * n / (n + 1.0));
            }
        }
    }
}
