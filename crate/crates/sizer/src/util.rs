//! Small shared utilities: a dense row-major matrix, deterministic seed
//! derivation, and basic statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SizerError};

/// Dense row-major `f64` matrix. Rows are observations, columns features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(SizerError::InvalidArgument(
                "matrix rows have unequal lengths".into(),
            ));
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    /// Empty matrix with a known column count (zero rows).
    pub fn with_cols(cols: usize) -> Self {
        Matrix {
            rows: 0,
            cols,
            data: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.cols, "row length mismatch");
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols.max(1))
    }

    /// Copy of the rows selected by `idx`, in `idx` order.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut out = Matrix::with_cols(self.cols);
        for &i in idx {
            out.push_row(self.row(i));
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }
}

/// FNV-1a over arbitrary bytes; the basis of deterministic seed derivation
/// and dataset fingerprints.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Derive a child seed from a master seed and a sequence of string tags.
///
/// Used everywhere a sub-component needs an independent RNG stream (per run,
/// per mode, per tree, per offspring slot) so that results are reproducible
/// regardless of execution order.
pub fn derive_seed(master: u64, tags: &[&str]) -> u64 {
    let mut buf = master.to_le_bytes().to_vec();
    for t in tags {
        buf.push(0x1f);
        buf.extend_from_slice(t.as_bytes());
    }
    fnv1a64(&buf)
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0.0 for fewer than 2 values.
pub fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// One-sided Mann-Whitney U test that values in `a` tend to be smaller than
/// values in `b`. Returns the normal-approximation p-value (with tie
/// correction). Suitable for the modest sample sizes used by the run
/// protocol; not meant as a general statistics routine.
pub fn mann_whitney_less(a: &[f64], b: &[f64]) -> f64 {
    let n1 = a.len() as f64;
    let n2 = b.len() as f64;
    assert!(n1 > 0.0 && n2 > 0.0, "empty sample");
    let mut all: Vec<(f64, usize)> = a
        .iter()
        .map(|&x| (x, 0))
        .chain(b.iter().map(|&x| (x, 1)))
        .collect();
    all.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());

    // Midranks with tie bookkeeping.
    let n = all.len();
    let mut ranks = vec![0.0; n];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        let r = (i + 1 + j + 1) as f64 / 2.0;
        for k in i..=j {
            ranks[k] = r;
        }
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let r1: f64 = all
        .iter()
        .zip(&ranks)
        .filter(|((_, g), _)| *g == 0)
        .map(|(_, r)| r)
        .sum();
    let u1 = r1 - n1 * (n1 + 1.0) / 2.0;
    let mu = n1 * n2 / 2.0;
    let ntot = n1 + n2;
    let sigma2 = n1 * n2 / 12.0 * ((ntot + 1.0) - tie_term / (ntot * (ntot - 1.0)));
    if sigma2 <= 0.0 {
        // All values tied; no evidence either way.
        return 0.5;
    }
    // Continuity-corrected z for the "less" alternative (small U1 is evidence).
    let z = (u1 - mu + 0.5) / sigma2.sqrt();
    normal_cdf(z)
}

/// Standard normal CDF via the Abramowitz-Stegun erf approximation.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

fn erf(x: f64) -> f64 {
    // Abramowitz & Stegun 7.1.26, |error| <= 1.5e-7.
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let y = 1.0
        - (((((1.061405429 * t - 1.453152027) * t) + 1.421413741) * t - 0.284496736) * t
            + 0.254829592)
            * t
            * (-x * x).exp();
    sign * y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_roundtrip() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(m.rows(), 2);
        assert_eq!(m.cols(), 2);
        assert_eq!(m.row(1), &[3.0, 4.0]);
        assert_eq!(m.column(0), vec![1.0, 3.0]);
        let sel = m.select_rows(&[1, 0]);
        assert_eq!(sel.row(0), &[3.0, 4.0]);
    }

    #[test]
    fn matrix_unequal_rows_rejected() {
        assert!(Matrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn derive_seed_varies_by_tag() {
        let a = derive_seed(7, &["mga", "0"]);
        let b = derive_seed(7, &["mga", "1"]);
        let c = derive_seed(8, &["mga", "0"]);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(7, &["mga", "0"]));
    }

    #[test]
    fn stats_basics() {
        assert_eq!(mean(&[1.0, 3.0]), 2.0);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!((sample_sd(&[2.0, 4.0]) - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert_eq!(sample_sd(&[5.0]), 0.0);
    }

    #[test]
    fn mann_whitney_detects_shift() {
        let a: Vec<f64> = (0..20).map(|i| i as f64 * 0.01).collect();
        let b: Vec<f64> = (0..20).map(|i| 10.0 + i as f64 * 0.01).collect();
        assert!(mann_whitney_less(&a, &b) < 1e-6);
        assert!(mann_whitney_less(&b, &a) > 0.99);
    }

    #[test]
    fn normal_cdf_sanity() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-7);
        assert!((normal_cdf(1.6448536) - 0.95).abs() < 1e-4);
    }
}
