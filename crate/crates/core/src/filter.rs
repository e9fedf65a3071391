//! Savitzky-Golay smoothing.
//!
//! Each output sample is the value, at that sample's position, of the
//! least-squares polynomial of degree `polyorder` fitted to a window of
//! `window` neighbouring samples. Interior samples use the centred window; the
//! first and last `window / 2` samples reuse the terminal window and evaluate
//! its polynomial off-centre, so the output has the same length as the input.
//!
//! The filter works on sample indices. Dropped rounds are not interpolated.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::trace::TagTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    /// Odd window length in samples, at least 3.
    pub window: usize,
    /// Polynomial degree, below `window`.
    pub polyorder: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            window: 21,
            polyorder: 3,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(invalid(format!(
                "filter window must be odd and at least 3, got {}",
                self.window
            )));
        }
        if self.polyorder >= self.window {
            return Err(invalid(format!(
                "polyorder {} must be below window {}",
                self.polyorder, self.window
            )));
        }
        Ok(())
    }
}

/// Precomputed smoothing weights for one [`FilterConfig`].
#[derive(Debug, Clone)]
pub struct SavitzkyGolay {
    window: usize,
    /// `window × window`, row `p` holds the weights that evaluate the fitted
    /// polynomial at window position `p`.
    weights: Vec<f64>,
}

impl SavitzkyGolay {
    pub fn new(cfg: FilterConfig) -> Result<Self> {
        cfg.validate()?;
        let w = cfg.window;
        let m = cfg.polyorder + 1;
        let half = (w / 2) as f64;

        // Vandermonde matrix on positions scaled to [-1, 1].
        let mut vander = vec![0.0; w * m];
        for k in 0..w {
            let u = (k as f64 - half) / half;
            let mut p = 1.0;
            for j in 0..m {
                vander[k * m + j] = p;
                p *= u;
            }
        }

        // Normal equations: (VᵀV) X = Vᵀ, X is m × w.
        let mut gram = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                gram[i * m + j] = (0..w).map(|k| vander[k * m + i] * vander[k * m + j]).sum();
            }
        }
        let chol = cholesky(&gram, m)?;
        let mut solved = vec![0.0; m * w];
        let mut rhs = vec![0.0; m];
        for k in 0..w {
            for j in 0..m {
                rhs[j] = vander[k * m + j];
            }
            let col = cholesky_solve(&chol, m, &rhs);
            for j in 0..m {
                solved[j * w + k] = col[j];
            }
        }

        let mut weights = vec![0.0; w * w];
        for p in 0..w {
            for k in 0..w {
                weights[p * w + k] = (0..m).map(|j| vander[p * m + j] * solved[j * w + k]).sum();
            }
        }
        Ok(Self { window: w, weights })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    fn row(&self, p: usize) -> &[f64] {
        &self.weights[p * self.window..(p + 1) * self.window]
    }

    /// Smooths `data`; fails if it is shorter than the window.
    pub fn apply(&self, data: &[f64]) -> Result<Vec<f64>> {
        let w = self.window;
        let n = data.len();
        if n < w {
            return Err(Error::InsufficientData { needed: w, got: n });
        }
        let half = w / 2;
        let dot = |row: &[f64], seg: &[f64]| row.iter().zip(seg).map(|(a, b)| a * b).sum::<f64>();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let v = if i < half {
                dot(self.row(i), &data[..w])
            } else if i + half >= n {
                dot(self.row(i + w - n), &data[n - w..])
            } else {
                dot(self.row(half), &data[i - half..=i + half])
            };
            out.push(v);
        }
        Ok(out)
    }
}

/// Smooths the phase values of `trace`, keeping rounds and timestamps.
///
/// Run this on a spliced trace: a 2π wrap inside the window would be smeared
/// into the fit.
pub fn savitzky_golay(trace: &TagTrace, cfg: &FilterConfig) -> Result<TagTrace> {
    let filter = SavitzkyGolay::new(*cfg)?;
    let smoothed = filter.apply(&trace.phases())?;
    Ok(trace.with_phases(&smoothed))
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite `n × n` matrix.
fn cholesky(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum();
            if i == j {
                let d = a[i * n + i] - s;
                if d <= 0.0 {
                    return Err(invalid("filter design matrix is not positive definite"));
                }
                l[i * n + i] = libm::sqrt(d);
            } else {
                l[i * n + j] = (a[i * n + j] - s) / l[j * n + j];
            }
        }
    }
    Ok(l)
}

fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i * n + k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k * n + i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i * n + i];
    }
    x
}
