//! Monotone four-parameter logistic mapping from metric scores to MOS.
//!
//! `f(x) = b1 + (b2 - b1) / (1 + exp(-(x - b3) / |b4|))`.
//!
//! The optimizer works on an equivalent parametrization that stays regular
//! when the curve flattens into a line over the data span:
//! `f = v0 + 4 s u g(t u)` with `u = x - b3`, `g(w) = tanh(w / 2) / (2 w)`,
//! `t = 1 / b4` and `s = (b2 - b1) t / 4`. At `t = 0` the curve is exactly
//! the line `v0 + s u`.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use super::{Result, StatsError};

pub const MAX_ITERATIONS: usize = 2000;
pub const TOLERANCE: f64 = 1e-10;
const MIN_LEN: usize = 5;
const SERIES_BOUND: f64 = 1e-3;

fn g(w: f64) -> f64 {
    if w.abs() < SERIES_BOUND {
        let w2 = w * w;
        0.25 - w2 / 48.0 + w2 * w2 / 480.0
    } else {
        (w / 2.0).tanh() / (2.0 * w)
    }
}

fn g_prime(w: f64) -> f64 {
    if w.abs() < SERIES_BOUND {
        -w / 24.0 + w * w * w / 120.0
    } else {
        let t = (w / 2.0).tanh();
        ((1.0 - t * t) * w - 2.0 * t) / (4.0 * w * w)
    }
}

/// Internal parameters `(v0, s, b3, t)` in normalized score units.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Internal(Vector4<f64>);

impl Internal {
    fn eval(&self, x: f64) -> f64 {
        let [v0, s, b3, t] = [self.0[0], self.0[1], self.0[2], self.0[3]];
        let u = x - b3;
        v0 + 4.0 * s * u * g(t * u)
    }

    fn gradient(&self, x: f64) -> Vector4<f64> {
        let [_, s, b3, t] = [self.0[0], self.0[1], self.0[2], self.0[3]];
        let u = x - b3;
        let w = t * u;
        let sech = 1.0 / (w / 2.0).cosh();
        Vector4::new(1.0, 4.0 * u * g(w), -s * sech * sech, 4.0 * s * u * u * g_prime(w))
    }

    fn sse(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(y).map(|(a, b)| (self.eval(*a) - b).powi(2)).sum()
    }
}

/// Fitted logistic; `predict` is monotone in `x` by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    /// `+inf` when the optimum is the straight-line limit.
    pub beta4: f64,
    pub converged: bool,
    /// Euclidean norm of the residual vector.
    pub residual_norm: f64,
    pub iterations: usize,
    /// Parametrization used for prediction (see the module docs), in
    /// original score units: `(v0, s, b3, t)`.
    internal: [f64; 4],
}

impl LogisticFit {
    pub fn predict(&self, x: f64) -> f64 {
        Internal(Vector4::from(self.internal)).eval(x)
    }

    pub fn predict_all(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.predict(x)).collect()
    }

    /// The curve with explicit `(b1, b2, b3, b4)` parameters.
    pub fn from_betas(beta1: f64, beta2: f64, beta3: f64, beta4: f64) -> Self {
        let t = 1.0 / beta4.abs();
        let s = (beta2 - beta1) * t / 4.0;
        Self {
            beta1,
            beta2,
            beta3,
            beta4: beta4.abs(),
            converged: true,
            residual_norm: 0.0,
            iterations: 0,
            internal: [(beta1 + beta2) / 2.0, s, beta3, t],
        }
    }

    fn from_internal(p: Internal, scale: f64, shift: f64, converged: bool, sse: f64, iterations: usize) -> Self {
        // Undo the score normalization x' = (x - shift) / scale.
        let [v0, s, b3, t] = [p.0[0], p.0[1], p.0[2], p.0[3]];
        let (s, b3, t) = (s / scale, shift + scale * b3, t / scale);
        let t_abs = t.abs();
        let (beta1, beta2, beta4) = if t_abs > 0.0 {
            let amplitude = 4.0 * s / t_abs;
            (v0 - amplitude / 2.0, v0 + amplitude / 2.0, 1.0 / t_abs)
        } else if s == 0.0 {
            (v0, v0, f64::INFINITY)
        } else {
            (f64::NEG_INFINITY * s.signum(), f64::INFINITY * s.signum(), f64::INFINITY)
        };
        Self {
            beta1,
            beta2,
            beta3: b3,
            beta4,
            converged,
            residual_norm: sse.sqrt(),
            iterations,
            internal: [v0, s, b3, t],
        }
    }
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn std_dev(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Levenberg-Marquardt from `start`; returns (params, sse, converged, iterations).
fn levenberg_marquardt(start: Internal, x: &[f64], y: &[f64]) -> (Internal, f64, bool, usize) {
    let mut p = start;
    let mut sse = p.sse(x, y);
    let mut lambda = 1e-3;
    for iter in 1..=MAX_ITERATIONS {
        if sse == 0.0 {
            return (p, sse, true, iter - 1);
        }
        let mut jtj = Matrix4::<f64>::zeros();
        let mut jtr = Vector4::<f64>::zeros();
        for (&xi, &yi) in x.iter().zip(y) {
            let j = p.gradient(xi);
            let r = p.eval(xi) - yi;
            jtj += j * j.transpose();
            jtr += j * r;
        }
        let mut improved = false;
        while lambda < 1e16 {
            let mut a = jtj;
            for k in 0..4 {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-jtr))) else {
                lambda *= 4.0;
                continue;
            };
            let candidate = Internal(p.0 + step);
            let new_sse = candidate.sse(x, y);
            if new_sse.is_finite() && new_sse < sse {
                let rel = (sse - new_sse) / sse;
                p = candidate;
                sse = new_sse;
                lambda = (lambda / 3.0).max(1e-12);
                improved = true;
                if rel < TOLERANCE {
                    return (p, sse, true, iter);
                }
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            // No descent direction left: a (local) minimum.
            return (p, sse, true, iter);
        }
    }
    (p, sse, false, MAX_ITERATIONS)
}

/// Least-squares logistic fit of `mos` against `scores`.
///
/// Three starts are tried and the lowest residual kept: the standard
/// initialization (b1 = min mos, b2 = max mos, b3 = median score,
/// b4 = std(scores) / 4), the same with b1 and b2 swapped, and the
/// least-squares line.
pub fn fit_logistic4(scores: &[f64], mos: &[f64]) -> Result<LogisticFit> {
    if scores.len() != mos.len() {
        return Err(StatsError::LengthMismatch {
            left: scores.len(),
            right: mos.len(),
        });
    }
    if scores.len() < MIN_LEN {
        return Err(StatsError::TooFewSamples {
            needed: MIN_LEN,
            got: scores.len(),
        });
    }
    if scores.iter().chain(mos).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let scale = std_dev(scores);
    if scale == 0.0 {
        return Err(StatsError::DegenerateInput("constant scores cannot be fitted".into()));
    }
    let shift = scores.iter().sum::<f64>() / scores.len() as f64;
    let x: Vec<f64> = scores.iter().map(|s| (s - shift) / scale).collect();

    let lo = mos.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = mos.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let b3 = (median(scores) - shift) / scale;
    let t0 = 4.0; // b4 = std / 4 in normalized units
    let v0 = (lo + hi) / 2.0;
    let standard = Internal(Vector4::new(v0, (hi - lo) * t0 / 4.0, b3, t0));
    let flipped = Internal(Vector4::new(v0, (lo - hi) * t0 / 4.0, b3, t0));
    let n = x.len() as f64;
    let my = mos.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(mos).map(|(a, b)| a * (b - my)).sum();
    let line = Internal(Vector4::new(my, sxy / sxx, 0.0, 0.0));

    let best = [standard, flipped, line]
        .into_iter()
        .map(|start| levenberg_marquardt(start, &x, mos))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("three starts");
    let (p, sse, converged, iterations) = best;
    Ok(LogisticFit::from_internal(p, scale, shift, converged, sse, iterations))
}
