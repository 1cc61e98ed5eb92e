//! Pairwise significance of metric residual differences.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{Result, StatsError};

pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TTest {
    /// Residuals paired by stimulus; `n - 1` degrees of freedom.
    Paired,
    /// Pooled-variance two-sample test; `2n - 2` degrees of freedom.
    Unpaired,
}

/// Absolute fitted residuals of one metric, keyed by stimulus.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSet {
    pub metric: String,
    pub stimuli: Vec<String>,
    pub abs_residuals: Vec<f64>,
}

/// Entry `(i, j)` is +1 when metric `i` has significantly smaller residuals
/// than metric `j`, -1 when significantly larger, 0 otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceMatrix {
    pub metrics: Vec<String>,
    pub entries: Vec<Vec<i8>>,
}

impl SignificanceMatrix {
    pub fn is_antisymmetric(&self) -> bool {
        let n = self.metrics.len();
        (0..n).all(|i| self.entries[i][i] == 0 && (0..n).all(|j| self.entries[i][j] == -self.entries[j][i]))
    }
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, var)
}

/// Signed outcome for one ordered pair: sign of "a better than b".
fn compare(a: &[f64], b: &[f64], test: TTest, alpha: f64) -> i8 {
    let n = a.len();
    let (diff_mean, se, dof) = match test {
        TTest::Paired => {
            let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
            let (m, var) = mean_var(&d);
            (m, (var / n as f64).sqrt(), (n - 1) as f64)
        }
        TTest::Unpaired => {
            let (ma, va) = mean_var(a);
            let (mb, vb) = mean_var(b);
            let pooled = (va + vb) / 2.0;
            (ma - mb, (pooled * 2.0 / n as f64).sqrt(), (2 * n - 2) as f64)
        }
    };
    // Undefined residuals (a metric that could not be evaluated) never win.
    if diff_mean == 0.0 || !diff_mean.is_finite() {
        return 0;
    }
    let better = if diff_mean < 0.0 { 1 } else { -1 };
    if se == 0.0 {
        return better;
    }
    let t = diff_mean / se;
    let dist = StudentsT::new(0.0, 1.0, dof).expect("positive degrees of freedom");
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    if p < alpha {
        better
    } else {
        0
    }
}

pub fn significance_matrix(sets: &[ResidualSet], test: TTest, alpha: f64) -> Result<SignificanceMatrix> {
    if let Some(first) = sets.first() {
        if first.stimuli.len() < 2 {
            return Err(StatsError::TooFewSamples {
                needed: 2,
                got: first.stimuli.len(),
            });
        }
        for s in sets {
            if s.stimuli != first.stimuli || s.abs_residuals.len() != s.stimuli.len() {
                return Err(StatsError::StimulusMismatch(s.metric.clone()));
            }
        }
    }
    let n = sets.len();
    let mut entries = vec![vec![0i8; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let e = compare(&sets[i].abs_residuals, &sets[j].abs_residuals, test, alpha);
            entries[i][j] = e;
            entries[j][i] = -e;
        }
    }
    Ok(SignificanceMatrix {
        metrics: sets.iter().map(|s| s.metric.clone()).collect(),
        entries,
    })
}
