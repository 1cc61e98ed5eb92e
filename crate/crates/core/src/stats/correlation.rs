//! Linear and rank correlation coefficients.

use super::rank::mid_ranks;
use super::{Result, StatsError};

const MIN_LEN: usize = 3;

fn check(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < MIN_LEN {
        return Err(StatsError::TooFewSamples {
            needed: MIN_LEN,
            got: x.len(),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample (Pearson) correlation.
pub fn pcc(x: &[f64], y: &[f64]) -> Result<f64> {
    check(x, y)?;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::DegenerateInput("constant vector has no correlation".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman correlation: Pearson correlation of mid-ranks.
pub fn srocc(x: &[f64], y: &[f64]) -> Result<f64> {
    check(x, y)?;
    let (rx, ry) = (mid_ranks(x), mid_ranks(y));
    pcc(&rx, &ry).map_err(|_| StatsError::DegenerateRanks)
}

/// Kendall tau-b with tie correction, by pair counting.
pub fn krcc(x: &[f64], y: &[f64]) -> Result<f64> {
    check(x, y)?;
    let n = x.len();
    let (mut concordant, mut discordant) = (0i64, 0i64);
    let (mut tied_x, mut tied_y) = (0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 && dy == 0.0 {
                tied_x += 1;
                tied_y += 1;
            } else if dx == 0.0 {
                tied_x += 1;
            } else if dy == 0.0 {
                tied_y += 1;
            } else if (dx > 0.0) == (dy > 0.0) {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as i64;
    let (nx, ny) = (pairs - tied_x, pairs - tied_y);
    if nx == 0 || ny == 0 {
        return Err(StatsError::DegenerateRanks);
    }
    Ok((concordant - discordant) as f64 / ((nx as f64) * (ny as f64)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_reversed() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [10.0, 20.0, 30.0, 40.0];
        assert_eq!(srocc(&x, &y).unwrap(), 1.0);
        let r: Vec<f64> = y.iter().rev().cloned().collect();
        assert_eq!(srocc(&x, &r).unwrap(), -1.0);
        assert_eq!(krcc(&x, &y).unwrap(), 1.0);
        assert_eq!(krcc(&x, &r).unwrap(), -1.0);
    }

    #[test]
    fn kendall_three_pairs() {
        assert!((krcc(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn pearson_affine() {
        let x = [0.3, 1.2, 2.0, 5.5, 7.1];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert!((pcc(&x, &y).unwrap() - 1.0).abs() < 1e-15);
        let z: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pcc(&x, &z).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(matches!(srocc(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(StatsError::DegenerateRanks)));
        assert!(matches!(krcc(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(StatsError::DegenerateRanks)));
        assert!(matches!(pcc(&[1.0, 2.0], &[1.0, 2.0]), Err(StatsError::TooFewSamples { .. })));
        assert!(matches!(pcc(&[1.0, 2.0, 3.0], &[1.0, 2.0]), Err(StatsError::LengthMismatch { .. })));
        assert!(matches!(pcc(&[1.0, f64::NAN, 3.0], &[1.0, 2.0, 3.0]), Err(StatsError::NonFinite)));
    }
}
