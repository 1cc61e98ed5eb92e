//! Rank statistics against brute-force definitions, logistic recovery,
//! outlier counting, significance testing and rank aggregation.

use holoqa::stats::criteria::{outlier_ratio_of, CRITERIA};
use holoqa::stats::significance::ALPHA;
use holoqa::stats::{
    evaluate_metric, fit_logistic4, krcc, rank_aggregate, read_mos, significance_matrix, srocc, write_mos, CriteriaRow,
    Display, LogisticFit, MosRecord, ResidualSet, StatsError, TTest,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Mid-rank by definition: one plus the number of smaller values plus half
/// the number of other equal values.
fn brute_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|x| {
            let less = v.iter().filter(|y| *y < x).count() as f64;
            let equal = v.iter().filter(|y| *y == x).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}

fn brute_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Kendall tau-b from sign products over all ordered pairs.
fn brute_kendall(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let sign = |v: f64| (v > 0.0) as i64 - (v < 0.0) as i64;
    let (mut s, mut tx, mut ty) = (0i64, 0i64, 0i64);
    for i in 0..n {
        for j in 0..n {
            if i < j {
                let (a, b) = (sign(x[i] - x[j]), sign(y[i] - y[j]));
                s += a * b;
                tx += a * a;
                ty += b * b;
            }
        }
    }
    s as f64 / ((tx * ty) as f64).sqrt()
}

#[test]
fn rank_statistics_match_brute_force_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut checked = 0;
    for case in 0..200 {
        let n = rng.random_range(3..=12);
        let ties = case % 2 == 0;
        let draw = |rng: &mut ChaCha8Rng| -> f64 {
            if ties {
                f64::from(rng.random_range(0..4u8))
            } else {
                rng.random_range(-10.0..10.0)
            }
        };
        let x: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
        let y: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
        let constant = |v: &[f64]| v.iter().all(|a| *a == v[0]);
        if constant(&x) || constant(&y) {
            assert!(matches!(srocc(&x, &y), Err(StatsError::DegenerateRanks)));
            assert!(matches!(krcc(&x, &y), Err(StatsError::DegenerateRanks)));
            continue;
        }
        let s = srocc(&x, &y).unwrap();
        let k = krcc(&x, &y).unwrap();
        let s_ref = brute_pearson(&brute_ranks(&x), &brute_ranks(&y));
        assert!((s - s_ref).abs() < 1e-12, "case {case}: {s} vs {s_ref}");
        assert!((k - brute_kendall(&x, &y)).abs() < 1e-12, "case {case}");
        checked += 1;
    }
    assert!(checked > 180);
}

fn logistic(b: [f64; 4], x: f64) -> f64 {
    b[0] + (b[1] - b[0]) / (1.0 + (-(x - b[2]) / b[3].abs()).exp())
}

#[test]
fn noiseless_logistic_parameters_are_recovered() {
    for truth in [[1.0, 5.0, 0.5, 0.1], [4.5, 1.2, 30.0, 6.0], [0.0, 100.0, -2.0, 0.7]] {
        let lo = truth[2] - 4.0 * truth[3];
        let xs: Vec<f64> = (0..40).map(|i| lo + 8.0 * truth[3] * i as f64 / 39.0).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| logistic(truth, x)).collect();
        let fit = fit_logistic4(&xs, &ys).unwrap();
        let got = [fit.beta1, fit.beta2, fit.beta3, fit.beta4];
        for (g, t) in got.iter().zip(truth) {
            let rel = (g - t).abs() / t.abs().max(1e-3);
            assert!(rel < 0.01, "{got:?} vs {truth:?}");
        }
    }
}

fn record(id: usize, mos: f64) -> MosRecord {
    MosRecord {
        stimulus_id: format!("s{id}"),
        display: Display::Opt,
        view: "center".into(),
        focal_index: 0,
        mos,
        std: 0.5,
        n: 16,
    }
}

#[test]
fn decreasing_relation_gives_decreasing_fit() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let xs: Vec<f64> = (0..30).map(|i| i as f64 * 0.5).collect();
    let records: Vec<MosRecord> = xs
        .iter()
        .enumerate()
        .map(|(i, x)| record(i, 5.0 - 4.0 / (1.0 + (-(x - 7.0)).exp()) + rng.random_range(-0.1..0.1)))
        .collect();
    let e = evaluate_metric("mse", true, &xs, &records).unwrap();
    let p = &e.predictions;
    assert!(p.windows(2).all(|w| w[1] <= w[0]));
    assert!(e.row.pcc_fitted > 0.9);
    assert!(e.row.srocc > 0.9 && e.row.srocc_signed < -0.9);
}

#[test]
fn ten_point_case_with_three_outliers() {
    // Half width 1.96 * std / sqrt(n) = 0.98 around each MOS.
    let records: Vec<MosRecord> = (0..10)
        .map(|i| MosRecord {
            std: 1.0,
            n: 4,
            ..record(i, i as f64)
        })
        .collect();
    let mut predictions: Vec<f64> = (0..10).map(|i| i as f64).collect();
    predictions[2] += 1.5;
    predictions[5] -= 2.0;
    predictions[9] += 0.99;
    predictions[7] += 0.97;
    assert_eq!(outlier_ratio_of(&predictions, &records), 0.3);
    let identity = LogisticFit::from_betas(-1e6, 1e6, 0.0, 5e5);
    assert!((identity.predict(3.25) - 3.25).abs() < 1e-3);
}

fn residuals(name: &str, v: Vec<f64>) -> ResidualSet {
    ResidualSet {
        metric: name.into(),
        stimuli: (0..v.len()).map(|i| format!("s{i}")).collect(),
        abs_residuals: v,
    }
}

#[test]
fn shifted_residuals_decide_the_sign() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let base: Vec<f64> = (0..24).map(|_| rng.random_range(0.0..1.0)).collect();
    let worse: Vec<f64> = base.iter().map(|v| v + 0.8 + rng.random_range(0.0..0.05)).collect();
    for test in [TTest::Paired, TTest::Unpaired] {
        let m = significance_matrix(&[residuals("good", base.clone()), residuals("bad", worse.clone())], test, ALPHA).unwrap();
        assert_eq!(m.entries, vec![vec![0, 1], vec![-1, 0]]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn significance_is_antisymmetric(seed in any::<u64>(), metrics in 2usize..7, n in 3usize..20, paired in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sets: Vec<ResidualSet> = (0..metrics)
            .map(|m| {
                let shift = rng.random_range(0.0..1.0);
                residuals(&format!("m{m}"), (0..n).map(|_| shift + rng.random_range(0.0..1.0)).collect())
            })
            .collect();
        let test = if paired { TTest::Paired } else { TTest::Unpaired };
        let m = significance_matrix(&sets, test, ALPHA).unwrap();
        prop_assert!(m.is_antisymmetric());
        for i in 0..metrics {
            prop_assert_eq!(m.entries[i][i], 0);
            for j in 0..metrics {
                prop_assert!(m.entries[i][j].abs() <= 1);
            }
        }
    }

    #[test]
    fn rank_sums_satisfy_the_checksum(seed in any::<u64>(), n in 1usize..19, tables in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut value = || match rng.random_range(0..10) {
            0 => f64::NAN,
            1..=3 => 0.5,
            _ => rng.random_range(0.0..1.0),
        };
        let labelled: Vec<(String, Vec<CriteriaRow>)> = (0..tables)
            .map(|t| {
                let rows = (0..n)
                    .map(|m| CriteriaRow {
                        srocc: value(),
                        krcc: value(),
                        pcc_nofit: value(),
                        pcc_fitted: value(),
                        rmse: value(),
                        outlier_ratio: value(),
                        ..CriteriaRow::undefined(&format!("m{m}"))
                    })
                    .collect();
                (format!("t{t}"), rows)
            })
            .collect();
        let sums = rank_aggregate(&labelled).unwrap();
        let per_row = (n * (n + 1)) as f64 / 2.0;
        prop_assert_eq!(sums.rows.len(), tables * CRITERIA.len());
        for r in &sums.rows {
            prop_assert_eq!(r.scores.iter().sum::<f64>(), per_row);
        }
        prop_assert_eq!(sums.totals.iter().sum::<f64>(), (tables * CRITERIA.len()) as f64 * per_row);
    }
}

#[test]
fn mos_csv_round_trips() {
    let records: Vec<MosRecord> = (0..5)
        .map(|i| MosRecord {
            display: Display::ALL[i % 3],
            focal_index: i % 2,
            mos: 1.0 + i as f64 * 0.731,
            std: 0.1 + 0.01 * i as f64,
            ..record(i, 0.0)
        })
        .collect();
    let mut buf = Vec::new();
    write_mos(&mut buf, &records).unwrap();
    assert_eq!(read_mos(buf.as_slice()).unwrap(), records);
    assert!(read_mos("stimulus,mos\nx,1\n".as_bytes()).is_err());
}
