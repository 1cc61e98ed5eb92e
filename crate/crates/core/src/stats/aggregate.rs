//! Rank-score aggregation of criteria tables.

use serde::{Deserialize, Serialize};

use super::criteria::{higher_is_better, CriteriaRow, CRITERIA};
use super::rank::mid_ranks;
use super::{Result, StatsError};

/// Rank scores of one criterion in one table, one per metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub table: String,
    pub criterion: String,
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSums {
    pub metrics: Vec<String>,
    pub rows: Vec<RankRow>,
    pub totals: Vec<f64>,
}

/// Ranks the metrics on every criterion of every table: the best metric
/// scores `n`, the worst 1, ties share the mean of their span and undefined
/// (`NaN`) values rank last. Totals are the column sums over all rows.
pub fn rank_aggregate(tables: &[(String, Vec<CriteriaRow>)]) -> Result<RankSums> {
    let Some((_, first)) = tables.first() else {
        return Ok(RankSums {
            metrics: vec![],
            rows: vec![],
            totals: vec![],
        });
    };
    let metrics: Vec<String> = first.iter().map(|r| r.metric.clone()).collect();
    for (label, table) in tables {
        let names: Vec<&String> = table.iter().map(|r| &r.metric).collect();
        if names != metrics.iter().collect::<Vec<_>>() {
            return Err(StatsError::StimulusMismatch(format!("table '{label}' lists different metrics")));
        }
    }
    let mut rows = Vec::new();
    let mut totals = vec![0.0; metrics.len()];
    for (label, table) in tables {
        for (c, name) in CRITERIA.iter().enumerate() {
            let goodness: Vec<f64> = table
                .iter()
                .map(|r| {
                    let v = r.values()[c];
                    if v.is_nan() {
                        f64::NEG_INFINITY
                    } else if higher_is_better(c) {
                        v
                    } else {
                        -v
                    }
                })
                .collect();
            let scores = mid_ranks(&goodness);
            totals.iter_mut().zip(&scores).for_each(|(t, s)| *t += s);
            rows.push(RankRow {
                table: label.clone(),
                criterion: name.to_string(),
                scores,
            });
        }
    }
    Ok(RankSums { metrics, rows, totals })
}
