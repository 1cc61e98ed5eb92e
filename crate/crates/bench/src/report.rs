//! Report files: criteria tables, significance matrices, rank sums, raw
//! scores and the run configuration. Every CSV re-parses to the exact
//! values it was written from.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use holoqa::stats::criteria::CRITERIA;
use holoqa::stats::{write_mos, CriteriaRow, RankRow, RankSums, SignificanceMatrix};

use crate::error::{io_err, BenchError, Result};
use crate::track::{DisplayTable, EvalReport};

/// Shortest representation that parses back to the same `f64`.
pub fn format_f64(v: f64) -> String {
    let a = v.abs();
    if v.is_finite() && a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn parse_f64(path: &Path, s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| BenchError::Parse {
        path: path.to_path_buf(),
        message: format!("{s:?} is not a number"),
    })
}

fn csv_error(path: &Path) -> impl Fn(csv::Error) -> BenchError + '_ {
    move |e| BenchError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(io_err(path))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(io_err(path))?;
    Ok(csv::Reader::from_reader(file))
}

fn write_rows<I, R>(path: &Path, rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = writer(path)?;
    for row in rows {
        w.write_record(row).map_err(csv_error(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn read_rows(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = reader(path)?;
    let header = r.headers().map_err(csv_error(path))?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_error(path))?;
    Ok((header, rows))
}

pub const CRITERIA_HEADER: [&str; 11] = [
    "metric",
    "SROCC",
    "KRCC",
    "PCC_NoFit",
    "PCC_Fitted",
    "RMSE",
    "OutlierRatio",
    "SROCC_signed",
    "KRCC_signed",
    "PCC_NoFit_signed",
    "fit_converged",
];

fn criteria_record(r: &CriteriaRow) -> Vec<String> {
    let mut rec = vec![r.metric.clone()];
    rec.extend(r.values().iter().map(|v| format_f64(*v)));
    rec.extend([r.srocc_signed, r.krcc_signed, r.pcc_nofit_signed].iter().map(|v| format_f64(*v)));
    rec.push(r.fit_converged.to_string());
    rec
}

pub fn read_criteria(path: &Path) -> Result<Vec<CriteriaRow>> {
    let (header, rows) = read_rows(path)?;
    if header != CRITERIA_HEADER {
        return Err(BenchError::Parse {
            path: path.to_path_buf(),
            message: format!("unexpected header {}", header.join(",")),
        });
    }
    rows.iter()
        .map(|r| {
            let v = |i: usize| parse_f64(path, &r[i]);
            Ok(CriteriaRow {
                metric: r[0].clone(),
                srocc: v(1)?,
                krcc: v(2)?,
                pcc_nofit: v(3)?,
                pcc_fitted: v(4)?,
                rmse: v(5)?,
                outlier_ratio: v(6)?,
                srocc_signed: v(7)?,
                krcc_signed: v(8)?,
                pcc_nofit_signed: v(9)?,
                fit_converged: r[10] == "true",
            })
        })
        .collect()
}

/// Human-readable criteria table with aligned columns.
pub fn criteria_text(title: &str, rows: &[CriteriaRow]) -> String {
    let width = rows.iter().map(|r| r.metric.len()).chain([6]).max().unwrap_or(6);
    let mut out = format!("{title}\n");
    let _ = write!(out, "{:<width$}", "metric");
    for c in CRITERIA {
        let _ = write!(out, " {c:>12}");
    }
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{:<width$}", r.metric);
        for v in r.values() {
            let _ = write!(out, " {v:>12.4}");
        }
        out.push('\n');
    }
    out
}

pub fn read_significance(path: &Path) -> Result<SignificanceMatrix> {
    let (header, rows) = read_rows(path)?;
    let metrics: Vec<String> = header.into_iter().skip(1).collect();
    let entries = rows
        .iter()
        .map(|r| {
            r[1..]
                .iter()
                .map(|v| {
                    v.parse::<i8>().map_err(|_| BenchError::Parse {
                        path: path.to_path_buf(),
                        message: format!("{v:?} is not -1, 0 or 1"),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(SignificanceMatrix { metrics, entries })
}

/// Label of the row holding the column totals in the rank-sum file.
pub const TOTAL_ROW: &str = "total";

pub fn read_rank_sums(path: &Path) -> Result<RankSums> {
    let (header, rows) = read_rows(path)?;
    let metrics: Vec<String> = header.into_iter().skip(2).collect();
    let mut sums = RankSums {
        metrics,
        rows: vec![],
        totals: vec![],
    };
    for r in rows {
        let scores = r[2..].iter().map(|v| parse_f64(path, v)).collect::<Result<Vec<f64>>>()?;
        if r[0] == TOTAL_ROW {
            sums.totals = scores;
        } else {
            sums.rows.push(RankRow {
                table: r[0].clone(),
                criterion: r[1].clone(),
                scores,
            });
        }
    }
    Ok(sums)
}

pub const RAW_HEADER: [&str; 8] = ["level", "unit", "stimulus_id", "reference_id", "codec", "rate", "view", "focal_index"];

/// One line of the raw-score file: either a rendered view / aperture
/// (`sample`) or a correlation unit (`unit`).
#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    pub level: String,
    pub unit: String,
    pub stimulus_id: String,
    pub view: String,
    pub focal_index: Option<usize>,
    pub scores: Vec<f64>,
}

pub fn read_raw_scores(path: &Path) -> Result<(Vec<String>, Vec<RawRow>)> {
    let (header, rows) = read_rows(path)?;
    let metrics: Vec<String> = header.into_iter().skip(RAW_HEADER.len()).collect();
    let parsed = rows
        .iter()
        .map(|r| {
            Ok(RawRow {
                level: r[0].clone(),
                unit: r[1].clone(),
                stimulus_id: r[2].clone(),
                view: r[6].clone(),
                focal_index: r[7].parse().ok(),
                scores: r[RAW_HEADER.len()..].iter().map(|v| parse_f64(path, v)).collect::<Result<_>>()?,
            })
        })
        .collect::<Result<_>>()?;
    Ok((metrics, parsed))
}

fn prefix(report: &EvalReport) -> String {
    report.config.track.to_string()
}

fn emit_table(report: &EvalReport, table: &DisplayTable, dir: &Path, files: &mut Vec<PathBuf>) -> Result<()> {
    let stem = format!("{}_{}", prefix(report), table.display.file_token());
    let criteria = dir.join(format!("{stem}_criteria.csv"));
    write_rows(
        &criteria,
        std::iter::once(CRITERIA_HEADER.iter().map(|s| s.to_string()).collect())
            .chain(table.rows.iter().map(criteria_record)),
    )?;
    files.push(criteria);

    let text = dir.join(format!("{stem}_criteria.txt"));
    let title = format!("{} / {} ({} units)", report.config.track, table.display, table.mos.len());
    fs::write(&text, criteria_text(&title, &table.rows)).map_err(io_err(&text))?;
    files.push(text);

    let sig = dir.join(format!("{stem}_significance.csv"));
    let m = &table.significance;
    write_rows(
        &sig,
        std::iter::once(std::iter::once("metric".to_string()).chain(m.metrics.iter().cloned()).collect::<Vec<_>>()).chain(
            m.metrics
                .iter()
                .zip(&m.entries)
                .map(|(name, row)| std::iter::once(name.clone()).chain(row.iter().map(i8::to_string)).collect()),
        ),
    )?;
    files.push(sig);

    let mos = dir.join(format!("{stem}_mos.csv"));
    let file = File::create(&mos).map_err(io_err(&mos))?;
    write_mos(BufWriter::new(file), &table.mos)?;
    files.push(mos);
    Ok(())
}

/// Writes every report file into `dir` and returns their paths in writing
/// order. File names depend only on the track and the displays.
pub fn emit_report(report: &EvalReport, dir: &Path) -> Result<Vec<PathBuf>> {
    if report.config.metrics.is_empty() {
        return Err(BenchError::Config("the metric list is empty; nothing to report".into()));
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut files = Vec::new();
    for table in &report.tables {
        emit_table(report, table, dir, &mut files)?;
    }

    let ranks = dir.join(format!("{}_ranksums.csv", prefix(report)));
    let sums = &report.rank_sums;
    let header: Vec<String> = ["table", "criterion"].iter().map(|s| s.to_string()).chain(sums.metrics.iter().cloned()).collect();
    let body = sums.rows.iter().map(|r| {
        [r.table.clone(), r.criterion.clone()]
            .into_iter()
            .chain(r.scores.iter().map(|v| format_f64(*v)))
            .collect::<Vec<_>>()
    });
    let totals = [TOTAL_ROW.to_string(), String::new()]
        .into_iter()
        .chain(sums.totals.iter().map(|v| format_f64(*v)))
        .collect::<Vec<_>>();
    write_rows(&ranks, std::iter::once(header).chain(body).chain(std::iter::once(totals)))?;
    files.push(ranks);

    let raw = dir.join(format!("{}_raw_scores.csv", prefix(report)));
    let header: Vec<String> = RAW_HEADER.iter().map(|s| s.to_string()).chain(report.config.metric_names()).collect();
    let samples = report.samples.iter().map(|s| {
        let unit = if report.config.track.renders() {
            s.stimulus_id.clone()
        } else {
            format!("{}@{}", s.stimulus_id, s.view)
        };
        [
            "sample".to_string(),
            unit,
            s.stimulus_id.clone(),
            s.reference_id.clone(),
            s.codec.clone(),
            s.rate.clone(),
            s.view.clone(),
            s.focal_index.map(|k| k.to_string()).unwrap_or_default(),
        ]
        .into_iter()
        .chain(s.scores.iter().map(|v| format_f64(*v)))
        .collect::<Vec<_>>()
    });
    let units = report.units.iter().map(|u| {
        let sample = report.samples.iter().find(|s| s.stimulus_id == u.stimulus_id).expect("unit has samples");
        [
            "unit".to_string(),
            u.unit.clone(),
            u.stimulus_id.clone(),
            sample.reference_id.clone(),
            sample.codec.clone(),
            sample.rate.clone(),
            u.view.clone().unwrap_or_else(|| "all".into()),
            String::new(),
        ]
        .into_iter()
        .chain(u.scores.iter().map(|v| format_f64(*v)))
        .collect::<Vec<_>>()
    });
    write_rows(&raw, std::iter::once(header).chain(samples).chain(units))?;
    files.push(raw);

    let config = dir.join(format!("{}_config.json", prefix(report)));
    let doc = serde_json::json!({
        "config": report.config.to_json(),
        "displays": report.tables.iter().map(|t| t.display.to_string()).collect::<Vec<_>>(),
        "exclusions": report.exclusions,
        "failures": report.failures,
    });
    let text = serde_json::to_string_pretty(&doc).expect("config echo serializes");
    fs::write(&config, text + "\n").map_err(io_err(&config))?;
    files.push(config);
    Ok(files)
}
