//! Grid configuration files, the parallel grid runner and its CSV outputs.
//!
//! A grid file holds `key=value` lines; `#` starts a comment:
//!
//! ```text
//! metrics=dvf-,dvf+;f-,f+
//! n_sets=1,2,1+2
//! compressions=0,0.0001
//! thresholds=0.1,0.2,0.3
//! ```

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use ftok_core::eval::{compression_levels, evaluate_group, reference_bags, GridReport, GridRow, GridSpec};
use ftok_core::{MetricPair, NGramModel, Tokenizer};

use crate::corpus::read_all_lines;
use crate::error::{Error, IoContext, Result};

pub fn render_n_set(n_set: &[usize]) -> String {
    n_set.iter().map(usize::to_string).collect::<Vec<_>>().join("+")
}

pub fn parse_n_set(s: &str) -> std::result::Result<Vec<usize>, String> {
    s.split('+')
        .map(|n| n.trim().parse::<usize>().map_err(|_| format!("invalid rank set {s:?}")))
        .collect()
}

fn parse_list<T>(value: &str, sep: char, item: impl Fn(&str) -> std::result::Result<T, String>) -> std::result::Result<Vec<T>, String> {
    value.split(sep).map(str::trim).filter(|s| !s.is_empty()).map(item).collect()
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    s.parse::<f64>().map_err(|_| format!("invalid number {s:?}"))
}

/// Parses grid file contents. All four keys are required.
pub fn parse_grid(text: &str, path: &Path) -> Result<GridSpec> {
    let mut metrics = None;
    let mut n_sets = None;
    let mut compressions = None;
    let mut thresholds = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { path: path.into(), line: i + 1, message };
        let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected key=value, got {line:?}")))?;
        let value = value.trim();
        match key.trim() {
            "metrics" => {
                metrics = Some(parse_list(value, ';', |p| p.parse::<MetricPair>().map_err(|e| e.to_string())).map_err(err)?)
            }
            "n_sets" => n_sets = Some(parse_list(value, ',', parse_n_set).map_err(err)?),
            "compressions" => compressions = Some(parse_list(value, ',', parse_f64).map_err(err)?),
            "thresholds" => thresholds = Some(parse_list(value, ',', parse_f64).map_err(err)?),
            other => return Err(err(format!("unknown key {other:?}"))),
        }
    }
    let missing = |key: &str| Error::Parse { path: path.into(), line: 0, message: format!("missing key {key:?}") };
    let grid = GridSpec {
        metric_pairs: metrics.ok_or_else(|| missing("metrics"))?,
        n_sets: n_sets.ok_or_else(|| missing("n_sets"))?,
        compressions: compressions.ok_or_else(|| missing("compressions"))?,
        thresholds: thresholds.ok_or_else(|| missing("thresholds"))?,
    };
    grid.validate()?;
    Ok(grid)
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<GridSpec> {
    let path = path.as_ref();
    let text = read_all_lines(path)?.join("\n");
    parse_grid(&text, path)
}

/// Grid search with groups evaluated on the rayon pool. Rows and missing
/// cells come in the same order as the sequential
/// [`grid_search`](ftok_core::eval::grid_search).
pub fn par_grid_search<S, R>(
    model: &NGramModel,
    texts: &[S],
    reference: &R,
    grid: &GridSpec,
    cumulative: bool,
) -> Result<GridReport>
where
    S: AsRef<str> + Sync,
    R: Tokenizer + ?Sized,
{
    grid.validate()?;
    let models = if cumulative {
        compression_levels(model, &grid.compressions, true)?
    } else {
        grid.compressions.par_iter().map(|&c| model.compress(c)).collect::<ftok_core::Result<Vec<_>>>()?
    };
    let references = reference_bags(texts, reference);
    let groups = grid.groups();
    let outcomes: Vec<_> = groups
        .par_iter()
        .map(|(ci, pair, n_set)| evaluate_group(&models[*ci], texts, &references, *pair, n_set, &grid.thresholds))
        .collect();
    let mut report = GridReport {
        params: grid.compressions.iter().zip(&models).map(|(&c, m)| (c, m.count_params())).collect(),
        ..GridReport::default()
    };
    for ((ci, pair, n_set), outcome) in groups.into_iter().zip(outcomes) {
        report.push_group(grid, grid.compressions[ci], pair, &n_set, outcome);
    }
    Ok(report)
}

pub const GRID_HEADER: [&str; 7] = ["metric", "b_metric", "f_metric", "n_set", "compression", "threshold", "mean_f1"];

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = BufWriter::new(File::create(path).at(path)?);
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file))
}

/// Writes every evaluated row.
pub fn write_grid_csv(report: &GridReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |error| Error::Csv { path: path.into(), error };
    let mut w = csv_writer(path)?;
    w.write_record(GRID_HEADER).map_err(csv_err)?;
    for row in &report.rows {
        w.write_record([
            row.metrics.label(),
            row.metrics.backward.to_string(),
            row.metrics.forward.to_string(),
            render_n_set(&row.n_set),
            row.compression.to_string(),
            row.threshold.to_string(),
            row.mean_f1.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().at(path)
}

pub fn heatmap_file_name(metrics: &MetricPair, compression: f64) -> String {
    format!("heatmap_{}_{}.csv", metrics.label(), compression)
}

/// Writes one table per (metric pair, compression): a row per rank set, a
/// column per threshold, cells with 4 decimals and empty when not evaluated.
/// Returns the written paths.
pub fn write_heatmaps(report: &GridReport, grid: &GridSpec, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let mut written = Vec::new();
    for &compression in &grid.compressions {
        for pair in &grid.metric_pairs {
            let path = dir.join(heatmap_file_name(pair, compression));
            let csv_err = |error| Error::Csv { path: path.clone(), error };
            let mut w = csv_writer(&path)?;
            let header =
                std::iter::once("n_set".to_string()).chain(grid.thresholds.iter().map(f64::to_string));
            w.write_record(header).map_err(csv_err)?;
            for n_set in &grid.n_sets {
                let mut record = vec![render_n_set(n_set)];
                for &t in &grid.thresholds {
                    let cell = report.rows.iter().find(|r| {
                        r.metrics == *pair && r.n_set == *n_set && r.compression == compression && r.threshold == t
                    });
                    record.push(cell.map(|r| format!("{:.4}", r.mean_f1)).unwrap_or_default());
                }
                w.write_record(&record).map_err(csv_err)?;
            }
            w.flush().at(&path)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// A heatmap read back from disk.
#[derive(Clone, Debug, PartialEq)]
pub struct Heatmap {
    pub thresholds: Vec<f64>,
    pub rows: Vec<(Vec<usize>, Vec<Option<f64>>)>,
}

pub fn read_heatmap(path: impl AsRef<Path>) -> Result<Heatmap> {
    let path = path.as_ref();
    let csv_err = |error| Error::Csv { path: path.into(), error };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let parse_err = |line: usize, message: String| Error::Parse { path: path.into(), line, message };
    let thresholds = r
        .headers()
        .map_err(csv_err)?
        .iter()
        .skip(1)
        .map(|t| parse_f64(t).map_err(|m| parse_err(1, m)))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let line = i + 2;
        let n_set = parse_n_set(&record[0]).map_err(|m| parse_err(line, m))?;
        let cells = record
            .iter()
            .skip(1)
            .map(|c| if c.is_empty() { Ok(None) } else { parse_f64(c).map(Some).map_err(|m| parse_err(line, m)) })
            .collect::<Result<Vec<_>>>()?;
        rows.push((n_set, cells));
    }
    Ok(Heatmap { thresholds, rows })
}

/// One-line description of a grid row.
pub fn describe_row(row: &GridRow) -> String {
    format!(
        "metrics={} n_set={} compression={} threshold={} mean_f1={:.4}",
        row.metrics,
        render_n_set(&row.n_set),
        row.compression,
        row.threshold,
        row.mean_f1
    )
}

/// Best row overall and per metric pair.
pub fn summary(report: &GridReport, grid: &GridSpec) -> String {
    let mut out = String::new();
    match report.best() {
        Some(best) => out.push_str(&format!("best: {}\n", describe_row(best))),
        None => out.push_str("best: none\n"),
    }
    if grid.metric_pairs.len() > 1 {
        for pair in &grid.metric_pairs {
            if let Some(row) = report.best_where(|r| r.metrics == *pair) {
                out.push_str(&format!("best {}: {}\n", pair.label(), describe_row(row)));
            }
        }
    }
    for (c, params) in &report.params {
        out.push_str(&format!("params at compression {c}: {params}\n"));
    }
    if !report.missing.is_empty() {
        out.push_str(&format!("missing cells: {}\n", report.missing.len()));
        let mut seen = Vec::new();
        for m in &report.missing {
            let key = (m.metrics, m.n_set.clone(), m.reason.to_string());
            if !seen.contains(&key) {
                out.push_str(&format!("  {} n_set={}: {}\n", m.metrics, render_n_set(&m.n_set), m.reason));
                seen.push(key);
            }
        }
    }
    out
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    let mut f = File::create(path).at(path)?;
    f.write_all(text.as_bytes()).at(path)
}
