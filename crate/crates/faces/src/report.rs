//! Relative-error histograms of estimation reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::HistogramConfig;
use crate::error::{Error, Result};
use crate::formats::{read_report_rows, write_json, write_text, Layout, ReportRow};
use crate::pipeline::{fraction_below, median};

/// Shot label ordering: finite counts ascending, then exact probabilities.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum ShotsKey {
    Finite(u64),
    Other(String),
}

impl ShotsKey {
    fn parse(label: &str) -> Self {
        label.parse().map_or_else(|_| ShotsKey::Other(label.to_string()), ShotsKey::Finite)
    }

    fn label(&self) -> String {
        match self {
            ShotsKey::Finite(s) => s.to_string(),
            ShotsKey::Other(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub estimate_type: String,
    pub degree: usize,
    pub shots: String,
    pub bin: usize,
    pub lower: f64,
    /// Upper edge, `inf` for the overflow bin.
    pub upper: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub estimate_type: String,
    pub degree: usize,
    pub shots: String,
    pub estimates: usize,
    pub median_rel_error: f64,
    pub fraction_below_5_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramMetadata {
    /// Finite bin edges; a final overflow bin collects errors at or above the last edge.
    pub edges: Vec<f64>,
    pub estimates: usize,
    pub median_rel_error: f64,
    pub fraction_below_5_percent: f64,
    pub partitions: Vec<PartitionSummary>,
}

fn bin_of(edges: &[f64], value: f64) -> usize {
    if value.is_nan() || value >= edges[edges.len() - 1] {
        return edges.len() - 1;
    }
    edges.partition_point(|&e| e <= value).saturating_sub(1)
}

/// Histogram of relative errors partitioned by estimate type, degree and shot count.
pub fn histogram(rows: &[ReportRow], config: &HistogramConfig) -> (Vec<HistogramRow>, HistogramMetadata) {
    let edges = config.edges();
    let mut groups: BTreeMap<(String, usize, ShotsKey), Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.estimate_type.clone(), r.degree, ShotsKey::parse(&r.shots)))
            .or_default()
            .push(r.rel_error);
    }
    let mut out = Vec::new();
    let mut partitions = Vec::with_capacity(groups.len());
    for ((estimate_type, degree, shots), errors) in &groups {
        let mut counts = vec![0usize; edges.len()];
        for &e in errors {
            counts[bin_of(&edges, e)] += 1;
        }
        for (bin, &count) in counts.iter().enumerate() {
            out.push(HistogramRow {
                estimate_type: estimate_type.clone(),
                degree: *degree,
                shots: shots.label(),
                bin,
                lower: edges[bin],
                upper: edges.get(bin + 1).map_or_else(|| "inf".to_string(), |u| u.to_string()),
                count,
            });
        }
        partitions.push(PartitionSummary {
            estimate_type: estimate_type.clone(),
            degree: *degree,
            shots: shots.label(),
            estimates: errors.len(),
            median_rel_error: median(errors),
            fraction_below_5_percent: fraction_below(errors, 0.05),
        });
    }
    let all: Vec<f64> = rows.iter().map(|r| r.rel_error).collect();
    let meta = HistogramMetadata {
        edges,
        estimates: all.len(),
        median_rel_error: median(&all),
        fraction_below_5_percent: fraction_below(&all, 0.05),
        partitions,
    };
    (out, meta)
}

pub fn summary_text(meta: &HistogramMetadata) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "estimates: {}", meta.estimates);
    let _ = writeln!(s, "median relative error: {:.6}", meta.median_rel_error);
    let _ = writeln!(
        s,
        "fraction of estimates below 5% relative error: {:.4}",
        meta.fraction_below_5_percent
    );
    for p in &meta.partitions {
        let _ = writeln!(
            s,
            "type {} degree {} shots {}: {} estimates, median {:.6}, below 5% {:.4}",
            p.estimate_type, p.degree, p.shots, p.estimates, p.median_rel_error, p.fraction_below_5_percent
        );
    }
    s
}

/// Reads `report.csv` from `out` and every directory in `merge`, and writes
/// `histogram.csv`, `histogram.json` and `summary.txt` to `out`.
pub fn report(config: &HistogramConfig, out: &Path, merge: &[PathBuf]) -> Result<HistogramMetadata> {
    let layout = Layout::new(out);
    let mut rows = read_report_rows(&layout.report_csv())?;
    for dir in merge {
        rows.extend(read_report_rows(&Layout::new(dir).report_csv())?);
    }
    let (hist, meta) = histogram(&rows, config);
    let path = layout.histogram_csv();
    let csv_err = |source| Error::Csv {
        path: path.clone(),
        source,
    };
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    if hist.is_empty() {
        w.write_record(["estimate_type", "degree", "shots", "bin", "lower", "upper", "count"])
            .map_err(csv_err)?;
    }
    for row in &hist {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    write_json(&layout.histogram_json(), &meta)?;
    write_text(&layout.summary(), &summary_text(&meta))?;
    Ok(meta)
}
