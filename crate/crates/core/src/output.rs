//! Output documents: JSON reports and CSV tables with a JSON sidecar.
//!
//! Every artifact embeds the exact [`RunConfig`] that produced it plus a
//! provenance block. CSV floats use 17 significant digits so values
//! round-trip exactly.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::explorer::{Heatmap, McResult, SweepRow, ViolationStats};
use crate::params::Param;
use crate::verify::VerifyReport;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub format_version: u32,
    pub seed: u64,
    /// Unix seconds.
    pub timestamp: u64,
}

impl Provenance {
    pub fn new(seed: u64, timestamp: u64) -> Self {
        Provenance {
            version: env!("CARGO_PKG_VERSION").to_string(),
            format_version: FORMAT_VERSION,
            seed,
            timestamp,
        }
    }

    /// Timestamp from `SOURCE_DATE_EPOCH` when set (reproducible builds),
    /// else the current time.
    pub fn from_environment(seed: u64) -> Self {
        let pinned = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|v| v.trim().parse().ok());
        let timestamp = pinned.unwrap_or_else(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        Provenance::new(seed, timestamp)
    }
}

/// A JSON artifact: the input config, provenance and the payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    pub config: RunConfig,
    pub provenance: Provenance,
    pub result: T,
}

/// Sweep payload; rows are gap rows when `error` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axis: Param,
    pub rows: Vec<SweepRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub x: f64,
    pub q: Option<f64>,
    pub q_classical: Option<f64>,
    pub bound: Option<f64>,
    pub mean: Option<f64>,
    pub variance: Option<f64>,
    pub sigma: Option<f64>,
    pub rho_ul_re: Option<f64>,
    pub rho_ul_im: Option<f64>,
    pub error: Option<String>,
}

impl SweepTable {
    pub fn new(axis: Param, rows: &[SweepRow]) -> Self {
        let rows = rows
            .iter()
            .map(|r| match &r.values {
                Ok(v) => SweepRecord {
                    x: r.x,
                    q: Some(v.q),
                    q_classical: Some(v.q_classical),
                    bound: Some(v.bound),
                    mean: Some(v.mean),
                    variance: Some(v.variance),
                    sigma: Some(v.sigma),
                    rho_ul_re: Some(v.rho_ul_re),
                    rho_ul_im: Some(v.rho_ul_im),
                    error: None,
                },
                Err(e) => SweepRecord {
                    x: r.x,
                    q: None,
                    q_classical: None,
                    bound: None,
                    mean: None,
                    variance: None,
                    sigma: None,
                    rho_ul_re: None,
                    rho_ul_im: None,
                    error: Some(e.clone()),
                },
            })
            .collect();
        SweepTable { axis, rows }
    }

    pub fn gaps(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

/// Summary written next to a CSV table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CsvSummary {
    Sweep {
        axis: Param,
        columns: Vec<String>,
        rows: usize,
        gaps: usize,
    },
    Heatmap {
        columns: Vec<String>,
        epsilon_axis: Vec<f64>,
        delta_axis: Vec<f64>,
        gaps: usize,
    },
    Montecarlo {
        columns: Vec<String>,
        samples: u64,
        evaluated: u64,
        excluded: u64,
        min_driving: f64,
        q_underflow: u64,
        q_overflow: u64,
        q_classical_underflow: u64,
        q_classical_overflow: u64,
        stats: ViolationStats,
    },
    Verify {
        columns: Vec<String>,
        samples: u64,
        evaluated: u64,
        excluded: u64,
        passed: bool,
    },
}

/// 17 significant digits; empty for missing values.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

fn write_table(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 fields")
}

pub const SWEEP_COLUMNS: [&str; 9] = [
    "Q",
    "Q_cl",
    "B",
    "mean",
    "variance",
    "sigma",
    "rho_ul_re",
    "rho_ul_im",
    "error",
];

/// First column is the swept parameter, named after it.
pub fn sweep_columns(axis: Param) -> Vec<String> {
    std::iter::once(axis.to_string())
        .chain(SWEEP_COLUMNS.iter().map(|s| s.to_string()))
        .collect()
}

pub fn sweep_csv(table: &SweepTable) -> String {
    let columns = sweep_columns(table.axis);
    let header: Vec<&str> = columns.iter().map(String::as_str).collect();
    write_table(
        &header,
        table.rows.iter().map(|r| {
            vec![
                format_float(r.x),
                opt(r.q),
                opt(r.q_classical),
                opt(r.bound),
                opt(r.mean),
                opt(r.variance),
                opt(r.sigma),
                opt(r.rho_ul_re),
                opt(r.rho_ul_im),
                r.error.clone().unwrap_or_default(),
            ]
        }),
    )
}

pub const HEATMAP_COLUMNS: [&str; 7] = ["epsilon", "delta", "Q", "Q_cl", "abs_rho_ul", "im_rho_ul", "error"];

/// Long format, one line per cell, Δ outer and ε inner.
pub fn heatmap_csv(map: &Heatmap) -> String {
    write_table(
        &HEATMAP_COLUMNS,
        map.cells.iter().map(|c| {
            vec![
                format_float(c.epsilon),
                format_float(c.delta),
                opt(c.q),
                opt(c.q_classical),
                opt(c.abs_rho_ul),
                opt(c.im_rho_ul),
                c.error.clone().unwrap_or_default(),
            ]
        }),
    )
}

pub const HISTOGRAM_COLUMNS: [&str; 4] = ["bin_lo", "bin_hi", "Q_count", "Q_cl_count"];

/// Raw counts per bin; under/overflow go to the sidecar.
pub fn histogram_csv(result: &McResult) -> String {
    let edges = result.q.bin_edges();
    write_table(
        &HISTOGRAM_COLUMNS,
        (0..result.q.counts.len()).map(|k| {
            vec![
                format_float(edges[k]),
                format_float(edges[k + 1]),
                result.q.counts[k].to_string(),
                result.q_classical.counts[k].to_string(),
            ]
        }),
    )
}

pub const VERIFY_COLUMNS: [&str; 7] = [
    "check",
    "passed",
    "checked",
    "failures",
    "tolerance",
    "worst_residual",
    "error",
];

pub fn verify_csv(report: &VerifyReport) -> String {
    write_table(
        &VERIFY_COLUMNS,
        report.checks.iter().map(|c| {
            vec![
                c.check.as_str().to_string(),
                c.passed.to_string(),
                c.checked.to_string(),
                c.failures.to_string(),
                format_float(c.tolerance),
                format_float(c.worst_residual),
                c.error.clone().unwrap_or_default(),
            ]
        }),
    )
}

fn columns(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

impl CsvSummary {
    pub fn sweep(table: &SweepTable) -> Self {
        CsvSummary::Sweep {
            axis: table.axis,
            columns: sweep_columns(table.axis),
            rows: table.rows.len(),
            gaps: table.gaps(),
        }
    }

    pub fn heatmap(map: &Heatmap) -> Self {
        CsvSummary::Heatmap {
            columns: columns(&HEATMAP_COLUMNS),
            epsilon_axis: map.epsilon_axis.clone(),
            delta_axis: map.delta_axis.clone(),
            gaps: map.cells.iter().filter(|c| c.error.is_some()).count(),
        }
    }

    pub fn montecarlo(result: &McResult) -> Self {
        CsvSummary::Montecarlo {
            columns: columns(&HISTOGRAM_COLUMNS),
            samples: result.samples,
            evaluated: result.evaluated,
            excluded: result.excluded,
            min_driving: result.min_driving,
            q_underflow: result.q.underflow,
            q_overflow: result.q.overflow,
            q_classical_underflow: result.q_classical.underflow,
            q_classical_overflow: result.q_classical.overflow,
            stats: result.stats.clone(),
        }
    }

    pub fn verify(report: &VerifyReport) -> Self {
        CsvSummary::Verify {
            columns: columns(&VERIFY_COLUMNS),
            samples: report.samples,
            evaluated: report.evaluated,
            excluded: report.excluded,
            passed: report.passed,
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable document");
    s.push('\n');
    s
}
