//! Reconstruction quality and per-timestep report files.

use std::io::Write;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("truth has length {truth}, estimate has length {estimate}")]
    LengthMismatch { truth: usize, estimate: usize },
    #[error("stress is undefined for an all-zero truth vector")]
    ZeroNorm,
    #[error("no reports to summarize")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub const REPORT_HEADER: &str = "time_s,stress,method,rows,rank,L,uncoverable,mean_payload_bits";

/// `Σ(x_i − x̂_i)² / Σ x_i²`.
pub fn stress(truth: &[f64], estimate: &[f64]) -> Result<f64, MetricsError> {
    if truth.len() != estimate.len() {
        return Err(MetricsError::LengthMismatch {
            truth: truth.len(),
            estimate: estimate.len(),
        });
    }
    let energy: f64 = truth.iter().map(|x| x * x).sum();
    if energy == 0.0 {
        return Err(MetricsError::ZeroNorm);
    }
    let error: f64 = truth.iter().zip(estimate).map(|(x, e)| (x - e) * (x - e)).sum();
    Ok(error / energy)
}

/// One reconstructed timestep. `rounds`, `uncoverable` and
/// `mean_payload_bits` are 0 where no routing took place.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub time: f64,
    pub stress: f64,
    pub method: String,
    pub rows: usize,
    pub rank: usize,
    pub rounds: usize,
    pub uncoverable: usize,
    pub mean_payload_bits: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub steps: usize,
    pub mean_stress: f64,
    pub max_stress: f64,
    pub max_stress_time: f64,
    pub min_stress: f64,
    /// Share of steps solved directly (full-rank sink system).
    pub determined_fraction: f64,
    pub min_rows: usize,
    pub mean_rows: f64,
}

pub fn summarize(reports: &[StepReport]) -> Result<Summary, MetricsError> {
    let first = reports.first().ok_or(MetricsError::Empty)?;
    let steps = reports.len();
    let mut max = first;
    for r in reports {
        if r.stress > max.stress {
            max = r;
        }
    }
    Ok(Summary {
        steps,
        mean_stress: reports.iter().map(|r| r.stress).sum::<f64>() / steps as f64,
        max_stress: max.stress,
        max_stress_time: max.time,
        min_stress: reports.iter().map(|r| r.stress).fold(f64::INFINITY, f64::min),
        determined_fraction: reports.iter().filter(|r| r.method == "determined").count() as f64 / steps as f64,
        min_rows: reports.iter().map(|r| r.rows).min().unwrap_or(0),
        mean_rows: reports.iter().map(|r| r.rows).sum::<usize>() as f64 / steps as f64,
    })
}

/// Writes a report: `#! key=value` lines carrying the resolved run
/// configuration, the CSV table, then a `#` summary block.
pub fn write_report<W: Write>(
    mut out: W,
    config: &[(String, String)],
    reports: &[StepReport],
) -> Result<Summary, MetricsError> {
    let summary = summarize(reports)?;
    for (k, v) in config {
        writeln!(out, "#! {k}={v}")?;
    }
    writeln!(out, "{REPORT_HEADER}")?;
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.time, r.stress, r.method, r.rows, r.rank, r.rounds, r.uncoverable, r.mean_payload_bits
        )?;
    }
    writeln!(out, "# summary")?;
    writeln!(out, "# steps={}", summary.steps)?;
    writeln!(out, "# mean_stress={}", summary.mean_stress)?;
    writeln!(out, "# max_stress={}", summary.max_stress)?;
    writeln!(out, "# max_stress_time_s={}", summary.max_stress_time)?;
    writeln!(out, "# min_stress={}", summary.min_stress)?;
    writeln!(out, "# determined_fraction={}", summary.determined_fraction)?;
    writeln!(out, "# min_rows={}", summary.min_rows)?;
    writeln!(out, "# mean_rows={}", summary.mean_rows)?;
    out.flush()?;
    Ok(summary)
}
