//! CSV writers. Floats use Rust's shortest round-trip formatting, so equal
//! reports serialize to equal bytes.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::experiment::{normalized_samples, CoverageRow, ExperimentReport, StatisticSample};

#[derive(Serialize)]
struct ReportRecord<'a> {
    estimator: &'a str,
    k: Option<usize>,
    delta: f64,
    mean_alpha: f64,
    rmse: f64,
    excluded: usize,
}

#[derive(Serialize)]
struct CoverageRecord<'a> {
    estimator: &'a str,
    k: usize,
    delta: f64,
    coverage: f64,
}

#[derive(Serialize)]
struct SampleRecord<'a> {
    estimator: &'a str,
    k: usize,
    delta: f64,
    stream_id: u64,
    statistic: f64,
}

fn writer<W: Write>(w: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(header)?;
    Ok(out)
}

pub fn write_report_csv<W: Write>(report: &ExperimentReport, w: W) -> Result<()> {
    let mut out = writer(w, &["estimator", "k", "delta", "mean_alpha", "rmse", "excluded"])?;
    for r in &report.rows {
        out.serialize(ReportRecord {
            estimator: &r.estimator,
            k: r.k,
            delta: r.delta,
            mean_alpha: r.mean_alpha,
            rmse: r.rmse,
            excluded: r.excluded,
        })?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_coverage_csv<W: Write>(rows: &[CoverageRow], w: W) -> Result<()> {
    let mut out = writer(w, &["estimator", "k", "delta", "coverage"])?;
    for r in rows {
        out.serialize(CoverageRecord {
            estimator: &r.estimator,
            k: r.k,
            delta: r.delta,
            coverage: r.coverage,
        })?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_samples_csv<W: Write>(samples: &[StatisticSample], w: W) -> Result<()> {
    let mut out = writer(w, &["estimator", "k", "delta", "stream_id", "statistic"])?;
    for s in samples {
        out.serialize(SampleRecord {
            estimator: &s.estimator,
            k: s.k,
            delta: s.delta,
            stream_id: s.stream_id,
            statistic: s.statistic,
        })?;
    }
    out.flush()?;
    Ok(())
}

/// Runs the replicates and writes one statistic per (estimator, delta, stream).
pub fn export_normalized_samples(config: &ExperimentConfig, path: &Path, workers: Option<usize>) -> Result<Vec<StatisticSample>> {
    let samples = normalized_samples(config, workers)?;
    write_samples_csv(&samples, File::create(path)?)?;
    Ok(samples)
}
