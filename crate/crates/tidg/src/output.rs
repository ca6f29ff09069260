//! CSV and JSON artifacts. Every file is written to a temporary sibling and
//! renamed into place, so readers never observe a partial file.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tidg_core::analysis::convergence_rates;
use tidg_core::bench::{SkippedCell, TipDisplacementRecord};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const SWEEP_HEADER: [&str; 12] =
    ["benchmark", "method", "p", "angle", "nu", "level", "h", "ndof", "tip_uy", "dg_err", "h1_rel_err", "rate"];
pub const ERROR_HEADER: [&str; 10] = ["method", "p", "angle", "level", "h", "ndof", "dg_err", "h1_rel_err", "l2_err", "rate_h1"];
pub const SKIPPED_HEADER: [&str; 5] = ["method", "p", "angle", "level", "reason"];

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Shortest decimal that round-trips; `.` as separator regardless of locale.
fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn same_curve(a: &TipDisplacementRecord, b: &TipDisplacementRecord) -> bool {
    a.benchmark == b.benchmark && a.method == b.method && a.p == b.p && a.angle == b.angle && a.nu == b.nu
}

/// H¹ rate of each record against the record one level coarser on the same
/// curve, when both carry an error.
pub fn level_rates(records: &[TipDisplacementRecord]) -> Vec<Option<f64>> {
    records
        .iter()
        .map(|r| {
            let e = r.h1_rel_err?;
            let coarser = records.iter().find(|s| same_curve(s, r) && s.level + 1 == r.level)?;
            let e0 = coarser.h1_rel_err?;
            convergence_rates(&[(coarser.h, e0), (r.h, e)]).ok()?.first().copied()
        })
        .collect()
}

fn finish(writer: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    writer.into_inner().map_err(|e| CliError::Encode(e.to_string()))
}

pub fn sweep_csv(records: &[TipDisplacementRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_HEADER)?;
    for (r, rate) in records.iter().zip(level_rates(records)) {
        w.write_record([
            r.benchmark.name().to_string(),
            r.method.clone(),
            num(r.p),
            num(r.angle),
            num(r.nu),
            r.level.to_string(),
            num(r.h),
            r.ndof.to_string(),
            num(r.tip_uy),
            opt(r.dg_err),
            opt(r.h1_rel_err),
            opt(rate),
        ])?;
    }
    finish(w)
}

/// Convergence tables of the records that carry errors, one block of rows per
/// (method, p, angle) curve in first-appearance order.
pub fn error_report_csv(records: &[TipDisplacementRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(ERROR_HEADER)?;
    let rates = level_rates(records);
    let mut done = vec![false; records.len()];
    for i in 0..records.len() {
        if done[i] || records[i].h1_rel_err.is_none() {
            continue;
        }
        let mut curve: Vec<usize> = (i..records.len()).filter(|&j| same_curve(&records[i], &records[j])).collect();
        curve.sort_by_key(|&j| records[j].level);
        for j in curve {
            done[j] = true;
            let r = &records[j];
            w.write_record([
                r.method.clone(),
                num(r.p),
                num(r.angle),
                r.level.to_string(),
                num(r.h),
                r.ndof.to_string(),
                opt(r.dg_err),
                opt(r.h1_rel_err),
                opt(r.l2_err),
                opt(rates[j]),
            ])?;
        }
    }
    finish(w)
}

pub fn skipped_csv(skipped: &[SkippedCell]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SKIPPED_HEADER)?;
    for s in skipped {
        w.write_record([s.method.clone(), num(s.p), num(s.angle), s.level.to_string(), s.reason.to_string()])?;
    }
    finish(w)
}

#[derive(Debug, Clone, Serialize)]
pub struct CellTiming {
    pub method: String,
    pub p: f64,
    pub angle: f64,
    pub level: u32,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub cells: Vec<CellTiming>,
}

/// Provenance of a run. `config` is the fully resolved configuration, so
/// passing the manifest back through `--config` repeats the run.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub manifest_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: RunConfig,
    pub outputs: Vec<String>,
    pub records: usize,
    pub skipped: usize,
    pub timings: Timings,
}

impl Manifest {
    pub fn new(command: &str, config: RunConfig) -> Self {
        Self {
            manifest_version: 1,
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config,
            outputs: Vec::new(),
            records: 0,
            skipped: 0,
            timings: Timings { total_seconds: 0.0, cells: Vec::new() },
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Encode(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tidg_core::bench::Benchmark;

    fn record(level: u32, h: f64, err: Option<f64>) -> TipDisplacementRecord {
        TipDisplacementRecord {
            benchmark: Benchmark::Beam,
            method: "SIPG".into(),
            p: 3.0,
            angle: 0.5,
            nu: 0.3,
            level,
            h,
            ndof: 12,
            tip_point: [10.0, 1.0],
            tip_uy: -0.25,
            dg_err: err,
            h1_rel_err: err,
            l2_err: err.map(|e| e * e),
        }
    }

    #[test]
    fn rates_pair_adjacent_levels() {
        let rs = [record(1, 0.5, Some(0.2)), record(0, 1.0, Some(0.4)), record(3, 0.125, Some(0.05))];
        let rates = level_rates(&rs);
        assert_eq!(rates[1], None);
        assert!((rates[0].unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(rates[2], None);
    }

    #[test]
    fn csv_layout() {
        let rs = [record(0, 1.0, Some(0.4)), record(1, 0.5, Some(0.1))];
        let text = String::from_utf8(sweep_csv(&rs).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], SWEEP_HEADER.join(","));
        assert_eq!(lines[1], "beam,SIPG,3,0.5,0.3,0,1,12,-0.25,0.4,0.4,");
        assert_eq!(lines[2], "beam,SIPG,3,0.5,0.3,1,0.5,12,-0.25,0.1,0.1,2");
        let report = String::from_utf8(error_report_csv(&rs).unwrap()).unwrap();
        assert_eq!(report.lines().nth(2).unwrap(), "SIPG,3,0.5,1,0.5,12,0.1,0.1,0.010000000000000002,2");
    }

    #[test]
    fn cook_records_have_no_error_rows() {
        let mut r = record(0, 1.0, None);
        r.benchmark = Benchmark::Cook;
        let report = String::from_utf8(error_report_csv(&[r]).unwrap()).unwrap();
        assert_eq!(report.lines().count(), 1);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/a.csv");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }
}
