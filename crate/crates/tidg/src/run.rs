//! Orchestration of `solve` and `sweep`: cells run in parallel (or serially on
//! request), results are merged in cell order, and a single writer emits the
//! artifacts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use tidg_core::analysis::vertex_value;
use tidg_core::bench::{beam_mesh, Benchmark, BenchmarkCase, SkippedCell, SweepCell, TipDisplacementRecord};
use tidg_core::femspace::FunctionSpace;
use tidg_core::mesh::cook_mesh;
use tidg_core::tensor::{Point, Vec2};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{self, CellTiming, Manifest};

/// Result of a sweep after its artifacts were written.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub records: Vec<TipDisplacementRecord>,
    pub skipped: Vec<SkippedCell>,
    pub files: Vec<PathBuf>,
}

impl SweepOutcome {
    /// Cells that failed for a reason other than an unstable material.
    pub fn failures(&self) -> impl Iterator<Item = &SkippedCell> {
        self.skipped.iter().filter(|s| s.reason != tidg_core::Error::StabilityViolation)
    }
}

fn skipped(cell: &SweepCell, reason: tidg_core::Error) -> SkippedCell {
    SkippedCell { method: cell.method.label(), p: cell.p, angle: cell.angle, level: cell.level, reason }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

/// Runs every cell of the configured sweep and writes
/// `sweep_<benchmark>.csv`, `skipped_<benchmark>.csv`, `manifest.json` and,
/// for the beam, `errors_beam.csv`.
pub fn run_sweep(config: &RunConfig) -> Result<SweepOutcome> {
    let case = config.resolve()?;
    let start = Instant::now();
    let cells = case.cells();
    let work = |cell: &SweepCell| timed(|| case.run_cell(cell));
    let results: Vec<_> = if config.serial { cells.iter().map(work).collect() } else { cells.par_iter().map(work).collect() };

    let mut records = Vec::new();
    let mut skips = Vec::new();
    let mut manifest = Manifest::new("sweep", config.clone());
    for (cell, (result, seconds)) in cells.iter().zip(results) {
        manifest.timings.cells.push(CellTiming { method: cell.method.label(), p: cell.p, angle: cell.angle, level: cell.level, seconds });
        match result {
            Ok(r) => records.push(r),
            Err(reason) => skips.push(skipped(cell, reason)),
        }
    }

    let name = case.benchmark.name();
    let dir = &config.output_dir;
    let mut files = vec![dir.join(format!("sweep_{name}.csv")), dir.join(format!("skipped_{name}.csv"))];
    output::write_atomic(&files[0], &output::sweep_csv(&records)?)?;
    output::write_atomic(&files[1], &output::skipped_csv(&skips)?)?;
    if case.benchmark == Benchmark::Beam {
        files.push(dir.join("errors_beam.csv"));
        output::write_atomic(&files[2], &output::error_report_csv(&records)?)?;
    }
    manifest.records = records.len();
    manifest.skipped = skips.len();
    manifest.outputs = files.iter().map(|f| file_name(f)).collect();
    manifest.timings.total_seconds = start.elapsed().as_secs_f64();
    let manifest_path = dir.join("manifest.json");
    output::write_json(&manifest_path, &manifest)?;
    files.push(manifest_path);
    Ok(SweepOutcome { records, skipped: skips, files })
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub benchmark: &'static str,
    pub method: String,
    pub p: f64,
    pub angle: f64,
    pub nu: f64,
    pub level: u32,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<SolveResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    pub h: f64,
    pub ndof: usize,
    pub nnz: usize,
    pub tip_point: Point,
    pub tip_displacement: Vec2,
    pub dg_err: Option<f64>,
    pub h1_rel_err: Option<f64>,
    pub l2_err: Option<f64>,
    pub relative_residual: f64,
    pub backward_error: f64,
    pub factorization: String,
    pub refinement_steps: usize,
    pub seconds: f64,
}

/// Vertex displacements on the solve mesh. DG values at a vertex are the
/// average over the elements sharing it.
#[derive(Debug, Clone, Serialize)]
pub struct FieldDump {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub displacement: Vec<Vec2>,
}

fn single_cell(case: &BenchmarkCase) -> Result<SweepCell> {
    let cells = case.cells();
    match cells.as_slice() {
        [cell] => Ok(*cell),
        _ => Err(CliError::Config(format!("solve needs exactly one method, p, angle and level; the config describes {} cells", cells.len()))),
    }
}

fn field_dump(case: &BenchmarkCase, cell: &SweepCell, coeffs: &[f64]) -> Result<FieldDump> {
    let mesh = match case.benchmark {
        Benchmark::Cook => cook_mesh(1usize << cell.level)?,
        Benchmark::Beam => beam_mesh(cell.level)?,
    };
    let space = FunctionSpace::new(cell.method.method.space_kind(), &mesh);
    let displacement = (0..mesh.num_vertices()).map(|v| vertex_value(&space, coeffs, v)).collect();
    Ok(FieldDump { vertices: mesh.vertices.clone(), triangles: mesh.triangles.clone(), displacement })
}

/// Runs a single cell and writes `solve_<benchmark>.csv`,
/// `solve_summary.json`, `manifest.json` and optionally `field.json`.
/// An unstable material is recorded in the summary and reported as
/// [`CliError::Stability`].
pub fn run_solve(config: &RunConfig) -> Result<SolveSummary> {
    let case = config.resolve()?;
    let cell = single_cell(&case)?;
    let dir = &config.output_dir;
    let mut manifest = Manifest::new("solve", config.clone());
    let mut summary = SolveSummary {
        benchmark: case.benchmark.name(),
        method: cell.method.label(),
        p: cell.p,
        angle: cell.angle,
        nu: case.nu,
        level: cell.level,
        status: "ok",
        reason: None,
        result: None,
    };
    let summary_path = dir.join("solve_summary.json");
    let csv_path = dir.join(format!("solve_{}.csv", case.benchmark.name()));

    let (outcome, seconds) = timed(|| case.solve_cell(&cell));
    manifest.timings.total_seconds = seconds;
    manifest.timings.cells.push(CellTiming { method: cell.method.label(), p: cell.p, angle: cell.angle, level: cell.level, seconds });
    let (record, bench) = match outcome {
        Ok(v) => v,
        Err(reason) => {
            summary.status = if reason == tidg_core::Error::StabilityViolation { "skipped" } else { "failed" };
            summary.reason = Some(reason.to_string());
            let skipped_path = dir.join(format!("skipped_{}.csv", case.benchmark.name()));
            output::write_atomic(&skipped_path, &output::skipped_csv(&[skipped(&cell, reason.clone())])?)?;
            output::write_json(&summary_path, &summary)?;
            manifest.skipped = 1;
            manifest.outputs = vec![file_name(&skipped_path), file_name(&summary_path)];
            output::write_json(&dir.join("manifest.json"), &manifest)?;
            return Err(match reason {
                tidg_core::Error::StabilityViolation => CliError::Stability { p: cell.p },
                other => CliError::Numerical(other),
            });
        }
    };
    output::write_atomic(&csv_path, &output::sweep_csv(std::slice::from_ref(&record))?)?;
    let mut outputs = vec![file_name(&csv_path), file_name(&summary_path)];
    if config.dump_field {
        let path = dir.join("field.json");
        output::write_json(&path, &field_dump(&case, &cell, &bench.solve.solution)?)?;
        outputs.push(file_name(&path));
    }
    summary.result = Some(SolveResult {
        h: record.h,
        ndof: record.ndof,
        nnz: bench.solve.nnz,
        tip_point: record.tip_point,
        tip_displacement: bench.tip,
        dg_err: record.dg_err,
        h1_rel_err: record.h1_rel_err,
        l2_err: record.l2_err,
        relative_residual: bench.solve.relative_residual,
        backward_error: bench.solve.backward_error,
        factorization: format!("{:?}", bench.solve.factorization),
        refinement_steps: bench.solve.refinement_steps,
        seconds,
    });
    output::write_json(&summary_path, &summary)?;
    manifest.records = 1;
    manifest.outputs = outputs;
    output::write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(summary)
}
