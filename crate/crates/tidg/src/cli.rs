//! Command-line parsing and dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Overrides, RunConfig};
use crate::error::Result;
use crate::{run, verify};

const DEFAULTS: &str = "\
Defaults: nu = 0.49995, q = 1, penalties k_mu = k_alpha = k_gamma = 10 and \
k_lambda = k_beta = 100, solver tolerance 1e-10 on the normwise backward \
error, output directory ./out. Cook levels give an n x n grid with n = 2^level; \
beam levels give (10, 2)*2^level cells.";

#[derive(Debug, Parser)]
#[command(name = "tidg", version, about = "Plane-strain transversely isotropic elasticity: CG and interior penalty DG benchmarks", after_help = DEFAULTS)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one (benchmark, method, p, angle, level) cell.
    Solve {
        #[command(flatten)]
        run: RunArgs,
        /// Also write the vertex displacement field to field.json.
        #[arg(long)]
        dump_field: bool,
    },
    /// Solve the Cartesian product of methods, p values, angles and levels.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the built-in property suite and print a pass/fail table.
    Verify,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// JSON run configuration (a run manifest is accepted too).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// cook or beam.
    #[arg(long)]
    pub benchmark: Option<String>,
    /// Comma-separated method labels: CG1, CG2, NIPG, SIPG, IIPG, or a DG label with -UI.
    #[arg(long, value_delimiter = ',')]
    pub method: Option<Vec<String>>,
    /// Comma-separated fibre-to-transverse stiffness ratios.
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    /// Comma-separated fibre angles in radians or as multiples of pi (pi/3, 3pi/4).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub angle: Option<Vec<String>>,
    /// Poisson ratio used for both nu_t and nu_l [default: 0.49995].
    #[arg(long)]
    pub nu: Option<f64>,
    /// Comma-separated refinement levels.
    #[arg(long, value_delimiter = ',')]
    pub refine: Option<Vec<u32>>,
    /// Under-integrate the beta penalty of every DG method.
    #[arg(long)]
    pub underintegrate: bool,
    /// Run cells one after another instead of in parallel.
    #[arg(long)]
    pub serial: bool,
    /// Output directory [default: out].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Solver tolerance on the backward error [default: 1e-10].
    #[arg(long)]
    pub tol: Option<f64>,
}

impl RunArgs {
    /// The config file (or defaults) with the flags applied.
    pub fn config(&self, dump_field: bool) -> Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        config.apply(&Overrides {
            benchmark: self.benchmark.clone(),
            methods: self.method.clone(),
            p: self.p.clone(),
            angles: self.angle.clone(),
            nu: self.nu,
            levels: self.refine.clone(),
            underintegrate: self.underintegrate,
            serial: self.serial,
            output_dir: self.out.clone(),
            tol: self.tol,
            dump_field,
        });
        Ok(config)
    }
}

/// Runs a parsed command and returns the process exit status. Errors are
/// returned to the caller, which reports them.
pub fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Solve { run, dump_field } => {
            let summary = run::run_solve(&run.config(*dump_field)?)?;
            if let Some(r) = &summary.result {
                println!(
                    "{} {} p={} angle={} level={}: tip u_y = {:e} (ndof {}, backward error {:.1e})",
                    summary.benchmark, summary.method, summary.p, summary.angle, summary.level, r.tip_displacement[1], r.ndof, r.backward_error
                );
            }
            Ok(0)
        }
        Command::Sweep { run } => {
            let config = run.config(false)?;
            let outcome = run::run_sweep(&config)?;
            let failures = outcome.failures().count();
            println!(
                "{} cells solved, {} skipped as unstable, {} failed; results in {}",
                outcome.records.len(),
                outcome.skipped.len() - failures,
                failures,
                config.output_dir.display()
            );
            for f in outcome.failures() {
                eprintln!("{} p={} angle={} level={}: {}", f.method, f.p, f.angle, f.level, f.reason);
            }
            Ok(if failures == 0 { 0 } else { 1 })
        }
        Command::Verify => {
            let outcomes = verify::run_all();
            print!("{}", verify::table(&outcomes));
            Ok(if outcomes.iter().all(|o| o.passed) { 0 } else { 1 })
        }
    }
}
