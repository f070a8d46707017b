//! Command-line front end. Exit codes: 0 success, 1 input error (no
//! outputs written), 2 model breakdown (outputs up to the last good state
//! flushed), 3 failed check or envelope violation.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::oracle::{
    blob_family, measure_bkm_sweep, measure_poisson_constants, AnnularGrid, EstimateReport,
};
use crate::scenario::{run_to_dir, RunStatus, Scenario};
use crate::suites::{estimate_grid, run_suite, BKM_AMPLITUDES, SUITES, SUPPORT_RADII};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_BREAKDOWN: i32 = 2;
pub const EXIT_CHECK: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "exeuler", version, about = "Rigid body and vortex particles in a 2D perfect fluid")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "EXEULER_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario and write its outputs.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the scenario time step.
        #[arg(long)]
        dt: Option<f64>,
        /// Override the final time.
        #[arg(long = "T")]
        t_end: Option<f64>,
        /// Override the record interval (steps).
        #[arg(long)]
        dump_every: Option<usize>,
    },
    /// Run a validation suite and print its table.
    Validate {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suite: String,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Measure the constants of an estimate; NDJSON on standard output.
    Measure {
        estimate: Estimate,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Estimate {
    Poisson1,
    Poisson2,
    Bkm,
}

pub fn main_with_args(args: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    if let Some(n) = cli.threads {
        #[cfg(feature = "parallel")]
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: thread pool: {e}");
        }
        #[cfg(not(feature = "parallel"))]
        let _ = n;
    }
    let result = match cli.command {
        Command::Run { scenario, out, dt, t_end, dump_every } => cmd_run(&scenario, &out, dt, t_end, dump_every),
        Command::Validate { suite, json } => cmd_validate(&suite, json.as_deref()),
        Command::Measure { estimate } => cmd_measure(estimate),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Input(_) | Error::Json(_) | Error::InvalidShape(_) | Error::NonSimpleBoundary(_) => EXIT_INPUT,
                Error::FitDiverged { .. } => EXIT_INPUT,
                e if e.is_breakdown() => EXIT_BREAKDOWN,
                _ => EXIT_CHECK,
            }
        }
    }
}

pub fn cmd_run(
    path: &std::path::Path,
    out: &std::path::Path,
    dt: Option<f64>,
    t_end: Option<f64>,
    dump_every: Option<usize>,
) -> Result<i32> {
    let mut sc = Scenario::load(path)?;
    if let Some(dt) = dt {
        sc.dt = dt;
    }
    if let Some(t) = t_end {
        sc.t_end = t;
    }
    if let Some(k) = dump_every {
        sc.dump_every = k;
    }
    match run_to_dir(&sc, out)? {
        RunStatus::Completed { steps, records } => {
            eprintln!("completed {steps} steps, {records} records in {}", out.display());
            Ok(EXIT_OK)
        }
        RunStatus::Breakdown { steps, error } => {
            eprintln!("breakdown after {steps} steps: {error}");
            Ok(EXIT_BREAKDOWN)
        }
        RunStatus::EnvelopeViolated { error, .. } => {
            eprintln!("{error}");
            Ok(EXIT_CHECK)
        }
    }
}

pub fn cmd_validate(suite: &str, json: Option<&std::path::Path>) -> Result<i32> {
    let report = run_suite(suite)?;
    print!("{}", report.table());
    if let Some(p) = json {
        std::fs::write(p, serde_json::to_vec_pretty(&report)?)?;
    }
    Ok(if report.passed() { EXIT_OK } else { EXIT_CHECK })
}

fn grid_json(g: &AnnularGrid) -> serde_json::Value {
    json!({"r_outer": g.r_outer, "n_r": g.n_r, "n_t": g.n_t})
}

/// Reports for one estimate: a row per family member, then the
/// amplitude-invariance row (Poisson) or the sweep spread (BKM).
pub fn measure_reports(estimate: Estimate) -> Result<Vec<EstimateReport>> {
    let g = estimate_grid();
    let mut out = vec![];
    match estimate {
        Estimate::Poisson1 | Estimate::Poisson2 => {
            let id = if matches!(estimate, Estimate::Poisson1) { "poisson1" } else { "poisson2" };
            let pick = |r: &crate::oracle::PoissonRow| {
                if matches!(estimate, Estimate::Poisson1) {
                    r.ratio_poisson1
                } else {
                    r.ratio_poisson2
                }
            };
            let base = measure_poisson_constants(&g, &blob_family(g, &SUPPORT_RADII, 1.0))?;
            let ten = measure_poisson_constants(&g, &blob_family(g, &SUPPORT_RADII, 10.0))?;
            let mut delta: f64 = 0.0;
            for (a, b) in base.rows.iter().zip(&ten.rows) {
                out.push(EstimateReport {
                    estimate_id: id.into(),
                    parameters: json!({"support_radius": a.support_radius, "amplitude": 1.0, "grid": grid_json(&g)}),
                    ratio: pick(a),
                });
                delta = delta.max((pick(a) - pick(b)).abs() / pick(a));
            }
            out.push(EstimateReport {
                estimate_id: id.into(),
                parameters: json!({"row": "amplitude_invariance", "amplitudes": [1.0, 10.0], "grid": grid_json(&g)}),
                ratio: delta,
            });
        }
        Estimate::Bkm => {
            let rows = measure_bkm_sweep(&g, &BKM_AMPLITUDES)?;
            for r in &rows {
                out.push(EstimateReport {
                    estimate_id: "bkm".into(),
                    parameters: json!({
                        "amplitude": r.amplitude,
                        "grad_u_inf": r.grad_u_inf,
                        "sobolev3": r.sobolev3,
                        "l2": r.l2,
                        "omega_inf": r.omega_inf,
                        "grid": grid_json(&g),
                    }),
                    ratio: r.ratio,
                });
            }
            let mx = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
            let mn = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
            out.push(EstimateReport {
                estimate_id: "bkm".into(),
                parameters: json!({"row": "sweep_spread", "amplitudes": BKM_AMPLITUDES}),
                ratio: mx / mn,
            });
        }
    }
    Ok(out)
}

pub fn cmd_measure(estimate: Estimate) -> Result<i32> {
    for r in measure_reports(estimate)? {
        println!("{}", serde_json::to_string(&r)?);
    }
    Ok(EXIT_OK)
}
