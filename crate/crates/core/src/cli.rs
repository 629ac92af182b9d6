//! Command-line front end.
//!
//! Exit status: 0 success, 1 identity violation, 2 invalid input,
//! 3 enumeration or sampling budget exceeded. Failures print a one-line JSON
//! object `{"error":{"kind":...,"message":...}}` on stderr.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::engine::{analyze, verify_all, AnalysisOptions, Units, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::sampler::{convergence_report, csv_error, write_convergence_csv, Quantity};
use crate::scenario::{parse_params, random_system_with_budget, Canonical, Dims};
use crate::system::{
    parse_system, validate_system_with_budget, SystemFile, ValidatedSystem, DEFAULT_BUDGET,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;

const SWEEP_HELP: &str = "\
Vary one scalar parameter of a canonical system and write one CSV row per point.

CSV columns:
  param          value of the swept parameter
  lhs_bits       I(x^n -> y^n || s^n)
  message_bits   I(x0; y^n || s^n)
  cross_bits     I(e^{n-1}; x0 | y^n || s^n)
  feedback_bits  I(e^{n-1} -> y^n || s^n)
  residual_bits  lhs_bits - (message_bits + cross_bits + feedback_bits)

Exits with status 1 if any residual exceeds the tolerance.";

const SAMPLE_HELP: &str = "\
Monte Carlo convergence table: plug-in estimates of one quantity at each
sample count, against the exact value.

CSV columns:
  count           number of sampled trajectories
  estimate_bits   plug-in estimate on the empirical distribution
  std_error_bits  bootstrap standard error (200 resamples)
  exact_bits      exact value from full enumeration
  abs_error_bits  |estimate_bits - exact_bits|";

#[derive(Debug, Parser)]
#[command(
    name = "infoflow",
    version,
    about = "Exact information-flow analysis for channels with noisy feedback"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a system file against the schema and every kernel invariant.
    Validate {
        #[command(flatten)]
        source: SystemSource,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Full JSON report of every term, auxiliary quantity and residual.
    Compute {
        #[command(flatten)]
        source: SystemSource,
        #[command(flatten)]
        exact: ExactArgs,
        /// Worker threads for building the joint table.
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Check conservation, each proof step and every applicable reduction.
    /// Exits with status 1 on any breach. Output is deterministic.
    Verify {
        #[command(flatten)]
        source: SystemSource,
        #[command(flatten)]
        exact: ExactArgs,
    },
    #[command(long_about = SWEEP_HELP)]
    Sweep {
        /// Canonical system tag.
        #[arg(long)]
        system: String,
        /// Fixed parameters, e.g. `eps_f=0.1,n=3`.
        #[arg(long)]
        params: Option<String>,
        /// Axis as `param:start:stop:steps`, e.g. `eps_b:0:0.5:11`.
        #[arg(long)]
        sweep: SweepAxis,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    #[command(long_about = SAMPLE_HELP)]
    Sample {
        #[command(flatten)]
        source: SystemSource,
        /// One of directed_info, directed_info_causal, message_info,
        /// cross_term, feedback_directed_info, conservation_residual.
        #[arg(long, default_value = "directed_info_causal")]
        quantity: String,
        /// Comma-separated sample counts.
        #[arg(long, default_value = "1000,10000,100000", value_delimiter = ',')]
        samples: Vec<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write a seeded random system as a JSON system file.
    Generate {
        /// Sizes and flags, e.g. `n=3,message=4,state=3,noiseless_feedback`.
        /// Unspecified sizes are 2.
        #[arg(long)]
        dims: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// A system from a JSON file or a canonical tag.
#[derive(Debug, Clone, Args)]
pub struct SystemSource {
    /// JSON system file.
    #[arg(long, conflicts_with = "system", required_unless_present = "system")]
    pub input: Option<PathBuf>,
    /// Canonical system tag: bsc-bsc, identity-noiseless-fb,
    /// input-independent, state-flip, feedback-blind.
    #[arg(long)]
    pub system: Option<String>,
    /// Canonical parameters, e.g. `eps_f=0.1,eps_b=0.2,n=3`.
    #[arg(long, requires = "system")]
    pub params: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ExactArgs {
    /// Residual tolerance in bits.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    #[arg(long, default_value = "bits")]
    pub units: Units,
    /// Largest trajectory count to enumerate.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    /// Report destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// `param:start:stop:steps`, evenly spaced and inclusive of both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub param: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                let t = k as f64 / last;
                self.start + (self.stop - self.start) * t
            })
            .collect()
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidParameter(format!("sweep axis `{s}`: {why}"));
        let parts: Vec<&str> = s.split(':').collect();
        let [param, start, stop, steps] = parts[..] else {
            return Err(bad("expected param:start:stop:steps"));
        };
        let param = param.trim();
        if param.is_empty() {
            return Err(bad("empty parameter name"));
        }
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(&format!("`{t}` is not a finite number")))
        };
        let steps: usize = steps
            .trim()
            .parse()
            .map_err(|_| bad("steps must be a positive integer"))?;
        if steps == 0 {
            return Err(bad("steps must be at least 1"));
        }
        Ok(SweepAxis {
            param: param.to_string(),
            start: num(start)?,
            stop: num(stop)?,
            steps,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: f64,
    pub lhs_bits: f64,
    pub message_bits: f64,
    pub cross_bits: f64,
    pub feedback_bits: f64,
    pub residual_bits: f64,
}

/// Exact terms at every point of `axis`.
pub fn sweep(base: Canonical, axis: &SweepAxis, budget: u64) -> Result<Vec<SweepRow>> {
    axis.values()
        .into_iter()
        .map(|v| {
            let mut c = base;
            c.set_param(&axis.param, v)?;
            let sys = validate_system_with_budget(c.build_with_budget(budget)?, budget)?;
            let r = analyze(&sys, &AnalysisOptions::default())?;
            Ok(SweepRow {
                param: v,
                lhs_bits: r.lhs,
                message_bits: r.term_message,
                cross_bits: r.term_cross,
                feedback_bits: r.term_feedback,
                residual_bits: r.residuals.conservation,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct ValidationSummary {
    valid: bool,
    horizon: usize,
    trajectory_count: usize,
    encoder_deterministic: bool,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    error: ErrorBody<'a>,
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BudgetExceeded { .. } => EXIT_BUDGET,
        _ => EXIT_INVALID,
    }
}

/// The stderr line for a failed run.
pub fn error_json(e: &Error) -> String {
    serde_json::to_string(&ErrorLine {
        error: ErrorBody {
            kind: e.kind(),
            message: e.to_string(),
        },
    })
    .expect("error line serializes")
}

fn load(source: &SystemSource, budget: u64) -> Result<ValidatedSystem> {
    let spec = match (&source.input, &source.system) {
        (Some(path), _) => parse_system(&fs::read_to_string(path)?, budget)?,
        (None, Some(tag)) => {
            let params = match &source.params {
                Some(p) => parse_params(p)?,
                None => Default::default(),
            };
            Canonical::from_tag(tag, &params)?.build_with_budget(budget)?
        }
        (None, None) => {
            return Err(Error::InvalidParameter(
                "either --input or --system is required".into(),
            ))
        }
    };
    validate_system_with_budget(spec, budget)
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(path) => fs::write(path, bytes)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn json_line(value: &impl Serialize) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn check_tolerance(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )))
    }
}

/// Runs one command and returns its exit status.
pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Validate { source, budget } => {
            let sys = load(&source, budget)?;
            let summary = ValidationSummary {
                valid: true,
                horizon: sys.horizon(),
                trajectory_count: sys.trajectory_count(),
                encoder_deterministic: sys.encoder_is_deterministic(),
            };
            emit(None, &json_line(&summary)?)?;
            Ok(EXIT_OK)
        }
        Command::Compute {
            source,
            exact,
            workers,
        } => {
            check_tolerance(exact.tolerance)?;
            let sys = load(&source, exact.budget)?;
            let report = analyze(
                &sys,
                &AnalysisOptions {
                    tolerance_bits: exact.tolerance,
                    units: exact.units,
                    workers: workers.max(1),
                    record_duration: true,
                },
            )?;
            emit(exact.output.as_deref(), &json_line(&report)?)?;
            Ok(EXIT_OK)
        }
        Command::Verify { source, exact } => {
            check_tolerance(exact.tolerance)?;
            let sys = load(&source, exact.budget)?;
            let report = verify_all(&sys, exact.tolerance, exact.units)?;
            emit(exact.output.as_deref(), &json_line(&report)?)?;
            Ok(if report.passed {
                EXIT_OK
            } else {
                EXIT_VIOLATION
            })
        }
        Command::Sweep {
            system,
            params,
            sweep: axis,
            tolerance,
            budget,
            output,
        } => {
            check_tolerance(tolerance)?;
            let params = match params {
                Some(p) => parse_params(&p)?,
                None => Default::default(),
            };
            let base = Canonical::from_tag(&system, &params)?;
            let rows = sweep(base, &axis, budget)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &rows {
                w.serialize(row).map_err(csv_error)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            emit(output.as_deref(), &bytes)?;
            let breach = rows.iter().any(|r| r.residual_bits.abs() > tolerance);
            Ok(if breach { EXIT_VIOLATION } else { EXIT_OK })
        }
        Command::Sample {
            source,
            quantity,
            samples,
            seed,
            budget,
            output,
        } => {
            let quantity: Quantity = quantity.parse()?;
            if samples.is_empty() {
                return Err(Error::InvalidParameter("no sample counts given".into()));
            }
            let sys = load(&source, budget)?;
            let rows = convergence_report(&sys, quantity, &samples, seed)?;
            let mut bytes = Vec::new();
            write_convergence_csv(&rows, &mut bytes)?;
            emit(output.as_deref(), &bytes)?;
            Ok(EXIT_OK)
        }
        Command::Generate {
            dims,
            seed,
            budget,
            output,
        } => {
            let dims: Dims = dims.parse()?;
            let spec = random_system_with_budget(&dims, seed, budget)?;
            let mut text = SystemFile::from_spec(&spec).to_json()?;
            text.push('\n');
            emit(output.as_deref(), text.as_bytes())?;
            Ok(EXIT_OK)
        }
    }
}
