//! Command-line front end: reads a polytope file, runs one pipeline stage
//! and prints a JSON or text report.

pub mod input;
pub mod report;
pub mod text;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use delzant_core::delzant::{build_delzant_data, DelzantData, DelzantError};
use delzant_core::linalg::RatVector;
use delzant_core::toric::{ToricError, ToricModel};
use delzant_core::verify::{moment_residual_samples, run_all, VerifyConfig};
use thiserror::Error;

use input::{read_lattice_file, read_polytope_file, ParseError, PolytopeInput};
use report::{Metadata, ReportFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION_FAILED: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "delzant",
    version,
    about = "Exact Delzant construction, normal fan and toric charts of a rational polytope"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact sequence, group Γ and per-face stabilizer table.
    Analyze(Common),
    /// Normal fan, dual cones and chart monoid generators.
    Fan(Common),
    /// Run every numerical check; exits 1 if any fails.
    Verify(Common),
    /// Pair the polytope with the lattice from --lattice (or the file's own
    /// `lattice` field) and report Γ' and the new stabilizers.
    Quotient(Common),
    /// Write the full report (construction, fan, verification) to a file,
    /// optionally with a CSV of sampled moment-map residuals.
    Export(ExportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Polytope file (JSON).
    #[arg(long, short)]
    pub input: PathBuf,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Seed for every sampled check.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Samples per suite, replacing the defaults (10000 for the moment
    /// image, 1000 for the others).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Tolerance for algebraic identities in doubles.
    #[arg(long, default_value_t = 1e-9, allow_negative_numbers = true)]
    pub tol: f64,
    /// Lattice file: n rational basis rows, as an array or under `lattice`.
    #[arg(long)]
    pub lattice: Option<PathBuf>,
    /// Record wall-clock times (the report is then not reproducible).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub common: Common,
    /// Where to write the JSON report.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Where to write the CSV of sampled `(x, J_T residual)` pairs.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Delzant(#[from] DelzantError),
    #[error("{0}")]
    Toric(#[from] ToricError),
    #[error("invalid --tol {0}: expected a positive finite number")]
    Tolerance(f64),
    #[error("cannot write {file}: {source}")]
    Write {
        file: String,
        #[source]
        source: std::io::Error,
    },
}

impl Common {
    fn config(&self) -> VerifyConfig {
        let mut cfg = VerifyConfig {
            seed: self.seed,
            tol: self.tol,
            timings: self.timings,
            ..VerifyConfig::default()
        };
        if let Some(n) = self.samples {
            cfg.samples = n;
            cfg.moment_samples = n;
        }
        cfg
    }
}

/// A finished command: the report and whether verification passed.
pub struct Outcome {
    pub report: ReportFile,
    pub passed: bool,
}

fn load(c: &Common) -> Result<(PolytopeInput, DelzantData), CliError> {
    if !(c.tol.is_finite() && c.tol > 0.0) {
        return Err(CliError::Tolerance(c.tol));
    }
    let input = read_polytope_file(&c.input)?;
    let d = build_delzant_data(&input.polytope);
    Ok((input, d))
}

fn lattice_for(c: &Common, input: &PolytopeInput, n: usize) -> Result<Vec<RatVector>, CliError> {
    if let Some(path) = &c.lattice {
        return Ok(read_lattice_file(path, n)?);
    }
    Ok(input.lattice.clone().unwrap_or_else(|| {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| delzant_core::linalg::rat(i64::from(i == j), 1))
                    .collect()
            })
            .collect()
    }))
}

/// Runs one command and returns its report.
pub fn execute(command: &Command) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let (name, c) = match command {
        Command::Analyze(c) => ("analyze", c),
        Command::Fan(c) => ("fan", c),
        Command::Verify(c) => ("verify", c),
        Command::Quotient(c) => ("quotient", c),
        Command::Export(e) => ("export", &e.common),
    };
    let (input, d) = load(c)?;
    let mut report = ReportFile {
        metadata: Metadata::new(name, c.seed),
        construction: report::construction(&d, &input.normalization),
        fan: None,
        quotient: None,
        verification: None,
    };
    let mut passed = true;
    match command {
        Command::Analyze(_) => {}
        Command::Fan(_) => {
            let model = ToricModel::new(d.clone())?;
            report.fan = Some(report::fan_block(&model));
        }
        Command::Verify(_) => {
            let v = run_all(&d, &c.config())?;
            passed = v.passed();
            report.verification = Some(v);
        }
        Command::Quotient(_) => {
            let lattice = lattice_for(c, &input, d.n())?;
            let r = d.retarget_lattice(&lattice)?;
            report.quotient = Some(report::quotient_block(&d, &r));
        }
        Command::Export(e) => {
            let model = ToricModel::new(d.clone())?;
            report.fan = Some(report::fan_block(&model));
            if c.lattice.is_some() || input.lattice.is_some() {
                let lattice = lattice_for(c, &input, d.n())?;
                let r = d.retarget_lattice(&lattice)?;
                report.quotient = Some(report::quotient_block(&d, &r));
            }
            let cfg = c.config();
            let v = run_all(&d, &cfg)?;
            passed = v.passed();
            report.verification = Some(v);
            if let Some(plot) = &e.plot {
                write_plot(plot, &d, cfg.samples, cfg.seed)?;
            }
        }
    }
    if c.timings {
        report.metadata.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    if let Command::Export(e) = command {
        write_file(&e.output, &(to_json(&report) + "\n"))?;
    }
    Ok(Outcome { report, passed })
}

pub fn to_json(r: &ReportFile) -> String {
    serde_json::to_string_pretty(r).expect("reports serialize")
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Write {
        file: path.display().to_string(),
        source,
    })
}

fn write_plot(path: &Path, d: &DelzantData, samples: usize, seed: u64) -> Result<(), CliError> {
    let mut csv: String = (0..d.n()).map(|i| format!("x{i},")).collect();
    csv.push_str("residual\n");
    for s in moment_residual_samples(d, samples, seed) {
        for x in &s.x {
            csv.push_str(&format!("{x:e},"));
        }
        csv.push_str(&format!("{:e}\n", s.residual));
    }
    write_file(path, &csv)
}

fn format_of(command: &Command) -> Format {
    match command {
        Command::Analyze(c) | Command::Fan(c) | Command::Verify(c) | Command::Quotient(c) => {
            c.format
        }
        Command::Export(e) => e.common.format,
    }
}

/// Parses `args` (including the program name), runs the command and
/// writes the report to `out` and diagnostics to `err`. Returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{e}");
                EXIT_INPUT_ERROR
            } else {
                let _ = write!(out, "{e}");
                EXIT_OK
            };
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(outcome) => {
            let body = match (&cli.command, format_of(&cli.command)) {
                (Command::Export(e), Format::Text) => format!(
                    "wrote {}{}\nverdict {}\n",
                    e.output.display(),
                    e.plot
                        .as_ref()
                        .map(|p| format!(" and {}", p.display()))
                        .unwrap_or_default(),
                    if outcome.passed { "PASS" } else { "FAIL" }
                ),
                (_, Format::Json) => to_json(&outcome.report) + "\n",
                (_, Format::Text) => text::render(&outcome.report),
            };
            let _ = out.write_all(body.as_bytes());
            if outcome.passed {
                EXIT_OK
            } else {
                let _ = writeln!(err, "verification failed");
                EXIT_VERIFICATION_FAILED
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT_ERROR
        }
    }
}
