//! `su2fields` — command-line front end for the `su2fields` library.
//!
//! Subcommands: `wigner-table` (matrix coefficients at one element),
//! `grid-dump` (quadrature nodes/weights), `verify` (the ordered check
//! suites), `field-sample` (coefficient draws from a generator spec),
//! `mc-correlations` (all-pairs second moments vs closed-form predictions),
//! and `spin-spectra` (weak- and strong-sense spin-measure estimates).
//!
//! Exit codes (stable contract): 0 success, 1 verification failure (a
//! failing report row, or an internal self-check/IO failure), 2 command-line
//! parse error, 3 band limit exceeded, 4 invalid generator/covariance spec.
//!
//! Determinism: all randomness flows from `--seed` through per-sample
//! substreams, and `--threads 1` additionally pins the worker pool, so equal
//! configurations produce byte-identical artifacts. (The estimators merge
//! fixed chunks in order, so in practice the thread count does not change
//! results either.)

mod angles;
mod verify;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex;
use serde::Serialize;

use su2fields::grid::build_grid;
use su2fields::io::{
    coefficients_to_file, parse_generator_spec, spin_measures_to_file, write_coefficients_csv,
    write_correlation_csv, write_correlation_json, write_grid_csv, write_grid_json,
    write_spin_measures_csv, write_spin_measures_json, write_verify_csv, write_verify_json,
    write_wigner_csv, write_wigner_json, GeneratorRun, SpinMeasureFile,
};
use su2fields::mc::{estimate_correlations, estimate_spin_measures, substream, MeasureMode};
use su2fields::wigner::{wigner_matrix, BAND_LIMIT_CAP};
use su2fields::{Error, Euler, Result, Su2};

use crate::angles::parse_angle;
use crate::verify::{run_verify, VerifySettings, CHECKS};

#[derive(Parser)]
#[command(
    name = "su2fields",
    version,
    about = "Harmonic analysis and invariant random fields on the unit quaternions",
    after_help = "Exit codes: 0 success, 1 verification failure, 2 parse error, \
                  3 band limit exceeded, 4 invalid spec."
)]
struct Cli {
    /// Cap the worker pool; 1 guarantees bit-reproducible output.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<NonZeroUsize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the full degree-l matrix of coefficients at one element.
    WignerTable(WignerTableArgs),
    /// Dump the quadrature grid nodes and weights at a band limit.
    GridDump(GridDumpArgs),
    /// Run the ordered verification suites and write a per-check report.
    Verify(VerifyArgs),
    /// Draw coefficient samples from a generator spec.
    FieldSample(SampleArgs),
    /// Estimate every pairwise second moment and compare with predictions.
    McCorrelations(SampleArgs),
    /// Estimate weak- and strong-sense spin measures of a generator.
    SpinSpectra(SampleArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file (stdout when omitted).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Artifact format.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
#[command(group = ArgGroup::new("element").required(true).args(["euler", "alpha"]))]
struct WignerTableArgs {
    /// Doubled degree 2l (0..=64).
    #[arg(long, value_name = "2L", value_parser = clap::value_parser!(i32).range(0..))]
    two_ell: i32,

    /// Euler angles phi theta psi; decimal radians or multiples of pi
    /// ("pi/2", "-3pi/4").
    #[arg(long, num_args = 3, value_names = ["PHI", "THETA", "PSI"],
          value_parser = parse_angle_arg, conflicts_with = "beta")]
    euler: Option<Vec<f64>>,

    /// Real and imaginary parts of alpha (with --beta; the pair is
    /// normalized onto the group).
    #[arg(long, num_args = 2, value_names = ["RE", "IM"], requires = "beta",
          allow_negative_numbers = true)]
    alpha: Option<Vec<f64>>,

    /// Real and imaginary parts of beta (with --alpha).
    #[arg(long, num_args = 2, value_names = ["RE", "IM"], requires = "alpha",
          allow_negative_numbers = true)]
    beta: Option<Vec<f64>>,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct GridDumpArgs {
    /// Doubled band limit 2L (0..=64).
    #[arg(long, value_name = "2L", value_parser = clap::value_parser!(i32).range(0..))]
    band_limit_doubled: i32,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Doubled band limit for the representation-level checks (0..=64).
    #[arg(long, value_name = "2L", default_value_t = 4,
          value_parser = clap::value_parser!(i32).range(0..))]
    band_limit_doubled: i32,

    /// Base seed for the deterministic random probes.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Random probes per check (>= 1).
    #[arg(long, value_name = "N", default_value_t = 20,
          value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,

    /// Override one check's threshold: NAME=VALUE (repeatable).
    #[arg(long = "tol-override", value_name = "NAME=VALUE",
          value_parser = parse_tol_override)]
    tol_override: Vec<(String, f64)>,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SampleArgs {
    /// Generator spec JSON file.
    #[arg(long, value_name = "PATH")]
    spec: PathBuf,

    /// Base seed (overrides the spec file's seed; default 0).
    #[arg(long)]
    seed: Option<u64>,

    /// Sample count (>= 1; overrides the spec file's samples).
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    samples: Option<u64>,

    #[command(flatten)]
    output: OutputArgs,
}

fn parse_angle_arg(token: &str) -> std::result::Result<f64, String> {
    parse_angle(token)
}

fn parse_tol_override(token: &str) -> std::result::Result<(String, f64), String> {
    let (name, value) = token
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got '{token}'"))?;
    if !CHECKS.iter().any(|(n, _)| *n == name) {
        let names: Vec<&str> = CHECKS.iter().map(|(n, _)| *n).collect();
        return Err(format!(
            "unknown check '{name}' (expected one of {})",
            names.join(", ")
        ));
    }
    let value: f64 = value
        .parse()
        .map_err(|_| format!("cannot parse threshold '{value}' in '{token}'"))?;
    Ok((name.to_string(), value))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // Build errors only if a global pool already exists; main runs once.
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads.get())
            .build_global()
            .expect("rayon pool initialized once");
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Map library errors onto the documented exit codes.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::BandLimitExceeded { .. } => 3,
        Error::InvalidSpec(_)
        | Error::NotPositiveSemidefinite { .. }
        | Error::ZeroField
        | Error::Json(_) => 4,
        Error::InvalidIndex { .. } | Error::NearZeroNorm => 2,
        Error::ExactnessGateFailed { .. } | Error::Io(_) => 1,
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::WignerTable(args) => cmd_wigner_table(args),
        Command::GridDump(args) => cmd_grid_dump(args),
        Command::Verify(args) => cmd_verify(args),
        Command::FieldSample(args) => cmd_field_sample(args),
        Command::McCorrelations(args) => cmd_mc_correlations(args),
        Command::SpinSpectra(args) => cmd_spin_spectra(args),
    }
}

/// Destination for one artifact: a file under `--out`, or stdout.
enum Sink {
    File(std::io::BufWriter<fs::File>),
    Stdout(std::io::Stdout),
}

impl std::io::Write for Sink {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        match self {
            Sink::File(w) => w.write(buf),
            Sink::Stdout(w) => w.write(buf),
        }
    }

    fn flush(&mut self) -> std::io::Result<()> {
        match self {
            Sink::File(w) => w.flush(),
            Sink::Stdout(w) => w.flush(),
        }
    }
}

/// Write an artifact to `--out` or stdout.
fn emit(out: Option<&Path>, write: impl FnOnce(&mut Sink) -> Result<()>) -> Result<()> {
    let mut sink = match out {
        Some(path) => Sink::File(std::io::BufWriter::new(fs::File::create(path)?)),
        None => Sink::Stdout(std::io::stdout()),
    };
    write(&mut sink)?;
    use std::io::Write as _;
    sink.flush()?;
    Ok(())
}

fn cmd_wigner_table(args: WignerTableArgs) -> Result<u8> {
    if args.two_ell > BAND_LIMIT_CAP {
        return Err(Error::BandLimitExceeded {
            two_ell: args.two_ell,
            cap: BAND_LIMIT_CAP,
        });
    }
    let g: Su2 = if let Some(e) = &args.euler {
        Su2::from_euler(&Euler {
            phi: e[0],
            theta: e[1],
            psi: e[2],
        })
    } else {
        let a = args.alpha.as_ref().expect("required by the arg group");
        let b = args.beta.as_ref().expect("required with alpha");
        Su2::new(Complex::new(a[0], a[1]), Complex::new(b[0], b[1]))?
    };
    let d = wigner_matrix(args.two_ell, &g)?;
    emit(args.output.out.as_deref(), |w| match args.output.format {
        Format::Csv => write_wigner_csv(w, &d),
        Format::Json => write_wigner_json(w, &d),
    })?;
    Ok(0)
}

fn cmd_grid_dump(args: GridDumpArgs) -> Result<u8> {
    if args.band_limit_doubled > BAND_LIMIT_CAP {
        return Err(Error::BandLimitExceeded {
            two_ell: args.band_limit_doubled,
            cap: BAND_LIMIT_CAP,
        });
    }
    let grid = build_grid::<f64>(args.band_limit_doubled)?;
    emit(args.output.out.as_deref(), |w| match args.output.format {
        Format::Csv => write_grid_csv(w, &grid),
        Format::Json => write_grid_json(w, &grid),
    })?;
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> Result<u8> {
    let settings = VerifySettings {
        band: args.band_limit_doubled,
        seed: args.seed,
        samples: args.samples as usize,
        overrides: args.tol_override.into_iter().collect::<BTreeMap<_, _>>(),
    };
    let rows = run_verify(&settings)?;
    for row in &rows {
        eprintln!(
            "{:16} metric {:>12.3e}  threshold {:>8.1e}  {}",
            row.name,
            row.metric,
            row.threshold,
            if row.pass { "pass" } else { "FAIL" }
        );
    }
    let all_pass = rows.iter().all(|r| r.pass);
    emit(args.output.out.as_deref(), |w| match args.output.format {
        Format::Csv => write_verify_csv(w, &rows),
        Format::Json => write_verify_json(w, &rows),
    })?;
    Ok(if all_pass { 0 } else { 1 })
}

/// Read and parse the generator spec, resolving seed/samples precedence:
/// command line > spec file > defaults.
fn load_run(args: &SampleArgs, default_samples: usize) -> Result<(GeneratorRun, u64, usize)> {
    let json = fs::read_to_string(&args.spec)?;
    let run = parse_generator_spec(&json)?;
    let seed = args.seed.or(run.seed).unwrap_or(0);
    let samples = args
        .samples
        .map(|n| n as usize)
        .or(run.samples)
        .unwrap_or(default_samples);
    Ok((run, seed, samples))
}

/// `base.ext` -> `base.<index>.ext` for multi-sample outputs.
fn indexed_path(path: &Path, index: usize) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}.{index}.{ext}"),
        None => format!("{stem}.{index}"),
    };
    path.with_file_name(name)
}

/// `base.ext` -> `base.<tag>.ext` for per-mode outputs.
fn tagged_path(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}.{tag}.{ext}"),
        None => format!("{stem}.{tag}"),
    };
    path.with_file_name(name)
}

fn cmd_field_sample(args: SampleArgs) -> Result<u8> {
    let (run, seed, samples) = load_run(&args, 1)?;
    let generator = run.config.generator();
    if samples > 1 && args.output.out.is_none() {
        return Err(Error::InvalidSpec(
            "--out is required when drawing more than one sample".into(),
        ));
    }
    for i in 0..samples {
        let mut rng = substream(seed, i as u64);
        let coeffs = generator(&mut rng)?;
        let path = args.output.out.as_deref().map(|p| {
            if samples == 1 {
                p.to_path_buf()
            } else {
                indexed_path(p, i)
            }
        });
        emit(path.as_deref(), |w| match args.output.format {
            Format::Csv => write_coefficients_csv(w, &coeffs),
            Format::Json => {
                serde_json::to_writer_pretty(&mut *w, &coefficients_to_file(&coeffs))?;
                writeln!(w)?;
                Ok(())
            }
        })?;
    }
    Ok(0)
}

fn cmd_mc_correlations(args: SampleArgs) -> Result<u8> {
    let (run, seed, samples) = load_run(&args, 10_000)?;
    let targets = run.config.correlation_targets()?;
    let report = estimate_correlations(run.config.generator(), seed, samples, &targets)?;
    let all_pass = report.all_pass();
    let failed = report.rows.iter().filter(|r| !r.pass()).count();
    eprintln!(
        "mc-correlations: {} targets, {} samples, {} failing rows",
        report.rows.len(),
        report.samples,
        failed
    );
    emit(args.output.out.as_deref(), |w| match args.output.format {
        Format::Csv => write_correlation_csv(w, &report),
        Format::Json => write_correlation_json(w, &report),
    })?;
    Ok(if all_pass { 0 } else { 1 })
}

/// Combined stdout form of the two per-mode estimates.
#[derive(Serialize)]
struct SpinSpectraFile {
    weak: SpinMeasureFile,
    strong: SpinMeasureFile,
}

fn cmd_spin_spectra(args: SampleArgs) -> Result<u8> {
    let (run, seed, samples) = load_run(&args, 10_000)?;
    let generator = run.config.generator();
    let weak = estimate_spin_measures(&generator, seed, samples, MeasureMode::Weak)?;
    let strong = estimate_spin_measures(&generator, seed, samples, MeasureMode::Strong)?;
    match (&args.output.out, args.output.format) {
        // With --out, one artifact per mode: base.weak.ext and base.strong.ext.
        (Some(path), format) => {
            for (tag, est) in [("weak", &weak), ("strong", &strong)] {
                emit(Some(&tagged_path(path, tag)), |w| match format {
                    Format::Csv => write_spin_measures_csv(w, est),
                    Format::Json => write_spin_measures_json(w, est),
                })?;
            }
        }
        (None, Format::Json) => {
            let combined = SpinSpectraFile {
                weak: spin_measures_to_file(&weak),
                strong: spin_measures_to_file(&strong),
            };
            emit(None, |w| {
                serde_json::to_writer_pretty(&mut *w, &combined)?;
                writeln!(w)?;
                Ok(())
            })?;
        }
        (None, Format::Csv) => {
            emit(None, |w| {
                writeln!(w, "# mode=weak")?;
                write_spin_measures_csv(w, &weak)?;
                writeln!(w)?;
                writeln!(w, "# mode=strong")?;
                write_spin_measures_csv(w, &strong)?;
                Ok(())
            })?;
        }
    }
    Ok(0)
}
