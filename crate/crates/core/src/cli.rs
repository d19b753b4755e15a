//! Command-line front end: `bench-*` experiments and `profile-basis`.
//!
//! Exit status is 0 on success, 2 on usage errors (bad flags, unreadable
//! or malformed config, unwritable output), and 1 when an experiment fails,
//! including invariant violations.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::basis::{similarity_profile, BasisKind, BasisSet};
use crate::config::ExperimentConfig;
use crate::emulator::{run_remap, run_robustness, run_timing, run_uniformity, ExperimentReport};
use crate::error::Error;
use crate::strategy::StrategyKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "hdhash", version, about = "Hash table benchmarks under bit errors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mean lookup latency versus server count.
    BenchTime(BenchArgs),
    /// Mismatch rate versus injected bit errors.
    BenchRobustness(BenchArgs),
    /// Chi-squared load uniformity, with and without noise.
    BenchUniformity(BenchArgs),
    /// Fraction of requests remapped by one leave and one join.
    BenchRemap(BenchArgs),
    /// Pairwise similarity matrix of a basis set as `i,j,similarity`.
    ProfileBasis(ProfileArgs),
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Key-value config file; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV destination; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Replace the config's seed list with this single seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated strategies to run.
    #[arg(long, value_delimiter = ',')]
    pub strategy: Option<Vec<StrategyKind>>,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[arg(long, default_value = "circular")]
    pub kind: BasisKind,
    #[arg(long, default_value_t = 12)]
    pub n: usize,
    #[arg(long, default_value_t = crate::hypervector::DEFAULT_DIM)]
    pub d: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::InvalidConfig(_) | Error::InvalidBasis(_) => Failure::Usage(e.to_string()),
            _ => Failure::Run(e.to_string()),
        }
    }
}

/// Parses `args` (program name first) and runs the command.
///
/// CSV goes to `--output` or `stdout`; summaries go to `stderr` when the CSV
/// is on `stdout`, otherwise to `stdout`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{text}");
            return EXIT_OK;
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Run(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_FAILURE
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    let (args, experiment): (BenchArgs, fn(&ExperimentConfig) -> crate::Result<ExperimentReport>) = match command {
        Command::BenchTime(a) => (a, run_timing),
        Command::BenchRobustness(a) => (a, run_robustness),
        Command::BenchUniformity(a) => (a, run_uniformity),
        Command::BenchRemap(a) => (a, run_remap),
        Command::ProfileBasis(a) => return profile_basis(a, stdout),
    };
    let config = load_config(&args)?;
    let mut sink = open_output(args.output.as_ref())?;
    let report = experiment(&config)?;
    match &mut sink {
        Some(file) => {
            write_report(&report, file, args.output.as_ref())?;
            print_summary(&report, stdout);
        }
        None => {
            write_report(&report, stdout, None)?;
            print_summary(&report, stderr);
        }
    }
    Ok(())
}

fn load_config(args: &BenchArgs) -> Result<ExperimentConfig, Failure> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::from_path(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seeds = vec![seed];
    }
    if let Some(s) = &args.strategy {
        config.strategies = Some(s.clone());
    }
    config.validate()?;
    Ok(config)
}

fn open_output(path: Option<&PathBuf>) -> Result<Option<BufWriter<File>>, Failure> {
    path.map(|p| {
        File::create(p)
            .map(BufWriter::new)
            .map_err(|e| Failure::Usage(format!("cannot write output {}: {e}", p.display())))
    })
    .transpose()
}

fn write_report(report: &ExperimentReport, out: &mut dyn Write, path: Option<&PathBuf>) -> Result<(), Failure> {
    report.write_csv(&mut *out).and_then(|_| out.flush()).map_err(|e| io_failure(e, path))
}

fn io_failure(e: io::Error, path: Option<&PathBuf>) -> Failure {
    match path {
        Some(p) => Failure::Usage(format!("cannot write output {}: {e}", p.display())),
        None => Failure::Run(format!("write failed: {e}")),
    }
}

fn print_summary(report: &ExperimentReport, out: &mut dyn Write) {
    for line in report.summary_lines() {
        let _ = writeln!(out, "{line}");
    }
}

fn profile_basis(args: ProfileArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let mut sink = open_output(args.output.as_ref())?;
    let set = BasisSet::generate(args.kind, args.n, args.d, args.seed)?;
    let profile = similarity_profile(&set);
    let out: &mut dyn Write = match &mut sink {
        Some(f) => f,
        None => stdout,
    };
    let mut w = csv::Writer::from_writer(out);
    let result = (|| -> csv::Result<()> {
        w.write_record(["i", "j", "similarity"])?;
        for (i, j, s) in profile.entries() {
            w.write_record([i.to_string(), j.to_string(), s.to_string()])?;
        }
        w.flush()?;
        Ok(())
    })();
    result.map_err(|e| io_failure(io::Error::other(e), args.output.as_ref()))
}
