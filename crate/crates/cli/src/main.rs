//! Command-line front end: scenario generation, single computations and the
//! verification suite.
//!
//! Exit codes: 0 when everything passed, 1 when a check failed, 2 for usage
//! and validation errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use procdual::doob::{doob_decompose, var_p_adaptive};
use procdual::duality::quotient_norm;
use procdual::process::{optional_projection, predictable_projection};
use procdual::scenario::{
    load_scenario, plant_defect, random_scenario, Defect, RandomOptions, ScenarioFile, MAX_RANDOM_ATOMS,
    MAX_RANDOM_HORIZON,
};
use procdual::space::DEFAULT_ENUMERATION_BOUND;
use procdual::verify::{verify_file, VerifyOptions, CHECKS};

#[derive(Parser)]
#[command(name = "procdual", version, about = "Duality checks for processes on finite filtered spaces")]
struct Cli {
    /// Print the check registry and exit.
    #[arg(long)]
    list_checks: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Md,
}

#[derive(Subcommand)]
enum Command {
    /// Run checks on a scenario file.
    Verify {
        file: PathBuf,
        /// Comma-separated check ids, or `all`.
        #[arg(long, default_value = "all")]
        checks: String,
        /// Tolerance applied to every reported margin.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random samples per check.
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Write the report here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a random scenario.
    Random {
        #[arg(long)]
        atoms: usize,
        #[arg(long)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest number of children per block and step.
        #[arg(long, default_value_t = 3)]
        branching: usize,
        /// Allow sizes beyond the default limits.
        #[arg(long)]
        allow_large: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Plant a defect into a scenario (for exercising `verify`).
    Plant {
        file: PathBuf,
        #[arg(long)]
        defect: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Optional (or predictable) projection of a process.
    Project {
        file: PathBuf,
        #[arg(long)]
        process: String,
        #[arg(long)]
        predictable: bool,
    },
    /// Seminorm of a random variable.
    Norm {
        file: PathBuf,
        #[arg(long)]
        norm: String,
        #[arg(long)]
        rv: String,
    },
    /// Polar seminorm of a random variable.
    Polar {
        file: PathBuf,
        #[arg(long)]
        norm: String,
        #[arg(long)]
        rv: String,
    },
    /// Quotient seminorm of an adapted process (L1 or Linf).
    Quotient {
        file: PathBuf,
        #[arg(long)]
        norm: String,
        #[arg(long)]
        process: String,
    },
    /// Doob decomposition of an adapted process.
    Doob {
        file: PathBuf,
        #[arg(long)]
        process: String,
    },
    /// Quasimartingale variation of an adapted process.
    Varp {
        file: PathBuf,
        #[arg(long)]
        norm: String,
        #[arg(long)]
        process: String,
        /// Sequence length parameter; defaults to the horizon.
        #[arg(long)]
        max_n: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json(v: &serde_json::Value) -> Result<()> {
    emit(&serde_json::to_string_pretty(v)?)
}

fn run(cli: Cli) -> Result<ExitCode> {
    if cli.list_checks {
        let lines: Vec<String> = CHECKS.iter().map(|c| format!("{:<22} {}", c.id, c.description)).collect();
        emit(&lines.join("\n"))?;
        return Ok(ExitCode::SUCCESS);
    }
    let Some(command) = cli.command else {
        bail!("no command given; see --help");
    };
    match command {
        Command::Verify { file, checks, tol, seed, samples, format, output } => {
            let scenario = ScenarioFile::read(&file).with_context(|| format!("reading {}", file.display()))?;
            let ids: Vec<String> = checks.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
            let opts = VerifyOptions { checks: Some(ids), tol, seed, samples, ..Default::default() };
            let report = verify_file(scenario, &opts)?;
            let text = match format {
                Format::Json => report.to_json(),
                Format::Md => report.to_markdown(),
            };
            write_or_print(output.as_deref(), &text)?;
            let s = report.summary;
            eprintln!("{} pass, {} fail, {} finding, {} skipped", s.pass, s.fail, s.finding, s.skipped);
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Random { atoms, horizon, seed, branching, allow_large, output } => {
            if allow_large && (atoms > MAX_RANDOM_ATOMS || horizon > MAX_RANDOM_HORIZON) {
                eprintln!("warning: {atoms} atoms / horizon {horizon} may exceed the stopping-time enumeration bound");
            }
            let s = random_scenario(RandomOptions { atoms, horizon, seed, branching, allow_large })?;
            std::fs::write(&output, s.file.to_json()?).with_context(|| format!("writing {}", output.display()))?;
            eprintln!("wrote {} (digest {})", output.display(), s.digest());
            Ok(ExitCode::SUCCESS)
        }
        Command::Plant { file, defect, output } => {
            let d = Defect::ALL.into_iter().find(|d| d.name() == defect).with_context(|| {
                let names: Vec<&str> = Defect::ALL.iter().map(|d| d.name()).collect();
                format!("unknown defect `{defect}`; expected one of {}", names.join(", "))
            })?;
            let mut f = ScenarioFile::read(&file)?;
            let what = plant_defect(&mut f, d)?;
            std::fs::write(&output, f.to_json()?)?;
            eprintln!("{what}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Project { file, process, predictable } => {
            let s = load_scenario(&file)?;
            let y = s.process(&process)?;
            let p = if predictable { predictable_projection(&s.space, y) } else { optional_projection(&s.space, y) };
            print_json(&json!({ "process": process, "predictable": predictable, "projection": p }))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Norm { file, norm, rv } => {
            let s = load_scenario(&file)?;
            let v = s.norm(&norm)?.seminorm(&s.space, s.rv(&rv)?);
            print_json(&json!({ "norm": norm, "rv": rv, "value": v }))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Polar { file, norm, rv } => {
            let s = load_scenario(&file)?;
            let v = s.norm(&norm)?.polar(&s.space, s.rv(&rv)?);
            print_json(&json!({ "norm": norm, "rv": rv, "polar": v }))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Quotient { file, norm, process } => {
            let s = load_scenario(&file)?;
            let q = quotient_norm(&s.space, s.norm(&norm)?, s.process(&process)?)?;
            print_json(&serde_json::to_value(&q)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Doob { file, process } => {
            let s = load_scenario(&file)?;
            let d = doob_decompose(&s.space, s.process(&process)?)?;
            print_json(&serde_json::to_value(&d)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Varp { file, norm, process, max_n } => {
            let s = load_scenario(&file)?;
            let n = max_n.unwrap_or(s.space.horizon());
            let v = var_p_adaptive(&s.space, s.norm(&norm)?, s.process(&process)?, n, DEFAULT_ENUMERATION_BOUND)?;
            if v.max_n < n {
                eprintln!("warning: max_n lowered from {n} to {} to stay within the enumeration bound", v.max_n);
            }
            print_json(&serde_json::to_value(&v)?)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => emit(text),
    }
}
