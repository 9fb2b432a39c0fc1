//! `holosim` command line.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 numerical
//! failure.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use super::config::{Format, Plan, PRESET_NAMES};
use super::output::{render_csv, render_json, summary_table, write_atomic};
use super::{preset, run_sweeps, SweepError, SweepResult};

#[derive(Debug, Parser)]
#[command(name = "holosim", version, about = "Holonomic gate fidelity under a phonon bath")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a sweep from a config file or a preset.
    Simulate(SimulateArgs),
    /// List the presets, or print one.
    Presets { name: Option<String> },
}

#[derive(Debug, clap::Args)]
struct SimulateArgs {
    /// JSON config file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in sweep preset.
    #[arg(long)]
    preset: Option<String>,
    /// Dotted override, e.g. `bath.k3=0.05`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output file; stdout when neither this nor `output.path` is set.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<CliFormat>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum CliFormat {
    Csv,
    Json,
}

fn simulate(args: SimulateArgs) -> SweepResult<()> {
    let mut plan = match (&args.config, &args.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)?;
            Plan::from_json(&text, &args.set, &path.display().to_string())?
        }
        (None, Some(name)) => Plan::from_preset(name, &args.set)?,
        (None, None) => return Err(SweepError::Config("need --config or --preset".into())),
    };
    if let Some(out) = args.out {
        plan.output.path = Some(out);
    }
    match args.format {
        Some(CliFormat::Csv) => plan.output.format = Format::Csv,
        Some(CliFormat::Json) => plan.output.format = Format::Json,
        None => {}
    }
    if let Some(path) = &plan.output.path {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            if !dir.is_dir() {
                return Err(SweepError::Io(std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("output directory {} does not exist", dir.display()),
                )));
            }
        }
    }
    let jobs = match args.jobs {
        Some(0) => return Err(SweepError::Config("`--jobs` must be >= 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| SweepError::Config(format!("cannot start {jobs} workers: {e}")))?;
    let records = pool.install(|| run_sweeps(&plan.sweeps))?;

    let body = match plan.output.format {
        Format::Csv => render_csv(&plan, &records),
        Format::Json => render_json(&plan, &records),
    };
    let table = summary_table(&records);
    match &plan.output.path {
        Some(path) => {
            write_atomic(path, &body)?;
            if plan.output.json_mirror && plan.output.format == Format::Csv {
                write_atomic(&path.with_extension("json"), &render_json(&plan, &records))?;
            }
            print!("{table}");
            println!("wrote {} rows to {}", records.len(), path.display());
        }
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
            eprint!("{table}");
        }
    }
    Ok(())
}

fn presets(name: Option<String>) -> SweepResult<()> {
    match name {
        None => {
            for n in PRESET_NAMES {
                println!("{n}");
            }
        }
        Some(n) => {
            let text = preset(&n).ok_or_else(|| {
                SweepError::Config(format!("unknown preset `{n}`; available: {}", PRESET_NAMES.join(", ")))
            })?;
            print!("{text}");
        }
    }
    Ok(())
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Presets { name } => presets(name),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
