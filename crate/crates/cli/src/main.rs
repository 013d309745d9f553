use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use ris_uwoc::metrics::Method;
use ris_uwoc::sweep::{run_plan, write_csv, write_json, SweepFile};
use ris_uwoc::uwoc::write_tables_csv;

/// Outage, error-rate and capacity sweeps for RIS-assisted RF / underwater
/// optical relay links.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every sweep in a TOML spec file.
    Sweep {
        spec: PathBuf,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Replace the methods of every sweep, e.g. `exact,mc`.
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<String>>,
        /// Replace the Monte-Carlo master seed of every sweep.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Dump the embedded turbulence parameter tables as CSV.
    Tables {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

const EXIT_NUMERICAL: u8 = 1;
const EXIT_INVALID: u8 = 2;

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(spec: &PathBuf, methods: &Option<Vec<String>>, seed: Option<u64>) -> Result<SweepFile> {
    let text = std::fs::read_to_string(spec).with_context(|| format!("cannot read {}", spec.display()))?;
    let mut file = SweepFile::parse(&text)?;
    let methods = methods
        .as_ref()
        .map(|m| m.iter().map(|s| s.trim().parse::<Method>()).collect::<Result<Vec<_>, _>>())
        .transpose()
        .context("--methods")?;
    file.override_with(methods.as_deref(), seed);
    Ok(file)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Tables { out } => {
            let mut w = output(&out)?;
            write_tables_csv(&mut w)?;
            w.flush()?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            spec,
            out,
            format,
            methods,
            seed,
            jobs,
        } => {
            let plan = match load(&spec, &methods, seed).and_then(|f| Ok(f.plan()?)) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    return Ok(ExitCode::from(EXIT_INVALID));
                }
            };
            if let Some(j) = jobs {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(j.max(1))
                    .build_global()
                    .context("thread pool")?;
            }
            log::info!("evaluating {} plan points", plan.len());
            let rows = run_plan(&plan);
            let mut w = output(&out)?;
            match format {
                Format::Csv => write_csv(&rows, &mut w)?,
                Format::Json => write_json(&rows, &mut w)?,
            }
            w.flush()?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            if failed > 0 {
                eprintln!("{failed} of {} points failed; see the error column", rows.len());
                return Ok(ExitCode::from(EXIT_NUMERICAL));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}
