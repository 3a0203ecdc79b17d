use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use log::{error, info};

use varmorrey::harness::{Command, Format, RunOptions, StudyConfig};
use varmorrey::Error;

/// Variable-exponent Morrey/Lebesgue experiment runner.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML study configuration.
    #[arg(long)]
    config: PathBuf,
    /// Report path; defaults to the config's `output`, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Refinement levels (overrides `study.refine`).
    #[arg(long)]
    refine: Option<usize>,
    /// Test-function seed (overrides `functions.seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; all cores by default.
    #[arg(long)]
    threads: Option<usize>,
}

fn run(cli: &Cli) -> Result<Vec<String>, Error> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let cfg = StudyConfig::load(&cli.config)?;
    let report = cli.command.run(
        &cfg,
        RunOptions {
            refine: cli.refine,
            seed: cli.seed,
        },
    )?;
    let text = report.render(cli.format)?;
    match cli.out.as_ref().or(cfg.output.as_ref()) {
        Some(path) => {
            let mut w = BufWriter::new(
                File::create(path)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
            );
            w.write_all(text.as_bytes())
                .and_then(|_| w.flush())
                .map_err(|e| Error::Config(e.to_string()))?;
            info!("report written to {}", path.display());
        }
        None => {
            io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| Error::Config(e.to_string()))?;
        }
    }
    Ok(report.failures)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(failures) if failures.is_empty() => ExitCode::SUCCESS,
        Ok(failures) => {
            for f in &failures {
                error!("{f}");
                eprintln!("assertion failed: {f}");
            }
            ExitCode::from(Error::Assertion(String::new()).exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
