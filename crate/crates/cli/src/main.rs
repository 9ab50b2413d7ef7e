use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use palmshift_cli::{config_paths, emit, load_spec, run, CliError, Format};

#[derive(Parser)]
#[command(name = "palmshift", version, about = "Monte Carlo checks of point-shift identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment file, or every .toml file in a directory.
    Run {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long, env = "PALMSHIFT_THREADS")]
        threads: Option<usize>,
        /// Overrides the seed of every experiment.
        #[arg(long)]
        seed: Option<u64>,
        /// Record wall-clock durations (makes reports non-reproducible).
        #[arg(long)]
        timing: bool,
    },
}

fn execute(cmd: Command) -> Result<bool, CliError> {
    let Command::Run {
        path,
        format,
        out,
        threads,
        seed,
        timing,
    } = cmd;
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let specs = config_paths(&path)?
        .iter()
        .map(|p| load_spec(p, seed))
        .collect::<Result<Vec<_>, _>>()?;
    let mut reports = Vec::with_capacity(specs.len());
    for spec in &specs {
        let start = Instant::now();
        let mut r = run(spec)?;
        if timing {
            r.duration_secs = Some(start.elapsed().as_secs_f64());
        }
        reports.push(r);
    }
    let format = match format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
    };
    let text = emit(&reports, format);
    match &out {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io { path: p.clone(), source })?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })?;
        }
    }
    Ok(reports.iter().all(|r| r.is_success()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("palmshift: {e}");
            ExitCode::from(2)
        }
    }
}
