//! Command-line driver for the flow experiments.
//!
//! Usage: kvfem <convergence|decay|cavity|single> --config <path>
//!              [--output-dir <path>] [--threads <n>]

mod config;
mod experiments;

use config::{parse_config, Experiment};
use std::path::PathBuf;
use std::process::ExitCode;

const USAGE: &str = "usage: kvfem <convergence|decay|cavity|single> --config <path> \
[--output-dir <path>] [--threads <n>]";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Usage(msg)) => {
            eprintln!("{msg}");
            eprintln!("{USAGE}");
            ExitCode::from(2)
        }
        Err(RunError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

enum RunError {
    Usage(String),
    Failed(String),
}

fn run(args: &[String]) -> Result<(), RunError> {
    if args.is_empty() {
        return Err(RunError::Usage("no subcommand given".into()));
    }
    let subcommand = Experiment::from_name(&args[0])
        .ok_or_else(|| RunError::Usage(format!("unknown subcommand '{}'", args[0])))?;

    let mut config_path: Option<PathBuf> = None;
    let mut output_override: Option<PathBuf> = None;
    let mut threads = 1usize;
    let mut it = args[1..].iter();
    while let Some(flag) = it.next() {
        match flag.as_str() {
            "--config" => {
                let v = it
                    .next()
                    .ok_or_else(|| RunError::Usage("--config needs a path".into()))?;
                config_path = Some(PathBuf::from(v));
            }
            "--output-dir" => {
                let v = it
                    .next()
                    .ok_or_else(|| RunError::Usage("--output-dir needs a path".into()))?;
                output_override = Some(PathBuf::from(v));
            }
            "--threads" => {
                let v = it
                    .next()
                    .ok_or_else(|| RunError::Usage("--threads needs a count".into()))?;
                threads = v
                    .parse()
                    .map_err(|_| RunError::Usage(format!("--threads: bad count '{v}'")))?;
                if threads == 0 {
                    return Err(RunError::Usage("--threads must be at least 1".into()));
                }
            }
            other => return Err(RunError::Usage(format!("unknown flag '{other}'"))),
        }
    }
    let config_path =
        config_path.ok_or_else(|| RunError::Usage("--config <path> is required".into()))?;

    let text = std::fs::read_to_string(&config_path).map_err(|e| {
        RunError::Failed(format!("cannot read config {}: {e}", config_path.display()))
    })?;
    let cfg = parse_config(&text).map_err(|e| RunError::Failed(e.to_string()))?;
    if cfg.experiment != subcommand {
        return Err(RunError::Failed(format!(
            "subcommand '{}' does not match experiment '{}' in the config",
            subcommand.name(),
            cfg.experiment.name()
        )));
    }

    let out_dir = output_override
        .or_else(|| cfg.output_dir.clone())
        .ok_or_else(|| {
            RunError::Failed(
                "no output directory: set output_dir in the config or pass --output-dir".into(),
            )
        })?;
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| RunError::Failed(format!("cannot create {}: {e}", out_dir.display())))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| RunError::Failed(format!("thread pool: {e}")))?;
    pool.install(|| match cfg.experiment {
        Experiment::Convergence => experiments::convergence(&cfg, &out_dir),
        Experiment::Decay => experiments::decay(&cfg, &out_dir),
        Experiment::Cavity => experiments::cavity(&cfg, &out_dir),
        Experiment::Single => experiments::single(&cfg, &out_dir),
    })
    .map_err(|e| RunError::Failed(e.to_string()))
}
