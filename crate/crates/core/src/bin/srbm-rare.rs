use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use srbm_rare::error::Error;
use srbm_rare::estimators::Algorithm;
use srbm_rare::experiment::{emit, load_config, render, run, OutputConfig, OutputFormat, RunOptions};

#[derive(Parser)]
#[command(
    name = "srbm-rare",
    version,
    about = "Rare-event estimation for reflecting Brownian motion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// mc, split or restart
        #[arg(long)]
        algorithm: Option<Algorithm>,
        /// Comma-separated list of n values.
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<u32>>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replications: Option<u64>,
        #[arg(long, env = "SRBM_RARE_THREADS")]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<OutputFormat>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let Command::Run {
        config,
        algorithm,
        n,
        seed,
        replications,
        threads,
        out,
        format,
    } = cli.command;

    let mut cfg = match load_config(&config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(a) = algorithm {
        cfg.algorithm.name = a;
    }
    if let Some(n) = n {
        cfg.scenario.n = n;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(r) = replications {
        cfg.algorithm.replications = r;
    }
    if let Some(path) = out {
        let format = format
            .or(cfg.output.as_ref().map(|o| o.format))
            .unwrap_or(OutputFormat::Json);
        cfg.output = Some(OutputConfig {
            path: path.display().to_string(),
            format,
        });
    } else if let (Some(f), Some(o)) = (format, cfg.output.as_mut()) {
        o.format = f;
    }
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }

    let manifest = match run(&cfg, &RunOptions { threads }) {
        Ok(m) => m,
        Err(e @ (Error::Config(_) | Error::Model(_))) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let written = match &cfg.output {
        Some(o) => emit(&manifest, o.format, o.path.as_ref()),
        None => {
            print!("{}", render(&manifest, format.unwrap_or(OutputFormat::Json)));
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {}", Error::from(e));
        return ExitCode::from(2);
    }
    let failed: Vec<String> = manifest
        .results
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| format!("n = {}: {e}", r.n)))
        .collect();
    for f in &failed {
        eprintln!("error: {f}");
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
