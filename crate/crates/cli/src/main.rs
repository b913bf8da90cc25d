use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};
use pension_cli::{run, Command, RunConfig};

/// Simulate and compare pension accumulation strategies.
#[derive(Debug, Parser)]
#[command(name = "pension-sim", version)]
struct Args {
    /// simulate, evaluate, solve-dp, frontier or report.
    #[arg(value_enum)]
    command: Option<Command>,

    /// Run configuration (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory; overrides `out` from the config.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads; defaults to the number of available cores.
    #[arg(long)]
    threads: Option<usize>,

    /// Print every configuration key with its default value and exit.
    #[arg(long)]
    print_defaults: bool,
}

fn usage_error(message: &str) -> ExitCode {
    eprintln!("error: {message}\n\n{}", Args::command().render_usage());
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => {
                    eprintln!("\n{}", Args::command().render_usage());
                    ExitCode::from(1)
                }
            };
        }
    };
    if args.print_defaults {
        print!("{}", RunConfig::default().to_text());
        return ExitCode::SUCCESS;
    }
    let Some(command) = args.command else {
        return usage_error("a subcommand is required");
    };
    let Some(config) = args.config else {
        return usage_error("--config <file> is required");
    };
    if args.threads == Some(0) {
        return usage_error("--threads must be at least 1");
    }
    let mut cfg = match RunConfig::from_file(&config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(out) = args.out {
        cfg.out = out;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads.unwrap_or(0))
        .build();
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(&cfg, command)) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
