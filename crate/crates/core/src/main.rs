use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use teachsim_core::cli::runner::EXIT_INVALID;
use teachsim_core::cli::{parse_config_for, run, CliError, Mode};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Theory,
    Simulate,
    Compare,
    AveragesCheck,
    Sweep,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Theory => Mode::Theory,
            ModeArg::Simulate => Mode::Simulate,
            ModeArg::Compare => Mode::Compare,
            ModeArg::AveragesCheck => Mode::AveragesCheck,
            ModeArg::Sweep => Mode::Sweep,
        }
    }
}

/// Theory and simulation of a perceptron student learning from a moving teacher.
#[derive(Debug, Parser)]
#[command(name = "teachsim", version)]
struct Args {
    mode: ModeArg,

    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: PathBuf,

    /// Output directory (overrides `output_path`).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Simulation / oracle seed (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INVALID as u8 } else { 0 });
        }
    };
    if !args.quiet {
        env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    }

    let outcome = std::fs::read_to_string(&args.config)
        .map_err(|source| CliError::Io {
            path: args.config.clone(),
            source,
        })
        .and_then(|text| Ok(parse_config_for(&text, Some(args.mode.into()))?))
        .and_then(|mut config| {
            if let Some(seed) = args.seed {
                config.sim.seed = seed;
            }
            let out_dir = args.out.clone().unwrap_or_else(|| config.output_path.clone());
            run(&config, &out_dir, args.quiet)
        });

    match outcome {
        Ok(report) => {
            if !args.quiet {
                for f in &report.files {
                    eprintln!("wrote {}", f.display());
                }
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
