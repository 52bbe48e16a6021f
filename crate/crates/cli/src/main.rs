use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mfesn_cli::{cmd_bounds, cmd_run, cmd_synth, CliError, Overrides};
use mfesn_core::synthetic::SyntheticConfig;

#[derive(Parser)]
#[command(name = "mfesn", version, about = "MFESN ensemble forecasting and regret-bound validation")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Overrides the master seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overrides the output directory in the config.
    #[arg(long, global = true, env = "MFESN_OUT_DIR")]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the configured ensembles and run the online combination exercise.
    Run { config: PathBuf },
    /// Monte-Carlo check of the regret bounds.
    Bounds { config: PathBuf },
    /// Write a synthetic mixed-frequency dataset.
    Synth {
        dir: PathBuf,
        #[arg(long, default_value_t = 80)]
        quarters: usize,
        #[arg(long, default_value_t = 30)]
        daily_kappa: usize,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let overrides = Overrides {
        seed: cli.seed,
        out_dir: cli.out_dir,
    };
    match cli.command {
        Command::Run { config } => {
            let out = cmd_run(&config, &overrides)?;
            println!("wrote {} files to {}", out.files.len(), out.out_dir.display());
        }
        Command::Bounds { config } => {
            let out = cmd_bounds(&config, &overrides)?;
            println!("{} rows PASS; report at {}", out.rows.len(), out.report.display());
        }
        Command::Synth {
            dir,
            quarters,
            daily_kappa,
        } => {
            let config = SyntheticConfig {
                quarters,
                daily_kappa,
                seed: overrides.seed.unwrap_or(0),
                ..SyntheticConfig::default()
            };
            println!("wrote {}", cmd_synth(&dir, &config)?.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
