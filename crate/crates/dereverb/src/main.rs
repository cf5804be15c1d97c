use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dereverb::cli::{
    cmd_apply, cmd_degrade, cmd_evaluate, cmd_invert, cmd_simulate, cmd_sweep, exit_code,
    SweepParameter,
};
use dereverb::scenario::ScenarioConfig;

#[derive(Parser)]
#[command(
    name = "dereverb",
    version,
    about = "Image-source room simulation, regularized inverse filtering, and dereverberation metrics"
)]
struct Cli {
    /// Seed for randomized scenarios. Accepted for interface stability;
    /// every current command is fully deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the configured scenario into WAV files plus a manifest.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override config keys, e.g. --set inversion.beta=0.05
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Produce the synthetic degraded proxy of a simulated set.
    Degrade {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Build inverse filters for a simulated or degraded set.
    Invert {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Filter unit impulses through filters and plant; write outputs.
    Apply {
        #[arg(long)]
        plant: PathBuf,
        #[arg(long)]
        filters: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a filter set against a plant; write report.csv.
    Evaluate {
        #[arg(long)]
        plant: PathBuf,
        #[arg(long)]
        filters: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-run the pipeline across parameter values; write sweep.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        parameter: SweepParameter,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}

fn run(cli: Cli) -> dereverb::Result<()> {
    match cli.command {
        Command::Simulate { config, out, set } => {
            let cfg = ScenarioConfig::from_path_with_overrides(&config, &set)?;
            cmd_simulate(&cfg, &out)
        }
        Command::Degrade { manifest, out, set } => cmd_degrade(&manifest, &set, &out),
        Command::Invert { manifest, out, set } => cmd_invert(&manifest, &set, &out),
        Command::Apply { plant, filters, out } => cmd_apply(&plant, &filters, &out),
        Command::Evaluate { plant, filters, out } => cmd_evaluate(&plant, &filters, &out),
        Command::Sweep { config, parameter, values, out, set } => {
            let cfg = ScenarioConfig::from_path_with_overrides(&config, &set)?;
            cmd_sweep(&cfg, parameter, &values, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
