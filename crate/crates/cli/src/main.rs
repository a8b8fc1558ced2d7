use std::path::PathBuf;
use std::process::ExitCode;

use apcgl_cli::{cmd_blowup, cmd_converge, cmd_simulate, cmd_validate, RunConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "apcgl", version, about = "Lie-Trotter solver for the complex Ginzburg-Landau equation on a frequency lattice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the configured data and write trajectory.csv and summary.csv.
    Simulate(Common),
    /// Error against the pseudospectral reference for several step sizes.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Descending step sizes, each dividing the horizon.
        #[arg(long, value_delimiter = ',')]
        h_list: Option<Vec<f64>>,
    },
    /// Run the invariant suite.
    Validate(Common),
    /// Blow-up time estimates for scaled initial data.
    Blowup {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        scales: Option<Vec<f64>>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Simulate(c) | Command::Validate(c) => c,
        Command::Converge { common, .. } | Command::Blowup { common, .. } => common,
    };
    let result = RunConfig::load(&common.config).and_then(|config| {
        let out = common.out.as_deref();
        match &cli.command {
            Command::Simulate(_) => cmd_simulate(&config, out),
            Command::Converge { h_list, .. } => cmd_converge(&config, h_list.as_deref(), out),
            Command::Validate(_) => cmd_validate(&config),
            Command::Blowup { scales, .. } => cmd_blowup(&config, scales.as_deref(), out),
        }
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("apcgl: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
