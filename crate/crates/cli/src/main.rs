use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use manifold_fv_cli::commands::{cmd_compare, cmd_converge, cmd_run, cmd_verify, Options};

#[derive(Parser)]
#[command(
    name = "mfv",
    version,
    about = "Finite volume solver and entropy-solution checks on manifolds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve and write snapshots, diagnostics and a manifest.
    Run(RunArgs),
    /// Fit the L1 convergence rate against an exact solution.
    Converge {
        #[command(flatten)]
        run: RunArgs,
        /// Number of refinement levels, at least 3.
        #[arg(long, default_value_t = 3)]
        levels: u32,
    },
    /// Run the property checks (entropy, contraction, conservation, max principle, boundary membership).
    Verify(RunArgs),
    /// L1 distances between the snapshots of two runs.
    Compare {
        /// Output directory of the first run.
        run_a: PathBuf,
        /// Output directory of the second run.
        run_b: PathBuf,
        /// Directory for distances.csv and the manifest.
        #[arg(long)]
        out: PathBuf,
        /// Multiplies the contraction slack.
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Multiplies every check tolerance.
    #[arg(long, default_value_t = 1.0)]
    tolerance_scale: f64,
}

impl RunArgs {
    fn options(self) -> Options {
        Options {
            config: self.config,
            out: self.out,
            seed: self.seed,
            tolerance_scale: self.tolerance_scale,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(a) => cmd_run(&a.options()),
        Command::Converge { run, levels } => cmd_converge(&run.options(), levels),
        Command::Verify(a) => cmd_verify(&a.options()),
        Command::Compare {
            run_a,
            run_b,
            out,
            tolerance_scale,
        } => cmd_compare(&run_a, &run_b, &out, tolerance_scale),
    };
    ExitCode::from(code as u8)
}
