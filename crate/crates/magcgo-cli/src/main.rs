use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use magcgo::config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "magcgo", version, about = "CGO numerics for magnetic Schrodinger operators on warped cylinders")]
struct Cli {
    /// Experiment config (TOML). Defaults are used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV and JSON artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides `experiment.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `experiment.grid_scale`.
    #[arg(long, global = true)]
    grid_scale: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Mollifier rate ladders.
    MollifyRates,
    /// Cauchy transform error halving on manufactured data.
    DbarCheck,
    /// Eikonal, transport, remainder ladders.
    CgoBuild,
    /// Boundary and interior Carleman ratios.
    CarlemanCheck,
    /// Green residuals and the gauge identity suite.
    Identity,
    /// Regularized recovery of the electric potential.
    RecoverQ,
    /// Log-polar coordinate change check.
    EuclidMap,
    /// Advection-to-magnetic reduction.
    Advect,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::MollifyRates => "mollify-rates",
            Command::DbarCheck => "dbar-check",
            Command::CgoBuild => "cgo-build",
            Command::CarlemanCheck => "carleman-check",
            Command::Identity => "identity",
            Command::RecoverQ => "recover-q",
            Command::EuclidMap => "euclid-map",
            Command::Advect => "advect",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(p) => match ExperimentConfig::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.experiment.seed = s;
    }
    if let Some(g) = cli.grid_scale {
        cfg.experiment.grid_scale = g;
    }
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let name = cli.command.name();
    let art = match magcgo_cli::run(name, &cfg) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = art.write(&cli.out, name, &cfg) {
        eprintln!("error: writing artifacts: {e}");
        return ExitCode::from(2);
    }
    for v in &art.verdicts {
        println!("{} {}", if v.passed { "PASS" } else { "FAIL" }, v.anchor);
    }
    if art.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
