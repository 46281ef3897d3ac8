use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use qcontact::config::{CouplingSpec, ExperimentConfig};
use qcontact::experiment::{derived_quantities, run_experiment, run_many};
use qcontact::presets::preset;
use qcontact::topology::{exact_splitting, hybridization, localization_length, winding_number};
use qcontact::{Error, Result};

#[derive(Parser)]
#[command(name = "qcontact", version, about = "Quantum contact process simulator")]
struct Cli {
    /// Override the integrator tolerance of the config.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Override the largest Hilbert space dimension a run may allocate.
    #[arg(long, global = true)]
    max_dim: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a built-in experiment.
    Preset {
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print derived quantities as JSON without evolving.
    Analyze {
        #[command(subcommand)]
        what: Analyze,
    },
    /// Run several configs concurrently, each into `<out>/<file stem>`.
    Sweep {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum Analyze {
    Ssh {
        #[arg(long, allow_hyphen_values = true)]
        lambda_v: f64,
        #[arg(long, allow_hyphen_values = true)]
        lambda_w: f64,
        #[arg(long)]
        n: usize,
    },
    Pump { config: PathBuf },
}

impl Cli {
    fn apply(&self, mut c: ExperimentConfig) -> Result<ExperimentConfig> {
        if let Some(tol) = self.tol {
            c.run.tol = tol;
        }
        if let Some(max_dim) = self.max_dim {
            c.run.max_dim = max_dim;
        }
        c.validate()?;
        Ok(c)
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    let s = serde_json::to_string_pretty(value).map_err(|e| Error::Numerical(e.to_string()))?;
    println!("{s}");
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate { config, out } => {
            let c = cli.apply(ExperimentConfig::from_file(config)?)?;
            run_experiment(&c, out)?;
        }
        Command::Preset { name, out } => {
            let c = cli.apply(preset(name)?)?;
            run_experiment(&c, out)?;
        }
        Command::Analyze {
            what: Analyze::Ssh { lambda_v, lambda_w, n },
        } => {
            let loc = localization_length(*lambda_v, *lambda_w)?;
            let edge = hybridization(*n, *lambda_v, *lambda_w, 1.0)?;
            let (e_plus, e_minus) = exact_splitting(*n, *lambda_v, *lambda_w)?;
            let winding = if lambda_v.abs() != lambda_w.abs() {
                Some(winding_number(*lambda_v, *lambda_w, 256)?)
            } else {
                None
            };
            print_json(&json!({
                "localization": loc,
                "edge_states": edge,
                "exact_splitting": [e_plus, e_minus],
                "exact_t_hyb": 2.0 * std::f64::consts::PI / (e_plus - e_minus),
                "winding_number": winding,
            }))?;
        }
        Command::Analyze {
            what: Analyze::Pump { config },
        } => {
            let c = cli.apply(ExperimentConfig::from_file(config)?)?;
            if !matches!(c.couplings, Some(CouplingSpec::Aah { .. })) {
                return Err(Error::config("couplings.kind", "analyze pump needs aah couplings"));
            }
            print_json(&derived_quantities(&c)?)?;
        }
        Command::Sweep { configs, out } => {
            let mut jobs = Vec::new();
            for path in configs {
                let c = cli.apply(ExperimentConfig::from_file(path)?)?;
                let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                jobs.push((c, out.join(stem)));
            }
            for r in run_many(&jobs) {
                r?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
