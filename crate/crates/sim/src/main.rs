use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bilayer_sim::config::{ScenarioConfig, ScenarioKind};
use bilayer_sim::export::{print_metrics, write_run, write_timoshenko};
use bilayer_sim::run::{settle, simulate};
use bilayer_sim::scenario::Scenario;
use bilayer_sim::validate::{validate_helix, validate_timoshenko, TimoshenkoSweep};
use bilayer_sim::{demo_config, metrics, stride, DEMOS};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bilayer", about = "Coupled-rod simulation of bilayer soft strips")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario file and write trajectory, energies and metrics.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the time step (s).
        #[arg(long)]
        dt: Option<f64>,
        /// Override the duration (s).
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Curvature sweep against the classical bimetal formula.
    ValidateTimoshenko {
        #[arg(long)]
        sweep: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Helical bilayer equilibrium and its bottom-stiffness trend.
    ValidateHelix {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run one of the shipped demos.
    Demo {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(DEMOS))]
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run_config(mut cfg: ScenarioConfig, out: &PathBuf, dt: Option<f64>, duration: Option<f64>) -> Result<bool> {
    if let Some(dt) = dt {
        cfg.integrator.dt = dt;
    }
    if let Some(d) = duration {
        cfg.integrator.duration = d;
    }
    cfg.validate()?;
    let mut scn = Scenario::build(&cfg).context("building scenario")?;
    let traj = match cfg.kind {
        ScenarioKind::Timoshenko | ScenarioKind::Helix => settle(&mut scn),
        _ => simulate(&mut scn, stride(&cfg)),
    };
    let m = metrics::compute(&cfg, &traj);
    write_run(out, &traj, &m)?;
    print_metrics(&mut std::io::stdout(), &m)?;
    if let Some(f) = &traj.diagnostics.failure {
        eprintln!("integration failed: {f}");
        return Ok(false);
    }
    Ok(true)
}

fn main_inner() -> Result<bool> {
    match Cli::parse().command {
        Command::Run { config, out, dt, duration } => {
            let cfg = ScenarioConfig::load(&config)?;
            run_config(cfg, &out, dt, duration)
        }
        Command::Demo { name, out } => {
            let Some(cfg) = demo_config(&name) else { bail!("unknown demo {name}") };
            run_config(cfg?, &out, None, None)
        }
        Command::ValidateTimoshenko { sweep, out } => {
            let sweep = TimoshenkoSweep::load(&sweep)?;
            let rows = validate_timoshenko(&sweep);
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            write_timoshenko(&rows, &out.join("timoshenko.csv"))?;
            let mut ok = true;
            for r in &rows {
                let pass = r.passes(&sweep);
                ok &= pass;
                println!(
                    "m={:<5} n={:<4} sim={:.4} classical={:.4} err={:.2}% planar={:.4} err={:.2}% {}",
                    r.modulus_ratio,
                    r.thickness_ratio,
                    r.simulated,
                    r.classical,
                    100.0 * r.rel_error,
                    r.planar,
                    100.0 * r.planar_rel_error,
                    if pass { "ok" } else { r.failure.as_deref().unwrap_or("FAIL") }
                );
            }
            Ok(ok)
        }
        Command::ValidateHelix { config } => {
            let cfg = ScenarioConfig::load(&config)?;
            let report = validate_helix(&cfg, &[4.0, 16.0]);
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(report.passes())
        }
    }
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
