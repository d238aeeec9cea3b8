//! Command-line front end.

use clap::{Parser, Subcommand};
use couette_spectral::experiments::presets::{audit_saved_run, execute_mu_sweep};
use couette_spectral::experiments::run::resolve_output_dir;
use couette_spectral::experiments::{execute_preset, presets, run_configured, ExperimentConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "couette", version, about = "Per-mode simulator for the linearized compressible Couette flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation from a config file or a named preset.
    Simulate {
        /// Path to a TOML config (mutually exclusive with --preset).
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Preset name; `presets` lists the available ones.
        #[arg(long)]
        preset: Option<String>,
        /// Seed for preset runs (configs carry their own).
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Shear viscosity override for presets that accept one.
        #[arg(long)]
        mu: Option<f64>,
        /// Output directory (created if missing).
        #[arg(long, default_value = "runs/out")]
        output: PathBuf,
    },
    /// Re-audit a saved run directory for one claim.
    Audit {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        claim: String,
    },
    /// Wrap a preset config over a list of shear viscosities.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated list, e.g. 1e-2,1e-3,1e-4.
        #[arg(long, value_delimiter = ',')]
        mu: Vec<f64>,
        #[arg(long, default_value = "runs/sweep")]
        output: PathBuf,
    },
    /// List the presets and the claims they audit.
    Presets,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> couette_spectral::Result<bool> {
    match cli.command {
        Command::Simulate {
            config,
            preset,
            seed,
            mu,
            output,
        } => {
            let out = resolve_output_dir(&output);
            let report = match (config, preset) {
                (Some(path), None) => {
                    let cfg = ExperimentConfig::load(&path)?;
                    let dir = cfg
                        .output_dir
                        .as_ref()
                        .map(|d| resolve_output_dir(std::path::Path::new(d)))
                        .unwrap_or(out);
                    run_configured(&cfg, &dir)?
                }
                (None, Some(name)) => execute_preset(&name, seed, mu, &out)?,
                _ => {
                    return Err(couette_spectral::Error::Config(
                        "pass exactly one of --config or --preset".into(),
                    ))
                }
            };
            for a in &report.audits {
                println!(
                    "{}: {} (fitted {:.6e}, required {:.6e})",
                    a.claim,
                    if a.pass { "PASS" } else { "FAIL" },
                    a.fitted,
                    a.required
                );
            }
            println!("run dir: {}", report.dir.display());
            Ok(report.pass)
        }
        Command::Audit { run, claim } => {
            let record = audit_saved_run(&run, &claim)?;
            println!("{}", serde_json::to_string_pretty(&record).unwrap());
            Ok(record.pass)
        }
        Command::Sweep { config, mu, output } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = resolve_output_dir(&output);
            let report = execute_mu_sweep(&cfg.preset, &mu, cfg.seed, &out)?;
            for a in &report.audits {
                println!(
                    "{}: {} (fitted {:.6e}, required {:.6e})",
                    a.claim,
                    if a.pass { "PASS" } else { "FAIL" },
                    a.fitted,
                    a.required
                );
            }
            Ok(report.pass)
        }
        Command::Presets => {
            for p in presets() {
                println!("{}: {}", p.name, p.claims.join(", "));
            }
            Ok(true)
        }
    }
}
