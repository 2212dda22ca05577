use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dengue_nonlocal::config::{load_config, RunConfig};
use dengue_nonlocal::equilibria::EquilibriumSet;
use dengue_nonlocal::lyapunov::CertTolerance;
use dengue_nonlocal::output::{snapshots_csv, timeseries_csv, write_file};
use dengue_nonlocal::sweep::{run_scenario, run_sweep, sweep_csv, SweepSpec};
use dengue_nonlocal::ModelError;

#[derive(Debug, Parser)]
#[command(name = "dengue", version, about = "Nonlocal delayed dengue model: simulation and Lyapunov certification")]
struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Allowed per-step increase of V relative to V(0).
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// Largest admissible value of any dissipation term.
    #[arg(long, global = true, default_value_t = 1e-12)]
    dissipation_tol: f64,
    /// Seed of the initial-history perturbation (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate and write timeseries.csv and snapshots.csv.
    Simulate,
    /// Print R0, regime, both equilibria and residuals as JSON.
    Equilibria,
    /// Integrate with Lyapunov evaluation and write certificate.json.
    Certify,
    /// Sweep one parameter and write sweep.csv.
    Sweep {
        /// Parameter name (a model field, or beta_m / beta_h).
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
        #[arg(long, default_value = "sweep")]
        scenario: String,
    },
}

enum Failure {
    Validation(String),
    Certification(String),
    Runtime(String),
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::NonFinite { .. } | ModelError::BoxViolation { .. } => Failure::Runtime(e.to_string()),
            other => Failure::Validation(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

fn load(cli: &Cli) -> Result<RunConfig, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::Validation("--config is required".into()))?;
    let mut cfg = load_config(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn tolerance(cli: &Cli) -> CertTolerance {
    CertTolerance {
        v_rel: cli.tol,
        d_abs: cli.dissipation_tol,
        ..CertTolerance::default()
    }
}

fn simulate(cli: &Cli, mut cfg: RunConfig, certify: bool) -> Result<(), Failure> {
    if certify {
        cfg.sim.certify = true;
    }
    let out = run_scenario(&cfg, tolerance(cli))?;
    let ts = cli.out.join("timeseries.csv");
    write_file(&ts, &timeseries_csv(&out.trajectory)).map_err(|e| io_err(&ts, e))?;
    let snaps = cli.out.join("snapshots.csv");
    write_file(&snaps, &snapshots_csv(&out.trajectory, &cfg.sim.domain.grid()))
        .map_err(|e| io_err(&snaps, e))?;
    let last = out.trajectory.len() - 1;
    eprintln!(
        "t_end = {}  dist_endemic = {:.3e}  dist_dfe = {:.3e}  bounds_ok = {}",
        out.trajectory.times[last],
        out.trajectory.sup_distance_to_endemic[last],
        out.trajectory.sup_distance_to_dfe[last],
        out.trajectory.bounds_ok
    );
    if let Some(report) = out.certificate {
        let path = cli.out.join("certificate.json");
        write_file(&path, &report.to_json()).map_err(|e| io_err(&path, e))?;
        eprintln!(
            "certificate: {} (V0 = {:.6e}, V_end = {:.6e}, {} violations)",
            if report.passed { "PASS" } else { "FAIL" },
            report.certificate.v0,
            report.certificate.v_end,
            report.certificate.violations.len()
        );
        if !report.passed {
            return Err(Failure::Certification("certificate failed".into()));
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Simulate => simulate(cli, load(cli)?, false),
        Command::Certify => simulate(cli, load(cli)?, true),
        Command::Equilibria => {
            let cfg = load(cli)?;
            let set = EquilibriumSet::compute(&cfg.sim.params);
            let json = serde_json::to_string_pretty(&set).expect("serialisable");
            println!("{json}");
            Ok(())
        }
        Command::Sweep {
            param,
            values,
            scenario,
        } => {
            let spec = SweepSpec {
                base: load(cli)?,
                parameter: param.clone(),
                values: values.clone(),
                scenario: scenario.clone(),
            };
            let rows = run_sweep(&spec, tolerance(cli))?;
            let path = cli.out.join("sweep.csv");
            let csv = sweep_csv(&rows);
            write_file(&path, &csv).map_err(|e| io_err(&path, e))?;
            print!("{csv}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("validation error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Certification(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(3)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
