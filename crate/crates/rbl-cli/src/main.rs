//! `rbl` — rigid body localization experiments from the command line.
//!
//! Three subcommands:
//!
//! - `estimate` runs a single estimator on one set of measurements
//!   (simulated or from a file) and prints the pose.
//! - `sweep` runs a Monte-Carlo sweep over the reference range and
//!   writes a CSV plus a reproducibility manifest.
//! - `crb` prints the root Cramér-Rao bound columns of a sweep without
//!   running any estimator.
//!
//! Exit codes: 0 success, 2 configuration/usage error, 3 estimator
//! failure, 4 unwritable output.

mod config;
mod output;

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rbl_core::estimators::{
    classical_ls, ouc_ls, ouc_tls, suc_ls, suc_tls, unconstrained_ls, PoseEstimate,
};
use rbl_core::geometry::{euler_to_rotation, rigid_transform, Pose};
use rbl_core::measurement::{
    build_whitened_model, center_model, draw_anchors, simulate_ranges, true_ranges, zeta_from_db,
    RangeData,
};
use rbl_core::montecarlo::{run_experiment, EstimatorKind};

use config::{parse_scenario, parse_sweep, ScenarioConfig};
use output::{float_cell, render_csv, render_manifest};

#[derive(Parser)]
#[command(
    name = "rbl",
    version,
    about = "Rigid body localization: pose estimation from anchor-to-sensor ranges"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a pose from one scenario.
    Estimate {
        /// Scenario config file.
        scenario: PathBuf,
        /// Range measurement file (M rows of N ranges, meters).
        #[arg(long, conflicts_with = "simulate")]
        measurements: Option<PathBuf>,
        /// Simulate measurements from the scenario's true pose.
        #[arg(long)]
        simulate: bool,
        /// With --simulate: skip the noise injection.
        #[arg(long, requires = "simulate")]
        noiseless: bool,
        /// One of: ls, suc-ls, ouc-ls, suc-tls, ouc-tls, classical.
        #[arg(long)]
        method: String,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a Monte-Carlo sweep and write CSV + manifest.
    Sweep {
        /// Sweep config file.
        config: PathBuf,
        /// Output CSV path; the manifest lands next to it.
        #[arg(long)]
        out: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's trial count.
        #[arg(long)]
        trials: Option<usize>,
        /// Draw one anchor set for the whole sweep.
        #[arg(long)]
        fixed_anchors: bool,
    },
    /// Print the root CRB columns of a sweep without running estimators.
    Crb {
        /// Sweep config file.
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        fixed_anchors: bool,
    },
}

enum CliError {
    /// Bad configuration, arguments, or input files (exit 2).
    Config(String),
    /// The estimation itself failed (exit 3).
    Estimator(rbl_core::Error),
    /// Output could not be written (exit 4).
    Output(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Estimator(_) => 3,
            CliError::Output(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Estimator(e) => write!(f, "estimation failed: {e}"),
            CliError::Output(msg) => write!(f, "{msg}"),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Estimate {
            scenario,
            measurements,
            simulate,
            noiseless,
            method,
            seed,
        } => cmd_estimate(&scenario, measurements.as_deref(), simulate, noiseless, &method, seed),
        Command::Sweep {
            config,
            out,
            seed,
            trials,
            fixed_anchors,
        } => cmd_sweep(&config, &out, seed, trials, fixed_anchors),
        Command::Crb {
            config,
            seed,
            trials,
            fixed_anchors,
        } => cmd_crb(&config, seed, trials, fixed_anchors),
    }
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

fn load_sweep(
    path: &Path,
    seed: Option<u64>,
    trials: Option<usize>,
    fixed_anchors: bool,
) -> Result<rbl_core::montecarlo::ExperimentConfig, CliError> {
    let text = read_to_string(path)?;
    let mut cfg = parse_sweep(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(trials) = trials {
        cfg.trials = trials;
    }
    if fixed_anchors {
        cfg.fixed_anchors = true;
    }
    Ok(cfg)
}

fn cmd_sweep(
    path: &Path,
    out: &Path,
    seed: Option<u64>,
    trials: Option<usize>,
    fixed_anchors: bool,
) -> Result<(), CliError> {
    let cfg = load_sweep(path, seed, trials, fixed_anchors)?;
    if cfg.estimators.is_empty() {
        return Err(CliError::Config("no estimators selected".into()));
    }
    let rows = run_experiment(&cfg).map_err(|e| CliError::Config(e.to_string()))?;

    let csv = render_csv(&cfg.estimators, &rows);
    std::fs::write(out, &csv)
        .map_err(|e| CliError::Output(format!("cannot write {}: {e}", out.display())))?;

    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let csv_name = out
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let manifest = render_manifest(&cfg, &csv_name, &rows, created);
    let manifest_path = manifest_path_for(out);
    std::fs::write(&manifest_path, manifest)
        .map_err(|e| CliError::Output(format!("cannot write {}: {e}", manifest_path.display())))?;

    println!(
        "wrote {} ({} rows) and {}",
        out.display(),
        rows.len(),
        manifest_path.display()
    );
    Ok(())
}

fn manifest_path_for(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest");
    PathBuf::from(name)
}

fn cmd_crb(
    path: &Path,
    seed: Option<u64>,
    trials: Option<usize>,
    fixed_anchors: bool,
) -> Result<(), CliError> {
    let mut cfg = load_sweep(path, seed, trials, fixed_anchors)?;
    // Same trial loop as a sweep (anchor draws, noise, whitening), with
    // the estimator set empty.
    cfg.estimators.clear();
    let rows = run_experiment(&cfg).map_err(|e| CliError::Config(e.to_string()))?;
    println!("zeta_db,rcrb_q,rcrb_t,urcrb_q,urcrb_t,crb_failures");
    for row in &rows {
        println!(
            "{},{},{},{},{},{}",
            float_cell(row.zeta_db),
            float_cell(row.rcrb_q),
            float_cell(row.rcrb_t),
            float_cell(row.urcrb_q),
            float_cell(row.urcrb_t),
            row.crb_failures
        );
    }
    Ok(())
}

/// Read an M×N whitespace-separated matrix of ranges (meters).
fn read_ranges(path: &Path) -> Result<DMatrix<f64>, CliError> {
    let text = read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| {
                    CliError::Config(format!(
                        "{}: line {}: `{tok}` is not a number",
                        path.display(),
                        lineno + 1
                    ))
                })
            })
            .collect::<Result<_, _>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(CliError::Config(format!(
                    "{}: line {}: expected {} columns, got {}",
                    path.display(),
                    lineno + 1,
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Config(format!(
            "{}: no measurement rows",
            path.display()
        )));
    }
    let (m, n) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(m, n, |i, j| rows[i][j]))
}

fn scenario_anchors(scenario: &ScenarioConfig, seed: u64) -> DMatrix<f64> {
    match &scenario.anchor_positions {
        Some(a) => a.clone(),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            draw_anchors(scenario.anchors, scenario.anchor_radius_m, &mut rng)
        }
    }
}

fn cmd_estimate(
    scenario_path: &Path,
    measurements: Option<&Path>,
    simulate: bool,
    noiseless: bool,
    method: &str,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let method: EstimatorKind = method.parse().map_err(|e| {
        CliError::Config(format!(
            "{e}\nusage: rbl estimate <SCENARIO> --method <ls|suc-ls|ouc-ls|suc-tls|ouc-tls|classical> [--simulate [--noiseless] | --measurements <FILE>]"
        ))
    })?;
    let text = read_to_string(scenario_path)?;
    let scenario = parse_scenario(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", scenario_path.display())))?;
    let seed = seed.unwrap_or(scenario.seed);

    let anchors = scenario_anchors(&scenario, seed);
    let topology = scenario.topology.matrix();
    let pose = Pose::new(
        euler_to_rotation(scenario.rotation_deg, scenario.euler_order),
        nalgebra::Vector3::from_column_slice(&scenario.translation_m),
    );
    let zeta = zeta_from_db(scenario.zeta_db);

    let data = if simulate {
        let r = true_ranges(&anchors, &rigid_transform(&pose, &topology));
        if noiseless {
            RangeData::exact(&r, zeta)
        } else {
            // The anchor draw and the noise share one stream, in that
            // order, so a seed pins the whole simulation.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            if scenario.anchor_positions.is_none() {
                draw_anchors(scenario.anchors, scenario.anchor_radius_m, &mut rng);
            }
            simulate_ranges(&r, zeta, &mut rng)
        }
    } else {
        let path = measurements.ok_or_else(|| {
            CliError::Config("either --simulate or --measurements <FILE> is required".into())
        })?;
        let y = read_ranges(path)?;
        if y.nrows() != anchors.ncols() || y.ncols() != topology.ncols() {
            return Err(CliError::Config(format!(
                "measurements are {}×{} but the scenario has {} anchors and {} sensors",
                y.nrows(),
                y.ncols(),
                anchors.ncols(),
                topology.ncols()
            )));
        }
        RangeData {
            squared: y.component_mul(&y),
            ranges: y,
            zeta,
        }
    };

    let model =
        build_whitened_model(&anchors, &data, &scenario.whiten).map_err(CliError::Estimator)?;

    if method == EstimatorKind::Classical {
        let positions = classical_ls(&model).map_err(CliError::Estimator)?;
        println!("method: classical");
        println!("positions:");
        for col in positions.column_iter() {
            println!("  {} {} {}", col[0], col[1], col[2]);
        }
        return Ok(());
    }

    let estimate: PoseEstimate = if method == EstimatorKind::Ls {
        unconstrained_ls(&model, &topology).map_err(CliError::Estimator)?
    } else {
        let centered = center_model(&model, &topology).map_err(CliError::Estimator)?;
        match method {
            EstimatorKind::SucLs => suc_ls(&centered, &model, &topology),
            EstimatorKind::SucTls => suc_tls(&centered, &model, &topology),
            EstimatorKind::OucLs => ouc_ls(&centered, &model, &topology, &scenario.newton),
            EstimatorKind::OucTls => ouc_tls(&centered, &model, &topology, &scenario.newton),
            _ => unreachable!(),
        }
        .map_err(CliError::Estimator)?
    };

    println!("method: {}", estimate.method.as_str());
    println!("rotation:");
    for i in 0..3 {
        println!(
            "  {} {} {}",
            estimate.rotation[(i, 0)],
            estimate.rotation[(i, 1)],
            estimate.rotation[(i, 2)]
        );
    }
    println!(
        "translation: {} {} {}",
        estimate.translation[0], estimate.translation[1], estimate.translation[2]
    );
    println!("det: {}", estimate.det());
    println!("iterations: {}", estimate.iterations);
    println!("converged: {}", estimate.converged);
    Ok(())
}
