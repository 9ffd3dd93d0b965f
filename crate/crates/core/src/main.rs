use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use backaction::config::{RunMode, SimConfig};
use backaction::ensemble::run_ensemble;
use backaction::report::{self, EnsembleDto, TrajectoryDto};
use backaction::trajectory::run_trajectory;
use backaction::verify;
use backaction::Result;

/// Photon-counting simulator for interferometric position measurement:
/// weak per-photon backaction, full-trajectory collapse, and Monte Carlo
/// verification of the closed-form outcome statistics.
#[derive(Debug, Parser)]
#[command(name = "backaction", version, about)]
struct Cli {
    /// Run mode: single trajectory, Monte Carlo ensemble, the built-in
    /// verification suite, or an operator-table dump.
    #[arg(long, default_value = "single")]
    mode: RunMode,

    /// Flat key = value config file; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Photon wavenumber k.
    #[arg(long)]
    k: Option<f64>,

    /// Photons per trajectory (N).
    #[arg(long = "n-photons")]
    n_photons: Option<usize>,

    /// Trajectories per ensemble (m).
    #[arg(long)]
    trajectories: Option<usize>,

    /// Master seed; trajectory j runs on RNG stream j.
    #[arg(long)]
    seed: Option<u64>,

    #[arg(long = "grid-points")]
    grid_points: Option<usize>,

    /// Grid half-width; the grid spans [-x_max, x_max].
    #[arg(long = "x-max")]
    x_max: Option<f64>,

    /// Initial-state family: gaussian or two-lobe.
    #[arg(long)]
    psi0: Option<String>,

    #[arg(long)]
    sigma0: Option<f64>,

    #[arg(long)]
    x0: Option<f64>,

    #[arg(long)]
    p0: Option<f64>,

    /// Worker threads (0 = one per CPU).
    #[arg(long)]
    threads: Option<usize>,

    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
}

impl Cli {
    fn into_config(self) -> Result<(RunMode, SimConfig)> {
        let mut config = match &self.config {
            Some(path) => SimConfig::from_file(path)?,
            None => SimConfig::default(),
        };
        if let Some(k) = self.k {
            config.k = k;
        }
        if let Some(n) = self.n_photons {
            config.n_photons = n;
        }
        if let Some(m) = self.trajectories {
            config.m_trajectories = m;
        }
        if let Some(seed) = self.seed {
            config.master_seed = seed;
        }
        if let Some(points) = self.grid_points {
            config.grid_points = points;
        }
        if let Some(x_max) = self.x_max {
            config.x_max = x_max;
        }
        if let Some(psi0) = &self.psi0 {
            config.psi0 = psi0.parse()?;
        }
        if let Some(sigma0) = self.sigma0 {
            config.sigma0 = sigma0;
        }
        if let Some(x0) = self.x0 {
            config.x0 = x0;
        }
        if let Some(p0) = self.p0 {
            config.p0 = p0;
        }
        if let Some(threads) = self.threads {
            config.threads = threads;
        }
        if let Some(out_dir) = self.out_dir {
            config.out_dir = out_dir;
        }
        config.validate()?;
        Ok((self.mode, config))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<ExitCode> {
    let (mode, config) = Cli::parse().into_config()?;

    if config.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build_global()
            .expect("rayon pool configured once");
    }
    std::fs::create_dir_all(&config.out_dir)?;

    match mode {
        RunMode::Single => run_single(&config),
        RunMode::Ensemble => run_ensemble_mode(&config),
        RunMode::Verify => run_verify(&config),
        RunMode::DumpOperators => run_dump_operators(&config),
    }
}

fn run_single(config: &SimConfig) -> Result<ExitCode> {
    let psi0 = config.initial_state()?;
    let record = run_trajectory(
        &psi0,
        config.n_photons,
        config.interferometer_params(),
        config.master_seed,
        0,
    )?;

    let json_path = config.out_dir.join("trajectory.json");
    report::write_json(&json_path, &TrajectoryDto::new(&record, config.k))?;
    let csv_path = config.out_dir.join("final_state.csv");
    record.final_state.write_csv(&csv_path)?;

    println!(
        "trajectory: N = {}, n_a = {}, n_b = {}, x_est = {:.6e}, final sigma_x^2 = {:.6e}",
        record.n_photons(),
        record.n_a,
        record.n_b,
        record.x_est,
        record.final_state.position_variance()
    );
    println!("wrote {} and {}", json_path.display(), csv_path.display());
    Ok(ExitCode::SUCCESS)
}

fn run_ensemble_mode(config: &SimConfig) -> Result<ExitCode> {
    let stats = run_ensemble(config)?;

    let json_path = config.out_dir.join("ensemble.json");
    report::write_json(&json_path, &EnsembleDto::new(&stats))?;
    let csv_path = config.out_dir.join("histogram.csv");
    std::fs::write(&csv_path, report::histogram_csv(&stats.xest_histogram))?;

    println!(
        "ensemble: m = {}, N = {}, mean x_est = {:.6e}, var x_est = {:.6e}",
        stats.m_trajectories, stats.n_photons, stats.mean_xest, stats.var_xest
    );
    for row in &stats.comparisons {
        println!(
            "  {:<34} simulated {:>14.6e}  predicted {:>14.6e}  [{}]",
            row.name,
            row.simulated,
            row.predicted,
            if row.pass { "ok" } else { "off" }
        );
    }
    println!("wrote {} and {}", json_path.display(), csv_path.display());
    Ok(ExitCode::SUCCESS)
}

fn run_verify(config: &SimConfig) -> Result<ExitCode> {
    let results = verify::run_all();
    for result in &results {
        println!("{result}");
    }
    let json_path = config.out_dir.join("verify.json");
    report::write_json(&json_path, &results)?;

    let failures: Vec<&verify::CriterionResult> =
        results.iter().filter(|r| !r.passed).collect();
    if failures.is_empty() {
        println!("all {} criteria passed", results.len());
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("{}", report::to_json(&failures)?);
        Ok(ExitCode::FAILURE)
    }
}

fn run_dump_operators(config: &SimConfig) -> Result<ExitCode> {
    let grid = config.grid()?;
    let csv_path = config.out_dir.join("operators.csv");
    std::fs::write(&csv_path, report::operators_csv(&grid, config.k))?;
    println!("wrote {}", csv_path.display());
    Ok(ExitCode::SUCCESS)
}
