#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use gelfree::config::{Command, RunConfig};
use gelfree::massflow::{derive_seed, merge_logs, ObservationLog, Observer, ParticleSystem, RunLimits};
use gelfree::output::{write_csv_file, Cell};
use gelfree::selfsimilar::SelfSimilarProfile;
use gelfree::validation::{run_criterion, ValidationReport, ValidationSettings, CRITERIA};
use gelfree::{Characteristics, CoreError, LaplaceEvaluator};

#[derive(Parser)]
#[command(name = "gelfree", version, about = "Coagulation with multiplicative kernel and uniform fragmentation")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Tabulate L(t, s) on a (t, s) grid
    Analytic(AnalyticArgs),
    /// Dump one characteristic path (t, Sigma, ell)
    Characteristics(CharArgs),
    /// Tabulate the self-similar profile L_star and M_star
    Selfsim(SelfsimArgs),
    /// Run the mass-flow particle simulation
    Simulate(SimulateArgs),
    /// Run the validation suite and write report.txt
    Validate(ValidateArgs),
}

#[derive(Args)]
struct Common {
    /// key = value file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<String>,
    #[arg(long)]
    k: Option<String>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct AnalyticArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    measure: Option<String>,
    #[arg(long)]
    t_grid: Option<String>,
    #[arg(long)]
    s_grid: Option<String>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct CharArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    measure: Option<String>,
    /// Starting point of the path
    #[arg(long)]
    s0: Option<String>,
    /// Number of equally spaced times on [0, T(s0)]
    #[arg(long)]
    points: Option<String>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SelfsimArgs {
    #[command(flatten)]
    common: Common,
    /// Gaver-Stehfest order (even, 8..=18)
    #[arg(long)]
    order: Option<String>,
    /// Grid used for both s (L_star) and x (M_star)
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    measure: Option<String>,
    #[arg(long)]
    n_particles: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    replicates: Option<String>,
    #[arg(long)]
    t_end: Option<String>,
    #[arg(long)]
    observe_at: Option<String>,
    #[arg(long)]
    s_grid: Option<String>,
    /// Maximum number of events, or "none"
    #[arg(long)]
    event_cap: Option<String>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct ValidateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n_particles: Option<String>,
    #[arg(long)]
    seed: Option<String>,
}

enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Config(_) | CoreError::Domain(_) | CoreError::Measure(_) => Failure::Usage(e.to_string()),
            other => Failure::Numeric(other.to_string()),
        }
    }
}

fn build_config(command: Command, common: &Common, flags: &[(&str, &Option<String>)]) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::defaults(command);
    if let Some(path) = &common.config {
        cfg.apply_file(path)?;
    }
    let shared = [("k", &common.k), ("out_dir", &common.out_dir)];
    for (key, value) in shared.iter().chain(flags) {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", cfg.out_dir.display())))?;
    Ok(cfg)
}

fn out_path(cfg: &RunConfig, name: &str) -> PathBuf {
    Path::new(&cfg.out_dir).join(name)
}

fn analytic(cfg: &RunConfig) -> Result<(), Failure> {
    let ev = LaplaceEvaluator::new(cfg.measure_spec()?, cfg.k)?;
    let blocks = cfg
        .t_grid
        .par_iter()
        .map(|&t| {
            let slice = ev.at_time(t)?;
            cfg.s_grid
                .iter()
                .map(|&s| {
                    let slope = if s == 0.0 { Some(slice.dl_ds_at_zero()?) } else { None };
                    Ok(vec![t.into(), s.into(), slice.l(s)?.into(), slope.into()])
                })
                .collect::<Result<Vec<Vec<Cell>>, CoreError>>()
        })
        .collect::<Result<Vec<_>, CoreError>>()?;
    let rows: Vec<Vec<Cell>> = blocks.into_iter().flatten().collect();
    let path = out_path(cfg, "analytic.csv");
    write_csv_file(&path, &["t", "s", "L", "dL_ds_at_zero_if_s0"], &rows)?;
    println!("wrote {} ({} rows)", path.display(), rows.len());
    Ok(())
}

fn characteristics(cfg: &RunConfig) -> Result<(), Failure> {
    let chars = Characteristics::new(cfg.measure_spec()?, cfg.k)?;
    let hit = chars.time_to_axis(cfg.s0)?;
    let mut rows = Vec::with_capacity(cfg.points);
    for i in 0..cfg.points {
        let t = if i + 1 == cfg.points { hit } else { hit * i as f64 / (cfg.points - 1) as f64 };
        rows.push(vec![t.into(), chars.sigma_closed(t, cfg.s0)?.into(), chars.ell_closed(t, cfg.s0)?.into()]);
    }
    let path = out_path(cfg, "characteristics.csv");
    write_csv_file(&path, &["t", "Sigma", "ell"], &rows)?;
    println!("wrote {} (s0 = {}, T(s0) = {hit:.16e})", path.display(), cfg.s0);
    Ok(())
}

fn selfsim(cfg: &RunConfig) -> Result<(), Failure> {
    let profile = SelfSimilarProfile::with_order(cfg.k, cfg.order)?;
    let l_rows = cfg
        .grid
        .iter()
        .map(|&s| Ok(vec![s.into(), profile.l_star(s)?.into()]))
        .collect::<Result<Vec<Vec<Cell>>, CoreError>>()?;
    let inversion = profile.m_star_grid(&cfg.grid)?;
    for w in &inversion.warnings {
        eprintln!("warning: x = {}: {} ({:.3e})", w.x, w.message, w.magnitude);
    }
    let m_rows: Vec<Vec<Cell>> = inversion.xs.iter().zip(&inversion.values).map(|(&x, &m)| vec![x.into(), m.into()]).collect();
    let lp = out_path(cfg, "selfsim_L.csv");
    let mp = out_path(cfg, "selfsim_M.csv");
    write_csv_file(&lp, &["s", "L_star"], &l_rows)?;
    write_csv_file(&mp, &["x", "M_star"], &m_rows)?;
    println!("wrote {} and {}", lp.display(), mp.display());
    Ok(())
}

fn simulate(cfg: &RunConfig) -> Result<(), Failure> {
    let measure = cfg.measure_spec()?;
    let mut observers: Vec<Observer> = cfg.s_grid.iter().map(|&s| Observer::Laplace(s)).collect();
    observers.push(Observer::Mean);
    let times = cfg.observation_times();
    let limits = RunLimits { event_cap: cfg.event_cap, ..RunLimits::default() };
    let runs = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut sys = ParticleSystem::init_from_measure(&measure, cfg.n_particles, cfg.k, derive_seed(cfg.seed, r))?;
            sys.run_until_partial(cfg.t_end, &times, &observers, &limits)
        })
        .collect::<Result<Vec<_>, CoreError>>()?;
    let mut logs: Vec<ObservationLog> = Vec::with_capacity(runs.len());
    for (r, (log, stop)) in runs.into_iter().enumerate() {
        if let Some(e) = stop {
            println!("replicate {r}: {e}");
        }
        logs.push(log);
    }
    // replicates that stopped early contribute only the times they reached
    let reached = logs.iter().map(|l| l.series.first().map_or(0, |s| s.points.len())).min().unwrap_or(0);
    for log in &mut logs {
        for s in &mut log.series {
            s.points.truncate(reached);
        }
    }
    let merged = merge_logs(&logs).expect("at least one replicate");
    for series in &merged.series {
        let rows: Vec<Vec<Cell>> =
            series.points.iter().map(|p| vec![p.time.into(), p.estimate.into(), p.std_error.into()]).collect();
        let path = out_path(cfg, &format!("simulate_{}.csv", series.observer.name()));
        write_csv_file(&path, &["time", "estimate", "std_error"], &rows)?;
    }
    println!(
        "simulated {} replicate(s) of N = {}: {} events, {} of {} observation times reached",
        cfg.replicates,
        cfg.n_particles,
        merged.event_count,
        reached,
        times.len()
    );
    Ok(())
}

fn validate(cfg: &RunConfig) -> Result<bool, Failure> {
    let settings = ValidationSettings::from(cfg);
    let mut criteria = Vec::new();
    for id in 1..=CRITERIA {
        let started = Instant::now();
        let result = run_criterion(id, &settings);
        eprintln!("criterion {id} finished in {:.2}s", started.elapsed().as_secs_f64());
        criteria.push(result);
    }
    let report = ValidationReport { settings, criteria };
    let body = report.render();
    let path = out_path(cfg, "report.txt");
    std::fs::write(&path, &body).map_err(|e| Failure::Numeric(format!("cannot write {}: {e}", path.display())))?;
    print!("{body}");
    Ok(report.all_passed())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("GELFREE_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("GELFREE_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Numeric(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<bool, Failure> {
    configure_threads()?;
    match &cli.command {
        Sub::Analytic(a) => {
            let cfg = build_config(
                Command::Analytic,
                &a.common,
                &[("measure", &a.measure), ("t_grid", &a.t_grid), ("s_grid", &a.s_grid)],
            )?;
            analytic(&cfg)?;
        }
        Sub::Characteristics(a) => {
            let cfg = build_config(
                Command::Characteristics,
                &a.common,
                &[("measure", &a.measure), ("s0", &a.s0), ("points", &a.points)],
            )?;
            characteristics(&cfg)?;
        }
        Sub::Selfsim(a) => {
            let cfg = build_config(Command::Selfsim, &a.common, &[("order", &a.order), ("grid", &a.grid)])?;
            selfsim(&cfg)?;
        }
        Sub::Simulate(a) => {
            let cfg = build_config(
                Command::Simulate,
                &a.common,
                &[
                    ("measure", &a.measure),
                    ("n_particles", &a.n_particles),
                    ("seed", &a.seed),
                    ("replicates", &a.replicates),
                    ("t_end", &a.t_end),
                    ("observe_at", &a.observe_at),
                    ("s_grid", &a.s_grid),
                    ("event_cap", &a.event_cap),
                ],
            )?;
            simulate(&cfg)?;
        }
        Sub::Validate(a) => {
            let cfg = build_config(
                Command::Validate,
                &a.common,
                &[("n_particles", &a.n_particles), ("seed", &a.seed)],
            )?;
            return validate(&cfg);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("numeric failure: {msg}");
            ExitCode::from(3)
        }
    }
}
