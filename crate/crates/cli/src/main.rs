//! `vrabi`: run trajectories, sweeps and resonance studies and write
//! plot-ready CSV/JSON files.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical-invariant breach,
//! 3 configuration error.

mod config;
mod output;
mod selfcheck;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use vrabi::experiments::{
    damping_sweep, default_horizon, resonance_report_with, scan_two_photon, Observable, ResonanceScan, SweepAxis, SweepSpec,
};
use vrabi::hamiltonian::spectrum_lines;
use vrabi::SystemKind;

use config::{GridSpec, ParamOverrides, RunConfig};
use output::{write_spectrum, write_sweep, WindowColumns};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(String),
    Engine(vrabi::Error),
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Config(_) => 3,
            CliError::Failed(_) => 2,
            CliError::Engine(e) if e.is_numerical_breach() => 2,
            CliError::Engine(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Config(m) | CliError::Failed(m) => f.write_str(m),
            CliError::Engine(e) => write!(f, "{e}"),
        }
    }
}

impl From<vrabi::Error> for CliError {
    fn from(e: vrabi::Error) -> Self {
        CliError::Engine(e)
    }
}

#[derive(Parser)]
#[command(name = "vrabi", version, about = "Two-atom two-photon vacuum Rabi oscillation simulator")]
struct Cli {
    /// Output directory
    #[arg(long, global = true, env = "VRABI_OUT_DIR", default_value = "vrabi-out")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON recipe; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base name of the output files
    #[arg(long)]
    name: Option<String>,
    #[arg(long, value_parser = parse_kind)]
    kind: Option<SystemKind>,
    #[arg(long, allow_hyphen_values = true)]
    g1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    g2: Option<f64>,
    /// Mode detuning Δ (units of g1)
    #[arg(long, allow_hyphen_values = true)]
    delta_cap: Option<f64>,
    /// Mode detuning δ (units of g1)
    #[arg(long, allow_hyphen_values = true)]
    delta_small: Option<f64>,
    /// Final g1*t
    #[arg(long)]
    horizon: Option<f64>,
    /// Output grid step in g1*t
    #[arg(long)]
    output_step: Option<f64>,
}

impl Common {
    fn overrides(&self) -> ParamOverrides {
        ParamOverrides { g1: self.g1, g2: self.g2, delta_cap: self.delta_cap, delta_small: self.delta_small, ..Default::default() }
    }

    fn load(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::load(self.config.as_deref())?;
        cfg.fixed = cfg.fixed.merge(&self.overrides());
        cfg.kind = self.kind.or(cfg.kind);
        cfg.name = self.name.clone().or(cfg.name);
        cfg.horizon = self.horizon.or(cfg.horizon);
        cfg.output_step = self.output_step.or(cfg.output_step);
        Ok(cfg)
    }
}

fn parse_kind(s: &str) -> Result<SystemKind, String> {
    match s {
        "bimodal" | "bimodal_identical" => Ok(SystemKind::BimodalIdentical),
        "single" | "single_mode" | "single_mode_nonidentical" => Ok(SystemKind::SingleModeNonidentical),
        _ => Err(format!("unknown system kind {s:?} (bimodal | single_mode)")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// One unitary trajectory of the two-photon probability
    Evolve(Common),
    /// One master-equation trajectory with cavity damping
    Master {
        #[command(flatten)]
        common: Common,
        /// Sets both damping constants
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        kappa_a: Option<f64>,
        #[arg(long)]
        kappa_b: Option<f64>,
    },
    /// Parameter sweep described by a recipe file
    Scan(Common),
    /// Analytic, large-detuning and scan-based resonance positions (JSON)
    Resonance {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        lo: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        hi: Option<f64>,
    },
    /// Dressed energies and transition lines of the bimodal model
    Spectrum(Common),
    /// Oracle-equivalence and invariant checks
    Selfcheck,
}

fn single_row(cfg: &RunConfig, default_name: &str, out_dir: &std::path::Path) -> Result<(), CliError> {
    let kind = cfg.kind();
    let params = cfg.fixed.resolve();
    let horizon = cfg.horizon.unwrap_or_else(|| default_horizon(kind, &params));
    let mut spec = SweepSpec::new(kind, params, SweepAxis::DeltaSmall, vec![params.delta_small], horizon);
    if let Some(o) = &cfg.observable {
        spec.observable = o.clone();
    }
    if let Some(dt) = cfg.output_step {
        spec.output_step = dt;
    }
    let result = scan_two_photon(&spec)?;
    let row = &result.rows[0];
    for path in write_sweep(out_dir, cfg.name.as_deref().unwrap_or(default_name), &result, None)? {
        info!("wrote {}", path.display());
        println!("{}", path.display());
    }
    eprintln!("peak {:.6} at g1*t = {:.2}", row.peak_value, row.peak_time);
    Ok(())
}

fn scan(cfg: &RunConfig, out_dir: &std::path::Path) -> Result<(), CliError> {
    let kind = cfg.kind();
    let fixed = cfg.fixed.resolve();
    let axis = cfg.axis.ok_or_else(|| CliError::Config("scan needs an \"axis\"".into()))?;
    let grid = cfg.grid.as_ref().map(GridSpec::values).transpose()?.unwrap_or_default();
    let horizon = cfg.horizon.unwrap_or_else(|| default_horizon(kind, &fixed));
    let name = cfg.name.as_deref().unwrap_or("scan");

    if axis == SweepAxis::Kappa {
        if let Some(split) = cfg.window_split {
            if cfg.observable.as_ref().is_some_and(|o| *o != Observable::TwoPhotonProbability) {
                return Err(CliError::Config("damping windows apply to the two-photon probability only".into()));
            }
            if grid.is_empty() {
                return Err(CliError::Config("sweep grid is empty".into()));
            }
            let d = damping_sweep(kind, &fixed, &grid, horizon, split)?;
            let windows = WindowColumns { split, first: &d.first_peaks, late: &d.late_peaks, ratio: &d.ratios };
            for path in write_sweep(out_dir, name, &d.sweep, Some(windows))? {
                println!("{}", path.display());
            }
            return Ok(());
        }
    }

    let mut spec = SweepSpec::new(kind, fixed, axis, grid, horizon);
    if let Some(o) = &cfg.observable {
        spec.observable = o.clone();
    }
    if let Some(dt) = cfg.output_step {
        spec.output_step = dt;
    }
    let result = scan_two_photon(&spec)?;
    for path in write_sweep(out_dir, name, &result, None)? {
        println!("{}", path.display());
    }
    if let Some(best) = result.best_row() {
        eprintln!("global peak {:.6} at axis value {} (g1*t = {:.2})", best.peak_value, best.axis_value, best.peak_time);
    }
    Ok(())
}

fn resonance(cfg: &RunConfig, lo: Option<f64>, hi: Option<f64>, out_dir: &std::path::Path) -> Result<(), CliError> {
    let kind = cfg.kind();
    let params = cfg.fixed.resolve();
    let (lo, hi) = match (lo.or(cfg.interval.map(|i| i.0)), hi.or(cfg.interval.map(|i| i.1))) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => return Err(CliError::Config("resonance needs an interval (--lo/--hi or \"interval\")".into())),
    };
    let defaults = ResonanceScan::default();
    let scan = ResonanceScan {
        coarse_step: cfg.coarse_step.unwrap_or(defaults.coarse_step),
        fine_step: cfg.fine_step.unwrap_or(defaults.fine_step),
        horizon: cfg.horizon,
        output_step: cfg.output_step.unwrap_or(defaults.output_step),
    };
    let report = resonance_report_with(kind, &params, (lo, hi), scan)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Failed(e.to_string()))?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", out_dir.display())))?;
    let path = out_dir.join(format!("{}.json", cfg.name.as_deref().unwrap_or("resonance")));
    std::fs::write(&path, format!("{json}\n")).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    println!("{json}");
    Ok(())
}

fn spectrum(cfg: &RunConfig, out_dir: &std::path::Path) -> Result<(), CliError> {
    if cfg.kind() != SystemKind::BimodalIdentical {
        return Err(CliError::Config("the spectrum subcommand covers the bimodal model only".into()));
    }
    let lines = spectrum_lines(&cfg.fixed.resolve())?;
    let path = write_spectrum(out_dir, cfg.name.as_deref().unwrap_or("spectrum"), &lines)?;
    println!("{}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let out = cli.out_dir.as_path();
    match cli.command {
        Command::Evolve(common) => {
            let cfg = common.load()?;
            if cfg.fixed.kappa_a.unwrap_or(0.0) != 0.0 || cfg.fixed.kappa_b.unwrap_or(0.0) != 0.0 {
                return Err(CliError::Config("evolve is unitary; use `master` for damped runs".into()));
            }
            single_row(&cfg, "evolve", out)
        }
        Command::Master { common, kappa, kappa_a, kappa_b } => {
            let mut cfg = common.load()?;
            let over = ParamOverrides { kappa_a: kappa_a.or(kappa), kappa_b: kappa_b.or(kappa), ..Default::default() };
            cfg.fixed = cfg.fixed.merge(&over);
            single_row(&cfg, "master", out)
        }
        Command::Scan(common) => scan(&common.load()?, out),
        Command::Resonance { common, lo, hi } => resonance(&common.load()?, lo, hi, out),
        Command::Spectrum(common) => spectrum(&common.load()?, out),
        Command::Selfcheck => {
            let checks = selfcheck::run();
            for c in &checks {
                println!("{} {:<40} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            match checks.iter().filter(|c| !c.passed).count() {
                0 => Ok(()),
                n => Err(CliError::Failed(format!("{n} self-check(s) failed"))),
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { CliError::Usage(String::new()).exit_code() } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
