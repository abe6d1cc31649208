//! Command-line front end: trajectories, stationary analysis, classification,
//! threshold bisection and figure presets.

pub mod config;
pub mod presets;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{MasterEqCoefficients, dot_re};
use crate::catalog::{CpWitness, classify, cp_decompose, gibbs_stationary};
use crate::evolution::{EvolutionError, evolve_closed_form, min_nu_scan, normalization_self_test, uniform_times};
use crate::propagator::{Regime, omega_of};
use crate::stationary::{ExistenceReason, Verdict, dekker_vs_generic, gamma_vector, stationary_params};

pub use config::{ConfigError, Criterion, ScenarioConfig, ThresholdSpec, parse_config, parse_config_with};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_NO_STATIONARY: i32 = 3;

pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("no stationary state: {0}")]
    NoStationary(String),
    #[error("threshold bracket [{lo}, {hi}] has no sign change ({f_lo:e}, {f_hi:e})")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::UnknownPreset(_) | CliError::Io { .. } => EXIT_CONFIG,
            CliError::Numeric(_) | CliError::NoSignChange { .. } => EXIT_NUMERIC,
            CliError::NoStationary(_) => EXIT_NO_STATIONARY,
        }
    }
}

impl From<EvolutionError> for CliError {
    fn from(e: EvolutionError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "oscme", version, about = "Exact Gaussian evolution of the bilinear oscillator master equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trajectory (t, mu, kappa, nu) as CSV.
    Evolve(CommonArgs),
    /// Stationary-state report as JSON.
    Analyze(CommonArgs),
    /// Equation class of the coefficients.
    Classify(CommonArgs),
    /// Bisection for the root of a threshold criterion.
    Threshold(CommonArgs),
    /// One CSV per curve of a figure preset.
    Figure(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Scenario file (key = value lines, or JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Named preset instead of a config file.
    #[arg(long)]
    pub preset: Option<String>,
    /// Output directory; stdout when absent (figure defaults to the working directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Classification tolerance, or bisection tolerance for threshold.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Disable physical validation of the coefficients.
    #[arg(long)]
    pub raw: bool,
}

/// Formats with 12 significant digits, plain decimal where reasonable.
pub fn fmt_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let exp: i32 = sci.rsplit_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    if !(-5..12).contains(&exp) {
        return sci;
    }
    let decimals = (11 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn load_config(args: &CommonArgs) -> Result<ScenarioConfig, CliError> {
    let text = match (&args.config, &args.preset) {
        (Some(_), Some(_)) => return Err(ConfigError::from_message("give either --config or --preset, not both").into()),
        (Some(path), None) => std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?,
        (None, Some(name)) => presets::preset_config(name).ok_or_else(|| CliError::UnknownPreset(name.clone()))?,
        (None, None) => return Err(ConfigError::from_message("--config or --preset is required").into()),
    };
    Ok(parse_config_with(&text, args.raw)?)
}

fn require_stationary(cfg: &ScenarioConfig) -> Result<(), CliError> {
    if cfg.require_stationary {
        let r = stationary_params(&cfg.coefficients);
        if !r.exists {
            return Err(CliError::NoStationary(r.reason.as_str().to_string()));
        }
    }
    Ok(())
}

/// CSV trajectory from the closed form.
pub fn cmd_evolve(cfg: &ScenarioConfig) -> Result<String, CliError> {
    require_stationary(cfg)?;
    let init = cfg.init_or_err()?;
    let mut csv = String::from("t,mu,kappa,nu\n");
    for t in uniform_times(cfg.t_max, cfg.samples) {
        let p = evolve_closed_form(&cfg.coefficients, &init, t)?;
        writeln!(csv, "{},{},{},{}", fmt_sig12(t), fmt_sig12(p.mu), fmt_sig12(p.kappa), fmt_sig12(p.nu))
            .expect("writing to a String cannot fail");
    }
    Ok(csv)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeReport {
    pub class: String,
    pub omega_sq: f64,
    pub regime: Regime,
    pub exists: bool,
    pub reason: ExistenceReason,
    pub gamma_vec: Option<[f64; 3]>,
    pub mu_st: Option<f64>,
    pub kappa_st: Option<f64>,
    pub nu_st: Option<f64>,
    pub well_behaved: Option<Verdict>,
    pub positive: Option<Verdict>,
    pub factorized_residual: f64,
    pub gibbs: bool,
    pub dekker_ok: bool,
    pub generic_positive_ok: bool,
    pub cp_witness: Option<CpWitness>,
}

pub fn analyze(c: &MasterEqCoefficients, tol: f64) -> Result<AnalyzeReport, CliError> {
    let r = stationary_params(c);
    if c.gamma > 0.0
        && let Err(e) = gamma_vector(c)
    {
        return Err(CliError::Numeric(e.to_string()));
    }
    let dk = dekker_vs_generic(c);
    let cp_witness = if c.gamma > 0.0 { cp_decompose(c).ok().flatten() } else { None };
    Ok(AnalyzeReport {
        class: classify(c, tol).to_string(),
        omega_sq: omega_of(c).omega_sq,
        regime: omega_of(c).regime,
        exists: r.exists,
        reason: r.reason,
        gamma_vec: r.gamma_vec,
        mu_st: r.mu_st,
        kappa_st: r.kappa_st,
        nu_st: r.nu_st,
        well_behaved: r.well_behaved,
        positive: r.positive,
        factorized_residual: r.factorized_residual,
        gibbs: r.exists && gibbs_stationary(c, tol),
        dekker_ok: dk.dekker.satisfied(),
        generic_positive_ok: dk.generic.satisfied(),
        cp_witness,
    })
}

pub fn cmd_analyze(cfg: &ScenarioConfig, tol: f64) -> Result<String, CliError> {
    require_stationary(cfg)?;
    let report = analyze(&cfg.coefficients, tol)?;
    let mut json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Numeric(e.to_string()))?;
    json.push('\n');
    Ok(json)
}

pub fn cmd_classify(cfg: &ScenarioConfig, tol: f64) -> String {
    format!("{}\n", classify(&cfg.coefficients, tol))
}

/// Value of a threshold criterion; its sign change marks the threshold.
pub fn criterion_value(
    criterion: Criterion,
    c: &MasterEqCoefficients,
    cfg: &ScenarioConfig,
) -> Result<f64, CliError> {
    match criterion {
        Criterion::StationaryNuZero => {
            let gv = gamma_vector(c).map_err(|e| CliError::Numeric(e.to_string()))?;
            Ok(-dot_re(gv, gv) - 1.0)
        }
        Criterion::OverdampedBoundary => Ok(omega_of(c).omega_sq),
        Criterion::CpBoundary => {
            let [e0, e1, e2] = c.eta;
            let g = c.gamma;
            Ok((-e0 - g).min(e0 * e0 - e1 * e1 - e2 * e2 - g * g))
        }
        Criterion::MinTrajNuZero => Ok(min_nu_scan(c, &cfg.init_or_err()?)?.nu),
    }
}

/// Bisection on the scanned coefficient until the bracket is below the tolerance.
pub fn find_threshold(cfg: &ScenarioConfig, spec: &ThresholdSpec) -> Result<f64, CliError> {
    let f = |x: f64| -> Result<f64, CliError> {
        criterion_value(spec.criterion, &cfg.coefficients_with(&spec.scan, x)?, cfg)
    };
    let (mut lo, mut hi) = (spec.lo, spec.hi);
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(CliError::NoSignChange { lo, hi, f_lo, f_hi });
    }
    let lo_sign = f_lo.signum();
    while hi - lo > spec.tolerance {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn cmd_threshold(cfg: &ScenarioConfig, tol: Option<f64>) -> Result<String, CliError> {
    let mut spec = cfg
        .threshold
        .clone()
        .ok_or_else(|| ConfigError::from_message("threshold needs scan, lo, hi and criterion"))?;
    if let Some(t) = tol {
        spec.tolerance = t;
    }
    Ok(format!("{}\n", find_threshold(cfg, &spec)?))
}

/// Writes one CSV per curve of a figure preset; returns the file paths.
pub fn cmd_figure(name: &str, out: &Path, raw: bool) -> Result<Vec<PathBuf>, CliError> {
    let curves = presets::figure_curves(name).ok_or_else(|| CliError::UnknownPreset(name.to_string()))?;
    std::fs::create_dir_all(out).map_err(|source| CliError::Io { path: out.to_path_buf(), source })?;
    curves
        .par_iter()
        .map(|curve| {
            let cfg = parse_config_with(&curve.config, raw)?;
            let csv = cmd_evolve(&cfg)?;
            let path = out.join(format!("{name}-{}_{}.csv", curve.style, curve.tag));
            std::fs::write(&path, csv).map_err(|source| CliError::Io { path: path.clone(), source })?;
            Ok(path)
        })
        .collect()
}

fn write_or_print(out: Option<&Path>, file: &str, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
            let path = dir.join(file);
            std::fs::write(&path, text).map_err(|source| CliError::Io { path, source })
        }
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source }),
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    if let Err(worst) = normalization_self_test() {
        return Err(CliError::Numeric(format!("closed-form normalization self-test failed ({worst:e})")));
    }
    match cli.command {
        Command::Evolve(a) => {
            let csv = cmd_evolve(&load_config(&a)?)?;
            write_or_print(a.out.as_deref(), "trajectory.csv", &csv, stdout)
        }
        Command::Analyze(a) => {
            let json = cmd_analyze(&load_config(&a)?, a.tol.unwrap_or(DEFAULT_CLASSIFY_TOL))?;
            write_or_print(a.out.as_deref(), "analysis.json", &json, stdout)
        }
        Command::Classify(a) => {
            let line = cmd_classify(&load_config(&a)?, a.tol.unwrap_or(DEFAULT_CLASSIFY_TOL));
            write_or_print(a.out.as_deref(), "class.txt", &line, stdout)
        }
        Command::Threshold(a) => {
            let line = cmd_threshold(&load_config(&a)?, a.tol)?;
            write_or_print(a.out.as_deref(), "threshold.txt", &line, stdout)
        }
        Command::Figure(a) => {
            let name = a
                .preset
                .as_deref()
                .ok_or_else(|| ConfigError::from_message("figure needs --preset"))?;
            let out = a.out.clone().unwrap_or_else(|| PathBuf::from("."));
            for path in cmd_figure(name, &out, a.raw)? {
                writeln!(stdout, "{}", path.display())
                    .map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source })?;
            }
            Ok(())
        }
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
