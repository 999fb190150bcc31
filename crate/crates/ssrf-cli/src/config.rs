//! Command-line definitions and key=value configuration-file merging.
//!
//! Every tunable flag is optional at parse time; unset flags fall back to
//! entries of the optional `--config` file (plain `key = value` lines, `#`
//! comments), and explicit flags always win. Resolution into concrete
//! parameter structs happens in [`crate::run`].

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ssrf::{ModelParams, QuadratureSpec, SsrfError};

/// Spartan spatial random field (SSRF) space-time covariance toolkit.
#[derive(Debug, Parser)]
#[command(name = "ssrf", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate C(r, tau) over a space-time lag grid.
    Eval(EvalArgs),
    /// Tabulate the space-time spectral density S(k, omega).
    Spectrum(SpectrumArgs),
    /// Run the Langevin simulator; write an SSTF1 field file and a summary.
    Simulate(SimulateArgs),
    /// Run the verification suite; report one pass/fail line per check.
    Verify(VerifyArgs),
}

/// Model parameters shared by all evaluating commands.
#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// Plain-text key = value defaults file; explicit flags override it.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Spatial dimension (1, 2, or 3).
    #[arg(long)]
    pub d: Option<u32>,
    /// Scale coefficient eta0 > 0.
    #[arg(long)]
    pub eta0: Option<f64>,
    /// Rigidity coefficient eta1 (may be negative when mu > 0).
    #[arg(long, allow_hyphen_values = true)]
    pub eta1: Option<f64>,
    /// Characteristic length xi > 0.
    #[arg(long)]
    pub xi: Option<f64>,
    /// Curvature coefficient mu >= 0 (default 0).
    #[arg(long)]
    pub mu: Option<f64>,
    /// Driving-noise variance D > 0 (mutually exclusive with --dtilde).
    #[arg(long, conflicts_with = "dtilde")]
    pub noise_d: Option<f64>,
    /// Combined diffusion coefficient Dtilde = D/(2 xi^d eta0); implies D.
    #[arg(long)]
    pub dtilde: Option<f64>,
}

/// Quadrature policy overrides.
#[derive(Debug, Clone, Default, Args)]
pub struct QuadArgs {
    /// Spectral cutoff hint (default 100).
    #[arg(long)]
    pub kcut: Option<f64>,
    /// Target relative error of spectral integrals (default 1e-9).
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Subdivision cap (default 2000).
    #[arg(long)]
    pub max_subdiv: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub quad: QuadArgs,
    /// Spatial lag grid min:max:count[:lin|log].
    #[arg(long, value_name = "GRID")]
    pub r_grid: Option<GridRange>,
    /// Time lag grid min:max:count[:lin|log].
    #[arg(long, value_name = "GRID", allow_hyphen_values = true)]
    pub tau_grid: Option<GridRange>,
    /// Evaluation method (default auto).
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Truncation order M for the small-mu series (default 2).
    #[arg(long)]
    pub small_mu_order: Option<u32>,
    /// Output format (default csv).
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Output path (stdout when omitted); written atomically.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Wavenumber grid min:max:count[:lin|log].
    #[arg(long, value_name = "GRID")]
    pub k_grid: Option<GridRange>,
    /// Frequency grid min:max:count[:lin|log].
    #[arg(long, value_name = "GRID", allow_hyphen_values = true)]
    pub omega_grid: Option<GridRange>,
    /// Output format (default csv).
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Output path (stdout when omitted); written atomically.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Grid points per axis (power of two, >= 8).
    #[arg(long)]
    pub n: Option<usize>,
    /// Grid spacing.
    #[arg(long)]
    pub spacing: Option<f64>,
    /// Time step.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Final time (integer multiple of dt; 0 for a static snapshot).
    #[arg(long)]
    pub t_end: Option<f64>,
    /// RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output path for the SSTF1 binary (sidecar written as <PATH>.json).
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Summary JSON path (stdout when omitted).
    #[arg(long, value_name = "PATH")]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Report JSON path (stdout lines are always printed).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Self-test knob: replace the closed-form/quadrature agreement bound
    /// with an unattainable 1e-15 to demonstrate failure detection.
    #[arg(long)]
    pub corrupt_tolerance: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    ClosedD1,
    ClosedD3,
    ZeroSpace,
    ZeroTime,
    Univariate,
    SmallMu,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

/// A lag/frequency grid: `min:max:count` with an optional `lin`/`log` tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub log: bool,
}

impl FromStr for GridRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() < 3 || parts.len() > 4 {
            return Err(format!("expected min:max:count[:lin|log], got `{s}`"));
        }
        let min: f64 = parts[0].parse().map_err(|_| format!("bad grid min `{}`", parts[0]))?;
        let max: f64 = parts[1].parse().map_err(|_| format!("bad grid max `{}`", parts[1]))?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| format!("bad grid count `{}`", parts[2]))?;
        let log = match parts.get(3) {
            None | Some(&"lin") => false,
            Some(&"log") => true,
            Some(other) => return Err(format!("grid scale must be lin or log, got `{other}`")),
        };
        if count == 0 {
            return Err("grid count must be >= 1".to_string());
        }
        if !(min.is_finite() && max.is_finite()) || max < min {
            return Err(format!("grid range [{min}, {max}] is not ordered and finite"));
        }
        if log && min <= 0.0 {
            return Err("log grids require min > 0".to_string());
        }
        Ok(GridRange { min, max, count, log })
    }
}

impl GridRange {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let n = self.count;
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                if self.log {
                    (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + t * (self.max - self.min)
                }
            })
            .collect()
    }
}

/// Errors surfaced by the CLI, mapped onto the documented exit codes:
/// 0 ok, 2 invalid parameters or usage, 3 singular configuration,
/// 4 accuracy failure, 5 verification failure.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Model(SsrfError),
    Io(std::io::Error),
    VerifyFailed { failed: usize },
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Model(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::VerifyFailed { failed } => {
                write!(f, "verification failed: {failed} check(s) did not pass")
            }
        }
    }
}

impl From<SsrfError> for CliError {
    fn from(e: SsrfError) -> Self {
        CliError::Model(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Model(e) => match e {
                SsrfError::Singular(_) => 3,
                SsrfError::Accuracy { .. } => 4,
                SsrfError::Io(_) => 1,
                _ => 2,
            },
            CliError::Io(_) => 1,
            CliError::VerifyFailed { .. } => 5,
        }
    }
}

/// Key = value defaults loaded from `--config`.
#[derive(Debug, Default)]
pub struct FileConfig {
    entries: HashMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let mut entries = HashMap::new();
        let Some(path) = path else {
            return Ok(Self { entries });
        };
        let text = std::fs::read_to_string(path)?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Usage(format!(
                    "{}:{}: expected key = value, got `{raw}`",
                    path.display(),
                    lineno + 1
                )));
            };
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    /// Flag value if set, else the parsed config entry under `key`.
    pub fn merge<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.entries.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                CliError::Usage(format!("config key `{key}`: cannot parse `{raw}`"))
            }),
        }
    }
}

/// Resolves the model flags (plus config fallback) into validated parameters.
pub fn resolve_params(model: &ModelArgs, cfg: &FileConfig) -> Result<ModelParams, CliError> {
    let require = |name: &str, v: Option<f64>| {
        v.ok_or_else(|| CliError::Usage(format!("missing required parameter --{name}")))
    };
    let d = cfg
        .merge(model.d, "d")?
        .ok_or_else(|| CliError::Usage("missing required parameter --d".to_string()))?;
    let eta0 = require("eta0", cfg.merge(model.eta0, "eta0")?)?;
    let eta1 = require("eta1", cfg.merge(model.eta1, "eta1")?)?;
    let xi = require("xi", cfg.merge(model.xi, "xi")?)?;
    let mu = cfg.merge(model.mu, "mu")?.unwrap_or(0.0);
    let noise_d = cfg.merge(model.noise_d, "noise-d")?;
    let dtilde = cfg.merge(model.dtilde, "dtilde")?;
    let params = match (noise_d, dtilde) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "--noise-d and --dtilde are mutually exclusive".to_string(),
            ))
        }
        (Some(noise_d), None) => ModelParams::new(d, eta0, eta1, xi, mu, noise_d)?,
        (None, Some(dtilde)) => ModelParams::with_dtilde(d, eta0, eta1, xi, mu, dtilde)?,
        (None, None) => {
            return Err(CliError::Usage(
                "one of --noise-d or --dtilde is required".to_string(),
            ))
        }
    };
    params.validate()?;
    Ok(params)
}

/// Resolves the quadrature overrides on top of the defaults.
pub fn resolve_quad(quad: &QuadArgs, cfg: &FileConfig) -> Result<QuadratureSpec, CliError> {
    let mut spec = QuadratureSpec::default();
    if let Some(kcut) = cfg.merge(quad.kcut, "kcut")? {
        spec.k_cut = kcut;
    }
    if let Some(rel_tol) = cfg.merge(quad.rel_tol, "rel-tol")? {
        spec.rel_tol = rel_tol;
    }
    if let Some(max_subdiv) = cfg.merge(quad.max_subdiv, "max-subdiv")? {
        spec.max_subdiv = max_subdiv;
    }
    spec.validate()?;
    Ok(spec)
}
