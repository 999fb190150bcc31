//! Command implementations: table evaluation, spectrum tabulation,
//! simulation runs, and the verification suite driver.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use ssrf::covariance::{
    cov_closed_d1, cov_closed_d3, cov_small_mu, cov_univariate_integral, cov_zero_space,
    cov_zero_time, CovValue, Lag,
};
use ssrf::quadrature::cov_spectral_numeric;
use ssrf::simulate::{constraint_stats, expected_constraints, simulate, ConstraintStats};
use ssrf::spectral::spd_spacetime;
use ssrf::{GridSpec, ModelParams, QuadratureSpec};

use crate::checks;
use crate::config::{
    resolve_params, resolve_quad, Cli, CliError, Command, EvalArgs, FileConfig, FormatArg,
    GridRange, MethodArg, SimulateArgs, SpectrumArgs, VerifyArgs,
};
use crate::output::{emit, fmt_f64};

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Eval(args) => cmd_eval(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn required_grid(
    flag: Option<GridRange>,
    cfg: &FileConfig,
    key: &str,
) -> Result<GridRange, CliError> {
    cfg.merge(flag, key)?
        .ok_or_else(|| CliError::Usage(format!("missing required grid --{key}")))
}

impl std::str::FromStr for MethodArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(MethodArg::Auto),
            "closed-d1" => Ok(MethodArg::ClosedD1),
            "closed-d3" => Ok(MethodArg::ClosedD3),
            "zero-space" => Ok(MethodArg::ZeroSpace),
            "zero-time" => Ok(MethodArg::ZeroTime),
            "univariate" => Ok(MethodArg::Univariate),
            "small-mu" => Ok(MethodArg::SmallMu),
            "quadrature" => Ok(MethodArg::Quadrature),
            _ => Err(format!("unknown method `{s}`")),
        }
    }
}

impl std::str::FromStr for FormatArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(FormatArg::Csv),
            "json" => Ok(FormatArg::Json),
            _ => Err(format!("unknown format `{s}`")),
        }
    }
}

fn eval_point(
    params: &ModelParams,
    method: MethodArg,
    lag: &Lag,
    quad: &QuadratureSpec,
    small_mu_order: u32,
) -> Result<CovValue, ssrf::SsrfError> {
    match method {
        MethodArg::Auto => {
            if params.d == 1 && params.mu == 0.0 && params.eta1 > 0.0 {
                cov_closed_d1(params, lag)
            } else {
                cov_spectral_numeric(params, lag, quad)
            }
        }
        MethodArg::ClosedD1 => cov_closed_d1(params, lag),
        MethodArg::ClosedD3 => cov_closed_d3(params, lag),
        MethodArg::ZeroSpace => cov_zero_space(params, lag.tau),
        MethodArg::ZeroTime => cov_zero_time(params, lag.r),
        MethodArg::Univariate => cov_univariate_integral(params, lag, quad),
        MethodArg::SmallMu => cov_small_mu(params, lag, small_mu_order, quad),
        MethodArg::Quadrature => cov_spectral_numeric(params, lag, quad),
    }
}

#[derive(Serialize)]
struct EvalRecord {
    r: f64,
    tau: f64,
    value: f64,
    method: &'static str,
    est_error: Option<f64>,
}

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let cfg = FileConfig::load(args.model.config.as_deref())?;
    let params = resolve_params(&args.model, &cfg)?;
    let quad = resolve_quad(&args.quad, &cfg)?;
    let r_grid = required_grid(args.r_grid, &cfg, "r-grid")?;
    let tau_grid = required_grid(args.tau_grid, &cfg, "tau-grid")?;
    let method = cfg.merge(args.method, "method")?.unwrap_or(MethodArg::Auto);
    let order = cfg.merge(args.small_mu_order, "small-mu-order")?.unwrap_or(2);
    let format = cfg.merge(args.format, "format")?.unwrap_or(FormatArg::Csv);

    if r_grid.min < 0.0 {
        return Err(CliError::Usage("--r-grid requires r >= 0".to_string()));
    }
    let r_values = r_grid.values();
    let tau_values = tau_grid.values();
    if method == MethodArg::ZeroSpace && r_values.iter().any(|&r| r != 0.0) {
        return Err(CliError::Usage(
            "method zero-space evaluates C(0, tau): the r grid must be 0:0:1".to_string(),
        ));
    }
    if method == MethodArg::ZeroTime && tau_values.iter().any(|&t| t != 0.0) {
        return Err(CliError::Usage(
            "method zero-time evaluates C(r, 0): the tau grid must be 0:0:1".to_string(),
        ));
    }

    // row-major over r then tau, rows evaluated in parallel
    let points: Vec<Lag> = r_values
        .iter()
        .flat_map(|&r| tau_values.iter().map(move |&tau| Lag { r, tau }))
        .collect();
    let results: Vec<Result<CovValue, ssrf::SsrfError>> = points
        .par_iter()
        .map(|lag| eval_point(&params, method, lag, &quad, order))
        .collect();

    let mut records = Vec::with_capacity(points.len());
    let mut warned: Vec<String> = Vec::new();
    for (lag, res) in points.iter().zip(results) {
        let cov = res?;
        if let Some(w) = cov.warning {
            if !warned.contains(&w) {
                eprintln!("warning: {w}");
                warned.push(w);
            }
        }
        records.push(EvalRecord {
            r: lag.r,
            tau: lag.tau,
            value: cov.value,
            method: cov.method.as_str(),
            est_error: cov.est_error,
        });
    }

    let content = match format {
        FormatArg::Csv => {
            let mut s = String::from("r,tau,value,method,est_error\n");
            for rec in &records {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt_f64(rec.r),
                    fmt_f64(rec.tau),
                    fmt_f64(rec.value),
                    rec.method,
                    rec.est_error.map(fmt_f64).unwrap_or_default()
                ));
            }
            s
        }
        FormatArg::Json => {
            let mut s = serde_json::to_string_pretty(&records)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            s.push('\n');
            s
        }
    };
    emit(args.out.as_deref(), &content)
}

#[derive(Serialize)]
struct SpectrumRecord {
    k: f64,
    omega: f64,
    s: f64,
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<(), CliError> {
    let cfg = FileConfig::load(args.model.config.as_deref())?;
    let params = resolve_params(&args.model, &cfg)?;
    params.require_permissible()?;
    let k_grid = required_grid(args.k_grid, &cfg, "k-grid")?;
    let omega_grid = required_grid(args.omega_grid, &cfg, "omega-grid")?;
    let format = cfg.merge(args.format, "format")?.unwrap_or(FormatArg::Csv);
    if k_grid.min < 0.0 {
        return Err(CliError::Usage("--k-grid requires k >= 0".to_string()));
    }

    let mut records = Vec::with_capacity(k_grid.count * omega_grid.count);
    for &k in &k_grid.values() {
        for &omega in &omega_grid.values() {
            records.push(SpectrumRecord {
                k,
                omega,
                s: spd_spacetime(&params, k, omega),
            });
        }
    }
    let content = match format {
        FormatArg::Csv => {
            let mut s = String::from("k,omega,S\n");
            for rec in &records {
                s.push_str(&format!(
                    "{},{},{}\n",
                    fmt_f64(rec.k),
                    fmt_f64(rec.omega),
                    fmt_f64(rec.s)
                ));
            }
            s
        }
        FormatArg::Json => {
            let mut s = serde_json::to_string_pretty(&records)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            s.push('\n');
            s
        }
    };
    emit(args.out.as_deref(), &content)
}

#[derive(Serialize)]
struct SimSummary {
    params: ModelParams,
    n: usize,
    spacing: f64,
    d: u32,
    dt: f64,
    t_end: f64,
    seed: u64,
    n_snapshots: usize,
    sample_variance: f64,
    analytic_variance_grid: f64,
    constraints: ConstraintStats,
    expected_constraints: ConstraintStats,
    output: PathBuf,
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let cfg = FileConfig::load(args.model.config.as_deref())?;
    let params = resolve_params(&args.model, &cfg)?;
    let n = cfg
        .merge(args.n, "n")?
        .ok_or_else(|| CliError::Usage("missing required parameter --n".to_string()))?;
    let spacing = cfg
        .merge(args.spacing, "spacing")?
        .ok_or_else(|| CliError::Usage("missing required parameter --spacing".to_string()))?;
    let dt = cfg.merge(args.dt, "dt")?.unwrap_or(1.0);
    let t_end = cfg.merge(args.t_end, "t-end")?.unwrap_or(0.0);
    let seed = cfg.merge(args.seed, "seed")?.unwrap_or(0);
    let grid = GridSpec {
        n,
        spacing,
        d: params.d,
    };

    let report = params.validate()?;
    if !report.finite_variance {
        eprintln!(
            "warning: mu = 0, d = {} has no continuum variance; the grid Nyquist cutoff pi/spacing = {:.6} regularizes it",
            params.d,
            std::f64::consts::PI / spacing
        );
    }

    let field = simulate(&params, &grid, t_end, dt, seed)?;
    field.write(&args.out)?;

    let x0 = field.snapshot(0)?;
    let sample_variance = x0.iter().map(|v| v * v).sum::<f64>() / x0.len() as f64;
    let expected = expected_constraints(&params, &grid)?;
    let analytic_variance_grid =
        expected.s0 / (grid.num_cells() as f64 * spacing.powi(params.d as i32));
    let summary = SimSummary {
        params,
        n,
        spacing,
        d: params.d,
        dt,
        t_end,
        seed,
        n_snapshots: field.times.len(),
        sample_variance,
        analytic_variance_grid,
        constraints: constraint_stats(&field, 0)?,
        expected_constraints: expected,
        output: args.out.clone(),
    };
    let mut json =
        serde_json::to_string_pretty(&summary).map_err(|e| CliError::Usage(e.to_string()))?;
    json.push('\n');
    emit(args.summary.as_deref(), &json)
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let results = checks::run_all(&checks::VerifyOptions {
        corrupt_tolerance: args.corrupt_tolerance,
    });
    for c in &results {
        println!("{c}");
    }
    let failed = results.iter().filter(|c| !c.passed).count();
    #[derive(Serialize)]
    struct Report<'a> {
        all_passed: bool,
        n_failed: usize,
        checks: &'a [checks::CheckResult],
    }
    let report = Report {
        all_passed: failed == 0,
        n_failed: failed,
        checks: &results,
    };
    let mut json =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Usage(e.to_string()))?;
    json.push('\n');
    if let Some(path) = args.out.as_deref() {
        emit(Some(path), &json)?;
    }
    if failed > 0 {
        return Err(CliError::VerifyFailed { failed });
    }
    Ok(())
}
