//! Real-space covariance evaluations: explicit d=1 and d=3 closed forms for
//! μ = 0, the zero-space-lag and zero-time-lag specials, the monotone
//! univariate integral representation, and the small-μ confluent
//! hypergeometric series.
//!
//! Every method takes `|τ|` first, so evenness in the time lag holds exactly
//! by construction. The three μ = 0 routes (closed form, univariate integral,
//! spectral quadrature) are implemented independently and pinned against each
//! other in the test suites.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SsrfError};
use crate::model::ModelParams;
use crate::quadrature::{adaptive_gk, QuadratureSpec};
use crate::specfun::{bessel_k, erfc, expint_ei, hyp1f1};

/// A space-time lag pair: spatial lag magnitude `r ≥ 0` and time lag `tau`
/// (any sign; the covariance is even in it).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lag {
    pub r: f64,
    pub tau: f64,
}

impl Lag {
    pub fn new(r: f64, tau: f64) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() || !tau.is_finite() {
            return Err(SsrfError::Domain(format!(
                "lag must have finite tau and r >= 0, got (r={r}, tau={tau})"
            )));
        }
        Ok(Self { r, tau })
    }
}

/// Which evaluation path produced a covariance value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedD1,
    ClosedD3,
    ZeroSpace,
    ZeroTime,
    UnivariateIntegral,
    SmallMuSeries,
    SpectralQuadrature,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ClosedD1 => "closed_d1",
            Method::ClosedD3 => "closed_d3",
            Method::ZeroSpace => "zero_space",
            Method::ZeroTime => "zero_time",
            Method::UnivariateIntegral => "univariate_integral",
            Method::SmallMuSeries => "small_mu_series",
            Method::SpectralQuadrature => "spectral_quadrature",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A covariance value with its provenance and, for numerical routes, an
/// absolute error bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovValue {
    pub value: f64,
    pub method: Method,
    pub est_error: Option<f64>,
    pub warning: Option<String>,
}

// Lag threshold below which the tau -> 0 limit branch is taken, in units of
// the relaxation time 1/Dtilde.
const TAU_LIMIT_EPS: f64 = 1e-14;

fn require_zero_curvature(method: &'static str, params: &ModelParams, d: Option<u32>) -> Result<()> {
    params.require_permissible()?;
    if let Some(dim) = d {
        if params.d != dim {
            return Err(SsrfError::WrongMethod {
                method,
                reason: format!("requires d = {dim}, got d = {}", params.d),
            });
        }
    }
    if params.mu != 0.0 {
        return Err(SsrfError::WrongMethod {
            method,
            reason: format!("requires mu = 0, got mu = {}", params.mu),
        });
    }
    if params.eta1 <= 0.0 {
        return Err(SsrfError::WrongMethod {
            method,
            reason: format!("requires eta1 > 0, got eta1 = {}", params.eta1),
        });
    }
    Ok(())
}

/// The two erfc terms shared by the d=1 and d=3 closed forms:
/// `(e^{−c} erfc(s−q), e^{+c} erfc(s+q))` with c = r/(√η₁ ξ), s = √(D̃|τ|),
/// q = r/(2ξ√(D̃η₁|τ|)). The growing exponential is only evaluated when its
/// erfc partner is nonzero; the product is bounded by e^{−(s−q)²} ≤ 1.
fn erfc_pair(params: &ModelParams, r: f64, abs_tau: f64) -> (f64, f64) {
    let dtilde = params.noise_d / (2.0 * params.xi_pow_d() * params.eta0);
    let c = r / (params.eta1.sqrt() * params.xi);
    let s = (dtilde * abs_tau).sqrt();
    let q = r / (2.0 * (dtilde * params.eta1 * abs_tau).sqrt() * params.xi);
    let minus = (-c).exp() * erfc(s - q);
    let plus_erfc = erfc(s + q);
    let plus = if plus_erfc == 0.0 { 0.0 } else { c.exp() * plus_erfc };
    (minus, plus)
}

/// Explicit d=1, μ=0 space-time covariance
/// C(r,τ) = (η₀ / 4√η₁) [e^{−c} erfc(s−q) + e^{+c} erfc(s+q)].
pub fn cov_closed_d1(params: &ModelParams, lag: &Lag) -> Result<CovValue> {
    require_zero_curvature("closed_d1", params, Some(1))?;
    let lag = Lag::new(lag.r, lag.tau.abs())?;
    let dtilde = params.derived()?.dtilde;
    let value = if dtilde * lag.tau < TAU_LIMIT_EPS {
        // tau -> 0 limit: erfc(−∞) = 2, erfc(+∞) = 0
        params.eta0 / (2.0 * params.eta1.sqrt())
            * (-lag.r / (params.eta1.sqrt() * params.xi)).exp()
    } else {
        let (minus, plus) = erfc_pair(params, lag.r, lag.tau);
        params.eta0 / (4.0 * params.eta1.sqrt()) * (minus + plus)
    };
    Ok(CovValue {
        value,
        method: Method::ClosedD1,
        est_error: None,
        warning: None,
    })
}

/// Explicit d=3, μ=0 space-time covariance
/// C(r,τ) = (η₀ξ / 8πη₁r) [e^{−c} erfc(s−q) − e^{+c} erfc(s+q)], r > 0.
pub fn cov_closed_d3(params: &ModelParams, lag: &Lag) -> Result<CovValue> {
    require_zero_curvature("closed_d3", params, Some(3))?;
    let lag = Lag::new(lag.r, lag.tau.abs())?;
    if lag.r == 0.0 {
        return Err(SsrfError::Singular(
            "d = 3, mu = 0 has infinite variance: C diverges as r -> 0".to_string(),
        ));
    }
    let dtilde = params.derived()?.dtilde;
    let value = if dtilde * lag.tau < TAU_LIMIT_EPS {
        params.eta0 * params.xi / (4.0 * PI * params.eta1 * lag.r)
            * (-lag.r / (params.eta1.sqrt() * params.xi)).exp()
    } else {
        let (minus, plus) = erfc_pair(params, lag.r, lag.tau);
        params.eta0 * params.xi / (8.0 * PI * params.eta1 * lag.r) * (minus - plus)
    };
    Ok(CovValue {
        value,
        method: Method::ClosedD3,
        est_error: None,
        warning: None,
    })
}

/// Purely temporal covariance C(0, τ) for μ = 0:
/// d=1: (η₀/2)√(1/η₁) erfc(√(D̃|τ|));
/// d=2: −(η₀/4πη₁) Ei(−D̃|τ|);
/// d=3: 2η₀e^{−D̃|τ|}/(√(D̃|τ|)(4πη₁)^{3/2}) − (2η₀/(π(4η₁)^{3/2})) erfc(√(D̃|τ|)).
pub fn cov_zero_space(params: &ModelParams, tau: f64) -> Result<CovValue> {
    require_zero_curvature("zero_space", params, None)?;
    if !tau.is_finite() {
        return Err(SsrfError::Domain(format!("tau must be finite, got {tau}")));
    }
    let abs_tau = tau.abs();
    let dtilde = params.derived()?.dtilde;
    let dt = dtilde * abs_tau;
    if dt == 0.0 && params.d >= 2 {
        return Err(SsrfError::Singular(format!(
            "C(0, tau) diverges as tau -> 0 for d = {}, mu = 0",
            params.d
        )));
    }
    let value = match params.d {
        1 => params.eta0 / 2.0 * (1.0 / params.eta1).sqrt() * erfc(dt.sqrt()),
        2 => -params.eta0 / (4.0 * PI * params.eta1) * expint_ei(-dt)?,
        _ => {
            2.0 * params.eta0 * (-dt).exp() / (dt.sqrt() * (4.0 * PI * params.eta1).powf(1.5))
                - 2.0 * params.eta0 / (PI * (4.0 * params.eta1).powf(1.5)) * erfc(dt.sqrt())
        }
    };
    Ok(CovValue {
        value,
        method: Method::ZeroSpace,
        est_error: None,
        warning: None,
    })
}

/// Purely spatial covariance C(r, 0) for μ = 0:
/// (2^{d/2} η₀ / (4πη₁)^{d/2}) (r/(ξ√η₁))^{1−d/2} K_{d/2−1}(r/(ξ√η₁)).
pub fn cov_zero_time(params: &ModelParams, r: f64) -> Result<CovValue> {
    require_zero_curvature("zero_time", params, None)?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(SsrfError::Domain(format!("r must be >= 0, got {r}")));
    }
    if r == 0.0 {
        if params.d >= 2 {
            return Err(SsrfError::Singular(format!(
                "C(r, 0) diverges as r -> 0 for d = {}, mu = 0",
                params.d
            )));
        }
        return Ok(CovValue {
            value: params.eta0 / (2.0 * params.eta1.sqrt()),
            method: Method::ZeroTime,
            est_error: None,
            warning: None,
        });
    }
    let x = r / (params.xi * params.eta1.sqrt());
    let half_d = params.d as f64 / 2.0;
    let nu = half_d - 1.0;
    let value = 2.0f64.powf(half_d) * params.eta0 / (4.0 * PI * params.eta1).powf(half_d)
        * x.powf(1.0 - half_d)
        * bessel_k(nu, x)?;
    Ok(CovValue {
        value,
        method: Method::ZeroTime,
        est_error: None,
        warning: None,
    })
}

/// Univariate-integral representation for μ = 0:
///
/// ```text
/// C(r,τ) = e^{−D̃|τ|}/(4π)^{d/2} ∫₀^∞ dκ e^{−r²/(4(β₁+β₂κ)) − κβ₀} /(β₁+β₂κ)^{d/2}
/// ```
///
/// with β₀ = 1/(η₀ξᵈ), β₁ = D̃|τ|η₁ξ², β₂ = η₁ξ²/(η₀ξᵈ). The integrand is
/// positive and monotone-decaying; at τ = 0 the substitution κ = y² removes
/// the endpoint singularity.
pub fn cov_univariate_integral(
    params: &ModelParams,
    lag: &Lag,
    spec: &QuadratureSpec,
) -> Result<CovValue> {
    require_zero_curvature("univariate_integral", params, None)?;
    spec.validate()?;
    let lag = Lag::new(lag.r, lag.tau.abs())?;
    if params.d >= 2 && lag.r == 0.0 && lag.tau == 0.0 {
        return Err(SsrfError::Singular(format!(
            "variance diverges for mu = 0, d = {}: C(0,0) is infinite",
            params.d
        )));
    }
    let derived = params.derived()?;
    let (beta0, beta2) = (derived.beta0, derived.beta2);
    let beta1 = derived.beta1(lag.tau);
    let half_d = params.d as f64 / 2.0;
    let r2 = lag.r * lag.r;

    let kappa_max = 50.0 / beta0;
    let (q, tail) = if beta1 > 0.0 {
        let f = |kappa: f64| {
            let a2 = beta1 + beta2 * kappa;
            let ex = -r2 / (4.0 * a2) - kappa * beta0;
            if ex < -745.0 {
                return 0.0;
            }
            ex.exp() / a2.powf(half_d)
        };
        let edges = [0.0, 0.1 / beta0, 1.0 / beta0, 10.0 / beta0, kappa_max];
        let q = adaptive_gk(&f, &edges, 0.2 * spec.rel_tol, 1e-300, spec.max_subdiv);
        let tail = (-50.0f64).exp() / (beta0 * (beta1 + beta2 * kappa_max).powf(half_d));
        (q, tail)
    } else {
        // tau = 0: kappa = y^2
        let f = |y: f64| {
            let a2 = beta2 * y * y;
            if a2 == 0.0 {
                // only reachable for d = 1, r = 0 where the limit is finite
                return if r2 == 0.0 && params.d == 1 {
                    2.0 / beta2.sqrt()
                } else {
                    0.0
                };
            }
            let ex = -r2 / (4.0 * a2) - y * y * beta0;
            if ex < -745.0 {
                return 0.0;
            }
            2.0 * y * ex.exp() / a2.powf(half_d)
        };
        let y1 = (1.0 / beta0).sqrt();
        let edges = [0.0, 0.1 * y1, y1, (10.0f64).sqrt() * y1, kappa_max.sqrt()];
        let q = adaptive_gk(&f, &edges, 0.2 * spec.rel_tol, 1e-300, spec.max_subdiv);
        let tail = (-50.0f64).exp() / (beta0 * (beta2 * kappa_max).powf(half_d));
        (q, tail)
    };

    let dtilde_tau = derived.dtilde * lag.tau;
    let pref = (-dtilde_tau).exp() / (4.0 * PI).powf(half_d);
    let value = pref * q.value;
    let est_error = pref * (q.error + tail);
    if est_error > spec.rel_tol * value.abs().max(0.1 * pref * q.abs_integral) {
        return Err(SsrfError::Accuracy {
            reason: "univariate covariance integral did not reach the requested tolerance"
                .to_string(),
            partial: value,
            est_error,
        });
    }
    Ok(CovValue {
        value,
        method: Method::UnivariateIntegral,
        est_error: Some(est_error),
        warning: None,
    })
}

fn rising_gamma_ratio(half_d: f64, two_m: u32) -> f64 {
    (0..two_m).fold(1.0, |acc, i| acc * (half_d + i as f64))
}

/// Small-μ covariance series truncated at even order 2M:
///
/// ```text
/// C(r,τ) ≈ e^{−D̃|τ|}/(4π)^{d/2} Σ_{m=0}^{2M} (−μ)^m/m! · Γ(d/2+2m)/Γ(d/2) · R_m,
/// R_m = ∫₀^∞ dκ e^{−κβ₀} w^{−(m+d/2)} ₁F₁(2m+d/2, d/2; −r²/(4η₁ξ²w)) / (η₁^{2m+d/2} ξᵈ),
/// w = D̃|τ| + κβ₀.
/// ```
///
/// The even truncation order keeps the truncated spectral density
/// nonnegative. The m = 0 term reduces to [`cov_univariate_integral`]
/// since ₁F₁(d/2, d/2; z) = eᶻ.
///
/// μ above 0.2 and non-decreasing term magnitudes at the truncation order
/// are flagged in `CovValue::warning` rather than treated as errors. The
/// term integrals diverge at exactly (r, τ) = (0, 0); that point is
/// rejected except in the trivial μ = 0, d = 1 case.
pub fn cov_small_mu(
    params: &ModelParams,
    lag: &Lag,
    truncation: u32,
    spec: &QuadratureSpec,
) -> Result<CovValue> {
    params.require_permissible()?;
    spec.validate()?;
    if truncation < 1 {
        return Err(SsrfError::InvalidParameter {
            field: "truncation",
            reason: format!("truncation order M must be >= 1, got {truncation}"),
        });
    }
    if params.eta1 <= 0.0 {
        return Err(SsrfError::WrongMethod {
            method: "small_mu_series",
            reason: format!("requires eta1 > 0, got eta1 = {}", params.eta1),
        });
    }
    let lag = Lag::new(lag.r, lag.tau.abs())?;
    if lag.r == 0.0 && lag.tau == 0.0 && (params.mu > 0.0 || params.d >= 2) {
        return Err(SsrfError::Singular(
            "small-mu term integrals diverge at zero space-time lag".to_string(),
        ));
    }

    let derived = params.derived()?;
    let beta0 = derived.beta0;
    let dtilde_tau = derived.dtilde * lag.tau;
    let half_d = params.d as f64 / 2.0;
    let eta1_xi2 = params.eta1 * params.xi * params.xi;
    let rho = lag.r * lag.r / (4.0 * eta1_xi2);
    let xi_d = params.xi_pow_d();

    let mut warning: Option<String> = None;
    if params.mu > 0.2 {
        warning = Some(format!(
            "mu = {} exceeds the small-curvature regime (mu <= 0.2); series accuracy degrades",
            params.mu
        ));
    }

    let mut sum = 0.0;
    let mut quad_err = 0.0;
    let mut prev_term_mag = f64::INFINITY;
    let mut last_term_mag = 0.0;
    let mut nondecreasing = false;

    for m in 0..=(2 * truncation) {
        let a = 2.0 * m as f64 + half_d;
        let power = m as f64 + half_d;
        let eta1_pow = params.eta1.powf(2.0 * m as f64 + half_d);
        let term_integrand = |w: f64| -> f64 {
            if w <= 0.0 {
                return 0.0;
            }
            let hyp = match hyp1f1(a, half_d, -rho / w) {
                Ok(v) => v,
                Err(_) => return f64::NAN,
            };
            if hyp == 0.0 {
                return 0.0;
            }
            let v = w.powf(-power) * hyp;
            if v.is_finite() {
                v
            } else {
                0.0
            }
        };

        let kappa_max = 50.0 / beta0;
        let q = if dtilde_tau > 0.0 {
            let f = |kappa: f64| {
                let e = -kappa * beta0;
                if e < -745.0 {
                    return 0.0;
                }
                e.exp() * term_integrand(dtilde_tau + kappa * beta0)
            };
            let edges = [0.0, 0.1 / beta0, 1.0 / beta0, 10.0 / beta0, kappa_max];
            adaptive_gk(&f, &edges, 0.1 * spec.rel_tol, 1e-300, spec.max_subdiv)
        } else {
            // tau = 0: kappa = y^2 regularizes the w -> 0 boundary layer
            let f = |y: f64| {
                let kappa = y * y;
                let e = -kappa * beta0;
                if e < -745.0 {
                    return 0.0;
                }
                2.0 * y * e.exp() * term_integrand(kappa * beta0)
            };
            let y1 = (1.0 / beta0).sqrt();
            let mut edges = vec![0.0, 0.1 * y1, y1, 10.0f64.sqrt() * y1, kappa_max.sqrt()];
            if rho > 0.0 {
                // peak of the boundary layer sits near w ~ rho/(m + d/2)
                let y_peak = (rho / (power.max(0.5) * beta0)).sqrt();
                for &f in &[0.3, 1.0, 3.0] {
                    let e = y_peak * f;
                    if e > 0.0 && e < kappa_max.sqrt() {
                        edges.push(e);
                    }
                }
                edges.sort_by(f64::total_cmp);
            }
            adaptive_gk(&f, &edges, 0.1 * spec.rel_tol, 1e-300, spec.max_subdiv)
        };

        if !q.value.is_finite() {
            return Err(SsrfError::Accuracy {
                reason: format!("small-mu term m = {m} failed to evaluate"),
                partial: sum,
                est_error: f64::INFINITY,
            });
        }

        let r_m = q.value / (eta1_pow * xi_d);
        let coef = (-params.mu).powi(m as i32) / factorial(m)
            * rising_gamma_ratio(half_d, 2 * m);
        let term = coef * r_m;
        sum += term;
        quad_err += (coef.abs() * q.error) / (eta1_pow * xi_d);

        last_term_mag = term.abs();
        if m > 0 && params.mu > 0.0 && last_term_mag >= prev_term_mag {
            nondecreasing = true;
        }
        prev_term_mag = last_term_mag;
        if params.mu == 0.0 {
            // all higher terms vanish identically
            last_term_mag = 0.0;
            break;
        }
    }

    if nondecreasing {
        let msg = "series terms not decreasing at the truncation order; result may be unreliable";
        warning = Some(match warning {
            Some(w) => format!("{w}; {msg}"),
            None => msg.to_string(),
        });
    }

    let pref = (-dtilde_tau).exp() / (4.0 * PI).powf(half_d);
    let value = pref * sum;
    let est_error = pref * (quad_err + last_term_mag);
    Ok(CovValue {
        value,
        method: Method::SmallMuSeries,
        est_error: Some(est_error),
        warning,
    })
}

fn factorial(m: u32) -> f64 {
    (1..=m).fold(1.0, |acc, i| acc * i as f64)
}
