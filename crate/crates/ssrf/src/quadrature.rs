//! Numerical evaluation of the spectral-representation integrals
//!
//! ```text
//! C(r, τ) = e^{−D̃|τ|} · pref_d · ∫₀^∞ dk kern_d(k, r) · w(k),
//! w(k) = C̃(k,0) c̃_ζ(k) e^{−D̃|τ|(P(k)−1)},
//! ```
//!
//! with `kern₁ = cos(kr)`, `kern₂ = k J₀(kr)`, `kern₃ = k² sinc(kr)` and
//! `pref_d = 1/π, 1/(2π), 1/(2π²)`. This module is the independent oracle
//! for every closed-form covariance.
//!
//! Strategy: at `r = 0` the integrand is monotone-decaying and the domain is
//! mapped to `[0, 1)` by `k = s·t/(1−t)`, which regularizes algebraic tails,
//! so no spectral cutoff enters at all. For `r > 0` the axis is partitioned
//! at the kernel-period boundaries `k_n = nπ/r` and the alternating segment
//! series is summed with Euler (van Wijngaarden) acceleration; segments are
//! added until the accelerated estimate is stable, which extends the
//! effective cutoff automatically past `k_cut` whenever the requested
//! tolerance demands it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::covariance::{CovValue, Lag, Method};
use crate::error::{Result, SsrfError};
use crate::model::ModelParams;
use crate::specfun;
use crate::spectral::{spd_static, spectral_poly, NoiseSpectrum};

/// Integration policy for the spectral integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Plain adaptive Gauss-Kronrod (used for non-oscillatory integrands).
    AdaptiveGk,
    /// Partition at kernel zeros with accelerated summation (r > 0).
    OscillatoryPartition,
}

/// Cutoff, tolerance, and subdivision policy for spectral integrals.
///
/// `k_cut` is the initial truncation hint (the classical fixed-cutoff value
/// is 100); the integrators extend past it automatically when the tail still
/// matters at the requested `rel_tol`, see [`tail_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub k_cut: f64,
    pub rel_tol: f64,
    pub max_subdiv: usize,
    pub scheme: Scheme,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            k_cut: 100.0,
            rel_tol: 1e-9,
            max_subdiv: 2000,
            scheme: Scheme::AdaptiveGk,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_cut > 0.0) {
            return Err(SsrfError::InvalidParameter {
                field: "quad.k_cut",
                reason: format!("must be > 0, got {}", self.k_cut),
            });
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(SsrfError::InvalidParameter {
                field: "quad.rel_tol",
                reason: format!("must be in (0, 1), got {}", self.rel_tol),
            });
        }
        if self.max_subdiv < 8 {
            return Err(SsrfError::InvalidParameter {
                field: "quad.max_subdiv",
                reason: format!("must be >= 8, got {}", self.max_subdiv),
            });
        }
        Ok(())
    }
}

// 15-point Kronrod / 7-point Gauss nodes and weights (positive half).
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

struct Qk15 {
    value: f64,
    error: f64,
    res_abs: f64,
}

fn qk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Qk15 {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = fc.abs() * WGK[7];
    let mut fv = [0.0f64; 14];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        let sum = f1 + f2;
        res_k += WGK[j] * sum;
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * sum;
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
    }
    Qk15 {
        value: res_k * half,
        error: rescale_error((res_k - res_g) * half, res_abs * half.abs(), res_asc * half.abs()),
        res_abs: res_abs * half.abs(),
    }
}

pub(crate) struct QuadEstimate {
    pub value: f64,
    pub error: f64,
    pub abs_integral: f64,
}

/// Best-effort adaptive Gauss-Kronrod over the union of `edges` intervals.
/// Splits the worst interval until the accumulated error estimate meets
/// `max(rel_tol·|value|, abs_tol)` or the subdivision budget is exhausted;
/// the returned error estimate is honest either way.
pub(crate) fn adaptive_gk<F: Fn(f64) -> f64>(
    f: &F,
    edges: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_subdiv: usize,
) -> QuadEstimate {
    #[derive(Clone, Copy)]
    struct Interval {
        a: f64,
        b: f64,
        value: f64,
        error: f64,
        res_abs: f64,
    }
    let eval = |a: f64, b: f64| {
        let q = qk15(f, a, b);
        Interval {
            a,
            b,
            value: q.value,
            error: q.error,
            res_abs: q.res_abs,
        }
    };
    let mut intervals: Vec<Interval> = edges.windows(2).map(|w| eval(w[0], w[1])).collect();
    let mut splits = 0usize;
    loop {
        let total: f64 = intervals.iter().map(|i| i.value).sum();
        let err: f64 = intervals.iter().map(|i| i.error).sum();
        if err <= (rel_tol * total.abs()).max(abs_tol) || splits >= max_subdiv {
            let abs_integral = intervals.iter().map(|i| i.res_abs).sum();
            return QuadEstimate {
                value: total,
                error: err,
                abs_integral,
            };
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("non-empty interval list");
        let iv = intervals[worst];
        let mid = 0.5 * (iv.a + iv.b);
        if !(mid > iv.a && mid < iv.b) {
            // interval at floating-point resolution; cannot refine further
            let abs_integral = intervals.iter().map(|i| i.res_abs).sum();
            let total: f64 = intervals.iter().map(|i| i.value).sum();
            let err: f64 = intervals.iter().map(|i| i.error).sum();
            return QuadEstimate {
                value: total,
                error: err,
                abs_integral,
            };
        }
        intervals[worst] = eval(iv.a, mid);
        intervals.push(eval(mid, iv.b));
        splits += 1;
    }
}

/// Euler (van Wijngaarden) transformation of a slowly convergent,
/// asymptotically alternating series, fed one term at a time.
struct EulerAccel {
    wksp: Vec<f64>,
    sum: f64,
}

impl EulerAccel {
    fn new() -> Self {
        Self {
            wksp: Vec::with_capacity(64),
            sum: 0.0,
        }
    }

    fn add(&mut self, term: f64) -> f64 {
        if self.wksp.is_empty() {
            self.wksp.push(term);
            self.sum = 0.5 * term;
        } else {
            let n = self.wksp.len();
            let mut tmp = self.wksp[0];
            self.wksp[0] = term;
            for j in 1..n {
                let dum = self.wksp[j];
                self.wksp[j] = 0.5 * (self.wksp[j - 1] + tmp);
                tmp = dum;
            }
            let next = 0.5 * (self.wksp[n - 1] + tmp);
            if next.abs() <= self.wksp[n - 1].abs() {
                self.wksp.push(next);
                self.sum += 0.5 * next;
            } else {
                self.sum += next;
            }
        }
        self.sum
    }
}

fn angular_prefactor(d: u32) -> f64 {
    match d {
        1 => 1.0 / PI,
        2 => 1.0 / (2.0 * PI),
        _ => 1.0 / (2.0 * PI * PI),
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn kernel(d: u32, k: f64, r: f64) -> f64 {
    match d {
        1 => (k * r).cos(),
        2 => k * specfun::j0(k * r),
        _ => k * k * sinc(k * r),
    }
}

pub(crate) struct RadialEstimate {
    pub value: f64,
    pub error: f64,
    pub abs_scale: f64,
}

/// ∫₀^∞ kern_d(k, r) w(k) dk times the angular prefactor.
///
/// `scale` is the characteristic wavenumber used by the r = 0 domain
/// transform and to seed breakpoints (1/ξ for the SSRF weight).
pub(crate) fn radial_integral<W: Fn(f64) -> f64>(
    d: u32,
    r: f64,
    scale: f64,
    w: &W,
    spec: &QuadratureSpec,
) -> Result<RadialEstimate> {
    let pref = angular_prefactor(d);
    if r == 0.0 {
        // k = scale * t/(1-t): algebraic tails become regular at t = 1.
        let g = |t: f64| {
            let om = 1.0 - t;
            if om <= 0.0 {
                return 0.0;
            }
            let k = scale * t / om;
            if !k.is_finite() {
                return 0.0;
            }
            let wv = w(k);
            if wv == 0.0 || !wv.is_finite() {
                return 0.0;
            }
            let v = k.powi(d as i32 - 1) * wv * scale / (om * om);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        };
        let q = adaptive_gk(
            &g,
            &[0.0, 0.25, 0.5, 0.75, 0.9, 1.0],
            0.1 * spec.rel_tol,
            1e-300,
            spec.max_subdiv,
        );
        return Ok(RadialEstimate {
            value: pref * q.value,
            error: pref * q.error,
            abs_scale: pref * q.abs_integral,
        });
    }

    let g = |k: f64| {
        let wv = w(k);
        if wv == 0.0 || !wv.is_finite() {
            return 0.0;
        }
        let v = kernel(d, k, r) * wv;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let period = PI / r;
    let head_segments = 4usize;
    let mut euler = EulerAccel::new();
    let mut head = 0.0f64;
    let mut plain = 0.0f64;
    let mut gk_err = 0.0f64;
    let mut abs_scale = 0.0f64;
    let mut prev_total = f64::NAN;
    let mut stable = 0u32;
    let mut tiny_run = 0u32;
    let mut last_seg = 0.0;

    for seg in 0..spec.max_subdiv.max(64) {
        let a = seg as f64 * period;
        let b = a + period;
        // The first segment carries all the non-oscillatory structure of the
        // weight; seed it with breakpoints on the characteristic scale.
        let q = if seg == 0 {
            let mut edges = vec![a];
            for &m in &[0.1, 1.0, 10.0, 100.0] {
                let e = scale * m;
                if e > a && e < b {
                    edges.push(e);
                }
            }
            edges.push(b);
            adaptive_gk(&g, &edges, 0.05 * spec.rel_tol, 1e-300, 512)
        } else {
            let floor = 1e-3 * spec.rel_tol * plain.abs().max(1e-300);
            adaptive_gk(&g, &[a, b], 0.05 * spec.rel_tol, floor, 64)
        };
        gk_err += q.error;
        abs_scale += q.abs_integral;
        plain += q.value;
        last_seg = q.value;

        let total = if seg < head_segments {
            head += q.value;
            head
        } else {
            head + euler.add(q.value)
        };

        if seg >= head_segments + 4 {
            let scale_v = total.abs().max(1e-2 * abs_scale).max(1e-300);
            // decay-dominated exit: the plain series has effectively terminated
            if q.value.abs() <= 1e-2 * spec.rel_tol * scale_v {
                tiny_run += 1;
                if tiny_run >= 2 {
                    return Ok(RadialEstimate {
                        value: pref * plain,
                        error: pref * (gk_err + 3.0 * q.value.abs()),
                        abs_scale: pref * abs_scale,
                    });
                }
            } else {
                tiny_run = 0;
            }
            // oscillation-dominated exit: accelerated estimate stable
            let delta = (total - prev_total).abs();
            if delta <= 0.25 * spec.rel_tol * scale_v {
                stable += 1;
                if stable >= 2 {
                    return Ok(RadialEstimate {
                        value: pref * total,
                        error: pref * (gk_err + 2.0 * delta + f64::EPSILON * total.abs()),
                        abs_scale: pref * abs_scale,
                    });
                }
            } else {
                stable = 0;
            }
        }
        prev_total = total;
    }
    Err(SsrfError::Accuracy {
        reason: format!(
            "oscillatory spectral integral did not converge within {} segments (r = {r})",
            spec.max_subdiv.max(64)
        ),
        partial: pref * (head + euler.sum),
        est_error: pref * (gk_err + last_seg.abs()),
    })
}

fn spectral_weight<'a>(
    params: &'a ModelParams,
    noise: &'a NoiseSpectrum,
    dtilde_tau: f64,
) -> impl Fn(f64) -> f64 + 'a {
    move |k: f64| {
        let p = spectral_poly(params, k);
        spd_static(params, k) * noise.density(k) * (-dtilde_tau * (p - 1.0)).exp()
    }
}

fn check_quadrature_domain(params: &ModelParams, lag: &Lag) -> Result<()> {
    if lag.r < 0.0 || !lag.r.is_finite() || !lag.tau.is_finite() {
        return Err(SsrfError::Domain(format!(
            "lag must have finite tau and r >= 0, got (r={}, tau={})",
            lag.r, lag.tau
        )));
    }
    if params.mu == 0.0 && params.d >= 2 && lag.r == 0.0 && lag.tau == 0.0 {
        return Err(SsrfError::Singular(format!(
            "variance diverges for mu = 0, d = {}: C(0,0) is infinite",
            params.d
        )));
    }
    Ok(())
}

/// Spectral-representation covariance, the oracle for every closed form.
pub fn cov_spectral_numeric(
    params: &ModelParams,
    lag: &Lag,
    spec: &QuadratureSpec,
) -> Result<CovValue> {
    cov_colored_noise(params, &NoiseSpectrum::White, lag, spec)
}

/// Covariance of the field driven by noise with spatial spectral density
/// c̃_ζ(k): the stationary mode variance is C̃(k,0) c̃_ζ(k) and the temporal
/// decay is unchanged. White noise reproduces [`cov_spectral_numeric`]
/// exactly (identical integrand).
pub fn cov_colored_noise(
    params: &ModelParams,
    noise: &NoiseSpectrum,
    lag: &Lag,
    spec: &QuadratureSpec,
) -> Result<CovValue> {
    params.require_permissible()?;
    spec.validate()?;
    noise.validate()?;
    check_quadrature_domain(params, lag)?;

    let derived = params.derived()?;
    let dtilde_tau = derived.dtilde * lag.tau.abs();
    let w = spectral_weight(params, noise, dtilde_tau);
    let est = radial_integral(params.d, lag.r, 1.0 / params.xi, &w, spec)?;

    let damp = (-dtilde_tau).exp();
    let value = damp * est.value;
    let error = damp * est.error;
    let ok_scale = value.abs().max(0.1 * damp * est.abs_scale);
    if error > spec.rel_tol * ok_scale && error > 1e-300 {
        return Err(SsrfError::Accuracy {
            reason: format!(
                "spectral quadrature reached error {error:e} above target {:e}",
                spec.rel_tol * ok_scale
            ),
            partial: value,
            est_error: error,
        });
    }
    Ok(CovValue {
        value,
        method: Method::SpectralQuadrature,
        est_error: Some(error),
        warning: None,
    })
}

/// Analytic upper bound on the spectral mass discarded beyond `k_cut`,
/// using |kernel| ≤ 1 and the quartic/quadratic decay of the denominator.
/// Returns `+∞` when no finite bound holds (the divergent μ = 0, d ≥ 2,
/// τ = 0 configurations, or a cutoff below the quartic-dominance threshold).
pub fn tail_bound(params: &ModelParams, lag: &Lag, k_cut: f64) -> f64 {
    if !(k_cut > 0.0) {
        return f64::INFINITY;
    }
    let pref = angular_prefactor(params.d);
    let xi = params.xi;
    let xi_d = params.xi_pow_d();
    let dtilde = params.noise_d / (2.0 * xi_d * params.eta0);
    let tau = lag.tau.abs();
    let d = params.d as i32;

    if params.mu > 0.0 {
        // For eta1 < 0 the temporal factor is bounded by exp(Dt tau eta1^2/(4 mu))
        // and P(k) >= (mu/2) k^4 xi^4 once k^2 xi^2 >= 2|eta1|/mu.
        let (osc_factor, quartic) = if params.eta1 >= 0.0 {
            (1.0, params.mu)
        } else {
            let threshold = (2.0 * (-params.eta1) / params.mu).sqrt() / xi;
            if k_cut < threshold {
                return f64::INFINITY;
            }
            (
                (dtilde * tau * params.eta1 * params.eta1 / (4.0 * params.mu)).exp(),
                0.5 * params.mu,
            )
        };
        let power = (4 - d) as f64;
        return pref * osc_factor * params.eta0 * xi_d / (quartic * xi.powi(4))
            * k_cut.powi(d - 4)
            / power;
    }

    // mu = 0 requires eta1 > 0; weight <= eta0 xi^d e^{-a k^2} / (eta1 k^2 xi^2).
    let a = dtilde * tau * params.eta1 * xi * xi;
    let base = pref * params.eta0 * xi_d / (params.eta1 * xi * xi);
    if tau == 0.0 {
        if params.d == 1 {
            return base / k_cut;
        }
        return f64::INFINITY;
    }
    // int_K^inf k^{d-3} e^{-a k^2} dk <= K^{d-3} e^{-aK^2}/(2aK) for d <= 3
    base * k_cut.powi(d - 3) * (-a * k_cut * k_cut).exp() / (2.0 * a * k_cut)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::Lag;

    fn fig2(d: u32) -> ModelParams {
        ModelParams::with_dtilde(d, 1.0, 1.0, 3.0, 0.0, 1.0).unwrap()
    }

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn gk15_exact_on_polynomials() {
        // degree-13 polynomial is integrated exactly by G7K15
        let f = |x: f64| 3.0 * x.powi(13) - 2.0 * x.powi(7) + x * x + 1.0;
        let q = qk15(&f, -1.0, 2.0);
        let exact = |x: f64| 3.0 * x.powi(14) / 14.0 - 2.0 * x.powi(8) / 8.0 + x.powi(3) / 3.0 + x;
        assert!((q.value - (exact(2.0) - exact(-1.0))).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        // int_0^1 1/sqrt(x) dx = 2 (integrable endpoint singularity)
        let f = |x: f64| if x > 0.0 { 1.0 / x.sqrt() } else { 0.0 };
        let q = adaptive_gk(&f, &[0.0, 1.0], 1e-10, 1e-300, 2000);
        assert!((q.value - 2.0).abs() < 1e-6, "got {}", q.value);
        assert!((q.value - 2.0).abs() <= q.error);
        // narrow Gaussian
        let f = |x: f64| (-(x - 0.3333) * (x - 0.3333) * 1e4).exp();
        let q = adaptive_gk(&f, &[0.0, 0.25, 0.5, 1.0], 1e-10, 1e-300, 2000);
        let want = (PI / 1e4).sqrt();
        assert!(rel(q.value, want) < 1e-9, "got {}", q.value);
    }

    #[test]
    fn euler_accelerates_log_series() {
        // sum (-1)^{n} /(n+1) = ln 2
        let mut e = EulerAccel::new();
        let mut est = 0.0;
        for n in 0..40 {
            let term = if n % 2 == 0 { 1.0 } else { -1.0 } / (n + 1) as f64;
            est = e.add(term);
        }
        assert!((est - std::f64::consts::LN_2).abs() < 1e-11);
    }

    #[test]
    fn variance_d1_matches_closed_form() {
        // C(0,0) = eta0/(2 sqrt(eta1)) = 0.5; r = 0 route has no cutoff at all
        let c = cov_spectral_numeric(&fig2(1), &Lag { r: 0.0, tau: 0.0 }, &quad()).unwrap();
        assert!(rel(c.value, 0.5) < 1e-10, "got {}", c.value);
        assert!(c.est_error.unwrap() < 1e-9);
    }

    #[test]
    fn oracle_agrees_with_closed_form_d1() {
        // frozen reference: C(3,1) for eta1=1, eta0=1, xi=3, Dtilde=1
        let c = cov_spectral_numeric(&fig2(1), &Lag { r: 3.0, tau: 1.0 }, &quad()).unwrap();
        assert!(rel(c.value, 0.06713350035155466) < 1e-9, "got {}", c.value);
        // tau = 0 oscillatory partition with algebraic tail
        let c = cov_spectral_numeric(&fig2(1), &Lag { r: 3.0, tau: 0.0 }, &quad()).unwrap();
        assert!(rel(c.value, 0.18393972058572116) < 1e-9, "got {}", c.value);
    }

    #[test]
    fn oracle_agrees_with_closed_form_d3() {
        let c = cov_spectral_numeric(&fig2(3), &Lag { r: 3.0, tau: 0.0 }, &quad()).unwrap();
        assert!(rel(c.value, 0.029274915762159580) < 1e-9, "got {}", c.value);
        let c = cov_spectral_numeric(&fig2(3), &Lag { r: 3.0, tau: 1.0 }, &quad()).unwrap();
        assert!(rel(c.value, 0.0033526972569568719) < 1e-9, "got {}", c.value);
    }

    #[test]
    fn oracle_d2_general_lag() {
        // no closed form exists in d=2; frozen high-precision reference
        let c = cov_spectral_numeric(&fig2(2), &Lag { r: 2.0, tau: 1.0 }, &quad()).unwrap();
        assert!(rel(c.value, 0.016197382207008306) < 1e-8, "got {}", c.value);
    }

    #[test]
    fn divergent_configurations_rejected() {
        for d in 2..=3 {
            let err = cov_spectral_numeric(&fig2(d), &Lag { r: 0.0, tau: 0.0 }, &quad());
            assert!(matches!(err, Err(SsrfError::Singular(_))), "d={d}");
        }
        // but mu > 0 removes the singularity: frozen reference for
        // d=3, mu=1, eta1=0.5, eta0=1, xi=3, Dtilde=1
        let p = ModelParams::with_dtilde(3, 1.0, 0.5, 3.0, 1.0, 1.0).unwrap();
        let c = cov_spectral_numeric(&p, &Lag { r: 0.0, tau: 0.0 }, &quad()).unwrap();
        assert!(rel(c.value, 0.050329212104487035) < 1e-9, "got {}", c.value);
    }

    #[test]
    fn oscillatory_covariance_goes_negative() {
        // mu=1, eta1=-1, xi=3, tau=0: negative lobe around r ~ 9..12
        let p = ModelParams::with_dtilde(1, 1.0, -1.0, 3.0, 1.0, 1.0).unwrap();
        let c9 = cov_spectral_numeric(&p, &Lag { r: 9.0, tau: 0.0 }, &quad()).unwrap();
        assert!(rel(c9.value, -0.062177384115093274) < 1e-8, "got {}", c9.value);
        let c12 = cov_spectral_numeric(&p, &Lag { r: 12.0, tau: 0.0 }, &quad()).unwrap();
        assert!(c12.value < 0.0);
    }

    #[test]
    fn colored_noise_white_is_identical() {
        let lag = Lag { r: 1.7, tau: 0.4 };
        let a = cov_spectral_numeric(&fig2(1), &lag, &quad()).unwrap();
        let b = cov_colored_noise(&fig2(1), &NoiseSpectrum::White, &lag, &quad()).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn colored_noise_gaussian_damped() {
        // a -> 0 converges to white
        let lag = Lag { r: 0.0, tau: 0.0 };
        let w = cov_spectral_numeric(&fig2(1), &lag, &quad()).unwrap();
        let g0 = cov_colored_noise(
            &fig2(1),
            &NoiseSpectrum::GaussianDamped { a: 1e-8 },
            &lag,
            &quad(),
        )
        .unwrap();
        assert!(rel(g0.value, w.value) < 1e-8);
        // a = xi strictly reduces the variance; frozen fine-grid reference
        let g = cov_colored_noise(
            &fig2(1),
            &NoiseSpectrum::GaussianDamped { a: 3.0 },
            &lag,
            &quad(),
        )
        .unwrap();
        assert!(g.value < w.value);
        assert!(rel(g.value, 0.21379178807790350) < 1e-9, "got {}", g.value);
    }

    #[test]
    fn est_error_is_honest() {
        // re-evaluating at rel_tol/100 must move the result by less than the
        // reported est_error
        let coarse = QuadratureSpec {
            rel_tol: 1e-6,
            ..QuadratureSpec::default()
        };
        let fine = QuadratureSpec {
            rel_tol: 1e-8,
            max_subdiv: 4000,
            ..QuadratureSpec::default()
        };
        for &(d, r, tau) in &[
            (1u32, 0.0, 0.0),
            (1, 3.0, 0.0),
            (1, 7.5, 2.0),
            (3, 3.0, 1.0),
            (2, 2.0, 0.5),
        ] {
            let lag = Lag { r, tau };
            let c = cov_spectral_numeric(&fig2(d), &lag, &coarse).unwrap();
            let f = cov_spectral_numeric(&fig2(d), &lag, &fine).unwrap();
            assert!(
                (c.value - f.value).abs() <= c.est_error.unwrap().max(1e-14 * f.value.abs()),
                "d={d} r={r} tau={tau}: moved {} vs est {}",
                (c.value - f.value).abs(),
                c.est_error.unwrap()
            );
        }
    }

    #[test]
    fn monotone_in_tau_for_nonnegative_eta1() {
        let p = ModelParams::with_dtilde(1, 1.0, 0.5, 3.0, 1.0, 1.0).unwrap();
        for &r in &[0.0, 2.0, 5.0] {
            let mut prev = f64::INFINITY;
            for i in 0..6 {
                let tau = i as f64 * 0.7;
                let c = cov_spectral_numeric(&p, &Lag { r, tau }, &quad()).unwrap();
                assert!(c.value <= prev + 1e-12, "r={r} tau={tau}");
                prev = c.value;
            }
        }
    }

    #[test]
    fn tail_bound_formulas() {
        let p1 = fig2(1);
        let lag0 = Lag { r: 0.0, tau: 0.0 };
        // mu = 0, d = 1: eta0/(pi eta1 xi k); doubling k_cut halves it
        let b100 = tail_bound(&p1, &lag0, 100.0);
        let b200 = tail_bound(&p1, &lag0, 200.0);
        assert!(rel(b100, 1.0 / (PI * 3.0 * 100.0)) < 1e-12);
        assert!(b200 <= 0.5 * b100 * (1.0 + 1e-12));

        // bound is a true bound: discarded mass at k_cut=100, tau=0, r=0, d=1
        // is (1/pi) int_100^inf 3/(1+9k^2) dk < b100
        let exact_tail = (1.0 / PI) * (std::f64::consts::FRAC_PI_2 - (3.0_f64 * 100.0).atan()) ;
        assert!(exact_tail < b100);

        // mu > 0: k^{d-4}/(4-d) scaling, decreasing in k_cut
        let pm = ModelParams::with_dtilde(1, 1.0, 1.0, 3.0, 1.0, 1.0).unwrap();
        let b = tail_bound(&pm, &lag0, 50.0);
        assert!(rel(b, (1.0 / PI) * 3.0 / (1.0 * 81.0) * 50.0_f64.powi(-3) / 3.0) < 1e-12);
        assert!(tail_bound(&pm, &lag0, 100.0) < b);

        // divergent configurations have no finite bound
        assert!(tail_bound(&fig2(3), &lag0, 100.0).is_infinite());
        // ... unless tau > 0 supplies Gaussian decay
        assert!(tail_bound(&fig2(3), &Lag { r: 0.0, tau: 1.0 }, 10.0).is_finite());
    }
}
