//! Frequency-domain quantities: static and lagged spatial spectral densities,
//! the space-time spectrum, the inverse-covariance decay rate, the
//! fluctuation-dissipation susceptibility, and numerical Bochner scanning.
//!
//! All spectra are isotropic functions of the wavenumber magnitude `k`. The
//! evaluation functions assume a parameter set that has passed
//! [`ModelParams::validate`]; they are plain formulas with no per-call checks
//! so that quadrature and simulation can call them in tight loops.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SsrfError};
use crate::model::{ModelParams, PermissibilityReport};

/// A point in the spatial-frequency/temporal-frequency plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    /// Wavenumber magnitude, k ≥ 0.
    pub k: f64,
    /// Cyclic temporal frequency.
    pub omega: f64,
}

/// Spatial spectral density c̃_ζ(k) of the driving noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NoiseSpectrum {
    /// Gaussian white noise, c̃_ζ(k) = 1.
    White,
    /// c̃_ζ(k) = exp(−k²a²) with correlation length a ≥ 0.
    GaussianDamped { a: f64 },
    /// Tabulated (k, c̃_ζ) pairs with linear interpolation, clamped to the
    /// end values outside the table.
    Tabulated(Vec<(f64, f64)>),
}

impl NoiseSpectrum {
    /// Checks the spectrum is well formed and nonnegative.
    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseSpectrum::White => Ok(()),
            NoiseSpectrum::GaussianDamped { a } => {
                if a.is_finite() && *a >= 0.0 {
                    Ok(())
                } else {
                    Err(SsrfError::InvalidParameter {
                        field: "noise.a",
                        reason: format!("must be finite and >= 0, got {a}"),
                    })
                }
            }
            NoiseSpectrum::Tabulated(table) => {
                if table.is_empty() {
                    return Err(SsrfError::InvalidParameter {
                        field: "noise.table",
                        reason: "table must not be empty".to_string(),
                    });
                }
                for pair in table.windows(2) {
                    if pair[1].0 <= pair[0].0 {
                        return Err(SsrfError::InvalidParameter {
                            field: "noise.table",
                            reason: "wavenumbers must be strictly increasing".to_string(),
                        });
                    }
                }
                for &(k, v) in table {
                    if !k.is_finite() || !v.is_finite() || k < 0.0 || v < 0.0 {
                        return Err(SsrfError::InvalidParameter {
                            field: "noise.table",
                            reason: format!("entries must be finite and >= 0, got ({k}, {v})"),
                        });
                    }
                }
                Ok(())
            }
        }
    }

    /// c̃_ζ(k).
    pub fn density(&self, k: f64) -> f64 {
        match self {
            NoiseSpectrum::White => 1.0,
            NoiseSpectrum::GaussianDamped { a } => (-k * k * a * a).exp(),
            NoiseSpectrum::Tabulated(table) => {
                let first = table[0];
                let last = table[table.len() - 1];
                if k <= first.0 {
                    return first.1;
                }
                if k >= last.0 {
                    return last.1;
                }
                let idx = table.partition_point(|&(kk, _)| kk <= k);
                let (k0, v0) = table[idx - 1];
                let (k1, v1) = table[idx];
                v0 + (v1 - v0) * (k - k0) / (k1 - k0)
            }
        }
    }
}

/// The characteristic polynomial P(k) = 1 + η₁(kξ)² + μ(kξ)⁴.
#[inline]
pub(crate) fn spectral_poly(params: &ModelParams, k: f64) -> f64 {
    let x = (k * params.xi) * (k * params.xi);
    1.0 + params.eta1 * x + params.mu * x * x
}

/// Mode decay rate L̃(k) = D̃ (1 + η₁k²ξ² + μk⁴ξ⁴), units time⁻¹.
///
/// Precondition: `params.validate()` passed.
#[inline]
pub fn ldecay(params: &ModelParams, k: f64) -> f64 {
    let dtilde = params.noise_d / (2.0 * params.xi_pow_d() * params.eta0);
    dtilde * spectral_poly(params, k)
}

/// Static spectral density C̃(k, 0) = η₀ξᵈ / (1 + η₁(kξ)² + μ(kξ)⁴).
///
/// Precondition: `params.validate()` passed.
#[inline]
pub fn spd_static(params: &ModelParams, k: f64) -> f64 {
    params.eta0 * params.xi_pow_d() / spectral_poly(params, k)
}

/// Lagged spectral density C̃(k, τ) = C̃(k, 0) e^{−L̃(k)|τ|}; even in τ.
///
/// Precondition: `params.validate()` passed.
#[inline]
pub fn spd_lagged(params: &ModelParams, k: f64, tau: f64) -> f64 {
    spd_static(params, k) * (-ldecay(params, k) * tau.abs()).exp()
}

/// Space-time spectrum S(k, ω) = 2η₀ξᵈ D̃ / (D̃²P(k)² + ω²); even in ω and k.
///
/// Precondition: `params.validate()` passed.
#[inline]
pub fn spd_spacetime(params: &ModelParams, k: f64, omega: f64) -> f64 {
    let dtilde = params.noise_d / (2.0 * params.xi_pow_d() * params.eta0);
    let decay = dtilde * spectral_poly(params, k);
    2.0 * params.eta0 * params.xi_pow_d() * dtilde / (decay * decay + omega * omega)
}

/// Spectral susceptibility χ̃(k, τ) = (2/D) ∂C̃(k,τ)/∂τ = −(2/D) L̃(k) C̃(k, τ)
/// for τ > 0 (the response is causal).
pub fn susceptibility_spectral(params: &ModelParams, k: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(SsrfError::Domain(format!(
            "susceptibility_spectral requires tau > 0, got {tau}"
        )));
    }
    Ok(-2.0 / params.noise_d * ldecay(params, k) * spd_lagged(params, k, tau))
}

/// Scans the static spectral density on a wavenumber grid: confirms
/// positivity and classifies the radial integral ∫ dk k^{d−1} C̃(k,0) as
/// finite or divergent by comparing its growth under cutoff doubling.
pub fn bochner_scan(params: &ModelParams, k_max: f64, n: usize) -> Result<PermissibilityReport> {
    let analytic = params.validate()?;
    if n < 2 {
        return Err(SsrfError::InvalidParameter {
            field: "n",
            reason: format!("grid size must be >= 2, got {n}"),
        });
    }
    if !(k_max > 0.0) {
        return Err(SsrfError::InvalidParameter {
            field: "k_max",
            reason: format!("must be > 0, got {k_max}"),
        });
    }

    let mut grid_min = f64::INFINITY;
    for i in 0..n {
        let k = k_max * i as f64 / (n - 1) as f64;
        grid_min = grid_min.min(spd_static(params, k));
    }
    let positive = grid_min > 0.0 && analytic.spectrally_positive;

    // Trapezoid of k^{d-1} C̃(k,0) over successive octaves [K,2K], [2K,4K]
    // with a fixed point count each; divergent integrands (constant or
    // growing tails) keep adding at least ~0.6 of the previous octave.
    let radial = |k: f64| k.powi(params.d as i32 - 1) * spd_static(params, k);
    let octave = |a: f64, b: f64| {
        let m = n.max(256);
        let h = (b - a) / m as f64;
        let mut s = 0.5 * (radial(a) + radial(b));
        for i in 1..m {
            s += radial(a + i as f64 * h);
        }
        s * h
    };
    let base = octave(0.0, k_max);
    let d1 = octave(k_max, 2.0 * k_max);
    let d2 = octave(2.0 * k_max, 4.0 * k_max);
    let divergent = positive && d2 > 0.6 * d1 && d2 > 1e-12 * (base + d1 + d2).abs();

    let mut messages = analytic.messages.clone();
    messages.push(format!(
        "grid minimum of spectral density on [0, {k_max}]: {grid_min:e}"
    ));
    messages.push(if divergent {
        format!("radial spectral integral divergent: octave increments {d1:e} -> {d2:e}")
    } else {
        format!("radial spectral integral convergent: octave increments {d1:e} -> {d2:e}")
    });

    Ok(PermissibilityReport {
        spectrally_positive: positive,
        finite_variance: !divergent,
        oscillatory: analytic.oscillatory,
        messages,
    })
}
