//! Model parameters, validation, and permissibility classification.
//!
//! `ModelParams` is the single source of truth for the SSRF parameter set.
//! The noise variance `D` is the stored quantity; the combined diffusion
//! coefficient `D̃ = D / (2 ξᵈ η₀)` is always derived from it. Callers that
//! parameterize by `D̃` (the natural scale for figures and tables) should use
//! [`ModelParams::with_dtilde`], which back-computes `D = 2 ξᵈ η₀ D̃`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SsrfError};

/// SSRF parameter set.
///
/// * `d` — spatial dimension, 1, 2, or 3;
/// * `eta0` — scale coefficient η₀ > 0, sets the fluctuation amplitude ([X]²);
/// * `eta1` — dimensionless rigidity coefficient η₁ (may be negative when μ > 0);
/// * `xi` — characteristic length ξ > 0;
/// * `mu` — curvature coefficient μ ≥ 0;
/// * `noise_d` — driving-noise variance D > 0 ([X]²·time⁻¹·spaceᵈ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: u32,
    pub eta0: f64,
    pub eta1: f64,
    pub xi: f64,
    pub mu: f64,
    pub noise_d: f64,
}

/// Constants derived from a validated parameter set.
///
/// `beta0 = 1/(η₀ξᵈ)` and `beta2 = η₁ξ²/(η₀ξᵈ)` are the κ-integral
/// coefficients; the time-lag coefficient `β₁(τ) = D̃|τ|η₁ξ²` depends on the
/// lag and is exposed as a method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    /// Combined diffusion coefficient D̃ = D/(2ξᵈη₀), units time⁻¹.
    pub dtilde: f64,
    /// 1/(η₀ξᵈ).
    pub beta0: f64,
    /// η₁ξ²/(η₀ξᵈ).
    pub beta2: f64,
    eta1_xi2: f64,
}

impl DerivedConstants {
    /// β₁(τ) = D̃ |τ| η₁ ξ².
    pub fn beta1(&self, tau: f64) -> f64 {
        self.dtilde * tau.abs() * self.eta1_xi2
    }
}

/// Outcome of permissibility classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermissibilityReport {
    /// The static spectral density is strictly positive for all k ≥ 0.
    pub spectrally_positive: bool,
    /// The variance C(0,0) is finite: true iff μ > 0 or d = 1.
    pub finite_variance: bool,
    /// The covariance develops negative lobes: μ > 0 and −2√μ < η₁ < 0.
    pub oscillatory: bool,
    /// Human-readable findings.
    pub messages: Vec<String>,
}

fn require_finite(field: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(SsrfError::InvalidParameter {
            field,
            reason: format!("must be finite, got {value}"),
        });
    }
    Ok(())
}

fn require_positive(field: &'static str, value: f64) -> Result<()> {
    require_finite(field, value)?;
    if value <= 0.0 {
        return Err(SsrfError::InvalidParameter {
            field,
            reason: format!("must be > 0, got {value}"),
        });
    }
    Ok(())
}

impl ModelParams {
    /// Builds a parameter set and validates its fields (not its permissibility;
    /// see [`ModelParams::validate`] for the spectral classification).
    pub fn new(d: u32, eta0: f64, eta1: f64, xi: f64, mu: f64, noise_d: f64) -> Result<Self> {
        let params = Self {
            d,
            eta0,
            eta1,
            xi,
            mu,
            noise_d,
        };
        params.check_fields()?;
        Ok(params)
    }

    /// Builds a parameter set from `D̃` instead of `D`, with `D = 2 ξᵈ η₀ D̃`.
    pub fn with_dtilde(d: u32, eta0: f64, eta1: f64, xi: f64, mu: f64, dtilde: f64) -> Result<Self> {
        require_positive("dtilde", dtilde)?;
        require_positive("xi", xi)?;
        require_positive("eta0", eta0)?;
        if !(1..=3).contains(&d) {
            return Err(SsrfError::InvalidParameter {
                field: "d",
                reason: format!("must be 1, 2, or 3, got {d}"),
            });
        }
        let noise_d = 2.0 * xi.powi(d as i32) * eta0 * dtilde;
        Self::new(d, eta0, eta1, xi, mu, noise_d)
    }

    /// ξᵈ.
    pub fn xi_pow_d(&self) -> f64 {
        self.xi.powi(self.d as i32)
    }

    fn check_fields(&self) -> Result<()> {
        if !(1..=3).contains(&self.d) {
            return Err(SsrfError::InvalidParameter {
                field: "d",
                reason: format!("must be 1, 2, or 3, got {}", self.d),
            });
        }
        require_positive("eta0", self.eta0)?;
        require_finite("eta1", self.eta1)?;
        require_positive("xi", self.xi)?;
        require_finite("mu", self.mu)?;
        if self.mu < 0.0 {
            return Err(SsrfError::InvalidParameter {
                field: "mu",
                reason: format!("must be >= 0, got {}", self.mu),
            });
        }
        require_positive("noise_d", self.noise_d)?;
        Ok(())
    }

    /// Validates the fields and classifies the parameter set.
    ///
    /// Spectral positivity requires `1 + η₁x + μx² > 0` for all `x = (kξ)² ≥ 0`:
    /// η₁ > 0 when μ = 0, and η₁ > −2√μ when μ > 0. The boundary η₁ = −2√μ
    /// (double root of the denominator) is rejected as a non-integrable pole.
    pub fn validate(&self) -> Result<PermissibilityReport> {
        self.check_fields()?;

        let mut messages = Vec::new();
        let spectrally_positive = if self.mu == 0.0 {
            self.eta1 > 0.0
        } else {
            self.eta1 > -2.0 * self.mu.sqrt()
        };
        if spectrally_positive {
            messages.push("spectral density positive for all wavenumbers".to_string());
        } else if self.mu == 0.0 {
            messages.push(format!(
                "spectral density not positive: mu = 0 requires eta1 > 0, got eta1 = {}",
                self.eta1
            ));
        } else {
            messages.push(format!(
                "spectral density has a pole: requires eta1 > -2*sqrt(mu) = {}, got eta1 = {}",
                -2.0 * self.mu.sqrt(),
                self.eta1
            ));
        }

        let finite_variance = self.mu > 0.0 || self.d == 1;
        if !finite_variance {
            messages.push(format!(
                "variance diverges for mu = 0, d = {}: covariance singular at zero lag",
                self.d
            ));
        }

        let oscillatory = self.mu > 0.0 && self.eta1 < 0.0 && spectrally_positive;
        if oscillatory {
            messages.push("negative rigidity with curvature: covariance oscillates".to_string());
        }

        Ok(PermissibilityReport {
            spectrally_positive,
            finite_variance,
            oscillatory,
            messages,
        })
    }

    /// Computes the derived constants. Fails if the fields are invalid.
    pub fn derived(&self) -> Result<DerivedConstants> {
        self.check_fields()?;
        let xi_d = self.xi_pow_d();
        let dtilde = self.noise_d / (2.0 * xi_d * self.eta0);
        Ok(DerivedConstants {
            dtilde,
            beta0: 1.0 / (self.eta0 * xi_d),
            beta2: self.eta1 * self.xi * self.xi / (self.eta0 * xi_d),
            eta1_xi2: self.eta1 * self.xi * self.xi,
        })
    }

    /// Validates and additionally requires spectral positivity, as needed by
    /// every covariance and spectral-density evaluation.
    pub fn require_permissible(&self) -> Result<PermissibilityReport> {
        let report = self.validate()?;
        if !report.spectrally_positive {
            return Err(SsrfError::InvalidParameter {
                field: "eta1",
                reason: report.messages.join("; "),
            });
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2_params(d: u32) -> ModelParams {
        // eta1 = 1, eta0 = 1, xi = 3, Dtilde = 1
        ModelParams::with_dtilde(d, 1.0, 1.0, 3.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn classify_reference_sets() {
        let p = ModelParams::new(1, 1.0, 1.0, 3.0, 0.0, 1.0).unwrap();
        let r = p.validate().unwrap();
        assert!(r.spectrally_positive);
        assert!(r.finite_variance);
        assert!(!r.oscillatory);

        let p = ModelParams::new(3, 1.0, 1.0, 3.0, 0.0, 1.0).unwrap();
        let r = p.validate().unwrap();
        assert!(r.spectrally_positive);
        assert!(!r.finite_variance);

        let p = ModelParams::new(1, 1.0, -1.0, 3.0, 1.0, 1.0).unwrap();
        let r = p.validate().unwrap();
        assert!(r.spectrally_positive);
        assert!(r.oscillatory);
        assert!(r.finite_variance);
    }

    #[test]
    fn boundary_double_root_rejected() {
        // eta1 = -2 sqrt(mu) puts a pole on the real axis.
        let p = ModelParams::new(1, 1.0, -2.0, 3.0, 1.0, 1.0).unwrap();
        let r = p.validate().unwrap();
        assert!(!r.spectrally_positive);
        assert!(p.require_permissible().is_err());
    }

    #[test]
    fn dtilde_direct_substitution() {
        let p = ModelParams::new(1, 1.0, 1.0, 3.0, 0.0, 6.0).unwrap();
        assert_eq!(p.derived().unwrap().dtilde, 1.0);
        let p = ModelParams::new(1, 1.0, 1.0, 3.0, 0.0, 0.5).unwrap();
        assert_eq!(p.derived().unwrap().dtilde, 1.0 / 12.0);
        let p = ModelParams::new(3, 2.0, 1.0, 2.0, 0.0, 32.0).unwrap();
        assert_eq!(p.derived().unwrap().dtilde, 1.0);
    }

    #[test]
    fn dtilde_roundtrip() {
        let p = fig2_params(1);
        assert_eq!(p.noise_d, 6.0);
        assert_eq!(p.derived().unwrap().dtilde, 1.0);
        let p = fig2_params(3);
        assert_eq!(p.noise_d, 54.0);
        assert_eq!(p.derived().unwrap().dtilde, 1.0);
    }

    #[test]
    fn beta_coefficients() {
        let p = fig2_params(1);
        let c = p.derived().unwrap();
        assert_eq!(c.beta0, 1.0 / 3.0);
        assert_eq!(c.beta2, 3.0);
        assert_eq!(c.beta1(2.0), 18.0);
        assert_eq!(c.beta1(-2.0), 18.0);
    }

    #[test]
    fn invalid_fields_name_the_field() {
        let err = ModelParams::new(1, -1.0, 1.0, 3.0, 0.0, 1.0).unwrap_err();
        assert!(matches!(err, SsrfError::InvalidParameter { field: "eta0", .. }));
        let err = ModelParams::new(1, 1.0, 1.0, 0.0, 0.0, 1.0).unwrap_err();
        assert!(matches!(err, SsrfError::InvalidParameter { field: "xi", .. }));
        let err = ModelParams::new(1, 1.0, 1.0, 3.0, 0.0, f64::NAN).unwrap_err();
        assert!(matches!(err, SsrfError::InvalidParameter { field: "noise_d", .. }));
        let err = ModelParams::new(4, 1.0, 1.0, 3.0, 0.0, 1.0).unwrap_err();
        assert!(matches!(err, SsrfError::InvalidParameter { field: "d", .. }));
        let err = ModelParams::new(2, 1.0, 1.0, 3.0, -0.5, 1.0).unwrap_err();
        assert!(matches!(err, SsrfError::InvalidParameter { field: "mu", .. }));
    }

    #[test]
    fn validate_is_pure() {
        let p = ModelParams::new(2, 0.7, -0.3, 1.5, 0.4, 2.0).unwrap();
        assert_eq!(p.validate().unwrap(), p.validate().unwrap());
    }

    #[test]
    fn quadratic_positive_on_dense_grid() {
        // For mu > 0 and eta1 > -2 sqrt(mu), 1 + eta1 x + mu x^2 > 0 on x in [0, 100].
        for &(eta1, mu) in &[(-1.0, 1.0), (-0.5, 0.1), (-1.99, 1.0), (0.3, 0.05), (-0.09, 0.0025)] {
            let p = ModelParams::new(1, 1.0, eta1, 1.0, mu, 1.0).unwrap();
            assert!(p.validate().unwrap().spectrally_positive);
            let min = (0..=100_000)
                .map(|i| {
                    let x = i as f64 * 1e-3;
                    1.0 + eta1 * x + mu * x * x
                })
                .fold(f64::INFINITY, f64::min);
            assert!(min > 0.0, "eta1={eta1} mu={mu} min={min}");
        }
    }
}
