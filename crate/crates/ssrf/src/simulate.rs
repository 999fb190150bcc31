//! Langevin dynamics on a periodic spatial grid.
//!
//! Each spatial Fourier mode is an independent mean-reverting process with
//! decay rate L̃(k) and stationary variance set by the static spectral
//! density, so the one-step update
//!
//! ```text
//! x̃(k, t+Δt) = x̃(k, t) e^{−L̃(k)Δt} + ε,   Var ε = σ̃²(k)(1 − e^{−2L̃(k)Δt})
//! ```
//!
//! is exact: there is no time-step bias, and Monte-Carlo comparisons against
//! the analytic covariances measure sampling error only. Modes are drawn
//! from the stationary law at t = 0 and Hermitian symmetry is enforced so
//! the inverse transform is real.
//!
//! The grid normalization fixes the real-space variance to the discrete
//! spectral sum `(nΔ)^{-d} Σ_j C̃(k_j, 0)`, i.e. the Riemann sum of the
//! continuum inverse transform over the grid's Brillouin zone. Estimator
//! expectations ([`expected_constraints`], [`empirical_cov`] targets) are
//! exact against that same sum; the sum converges to the continuum value as
//! the spacing shrinks.
//!
//! Noise is counter-based: the Gaussian pair for mode j at step s is a pure
//! function of (seed, j, s), drawn from a dedicated ChaCha12 stream at a
//! fixed word position. Mode updates may therefore run on any number of
//! threads with bitwise-identical results.

use std::f64::consts::PI;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SsrfError};
use crate::model::ModelParams;
use crate::spectral::spd_static;

/// Periodic spatial grid: `n` points per axis (power of two), `d` axes.
///
/// d = 1 supports full space-time runs; d = 2, 3 support static snapshots
/// (the per-mode dynamics is identical, but whole-history storage is
/// memory-prohibitive beyond one dimension).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub spacing: f64,
    pub d: u32,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 8 || !self.n.is_power_of_two() {
            return Err(SsrfError::InvalidParameter {
                field: "grid.n",
                reason: format!("must be a power of two >= 8, got {}", self.n),
            });
        }
        if !(self.spacing > 0.0) || !self.spacing.is_finite() {
            return Err(SsrfError::InvalidParameter {
                field: "grid.spacing",
                reason: format!("must be finite and > 0, got {}", self.spacing),
            });
        }
        if !(1..=3).contains(&self.d) {
            return Err(SsrfError::InvalidParameter {
                field: "grid.d",
                reason: format!("must be 1, 2, or 3, got {}", self.d),
            });
        }
        if (self.n as u128).pow(self.d) > (1u128 << 27) {
            return Err(SsrfError::InvalidParameter {
                field: "grid.n",
                reason: format!("n^d = {}^{} exceeds the memory budget", self.n, self.d),
            });
        }
        Ok(())
    }

    /// Number of grid cells n^d.
    pub fn num_cells(&self) -> usize {
        self.n.pow(self.d)
    }

    /// Signed wavenumber of axis index j: 2π f(j)/(nΔ), f(j) = j or j − n.
    pub fn axis_wavenumber(&self, j: usize) -> f64 {
        let signed = if j <= self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        };
        2.0 * PI * signed as f64 / (self.n as f64 * self.spacing)
    }

    /// Wavenumber magnitude of the flattened mode index.
    fn mode_wavenumber(&self, idx: usize) -> f64 {
        let mut rem = idx;
        let mut k2 = 0.0;
        for _ in 0..self.d {
            let j = rem % self.n;
            rem /= self.n;
            let k = self.axis_wavenumber(j);
            k2 += k * k;
        }
        k2.sqrt()
    }

    /// Flattened index of the Hermitian partner (−k mod lattice).
    fn partner_index(&self, idx: usize) -> usize {
        let mut rem = idx;
        let mut out = 0usize;
        let mut stride = 1usize;
        for _ in 0..self.d {
            let j = rem % self.n;
            rem /= self.n;
            out += ((self.n - j) % self.n) * stride;
            stride *= self.n;
        }
        out
    }
}

/// A simulated realization: snapshots at `times`, stored row-major
/// `[time × cell]`, with the generating parameters and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub grid: GridSpec,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub seed: u64,
    pub params: ModelParams,
}

/// Discretized max-ent constraint estimators: Ŝ₀ (squared field),
/// Ŝ₁ (squared forward-difference gradient), Ŝ₂ (squared discrete
/// Laplacian), each times Δᵈ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintStats {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
}

/// Empirical covariance at a grid-aligned lag, with a block-averaged
/// standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovEstimate {
    pub r: f64,
    pub tau: f64,
    pub value: f64,
    pub std_error: f64,
    pub n_products: usize,
}

const TWO_POW_NEG53: f64 = 1.0 / 9007199254740992.0;

/// The Gaussian pair for (seed, mode, step): a pure function, independent of
/// evaluation order. Consumes exactly four 32-bit words of the mode's
/// ChaCha12 stream per step.
fn gauss_pair(seed: u64, mode: u64, step: u64) -> (f64, f64) {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha12Rng::from_seed(key);
    rng.set_stream(mode);
    rng.set_word_pos((step as u128) * 4);
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * TWO_POW_NEG53; // in (0, 1]
    let u2 = ((rng.next_u64() >> 11) + 1) as f64 * TWO_POW_NEG53;
    let rad = (-2.0 * u1.ln()).sqrt();
    let ang = 2.0 * PI * u2;
    (rad * ang.cos(), rad * ang.sin())
}

/// Hermitian-symmetric complex Gaussian with per-pair variance `var`,
/// evaluated identically for a mode and its partner.
fn hermitian_noise(grid: &GridSpec, idx: usize, var: f64, seed: u64, step: u64) -> Complex64 {
    let partner = grid.partner_index(idx);
    let canon = idx.min(partner);
    let (g0, g1) = gauss_pair(seed, canon as u64, step);
    if idx == partner {
        Complex64::new(var.sqrt() * g0, 0.0)
    } else {
        let z = Complex64::new(g0, g1) * (0.5 * var).sqrt();
        if idx == canon {
            z
        } else {
            z.conj()
        }
    }
}

fn inverse_transform(grid: &GridSpec, modes: &[Complex64]) -> Result<Vec<f64>> {
    let n = grid.n;
    let mut buf = modes.to_vec();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_inverse(n);
    match grid.d {
        1 => fft.process(&mut buf),
        _ => {
            // transform along each axis through strided gather/scatter
            let cells = grid.num_cells();
            let mut line = vec![Complex64::default(); n];
            let mut stride = 1usize;
            for _axis in 0..grid.d {
                let block = stride * n;
                for base in 0..cells / block {
                    for inner in 0..stride {
                        let start = base * block + inner;
                        for (i, slot) in line.iter_mut().enumerate() {
                            *slot = buf[start + i * stride];
                        }
                        fft.process(&mut line);
                        for (i, v) in line.iter().enumerate() {
                            buf[start + i * stride] = *v;
                        }
                    }
                }
                stride *= n;
            }
        }
    }
    let norm = 1.0 / grid.num_cells() as f64;
    let mut max_im = 0.0f64;
    let mut sum_sq = 0.0f64;
    let out: Vec<f64> = buf
        .iter()
        .map(|z| {
            let re = z.re * norm;
            max_im = max_im.max((z.im * norm).abs());
            sum_sq += re * re;
            re
        })
        .collect();
    let rms = (sum_sq / out.len() as f64).sqrt();
    if max_im > 1e-10 * rms.max(f64::MIN_POSITIVE) {
        return Err(SsrfError::Accuracy {
            reason: format!("inverse transform lost Hermitian symmetry: max |Im| = {max_im:e}"),
            partial: rms,
            est_error: max_im,
        });
    }
    Ok(out)
}

/// Runs the mode-exact Langevin dynamics and returns snapshots at
/// t = 0, Δt, 2Δt, …, t_end.
///
/// For μ = 0 and d ≥ 2 the continuum variance diverges, but the discrete
/// grid imposes a spectral cutoff at the Nyquist wavenumber π/Δ, so the
/// simulated field is well defined; its variance targets the discrete sum
/// documented on this module.
pub fn simulate(
    params: &ModelParams,
    grid: &GridSpec,
    t_end: f64,
    dt: f64,
    seed: u64,
) -> Result<FieldGrid> {
    params.require_permissible()?;
    grid.validate()?;
    if grid.d != params.d {
        return Err(SsrfError::InvalidParameter {
            field: "grid.d",
            reason: format!(
                "grid dimension {} must match the model dimension {}",
                grid.d, params.d
            ),
        });
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(SsrfError::InvalidParameter {
            field: "dt",
            reason: format!("must be finite and > 0, got {dt}"),
        });
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(SsrfError::InvalidParameter {
            field: "t_end",
            reason: format!("must be finite and >= 0, got {t_end}"),
        });
    }
    let steps_f = t_end / dt;
    let steps = steps_f.round() as u64;
    if (steps_f - steps as f64).abs() > 1e-9 * steps_f.max(1.0) {
        return Err(SsrfError::InvalidParameter {
            field: "t_end",
            reason: format!("t_end = {t_end} is not an integer multiple of dt = {dt}"),
        });
    }
    if grid.d > 1 && steps > 0 {
        return Err(SsrfError::InvalidParameter {
            field: "t_end",
            reason: "d >= 2 supports static snapshots only (t_end = 0)".to_string(),
        });
    }
    let cells = grid.num_cells();
    let total = (steps as usize + 1) * cells;
    if total > (1 << 27) {
        return Err(SsrfError::InvalidParameter {
            field: "t_end",
            reason: format!("{} snapshots of {cells} cells exceed the memory budget", steps + 1),
        });
    }

    // per-mode stationary variance (grid-normalized) and one-step decay
    let norm = (grid.n as f64 / grid.spacing).powi(grid.d as i32);
    let dtilde = params.noise_d / (2.0 * params.xi_pow_d() * params.eta0);
    let mode_table: Vec<(f64, f64)> = (0..cells)
        .into_par_iter()
        .map(|j| {
            let k = grid.mode_wavenumber(j);
            let sigma2 = norm * spd_static(params, k);
            let decay = (-dtilde * crate::spectral::spectral_poly(params, k) * dt).exp();
            (sigma2, decay)
        })
        .collect();

    let mut modes: Vec<Complex64> = (0..cells)
        .into_par_iter()
        .map(|j| hermitian_noise(grid, j, mode_table[j].0, seed, 0))
        .collect();

    let mut values = Vec::with_capacity(total);
    let mut times = Vec::with_capacity(steps as usize + 1);
    values.extend(inverse_transform(grid, &modes)?);
    times.push(0.0);

    for s in 1..=steps {
        modes
            .par_iter_mut()
            .enumerate()
            .for_each(|(j, state)| {
                let (sigma2, q) = mode_table[j];
                let eps = hermitian_noise(grid, j, sigma2 * (1.0 - q * q), seed, s);
                *state = *state * q + eps;
            });
        values.extend(inverse_transform(grid, &modes)?);
        times.push(s as f64 * dt);
    }

    Ok(FieldGrid {
        grid: *grid,
        times,
        values,
        seed,
        params: *params,
    })
}

impl FieldGrid {
    /// The snapshot at time index `t`.
    pub fn snapshot(&self, t: usize) -> Result<&[f64]> {
        let cells = self.grid.num_cells();
        self.values
            .get(t * cells..(t + 1) * cells)
            .ok_or_else(|| SsrfError::InvalidParameter {
                field: "t_index",
                reason: format!("time index {t} out of range ({} snapshots)", self.times.len()),
            })
    }
}

fn snap_to_grid(value: f64, step: f64, name: &str) -> Result<usize> {
    let idx_f = value.abs() / step;
    let idx = idx_f.round();
    if (idx_f - idx).abs() > 1e-9 * idx_f.max(1.0) {
        return Err(SsrfError::Estimation(format!(
            "{name} = {value} does not align with the grid step {step}"
        )));
    }
    Ok(idx as usize)
}

/// Space- and time-averaged product estimator of C(r, τ) with periodic
/// wraparound, over the cross product of the requested lags. The process is
/// zero-mean by construction, so no mean is subtracted and the estimator is
/// unbiased for the grid covariance. Standard errors come from block
/// averaging (blocks over time when several snapshots exist, else over the
/// leading space axis).
pub fn empirical_cov(field: &FieldGrid, r_lags: &[f64], t_lags: &[f64]) -> Result<Vec<CovEstimate>> {
    let grid = &field.grid;
    let n = grid.n;
    let cells = grid.num_cells();
    let n_times = field.times.len();
    let dt_sample = if n_times > 1 {
        field.times[1] - field.times[0]
    } else {
        0.0
    };
    let mut out = Vec::with_capacity(r_lags.len() * t_lags.len());
    for &r in r_lags {
        let dr = snap_to_grid(r, grid.spacing, "r")?;
        if dr > n / 2 {
            return Err(SsrfError::Estimation(format!(
                "r = {r} exceeds half the periodic box ({})",
                n as f64 / 2.0 * grid.spacing
            )));
        }
        for &tau in t_lags {
            let dtau = if tau == 0.0 {
                0
            } else {
                if n_times < 2 {
                    return Err(SsrfError::Estimation(
                        "time lags require at least two snapshots".to_string(),
                    ));
                }
                snap_to_grid(tau, dt_sample, "tau")?
            };
            if dtau >= n_times {
                return Err(SsrfError::Estimation(format!(
                    "tau = {tau} exceeds the simulated horizon"
                )));
            }

            let t_pairs = n_times - dtau;
            // block by time when possible, else by leading-axis slabs
            let time_blocks = t_pairs >= 8;
            let n_blocks = 8usize;
            let mut block_sum = vec![0.0f64; n_blocks];
            let mut block_cnt = vec![0usize; n_blocks];
            let stride_axis = |axis: usize| n.pow(axis as u32);
            for t in 0..t_pairs {
                let a = field.snapshot(t)?;
                let b = field.snapshot(t + dtau)?;
                for m in 0..cells {
                    // average the axis-aligned shifts (isotropy)
                    let mut prod = 0.0;
                    for axis in 0..grid.d as usize {
                        let stride = stride_axis(axis);
                        let j = (m / stride) % n;
                        let shifted = m + ((j + dr) % n) * stride - j * stride;
                        prod += a[m] * b[shifted];
                    }
                    prod /= grid.d as f64;
                    let blk = if time_blocks {
                        t * n_blocks / t_pairs
                    } else {
                        (m % n) * n_blocks / n
                    };
                    block_sum[blk] += prod;
                    block_cnt[blk] += 1;
                }
            }
            let total: f64 = block_sum.iter().sum();
            let count: usize = block_cnt.iter().sum();
            if count == 0 {
                return Err(SsrfError::Estimation("no products to average".to_string()));
            }
            let mean = total / count as f64;
            let live: Vec<f64> = block_sum
                .iter()
                .zip(&block_cnt)
                .filter(|(_, &c)| c > 0)
                .map(|(&s, &c)| s / c as f64)
                .collect();
            let b = live.len() as f64;
            let var_blocks =
                live.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (b - 1.0).max(1.0);
            let std_error = (var_blocks / b).sqrt();
            out.push(CovEstimate {
                r: dr as f64 * grid.spacing,
                tau: dtau as f64 * dt_sample,
                value: mean,
                std_error,
                n_products: count,
            });
        }
    }
    Ok(out)
}

/// Discretized constraint estimators of the snapshot at `t_index`:
/// Ŝ₀ = Σ x² Δᵈ, Ŝ₁ = Σ (forward differences)² Δᵈ,
/// Ŝ₂ = Σ (discrete Laplacian)² Δᵈ, all with periodic wrap.
pub fn constraint_stats(field: &FieldGrid, t_index: usize) -> Result<ConstraintStats> {
    let grid = &field.grid;
    let x = field.snapshot(t_index)?;
    let n = grid.n;
    let vol = grid.spacing.powi(grid.d as i32);
    let inv_h = 1.0 / grid.spacing;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for m in 0..grid.num_cells() {
        s0 += x[m] * x[m];
        let mut lap = 0.0;
        for axis in 0..grid.d as usize {
            let stride = n.pow(axis as u32);
            let j = (m / stride) % n;
            let fwd = m + ((j + 1) % n) * stride - j * stride;
            let bwd = m + ((j + n - 1) % n) * stride - j * stride;
            let diff = (x[fwd] - x[m]) * inv_h;
            s1 += diff * diff;
            lap += (x[fwd] - 2.0 * x[m] + x[bwd]) * inv_h * inv_h;
        }
        s2 += lap * lap;
    }
    Ok(ConstraintStats {
        s0: s0 * vol,
        s1: s1 * vol,
        s2: s2 * vol,
    })
}

/// Analytic expectations of the constraint estimators under the simulated
/// grid law, via discrete spectral sums with the finite-difference symbols
/// w(k) = Σ_axes (2 sin(k_aΔ/2)/Δ)²:
/// E[Ŝ₀] = Σ_j C̃(k_j), E[Ŝ₁] = Σ_j w(k_j) C̃(k_j), E[Ŝ₂] = Σ_j w(k_j)² C̃(k_j).
pub fn expected_constraints(params: &ModelParams, grid: &GridSpec) -> Result<ConstraintStats> {
    params.require_permissible()?;
    grid.validate()?;
    if grid.d != params.d {
        return Err(SsrfError::InvalidParameter {
            field: "grid.d",
            reason: format!(
                "grid dimension {} must match the model dimension {}",
                grid.d, params.d
            ),
        });
    }
    let n = grid.n;
    let (s0, s1, s2) = (0..grid.num_cells())
        .into_par_iter()
        .map(|m| {
            let spd = spd_static(params, grid.mode_wavenumber(m));
            let mut w = 0.0;
            let mut rem = m;
            for _ in 0..grid.d {
                let j = rem % n;
                rem /= n;
                let s = 2.0 * (grid.axis_wavenumber(j) * grid.spacing / 2.0).sin() / grid.spacing;
                w += s * s;
            }
            (spd, w * spd, w * w * spd)
        })
        .reduce(|| (0.0, 0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    Ok(ConstraintStats { s0, s1, s2 })
}

// --- SSTF1 serialization ---------------------------------------------------

const MAGIC: &[u8; 5] = b"SSTF1";

#[derive(Serialize, Deserialize)]
struct SidecarMeta {
    format: String,
    d: u32,
    n: usize,
    spacing: f64,
    times: Vec<f64>,
    params: ModelParams,
    seed: u64,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_os_string();
    os.push(".json");
    PathBuf::from(os)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp-write");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

impl FieldGrid {
    /// Writes the SSTF1 binary plus its JSON metadata sidecar (`<path>.json`),
    /// both atomically (temp file + rename).
    ///
    /// Layout, little-endian: magic `"SSTF1"`, d (u32), n (u64),
    /// spacing (f64), n_times (u64), η₀ η₁ ξ μ D (f64 each), seed (u64),
    /// then the row-major `[time × cell]` f64 values.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut bytes =
            Vec::with_capacity(5 + 4 + 8 + 8 + 8 + 40 + 8 + 8 * self.values.len());
        bytes.extend_from_slice(MAGIC);
        bytes.extend_from_slice(&self.params.d.to_le_bytes());
        bytes.extend_from_slice(&(self.grid.n as u64).to_le_bytes());
        bytes.extend_from_slice(&self.grid.spacing.to_le_bytes());
        bytes.extend_from_slice(&(self.times.len() as u64).to_le_bytes());
        for v in [
            self.params.eta0,
            self.params.eta1,
            self.params.xi,
            self.params.mu,
            self.params.noise_d,
        ] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        bytes.extend_from_slice(&self.seed.to_le_bytes());
        for v in &self.values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        write_atomic(path, &bytes)?;

        let meta = SidecarMeta {
            format: "SSTF1".to_string(),
            d: self.grid.d,
            n: self.grid.n,
            spacing: self.grid.spacing,
            times: self.times.clone(),
            params: self.params,
            seed: self.seed,
        };
        let json = serde_json::to_string_pretty(&meta)
            .map_err(|e| SsrfError::Format(e.to_string()))?;
        write_atomic(&sidecar_path(path), json.as_bytes())?;
        Ok(())
    }

    /// Reads an SSTF1 binary and its sidecar back into memory.
    pub fn read(path: &Path) -> Result<FieldGrid> {
        let bytes = fs::read(path)?;
        let need = |n: usize, at: usize| -> Result<()> {
            if bytes.len() < at + n {
                Err(SsrfError::Format(format!(
                    "truncated SSTF1 file: need {} bytes at offset {at}",
                    n
                )))
            } else {
                Ok(())
            }
        };
        need(5, 0)?;
        if &bytes[..5] != MAGIC {
            return Err(SsrfError::Format("bad magic, not an SSTF1 file".to_string()));
        }
        let mut at = 5usize;
        let mut take = |n: usize| -> Result<&[u8]> {
            need(n, at)?;
            let s = &bytes[at..at + n];
            at += n;
            Ok(s)
        };
        let d = u32::from_le_bytes(take(4)?.try_into().unwrap());
        let n = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
        let spacing = f64::from_le_bytes(take(8)?.try_into().unwrap());
        let n_times = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
        let mut p = [0.0f64; 5];
        for slot in &mut p {
            *slot = f64::from_le_bytes(take(8)?.try_into().unwrap());
        }
        let seed = u64::from_le_bytes(take(8)?.try_into().unwrap());
        let grid = GridSpec { n, spacing, d };
        grid.validate()?;
        let cells = grid.num_cells();
        let expected = n_times * cells * 8;
        need(expected, at)?;
        let mut values = Vec::with_capacity(n_times * cells);
        for i in 0..n_times * cells {
            let off = at + i * 8;
            values.push(f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap()));
        }
        let params = ModelParams::new(d, p[0], p[1], p[2], p[3], p[4])?;

        let meta_bytes = fs::read(sidecar_path(path))?;
        let meta: SidecarMeta = serde_json::from_slice(&meta_bytes)
            .map_err(|e| SsrfError::Format(format!("bad sidecar: {e}")))?;
        if meta.times.len() != n_times {
            return Err(SsrfError::Format(
                "sidecar time list does not match the binary header".to_string(),
            ));
        }
        Ok(FieldGrid {
            grid,
            times: meta.times,
            values,
            seed,
            params,
        })
    }
}
