//! The verification suite: every check pins a tolerance in code and reports
//! a measured value against it. `ssrf verify` prints one line per check and
//! exits nonzero if any fails; the acceptance test target runs the same
//! checks.
//!
//! Monte-Carlo checks use fixed seeds so runs are deterministic; their
//! tolerances are 3-standard-error bands of the estimator at those seeds.

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use serde::Serialize;
use ssrf::covariance::{
    cov_closed_d1, cov_closed_d3, cov_small_mu, cov_univariate_integral, cov_zero_space,
    cov_zero_time, Lag,
};
use ssrf::quadrature::cov_spectral_numeric;
use ssrf::simulate::{constraint_stats, empirical_cov, expected_constraints, simulate};
use ssrf::spectral::{ldecay, spd_lagged, spd_spacetime, spd_static, susceptibility_spectral};
use ssrf::{GridSpec, ModelParams, QuadratureSpec};

/// Outcome of one verification check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: &'static str,
    pub name: &'static str,
    pub passed: bool,
    /// Worst measured discrepancy (same units as `bound`).
    pub measured: f64,
    /// The tolerance pinned for this check.
    pub bound: f64,
    pub runtime_s: f64,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<4} {}: measured={:.6e} bound={:.6e} ({:.2}s) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.bound,
            self.runtime_s,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    /// Self-test: force the A1 agreement bound to an unattainable 1e-15.
    pub corrupt_tolerance: bool,
}

pub fn run_all(opts: &VerifyOptions) -> Vec<CheckResult> {
    vec![
        check_closed_vs_quadrature_d1(opts),
        check_closed_vs_quadrature_d3(),
        check_triple_agreement(),
        check_limit_recovery(),
        check_small_mu(),
        check_spectrum_identities(),
        check_singular_limit_d3(),
        check_singular_limit_d2(),
        check_oscillation(),
        check_monte_carlo(),
        check_ergodic_constraints(),
        check_determinism(),
    ]
}

fn fig2(d: u32) -> ModelParams {
    // eta1 = 1, eta0 = 1, xi = 3, Dtilde = 1
    ModelParams::with_dtilde(d, 1.0, 1.0, 3.0, 0.0, 1.0).unwrap()
}

fn grid_points(min: f64, max: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| min + (max - min) * i as f64 / (count - 1) as f64)
        .collect()
}

fn rel_floored(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}

pub fn check_closed_vs_quadrature_d1(opts: &VerifyOptions) -> CheckResult {
    let start = Instant::now();
    let bound = if opts.corrupt_tolerance { 1e-15 } else { 1e-8 };
    let p = fig2(1);
    let quad = QuadratureSpec::default();
    let mut worst = 0.0f64;
    let mut fail_note = String::new();
    for &r in &grid_points(0.0, 18.0, 10) {
        for &tau in &grid_points(0.0, 6.0, 10) {
            let lag = Lag { r, tau };
            let c = cov_closed_d1(&p, &lag).unwrap().value;
            match cov_spectral_numeric(&p, &lag, &quad) {
                Ok(q) => worst = worst.max(rel_floored(c, q.value)),
                Err(e) => {
                    worst = f64::INFINITY;
                    fail_note = format!("quadrature error at (r={r}, tau={tau}): {e}");
                }
            }
        }
    }
    let runtime_s = start.elapsed().as_secs_f64();
    CheckResult {
        id: "A1",
        name: "closed-form vs spectral quadrature, d=1",
        passed: worst <= bound && runtime_s < 10.0,
        measured: worst,
        bound,
        runtime_s,
        detail: if fail_note.is_empty() {
            "10x10 grid r in [0,18], tau in [0,6]; runtime budget 10 s".to_string()
        } else {
            fail_note
        },
    }
}

pub fn check_closed_vs_quadrature_d3() -> CheckResult {
    let start = Instant::now();
    let p = fig2(3);
    let quad = QuadratureSpec::default();
    let mut worst = 0.0f64;
    for &r in &grid_points(0.1, 18.0, 10) {
        for &tau in &grid_points(0.0, 6.0, 10) {
            let lag = Lag { r, tau };
            let c = cov_closed_d3(&p, &lag).unwrap().value;
            let q = cov_spectral_numeric(&p, &lag, &quad).unwrap().value;
            worst = worst.max(rel_floored(c, q));
        }
    }
    CheckResult {
        id: "A2",
        name: "closed-form vs spectral quadrature, d=3",
        passed: worst <= 1e-8,
        measured: worst,
        bound: 1e-8,
        runtime_s: start.elapsed().as_secs_f64(),
        detail: "10x10 grid r in [0.1,18] (minimum lag 0.1), tau in [0,6]".to_string(),
    }
}

pub fn check_triple_agreement() -> CheckResult {
    let start = Instant::now();
    let quad = QuadratureSpec::default();
    let mut worst = 0.0f64;
    for &r in &grid_points(0.0, 18.0, 10) {
        for &tau in &grid_points(0.0, 6.0, 10) {
            let lag = Lag { r, tau };
            let p = fig2(1);
            let c = cov_closed_d1(&p, &lag).unwrap().value;
            let u = cov_univariate_integral(&p, &lag, &quad).unwrap().value;
            let q = cov_spectral_numeric(&p, &lag, &quad).unwrap().value;
            worst = worst.max(rel_floored(u, c)).max(rel_floored(q, c));
        }
    }
    for &r in &grid_points(0.1, 18.0, 10) {
        for &tau in &grid_points(0.0, 6.0, 10) {
            let lag = Lag { r, tau };
            let p = fig2(3);
            let c = cov_closed_d3(&p, &lag).unwrap().value;
            let u = cov_univariate_integral(&p, &lag, &quad).unwrap().value;
            let q = cov_spectral_numeric(&p, &lag, &quad).unwrap().value;
            worst = worst.max(rel_floored(u, c)).max(rel_floored(q, c));
        }
    }
    CheckResult {
        id: "A3",
        name: "triple representation agreement (closed/univariate/quadrature)",
        passed: worst <= 1e-7,
        measured: worst,
        bound: 1e-7,
        runtime_s: start.elapsed().as_secs_f64(),
        detail: "mu = 0 shared domain, d = 1 and d = 3".to_string(),
    }
}

pub fn check_limit_recovery() -> CheckResult {
    let start = Instant::now();
    let p1 = fig2(1);
    let p3 = fig2(3);
    // tau limit: |closed_d1(0, tau) - zero_space(tau)| <= 1e-12
    let mut tau_diff = 0.0f64;
    for &tau in &grid_points(0.0, 6.0, 25) {
        let a = cov_closed_d1(&p1, &Lag { r: 0.0, tau }).unwrap().value;
        let b = cov_zero_space(&p1, tau).unwrap().value;
        tau_diff = tau_diff.max((a - b).abs());
    }
    // r limit: |closed_*(r, 0) - zero_time(r)| <= 1e-10
    let mut r_diff = 0.0f64;
    let mut r_points = grid_points(0.1, 18.0, 25);
    r_points.push(1e-3);
    for &r in &r_points {
        let a = cov_closed_d1(&p1, &Lag { r, tau: 0.0 }).unwrap().value;
        let b = cov_zero_time(&p1, r).unwrap().value;
        r_diff = r_diff.max((a - b).abs());
        let a = cov_closed_d3(&p3, &Lag { r, tau: 0.0 }).unwrap().value;
        let b = cov_zero_time(&p3, r).unwrap().value;
        r_diff = r_diff.max((a - b).abs());
    }
    let measured = (tau_diff / 1e-12).max(r_diff / 1e-10);
    CheckResult {
        id: "A4",
        name: "limit recovery (zero-space and zero-time specials)",
        passed: measured <= 1.0,
        measured,
        bound: 1.0,
        runtime_s: start.elapsed().as_secs_f64(),
        detail: format!(
            "max |C(0,tau) gap| = {tau_diff:.3e} (bound 1e-12); max |C(r,0) gap| = {r_diff:.3e} (bound 1e-10)"
        ),
    }
}

pub fn check_small_mu() -> CheckResult {
    let start = Instant::now();
    let quad = QuadratureSpec {
        rel_tol: 1e-11,
        max_subdiv: 20_000,
        ..QuadratureSpec::default()
    };
    let lags = [
        Lag { r: 1.0, tau: 0.5 },
        Lag { r: 3.0, tau: 1.0 },
        Lag { r: 0.5, tau: 2.0 },
    ];
    let cases = [(0.0, 1e-10), (0.01, 1e-4), (0.05, 1e-3)];
    let mut measured = 0.0f64;
    let mut details = Vec::new();
    for &(mu, bound) in &cases {
        let p = ModelParams::with_dtilde(1, 1.0, 1.0, 3.0, mu, 1.0).unwrap();
        let mut worst = 0.0f64;
        for lag in &lags {
            let s = cov_small_mu(&p, lag, 2, &quad).unwrap().value;
            let o = cov_spectral_numeric(&p, lag, &quad).unwrap().value;
            worst = worst.max((s - o).abs() / o.abs());
        }
        details.push(format!("mu={mu}: rel {worst:.3e} (bound {bound:.0e})"));
        measured = measured.max(worst / bound);
    }
    CheckResult {
        id: "A5",
        name: "small-mu series vs quadrature oracle (M = 2)",
        passed: measured <= 1.0,
        measured,
        bound: 1.0,
        runtime_s: start.elapsed().as_secs_f64(),
        detail: details.join("; "),
    }
}

pub fn check_spectrum_identities() -> CheckResult {
    let start = Instant::now();
    let p = fig2(1);
    // (a) stationary balance: spd_static * 2 * ldecay = D to machine precision
    let mut balance = 0.0f64;
    for i in 0..100 {
        let k = i as f64 * 0.1;
        let lhs = spd_static(&p, k) * 2.0 * ldecay(&p, k);
        balance = balance.max((lhs - p.noise_d).abs() / p.noise_d);
    }
    // (b) (1/2pi) int S domega = spd_static to rel 1e-6 (Simpson, omega = L tan(theta))
    let mut omega_int = 0.0f64;
    for &k in &[0.0, 0.5, 1.0, 2.0, 5.0] {
        let l = ldecay(&p, k);
        let m = 20_001usize;
        let h = PI / (m - 1) as f64;
        let f = |i: usize| {
            let theta = -PI / 2.0 + i as f64 * h;
            let jac = l / (theta.cos() * theta.cos());
            if jac.is_finite() {
                spd_spacetime(&p, k, l * theta.tan()) * jac
            } else {
                0.0
            }
        };
        let mut s = f(0) + f(m - 1);
        for i in 1..m - 1 {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i);
        }
        let integral = s * h / 3.0 / (2.0 * PI);
        omega_int = omega_int.max((integral - spd_static(&p, k)).abs() / spd_static(&p, k));
    }
    // (c) FDT: D chi / 2 = dC/dtau, central difference, rel 1e-6
    let mut fdt = 0.0f64;
    for &(k, tau) in &[(0.0, 0.5), (0.7, 1.2), (2.0, 0.3)] {
        let chi = susceptibility_spectral(&p, k, tau).unwrap();
        let h = 1e-4 / ldecay(&p, k);
        let fd = (spd_lagged(&p, k, tau + h) - spd_lagged(&p, k, tau - h)) / (2.0 * h);
        fdt = fdt.max((p.noise_d * chi / 2.0 - fd).abs() / fd.abs());
    }
    let measured = (balance / 1e-14).max(omega_int / 1e-6).max(fdt / 1e-6);
    CheckResult {
        id: "A6",
        name: "spectrum identities (balance, omega integral, FDT)",
        passed: measured <= 1.0,
        measured,
        bound: 1.0,
        runtime_s: start.elapsed().as_secs_f64(),
        detail: format!(
            "balance {balance:.2e} (1e-14); omega integral {omega_int:.2e} (1e-6); FDT {fdt:.2e} (1e-6)"
        ),
    }
}

pub fn check_singular_limit_d3() -> CheckResult {
    let start = Instant::now();
    let p = fig2(3);
    let r = 1e-4 * p.xi;
    let c = cov_zero_time(&p, r).unwrap().value;
    let limit = p.eta0 * p.xi / (4.0 * PI * p.eta1);
    let measured = (r * c / limit - 1.0).abs();
    let closed = cov_closed_d3(&p, &Lag { r, tau: 0.0 }).unwrap().value;
    CheckResult {
        id: "A7a",
        name: "d=3 spatial singularity law r*C(r,0) -> eta0 xi/(4 pi eta1)",
        passed: measured <= 1e-4,
        measured,
        bound: 1e-4,
        runtime_s: start.elapsed().as_secs_f64(),
        detail: format!(
            "r = 1e-4 xi; zero-time and closed-form routes differ by {:.1e}",
            (c - closed).abs() / c.abs()
        ),
    }
}

pub fn check_singular_limit_d2() -> CheckResult {
    let start = Instant::now();
    let p = fig2(2);
    let dtilde = 1.0;
    let tau = 1e-6 / dtilde;
    let c = cov_zero_space(&p, tau).unwrap().value;
    let limit = p.eta0 / (4.0 * PI * p.eta1);
    // the stated single-point form: C(0,tau)/(-ln tau) -> eta0/(4 pi eta1)
    let measured = (c / (-tau.ln()) / limit - 1.0).abs();
    // diagnostic: the differenced slope dC/d(-ln tau) quotient removes the
    // Euler-Mascheroni offset and confirms the logarithmic rate
    let tau2 = 1e-5 / dtilde;
    let c2 = cov_zero_space(&p, tau2).unwrap().value;
    let slope = (c - c2) / (tau2.ln() - tau.ln()) / limit;
    CheckResult {
        id: "A7b",
        name: "d=2 temporal singularity law C(0,tau)/(-ln tau) -> eta0/(4 pi eta1)",
        passed: measured <= 1e-2,
        measured,
        bound: 1e-2,
        runtime_s: start.elapsed().as_secs_f64(),
        detail: format!(
            "at tau = 1e-6 the exact law -Ei(-tau) = -ln(tau) - gamma + O(tau) leaves a \
             gamma/|ln tau| = 4.178e-2 offset, so the single-point ratio cannot meet 1e-2 \
             at this tau; differenced-slope diagnostic: |slope/limit - 1| = {:.2e}",
            (slope - 1.0).abs()
        ),
    }
}

pub fn check_oscillation() -> CheckResult {
    let start = Instant::now();
    // mu = 1, eta1 = -1, xi = 3, d = 1, tau = 0
    let p = ModelParams::with_dtilde(1, 1.0, -1.0, 3.0, 1.0, 1.0).unwrap();
    let quad = QuadratureSpec::default();
    let mut min = f64::INFINITY;
    let mut argmin = 0.0;
    for i in 1..=60 {
        let r = i as f64;
        let c = cov_spectral_numeric(&p, &Lag { r, tau: 0.0 }, &quad)
            .unwrap()
            .value;
        if c < min {
            min = c;
            argmin = r;
        }
    }
    CheckResult {
        id: "A8",
        name: "oscillatory covariance attains negative values (mu=1, eta1=-1)",
        passed: min < 0.0,
        measured: min,
        bound: 0.0,
        runtime_s: start.elapsed().as_secs_f64(),
        detail: format!("minimum over r in (0, 20 xi]: C({argmin}, 0) = {min:.6e}"),
    }
}

/// Regularized upper incomplete gamma Q(a, x), for half-integer a.
fn gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 1.0;
    }
    let lg = ln_gamma_half_int(a);
    let log_prefactor = -x + a * x.ln() - lg;
    if x < a + 1.0 {
        // series for P(a, x)
        let mut ap = a;
        let mut sum = 1.0 / a;
        let mut del = sum;
        for _ in 0..500 {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * 3e-16 {
                break;
            }
        }
        1.0 - sum * log_prefactor.exp()
    } else {
        // continued fraction for Q(a, x), modified Lentz
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500u32 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            if c == 0.0 {
                c = tiny;
            }
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 3e-16 {
                break;
            }
        }
        log_prefactor.exp() * h
    }
}

/// ln Γ(a) for positive half-integer or integer a, by upward recursion from
/// Γ(1) = 1 or Γ(1/2) = √π.
fn ln_gamma_half_int(a: f64) -> f64 {
    let two_a = 2.0 * a;
    assert!(
        (two_a - two_a.round()).abs() < 1e-12,
        "ln_gamma_half_int needs half-integer a, got {a}"
    );
    let mut acc = 0.0f64;
    let mut v = a;
    while v > 1.0 {
        v -= 1.0;
        acc += v.ln();
    }
    if (v - 0.5).abs() < 1e-12 {
        acc + 0.5 * PI.ln()
    } else {
        acc // v == 1, ln Gamma(1) = 0
    }
}

pub fn check_monte_carlo() -> CheckResult {
    let start = Instant::now();
    let p = fig2(1);
    let grid = GridSpec {
        n: 1024,
        spacing: 0.5,
        d: 1,
    };
    let n_seeds = 200u64;
    let base_seed = 4242u64;
    let dt = 1.0;

    let n_modes = 8usize;
    let mut vars = Vec::with_capacity(n_seeds as usize);
    let mut covs = Vec::with_capacity(n_seeds as usize);
    let mut mode_prod = vec![0.0f64; n_modes];
    for s in 0..n_seeds {
        let field = simulate(&p, &grid, dt, dt, base_seed + s).unwrap();
        let a = field.snapshot(0).unwrap();
        let b = field.snapshot(1).unwrap();
        vars.push(a.iter().map(|v| v * v).sum::<f64>() / a.len() as f64);
        covs.push(empirical_cov(&field, &[3.0], &[1.0]).unwrap()[0].value);
        for (mi, prod) in mode_prod.iter_mut().enumerate() {
            let j = mi + 1;
            let mut are = 0.0;
            let mut aim = 0.0;
            let mut bre = 0.0;
            let mut bim = 0.0;
            for (m, (&xa, &xb)) in a.iter().zip(b).enumerate() {
                let phase = -2.0 * PI * (j * m % grid.n) as f64 / grid.n as f64;
                let (sin, cos) = phase.sin_cos();
                are += xa * cos;
                aim += xa * sin;
                bre += xb * cos;
                bim += xb * sin;
            }
            *prod += are * bre + aim * bim;
        }
    }

    let mean_se = |xs: &[f64]| {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    };

    // sample variance against the exact expectation of the grid estimator
    let var_target = expected_constraints(&p, &grid).unwrap().s0
        / (grid.num_cells() as f64 * grid.spacing);
    let (var_mean, var_se) = mean_se(&vars);
    let z_var = (var_mean - var_target).abs() / var_se;

    // empirical C(3, 1) against the closed form (grid corrections are
    // exponentially small at tau = 1)
    let cov_target = cov_closed_d1(&p, &Lag { r: 3.0, tau: 1.0 }).unwrap().value;
    let (cov_mean, cov_se) = mean_se(&covs);
    let z_cov = (cov_mean - cov_target).abs() / cov_se;

    // per-mode lag-dt autocorrelation: chi-square over 8 modes
    let mut chi2 = 0.0f64;
    for (mi, prod) in mode_prod.iter().enumerate() {
        let j = mi + 1;
        let k = 2.0 * PI * j as f64 / (grid.n as f64 * grid.spacing);
        let sigma2 = grid.n as f64 / grid.spacing * spd_static(&p, k);
        let rho = (-ldecay(&p, k) * dt).exp();
        let est = prod / n_seeds as f64;
        let se = sigma2 * ((1.0 + rho * rho) / (2.0 * n_seeds as f64)).sqrt();
        let z = (est - rho * sigma2) / se;
        chi2 += z * z;
    }
    let p_value = gamma_q(n_modes as f64 / 2.0, chi2 / 2.0);

    let runtime_s = start.elapsed().as_secs_f64();
    let measured = (z_var / 3.0).max(z_cov / 3.0).max(0.01 / p_value.max(1e-300));
    CheckResult {
        id: "A9",
        name: "Monte-Carlo Langevin vs analytic (200 seeds, n=1024)",
        passed: measured <= 1.0 && runtime_s < 120.0,
        measured,
        bound: 1.0,
        runtime_s,
        detail: format!(
            "variance {var_mean:.6} vs grid expectation {var_target:.6} (z={z_var:.2}; the grid \
             Nyquist cutoff puts this below the continuum C(0,0) = 0.5); C(3,1) {cov_mean:.6} vs \
             {cov_target:.6} (z={z_cov:.2}); mode-autocorrelation chi2={chi2:.2}, p={p_value:.3}; \
             budget 120 s"
        ),
    }
}

pub fn check_ergodic_constraints() -> CheckResult {
    let start = Instant::now();
    let p = fig2(1);
    let grid = GridSpec {
        n: 1024,
        spacing: 0.5,
        d: 1,
    };
    let n_seeds = 500u64;
    let base_seed = 9191u64;
    let mut s0 = Vec::with_capacity(n_seeds as usize);
    let mut s1 = Vec::with_capacity(n_seeds as usize);
    let mut s2 = Vec::with_capacity(n_seeds as usize);
    for s in 0..n_seeds {
        let field = simulate(&p, &grid, 0.0, 1.0, base_seed + s).unwrap();
        let stats = constraint_stats(&field, 0).unwrap();
        s0.push(stats.s0);
        s1.push(stats.s1);
        s2.push(stats.s2);
    }
    let expect = expected_constraints(&p, &grid).unwrap();
    let z_of = |xs: &[f64], target: f64| {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        (mean - target).abs() / (var / n).sqrt()
    };
    let z0 = z_of(&s0, expect.s0);
    let z1 = z_of(&s1, expect.s1);
    let z2 = z_of(&s2, expect.s2);
    let measured = z0.max(z1).max(z2);
    CheckResult {
        id: "A10",
        name: "ergodic constraint statistics vs expectations (500 seeds)",
        passed: measured <= 3.0,
        measured,
        bound: 3.0,
        runtime_s: start.elapsed().as_secs_f64(),
        detail: format!("z-scores: S0 {z0:.2}, S1 {z1:.2}, S2 {z2:.2}"),
    }
}

pub fn check_determinism() -> CheckResult {
    let start = Instant::now();
    let p = fig2(1);
    let grid = GridSpec {
        n: 512,
        spacing: 0.5,
        d: 1,
    };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| simulate(&p, &grid, 2.0, 0.5, 7).unwrap())
    };
    let a = run(1);
    let b = run(4);
    let identical = a == b;
    // serialized bytes must agree too
    let dir = std::env::temp_dir();
    let pa = dir.join(format!("ssrf-verify-a-{}.sstf", std::process::id()));
    let pb = dir.join(format!("ssrf-verify-b-{}.sstf", std::process::id()));
    let bytes_equal = (|| -> Result<bool, ssrf::SsrfError> {
        a.write(&pa)?;
        b.write(&pb)?;
        Ok(std::fs::read(&pa)? == std::fs::read(&pb)?)
    })()
    .unwrap_or(false);
    for p in [&pa, &pb] {
        let _ = std::fs::remove_file(p);
        let _ = std::fs::remove_file(p.with_extension("sstf.json"));
        let mut os = p.as_os_str().to_os_string();
        os.push(".json");
        let _ = std::fs::remove_file(std::path::PathBuf::from(os));
    }
    let measured = if identical && bytes_equal { 0.0 } else { 1.0 };
    CheckResult {
        id: "A11",
        name: "bitwise determinism across thread counts",
        passed: measured == 0.0,
        measured,
        bound: 0.5,
        runtime_s: start.elapsed().as_secs_f64(),
        detail: "1-thread vs 4-thread pools: field values and SSTF1 bytes".to_string(),
    }
}
