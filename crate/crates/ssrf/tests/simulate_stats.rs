//! Statistical properties of the Langevin simulator: exact-discretization
//! invariance, stationarity, mode autocorrelation, and constraint-estimator
//! concentration. Seeds are fixed so every run is reproducible.

use ssrf::simulate::{constraint_stats, empirical_cov, expected_constraints, simulate};
use ssrf::spectral::{ldecay, spd_static};
use ssrf::{GridSpec, ModelParams};

fn fig2() -> ModelParams {
    ModelParams::with_dtilde(1, 1.0, 1.0, 3.0, 0.0, 1.0).unwrap()
}

fn grid(n: usize) -> GridSpec {
    GridSpec {
        n,
        spacing: 0.5,
        d: 1,
    }
}

/// Asymptotic two-sided p-value of the two-sample Kolmogorov-Smirnov test.
fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d_stat = 0.0f64;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d_stat = d_stat.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d_stat;
    let mut p = 0.0;
    for k in 1..=100 {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        p += sign * (-2.0 * (k as f64 * lambda).powi(2)).exp();
    }
    (2.0 * p).clamp(0.0, 1.0)
}

#[test]
fn dt_invariance_of_single_time_marginal() {
    // The per-mode update is the exact transition law, so halving dt leaves
    // the single-time marginal unchanged; KS on independent seed ranges.
    let params = fig2();
    let g = grid(256);
    let n_seeds = 150;
    let mut coarse: Vec<f64> = (0..n_seeds)
        .map(|s| simulate(&params, &g, 2.0, 1.0, s).unwrap().snapshot(2).unwrap()[0])
        .collect();
    let mut fine: Vec<f64> = (0..n_seeds)
        .map(|s| {
            simulate(&params, &g, 2.0, 0.5, 10_000 + s)
                .unwrap()
                .snapshot(4)
                .unwrap()[0]
        })
        .collect();
    let p = ks_two_sample(&mut coarse, &mut fine);
    assert!(p > 0.01, "KS p-value {p}");
}

#[test]
fn mode_autocorrelation_decays_at_ldecay_rate() {
    // <x~(k,0) conj(x~(k,dt))> = sigma~^2(k) e^{-L(k) dt}, checked through a
    // direct DFT of two snapshots over many seeds.
    let params = fig2();
    let g = grid(256);
    let dt = 1.0;
    let n_seeds = 400;
    let modes = [1usize, 3, 8];
    let mut corr = [0.0f64; 3];
    let mut var = [0.0f64; 3];
    for seed in 0..n_seeds {
        let field = simulate(&params, &g, dt, dt, 777 + seed).unwrap();
        let a = field.snapshot(0).unwrap();
        let b = field.snapshot(1).unwrap();
        for (mi, &j) in modes.iter().enumerate() {
            let mut are = 0.0;
            let mut aim = 0.0;
            let mut bre = 0.0;
            let mut bim = 0.0;
            for (m, (&xa, &xb)) in a.iter().zip(b).enumerate() {
                let phase = -2.0 * std::f64::consts::PI * (j * m) as f64 / g.n as f64;
                let (s, c) = phase.sin_cos();
                are += xa * c;
                aim += xa * s;
                bre += xb * c;
                bim += xb * s;
            }
            corr[mi] += are * bre + aim * bim;
            var[mi] += are * are + aim * aim;
        }
    }
    for (mi, &j) in modes.iter().enumerate() {
        let k = 2.0 * std::f64::consts::PI * j as f64 / (g.n as f64 * g.spacing);
        let sigma2 = (g.n as f64 / g.spacing) * spd_static(&params, k);
        let rho = (-ldecay(&params, k) * dt).exp();
        let est_rho = corr[mi] / var[mi];
        // sampling error of the correlation ratio ~ sqrt((1-rho^2)/n)
        let tol = 4.0 * ((1.0 - rho * rho) / n_seeds as f64).sqrt();
        assert!(
            (est_rho - rho).abs() < tol,
            "mode {j}: rho {est_rho} vs {rho} (tol {tol})"
        );
        // and the mode variance itself matches the grid normalization
        let est_var = var[mi] / n_seeds as f64;
        assert!(
            (est_var - sigma2).abs() < 5.0 * sigma2 / (n_seeds as f64).sqrt(),
            "mode {j}: var {est_var} vs {sigma2}"
        );
    }
}

#[test]
fn stationarity_between_first_and_last_snapshot() {
    // paired comparison of the spatial sample variance at t = 0 and t = t_end
    let params = fig2();
    let g = grid(512);
    let n_seeds = 200;
    let mut diffs = Vec::with_capacity(n_seeds as usize);
    for seed in 0..n_seeds {
        let field = simulate(&params, &g, 2.0, 1.0, 50_000 + seed).unwrap();
        let var_of = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        let v0 = var_of(field.snapshot(0).unwrap());
        let v1 = var_of(field.snapshot(2).unwrap());
        diffs.push(v1 - v0);
    }
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>()
        / (diffs.len() - 1) as f64;
    let se = (var / diffs.len() as f64).sqrt();
    assert!(mean.abs() < 4.0 * se, "variance drift {mean} vs se {se}");
}

#[test]
fn empirical_covariance_tracks_closed_form() {
    // C(3, 1) against the d=1 closed form, 60 seeds on a medium grid
    let params = fig2();
    let g = grid(1024);
    let n_seeds = 60;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for seed in 0..n_seeds {
        let field = simulate(&params, &g, 1.0, 1.0, 300 + seed).unwrap();
        let est = empirical_cov(&field, &[3.0], &[1.0]).unwrap()[0];
        sum += est.value;
        sum_sq += est.value * est.value;
    }
    let mean = sum / n_seeds as f64;
    let se = ((sum_sq / n_seeds as f64 - mean * mean) / (n_seeds as f64 - 1.0)).sqrt();
    let want = 0.06713350035155466; // closed form at (r, tau) = (3, 1)
    assert!(
        (mean - want).abs() < 4.0 * se,
        "empirical {mean} vs closed {want} (se {se})"
    );
}

#[test]
fn constraint_estimators_concentrate_with_grid_size() {
    // Var(S_i / n) decreases as n grows: ergodicity of the constraints
    let params = fig2();
    let n_seeds = 80;
    let mut variances = Vec::new();
    for &n in &[256usize, 1024, 4096] {
        let g = grid(n);
        let mut s0 = Vec::with_capacity(n_seeds as usize);
        for seed in 0..n_seeds {
            let field = simulate(&params, &g, 0.0, 1.0, 9_000 + seed).unwrap();
            s0.push(constraint_stats(&field, 0).unwrap().s0 / n as f64);
        }
        let mean = s0.iter().sum::<f64>() / s0.len() as f64;
        let var = s0.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / (s0.len() - 1) as f64;
        variances.push(var);
        // the mean itself must sit near the analytic expectation
        let expect = expected_constraints(&params, &g).unwrap().s0 / n as f64;
        assert!(
            (mean - expect).abs() < 5.0 * (var / n_seeds as f64).sqrt(),
            "n={n}: mean {mean} vs expected {expect}"
        );
    }
    assert!(variances[0] > variances[1] && variances[1] > variances[2]);
}
