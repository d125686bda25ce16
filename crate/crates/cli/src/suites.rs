//! Verification suites behind `verify` commands. Each returns report rows;
//! rows with a tolerance decide PASS/FAIL.

use std::path::Path;

use chaoslab::chaos::{
    girsanov_check, multiscaling_fit, Estimate, FieldGridSpec, FieldSampler, MassFunctional, TruncationStyle,
};
use chaoslab::mellin::{
    asymptotic_log_m, decomposition_mellin, default_contour, density_moments, functional_equation_residuals,
    levy_density_from_factors, log_mellin_m, mellin_m, mellin_m_product, spectral_forms, LevyKhinchineData,
};
use chaoslab::selberg::{
    mass_moment_neg, multiscaling_exponent, selberg_closed, selberg_oracle, Budget, ChaosParams, IntegralSpec,
    Variant,
};
use chaoslab::specfun::{double_gamma_residuals, DoubleGammaContext};
use chaoslab::zeros::{
    covariance_regression, empirical_field, exp_functional_moment, load_zeros, saturated_variance,
    truncated_variance, EpsilonRule, StatVariant, StatisticConfig,
};
use chaoslab::Result;
use num_complex::Complex64;

use crate::report::ResultRow;

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

/// 50 (q, μ, λ₁, λ₂) tuples with real and complex q inside the Mellin strip.
pub fn mellin_grid() -> Vec<(Complex64, ChaosParams)> {
    let mus = [0.1, 0.25, 0.4, 0.5, 0.75, 1.0, 1.3, 1.6, 0.05, 0.3];
    let lams = [(0.0, 0.0), (0.3, 0.0), (-0.1, 0.4), (1.0, 0.5), (0.2, 0.2)];
    let mut out = Vec::with_capacity(50);
    for (i, &mu) in mus.iter().enumerate() {
        for (j, &(l1, l2)) in lams.iter().enumerate() {
            let tau = 2.0 / mu;
            let l1 = f64::max(l1, -0.5 / tau);
            let p = ChaosParams::new(mu, l1, l2).expect("grid parameters are valid");
            let k = (i * 5 + j) as f64;
            let re = -2.5 + (k * 0.37) % (tau.min(4.0) + 2.3);
            let im = if j % 2 == 0 { 0.0 } else { ((k * 0.61) % 5.0) - 2.5 };
            out.push((cx(re, im), p));
        }
    }
    out
}

pub fn double_gamma_equations() -> Result<Vec<ResultRow>> {
    let (mut r1, mut r2) = (0.0f64, 0.0f64);
    for tau in [1.5, 2.5, 4.0, 6.7] {
        let ctx = DoubleGammaContext::new(tau)?;
        for i in 0..20 {
            let z = cx(0.2 + 4.8 * (i as f64 + 0.5) / 20.0, if i % 2 == 0 { 0.0 } else { 0.3 * i as f64 - 3.0 });
            let (a, b) = double_gamma_residuals(z, &ctx)?;
            r1 = r1.max(a);
            r2 = r2.max(b);
        }
    }
    Ok(vec![
        ResultRow::below("double_gamma.unit_shift_residual", r1, 1e-9),
        ResultRow::below("double_gamma.tau_shift_residual", r2, 1e-9),
    ])
}

pub fn mellin_routes() -> Result<Vec<ResultRow>> {
    let mut worst = 0.0f64;
    for (q, p) in mellin_grid() {
        worst = worst.max(rel(mellin_m_product(q, &p, 256, 12)?, mellin_m(q, &p)?));
    }
    Ok(vec![ResultRow::below("mellin.route_agreement", worst, 1e-8)])
}

pub fn mellin_moments() -> Result<Vec<ResultRow>> {
    let mut worst = 0.0f64;
    for mu in [0.1, 0.2, 0.3, 0.5, 0.6, 0.9] {
        for (l1, l2) in [(0.0, 0.0), (0.4, 0.1), (-0.02, 0.7)] {
            let p = ChaosParams::new(mu, l1, l2)?;
            for n in 1..=3u32 {
                if (n as f64) < p.tau() {
                    let exact = selberg_closed(n, &p)?;
                    worst = worst.max(rel(mellin_m(cx(n as f64, 0.0), &p)?, cx(exact, 0.0)));
                }
            }
            for n in 1..=2u32 {
                let exact = mass_moment_neg(n, &p, Variant::Plain)?;
                worst = worst.max(rel(mellin_m(cx(-(n as f64), 0.0), &p)?, cx(exact, 0.0)));
            }
        }
    }
    let mut second = 0.0f64;
    for mu in [0.2, 0.3, 0.5] {
        let exact = 2.0 / ((1.0 - mu) * (2.0 - mu));
        second = second.max(rel(mellin_m(cx(2.0, 0.0), &ChaosParams::with_mu(mu)?)?, cx(exact, 0.0)));
    }
    Ok(vec![
        ResultRow::below("mellin.integer_moments", worst, 1e-10),
        ResultRow::below("mellin.second_moment_closed_form", second, 1e-10),
    ])
}

pub fn mellin_functional_equations() -> Result<Vec<ResultRow>> {
    let (mut r1, mut r2) = (0.0f64, 0.0f64);
    for (q, p) in mellin_grid() {
        let (a, b) = functional_equation_residuals(q, &p)?;
        r1 = r1.max(a);
        r2 = r2.max(b);
    }
    Ok(vec![
        ResultRow::below("mellin.unit_shift_residual", r1, 1e-8),
        ResultRow::below("mellin.tau_shift_residual", r2, 1e-8),
    ])
}

pub fn mellin_decomposition() -> Result<Vec<ResultRow>> {
    let mut worst = 0.0f64;
    for (q, p) in mellin_grid() {
        worst = worst.max(rel(decomposition_mellin(q, &p)?, mellin_m(q, &p)?));
    }
    Ok(vec![ResultRow::below("mellin.decomposition", worst, 1e-8)])
}

pub fn levy_khinchine() -> Result<Vec<ResultRow>> {
    let mut worst = 0.0f64;
    let mut lowest = f64::INFINITY;
    for (mu, l1, l2) in [(0.5, 0.0, 0.0), (0.3, 0.2, 0.5)] {
        let p = ChaosParams::new(mu, l1, l2)?;
        let lk = LevyKhinchineData::new(&p)?;
        for q in [0.5, -0.5, 1.5] {
            worst = worst.max((lk.log_mellin(q)? - log_mellin_m(cx(q, 0.0), &p)?.re).abs());
        }
        for k in 0..=200 {
            let u = 1e-3 * (30.0f64 / 1e-3).powf(k as f64 / 200.0);
            lowest = lowest.min(levy_density_from_factors(u, &p)?);
        }
    }
    let spectral = spectral_forms(1.0, 0.5)?;
    Ok(vec![
        ResultRow::below("mellin.levy_khinchine_reconstruction", worst, 1e-4),
        // PASS iff the minimum is nonnegative
        ResultRow::below("mellin.levy_density_negative_part", (-lowest).max(0.0), 0.0),
        ResultRow::value("mellin.levy_density_minimum", lowest),
        ResultRow::value("mellin.spectral_sign_discrepancy", spectral.discrepancy()),
    ])
}

pub fn asymptotic_order() -> Result<Vec<ResultRow>> {
    let q = cx(2.0, 0.0);
    let err = |mu: f64| -> Result<f64> {
        let p = ChaosParams::with_mu(mu)?;
        Ok((asymptotic_log_m(q, &p, 3)? - log_mellin_m(q, &p)?).norm())
    };
    let ratio = err(0.1)? / err(0.05)?;
    // ratio in [16, 64] is an observed order 5 ± 1
    Ok(vec![ResultRow::value("mellin.asymptotic_error_ratio", ratio), ResultRow::near("mellin.asymptotic_order", ratio.log2(), 5.0, 1.0)])
}

pub fn selberg_quadrature() -> Result<Vec<ResultRow>> {
    let p = ChaosParams::with_mu(0.3)?;
    let spec = IntegralSpec::unit(2, &p)?;
    let q = selberg_oracle(&spec, &p, Budget::Quadrature, 0)?;
    Ok(vec![ResultRow::near("selberg.quadrature", q.estimate, selberg_closed(2, &p)?, 1e-8)])
}

pub fn selberg_monte_carlo(seed: u64) -> Result<Vec<ResultRow>> {
    let p = ChaosParams::with_mu(0.3)?;
    let spec = IntegralSpec::unit(2, &p)?;
    let mc = selberg_oracle(&spec, &p, Budget::Samples(10_000_000), seed)?;
    let exact = selberg_closed(2, &p)?;
    Ok(vec![ResultRow::near("selberg.monte_carlo", mc.estimate, exact, 0.01 * exact).with_stderr(mc.stderr)])
}

pub fn density_inversion() -> Result<Vec<ResultRow>> {
    let p = ChaosParams::with_mu(0.5)?;
    let m = density_moments(&p, default_contour(&p), 512)?;
    let exact2 = selberg_closed(2, &p)?;
    let mut rows = vec![ResultRow::near("density.integral", m.integral, 1.0, 1e-3)];
    if let Some(mean) = m.mean {
        rows.push(ResultRow::near("density.mean", mean, 1.0, 1e-3));
    }
    if let Some(second) = m.second {
        rows.push(ResultRow::below("density.second_moment_relative_error", (second / exact2 - 1.0).abs(), 5e-3));
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChaosSettings {
    pub mu: f64,
    /// Intermittency of the multiscaling fit.
    pub multiscaling_mu: f64,
    pub grid: usize,
    pub epsilon: Option<f64>,
    pub samples: usize,
    pub seed: u64,
}

impl Default for ChaosSettings {
    fn default() -> Self {
        Self { mu: 0.3, multiscaling_mu: 0.5, grid: 4096, epsilon: None, samples: 10_000, seed: 0 }
    }
}

fn field(mu: f64, s: &ChaosSettings) -> Result<FieldGridSpec> {
    let g = FieldGridSpec::new(s.grid, mu, TruncationStyle::LinearTaper)?;
    match s.epsilon {
        Some(e) => g.with_epsilon(e),
        None => Ok(g),
    }
}

/// E[M] and E[M²] of the total mass over [0, 1].
pub fn mass_moments(spec: &FieldGridSpec, samples: usize, seed: u64) -> Result<(Estimate, Estimate)> {
    let sampler = FieldSampler::new(spec)?;
    let one = |_: f64| 1.0;
    let mass = MassFunctional { weight: &one, interval: (0.0, 1.0), centered: false, power_shift: 0.0 };
    let m = sampler.map_samples(samples, seed, |x| mass.eval(spec, x));
    let sq: Vec<f64> = m.iter().map(|x| x * x).collect();
    Ok((Estimate::from_samples(&m), Estimate::from_samples(&sq)))
}

pub fn chaos_checks(s: &ChaosSettings) -> Result<Vec<ResultRow>> {
    let p = ChaosParams::with_mu(s.mu)?;
    let spec = field(s.mu, s)?;
    let (m1, m2) = mass_moments(&spec, s.samples, s.seed)?;
    let target2 = selberg_closed(2, &p)?;
    let mut rows = vec![
        ResultRow::near("chaos.mean_mass", m1.value, 1.0, 3.0 * m1.stderr).with_stderr(m1.stderr),
        ResultRow::near("chaos.second_moment", m2.value, target2, (3.0 * m2.stderr).max(0.05 * target2))
            .with_stderr(m2.stderr),
    ];
    for q in 1..=2 {
        for pw in 1..=2 {
            if pw as f64 >= p.tau() {
                continue;
            }
            let g = girsanov_check(&p, q, pw, &spec, s.samples, s.seed)?;
            rows.push(ResultRow::below(format!("chaos.girsanov_q{q}_p{pw}_abs_z"), g.z_score.abs(), 3.0));
        }
    }
    let pm = ChaosParams::with_mu(s.multiscaling_mu)?;
    let mspec = field(s.multiscaling_mu, s)?;
    let eps = mspec.epsilon();
    let scales: Vec<f64> = (1..=12).map(|k| 2f64.powi(-k)).filter(|&x| x >= 8.0 * eps && x < 1.0).collect();
    let fit = multiscaling_fit(&pm, 2.0, &scales, &mspec, s.samples, s.seed)?;
    let zeta = multiscaling_exponent(2.0, &pm, Variant::Plain);
    rows.push(ResultRow::near("chaos.multiscaling_slope", fit.slope, zeta, 0.05 * zeta));
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroSettings {
    pub mu: f64,
    pub t0: f64,
    pub alpha: f64,
    pub epsilon: EpsilonRule,
    pub variant: StatVariant,
    pub samples: usize,
    pub seed: u64,
}

impl Default for ZeroSettings {
    fn default() -> Self {
        Self {
            mu: 0.3,
            t0: 3e4,
            alpha: 0.5,
            epsilon: EpsilonRule::Fixed(0.1),
            variant: StatVariant::Bounded,
            samples: 10_000,
            seed: 0,
        }
    }
}

impl ZeroSettings {
    pub fn config(&self) -> StatisticConfig {
        let mut cfg = StatisticConfig::new(self.variant, self.mu, self.t0);
        cfg.alpha = self.alpha;
        cfg.epsilon = self.epsilon;
        cfg.omega_samples = self.samples;
        cfg.seed = self.seed;
        cfg
    }
}

pub fn zero_checks(path: &Path, s: &ZeroSettings) -> Result<Vec<ResultRow>> {
    let table = load_zeros(path)?;
    let base = s.config();
    base.validate()?;
    let eps = base.eps();
    let mut cfg = base.clone();
    // a 0.01-spaced grid through u = 1/2 between the 2ε insets
    let lo = (200.0 * eps).ceil() as usize;
    cfg.u_grid = Some((lo..=100 - lo).map(|k| k as f64 / 100.0).collect());
    let field = empirical_field(&table, &cfg)?;
    let mid = field.u_grid.iter().position(|&u| (u - 0.5).abs() < 1e-12).expect("grid holds 1/2");
    let mean = field.mean[mid];
    let var = field.covariance[mid][mid];
    let truncated = truncated_variance(&cfg, 0.5)?;
    let (slope, intercept) = covariance_regression(&field, &cfg)?;
    let moment = exp_functional_moment(&table, &base, 1, true)?;
    let worst_z = field.mean.iter().map(|m| (m.value / m.stderr).abs()).fold(0.0, f64::max);
    let left = match s.variant {
        StatVariant::Bounded => 0.0,
        StatVariant::Unbounded => -1.0 / eps,
    };
    // centering with log t0 where the local density is log(ωt0/2π)
    let offset = std::f64::consts::PI * (2.0 * s.mu).sqrt() * (0.5 - left) / (2.0 * std::f64::consts::PI * cfg.lambda())
        * (2.0 * 2f64.ln() - 1.0 - (2.0 * std::f64::consts::PI).ln());
    Ok(vec![
        ResultRow::near("zeros.mean", mean.value, 0.0, 3.0 * mean.stderr).with_stderr(mean.stderr),
        ResultRow::value("zeros.mean_finite_height_offset", offset),
        ResultRow::value("zeros.mean_worst_abs_z", worst_z),
        ResultRow::near("zeros.variance", var.value, truncated, 0.1 * truncated).with_stderr(var.stderr),
        ResultRow::value("zeros.truncated_variance", truncated),
        ResultRow::value("zeros.pair_correlation_variance", saturated_variance(&cfg, 0.5)?),
        ResultRow::near("zeros.regression_slope", slope, 1.0, 0.3),
        ResultRow::value("zeros.regression_intercept", intercept),
        ResultRow::near("zeros.rescaled_moment_n1", moment.value, 1.0, 0.5).with_stderr(moment.stderr),
    ])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tier {
    /// Formulas and identities only.
    Quick,
    /// Adds the Monte Carlo suites.
    Full,
}

/// Every deterministic suite, then the Monte Carlo suites for the full tier.
pub fn verify_all(tier: Tier, zeros: Option<&Path>, seed: u64) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    let mut stage = |name: &str, f: &mut dyn FnMut() -> Result<Vec<ResultRow>>| -> Result<()> {
        let start = std::time::Instant::now();
        rows.extend(f()?);
        eprintln!("{name}: {:.2} s", start.elapsed().as_secs_f64());
        Ok(())
    };
    stage("double gamma", &mut double_gamma_equations)?;
    stage("mellin routes", &mut mellin_routes)?;
    stage("mellin moments", &mut mellin_moments)?;
    stage("mellin functional equations", &mut mellin_functional_equations)?;
    stage("mellin decomposition", &mut mellin_decomposition)?;
    stage("levy-khinchine", &mut levy_khinchine)?;
    stage("asymptotic expansion", &mut asymptotic_order)?;
    stage("selberg quadrature", &mut selberg_quadrature)?;
    stage("density inversion", &mut density_inversion)?;
    if tier == Tier::Full {
        stage("selberg monte carlo", &mut || selberg_monte_carlo(seed))?;
        stage("chaos", &mut || chaos_checks(&ChaosSettings { seed, ..ChaosSettings::default() }))?;
    }
    if let Some(path) = zeros {
        stage("zeros", &mut || zero_checks(path, &ZeroSettings { seed, ..ZeroSettings::default() }))?;
    }
    Ok(rows)
}
