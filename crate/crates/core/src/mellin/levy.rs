use crate::error::{Error, Result};
use crate::quad;
use crate::selberg::ChaosParams;

use super::{decomposition, log_mellin_m};

/// Lévy density of log M written as bracket(x)/x, the derivative of the
/// spectral function in its Lévy–Khinchine form.
pub fn levy_density(x: f64, p: &ChaosParams) -> f64 {
    let t = p.tau();
    let (l1, l2) = (p.lambda1(), p.lambda2());
    let lam = l1 + l2;
    // numerator and denominator divided by e^{x}e^{xτ} to avoid overflow
    let num = 1.0 + (-x * (1.0 + t * l1)).exp() + (-x * (1.0 + t * l2)).exp() + (-x * (2.0 + t * (1.0 + lam))).exp();
    let first = num * (-x * t).exp() / ((-x).exp_m1() * (-x * t).exp_m1());
    let second = (-x * (1.0 + t + t * lam / 2.0)).exp() / ((-x / 2.0).exp_m1() * (-x * t / 2.0).exp_m1());
    (first - second) / x
}

/// The same Lévy density assembled from the Fréchet and inverse Barnes beta
/// factors; a sum of nonnegative terms with no cancellation.
pub fn levy_density_from_factors(x: f64, p: &ChaosParams) -> Result<f64> {
    let f = decomposition(p)?;
    let t = f.frechet_tau;
    let mut acc = (-t * x).exp() / (-(-t * x).exp_m1() * x);
    for b in f.inverse_betas() {
        acc += b.levy_density(x);
    }
    Ok(acc)
}

fn tail_rate(p: &ChaosParams) -> f64 {
    let t = p.tau();
    t.min(1.0 + t + t * p.lambda_sum() / 2.0)
}

/// Spectral function of the general structure result:
/// ℳ(u) = −∫_u^∞ bracket(x) dx/x for u > 0 and 0 for u < 0.
pub fn lk_spectral(u: f64, p: &ChaosParams) -> Result<f64> {
    if !(u > 0.0) {
        if u < 0.0 {
            return Ok(0.0);
        }
        return Err(Error::Domain(format!("spectral function needs u != 0, got {u}")));
    }
    Ok(-tail_integral(u, p)?)
}

fn tail_integral(u: f64, p: &ChaosParams) -> Result<f64> {
    let upper = u + 45.0 / tail_rate(p);
    let mut breaks = vec![u];
    let mut x = 2.0 * u;
    while x < upper {
        breaks.push(x);
        x *= 2.0;
    }
    breaks.push(upper);
    quad::adaptive_breaks(&mut |x| levy_density(x, p), &breaks, 1e-15, 1e-11)
}

/// Spectral function for λ₁ = λ₂ = 0 in its second printed form,
/// ∫_u^∞ [(e^x + 2 + e^{−x(1+τ)})/((e^x−1)(e^{xτ}−1))
/// − e^{−x(1+τ)/2}/((e^{x/2}−1)(e^{xτ/2}−1))] dx/x, with no leading minus.
pub fn lk_spectral_unsigned(u: f64, mu: f64) -> Result<f64> {
    let p = ChaosParams::with_mu(mu)?;
    if !(u > 0.0) {
        if u < 0.0 {
            return Ok(0.0);
        }
        return Err(Error::Domain(format!("spectral function needs u != 0, got {u}")));
    }
    let t = p.tau();
    let bracket = |x: f64| {
        let num = 1.0 + 2.0 * (-x).exp() + (-x * (2.0 + t)).exp();
        let first = num * (-x * t).exp() / ((-x).exp_m1() * (-x * t).exp_m1());
        let second = (-x * (1.0 + t)).exp() / ((-x / 2.0).exp_m1() * (-x * t / 2.0).exp_m1());
        (first - second) / x
    };
    let upper = u + 45.0 / t;
    let mut breaks = vec![u];
    let mut x = 2.0 * u;
    while x < upper {
        breaks.push(x);
        x *= 2.0;
    }
    breaks.push(upper);
    quad::adaptive_breaks(&mut |x| bracket(x), &breaks, 1e-15, 1e-11)
}

/// Both written forms of the λ = 0 spectral function at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralForms {
    pub signed: f64,
    pub unsigned: f64,
}

impl SpectralForms {
    /// Relative difference of the two forms as written.
    pub fn discrepancy(&self) -> f64 {
        (self.signed - self.unsigned).abs() / self.signed.abs().max(self.unsigned.abs()).max(f64::MIN_POSITIVE)
    }

    /// True when the forms agree in magnitude but have opposite signs.
    pub fn opposite_sign(&self) -> bool {
        (self.signed + self.unsigned).abs() <= 1e-9 * self.signed.abs().max(self.unsigned.abs())
            && self.discrepancy() > 1e-9
    }
}

pub fn spectral_forms(u: f64, mu: f64) -> Result<SpectralForms> {
    let p = ChaosParams::with_mu(mu)?;
    Ok(SpectralForms { signed: lk_spectral(u, &p)?, unsigned: lk_spectral_unsigned(u, mu)? })
}

/// Lévy–Khinchine triple of log M with the drift fitted at q = 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevyKhinchineData {
    pub params: ChaosParams,
    pub sigma2: f64,
    pub drift_m: f64,
}

impl LevyKhinchineData {
    pub fn new(p: &ChaosParams) -> Result<Self> {
        let sigma2 = 4.0 * 2f64.ln() / p.tau();
        let mut data = Self { params: *p, sigma2, drift_m: 0.0 };
        let target = log_mellin_m(1.0.into(), p)?.re;
        data.drift_m = target - data.log_mellin(1.0)?;
        Ok(data)
    }

    pub fn spectral_density(&self, u: f64) -> f64 {
        if u > 0.0 {
            levy_density(u, &self.params)
        } else {
            0.0
        }
    }

    /// ∫₀^∞ (e^{qu} − 1 − qu/(1+u²)) ν(u) du.
    pub fn jump_integral(&self, q: f64) -> Result<f64> {
        let p = &self.params;
        let t = p.tau();
        if !(q < t) {
            return Err(Error::Domain(format!("Lévy-Khinchine exponent needs q < tau = {t}, got {q}")));
        }
        let upper = 45.0 / (t - q).min(tail_rate(p));
        let factors = decomposition(p)?;
        let mut breaks = vec![0.0];
        let mut x = 0.125f64.min(upper / 8.0);
        while x < upper {
            breaks.push(x);
            x *= 2.0;
        }
        breaks.push(upper);
        let mut f = |u: f64| {
            let qu = q * u;
            let jump = if qu.abs() < 1e-3 {
                // e^{qu} − 1 − qu by its series
                qu * qu * (0.5 + qu * (1.0 / 6.0 + qu * (1.0 / 24.0 + qu / 120.0)))
            } else {
                qu.exp_m1() - qu
            } + qu * u * u / (1.0 + u * u);
            let mut nu = (-t * u).exp() / (-(-t * u).exp_m1() * u);
            for b in factors.inverse_betas() {
                nu += b.levy_density(u);
            }
            jump * nu
        };
        quad::adaptive_breaks(&mut f, &breaks, 1e-13, 1e-11)
    }

    /// q·𝔪 + q²σ²/2 + jump integral.
    pub fn log_mellin(&self, q: f64) -> Result<f64> {
        Ok(q * self.drift_m + 0.5 * q * q * self.sigma2 + self.jump_integral(q)?)
    }
}
