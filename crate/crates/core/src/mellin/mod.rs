//! The Selberg integral distribution through its Mellin transform 𝔐(q|μ,λ₁,λ₂).

mod barnes;
mod inversion;
mod levy;
mod sample;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::selberg::ChaosParams;
use crate::specfun::{
    bernoulli_poly, digamma, hurwitz_zeta, ln_gamma, log_double_gamma, log_gamma, DoubleGammaContext,
};
use crate::sum::Compensated;

pub use barnes::{barnes_beta_lk_log, barnes_beta_log_mellin, barnes_beta_mellin, BarnesBetaParams};
pub use inversion::{density_by_inversion, density_moments, default_contour, DensityMoments};
pub use levy::{
    levy_density, levy_density_from_factors, lk_spectral, lk_spectral_unsigned, spectral_forms, LevyKhinchineData,
    SpectralForms,
};
pub use sample::{BarnesBetaTable, SelbergSampler};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn lg(z: Complex64) -> Result<Complex64> {
    log_gamma(z)
}

/// Which formula evaluates 𝔐.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    DoubleGamma,
    GammaProduct,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MellinQuery {
    pub q: Complex64,
    pub params: ChaosParams,
    pub route: Route,
    /// Number of explicit factors M in the infinite product.
    pub product_terms: usize,
    /// Number of 1/m^k orders in the product tail correction.
    pub acceleration_order: usize,
}

impl MellinQuery {
    pub fn new(q: Complex64, params: ChaosParams) -> Self {
        Self { q, params, route: Route::DoubleGamma, product_terms: 256, acceleration_order: 12 }
    }

    pub fn route(mut self, route: Route) -> Self {
        self.route = route;
        self
    }
}

/// Value of 𝔐 with the diagnostics of the route that produced it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MellinEvaluation {
    pub value: Complex64,
    pub log_value: Complex64,
    pub route: Route,
    pub product_terms: Option<usize>,
    /// Relative change of the product when M is doubled.
    pub tail_change: Option<f64>,
}

pub fn evaluate(query: &MellinQuery) -> Result<MellinEvaluation> {
    match query.route {
        Route::DoubleGamma => {
            let log_value = log_mellin_m(query.q, &query.params)?;
            Ok(MellinEvaluation {
                value: log_value.exp(),
                log_value,
                route: Route::DoubleGamma,
                product_terms: None,
                tail_change: None,
            })
        }
        Route::GammaProduct => {
            let (log_value, change) =
                log_mellin_m_product(query.q, &query.params, query.product_terms, query.acceleration_order)?;
            Ok(MellinEvaluation {
                value: log_value.exp(),
                log_value,
                route: Route::GammaProduct,
                product_terms: Some(query.product_terms),
                tail_change: Some(change),
            })
        }
    }
}

fn check_domain(q: Complex64, tau: f64) -> Result<()> {
    if !(q.re < tau) || !q.im.is_finite() {
        return Err(Error::Domain(format!("Mellin transform needs Re(q) < tau = {tau}, got q = {q}")));
    }
    Ok(())
}

/// 𝔐(q) from the four Γ₂ ratios.
pub fn mellin_m(q: Complex64, p: &ChaosParams) -> Result<Complex64> {
    Ok(log_mellin_m(q, p)?.exp())
}

pub fn log_mellin_m(q: Complex64, p: &ChaosParams) -> Result<Complex64> {
    let ctx = DoubleGammaContext::new(p.tau())?;
    log_mellin_m_ctx(q, p, &ctx)
}

pub(crate) fn log_mellin_m_ctx(q: Complex64, p: &ChaosParams, ctx: &DoubleGammaContext) -> Result<Complex64> {
    let t = p.tau();
    check_domain(q, t)?;
    let (l1, l2) = (p.lambda1(), p.lambda2());
    let lam = l1 + l2;
    let g = |w: Complex64| log_double_gamma(w, ctx);
    let one = c(1.0);
    let mut acc = Compensated::new();
    acc.add(q / t * t.ln() + q * LN_2PI - q * ln_gamma(1.0 - 1.0 / t)?);
    acc.add(g(one - q + t * (1.0 + l1))? - g(c(1.0 + t * (1.0 + l1)))?);
    acc.add(g(one - q + t * (1.0 + l2))? - g(c(1.0 + t * (1.0 + l2)))?);
    acc.add(g(c(t) - q)? - g(c(t))?);
    acc.add(g(c(2.0 + t * (2.0 + lam)) - q)? - g(c(2.0 + t * (2.0 + lam)) - 2.0 * q)?);
    Ok(acc.value())
}

/// 𝔐(q) from the infinite product of gamma ratios.
pub fn mellin_m_product(q: Complex64, p: &ChaosParams, terms: usize, acceleration: usize) -> Result<Complex64> {
    Ok(log_mellin_m_product(q, p, terms, acceleration)?.0.exp())
}

/// Relative change allowed when the product truncation doubles.
pub const PRODUCT_TOLERANCE: f64 = 1e-8;

/// log 𝔐 by the product route and the relative change from doubling M.
pub fn log_mellin_m_product(
    q: Complex64,
    p: &ChaosParams,
    terms: usize,
    acceleration: usize,
) -> Result<(Complex64, f64)> {
    if terms < 8 {
        return Err(Error::constraint("product_terms", format!("must be at least 8, got {terms}")));
    }
    check_domain(q, p.tau())?;
    let a = product_with_tail(q, p, terms, acceleration)?;
    let b = product_with_tail(q, p, 2 * terms, acceleration)?;
    let change = ((b - a).exp() - 1.0).norm();
    if !(change < PRODUCT_TOLERANCE) {
        return Err(Error::Quadrature(format!(
            "product tail not converged at M = {terms}: doubling changes the value by {change:.3e}"
        )));
    }
    Ok((b, change))
}

/// Argument pairs (a, b) of log Γ(mτ + a) − log Γ(mτ + b) in the m-th factor.
fn product_pairs(q: Complex64, p: &ChaosParams) -> [(Complex64, Complex64); 4] {
    let t = p.tau();
    let (c1, c2) = (t * p.lambda1(), t * p.lambda2());
    let one = c(1.0);
    [
        (one - q, one),
        (one - q + c1, c(1.0 + c1)),
        (one - q + c2, c(1.0 + c2)),
        (c(2.0 + c1 + c2) - q, c(2.0 + c1 + c2) - 2.0 * q),
    ]
}

fn product_with_tail(q: Complex64, p: &ChaosParams, terms: usize, acceleration: usize) -> Result<Complex64> {
    let t = p.tau();
    let lam = p.lambda_sum();
    let mut acc = Compensated::new();
    acc.add(q * t.ln() + lg(c(1.0) - q / t)? + lg(c(2.0 + t * (1.0 + lam)) - 2.0 * q)?);
    acc.add(-q * ln_gamma(1.0 - 1.0 / t)? - lg(c(2.0 + t * (1.0 + lam)) - q)?);
    let pairs = product_pairs(q, p);
    // the (a − b) log(mτ) parts sum to −2q log(mτ) and cancel the (mτ)^{2q}
    for m in 1..=terms {
        let x = m as f64 * t;
        let mut term = 2.0 * q * x.ln();
        for (a, b) in pairs {
            term += lg(a + x)? - lg(b + x)?;
        }
        acc.add(term);
    }
    // log Γ(x+a) − log Γ(x+b) − (a−b) log x ~ Σ_k (−1)^{k+1}[B_{k+1}(a) − B_{k+1}(b)]/(k(k+1)x^k);
    // the k = 1 coefficients cancel across the four pairs
    for k in 2..=acceleration.min(crate::specfun::BERNOULLI_MAX - 1) {
        let mut d = Complex64::default();
        for (a, b) in pairs {
            d += bernoulli_poly(k + 1, a)? - bernoulli_poly(k + 1, b)?;
        }
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let zeta = hurwitz_zeta(k as f64, (terms + 1) as f64)?;
        acc.add(d * (sign / (k * (k + 1)) as f64) * t.powi(-(k as i32)) * zeta);
    }
    Ok(acc.value())
}

/// log of the gamma factor in 𝔐(q) = 𝔐(q−1)·F₁(q).
pub fn log_fe_unit_factor(q: Complex64, p: &ChaosParams) -> Result<Complex64> {
    let t = p.tau();
    let (l1, l2) = (p.lambda1(), p.lambda2());
    let lam = l1 + l2;
    let one = c(1.0);
    Ok(lg(one - q / t)? + lg(c(2.0 + lam) - (q - 2.0) / t)? - ln_gamma(1.0 - 1.0 / t)?
        + lg(c(1.0 + l1) - (q - 1.0) / t)?
        + lg(c(1.0 + l2) - (q - 1.0) / t)?
        - lg(c(2.0 + lam) - (2.0 * q - 2.0) / t)?
        - lg(c(2.0 + lam) - (2.0 * q - 3.0) / t)?)
}

/// log of the gamma factor in 𝔐(q) = 𝔐(q−τ)·F_τ(q).
pub fn log_fe_tau_factor(q: Complex64, p: &ChaosParams) -> Result<Complex64> {
    let t = p.tau();
    let (l1, l2) = (p.lambda1(), p.lambda2());
    let lam = l1 + l2;
    Ok(c(t.ln() + (t - 1.0) * LN_2PI - t * ln_gamma(1.0 - 1.0 / t)?) + lg(c(t) - q)?
        + lg(c((1.0 + l1) * t) - (q - 1.0))?
        + lg(c((1.0 + l2) * t) - (q - 1.0))?
        - lg(c((2.0 + lam) * t) - (2.0 * q - 2.0))?
        + lg(c((2.0 + lam) * t) - (q - 2.0))?
        - lg(c((3.0 + lam) * t) - (2.0 * q - 2.0))?)
}

/// Relative residuals of the shift-by-1 and shift-by-τ functional equations.
pub fn functional_equation_residuals(q: Complex64, p: &ChaosParams) -> Result<(f64, f64)> {
    let ctx = DoubleGammaContext::new(p.tau())?;
    let m = log_mellin_m_ctx(q, p, &ctx)?;
    let m1 = log_mellin_m_ctx(q - 1.0, p, &ctx)?;
    let mt = log_mellin_m_ctx(q - p.tau(), p, &ctx)?;
    let r1 = ((m1 + log_fe_unit_factor(q, p)? - m).exp() - 1.0).norm();
    let r2 = ((mt + log_fe_tau_factor(q, p)? - m).exp() - 1.0).norm();
    Ok((r1, r2))
}

/// Highest order r accepted by the intermittency expansion.
pub const MAX_ASYMPTOTIC_ORDER: usize = 12;

/// Coefficient b_r(q) of (μ/2)^{r+1} in the small-μ expansion of log 𝔐.
///
/// At r = 0 the divergent ζ(1, a) is replaced by −ψ(a) + `zeta1_shift`;
/// the result does not depend on the shift.
pub fn intermittency_coefficient(r: usize, q: Complex64, p: &ChaosParams, zeta1_shift: f64) -> Result<Complex64> {
    if r > MAX_ASYMPTOTIC_ORDER {
        return Err(Error::OrderTooLarge { n: r, max: MAX_ASYMPTOTIC_ORDER });
    }
    let (l1, l2) = (p.lambda1(), p.lambda2());
    let s = (r + 1) as f64;
    let zeta = |a: f64| -> Result<f64> {
        if r == 0 {
            Ok(-digamma(a)? + zeta1_shift)
        } else {
            hurwitz_zeta(s, a)
        }
    };
    let n = r + 2;
    let bn = bernoulli_poly(n, 0.0f64)?;
    let one = c(1.0);
    let bq = |x: Complex64| -> Result<Complex64> { bernoulli_poly(n, x) };
    let z1 = zeta(1.0)?;
    let mut bracket = -z1 * q;
    bracket += (zeta(1.0 + l1)? + zeta(1.0 + l2)?) * (bq(q)? - bn) / n as f64;
    bracket += z1 * (bq(q + one)? - bn) / n as f64;
    bracket -= zeta(2.0 + l1 + l2)? * (bq(2.0 * q - one)? - bq(q - one)?) / n as f64;
    Ok(bracket / s)
}

/// Truncated small-μ expansion of log 𝔐 through order R.
pub fn asymptotic_log_m(q: Complex64, p: &ChaosParams, order: usize) -> Result<Complex64> {
    if order > MAX_ASYMPTOTIC_ORDER {
        return Err(Error::OrderTooLarge { n: order, max: MAX_ASYMPTOTIC_ORDER });
    }
    let (l1, l2) = (p.lambda1(), p.lambda2());
    let lx = ln_gamma(1.0 + l1)? + ln_gamma(1.0 + l2)? - ln_gamma(2.0 + l1 + l2)?;
    let h = p.mu() / 2.0;
    let mut acc = q * lx;
    for r in 0..=order {
        acc += h.powi(r as i32 + 1) * intermittency_coefficient(r, q, p, 0.0)?;
    }
    Ok(acc)
}

/// E[Y^q] = Γ(1 − q/τ) for the Fréchet factor.
pub fn frechet_mellin(q: Complex64, tau: f64) -> Result<Complex64> {
    check_domain(q, tau)?;
    Ok(lg(c(1.0) - q / tau)?.exp())
}

/// Independent factors of M = constant · L · X₁ · X₂ · X₃ · Y.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecompositionFactors {
    pub constant: f64,
    pub lognormal_variance: f64,
    pub frechet_tau: f64,
    /// None when λ₁ = λ₂, where X₁ = 1.
    pub x1: Option<BarnesBetaParams>,
    pub x2: BarnesBetaParams,
    pub x3: BarnesBetaParams,
}

impl DecompositionFactors {
    pub fn inverse_betas(&self) -> impl Iterator<Item = &BarnesBetaParams> {
        self.x1.iter().chain([&self.x2, &self.x3])
    }
}

pub fn decomposition(p: &ChaosParams) -> Result<DecompositionFactors> {
    let t = p.tau();
    let lo = p.lambda1().min(p.lambda2());
    let hi = p.lambda1().max(p.lambda2());
    let lam = p.lambda_sum();
    let constant =
        2.0 * std::f64::consts::PI * 2f64.powf(-(3.0 * (1.0 + t) + 2.0 * t * lam) / t) / crate::specfun::gamma(1.0 - 1.0 / t)?;
    let x1 = if hi > lo {
        let d = t * (hi - lo) / 2.0;
        Some(BarnesBetaParams::new(t, 1.0 + t + t * lo, d, d)?)
    } else {
        None
    };
    let x2 = BarnesBetaParams::new(t, 1.0 + t + t * lam / 2.0, 0.5, t / 2.0)?;
    let b = (1.0 + t + t * lam) / 2.0;
    let x3 = BarnesBetaParams::new(t, 1.0 + t, b, b)?;
    Ok(DecompositionFactors { constant, lognormal_variance: 4.0 * 2f64.ln() / t, frechet_tau: t, x1, x2, x3 })
}

/// 𝔐 rebuilt from the independent factors; E[X_i^q] = η(−q | x_i).
pub fn decomposition_mellin(q: Complex64, p: &ChaosParams) -> Result<Complex64> {
    Ok(log_decomposition_mellin(q, p)?.exp())
}

pub fn log_decomposition_mellin(q: Complex64, p: &ChaosParams) -> Result<Complex64> {
    check_domain(q, p.tau())?;
    let f = decomposition(p)?;
    let ctx = DoubleGammaContext::new(p.tau())?;
    let mut acc = q * f.constant.ln() + q * q * f.lognormal_variance / 2.0;
    for b in f.inverse_betas() {
        acc += barnes::log_mellin_ctx(-q, b, &ctx)?;
    }
    acc += lg(c(1.0) - q / f.frechet_tau)?;
    Ok(acc)
}
