use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad;
use crate::specfun::{log_double_gamma, DoubleGammaContext};

/// Parameters (τ; b₀, b₁, b₂) of a Barnes beta variable of type (2,2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BarnesBetaParams {
    tau: f64,
    b0: f64,
    b1: f64,
    b2: f64,
}

impl BarnesBetaParams {
    pub fn new(tau: f64, b0: f64, b1: f64, b2: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::constraint("tau", format!("must be positive, got {tau}")));
        }
        if !(b0 > 0.0) || !b0.is_finite() {
            return Err(Error::constraint("b0", format!("must be positive, got {b0}")));
        }
        if !(b1 >= 0.0) || !b1.is_finite() {
            return Err(Error::constraint("b1", format!("must be nonnegative, got {b1}")));
        }
        if !(b2 >= 0.0) || !b2.is_finite() {
            return Err(Error::constraint("b2", format!("must be nonnegative, got {b2}")));
        }
        Ok(Self { tau, b0, b1, b2 })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn b1(&self) -> f64 {
        self.b1
    }

    pub fn b2(&self) -> f64 {
        self.b2
    }

    /// True when b₁ or b₂ vanishes and the variable is the constant 1.
    pub fn is_degenerate(&self) -> bool {
        self.b1 == 0.0 || self.b2 == 0.0
    }

    /// Exponent α of the small-v law P(−log β ≤ v) ∝ v^α.
    pub fn edge_exponent(&self) -> f64 {
        self.b1 * self.b2 / self.tau
    }

    fn scale(&self) -> f64 {
        self.b0 + self.b1 + self.b2 + self.tau + 1.0
    }

    /// Lévy density of −log β: e^{−b₀x}(1−e^{−b₁x})(1−e^{−b₂x}) / ((1−e^{−x})(1−e^{−τx})x).
    pub fn levy_density(&self, x: f64) -> f64 {
        (-self.b0 * x).exp() * (-self.b1 * x).exp_m1() * (-self.b2 * x).exp_m1()
            / ((-x).exp_m1() * (-self.tau * x).exp_m1() * x)
    }
}

/// η(q | τ, b) = E[β^q].
pub fn barnes_beta_mellin(q: Complex64, b: &BarnesBetaParams) -> Result<Complex64> {
    Ok(barnes_beta_log_mellin(q, b)?.exp())
}

pub fn barnes_beta_log_mellin(q: Complex64, b: &BarnesBetaParams) -> Result<Complex64> {
    let ctx = DoubleGammaContext::new(b.tau)?;
    log_mellin_ctx(q, b, &ctx)
}

/// |q| beyond which the large-q expansion replaces the Γ₂ ratios.
fn large_q(b: &BarnesBetaParams) -> f64 {
    5.0 * b.scale()
}

pub(crate) fn log_mellin_ctx(q: Complex64, b: &BarnesBetaParams, ctx: &DoubleGammaContext) -> Result<Complex64> {
    BarnesEvaluator::new(b, ctx)?.log_mellin(q)
}

/// log η with the normalization and large-q coefficients computed once.
#[derive(Clone, Debug)]
pub(crate) struct BarnesEvaluator {
    b: BarnesBetaParams,
    ctx: DoubleGammaContext,
    norm: Complex64,
    edge: Vec<f64>,
}

impl BarnesEvaluator {
    pub(crate) fn new(b: &BarnesBetaParams, ctx: &DoubleGammaContext) -> Result<Self> {
        let ctx = if ctx.tau() == b.tau { ctx.clone() } else { DoubleGammaContext::new(b.tau)? };
        if b.is_degenerate() {
            return Ok(Self { b: *b, ctx, norm: Complex64::default(), edge: Vec::new() });
        }
        let g = |w: f64| log_double_gamma(Complex64::new(w, 0.0), &ctx);
        let (b0, b1, b2) = (b.b0, b.b1, b.b2);
        let norm = -g(b0)? + g(b0 + b1)? + g(b0 + b2)? - g(b0 + b1 + b2)?;
        let c = ctx.expansion_coefficients();
        let edge = edge_coefficients(b, c, c.len() - 1);
        Ok(Self { b: *b, ctx, norm, edge })
    }

    pub(crate) fn log_mellin(&self, q: Complex64) -> Result<Complex64> {
        let b = &self.b;
        if !(q.re > -b.b0) || !q.im.is_finite() {
            return Err(Error::Domain(format!(
                "Barnes beta transform needs Re(q) > -b0 = {}, got q = {q}",
                -b.b0
            )));
        }
        if b.is_degenerate() {
            return Ok(Complex64::default());
        }
        if q.norm() > large_q(b) {
            return Ok(self.norm + self.large_q_series(q));
        }
        self.gamma_ratios(q)
    }

    fn gamma_ratios(&self, q: Complex64) -> Result<Complex64> {
        let g = |w: f64| log_double_gamma(q + w, &self.ctx);
        let (b0, b1, b2) = (self.b.b0, self.b.b1, self.b.b2);
        Ok(g(b0)? - g(b0 + b1)? - g(b0 + b2)? + g(b0 + b1 + b2)? + self.norm)
    }

    /// q-dependent part of log η for large |q|: −E₂ log q + Σ_{k≥3} E_k (k−3)! q^{2−k},
    /// where E_k are the Taylor coefficients of x·(Lévy density) around 0.
    ///
    /// The shifted Γ₂ expansions have no constant term, so the constant of
    /// log η is exactly the normalization.
    fn large_q_series(&self, q: Complex64) -> Complex64 {
        let e = &self.edge;
        let mut acc = -e[2] * q.ln();
        let qinv = q.inv();
        let mut pw = qinv;
        let mut fact = 1.0;
        let mut prev = [f64::INFINITY; 2];
        for (k, &ek) in e.iter().enumerate().skip(3) {
            let term = ek * fact * pw;
            let size = term.norm();
            if size > prev[k % 2] && size > 0.0 {
                break;
            }
            acc += term;
            if size != 0.0 {
                prev[k % 2] = size;
            }
            pw *= qinv;
            fact *= (k - 2) as f64;
        }
        acc
    }
}

/// E_k = Σ_{i=2}^{k} c_{k−i} (−1)^i Δ_i / i!, with
/// Δ_i / i! = Σ_{a,b≥1} b₁^a b₂^b b₀^{i−a−b} / (a! b! (i−a−b)!).
fn edge_coefficients(b: &BarnesBetaParams, c: &[f64], order: usize) -> Vec<f64> {
    let powers = |x: f64| {
        let mut v = vec![1.0f64; order + 1];
        for j in 1..=order {
            v[j] = v[j - 1] * x / j as f64;
        }
        v
    };
    let (p0, p1, p2) = (powers(b.b0), powers(b.b1), powers(b.b2));
    let delta: Vec<f64> = (0..=order)
        .map(|i| {
            let mut s = 0.0;
            for a in 1..i {
                for bb in 1..=(i - a) {
                    s += p1[a] * p2[bb] * p0[i - a - bb];
                }
            }
            if i % 2 == 0 {
                s
            } else {
                -s
            }
        })
        .collect();
    (0..=order)
        .map(|k| (2..=k).map(|i| c[k - i] * delta[i]).sum())
        .collect()
}

/// log η(q) from the Lévy–Khinchine integral ∫₀^∞ (e^{−xq} − 1) ν(x) dx.
pub fn barnes_beta_lk_log(q: Complex64, b: &BarnesBetaParams) -> Result<Complex64> {
    if !(q.re > -b.b0) {
        return Err(Error::Domain(format!("Barnes beta transform needs Re(q) > -b0 = {}, got q = {q}", -b.b0)));
    }
    if b.is_degenerate() || q == Complex64::default() {
        return Ok(Complex64::default());
    }
    let rate = b.b0 + q.re.min(0.0);
    let upper = 45.0 / rate;
    let mut breaks = vec![0.0];
    let mut x = 0.25f64.min(upper / 4.0);
    while x < upper {
        breaks.push(x);
        x *= 2.0;
    }
    breaks.push(upper);
    let mut f = |x: f64| expm1_complex(-q * x) * b.levy_density(x);
    quad::adaptive_breaks(&mut f, &breaks, 1e-14, 1e-12)
}

pub(crate) fn expm1_complex(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    Complex64::new(z.re.exp_m1() * c - 2.0 * half * half, z.re.exp() * s)
}
