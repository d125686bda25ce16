//! Scalar special functions: log-gamma, digamma, Hurwitz zeta, Bernoulli
//! polynomials and the Barnes double gamma function.

use std::f64::consts::PI;
use std::ops::{Add, Mul};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::sum::Compensated;

pub const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Largest Bernoulli index held in the coefficient tables.
pub const BERNOULLI_MAX: usize = 60;

const POLE_TOL: f64 = 1e-12;
const STIRLING_SHIFT: f64 = 15.0;

// B_{2k} / (2k (2k-1)) for k = 1..8
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

fn near_nonpositive_integer(re: f64, im: f64) -> bool {
    if re > 0.5 || im.abs() >= POLE_TOL {
        return false;
    }
    let k = (-re).round();
    k >= 0.0 && (re + k).hypot(im) < POLE_TOL
}

fn stirling_tail(z: Complex64) -> Complex64 {
    let zinv = z.inv();
    let z2 = zinv * zinv;
    let mut term = zinv;
    let mut acc = Complex64::zero();
    for c in STIRLING {
        acc += term * c;
        term *= z2;
    }
    acc
}

/// Principal branch of log Γ(z).
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if near_nonpositive_integer(z.re, z.im) {
        return Err(Error::Pole { func: "log_gamma", at: format!("{z}") });
    }
    if z.im == 0.0 && z.re > 0.0 {
        return Ok(Complex64::new(ln_gamma(z.re)?, 0.0));
    }
    let mut w = z;
    let mut shift = Compensated::new();
    while w.re < STIRLING_SHIFT {
        shift.add(w.ln());
        w += 1.0;
    }
    let main = (w - 0.5) * w.ln() - w + HALF_LN_2PI + stirling_tail(w);
    Ok(main - shift.value())
}

/// log Γ(x) for real x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return ln_gamma_signed(x).map(|(v, _)| v);
    }
    if x < 0.5 {
        return Ok(ln_gamma_near_one(x) - x.ln());
    }
    if x < 1.5 {
        return Ok(ln_gamma_near_one(x - 1.0));
    }
    if x < 2.5 {
        return Ok(ln_gamma_near_one(x - 2.0) + (x - 1.0).ln());
    }
    let mut w = x;
    let mut shift = Compensated::new();
    while w < STIRLING_SHIFT {
        shift.add(w.ln());
        w += 1.0;
    }
    let zinv = 1.0 / w;
    let z2 = zinv * zinv;
    let mut term = zinv;
    let mut tail = 0.0;
    for c in STIRLING {
        tail += term * c;
        term *= z2;
    }
    Ok((w - 0.5) * w.ln() - w + HALF_LN_2PI + tail - shift.value())
}

/// log Γ(1 + t) for |t| <= 1/2 from its Taylor series, avoiding the
/// cancellation Stirling suffers near the zeros at 1 and 2.
fn ln_gamma_near_one(t: f64) -> f64 {
    static ZETA: OnceLock<Vec<f64>> = OnceLock::new();
    let zeta = ZETA.get_or_init(|| {
        (0..64)
            .map(|k| if k < 2 { 0.0 } else { hurwitz_zeta(k as f64, 1.0).expect("zeta(k)") })
            .collect()
    });
    let mut acc = 0.0;
    for k in (2..64).rev() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc = acc * t + sign * zeta[k] / k as f64;
    }
    t * (acc * t - EULER_GAMMA)
}

/// log|Γ(x)| together with the sign of Γ(x), for real x off the poles.
pub fn ln_gamma_signed(x: f64) -> Result<(f64, f64)> {
    if near_nonpositive_integer(x, 0.0) || x.is_nan() {
        return Err(Error::Pole { func: "gamma", at: format!("{x}") });
    }
    if x > 0.0 {
        return Ok((ln_gamma(x)?, 1.0));
    }
    // reflection: Γ(x) Γ(1-x) = π / sin(πx)
    let s = (PI * x).sin();
    let lg = ln_gamma(1.0 - x)?;
    Ok((PI.ln() - s.abs().ln() - lg, s.signum()))
}

/// Γ(x) for real x off the poles.
pub fn gamma(x: f64) -> Result<f64> {
    let (l, s) = ln_gamma_signed(x)?;
    Ok(s * l.exp())
}

/// Digamma ψ(x) for real x off the poles.
pub fn digamma(x: f64) -> Result<f64> {
    if near_nonpositive_integer(x, 0.0) || x.is_nan() {
        return Err(Error::Pole { func: "digamma", at: format!("{x}") });
    }
    if x <= 0.0 {
        return Ok(digamma(1.0 - x)? - PI / (PI * x).tan());
    }
    let mut w = x;
    let mut shift = Compensated::new();
    while w < 12.0 {
        shift.add(1.0 / w);
        w += 1.0;
    }
    let z2 = 1.0 / (w * w);
    // B_{2k} / (2k)
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 120.0,
        1.0 / 252.0,
        -1.0 / 240.0,
        1.0 / 132.0,
        -691.0 / 32760.0,
        1.0 / 12.0,
    ];
    let mut term = z2;
    let mut tail = 0.0;
    for c in C {
        tail += c * term;
        term *= z2;
    }
    Ok(w.ln() - 0.5 / w - tail - shift.value())
}

/// Hurwitz zeta ζ(s, a) for real s ≥ 1 and a > 0.
///
/// At s = 1 the regularized finite part −ψ(a) is returned.
pub fn hurwitz_zeta(s: f64, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("hurwitz_zeta requires a > 0, got {a}")));
    }
    if !(s >= 1.0) {
        return Err(Error::Domain(format!("hurwitz_zeta requires s >= 1, got {s}")));
    }
    if s == 1.0 {
        return Ok(-digamma(a)?);
    }
    let n = (20.0 + s - a).max(0.0).ceil() as usize;
    let mut acc = Compensated::new();
    let big = a + n as f64;
    // Euler-Maclaurin tail, smallest terms first
    let b = bernoulli_numbers_f64();
    let mut tail = Vec::with_capacity(16);
    tail.push(big.powf(1.0 - s) / (s - 1.0));
    tail.push(0.5 * big.powf(-s));
    let mut rising = s; // s (s+1) ... (s+2j-2)
    let mut fact = 2.0; // (2j)!
    let mut pw = big.powf(-s - 1.0);
    for j in 1..=14 {
        let t = b[2 * j] / fact * rising * pw;
        tail.push(t);
        if t.abs() < 1e-18 * tail[0].abs() {
            break;
        }
        rising *= (s + 2.0 * j as f64 - 1.0) * (s + 2.0 * j as f64);
        fact *= (2 * j + 1) as f64 * (2 * j + 2) as f64;
        pw /= big * big;
    }
    for t in tail.iter().rev() {
        acc.add(*t);
    }
    for k in (0..n).rev() {
        acc.add((a + k as f64).powf(-s));
    }
    Ok(acc.value())
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// Exact Bernoulli numbers B_0..=B_60 with B_1 = −1/2.
pub fn bernoulli_numbers() -> &'static [BigRational] {
    static TABLE: OnceLock<Vec<BigRational>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut b: Vec<BigRational> = Vec::with_capacity(BERNOULLI_MAX + 1);
        b.push(BigRational::one());
        for m in 1..=BERNOULLI_MAX {
            let mut acc = BigRational::zero();
            for (k, bk) in b.iter().enumerate() {
                acc += BigRational::from_integer(binomial(m + 1, k)) * bk;
            }
            b.push(-acc / BigRational::from_integer(BigInt::from(m + 1)));
        }
        b
    })
}

pub fn bernoulli_numbers_f64() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| bernoulli_numbers().iter().map(rational_to_f64).collect())
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact coefficients of B_n(x) in increasing powers of x.
pub fn bernoulli_poly_coeffs(n: usize) -> Result<&'static [BigRational]> {
    static TABLE: OnceLock<Vec<Vec<BigRational>>> = OnceLock::new();
    if n > BERNOULLI_MAX {
        return Err(Error::OrderTooLarge { n, max: BERNOULLI_MAX });
    }
    let table = TABLE.get_or_init(|| {
        let b = bernoulli_numbers();
        (0..=BERNOULLI_MAX)
            .map(|n| {
                (0..=n)
                    .map(|k| BigRational::from_integer(binomial(n, k)) * &b[n - k])
                    .collect()
            })
            .collect()
    });
    Ok(&table[n])
}

fn bernoulli_poly_coeffs_f64(n: usize) -> Result<&'static [f64]> {
    static TABLE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    if n > BERNOULLI_MAX {
        return Err(Error::OrderTooLarge { n, max: BERNOULLI_MAX });
    }
    let table = TABLE.get_or_init(|| {
        (0..=BERNOULLI_MAX)
            .map(|n| {
                bernoulli_poly_coeffs(n)
                    .expect("index within table")
                    .iter()
                    .map(rational_to_f64)
                    .collect()
            })
            .collect()
    });
    Ok(&table[n])
}

/// Bernoulli polynomial B_n(x) for real or complex x, n ≤ 60.
pub fn bernoulli_poly<T>(n: usize, x: T) -> Result<T>
where
    T: Copy + From<f64> + Add<Output = T> + Mul<Output = T>,
{
    let c = bernoulli_poly_coeffs_f64(n)?;
    let mut acc = T::from(c[n]);
    for k in (0..n).rev() {
        acc = acc * x + T::from(c[k]);
    }
    Ok(acc)
}

/// Evaluate B_n at a rational point exactly.
pub fn bernoulli_poly_exact(n: usize, x: &BigRational) -> Result<BigRational> {
    let c = bernoulli_poly_coeffs(n)?;
    let mut acc = c[n].clone();
    for k in (0..n).rev() {
        acc = acc * x + &c[k];
    }
    Ok(acc)
}

/// Evaluation settings for log Γ₂(w|τ).
#[derive(Clone, Debug)]
pub struct DoubleGammaContext {
    tau: f64,
    shift_threshold: f64,
    series_order: usize,
    coeffs: Vec<f64>,
}

impl DoubleGammaContext {
    pub fn new(tau: f64) -> Result<Self> {
        let thr = 8.0 + 6.0 * tau.max(1.0);
        Self::with_settings(tau, thr, 40)
    }

    pub fn with_settings(tau: f64, shift_threshold: f64, series_order: usize) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::constraint("tau", format!("must be positive, got {tau}")));
        }
        if !(shift_threshold >= 1.0 + tau) {
            return Err(Error::constraint(
                "shift_threshold",
                format!("must be at least 1 + tau = {}, got {shift_threshold}", 1.0 + tau),
            ));
        }
        if !(4..=BERNOULLI_MAX).contains(&series_order) {
            return Err(Error::constraint(
                "series_order",
                format!("must lie in 4..={BERNOULLI_MAX}, got {series_order}"),
            ));
        }
        // 1/((1-e^{-t})(1-e^{-τt})) = Σ c_k t^{k-2}
        let b = bernoulli_numbers_f64();
        let mut fact = vec![1.0f64; series_order + 1];
        for i in 1..=series_order {
            fact[i] = fact[i - 1] * i as f64;
        }
        let coeffs = (0..=series_order)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let s: f64 = (0..=k)
                    .map(|j| b[k - j] * b[j] * tau.powi(j as i32) / (fact[k - j] * fact[j]))
                    .sum();
                sign * s / tau
            })
            .collect();
        Ok(Self { tau, shift_threshold, series_order, coeffs })
    }

    /// Coefficients c_k of 1/((1−e^{−t})(1−e^{−τt})) = Σ c_k t^{k−2}.
    pub fn expansion_coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn shift_threshold(&self) -> f64 {
        self.shift_threshold
    }

    pub fn series_order(&self) -> usize {
        self.series_order
    }

    fn near_pole(&self, w: Complex64) -> bool {
        if w.re > POLE_TOL || w.im.abs() >= POLE_TOL {
            return false;
        }
        let kmax = (-w.re / self.tau).floor() as i64 + 1;
        (0..=kmax).any(|k2| {
            let r = -w.re - k2 as f64 * self.tau;
            let k1 = r.round();
            k1 >= 0.0 && (r - k1).hypot(w.im) < POLE_TOL
        })
    }

    fn asymptotic(&self, w: Complex64) -> Complex64 {
        let c = &self.coeffs;
        let lw = w.ln();
        let mut acc = c[0] * w * w * (0.75 - 0.5 * lw) + c[1] * w * (lw - 1.0) - c[2] * lw;
        let winv = w.inv();
        let mut pw = winv; // w^{2-k} at k = 3
        let mut fact = 1.0; // (k-3)!
        // odd and even orders decay at different rates, so compare with k - 2
        let mut prev = [f64::INFINITY; 2];
        for k in 3..=self.series_order {
            let term = c[k] * fact * pw;
            let size = term.norm();
            if size > prev[k % 2] && size > 0.0 {
                break;
            }
            acc += term;
            if size != 0.0 {
                prev[k % 2] = size;
            }
            pw *= winv;
            fact *= (k - 2) as f64;
        }
        acc
    }
}

/// log Γ₂(w|τ) in the ζ₂-derivative normalization.
pub fn log_double_gamma(w: Complex64, ctx: &DoubleGammaContext) -> Result<Complex64> {
    if ctx.near_pole(w) {
        return Err(Error::Pole { func: "log_double_gamma", at: format!("{w}") });
    }
    let tau = ctx.tau;
    let ln_tau = tau.ln();
    let mut z = w;
    let mut acc = Compensated::new();
    while z.re < ctx.shift_threshold {
        if tau >= 1.0 {
            // Γ₂(z)/Γ₂(z+τ) = Γ(z)/√(2π)
            acc.add(log_gamma(z)? - HALF_LN_2PI);
            z += tau;
        } else {
            // Γ₂(z)/Γ₂(z+1) = τ^{z/τ-1/2} Γ(z/τ)/√(2π)
            acc.add((z / tau - 0.5) * ln_tau - HALF_LN_2PI + log_gamma(z / tau)?);
            z += 1.0;
        }
    }
    Ok(acc.value() + ctx.asymptotic(z))
}

/// Relative residuals |ratio − 1| of Γ₂(z)/Γ₂(z+1) = τ^{z/τ−1/2} Γ(z/τ)/√(2π)
/// and Γ₂(z)/Γ₂(z+τ) = Γ(z)/√(2π).
pub fn double_gamma_residuals(z: Complex64, ctx: &DoubleGammaContext) -> Result<(f64, f64)> {
    let tau = ctx.tau();
    let l0 = log_double_gamma(z, ctx)?;
    let l1 = log_double_gamma(z + 1.0, ctx)?;
    let lt = log_double_gamma(z + tau, ctx)?;
    let e1 = (z / tau - 0.5) * tau.ln() - HALF_LN_2PI + log_gamma(z / tau)?;
    let et = log_gamma(z)? - HALF_LN_2PI;
    Ok((((l0 - l1 - e1).exp() - 1.0).norm(), ((l0 - lt - et).exp() - 1.0).norm()))
}
