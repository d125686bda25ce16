use num_complex::Complex64;
use rand_distr::{Distribution, Open01, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::selberg::ChaosParams;
use crate::specfun::DoubleGammaContext;
use crate::stats::stream;

use super::barnes::{BarnesBetaParams, BarnesEvaluator};
use super::{decomposition, DecompositionFactors};

/// Knots of each tabulated CDF.
pub const TABLE_KNOTS: usize = 4096;

/// Samples drawn from one random stream.
pub const SAMPLE_CHUNK: usize = 1 << 16;

// Euler-summed Fourier series inversion of the Laplace transform
const EULER_A: f64 = 18.4;
const EULER_N: usize = 38;
const EULER_M: usize = 11;

/// Survival probability below which the upper tail is extrapolated.
const TAIL_CUT: f64 = 1e-7;

/// Tabulated CDF of V = −log β for a Barnes beta variable β, so that
/// X = β⁻¹ = e^V.
#[derive(Clone, Debug)]
pub struct BarnesBetaTable {
    params: BarnesBetaParams,
    v: Vec<f64>,
    cdf: Vec<f64>,
}

impl BarnesBetaTable {
    pub fn new(b: &BarnesBetaParams) -> Result<Self> {
        if b.is_degenerate() {
            return Ok(Self { params: *b, v: Vec::new(), cdf: Vec::new() });
        }
        let ctx = DoubleGammaContext::new(b.tau())?;
        let (lo, hi) = ((1e-10 / b.b0()).ln(), (40.0 / b.b0()).ln());
        let step = (hi - lo) / (TABLE_KNOTS - 1) as f64;
        let v: Vec<f64> = (0..TABLE_KNOTS).map(|k| (lo + k as f64 * step).exp()).collect();
        let eval = BarnesEvaluator::new(b, &ctx)?;
        let raw = v.par_iter().map(|&v| euler_cdf(v, &eval)).collect::<Result<Vec<_>>>()?;
        let mut cdf = Vec::with_capacity(raw.len());
        let mut run = 0.0f64;
        for f in raw {
            run = run.max(f.clamp(0.0, 1.0));
            cdf.push(run);
        }
        let keep = cdf.iter().rposition(|&f| 1.0 - f >= TAIL_CUT).map_or(0, |i| i + 1);
        if keep < 2 || !(cdf[0] > 0.0) {
            return Err(Error::Quadrature(format!(
                "Barnes beta CDF tabulation failed for b = ({}, {}, {})",
                b.b0(),
                b.b1(),
                b.b2()
            )));
        }
        let mut v = v;
        v.truncate(keep);
        cdf.truncate(keep);
        Ok(Self { params: *b, v, cdf })
    }

    pub fn params(&self) -> &BarnesBetaParams {
        &self.params
    }

    pub fn knots(&self) -> &[f64] {
        &self.v
    }

    /// P(V ≤ v) with power-law and exponential tails outside the table.
    pub fn cdf(&self, v: f64) -> f64 {
        if self.v.is_empty() {
            return if v >= 0.0 { 1.0 } else { 0.0 };
        }
        if v <= 0.0 {
            return 0.0;
        }
        let last = self.v.len() - 1;
        if v < self.v[0] {
            return self.cdf[0] * (v / self.v[0]).powf(self.params.edge_exponent());
        }
        if v >= self.v[last] {
            return 1.0 - (1.0 - self.cdf[last]) * (-self.params.b0() * (v - self.v[last])).exp();
        }
        let i = self.v.partition_point(|&x| x <= v) - 1;
        let w = (v / self.v[i]).ln() / (self.v[i + 1] / self.v[i]).ln();
        self.cdf[i] + w * (self.cdf[i + 1] - self.cdf[i])
    }

    /// Inverse CDF of V.
    pub fn quantile(&self, u: f64) -> f64 {
        if self.v.is_empty() {
            return 0.0;
        }
        let last = self.v.len() - 1;
        if u <= self.cdf[0] {
            return self.v[0] * (u / self.cdf[0]).powf(1.0 / self.params.edge_exponent());
        }
        if u >= self.cdf[last] {
            return self.v[last] + ((1.0 - self.cdf[last]) / (1.0 - u)).ln() / self.params.b0();
        }
        let i = self.cdf.partition_point(|&f| f <= u) - 1;
        let (f0, f1) = (self.cdf[i], self.cdf[i + 1]);
        let w = if f1 > f0 { (u - f0) / (f1 - f0) } else { 0.0 };
        self.v[i] * (w * (self.v[i + 1] / self.v[i]).ln()).exp()
    }

    /// One draw of X = e^V from a uniform variate.
    pub fn sample_inverse(&self, u: f64) -> f64 {
        self.quantile(u).exp()
    }
}

/// P(V ≤ v) by inverting the Laplace transform η(s)/s of the CDF.
fn euler_cdf(v: f64, eval: &BarnesEvaluator) -> Result<f64> {
    let transform = |s: Complex64| -> Result<f64> { Ok((eval.log_mellin(s)?.exp() / s).re) };
    let scale = (EULER_A / 2.0).exp() / v;
    let mut partial = Vec::with_capacity(EULER_N + EULER_M + 1);
    let mut sum = 0.5 * transform(Complex64::new(EULER_A / (2.0 * v), 0.0))?;
    partial.push(sum);
    for k in 1..=(EULER_N + EULER_M) {
        let s = Complex64::new(EULER_A, 2.0 * k as f64 * std::f64::consts::PI) / (2.0 * v);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * transform(s)?;
        partial.push(sum);
    }
    let mut binom = 1.0;
    let mut acc = 0.0;
    for k in 0..=EULER_M {
        acc += binom * partial[EULER_N + k];
        binom *= (EULER_M - k) as f64 / (k + 1) as f64;
    }
    Ok(scale * acc / 2f64.powi(EULER_M as i32))
}

/// Sampler of M = constant · L · X₁ · X₂ · X₃ · Y.
#[derive(Clone, Debug)]
pub struct SelbergSampler {
    factors: DecompositionFactors,
    tables: Vec<BarnesBetaTable>,
}

impl SelbergSampler {
    pub fn new(p: &ChaosParams) -> Result<Self> {
        let factors = decomposition(p)?;
        let tables = factors.inverse_betas().map(BarnesBetaTable::new).collect::<Result<Vec<_>>>()?;
        Ok(Self { factors, tables })
    }

    pub fn factors(&self) -> &DecompositionFactors {
        &self.factors
    }

    pub fn tables(&self) -> &[BarnesBetaTable] {
        &self.tables
    }

    /// `count` independent draws; chunk k uses stream (seed, k).
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<f64>> {
        if count == 0 {
            return Err(Error::constraint("count", "must be at least 1"));
        }
        let chunks = count.div_ceil(SAMPLE_CHUNK);
        let sigma = self.factors.lognormal_variance.sqrt();
        let inv_tau = 1.0 / self.factors.frechet_tau;
        let out: Vec<Vec<f64>> = (0..chunks)
            .into_par_iter()
            .map(|k| {
                let mut rng = stream(seed, k as u64);
                let n = SAMPLE_CHUNK.min(count - k * SAMPLE_CHUNK);
                (0..n)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        let mut log_m = self.factors.constant.ln() + sigma * z;
                        for t in &self.tables {
                            let u: f64 = Open01.sample(&mut rng);
                            log_m += t.quantile(u);
                        }
                        let u: f64 = Open01.sample(&mut rng);
                        log_m -= inv_tau * (-u.ln()).ln();
                        log_m.exp()
                    })
                    .collect()
            })
            .collect();
        Ok(out.concat())
    }
}
