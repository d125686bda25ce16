//! Selberg integrals: closed gamma products for the moments of the total
//! mass and a brute-force integration oracle for generalized integrals.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quad::tanh_sinh;
use crate::specfun::{ln_gamma, ln_gamma_signed};
use crate::stats::{batch_means, stream};

/// Intermittency and boundary weights of the chaos measure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChaosParams {
    mu: f64,
    lambda1: f64,
    lambda2: f64,
    tau: f64,
}

impl ChaosParams {
    pub fn new(mu: f64, lambda1: f64, lambda2: f64) -> Result<Self> {
        if !(mu > 0.0 && mu < 2.0) {
            return Err(Error::constraint("mu", format!("must lie in (0, 2), got {mu}")));
        }
        for (key, l) in [("lambda1", lambda1), ("lambda2", lambda2)] {
            if !(l > -mu / 2.0) || !l.is_finite() {
                return Err(Error::constraint(key, format!("must exceed -mu/2 = {}, got {l}", -mu / 2.0)));
            }
        }
        Ok(Self { mu, lambda1, lambda2, tau: 2.0 / mu })
    }

    pub fn with_mu(mu: f64) -> Result<Self> {
        Self::new(mu, 0.0, 0.0)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    /// Λ = λ₁ + λ₂.
    pub fn lambda_sum(&self) -> f64 {
        self.lambda1 + self.lambda2
    }
}

/// Which moment family: the plain total mass, or the mass weighted by the
/// field value at the origin (the s^{-μq} tilted integrals).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Plain,
    SelfWeighted,
}

/// Signed product of gamma values accumulated in log space.
#[derive(Default)]
struct GammaProduct {
    log: f64,
    sign: f64,
}

impl GammaProduct {
    fn new() -> Self {
        Self { log: 0.0, sign: 1.0 }
    }

    fn mul(&mut self, x: f64) -> Result<()> {
        let (l, s) = ln_gamma_signed(x)?;
        self.log += l;
        self.sign *= s;
        Ok(())
    }

    fn div(&mut self, x: f64) -> Result<()> {
        let (l, s) = ln_gamma_signed(x)?;
        self.log -= l;
        self.sign *= s;
        Ok(())
    }

    fn value(&self) -> f64 {
        self.sign * self.log.exp()
    }
}

fn check_positive_order(n: u32, tau: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::constraint("n", "moment order must be a positive integer"));
    }
    if n as f64 >= tau {
        return Err(Error::MomentDivergence { n: n as f64, tau });
    }
    Ok(())
}

fn selberg_product(n: u32, mu: f64, l1: f64, l2: f64) -> Result<f64> {
    let h = mu / 2.0;
    let nf = n as f64;
    let mut g = GammaProduct::new();
    for k in 0..n {
        let k = k as f64;
        g.mul(1.0 - (k + 1.0) * h)?;
        g.mul(1.0 + l1 - k * h)?;
        g.mul(1.0 + l2 - k * h)?;
        g.div(1.0 - h)?;
        g.div(2.0 + l1 + l2 - (nf + k - 1.0) * h)?;
    }
    Ok(g.value())
}

/// The n-point Selberg integral ∫_{[0,1]ⁿ} Π s_i^{λ₁}(1−s_i)^{λ₂} Π_{i<j}|s_i−s_j|^{−μ} ds.
pub fn selberg_closed(n: u32, p: &ChaosParams) -> Result<f64> {
    check_positive_order(n, p.tau)?;
    selberg_product(n, p.mu, p.lambda1, p.lambda2)
}

/// Positive integer moment E[Mⁿ] of the total mass.
///
/// The self-weighted family shifts λ₁ by μn, which is what the s^{−μn}
/// tilt does to the Selberg weight.
pub fn mass_moment_pos(n: u32, p: &ChaosParams, variant: Variant) -> Result<f64> {
    check_positive_order(n, p.tau)?;
    let t = p.tau;
    let (l1, l2) = (p.lambda1, p.lambda2);
    let lam = l1 + l2;
    let nf = n as f64;
    let mut g = GammaProduct::new();
    match variant {
        Variant::Plain => return selberg_product(n, p.mu, l1, l2),
        Variant::SelfWeighted => {
            for k in 0..n {
                let k = k as f64;
                g.mul(1.0 - (k + 1.0) / t)?;
                g.mul(1.0 + l1 + 2.0 * nf / t - k / t)?;
                g.mul(1.0 + l2 - k / t)?;
                g.div(1.0 - 1.0 / t)?;
                g.div(2.0 + lam + nf / t - (k - 1.0) / t)?;
            }
        }
    }
    Ok(g.value())
}

/// Negative integer moment E[M⁻ⁿ] of the total mass.
pub fn mass_moment_neg(n: u32, p: &ChaosParams, variant: Variant) -> Result<f64> {
    if n == 0 {
        return Err(Error::constraint("n", "moment order must be a positive integer"));
    }
    let t = p.tau;
    let nf = n as f64;
    let l1 = match variant {
        Variant::Plain => p.lambda1,
        Variant::SelfWeighted => {
            if !(1.0 + p.lambda1 - 2.0 * nf / t + 1.0 / t > 0.0) {
                return Err(Error::constraint(
                    "n",
                    format!("self-weighted negative moment needs n < (tau + 1)/2 = {}", (t + 1.0) / 2.0),
                ));
            }
            p.lambda1 - 2.0 * nf / t
        }
    };
    let l2 = p.lambda2;
    let mut g = GammaProduct::new();
    for k in 0..n {
        let k = k as f64;
        g.mul(2.0 + l1 + l2 + (nf + 2.0 + k) / t)?;
        g.mul(1.0 - 1.0 / t)?;
        g.div(1.0 + l1 + (k + 1.0) / t)?;
        g.div(1.0 + l2 + (k + 1.0) / t)?;
        g.div(1.0 + k / t)?;
    }
    Ok(g.value())
}

/// Scaling exponent of E[M(0,t)^q] in t.
pub fn multiscaling_exponent(q: f64, p: &ChaosParams, variant: Variant) -> f64 {
    let h = p.mu / 2.0;
    match variant {
        Variant::Plain => q - h * (q * q - q),
        Variant::SelfWeighted => q + h * (q * q + q),
    }
}

/// A subinterval of [0, 1] holding `mult` integration points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Block {
    pub lo: f64,
    pub hi: f64,
    pub mult: usize,
}

/// Generalized Selberg integral over a product of subintervals:
/// ∫ Π_i s_i^{λ₁+w}(1−s_i)^{λ₂} Π_{i<j} |s_i−s_j|^{k} ds.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralSpec {
    blocks: Vec<Block>,
    weight_exponent: f64,
    kernel_exponent: f64,
}

pub const MAX_DIMENSION: usize = 4;

impl IntegralSpec {
    pub fn new(mut blocks: Vec<Block>, weight_exponent: f64, kernel_exponent: f64) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::constraint("blocks", "at least one block is required"));
        }
        for b in &blocks {
            if !(0.0 <= b.lo && b.lo < b.hi && b.hi <= 1.0) || b.mult == 0 {
                return Err(Error::constraint(
                    "blocks",
                    format!("block [{}, {}] x{} is not a nonempty subinterval of [0, 1]", b.lo, b.hi, b.mult),
                ));
            }
        }
        blocks.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        if blocks.windows(2).any(|w| w[1].lo < w[0].hi) {
            return Err(Error::constraint("blocks", "intervals overlap"));
        }
        let n: usize = blocks.iter().map(|b| b.mult).sum();
        if n > MAX_DIMENSION {
            return Err(Error::constraint(
                "blocks",
                format!("total dimension {n} exceeds the oracle bound {MAX_DIMENSION}"),
            ));
        }
        if !(kernel_exponent <= 0.0) || (n >= 2 && -kernel_exponent >= 2.0 / n as f64) {
            return Err(Error::Domain(format!(
                "kernel exponent {kernel_exponent} is not integrable in dimension {n} (needs -k < 2/N)"
            )));
        }
        Ok(Self { blocks, weight_exponent, kernel_exponent })
    }

    /// n points on [0, 1] with the Selberg kernel exponent −μ.
    pub fn unit(n: usize, p: &ChaosParams) -> Result<Self> {
        Self::new(vec![Block { lo: 0.0, hi: 1.0, mult: n }], 0.0, -p.mu)
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(|b| b.mult).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Budget {
    /// Monte Carlo with this many samples in total.
    Samples(u64),
    /// Deterministic tanh–sinh quadrature (dimension ≤ 2).
    Quadrature,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleEstimate {
    pub estimate: f64,
    pub stderr: f64,
}

pub const ORACLE_CHAINS: u64 = 32;

/// Brute-force estimate of a generalized Selberg integral.
pub fn selberg_oracle(spec: &IntegralSpec, p: &ChaosParams, budget: Budget, seed: u64) -> Result<OracleEstimate> {
    match budget {
        Budget::Samples(n) => {
            if n < ORACLE_CHAINS {
                return Err(Error::constraint("samples", format!("need at least {ORACLE_CHAINS} samples")));
            }
            monte_carlo(spec, p, n, seed)
        }
        Budget::Quadrature => {
            let estimate = quadrature(spec, p)?;
            Ok(OracleEstimate { estimate, stderr: 0.0 })
        }
    }
}

/// A sampled point with its distances to 1 and to the ends of its block,
/// all formed from the gaps so that clustered points keep their separation.
#[derive(Clone, Copy, Debug)]
struct Point {
    s: f64,
    r: f64,
    below: f64,
    above: f64,
    block: usize,
}

/// Sorted points in one block drawn from Dirichlet gaps.
struct BlockSampler {
    lo: f64,
    len: f64,
    block: usize,
    gammas: Vec<Gamma<f64>>,
    log_norm: f64,
    exps: Vec<f64>,
}

impl BlockSampler {
    fn new(b: &Block, block: usize, shapes: Vec<f64>) -> Self {
        let total: f64 = shapes.iter().sum();
        let mut log_norm = ln_gamma(total).expect("positive shape");
        for &a in &shapes {
            log_norm -= ln_gamma(a).expect("positive shape");
        }
        // unordered points: the symmetric integral is m! times the sorted one
        log_norm -= ln_gamma(b.mult as f64 + 1.0).expect("factorial");
        log_norm -= b.mult as f64 * (b.hi - b.lo).ln();
        Self {
            lo: b.lo,
            len: b.hi - b.lo,
            block,
            gammas: shapes.iter().map(|&a| Gamma::new(a, 1.0).expect("shape")).collect(),
            log_norm,
            exps: shapes.iter().map(|a| a - 1.0).collect(),
        }
    }

    /// Appends the points; returns the log proposal density and the sum of
    /// log distances between pairs inside the block.
    fn draw(&self, rng: &mut impl Rng, out: &mut Vec<Point>, gaps: &mut Vec<f64>) -> (f64, f64) {
        gaps.clear();
        gaps.extend(self.gammas.iter().map(|g| g.sample(rng).max(f64::MIN_POSITIVE)));
        let total: f64 = gaps.iter().sum();
        let mut logp = self.log_norm;
        for (g, e) in gaps.iter_mut().zip(&self.exps) {
            *g /= total;
            logp += e * g.ln();
        }
        let m = gaps.len() - 1;
        let mut below = 0.0;
        for i in 0..m {
            below += gaps[i];
            let above: f64 = gaps[i + 1..].iter().sum();
            let s = self.lo + self.len * below;
            let r = if self.lo + self.len == 1.0 { self.len * above } else { 1.0 - s };
            out.push(Point { s, r, below: self.len * below, above: self.len * above, block: self.block });
        }
        let mut log_dist = 0.0;
        for i in 1..m {
            let mut d = 0.0;
            for j in (0..i).rev() {
                d += gaps[j + 1];
                log_dist += (self.len * d).ln();
            }
        }
        (logp, log_dist)
    }
}

fn proposal_shapes(spec: &IntegralSpec, p: &ChaosParams, idx: usize) -> Vec<f64> {
    let b = spec.blocks[idx];
    let n = spec.dimension() as f64;
    let mu = -spec.kernel_exponent;
    // interior gaps follow |Δ|^{-γ}; γ > μN − 1 keeps the estimator variance
    // finite for clusters of every size up to N. Sitting at 70% of the window
    // keeps γ away from μ, where the N = 2 proposal would be exact.
    let floor = (mu * n - 1.0).max(0.0);
    let gamma_in = floor + 0.7 * (1.0 - floor);
    let touches_left = idx > 0 && spec.blocks[idx - 1].hi == b.lo;
    let touches_right = idx + 1 < spec.blocks.len() && spec.blocks[idx + 1].lo == b.hi;
    let left = if b.lo == 0.0 {
        1.0 + (p.lambda1 + spec.weight_exponent).min(0.0)
    } else if touches_left {
        1.0 - mu.min(0.95)
    } else {
        1.0
    };
    let right = if b.hi == 1.0 {
        1.0 + p.lambda2.min(0.0)
    } else if touches_right {
        1.0 - mu.min(0.95)
    } else {
        1.0
    };
    let mut shapes = vec![1.0 - gamma_in; b.mult + 1];
    shapes[0] = left;
    shapes[b.mult] = right;
    shapes
}

fn log_weight(pts: &[Point], e1: f64, e2: f64) -> f64 {
    let mut acc = 0.0;
    for pt in pts {
        if e1 != 0.0 {
            acc += e1 * pt.s.ln();
        }
        if e2 != 0.0 {
            acc += e2 * pt.r.ln();
        }
    }
    acc
}

fn cross_log_dist(spec: &IntegralSpec, pts: &[Point]) -> f64 {
    let mut acc = 0.0;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            if b.block != a.block {
                // blocks are sorted, so a lies to the left of b
                let gap = spec.blocks[b.block].lo - spec.blocks[a.block].hi;
                acc += (gap + a.above + b.below).ln();
            }
        }
    }
    acc
}

fn monte_carlo(spec: &IntegralSpec, p: &ChaosParams, samples: u64, seed: u64) -> Result<OracleEstimate> {
    let samplers: Vec<BlockSampler> = (0..spec.blocks.len())
        .map(|i| BlockSampler::new(&spec.blocks[i], i, proposal_shapes(spec, p, i)))
        .collect();
    let e1 = p.lambda1 + spec.weight_exponent;
    let e2 = p.lambda2;
    let k = spec.kernel_exponent;
    let per_chain = samples / ORACLE_CHAINS;
    let extra = samples % ORACLE_CHAINS;
    let batches: Vec<f64> = (0..ORACLE_CHAINS)
        .into_par_iter()
        .map(|chain| {
            let mut rng = stream(seed, chain);
            let count = per_chain + u64::from(chain < extra);
            let mut pts = Vec::with_capacity(MAX_DIMENSION);
            let mut gaps = Vec::with_capacity(MAX_DIMENSION + 1);
            let mut acc = 0.0;
            for _ in 0..count {
                pts.clear();
                let mut logp = 0.0;
                let mut log_dist = 0.0;
                for s in &samplers {
                    let (lp, ld) = s.draw(&mut rng, &mut pts, &mut gaps);
                    logp += lp;
                    log_dist += ld;
                }
                acc += (log_weight(&pts, e1, e2) + k * (log_dist + cross_log_dist(spec, &pts)) - logp).exp();
            }
            acc / count as f64
        })
        .collect();
    // unequal chain lengths differ by one sample; the plain batch mean is fine
    let (estimate, stderr) = batch_means(&batches);
    Ok(OracleEstimate { estimate, stderr })
}

const QUAD_TOL: f64 = 1e-11;

fn quadrature(spec: &IntegralSpec, p: &ChaosParams) -> Result<f64> {
    let e1 = p.lambda1 + spec.weight_exponent;
    let e2 = p.lambda2;
    let k = spec.kernel_exponent;
    // weight from the point and its complement, each accurate near its end
    let w = move |s: f64, r: f64| -> f64 {
        // an abscissa that underflowed onto a singular endpoint has negligible weight
        if (e1 < 0.0 && s == 0.0) || (e2 < 0.0 && r == 0.0) {
            return 0.0;
        }
        let mut v = 1.0;
        if e1 != 0.0 {
            v *= s.powf(e1);
        }
        if e2 != 0.0 {
            v *= r.powf(e2);
        }
        v
    };
    match (spec.blocks.as_slice(), spec.dimension()) {
        ([b], 1) => tanh_sinh(|_, da, db| w(b.lo + da, db + (1.0 - b.hi)), b.lo, b.hi, QUAD_TOL),
        ([b], 2) => {
            // s < t, t = s + h and v = h^{1+k}/(1+k) so h^k dh = dv; v is
            // rescaled to x = v/vmax ∈ [0, 1] so short rooms stay representable
            let a = 1.0 + k;
            let outer = |_: f64, da: f64, db: f64| -> f64 {
                let s = b.lo + da;
                let room = db; // hi − s
                let vmax = room.powf(a) / a;
                let inner = tanh_sinh(
                    |x: f64, _, dbx: f64| {
                        let h = room * x.powf(1.0 / a);
                        // hi − s − h = room·(1 − (1 − dbx)^{1/a})
                        let left = -room * ((1.0 / a) * (-dbx).ln_1p()).exp_m1();
                        w(s + h, left + (1.0 - b.hi))
                    },
                    0.0,
                    1.0,
                    QUAD_TOL,
                )
                .map(|v| v * vmax);
                match inner {
                    Ok(v) => 2.0 * w(s, db + (1.0 - b.hi)) * v,
                    Err(_) => f64::NAN,
                }
            };
            let v = tanh_sinh(outer, b.lo, b.hi, QUAD_TOL * 10.0)?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Quadrature("inner integral failed".into()))
            }
        }
        ([b1, b2], 2) => {
            let gap = b2.lo - b1.hi;
            let outer = |_: f64, da: f64, db: f64| -> f64 {
                let s = b1.lo + da;
                let inner = tanh_sinh(
                    |_, da2: f64, db2: f64| {
                        let dist = gap + da2 + db;
                        w(b2.lo + da2, db2 + (1.0 - b2.hi)) * dist.powf(k)
                    },
                    b2.lo,
                    b2.hi,
                    QUAD_TOL,
                );
                match inner {
                    Ok(v) => w(s, db + (1.0 - b1.hi)) * v,
                    Err(_) => f64::NAN,
                }
            };
            let v = tanh_sinh(outer, b1.lo, b1.hi, QUAD_TOL * 10.0)?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Quadrature("inner integral failed".into()))
            }
        }
        _ => Err(Error::constraint("budget", "deterministic quadrature supports dimension at most 2")),
    }
}
