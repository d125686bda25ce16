//! Truncated log-correlated Gaussian field on [0, 1] and Monte Carlo checks of
//! its exponential functional.
//!
//! The field lives on the points s_j = j·h, j = 0..=N, with h = 1/N. Point 0
//! is kept so that centred functionals ω(s) − ω(0) can be formed; masses use
//! the Riemann sum over j ≥ 1.

use std::num::NonZeroUsize;
use std::sync::Arc;

use gauss_quad::hermite::GaussHermite;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::selberg::{ChaosParams, Variant};
pub use crate::stats::Estimate;
use crate::stats::{linear_fit, stream};
use crate::sum::compensated_sum;

/// Samples produced by one random stream.
pub const CHAIN_SAMPLES: usize = 64;

/// Largest negative circulant eigenvalue tolerated before falling back.
const EMBEDDING_TOLERANCE: f64 = 1e-10;

/// Gauss–Hermite nodes for the conditional integral over ω(0).
const HERMITE_NODES: usize = 48;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TruncationStyle {
    /// Variance μ(1 + log(1/ε)) with a linear taper below ε.
    LinearTaper,
    /// Variance μ(κ − log ε), constant below ε.
    KappaConstant,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldGridSpec {
    n_points: usize,
    epsilon: f64,
    style: TruncationStyle,
    kappa: f64,
    mu: f64,
}

impl FieldGridSpec {
    /// Grid of `n_points` cells with ε equal to the spacing; κ defaults to the
    /// value of the standard mollifier.
    pub fn new(n_points: usize, mu: f64, style: TruncationStyle) -> Result<Self> {
        if n_points < 4 || !n_points.is_power_of_two() {
            return Err(Error::constraint("n_points", format!("must be a power of two >= 4, got {n_points}")));
        }
        if !(0.0..2.0).contains(&mu) {
            return Err(Error::constraint("mu", format!("must lie in [0, 2), got {mu}")));
        }
        let kappa = match style {
            TruncationStyle::KappaConstant => crate::zeros::standard_kappa()?,
            TruncationStyle::LinearTaper => 0.0,
        };
        Ok(Self { n_points, epsilon: 1.0 / n_points as f64, style, kappa, mu })
    }

    /// Coarser truncation scale on the same grid.
    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !(epsilon >= self.spacing() && epsilon < 0.5) {
            return Err(Error::constraint(
                "epsilon",
                format!("must lie in [{}, 0.5), got {epsilon}", self.spacing()),
            ));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        if !kappa.is_finite() {
            return Err(Error::constraint("kappa", "must be finite"));
        }
        self.kappa = kappa;
        Ok(self)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n_points as f64
    }

    pub fn style(&self) -> TruncationStyle {
        self.style
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn point(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    pub fn variance(&self) -> f64 {
        self.covariance(0.0)
    }

    /// −Var/2, so that E[e^ω] = 1.
    pub fn mean(&self) -> f64 {
        -0.5 * self.variance()
    }

    /// Cov(ω(t), ω(s)) as a function of |t − s|.
    pub fn covariance(&self, lag: f64) -> f64 {
        let (mu, eps) = (self.mu, self.epsilon);
        let d = lag.abs();
        if d >= 1.0 {
            return 0.0;
        }
        if d >= eps {
            return -mu * d.ln();
        }
        match self.style {
            TruncationStyle::LinearTaper => mu * (1.0 - eps.ln() - d / eps),
            TruncationStyle::KappaConstant => mu * (self.kappa - eps.ln()),
        }
    }
}

/// Stationary covariance on the grid points 0..=N.
#[derive(Clone, Debug, PartialEq)]
pub struct Covariance {
    row: Vec<f64>,
}

impl Covariance {
    /// Cov(ω(0), ω(s_k)) for k = 0..=N.
    pub fn first_row(&self) -> &[f64] {
        &self.row
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row[i.abs_diff(j)]
    }

    pub fn dim(&self) -> usize {
        self.row.len()
    }

    pub fn dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.get(i, j)).collect()).collect()
    }

    /// Eigenvalues of the circulant of size 2N whose first row is
    /// c₀, …, c_N, c_{N−1}, …, c₁.
    pub fn embedding_eigenvalues(&self) -> Vec<f64> {
        let n = self.row.len() - 1;
        let mut buf: Vec<Complex64> = self
            .row
            .iter()
            .chain(self.row[1..n].iter().rev())
            .map(|&c| Complex64::new(c, 0.0))
            .collect();
        FftPlanner::new().plan_fft_forward(2 * n).process(&mut buf);
        buf.iter().map(|z| z.re).collect()
    }
}

pub fn build_covariance(spec: &FieldGridSpec) -> Covariance {
    Covariance { row: (0..=spec.n_points).map(|k| spec.covariance(spec.point(k))).collect() }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SamplerRoute {
    Circulant,
    /// Dense Cholesky; carries the reason the embedding was rejected.
    Dense(String),
}

enum Factor {
    Circulant { scale: Vec<f64>, fft: Arc<dyn Fft<f64>> },
    Dense { lower: Vec<f64>, dim: usize },
}

/// Exact Gaussian sampler for the field on the grid.
pub struct FieldSampler {
    spec: FieldGridSpec,
    cov: Covariance,
    factor: Factor,
    route: SamplerRoute,
}

impl FieldSampler {
    pub fn new(spec: &FieldGridSpec) -> Result<Self> {
        let cov = build_covariance(spec);
        let eig = cov.embedding_eigenvalues();
        let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
        let m = eig.len();
        if min >= -EMBEDDING_TOLERANCE {
            let scale = eig.iter().map(|&l| (l.max(0.0) / m as f64).sqrt()).collect();
            let fft = FftPlanner::new().plan_fft_forward(m);
            return Ok(Self { spec: *spec, cov, factor: Factor::Circulant { scale, fft }, route: SamplerRoute::Circulant });
        }
        let notice = format!("circulant embedding has eigenvalue {min:.3e}; using dense factorization");
        let (lower, dim) = cholesky(&cov)?;
        Ok(Self { spec: *spec, cov, factor: Factor::Dense { lower, dim }, route: SamplerRoute::Dense(notice) })
    }

    pub fn spec(&self) -> &FieldGridSpec {
        &self.spec
    }

    pub fn covariance(&self) -> &Covariance {
        &self.cov
    }

    pub fn route(&self) -> &SamplerRoute {
        &self.route
    }

    /// Draws of chain `chain`, each of length N + 1 and including the mean.
    pub fn chain(&self, seed: u64, chain: u64, count: usize) -> Vec<Vec<f64>> {
        let mut rng = stream(seed, chain);
        let dim = self.cov.dim();
        let mean = self.spec.mean();
        let mut out = Vec::with_capacity(count);
        match &self.factor {
            Factor::Circulant { scale, fft } => {
                let mut buf = vec![Complex64::default(); scale.len()];
                let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
                while out.len() < count {
                    for (z, &s) in buf.iter_mut().zip(scale) {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        *z = Complex64::new(re, im) * s;
                    }
                    fft.process_with_scratch(&mut buf, &mut scratch);
                    out.push(buf[..dim].iter().map(|z| mean + z.re).collect());
                    if out.len() < count {
                        out.push(buf[..dim].iter().map(|z| mean + z.im).collect());
                    }
                }
            }
            Factor::Dense { lower, dim } => {
                let mut z = vec![0.0; *dim];
                for _ in 0..count {
                    for v in z.iter_mut() {
                        *v = StandardNormal.sample(&mut rng);
                    }
                    let x = (0..*dim)
                        .map(|i| mean + lower[i * dim..i * dim + i + 1].iter().zip(&z).map(|(l, z)| l * z).sum::<f64>())
                        .collect();
                    out.push(x);
                }
            }
        }
        out
    }

    /// Applies `f` to `n_samples` draws without storing them; sample i comes
    /// from chain i / CHAIN_SAMPLES, so output is independent of threading.
    pub fn map_samples<T, F>(&self, n_samples: usize, seed: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&[f64]) -> T + Sync,
    {
        let chains = n_samples.div_ceil(CHAIN_SAMPLES);
        let parts: Vec<Vec<T>> = (0..chains)
            .into_par_iter()
            .map(|c| {
                let count = CHAIN_SAMPLES.min(n_samples - c * CHAIN_SAMPLES);
                self.chain(seed, c as u64, count).iter().map(|x| f(x)).collect()
            })
            .collect();
        parts.into_iter().flatten().collect()
    }
}

fn cholesky(cov: &Covariance) -> Result<(Vec<f64>, usize)> {
    let n = cov.dim();
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let dot: f64 = (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum();
            if i == j {
                let d = cov.get(i, i) + EMBEDDING_TOLERANCE - dot;
                if !(d > 0.0) {
                    return Err(Error::Factorization(format!(
                        "covariance is not positive semidefinite (pivot {d:.3e} at row {i})"
                    )));
                }
                l[i * n + i] = d.sqrt();
            } else {
                l[i * n + j] = (cov.get(i, j) - dot) / l[j * n + j];
            }
        }
    }
    Ok((l, n))
}

/// Stored Monte Carlo draws of the field.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldEnsemble {
    pub spec: FieldGridSpec,
    /// One row per sample, N + 1 values each.
    pub samples: Vec<Vec<f64>>,
    pub seed: u64,
    pub route: SamplerRoute,
}

pub fn sample_field(spec: &FieldGridSpec, n_samples: usize, seed: u64) -> Result<FieldEnsemble> {
    check_samples(n_samples)?;
    let sampler = FieldSampler::new(spec)?;
    let samples = sampler.map_samples(n_samples, seed, |x| x.to_vec());
    Ok(FieldEnsemble { spec: *spec, samples, seed, route: sampler.route })
}

fn check_samples(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::constraint("samples", format!("need at least 2 samples, got {n}")));
    }
    Ok(())
}

/// ε Σ_{s_j ∈ (a, b]} w(s_j) s_j^{shift} e^{ω_j (− ω_0)} for one sample.
pub struct MassFunctional<'a> {
    pub weight: &'a (dyn Fn(f64) -> f64 + Sync),
    pub interval: (f64, f64),
    pub centered: bool,
    pub power_shift: f64,
}

impl MassFunctional<'_> {
    pub fn eval(&self, spec: &FieldGridSpec, field: &[f64]) -> f64 {
        let h = spec.spacing();
        let (a, b) = self.interval;
        let first = ((a / h).floor() as usize + 1).max(1);
        let last = ((b / h + 1e-9).floor() as usize).min(field.len() - 1);
        if first > last {
            return 0.0;
        }
        let base = if self.centered { field[0] } else { 0.0 };
        // factor out the largest exponent before summing
        let top = field[first..=last].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let terms = (first..=last).map(|j| {
            let s = spec.point(j);
            let w = (self.weight)(s) * if self.power_shift == 0.0 { 1.0 } else { s.powf(self.power_shift) };
            w * (field[j] - top).exp()
        });
        h * compensated_sum(terms) * (top - base).exp()
    }
}

pub fn total_mass(
    ensemble: &FieldEnsemble,
    weight: &(dyn Fn(f64) -> f64 + Sync),
    interval: (f64, f64),
    centered: bool,
    power_shift: f64,
) -> Result<Vec<f64>> {
    let (a, b) = interval;
    if !(0.0 <= a && a < b && b <= 1.0) {
        return Err(Error::constraint("interval", format!("must be a subinterval of [0, 1], got [{a}, {b}]")));
    }
    let f = MassFunctional { weight, interval, centered, power_shift };
    Ok(ensemble.samples.par_iter().map(|x| f.eval(&ensemble.spec, x)).collect())
}

/// Conditional expectation of (ε Σ_{j≥1} w_j e^{ω_j})^p given the part of the
/// field independent of ω(0), with ω(0) − m drawn from N(−qV, V).
///
/// Writing ω_j = m + R_j + a_j (ω(0) − m) with a_j = Cov(ω_j, ω(0))/V makes R
/// independent of ω(0); the ω(0) integral is done by Gauss–Hermite.
struct TiltedConditional {
    weights: Vec<f64>,
    a: Vec<f64>,
    /// e^{a_j g_k} for every node g_k, row-major by node.
    table: Vec<f64>,
    nodes: Vec<f64>,
    gh: Vec<f64>,
    power: i32,
    mean: f64,
    h: f64,
}

impl TiltedConditional {
    fn new(sampler: &FieldSampler, weights: Vec<f64>, q: f64, power: i32) -> Self {
        let spec = sampler.spec();
        let v = spec.variance();
        let row = sampler.covariance().first_row();
        let a: Vec<f64> = row.iter().map(|&c| if v > 0.0 { c / v } else { 0.0 }).collect();
        let rule = GaussHermite::new(NonZeroUsize::new(HERMITE_NODES).expect("nonzero"));
        let (mut nodes, mut gh) = (Vec::new(), Vec::new());
        for &(t, w) in rule.as_node_weight_pairs() {
            nodes.push(-q * v + (2.0 * v).sqrt() * t);
            gh.push(w / std::f64::consts::PI.sqrt());
        }
        let table = nodes.iter().flat_map(|&g| a[1..].iter().map(move |&aj| (aj * g).exp())).collect();
        Self { weights, a, table, nodes, gh, power, mean: spec.mean(), h: spec.spacing() }
    }

    fn eval(&self, field: &[f64]) -> f64 {
        let g0 = field[0] - self.mean;
        let n = field.len() - 1;
        let top = (1..=n).map(|j| field[j] - self.a[j] * g0).fold(f64::NEG_INFINITY, f64::max);
        let c: Vec<f64> = (1..=n)
            .map(|j| self.weights[j - 1] * (field[j] - self.a[j] * g0 - top).exp())
            .collect();
        let mut acc = 0.0;
        for (k, &w) in self.gh.iter().enumerate() {
            let row = &self.table[k * n..(k + 1) * n];
            let inner: f64 = c.iter().zip(row).map(|(c, e)| c * e).sum();
            if inner > 0.0 {
                acc += w * (self.power as f64 * (self.h * inner).ln() + self.power as f64 * top).exp();
            }
        }
        debug_assert!(self.nodes.len() == self.gh.len());
        acc
    }
}

/// Estimator for the left side of the change-of-measure identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GirsanovEstimator {
    /// e^{−Vq(q+1)/2} e^{−qω(0)} (∫ u^{−μq} φ e^ω)^p per sample; heavy-tailed.
    Plain,
    /// ω(0) integrated out given the independent part of the field.
    Conditioned,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GirsanovResult {
    pub lhs: Estimate,
    pub rhs: Estimate,
    pub difference: Estimate,
    pub z_score: f64,
}

fn check_mu(p: &ChaosParams, spec: &FieldGridSpec) -> Result<()> {
    if (p.mu() - spec.mu()).abs() > 1e-12 {
        return Err(Error::constraint("mu", format!("chaos parameters give {} but the grid uses {}", p.mu(), spec.mu())));
    }
    Ok(())
}

fn bump_weight(p: &ChaosParams, s: f64) -> f64 {
    s.powf(p.lambda1()) * (1.0 - s).powf(p.lambda2())
}

/// Both sides of e^{−Vq(q+1)/2} E[e^{−qω(0)} (∫ u^{−μq} φ e^ω)^{pw}] = E[(∫ φ e^ω)^{pw}]
/// on common draws, with φ(u) = u^{λ₁}(1−u)^{λ₂}.
pub fn girsanov_check(
    p: &ChaosParams,
    q: u32,
    pw: u32,
    spec: &FieldGridSpec,
    n_samples: usize,
    seed: u64,
) -> Result<GirsanovResult> {
    girsanov_check_with(p, q, pw, spec, n_samples, seed, GirsanovEstimator::Conditioned)
}

pub fn girsanov_check_with(
    p: &ChaosParams,
    q: u32,
    pw: u32,
    spec: &FieldGridSpec,
    n_samples: usize,
    seed: u64,
    estimator: GirsanovEstimator,
) -> Result<GirsanovResult> {
    check_mu(p, spec)?;
    check_samples(n_samples)?;
    if q > 2 {
        return Err(Error::constraint("q", format!("must be 0, 1 or 2, got {q}")));
    }
    if !(1..=2).contains(&pw) {
        return Err(Error::constraint("pw", format!("must be 1 or 2, got {pw}")));
    }
    if pw as f64 >= p.tau() {
        return Err(Error::MomentDivergence { n: pw as f64, tau: p.tau() });
    }
    let sampler = FieldSampler::new(spec)?;
    let n = spec.n_points();
    let qf = q as f64;
    let phi: Vec<f64> = (1..=n).map(|j| bump_weight(p, spec.point(j))).collect();
    let tilted: Vec<f64> = (1..=n).map(|j| phi[j - 1] * spec.point(j).powf(-spec.mu() * qf)).collect();
    let v = spec.variance();
    let log_c = -v * qf * (qf + 1.0) / 2.0;
    let power = pw as i32;
    let h = spec.spacing();
    let rhs_of = |x: &[f64]| (h * compensated_sum(phi.iter().zip(&x[1..]).map(|(w, o)| w * o.exp()))).powi(power);
    let pairs: Vec<(f64, f64)> = match estimator {
        GirsanovEstimator::Plain => sampler.map_samples(n_samples, seed, |x| {
            let m = h * compensated_sum(tilted.iter().zip(&x[1..]).map(|(w, o)| w * o.exp()));
            ((log_c - qf * x[0]).exp() * m.powi(power), rhs_of(x))
        }),
        GirsanovEstimator::Conditioned => {
            let cond = TiltedConditional::new(&sampler, tilted, qf, power);
            sampler.map_samples(n_samples, seed, |x| (cond.eval(x), rhs_of(x)))
        }
    };
    let lhs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let rhs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let diff: Vec<f64> = pairs.iter().map(|p| p.0 - p.1).collect();
    let difference = Estimate::from_samples(&diff);
    let z_score = if difference.stderr > 0.0 { difference.value / difference.stderr } else { 0.0 };
    Ok(GirsanovResult {
        lhs: Estimate::from_samples(&lhs),
        rhs: Estimate::from_samples(&rhs),
        difference,
        z_score,
    })
}

/// e^{μ(log ε − κ)n(n+1)/2} E[(∫ w(u) e^{ω(u) − ω(0)} du)ⁿ] with w(u) = u^{−μn}
/// (plain) or 1 (self-weighted), estimated by integrating ω(0) out.
///
/// The limits are the Selberg integral and the self-weighted moment.
pub fn mc_rescaled_moment(
    spec: &FieldGridSpec,
    n: u32,
    variant: Variant,
    n_samples: usize,
    seed: u64,
) -> Result<Estimate> {
    if spec.style() != TruncationStyle::KappaConstant {
        return Err(Error::constraint("truncation_style", "rescaled moments need the kappa-constant field"));
    }
    check_samples(n_samples)?;
    if n == 0 {
        return Err(Error::constraint("n", "moment order must be a positive integer"));
    }
    if spec.mu() > 0.0 && n as f64 >= 2.0 / spec.mu() {
        return Err(Error::MomentDivergence { n: n as f64, tau: 2.0 / spec.mu() });
    }
    let sampler = FieldSampler::new(spec)?;
    let nf = n as f64;
    let weights: Vec<f64> = (1..=spec.n_points())
        .map(|j| match variant {
            Variant::Plain => spec.point(j).powf(-spec.mu() * nf),
            Variant::SelfWeighted => 1.0,
        })
        .collect();
    // the tilt by e^{−nω(0)} turns the prefactor into e^{−nV/2} = e^{nm}
    let cond = TiltedConditional::new(&sampler, weights, nf, n as i32);
    let values = sampler.map_samples(n_samples, seed, |x| cond.eval(x));
    Ok(Estimate::from_samples(&values))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiscalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub scales: Vec<f64>,
    /// Estimates of E[M(0,s)^q] averaged over disjoint windows.
    pub moments: Vec<Estimate>,
}

/// Least-squares slope of log E[M(0,s)^q] against log s.
pub fn multiscaling_fit(
    p: &ChaosParams,
    q: f64,
    s_grid: &[f64],
    spec: &FieldGridSpec,
    n_samples: usize,
    seed: u64,
) -> Result<MultiscalingFit> {
    check_mu(p, spec)?;
    check_samples(n_samples)?;
    if !(q > 0.0) || (p.mu() > 0.0 && q >= p.tau()) {
        return Err(Error::constraint("q", format!("must lie in (0, tau = {}), got {q}", p.tau())));
    }
    if s_grid.len() < 2 || s_grid.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::constraint("s_grid", "need at least two strictly decreasing scales"));
    }
    let h = spec.spacing();
    let mut cells = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let k = (s / h).round();
        if !(s >= 8.0 * spec.epsilon() && s <= 1.0) || (k * h - s).abs() > 1e-12 {
            return Err(Error::constraint(
                "s_grid",
                format!("scale {s} must be a grid multiple in [8 epsilon, 1] = [{}, 1]", 8.0 * spec.epsilon()),
            ));
        }
        cells.push(k as usize);
    }
    let sampler = FieldSampler::new(spec)?;
    let n = spec.n_points();
    let per_sample: Vec<Vec<f64>> = sampler.map_samples(n_samples, seed, |x| {
        let mut prefix = vec![0.0; n + 1];
        let mut acc = crate::sum::Compensated::new();
        for j in 1..=n {
            acc.add(h * x[j].exp());
            prefix[j] = acc.value();
        }
        cells
            .iter()
            .map(|&k| {
                let windows = n / k;
                (0..windows).map(|w| (prefix[(w + 1) * k] - prefix[w * k]).powf(q)).sum::<f64>() / windows as f64
            })
            .collect()
    });
    let moments: Vec<Estimate> = (0..s_grid.len())
        .map(|i| Estimate::from_samples(&per_sample.iter().map(|r| r[i]).collect::<Vec<_>>()))
        .collect();
    let xs: Vec<f64> = s_grid.iter().map(|s| s.ln()).collect();
    let ys: Vec<f64> = moments.iter().map(|m| m.value.ln()).collect();
    let (slope, intercept) = linear_fit(&xs, &ys);
    Ok(MultiscalingFit { slope, intercept, scales: s_grid.to_vec(), moments })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MassCovariance {
    pub empirical: Estimate,
    pub predicted: f64,
}

/// Covariance of log M(s₁, s₁+Δ) and log M(s₂, s₂+Δ) against −μ log|s₁ − s₂|.
pub fn mass_covariance_check(
    p: &ChaosParams,
    s1: f64,
    s2: f64,
    delta: f64,
    spec: &FieldGridSpec,
    n_samples: usize,
    seed: u64,
) -> Result<MassCovariance> {
    check_mu(p, spec)?;
    check_samples(n_samples)?;
    let gap = (s1 - s2).abs();
    if gap < 8.0 * spec.epsilon() {
        return Err(Error::constraint("s2", format!("separation {gap} is below 8 epsilon = {}", 8.0 * spec.epsilon())));
    }
    if !(delta > 0.0 && delta <= gap / 4.0) {
        return Err(Error::constraint("delta", format!("must lie in (0, |s1 - s2|/4 = {}], got {delta}", gap / 4.0)));
    }
    for (key, s) in [("s1", s1), ("s2", s2)] {
        if !(s >= 0.0 && s + delta <= 1.0) {
            return Err(Error::constraint(key, format!("window [{s}, {}] leaves [0, 1]", s + delta)));
        }
    }
    let sampler = FieldSampler::new(spec)?;
    let one = |_: f64| 1.0;
    let w1 = MassFunctional { weight: &one, interval: (s1, s1 + delta), centered: false, power_shift: 0.0 };
    let w2 = MassFunctional { weight: &one, interval: (s2, s2 + delta), centered: false, power_shift: 0.0 };
    let logs: Vec<(f64, f64)> = sampler.map_samples(n_samples, seed, |x| (w1.eval(spec, x).ln(), w2.eval(spec, x).ln()));
    let k = logs.len() as f64;
    let m1 = logs.iter().map(|l| l.0).sum::<f64>() / k;
    let m2 = logs.iter().map(|l| l.1).sum::<f64>() / k;
    let products: Vec<f64> = logs.iter().map(|l| (l.0 - m1) * (l.1 - m2)).collect();
    let raw = Estimate::from_samples(&products);
    let empirical = Estimate { value: raw.value * k / (k - 1.0), stderr: raw.stderr };
    Ok(MassCovariance { empirical, predicted: -p.mu() * gap.ln() })
}
