//! Zero tables, smoothed indicator statistics of rescaled zero positions, and
//! their Gaussian-field predictions.

use std::f64::consts::PI;
use std::path::Path;

use rand_distr::{Distribution, Uniform};
use rayon::prelude::*;

use crate::chaos::Estimate;
use crate::error::{Error, Result};
use crate::quad;
use crate::stats::{batch_means, linear_fit, stream};

mod bump;
mod siegel;

pub use bump::{make_bump, standard_bump, standard_kappa, BumpProfile, BumpShape, DEFAULT_LEVEL, SPECTRUM_MAX};
pub use siegel::{compute_zeros, siegel_theta, siegel_z};

/// Height of the first nontrivial zero, used to recognise a genuine table.
pub const FIRST_ZERO: f64 = 14.134_725_141_734_693;

/// ω-draws per random stream.
const OMEGA_CHAIN: usize = 256;
/// Interleaved batches for standard errors.
const BATCHES: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroTable {
    heights: Vec<f64>,
    source_path: String,
}

impl ZeroTable {
    /// Table from strictly increasing positive heights, without the
    /// first-zero gate.
    pub fn from_heights(heights: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        let source_path = source.into();
        if heights.is_empty() {
            return Err(Error::Parse { path: source_path, line: 0, msg: "no zero heights".into() });
        }
        for (i, w) in heights.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::Parse {
                    path: source_path,
                    line: i + 2,
                    msg: format!("heights not strictly increasing: {} then {}", w[0], w[1]),
                });
            }
        }
        if !(heights[0] > 0.0) {
            return Err(Error::Parse { path: source_path, line: 1, msg: "heights must be positive".into() });
        }
        Ok(Self { heights, source_path })
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn source_path(&self) -> &str {
        &self.source_path
    }

    pub fn count(&self) -> usize {
        self.heights.len()
    }

    /// N(a, b] = #{γ : a < γ ≤ b}.
    pub fn count_between(&self, a: f64, b: f64) -> usize {
        if !(b > a) {
            return 0;
        }
        self.heights.partition_point(|&g| g <= b) - self.heights.partition_point(|&g| g <= a)
    }

    fn ensure_covers(&self, lo: f64, hi: f64) -> Result<()> {
        let (first, last) = (self.heights[0], self.heights[self.heights.len() - 1]);
        if !(lo > first && hi < last) {
            return Err(Error::Coverage(format!(
                "window [{lo:.4}, {hi:.4}] is not inside the table range [{first:.4}, {last:.4}] of {}",
                self.source_path
            )));
        }
        Ok(())
    }
}

/// Reads a zero table: one decimal height per line, `#` comments allowed.
pub fn load_zeros(path: impl AsRef<Path>) -> Result<ZeroTable> {
    let path = path.as_ref();
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let mut heights = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            return Err(Error::Parse { path: shown, line: i + 1, msg: "blank line".into() });
        }
        let g: f64 = line
            .parse()
            .map_err(|_| Error::Parse { path: shown.clone(), line: i + 1, msg: format!("not a decimal number: {line:?}") })?;
        if !g.is_finite() || !(g > prev) {
            return Err(Error::Parse {
                path: shown,
                line: i + 1,
                msg: format!("height {g} does not exceed the previous {prev}"),
            });
        }
        prev = g;
        heights.push(g);
    }
    if heights.is_empty() {
        return Err(Error::Parse { path: shown, line: 0, msg: "no zero heights".into() });
    }
    if (heights[0] - FIRST_ZERO).abs() > 1e-3 {
        return Err(Error::Parse {
            path: shown,
            line: 1,
            msg: format!("first height {} is not the first zero {FIRST_ZERO:.6}", heights[0]),
        });
    }
    ZeroTable::from_heights(heights, shown)
}

/// Base interval of the indicator: [0, u] or [−1/ε, u].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StatVariant {
    Bounded,
    Unbounded,
}

impl StatVariant {
    pub fn from_index(i: u32) -> Result<Self> {
        match i {
            1 => Ok(Self::Bounded),
            2 => Ok(Self::Unbounded),
            _ => Err(Error::constraint("variant", format!("must be 1 or 2, got {i}"))),
        }
    }

    pub fn index(self) -> u32 {
        match self {
            Self::Bounded => 1,
            Self::Unbounded => 2,
        }
    }

    fn left(self, eps: f64) -> f64 {
        match self {
            Self::Bounded => 0.0,
            Self::Unbounded => -1.0 / eps,
        }
    }
}

/// (χ ⋆ φ_ε)(x) for the indicator χ of [0, u] or [−1/ε, u].
pub fn smoothed_indicator(x: f64, u: f64, eps: f64, variant: StatVariant, bump: &BumpProfile) -> f64 {
    let a = variant.left(eps);
    bump.cdf((x - a) / eps) - bump.cdf((x - u) / eps)
}

/// One smoothed indicator: base interval [left, u] smoothed at scale ε.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IndicatorSpec {
    pub u: f64,
    pub eps: f64,
    pub variant: StatVariant,
}

impl IndicatorSpec {
    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < self.u) {
            return Err(Error::constraint("eps", format!("need 0 < eps < u, got eps = {}, u = {}", self.eps, self.u)));
        }
        Ok(())
    }

    fn ends(&self) -> (f64, f64) {
        (self.variant.left(self.eps), self.u)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalarMethod {
    LogKernel,
    Fourier,
}

/// ⟨f, g⟩ by the log-kernel double integral or the (truncated) Fourier form.
pub fn scalar_product(
    f: &IndicatorSpec,
    g: &IndicatorSpec,
    method: ScalarMethod,
    cutoff: Option<f64>,
    bump: &BumpProfile,
) -> Result<f64> {
    f.validate()?;
    g.validate()?;
    if f.eps != g.eps {
        return Err(Error::constraint("eps", "both indicators must share the smoothing scale"));
    }
    let eps = f.eps;
    let (af, bf) = f.ends();
    let (ag, bg) = g.ends();
    match method {
        ScalarMethod::LogKernel => {
            let k = |s: f64| log_pair(s, eps, bump);
            let total = k(af - ag)? - k(af - bg)? - k(bf - ag)? + k(bf - bg)?;
            Ok(-total / (2.0 * PI * PI))
        }
        ScalarMethod::Fourier => {
            let w = cutoff.ok_or_else(|| Error::constraint("cutoff", "the Fourier form needs a cutoff"))?;
            if !(w > 0.0) {
                return Err(Error::constraint("cutoff", format!("must be positive, got {w}")));
            }
            let deltas = [(ag - af, -1.0), (bg - af, 1.0), (ag - bf, 1.0), (bg - bf, -1.0)];
            let vmax = (w * eps).min(SPECTRUM_MAX);
            let top = deltas.iter().map(|d| d.0.abs()).fold(0.0, f64::max);
            // panels of a quarter period of the fastest cosine in v = εw
            let panel = (PI * eps / (2.0 * top)).min(0.25);
            let n = (vmax / panel).ceil().max(1.0) as usize;
            let mut breaks: Vec<f64> = (0..n).map(|k| k as f64 * vmax / n as f64).collect();
            breaks.push(vmax);
            let mut integrand = |v: f64| {
                if v == 0.0 {
                    return 0.0;
                }
                let w = v / eps;
                let b: f64 = deltas.iter().map(|&(d, s)| s * 2.0 * (0.5 * w * d).sin().powi(2)).sum();
                bump.power_spectrum(v) * b / v
            };
            let total = quad::adaptive_breaks(&mut integrand, &breaks, 1e-13, 1e-10)?;
            Ok(total / (2.0 * PI * PI))
        }
    }
}

/// ∬ φ_ε(x) φ_ε(y) log|s + x − y| dx dy = ∫ g(d) log|s + εd| dd.
fn log_pair(s: f64, eps: f64, bump: &BumpProfile) -> Result<f64> {
    let mut f = |d: f64| bump.autocorrelation(d) * (s + eps * d).abs().ln();
    let root = -s / eps;
    let mut breaks = vec![-1.0, -0.5, 0.0, 0.5, 1.0];
    if root > -1.0 && root < 1.0 {
        for h in [1e-2, 1e-4, 1e-6, 0.0] {
            for r in [root - h, root + h] {
                if r > -1.0 && r < 1.0 {
                    breaks.push(r);
                }
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    quad::adaptive_breaks(&mut f, &breaks, 1e-13, 1e-11)
}

/// Limiting covariance of the statistics at u and v.
pub fn predicted_cov(u: f64, v: f64, eps: f64, mu: f64, kappa: f64, variant: StatVariant) -> Result<f64> {
    for (key, x) in [("u", u), ("v", v)] {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::constraint(key, format!("must lie in (0, 1), got {x}")));
        }
    }
    let le = eps.ln();
    if u == v {
        return Ok(match variant {
            StatVariant::Bounded => -2.0 * mu * (le - kappa - u.ln()),
            StatVariant::Unbounded => -mu * (4.0 * le - 2.0 * kappa),
        });
    }
    let d = (u - v).abs();
    if d <= eps {
        return Err(Error::Domain(format!("|u - v| = {d} is not large compared with eps = {eps}")));
    }
    Ok(match variant {
        StatVariant::Bounded => -mu * (le - kappa + d.ln() - u.ln() - v.ln()),
        StatVariant::Unbounded => -mu * (3.0 * le - kappa + d.ln()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpsilonRule {
    Fixed(f64),
    /// ε(t) = (λ(t)/log t)^β.
    Schedule { beta: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct StatisticConfig {
    pub variant: StatVariant,
    pub mu: f64,
    pub t0: f64,
    /// λ(t) = (log t)^α.
    pub alpha: f64,
    pub epsilon: EpsilonRule,
    /// Defaults to 64 points from 2ε to 1 − 2ε.
    pub u_grid: Option<Vec<f64>>,
    pub omega_samples: usize,
    pub seed: u64,
}

impl StatisticConfig {
    pub fn new(variant: StatVariant, mu: f64, t0: f64) -> Self {
        Self {
            variant,
            mu,
            t0,
            alpha: 0.5,
            epsilon: EpsilonRule::Schedule { beta: 0.5 },
            u_grid: None,
            omega_samples: 10_000,
            seed: 0,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.t0.ln().powf(self.alpha)
    }

    pub fn eps(&self) -> f64 {
        match self.epsilon {
            EpsilonRule::Fixed(e) => e,
            EpsilonRule::Schedule { beta } => (self.lambda() / self.t0.ln()).powf(beta),
        }
    }

    /// Rescaled-zero density log t / (2πλ).
    pub fn density(&self) -> f64 {
        self.t0.ln() / (2.0 * PI * self.lambda())
    }

    /// Truncation log t / λ of the Fourier variance.
    pub fn frequency_cutoff(&self) -> f64 {
        self.t0.ln() / self.lambda()
    }

    pub fn u_grid(&self) -> Vec<f64> {
        match &self.u_grid {
            Some(g) => g.clone(),
            None => {
                let e = self.eps();
                let (lo, hi) = (2.0 * e, 1.0 - 2.0 * e);
                (0..64).map(|k| lo + (hi - lo) * k as f64 / 63.0).collect()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu < 2.0) {
            return Err(Error::constraint("mu", format!("must lie in (0, 2), got {}", self.mu)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::constraint("alpha", format!("must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.t0 > std::f64::consts::E) || !self.t0.is_finite() {
            return Err(Error::constraint("t0", format!("must exceed e, got {}", self.t0)));
        }
        if let EpsilonRule::Schedule { beta } = self.epsilon {
            if !(beta > 0.0 && beta < 1.0) {
                return Err(Error::constraint("beta", format!("must lie in (0, 1), got {beta}")));
            }
        }
        let e = self.eps();
        if !(e > 0.0 && e < 0.25) {
            return Err(Error::constraint("epsilon", format!("smoothing scale must lie in (0, 1/4), got {e}")));
        }
        let grid = self.u_grid();
        if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|&u| !(u > e && u < 1.0)) {
            return Err(Error::constraint("u_grid", format!("need at least two increasing points in ({e}, 1)")));
        }
        if self.omega_samples < 2 * BATCHES {
            return Err(Error::constraint("omega_samples", format!("need at least {}", 2 * BATCHES)));
        }
        Ok(())
    }

    fn support(&self, u: f64) -> (f64, f64) {
        let e = self.eps();
        (self.variant.left(e) - e / 2.0, u + e / 2.0)
    }

    fn integral(&self, u: f64) -> f64 {
        u - self.variant.left(self.eps())
    }
}

/// π√(2μ) [Σ_γ f(λ(γ − ωt)) − (log t/2πλ) ∫f] at t = t0.
pub fn bkr_statistic(table: &ZeroTable, cfg: &StatisticConfig, omega: f64, u: f64) -> Result<f64> {
    cfg.validate()?;
    if !(omega > 1.0 && omega < 2.0) {
        return Err(Error::constraint("omega", format!("must lie in (1, 2), got {omega}")));
    }
    if !(u > cfg.eps() && u < 1.0) {
        return Err(Error::constraint("u", format!("must lie in (eps, 1), got {u}")));
    }
    let bump = standard_bump()?;
    Ok(statistic_row(table, cfg, omega, &[u], bump)?[0])
}

fn statistic_row(table: &ZeroTable, cfg: &StatisticConfig, omega: f64, us: &[f64], bump: &BumpProfile) -> Result<Vec<f64>> {
    let lam = cfg.lambda();
    let eps = cfg.eps();
    let centre = omega * cfg.t0;
    let umax = us.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = cfg.support(umax);
    let (glo, ghi) = (centre + lo / lam, centre + hi / lam);
    table.ensure_covers(glo, ghi)?;
    let h = table.heights();
    let first = h.partition_point(|&g| g <= glo);
    let last = h.partition_point(|&g| g < ghi);
    let xs: Vec<f64> = h[first..last].iter().map(|&g| lam * (g - centre)).collect();
    let pref = PI * (2.0 * cfg.mu).sqrt();
    let dens = cfg.density();
    Ok(us
        .iter()
        .map(|&u| {
            let sum: f64 = xs.iter().map(|&x| smoothed_indicator(x, u, eps, cfg.variant, bump)).sum();
            pref * (sum - dens * cfg.integral(u))
        })
        .collect())
}

/// Stratified ω draws: draw i lies in the i-th of n equal cells of (1, 2).
fn omega_draws(n: usize, seed: u64) -> Vec<f64> {
    let chains = n.div_ceil(OMEGA_CHAIN);
    let unit = Uniform::new(0.0f64, 1.0).expect("valid range");
    (0..chains)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = stream(seed, c as u64);
            let count = OMEGA_CHAIN.min(n - c * OMEGA_CHAIN);
            (0..count)
                .map(|k| {
                    let i = c * OMEGA_CHAIN + k;
                    let r: f64 = unit.sample(&mut rng);
                    1.0 + (i as f64 + r) / n as f64
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Statistic rows for every ω draw, in draw order.
fn statistic_rows(table: &ZeroTable, cfg: &StatisticConfig, us: &[f64]) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    let bump = standard_bump()?;
    let omegas = omega_draws(cfg.omega_samples, cfg.seed);
    omegas.par_iter().map(|&w| statistic_row(table, cfg, w, us, bump)).collect()
}

/// Mean and standard error from interleaved batches, each a stratified
/// sample of (1, 2) on its own.
fn batched(values: &[f64]) -> Estimate {
    let mut sums = [0.0; BATCHES];
    let mut counts = [0usize; BATCHES];
    for (i, &v) in values.iter().enumerate() {
        sums[i % BATCHES] += v;
        counts[i % BATCHES] += 1;
    }
    let means: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    let (_, se) = batch_means(&means);
    Estimate { value: values.iter().sum::<f64>() / values.len() as f64, stderr: se }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldStatistics {
    pub u_grid: Vec<f64>,
    pub mean: Vec<Estimate>,
    /// Row-major covariance estimates over the u grid.
    pub covariance: Vec<Vec<Estimate>>,
}

impl FieldStatistics {
    pub fn cov(&self, i: usize, j: usize) -> f64 {
        self.covariance[i][j].value
    }
}

/// Monte Carlo over ω of the statistic on the u grid.
pub fn empirical_field(table: &ZeroTable, cfg: &StatisticConfig) -> Result<FieldStatistics> {
    let us = cfg.u_grid();
    let rows = statistic_rows(table, cfg, &us)?;
    let k = us.len();
    let mean: Vec<Estimate> = (0..k).map(|i| batched(&rows.iter().map(|r| r[i]).collect::<Vec<_>>())).collect();
    let n = rows.len() as f64;
    let covariance = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let prods: Vec<f64> =
                        rows.iter().map(|r| (r[i] - mean[i].value) * (r[j] - mean[j].value) * n / (n - 1.0)).collect();
                    batched(&prods)
                })
                .collect()
        })
        .collect();
    Ok(FieldStatistics { u_grid: us, mean, covariance })
}

/// Truncated Fourier variance 2π²μ ∫_{|w| < log t/λ} |w| |f̂(w)|² dw of the
/// statistic at u.
pub fn truncated_variance(cfg: &StatisticConfig, u: f64) -> Result<f64> {
    cfg.validate()?;
    let f = IndicatorSpec { u, eps: cfg.eps(), variant: cfg.variant };
    let sp = scalar_product(&f, &f, ScalarMethod::Fourier, Some(cfg.frequency_cutoff()), standard_bump()?)?;
    Ok(2.0 * PI * PI * cfg.mu * sp)
}

/// Pair-correlation variance (μ/2) ∫ min(|w|, log t/λ) |f̂(w)|² dw at u: the
/// truncated variance plus the saturated tail above the cutoff.
pub fn saturated_variance(cfg: &StatisticConfig, u: f64) -> Result<f64> {
    let head = truncated_variance(cfg, u)?;
    let eps = cfg.eps();
    let cut = cfg.frequency_cutoff();
    let bump = standard_bump()?;
    let d = u - cfg.variant.left(eps);
    let (lo, hi) = (eps * cut, SPECTRUM_MAX);
    if lo >= hi {
        return Ok(head);
    }
    let panel = (PI * eps / (2.0 * d)).min(0.25);
    let n = ((hi - lo) / panel).ceil() as usize;
    let mut breaks: Vec<f64> = (0..n).map(|k| lo + k as f64 * (hi - lo) / n as f64).collect();
    breaks.push(hi);
    let mut integrand = |v: f64| bump.power_spectrum(v) * 4.0 * (0.5 * v / eps * d).sin().powi(2) / (v * v);
    let tail = quad::adaptive_breaks(&mut integrand, &breaks, 1e-13, 1e-10)?;
    Ok(head + cfg.mu * cut * eps * tail)
}

/// Slope and intercept of empirical against predicted covariances over
/// grid pairs with |u − v| > ε (diagonal included).
pub fn covariance_regression(field: &FieldStatistics, cfg: &StatisticConfig) -> Result<(f64, f64)> {
    let kappa = standard_kappa()?;
    let eps = cfg.eps();
    let us = &field.u_grid;
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for i in 0..us.len() {
        for j in i..us.len() {
            if i != j && (us[i] - us[j]).abs() <= eps {
                continue;
            }
            x.push(predicted_cov(us[i], us[j], eps, cfg.mu, kappa, cfg.variant)?);
            y.push(field.cov(i, j));
        }
    }
    if x.len() < 2 {
        return Err(Error::constraint("u_grid", "too few well-separated pairs for a regression"));
    }
    Ok(linear_fit(&x, &y))
}

/// Monte Carlo over ω of (∫ w(u) e^{S(u)} du)ⁿ by the trapezoid rule on the
/// u grid, with w(u) = u^{−μn} for the bounded statistic and 1 for the
/// unbounded one; optionally times the rescaling e^{μ(log ε − κ)n(n+1)/2}
/// (and e^{μ n² log ε} for the unbounded statistic).
pub fn exp_functional_moment(table: &ZeroTable, cfg: &StatisticConfig, n: u32, rescaled: bool) -> Result<Estimate> {
    cfg.validate()?;
    let tau = 2.0 / cfg.mu;
    if n == 0 {
        return Err(Error::constraint("n", "moment order must be a positive integer"));
    }
    if n as f64 >= tau {
        return Err(Error::MomentDivergence { n: n as f64, tau });
    }
    let nf = n as f64;
    let us = cfg.u_grid();
    let weights: Vec<f64> = us
        .iter()
        .map(|&u| match cfg.variant {
            StatVariant::Bounded => u.powf(-cfg.mu * nf),
            StatVariant::Unbounded => 1.0,
        })
        .collect();
    let rows = statistic_rows(table, cfg, &us)?;
    let le = cfg.eps().ln();
    let mut log_scale = 0.0;
    if rescaled {
        log_scale = cfg.mu * (le - standard_kappa()?) * nf * (nf + 1.0) / 2.0;
        if cfg.variant == StatVariant::Unbounded {
            log_scale += cfg.mu * le * nf * nf;
        }
    }
    let values: Vec<f64> = rows
        .iter()
        .map(|r| {
            let f: Vec<f64> = r.iter().zip(&weights).map(|(s, w)| w * s.exp()).collect();
            let integral: f64 = (1..us.len()).map(|k| 0.5 * (f[k] + f[k - 1]) * (us[k] - us[k - 1])).sum();
            (nf * integral.ln() + log_scale).exp()
        })
        .collect();
    Ok(batched(&values))
}
