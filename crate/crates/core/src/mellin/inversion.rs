use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::selberg::ChaosParams;
use crate::specfun::DoubleGammaContext;

use super::{decomposition, log_mellin_m_ctx};

/// Contour abscissa c = min(1/2, τ/2).
pub fn default_contour(p: &ChaosParams) -> f64 {
    0.5f64.min(p.tau() / 2.0)
}

/// Allowed |∫p − 1| on the canonical grid.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-3;

/// Decay of log|𝔐(c+it)| below log 𝔐(c) at which the contour is cut.
const CUTOFF_DROP: f64 = 40.0;

/// 𝔐 sampled at c + ikh, k = 0..n.
struct Contour {
    c: f64,
    h: f64,
    values: Vec<Complex64>,
}

impl Contour {
    fn new(p: &ChaosParams, c: f64, quad_points: usize) -> Result<Self> {
        if !(c < p.tau()) || !c.is_finite() {
            return Err(Error::constraint("contour_c", format!("must be below tau = {}, got {c}", p.tau())));
        }
        if quad_points < 16 {
            return Err(Error::constraint("quad_points", format!("must be at least 16, got {quad_points}")));
        }
        let ctx = DoubleGammaContext::new(p.tau())?;
        let at = |t: f64| log_mellin_m_ctx(Complex64::new(c, t), p, &ctx);
        let base = at(0.0)?.re;
        let mut t = 0.0;
        loop {
            t += 0.25;
            if at(t)?.re < base - CUTOFF_DROP {
                break;
            }
            if t > 1e4 {
                return Err(Error::Quadrature(format!("Mellin transform does not decay along Re(q) = {c}")));
            }
        }
        let h = t / quad_points as f64;
        let values = (0..=quad_points)
            .into_par_iter()
            .map(|k| at(k as f64 * h).map(|l| l.exp()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { c, h, values })
    }

    /// p(x) = x^{−c−1}/π · h[½g(0) + Σ g(t_k)], g(t) = Re[𝔐(c+it) e^{−it log x}].
    fn density(&self, x: f64) -> f64 {
        let lx = x.ln();
        let step = Complex64::from_polar(1.0, -self.h * lx);
        let mut rot = Complex64::new(1.0, 0.0);
        let mut sum = 0.5 * self.values[0].re;
        for v in &self.values[1..] {
            rot *= step;
            sum += (v * rot).re;
        }
        (-(self.c + 1.0) * lx).exp() / std::f64::consts::PI * self.h * sum
    }

    fn moments(&self, p: &ChaosParams) -> Result<DensityMoments> {
        let (u, du) = canonical_grid(p)?;
        let dens: Vec<f64> = u.par_iter().map(|&u| self.density(u.exp())).collect();
        let mut m = [0.0f64; 3];
        for (&ui, &d) in u.iter().zip(&dens) {
            for (k, mk) in m.iter_mut().enumerate() {
                *mk += d * ((k as f64 + 1.0) * ui).exp() * du;
            }
        }
        let t = p.tau();
        Ok(DensityMoments {
            integral: m[0],
            mean: (t > 1.0).then_some(m[1]),
            second: (t > 2.0).then_some(m[2]),
            x_max: u.last().copied().unwrap_or(0.0).exp(),
            grid_points: u.len(),
        })
    }
}

/// Log-spaced grid u = log x covering the bulk and the heavy right tail.
fn canonical_grid(p: &ChaosParams) -> Result<(Vec<f64>, f64)> {
    let f = decomposition(p)?;
    let sigma = f.lognormal_variance.sqrt();
    let centre = f.constant.ln();
    let lo = centre - 10.0 * sigma - 2.0;
    // P(M > x) decays like x^{−τ}; 16/τ leaves far less than 1e-6 beyond
    let hi = centre + 10.0 * sigma + 3.0 + 16.0 / p.tau();
    let du = 0.02f64.min(sigma / 40.0);
    let n = ((hi - lo) / du).ceil() as usize;
    Ok(((0..=n).map(|k| lo + k as f64 * du).collect(), du))
}

/// Density of M on `x_grid` by numerical Mellin inversion along Re(q) = c.
pub fn density_by_inversion(p: &ChaosParams, x_grid: &[f64], contour_c: f64, quad_points: usize) -> Result<Vec<f64>> {
    if let Some(bad) = x_grid.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return Err(Error::constraint("x_grid", format!("points must be positive and finite, got {bad}")));
    }
    if x_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::constraint("x_grid", "points must be strictly increasing"));
    }
    let contour = Contour::new(p, contour_c, quad_points)?;
    let m = contour.moments(p)?;
    check_normalization(&m)?;
    Ok(x_grid.par_iter().map(|&x| contour.density(x).max(0.0)).collect())
}

fn check_normalization(m: &DensityMoments) -> Result<()> {
    if !((m.integral - 1.0).abs() <= NORMALIZATION_TOLERANCE) {
        return Err(Error::Quadrature(format!(
            "inverted density integrates to {:.6} over (0, {:.3e})",
            m.integral, m.x_max
        )));
    }
    Ok(())
}

/// Integral, mean and second moment of the inverted density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMoments {
    pub integral: f64,
    /// None when the moment diverges (τ ≤ 1).
    pub mean: Option<f64>,
    /// None when τ ≤ 2.
    pub second: Option<f64>,
    pub x_max: f64,
    pub grid_points: usize,
}

pub fn density_moments(p: &ChaosParams, contour_c: f64, quad_points: usize) -> Result<DensityMoments> {
    let m = Contour::new(p, contour_c, quad_points)?.moments(p)?;
    check_normalization(&m)?;
    Ok(m)
}
