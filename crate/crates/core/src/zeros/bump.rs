use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quad;

/// Default quadrature level of the bump constants.
pub const DEFAULT_LEVEL: u32 = 2;

const CDF_CELLS: usize = 4096;
const CORR_CELLS: usize = 4096;
/// Spacing in v of the tabulated |φ̂(v)|².
const SPECTRUM_STEP: f64 = 0.02;
/// |φ̂(v)|² is below 1e-20 past this frequency for the standard mollifier.
pub const SPECTRUM_MAX: f64 = 1000.0;

#[derive(Clone, Debug, PartialEq)]
pub enum BumpShape {
    /// exp(−1/(1 − 4x²)) on (−1/2, 1/2).
    StandardMollifier,
    /// Values at equally spaced points of [−1/2, 1/2], endpoints included,
    /// joined linearly; rescaled to unit mass.
    Custom(Vec<f64>),
}

/// A smooth bump φ supported on (−1/2, 1/2) with ∫φ = 1, with its CDF, its
/// autocorrelation g(d) = ∫φ(x)φ(x+d)dx and κ = −∬φ(x)φ(y) log|x−y|.
#[derive(Clone, Debug)]
pub struct BumpProfile {
    shape: BumpShape,
    normalization: f64,
    kappa: f64,
    level: u32,
    cdf: Vec<f64>,
    corr: Vec<f64>,
    spectrum: OnceLock<Vec<f64>>,
}

impl BumpProfile {
    pub fn shape(&self) -> &BumpShape {
        &self.shape
    }

    /// The constant C with φ = C·(unnormalized shape).
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn quadrature_level(&self) -> u32 {
        self.level
    }

    pub fn phi(&self, x: f64) -> f64 {
        self.normalization * raw_shape(&self.shape, x)
    }

    /// ∫_{−1/2}^{x} φ.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= -0.5 {
            return 0.0;
        }
        if x >= 0.5 {
            return 1.0;
        }
        let h = 1.0 / CDF_CELLS as f64;
        let pos = (x + 0.5) / h;
        let i = (pos.floor() as usize).min(CDF_CELLS - 1);
        let s = pos - i as f64;
        let (x0, x1) = (-0.5 + i as f64 * h, -0.5 + (i + 1) as f64 * h);
        // cubic Hermite with the density as slope
        let (f0, f1) = (self.cdf[i], self.cdf[i + 1]);
        let (d0, d1) = (self.phi(x0) * h, self.phi(x1) * h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * f0 + (s3 - 2.0 * s2 + s) * d0 + (-2.0 * s3 + 3.0 * s2) * f1 + (s3 - s2) * d1
    }

    /// g(d) = ∫φ(x)φ(x+d)dx, the density of Y − X for independent X, Y ~ φ.
    pub fn autocorrelation(&self, d: f64) -> f64 {
        if !(d > -1.0 && d < 1.0) {
            return 0.0;
        }
        let h = 2.0 / CORR_CELLS as f64;
        let pos = (d + 1.0) / h;
        let i = (pos.floor() as usize).clamp(1, CORR_CELLS - 2);
        let s = pos - i as f64;
        let (a, b, c, e) = (self.corr[i - 1], self.corr[i], self.corr[i + 1], self.corr[i + 2]);
        // four-point Lagrange on nodes i−1..i+2
        -s * (s - 1.0) * (s - 2.0) / 6.0 * a + (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0 * b
            - (s + 1.0) * s * (s - 2.0) / 2.0 * c
            + (s + 1.0) * s * (s - 1.0) / 6.0 * e
    }

    /// φ̂(v) = ∫ φ(x) e^{−ivx} dx.
    pub fn fourier(&self, v: f64) -> Complex64 {
        let panels = 16 + (v.abs() / 4.0).ceil() as usize;
        let rule = quad::gauss_legendre(16);
        let h = 1.0 / panels as f64;
        let mut acc = Complex64::default();
        for k in 0..panels {
            let a = -0.5 + k as f64 * h;
            acc += quad::integrate_rule(&rule, a, a + h, |x| Complex64::from_polar(self.phi(x), -v * x));
        }
        acc
    }

    /// |φ̂(v)|² from a table on [0, SPECTRUM_MAX], zero beyond.
    pub fn power_spectrum(&self, v: f64) -> f64 {
        let v = v.abs();
        if v >= SPECTRUM_MAX {
            return 0.0;
        }
        let table = self.spectrum.get_or_init(|| {
            let n = (SPECTRUM_MAX / SPECTRUM_STEP).round() as usize + 3;
            (0..n).into_par_iter().map(|k| self.fourier(k as f64 * SPECTRUM_STEP).norm_sqr()).collect()
        });
        let pos = v / SPECTRUM_STEP;
        let i = (pos.floor() as usize).clamp(1, table.len() - 3);
        let s = pos - i as f64;
        let (a, b, c, e) = (table[i - 1], table[i], table[i + 1], table[i + 2]);
        -s * (s - 1.0) * (s - 2.0) / 6.0 * a + (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0 * b
            - (s + 1.0) * s * (s - 2.0) / 2.0 * c
            + (s + 1.0) * s * (s - 1.0) / 6.0 * e
    }
}

fn raw_shape(shape: &BumpShape, x: f64) -> f64 {
    if !(x > -0.5 && x < 0.5) {
        return 0.0;
    }
    match shape {
        BumpShape::StandardMollifier => (-1.0 / (1.0 - 4.0 * x * x)).exp(),
        BumpShape::Custom(v) => {
            let n = v.len() - 1;
            let pos = (x + 0.5) * n as f64;
            let i = (pos.floor() as usize).min(n - 1);
            let s = pos - i as f64;
            v[i] * (1.0 - s) + v[i + 1] * s
        }
    }
}

fn knots(shape: &BumpShape) -> Vec<f64> {
    match shape {
        BumpShape::StandardMollifier => vec![-0.5, -0.25, 0.0, 0.25, 0.5],
        BumpShape::Custom(v) => {
            let n = v.len() - 1;
            (0..=n).map(|k| -0.5 + k as f64 / n as f64).collect()
        }
    }
}

pub fn make_bump(shape: BumpShape, quadrature_level: u32) -> Result<BumpProfile> {
    if let BumpShape::Custom(v) = &shape {
        if v.len() < 3 {
            return Err(Error::constraint("shape", "custom bump needs at least 3 values"));
        }
        if v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || v[0] != 0.0 || v[v.len() - 1] != 0.0 {
            return Err(Error::constraint("shape", "custom bump values must be nonnegative and vanish at ±1/2"));
        }
    }
    let tol = 10f64.powi(-(9 + quadrature_level.min(5) as i32));
    let brk = knots(&shape);
    let mass = quad::adaptive_breaks(&mut |x| raw_shape(&shape, x), &brk, 1e-16, 1e-15)?;
    if !(mass > 0.0) {
        return Err(Error::constraint("shape", "bump has zero mass"));
    }
    let c = 1.0 / mass;
    let phi = |x: f64| c * raw_shape(&shape, x);

    let h = 1.0 / CDF_CELLS as f64;
    let cells = (0..CDF_CELLS)
        .into_par_iter()
        .map(|i| {
            let a = -0.5 + i as f64 * h;
            quad::adaptive(phi, a, a + h, 1e-18, 1e-14)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut cdf = Vec::with_capacity(CDF_CELLS + 1);
    let mut run = 0.0;
    cdf.push(0.0);
    for m in cells {
        run += m;
        cdf.push(run);
    }

    let corr_at = |d: f64, tol: f64| -> Result<f64> {
        let (lo, hi) = ((-0.5f64).max(-0.5 - d), 0.5f64.min(0.5 - d));
        if !(hi > lo) {
            return Ok(0.0);
        }
        let mut pts = vec![lo];
        pts.extend(brk.iter().copied().filter(|&k| k > lo && k < hi));
        pts.push(hi);
        quad::adaptive_breaks(&mut |x| phi(x) * phi(x + d), &pts, tol * 1e-3, tol)
    };
    let hc = 2.0 / CORR_CELLS as f64;
    let corr = (0..=CORR_CELLS)
        .into_par_iter()
        .map(|k| corr_at(-1.0 + k as f64 * hc, 1e-13))
        .collect::<Result<Vec<_>>>()?;

    // κ = −∫ g(d) log|d| dd, split at the diagonal d = 0
    let mut breaks = vec![0.0];
    let mut x = 1e-8;
    while x < 1.0 {
        breaks.push(x);
        x *= 10.0;
    }
    breaks.push(1.0);
    let mut inner_err = None;
    let mut side = |sign: f64| -> Result<f64> {
        quad::adaptive_breaks(
            &mut |d: f64| match corr_at(sign * d, tol) {
                Ok(g) => -g * d.ln(),
                Err(e) => {
                    inner_err.get_or_insert(e);
                    0.0
                }
            },
            &breaks,
            tol,
            tol,
        )
    };
    let kappa = side(1.0)? + side(-1.0)?;
    if let Some(e) = inner_err {
        return Err(e);
    }
    if !kappa.is_finite() {
        return Err(Error::Quadrature("kappa is not finite".into()));
    }
    Ok(BumpProfile { shape, normalization: c, kappa, level: quadrature_level, cdf, corr, spectrum: OnceLock::new() })
}

/// The standard mollifier at the default level, built once.
pub fn standard_bump() -> Result<&'static BumpProfile> {
    static BUMP: OnceLock<BumpProfile> = OnceLock::new();
    if let Some(b) = BUMP.get() {
        return Ok(b);
    }
    let b = make_bump(BumpShape::StandardMollifier, DEFAULT_LEVEL)?;
    Ok(BUMP.get_or_init(|| b))
}

/// κ of the standard mollifier.
pub fn standard_kappa() -> Result<f64> {
    Ok(standard_bump()?.kappa())
}
