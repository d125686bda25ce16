//! Quadrature rules shared by the formula and oracle code.

use std::num::NonZeroUsize;
use std::ops::{Add, Mul, Sub};

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sum::Magnitude;

/// Values that can be integrated: real or complex.
pub trait QuadValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Magnitude
{
}

impl QuadValue for f64 {}
impl QuadValue for Complex64 {}

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(n.max(1)).expect("nonzero");
    GaussLegendre::new(n).as_node_weight_pairs().to_vec()
}

/// Apply a [-1, 1] rule on [a, b].
pub fn integrate_rule<T: QuadValue>(rule: &[(f64, f64)], a: f64, b: f64, mut f: impl FnMut(f64) -> T) -> T {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let mut acc = T::default();
    for &(x, w) in rule {
        acc = acc + f(mid + half * x) * (w * half);
    }
    acc
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<T: QuadValue>(f: &mut impl FnMut(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let fc = f(mid);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(mid - dx) + f(mid + dx);
        kron = kron + s * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + s * WG[j / 2];
        }
    }
    let k = kron * half;
    let g = gauss * half;
    (k, (k - g).magnitude())
}

/// Globally adaptive Gauss–Kronrod (7/15) integration of f over [a, b].
pub fn adaptive<T: QuadValue>(
    mut f: impl FnMut(f64) -> T,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<T> {
    adaptive_breaks(&mut f, &[a, b], abs_tol, rel_tol)
}

/// Adaptive integration over consecutive panels given by `breaks`.
pub fn adaptive_breaks<T: QuadValue>(
    f: &mut impl FnMut(f64) -> T,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<T> {
    const MAX_INTERVALS: usize = 4000;
    let mut pieces: Vec<(f64, f64, T, f64)> = breaks
        .windows(2)
        .map(|w| {
            let (v, e) = gk15(f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let total = pieces.iter().fold(T::default(), |acc, p| acc + p.2);
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.magnitude()) {
            return Ok(total);
        }
        if pieces.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature(format!(
                "error estimate {err:.3e} after {MAX_INTERVALS} panels on [{}, {}]",
                breaks[0],
                breaks[breaks.len() - 1]
            )));
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (a, b, _, _) = pieces.swap_remove(idx);
        let m = 0.5 * (a + b);
        if !(m > a && m < b) {
            return Err(Error::Quadrature(format!("panel [{a}, {b}] cannot be split further")));
        }
        let (v1, e1) = gk15(f, a, m);
        let (v2, e2) = gk15(f, m, b);
        pieces.push((a, m, v1, e1));
        pieces.push((m, b, v2, e2));
    }
}

/// Tanh–sinh rule on [a, b] for integrands with endpoint singularities.
///
/// The integrand receives the abscissa and its distances to a and b, which
/// stay accurate near the endpoints.
pub fn tanh_sinh<T: QuadValue>(
    mut f: impl FnMut(f64, f64, f64) -> T,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<T> {
    use std::f64::consts::FRAC_PI_2;
    let len = b - a;
    let half = 0.5 * len;
    let tmax = 6.5;
    let mut h = 0.5;
    let mut eval = |t: f64| -> T {
        let s = FRAC_PI_2 * t.sinh();
        let c = FRAC_PI_2 * t.cosh();
        // distance to the nearer endpoint = len / (1 + e^{2|s|})
        let e = (-2.0 * s.abs()).exp();
        let near = len * e / (1.0 + e);
        let far = len - near;
        let w = half * c * 2.0 * e / ((1.0 + e) * (1.0 + e)) * 2.0;
        if near <= 0.0 || w == 0.0 {
            return T::default();
        }
        let (da, db) = if t < 0.0 { (near, far) } else { (far, near) };
        f(a + da, da, db) * w
    };
    let mut sum = eval(0.0);
    let mut k = 1;
    while (k as f64) * h <= tmax {
        let t = k as f64 * h;
        sum = sum + eval(t) + eval(-t);
        k += 1;
    }
    let mut prev = sum * h;
    for _level in 0..10 {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= tmax {
            let t = k as f64 * h;
            sum = sum + eval(t) + eval(-t);
            k += 2;
        }
        let cur = sum * h;
        if (cur - prev).magnitude() <= rel_tol * cur.magnitude().max(1e-300) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Quadrature(format!("tanh-sinh on [{a}, {b}] did not reach {rel_tol:e}")))
}
