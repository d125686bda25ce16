//! Hardy's Z function by the Riemann–Siegel formula, and a zero finder.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Even Taylor coefficients of Ψ(p) = cos(2π(p² − p − 1/16)) / cos(2πp)
/// about p = 1/2, in powers of (p − 1/2)^{2k}.
const PSI: [f64; 35] = [
    0.3826834323650898,
    1.7489618723100817,
    2.118025207685496,
    -0.8707216670511481,
    -3.4733112243465167,
    -1.6626947308999325,
    1.216731288919232,
    1.3014304161007977,
    0.03051102182736167,
    -0.3755803051545095,
    -0.1085784416564066,
    0.051832902999549624,
    0.029999480619902277,
    -0.0022759396706125644,
    -0.004382647416580339,
    -0.0004064230183729847,
    0.0004006097785422114,
    8.971057991388841e-05,
    -2.3025650027239108e-05,
    -9.380006601906792e-06,
    6.323514947609108e-07,
    6.551022819231502e-07,
    2.210523745552697e-08,
    -3.322316176445629e-08,
    -3.734910989933656e-09,
    1.2445067060797738e-09,
    2.476820537650219e-10,
    -3.284272816891627e-11,
    -1.1305406852298404e-11,
    4.565463979588694e-13,
    3.9598480945249214e-13,
    7.849566221259617e-15,
    -1.1059043150991233e-14,
    -7.738543987641508e-16,
    2.4857755550271373e-16
];

/// d^k Ψ / dp^k at p = 1/2 + x.
fn psi_derivative(x: f64, k: usize) -> f64 {
    let mut acc = 0.0;
    for (i, &c) in PSI.iter().enumerate().rev() {
        let n = 2 * i;
        if n < k {
            break;
        }
        let mut fall = 1.0;
        for j in 0..k {
            fall *= (n - j) as f64;
        }
        acc += c * fall * x.powi((n - k) as i32);
    }
    acc
}

/// Riemann–Siegel theta function.
pub fn siegel_theta(t: f64) -> f64 {
    let t2 = t * t;
    0.5 * t * (t / (2.0 * PI)).ln() - 0.5 * t - PI / 8.0
        + 1.0 / (48.0 * t)
        + 7.0 / (5760.0 * t * t2)
        + 31.0 / (80640.0 * t * t2 * t2)
}

/// Z(t) = e^{iθ(t)} ζ(1/2 + it) with four remainder terms; meant for t ≥ 10.
pub fn siegel_z(t: f64) -> f64 {
    let a = (t / (2.0 * PI)).sqrt();
    let n = a.floor() as usize;
    let theta = siegel_theta(t);
    let mut main = 0.0;
    for k in 1..=n {
        let kf = k as f64;
        main += (theta - t * kf.ln()).cos() / kf.sqrt();
    }
    let x = a - n as f64 - 0.5;
    let (p2, p4, p6) = (PI * PI, PI.powi(4), PI.powi(6));
    let d = |k| psi_derivative(x, k);
    let c0 = d(0);
    let c1 = -d(3) / (96.0 * p2);
    let c2 = d(2) / (64.0 * p2) + d(6) / (18432.0 * p4);
    let c3 = -d(1) / (64.0 * p2) - d(5) / (3840.0 * p4) - d(9) / (5308416.0 * p6);
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    2.0 * main + sign * a.powf(-0.5) * (c0 + (c1 + (c2 + c3 / a) / a) / a)
}

/// Heights of the first `count` zeros on the critical line, located by sign
/// changes of Z on a grid of spacing `step` and refined by bisection-secant.
pub fn compute_zeros(count: usize, step: f64) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::constraint("count", "must be at least 1"));
    }
    if !(step > 0.0 && step < 0.1) {
        return Err(Error::constraint("step", format!("must lie in (0, 0.1), got {step}")));
    }
    // N(T) ≈ θ(T)/π + 1; scan a little past the expected height
    let mut top = 20.0f64;
    while siegel_theta(top) / PI + 1.0 < count as f64 + 20.0 {
        top *= 1.1;
    }
    let start = 10.0;
    let block = 50.0;
    let blocks = ((top - start) / block).ceil() as usize;
    let found: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let lo = start + b as f64 * block;
            let steps = (block / step).round() as usize;
            let mut out = Vec::new();
            let mut prev: Option<(f64, f64)> = None;
            let mut t0 = lo;
            let mut z0 = siegel_z(t0);
            for i in 1..=steps {
                let t1 = lo + i as f64 * step;
                let z1 = siegel_z(t1);
                if z0 == 0.0 {
                    out.push(t0);
                } else if z0 * z1 < 0.0 {
                    out.push(refine(t0, t1, z0, z1));
                } else if let Some((tp, zp)) = prev {
                    // |Z| dipping without a sign change may hide a close pair
                    if zp * z0 > 0.0 && z0.abs() < zp.abs() && z0.abs() < z1.abs() {
                        out.extend(close_pair(tp, t1));
                    }
                }
                prev = Some((t0, z0));
                t0 = t1;
                z0 = z1;
            }
            out
        })
        .collect();
    let zeros: Vec<f64> = found.into_iter().flatten().take(count).collect();
    if zeros.len() < count {
        return Err(Error::Coverage(format!("found only {} zeros below {top:.1}", zeros.len())));
    }
    Ok(zeros)
}

/// Sign changes of Z on a fine grid over [a, b].
fn close_pair(a: f64, b: f64) -> Vec<f64> {
    const FINE: usize = 64;
    let h = (b - a) / FINE as f64;
    let mut out = Vec::new();
    let mut z0 = siegel_z(a);
    for i in 1..=FINE {
        let (t0, t1) = (a + (i - 1) as f64 * h, a + i as f64 * h);
        let z1 = siegel_z(t1);
        if z0 * z1 < 0.0 {
            out.push(refine(t0, t1, z0, z1));
        }
        z0 = z1;
    }
    out
}

/// Illinois variant of regula falsi on a bracketing interval.
fn refine(mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> f64 {
    for _ in 0..200 {
        if (b - a).abs() < 1e-11 {
            break;
        }
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = siegel_z(c);
        if fc == 0.0 {
            return c;
        }
        if fc * fb < 0.0 {
            a = b;
            fa = fb;
        } else {
            fa *= 0.5;
        }
        b = c;
        fb = fc;
    }
    0.5 * (a + b)
}
