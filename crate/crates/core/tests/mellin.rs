use std::time::Instant;

use chaoslab::mellin::{
    asymptotic_log_m, barnes_beta_lk_log, barnes_beta_log_mellin, barnes_beta_mellin, decomposition,
    decomposition_mellin, default_contour, density_by_inversion, density_moments, evaluate, frechet_mellin,
    functional_equation_residuals, intermittency_coefficient, levy_density, levy_density_from_factors, lk_spectral,
    log_mellin_m, log_mellin_m_product, mellin_m, mellin_m_product, spectral_forms, BarnesBetaParams,
    BarnesBetaTable, LevyKhinchineData, MellinQuery, Route, SelbergSampler,
};
use chaoslab::selberg::{mass_moment_neg, selberg_closed, ChaosParams, Variant};
use chaoslab::specfun::ln_gamma;
use chaoslab::stats::Welford;
use chaoslab::Error;
use num_complex::Complex64;

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn params(mu: f64) -> ChaosParams {
    ChaosParams::with_mu(mu).unwrap()
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

/// 50 parameter tuples with real and complex q inside the Mellin strip.
fn grid() -> Vec<(Complex64, ChaosParams)> {
    let mus = [0.1, 0.25, 0.4, 0.5, 0.75, 1.0, 1.3, 1.6, 0.05, 0.3];
    let lams = [(0.0, 0.0), (0.3, 0.0), (-0.1, 0.4), (1.0, 0.5), (0.2, 0.2)];
    let mut out = Vec::new();
    for (i, &mu) in mus.iter().enumerate() {
        for (j, &(l1, l2)) in lams.iter().enumerate() {
            let tau = 2.0 / mu;
            // keep every λ above −1/τ
            let l1 = f64::max(l1, -0.5 / tau);
            let p = ChaosParams::new(mu, l1, l2).unwrap();
            let k = (i * 5 + j) as f64;
            let re = -2.5 + (k * 0.37) % (tau.min(4.0) + 2.3);
            let im = if j % 2 == 0 { 0.0 } else { ((k * 0.61) % 5.0) - 2.5 };
            out.push((cx(re, im), p));
        }
    }
    assert_eq!(out.len(), 50);
    out
}

#[test]
fn mellin_examples() {
    let p = params(0.5);
    assert!((mellin_m(cx(0.0, 0.0), &p).unwrap() - 1.0).norm() < 1e-14);
    assert!((mellin_m(cx(1.0, 0.0), &p).unwrap() - 1.0).norm() < 1e-12);
    assert!((mellin_m(cx(2.0, 0.0), &p).unwrap() - 8.0 / 3.0).norm() < 1e-10);
    let q = cx(0.7, 1.9);
    let p = ChaosParams::new(0.35, 0.2, -0.05).unwrap();
    let a = mellin_m(q, &p).unwrap();
    let b = mellin_m(q.conj(), &p).unwrap();
    assert!((a.conj() - b).norm() < 1e-13 * a.norm());
}

#[test]
fn mellin_domain() {
    let p = params(0.5);
    assert!(matches!(mellin_m(cx(4.0, 0.0), &p), Err(Error::Domain(_))));
    assert!(matches!(mellin_m(cx(4.5, 1.0), &p), Err(Error::Domain(_))));
    assert!(matches!(mellin_m_product(cx(4.0, 0.0), &p, 256, 12), Err(Error::Domain(_))));
    assert!(matches!(mellin_m_product(cx(1.0, 0.0), &p, 4, 12), Err(Error::Constraint { key: "product_terms", .. })));
}

#[test]
fn product_route_examples() {
    let one = mellin_m_product(cx(0.0, 0.0), &params(0.5), 256, 12).unwrap();
    assert!((one - 1.0).norm() < 1e-12);
    let m1 = mellin_m_product(cx(1.0, 0.0), &params(0.5), 256, 12).unwrap();
    assert!((m1 - 1.0).norm() < 1e-8, "{m1}");
    let m2 = mellin_m_product(cx(2.0, 0.0), &params(0.3), 256, 12).unwrap();
    let exact = 2.0 / (0.7 * 1.7);
    assert!((m2.re - exact).abs() < 1e-8, "{m2} vs {exact}");
    let (_, change) = log_mellin_m_product(cx(2.0, 0.0), &params(0.3), 256, 12).unwrap();
    assert!(change < 1e-8);
}

#[test]
fn evaluate_reports_route() {
    let q = MellinQuery::new(cx(1.5, 0.5), ChaosParams::new(0.4, 0.1, 0.3).unwrap());
    let a = evaluate(&q).unwrap();
    let b = evaluate(&q.route(Route::GammaProduct)).unwrap();
    assert_eq!(a.route, Route::DoubleGamma);
    assert_eq!(b.product_terms, Some(256));
    assert!(rel(b.value, a.value) < 1e-8);
}

#[test]
fn routes_agree_on_grid() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (q, p) in grid() {
        let a = mellin_m(q, &p).unwrap();
        let b = mellin_m_product(q, &p, 256, 12).unwrap();
        let r = rel(b, a);
        assert!(r < 1e-8, "q {q} mu {} l ({}, {}): {a} vs {b}", p.mu(), p.lambda1(), p.lambda2());
        worst = worst.max(r);
    }
    eprintln!("route agreement: worst {worst:.2e} in {:?}", start.elapsed());
}

#[test]
fn integer_moments_match_closed_forms() {
    for &mu in &[0.1, 0.2, 0.3, 0.5, 0.6, 0.9] {
        for &(l1, l2) in &[(0.0, 0.0), (0.4, 0.1), (-0.02, 0.7)] {
            let p = ChaosParams::new(mu, l1, l2).unwrap();
            for n in 1..=3u32 {
                if (n as f64) < p.tau() {
                    let exact = selberg_closed(n, &p).unwrap();
                    let m = mellin_m(cx(n as f64, 0.0), &p).unwrap();
                    assert!((m.re - exact).abs() < 1e-10 * exact, "mu {mu} n {n}: {m} vs {exact}");
                    assert!(m.im.abs() < 1e-12 * exact);
                }
            }
            for n in 1..=2u32 {
                let exact = mass_moment_neg(n, &p, Variant::Plain).unwrap();
                let m = mellin_m(cx(-(n as f64), 0.0), &p).unwrap();
                assert!((m.re - exact).abs() < 1e-10 * exact, "mu {mu} n -{n}: {m} vs {exact}");
            }
        }
    }
    for &mu in &[0.2, 0.3, 0.5] {
        let m = mellin_m(cx(2.0, 0.0), &params(mu)).unwrap();
        let exact = 2.0 / ((1.0 - mu) * (2.0 - mu));
        assert!((m.re - exact).abs() < 1e-10 * exact);
    }
}

#[test]
fn functional_equations() {
    let (r1, r2) = functional_equation_residuals(cx(0.5, 0.0), &params(0.5)).unwrap();
    assert!(r1 < 1e-8 && r2 < 1e-8, "{r1} {r2}");
    let p = ChaosParams::new(0.4, 0.2, 0.0).unwrap();
    let (r1, r2) = functional_equation_residuals(cx(1.0, 0.7), &p).unwrap();
    assert!(r1 < 1e-8 && r2 < 1e-8, "{r1} {r2}");
    for (q, p) in grid() {
        // the τ-shift needs q − τ inside the strip, which always holds
        let (r1, r2) = functional_equation_residuals(q, &p).unwrap();
        assert!(r1 < 1e-8 && r2 < 1e-8, "q {q} mu {}: {r1} {r2}", p.mu());
    }
}

#[test]
fn negative_first_moment_from_shift() {
    let p = params(0.5);
    let m = mellin_m(cx(-1.0, 0.0), &p).unwrap().re;
    let exact = mass_moment_neg(1, &p, Variant::Plain).unwrap();
    assert!((m - exact).abs() < 1e-10);
    assert!((m - 2.399).abs() < 5e-4, "{m}");
}

#[test]
fn decomposition_matches_mellin() {
    assert!((decomposition_mellin(cx(0.0, 0.0), &params(0.5)).unwrap() - 1.0).norm() < 1e-13);
    assert!((decomposition_mellin(cx(1.0, 0.0), &params(0.5)).unwrap() - 1.0).norm() < 1e-8);
    assert!((decomposition_mellin(cx(2.0, 0.0), &params(0.5)).unwrap() - 8.0 / 3.0).norm() < 1e-8);
    for (q, p) in grid() {
        let a = mellin_m(q, &p).unwrap();
        let b = decomposition_mellin(q, &p).unwrap();
        assert!(rel(b, a) < 1e-8, "q {q} mu {}: {a} vs {b}", p.mu());
    }
}

#[test]
fn decomposition_factors() {
    let p = params(0.5);
    let f = decomposition(&p).unwrap();
    assert!(f.x1.is_none());
    assert_eq!(f.lognormal_variance, 4.0 * 2f64.ln() / 4.0);
    assert!(f.constant > 0.0);
    let p = ChaosParams::new(0.5, 0.1, 0.3).unwrap();
    let f = decomposition(&p).unwrap();
    let x1 = f.x1.unwrap();
    assert!((x1.b0() - (1.0 + 4.0 + 0.4)).abs() < 1e-14);
    assert!((x1.b1() - 0.4).abs() < 1e-14 && (x1.b2() - 0.4).abs() < 1e-14);
}

/// η(q) as the double product, inner n₁ product in closed form by log Γ,
/// outer n₂ truncated at N and Richardson-extrapolated over N, 2N, 4N.
fn eta_double_product(q: f64, tau: f64, b: (f64, f64, f64)) -> f64 {
    let (b0, b1, b2) = b;
    let inner = |x: f64| -> f64 {
        let g = |a: f64| ln_gamma(a + x).unwrap();
        g(q + b0) + g(b0 + b1) + g(b0 + b2) + g(q + b0 + b1 + b2)
            - g(b0)
            - g(q + b0 + b1)
            - g(q + b0 + b2)
            - g(b0 + b1 + b2)
    };
    let partial = |n: usize| -> f64 { (0..=n).map(|k| inner(k as f64 * tau)).sum() };
    let (s1, s2, s4) = (partial(500), partial(1000), partial(2000));
    (s1 / 3.0 - 2.0 * s2 + 8.0 * s4 / 3.0).exp()
}

#[test]
fn barnes_beta_examples() {
    let b = BarnesBetaParams::new(2.0, 1.0, 0.5, 0.5).unwrap();
    assert!((barnes_beta_mellin(cx(0.0, 0.0), &b).unwrap() - 1.0).norm() < 1e-14);
    let deg = BarnesBetaParams::new(2.0, 1.0, 0.0, 0.7).unwrap();
    for q in [cx(1.0, 0.0), cx(-0.5, 3.0), cx(40.0, 0.0)] {
        assert_eq!(barnes_beta_mellin(q, &deg).unwrap(), cx(1.0, 0.0));
    }
    let eta = barnes_beta_mellin(cx(1.0, 0.0), &b).unwrap();
    let oracle = eta_double_product(1.0, 2.0, (1.0, 0.5, 0.5));
    assert!((eta.re - oracle).abs() < 1e-8 * oracle, "{eta} vs {oracle}");
    let b3 = BarnesBetaParams::new(3.0, 2.0, 1.0, 1.0).unwrap();
    let eta = barnes_beta_mellin(cx(-0.5, 0.0), &b3).unwrap();
    let oracle = eta_double_product(-0.5, 3.0, (2.0, 1.0, 1.0));
    assert!((eta.re - oracle).abs() < 1e-8 * oracle, "{eta} vs {oracle}");
}

#[test]
fn barnes_beta_domain_and_params() {
    let b = BarnesBetaParams::new(2.0, 1.0, 0.5, 0.5).unwrap();
    assert!(matches!(barnes_beta_mellin(cx(-1.0, 0.0), &b), Err(Error::Domain(_))));
    assert!(matches!(barnes_beta_lk_log(cx(-1.2, 0.0), &b), Err(Error::Domain(_))));
    assert!(matches!(BarnesBetaParams::new(2.0, 0.0, 0.5, 0.5), Err(Error::Constraint { key: "b0", .. })));
    assert!(matches!(BarnesBetaParams::new(2.0, 1.0, -0.5, 0.5), Err(Error::Constraint { key: "b1", .. })));
    assert!(matches!(BarnesBetaParams::new(-2.0, 1.0, 0.5, 0.5), Err(Error::Constraint { key: "tau", .. })));
}

#[test]
fn barnes_beta_decreasing_on_positive_axis() {
    let b = BarnesBetaParams::new(4.0, 5.5, 0.5, 2.0).unwrap();
    let mut prev = 1.0;
    for k in 1..400 {
        let q = 0.25 * k as f64;
        let v = barnes_beta_mellin(cx(q, 0.0), &b).unwrap();
        assert!(v.re < prev && v.re > 0.0 && v.im.abs() < 1e-12, "q {q}: {v}");
        prev = v.re;
    }
}

#[test]
fn barnes_beta_levy_khinchine_route() {
    assert_eq!(barnes_beta_lk_log(cx(0.0, 0.0), &BarnesBetaParams::new(2.0, 1.0, 0.5, 0.5).unwrap()).unwrap(), cx(0.0, 0.0));
    let cases = [
        (cx(1.0, 0.0), (2.0, 1.0, 0.5, 0.5)),
        (cx(-0.5, 0.0), (3.0, 2.0, 1.0, 1.0)),
        (cx(0.3, 2.5), (4.0, 5.5, 0.5, 2.0)),
        (cx(-2.0, -1.0), (6.0, 7.0, 3.5, 3.5)),
        (cx(7.0, 0.0), (1.5, 2.1, 0.2, 0.75)),
    ];
    for (q, (t, b0, b1, b2)) in cases {
        let b = BarnesBetaParams::new(t, b0, b1, b2).unwrap();
        let a = barnes_beta_log_mellin(q, &b).unwrap();
        let l = barnes_beta_lk_log(q, &b).unwrap();
        assert!((a - l).norm() < 1e-8, "q {q} b {b:?}: {a} vs {l}");
    }
}

#[test]
fn frechet_examples() {
    assert!((frechet_mellin(cx(0.0, 0.0), 3.0).unwrap() - 1.0).norm() < 1e-15);
    let v = frechet_mellin(cx(1.5, 0.0), 3.0).unwrap();
    assert!((v.re - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    assert!(frechet_mellin(cx(3.0 - 1e-6, 0.0), 3.0).unwrap().re > 1e5);
    assert!(matches!(frechet_mellin(cx(3.0, 0.0), 3.0), Err(Error::Domain(_))));
}

#[test]
fn asymptotic_leading_term() {
    let p = ChaosParams::new(1e-12, 0.3, 0.5).unwrap();
    let x = ln_gamma(1.3).unwrap() + ln_gamma(1.5).unwrap() - ln_gamma(2.8).unwrap();
    for r in [0, 3, 12] {
        let q = cx(1.7, 0.4);
        assert!((asymptotic_log_m(q, &p, r).unwrap() - q * x).norm() < 1e-10);
    }
}

#[test]
fn asymptotic_vanishes_at_unit_q() {
    for &mu in &[0.05, 0.3, 0.9] {
        for r in 0..=12 {
            let v = asymptotic_log_m(cx(1.0, 0.0), &params(mu), r).unwrap();
            assert!(v.norm() < 1e-13, "mu {mu} R {r}: {v}");
        }
    }
}

#[test]
fn asymptotic_order_of_accuracy() {
    let q = cx(2.0, 0.0);
    let err = |mu: f64| {
        let p = params(mu);
        (asymptotic_log_m(q, &p, 3).unwrap() - log_mellin_m(q, &p).unwrap()).norm()
    };
    let ratio = err(0.1) / err(0.05);
    assert!((16.0..=64.0).contains(&ratio), "ratio {ratio}");
    let p = ChaosParams::new(0.1, 0.3, 0.1).unwrap();
    let p2 = ChaosParams::new(0.05, 0.3, 0.1).unwrap();
    let q = cx(1.5, 0.5);
    let e1 = (asymptotic_log_m(q, &p, 2).unwrap() - log_mellin_m(q, &p).unwrap()).norm();
    let e2 = (asymptotic_log_m(q, &p2, 2).unwrap() - log_mellin_m(q, &p2).unwrap()).norm();
    assert!((8.0..=32.0).contains(&(e1 / e2)), "ratio {}", e1 / e2);
}

#[test]
fn asymptotic_regularization_invariance() {
    let p = ChaosParams::new(0.2, 0.4, -0.05).unwrap();
    let q = cx(1.3, -0.8);
    let a = intermittency_coefficient(0, q, &p, 0.0).unwrap();
    let b = intermittency_coefficient(0, q, &p, 3.7).unwrap();
    assert!((a - b).norm() < 1e-14);
    assert!(matches!(asymptotic_log_m(q, &p, 13), Err(Error::OrderTooLarge { n: 13, max: 12 })));
}

#[test]
fn levy_density_nonnegative_and_factorized() {
    for &(mu, l1, l2) in &[(0.5, 0.0, 0.0), (0.3, 0.4, 0.1), (1.2, -0.2, 0.6), (0.05, 0.0, 2.0)] {
        let p = ChaosParams::new(mu, l1, l2).unwrap();
        for k in 0..=200 {
            let u = 1e-3 * (30.0f64 / 1e-3).powf(k as f64 / 200.0);
            let d = levy_density(u, &p);
            let f = levy_density_from_factors(u, &p).unwrap();
            assert!(f >= 0.0, "mu {mu} u {u}: {f}");
            // the bracket form cancels at small u
            assert!((d - f).abs() <= 1e-9 * f + 1e-300, "mu {mu} u {u}: {d} vs {f}");
        }
    }
}

#[test]
fn spectral_function_forms() {
    let p = params(0.5);
    assert!(lk_spectral(60.0, &p).unwrap().abs() < 1e-40);
    assert_eq!(lk_spectral(-1.0, &p).unwrap(), 0.0);
    let mut prev = f64::NEG_INFINITY;
    for &u in &[0.01, 0.1, 0.5, 1.0, 3.0, 10.0] {
        let m = lk_spectral(u, &p).unwrap();
        assert!(m < 0.0 && m > prev, "spectral function must increase to 0");
        prev = m;
        let f = spectral_forms(u, 0.5).unwrap();
        // the two written forms agree in magnitude with opposite signs
        assert!(f.opposite_sign(), "{f:?}");
        assert!((f.signed + f.unsigned).abs() < 1e-10 * f.signed.abs());
    }
}

#[test]
fn levy_khinchine_reconstruction() {
    for &(mu, l1, l2) in &[(0.5, 0.0, 0.0), (0.3, 0.2, 0.5)] {
        let p = ChaosParams::new(mu, l1, l2).unwrap();
        let lk = LevyKhinchineData::new(&p).unwrap();
        assert!((lk.sigma2 - 4.0 * 2f64.ln() / p.tau()).abs() < 1e-15);
        for q in [0.5, -0.5, 1.5] {
            let exact = log_mellin_m(cx(q, 0.0), &p).unwrap().re;
            let rebuilt = lk.log_mellin(q).unwrap();
            assert!((rebuilt - exact).abs() < 1e-4, "mu {mu} q {q}: {rebuilt} vs {exact}");
        }
    }
}

#[test]
fn density_by_inversion_moments() {
    let start = Instant::now();
    let p = params(0.5);
    let m = density_moments(&p, default_contour(&p), 512).unwrap();
    assert!((m.integral - 1.0).abs() < 1e-3);
    assert!((m.mean.unwrap() - 1.0).abs() < 1e-3);
    let second = m.second.unwrap();
    assert!((second / (8.0 / 3.0) - 1.0).abs() < 5e-3, "{second}");
    let p = ChaosParams::new(0.3, 0.2, 0.1).unwrap();
    let m = density_moments(&p, default_contour(&p), 512).unwrap();
    assert!((m.integral - 1.0).abs() < 1e-3);
    let exact = selberg_closed(1, &p).unwrap();
    assert!((m.mean.unwrap() - exact).abs() < 1e-3);
    assert!(start.elapsed().as_secs_f64() < 30.0);
}

#[test]
fn density_values() {
    let p = params(0.5);
    let grid: Vec<f64> = (1..400).map(|k| 0.01 * k as f64).collect();
    let d = density_by_inversion(&p, &grid, default_contour(&p), 512).unwrap();
    assert!(d.iter().all(|&v| v >= 0.0));
    // trapezoid over (0, 4) holds almost all the mass
    let mass: f64 = d.windows(2).map(|w| 0.005 * (w[0] + w[1])).sum();
    assert!(mass > 0.9 && mass < 1.0, "{mass}");
    // a contour further left gives the same density
    let d2 = density_by_inversion(&p, &grid, -0.5, 512).unwrap();
    for (a, b) in d.iter().zip(&d2) {
        assert!((a - b).abs() < 1e-8 * a.max(1e-3), "{a} vs {b}");
    }
    assert!(matches!(
        density_by_inversion(&p, &[1.0, 0.5], 0.5, 512),
        Err(Error::Constraint { key: "x_grid", .. })
    ));
    assert!(matches!(density_by_inversion(&p, &grid, 4.0, 512), Err(Error::Constraint { key: "contour_c", .. })));
}

#[test]
fn barnes_table_moments() {
    for (t, b0, b1, b2) in [(4.0, 5.0, 0.5, 2.0), (4.0, 5.0, 2.5, 2.5), (6.0, 7.0, 3.5, 3.5), (2.5, 3.6, 0.5, 0.5)] {
        let b = BarnesBetaParams::new(t, b0, b1, b2).unwrap();
        let table = BarnesBetaTable::new(&b).unwrap();
        // E[X^q] = E[e^{qV}] = η(−q) by midpoint rule over the quantile
        // function, with u = 1 − (1−s)⁴ to tame the heavy upper tail
        let n = 400_000;
        for q in [-2.0, -0.5, 0.5, 1.0, 2.0] {
            let s: f64 = (0..n)
                .map(|k| {
                    let r = 1.0 - (k as f64 + 0.5) / n as f64;
                    let u = 1.0 - r.powi(4);
                    if u < 1.0 {
                        (q * table.quantile(u)).exp() * 4.0 * r.powi(3)
                    } else {
                        0.0
                    }
                })
                .sum::<f64>()
                / n as f64;
            let eta = barnes_beta_mellin(cx(-q, 0.0), &b).unwrap().re;
            assert!((s / eta - 1.0).abs() < 1e-4, "b {b:?} q {q}: {s} vs {eta}");
        }
        let knots = table.knots();
        for w in knots.windows(2) {
            assert!(table.cdf(w[0]) <= table.cdf(w[1]));
        }
    }
}

#[test]
fn sampler_unit_mean() {
    let s = SelbergSampler::new(&params(0.5)).unwrap();
    let x = s.sample(1_000_000, 11).unwrap();
    assert_eq!(x.len(), 1_000_000);
    assert!(x.iter().all(|&v| v > 0.0 && v.is_finite()));
    let mut w = Welford::default();
    x.iter().for_each(|&v| w.push(v));
    assert!((w.mean() - 1.0).abs() < 3.0 * w.stderr(), "{} ± {}", w.mean(), w.stderr());
}

#[test]
fn sampler_second_moment() {
    let s = SelbergSampler::new(&params(0.3)).unwrap();
    let x = s.sample(1_000_000, 5).unwrap();
    let mut w = Welford::default();
    x.iter().for_each(|&v| w.push(v * v));
    let exact = 2.0 / (0.7 * 1.7);
    assert!((w.mean() - exact).abs() < 3.0 * w.stderr(), "{} ± {} vs {exact}", w.mean(), w.stderr());
}

#[test]
fn sampler_reproducible() {
    let s = SelbergSampler::new(&ChaosParams::new(0.4, 0.3, 0.0).unwrap()).unwrap();
    assert_eq!(s.tables().len(), 3);
    let a = s.sample(70_000, 3).unwrap();
    let b = s.sample(70_000, 3).unwrap();
    assert_eq!(a, b);
    let c = s.sample(70_000, 4).unwrap();
    assert_ne!(a, c);
    assert!(matches!(s.sample(0, 3), Err(Error::Constraint { key: "count", .. })));
}
