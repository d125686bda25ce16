// reference values carry the oracle's full printed precision
#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;

use chaoslab::zeros::{
    bkr_statistic, compute_zeros, covariance_regression, empirical_field, exp_functional_moment, load_zeros,
    make_bump, predicted_cov, saturated_variance, scalar_product, siegel_theta, siegel_z, smoothed_indicator,
    standard_bump, standard_kappa, truncated_variance, BumpShape, EpsilonRule, IndicatorSpec, ScalarMethod,
    StatVariant, StatisticConfig, ZeroTable,
};
use chaoslab::Error;
use proptest::prelude::*;

const B1: StatVariant = StatVariant::Bounded;
const B2: StatVariant = StatVariant::Unbounded;

// Known zero heights (Odlyzko's tables).
const KNOWN: [f64; 10] = [
    14.134725142,
    21.022039639,
    25.010857580,
    30.424876126,
    32.935061588,
    37.586178159,
    40.918719012,
    43.327073281,
    48.005150881,
    49.773832478,
];

fn write_table(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn table_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/zeros_100k.txt")
}

fn real_table() -> ZeroTable {
    load_zeros(table_path()).unwrap()
}

fn real_config(eps: f64, samples: usize) -> StatisticConfig {
    let mut cfg = StatisticConfig::new(B1, 0.3, 3e4);
    cfg.epsilon = EpsilonRule::Fixed(eps);
    cfg.omega_samples = samples;
    cfg.seed = 7;
    cfg
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|k| f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

#[test]
fn load_small_table() {
    let f = write_table("14.134725\n21.022040\n25.010858");
    let t = load_zeros(f.path()).unwrap();
    assert_eq!(t.count(), 3);
    assert_eq!(t.count_between(0.0, 22.0), 2);
    assert_eq!(t.count_between(21.022040, 25.010858), 1);
    assert_eq!(t.source_path(), f.path().display().to_string());

    let f = write_table("# first zeros\n# second header line\n14.134725\n21.022040\n");
    assert_eq!(load_zeros(f.path()).unwrap().heights(), &[14.134725, 21.022040]);
}

#[test]
fn load_errors() {
    let f = write_table("");
    assert!(matches!(load_zeros(f.path()), Err(Error::Parse { .. })));
    let f = write_table("# only a header\n");
    assert!(load_zeros(f.path()).is_err());
    let f = write_table("14.134725\n21.02x\n");
    assert!(matches!(load_zeros(f.path()), Err(Error::Parse { line: 2, .. })));
    let f = write_table("14.134725\n25.0\n21.0\n");
    assert!(matches!(load_zeros(f.path()), Err(Error::Parse { line: 3, .. })));
    let f = write_table("14.134725\n\n21.0\n");
    assert!(matches!(load_zeros(f.path()), Err(Error::Parse { line: 2, .. })));
    let f = write_table("10\n20\n30\n");
    assert!(load_zeros(f.path()).is_err());
    assert!(matches!(load_zeros("/nonexistent/zeros.txt"), Err(Error::Io { .. })));
    assert!(ZeroTable::from_heights(vec![10.0, 20.0, 30.0], "synthetic").is_ok());
    assert!(ZeroTable::from_heights(vec![], "synthetic").is_err());
}

#[test]
fn shipped_table() {
    let t = real_table();
    assert_eq!(t.count(), 100_000);
    let h = t.heights();
    for (a, b) in h.iter().zip(KNOWN) {
        assert!((a - b).abs() < 1e-3, "{a} vs {b}");
    }
    assert!((h[99_999] - 74920.827498994).abs() < 1e-6);
    // Riemann–von Mangoldt count at T = 74920.9: θ(T)/π + 1 + S(T)
    let n = siegel_theta(74920.9) / PI + 1.0;
    assert!((n - 100_000.0).abs() < 1.0, "{n}");
}

#[test]
fn riemann_siegel_values() {
    let cases = [
        (100.0, 2.69269705666446347, 87.9721652317872196),
        (1000.0, 0.997794637521586614, 2034.54642803803161),
        (5000.5, 0.585425319246438950, 14199.5674591326163),
        (74920.0, -5.56235857155040820, 314150.371218165903),
    ];
    for (t, z, theta) in cases {
        assert!((siegel_z(t) - z).abs() < 1e-6, "Z({t}) = {}", siegel_z(t));
        assert!((siegel_theta(t) - theta).abs() < 1e-8 * theta, "theta({t})");
    }
}

#[test]
fn computed_zeros_match_known() {
    let z = compute_zeros(10, 0.02).unwrap();
    for (a, b) in z.iter().zip(KNOWN) {
        assert!((a - b).abs() < 1e-3, "{a} vs {b}");
    }
    assert!(compute_zeros(0, 0.02).is_err());
}

#[test]
fn bump_constants() {
    let b = standard_bump().unwrap();
    assert!((b.normalization() - 4.504567242087162).abs() < 1e-10);
    let oracle = 1.0 / simpson(|x| (-1.0 / (1.0 - 4.0 * x * x)).exp(), -0.4999999, 0.4999999, 20_000);
    assert!((b.normalization() - oracle).abs() < 1e-9);
    let mass = simpson(|x| b.phi(x), -0.5, 0.5, 20_000);
    assert!((mass - 1.0).abs() < 1e-10, "{mass}");
    assert_eq!(b.phi(0.5), 0.0);
    assert_eq!(b.phi(-0.7), 0.0);
    assert!((b.cdf(0.0) - 0.5).abs() < 1e-12);
    assert_eq!(b.cdf(0.6), 1.0);
}

#[test]
fn kappa_refinements_agree() {
    let k1 = make_bump(BumpShape::StandardMollifier, 1).unwrap().kappa();
    let k3 = make_bump(BumpShape::StandardMollifier, 3).unwrap().kappa();
    assert!(k1 > 0.0 && k1.is_finite());
    assert!((k1 - k3).abs() < 1e-6, "{k1} {k3}");
    assert!((standard_kappa().unwrap() - 1.86705577645).abs() < 1e-9);
}

#[test]
fn kappa_oracle() {
    // κ = −2 ∫_0^1 g(d) log d dd with g the autocorrelation; d = e^{−s}
    let b = standard_bump().unwrap();
    let g = |d: f64| simpson(|x| b.phi(x) * b.phi(x + d), -0.5, 0.5 - d, 400);
    let kappa = 2.0 * simpson(|s| g((-s).exp()) * s * (-s).exp(), 0.0, 30.0, 3000);
    assert!((kappa - standard_kappa().unwrap()).abs() < 1e-6, "{kappa}");
}

#[test]
fn custom_bump() {
    // tent 1 − |2x| with κ by the same substitution
    let tent = BumpShape::Custom(vec![0.0, 1.0, 0.0]);
    let b = make_bump(tent, 2).unwrap();
    assert!((b.normalization() - 2.0).abs() < 1e-12);
    assert!((b.phi(0.25) - 1.0).abs() < 1e-12);
    let g = |d: f64| simpson(|x| b.phi(x) * b.phi(x + d), -0.5, 0.5 - d, 2000);
    let kappa = 2.0 * simpson(|s| g((-s).exp()) * s * (-s).exp(), 0.0, 30.0, 3000);
    assert!((b.kappa() - kappa).abs() < 1e-5, "{} {kappa}", b.kappa());
    assert!(make_bump(BumpShape::Custom(vec![0.0, 1.0]), 2).is_err());
    assert!(make_bump(BumpShape::Custom(vec![0.0, -1.0, 0.0]), 2).is_err());
    assert!(make_bump(BumpShape::Custom(vec![1.0, 1.0, 0.0]), 2).is_err());
}

#[test]
fn indicator_shape() {
    let b = standard_bump().unwrap();
    let (u, e) = (0.5, 0.05);
    for x in [e / 2.0, 0.1, 0.3, u - e / 2.0] {
        assert!((smoothed_indicator(x, u, e, B1, b) - 1.0).abs() < 1e-12, "{x}");
    }
    for x in [u + e / 2.0, 0.6, 3.0, -e / 2.0, -1.0] {
        assert!(smoothed_indicator(x, u, e, B1, b).abs() < 1e-12, "{x}");
    }
    assert!((smoothed_indicator(-10.0, u, e, B2, b) - 1.0).abs() < 1e-12);
    assert!(smoothed_indicator(-21.0, u, e, B2, b).abs() < 1e-12);
    let h = 1e-5;
    for x in [-0.02, -0.01, 0.0, 0.013, 0.49, 0.5, 0.52] {
        let d = (smoothed_indicator(x + h, u, e, B1, b) - smoothed_indicator(x - h, u, e, B1, b)) / (2.0 * h);
        let want = (b.phi(x / e) - b.phi((x - u) / e)) / e;
        assert!((d - want).abs() < 1e-6 * want.abs().max(1.0), "{x}: {d} vs {want}");
    }
}

fn spec(u: f64, eps: f64, variant: StatVariant) -> IndicatorSpec {
    IndicatorSpec { u, eps, variant }
}

#[test]
fn scalar_product_diagonal() {
    let b = standard_bump().unwrap();
    let k = b.kappa();
    let (u, e) = (0.5, 0.05);
    let f = spec(u, e, B1);
    let lk = scalar_product(&f, &f, ScalarMethod::LogKernel, None, b).unwrap();
    let want = -(e.ln() - k - u.ln()) / (PI * PI);
    assert!((lk - want).abs() < e, "{lk} vs {want}");
    let cov = predicted_cov(u, u, e, 0.5, k, B1).unwrap();
    assert!((2.0 * PI * PI * 0.5 * want - cov).abs() < 1e-12);
}

#[test]
fn scalar_product_symmetry() {
    let b = standard_bump().unwrap();
    let f = spec(0.3, 0.05, B1);
    let g = spec(0.7, 0.05, B1);
    for m in [ScalarMethod::LogKernel, ScalarMethod::Fourier] {
        let c = Some(1e3 / 0.05);
        let a = scalar_product(&f, &g, m, c, b).unwrap();
        let r = scalar_product(&g, &f, m, c, b).unwrap();
        assert!((a - r).abs() < 1e-10, "{m:?}: {a} {r}");
    }
    assert!(scalar_product(&f, &g, ScalarMethod::Fourier, None, b).is_err());
    assert!(scalar_product(&f, &spec(0.7, 0.1, B1), ScalarMethod::LogKernel, None, b).is_err());
    assert!(scalar_product(&spec(0.05, 0.1, B1), &f, ScalarMethod::LogKernel, None, b).is_err());
}

#[test]
fn fourier_matches_log_kernel() {
    let b = standard_bump().unwrap();
    for e in [0.1, 0.05] {
        for (u, v) in [(0.3, 0.3), (0.3, 0.7), (0.5, 0.9), (0.25, 0.5)] {
            for variant in [B1, B2] {
                let (f, g) = (spec(u, e, variant), spec(v, e, variant));
                let lk = scalar_product(&f, &g, ScalarMethod::LogKernel, None, b).unwrap();
                let fo = scalar_product(&f, &g, ScalarMethod::Fourier, Some(1e3 / e), b).unwrap();
                assert!((lk - fo).abs() < 0.01 * lk.abs(), "{variant:?} eps {e} ({u},{v}): {lk} {fo}");
            }
        }
    }
}

#[test]
fn log_kernel_off_diagonal_limit() {
    // −μ log|u−v| signature: 2π²⟨f,g⟩ → −(log ε − κ + log|u−v| − log u − log v)
    let b = standard_bump().unwrap();
    let k = b.kappa();
    let e = 0.01;
    let (u, v) = (0.3, 0.7);
    let lk = scalar_product(&spec(u, e, B1), &spec(v, e, B1), ScalarMethod::LogKernel, None, b).unwrap();
    let want = predicted_cov(u, v, e, 1.0, k, B1).unwrap() / (2.0 * PI * PI);
    assert!((lk - want).abs() < 0.05 * want.abs(), "{lk} {want}");
}

#[test]
fn predicted_cov_examples() {
    let k = standard_kappa().unwrap();
    let d = predicted_cov(0.5, 0.5, 0.05, 0.5, k, B1).unwrap();
    assert!((d + (0.05f64.ln() - k - 0.5f64.ln())).abs() < 1e-14);
    let a = predicted_cov(0.3, 0.7, 0.05, 0.5, k, B1).unwrap();
    let b = predicted_cov(0.7, 0.3, 0.05, 0.5, k, B1).unwrap();
    assert_eq!(a, b);
    let x = predicted_cov(0.2, 0.2, 0.05, 0.5, k, B2).unwrap();
    let y = predicted_cov(0.9, 0.9, 0.05, 0.5, k, B2).unwrap();
    assert_eq!(x, y);
    assert!((x + 0.5 * (4.0 * 0.05f64.ln() - 2.0 * k)).abs() < 1e-14);
    assert!(matches!(predicted_cov(0.5, 0.53, 0.05, 0.5, k, B1), Err(Error::Domain(_))));
    assert!(predicted_cov(0.0, 0.5, 0.05, 0.5, k, B1).is_err());
}

#[test]
fn statistic_density_term_only() {
    let t = ZeroTable::from_heights(vec![10.0, 20.0, 30.0], "synthetic").unwrap();
    let mut cfg = StatisticConfig::new(B1, 0.3, 11.0);
    cfg.epsilon = EpsilonRule::Fixed(0.1);
    cfg.omega_samples = 40;
    let lam = 11f64.ln().sqrt();
    let dens = 11f64.ln() / (2.0 * PI * lam);
    let pref = PI * 0.6f64.sqrt();
    let s = bkr_statistic(&t, &cfg, 1.5, 0.5).unwrap();
    assert!((s + pref * dens * 0.5).abs() < 1e-12, "{s}");

    // one zero on the plateau
    let g = 16.5 + 0.25 / lam;
    let t = ZeroTable::from_heights(vec![10.0, g, 30.0], "synthetic").unwrap();
    let s = bkr_statistic(&t, &cfg, 1.5, 0.5).unwrap();
    assert!((s - pref * (1.0 - dens * 0.5)).abs() < 1e-12, "{s}");

    // the support leaves the table
    let short = ZeroTable::from_heights(vec![10.0, 16.6], "synthetic").unwrap();
    assert!(matches!(bkr_statistic(&short, &cfg, 1.5, 0.5), Err(Error::Coverage(_))));
    assert!(bkr_statistic(&t, &cfg, 2.5, 0.5).is_err());
    assert!(bkr_statistic(&t, &cfg, 1.5, 0.05).is_err());
}

#[test]
fn config_validation() {
    let mut cfg = StatisticConfig::new(B1, 0.3, 3e4);
    // the default schedule is too coarse at this height
    assert!(cfg.eps() > 0.25);
    assert!(cfg.validate().is_err());
    cfg.epsilon = EpsilonRule::Fixed(0.1);
    assert!(cfg.validate().is_ok());
    let grid = cfg.u_grid();
    assert_eq!(grid.len(), 64);
    assert!((grid[0] - 0.2).abs() < 1e-15 && (grid[63] - 0.8).abs() < 1e-12);
    let mut bad = cfg.clone();
    bad.alpha = 1.0;
    assert!(bad.validate().is_err());
    let mut bad = cfg.clone();
    bad.omega_samples = 10;
    assert!(bad.validate().is_err());
    let mut bad = cfg.clone();
    bad.u_grid = Some(vec![0.5, 0.4]);
    assert!(bad.validate().is_err());
    let mut big = StatisticConfig::new(B1, 0.3, 1e200);
    big.epsilon = EpsilonRule::Schedule { beta: 0.5 };
    assert!(big.validate().is_ok());
}

#[test]
fn count_consistency() {
    let t = real_table();
    let cfg = real_config(0.05, 40);
    let b = standard_bump().unwrap();
    let lam = cfg.lambda();
    let pref = PI * (2.0 * cfg.mu).sqrt();
    let u = 0.5;
    for k in 0..40 {
        let w = 1.0 + (k as f64 + 0.5) / 40.0;
        let c = w * cfg.t0;
        let sum = bkr_statistic(&t, &cfg, w, u).unwrap() / pref + cfg.density() * u;
        let direct: f64 = t.heights().iter().map(|&g| smoothed_indicator(lam * (g - c), u, 0.05, B1, b)).sum();
        assert!((sum - direct).abs() < 1e-9);
        let raw = t.count_between(c, c + u / lam) as f64;
        let h = 0.025 / lam;
        let ramps = (t.count_between(c - h, c + h) + t.count_between(c + u / lam - h, c + u / lam + h)) as f64;
        assert!((sum - raw).abs() <= ramps + 1e-12, "{w}: {sum} {raw} {ramps}");
    }
}

#[test]
fn empirical_field_properties() {
    let t = real_table();
    let mut cfg = real_config(0.1, 4000);
    cfg.u_grid = Some(vec![0.2, 0.35, 0.5, 0.65, 0.8]);
    let f = empirical_field(&t, &cfg).unwrap();
    let k = f.u_grid.len();
    for i in 0..k {
        for j in 0..k {
            assert!((f.cov(i, j) - f.cov(j, i)).abs() < 1e-12);
        }
    }
    // Gershgorin is too weak here; check PSD by Cholesky
    let mut l = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..=i {
            let s: f64 = (0..j).map(|m| l[i][m] * l[j][m]).sum();
            if i == j {
                assert!(f.cov(i, i) - s > 0.0);
                l[i][i] = (f.cov(i, i) - s).sqrt();
            } else {
                l[i][j] = (f.cov(i, j) - s) / l[j][j];
            }
        }
    }
    let again = empirical_field(&t, &cfg).unwrap();
    assert_eq!(f, again);
}

#[test]
fn finite_height_mean_offset() {
    // zeros near ωt have density log(ωt/2π)/2π while the statistic centers
    // with log t/2π; the mean is off by π√(2μ)(u/2πλ)(E log ω − log 2π)
    let t = real_table();
    let mut cfg = real_config(0.1, 10_000);
    cfg.u_grid = Some(vec![0.3, 0.5, 0.7]);
    let f = empirical_field(&t, &cfg).unwrap();
    let e_log_omega = 2.0 * 2f64.ln() - 1.0;
    for (i, &u) in f.u_grid.iter().enumerate() {
        let want = PI * (2.0 * cfg.mu).sqrt() * u / (2.0 * PI * cfg.lambda()) * (e_log_omega - (2.0 * PI).ln());
        let m = f.mean[i];
        assert!((m.value - want).abs() < 3.0 * m.stderr, "u {u}: {m:?} vs {want}");
    }
}

#[test]
fn variance_follows_pair_correlation() {
    let t = real_table();
    let mut cfg = real_config(0.1, 10_000);
    cfg.u_grid = Some(vec![0.5, 0.6]);
    let f = empirical_field(&t, &cfg).unwrap();
    let sat = saturated_variance(&cfg, 0.5).unwrap();
    let trunc = truncated_variance(&cfg, 0.5).unwrap();
    assert!(sat > trunc);
    assert!((f.cov(0, 0) - sat).abs() < 0.1 * sat, "{} vs {sat}", f.cov(0, 0));
}

#[test]
fn truncated_variance_is_fourier_form() {
    let cfg = real_config(0.1, 40);
    let b = standard_bump().unwrap();
    let f = spec(0.5, 0.1, B1);
    let sp = scalar_product(&f, &f, ScalarMethod::Fourier, Some(cfg.frequency_cutoff()), b).unwrap();
    let tv = truncated_variance(&cfg, 0.5).unwrap();
    assert!((tv - 2.0 * PI * PI * cfg.mu * sp).abs() < 1e-14);
    assert!((cfg.frequency_cutoff() - 3e4f64.ln().sqrt()).abs() < 1e-12);
}

#[test]
fn covariance_regression_slope() {
    let t = real_table();
    let cfg = real_config(0.1, 4000);
    let f = empirical_field(&t, &cfg).unwrap();
    let (slope, _) = covariance_regression(&f, &cfg).unwrap();
    assert!(slope > 0.0 && slope.is_finite(), "{slope}");
}

#[test]
fn exp_moments() {
    let t = real_table();
    let cfg = real_config(0.1, 4000);
    let m1 = exp_functional_moment(&t, &cfg, 1, true).unwrap();
    let m2 = exp_functional_moment(&t, &cfg, 2, true).unwrap();
    assert!(m1.value > 0.0 && m1.value.is_finite());
    let m1raw = exp_functional_moment(&t, &cfg, 1, false).unwrap();
    let scale = (cfg.mu * (0.1f64.ln() - standard_kappa().unwrap())).exp();
    assert!((m1.value - scale * m1raw.value).abs() < 1e-12 * m1.value);
    // Jensen, before rescaling
    let m2raw = exp_functional_moment(&t, &cfg, 2, false).unwrap();
    assert!(m2raw.value >= m1raw.value.powi(2));
    assert!(m2.value > 0.0);
    let mut tiny = cfg.clone();
    tiny.mu = 1e-14;
    let m = exp_functional_moment(&t, &tiny, 2, false).unwrap();
    let width = 0.8 - 0.2;
    assert!((m.value - width * width).abs() < 1e-6, "{m:?}");
    let mut heavy = cfg.clone();
    heavy.mu = 1.0;
    assert!(matches!(exp_functional_moment(&t, &heavy, 2, true), Err(Error::MomentDivergence { .. })));
}

#[test]
fn fujii_variance_grows() {
    // raw counts N(ωt, ωt + u/λ] over stratified ω at two heights
    let t = real_table();
    let var_at = |t0: f64| {
        let lam = t0.ln().sqrt();
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|k| {
                let w = 1.0 + (k as f64 + 0.5) / n as f64;
                let c = w * t0;
                t.count_between(c, c + 0.5 / lam) as f64
            })
            .collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64
    };
    assert!(var_at(3e4) > var_at(1e4));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn indicator_is_bounded(x in -2.0f64..2.0, u in 0.2f64..0.9, e in 0.01f64..0.15) {
        let b = standard_bump().unwrap();
        let v = smoothed_indicator(x, u, e, B1, b);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v));
    }

    #[test]
    fn scalar_product_bilinear_symmetric(u in 0.2f64..0.5, v in 0.55f64..0.9) {
        let b = standard_bump().unwrap();
        let (f, g) = (spec(u, 0.05, B1), spec(v, 0.05, B1));
        let a = scalar_product(&f, &g, ScalarMethod::LogKernel, None, b).unwrap();
        let r = scalar_product(&g, &f, ScalarMethod::LogKernel, None, b).unwrap();
        prop_assert!((a - r).abs() < 1e-10);
    }
}
