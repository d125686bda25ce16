//! Command-line front end: argument parsing, configuration, commands and
//! reports.

pub mod config;
pub mod report;
pub mod suites;

use std::ffi::OsString;
use std::path::PathBuf;

use chaoslab::chaos::{FieldGridSpec, TruncationStyle};
use chaoslab::mellin::{evaluate, MellinQuery, Route};
use chaoslab::selberg::{
    mass_moment_neg, mass_moment_pos, multiscaling_exponent, selberg_closed, selberg_oracle, Budget, ChaosParams,
    IntegralSpec, Variant,
};
use chaoslab::zeros::{
    covariance_regression, empirical_field, exp_functional_moment, load_zeros, predicted_cov, standard_kappa,
    EpsilonRule, StatVariant,
};
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use config::{load_config, Config};
pub use report::{emit_report, ReportFormat, ResultRow, RunReport};
use suites::{ChaosSettings, Tier, ZeroSettings};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid value for `{key}`: {msg}")]
    Config { key: String, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Run(#[from] chaoslab::Error),
}

#[derive(Debug, Parser)]
#[command(name = "chaoslab", version, about = "Selberg integral distribution, lognormal chaos and zero statistics")]
pub struct Cli {
    #[command(subcommand)]
    command: Group,
    #[command(flatten)]
    flags: Flags,
}

/// Parameter flags, accepted anywhere on the command line. Values are checked
/// together with the config file.
#[derive(Debug, Default, Args)]
struct Flags {
    #[arg(long, global = true, allow_hyphen_values = true)]
    mu: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda1: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda2: Option<String>,
    /// Complex argument such as 2, -0.5 or 1.5-2i.
    #[arg(long, global = true, allow_hyphen_values = true)]
    q: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    n: Option<String>,
    #[arg(long, global = true)]
    epsilon: Option<String>,
    /// Number of grid cells on [0, 1] (power of two).
    #[arg(long, global = true)]
    grid: Option<String>,
    #[arg(long, global = true)]
    samples: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    t0: Option<String>,
    #[arg(long, global = true)]
    alpha: Option<String>,
    #[arg(long, global = true)]
    beta: Option<String>,
    /// 1 for [0, u], 2 for [−1/ε, u].
    #[arg(long, global = true)]
    variant: Option<String>,
    /// Zero table: one height per line.
    #[arg(long, global = true)]
    zeros: Option<String>,
    /// Report format; without --out the report goes to standard output.
    #[arg(long, global = true)]
    format: Option<String>,
    #[arg(long, global = true)]
    out: Option<String>,
    /// File of `key = value` lines; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

impl Flags {
    fn overrides(&self) -> Vec<(String, String)> {
        let pairs = [
            ("mu", &self.mu),
            ("lambda1", &self.lambda1),
            ("lambda2", &self.lambda2),
            ("q", &self.q),
            ("n", &self.n),
            ("epsilon", &self.epsilon),
            ("grid", &self.grid),
            ("samples", &self.samples),
            ("seed", &self.seed),
            ("t0", &self.t0),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("variant", &self.variant),
            ("zeros", &self.zeros),
            ("format", &self.format),
            ("out", &self.out),
        ];
        pairs.iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))).collect()
    }
}

#[derive(Debug, Subcommand)]
enum Group {
    /// Mellin transform of the Selberg integral distribution.
    #[command(subcommand)]
    Mellin(MellinCmd),
    /// Selberg integrals and moments.
    #[command(subcommand)]
    Selberg(SelbergCmd),
    /// Discretized lognormal chaos.
    #[command(subcommand)]
    Chaos(ChaosCmd),
    /// Statistics of Riemann zero heights.
    #[command(subcommand)]
    Zeros(ZerosCmd),
    /// Aggregate verification suites.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Debug, Subcommand)]
enum MellinCmd {
    /// Evaluate the transform at --q.
    Eval,
    /// Cross-route, moment, functional-equation, decomposition and density checks.
    Verify,
}

#[derive(Debug, Subcommand)]
enum SelbergCmd {
    /// Closed-form moments of order --n.
    Eval,
    /// Monte Carlo (and for n = 2 quadrature) value of the n-fold integral.
    Oracle,
}

#[derive(Debug, Subcommand)]
enum ChaosCmd {
    /// Moments of the total mass.
    Simulate,
    /// Mass moments, change-of-measure and multiscaling checks.
    Verify,
}

#[derive(Debug, Subcommand)]
enum ZerosCmd {
    /// Mean and variance of the statistic on the u grid.
    Stat,
    /// Empirical and predicted covariances with the regression slope.
    Cov,
    /// Exponential-functional moment of order --n.
    Moments,
}

#[derive(Debug, Subcommand)]
enum VerifyCmd {
    /// Every suite; Monte Carlo unless --quick, zeros when --zeros is given.
    All {
        #[arg(long, conflicts_with = "full")]
        quick: bool,
        #[arg(long)]
        full: bool,
    },
}

fn chaos_params(cfg: &mut Config, default_mu: f64) -> Result<ChaosParams, CliError> {
    let mu = cfg.real("mu", default_mu)?;
    let l1 = cfg.real("lambda1", 0.0)?;
    let l2 = cfg.real("lambda2", 0.0)?;
    Ok(ChaosParams::new(mu, l1, l2)?)
}

fn zero_settings(cfg: &mut Config) -> Result<ZeroSettings, CliError> {
    let d = ZeroSettings::default();
    let epsilon = match cfg.optional_real("epsilon")? {
        Some(e) => EpsilonRule::Fixed(e),
        None => EpsilonRule::Schedule { beta: cfg.real("beta", 0.5)? },
    };
    let variant = StatVariant::from_index(cfg.int("variant", 1)? as u32)?;
    Ok(ZeroSettings {
        mu: cfg.real("mu", d.mu)?,
        t0: cfg.real("t0", d.t0)?,
        alpha: cfg.real("alpha", d.alpha)?,
        epsilon,
        variant,
        samples: cfg.count("samples", d.samples)?,
        seed: cfg.seed()?,
    })
}

fn run(group: &Group, cfg: &mut Config) -> Result<(String, Vec<ResultRow>), CliError> {
    let rows = match group {
        Group::Mellin(MellinCmd::Eval) => {
            let p = chaos_params(cfg, 0.5)?;
            let q = cfg.complex("q", "1")?;
            let e = evaluate(&MellinQuery::new(q, p))?;
            let mut rows = vec![ResultRow::value("mellin.re", e.value.re), ResultRow::value("mellin.im", e.value.im)];
            if q.re < p.tau() {
                let prod = evaluate(&MellinQuery::new(q, p).route(Route::GammaProduct))?;
                rows.push(ResultRow::value("mellin.product_route_relative_difference", (prod.value - e.value).norm() / e.value.norm()));
            }
            return Ok(("mellin eval".into(), rows));
        }
        Group::Mellin(MellinCmd::Verify) => {
            let mut rows = suites::mellin_routes()?;
            rows.extend(suites::mellin_moments()?);
            rows.extend(suites::mellin_functional_equations()?);
            rows.extend(suites::mellin_decomposition()?);
            rows.extend(suites::levy_khinchine()?);
            rows.extend(suites::asymptotic_order()?);
            rows.extend(suites::density_inversion()?);
            ("mellin verify", rows)
        }
        Group::Selberg(SelbergCmd::Eval) => {
            let p = chaos_params(cfg, 0.5)?;
            let n = cfg.int("n", 2)?;
            let k = n.unsigned_abs() as u32;
            let mut rows = Vec::new();
            if n > 0 {
                rows.push(ResultRow::value("selberg.closed", selberg_closed(k, &p)?));
                rows.push(ResultRow::value("selberg.self_weighted", mass_moment_pos(k, &p, Variant::SelfWeighted)?));
            } else if n < 0 {
                rows.push(ResultRow::value("selberg.negative_moment", mass_moment_neg(k, &p, Variant::Plain)?));
                rows.push(ResultRow::value("selberg.self_weighted", mass_moment_neg(k, &p, Variant::SelfWeighted)?));
            } else {
                rows.push(ResultRow::value("selberg.closed", 1.0));
            }
            rows.push(ResultRow::value("selberg.multiscaling_exponent", multiscaling_exponent(n as f64, &p, Variant::Plain)));
            ("selberg eval", rows)
        }
        Group::Selberg(SelbergCmd::Oracle) => {
            let p = chaos_params(cfg, 0.3)?;
            let n = cfg.int("n", 2)?;
            if n < 1 {
                return Err(CliError::Config { key: "n".into(), msg: format!("the integral needs a positive dimension, got {n}") });
            }
            let samples = cfg.count("samples", 1_000_000)?;
            let seed = cfg.seed()?;
            let spec = IntegralSpec::unit(n as usize, &p)?;
            let exact = selberg_closed(n as u32, &p)?;
            let mc = selberg_oracle(&spec, &p, Budget::Samples(samples as u64), seed)?;
            let tol = (3.0 * mc.stderr).max(0.01 * exact);
            let mut rows = vec![
                ResultRow::value("selberg.closed", exact),
                ResultRow::near("selberg.monte_carlo", mc.estimate, exact, tol).with_stderr(mc.stderr),
            ];
            if n == 2 {
                let q = selberg_oracle(&spec, &p, Budget::Quadrature, 0)?;
                rows.push(ResultRow::near("selberg.quadrature", q.estimate, exact, 1e-8));
            }
            ("selberg oracle", rows)
        }
        Group::Chaos(ChaosCmd::Simulate) => {
            let mu = cfg.real("mu", 0.3)?;
            let grid = cfg.count("grid", 4096)?;
            let mut spec = FieldGridSpec::new(grid, mu, TruncationStyle::LinearTaper)?;
            if let Some(e) = cfg.optional_real("epsilon")? {
                spec = spec.with_epsilon(e)?;
            }
            let samples = cfg.count("samples", 10_000)?;
            let seed = cfg.seed()?;
            let (m1, m2) = suites::mass_moments(&spec, samples, seed)?;
            let rows = vec![
                ResultRow::value("field.variance", spec.variance()),
                ResultRow::estimate("mass.mean", m1.value, m1.stderr),
                ResultRow::estimate("mass.second_moment", m2.value, m2.stderr),
            ];
            ("chaos simulate", rows)
        }
        Group::Chaos(ChaosCmd::Verify) => {
            let d = ChaosSettings::default();
            let mu = cfg.real("mu", d.mu)?;
            let s = ChaosSettings {
                mu,
                multiscaling_mu: mu,
                grid: cfg.count("grid", d.grid)?,
                epsilon: cfg.optional_real("epsilon")?,
                samples: cfg.count("samples", d.samples)?,
                seed: cfg.seed()?,
            };
            ("chaos verify", suites::chaos_checks(&s)?)
        }
        Group::Zeros(cmd) => {
            let path = cfg.path("zeros")?;
            let s = zero_settings(cfg)?;
            let table = load_zeros(&path)?;
            let zc = s.config();
            match cmd {
                ZerosCmd::Stat => {
                    let f = empirical_field(&table, &zc)?;
                    let mut rows = Vec::new();
                    for (i, u) in f.u_grid.iter().enumerate() {
                        let m = f.mean[i];
                        let v = f.covariance[i][i];
                        rows.push(ResultRow::estimate(format!("mean@{u:.6}"), m.value, m.stderr));
                        rows.push(ResultRow::estimate(format!("variance@{u:.6}"), v.value, v.stderr));
                    }
                    ("zeros stat", rows)
                }
                ZerosCmd::Cov => {
                    let f = empirical_field(&table, &zc)?;
                    let kappa = standard_kappa()?;
                    let eps = zc.eps();
                    let mut rows = Vec::new();
                    for (i, u) in f.u_grid.iter().enumerate() {
                        for (j, v) in f.u_grid.iter().enumerate().skip(i) {
                            let c = f.covariance[i][j];
                            rows.push(ResultRow::estimate(format!("cov@{u:.6}:{v:.6}"), c.value, c.stderr));
                            if i == j || (u - v).abs() > eps {
                                let pc = predicted_cov(*u, *v, eps, zc.mu, kappa, zc.variant)?;
                                rows.push(ResultRow::value(format!("predicted@{u:.6}:{v:.6}"), pc));
                            }
                        }
                    }
                    let (slope, intercept) = covariance_regression(&f, &zc)?;
                    rows.push(ResultRow::value("regression.slope", slope));
                    rows.push(ResultRow::value("regression.intercept", intercept));
                    ("zeros cov", rows)
                }
                ZerosCmd::Moments => {
                    let n = cfg.int("n", 1)?;
                    if n < 1 {
                        return Err(CliError::Config { key: "n".into(), msg: format!("moment order must be positive, got {n}") });
                    }
                    let r = exp_functional_moment(&table, &zc, n as u32, true)?;
                    let raw = exp_functional_moment(&table, &zc, n as u32, false)?;
                    let rows = vec![
                        ResultRow::estimate("moment.rescaled", r.value, r.stderr),
                        ResultRow::estimate("moment.raw", raw.value, raw.stderr),
                    ];
                    ("zeros moments", rows)
                }
            }
        }
        Group::Verify(VerifyCmd::All { quick, .. }) => {
            let tier = if *quick { Tier::Quick } else { Tier::Full };
            cfg.record("tier", if *quick { "quick" } else { "full" });
            let seed = cfg.seed()?;
            let zeros = cfg.optional_path("zeros");
            ("verify all", suites::verify_all(tier, zeros.as_deref(), seed)?)
        }
    };
    Ok((rows.0.to_string(), rows.1))
}

/// Runs one command line and returns the exit code: 0 when every check
/// passes, 1 on any FAIL, 2 on usage, configuration or runtime errors.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(report) => {
            if report.all_pass() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn execute(cli: &Cli) -> Result<RunReport, CliError> {
    let mut cfg = load_config(cli.flags.config.as_deref(), &cli.flags.overrides())?;
    let (command, results) = run(&cli.command, &mut cfg)?;
    let seed = cfg.seed()?;
    let report = RunReport { command, parameters: cfg.resolved().clone(), results, seed };
    let format = match cfg.peek("format") {
        Some("csv") => Some(ReportFormat::Csv),
        Some(_) => Some(ReportFormat::Json),
        None => None,
    };
    let out = cfg.peek("out").map(PathBuf::from);
    match (&out, format) {
        (Some(path), f) => {
            emit_report(&report, f.unwrap_or(ReportFormat::Json), Some(path))?;
            print!("{}", report::summary(&report));
        }
        (None, Some(f)) => emit_report(&report, f, None)?,
        (None, None) => print!("{}", report::summary(&report)),
    }
    Ok(report)
}
