//! One PASS/FAIL line per acceptance criterion. A criterion passes when every
//! row carrying a tolerance passes and the run finishes inside its time limit.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use chaoslab_cli::suites::{self, ChaosSettings, ZeroSettings};
use chaoslab_cli::ResultRow;

type Suite = Box<dyn Fn() -> chaoslab::Result<Vec<ResultRow>>>;

struct Criterion {
    id: u32,
    title: &'static str,
    limit: Option<Duration>,
    run: Suite,
}

fn zeros_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/zeros_100k.txt")
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: 1, title: "double gamma functional equations", limit: secs(1), run: Box::new(suites::double_gamma_equations) },
        Criterion { id: 2, title: "Mellin cross-route agreement", limit: secs(10), run: Box::new(suites::mellin_routes) },
        Criterion { id: 3, title: "moment matching", limit: None, run: Box::new(suites::mellin_moments) },
        Criterion { id: 4, title: "Mellin functional equations", limit: None, run: Box::new(suites::mellin_functional_equations) },
        Criterion { id: 5, title: "factor decomposition", limit: None, run: Box::new(suites::mellin_decomposition) },
        Criterion { id: 6, title: "Levy-Khinchine reconstruction", limit: None, run: Box::new(suites::levy_khinchine) },
        Criterion { id: 7, title: "asymptotic expansion order", limit: None, run: Box::new(suites::asymptotic_order) },
        Criterion {
            id: 8,
            title: "Selberg oracle",
            limit: secs(60),
            run: Box::new(|| {
                let mut rows = suites::selberg_quadrature()?;
                rows.extend(suites::selberg_monte_carlo(7)?);
                Ok(rows)
            }),
        },
        Criterion { id: 9, title: "density inversion", limit: secs(30), run: Box::new(suites::density_inversion) },
        Criterion {
            id: 10,
            title: "chaos simulator",
            limit: None,
            run: Box::new(|| suites::chaos_checks(&ChaosSettings::default())),
        },
        Criterion {
            id: 11,
            title: "zero statistics",
            limit: None,
            run: Box::new(|| suites::zero_checks(&zeros_path(), &ZeroSettings { seed: 7, ..ZeroSettings::default() })),
        },
    ]
}

fn verify_all_report(dir: &Path, name: &str) -> Result<Vec<u8>, String> {
    let out = dir.join(name);
    let status = Command::new(env!("CARGO_BIN_EXE_chaoslab"))
        .args(["verify", "all", "--seed", "7", "--out"])
        .arg(&out)
        .output()
        .map_err(|e| e.to_string())?;
    // exit 1 only reports failing rows; the report is still written
    if !matches!(status.status.code(), Some(0 | 1)) {
        return Err(format!("exit {:?}: {}", status.status.code(), String::from_utf8_lossy(&status.stderr)));
    }
    std::fs::read(&out).map_err(|e| e.to_string())
}

fn determinism() -> (bool, String) {
    let dir = tempfile::tempdir().expect("temporary directory");
    match (verify_all_report(dir.path(), "a.json"), verify_all_report(dir.path(), "b.json")) {
        (Ok(a), Ok(b)) if a == b => (true, format!("{} identical bytes", a.len())),
        (Ok(a), Ok(b)) => (false, format!("reports differ ({} vs {} bytes)", a.len(), b.len())),
        (Err(e), _) | (_, Err(e)) => (false, e),
    }
}

fn main() {
    let mut failed = Vec::new();
    for c in criteria() {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(rows) => {
                let bad: Vec<String> = rows
                    .iter()
                    .filter(|r| r.pass == Some(false))
                    .map(|r| format!("{}={:.6e} (tol {:.3e})", r.name, r.value, r.tolerance.unwrap_or(f64::NAN)))
                    .collect();
                let slow = c.limit.is_some_and(|l| elapsed > l);
                let mut detail = bad.join(", ");
                if slow {
                    detail.push_str(&format!(" over the {:?} limit", c.limit.unwrap()));
                }
                (bad.is_empty() && !slow, detail)
            }
            Err(e) => (false, format!("error: {e}")),
        };
        println!(
            "criterion {:>2} {:<36} {}  {:.2} s  {}",
            c.id,
            c.title,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            detail
        );
        if !pass {
            failed.push(c.id);
        }
    }
    let start = Instant::now();
    let (pass, detail) = determinism();
    println!(
        "criterion 12 {:<36} {}  {:.2} s  {}",
        "determinism of verify all",
        if pass { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64(),
        detail
    );
    if !pass {
        failed.push(12);
    }
    if !failed.is_empty() {
        eprintln!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
