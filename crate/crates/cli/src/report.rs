use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::CliError;

/// One named result; `pass` is set only together with a tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub name: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: Option<bool>,
}

impl ResultRow {
    pub fn value(name: impl Into<String>, value: f64) -> Self {
        Self { name: name.into(), value, stderr: None, tolerance: None, pass: None }
    }

    pub fn estimate(name: impl Into<String>, value: f64, stderr: f64) -> Self {
        Self { stderr: Some(stderr), ..Self::value(name, value) }
    }

    /// PASS when |value − target| ≤ tolerance.
    pub fn near(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        let pass = (value - target).abs() <= tolerance;
        Self { tolerance: Some(tolerance), pass: Some(pass), ..Self::value(name, value) }
    }

    /// PASS when value ≤ tolerance, for residuals and error bounds.
    pub fn below(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { tolerance: Some(tolerance), pass: Some(value <= tolerance), ..Self::value(name, value) }
    }

    pub fn with_stderr(mut self, stderr: f64) -> Self {
        self.stderr = Some(stderr);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub results: Vec<ResultRow>,
    pub seed: u64,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.pass != Some(false))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

/// 17 significant digits for every float.
fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

struct Sig17<'a>(PrettyFormatter<'a>);

impl Formatter for Sig17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(sig17(value).as_bytes())
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json(report: &RunReport) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(PrettyFormatter::new()));
    report.serialize(&mut ser).expect("reports serialize");
    buf.push(b'\n');
    String::from_utf8(buf).expect("json is utf-8")
}

pub fn to_csv(report: &RunReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let opt = |x: Option<f64>| x.map(sig17).unwrap_or_default();
    w.write_record(["name", "value", "stderr", "tolerance", "pass"]).expect("in-memory write");
    for r in &report.results {
        let pass = r.pass.map(|p| p.to_string()).unwrap_or_default();
        w.write_record([r.name.clone(), sig17(r.value), opt(r.stderr), opt(r.tolerance), pass])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

pub fn emit_report(report: &RunReport, format: ReportFormat, destination: Option<&Path>) -> Result<(), CliError> {
    let text = match format {
        ReportFormat::Json => to_json(report),
        ReportFormat::Csv => to_csv(report),
    };
    match destination {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source }),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

/// Eight significant digits for the terminal summary.
pub fn sig8(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..8).contains(&mag) {
        format!("{:.*}", (7 - mag).max(0) as usize, x)
    } else {
        format!("{x:.7e}")
    }
}

pub fn summary(report: &RunReport) -> String {
    let mut out = String::new();
    for r in &report.results {
        out.push_str(&r.name);
        out.push_str("  ");
        out.push_str(&sig8(r.value));
        if let Some(se) = r.stderr {
            out.push_str(&format!(" ± {}", sig8(se)));
        }
        if let (Some(t), Some(p)) = (r.tolerance, r.pass) {
            out.push_str(&format!("  (tolerance {})  {}", sig8(t), if p { "PASS" } else { "FAIL" }));
        }
        out.push('\n');
    }
    out
}
