//! Command-line front end. `run` returns the process exit code:
//! 0 on pass, 1 on mismatch, 2 on usage errors.

use crate::curvature::{self, abelianize, abelianize_matrix, ComparisonReport, Grid, Object};
use crate::metric::MetricDescriptor;
use crate::reference::{classical_ricci, classical_scalar};
use crate::verify::{self, SuiteReport};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "ncgeom", version, about = "Curvature densities of noncommutative 3-tori")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Scalar curvature density against its closed forms.
    Scalar(RunConfig),
    /// Ricci density against its closed forms.
    Ricci(RunConfig),
    /// Second heat density of the 1-form Laplacian against its closed forms.
    Density(RunConfig),
    /// Run a verification suite.
    Verify(VerifyConfig),
    /// Commutative limit of a density, compared with the classical formula.
    Abelianize(AbelianizeConfig),
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// conformal3 or nonconformal3.
    #[arg(long)]
    pub metric: String,
    /// Grid `a:b:n` (n points for one-variable words, ⌈√n⌉² for two).
    #[arg(long, default_value = "-3:3:25", conflicts_with = "points", allow_hyphen_values = true)]
    pub grid: String,
    /// JSON file with an array of {"s": .., "t": ..} points.
    #[arg(long)]
    pub points: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Accepted for a uniform interface; grids are deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
pub enum Suite {
    AppendixB,
    Limits,
    Structure,
    AppendixA,
    ProductDecomposition,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyConfig {
    #[arg(value_enum)]
    pub suite: Suite,
    /// Tolerance (suite default when omitted).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Distance from the origin for the limits suite.
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,
    /// Points per function (appendix-b) or fuzzed points (structure,
    /// product-decomposition).
    #[arg(long)]
    pub points: Option<usize>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
pub enum ClassicalObject {
    Scalar,
    Ricci,
}

#[derive(Args, Debug, Clone)]
pub struct AbelianizeConfig {
    /// conformal3, nonconformal3 or flat.
    #[arg(long)]
    pub metric: String,
    #[arg(long, value_enum, default_value_t = ClassicalObject::Scalar)]
    pub object: ClassicalObject,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
struct UsageError(String);

#[derive(Deserialize)]
struct PointSpec {
    s: f64,
    #[serde(default)]
    t: f64,
}

fn usage<E: std::fmt::Display>(e: E) -> UsageError {
    UsageError(e.to_string())
}

pub fn parse_grid(spec: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("grid `{}` is not of the form a:b:n", spec));
    }
    let a: f64 = parts[0].parse().map_err(|_| format!("bad grid start `{}`", parts[0]))?;
    let b: f64 = parts[1].parse().map_err(|_| format!("bad grid end `{}`", parts[1]))?;
    let n: usize = parts[2].parse().map_err(|_| format!("bad grid count `{}`", parts[2]))?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(format!("grid `{}` is empty", spec));
    }
    Ok(Grid::linspace(a, b, n))
}

fn load_points(path: &PathBuf) -> Result<Grid, UsageError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {}", path.display(), e)))?;
    let pts: Vec<PointSpec> = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {}", path.display(), e)))?;
    if pts.is_empty() {
        return Err(usage("point list is empty"));
    }
    Ok(Grid::from_points(&pts.iter().map(|p| (p.s, p.t)).collect::<Vec<_>>()))
}

fn write_out(path: &Option<PathBuf>, text: &str) -> Result<(), UsageError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| usage(format!("{}: {}", p.display(), e))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).and_then(|_| so.flush()).map_err(usage)
        }
    }
}

fn num(x: f64) -> String {
    format!("{:.16e}", x)
}

pub fn comparison_csv(r: &ComparisonReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let _ = w.write_record(["metric", "object", "entry", "basis_word", "k_prefix", "s", "t", "engine", "reference", "abs_err", "rel_err"]);
    for t in &r.tables {
        let entry = t.entry.map(|(i, j)| format!("{}{}", i, j)).unwrap_or_default();
        for row in &t.rows {
            let s = row.point.first().map(|v| num(*v)).unwrap_or_default();
            let tt = row.point.get(1).map(|v| num(*v)).unwrap_or_default();
            let _ = w.write_record([
                t.metric.clone(),
                t.object.clone(),
                entry.clone(),
                t.basis_word.clone(),
                t.k_prefix.to_string(),
                s,
                tt,
                num(row.engine),
                num(row.reference),
                num(row.abs_err),
                num(row.rel_err),
            ]);
        }
    }
    String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
}

pub fn suite_csv(r: &SuiteReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let _ = w.write_record(["suite", "name", "point", "value", "expected", "error", "pass"]);
    for c in &r.checks {
        let pt = c.point.iter().map(|v| num(*v)).collect::<Vec<_>>().join(";");
        let _ = w.write_record([r.suite.clone(), c.name.clone(), pt, num(c.value), num(c.expected), num(c.error), c.pass.to_string()]);
    }
    String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_default();
    s.push('\n');
    s
}

fn cmd_compare(cfg: &RunConfig, object: Object) -> Result<bool, UsageError> {
    if cfg.tol.is_nan() || cfg.tol <= 0.0 {
        return Err(usage("--tol must be positive"));
    }
    let m = MetricDescriptor::by_name(&cfg.metric).map_err(usage)?;
    let grid = match &cfg.points {
        Some(p) => load_points(p)?,
        None => parse_grid(&cfg.grid).map_err(usage)?,
    };
    let report = curvature::compare(&m, object, &grid, cfg.tol).map_err(usage)?;
    let text = match cfg.output.format {
        Format::Json => to_json(&report),
        Format::Csv => comparison_csv(&report),
    };
    write_out(&cfg.output.out, &text)?;
    eprintln!("{} {}: worst relative error {:.3e} (tol {:e}) {}", report.metric, report.object, report.worst_rel_err, report.tol, verdict(report.pass));
    Ok(report.pass)
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn cmd_verify(cfg: &VerifyConfig) -> Result<bool, UsageError> {
    if cfg.tol.is_some_and(|t| t.is_nan() || t <= 0.0) {
        return Err(usage("--tol must be positive"));
    }
    if cfg.points == Some(0) {
        return Err(usage("--points must be positive"));
    }
    let report = match cfg.suite {
        Suite::AppendixB => verify::appendix_b(cfg.points.unwrap_or(20), cfg.tol.unwrap_or(1e-8), cfg.seed),
        Suite::Limits => {
            let engine = verify::EngineTables::build().map_err(usage)?;
            verify::limits(&engine, cfg.eps, cfg.tol.unwrap_or(1e-3))
        }
        Suite::Structure => verify::structure(cfg.points.unwrap_or(100), cfg.tol.unwrap_or(1e-10), cfg.seed).map_err(usage)?,
        Suite::AppendixA => verify::appendix_a().map_err(usage)?,
        Suite::ProductDecomposition => {
            verify::product_decomposition(cfg.points.unwrap_or(100), cfg.tol.unwrap_or(1e-6), cfg.seed).map_err(usage)?
        }
    };
    let text = match cfg.output.format {
        Format::Json => to_json(&report),
        Format::Csv => suite_csv(&report),
    };
    write_out(&cfg.output.out, &text)?;
    for n in &report.notes {
        eprintln!("note: {}", n);
    }
    eprintln!("{}: {} checks, worst {:.3e} {}", report.suite, report.checks.len(), report.worst, verdict(report.pass));
    Ok(report.pass)
}

fn cmd_abelianize(cfg: &AbelianizeConfig) -> Result<bool, UsageError> {
    let m = if cfg.metric == "flat" { MetricDescriptor::flat(3) } else { MetricDescriptor::by_name(&cfg.metric).map_err(usage)? };
    if m.dimension != 3 {
        return Err(usage(format!("no classical formula for {}", m.name())));
    }
    let (text, pass) = match cfg.object {
        ClassicalObject::Scalar => {
            let got = abelianize(&curvature::scalar_density(&m).map_err(usage)?, &m).map_err(usage)?;
            let pass = got == classical_scalar(&m);
            (format!("{}\n", got), pass)
        }
        ClassicalObject::Ricci => {
            let got = abelianize_matrix(&curvature::ricci_density(&m).map_err(usage)?, &m).map_err(usage)?;
            let expected = classical_ricci(&m);
            let mut s = String::new();
            for (idx, e) in got.iter().enumerate() {
                s.push_str(&format!("({},{}) {}\n", idx / 3 + 1, idx % 3 + 1, e));
            }
            (s, got == expected)
        }
    };
    write_out(&cfg.out, &text)?;
    eprintln!("classical formula: {}", if pass { "match" } else { "mismatch" });
    Ok(pass)
}

pub fn execute(cli: &Cli) -> i32 {
    let r = match &cli.command {
        Command::Scalar(c) => cmd_compare(c, Object::Scalar),
        Command::Ricci(c) => cmd_compare(c, Object::Ricci),
        Command::Density(c) => cmd_compare(c, Object::OneForm),
        Command::Verify(c) => cmd_verify(c),
        Command::Abelianize(c) => cmd_abelianize(c),
    };
    match r {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(UsageError(msg)) => {
            eprintln!("error: {}", msg);
            2
        }
    }
}

/// Parses arguments and runs; clap usage errors exit with code 2.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec() {
        let g = parse_grid("-3:3:25").unwrap();
        assert_eq!(g.unary.len(), 25);
        assert_eq!(g.binary.len(), 25);
        assert_eq!(g.unary[12], vec![0.0]);
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("1:2:0").is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["ncgeom", "scalar", "--metric", "flat3"]), 2);
        assert_eq!(run(["ncgeom", "verify", "nonsense"]), 2);
        assert_eq!(run(["ncgeom", "scalar", "--metric", "conformal3", "--tol", "-1"]), 2);
    }
}
