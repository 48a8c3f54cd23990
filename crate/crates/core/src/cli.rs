//! Command-line front end.
//!
//! Exit codes: 0 success, 1 argument or parse error, 2 no convergence or
//! collision, 3 inertia mismatch, 4 census bounds unmet, 5 not a central
//! configuration, 6 property failure. Data goes to stdout (or `--out`),
//! diagnostics to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::CcError;
use crate::geodesic::{enumerate_orderings, solve_geodesic, verify_inertia_via_sylvester, RESIDUAL_TOL};
use crate::geometry::ChartTag;
use crate::hessian::{constrained_hessian, spectrum_with_tolerance, SpectrumReport};
use crate::io::{census_csv, envelope, format_f64, load_configuration, parse_masses, rows_csv};
use crate::morse::{census_report, geodesic_count, lower_bounds, poincare_polynomial};
use crate::potential::{cc_residual, force_function};
use crate::search::{census, classify, SearchParams, RECORD_RESIDUAL};
use crate::verify::run_battery;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CONVERGENCE: i32 = 2;
pub const EXIT_INERTIA: i32 = 3;
pub const EXIT_BOUNDS: i32 = 4;
pub const EXIT_NOT_CC: i32 = 5;
pub const EXIT_PROPERTY: i32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "h2cc", version, about = "Central configurations of the curved N-body problem on H²")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct Output {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write data here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve every geodesic central configuration (one per ordering).
    Geodesic {
        /// Comma-separated masses or `equal:N`.
        #[arg(long)]
        masses: String,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = RESIDUAL_TOL)]
        tol_residual: f64,
        #[arg(long)]
        tol_zero: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Random multistart census with Morse audit and lower-bound comparison.
    Census {
        #[arg(long)]
        masses: String,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        tol_residual: Option<f64>,
        #[arg(long)]
        tol_zero: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Classify the configuration in a JSON file.
    Classify {
        file: PathBuf,
        #[arg(long, default_value_t = RECORD_RESIDUAL)]
        tol_residual: f64,
        #[arg(long)]
        tol_zero: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Run the randomized property battery.
    Verify {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Lower bounds, geodesic count and Poincaré polynomial for N bodies.
    Bounds {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        output: Output,
    },
}

/// Exit code for a library error.
pub fn exit_code(e: &CcError) -> i32 {
    match e {
        CcError::NoConvergence { .. }
        | CcError::Collision { .. }
        | CcError::CollisionApproach { .. }
        | CcError::OrderViolation
        | CcError::SingularSystem { .. } => EXIT_CONVERGENCE,
        CcError::InertiaMismatch(_) => EXIT_INERTIA,
        CcError::ConeViolation { .. } => EXIT_PROPERTY,
        _ => EXIT_USAGE,
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl From<CcError> for Failure {
    fn from(e: CcError) -> Self {
        Failure { code: exit_code(&e), message: e.to_string() }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: msg.into() }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Geodesic { masses, c, tol_residual, tol_zero, output } => {
            cmd_geodesic(&masses, c, tol_residual, tol_zero, &output, stdout, stderr)
        }
        Command::Census { masses, c, trials, seed, tol_residual, tol_zero, output } => {
            cmd_census(&masses, c, trials, seed, tol_residual, tol_zero, &output, stdout, stderr)
        }
        Command::Classify { file, tol_residual, tol_zero, output } => {
            cmd_classify(&file, tol_residual, tol_zero, &output, stdout, stderr)
        }
        Command::Verify { n, cases, seed, output } => cmd_verify(n, cases, seed, &output, stdout, stderr),
        Command::Bounds { n, output } => cmd_bounds(n, &output, stdout),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn emit(output: &Output, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| usage(e.to_string())),
    }
}

fn check_level(c: f64) -> Result<(), Failure> {
    if !(c.is_finite() && c > 0.0) {
        return Err(usage(format!("--c must be positive, got {c}")));
    }
    Ok(())
}

#[derive(Serialize)]
struct GeodesicRow {
    ordering: String,
    thetas: Vec<f64>,
    lambda: f64,
    u_value: f64,
    residual: f64,
    planar_residual: f64,
    index: usize,
    nullity: usize,
    n_plus: usize,
    eigenvalues: Vec<f64>,
    expected_inertia: bool,
}

#[derive(Serialize)]
struct GeodesicOutput {
    masses: Vec<f64>,
    level: f64,
    expected_count: u128,
    records: Vec<GeodesicRow>,
}

fn cmd_geodesic(
    masses: &str,
    c: f64,
    tol_residual: f64,
    tol_zero: Option<f64>,
    output: &Output,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    let masses = parse_masses(masses)?;
    check_level(c)?;
    let n = masses.len();
    if n < 2 {
        return Err(usage("need at least two masses"));
    }
    let mut code = EXIT_OK;
    let mut records = Vec::new();
    for o in enumerate_orderings(n)? {
        let g = match solve_geodesic(&masses, &o, c) {
            Ok(g) if g.residual < tol_residual => g,
            Ok(g) => {
                let _ = writeln!(stderr, "ordering {o}: residual {:e} above tolerance", g.residual);
                code = code.max(EXIT_CONVERGENCE);
                continue;
            }
            Err(e) => {
                let _ = writeln!(stderr, "ordering {o}: {e}");
                code = code.max(exit_code(&e));
                continue;
            }
        };
        let cfg = g.configuration()?;
        let spec: SpectrumReport = spectrum_with_tolerance(&constrained_hessian(&cfg, ChartTag::Geodesic)?, tol_zero)?;
        let sylvester_ok = verify_inertia_via_sylvester(&g).map(|r| r.matches_expected(n)).unwrap_or(false);
        let expected = spec.inertia() == (n - 2, 1, n) && sylvester_ok;
        if !expected {
            let _ = writeln!(stderr, "ordering {o}: inertia {:?}, expected {:?}", spec.inertia(), (n - 2, 1, n));
            code = code.max(EXIT_INERTIA);
        }
        records.push(GeodesicRow {
            ordering: o.to_string(),
            lambda: g.lambda,
            u_value: force_function(&cfg)?,
            residual: g.residual,
            planar_residual: cc_residual(&cfg)?,
            index: spec.n_minus,
            nullity: spec.n_zero,
            n_plus: spec.n_plus,
            eigenvalues: spec.eigenvalues,
            expected_inertia: expected,
            thetas: g.thetas,
        });
    }
    // no-convergence outranks an inertia mismatch
    if records.len() < enumerate_orderings(n)?.len() {
        code = EXIT_CONVERGENCE;
    }
    let out = GeodesicOutput { masses, level: c, expected_count: geodesic_count(n)?, records };
    let text = match output.format {
        Format::Json => envelope("geodesic", &out),
        Format::Csv => {
            let mut header: Vec<String> =
                ["ordering", "lambda", "U", "residual", "index", "nullity"].map(String::from).into();
            header.extend((1..=n).map(|i| format!("theta{i}")));
            let rows: Vec<Vec<String>> = out
                .records
                .iter()
                .map(|r| {
                    let mut row = vec![
                        r.ordering.clone(),
                        format_f64(r.lambda),
                        format_f64(r.u_value),
                        format_f64(r.residual),
                        r.index.to_string(),
                        r.nullity.to_string(),
                    ];
                    row.extend(r.thetas.iter().copied().map(format_f64));
                    row
                })
                .collect();
            rows_csv(&header, &rows)?
        }
        Format::Text => {
            let mut s =
                format!("{} geodesic central configurations (N!/2 = {})\n", out.records.len(), out.expected_count);
            for r in &out.records {
                s += &format!(
                    "{:>12}  lambda {:>+.10e}  U {:.10}  index {}  nullity {}  residual {:.1e}\n",
                    r.ordering, r.lambda, r.u_value, r.index, r.nullity, r.residual
                );
            }
            s
        }
    };
    emit(output, &text, stdout)?;
    Ok(code)
}

#[allow(clippy::too_many_arguments)]
fn cmd_census(
    masses: &str,
    c: f64,
    trials: usize,
    seed: u64,
    tol_residual: Option<f64>,
    tol_zero: Option<f64>,
    output: &Output,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    let masses = parse_masses(masses)?;
    check_level(c)?;
    if masses.len() < 2 {
        return Err(usage("need at least two masses"));
    }
    let mut params = SearchParams { trials, seed, zero_tolerance: tol_zero, ..SearchParams::default() };
    if let Some(t) = tol_residual {
        params.newton.accept = t;
    }
    let result = census(&masses, c, &params)?;
    for (kind, count) in &result.failures {
        let _ = writeln!(stderr, "{count} trials failed: {kind}");
    }
    let report = census_report(result.records, &masses, c)?;
    let code = if report.bounds_met() && report.audit.consistent() { EXIT_OK } else { EXIT_BOUNDS };
    if code != EXIT_OK {
        let _ = writeln!(
            stderr,
            "found {} classes ({} non-geodesic), bounds {} and {}; audit: {}",
            report.found_total,
            report.found_non_geodesic,
            report.bound_total,
            report.bound_non_geodesic,
            report.verdict
        );
    }
    let text = match output.format {
        Format::Json => envelope("census", &report),
        Format::Csv => census_csv(&report.classes)?,
        Format::Text => {
            let mut s = format!(
                "{} classes: {} geodesic (N!/2 = {}), {} non-geodesic\n",
                report.found_total, report.found_geodesic, report.expected_geodesic, report.found_non_geodesic
            );
            s += &format!(
                "lower bounds: total {} ({}), non-geodesic {} ({})\n",
                report.bound_total,
                if report.total_bound_met { "met" } else { "unmet" },
                report.bound_non_geodesic,
                if report.non_geodesic_bound_met { "met" } else { "unmet" }
            );
            s += &format!("M(t) = {}\nP(t) = {}\n", report.audit.m, report.audit.p);
            if let Some(r) = &report.audit.r {
                s += &format!("R(t) = {r}\n");
            }
            s += &format!("audit: {}\n", report.verdict);
            for (k, r) in report.classes.iter().enumerate() {
                let kind = r.ordering.as_ref().map_or("non-geodesic".into(), |o| format!("geodesic {o}"));
                s += &format!(
                    "class {k}: U {:.12}  lambda {:+.10e}  index {}  nullity {}  {kind}\n",
                    r.u_value,
                    r.lambda,
                    r.index(),
                    r.nullity()
                );
            }
            s
        }
    };
    emit(output, &text, stdout)?;
    Ok(code)
}

fn cmd_classify(
    file: &std::path::Path,
    tol_residual: f64,
    tol_zero: Option<f64>,
    output: &Output,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    let cfg = load_configuration(file)?;
    if cfg.len() < 2 {
        return Err(usage("need at least two bodies"));
    }
    cfg.ensure_no_collision()?;
    let record = classify(&cfg, tol_zero)?;
    let is_cc = record.residual < tol_residual;
    if !is_cc {
        let _ = writeln!(stderr, "not a central configuration: residual {:e}", record.residual);
    }
    #[derive(Serialize)]
    struct Classified<'a> {
        is_central_configuration: bool,
        index: usize,
        nullity: usize,
        record: &'a crate::search::CCRecord,
    }
    let text = match output.format {
        Format::Json => envelope(
            "classify",
            &Classified {
                is_central_configuration: is_cc,
                index: record.index(),
                nullity: record.nullity(),
                record: &record,
            },
        ),
        Format::Csv => census_csv(std::slice::from_ref(&record))?,
        Format::Text => format!(
            "residual {:e}\nlambda {:+.16e}\nindex {}\nnullity {}\ngeodesic {}\neigenvalues {:?}\n",
            record.residual,
            record.lambda,
            record.index(),
            record.nullity(),
            record.is_geodesic,
            record.spectrum.eigenvalues
        ),
    };
    emit(output, &text, stdout)?;
    Ok(if is_cc { EXIT_OK } else { EXIT_NOT_CC })
}

fn cmd_verify(
    n: usize,
    cases: usize,
    seed: u64,
    output: &Output,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    if !(2..=8).contains(&n) {
        return Err(usage(format!("--n must be between 2 and 8, got {n}")));
    }
    let report = run_battery(n, cases, seed);
    for w in &report.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    let text = match output.format {
        Format::Json => envelope("verify", &report),
        Format::Csv => {
            let header: Vec<String> = ["check", "cases", "failures", "passed"].map(String::from).into();
            let rows: Vec<Vec<String>> = report
                .checks
                .iter()
                .map(|c| vec![c.name.to_string(), c.cases.to_string(), c.failures.to_string(), c.passed().to_string()])
                .collect();
            rows_csv(&header, &rows)?
        }
        Format::Text => {
            let mut s = String::new();
            for c in &report.checks {
                s += &format!("{:<6} {:<44} {} cases\n", if c.passed() { "PASS" } else { "FAIL" }, c.name, c.cases);
                if let Some(d) = &c.detail {
                    s += &format!("       {d}\n");
                }
            }
            s
        }
    };
    emit(output, &text, stdout)?;
    Ok(if report.all_passed() { EXIT_OK } else { EXIT_PROPERTY })
}

fn cmd_bounds(n: usize, output: &Output, stdout: &mut dyn Write) -> Result<i32, Failure> {
    if n < 2 {
        return Err(usage(format!("--n must be at least 2, got {n}")));
    }
    let (total, non_geodesic) = lower_bounds(n)?;
    let geodesic = geodesic_count(n)?;
    let p = poincare_polynomial(n)?;
    #[derive(Serialize)]
    struct Bounds {
        n: usize,
        total: String,
        non_geodesic: String,
        geodesic: String,
        poincare: Vec<String>,
        poincare_text: String,
    }
    // integers as strings: they can exceed the exactly representable JSON range
    let b = Bounds {
        n,
        total: total.to_string(),
        non_geodesic: non_geodesic.to_string(),
        geodesic: geodesic.to_string(),
        poincare: p.coeffs().iter().map(|c| c.to_string()).collect(),
        poincare_text: p.to_string(),
    };
    let text = match output.format {
        Format::Json => envelope("bounds", &b),
        Format::Csv => rows_csv(
            &["n", "total", "non_geodesic", "geodesic", "poincare"].map(String::from),
            &[vec![
                n.to_string(),
                b.total.clone(),
                b.non_geodesic.clone(),
                b.geodesic.clone(),
                b.poincare_text.clone(),
            ]],
        )?,
        Format::Text => format!(
            "total >= {}\nnon-geodesic >= {}\ngeodesic = {}\nP(t) = {}\n",
            b.total, b.non_geodesic, b.geodesic, b.poincare_text
        ),
    };
    emit(output, &text, stdout)?;
    Ok(EXIT_OK)
}
