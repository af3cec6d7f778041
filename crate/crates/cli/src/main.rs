#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qharmonic::harmonic::{ComponentResult, NUMERIC_TOL_LAPLACIAN};
use qharmonic::path::{read_path_file, ProbeReport};
use qharmonic::regularity::{ConstraintResult, NUMERIC_TOL_FIRST, NUMERIC_TOL_SECOND};
use qharmonic::{
    check_cr, check_cr_complex, check_harmonic, check_harmonic_complex, check_second_order_chains, integrate_f_dq,
    parse, path_independence_probe, CheckOptions, Convention, Error, FdSettings, FunctionFile, Grid4D, Method, Mode,
    Ordering, Quaternion, SolveOptions, Variant,
};

mod report;

use report::{point, Report};

#[derive(Parser)]
#[command(
    name = "qharmonic",
    version,
    about = "Check quaternionic derivative relations, harmonicity and line integrals; solve the 4D Laplace equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Symbolic,
    Numeric,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    /// The canonical relation set.
    #[value(alias = "paper")]
    Canonical,
    /// Left-multiplication Jacobian system, for comparison.
    FueterLeft,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Left,
    Right,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Jacobi,
    GaussSeidel,
    Sor,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderingArg {
    Lexicographic,
    RedBlack,
}

#[derive(clap::Args)]
struct CheckArgs {
    /// Function file (F1..F4, or u and v with --complex).
    #[arg(long)]
    function: PathBuf,
    #[arg(long, value_enum, default_value = "symbolic")]
    mode: ModeArg,
    /// Sample points for numeric mode.
    #[arg(long, default_value_t = 100)]
    points: usize,
    /// Numeric residual tolerance; the default depends on the check.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Treat the file as a complex pair (u, v) over x1, x2.
    #[arg(long)]
    complex: bool,
    /// First-derivative base step.
    #[arg(long, default_value_t = 6e-6)]
    h1: f64,
    /// Second-derivative base step.
    #[arg(long, default_value_t = 1.2e-4)]
    h2: f64,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the first-order relations (and optionally the second-order chains).
    CheckCr {
        #[command(flatten)]
        common: CheckArgs,
        #[arg(long, value_enum, default_value = "canonical")]
        variant: VariantArg,
        #[arg(long)]
        second_order: bool,
    },
    /// Check that every component has vanishing Laplacian.
    CheckHarmonic {
        #[command(flatten)]
        common: CheckArgs,
    },
    /// Integrate f(q) dq along a path.
    Integrate {
        /// Integrand file (f, or f1..f4).
        #[arg(long)]
        function: PathBuf,
        #[arg(long)]
        path: PathBuf,
        #[arg(long, value_enum, default_value = "left")]
        convention: ConventionArg,
        /// Quadrature subintervals per unit length.
        #[arg(long, default_value_t = 64)]
        density: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare f dq integrals along random polylines with shared endpoints.
    ProbeIndependence {
        #[arg(long)]
        function: PathBuf,
        #[arg(long, value_parser = parse_quat)]
        from: [f64; 4],
        #[arg(long, value_parser = parse_quat)]
        to: [f64; 4],
        #[arg(long, default_value_t = 10)]
        paths: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Largest accepted spread between integrals.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, value_enum, default_value = "left")]
        convention: ConventionArg,
        #[arg(long, default_value_t = 64)]
        density: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the Dirichlet problem for the 4D Laplace equation on a cube.
    Solve {
        /// Boundary values as an expression in x1..x4.
        #[arg(long)]
        boundary: String,
        /// Lattice points per axis.
        #[arg(long)]
        n: usize,
        /// Cube bounds `lo,hi` shared by every axis.
        #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true)]
        bounds: (f64, f64),
        #[arg(long, value_enum, default_value = "sor")]
        method: MethodArg,
        #[arg(long, default_value_t = 1.5)]
        omega: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 200_000)]
        max_iters: usize,
        #[arg(long, value_enum, default_value = "lexicographic")]
        ordering: OrderingArg,
        /// Binary grid dump.
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Exact solution to compare the interior against.
        #[arg(long)]
        reference: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_numbers(s: &str, count: usize) -> Result<Vec<f64>, String> {
    let v = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if v.len() != count {
        return Err(format!("expected {count} comma-separated numbers, got {}", v.len()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err("numbers must be finite".into());
    }
    Ok(v)
}

fn parse_quat(s: &str) -> Result<[f64; 4], String> {
    let v = parse_numbers(s, 4)?;
    Ok([v[0], v[1], v[2], v[3]])
}

fn parse_box(s: &str) -> Result<(f64, f64), String> {
    let v = parse_numbers(s, 2)?;
    Ok((v[0], v[1]))
}

/// A run that produced a report, plus the human summary lines.
struct Outcome {
    pass: bool,
    json: String,
    summary: Vec<String>,
    out: Option<PathBuf>,
}

impl Outcome {
    fn new<B: Serialize>(report: Report<B>, summary: Vec<String>, out: Option<PathBuf>) -> Self {
        Self { pass: report.passed(), json: report.to_json(), summary, out }
    }
}

#[derive(Serialize)]
struct ConstraintBody {
    variant: &'static str,
    tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    second_order_tolerance: Option<f64>,
    points_tested: usize,
    points_skipped: usize,
    constraints: Vec<ConstraintResult<f64>>,
}

#[derive(Serialize)]
struct ComponentBody {
    tolerance: f64,
    points_tested: usize,
    points_skipped: usize,
    components: Vec<ComponentResult<f64>>,
}

#[derive(Serialize)]
struct IntegrateStats {
    value: Quaternion<f64>,
    abs_error_estimate: f64,
    convention: Convention,
    density: usize,
}

#[derive(Serialize)]
struct IntegrateBody {
    stats: IntegrateStats,
}

#[derive(Serialize)]
struct ProbeBody {
    tolerance: f64,
    density: usize,
    stats: ProbeReport<f64>,
}

#[derive(Serialize)]
struct ReferenceStats {
    expr: String,
    max_err: f64,
    mean_err: f64,
}

#[derive(Serialize)]
struct SolveStatsBody {
    n: usize,
    #[serde(rename = "box")]
    bounds: [f64; 2],
    h: f64,
    interior_points: usize,
    method: Method,
    ordering: Ordering,
    omega: f64,
    tol: f64,
    max_iters: usize,
    iterations: usize,
    converged: bool,
    final_residual: f64,
    discrete_laplacian_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference: Option<ReferenceStats>,
}

#[derive(Serialize)]
struct SolveBody {
    stats: SolveStatsBody,
}

fn options(c: &CheckArgs, default_tol: f64) -> Result<CheckOptions<f64>, Error> {
    let fd = FdSettings::new(c.h1, c.h2)?;
    let mut o = match c.mode {
        ModeArg::Symbolic => CheckOptions::symbolic(c.seed),
        ModeArg::Numeric => CheckOptions::numeric(c.points, c.tol.unwrap_or(default_tol), c.seed),
    };
    o.fd = fd;
    Ok(o)
}

fn mode_notes(c: &CheckArgs) -> Vec<String> {
    let mut notes = Vec::new();
    if matches!(c.mode, ModeArg::Symbolic) && c.tol.is_some() {
        notes.push("symbolic mode uses the fixed identity-test tolerance; --tol was ignored".into());
    }
    notes
}

fn constraint_lines(cs: &[ConstraintResult<f64>]) -> Vec<String> {
    cs.iter()
        .map(|c| {
            format!(
                "  {:<8} {:>16} = {:<16} {}  max {:.3e} at {}",
                c.id,
                c.lhs,
                c.rhs,
                if c.passed { "ok  " } else { "FAIL" },
                c.residual_max,
                point(&c.worst_point)
            )
        })
        .collect()
}

fn run_check_cr(c: CheckArgs, variant: VariantArg, second_order: bool) -> Result<Outcome, Error> {
    let file = FunctionFile::read(&c.function)?;
    let variant_value = match variant {
        VariantArg::Canonical => Variant::Canonical,
        VariantArg::FueterLeft => Variant::FueterLeft,
    };
    let mut notes = mode_notes(&c);
    let (report, second_tol) = if c.complex {
        if second_order {
            return Err(Error::Precondition {
                operation: "check-cr",
                detail: "--second-order does not apply to --complex".into(),
            });
        }
        let (u, v) = file.complex_pair()?;
        (check_cr_complex(&u, &v, &options(&c, NUMERIC_TOL_FIRST)?)?, None)
    } else {
        let f = file.quat_function()?;
        let mut o = options(&c, NUMERIC_TOL_FIRST)?;
        o.variant = variant_value;
        let first = check_cr(&f, &o)?;
        if second_order {
            let mut o2 = options(&c, NUMERIC_TOL_SECOND)?;
            o2.variant = variant_value;
            let second = check_second_order_chains(&f, &o2)?;
            let tol = second.tolerance;
            (first.merge(second), Some(tol))
        } else {
            (first, None)
        }
    };
    if matches!(variant, VariantArg::FueterLeft) {
        notes.push("fueter-left is a comparison system, not the canonical relation set".into());
    }
    if report.points_skipped > 0 {
        notes.push(format!("{} sample points were skipped as outside the domain", report.points_skipped));
    }
    let label = if c.complex {
        "complex"
    } else if matches!(variant, VariantArg::Canonical) {
        "canonical"
    } else {
        "fueter-left"
    };
    let mut summary = vec![format!(
        "check-cr {} ({}, {} mode, seed {}): {} constraints",
        c.function.display(),
        label,
        report.mode,
        c.seed,
        report.constraints.len()
    )];
    summary.extend(constraint_lines(&report.constraints));
    let body = ConstraintBody {
        variant: label,
        tolerance: report.tolerance,
        second_order_tolerance: second_tol,
        points_tested: report.points_tested,
        points_skipped: report.points_skipped,
        constraints: report.constraints,
    };
    let mut r = Report::new("check-cr", report.mode.to_string(), report.verdict.is_pass(), body);
    r.input_files = vec![c.function.display().to_string()];
    r.seed = c.seed;
    r.notes = notes;
    summary.push(format!("verdict: {}", r.verdict));
    Ok(Outcome::new(r, summary, c.out))
}

fn run_check_harmonic(c: CheckArgs) -> Result<Outcome, Error> {
    let file = FunctionFile::read(&c.function)?;
    let o = options(&c, NUMERIC_TOL_LAPLACIAN)?;
    let report = if c.complex {
        let (u, v) = file.complex_pair()?;
        check_harmonic_complex(&u, &v, &o)?
    } else {
        check_harmonic(&file.quat_function()?, &o)?
    };
    let mut notes = mode_notes(&c);
    if report.points_skipped > 0 {
        notes.push(format!("{} sample points were skipped as outside the domain", report.points_skipped));
    }
    let mut summary = vec![format!("check-harmonic {} ({} mode, seed {})", c.function.display(), report.mode, c.seed)];
    for comp in &report.components {
        let lap = comp.laplacian_expr.as_deref().map(|l| format!("  laplacian = {l}")).unwrap_or_default();
        summary.push(format!(
            "  {:<3} {}  max {:.3e} at {}{}",
            comp.component,
            if comp.passed { "ok  " } else { "FAIL" },
            comp.residual_max,
            point(&comp.worst_point),
            lap
        ));
    }
    let body = ComponentBody {
        tolerance: report.tolerance,
        points_tested: report.points_tested,
        points_skipped: report.points_skipped,
        components: report.components,
    };
    let mut r = Report::new("check-harmonic", report.mode.to_string(), report.verdict.is_pass(), body);
    r.input_files = vec![c.function.display().to_string()];
    r.seed = c.seed;
    r.notes = notes;
    summary.push(format!("verdict: {}", r.verdict));
    Ok(Outcome::new(r, summary, c.out))
}

fn convention(c: ConventionArg) -> Convention {
    match c {
        ConventionArg::Left => Convention::Left,
        ConventionArg::Right => Convention::Right,
    }
}

fn run_integrate(
    function: PathBuf,
    path: PathBuf,
    conv: ConventionArg,
    density: usize,
    out: Option<PathBuf>,
) -> Result<Outcome, Error> {
    let f = FunctionFile::read(&function)?.integrand()?;
    let p = read_path_file::<f64>(&path)?.with_density(density)?;
    let res = integrate_f_dq(&f, &p, convention(conv))?;
    let summary = vec![
        format!(
            "integrate {} along {} ({} convention, density {density})",
            function.display(),
            path.display(),
            res.convention
        ),
        format!("  value = {}", res.value),
        format!("  error estimate = {:.3e}", res.abs_error_estimate),
    ];
    let body = IntegrateBody {
        stats: IntegrateStats {
            value: res.value,
            abs_error_estimate: res.abs_error_estimate,
            convention: res.convention,
            density,
        },
    };
    let mut r = Report::new("integrate", Mode::Numeric.to_string(), true, body);
    r.input_files = vec![function.display().to_string(), path.display().to_string()];
    Ok(Outcome::new(r, summary, out))
}

#[allow(clippy::too_many_arguments)]
fn run_probe(
    function: PathBuf,
    from: [f64; 4],
    to: [f64; 4],
    paths: usize,
    seed: u64,
    tol: f64,
    conv: ConventionArg,
    density: usize,
    out: Option<PathBuf>,
) -> Result<Outcome, Error> {
    if !(tol > 0.0) {
        return Err(Error::Precondition { operation: "probe-independence", detail: "--tol must be positive".into() });
    }
    let f = FunctionFile::read(&function)?.integrand()?;
    let probe = path_independence_probe(
        &f,
        Quaternion::from_array(from),
        Quaternion::from_array(to),
        paths,
        seed,
        convention(conv),
        density,
    )?;
    let pass = probe.max_deviation <= tol;
    let mut summary = vec![format!(
        "probe-independence {} from {} to {} ({} paths, seed {seed})",
        function.display(),
        point(&from),
        point(&to),
        paths
    )];
    for (k, q) in probe.integrals.iter().enumerate() {
        summary.push(format!("  path {k}: {q}"));
    }
    summary.push(format!("  max deviation = {:.3e} (tol {tol:e})", probe.max_deviation));
    let mut r = Report::new(
        "probe-independence",
        Mode::Numeric.to_string(),
        pass,
        ProbeBody { tolerance: tol, density, stats: probe },
    );
    r.input_files = vec![function.display().to_string()];
    r.seed = seed;
    summary.push(format!("verdict: {}", r.verdict));
    Ok(Outcome::new(r, summary, out))
}

#[allow(clippy::too_many_arguments)]
fn run_solve(
    boundary: String,
    n: usize,
    bounds: (f64, f64),
    method: MethodArg,
    omega: f64,
    tol: f64,
    max_iters: usize,
    ordering: OrderingArg,
    dump: Option<PathBuf>,
    reference: Option<String>,
    out: Option<PathBuf>,
) -> Result<Outcome, Error> {
    let bexpr = parse(&boundary)?;
    let reference = reference.map(|r| parse(&r).map(|e| (r, e))).transpose()?;
    let mut grid = Grid4D::cube(n, bounds.0, bounds.1)?;
    grid.apply_boundary(&bexpr)?;
    let method = match method {
        MethodArg::Jacobi => Method::Jacobi,
        MethodArg::GaussSeidel => Method::GaussSeidel,
        MethodArg::Sor => Method::Sor,
    };
    let ordering = match ordering {
        OrderingArg::Lexicographic => Ordering::Lexicographic,
        OrderingArg::RedBlack => Ordering::RedBlack,
    };
    let stats = grid.solve(&SolveOptions { method, omega, tol, max_iters, ordering })?;
    let mut notes = Vec::new();
    if method == Method::Jacobi && ordering == Ordering::RedBlack {
        notes.push("jacobi ignores --ordering".into());
    }
    if method != Method::Sor && omega != 1.5 {
        notes.push(format!("{method} ignores --omega"));
    }
    let reference = reference
        .map(|(text, e)| {
            grid.compare_to_reference(&e).map(|(max_err, mean_err)| ReferenceStats { expr: text, max_err, mean_err })
        })
        .transpose()?;
    if let Some(path) = &dump {
        grid.write_dump_file(path)?;
    }
    let mut summary = vec![
        format!("solve n={n} box [{}, {}]^4 boundary `{boundary}`", bounds.0, bounds.1),
        format!(
            "  {method} ({}, omega {}): {} iterations, residual {:.3e}, {}",
            ordering,
            stats.omega,
            stats.iterations,
            stats.final_residual,
            if stats.converged { "converged" } else { "not converged" }
        ),
    ];
    if let Some(r) = &reference {
        summary.push(format!("  vs `{}`: max error {:.3e}, mean error {:.3e}", r.expr, r.max_err, r.mean_err));
    }
    let body = SolveBody {
        stats: SolveStatsBody {
            n,
            bounds: [bounds.0, bounds.1],
            h: grid.spacing(),
            interior_points: grid.interior_count(),
            method,
            ordering,
            omega: stats.omega,
            tol,
            max_iters,
            iterations: stats.iterations,
            converged: stats.converged,
            final_residual: stats.final_residual,
            discrete_laplacian_residual: grid.discrete_laplacian_residual(),
            reference,
        },
    };
    let mut r = Report::new("solve", Mode::Numeric.to_string(), stats.converged, body);
    r.notes = notes;
    summary.push(format!("verdict: {}", r.verdict));
    Ok(Outcome::new(r, summary, out))
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    match cli.command {
        Command::CheckCr { common, variant, second_order } => run_check_cr(common, variant, second_order),
        Command::CheckHarmonic { common } => run_check_harmonic(common),
        Command::Integrate { function, path, convention, density, out } => {
            run_integrate(function, path, convention, density, out)
        }
        Command::ProbeIndependence { function, from, to, paths, seed, tol, convention, density, out } => {
            run_probe(function, from, to, paths, seed, tol, convention, density, out)
        }
        Command::Solve { boundary, n, bounds, method, omega, tol, max_iters, ordering, dump, reference, out } => {
            run_solve(boundary, n, bounds, method, omega, tol, max_iters, ordering, dump, reference, out)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_domain() {
        3
    } else if matches!(e, Error::Diverged(_)) {
        1
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            if let Some(path) = &outcome.out {
                if let Err(e) = std::fs::write(path, &outcome.json) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(if outcome.pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
