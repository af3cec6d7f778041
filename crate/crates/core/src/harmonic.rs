//! Laplace-equation checks: each component of `F` (or `u`, `v` in the plane)
//! should have vanishing Laplacian.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{zero_test, EvalError, Expr, QuatFunction, Var};
use crate::numeric::partial2_fd;
use crate::regularity::{aggregate_points, CheckOptions, Mode, Verdict, SYMBOLIC_TOL, SYMBOLIC_TRIALS};
use crate::sampling::sample_points;
use crate::scalar::Scalar;

/// Default numeric tolerance for Laplacian residuals.
pub const NUMERIC_TOL_LAPLACIAN: f64 = 1e-3;

/// `Σ_{n=1..4} ∂²e/∂x_n²`, simplified.
pub fn laplacian_symbolic(e: &Expr) -> Expr {
    laplacian_over(e, &Var::SPATIAL)
}

/// Laplacian restricted to the given variables.
pub fn laplacian_over(e: &Expr, vars: &[Var]) -> Expr {
    vars.iter()
        .map(|&v| e.differentiate(v).differentiate(v))
        .reduce(Expr::add)
        .unwrap_or_else(|| Expr::lit(0.0))
        .simplify()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentResult<T> {
    pub component: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub laplacian_expr: Option<String>,
    pub residual_max: T,
    pub residual_mean: T,
    pub worst_point: [T; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarmonicReport<T> {
    pub mode: Mode,
    pub tolerance: T,
    pub seed: u64,
    pub points_tested: usize,
    pub points_skipped: usize,
    pub components: Vec<ComponentResult<T>>,
    pub verdict: Verdict,
}

/// Checks `ΔF_m = 0` for all four components.
pub fn check_harmonic<T: Scalar>(f: &QuatFunction, o: &CheckOptions<T>) -> Result<HarmonicReport<T>> {
    let names = ["F1", "F2", "F3", "F4"];
    let comps: Vec<(&str, &Expr)> = names.into_iter().zip(f.components.iter()).collect();
    run("check_harmonic", &comps, &Var::SPATIAL, o)
}

/// Checks `Δu = 0` and `Δv = 0` in the `(x1, x2)` plane.
pub fn check_harmonic_complex<T: Scalar>(u: &Expr, v: &Expr, o: &CheckOptions<T>) -> Result<HarmonicReport<T>> {
    for (name, e) in [("u", u), ("v", v)] {
        if e.variables().iter().any(|x| !matches!(x, Var::X1 | Var::X2)) {
            return Err(Error::precondition("check_harmonic_complex", format!("{name} may only reference x1 and x2")));
        }
    }
    run("check_harmonic_complex", &[("u", u), ("v", v)], &[Var::X1, Var::X2], o)
}

fn run<T: Scalar>(
    operation: &'static str,
    comps: &[(&str, &Expr)],
    vars: &[Var],
    o: &CheckOptions<T>,
) -> Result<HarmonicReport<T>> {
    match o.mode {
        Mode::Symbolic => {
            let laps: Vec<Expr> = comps.iter().map(|(_, e)| laplacian_over(e, vars)).collect();
            let tests = laps
                .par_iter()
                .map(|l| zero_test(l, SYMBOLIC_TRIALS, SYMBOLIC_TOL, o.seed))
                .collect::<Result<Vec<_>>>()?;
            let components: Vec<_> = comps
                .iter()
                .zip(laps.iter().zip(&tests))
                .map(|((name, _), (l, z))| ComponentResult {
                    component: name.to_string(),
                    passed: z.is_zero,
                    laplacian_expr: Some(l.to_string()),
                    residual_max: T::lit(z.max_abs),
                    residual_mean: T::lit(z.mean_abs),
                    worst_point: z.worst_point.map(T::lit),
                })
                .collect();
            Ok(HarmonicReport {
                mode: Mode::Symbolic,
                tolerance: T::lit(SYMBOLIC_TOL),
                seed: o.seed,
                points_tested: tests.iter().map(|z| z.points_tested).max().unwrap_or(0),
                points_skipped: tests.iter().map(|z| z.points_skipped).sum(),
                verdict: Verdict::from_all(components.iter().map(|c| c.passed)),
                components,
            })
        }
        Mode::Numeric => {
            if o.points == 0 {
                return Err(Error::precondition(operation, "points must be at least 1"));
            }
            if !(o.tol > T::zero()) {
                return Err(Error::precondition(operation, "tolerance must be positive"));
            }
            let axes: Vec<usize> =
                vars.iter().map(|v| Var::SPATIAL.iter().position(|s| s == v).expect("spatial variable") + 1).collect();
            let pts = sample_points::<T>(o.points, o.seed);
            let agg = aggregate_points(operation, &pts, comps.len(), |p| {
                comps
                    .iter()
                    .map(|(_, e)| {
                        let f = |x: [T; 4]| -> std::result::Result<T, EvalError> { e.eval_at(x) };
                        axes.iter().try_fold(T::zero(), |acc, &a| Ok(acc + partial2_fd(f, p, a, a, &o.fd)?))
                    })
                    .collect()
            })?;
            let components: Vec<_> = comps
                .iter()
                .enumerate()
                .map(|(k, (name, _))| ComponentResult {
                    component: name.to_string(),
                    passed: agg.max[k] <= o.tol,
                    laplacian_expr: None,
                    residual_max: agg.max[k],
                    residual_mean: agg.mean[k],
                    worst_point: agg.worst[k],
                })
                .collect();
            Ok(HarmonicReport {
                mode: Mode::Numeric,
                tolerance: o.tol,
                seed: o.seed,
                points_tested: agg.tested,
                points_skipped: agg.skipped,
                verdict: Verdict::from_all(components.iter().map(|c| c.passed)),
                components,
            })
        }
    }
}
