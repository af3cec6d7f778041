//! First-order relation system for quaternionic functions, the second-order
//! chains obtained by differentiating it, and the complex Cauchy-Riemann
//! baseline.
//!
//! The canonical system is four chains of equal signed partials
//! (`∂n Fm` is `∂Fm/∂xn`):
//!
//! ```text
//!  ∂1F1 =  ∂2F2 =  ∂3F3 =  ∂4F4
//!  ∂1F2 = -∂2F1 = -∂4F3 =  ∂3F4
//!  ∂1F3 = -∂3F1 = -∂4F2 =  ∂2F4
//!  ∂1F4 =  ∂4F1 = -∂3F2 = -∂2F3
//! ```
//!
//! Each chain contributes its three adjacent equalities, giving 12
//! constraints. Note the last chain: `∂F4/∂x1 = +∂F1/∂x4`.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{zero_test, EvalError, Expr, QuatFunction, Var};
use crate::numeric::{partial1_fd, partial2_fd, FdSettings};
use crate::sampling::sample_points;
use crate::scalar::Scalar;

/// Trials used by symbolic identity testing.
pub const SYMBOLIC_TRIALS: usize = 32;
/// Tolerance used by symbolic identity testing.
pub const SYMBOLIC_TOL: f64 = 1e-9;
/// Default numeric tolerance for first-order residuals.
pub const NUMERIC_TOL_FIRST: f64 = 1e-6;
/// Default numeric tolerance for second-order residuals.
pub const NUMERIC_TOL_SECOND: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Symbolic,
    Numeric,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Symbolic => "symbolic",
            Mode::Numeric => "numeric",
        })
    }
}

/// Which first-order system to check.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// The canonical relation set listed in the module docs.
    #[default]
    Canonical,
    /// Comparison system whose Jacobian is the matrix of left
    /// multiplication by a quaternion (`F(q) ≈ F(q0) + a (q - q0)`).
    /// Differs from the canonical set in the signs of the last two chains.
    FueterLeft,
}

/// `sign · ∂F_component / ∂x_axis`, with 1-based component and axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SignedPartial {
    pub sign: i8,
    pub component: usize,
    pub axis: usize,
}

impl SignedPartial {
    pub const fn new(sign: i8, component: usize, axis: usize) -> Self {
        Self { sign, component, axis }
    }
}

impl fmt::Display for SignedPartial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.sign < 0 { "-" } else { "" };
        write!(f, "{s}dF{}/dx{}", self.component, self.axis)
    }
}

/// `lhs = rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Constraint {
    pub lhs: SignedPartial,
    pub rhs: SignedPartial,
}

/// `sign · ∂²F_component / ∂x_axes[0] ∂x_axes[1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SignedSecondPartial {
    pub sign: i8,
    pub component: usize,
    pub axes: [usize; 2],
}

impl fmt::Display for SignedSecondPartial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.sign < 0 { "-" } else { "" };
        let [p, n] = self.axes;
        if p == n {
            write!(f, "{s}d2F{}/dx{p}^2", self.component)
        } else {
            write!(f, "{s}d2F{}/dx{p}dx{n}", self.component)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SecondOrderConstraint {
    pub lhs: SignedSecondPartial,
    pub rhs: SignedSecondPartial,
}

const fn sp(sign: i8, component: usize, axis: usize) -> SignedPartial {
    SignedPartial::new(sign, component, axis)
}

const CANONICAL_CHAINS: [[SignedPartial; 4]; 4] = [
    [sp(1, 1, 1), sp(1, 2, 2), sp(1, 3, 3), sp(1, 4, 4)],
    [sp(1, 2, 1), sp(-1, 1, 2), sp(-1, 3, 4), sp(1, 4, 3)],
    [sp(1, 3, 1), sp(-1, 1, 3), sp(-1, 2, 4), sp(1, 4, 2)],
    [sp(1, 4, 1), sp(1, 1, 4), sp(-1, 2, 3), sp(-1, 3, 2)],
];

const FUETER_LEFT_CHAINS: [[SignedPartial; 4]; 4] = [
    [sp(1, 1, 1), sp(1, 2, 2), sp(1, 3, 3), sp(1, 4, 4)],
    [sp(1, 2, 1), sp(-1, 1, 2), sp(-1, 3, 4), sp(1, 4, 3)],
    [sp(1, 3, 1), sp(-1, 1, 3), sp(1, 2, 4), sp(-1, 4, 2)],
    [sp(1, 4, 1), sp(-1, 1, 4), sp(-1, 2, 3), sp(1, 3, 2)],
];

/// The four chains of equal signed partials for a variant.
pub fn relation_chains(variant: Variant) -> &'static [[SignedPartial; 4]; 4] {
    match variant {
        Variant::Canonical => &CANONICAL_CHAINS,
        Variant::FueterLeft => &FUETER_LEFT_CHAINS,
    }
}

/// The 12 canonical first-order constraints, chain by chain, each chain's
/// equalities in adjacency order.
pub fn relation_constraints() -> Vec<Constraint> {
    relation_constraints_for(Variant::Canonical)
}

pub fn relation_constraints_for(variant: Variant) -> Vec<Constraint> {
    relation_chains(variant)
        .iter()
        .flat_map(|chain| chain.windows(2).map(|w| Constraint { lhs: w[0], rhs: w[1] }))
        .collect()
}

/// The 48 second-order constraints: for each chain and each axis `p`, the
/// chain differentiated by `x_p`, again as three adjacent equalities.
pub fn second_order_constraints(variant: Variant) -> Vec<SecondOrderConstraint> {
    let lift = |t: SignedPartial, p: usize| {
        // pure second partials are written with the repeated axis
        SignedSecondPartial { sign: t.sign, component: t.component, axes: [p, t.axis] }
    };
    let mut out = Vec::with_capacity(48);
    for chain in relation_chains(variant) {
        for p in 1..=4 {
            for w in chain.windows(2) {
                out.push(SecondOrderConstraint { lhs: lift(w[0], p), rhs: lift(w[1], p) });
            }
        }
    }
    out
}

/// Pass/fail of a whole report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_all(passes: impl IntoIterator<Item = bool>) -> Self {
        if passes.into_iter().all(|p| p) {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.is_pass() { "pass" } else { "fail" })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintResult<T> {
    pub id: String,
    pub lhs: String,
    pub rhs: String,
    pub passed: bool,
    /// Identity-test outcome (symbolic mode only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symbolic_pass: Option<bool>,
    /// Printed `lhs - rhs` after simplification (symbolic mode only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_expr: Option<String>,
    pub residual_max: T,
    pub residual_mean: T,
    pub worst_point: [T; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintReport<T> {
    pub mode: Mode,
    pub tolerance: T,
    pub seed: u64,
    pub points_tested: usize,
    pub points_skipped: usize,
    pub constraints: Vec<ConstraintResult<T>>,
    pub verdict: Verdict,
}

impl<T: Scalar> ConstraintReport<T> {
    fn new(
        mode: Mode,
        tolerance: T,
        seed: u64,
        tested: usize,
        skipped: usize,
        constraints: Vec<ConstraintResult<T>>,
    ) -> Self {
        let verdict = Verdict::from_all(constraints.iter().map(|c| c.passed));
        Self { mode, tolerance, seed, points_tested: tested, points_skipped: skipped, constraints, verdict }
    }

    pub fn find(&self, lhs: &str, rhs: &str) -> Option<&ConstraintResult<T>> {
        self.constraints.iter().find(|c| c.lhs == lhs && c.rhs == rhs)
    }

    pub fn failing(&self) -> impl Iterator<Item = &ConstraintResult<T>> {
        self.constraints.iter().filter(|c| !c.passed)
    }

    /// Appends another report's constraints (e.g. second-order after first-order).
    pub fn merge(mut self, other: ConstraintReport<T>) -> Self {
        self.points_tested = self.points_tested.max(other.points_tested);
        self.points_skipped += other.points_skipped;
        self.constraints.extend(other.constraints);
        self.verdict = Verdict::from_all(self.constraints.iter().map(|c| c.passed));
        self
    }
}

/// A signed partial derivative of any order of one component, 0-based.
#[derive(Clone, Debug)]
pub(crate) struct Term {
    pub sign: f64,
    pub component: usize,
    pub axes: Vec<usize>,
}

/// A labelled equality between two terms.
#[derive(Clone, Debug)]
pub(crate) struct Check {
    pub id: String,
    pub lhs_label: String,
    pub rhs_label: String,
    pub lhs: Term,
    pub rhs: Term,
}

fn first_order_checks(variant: Variant) -> Vec<Check> {
    relation_constraints_for(variant)
        .into_iter()
        .enumerate()
        .map(|(i, c)| Check {
            id: format!("C{}.{}", i / 3 + 1, i % 3 + 1),
            lhs_label: c.lhs.to_string(),
            rhs_label: c.rhs.to_string(),
            lhs: Term { sign: c.lhs.sign.into(), component: c.lhs.component - 1, axes: vec![c.lhs.axis - 1] },
            rhs: Term { sign: c.rhs.sign.into(), component: c.rhs.component - 1, axes: vec![c.rhs.axis - 1] },
        })
        .collect()
}

fn second_order_checks(variant: Variant) -> Vec<Check> {
    let term = |t: SignedSecondPartial| Term {
        sign: t.sign.into(),
        component: t.component - 1,
        axes: vec![t.axes[1] - 1, t.axes[0] - 1],
    };
    second_order_constraints(variant)
        .into_iter()
        .enumerate()
        .map(|(i, c)| Check {
            id: format!("S{}.{}.{}", i / 12 + 1, (i / 3) % 4 + 1, i % 3 + 1),
            lhs_label: c.lhs.to_string(),
            rhs_label: c.rhs.to_string(),
            lhs: term(c.lhs),
            rhs: term(c.rhs),
        })
        .collect()
}

fn complex_checks() -> Vec<Check> {
    let t = |sign: f64, component: usize, axis: usize| Term { sign, component, axes: vec![axis] };
    vec![
        Check {
            id: "CR1".into(),
            lhs_label: "du/dx1".into(),
            rhs_label: "dv/dx2".into(),
            lhs: t(1.0, 0, 0),
            rhs: t(1.0, 1, 1),
        },
        Check {
            id: "CR2".into(),
            lhs_label: "du/dx2".into(),
            rhs_label: "-dv/dx1".into(),
            lhs: t(1.0, 0, 1),
            rhs: t(-1.0, 1, 0),
        },
    ]
}

/// Symbolic partial derivatives of `components`, memoised by (component, axes).
struct DerivativeCache<'a> {
    components: &'a [Expr],
    cache: BTreeMap<(usize, Vec<usize>), Expr>,
}

impl<'a> DerivativeCache<'a> {
    fn new(components: &'a [Expr]) -> Self {
        Self { components, cache: BTreeMap::new() }
    }

    fn get(&mut self, component: usize, axes: &[usize]) -> Expr {
        if axes.is_empty() {
            return self.components[component].clone();
        }
        let key = (component, axes.to_vec());
        if let Some(e) = self.cache.get(&key) {
            return e.clone();
        }
        let (last, rest) = axes.split_last().expect("non-empty");
        let inner = self.get(component, rest);
        let var = Var::axis(last + 1).expect("axis in range");
        let d = inner.differentiate(var);
        self.cache.insert(key, d.clone());
        d
    }

    fn signed(&mut self, t: &Term) -> Expr {
        let d = self.get(t.component, &t.axes);
        if t.sign < 0.0 {
            Expr::neg(d)
        } else {
            d
        }
    }
}

pub(crate) fn run_symbolic<T: Scalar>(components: &[Expr], checks: &[Check], seed: u64) -> Result<ConstraintReport<T>> {
    let mut cache = DerivativeCache::new(components);
    let residuals: Vec<Expr> =
        checks.iter().map(|c| Expr::sub(cache.signed(&c.lhs), cache.signed(&c.rhs)).simplify()).collect();
    let tests =
        residuals.par_iter().map(|r| zero_test(r, SYMBOLIC_TRIALS, SYMBOLIC_TOL, seed)).collect::<Result<Vec<_>>>()?;
    let results = checks
        .iter()
        .zip(residuals.iter().zip(&tests))
        .map(|(c, (r, z))| ConstraintResult {
            id: c.id.clone(),
            lhs: c.lhs_label.clone(),
            rhs: c.rhs_label.clone(),
            passed: z.is_zero,
            symbolic_pass: Some(z.is_zero),
            residual_expr: Some(r.to_string()),
            residual_max: T::lit(z.max_abs),
            residual_mean: T::lit(z.mean_abs),
            worst_point: z.worst_point.map(T::lit),
        })
        .collect();
    let tested = tests.iter().map(|z| z.points_tested).max().unwrap_or(0);
    let skipped = tests.iter().map(|z| z.points_skipped).sum();
    Ok(ConstraintReport::new(Mode::Symbolic, T::lit(SYMBOLIC_TOL), seed, tested, skipped, results))
}

fn numeric_partial<T: Scalar>(e: &Expr, axes: &[usize], p: [T; 4], s: &FdSettings<T>) -> Result<T> {
    let f = |x: [T; 4]| -> std::result::Result<T, EvalError> { e.eval_at(x) };
    match *axes {
        [n] => partial1_fd(f, p, n + 1, s),
        [m, n] => partial2_fd(f, p, m + 1, n + 1, s),
        _ => unreachable!("checks use first and second partials only"),
    }
}

/// Aggregated residual statistics over a fixed point list.
pub(crate) struct Aggregate<T> {
    pub max: Vec<T>,
    pub mean: Vec<T>,
    pub worst: Vec<[T; 4]>,
    pub tested: usize,
    pub skipped: usize,
}

/// Evaluates `residuals(p)` at every point in parallel and reduces in point
/// order, so the result does not depend on the thread schedule. Points
/// where evaluation fails are skipped; more than half skipped is an error.
pub(crate) fn aggregate_points<T, F>(
    operation: &'static str,
    points: &[[T; 4]],
    width: usize,
    residuals: F,
) -> Result<Aggregate<T>>
where
    T: Scalar,
    F: Fn([T; 4]) -> Result<Vec<T>> + Sync,
{
    let per_point: Vec<Option<Vec<T>>> = points
        .par_iter()
        .map(|&p| match residuals(p) {
            Ok(r) => Ok(Some(r)),
            Err(e) if e.is_domain() => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let mut agg = Aggregate {
        max: vec![T::zero(); width],
        mean: vec![T::zero(); width],
        worst: vec![points.first().copied().unwrap_or([T::zero(); 4]); width],
        tested: 0,
        skipped: 0,
    };
    let mut seen_worst = vec![false; width];
    for (p, r) in points.iter().zip(per_point) {
        let Some(r) = r else {
            agg.skipped += 1;
            continue;
        };
        agg.tested += 1;
        for (k, v) in r.into_iter().enumerate() {
            let a = v.abs();
            if !seen_worst[k] || a > agg.max[k] {
                agg.max[k] = a;
                agg.worst[k] = *p;
                seen_worst[k] = true;
            }
            agg.mean[k] = agg.mean[k] + a;
        }
    }
    if agg.skipped * 2 > points.len() {
        return Err(Error::Domain {
            operation,
            detail: format!("{} of {} sample points were outside the function's domain", agg.skipped, points.len()),
        });
    }
    let n = T::from_usize(agg.tested.max(1)).expect("count fits");
    for m in &mut agg.mean {
        *m = *m / n;
    }
    Ok(agg)
}

pub(crate) fn run_numeric<T: Scalar>(
    operation: &'static str,
    components: &[Expr],
    checks: &[Check],
    pts: &[[T; 4]],
    tol: T,
    seed: u64,
    s: &FdSettings<T>,
) -> Result<ConstraintReport<T>> {
    if pts.is_empty() {
        return Err(Error::precondition(operation, "points must be at least 1"));
    }
    if !(tol > T::zero()) {
        return Err(Error::precondition(operation, "tolerance must be positive"));
    }
    // each distinct partial is computed once per point; mixed stencils are
    // symmetric so axes are keyed in sorted order
    let key = |t: &Term| {
        let mut axes = t.axes.clone();
        axes.sort_unstable();
        (t.component, axes)
    };
    let mut needed: Vec<(usize, Vec<usize>)> = checks.iter().flat_map(|c| [key(&c.lhs), key(&c.rhs)]).collect();
    needed.sort();
    needed.dedup();
    let index_of = |t: &Term| needed.binary_search(&key(t)).expect("collected above");
    let pairs: Vec<(usize, T, usize, T)> =
        checks.iter().map(|c| (index_of(&c.lhs), T::lit(c.lhs.sign), index_of(&c.rhs), T::lit(c.rhs.sign))).collect();

    let agg = aggregate_points(operation, pts, checks.len(), |p| {
        let values =
            needed.iter().map(|(m, axes)| numeric_partial(&components[*m], axes, p, s)).collect::<Result<Vec<T>>>()?;
        Ok(pairs.iter().map(|&(l, sl, r, sr)| sl * values[l] - sr * values[r]).collect())
    })?;

    let results = checks
        .iter()
        .enumerate()
        .map(|(k, c)| ConstraintResult {
            id: c.id.clone(),
            lhs: c.lhs_label.clone(),
            rhs: c.rhs_label.clone(),
            passed: agg.max[k] <= tol,
            symbolic_pass: None,
            residual_expr: None,
            residual_max: agg.max[k],
            residual_mean: agg.mean[k],
            worst_point: agg.worst[k],
        })
        .collect();
    Ok(ConstraintReport::new(Mode::Numeric, tol, seed, agg.tested, agg.skipped, results))
}

/// Symbolic check of the 12 first-order constraints.
pub fn check_cr_symbolic(f: &QuatFunction, seed: u64) -> Result<ConstraintReport<f64>> {
    check_cr_symbolic_variant(f, Variant::Canonical, seed)
}

pub fn check_cr_symbolic_variant(f: &QuatFunction, variant: Variant, seed: u64) -> Result<ConstraintReport<f64>> {
    run_symbolic(&f.components, &first_order_checks(variant), seed)
}

/// Finite-difference check of the 12 first-order constraints at `points`
/// seeded samples from `[-2, 2]^4`.
pub fn check_cr_numeric<T: Scalar>(
    f: &QuatFunction,
    points: usize,
    tol: T,
    seed: u64,
    s: &FdSettings<T>,
) -> Result<ConstraintReport<T>> {
    check_cr_numeric_variant(f, Variant::Canonical, points, tol, seed, s)
}

pub fn check_cr_numeric_variant<T: Scalar>(
    f: &QuatFunction,
    variant: Variant,
    points: usize,
    tol: T,
    seed: u64,
    s: &FdSettings<T>,
) -> Result<ConstraintReport<T>> {
    let pts = sample_points::<T>(points, seed);
    run_numeric("check_cr_numeric", &f.components, &first_order_checks(variant), &pts, tol, seed, s)
}

/// Finite-difference check of the first-order constraints at caller-chosen
/// points. The report's seed is 0.
pub fn check_cr_numeric_at<T: Scalar>(
    f: &QuatFunction,
    variant: Variant,
    points: &[[T; 4]],
    tol: T,
    s: &FdSettings<T>,
) -> Result<ConstraintReport<T>> {
    run_numeric("check_cr_numeric", &f.components, &first_order_checks(variant), points, tol, 0, s)
}

/// Options shared by the mode-switching checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckOptions<T> {
    pub mode: Mode,
    pub points: usize,
    /// Numeric tolerance; symbolic checks always use the identity-test tolerance.
    pub tol: T,
    pub seed: u64,
    pub fd: FdSettings<T>,
    pub variant: Variant,
}

impl<T: Scalar> CheckOptions<T> {
    pub fn symbolic(seed: u64) -> Self {
        Self {
            mode: Mode::Symbolic,
            points: 100,
            tol: T::lit(SYMBOLIC_TOL),
            seed,
            fd: FdSettings::default(),
            variant: Variant::Canonical,
        }
    }

    pub fn numeric(points: usize, tol: T, seed: u64) -> Self {
        Self { mode: Mode::Numeric, points, tol, seed, fd: FdSettings::default(), variant: Variant::Canonical }
    }
}

fn run_checks<T: Scalar>(
    operation: &'static str,
    components: &[Expr],
    checks: &[Check],
    o: &CheckOptions<T>,
) -> Result<ConstraintReport<T>> {
    match o.mode {
        Mode::Symbolic => run_symbolic(components, checks, o.seed),
        Mode::Numeric => {
            let pts = sample_points::<T>(o.points, o.seed);
            run_numeric(operation, components, checks, &pts, o.tol, o.seed, &o.fd)
        }
    }
}

/// First-order check in either mode.
pub fn check_cr<T: Scalar>(f: &QuatFunction, o: &CheckOptions<T>) -> Result<ConstraintReport<T>> {
    run_checks("check_cr", &f.components, &first_order_checks(o.variant), o)
}

/// The 48 second-order equalities, symbolically (differentiating twice) or
/// with second-difference stencils.
pub fn check_second_order_chains<T: Scalar>(f: &QuatFunction, o: &CheckOptions<T>) -> Result<ConstraintReport<T>> {
    run_checks("check_second_order_chains", &f.components, &second_order_checks(o.variant), o)
}

/// `∂u/∂x1 = ∂v/∂x2` and `∂u/∂x2 = -∂v/∂x1`.
pub fn check_cr_complex<T: Scalar>(u: &Expr, v: &Expr, o: &CheckOptions<T>) -> Result<ConstraintReport<T>> {
    for (name, e) in [("u", u), ("v", v)] {
        if e.variables().iter().any(|x| !matches!(x, Var::X1 | Var::X2)) {
            return Err(Error::precondition("check_cr_complex", format!("{name} may only reference x1 and x2")));
        }
    }
    run_checks("check_cr_complex", &[u.clone(), v.clone()], &complex_checks(), o)
}
