//! Quaternionic line integrals `∫ f(q) dq` along paths in 4-space.
//!
//! Integration uses composite 5-point Gauss-Legendre quadrature on uniform
//! subintervals. The number of subintervals of a piece is
//! `ceil(length * segments_per_unit)` (at least one), where length is the
//! Euclidean length of a polyline segment or the parameter span of a
//! parametric curve. Every result carries an error estimate obtained by
//! repeating the quadrature at twice the density.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{parse, EvalError, Expr, QuatFunction, Var, Vars};
use crate::quaternion::Quaternion;
use crate::scalar::Scalar;

pub const DEFAULT_SEGMENTS_PER_UNIT: usize = 64;

/// Order of the Hamilton product in the integrand.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// `f(q) · q'(t)`
    #[default]
    Left,
    /// `q'(t) · f(q)`
    Right,
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::Left => "left",
            Convention::Right => "right",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PathKind<T> {
    /// Straight segments through at least two waypoints.
    Polyline(Vec<Quaternion<T>>),
    /// `q(t) = (q1(t), q2(t), q3(t), q4(t))` for `t` in `[t0, t1]`.
    Parametric { coords: [Expr; 4], tangent: [Expr; 4], t0: T, t1: T },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Path<T> {
    pub kind: PathKind<T>,
    pub segments_per_unit: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntegralResult<T> {
    pub value: Quaternion<T>,
    /// Norm of the difference between the results at density `d` and `2d`.
    pub abs_error_estimate: T,
    pub convention: Convention,
}

/// One smooth piece of a path, parametrised over `[s0, s1]`.
enum Piece<'a, T> {
    Segment { start: Quaternion<T>, delta: Quaternion<T> },
    Curve { coords: &'a [Expr; 4], tangent: &'a [Expr; 4], t0: T, t1: T },
}

impl<T: Scalar> Piece<'_, T> {
    fn span(&self) -> (T, T) {
        match self {
            Piece::Segment { .. } => (T::zero(), T::one()),
            Piece::Curve { t0, t1, .. } => (*t0, *t1),
        }
    }

    fn length(&self) -> T {
        match self {
            Piece::Segment { delta, .. } => delta.norm(),
            Piece::Curve { t0, t1, .. } => *t1 - *t0,
        }
    }

    fn at(&self, s: T) -> std::result::Result<(Quaternion<T>, Quaternion<T>), EvalError> {
        match self {
            Piece::Segment { start, delta } => Ok((*start + delta.scale(s), *delta)),
            Piece::Curve { coords, tangent, .. } => {
                let vars = Vars::time(s);
                let ev = |es: &[Expr; 4]| -> std::result::Result<Quaternion<T>, EvalError> {
                    Ok(Quaternion::new(es[0].eval(&vars)?, es[1].eval(&vars)?, es[2].eval(&vars)?, es[3].eval(&vars)?))
                };
                Ok((ev(coords)?, ev(tangent)?))
            }
        }
    }
}

/// Nodes and weights of 5-point Gauss-Legendre quadrature on `[-1, 1]`.
fn gauss_legendre_5<T: Scalar>() -> [(T, T); 5] {
    let c = |v: f64| T::lit(v);
    let r = (c(10.0) / c(7.0)).sqrt();
    let x1 = (c(5.0) - c(2.0) * r).sqrt() / c(3.0);
    let x2 = (c(5.0) + c(2.0) * r).sqrt() / c(3.0);
    let s70 = c(70.0).sqrt();
    let w0 = c(128.0) / c(225.0);
    let w1 = (c(322.0) + c(13.0) * s70) / c(900.0);
    let w2 = (c(322.0) - c(13.0) * s70) / c(900.0);
    [(-x2, w2), (-x1, w1), (T::zero(), w0), (x1, w1), (x2, w2)]
}

impl<T: Scalar> Path<T> {
    pub fn polyline(waypoints: Vec<Quaternion<T>>) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::precondition("Path::polyline", "a polyline needs at least two waypoints"));
        }
        if waypoints.iter().any(|w| !w.is_finite()) {
            return Err(Error::precondition("Path::polyline", "waypoints must be finite"));
        }
        Ok(Self { kind: PathKind::Polyline(waypoints), segments_per_unit: DEFAULT_SEGMENTS_PER_UNIT })
    }

    pub fn straight(a: Quaternion<T>, b: Quaternion<T>) -> Result<Self> {
        Self::polyline(vec![a, b])
    }

    /// Coordinates must be expressions in `t` only; `t0 < t1`.
    pub fn parametric(coords: [Expr; 4], t0: T, t1: T) -> Result<Self> {
        if !(t0 < t1) {
            return Err(Error::precondition("Path::parametric", "t0 must be less than t1"));
        }
        for (i, c) in coords.iter().enumerate() {
            if c.variables().iter().any(|v| *v != Var::T) {
                return Err(Error::precondition("Path::parametric", format!("q{} may only reference t", i + 1)));
            }
        }
        let tangent = std::array::from_fn(|i| coords[i].differentiate(Var::T));
        Ok(Self {
            kind: PathKind::Parametric { coords, tangent, t0, t1 },
            segments_per_unit: DEFAULT_SEGMENTS_PER_UNIT,
        })
    }

    pub fn with_density(mut self, segments_per_unit: usize) -> Result<Self> {
        if segments_per_unit == 0 {
            return Err(Error::precondition("Path::with_density", "segments per unit must be at least 1"));
        }
        self.segments_per_unit = segments_per_unit;
        Ok(self)
    }

    /// The same curve traversed backwards.
    pub fn reversed(&self) -> Self {
        let kind = match &self.kind {
            PathKind::Polyline(w) => PathKind::Polyline(w.iter().rev().copied().collect()),
            PathKind::Parametric { coords, t0, t1, .. } => {
                // t -> t0 + t1 - t
                let flipped = Expr::sub(Expr::lit((*t0 + *t1).to_f64_lossy()), Expr::var(Var::T));
                let coords = coords.clone().map(|c| c.substitute(Var::T, &flipped).simplify());
                let tangent = std::array::from_fn(|i| coords[i].differentiate(Var::T));
                PathKind::Parametric { coords, tangent, t0: *t0, t1: *t1 }
            }
        };
        Self { kind, segments_per_unit: self.segments_per_unit }
    }

    pub fn start(&self) -> Result<Quaternion<T>> {
        match &self.kind {
            PathKind::Polyline(w) => Ok(w[0]),
            PathKind::Parametric { coords, t0, .. } => eval_coords(coords, *t0),
        }
    }

    pub fn end(&self) -> Result<Quaternion<T>> {
        match &self.kind {
            PathKind::Polyline(w) => Ok(*w.last().expect("at least two waypoints")),
            PathKind::Parametric { coords, t1, .. } => eval_coords(coords, *t1),
        }
    }

    fn pieces(&self) -> Vec<Piece<'_, T>> {
        match &self.kind {
            PathKind::Polyline(w) => w.windows(2).map(|p| Piece::Segment { start: p[0], delta: p[1] - p[0] }).collect(),
            PathKind::Parametric { coords, tangent, t0, t1 } => {
                vec![Piece::Curve { coords, tangent, t0: *t0, t1: *t1 }]
            }
        }
    }

    /// `Σ ∫ g(q(s), q'(s)) ds` over all pieces at the given density.
    fn quadrature<G>(&self, density: usize, g: &G) -> Result<Quaternion<T>>
    where
        G: Fn(Quaternion<T>, Quaternion<T>) -> std::result::Result<Quaternion<T>, EvalError>,
    {
        let rule = gauss_legendre_5::<T>();
        let half = T::lit(0.5);
        let density_t = T::from_usize(density).expect("density fits");
        let mut total = Quaternion::zero();
        for piece in self.pieces() {
            let length = piece.length();
            if length == T::zero() {
                continue;
            }
            let cells = (length * density_t).ceil().to_usize().unwrap_or(1).max(1);
            let (s0, s1) = piece.span();
            let width = (s1 - s0) / T::from_usize(cells).expect("cell count fits");
            let mut piece_sum = Quaternion::zero();
            for cell in 0..cells {
                let a = s0 + width * T::from_usize(cell).expect("cell index fits");
                let mid = a + half * width;
                let mut cell_sum = Quaternion::zero();
                for &(x, w) in &rule {
                    let s = mid + half * width * x;
                    let (q, dq) = piece.at(s).map_err(|e| at_parameter(s, e))?;
                    let v = g(q, dq).map_err(|e| at_parameter(s, e))?;
                    cell_sum += v.scale(w);
                }
                piece_sum += cell_sum.scale(half * width);
            }
            total += piece_sum;
        }
        Ok(total)
    }

    /// Quadrature at the configured density and at twice that density.
    fn integrate_with_estimate<G>(&self, g: G) -> Result<(Quaternion<T>, T)>
    where
        G: Fn(Quaternion<T>, Quaternion<T>) -> std::result::Result<Quaternion<T>, EvalError>,
    {
        let coarse = self.quadrature(self.segments_per_unit, &g)?;
        let fine = self.quadrature(2 * self.segments_per_unit, &g)?;
        Ok((coarse, (fine - coarse).norm()))
    }
}

fn at_parameter<T: Scalar>(s: T, e: EvalError) -> Error {
    Error::Domain { operation: "path integral", detail: format!("at parameter t = {s}: {e}") }
}

fn eval_coords<T: Scalar>(coords: &[Expr; 4], t: T) -> Result<Quaternion<T>> {
    let vars = Vars::time(t);
    let v = |i: usize| coords[i].eval(&vars).map_err(|e| at_parameter(t, e));
    Ok(Quaternion::new(v(0)?, v(1)?, v(2)?, v(3)?))
}

/// `∫ f(q) dq` along `path`, multiplying in the given order.
pub fn integrate_f_dq<T: Scalar>(
    f: &QuatFunction,
    path: &Path<T>,
    convention: Convention,
) -> Result<IntegralResult<T>> {
    let (value, err) = path.integrate_with_estimate(|q, dq| {
        let fq = f.eval_quat(q)?;
        Ok(match convention {
            Convention::Left => fq * dq,
            Convention::Right => dq * fq,
        })
    })?;
    Ok(IntegralResult { value, abs_error_estimate: err, convention })
}

/// Per-component outcome of integrating `∇F_m · dx` along a path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GradientTheoremCheck<T> {
    /// `∫ ∇F_m · dx` for each component.
    pub integrals: [T; 4],
    /// `F_m(b) - F_m(a)`, the value the integrals should equal.
    pub endpoint_difference: [T; 4],
    /// `F_m(a) - F_m(b)`, the opposite orientation, reported for comparison.
    pub reversed_difference: [T; 4],
    /// `|integral - (F_m(b) - F_m(a))|`.
    pub residuals: [T; 4],
    pub abs_error_estimate: T,
}

impl<T: Scalar> GradientTheoremCheck<T> {
    pub fn max_residual(&self) -> T {
        self.residuals.iter().fold(T::zero(), |m, r| m.max(*r))
    }
}

/// Gradient-theorem check: `∫ ∇F_m · dx = F_m(b) - F_m(a)` for each component.
pub fn fundamental_theorem_check<T: Scalar>(f: &QuatFunction, path: &Path<T>) -> Result<GradientTheoremCheck<T>> {
    let grads: [[Expr; 4]; 4] =
        std::array::from_fn(|m| std::array::from_fn(|n| f.components[m].differentiate(Var::SPATIAL[n])));
    let (value, err) = path.integrate_with_estimate(|q, dq| {
        let x = q.to_array();
        let d = dq.to_array();
        let mut out = [T::zero(); 4];
        for (m, row) in grads.iter().enumerate() {
            for (n, g) in row.iter().enumerate() {
                out[m] = out[m] + g.eval_at(x)? * d[n];
            }
        }
        Ok(Quaternion::from_array(out))
    })?;
    let domain = |e: EvalError| Error::Domain { operation: "fundamental_theorem_check", detail: e.to_string() };
    let fa = f.eval_quat(path.start()?).map_err(domain)?.to_array();
    let fb = f.eval_quat(path.end()?).map_err(domain)?.to_array();
    let integrals = value.to_array();
    let endpoint_difference: [T; 4] = std::array::from_fn(|m| fb[m] - fa[m]);
    Ok(GradientTheoremCheck {
        integrals,
        endpoint_difference,
        reversed_difference: std::array::from_fn(|m| fa[m] - fb[m]),
        residuals: std::array::from_fn(|m| (integrals[m] - endpoint_difference[m]).abs()),
        abs_error_estimate: err,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport<T> {
    pub from: Quaternion<T>,
    pub to: Quaternion<T>,
    pub convention: Convention,
    pub seed: u64,
    /// Integral along each random path, in path order.
    pub integrals: Vec<Quaternion<T>>,
    pub error_estimates: Vec<T>,
    /// Largest component-wise difference between any two integrals.
    pub max_deviation: T,
    pub waypoint_counts: Vec<usize>,
}

/// Random polyline from `a` to `b` with 3 to 6 intermediate waypoints drawn
/// uniformly from the bounding box of `{a, b}` widened by 1 on every side.
pub fn random_polyline<T: Scalar>(a: Quaternion<T>, b: Quaternion<T>, rng: &mut impl Rng) -> Vec<Quaternion<T>> {
    let (a4, b4) = (a.to_array(), b.to_array());
    let lo: [f64; 4] = std::array::from_fn(|i| a4[i].min(b4[i]).to_f64_lossy() - 1.0);
    let hi: [f64; 4] = std::array::from_fn(|i| a4[i].max(b4[i]).to_f64_lossy() + 1.0);
    let inner = rng.gen_range(3..=6);
    let mut pts = Vec::with_capacity(inner + 2);
    pts.push(a);
    for _ in 0..inner {
        pts.push(Quaternion::from_array(std::array::from_fn(|i| T::lit(rng.gen_range(lo[i]..hi[i])))));
    }
    pts.push(b);
    pts
}

/// Integrates `f dq` along `n_paths` seeded random polylines from `a` to `b`
/// and reports how far the results spread.
pub fn path_independence_probe<T: Scalar>(
    f: &QuatFunction,
    a: Quaternion<T>,
    b: Quaternion<T>,
    n_paths: usize,
    seed: u64,
    convention: Convention,
    segments_per_unit: usize,
) -> Result<ProbeReport<T>> {
    if n_paths < 2 {
        return Err(Error::precondition("path_independence_probe", "at least two paths are needed to compare"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let paths = (0..n_paths)
        .map(|_| Path::polyline(random_polyline(a, b, &mut rng))?.with_density(segments_per_unit))
        .collect::<Result<Vec<_>>>()?;
    let results = paths.par_iter().map(|p| integrate_f_dq(f, p, convention)).collect::<Result<Vec<_>>>()?;
    let integrals: Vec<_> = results.iter().map(|r| r.value).collect();
    let mut max_deviation = T::zero();
    for c in 0..4 {
        let (lo, hi) =
            integrals.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), q| (lo.min(q[c]), hi.max(q[c])));
        max_deviation = max_deviation.max(hi - lo);
    }
    Ok(ProbeReport {
        from: a,
        to: b,
        convention,
        seed,
        error_estimates: results.iter().map(|r| r.abs_error_estimate).collect(),
        waypoint_counts: paths
            .iter()
            .map(|p| match &p.kind {
                PathKind::Polyline(w) => w.len(),
                PathKind::Parametric { .. } => 0,
            })
            .collect(),
        integrals,
        max_deviation,
    })
}

/// Reads a path file: either
///
/// ```text
/// waypoints = (w,x,y,z); (w,x,y,z); ...
/// ```
///
/// or `q1 = ...` through `q4 = ...` (expressions in `t`) with `t0 = ...` and
/// `t1 = ...`. `#` starts a comment.
pub fn parse_path_file<T: Scalar>(text: &str, source: &str) -> Result<Path<T>> {
    let err = |line: usize, detail: String| Error::FileFormat { path: source.to_string(), line, detail };
    let mut entries: Vec<(String, String, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(idx + 1, format!("expected `name = value`, found `{line}`")));
        };
        let key = key.trim().to_string();
        if entries.iter().any(|(k, _, _)| *k == key) {
            return Err(err(idx + 1, format!("duplicate name `{key}`")));
        }
        entries.push((key, value.trim().to_string(), idx + 1));
    }
    let get = |k: &str| entries.iter().find(|(key, _, _)| key == k);
    let constant = |text: &str, line: usize| -> Result<T> {
        let e = parse(text).map_err(|e| err(line, e.to_string()))?;
        e.eval::<T>(&Vars::default()).map_err(|e| err(line, format!("`{text}` is not a constant: {e}")))
    };

    if let Some((_, value, line)) = get("waypoints") {
        if entries.len() != 1 {
            return Err(err(*line, "a waypoint path may not define other names".into()));
        }
        let mut pts = Vec::new();
        for item in value.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let inner = item
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| err(*line, format!("waypoint `{item}` must be written `(w,x,y,z)`")))?;
            let comps: Vec<&str> = inner.split(',').collect();
            if comps.len() != 4 {
                return Err(err(*line, format!("waypoint `{item}` needs 4 components")));
            }
            let mut c = [T::zero(); 4];
            for (slot, text) in c.iter_mut().zip(comps) {
                *slot = constant(text.trim(), *line)?;
            }
            pts.push(Quaternion::from_array(c));
        }
        return Path::polyline(pts).map_err(|e| err(*line, e.to_string()));
    }

    let mut coords = Vec::with_capacity(4);
    for name in ["q1", "q2", "q3", "q4"] {
        let (_, value, line) = get(name).ok_or_else(|| err(0, format!("missing `waypoints` or `{name}`")))?;
        coords.push(parse(value).map_err(|e| err(*line, format!("{name}: {e}")))?);
    }
    let bound = |name: &str| -> Result<T> {
        let (_, value, line) = get(name).ok_or_else(|| err(0, format!("missing `{name}`")))?;
        constant(value, *line)
    };
    let (t0, t1) = (bound("t0")?, bound("t1")?);
    if let Some((k, _, line)) =
        entries.iter().find(|(k, _, _)| !["q1", "q2", "q3", "q4", "t0", "t1"].contains(&k.as_str()))
    {
        return Err(err(*line, format!("unexpected name `{k}`")));
    }
    let coords: [Expr; 4] = coords.try_into().expect("four coordinates");
    Path::parametric(coords, t0, t1).map_err(|e| err(0, e.to_string()))
}

pub fn read_path_file<T: Scalar>(path: impl AsRef<std::path::Path>) -> Result<Path<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_path_file(&text, &path.display().to_string())
}
