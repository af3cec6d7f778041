//! Dirichlet problem for the 4D Laplace equation on a uniform lattice.
//!
//! Values live in one flat array indexed by `(i1, i2, i3, i4)` with `i4`
//! fastest. Every lattice point with an index equal to `0` or `n - 1` is a
//! boundary point. The interior update is the 8-neighbour average
//! `u(p) <- Σ_{axes} (u(p + e) + u(p - e)) / 8`, and iteration stops once
//! `max |u(p) - Σ/8| <= tol` over the interior.

use std::fmt;
use std::io::{BufRead, Read, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Jacobi,
    GaussSeidel,
    #[default]
    Sor,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Jacobi => "jacobi",
            Method::GaussSeidel => "gauss-seidel",
            Method::Sor => "sor",
        })
    }
}

/// Sweep order for Gauss-Seidel and SOR. Jacobi ignores it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ordering {
    /// `i1` outermost, `i4` innermost; sequential.
    #[default]
    Lexicographic,
    /// All points with even index sum, then all odd; each half is updated in parallel.
    RedBlack,
}

impl fmt::Display for Ordering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ordering::Lexicographic => "lexicographic",
            Ordering::RedBlack => "red-black",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions<T> {
    pub method: Method,
    /// Relaxation factor, used by [`Method::Sor`] only; must lie in `(0, 2)`.
    pub omega: T,
    pub tol: T,
    pub max_iters: usize,
    pub ordering: Ordering,
}

impl<T: Scalar> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            method: Method::Sor,
            omega: T::lit(1.5),
            tol: T::lit(1e-10),
            max_iters: 200_000,
            ordering: Ordering::Lexicographic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolveStats<T> {
    pub iterations: usize,
    /// `max |u(p) - Σ/8|` over the interior of the final state.
    pub final_residual: T,
    pub converged: bool,
    pub method: Method,
    pub omega: T,
    pub ordering: Ordering,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid4D<T> {
    n: usize,
    lo: [T; 4],
    hi: [T; 4],
    h: T,
    values: Vec<T>,
}

impl<T: Scalar> Grid4D<T> {
    /// Zero-filled lattice with `n` points per axis over `bounds`. All axes
    /// must have the same spacing.
    pub fn new(n: usize, bounds: [(T, T); 4]) -> Result<Self> {
        if n < 3 {
            return Err(Error::Grid(format!("need at least 3 points per axis, got {n}")));
        }
        if bounds.iter().any(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo < hi)) {
            return Err(Error::Grid("every axis needs finite bounds with lo < hi".into()));
        }
        let steps = T::from_usize(n - 1).expect("n fits");
        let hs = bounds.map(|(lo, hi)| (hi - lo) / steps);
        let h = hs[0];
        if hs.iter().any(|&hk| (hk - h).abs() > T::lit(1e-12) * h.abs()) {
            return Err(Error::Grid(format!(
                "unequal spacing across axes: {}",
                hs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
            )));
        }
        let len = n.checked_pow(4).ok_or_else(|| Error::Grid(format!("n = {n} is too large")))?;
        Ok(Self { n, lo: bounds.map(|b| b.0), hi: bounds.map(|b| b.1), h, values: vec![T::zero(); len] })
    }

    /// Lattice over the cube `[lo, hi]^4`.
    pub fn cube(n: usize, lo: T, hi: T) -> Result<Self> {
        Self::new(n, [(lo, hi); 4])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> T {
        self.h
    }

    pub fn bounds(&self) -> [(T, T); 4] {
        std::array::from_fn(|a| (self.lo[a], self.hi[a]))
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn interior_count(&self) -> usize {
        (self.n - 2).pow(4)
    }

    fn strides(&self) -> [usize; 4] {
        let n = self.n;
        [n * n * n, n * n, n, 1]
    }

    pub fn index(&self, i: [usize; 4]) -> usize {
        let s = self.strides();
        i[0] * s[0] + i[1] * s[1] + i[2] * s[2] + i[3]
    }

    pub fn multi_index(&self, mut idx: usize) -> [usize; 4] {
        let mut out = [0; 4];
        for a in (0..4).rev() {
            out[a] = idx % self.n;
            idx /= self.n;
        }
        out
    }

    pub fn coords(&self, i: [usize; 4]) -> [T; 4] {
        std::array::from_fn(|a| self.lo[a] + self.h * T::from_usize(i[a]).expect("index fits"))
    }

    pub fn is_boundary(&self, i: [usize; 4]) -> bool {
        i.iter().any(|&k| k == 0 || k == self.n - 1)
    }

    pub fn get(&self, i: [usize; 4]) -> T {
        self.values[self.index(i)]
    }

    fn eval_at_point(&self, e: &Expr, idx: usize, operation: &'static str) -> Result<T> {
        let i = self.multi_index(idx);
        let x = self.coords(i);
        e.eval_at(x)
            .map_err(|err| Error::Domain { operation, detail: format!("at lattice point {i:?} (x = {x:?}): {err}") })
    }

    /// Sets every boundary point to `e` evaluated at its coordinates.
    pub fn apply_boundary(&mut self, e: &Expr) -> Result<()> {
        for idx in 0..self.values.len() {
            if self.is_boundary(self.multi_index(idx)) {
                self.values[idx] = self.eval_at_point(e, idx, "apply_boundary")?;
            }
        }
        Ok(())
    }

    /// Sets every lattice point, boundary and interior, to `e`.
    pub fn fill(&mut self, e: &Expr) -> Result<()> {
        for idx in 0..self.values.len() {
            self.values[idx] = self.eval_at_point(e, idx, "fill")?;
        }
        Ok(())
    }

    /// Smallest and largest boundary values.
    pub fn boundary_range(&self) -> (T, T) {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for (idx, &v) in self.values.iter().enumerate() {
            if self.is_boundary(self.multi_index(idx)) {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }

    /// Visits interior indices in lexicographic order.
    fn for_each_interior(&self, mut f: impl FnMut(usize)) {
        let n = self.n;
        let s = self.strides();
        for i1 in 1..n - 1 {
            for i2 in 1..n - 1 {
                for i3 in 1..n - 1 {
                    let row = i1 * s[0] + i2 * s[1] + i3 * s[2];
                    for i4 in 1..n - 1 {
                        f(row + i4);
                    }
                }
            }
        }
    }

    /// `max |Σ_axes (u(p+e) - 2u(p) + u(p-e))| / h²` over the interior.
    pub fn discrete_laplacian_residual(&self) -> T {
        let s = self.strides();
        let eight = T::lit(8.0);
        let h2 = self.h * self.h;
        let mut worst = T::zero();
        self.for_each_interior(|idx| {
            let lap = neighbour_sum(&self.values, idx, s) - eight * self.values[idx];
            worst = worst.max(lap.abs() / h2);
        });
        worst
    }

    /// `max |u(p) - Σ/8|` over the interior: the stopping metric.
    pub fn update_residual(&self) -> T {
        let s = self.strides();
        let eighth = T::lit(0.125);
        let mut worst = T::zero();
        self.for_each_interior(|idx| {
            let r = (self.values[idx] - neighbour_sum(&self.values, idx, s) * eighth).abs();
            worst = worst.max(r);
        });
        worst
    }

    /// Maximum and mean absolute interior deviation from `reference`.
    pub fn compare_to_reference(&self, reference: &Expr) -> Result<(T, T)> {
        let mut max = T::zero();
        let mut sum = T::zero();
        let mut count = 0usize;
        let mut failure = None;
        self.for_each_interior(|idx| {
            if failure.is_some() {
                return;
            }
            match self.eval_at_point(reference, idx, "compare_to_reference") {
                Ok(r) => {
                    let d = (self.values[idx] - r).abs();
                    max = max.max(d);
                    sum = sum + d;
                    count += 1;
                }
                Err(e) => failure = Some(e),
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        Ok((max, sum / T::from_usize(count).expect("count fits")))
    }

    /// Iterates until the update residual drops to `tol` or `max_iters`
    /// sweeps have run. Boundary values are never modified.
    pub fn solve(&mut self, opts: &SolveOptions<T>) -> Result<SolveStats<T>> {
        let omega = match opts.method {
            Method::Sor => {
                if !(opts.omega > T::zero() && opts.omega < T::lit(2.0)) {
                    return Err(Error::precondition("solve", format!("omega = {} is outside (0, 2)", opts.omega)));
                }
                opts.omega
            }
            Method::Jacobi | Method::GaussSeidel => T::one(),
        };
        if !(opts.tol > T::zero()) {
            return Err(Error::precondition("solve", "tolerance must be positive"));
        }
        let mut scratch = self.values.clone();
        let mut iterations = 0;
        let mut converged = false;
        while iterations < opts.max_iters {
            let change = match (opts.method, opts.ordering) {
                (Method::Jacobi, _) => self.jacobi_sweep(&mut scratch),
                (Method::GaussSeidel, Ordering::Lexicographic) => self.lexicographic_sweep(None),
                (Method::Sor, Ordering::Lexicographic) => self.lexicographic_sweep(Some(omega)),
                (Method::GaussSeidel, Ordering::RedBlack) => self.red_black_sweep(None, &mut scratch),
                (Method::Sor, Ordering::RedBlack) => self.red_black_sweep(Some(omega), &mut scratch),
            };
            iterations += 1;
            if !change.is_finite() {
                return Err(self.non_finite(iterations));
            }
            // the in-sweep change is cheap; confirm on the final state before stopping
            if change <= opts.tol && self.update_residual() <= opts.tol {
                converged = true;
                break;
            }
        }
        Ok(SolveStats {
            iterations,
            final_residual: self.update_residual(),
            converged,
            method: opts.method,
            omega,
            ordering: opts.ordering,
        })
    }

    fn non_finite(&self, iteration: usize) -> Error {
        let idx = self.values.iter().position(|v| !v.is_finite()).unwrap_or(0);
        Error::Diverged(format!(
            "non-finite value at lattice index {:?} after sweep {iteration}",
            self.multi_index(idx)
        ))
    }

    /// One Jacobi sweep from `self.values` into `next`, then swap. Returns
    /// the largest `|Σ/8 - u|` of the previous state.
    fn jacobi_sweep(&mut self, next: &mut Vec<T>) -> T {
        let n = self.n;
        let s = self.strides();
        let eighth = T::lit(0.125);
        let cur = &self.values;
        let change = next
            .par_chunks_mut(s[0])
            .enumerate()
            .filter(|(i1, _)| *i1 > 0 && *i1 < n - 1)
            .map(|(i1, slab)| {
                let mut worst = T::zero();
                for i2 in 1..n - 1 {
                    for i3 in 1..n - 1 {
                        let local = i2 * s[1] + i3 * s[2];
                        for i4 in 1..n - 1 {
                            let idx = i1 * s[0] + local + i4;
                            let avg = neighbour_sum(cur, idx, s) * eighth;
                            worst = max_propagating_nan(worst, (avg - cur[idx]).abs());
                            slab[local + i4] = avg;
                        }
                    }
                }
                worst
            })
            .reduce(T::zero, max_propagating_nan);
        std::mem::swap(&mut self.values, next);
        change
    }

    fn lexicographic_sweep(&mut self, omega: Option<T>) -> T {
        let n = self.n;
        let s = self.strides();
        let eighth = T::lit(0.125);
        let u = &mut self.values;
        let mut worst = T::zero();
        for i1 in 1..n - 1 {
            for i2 in 1..n - 1 {
                for i3 in 1..n - 1 {
                    let row = i1 * s[0] + i2 * s[1] + i3 * s[2];
                    for i4 in 1..n - 1 {
                        let idx = row + i4;
                        let avg = neighbour_sum(u, idx, s) * eighth;
                        let delta = avg - u[idx];
                        worst = max_propagating_nan(worst, delta.abs());
                        u[idx] = match omega {
                            Some(w) => u[idx] + w * delta,
                            None => avg,
                        };
                    }
                }
            }
        }
        worst
    }

    fn red_black_sweep(&mut self, omega: Option<T>, scratch: &mut [T]) -> T {
        let n = self.n;
        let s = self.strides();
        let eighth = T::lit(0.125);
        let mut worst = T::zero();
        for colour in 0..2 {
            let u = &self.values;
            // phase 1: new values of this colour into scratch, reading u only
            let change = scratch
                .par_chunks_mut(s[0])
                .enumerate()
                .filter(|(i1, _)| *i1 > 0 && *i1 < n - 1)
                .map(|(i1, slab)| {
                    let mut worst = T::zero();
                    for i2 in 1..n - 1 {
                        for i3 in 1..n - 1 {
                            let local = i2 * s[1] + i3 * s[2];
                            let first = 1 + (i1 + i2 + i3 + 1 + colour) % 2;
                            for i4 in (first..n - 1).step_by(2) {
                                let idx = i1 * s[0] + local + i4;
                                let avg = neighbour_sum(u, idx, s) * eighth;
                                let delta = avg - u[idx];
                                worst = max_propagating_nan(worst, delta.abs());
                                slab[local + i4] = match omega {
                                    Some(w) => u[idx] + w * delta,
                                    None => avg,
                                };
                            }
                        }
                    }
                    worst
                })
                .reduce(T::zero, max_propagating_nan);
            worst = max_propagating_nan(worst, change);
            // phase 2: copy that colour back
            self.values
                .par_chunks_mut(s[0])
                .zip(scratch.par_chunks(s[0]))
                .enumerate()
                .filter(|(i1, _)| *i1 > 0 && *i1 < n - 1)
                .for_each(|(i1, (dst, src))| {
                    for i2 in 1..n - 1 {
                        for i3 in 1..n - 1 {
                            let local = i2 * s[1] + i3 * s[2];
                            let first = 1 + (i1 + i2 + i3 + 1 + colour) % 2;
                            for i4 in (first..n - 1).step_by(2) {
                                dst[local + i4] = src[local + i4];
                            }
                        }
                    }
                });
        }
        worst
    }

    /// Writes `QGRID n lo hi\n` followed by the values as little-endian
    /// `f64` in index order. Only cubic boxes can be written.
    pub fn write_dump(&self, mut w: impl Write) -> Result<()> {
        let (lo, hi) = (self.lo[0], self.hi[0]);
        if self.lo.iter().any(|&l| l != lo) || self.hi.iter().any(|&h| h != hi) {
            return Err(Error::Grid("grid dumps require the same bounds on every axis".into()));
        }
        writeln!(w, "QGRID {} {} {}", self.n, lo.to_f64_lossy(), hi.to_f64_lossy())?;
        let mut buf = Vec::with_capacity(self.values.len() * 8);
        for v in &self.values {
            buf.extend_from_slice(&v.to_f64_lossy().to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn write_dump_file(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_dump(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

impl Grid4D<f64> {
    /// Reads a grid written by [`Grid4D::write_dump`].
    pub fn read_dump(r: impl Read) -> Result<Self> {
        let mut r = std::io::BufReader::new(r);
        let mut header = String::new();
        r.read_line(&mut header)?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let bad = || Error::Grid(format!("malformed grid header `{}`", header.trim_end()));
        let [tag, n, lo, hi] = fields[..] else {
            return Err(bad());
        };
        if tag != "QGRID" {
            return Err(bad());
        }
        let n: usize = n.parse().map_err(|_| bad())?;
        let lo: f64 = lo.parse().map_err(|_| bad())?;
        let hi: f64 = hi.parse().map_err(|_| bad())?;
        let mut grid = Grid4D::cube(n, lo, hi)?;
        let mut bytes = [0u8; 8];
        for v in grid.values.iter_mut() {
            r.read_exact(&mut bytes)?;
            *v = f64::from_le_bytes(bytes);
        }
        let mut rest = Vec::new();
        r.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(Error::Grid(format!("{} trailing bytes after grid data", rest.len())));
        }
        Ok(grid)
    }
}

/// Sum of the 8 axis neighbours, in a fixed order.
#[inline(always)]
fn neighbour_sum<T: Scalar>(u: &[T], idx: usize, s: [usize; 4]) -> T {
    (u[idx - s[0]] + u[idx + s[0]])
        + (u[idx - s[1]] + u[idx + s[1]])
        + (u[idx - s[2]] + u[idx + s[2]])
        + (u[idx - 1] + u[idx + 1])
}

#[inline(always)]
fn max_propagating_nan<T: Scalar>(a: T, b: T) -> T {
    if a.is_nan() || b.is_nan() {
        T::nan()
    } else {
        a.max(b)
    }
}
