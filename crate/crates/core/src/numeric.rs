//! Central finite differences in 4-space, used as the numeric counterpart of
//! symbolic differentiation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::EvalError;
use crate::scalar::Scalar;

/// Base step sizes. The actual step along an axis is `h * max(1, |x_axis|)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FdSettings<T> {
    pub h1: T,
    pub h2: T,
}

impl<T: Scalar> Default for FdSettings<T> {
    fn default() -> Self {
        Self { h1: T::lit(6e-6), h2: T::lit(1.2e-4) }
    }
}

impl<T: Scalar> FdSettings<T> {
    pub fn new(h1: T, h2: T) -> Result<Self> {
        if !(h1 > T::zero() && h2 > T::zero()) {
            return Err(Error::precondition("FdSettings::new", "step sizes must be positive"));
        }
        Ok(Self { h1, h2 })
    }
}

fn axis_index(axis: usize) -> Result<usize> {
    if (1..=4).contains(&axis) {
        Ok(axis - 1)
    } else {
        Err(Error::precondition("finite difference", format!("axis {axis} is not in 1..=4")))
    }
}

#[inline]
fn step<T: Scalar>(base: T, coord: T) -> T {
    base * coord.abs().max(T::one())
}

fn shifted<T: Scalar>(p: [T; 4], moves: &[(usize, T)]) -> [T; 4] {
    let mut q = p;
    for &(idx, d) in moves {
        q[idx] = q[idx] + d;
    }
    q
}

/// `(f(p + h e) - f(p - h e)) / 2h`.
pub fn partial1_fd<T, F>(f: F, p: [T; 4], axis: usize, s: &FdSettings<T>) -> Result<T>
where
    T: Scalar,
    F: Fn([T; 4]) -> std::result::Result<T, EvalError>,
{
    let a = axis_index(axis)?;
    let h = step(s.h1, p[a]);
    // use the step actually representable at p
    let (xp, xm) = (p[a] + h, p[a] - h);
    let plus = f(shifted(p, &[(a, h)]))?;
    let minus = f(shifted(p, &[(a, -h)]))?;
    Ok((plus - minus) / (xp - xm))
}

/// Pure (`axis_m == axis_n`) or mixed second partial by central stencils.
pub fn partial2_fd<T, F>(f: F, p: [T; 4], axis_m: usize, axis_n: usize, s: &FdSettings<T>) -> Result<T>
where
    T: Scalar,
    F: Fn([T; 4]) -> std::result::Result<T, EvalError>,
{
    let m = axis_index(axis_m)?;
    let n = axis_index(axis_n)?;
    let hm = step(s.h2, p[m]);
    if m == n {
        let two = T::lit(2.0);
        let plus = f(shifted(p, &[(m, hm)]))?;
        let mid = f(p)?;
        let minus = f(shifted(p, &[(m, -hm)]))?;
        return Ok((plus - two * mid + minus) / (hm * hm));
    }
    let hn = step(s.h2, p[n]);
    let pp = f(shifted(p, &[(m, hm), (n, hn)]))?;
    let pm = f(shifted(p, &[(m, hm), (n, -hn)]))?;
    let mp = f(shifted(p, &[(m, -hm), (n, hn)]))?;
    let mm = f(shifted(p, &[(m, -hm), (n, -hn)]))?;
    Ok((pp - pm - mp + mm) / (T::lit(4.0) * hm * hn))
}

/// Numeric Laplacian: the sum of the four pure second differences.
pub fn laplacian_fd<T, F>(f: F, p: [T; 4], s: &FdSettings<T>) -> Result<T>
where
    T: Scalar,
    F: Fn([T; 4]) -> std::result::Result<T, EvalError>,
{
    let mut sum = T::zero();
    for axis in 1..=4 {
        sum = sum + partial2_fd(&f, p, axis, axis, s)?;
    }
    Ok(sum)
}
