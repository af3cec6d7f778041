//! Probabilistic identity testing by evaluation at seeded random points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EvalError, Expr, Vars};
use crate::error::{Error, Result};

/// Half-width of the sampling box `[-2, 2]^4` (and `t ∈ [-2, 2]`).
pub const ZERO_TEST_BOX: f64 = 2.0;

const RETRIES_PER_TRIAL: usize = 10;

/// Outcome of sampling an expression that is expected to vanish.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroTest {
    pub is_zero: bool,
    pub max_abs: f64,
    pub mean_abs: f64,
    /// Sample with the largest scaled deviation from zero.
    pub worst_point: [f64; 4],
    pub points_tested: usize,
    /// Draws rejected because the expression was undefined there.
    pub points_skipped: usize,
}

/// Draws `trials` points uniformly from `[-2, 2]^4` (plus `t`) and checks
/// `|e(p)| <= tol * (1 + scale(p))` at each, where `scale(p)` is the largest
/// magnitude of any subexpression at `p`. Undefined points are redrawn, up
/// to ten times per trial.
pub fn zero_test(e: &Expr, trials: usize, tol: f64, seed: u64) -> Result<ZeroTest> {
    if trials == 0 {
        return Err(Error::precondition("is_identically_zero", "trials must be at least 1"));
    }
    if !(tol > 0.0) {
        return Err(Error::precondition("is_identically_zero", "tolerance must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ZeroTest {
        is_zero: true,
        max_abs: 0.0,
        mean_abs: 0.0,
        worst_point: [0.0; 4],
        points_tested: 0,
        points_skipped: 0,
    };
    let mut worst_ratio = -1.0;
    let mut sum = 0.0;
    for trial in 0..trials {
        let mut attempt = 0;
        let (x, value, scale) = loop {
            let x: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-ZERO_TEST_BOX..ZERO_TEST_BOX));
            let t = rng.gen_range(-ZERO_TEST_BOX..ZERO_TEST_BOX);
            match e.eval_with_scale(&Vars { x: Some(x), t: Some(t) }) {
                Ok((v, s)) => break (x, v, s),
                Err(err @ EvalError::MissingVariable(_)) => return Err(err.into()),
                Err(EvalError::Domain { .. }) => {
                    out.points_skipped += 1;
                    attempt += 1;
                    if attempt >= RETRIES_PER_TRIAL {
                        return Err(Error::Inconclusive(format!(
                            "`{e}` was undefined at {RETRIES_PER_TRIAL} consecutive sample points (trial {})",
                            trial + 1
                        )));
                    }
                }
            }
        };
        let abs = value.abs();
        let bound = tol * (1.0 + scale);
        let ratio = abs / bound;
        if ratio > worst_ratio {
            worst_ratio = ratio;
            out.worst_point = x;
        }
        out.is_zero &= abs <= bound;
        out.max_abs = out.max_abs.max(abs);
        sum += abs;
        out.points_tested += 1;
    }
    out.mean_abs = sum / out.points_tested as f64;
    Ok(out)
}

/// True when `e` vanishes at every sampled point (see [`zero_test`]).
pub fn is_identically_zero(e: &Expr, trials: usize, tol: f64, seed: u64) -> Result<bool> {
    zero_test(e, trials, tol, seed).map(|z| z.is_zero)
}
