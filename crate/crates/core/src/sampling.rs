use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Scalar;

/// Half-width of the sampling box `[-2, 2]^4` used by every pointwise check.
pub(crate) const SAMPLE_BOX: f64 = 2.0;

/// `count` points drawn uniformly from `[-2, 2]^4`, fixed by `seed`.
pub(crate) fn sample_points<T: Scalar>(count: usize, seed: u64) -> Vec<[T; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| std::array::from_fn(|_| T::lit(rng.gen_range(-SAMPLE_BOX..SAMPLE_BOX)))).collect()
}
