//! Named fixture functions: the positive and negative examples every check
//! is exercised against.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{Expr, QuatFunction, Var};

/// Jacobian `J[m][n] = ∂F_{m+1}/∂x_{n+1}` of the 4-parameter linear family
/// that satisfies every canonical first-order relation:
///
/// ```text
/// [ a1 -a2 -a3  a4 ]
/// [ a2  a1 -a4 -a3 ]
/// [ a3 -a4  a1 -a2 ]
/// [ a4  a3  a2  a1 ]
/// ```
pub fn structure_matrix(a: [f64; 4]) -> [[f64; 4]; 4] {
    let [a1, a2, a3, a4] = a;
    [[a1, -a2, -a3, a4], [a2, a1, -a4, -a3], [a3, -a4, a1, -a2], [a4, a3, a2, a1]]
}

/// `F_m = Σ_n J[m][n] x_n` for the structure matrix of `a`.
pub fn structure_linear(a: [f64; 4]) -> QuatFunction {
    linear_map(structure_matrix(a))
}

/// Linear function with the given constant Jacobian.
pub fn linear_map(jacobian: [[f64; 4]; 4]) -> QuatFunction {
    let row = |r: [f64; 4]| {
        r.iter()
            .zip(Var::SPATIAL)
            .map(|(&c, v)| Expr::mul(Expr::lit(c), Expr::var(v)))
            .reduce(Expr::add)
            .expect("four terms")
    };
    QuatFunction { components: jacobian.map(row) }
}

/// `count` parameter vectors drawn uniformly from `[-10, 10]^4`.
pub fn linear_family_params(count: usize, seed: u64) -> Vec<[f64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| std::array::from_fn(|_| rng.gen_range(-10.0..10.0))).collect()
}

/// Components of `q²`: fails the relation system.
pub fn q_squared() -> QuatFunction {
    QuatFunction::parse(["x1^2 - x2^2 - x3^2 - x4^2", "2*x1*x2", "2*x1*x3", "2*x1*x4"]).expect("fixture parses")
}

/// `F1 = x1⁴ - 6x1²x2² + x2⁴` (the real part of `(x1 + i x2)⁴`), other
/// components zero. Harmonic, but not a solution of the relation system.
pub fn harmonic_quartic() -> QuatFunction {
    QuatFunction::parse(["x1^4 - 6*x1^2*x2^2 + x2^4", "0", "0", "0"]).expect("fixture parses")
}

/// The named corpus used for corpus-wide properties.
pub fn corpus() -> Vec<(String, QuatFunction)> {
    let mut out = vec![
        ("identity".to_string(), QuatFunction::identity()),
        ("zero".to_string(), QuatFunction::constant([0.0; 4])),
        ("constant".to_string(), QuatFunction::constant([5.0, -1.5, 2.0, 0.25])),
        ("linear-1234".to_string(), structure_linear([1.0, 2.0, 3.0, 4.0])),
        ("q-squared".to_string(), q_squared()),
        ("harmonic-quartic".to_string(), harmonic_quartic()),
        (
            "affine".to_string(),
            QuatFunction::parse(["3 + x1 - 2*x2", "1 - x3*0.5", "x4 + x2", "7"]).expect("fixture parses"),
        ),
        (
            "transcendental".to_string(),
            QuatFunction::parse(["exp(x1)*cos(x2)", "exp(x1)*sin(x2)", "sin(x3)*x4", "x1*x2*x3*x4"])
                .expect("fixture parses"),
        ),
    ];
    for (k, a) in linear_family_params(4, 2024).into_iter().enumerate() {
        out.push((format!("linear-random-{k}"), structure_linear(a)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure_linear_has_its_jacobian() {
        let f = structure_linear([1.0, 2.0, 3.0, 4.0]);
        let j = structure_matrix([1.0, 2.0, 3.0, 4.0]);
        for (m, row) in j.iter().enumerate() {
            for (n, &entry) in row.iter().enumerate() {
                let d = f.components[m].differentiate(Var::SPATIAL[n]);
                assert_eq!(d.as_literal(), Some(entry), "J[{m}][{n}] = {d}");
            }
        }
    }

    #[test]
    fn corpus_names_are_unique() {
        let c = corpus();
        let mut names: Vec<_> = c.iter().map(|(n, _)| n.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), c.len());
    }
}
