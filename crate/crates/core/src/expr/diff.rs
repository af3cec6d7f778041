use super::{BinaryOp, Expr, UnaryOp, Var};

pub(super) fn differentiate(e: &Expr, var: Var) -> Expr {
    raw(e, var).simplify()
}

fn raw(e: &Expr, var: Var) -> Expr {
    match e {
        Expr::Literal(_) => Expr::lit(0.0),
        Expr::Variable(v) => Expr::lit(if *v == var { 1.0 } else { 0.0 }),
        Expr::Unary(op, c) => {
            let u = Expr::clone(c);
            let du = raw(c, var);
            match op {
                UnaryOp::Neg => Expr::neg(du),
                UnaryOp::Sin => Expr::mul(Expr::unary(UnaryOp::Cos, u), du),
                UnaryOp::Cos => Expr::mul(Expr::neg(Expr::unary(UnaryOp::Sin, u)), du),
                UnaryOp::Exp => Expr::mul(e.clone(), du),
                UnaryOp::Log => Expr::div(du, u),
                UnaryOp::Sqrt => Expr::div(du, Expr::mul(Expr::lit(2.0), e.clone())),
            }
        }
        Expr::Binary(op, l, r) => {
            let (a, b) = (Expr::clone(l), Expr::clone(r));
            let (da, db) = (raw(l, var), raw(r, var));
            match op {
                BinaryOp::Add => Expr::add(da, db),
                BinaryOp::Sub => Expr::sub(da, db),
                BinaryOp::Mul => Expr::add(Expr::mul(da, b), Expr::mul(a, db)),
                BinaryOp::Div => Expr::div(Expr::sub(Expr::mul(da, b.clone()), Expr::mul(a, db)), Expr::pow(b, 2)),
            }
        }
        Expr::Pow(_, 0) => Expr::lit(0.0),
        Expr::Pow(b, n) => {
            Expr::mul(Expr::mul(Expr::lit(f64::from(*n)), Expr::pow(Expr::clone(b), n - 1)), raw(b, var))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{is_identically_zero, parse, Vars};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn d(text: &str, v: Var) -> String {
        parse(text).unwrap().differentiate(v).to_string()
    }

    #[test]
    fn textbook_derivatives() {
        assert_eq!(d("x1^2 - x2^2", Var::X1), "2 * x1");
        assert_eq!(d("sin(x3)", Var::X3), "cos(x3)");
        assert_eq!(d("2*x1*x2", Var::X2), "2 * x1");
        assert_eq!(d("x1^2 - x2^2", Var::X3), "0");
        assert_eq!(d("cos(x1)", Var::X1), "-sin(x1)");
        assert_eq!(d("exp(x2)", Var::X2), "exp(x2)");
        assert_eq!(d("log(x1)", Var::X1), "1 / x1");
        assert_eq!(d("t^3", Var::T), "3 * t^2");
    }

    #[test]
    fn mixed_partials_commute_on_polynomial() {
        let e = parse("x1^2*x2").unwrap();
        let a = e.differentiate(Var::X2).differentiate(Var::X1);
        let b = e.differentiate(Var::X1).differentiate(Var::X2);
        assert!(is_identically_zero(&Expr::sub(a, b), 32, 1e-9, 7).unwrap());
    }

    // Five-point central difference, used as an independent oracle.
    fn fd5(e: &Expr, vars: Vars<f64>, var: Var, h: f64) -> Option<f64> {
        let at = |dx: f64| {
            let mut v = vars;
            match var {
                Var::T => v.t = v.t.map(|t| t + dx),
                _ => {
                    let idx = Var::SPATIAL.iter().position(|s| *s == var).unwrap();
                    let mut x = v.x.unwrap();
                    x[idx] += dx;
                    v.x = Some(x);
                }
            }
            e.eval(&v).ok()
        };
        Some((-at(2.0 * h)? + 8.0 * at(h)? - 8.0 * at(-h)? + at(-2.0 * h)?) / (12.0 * h))
    }

    // Random smooth expressions of depth <= 5 whose domain is all of R^5:
    // log and sqrt only ever see 1 + u^2, and quotients divide by 2 + sin(u).
    fn arb_smooth() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (1u32..12).prop_map(|v| Expr::lit(v as f64 / 4.0)),
            prop::sample::select(vec![Var::X1, Var::X2, Var::X3, Var::X4, Var::T]).prop_map(Expr::var),
        ];
        leaf.prop_recursive(4, 48, 2, |inner| {
            let safe = |u: Expr| Expr::add(Expr::lit(1.0), Expr::pow(u, 2));
            prop_oneof![
                inner.clone().prop_map(Expr::neg),
                inner.clone().prop_map(|u| Expr::unary(UnaryOp::Sin, u)),
                inner.clone().prop_map(|u| Expr::unary(UnaryOp::Cos, u)),
                inner.clone().prop_map(|u| Expr::unary(UnaryOp::Exp, Expr::unary(UnaryOp::Sin, u))),
                inner.clone().prop_map(move |u| Expr::unary(UnaryOp::Log, safe(u))),
                inner.clone().prop_map(move |u| Expr::unary(UnaryOp::Sqrt, safe(u))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| { Expr::div(a, Expr::add(Expr::lit(2.0), Expr::unary(UnaryOp::Sin, b))) }),
                (inner, 0i32..4).prop_map(|(b, n)| Expr::pow(b, n)),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn matches_finite_differences(e in arb_smooth(), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for var in [Var::X1, Var::X2, Var::X3, Var::X4, Var::T] {
                let de = e.differentiate(var);
                for _ in 0..10 {
                    let x: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
                    let vars = Vars { x: Some(x), t: Some(rng.gen_range(-2.0..2.0)) };
                    let Ok((f, scale)) = e.eval_with_scale(&vars) else { continue };
                    if scale > 1e4 {
                        continue;
                    }
                    let sym = de.eval(&vars).unwrap();
                    let num = fd5(&e, vars, var, 1e-3).unwrap();
                    prop_assert!(
                        (sym - num).abs() <= 1e-6 * sym.abs().max(1.0),
                        "{e} d/d{var} at {vars:?}: symbolic {sym}, numeric {num}, f={f}"
                    );
                }
            }
        }
    }
}
