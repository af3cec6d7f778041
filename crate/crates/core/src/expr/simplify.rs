//! Terminating rewrite set: constant folding, additive and multiplicative
//! identities, zero products, trivial powers, double negation and nested
//! integer powers. Nothing else; in particular `x - x` is left alone.

use std::sync::Arc;

use super::{BinaryOp, Expr, UnaryOp, Vars};

pub(super) fn simplify(e: &Expr) -> Expr {
    let mut cur = pass(e);
    loop {
        let next = pass(&cur);
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

fn pass(e: &Expr) -> Expr {
    let rebuilt = match e {
        Expr::Literal(_) | Expr::Variable(_) => return e.clone(),
        Expr::Unary(op, c) => Expr::unary(*op, pass(c)),
        Expr::Binary(op, l, r) => Expr::binary(*op, pass(l), pass(r)),
        Expr::Pow(b, n) => Expr::pow(pass(b), *n),
    };
    let mut cur = rebuilt;
    while let Some(next) = rewrite(&cur) {
        cur = next;
    }
    cur
}

/// Folds a node whose children are all literals, if the result is defined.
fn fold(e: &Expr) -> Option<Expr> {
    let all_literal = match e {
        Expr::Unary(_, c) | Expr::Pow(c, _) => c.as_literal().is_some(),
        Expr::Binary(_, l, r) => l.as_literal().is_some() && r.as_literal().is_some(),
        _ => false,
    };
    if !all_literal {
        return None;
    }
    // `+ 0.0` turns a folded negative zero into plain zero
    e.eval::<f64>(&Vars::default()).ok().map(|v| Expr::Literal(v + 0.0))
}

fn rewrite(e: &Expr) -> Option<Expr> {
    if let Some(folded) = fold(e) {
        return Some(folded);
    }
    let unwrap = |a: &Arc<Expr>| Some(Expr::clone(a));
    match e {
        Expr::Unary(UnaryOp::Neg, c) => match &**c {
            Expr::Unary(UnaryOp::Neg, inner) => unwrap(inner),
            _ => None,
        },
        Expr::Binary(op, l, r) => match op {
            BinaryOp::Add if r.is_literal(0.0) => unwrap(l),
            BinaryOp::Add if l.is_literal(0.0) => unwrap(r),
            BinaryOp::Sub if r.is_literal(0.0) => unwrap(l),
            BinaryOp::Mul if l.is_literal(0.0) || r.is_literal(0.0) => Some(Expr::lit(0.0)),
            BinaryOp::Mul if r.is_literal(1.0) => unwrap(l),
            BinaryOp::Mul if l.is_literal(1.0) => unwrap(r),
            BinaryOp::Div if r.is_literal(1.0) => unwrap(l),
            _ => None,
        },
        Expr::Pow(_, 0) => Some(Expr::lit(1.0)),
        Expr::Pow(b, 1) => unwrap(b),
        Expr::Pow(b, n) => match &**b {
            Expr::Pow(inner, m) => m.checked_mul(*n).map(|k| Expr::Pow(inner.clone(), k)),
            _ => None,
        },
        _ => None,
    }
}
