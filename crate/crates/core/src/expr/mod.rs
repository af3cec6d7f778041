//! Scalar expressions over `x1..x4` and `t`.
//!
//! An [`Expr`] is an immutable tree; subtrees are reference counted so that
//! derivatives can share structure with their source. All operations are
//! re-entrant and trees can be shared freely across threads.

mod diff;
mod eval;
mod parse;
mod qfn;
mod simplify;
mod zero;

use std::fmt;
use std::sync::Arc;

pub use eval::{EvalError, Vars};
pub use parse::{parse, ParseError};
pub use qfn::{FunctionFile, QuatFunction};
pub use zero::{is_identically_zero, zero_test, ZeroTest, ZERO_TEST_BOX};

/// Variable names accepted by the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X1,
    X2,
    X3,
    X4,
    T,
}

impl Var {
    pub const SPATIAL: [Var; 4] = [Var::X1, Var::X2, Var::X3, Var::X4];

    /// Spatial variable for a 1-based axis number.
    pub fn axis(n: usize) -> Option<Var> {
        match n {
            1 => Some(Var::X1),
            2 => Some(Var::X2),
            3 => Some(Var::X3),
            4 => Some(Var::X4),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X1 => "x1",
            Var::X2 => "x2",
            Var::X3 => "x3",
            Var::X4 => "x4",
            Var::T => "t",
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        match name {
            "x1" => Some(Var::X1),
            "x2" => Some(Var::X2),
            "x3" => Some(Var::X3),
            "x4" => Some(Var::X4),
            "t" => Some(Var::T),
            _ => None,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sqrt => "sqrt",
        }
    }

    pub(crate) fn function(name: &str) -> Option<UnaryOp> {
        match name {
            "sin" => Some(UnaryOp::Sin),
            "cos" => Some(UnaryOp::Cos),
            "exp" => Some(UnaryOp::Exp),
            "log" => Some(UnaryOp::Log),
            "sqrt" => Some(UnaryOp::Sqrt),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinaryOp::Add | BinaryOp::Sub => 1,
            BinaryOp::Mul | BinaryOp::Div => 2,
        }
    }
}

/// Expression tree node. The exponent of [`Expr::Pow`] is always an integer.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Literal(f64),
    Variable(Var),
    Unary(UnaryOp, Arc<Expr>),
    Binary(BinaryOp, Arc<Expr>, Arc<Expr>),
    Pow(Arc<Expr>, i32),
}

impl Expr {
    pub fn lit(v: f64) -> Expr {
        Expr::Literal(v)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Variable(v)
    }

    pub fn unary(op: UnaryOp, e: Expr) -> Expr {
        Expr::Unary(op, Arc::new(e))
    }

    pub fn binary(op: BinaryOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Arc::new(l), Arc::new(r))
    }

    pub fn pow(base: Expr, exp: i32) -> Expr {
        Expr::Pow(Arc::new(base), exp)
    }

    pub fn neg(e: Expr) -> Expr {
        Expr::unary(UnaryOp::Neg, e)
    }

    pub fn add(l: Expr, r: Expr) -> Expr {
        Expr::binary(BinaryOp::Add, l, r)
    }

    pub fn sub(l: Expr, r: Expr) -> Expr {
        Expr::binary(BinaryOp::Sub, l, r)
    }

    pub fn mul(l: Expr, r: Expr) -> Expr {
        Expr::binary(BinaryOp::Mul, l, r)
    }

    pub fn div(l: Expr, r: Expr) -> Expr {
        Expr::binary(BinaryOp::Div, l, r)
    }

    pub fn as_literal(&self) -> Option<f64> {
        match self {
            Expr::Literal(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_literal(&self, v: f64) -> bool {
        self.as_literal() == Some(v)
    }

    /// Visit every variable occurring in the tree.
    pub fn for_each_var(&self, f: &mut impl FnMut(Var)) {
        match self {
            Expr::Literal(_) => {}
            Expr::Variable(v) => f(*v),
            Expr::Unary(_, c) | Expr::Pow(c, _) => c.for_each_var(f),
            Expr::Binary(_, l, r) => {
                l.for_each_var(f);
                r.for_each_var(f);
            }
        }
    }

    pub fn uses(&self, var: Var) -> bool {
        let mut found = false;
        self.for_each_var(&mut |v| found |= v == var);
        found
    }

    /// Sorted, deduplicated variables.
    pub fn variables(&self) -> Vec<Var> {
        let mut vs = Vec::new();
        self.for_each_var(&mut |v| vs.push(v));
        vs.sort();
        vs.dedup();
        vs
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Literal(_) | Expr::Variable(_) => 1,
            Expr::Unary(_, c) | Expr::Pow(c, _) => 1 + c.node_count(),
            Expr::Binary(_, l, r) => 1 + l.node_count() + r.node_count(),
        }
    }

    /// Replaces every occurrence of `var` with `with`.
    pub fn substitute(&self, var: Var, with: &Expr) -> Expr {
        match self {
            Expr::Literal(_) => self.clone(),
            Expr::Variable(v) if *v == var => with.clone(),
            Expr::Variable(_) => self.clone(),
            Expr::Unary(op, c) => Expr::unary(*op, c.substitute(var, with)),
            Expr::Binary(op, l, r) => Expr::binary(*op, l.substitute(var, with), r.substitute(var, with)),
            Expr::Pow(b, n) => Expr::pow(b.substitute(var, with), *n),
        }
    }

    pub fn differentiate(&self, var: Var) -> Expr {
        diff::differentiate(self, var)
    }

    pub fn simplify(&self) -> Expr {
        simplify::simplify(self)
    }

    // Printing precedence: 1 sums, 2 products, 3 negation, 4 powers, 5 atoms.
    fn precedence(&self) -> u8 {
        match self {
            Expr::Literal(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => 3,
            Expr::Literal(_) | Expr::Variable(_) => 5,
            Expr::Unary(UnaryOp::Neg, _) => 3,
            Expr::Unary(..) => 5,
            Expr::Binary(op, ..) => op.precedence(),
            Expr::Pow(..) => 4,
        }
    }
}

/// Symbolic partial derivative, simplified.
pub fn differentiate(e: &Expr, var: Var) -> Expr {
    e.differentiate(var)
}

pub fn simplify(e: &Expr) -> Expr {
    e.simplify()
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Prints in the input grammar with the minimum parentheses needed for
/// `parse` to rebuild the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Literal(v) => {
                if v.is_sign_negative() {
                    write!(f, "-{}", -v)
                } else {
                    write!(f, "{v}")
                }
            }
            Expr::Variable(v) => write!(f, "{v}"),
            Expr::Unary(UnaryOp::Neg, c) => {
                f.write_str("-")?;
                write_child(f, c, c.precedence() < 3)
            }
            Expr::Unary(op, c) => write!(f, "{}({c})", op.name()),
            Expr::Binary(op, l, r) => {
                let p = op.precedence();
                write_child(f, l, l.precedence() < p)?;
                write!(f, " {} ", op.symbol())?;
                // left-associative: an equal-precedence right operand needs parens
                write_child(f, r, r.precedence() <= p)
            }
            Expr::Pow(b, n) => {
                write_child(f, b, b.precedence() < 5)?;
                write!(f, "^{n}")
            }
        }
    }
}
