use thiserror::Error;

use super::{BinaryOp, Expr, UnaryOp, Var};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EvalError {
    /// `node` is the printed subexpression whose argument was out of domain.
    #[error("domain error: {node} is undefined at argument {argument}")]
    Domain { node: String, argument: f64 },

    #[error("no value supplied for variable {0}")]
    MissingVariable(Var),
}

/// Variable bindings for evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vars<T> {
    pub x: Option<[T; 4]>,
    pub t: Option<T>,
}

impl<T: Scalar> Vars<T> {
    pub fn point(x: [T; 4]) -> Self {
        Self { x: Some(x), t: None }
    }

    pub fn time(t: T) -> Self {
        Self { x: None, t: Some(t) }
    }

    /// Binds a slice of length 4 to `x1..x4` or of length 1 to `t`.
    pub fn from_slice(values: &[T]) -> Option<Self> {
        match values {
            [t] => Some(Self::time(*t)),
            [a, b, c, d] => Some(Self::point([*a, *b, *c, *d])),
            _ => None,
        }
    }

    fn get(&self, v: Var) -> Result<T, EvalError> {
        let missing = || EvalError::MissingVariable(v);
        match v {
            Var::T => self.t.ok_or_else(missing),
            Var::X1 => self.x.map(|x| x[0]).ok_or_else(missing),
            Var::X2 => self.x.map(|x| x[1]).ok_or_else(missing),
            Var::X3 => self.x.map(|x| x[2]).ok_or_else(missing),
            Var::X4 => self.x.map(|x| x[3]).ok_or_else(missing),
        }
    }
}

fn domain<T: Scalar>(node: &Expr, argument: T) -> EvalError {
    EvalError::Domain { node: node.to_string(), argument: argument.to_f64_lossy() }
}

impl Expr {
    /// Evaluate at the given bindings. Arguments outside the real domain of
    /// `log`, `sqrt`, division and negative powers are reported as errors,
    /// never as quiet NaN or infinity.
    pub fn eval<T: Scalar>(&self, vars: &Vars<T>) -> Result<T, EvalError> {
        self.eval_scaled(vars, &mut T::zero())
    }

    /// Evaluate and also return the largest magnitude of any subexpression
    /// value met along the way.
    pub fn eval_with_scale<T: Scalar>(&self, vars: &Vars<T>) -> Result<(T, T), EvalError> {
        let mut scale = T::zero();
        let v = self.eval_scaled(vars, &mut scale)?;
        Ok((v, scale))
    }

    /// Shorthand for evaluating at a point of 4-space.
    pub fn eval_at<T: Scalar>(&self, x: [T; 4]) -> Result<T, EvalError> {
        self.eval(&Vars::point(x))
    }

    fn eval_scaled<T: Scalar>(&self, vars: &Vars<T>, scale: &mut T) -> Result<T, EvalError> {
        let v = match self {
            Expr::Literal(c) => T::lit(*c),
            Expr::Variable(v) => vars.get(*v)?,
            Expr::Unary(op, c) => {
                let a = c.eval_scaled(vars, scale)?;
                match op {
                    UnaryOp::Neg => -a,
                    UnaryOp::Sin => a.sin(),
                    UnaryOp::Cos => a.cos(),
                    UnaryOp::Exp => a.exp(),
                    UnaryOp::Log if a > T::zero() => a.ln(),
                    UnaryOp::Sqrt if a >= T::zero() => a.sqrt(),
                    UnaryOp::Log | UnaryOp::Sqrt => return Err(domain(self, a)),
                }
            }
            Expr::Binary(op, l, r) => {
                let a = l.eval_scaled(vars, scale)?;
                let b = r.eval_scaled(vars, scale)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div if b != T::zero() => a / b,
                    BinaryOp::Div => return Err(domain(self, b)),
                }
            }
            Expr::Pow(base, n) => {
                let a = base.eval_scaled(vars, scale)?;
                if *n < 0 && a == T::zero() {
                    return Err(domain(self, a));
                }
                a.powi(*n)
            }
        };
        if !v.is_finite() {
            return Err(EvalError::Domain { node: self.to_string(), argument: v.to_f64_lossy() });
        }
        *scale = scale.max(v.abs());
        Ok(v)
    }
}
