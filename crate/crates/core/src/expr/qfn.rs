//! Function files (`.qfn`): one `NAME = expression` per line, `#` starts a
//! comment, blank lines are ignored and names must be unique.

use std::path::Path;

use super::{parse, EvalError, Expr, Var};
use crate::error::{Error, Result};
use crate::quaternion::Quaternion;
use crate::scalar::Scalar;

/// Four component expressions `F1 + F2 i + F3 j + F4 k` over `x1..x4`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuatFunction {
    pub components: [Expr; 4],
}

impl QuatFunction {
    /// Fails if any component mentions `t`.
    pub fn new(components: [Expr; 4]) -> Result<Self> {
        for (m, c) in components.iter().enumerate() {
            if c.uses(Var::T) {
                return Err(Error::precondition(
                    "QuatFunction::new",
                    format!("component {} references t; only x1..x4 are allowed", m + 1),
                ));
            }
        }
        Ok(Self { components })
    }

    pub fn parse(texts: [&str; 4]) -> Result<Self> {
        let [a, b, c, d] = texts.map(parse);
        Self::new([a?, b?, c?, d?])
    }

    /// Constant function with the given value.
    pub fn constant(c: [f64; 4]) -> Self {
        Self { components: c.map(Expr::lit) }
    }

    /// `F(q) = q`.
    pub fn identity() -> Self {
        Self { components: Var::SPATIAL.map(Expr::var) }
    }

    /// 1-based component accessor.
    pub fn component(&self, m: usize) -> &Expr {
        &self.components[m - 1]
    }

    pub fn eval<T: Scalar>(&self, x: [T; 4]) -> std::result::Result<Quaternion<T>, EvalError> {
        let [a, b, c, d] = &self.components;
        Ok(Quaternion::new(a.eval_at(x)?, b.eval_at(x)?, c.eval_at(x)?, d.eval_at(x)?))
    }

    /// Evaluates at the point whose coordinates are the components of `q`.
    pub fn eval_quat<T: Scalar>(&self, q: Quaternion<T>) -> std::result::Result<Quaternion<T>, EvalError> {
        self.eval(q.to_array())
    }
}

/// Parsed contents of a function file, in file order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FunctionFile {
    pub source: String,
    pub entries: Vec<(String, Expr)>,
}

impl FunctionFile {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse_str(&text, &path.display().to_string())
    }

    /// `source` names the input in error messages.
    pub fn parse_str(text: &str, source: &str) -> Result<Self> {
        let err = |line: usize, detail: String| Error::FileFormat { path: source.to_string(), line, detail };
        let mut entries: Vec<(String, Expr)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((name, rhs)) = line.split_once('=') else {
                return Err(err(idx + 1, format!("expected `NAME = expression`, found `{line}`")));
            };
            let name = name.trim();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(err(idx + 1, format!("invalid name `{name}`")));
            }
            if entries.iter().any(|(n, _)| n == name) {
                return Err(err(idx + 1, format!("duplicate name `{name}`")));
            }
            let e = parse(rhs).map_err(|e| err(idx + 1, format!("{name}: {e}")))?;
            entries.push((name.to_string(), e));
        }
        Ok(Self { source: source.to_string(), entries })
    }

    pub fn get(&self, name: &str) -> Option<&Expr> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, e)| e)
    }

    pub fn require(&self, name: &str) -> Result<&Expr> {
        self.get(name).ok_or_else(|| Error::FileFormat {
            path: self.source.clone(),
            line: 0,
            detail: format!("missing required name `{name}`"),
        })
    }

    pub fn has(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    /// Components `F1..F4`.
    pub fn quat_function(&self) -> Result<QuatFunction> {
        self.four(["F1", "F2", "F3", "F4"])
    }

    /// Integrand: either a real-valued `f` or components `f1..f4`.
    pub fn integrand(&self) -> Result<QuatFunction> {
        if let Some(f) = self.get("f") {
            if ["f1", "f2", "f3", "f4"].iter().any(|n| self.has(n)) {
                return Err(self.format_error("give either `f` or `f1..f4`, not both"));
            }
            let zero = Expr::lit(0.0);
            return QuatFunction::new([f.clone(), zero.clone(), zero.clone(), zero]);
        }
        self.four(["f1", "f2", "f3", "f4"])
    }

    /// The pair `(u, v)` over `x1, x2`.
    pub fn complex_pair(&self) -> Result<(Expr, Expr)> {
        let u = self.require("u")?.clone();
        let v = self.require("v")?.clone();
        for (name, e) in [("u", &u), ("v", &v)] {
            if e.variables().iter().any(|v| !matches!(v, Var::X1 | Var::X2)) {
                return Err(self.format_error(&format!("`{name}` may only reference x1 and x2")));
            }
        }
        Ok((u, v))
    }

    fn four(&self, names: [&str; 4]) -> Result<QuatFunction> {
        let [a, b, c, d] = names.map(|n| self.require(n).cloned());
        QuatFunction::new([a?, b?, c?, d?]).map_err(|e| self.format_error(&e.to_string()))
    }

    fn format_error(&self, detail: &str) -> Error {
        Error::FileFormat { path: self.source.clone(), line: 0, detail: detail.to_string() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q_SQUARED: &str = "\
# components of q^2
F1 = x1^2 - x2^2 - x3^2 - x4^2
F2 = 2*x1*x2

F3 = 2*x1*x3   # trailing comment
F4 = 2*x1*x4
";

    #[test]
    fn reads_quaternion_function() {
        let file = FunctionFile::parse_str(Q_SQUARED, "q2.qfn").unwrap();
        let f = file.quat_function().unwrap();
        assert_eq!(f.component(3).to_string(), "2 * x1 * x3");
        let v = f.eval([1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(v, Quaternion::new(-2.0, 2.0, 2.0, 2.0));
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let err = FunctionFile::parse_str("u = x1\nu = x2\n", "d.qfn").unwrap_err();
        match err {
            Error::FileFormat { line, detail, .. } => {
                assert_eq!(line, 2);
                assert!(detail.contains("duplicate"));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn missing_component_is_reported() {
        let file = FunctionFile::parse_str("F1 = x1\nF2 = x2\nF3 = x3\n", "m.qfn").unwrap();
        let err = file.quat_function().unwrap_err();
        assert!(err.to_string().contains("F4"), "{err}");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = FunctionFile::parse_str("u = x1\nv = x5\n", "p.qfn").unwrap_err();
        assert!(err.to_string().starts_with("p.qfn:2:"), "{err}");
        assert!(FunctionFile::parse_str("just text\n", "p.qfn").is_err());
    }

    #[test]
    fn complex_pair_and_integrands() {
        let file = FunctionFile::parse_str("u = x1^2 - x2^2\nv = 2*x1*x2\n", "z.qfn").unwrap();
        let (u, v) = file.complex_pair().unwrap();
        assert_eq!(u.eval_at([2.0, 1.0, 0.0, 0.0]).unwrap(), 3.0);
        assert_eq!(v.eval_at([2.0, 1.0, 0.0, 0.0]).unwrap(), 4.0);
        let bad = FunctionFile::parse_str("u = x3\nv = x1\n", "z.qfn").unwrap();
        assert!(bad.complex_pair().is_err());

        let f = FunctionFile::parse_str("f = x1 + x2\n", "f.qfn").unwrap().integrand().unwrap();
        assert_eq!(f.eval([1.0, 2.0, 0.0, 0.0]).unwrap(), Quaternion::new(3.0, 0.0, 0.0, 0.0));
        let f = FunctionFile::parse_str("f1 = x1\nf2 = x2\nf3 = x3\nf4 = x4\n", "f.qfn").unwrap().integrand().unwrap();
        assert_eq!(f, QuatFunction::identity());
    }

    #[test]
    fn components_may_not_use_t() {
        assert!(QuatFunction::parse(["x1", "t", "0", "0"]).is_err());
    }
}
