//! Quaternionic Cauchy-Riemann-like relations and their harmonic consequence.
//!
//! The crate checks whether a quaternion-valued function
//! `F = F1 + F2 i + F3 j + F4 k` of `(x1, x2, x3, x4)` satisfies a fixed set of
//! first-order relations between its partial derivatives, the second-order
//! chains obtained by differentiating them, and the 4D Laplace equation for
//! each component. Checks run symbolically (exact derivatives, random-point
//! identity testing) or numerically (central finite differences). Alongside
//! these are quaternionic line integrals `∫ f dq` and an iterative Dirichlet
//! solver for the Laplace equation on a uniform 4D lattice.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the common double-precision instantiation.
//!
//! ```
//! use qharmonic::{check_cr, check_harmonic, CheckOptions, QuatFunction};
//!
//! let f = QuatFunction::parse(["x1", "x2", "x3", "x4"])?;
//! let report = check_cr(&f, &CheckOptions::<f64>::numeric(100, 1e-6, 42))?;
//! assert!(report.verdict.is_pass());
//! assert!(check_harmonic(&f, &CheckOptions::<f64>::symbolic(42))?.verdict.is_pass());
//! # Ok::<(), qharmonic::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::should_implement_trait)]

pub mod corpus;
pub mod error;
pub mod expr;
pub mod grid;
pub mod harmonic;
pub mod numeric;
pub mod path;
pub mod quaternion;
pub mod regularity;
mod sampling;
pub mod scalar;

pub use error::{Error, Result};
pub use expr::{parse, Expr, FunctionFile, QuatFunction, Var};
pub use grid::{Grid4D, Method, Ordering, SolveOptions, SolveStats};
pub use harmonic::{check_harmonic, check_harmonic_complex, laplacian_symbolic, HarmonicReport};
pub use numeric::{partial1_fd, partial2_fd, FdSettings};
pub use path::{fundamental_theorem_check, integrate_f_dq, path_independence_probe, Convention, IntegralResult, Path};
pub use quaternion::Quaternion;
pub use regularity::{
    check_cr, check_cr_complex, check_cr_numeric, check_cr_numeric_at, check_cr_symbolic, check_second_order_chains,
    relation_constraints, CheckOptions, Constraint, ConstraintReport, Mode, SignedPartial, Variant, Verdict,
};
pub use scalar::Scalar;

pub type Quaternion64 = Quaternion<f64>;
pub type Quaternion32 = Quaternion<f32>;
pub type Grid64 = Grid4D<f64>;
pub type Grid32 = Grid4D<f32>;
pub type FdSettings64 = FdSettings<f64>;
pub type ConstraintReport64 = ConstraintReport<f64>;
pub type HarmonicReport64 = HarmonicReport<f64>;
pub type IntegralResult64 = IntegralResult<f64>;
pub type Path64 = Path<f64>;
