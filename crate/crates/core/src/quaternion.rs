//! Quaternion value type with Hamilton multiplication.
//!
//! Components are stored in `(scalar, i, j, k)` order everywhere, including
//! the JSON form, which is a plain 4-element array.

use std::fmt;
use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use serde::de::{Deserialize, Deserializer};
use serde::ser::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `re + i*i + j*j + k*k` with `i^2 = j^2 = k^2 = ijk = -1`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Quaternion<T> {
    pub re: T,
    pub i: T,
    pub j: T,
    pub k: T,
}

impl<T> Quaternion<T> {
    pub const fn new(re: T, i: T, j: T, k: T) -> Self {
        Self { re, i, j, k }
    }
}

impl<T: Scalar> Quaternion<T> {
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn one() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::zero())
    }

    pub fn unit_i() -> Self {
        Self::new(T::zero(), T::one(), T::zero(), T::zero())
    }

    pub fn unit_j() -> Self {
        Self::new(T::zero(), T::zero(), T::one(), T::zero())
    }

    pub fn unit_k() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::one())
    }

    pub fn from_array(c: [T; 4]) -> Self {
        Self::new(c[0], c[1], c[2], c[3])
    }

    pub fn to_array(self) -> [T; 4] {
        [self.re, self.i, self.j, self.k]
    }

    /// Hamilton product `self * rhs`. Not commutative.
    pub fn hamilton_mul(self, rhs: Self) -> Self {
        let (a1, b1, c1, d1) = (self.re, self.i, self.j, self.k);
        let (a2, b2, c2, d2) = (rhs.re, rhs.i, rhs.j, rhs.k);
        Self::new(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )
    }

    pub fn conjugate(self) -> Self {
        Self::new(self.re, -self.i, -self.j, -self.k)
    }

    pub fn norm_squared(self) -> T {
        self.re * self.re + self.i * self.i + self.j * self.j + self.k * self.k
    }

    /// Euclidean norm, computed with scaling so it neither overflows nor
    /// underflows for representable inputs.
    pub fn norm(self) -> T {
        let m = self.max_abs();
        if m == T::zero() || !m.is_finite() {
            return m;
        }
        let s = self.scale(m.recip());
        m * s.norm_squared().sqrt()
    }

    /// Largest absolute component.
    pub fn max_abs(self) -> T {
        self.re.abs().max(self.i.abs()).max(self.j.abs()).max(self.k.abs())
    }

    pub fn scale(self, s: T) -> Self {
        Self::new(s * self.re, s * self.i, s * self.j, s * self.k)
    }

    /// Multiplicative inverse `conj(q) / |q|^2`.
    pub fn inverse(self) -> Result<Self> {
        let n2 = self.norm_squared();
        if n2 == T::zero() {
            return Err(Error::Domain { operation: "inverse", detail: "quaternion has zero norm".into() });
        }
        if !n2.is_finite() || !n2.is_normal() {
            // fall back to a scaled computation for extreme magnitudes
            let m = self.max_abs();
            let s = self.scale(m.recip());
            return Ok(s.conjugate().scale((s.norm_squared() * m).recip()));
        }
        Ok(self.conjugate().scale(n2.recip()))
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.i.is_finite() && self.j.is_finite() && self.k.is_finite()
    }
}

impl<T: Scalar> Add for Quaternion<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.i + rhs.i, self.j + rhs.j, self.k + rhs.k)
    }
}

impl<T: Scalar> AddAssign for Quaternion<T> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Scalar> Sub for Quaternion<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.re - rhs.re, self.i - rhs.i, self.j - rhs.j, self.k - rhs.k)
    }
}

impl<T: Scalar> Neg for Quaternion<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.i, -self.j, -self.k)
    }
}

impl<T: Scalar> Mul for Quaternion<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.hamilton_mul(rhs)
    }
}

impl<T: Scalar> Index<usize> for Quaternion<T> {
    type Output = T;
    fn index(&self, idx: usize) -> &T {
        match idx {
            0 => &self.re,
            1 => &self.i,
            2 => &self.j,
            3 => &self.k,
            _ => panic!("quaternion component index {idx} out of range"),
        }
    }
}

impl<T: Scalar> From<[T; 4]> for Quaternion<T> {
    fn from(c: [T; 4]) -> Self {
        Self::from_array(c)
    }
}

impl<T: fmt::Display> fmt::Display for Quaternion<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.re, self.i, self.j, self.k)
    }
}

impl<T: Serialize> Serialize for Quaternion<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        (&self.re, &self.i, &self.j, &self.k).serialize(serializer)
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Quaternion<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let [re, i, j, k] = <[T; 4]>::deserialize(deserializer)?;
        Ok(Self { re, i, j, k })
    }
}
