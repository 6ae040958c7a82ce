//! Dual numbers `a + ε a′` with `ε² = 0` over the complex field.
//!
//! A dual scalar is the same thing as an upper-triangular matrix
//! `[[a, a′], [0, a]]` with equal diagonal, so carrying dual numbers through a
//! computation evaluates the infinitesimal part alongside the ordinary one.

use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DualScalar {
    pub body: C64,
    pub eps: C64,
}

impl DualScalar {
    pub const ZERO: DualScalar = DualScalar {
        body: C64::new(0.0, 0.0),
        eps: C64::new(0.0, 0.0),
    };
    pub const ONE: DualScalar = DualScalar {
        body: C64::new(1.0, 0.0),
        eps: C64::new(0.0, 0.0),
    };
    pub const EPS: DualScalar = DualScalar {
        body: C64::new(0.0, 0.0),
        eps: C64::new(1.0, 0.0),
    };

    pub fn new(body: C64, eps: C64) -> Self {
        DualScalar { body, eps }
    }

    /// Real body and real infinitesimal part.
    pub fn real(body: f64, eps: f64) -> Self {
        DualScalar {
            body: C64::new(body, 0.0),
            eps: C64::new(eps, 0.0),
        }
    }

    pub fn constant(body: C64) -> Self {
        DualScalar {
            body,
            eps: C64::new(0.0, 0.0),
        }
    }

    /// `(a + εa′)^{-1} = a^{-1} − ε a′ a^{-2}`.
    pub fn inv(self) -> Result<Self> {
        if self.body.norm() == 0.0 {
            return Err(Error::Singular("dual scalar with zero body".into()));
        }
        let r = self.body.inv();
        Ok(DualScalar {
            body: r,
            eps: -self.eps * r * r,
        })
    }

    pub fn powi(self, n: u32) -> Self {
        let mut acc = DualScalar::ONE;
        for _ in 0..n {
            acc *= self;
        }
        acc
    }

    pub fn scale(self, s: C64) -> Self {
        DualScalar {
            body: self.body * s,
            eps: self.eps * s,
        }
    }

    /// Largest modulus of the two components.
    pub fn max_norm(self) -> f64 {
        self.body.norm().max(self.eps.norm())
    }

    pub fn is_zero(self) -> bool {
        self.body.norm() == 0.0 && self.eps.norm() == 0.0
    }
}

impl From<f64> for DualScalar {
    fn from(x: f64) -> Self {
        DualScalar::real(x, 0.0)
    }
}

impl From<C64> for DualScalar {
    fn from(x: C64) -> Self {
        DualScalar::constant(x)
    }
}

impl Add for DualScalar {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        DualScalar {
            body: self.body + o.body,
            eps: self.eps + o.eps,
        }
    }
}

impl Sub for DualScalar {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        DualScalar {
            body: self.body - o.body,
            eps: self.eps - o.eps,
        }
    }
}

impl Mul for DualScalar {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        DualScalar {
            body: self.body * o.body,
            eps: self.body * o.eps + self.eps * o.body,
        }
    }
}

/// Division by a dual with zero body panics; use [`DualScalar::inv`] when the
/// divisor is not known to be invertible.
impl Div for DualScalar {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.inv().expect("division by a dual scalar with zero body")
    }
}

impl Neg for DualScalar {
    type Output = Self;
    fn neg(self) -> Self {
        DualScalar {
            body: -self.body,
            eps: -self.eps,
        }
    }
}

impl AddAssign for DualScalar {
    fn add_assign(&mut self, o: Self) {
        self.body += o.body;
        self.eps += o.eps;
    }
}

impl SubAssign for DualScalar {
    fn sub_assign(&mut self, o: Self) {
        self.body -= o.body;
        self.eps -= o.eps;
    }
}

impl MulAssign for DualScalar {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl Sum for DualScalar {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(DualScalar::ZERO, |a, b| a + b)
    }
}

impl Product for DualScalar {
    fn product<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(DualScalar::ONE, |a, b| a * b)
    }
}

impl fmt::Display for DualScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) + ε({})", self.body, self.eps)
    }
}

pub fn d_add(a: DualScalar, b: DualScalar) -> DualScalar {
    a + b
}

pub fn d_mul(a: DualScalar, b: DualScalar) -> DualScalar {
    a * b
}

pub fn d_inv(a: DualScalar) -> Result<DualScalar> {
    a.inv()
}
