//! Truncated formal power series in one variable `z`.
//!
//! A [`Series`] stores the coefficients of `z^0..=z^K`; every operation is
//! exact modulo `z^{K+1}`. Binary operations between series of different
//! orders truncate to the smaller order. Operations that lose information at
//! the top (derivative, division by `z`) return a series of lower order.
//!
//! The coefficient ring is abstracted by [`Coeff`], so the same code serves
//! plain complex series and [`DualSeries`], whose coefficients are dual
//! numbers.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dual::{DualScalar, C64};
use crate::error::{Error, Result};
use crate::io::round_sig;

/// Maximum truncation order accepted by the public constructors.
pub const MAX_ORDER: usize = 16;
/// Default truncation order.
pub const DEFAULT_ORDER: usize = 8;

pub trait Coeff:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn try_inv(self) -> Result<Self>;
    /// Largest modulus over all components.
    fn magnitude(self) -> f64;
    /// Modulus of the invertibility-relevant part (the body for duals).
    fn body_magnitude(self) -> f64;
}

impl Coeff for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        C64::new(x, 0.0)
    }
    fn try_inv(self) -> Result<Self> {
        if self.norm() == 0.0 {
            Err(Error::Singular("zero complex scalar".into()))
        } else {
            Ok(self.inv())
        }
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn body_magnitude(self) -> f64 {
        self.norm()
    }
}

impl Coeff for DualScalar {
    fn zero() -> Self {
        DualScalar::ZERO
    }
    fn one() -> Self {
        DualScalar::ONE
    }
    fn from_f64(x: f64) -> Self {
        DualScalar::real(x, 0.0)
    }
    fn try_inv(self) -> Result<Self> {
        self.inv()
    }
    fn magnitude(self) -> f64 {
        self.max_norm()
    }
    fn body_magnitude(self) -> f64 {
        self.body.norm()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series<C> {
    coeffs: Vec<C>,
}

pub type ComplexSeries = Series<C64>;
pub type DualSeries = Series<DualScalar>;

/// Leading coefficients below this (relative) size count as zero when a
/// division by `z^k` or a composition checks its preconditions.
const VANISH_TOL: f64 = 1e-9;

impl<C: Coeff> Series<C> {
    /// Builds a series from `coeffs[k]` = coefficient of `z^k`.
    ///
    /// # Panics
    /// If `coeffs` is empty.
    pub fn new(coeffs: Vec<C>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "a series needs at least one coefficient"
        );
        Series { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Series {
            coeffs: vec![C::zero(); order + 1],
        }
    }

    pub fn constant(c: C, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    pub fn one(order: usize) -> Self {
        Self::constant(C::one(), order)
    }

    /// The series `z`.
    pub fn identity(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.coeffs[1] = C::one();
        }
        s
    }

    /// `Σ_{k=0}^{K} z^k`.
    pub fn geometric(order: usize) -> Self {
        Series {
            coeffs: vec![C::one(); order + 1],
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    /// Coefficient of `z^k`; zero above the truncation order.
    pub fn coeff(&self, k: usize) -> C {
        self.coeffs.get(k).copied().unwrap_or_else(C::zero)
    }

    pub fn set_coeff(&mut self, k: usize, c: C) {
        self.coeffs[k] = c;
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order());
        Series {
            coeffs: self.coeffs[..=order].to_vec(),
        }
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(C) -> D) -> Series<D> {
        Series {
            coeffs: self.coeffs.iter().map(|&c| f(c)).collect(),
        }
    }

    pub fn scale(&self, s: C) -> Self {
        self.map(|c| s * c)
    }

    pub fn max_magnitude(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.magnitude())
            .fold(0.0, f64::max)
    }

    /// Largest coefficient-wise deviation over the common order.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| (a - b).magnitude())
            .fold(0.0, f64::max)
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &Self) -> Self {
        let k = self.order().min(other.order());
        let mut out = vec![C::zero(); k + 1];
        for (i, &a) in self.coeffs.iter().take(k + 1).enumerate() {
            if a == C::zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().take(k + 1 - i).enumerate() {
                out[i + j] = out[i + j] + a * b;
            }
        }
        Series { coeffs: out }
    }

    pub fn add(&self, other: &Self) -> Self {
        let k = self.order().min(other.order());
        Series {
            coeffs: (0..=k).map(|i| self.coeffs[i] + other.coeffs[i]).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let k = self.order().min(other.order());
        Series {
            coeffs: (0..=k).map(|i| self.coeffs[i] - other.coeffs[i]).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.map(|c| -c)
    }

    /// `c + f`
    pub fn add_constant(&self, c: C) -> Self {
        let mut s = self.clone();
        s.coeffs[0] = s.coeffs[0] + c;
        s
    }

    /// Multiplicative inverse; requires an invertible constant term.
    pub fn inv(&self) -> Result<Self> {
        let c0 = self.coeffs[0];
        if c0.body_magnitude() == 0.0 {
            return Err(Error::Singular(
                "series inverse needs a constant term with nonzero body".into(),
            ));
        }
        let r0 = c0.try_inv()?;
        let k = self.order();
        let mut out = vec![C::zero(); k + 1];
        out[0] = r0;
        for n in 1..=k {
            let mut acc = C::zero();
            for j in 1..=n {
                acc = acc + self.coeffs[j] * out[n - j];
            }
            out[n] = -(acc * r0);
        }
        Ok(Series { coeffs: out })
    }

    /// `self / other`, i.e. `self · other^{-1}`.
    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    fn check_vanishing(&self) -> Result<()> {
        let c0 = self.coeffs[0].magnitude();
        if c0 > VANISH_TOL * (1.0 + self.max_magnitude()) {
            return Err(Error::CompositionDomain(c0));
        }
        Ok(())
    }

    /// `f ∘ g` by Horner evaluation in the series ring. Requires `g(0) = 0`.
    pub fn compose(&self, g: &Self) -> Result<Self> {
        g.check_vanishing()?;
        let k = self.order().min(g.order());
        let mut g = g.truncate(k);
        g.coeffs[0] = C::zero();
        let mut acc = Series::constant(self.coeffs[k], k);
        for j in (0..k).rev() {
            acc = acc.mul(&g).add_constant(self.coeffs[j]);
        }
        Ok(acc)
    }

    /// Compositional inverse `f^{⟨−1⟩}`: requires `f(0) = 0` and an
    /// invertible linear coefficient.
    pub fn reversion(&self) -> Result<Self> {
        self.check_vanishing()?;
        let k = self.order();
        if k == 0 {
            return Ok(Series::zero(0));
        }
        let f1 = self.coeffs[1];
        if f1.body_magnitude() == 0.0 {
            return Err(Error::NonInvertible(
                "series reversion needs a linear coefficient with nonzero body".into(),
            ));
        }
        let r1 = f1.try_inv()?;
        let mut g = Series::zero(k);
        g.coeffs[1] = r1;
        // Fix one coefficient per pass; f∘g = z holds through z^n after pass n.
        for n in 2..=k {
            let h = self.compose(&g)?;
            g.coeffs[n] = g.coeffs[n] - h.coeffs[n] * r1;
        }
        Ok(g)
    }

    /// Termwise derivative; the result has order `K − 1`.
    pub fn derivative(&self) -> Self {
        let k = self.order();
        if k == 0 {
            return Series::zero(0);
        }
        Series {
            coeffs: (1..=k)
                .map(|j| C::from_f64(j as f64) * self.coeffs[j])
                .collect(),
        }
    }

    /// Divides by `z^s`: requires the first `s` coefficients to vanish and
    /// returns a series of order `K − s`.
    pub fn shift_down(&self, s: usize) -> Result<Self> {
        if s == 0 {
            return Ok(self.clone());
        }
        if s > self.order() {
            return Err(Error::InvalidInput(format!(
                "cannot divide an order-{} series by z^{s}",
                self.order()
            )));
        }
        let scale = 1.0 + self.max_magnitude();
        for j in 0..s {
            let m = self.coeffs[j].magnitude();
            if m > VANISH_TOL * scale {
                return Err(Error::Domain(format!(
                    "division by z^{s}: coefficient of z^{j} is {m:e}, not 0"
                )));
            }
        }
        Ok(Series {
            coeffs: self.coeffs[s..].to_vec(),
        })
    }

    /// Multiplies by `z^s`; the result has order `K + s`.
    pub fn shift_up(&self, s: usize) -> Self {
        let mut coeffs = vec![C::zero(); s];
        coeffs.extend_from_slice(&self.coeffs);
        Series { coeffs }
    }

    /// Evaluates `f(b)` together with the directional derivative
    /// `f′(b)·c` by carrying the pair through Horner's scheme
    /// (forward-mode perturbation `b ↦ b + t c`, `t² = 0`).
    pub fn compose_with_tangent(&self, b: &Self, c: &Self) -> Result<(Self, Self)> {
        b.check_vanishing()?;
        let k = self.order().min(b.order()).min(c.order());
        let mut b = b.truncate(k);
        b.coeffs[0] = C::zero();
        let c = c.truncate(k);
        let mut val = Series::constant(self.coeffs[k], k);
        let mut tan = Series::zero(k);
        for j in (0..k).rev() {
            tan = tan.mul(&b).add(&val.mul(&c));
            val = val.mul(&b).add_constant(self.coeffs[j]);
        }
        Ok((val, tan))
    }
}

impl<C: Coeff> Add for &Series<C> {
    type Output = Series<C>;
    fn add(self, o: Self) -> Series<C> {
        Series::add(self, o)
    }
}

impl<C: Coeff> Sub for &Series<C> {
    type Output = Series<C>;
    fn sub(self, o: Self) -> Series<C> {
        Series::sub(self, o)
    }
}

impl<C: Coeff> Mul for &Series<C> {
    type Output = Series<C>;
    fn mul(self, o: Self) -> Series<C> {
        Series::mul(self, o)
    }
}

impl<C: Coeff> Neg for &Series<C> {
    type Output = Series<C>;
    fn neg(self) -> Series<C> {
        Series::neg(self)
    }
}

impl DualSeries {
    /// Splits into the body series and the infinitesimal (ε) series.
    pub fn eps_split(&self) -> (ComplexSeries, ComplexSeries) {
        (self.map(|d| d.body), self.map(|d| d.eps))
    }

    /// Recombines `body + ε·eps` (truncated to the common order).
    pub fn from_parts(body: &ComplexSeries, eps: &ComplexSeries) -> Self {
        let k = body.order().min(eps.order());
        Series::new(
            (0..=k)
                .map(|j| DualScalar::new(body.coeff(j), eps.coeff(j)))
                .collect(),
        )
    }

    pub fn from_body(body: &ComplexSeries) -> Self {
        body.map(DualScalar::constant)
    }

    pub fn body(&self) -> ComplexSeries {
        self.map(|d| d.body)
    }

    pub fn eps(&self) -> ComplexSeries {
        self.map(|d| d.eps)
    }

    /// Builds a dual series from real coefficient lists `body[k] + ε eps[k]`.
    pub fn from_real(body: &[f64], eps: &[f64]) -> Self {
        assert_eq!(body.len(), eps.len());
        Series::new(
            body.iter()
                .zip(eps)
                .map(|(&b, &e)| DualScalar::real(b, e))
                .collect(),
        )
    }
}

impl ComplexSeries {
    pub fn from_real(coeffs: &[f64]) -> Self {
        Series::new(coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }
}

pub fn series_mul<C: Coeff>(f: &Series<C>, g: &Series<C>) -> Series<C> {
    f.mul(g)
}

pub fn series_inv<C: Coeff>(f: &Series<C>) -> Result<Series<C>> {
    f.inv()
}

pub fn series_compose<C: Coeff>(f: &Series<C>, g: &Series<C>) -> Result<Series<C>> {
    f.compose(g)
}

pub fn series_reversion<C: Coeff>(f: &Series<C>) -> Result<Series<C>> {
    f.reversion()
}

pub fn series_derivative<C: Coeff>(f: &Series<C>) -> Series<C> {
    f.derivative()
}

pub fn eps_split(f: &DualSeries) -> (ComplexSeries, ComplexSeries) {
    f.eps_split()
}

#[derive(Serialize, Deserialize)]
struct SeriesJson {
    #[serde(rename = "K")]
    k: usize,
    coeffs: Vec<[f64; 4]>,
}

impl Serialize for DualSeries {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesJson {
            k: self.order(),
            coeffs: self
                .coeffs
                .iter()
                .map(|d| {
                    [
                        round_sig(d.body.re),
                        round_sig(d.body.im),
                        round_sig(d.eps.re),
                        round_sig(d.eps.im),
                    ]
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DualSeries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = SeriesJson::deserialize(d)?;
        if raw.coeffs.len() != raw.k + 1 {
            return Err(D::Error::custom(format!(
                "K = {} but {} coefficients given",
                raw.k,
                raw.coeffs.len()
            )));
        }
        if raw.k > MAX_ORDER {
            return Err(D::Error::custom(format!(
                "K = {} exceeds {MAX_ORDER}",
                raw.k
            )));
        }
        Ok(Series::new(
            raw.coeffs
                .iter()
                .map(|c| DualScalar::new(C64::new(c[0], c[1]), C64::new(c[2], c[3])))
                .collect(),
        ))
    }
}
