//! The normed division algebras R, C, H and O.
//!
//! An element stores up to eight real coefficients in the basis
//! `1, i, j, k, (0,1), (0,i), (0,j), (0,k)`; an element of kind `K` uses only
//! the first `K.dim()` slots and the rest stay zero. Quaternions multiply by
//! Hamilton's rule, and a Cayley number is a pair of quaternions with
//!
//! ```text
//! (q1, q2)(p1, p2) = (q1 p1 - conj(p2) q2,  p2 q1 + q2 conj(p1))
//! conj(q1, q2)     = (conj(q1), -q2)
//! ```
//!
//! so the quaternions sit inside O as the pairs `(q, 0)`.

use core::fmt;
use core::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use core::str::FromStr;

// unused when a dependency links std, which adds inherent float methods
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlgebraKind {
    R,
    C,
    H,
    O,
}

impl AlgebraKind {
    pub const ALL: [AlgebraKind; 4] = [AlgebraKind::R, AlgebraKind::C, AlgebraKind::H, AlgebraKind::O];

    /// Real dimension, `2^d` for the `d`-th doubling.
    pub const fn dim(self) -> usize {
        match self {
            AlgebraKind::R => 1,
            AlgebraKind::C => 2,
            AlgebraKind::H => 4,
            AlgebraKind::O => 8,
        }
    }

    pub fn from_dim(dim: usize) -> Option<Self> {
        match dim {
            1 => Some(AlgebraKind::R),
            2 => Some(AlgebraKind::C),
            4 => Some(AlgebraKind::H),
            8 => Some(AlgebraKind::O),
            _ => None,
        }
    }

    pub const fn is_associative(self) -> bool {
        !matches!(self, AlgebraKind::O)
    }

    pub const fn symbol(self) -> &'static str {
        match self {
            AlgebraKind::R => "R",
            AlgebraKind::C => "C",
            AlgebraKind::H => "H",
            AlgebraKind::O => "O",
        }
    }
}

impl fmt::Display for AlgebraKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for AlgebraKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "R" => Ok(AlgebraKind::R),
            "C" => Ok(AlgebraKind::C),
            "H" => Ok(AlgebraKind::H),
            "O" => Ok(AlgebraKind::O),
            _ => Err(Error::InvalidConfig("algebra kind must be one of R, C, H, O")),
        }
    }
}

type Quat = [f64; 4];

#[inline]
fn hamilton(a: &Quat, b: &Quat) -> Quat {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

#[inline]
fn qconj(a: &Quat) -> Quat {
    [a[0], -a[1], -a[2], -a[3]]
}

#[inline]
fn halves(c: &[f64; 8]) -> (Quat, Quat) {
    ([c[0], c[1], c[2], c[3]], [c[4], c[5], c[6], c[7]])
}

/// A number in R, C, H or O.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlgebraElement {
    kind: AlgebraKind,
    coeffs: [f64; 8],
}

impl AlgebraElement {
    pub fn new(kind: AlgebraKind, coeffs: &[f64]) -> Result<Self> {
        if coeffs.len() != kind.dim() {
            return Err(Error::CoefficientCount {
                kind,
                expected: kind.dim(),
                got: coeffs.len(),
            });
        }
        let mut c = [0.0; 8];
        c[..coeffs.len()].copy_from_slice(coeffs);
        Ok(Self { kind, coeffs: c })
    }

    pub const fn zero(kind: AlgebraKind) -> Self {
        Self { kind, coeffs: [0.0; 8] }
    }

    pub const fn one(kind: AlgebraKind) -> Self {
        Self::from_real(kind, 1.0)
    }

    pub const fn from_real(kind: AlgebraKind, x: f64) -> Self {
        let mut coeffs = [0.0; 8];
        coeffs[0] = x;
        Self { kind, coeffs }
    }

    /// The `index`-th basis unit. Panics if `index >= kind.dim()`.
    pub fn unit(kind: AlgebraKind, index: usize) -> Self {
        assert!(index < kind.dim(), "basis index {index} out of range for {kind}");
        let mut coeffs = [0.0; 8];
        coeffs[index] = 1.0;
        Self { kind, coeffs }
    }

    /// Cayley number from its two quaternion halves.
    pub fn from_pair(first: &Self, second: &Self) -> Result<Self> {
        for q in [first, second] {
            if q.kind != AlgebraKind::H {
                return Err(Error::KindMismatch {
                    left: q.kind,
                    right: AlgebraKind::H,
                });
            }
        }
        let mut coeffs = [0.0; 8];
        coeffs[..4].copy_from_slice(&first.coeffs[..4]);
        coeffs[4..].copy_from_slice(&second.coeffs[..4]);
        Ok(Self {
            kind: AlgebraKind::O,
            coeffs,
        })
    }

    /// Quaternion halves `(q1, q2)` of a Cayley number.
    pub fn pair(&self) -> Result<(Self, Self)> {
        if self.kind != AlgebraKind::O {
            return Err(Error::KindMismatch {
                left: self.kind,
                right: AlgebraKind::O,
            });
        }
        let (a, b) = halves(&self.coeffs);
        Ok((
            Self::new(AlgebraKind::H, &a).expect("four coefficients"),
            Self::new(AlgebraKind::H, &b).expect("four coefficients"),
        ))
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs[..self.kind.dim()]
    }

    pub fn re(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn im(&self) -> Self {
        let mut out = *self;
        out.coeffs[0] = 0.0;
        out
    }

    /// `(Re a, Im a)`.
    pub fn split(&self) -> (f64, Self) {
        (self.re(), self.im())
    }

    pub fn conj(&self) -> Self {
        let mut out = -*self;
        out.coeffs[0] = self.coeffs[0];
        out
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Euclidean inner product of the coefficient vectors, `Re(a conj(b))`.
    pub fn dot(&self, other: &Self) -> f64 {
        self.coeffs.iter().zip(other.coeffs.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        out
    }

    pub fn inv(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 == 0.0 || !n2.is_finite() {
            return Err(Error::ZeroDivisor);
        }
        Ok(self.conj().scale(1.0 / n2))
    }

    /// Unit element in the direction of `self`.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroDivisor);
        }
        Ok(self.scale(1.0 / n))
    }

    fn check_kind(&self, other: &Self) -> Result<()> {
        if self.kind == other.kind {
            Ok(())
        } else {
            Err(Error::KindMismatch {
                left: self.kind,
                right: other.kind,
            })
        }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_kind(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_kind(other)?;
        Ok(self.zip(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_kind(other)?;
        Ok(self.zip(other, |a, b| a - b))
    }

    /// `self * other^{-1}` with the bracketing written.
    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.try_mul(&other.inv()?)
    }

    fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut coeffs = [0.0; 8];
        for (i, c) in coeffs.iter_mut().enumerate() {
            *c = f(self.coeffs[i], other.coeffs[i]);
        }
        Self {
            kind: self.kind,
            coeffs,
        }
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let a = &self.coeffs;
        let b = &other.coeffs;
        let mut c = [0.0; 8];
        match self.kind {
            AlgebraKind::R => c[0] = a[0] * b[0],
            AlgebraKind::C => {
                c[0] = a[0] * b[0] - a[1] * b[1];
                c[1] = a[0] * b[1] + a[1] * b[0];
            }
            AlgebraKind::H => {
                let (qa, _) = halves(a);
                let (qb, _) = halves(b);
                c[..4].copy_from_slice(&hamilton(&qa, &qb));
            }
            AlgebraKind::O => {
                let (q1, q2) = halves(a);
                let (p1, p2) = halves(b);
                let x = hamilton(&q1, &p1);
                let y = hamilton(&qconj(&p2), &q2);
                let z = hamilton(&p2, &q1);
                let w = hamilton(&q2, &qconj(&p1));
                for i in 0..4 {
                    c[i] = x[i] - y[i];
                    c[i + 4] = z[i] + w[i];
                }
            }
        }
        Self {
            kind: self.kind,
            coeffs: c,
        }
    }

    /// `(xy)z - x(yz)`; identically zero unless the kind is O.
    pub fn associator(x: &Self, y: &Self, z: &Self) -> Result<Self> {
        x.check_kind(y)?;
        y.check_kind(z)?;
        Ok((*x * *y) * *z - *x * (*y * *z))
    }

    /// Image under the inclusion R ⊂ C ⊂ H ⊂ O.
    pub fn embed(&self, kind: AlgebraKind) -> Result<Self> {
        if kind.dim() < self.kind.dim() {
            return Err(Error::KindMismatch {
                left: self.kind,
                right: kind,
            });
        }
        Ok(Self {
            kind,
            coeffs: self.coeffs,
        })
    }

    /// `|self - other| <= tol * max(1, |self|, |other|)`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if self.kind != other.kind {
            return false;
        }
        let scale = 1.0f64.max(self.norm()).max(other.norm());
        (*self - *other).norm() <= tol * scale
    }

    /// Independent standard normal coefficients.
    pub fn random<R: Rng + ?Sized>(kind: AlgebraKind, rng: &mut R) -> Self {
        let mut coeffs = [0.0; 8];
        for c in coeffs.iter_mut().take(kind.dim()) {
            *c = rng.sample(StandardNormal);
        }
        Self { kind, coeffs }
    }

    /// Random element with zero real part (zero for R).
    pub fn random_imaginary<R: Rng + ?Sized>(kind: AlgebraKind, rng: &mut R) -> Self {
        Self::random(kind, rng).im()
    }

    /// Random element of norm one, uniform on the unit sphere.
    pub fn random_unit<R: Rng + ?Sized>(kind: AlgebraKind, rng: &mut R) -> Self {
        loop {
            let x = Self::random(kind, rng);
            let n = x.norm();
            if n > 1e-6 {
                return x.scale(1.0 / n);
            }
        }
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.kind)?;
        for (i, c) in self.coeffs().iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

// Operator forms panic when the kinds differ; use the `try_*` methods on
// untrusted input.

impl Add for AlgebraElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.try_add(&rhs).expect("algebra kinds must match")
    }
}

impl AddAssign for AlgebraElement {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Sub for AlgebraElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.try_sub(&rhs).expect("algebra kinds must match")
    }
}

impl SubAssign for AlgebraElement {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl Mul for AlgebraElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.try_mul(&rhs).expect("algebra kinds must match")
    }
}

impl Mul<f64> for AlgebraElement {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

impl Mul<AlgebraElement> for f64 {
    type Output = AlgebraElement;
    fn mul(self, rhs: AlgebraElement) -> AlgebraElement {
        rhs.scale(self)
    }
}

impl Div<f64> for AlgebraElement {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        self.scale(1.0 / rhs)
    }
}

impl Neg for AlgebraElement {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

/// Real multiple of the identity plus an element: `r + x`.
pub fn real_plus(r: f64, x: &AlgebraElement) -> AlgebraElement {
    AlgebraElement::from_real(x.kind(), r) + *x
}
