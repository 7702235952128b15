//! The boundary of `H^m_F` minus a point, as the nilpotent group `N`.
//!
//! A point `[(t,q), k]` is stored as a purely imaginary `center` (the `(t,q)`
//! part; for O the quaternion `t` is the first half and `q` the second) and
//! a row of `m - 1` horizontal coordinates `k`. The group law is
//!
//! ```text
//! [c, k][c', k'] = [c + c' + 2 Im<k, k'>, k + k'],   <k, k'> = Σ k_a conj(k'_a)
//! ```
//!
//! with gauge `A([c, k]) = |k|^2 + c` and quasi-norm `|A|^{1/2}`.

use alloc::vec::Vec;

// unused when a dependency links std, which adds inherent float methods
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::algebra::{AlgebraElement, AlgebraKind};
use crate::error::{Error, Result};

/// `H^m_F`: algebra kind plus rank `m >= 2`. Cayley numbers only exist for `m = 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpaceConfig {
    kind: AlgebraKind,
    m: usize,
}

impl SpaceConfig {
    pub fn new(kind: AlgebraKind, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidConfig("m must be at least 2"));
        }
        if kind == AlgebraKind::O && m != 2 {
            return Err(Error::InvalidConfig(
                "the Cayley hyperbolic space only exists for m = 2",
            ));
        }
        Ok(Self { kind, m })
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of horizontal coordinates, `m - 1`.
    pub fn horizontal_len(&self) -> usize {
        self.m - 1
    }

    /// Topological dimension of the boundary sphere, `dim F * m - 1`.
    pub fn boundary_dim(&self) -> usize {
        self.kind.dim() * self.m - 1
    }

    pub(crate) fn check(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ConfigMismatch)
        }
    }
}

/// Hermitian product `Σ x_a conj(y_a)` of two coordinate rows.
pub fn hermitian(x: &[AlgebraElement], y: &[AlgebraElement]) -> AlgebraElement {
    let kind = x.first().or(y.first()).map_or(AlgebraKind::R, |e| e.kind());
    x.iter()
        .zip(y)
        .fold(AlgebraElement::zero(kind), |acc, (a, b)| acc + *a * b.conj())
}

pub(crate) fn row_norm_sqr(x: &[AlgebraElement]) -> f64 {
    x.iter().map(AlgebraElement::norm_sqr).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct NilPoint {
    config: SpaceConfig,
    center: AlgebraElement,
    horizontal: Vec<AlgebraElement>,
    infinity: bool,
}

impl NilPoint {
    /// Validates kinds, the horizontal length and `Re(center) = 0`
    /// (to `1e-12` relative; the real part is then cleared).
    pub fn new(config: SpaceConfig, center: AlgebraElement, horizontal: Vec<AlgebraElement>) -> Result<Self> {
        let kind = config.kind();
        if center.kind() != kind {
            return Err(Error::KindMismatch {
                left: center.kind(),
                right: kind,
            });
        }
        if let Some(bad) = horizontal.iter().find(|k| k.kind() != kind) {
            return Err(Error::KindMismatch {
                left: bad.kind(),
                right: kind,
            });
        }
        if horizontal.len() != config.horizontal_len() {
            return Err(Error::HorizontalCount {
                expected: config.horizontal_len(),
                got: horizontal.len(),
            });
        }
        if center.re().abs() > 1e-12 * center.norm().max(1.0) {
            return Err(Error::RealCenter(center.re()));
        }
        Ok(Self {
            config,
            center: center.im(),
            horizontal,
            infinity: false,
        })
    }

    pub(crate) fn from_parts(config: SpaceConfig, center: AlgebraElement, horizontal: Vec<AlgebraElement>) -> Self {
        Self {
            config,
            center: center.im(),
            horizontal,
            infinity: false,
        }
    }

    pub fn identity(config: SpaceConfig) -> Self {
        let zero = AlgebraElement::zero(config.kind());
        Self {
            config,
            center: zero,
            horizontal: alloc::vec![zero; config.horizontal_len()],
            infinity: false,
        }
    }

    pub fn infinity(config: SpaceConfig) -> Self {
        Self {
            infinity: true,
            ..Self::identity(config)
        }
    }

    /// Standard normal center and horizontal coefficients.
    pub fn random<R: Rng + ?Sized>(config: SpaceConfig, rng: &mut R) -> Self {
        let kind = config.kind();
        let center = AlgebraElement::random_imaginary(kind, rng);
        let horizontal = (0..config.horizontal_len())
            .map(|_| AlgebraElement::random(kind, rng))
            .collect();
        Self::from_parts(config, center, horizontal)
    }

    pub fn config(&self) -> SpaceConfig {
        self.config
    }

    pub fn center(&self) -> &AlgebraElement {
        &self.center
    }

    pub fn horizontal(&self) -> &[AlgebraElement] {
        &self.horizontal
    }

    pub fn is_infinity(&self) -> bool {
        self.infinity
    }

    pub fn is_identity(&self) -> bool {
        !self.infinity && self.center.is_zero() && self.horizontal.iter().all(AlgebraElement::is_zero)
    }

    /// `|k|^2`.
    pub fn horizontal_norm_sqr(&self) -> f64 {
        row_norm_sqr(&self.horizontal)
    }

    /// The `(t, q)` halves of the center of a Cayley point: `t` is a pure
    /// imaginary quaternion and `q` a quaternion.
    pub fn center_tq(&self) -> Result<(AlgebraElement, AlgebraElement)> {
        self.center.pair()
    }

    fn finite(&self) -> Result<()> {
        if self.infinity {
            Err(Error::AtInfinity)
        } else {
            Ok(())
        }
    }

    /// Group product `self * other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.config.check(&other.config)?;
        self.finite()?;
        other.finite()?;
        let twist = hermitian(&self.horizontal, &other.horizontal).im();
        let center = self.center + other.center + twist.scale(2.0);
        let horizontal = self
            .horizontal
            .iter()
            .zip(&other.horizontal)
            .map(|(a, b)| *a + *b)
            .collect();
        Ok(Self::from_parts(self.config, center, horizontal))
    }

    /// `[-c, -k]`.
    pub fn inv(&self) -> Result<Self> {
        self.finite()?;
        Ok(Self::from_parts(
            self.config,
            -self.center,
            self.horizontal.iter().map(|k| -*k).collect(),
        ))
    }

    /// `A([c, k]) = |k|^2 + c`.
    pub fn gauge(&self) -> Result<AlgebraElement> {
        self.finite()?;
        let mut a = self.center;
        a += AlgebraElement::from_real(self.config.kind(), self.horizontal_norm_sqr());
        Ok(a)
    }

    /// `(|k|^4 + |c|^2)^{1/4}`.
    pub fn qnorm(&self) -> Result<f64> {
        Ok(self.gauge()?.norm().sqrt())
    }

    /// Left-invariant distance `|other^{-1} self|`.
    pub fn dist(&self, other: &Self) -> Result<f64> {
        other.inv()?.mul(self)?.qnorm()
    }

    /// Action of the pure translation `(I, 1, s)`: `[e^{-2s} c, e^{-s} k]`.
    /// The point at infinity is fixed.
    pub fn dilate(&self, s: f64) -> Self {
        if self.infinity {
            return self.clone();
        }
        let f = (-s).exp();
        Self::from_parts(
            self.config,
            self.center.scale(f * f),
            self.horizontal.iter().map(|k| k.scale(f)).collect(),
        )
    }

    /// Coordinatewise closeness, `tol` relative to `max(1, |self|, |other|)`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if self.config != other.config || self.infinity != other.infinity {
            return false;
        }
        self.center.approx_eq(&other.center, tol)
            && self
                .horizontal
                .iter()
                .zip(&other.horizontal)
                .all(|(a, b)| a.approx_eq(b, tol))
    }
}

/// `|A(h^{-1} g)|`, or `None` when either point is infinity.
fn gauge_gap(g: &NilPoint, h: &NilPoint) -> Result<Option<f64>> {
    if g.is_infinity() || h.is_infinity() {
        return Ok(None);
    }
    Ok(Some(h.inv()?.mul(g)?.gauge()?.norm()))
}

/// Cross-ratio `|A(g3^-1 g1)| |A(g4^-1 g2)| / (|A(g4^-1 g1)| |A(g3^-1 g2)|)`.
///
/// Factors that involve the point at infinity are dropped (set to 1). A
/// vanishing denominator gives `+inf`; `0/0` is an error.
pub fn crossratio_nil(g1: &NilPoint, g2: &NilPoint, g3: &NilPoint, g4: &NilPoint) -> Result<f64> {
    let pts = [g1, g2, g3, g4];
    let config = g1.config();
    for p in &pts[1..] {
        config.check(&p.config())?;
    }
    if pts.iter().filter(|p| p.is_infinity()).count() > 1 {
        return Err(Error::TooManyInfinities);
    }
    let factor = |a: &NilPoint, b: &NilPoint| -> Result<f64> { Ok(gauge_gap(a, b)?.unwrap_or(1.0)) };
    let num = factor(g1, g3)? * factor(g2, g4)?;
    let den = factor(g1, g4)? * factor(g2, g3)?;
    match (num == 0.0, den == 0.0) {
        (true, true) => Err(Error::Indeterminate),
        (false, true) => Ok(f64::INFINITY),
        _ => Ok(num / den),
    }
}
