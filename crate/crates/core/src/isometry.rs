//! Hyperbolic isometries in normal form and as matrices.
//!
//! A normal-form isometry `(M, ν, s)` fixes the axis through `e` and `∞` (in
//! the ball, through `(0, 1)` and `(0, -1)`). As a matrix acting on row
//! vectors from the right it is
//!
//! ```text
//! | M  0        0       |
//! | 0  ν cosh s ν sinh s |
//! | 0  ν sinh s ν cosh s |
//! ```
//!
//! Points of the ball are the left lines through `(w, 1)`. For R, C and H
//! general isometries are matrices `G` with `G J G* = J`,
//! `J = diag(1, ..., 1, -1)`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
// unused when a dependency links std, which adds inherent float methods
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::algebra::{real_plus, AlgebraElement, AlgebraKind};
use crate::ballmodel::BallPoint;
use crate::error::{Error, Result};
use crate::linalg;
use crate::nilboundary::{hermitian, NilPoint, SpaceConfig};

/// Spectral radius above which a matrix counts as hyperbolic.
pub const HYPERBOLIC_TOL: f64 = 1e-9;
const FORM_TOL: f64 = 1e-10;
const UNIT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IsometryClass {
    Elliptic,
    Parabolic,
    Hyperbolic,
}

impl fmt::Display for IsometryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IsometryClass::Elliptic => "elliptic",
            IsometryClass::Parabolic => "parabolic",
            IsometryClass::Hyperbolic => "hyperbolic",
        })
    }
}

/// Row-major square matrix over one algebra kind.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct AlgMatrix {
    n: usize,
    kind: AlgebraKind,
    entries: Vec<AlgebraElement>,
}

impl AlgMatrix {
    fn identity(kind: AlgebraKind, n: usize) -> Self {
        let mut entries = alloc::vec![AlgebraElement::zero(kind); n * n];
        for i in 0..n {
            entries[i * n + i] = AlgebraElement::one(kind);
        }
        Self { n, kind, entries }
    }

    fn at(&self, i: usize, j: usize) -> AlgebraElement {
        self.entries[i * self.n + j]
    }

    fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = AlgebraElement::zero(self.kind);
                for k in 0..n {
                    acc += self.at(i, k) * other.at(k, j);
                }
                entries.push(acc);
            }
        }
        Self {
            n,
            kind: self.kind,
            entries,
        }
    }

    fn conj_transpose(&self) -> Self {
        let n = self.n;
        let entries = (0..n * n).map(|idx| self.at(idx % n, idx / n).conj()).collect();
        Self {
            n,
            kind: self.kind,
            entries,
        }
    }

    fn scale(&self, f: f64) -> Self {
        Self {
            entries: self.entries.iter().map(|e| e.scale(f)).collect(),
            ..self.clone()
        }
    }

    fn max_abs(&self) -> f64 {
        self.entries.iter().map(AlgebraElement::norm).fold(0.0, f64::max)
    }

    /// Negates the last row (`rows`) or the last column.
    fn flip_last(&self, rows: bool) -> Self {
        let n = self.n;
        let mut out = self.clone();
        for i in 0..n {
            if rows {
                out.entries[(n - 1) * n + i] = -out.entries[(n - 1) * n + i];
            } else {
                out.entries[i * n + n - 1] = -out.entries[i * n + n - 1];
            }
        }
        out
    }

    /// `max |(self)_{ij} - (other)_{ij}|`.
    fn deviation(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (*a - *b).norm())
            .fold(0.0, f64::max)
    }

    /// Complex matrix for R and C; the `2n x 2n` complex adjoint for H,
    /// with `z1 + z2 j` sent to `[[z1, z2], [-conj z2, conj z1]]`.
    fn to_complex(&self) -> DMatrix<Complex64> {
        let c = |e: AlgebraElement, i: usize| e.coeffs().get(i).copied().unwrap_or(0.0);
        if self.kind != AlgebraKind::H {
            return DMatrix::from_fn(self.n, self.n, |i, j| {
                let e = self.at(i, j);
                Complex64::new(c(e, 0), c(e, 1))
            });
        }
        DMatrix::from_fn(2 * self.n, 2 * self.n, |i, j| {
            let e = self.at(i / 2, j / 2);
            let z1 = Complex64::new(c(e, 0), c(e, 1));
            let z2 = Complex64::new(c(e, 2), c(e, 3));
            match (i % 2, j % 2) {
                (0, 0) => z1,
                (0, _) => z2,
                (_, 0) => -z2.conj(),
                _ => z1.conj(),
            }
        })
    }

    /// `self^(2^k)` scaled by `e^{-log_scale}`.
    fn power_of_two(&self, k: u32) -> (Self, f64) {
        let mut a = self.clone();
        let mut log_scale = 0.0;
        for _ in 0..k {
            a = a.mul(&a);
            log_scale *= 2.0;
            let s = a.max_abs();
            if s > 0.0 {
                a = a.scale(1.0 / s);
                log_scale += s.ln();
            }
        }
        (a, log_scale)
    }
}

/// `Σ_a x_a M_{ab}`.
fn row_times(x: &[AlgebraElement], m: &[Vec<AlgebraElement>]) -> Vec<AlgebraElement> {
    let kind = m[0][0].kind();
    (0..m.len())
        .map(|b| {
            x.iter()
                .enumerate()
                .fold(AlgebraElement::zero(kind), |acc, (a, xa)| acc + *xa * m[a][b])
        })
        .collect()
}

fn unitary_deviation(m: &[Vec<AlgebraElement>]) -> f64 {
    let mut worst = 0.0f64;
    for (i, ri) in m.iter().enumerate() {
        for (j, rj) in m.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            let d = real_plus(-target, &hermitian(ri, rj)).norm();
            worst = worst.max(d);
        }
    }
    worst
}

/// Random `n x n` matrix with orthonormal rows over `kind`.
pub fn random_unitary<R: Rng + ?Sized>(kind: AlgebraKind, n: usize, rng: &mut R) -> Vec<Vec<AlgebraElement>> {
    let mut rows: Vec<Vec<AlgebraElement>> = Vec::with_capacity(n);
    while rows.len() < n {
        let mut v: Vec<_> = (0..n).map(|_| AlgebraElement::random(kind, rng)).collect();
        for u in &rows {
            let c = hermitian(&v, u);
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * *y);
        }
        let norm = hermitian(&v, &v).re().sqrt();
        if norm > 1e-3 {
            rows.push(v.iter().map(|x| x.scale(1.0 / norm)).collect());
        }
    }
    rows
}

/// Normal-form hyperbolic isometry `(M, ν, s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalIsometry {
    config: SpaceConfig,
    m: Vec<Vec<AlgebraElement>>,
    nu: AlgebraElement,
    s: f64,
}

impl NormalIsometry {
    /// Checks `M M* = I`, `|ν| = 1` and, for O, that `M` is a unit scalar.
    pub fn new(config: SpaceConfig, m: Vec<Vec<AlgebraElement>>, nu: AlgebraElement, s: f64) -> Result<Self> {
        let kind = config.kind();
        let n = config.horizontal_len();
        if m.len() != n || m.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidIsometry(alloc::format!("M must be {n}x{n}")));
        }
        if let Some(bad) = m
            .iter()
            .flatten()
            .chain(core::iter::once(&nu))
            .find(|e| e.kind() != kind)
        {
            return Err(Error::KindMismatch {
                left: bad.kind(),
                right: kind,
            });
        }
        if !s.is_finite() {
            return Err(Error::InvalidIsometry(String::from("s must be finite")));
        }
        if (nu.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidIsometry(alloc::format!("|nu| = {} is not 1", nu.norm())));
        }
        let dev = unitary_deviation(&m);
        if dev > FORM_TOL {
            return Err(Error::InvalidIsometry(alloc::format!(
                "M is not unitary (deviation {dev:e})"
            )));
        }
        Ok(Self { config, m, nu, s })
    }

    /// `(I, 1, s)`.
    pub fn translation(config: SpaceConfig, s: f64) -> Self {
        let kind = config.kind();
        let n = config.horizontal_len();
        let m = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| AlgebraElement::from_real(kind, if i == j { 1.0 } else { 0.0 }))
                    .collect()
            })
            .collect();
        Self {
            config,
            m,
            nu: AlgebraElement::one(kind),
            s,
        }
    }

    /// Random `M` and `ν` with the given `s`.
    pub fn random<R: Rng + ?Sized>(config: SpaceConfig, s: f64, rng: &mut R) -> Self {
        let kind = config.kind();
        Self {
            config,
            m: random_unitary(kind, config.horizontal_len(), rng),
            nu: AlgebraElement::random_unit(kind, rng),
            s,
        }
    }

    pub fn config(&self) -> SpaceConfig {
        self.config
    }

    pub fn rotation(&self) -> &[Vec<AlgebraElement>] {
        &self.m
    }

    pub fn nu(&self) -> &AlgebraElement {
        &self.nu
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// `|s|`.
    pub fn translation_length(&self) -> f64 {
        self.s.abs()
    }

    /// Action on `N ∪ {∞}`; fixes `e` and `∞`.
    pub fn act_nil(&self, g: &NilPoint) -> Result<NilPoint> {
        self.config.check(&g.config())?;
        if g.is_infinity() {
            return Ok(g.clone());
        }
        let nu = self.nu;
        let nu_inv = nu.inv()?;
        let q = *g.center();
        let k2 = g.horizontal_norm_sqr();
        let e2s = (2.0 * self.s).exp();

        let center = (nu_inv * (q * nu)).scale((-2.0 * self.s).exp());

        let e = real_plus(e2s + k2, &(-q));
        let d3 = real_plus(1.0 + k2, &(-q));
        let e_inv = e.inv()?;
        let d3_inv = d3.inv()?;
        let f1 = ((nu_inv * e_inv) * nu).inv()?;
        let f2 = nu_inv * (e_inv * d3);
        let u: Vec<_> = g.horizontal().iter().map(|k| d3_inv * *k).collect();
        let es = (-self.s).exp();
        let horizontal = row_times(&u, &self.m)
            .into_iter()
            .map(|ub| (f1 * (f2 * ub)).scale(es))
            .collect();
        Ok(NilPoint::from_parts(self.config, center, horizontal))
    }

    /// Action on the closed ball, `w -> (w2 ν sinh s + ν cosh s)^{-1} (...)`.
    pub fn act_ball(&self, x: &BallPoint) -> Result<BallPoint> {
        self.config.check(&x.config())?;
        let (sh, ch) = (self.s.sinh(), self.s.cosh());
        let w2 = *x.w2();
        let w2nu = w2 * self.nu;
        let den = (w2nu.scale(sh) + self.nu.scale(ch)).inv()?;
        let w1 = row_times(x.w1(), &self.m).into_iter().map(|v| den * v).collect();
        let w2 = den * (w2nu.scale(ch) + self.nu.scale(sh));
        Ok(BallPoint::from_parts(self.config, w1, w2))
    }
}

/// Isometry of `H^m_F` for `F` in R, C, H as an `(m+1) x (m+1)` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupMatrix {
    config: SpaceConfig,
    a: AlgMatrix,
}

impl GroupMatrix {
    /// Row-major entries; rejects O and matrices off the form by more than `1e-10`.
    pub fn new(config: SpaceConfig, entries: Vec<AlgebraElement>) -> Result<Self> {
        let kind = config.kind();
        if kind == AlgebraKind::O {
            return Err(Error::Unsupported("group matrices over the Cayley numbers"));
        }
        let n = config.m() + 1;
        if entries.len() != n * n {
            return Err(Error::InvalidIsometry(alloc::format!(
                "expected {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|e| e.kind() != kind) {
            return Err(Error::KindMismatch {
                left: bad.kind(),
                right: kind,
            });
        }
        let g = Self {
            config,
            a: AlgMatrix { n, kind, entries },
        };
        let dev = g.form_deviation();
        if dev > FORM_TOL * g.a.max_abs().powi(2).max(1.0) {
            return Err(Error::NotFormPreserving(dev));
        }
        Ok(g)
    }

    pub fn identity(config: SpaceConfig) -> Result<Self> {
        if config.kind() == AlgebraKind::O {
            return Err(Error::Unsupported("group matrices over the Cayley numbers"));
        }
        Ok(Self {
            config,
            a: AlgMatrix::identity(config.kind(), config.m() + 1),
        })
    }

    /// The block matrix of a normal-form isometry.
    pub fn from_normal(iso: &NormalIsometry) -> Result<Self> {
        let mut g = Self::identity(iso.config)?;
        let n = g.a.n;
        let h = n - 2;
        for i in 0..h {
            for j in 0..h {
                g.a.entries[i * n + j] = iso.m[i][j];
            }
        }
        let (sh, ch) = (iso.s.sinh(), iso.s.cosh());
        g.a.entries[h * n + h] = iso.nu.scale(ch);
        g.a.entries[h * n + h + 1] = iso.nu.scale(sh);
        g.a.entries[(h + 1) * n + h] = iso.nu.scale(sh);
        g.a.entries[(h + 1) * n + h + 1] = iso.nu.scale(ch);
        Ok(g)
    }

    /// Random matrix with `G J G* = J`: the rows are a J-orthonormal frame
    /// built by Gram–Schmidt, the last row timelike.
    pub fn random_form_preserving<R: Rng + ?Sized>(config: SpaceConfig, rng: &mut R) -> Result<Self> {
        let kind = config.kind();
        if kind == AlgebraKind::O {
            return Err(Error::Unsupported("group matrices over the Cayley numbers"));
        }
        let n = config.m() + 1;
        let form = |x: &[AlgebraElement], y: &[AlgebraElement]| {
            hermitian(&x[..n - 1], &y[..n - 1]) - x[n - 1] * y[n - 1].conj()
        };
        let last = loop {
            let mut v: Vec<_> = (0..n).map(|_| AlgebraElement::random(kind, rng).scale(0.5)).collect();
            v[n - 1] = real_plus(1.0, &v[n - 1]);
            let q = form(&v, &v).re();
            if q < -0.1 {
                let f = 1.0 / (-q).sqrt();
                break v.into_iter().map(|x| x.scale(f)).collect::<Vec<_>>();
            }
        };
        let mut frame = alloc::vec![last.clone()];
        let mut rows = Vec::with_capacity(n);
        while rows.len() < n - 1 {
            let mut v: Vec<_> = (0..n).map(|_| AlgebraElement::random(kind, rng)).collect();
            for u in &frame {
                let c = form(&v, u).scale(1.0 / form(u, u).re());
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * *y);
            }
            let q = form(&v, &v).re();
            if q > 1e-3 {
                let f = 1.0 / q.sqrt();
                let v: Vec<_> = v.into_iter().map(|x| x.scale(f)).collect();
                frame.push(v.clone());
                rows.push(v);
            }
        }
        rows.push(last);
        Self::new(config, rows.into_iter().flatten().collect())
    }

    pub fn config(&self) -> SpaceConfig {
        self.config
    }

    pub fn entry(&self, i: usize, j: usize) -> AlgebraElement {
        self.a.at(i, j)
    }

    pub fn entries(&self) -> &[AlgebraElement] {
        &self.a.entries
    }

    /// `max |G J G* - J|`.
    pub fn form_deviation(&self) -> f64 {
        let j = AlgMatrix::identity(self.a.kind, self.a.n).flip_last(true);
        let gjg = self.a.flip_last(false).mul(&self.a.conj_transpose());
        gjg.deviation(&j)
    }

    /// `self * other`: acting on the right, `self` acts first.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.config.check(&other.config)?;
        Ok(Self {
            config: self.config,
            a: self.a.mul(&other.a),
        })
    }

    /// `J G* J`.
    pub fn inverse(&self) -> Self {
        Self {
            config: self.config,
            a: self.a.conj_transpose().flip_last(true).flip_last(false),
        }
    }

    pub fn pow(&self, n: i64) -> Self {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut result = AlgMatrix::identity(self.a.kind, self.a.n);
        let mut sq = base.a;
        let mut e = n.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&sq);
            }
            sq = sq.mul(&sq);
            e >>= 1;
        }
        Self {
            config: self.config,
            a: result,
        }
    }

    /// `C^{-1} self C`.
    pub fn conjugate_by(&self, c: &Self) -> Result<Self> {
        c.inverse().mul(self)?.mul(c)
    }

    /// Action on the ball: `(x, 1) G`, then left-multiplied by the inverse of
    /// its last coordinate.
    pub fn act(&self, x: &BallPoint) -> Result<BallPoint> {
        self.config.check(&x.config())?;
        let n = self.a.n;
        let mut h: Vec<_> = x.coords().copied().collect();
        h.push(AlgebraElement::one(self.a.kind));
        let y: Vec<_> = (0..n)
            .map(|j| {
                h.iter()
                    .enumerate()
                    .fold(AlgebraElement::zero(self.a.kind), |acc, (i, hi)| {
                        acc + *hi * self.a.at(i, j)
                    })
            })
            .collect();
        dehomogenize(self.config, &y)
    }

    /// Largest eigenvalue modulus (through the complex adjoint for H).
    pub fn spectral_radius(&self) -> f64 {
        linalg::eigenvalues(&self.a.to_complex())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn classify(&self) -> IsometryClass {
        if self.spectral_radius() > 1.0 + HYPERBOLIC_TOL {
            return IsometryClass::Hyperbolic;
        }
        // Elliptic orbits are bounded; parabolic ones have cosh d - 1 ~ n^2.
        // Powers stay at 2^12: squaring a unipotent matrix cancels entries of
        // size n^4 down to n^2.
        let baseline = (0..=6).map(|k| self.orbit_cosh(k) - 1.0).fold(0.0, f64::max);
        let far = self.orbit_cosh(12) - 1.0;
        if far > 1e-9 && far > 100.0 * baseline {
            IsometryClass::Parabolic
        } else {
            IsometryClass::Elliptic
        }
    }

    /// `cosh d(o, o G^{2^k})`.
    fn orbit_cosh(&self, k: u32) -> f64 {
        let (p, log_scale) = self.a.power_of_two(k);
        let n = self.a.n;
        p.at(n - 1, n - 1).norm() * log_scale.exp()
    }

    /// `d(o, o G^{2^k})`, evaluated in log space.
    fn orbit_distance(&self, k: u32) -> f64 {
        let (p, log_scale) = self.a.power_of_two(k);
        let n = self.a.n;
        let x = p.at(n - 1, n - 1).norm();
        let log_x = x.ln() + log_scale;
        if log_x > 20.0 {
            // acosh(y) = ln y + ln(1 + sqrt(1 - y^-2))
            let inv2 = (-2.0 * log_x).exp();
            log_x + (1.0 + (1.0 - inv2).sqrt()).ln()
        } else {
            log_x.exp().max(1.0).acosh()
        }
    }

    /// `lim d(o, o G^n) / n` from `(d_{2n} - d_n) / n`, `n = 8, 16, ..., 1024`.
    pub fn stable_length(&self) -> f64 {
        let mut prev = f64::NAN;
        let mut d_n = self.orbit_distance(3);
        let mut estimate = 0.0;
        for k in 3..10 {
            let d_2n = self.orbit_distance(k + 1);
            estimate = ((d_2n - d_n) / (1u64 << k) as f64).max(0.0);
            if (estimate - prev).abs() < 1e-8 {
                break;
            }
            prev = estimate;
            d_n = d_2n;
        }
        estimate
    }

    /// Translation length of a hyperbolic matrix: `ln ρ` for R and C, the
    /// stable length for H.
    pub fn translation_length(&self) -> Result<f64> {
        let class = self.classify();
        if class != IsometryClass::Hyperbolic {
            return Err(Error::NotHyperbolic(class));
        }
        Ok(match self.a.kind {
            AlgebraKind::H => self.stable_length(),
            _ => self.spectral_radius().ln(),
        })
    }
}

fn dehomogenize(config: SpaceConfig, y: &[AlgebraElement]) -> Result<BallPoint> {
    let n = y.len();
    let last_inv = y[n - 1].inv()?;
    let w: Vec<_> = y[..n - 1].iter().map(|v| last_inv * *v).collect();
    let (w1, w2) = w.split_at(n - 2);
    Ok(BallPoint::from_parts(config, w1.to_vec(), w2[0]))
}

/// A hyperbolic matrix `C^{-1} N C` with its fixed points.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugatedNormal {
    pub normal: NormalIsometry,
    pub frame: GroupMatrix,
}

impl ConjugatedNormal {
    /// Random frame and normal form with the given translation parameter.
    pub fn random<R: Rng + ?Sized>(config: SpaceConfig, s: f64, rng: &mut R) -> Result<Self> {
        Ok(Self {
            normal: NormalIsometry::random(config, s, rng),
            frame: GroupMatrix::random_form_preserving(config, rng)?,
        })
    }

    pub fn matrix(&self) -> Result<GroupMatrix> {
        GroupMatrix::from_normal(&self.normal)?.conjugate_by(&self.frame)
    }

    fn axis_point(&self, sign: f64) -> Result<BallPoint> {
        let config = self.normal.config;
        let kind = config.kind();
        let n = config.m() + 1;
        let mut h = alloc::vec![AlgebraElement::zero(kind); n];
        h[n - 2] = AlgebraElement::from_real(kind, sign);
        h[n - 1] = AlgebraElement::one(kind);
        let y: Vec<_> = (0..n)
            .map(|j| {
                h.iter().enumerate().fold(AlgebraElement::zero(kind), |acc, (i, hi)| {
                    acc + *hi * self.frame.entry(i, j)
                })
            })
            .collect();
        dehomogenize(config, &y)
    }

    /// Attracting fixed point of the matrix (for `s > 0`).
    pub fn attracting(&self) -> Result<BallPoint> {
        self.axis_point(if self.normal.s >= 0.0 { 1.0 } else { -1.0 })
    }

    pub fn repelling(&self) -> Result<BallPoint> {
        self.axis_point(if self.normal.s >= 0.0 { -1.0 } else { 1.0 })
    }
}

/// Readings of the bracketed identity relating the `w2` chain to the
/// conjugated normal form, with `r1 = e^{2s} + |k|^2`, `r2 = e^{2s} - |k|^2`,
/// `r3 = 1 + |k|^2` and `Q` imaginary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IdentityReading {
    /// `[ν^-1((r1+Q)^-1(r3-Q))][((r3+Q)(r2+Q))ν]`, exactly as printed.
    Literal,
    /// `[ν^-1((r1+Q)^-1(r3-Q))][((r3+Q)^-1(r2+Q))ν]`.
    InverseOnR3,
    /// `[ν^-1((r1-Q)^-1(r3-Q))][((r3-Q)^-1(r2+Q))ν]`, the form produced by
    /// substituting the projection into the ball action.
    Corrected,
}

impl IdentityReading {
    pub const ALL: [IdentityReading; 3] = [
        IdentityReading::Literal,
        IdentityReading::InverseOnR3,
        IdentityReading::Corrected,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IdentityReading::Literal => "literal",
            IdentityReading::InverseOnR3 => "inverse-on-r3",
            IdentityReading::Corrected => "corrected",
        }
    }
}

fn checked_inv(x: &AlgebraElement, what: &'static str) -> Result<AlgebraElement> {
    if x.norm() < 1e-300 {
        return Err(Error::Singular(what));
    }
    x.inv()
}

fn identity_check_args(q: &AlgebraElement, nu: &AlgebraElement) -> Result<()> {
    if q.kind() != nu.kind() {
        return Err(Error::KindMismatch {
            left: q.kind(),
            right: nu.kind(),
        });
    }
    if q.re().abs() > 1e-12 * q.norm().max(1.0) {
        return Err(Error::RealCenter(q.re()));
    }
    if (nu.norm() - 1.0).abs() > UNIT_TOL {
        return Err(Error::InvalidIsometry(alloc::format!("|nu| = {} is not 1", nu.norm())));
    }
    Ok(())
}

/// Left-hand side under a reading.
pub fn identity_lhs(
    reading: IdentityReading,
    s: f64,
    q: &AlgebraElement,
    nu: &AlgebraElement,
    knorm: f64,
) -> Result<AlgebraElement> {
    identity_check_args(q, nu)?;
    let (r1, r2, r3) = radii(s, knorm);
    let q = q.im();
    let nu_inv = checked_inv(nu, "nu")?;
    let r2p = real_plus(r2, &q);
    let r3m = real_plus(r3, &(-q));
    let (left_inv, right) = match reading {
        IdentityReading::Literal => (checked_inv(&real_plus(r1, &q), "r1 + Q")?, real_plus(r3, &q) * r2p),
        IdentityReading::InverseOnR3 => (
            checked_inv(&real_plus(r1, &q), "r1 + Q")?,
            checked_inv(&real_plus(r3, &q), "r3 + Q")? * r2p,
        ),
        IdentityReading::Corrected => (
            checked_inv(&real_plus(r1, &(-q)), "r1 - Q")?,
            checked_inv(&r3m, "r3 - Q")? * r2p,
        ),
    };
    Ok((nu_inv * (left_inv * r3m)) * (right * *nu))
}

/// Right-hand side `[(ν^-1 (r1-Q)^-1) ν][(ν^-1 (r2+Q)) ν]`.
pub fn identity_rhs(s: f64, q: &AlgebraElement, nu: &AlgebraElement, knorm: f64) -> Result<AlgebraElement> {
    identity_check_args(q, nu)?;
    let (r1, r2, _) = radii(s, knorm);
    let q = q.im();
    let nu_inv = checked_inv(nu, "nu")?;
    let a = checked_inv(&real_plus(r1, &(-q)), "r1 - Q")?;
    Ok(((nu_inv * a) * *nu) * ((nu_inv * real_plus(r2, &q)) * *nu))
}

/// `w2'` of the ball action `(M, ν, s)` applied to `w2 = (r3 - Q)^{-1}(2 - r3 + Q)`.
pub fn identity_ball_chain(s: f64, q: &AlgebraElement, nu: &AlgebraElement, knorm: f64) -> Result<AlgebraElement> {
    identity_check_args(q, nu)?;
    let (_, _, r3) = radii(s, knorm);
    let q = q.im();
    let w2 = checked_inv(&real_plus(r3, &(-q)), "r3 - Q")? * real_plus(2.0 - r3, &q);
    let w2nu = w2 * *nu;
    let (sh, ch) = (s.sinh(), s.cosh());
    let den = checked_inv(&(w2nu.scale(sh) + nu.scale(ch)), "w2 ν sinh s + ν cosh s")?;
    Ok(den * (w2nu.scale(ch) + nu.scale(sh)))
}

fn radii(s: f64, knorm: f64) -> (f64, f64, f64) {
    let e2s = (2.0 * s).exp();
    let k2 = knorm * knorm;
    (e2s + k2, e2s - k2, 1.0 + k2)
}

/// `|LHS - RHS|` under a reading.
pub fn identity_residual(
    reading: IdentityReading,
    s: f64,
    q: &AlgebraElement,
    nu: &AlgebraElement,
    knorm: f64,
) -> Result<f64> {
    let lhs = identity_lhs(reading, s, q, nu, knorm)?;
    Ok((lhs - identity_rhs(s, q, nu, knorm)?).norm())
}

/// Worst residuals of one reading over a sample.
#[derive(Clone, Debug, PartialEq)]
pub struct ReadingResiduals {
    pub reading: IdentityReading,
    pub max_vs_rhs: f64,
    pub max_vs_ball: f64,
}

/// Evaluates every reading against both the right-hand side and the ball
/// action on `samples` random inputs of the given kind.
pub fn identity_report<R: Rng + ?Sized>(
    kind: AlgebraKind,
    samples: usize,
    rng: &mut R,
) -> Result<Vec<ReadingResiduals>> {
    let mut out: Vec<_> = IdentityReading::ALL
        .iter()
        .map(|&reading| ReadingResiduals {
            reading,
            max_vs_rhs: 0.0,
            max_vs_ball: 0.0,
        })
        .collect();
    for _ in 0..samples {
        let s: f64 = rng.random_range(-2.0..2.0);
        let knorm: f64 = rng.random_range(0.0..2.0);
        let q = AlgebraElement::random_imaginary(kind, rng);
        let nu = AlgebraElement::random_unit(kind, rng);
        let rhs = identity_rhs(s, &q, &nu, knorm)?;
        let ball = identity_ball_chain(s, &q, &nu, knorm)?;
        for r in out.iter_mut() {
            let lhs = identity_lhs(r.reading, s, &q, &nu, knorm)?;
            r.max_vs_rhs = r.max_vs_rhs.max((lhs - rhs).norm());
            r.max_vs_ball = r.max_vs_ball.max((lhs - ball).norm());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ballmodel::{coshdist, crossratio_ball, stereo};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(kind: AlgebraKind, m: usize) -> SpaceConfig {
        SpaceConfig::new(kind, m).unwrap()
    }

    fn all_configs() -> [SpaceConfig; 6] {
        [
            cfg(AlgebraKind::R, 2),
            cfg(AlgebraKind::R, 3),
            cfg(AlgebraKind::C, 2),
            cfg(AlgebraKind::C, 3),
            cfg(AlgebraKind::H, 2),
            cfg(AlgebraKind::O, 2),
        ]
    }

    fn random_interior<R: Rng>(config: SpaceConfig, rng: &mut R) -> BallPoint {
        let kind = config.kind();
        let w1: Vec<_> = (0..config.horizontal_len())
            .map(|_| AlgebraElement::random(kind, rng))
            .collect();
        let p = BallPoint::new(config, w1, AlgebraElement::random(kind, rng)).unwrap();
        let r: f64 = rng.random_range(0.05..0.9);
        let f = r / p.norm_sqr().sqrt();
        BallPoint::new(config, p.w1().iter().map(|e| e.scale(f)).collect(), p.w2().scale(f)).unwrap()
    }

    #[test]
    fn validation() {
        let config = cfg(AlgebraKind::C, 2);
        let one = AlgebraElement::one(AlgebraKind::C);
        assert!(NormalIsometry::new(config, alloc::vec![alloc::vec![one]], one.scale(2.0), 0.3).is_err());
        assert!(NormalIsometry::new(config, alloc::vec![alloc::vec![one.scale(0.5)]], one, 0.3).is_err());
        assert!(NormalIsometry::new(config, alloc::vec![alloc::vec![one]], one, 0.3).is_ok());
        assert!(matches!(
            GroupMatrix::identity(cfg(AlgebraKind::O, 2)),
            Err(Error::Unsupported(_))
        ));
        let bad = alloc::vec![one; 9];
        assert!(matches!(
            GroupMatrix::new(config, bad),
            Err(Error::NotFormPreserving(_))
        ));
    }

    #[test]
    fn axis_endpoints_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for config in all_configs() {
            let iso = NormalIsometry::random(config, 0.9, &mut rng);
            assert!(iso
                .act_nil(&NilPoint::identity(config))
                .unwrap()
                .approx_eq(&NilPoint::identity(config), 1e-14));
            assert!(iso.act_nil(&NilPoint::infinity(config)).unwrap().is_infinity());
            for r in [1.0, -1.0] {
                let p = BallPoint::on_axis(config, r);
                assert!(iso.act_ball(&p).unwrap().approx_eq(&p, 1e-14));
            }
        }
    }

    #[test]
    fn pure_translation_dilates() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for config in all_configs() {
            let iso = NormalIsometry::translation(config, 0.4);
            let g = NilPoint::random(config, &mut rng);
            assert!(iso.act_nil(&g).unwrap().approx_eq(&g.dilate(0.4), 1e-12));
        }
    }

    #[test]
    fn origin_goes_along_axis() {
        let config = cfg(AlgebraKind::H, 2);
        let iso = NormalIsometry::translation(config, 0.6);
        let y = iso.act_ball(&BallPoint::origin(config)).unwrap();
        assert!(y.approx_eq(&BallPoint::on_axis(config, 0.6f64.tanh()), 1e-15));
    }

    #[test]
    fn real_rotation_is_linear() {
        let config = cfg(AlgebraKind::R, 2);
        let r = |x: f64| AlgebraElement::from_real(AlgebraKind::R, x);
        let iso = NormalIsometry::new(config, alloc::vec![alloc::vec![r(-1.0)]], r(1.0), 0.5).unwrap();
        let g = NilPoint::new(config, r(0.0), alloc::vec![r(2.0)]).unwrap();
        let out = iso.act_nil(&g).unwrap();
        assert!(out.horizontal()[0].approx_eq(&r(-2.0 * (-0.5f64).exp()), 1e-15));
    }

    #[test]
    fn models_are_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for config in all_configs() {
            for _ in 0..30 {
                let s = rng.random_range(-1.5..1.5);
                let iso = NormalIsometry::random(config, s, &mut rng);
                let g = NilPoint::random(config, &mut rng);
                let a = stereo(&iso.act_nil(&g).unwrap());
                let b = iso.act_ball(&stereo(&g)).unwrap();
                assert!(a.approx_eq(&b, 1e-9), "{config:?}");
            }
        }
    }

    #[test]
    fn rotations_are_isometries() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for config in all_configs() {
            let dil = NormalIsometry::translation(config, 0.7);
            let g = NilPoint::random(config, &mut rng);
            let h = NilPoint::random(config, &mut rng);
            let d = g.dist(&h).unwrap();
            let dd = dil.act_nil(&g).unwrap().dist(&dil.act_nil(&h).unwrap()).unwrap();
            assert!((dd - (-0.7f64).exp() * d).abs() <= 1e-12 * d);
            if config.kind() == AlgebraKind::O {
                continue;
            }
            let rot = NormalIsometry::random(config, 0.0, &mut rng);
            let dr = rot.act_nil(&g).unwrap().dist(&rot.act_nil(&h).unwrap()).unwrap();
            assert!((d - dr).abs() <= 1e-12 * d);
        }
    }

    #[test]
    fn octonionic_unit_pairs_move_distances() {
        // A generic pair of unit Cayley numbers is not a boundary isometry.
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let config = cfg(AlgebraKind::O, 2);
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let rot = NormalIsometry::random(config, 0.0, &mut rng);
            let g = NilPoint::random(config, &mut rng);
            let h = NilPoint::random(config, &mut rng);
            let d = g.dist(&h).unwrap();
            let dr = rot.act_nil(&g).unwrap().dist(&rot.act_nil(&h).unwrap()).unwrap();
            worst = worst.max((d - dr).abs() / d);
        }
        assert!(worst > 1e-3);
    }

    #[test]
    fn crossratio_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for config in all_configs() {
            let iso = if config.kind() == AlgebraKind::O {
                NormalIsometry::translation(config, 0.8)
            } else {
                NormalIsometry::random(config, 0.8, &mut rng)
            };
            let x: Vec<_> = (0..4).map(|_| stereo(&NilPoint::random(config, &mut rng))).collect();
            let y: Vec<_> = x.iter().map(|p| iso.act_ball(p).unwrap()).collect();
            let a = crossratio_ball(&x[0], &x[1], &x[2], &x[3]).unwrap();
            let b = crossratio_ball(&y[0], &y[1], &y[2], &y[3]).unwrap();
            assert!((a - b).abs() <= 1e-9 * a, "{config:?}");
        }
    }

    #[test]
    fn matrix_and_normal_actions_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for config in all_configs().into_iter().filter(|c| c.kind() != AlgebraKind::O) {
            let iso = NormalIsometry::random(config, 0.7, &mut rng);
            let g = GroupMatrix::from_normal(&iso).unwrap();
            assert!(g.form_deviation() < 1e-12);
            let x = random_interior(config, &mut rng);
            assert!(g.act(&x).unwrap().approx_eq(&iso.act_ball(&x).unwrap(), 1e-12));
            let id = GroupMatrix::identity(config).unwrap();
            assert!(id.act(&x).unwrap().approx_eq(&x, 0.0));
        }
    }

    #[test]
    fn random_matrices_preserve_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for config in all_configs().into_iter().filter(|c| c.kind() != AlgebraKind::O) {
            let a = GroupMatrix::random_form_preserving(config, &mut rng).unwrap();
            let inv = a.inverse();
            assert!(a.mul(&inv).unwrap().form_deviation() < 1e-9);
            let x = random_interior(config, &mut rng);
            let y = random_interior(config, &mut rng);
            let d0 = coshdist(&x, &y).unwrap();
            let d1 = coshdist(&a.act(&x).unwrap(), &a.act(&y).unwrap()).unwrap();
            assert!((d0 - d1).abs() <= 1e-10 * d0);
            assert!(inv.act(&a.act(&x).unwrap()).unwrap().approx_eq(&x, 1e-10));
        }
    }

    #[test]
    fn translation_lengths() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for config in all_configs() {
            let iso = NormalIsometry::random(config, -0.7, &mut rng);
            assert_eq!(iso.translation_length(), 0.7);
        }
        for config in all_configs().into_iter().filter(|c| c.kind() != AlgebraKind::O) {
            let h = ConjugatedNormal::random(config, 0.7, &mut rng)
                .unwrap()
                .matrix()
                .unwrap();
            let l = h.translation_length().unwrap();
            assert!((l - 0.7).abs() < 1e-8, "{config:?}: {l}");
            assert!((h.stable_length() - 0.7).abs() < 1e-8);
            let l2 = h.pow(2).translation_length().unwrap();
            assert!((l2 - 1.4).abs() < 1e-8);
            let id = GroupMatrix::identity(config).unwrap();
            assert_eq!(
                id.translation_length(),
                Err(Error::NotHyperbolic(IsometryClass::Elliptic))
            );
        }
    }

    #[test]
    fn parabolic_is_detected() {
        // unipotent element of SO(2,1) fixing a boundary point
        let config = cfg(AlgebraKind::R, 2);
        let r = |x: f64| AlgebraElement::from_real(AlgebraKind::R, x);
        let t = 0.3;
        let entries = alloc::vec![
            r(1.0),
            r(t),
            r(t),
            r(-t),
            r(1.0 - t * t / 2.0),
            r(-t * t / 2.0),
            r(t),
            r(t * t / 2.0),
            r(1.0 + t * t / 2.0),
        ];
        let p = GroupMatrix::new(config, entries).unwrap();
        assert_eq!(p.classify(), IsometryClass::Parabolic);
    }

    #[test]
    fn fixed_points_of_conjugated_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for config in [cfg(AlgebraKind::R, 3), cfg(AlgebraKind::C, 2), cfg(AlgebraKind::H, 2)] {
            let cn = ConjugatedNormal::random(config, 0.9, &mut rng).unwrap();
            let a = cn.matrix().unwrap();
            let att = cn.attracting().unwrap();
            let rep = cn.repelling().unwrap();
            assert!(att.is_boundary() && rep.is_boundary());
            assert!(a.act(&att).unwrap().approx_eq(&att, 1e-9));
            assert!(a.act(&rep).unwrap().approx_eq(&rep, 1e-9));
            let x = random_interior(config, &mut rng);
            let far = a.pow(40).act(&x).unwrap();
            assert!(far.approx_eq(&att, 1e-6));
        }
    }

    #[test]
    fn identity_readings() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let one = AlgebraElement::one(AlgebraKind::O);
        let q = AlgebraElement::random_imaginary(AlgebraKind::O, &mut rng);
        assert!(identity_residual(IdentityReading::Corrected, 0.3, &q, &one, 0.8).unwrap() < 1e-14);

        let h = identity_report(AlgebraKind::H, 200, &mut rng).unwrap();
        let o = identity_report(AlgebraKind::O, 200, &mut rng).unwrap();
        for report in [&h, &o] {
            let corrected = report.iter().find(|r| r.reading == IdentityReading::Corrected).unwrap();
            assert!(corrected.max_vs_rhs < 1e-10);
            assert!(corrected.max_vs_ball < 1e-10);
            for other in report.iter().filter(|r| r.reading != IdentityReading::Corrected) {
                assert!(other.max_vs_rhs > 1e-3, "{:?}", other.reading);
            }
        }
    }

    #[test]
    fn singular_identity_inputs_rejected() {
        let q = AlgebraElement::from_real(AlgebraKind::C, 1.0);
        let nu = AlgebraElement::one(AlgebraKind::C);
        assert!(matches!(
            identity_residual(IdentityReading::Corrected, 0.1, &q, &nu, 0.5),
            Err(Error::RealCenter(_))
        ));
    }
}
