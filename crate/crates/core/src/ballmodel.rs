//! Unit-ball model of `H^m_F`.
//!
//! A point is `(w1, w2)` with `w1` in `F^{m-1}` and `w2` in `F`; interior
//! points satisfy `|w1|^2 + |w2|^2 < 1` and boundary points lie on the unit
//! sphere. The boundary bracket is `<<x, y>> = |1 - <x, y>|`, corrected for O by
//! the term `R<x, y>`.

use alloc::vec::Vec;

// unused when a dependency links std, which adds inherent float methods
#[allow(unused_imports)]
use num_traits::Float;

use crate::algebra::{real_plus, AlgebraElement, AlgebraKind};
use crate::error::{Error, Result};
use crate::nilboundary::{hermitian, row_norm_sqr, NilPoint, SpaceConfig};

/// Tolerance on `|w|^2 - 1` for boundary points.
pub const BOUNDARY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct BallPoint {
    config: SpaceConfig,
    w1: Vec<AlgebraElement>,
    w2: AlgebraElement,
}

impl BallPoint {
    pub fn new(config: SpaceConfig, w1: Vec<AlgebraElement>, w2: AlgebraElement) -> Result<Self> {
        let kind = config.kind();
        if let Some(bad) = w1.iter().chain(core::iter::once(&w2)).find(|e| e.kind() != kind) {
            return Err(Error::KindMismatch {
                left: bad.kind(),
                right: kind,
            });
        }
        if w1.len() != config.horizontal_len() {
            return Err(Error::HorizontalCount {
                expected: config.horizontal_len(),
                got: w1.len(),
            });
        }
        Ok(Self { config, w1, w2 })
    }

    pub(crate) fn from_parts(config: SpaceConfig, w1: Vec<AlgebraElement>, w2: AlgebraElement) -> Self {
        Self { config, w1, w2 }
    }

    /// The center `(0, 0)`.
    pub fn origin(config: SpaceConfig) -> Self {
        Self::on_axis(config, 0.0)
    }

    /// `(0, r)`; `r = 1` and `r = -1` are the images of `e` and infinity.
    pub fn on_axis(config: SpaceConfig, r: f64) -> Self {
        let kind = config.kind();
        Self {
            config,
            w1: alloc::vec![AlgebraElement::zero(kind); config.horizontal_len()],
            w2: AlgebraElement::from_real(kind, r),
        }
    }

    pub fn config(&self) -> SpaceConfig {
        self.config
    }

    pub fn w1(&self) -> &[AlgebraElement] {
        &self.w1
    }

    pub fn w2(&self) -> &AlgebraElement {
        &self.w2
    }

    /// `|w1|^2 + |w2|^2`.
    pub fn norm_sqr(&self) -> f64 {
        row_norm_sqr(&self.w1) + self.w2.norm_sqr()
    }

    pub fn is_interior(&self) -> bool {
        self.norm_sqr() < 1.0
    }

    pub fn is_boundary(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= BOUNDARY_TOL
    }

    /// All coordinates, `w2` last.
    pub fn coords(&self) -> impl Iterator<Item = &AlgebraElement> {
        self.w1.iter().chain(core::iter::once(&self.w2))
    }

    /// Radial projection onto the sphere; fails off the tolerance band.
    pub fn to_boundary(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if (n2 - 1.0).abs() > BOUNDARY_TOL {
            return Err(Error::NotOnBoundary(n2));
        }
        Ok(self.scaled(1.0 / n2.sqrt()))
    }

    fn scaled(&self, f: f64) -> Self {
        Self {
            config: self.config,
            w1: self.w1.iter().map(|e| e.scale(f)).collect(),
            w2: self.w2.scale(f),
        }
    }

    fn sub(&self, other: &Self) -> Self {
        Self {
            config: self.config,
            w1: self.w1.iter().zip(&other.w1).map(|(a, b)| *a - *b).collect(),
            w2: self.w2 - other.w2,
        }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.config == other.config && self.coords().zip(other.coords()).all(|(a, b)| a.approx_eq(b, tol))
    }
}

/// `Σ x_a conj(y_a)` over all coordinates.
pub fn inner(x: &BallPoint, y: &BallPoint) -> Result<AlgebraElement> {
    x.config.check(&y.config)?;
    Ok(hermitian(&x.w1, &y.w1) + x.w2 * y.w2.conj())
}

/// Cayley correction `Re[(v1 conj v2)(w2 conj w1)] - Re[(conj v2 w2)(conj w1 v1)]`;
/// identically 0 for the associative kinds.
pub fn rform(v: &BallPoint, w: &BallPoint) -> Result<f64> {
    v.config.check(&w.config)?;
    if v.config.kind() != AlgebraKind::O {
        return Ok(0.0);
    }
    let (v1, v2) = (v.w1[0], v.w2);
    let (w1, w2) = (w.w1[0], w.w2);
    let a = (v1 * v2.conj()) * (w2 * w1.conj());
    let b = (v2.conj() * w2) * (w1.conj() * v1);
    Ok(a.re() - b.re())
}

/// `1 - <x, y>`, with the real part assembled from `|x - y|^2`.
fn one_minus_inner(x: &BallPoint, y: &BallPoint) -> Result<AlgebraElement> {
    let d = x.sub(y);
    let re = 1.0 - 0.5 * (x.norm_sqr() + y.norm_sqr()) + 0.5 * d.norm_sqr();
    let im = inner(&d, y)?.im();
    Ok(real_plus(re, &(-im)))
}

fn bracket(x: &BallPoint, y: &BallPoint) -> Result<f64> {
    let a = one_minus_inner(x, y)?.norm_sqr();
    let r = rform(x, y)?;
    Ok((a + 2.0 * r).max(0.0).sqrt())
}

/// Boundary bracket `<<x, y>>`. Inputs are projected onto the sphere first.
pub fn chordal(x: &BallPoint, y: &BallPoint) -> Result<f64> {
    bracket(&x.to_boundary()?, &y.to_boundary()?)
}

/// `cosh d(x, y)` for interior points.
pub fn coshdist(x: &BallPoint, y: &BallPoint) -> Result<f64> {
    x.config.check(&y.config)?;
    let (nx, ny) = (x.norm_sqr(), y.norm_sqr());
    for n in [nx, ny] {
        if n >= 1.0 {
            return Err(Error::NotInterior(n));
        }
    }
    let c = bracket(x, y)? / ((1.0 - nx) * (1.0 - ny)).sqrt();
    Ok(c.max(1.0))
}

/// `[x, y, z, w] = <<z,x>> <<w,y>> / (<<w,x>> <<z,y>>)`.
pub fn crossratio_ball(x: &BallPoint, y: &BallPoint, z: &BallPoint, w: &BallPoint) -> Result<f64> {
    let num = chordal(z, x)? * chordal(w, y)?;
    let den = chordal(w, x)? * chordal(z, y)?;
    match (num == 0.0, den == 0.0) {
        (true, true) => Err(Error::Indeterminate),
        (false, true) => Ok(f64::INFINITY),
        _ => Ok(num / den),
    }
}

/// Generalized stereographic projection `N ∪ {∞} → ∂B`:
/// `w1 = 2 D^{-1} k`, `w2 = D^{-1}(1 - |k|^2 + c)` with `D = 1 + |k|^2 - c`.
pub fn stereo(g: &NilPoint) -> BallPoint {
    let config = g.config();
    if g.is_infinity() {
        return BallPoint::on_axis(config, -1.0);
    }
    let k2 = g.horizontal_norm_sqr();
    let c = *g.center();
    let dinv = real_plus(1.0 + k2, &(-c))
        .inv()
        .expect("1 + |k|^2 - c has real part at least 1");
    let w1 = g.horizontal().iter().map(|k| (dinv * *k).scale(2.0)).collect();
    let w2 = dinv * real_plus(1.0 - k2, &c);
    BallPoint::from_parts(config, w1, w2)
}

/// Inverse projection. `(0, -1)` goes to infinity.
pub fn stereo_inv(x: &BallPoint) -> Result<NilPoint> {
    let x = x.to_boundary()?;
    let config = x.config;
    let one_plus = real_plus(1.0, &x.w2);
    if one_plus.norm() <= 1e-15 {
        return Ok(NilPoint::infinity(config));
    }
    // 1 + w2 = 2 D^{-1}
    let d = one_plus.inv()?.scale(2.0);
    let horizontal = x.w1.iter().map(|w| (d * *w).scale(0.5)).collect();
    Ok(NilPoint::from_parts(config, -d.im(), horizontal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nilboundary::crossratio_nil;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(kind: AlgebraKind, m: usize) -> SpaceConfig {
        SpaceConfig::new(kind, m).unwrap()
    }

    fn configs() -> [SpaceConfig; 6] {
        [
            cfg(AlgebraKind::R, 2),
            cfg(AlgebraKind::R, 3),
            cfg(AlgebraKind::C, 2),
            cfg(AlgebraKind::C, 3),
            cfg(AlgebraKind::H, 3),
            cfg(AlgebraKind::O, 2),
        ]
    }

    fn random_interior<R: rand::Rng>(config: SpaceConfig, rng: &mut R) -> BallPoint {
        let kind = config.kind();
        let w1: Vec<_> = (0..config.horizontal_len())
            .map(|_| AlgebraElement::random(kind, rng))
            .collect();
        let p = BallPoint::from_parts(config, w1, AlgebraElement::random(kind, rng));
        let r: f64 = rng.random_range(0.0..0.95);
        p.scaled(r / p.norm_sqr().sqrt())
    }

    #[test]
    fn axis_values() {
        let config = cfg(AlgebraKind::C, 2);
        let n = BallPoint::on_axis(config, 1.0);
        let s = BallPoint::on_axis(config, -1.0);
        assert_eq!(inner(&n, &s).unwrap(), AlgebraElement::from_real(AlgebraKind::C, -1.0));
        assert_eq!(chordal(&n, &s).unwrap(), 2.0);
        assert_eq!(chordal(&n, &n).unwrap(), 0.0);
    }

    #[test]
    fn stereo_fixed_values() {
        for config in configs() {
            assert_eq!(stereo(&NilPoint::identity(config)), BallPoint::on_axis(config, 1.0));
            assert_eq!(stereo(&NilPoint::infinity(config)), BallPoint::on_axis(config, -1.0));
            assert!(stereo_inv(&BallPoint::on_axis(config, -1.0)).unwrap().is_infinity());
            assert!(stereo_inv(&BallPoint::on_axis(config, 1.0)).unwrap().is_identity());
        }
    }

    #[test]
    fn stereo_round_trip_and_sphere() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for config in configs() {
            for _ in 0..50 {
                let g = NilPoint::random(config, &mut rng);
                let x = stereo(&g);
                assert!((x.norm_sqr() - 1.0).abs() < 1e-12);
                assert!(stereo_inv(&x).unwrap().approx_eq(&g, 1e-10));
            }
        }
    }

    #[test]
    fn stereo_inv_rejects_interior() {
        let config = cfg(AlgebraKind::H, 2);
        assert!(matches!(
            stereo_inv(&BallPoint::origin(config)),
            Err(Error::NotOnBoundary(_))
        ));
    }

    #[test]
    fn expanded_cayley_projection() {
        // Explicit coordinates of the projected point for g = [(t, q), (c, d)],
        // expanded with the doubling product of `algebra`.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let config = cfg(AlgebraKind::O, 2);
        for _ in 0..50 {
            let g = NilPoint::random(config, &mut rng);
            let (t, q) = g.center_tq().unwrap();
            let (c, d) = g.horizontal()[0].pair().unwrap();
            let k2 = g.horizontal_norm_sqr();
            let den = (1.0 + k2).powi(2) + t.norm_sqr() + q.norm_sqr();
            let first = c + c.scale(k2) + t * c - d.conj() * q;
            let second = q * c.conj() + d + d.scale(k2) + d * t;
            let w1 = AlgebraElement::from_pair(&first.scale(2.0 / den), &second.scale(2.0 / den)).unwrap();
            let re = 1.0 - k2 * k2 - t.norm_sqr() - q.norm_sqr();
            let w2_first = (real_plus(re, &t.scale(2.0))).scale(1.0 / den);
            let w2 = AlgebraElement::from_pair(&w2_first, &q.scale(2.0 / den)).unwrap();
            let x = stereo(&g);
            assert!(x.w1()[0].approx_eq(&w1, 1e-12));
            assert!(x.w2().approx_eq(&w2, 1e-12));
        }
    }

    #[test]
    fn chordal_to_south_pole() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for config in configs() {
            let south = BallPoint::on_axis(config, -1.0);
            for _ in 0..20 {
                let g = NilPoint::random(config, &mut rng);
                let k2 = g.horizontal_norm_sqr();
                let expected = 2.0 / ((1.0 + k2).powi(2) + g.center().norm_sqr()).sqrt();
                let got = chordal(&stereo(&g), &south).unwrap();
                assert!((got - expected).abs() <= 1e-12 * expected);
            }
        }
    }

    #[test]
    fn rform_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let config = cfg(AlgebraKind::O, 2);
        let south = BallPoint::on_axis(config, -1.0);
        for _ in 0..50 {
            let x = stereo(&NilPoint::random(config, &mut rng));
            assert_eq!(rform(&x, &south).unwrap(), 0.0);
            assert!(rform(&x, &x).unwrap().abs() < 1e-14);
            let mut emb = |kind| {
                let e = AlgebraElement::random(kind, &mut rng);
                e.embed(AlgebraKind::O).unwrap()
            };
            let v = BallPoint::from_parts(config, alloc::vec![emb(AlgebraKind::H)], emb(AlgebraKind::H));
            let w = BallPoint::from_parts(config, alloc::vec![emb(AlgebraKind::H)], emb(AlgebraKind::H));
            assert!(rform(&v, &w).unwrap().abs() < 1e-12 * v.norm_sqr() * w.norm_sqr());
        }
        let h = cfg(AlgebraKind::H, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let x = stereo(&NilPoint::random(h, &mut rng));
        let y = stereo(&NilPoint::random(h, &mut rng));
        assert_eq!(rform(&x, &y).unwrap(), 0.0);
    }

    #[test]
    fn inner_is_conjugate_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let config = cfg(AlgebraKind::H, 3);
        for _ in 0..20 {
            let x = random_interior(config, &mut rng);
            let y = random_interior(config, &mut rng);
            assert!(inner(&x, &y).unwrap().conj().approx_eq(&inner(&y, &x).unwrap(), 1e-14));
            let xx = inner(&x, &x).unwrap();
            assert!(xx.im().norm() <= 1e-15 * xx.norm());
        }
    }

    #[test]
    fn coshdist_values() {
        let config = cfg(AlgebraKind::C, 2);
        let o = BallPoint::origin(config);
        assert_eq!(coshdist(&o, &o).unwrap(), 1.0);
        let s = 0.8f64;
        let p = BallPoint::on_axis(config, s.tanh());
        assert!((coshdist(&o, &p).unwrap() - s.cosh()).abs() < 1e-14);
        assert!(matches!(
            coshdist(&o, &BallPoint::on_axis(config, 1.0)),
            Err(Error::NotInterior(_))
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for config in configs() {
            let x = random_interior(config, &mut rng);
            let y = random_interior(config, &mut rng);
            let (a, b) = (coshdist(&x, &y).unwrap(), coshdist(&y, &x).unwrap());
            assert!((a - b).abs() <= 1e-12 * a);
            assert!(a >= 1.0);
        }
    }

    #[test]
    fn crossratio_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for config in configs() {
            let p: Vec<_> = (0..4).map(|_| stereo(&NilPoint::random(config, &mut rng))).collect();
            let a = crossratio_ball(&p[0], &p[1], &p[2], &p[3]).unwrap();
            let b = crossratio_ball(&p[1], &p[0], &p[3], &p[2]).unwrap();
            assert!((a - b).abs() <= 1e-12 * a);
        }
    }

    #[test]
    fn crossratio_matches_gauge() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for config in configs() {
            let south = BallPoint::on_axis(config, -1.0);
            let north = BallPoint::on_axis(config, 1.0);
            for _ in 0..20 {
                let g1 = NilPoint::random(config, &mut rng);
                let g2 = NilPoint::random(config, &mut rng);
                let cr = crossratio_ball(&south, &north, &stereo(&g1), &stereo(&g2)).unwrap();
                let expected = g2.inv().unwrap().gauge().unwrap().norm() / g1.inv().unwrap().gauge().unwrap().norm();
                assert!((cr - expected).abs() <= 1e-9 * expected);
            }
        }
    }

    #[test]
    fn crossratio_agrees_with_nil_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for config in configs() {
            for _ in 0..20 {
                let g: Vec<_> = (0..4).map(|_| NilPoint::random(config, &mut rng)).collect();
                let nil = crossratio_nil(&g[0], &g[1], &g[2], &g[3]).unwrap();
                let x: Vec<_> = g.iter().map(stereo).collect();
                let ball = crossratio_ball(&x[0], &x[1], &x[2], &x[3]).unwrap();
                assert!((nil - ball).abs() <= 1e-9 * nil, "{config:?}: {nil} vs {ball}");
            }
        }
    }
}
