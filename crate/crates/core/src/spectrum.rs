//! Lengths to cross-ratios and back: fixed points on the Riemann sphere, the
//! length-sequence estimator of boundary cross-ratios, and reconstruction of
//! a two-generator representation from its length spectrum.
//!
//! Reconstruction works in the gauge where `a = diag(e^{(l_a + iθ_a)/2}, ·)`
//! fixes `0` and `∞` and `b` attracts to `1`. The remaining fixed point `p` of
//! `b` is seeded from the two limits
//!
//! ```text
//! lim e^{l(a^n) + l(b^n) - l(a^n b^n)}    = |1 - p|^2
//! lim e^{l(a^n) + l(b^n) - l(a^n b^-n)}   = |1 - p|^2 / |p|^2
//! ```
//!
//! and all parameters are then fitted by damped least squares.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
// unused when a dependency links std, which adds inherent float methods
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{AlgebraElement, AlgebraKind};
use crate::ballmodel::{crossratio_ball, BallPoint};
use crate::error::{Error, Result};
use crate::isometry::{ConjugatedNormal, GroupMatrix};
use crate::linalg;
use crate::nilboundary::SpaceConfig;
use crate::sl2::{dedupe_primitive, reduced_words, Sl2, Sl2Class, Sl2Rep, Word};

type C = Complex64;

/// Point of the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RiemannPoint {
    Finite(C),
    Infinity,
}

impl RiemannPoint {
    /// Unit-sphere image `(2z, 1 - |z|^2) / (1 + |z|^2)`; `∞` maps to the
    /// south pole.
    pub fn to_sphere(&self) -> [f64; 3] {
        match *self {
            RiemannPoint::Infinity => [0.0, 0.0, -1.0],
            RiemannPoint::Finite(z) => {
                let n = z.norm_sqr();
                let d = 1.0 + n;
                [2.0 * z.re / d, 2.0 * z.im / d, (1.0 - n) / d]
            }
        }
    }

    /// Euclidean distance of the sphere images.
    pub fn chordal(&self, other: &Self) -> f64 {
        let (a, b) = (self.to_sphere(), other.to_sphere());
        a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    }

    /// The boundary point of the real 3-ball with the same sphere image.
    pub fn to_ball(&self) -> BallPoint {
        let config = SpaceConfig::new(AlgebraKind::R, 3).expect("valid configuration");
        let [x, y, z] = self.to_sphere();
        let r = |v| AlgebraElement::from_real(AlgebraKind::R, v);
        BallPoint::new(config, alloc::vec![r(x), r(y)], r(z)).expect("matching shape")
    }

    /// Image under `z -> (a z + b) / (c z + d)`.
    pub fn mobius(&self, m: &Sl2) -> Self {
        let [a, b, c, d] = m.entries();
        let (num, den) = match *self {
            RiemannPoint::Infinity => (a, c),
            RiemannPoint::Finite(z) => (a * z + b, c * z + d),
        };
        if den.norm() == 0.0 {
            RiemannPoint::Infinity
        } else {
            RiemannPoint::Finite(num / den)
        }
    }
}

/// Fixed points of a loxodromic matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPair {
    pub repelling: RiemannPoint,
    pub attracting: RiemannPoint,
}

fn eigen_point(m: &Sl2, lambda: C) -> RiemannPoint {
    let [a, b, c, d] = m.entries();
    let u = (b, lambda - a);
    let v = (lambda - d, c);
    let (x, y) = if u.0.norm_sqr() + u.1.norm_sqr() >= v.0.norm_sqr() + v.1.norm_sqr() {
        u
    } else {
        v
    };
    if y.norm() <= 1e-15 * x.norm() {
        RiemannPoint::Infinity
    } else {
        RiemannPoint::Finite(x / y)
    }
}

/// Eigenvector ratios `z` of `(z, 1)`, labeled by eigenvalue modulus.
pub fn fixed_points(m: &Sl2) -> Result<FixedPair> {
    match m.classify() {
        Sl2Class::Loxodromic => {
            let (lambda, inv) = m.eigenvalues();
            Ok(FixedPair {
                repelling: eigen_point(m, inv),
                attracting: eigen_point(m, lambda),
            })
        }
        class => Err(Error::NotLoxodromic(class)),
    }
}

/// Boundary cross-ratio `[x1, x2, x3, x4]` of sphere points, computed with the
/// ball bracket of real hyperbolic 3-space. Equals `|cr|^2` for the complex
/// cross-ratio `(x3 - x1)(x4 - x2) / ((x4 - x1)(x3 - x2))`.
pub fn sphere_crossratio(x1: &RiemannPoint, x2: &RiemannPoint, x3: &RiemannPoint, x4: &RiemannPoint) -> Result<f64> {
    crossratio_ball(&x1.to_ball(), &x2.to_ball(), &x3.to_ball(), &x4.to_ball())
}

/// `[x1, x2, x3, x4]` with `x1, x3` the repelling and attracting points of
/// `a` and `x2, x4` those of `b`.
pub fn pair_crossratio(a: &Sl2, b: &Sl2) -> Result<f64> {
    let fa = fixed_points(a)?;
    let fb = fixed_points(b)?;
    sphere_crossratio(&fa.repelling, &fb.repelling, &fa.attracting, &fb.attracting)
}

/// Additive Gaussian noise keyed by the word class.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Noise {
    pub sigma: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LengthSource {
    Rep(Sl2Rep),
    /// Lengths keyed by canonical word class.
    Table(BTreeMap<Word, f64>),
}

/// Queryable marked length spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct LengthOracle {
    source: LengthSource,
    noise: Option<Noise>,
}

impl LengthOracle {
    pub fn from_rep(rep: Sl2Rep) -> Self {
        Self {
            source: LengthSource::Rep(rep),
            noise: None,
        }
    }

    /// Later entries overwrite earlier ones of the same class.
    pub fn from_table(entries: impl IntoIterator<Item = (Word, f64)>) -> Result<Self> {
        let mut table = BTreeMap::new();
        for (word, length) in entries {
            if length.is_nan() || length < 0.0 {
                return Err(Error::NegativeLength { word, length });
            }
            table.insert(word.canonical(), length);
        }
        Ok(Self {
            source: LengthSource::Table(table),
            noise: None,
        })
    }

    pub fn with_noise(mut self, sigma: f64, seed: u64) -> Self {
        self.noise = (sigma > 0.0).then_some(Noise { sigma, seed });
        self
    }

    pub fn source(&self) -> &LengthSource {
        &self.source
    }

    pub fn noise(&self) -> Option<Noise> {
        self.noise
    }

    pub fn arity(&self) -> usize {
        match &self.source {
            LengthSource::Rep(rep) => rep.arity(),
            LengthSource::Table(t) => t.keys().map(Word::max_index).max().unwrap_or(0),
        }
    }

    fn exact(&self, w: &Word) -> Result<(f64, Option<Sl2Class>)> {
        match &self.source {
            LengthSource::Rep(rep) => {
                let m = rep.evaluate(w)?;
                Ok((m.spectral_length(), Some(m.classify())))
            }
            LengthSource::Table(table) => {
                let class = w.canonical();
                if class.is_empty() {
                    return Ok((0.0, Some(Sl2Class::Identity)));
                }
                if let Some(&l) = table.get(&class) {
                    return Ok((l, None));
                }
                let (root, k) = class.root();
                match table.get(&root.canonical()) {
                    Some(&l) if k > 1 => Ok((k as f64 * l, None)),
                    _ => Err(Error::MissingLength(w.clone())),
                }
            }
        }
    }

    fn perturb(&self, w: &Word, l: f64) -> f64 {
        match self.noise {
            None => l,
            Some(Noise { sigma, seed }) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ word_hash(&w.canonical()));
                let e: f64 = rng.sample(StandardNormal);
                (l + sigma * e).max(0.0)
            }
        }
    }

    /// Translation length, zero for non-loxodromic elements.
    pub fn length(&self, w: &Word) -> Result<f64> {
        let (l, _) = self.exact(w)?;
        Ok(self.perturb(w, l))
    }

    /// Translation length of a word that must be loxodromic.
    pub fn loxodromic_length(&self, w: &Word) -> Result<f64> {
        let (l, class) = self.exact(w)?;
        match class {
            Some(c) if c != Sl2Class::Loxodromic => Err(Error::WordNotLoxodromic {
                word: w.clone(),
                class: c,
            }),
            None if l <= 0.0 => Err(Error::ZeroLength(w.clone())),
            _ => Ok(self.perturb(w, l)),
        }
    }

    /// `(word, length)` rows for a table.
    pub fn tabulate(&self, words: &[Word]) -> Result<Vec<(Word, f64)>> {
        words.iter().map(|w| Ok((w.clone(), self.length(w)?))).collect()
    }
}

/// FNV-1a over the letters.
fn word_hash(w: &Word) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &l in w.letters() {
        for byte in l.to_le_bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

/// `e^{l(a^n) + l(b^n) - l(a^n b^n)}` for `n = 1..=terms`. The mixed word
/// may have length zero.
pub fn lemma1_sequence(oracle: &LengthOracle, a: &Word, b: &Word, terms: usize) -> Result<Vec<f64>> {
    (1..=terms as i64)
        .map(|n| {
            let la = oracle.loxodromic_length(&a.pow(n))?;
            let lb = oracle.loxodromic_length(&b.pow(n))?;
            let lab = oracle.length(&a.pow(n).concat(&b.pow(n)))?;
            Ok((la + lb - lab).exp())
        })
        .collect()
}

/// `e^{l(a^n) - l(a^n b^n)}` and `e^{l(b^n) - l(a^n b^n)}`, both tending to 0.
pub fn lemma1_companions(oracle: &LengthOracle, a: &Word, b: &Word, terms: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut first = Vec::with_capacity(terms);
    let mut second = Vec::with_capacity(terms);
    for n in 1..=terms as i64 {
        let la = oracle.loxodromic_length(&a.pow(n))?;
        let lb = oracle.loxodromic_length(&b.pow(n))?;
        let lab = oracle.length(&a.pow(n).concat(&b.pow(n)))?;
        first.push((la - lab).exp());
        second.push((lb - lab).exp());
    }
    Ok((first, second))
}

/// The same sequence for form-preserving matrices, using their translation
/// lengths.
pub fn lemma1_sequence_matrix(a: &GroupMatrix, b: &GroupMatrix, terms: usize) -> Result<Vec<f64>> {
    (1..=terms as i64)
        .map(|n| {
            let an = a.pow(n);
            let bn = b.pow(n);
            let l = an.translation_length()? + bn.translation_length()? - an.mul(&bn)?.translation_length()?;
            Ok(l.exp())
        })
        .collect()
}

/// Two conjugated normal forms with translation parameters in `[1.5, 2.5]`
/// whose products `a^n b^n`, `n <= terms`, are all hyperbolic.
pub fn random_hyperbolic_pair<R: Rng + ?Sized>(
    config: SpaceConfig,
    terms: usize,
    rng: &mut R,
) -> Result<(ConjugatedNormal, ConjugatedNormal)> {
    for _ in 0..1000 {
        let a = ConjugatedNormal::random(config, rng.random_range(1.5..2.5), rng)?;
        let b = ConjugatedNormal::random(config, rng.random_range(1.5..2.5), rng)?;
        if lemma1_sequence_matrix(&a.matrix()?, &b.matrix()?, terms).is_ok() {
            return Ok((a, b));
        }
    }
    Err(Error::InvalidConfig("no hyperbolic pair found"))
}

/// `[x1, x2, x3, x4]` in the ball for two conjugated normal forms.
pub fn pair_crossratio_matrix(a: &ConjugatedNormal, b: &ConjugatedNormal) -> Result<f64> {
    crossratio_ball(&a.repelling()?, &b.repelling()?, &a.attracting()?, &b.attracting()?)
}

/// Extrapolated limit and relative fit residual (smaller is better;
/// infinite for a non-contracting tail).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossRatioEstimate {
    pub value: f64,
    pub confidence: f64,
}

impl CrossRatioEstimate {
    pub fn is_reliable(&self, threshold: f64) -> bool {
        self.confidence <= threshold
    }
}

/// Default reliability threshold for [`CrossRatioEstimate::confidence`].
pub const CONFIDENCE_THRESHOLD: f64 = 1e-6;

const ESTIMATE_WINDOW: usize = 8;

/// Fits `s_n ≈ c + A r^n` on the last eight terms (or fewer) and returns `c`.
pub fn crossratio_estimate(seq: &[f64]) -> Result<CrossRatioEstimate> {
    if seq.len() < 4 {
        return Err(Error::SequenceTooShort {
            needed: 4,
            got: seq.len(),
        });
    }
    let window = &seq[seq.len() - seq.len().min(ESTIMATE_WINDOW)..];
    let last = *window.last().expect("nonempty window");
    let scale = last.abs().max(f64::MIN_POSITIVE);
    let d: Vec<f64> = window.windows(2).map(|p| p[1] - p[0]).collect();
    let dmax = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if dmax <= 64.0 * f64::EPSILON * scale {
        let rms = (d.iter().map(|x| x * x).sum::<f64>() / d.len() as f64).sqrt();
        return Ok(CrossRatioEstimate {
            value: last,
            confidence: rms / scale,
        });
    }
    let num: f64 = d.windows(2).map(|p| p[1] * p[0]).sum();
    let den: f64 = d[..d.len() - 1].iter().map(|x| x * x).sum();
    let r = num / den;
    if !r.is_finite() || r.abs() >= 1.0 {
        return Ok(CrossRatioEstimate {
            value: last,
            confidence: f64::INFINITY,
        });
    }
    // least squares for (c, A) with the ratio fixed
    let n = window.len();
    let basis: Vec<f64> = (0..n).map(|i| r.powi(i as i32)).collect();
    let (mut s11, mut s1b, mut sbb, mut sy, mut sby) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (y, b) in window.iter().zip(&basis) {
        s11 += 1.0;
        s1b += b;
        sbb += b * b;
        sy += y;
        sby += b * y;
    }
    let det = s11 * sbb - s1b * s1b;
    let (c, amp) = if det.abs() > 1e-300 {
        ((sbb * sy - s1b * sby) / det, (s11 * sby - s1b * sy) / det)
    } else {
        (last + d[d.len() - 1] * r / (1.0 - r), 0.0)
    };
    let rms = (window
        .iter()
        .zip(&basis)
        .map(|(y, b)| {
            let e = y - c - amp * b;
            e * e
        })
        .sum::<f64>()
        / n as f64)
        .sqrt();
    Ok(CrossRatioEstimate {
        value: c,
        confidence: rms / c.abs().max(f64::MIN_POSITIVE),
    })
}

fn trace_coordinates(rep: &Sl2Rep) -> Vec<(C, Vec<usize>)> {
    let g = rep.generators();
    let n = g.len();
    let mut out = Vec::new();
    for (i, gi) in g.iter().enumerate() {
        out.push((gi.trace(), alloc::vec![i]));
    }
    for i in 0..n {
        for j in i + 1..n {
            out.push((g[i].mul(&g[j]).trace(), alloc::vec![i, j]));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                out.push((g[i].mul(&g[j]).mul(&g[k]).trace(), alloc::vec![i, j, k]));
            }
        }
    }
    out
}

/// Minimum over complex conjugation and generator sign changes of the largest
/// trace-coordinate difference (generators, pairs, triples).
pub fn conjugacy_distance(r1: &Sl2Rep, r2: &Sl2Rep) -> Result<f64> {
    if r1.arity() != r2.arity() {
        return Err(Error::ArityMismatch(r1.arity(), r2.arity()));
    }
    let t1 = trace_coordinates(r1);
    let t2 = trace_coordinates(r2);
    let n = r1.arity();
    let mut best = f64::INFINITY;
    for conj in [false, true] {
        for mask in 0u32..(1u32 << n) {
            let dist = t1
                .iter()
                .zip(&t2)
                .map(|((x, idx), (y, _))| {
                    let flips = idx.iter().filter(|&&i| mask >> i & 1 == 1).count();
                    let y = if conj { y.conj() } else { *y };
                    let y = if flips % 2 == 1 { -y } else { y };
                    (x - y).norm()
                })
                .fold(0.0, f64::max);
            best = best.min(dist);
        }
    }
    Ok(best)
}

/// Two loxodromics with lengths in `[2, 4]` and four well-separated fixed
/// points.
pub fn random_schottky_pair<R: Rng + ?Sized>(rng: &mut R) -> Sl2Rep {
    loop {
        let mut z = || C::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        let pts = [z(), z(), z(), z()];
        let sphere: Vec<RiemannPoint> = pts.iter().map(|&p| RiemannPoint::Finite(p)).collect();
        let separated = (0..4).all(|i| (i + 1..4).all(|j| sphere[i].chordal(&sphere[j]) > 0.5));
        if !separated {
            continue;
        }
        let la = rng.random_range(2.0..4.0);
        let lb = rng.random_range(2.0..4.0);
        let ta = rng.random_range(-PI..PI);
        let tb = rng.random_range(-PI..PI);
        let a = Sl2::with_fixed_points(la, ta, pts[0], pts[1]);
        let b = Sl2::with_fixed_points(lb, tb, pts[2], pts[3]);
        if let (Ok(a), Ok(b)) = (a, b) {
            return Sl2Rep::new(alloc::vec![a, b]);
        }
    }
}

/// Primitive reduced words of length `<= 4`, then `a^n b^n` and `a^n b^-n`
/// for `n <= 8`, one per conjugacy/inversion class.
pub fn budget_words(arity: usize) -> Vec<Word> {
    let mut words = reduced_words(arity, 4);
    if arity >= 2 {
        for n in 1..=8 {
            let an = Word::generator(1).pow(n);
            words.push(an.concat(&Word::generator(2).pow(n)));
            words.push(an.concat(&Word::generator(-2).pow(n)));
        }
    }
    dedupe_primitive(words)
}

/// Primitive reduced words of length 5 and 6 outside `used`, for checking a
/// fit on words it never saw.
pub fn held_out_words(arity: usize, used: &[Word], count: usize) -> Vec<Word> {
    let seen: alloc::collections::BTreeSet<Word> = used.iter().map(Word::canonical).collect();
    dedupe_primitive(reduced_words(arity, 6).into_iter().filter(|w| w.len() >= 5))
        .into_iter()
        .filter(|w| !seen.contains(&w.canonical()))
        .take(count)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReconstructConfig {
    /// Number of fitted words taken from [`budget_words`].
    pub budget: usize,
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Largest accepted residual RMS.
    pub accept_rms: f64,
    /// Terms of each length sequence used for the initial cross-ratios.
    pub lemma1_terms: usize,
}

impl Default for ReconstructConfig {
    fn default() -> Self {
        Self {
            budget: 30,
            restarts: 8,
            seed: 0,
            max_iter: 300,
            accept_rms: 1e-6,
            lemma1_terms: 8,
        }
    }
}

/// Parameters `(l_a, θ_a, l_b, θ_b, Re p, Im p)`, then
/// `(l, θ, attracting, repelling)` for each further generator.
pub fn rep_from_params(params: &[f64]) -> Result<Sl2Rep> {
    if params.len() < 6 || !(params.len() - 6).is_multiple_of(6) {
        return Err(Error::InvalidConfig("parameter vector has the wrong length"));
    }
    let a = Sl2::diag((C::new(params[0], params[1]) * 0.5).exp())?;
    let b = Sl2::with_fixed_points(params[2], params[3], C::new(1.0, 0.0), C::new(params[4], params[5]))?;
    let mut gens = alloc::vec![a, b];
    for chunk in params[6..].chunks(6) {
        gens.push(Sl2::with_fixed_points(
            chunk[0],
            chunk[1],
            C::new(chunk[2], chunk[3]),
            C::new(chunk[4], chunk[5]),
        )?);
    }
    Ok(Sl2Rep::new(gens))
}

/// Everything a restart needs, computed once from the oracle.
#[derive(Clone, Debug)]
pub struct ReconstructionPlan {
    config: ReconstructConfig,
    arity: usize,
    words: Vec<Word>,
    targets: Vec<f64>,
    estimates: [CrossRatioEstimate; 2],
    starts: Vec<Vec<f64>>,
}

/// Outcome of one restart.
#[derive(Clone, Debug, PartialEq)]
pub struct RestartOutcome {
    pub index: usize,
    pub params: Vec<f64>,
    pub rms: f64,
    pub iterations: usize,
}

/// Fitted representation with its residuals.
#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub rep: Sl2Rep,
    pub params: Vec<f64>,
    pub words: Vec<Word>,
    pub targets: Vec<f64>,
    pub residuals: Vec<f64>,
    pub residual_rms: f64,
    pub best_restart: usize,
    pub restart_rms: Vec<f64>,
    pub estimates: [CrossRatioEstimate; 2],
}

fn residuals(params: &[f64], words: &[Word], targets: &[f64]) -> Option<DVector<f64>> {
    let rep = rep_from_params(params).ok()?;
    let mut r = DVector::zeros(words.len());
    for (i, (w, t)) in words.iter().zip(targets).enumerate() {
        r[i] = rep.evaluate(w).ok()?.spectral_length() - t;
    }
    r.iter().all(|x| x.is_finite()).then_some(r)
}

fn rms(r: &DVector<f64>) -> f64 {
    (r.norm_squared() / r.len().max(1) as f64).sqrt()
}

/// Lengths obey `l(w) = |i l_a ± j l_b|` for exponent sums `(i, j)`, the
/// pattern of generators sharing a fixed point.
fn commuting_pattern(words: &[Word], targets: &[f64], la: f64, lb: f64, tol: f64) -> bool {
    [1.0, -1.0].iter().any(|sign| {
        words.iter().zip(targets).all(|(w, &l)| {
            let e = w.exponent_sums(2);
            let model = (e[0] as f64 * la + sign * e[1] as f64 * lb).abs();
            (model - l).abs() <= tol * (1.0 + l)
        })
    })
}

impl ReconstructionPlan {
    pub fn new(oracle: &LengthOracle, arity: usize, config: ReconstructConfig) -> Result<Self> {
        if arity < 2 {
            return Err(Error::InvalidConfig("reconstruction needs at least two generators"));
        }
        if config.restarts == 0 || config.budget == 0 {
            return Err(Error::InvalidConfig("restarts and budget must be positive"));
        }
        let words: Vec<Word> = budget_words(arity).into_iter().take(config.budget).collect();
        let targets = words.iter().map(|w| oracle.length(w)).collect::<Result<Vec<_>>>()?;

        let a = Word::generator(1);
        let b = Word::generator(2);
        let la = oracle.loxodromic_length(&a)?;
        let lb = oracle.loxodromic_length(&b)?;
        let elementary = match oracle.source() {
            LengthSource::Rep(rep) => !rep.is_nonelementary(),
            LengthSource::Table(_) => {
                let tol = oracle.noise().map_or(1e-6, |n| (10.0 * n.sigma).max(1e-6));
                arity == 2 && commuting_pattern(&words, &targets, la, lb, tol)
            }
        };
        if elementary {
            return Err(Error::Elementary);
        }

        let terms = config.lemma1_terms.max(4);
        let e1 = crossratio_estimate(&lemma1_sequence(oracle, &a, &b, terms)?)?;
        let e2 = crossratio_estimate(&lemma1_sequence(oracle, &a, &b.inverse(), terms)?)?;

        // |1 - p| = r1, |p| = r0
        let r1 = e1.value.max(0.0).sqrt();
        let r0 = if e2.value > 0.0 { r1 / e2.value.sqrt() } else { r1 };
        let x = (r0 * r0 - r1 * r1 + 1.0) / 2.0;
        let y = (r0 * r0 - x * x).max(0.0).sqrt();

        let mut plan = Self {
            config,
            arity,
            words,
            targets,
            estimates: [e1, e2],
            starts: Vec::new(),
        };
        plan.starts = plan.grid_starts(la, lb, x, y, oracle)?;
        Ok(plan)
    }

    /// Best cells of a `θ_a x θ_b` grid at the seeded `p`, one per restart.
    fn grid_starts(&self, la: f64, lb: f64, x: f64, y: f64, oracle: &LengthOracle) -> Result<Vec<Vec<f64>>> {
        const CELLS: usize = 24;
        let mut extra = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        for g in 3..=self.arity {
            let l = oracle.loxodromic_length(&Word::generator(g as i32))?;
            extra.push(l);
            extra.push(rng.random_range(-PI..PI));
            for _ in 0..4 {
                extra.push(rng.sample(StandardNormal));
            }
        }
        let mut scored: Vec<(f64, Vec<f64>)> = Vec::with_capacity(CELLS * CELLS * 2);
        for sy in [y, -y] {
            for i in 0..CELLS {
                for j in 0..CELLS {
                    let ta = -PI + 2.0 * PI * (i as f64 + 0.5) / CELLS as f64;
                    let tb = -PI + 2.0 * PI * (j as f64 + 0.5) / CELLS as f64;
                    let mut p = alloc::vec![la, ta, lb, tb, x, sy];
                    p.extend_from_slice(&extra);
                    let cost = residuals(&p, &self.words, &self.targets).map_or(f64::INFINITY, |r| r.norm_squared());
                    scored.push((cost, p));
                }
            }
        }
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(scored.into_iter().take(self.config.restarts).map(|(_, p)| p).collect())
    }

    pub fn restarts(&self) -> usize {
        self.starts.len()
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn estimates(&self) -> [CrossRatioEstimate; 2] {
        self.estimates
    }

    /// Damped Gauss-Newton from start `index`, jittered by a stream seeded
    /// with `seed + index`.
    pub fn run_restart(&self, index: usize) -> RestartOutcome {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed.wrapping_add(index as u64));
        let mut p = self.starts[index % self.starts.len()].clone();
        if index > 0 {
            for (i, v) in p.iter_mut().enumerate() {
                // lengths of a and b are exact; everything else is jittered
                if i != 0 && i != 2 {
                    let e: f64 = rng.sample(StandardNormal);
                    *v += 0.05 * e;
                }
            }
        }
        let (params, iterations) = levenberg_marquardt(p, &self.words, &self.targets, self.config.max_iter);
        let rms = residuals(&params, &self.words, &self.targets).map_or(f64::INFINITY, |r| rms(&r));
        RestartOutcome {
            index,
            params,
            rms,
            iterations,
        }
    }

    /// Picks the lowest-residual restart (ties to the lower index).
    pub fn finish(&self, outcomes: &[RestartOutcome]) -> Result<Reconstruction> {
        let best = outcomes
            .iter()
            .min_by(|a, b| a.rms.total_cmp(&b.rms).then(a.index.cmp(&b.index)))
            .ok_or(Error::NonConvergence {
                best_residual: f64::INFINITY,
            })?;
        if best.rms.is_nan() || best.rms > self.config.accept_rms {
            return Err(Error::NonConvergence {
                best_residual: best.rms,
            });
        }
        let rep = rep_from_params(&best.params)?;
        let r = residuals(&best.params, &self.words, &self.targets).ok_or(Error::NonConvergence {
            best_residual: best.rms,
        })?;
        Ok(Reconstruction {
            rep,
            params: best.params.clone(),
            words: self.words.clone(),
            targets: self.targets.clone(),
            residuals: r.iter().copied().collect(),
            residual_rms: best.rms,
            best_restart: best.index,
            restart_rms: outcomes.iter().map(|o| o.rms).collect(),
            estimates: self.estimates,
        })
    }
}

fn jacobian(p: &[f64], r0: &DVector<f64>, words: &[Word], targets: &[f64]) -> Option<DMatrix<f64>> {
    let mut j = DMatrix::zeros(r0.len(), p.len());
    let mut q = p.to_vec();
    for c in 0..p.len() {
        let h = 1e-7 * p[c].abs().max(1.0);
        q[c] = p[c] + h;
        let plus = residuals(&q, words, targets)?;
        q[c] = p[c] - h;
        let minus = residuals(&q, words, targets)?;
        q[c] = p[c];
        j.set_column(c, &((plus - minus) / (2.0 * h)));
    }
    Some(j)
}

/// Returns the final parameters and the iteration count.
fn levenberg_marquardt(mut p: Vec<f64>, words: &[Word], targets: &[f64], max_iter: usize) -> (Vec<f64>, usize) {
    let Some(mut r) = residuals(&p, words, targets) else {
        return (p, 0);
    };
    let mut cost = r.norm_squared();
    let mut mu = 1e-3;
    for iter in 0..max_iter {
        if cost < 1e-30 {
            return (p, iter);
        }
        let Some(j) = jacobian(&p, &r, words, targets) else {
            return (p, iter);
        };
        let jt = j.transpose();
        let jtj = &jt * &j;
        let g = &jt * &r;
        if g.amax() < 1e-300 {
            return (p, iter);
        }
        let mut improved = false;
        for _ in 0..20 {
            let mut a = jtj.clone();
            for i in 0..a.nrows() {
                a[(i, i)] += mu * (jtj[(i, i)] + 1e-12);
            }
            let Some(step) = linalg::solve(a, &(-&g)) else {
                mu *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(x, s)| x + s).collect();
            match residuals(&trial, words, targets) {
                Some(rt) if rt.norm_squared() < cost => {
                    let small = step.norm() <= 1e-15 * (1.0 + p.iter().map(|x| x * x).sum::<f64>().sqrt());
                    p = trial;
                    r = rt;
                    cost = r.norm_squared();
                    mu = (mu / 3.0).max(1e-15);
                    improved = true;
                    if small {
                        return (p, iter + 1);
                    }
                    break;
                }
                _ => mu *= 4.0,
            }
        }
        if !improved {
            return (p, iter + 1);
        }
    }
    (p, max_iter)
}

/// Serial reconstruction; the `rank1kit` crate runs restarts in parallel.
pub fn reconstruct(oracle: &LengthOracle, arity: usize, config: ReconstructConfig) -> Result<Reconstruction> {
    let plan = ReconstructionPlan::new(oracle, arity, config)?;
    let outcomes: Vec<_> = (0..plan.restarts()).map(|i| plan.run_restart(i)).collect();
    plan.finish(&outcomes)
}
