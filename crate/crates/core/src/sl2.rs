//! SL(2, C): classification, translation length, words and trace coordinates.
//!
//! A matrix acts on the Riemann sphere by `z -> (a z + b) / (c z + d)` and on
//! hyperbolic 3-space with translation length `2 ln |λ|`, `|λ| >= 1` the
//! larger eigenvalue modulus. Tangent vectors at a generator `X` are written
//! `X ξ` with `ξ` traceless, in the basis
//!
//! ```text
//! H = [[1, 0], [0, -1]],  E = [[0, 1], [0, 0]],  F = [[0, 0], [1, 0]]
//! ```

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
// unused when a dependency links std, which adds inherent float methods
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, RankReport};

/// Tolerance on `tr` for the loxodromic/elliptic split.
pub const CLASS_TOL: f64 = 1e-9;
/// Tolerance on `det - 1`.
pub const DET_TOL: f64 = 1e-12;
/// Relative singular-value cutoff for Jacobian ranks.
pub const RANK_TOL: f64 = 1e-8;
/// Finite-difference step.
pub const FD_STEP: f64 = 1e-5;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sl2Class {
    Identity,
    Parabolic,
    Elliptic,
    Loxodromic,
}

impl fmt::Display for Sl2Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sl2Class::Identity => "identity",
            Sl2Class::Parabolic => "parabolic",
            Sl2Class::Elliptic => "elliptic",
            Sl2Class::Loxodromic => "loxodromic",
        })
    }
}

/// Unit-determinant complex 2x2 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sl2(Matrix2<C>);

impl Sl2 {
    /// `[[a, b], [c, d]]`; `det` must be 1 within `1e-12`.
    pub fn new(a: C, b: C, c: C, d: C) -> Result<Self> {
        let det = a * d - b * c;
        let dev = (det - ONE).norm();
        if dev > DET_TOL * (1.0 + a.norm() * d.norm() + b.norm() * c.norm()) {
            return Err(Error::Determinant(dev));
        }
        Ok(Self(Matrix2::new(a, b, c, d)))
    }

    /// Rescales an invertible matrix by `det^{-1/2}`.
    pub fn normalized(a: C, b: C, c: C, d: C) -> Result<Self> {
        let det = a * d - b * c;
        if det.norm() < 1e-300 {
            return Err(Error::Singular("zero determinant"));
        }
        let f = det.sqrt().inv();
        Ok(Self(Matrix2::new(a * f, b * f, c * f, d * f)))
    }

    pub fn identity() -> Self {
        Self(Matrix2::identity())
    }

    /// `diag(λ, 1/λ)`.
    pub fn diag(lambda: C) -> Result<Self> {
        if lambda.norm() == 0.0 {
            return Err(Error::Singular("zero eigenvalue"));
        }
        Ok(Self(Matrix2::new(lambda, ZERO, ZERO, lambda.inv())))
    }

    /// Loxodromic with eigenvalue `e^{(l + iθ)/2}` at the fixed point
    /// `attracting` and its inverse at `repelling`.
    pub fn with_fixed_points(length: f64, theta: f64, attracting: C, repelling: C) -> Result<Self> {
        let lambda = (C::new(length, theta) * 0.5).exp();
        let frame = Self::normalized(attracting, repelling, ONE, ONE)?;
        Ok(frame.mul(&Self::diag(lambda)?).mul(&frame.inverse()))
    }

    /// Independent standard normal entries, rescaled to unit determinant.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let mut z = || C::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            let (a, b, c, d) = (z(), z(), z(), z());
            if (a * d - b * c).norm() > 1e-2 {
                return Self::normalized(a, b, c, d).expect("nonzero determinant");
            }
        }
    }

    pub fn matrix(&self) -> &Matrix2<C> {
        &self.0
    }

    pub fn entries(&self) -> [C; 4] {
        [self.0[(0, 0)], self.0[(0, 1)], self.0[(1, 0)], self.0[(1, 1)]]
    }

    pub fn trace(&self) -> C {
        self.0[(0, 0)] + self.0[(1, 1)]
    }

    pub fn det(&self) -> C {
        self.0.determinant()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self(self.0 * other.0)
    }

    /// Adjugate inverse `[[d, -b], [-c, a]]`.
    pub fn inverse(&self) -> Self {
        let [a, b, c, d] = self.entries();
        Self(Matrix2::new(d, -b, -c, a))
    }

    pub fn pow(&self, n: i64) -> Self {
        let mut base = if n < 0 { self.inverse() } else { *self };
        let mut out = Self::identity();
        let mut e = n.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        out
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn neg(&self) -> Self {
        Self(-self.0)
    }

    /// `max |entry|`.
    pub fn max_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self.0 - other.0).iter().all(|z| z.norm() <= tol)
    }

    /// `||AB - BA|| <= 1e-8 ||A|| ||B||`.
    pub fn commutes_with(&self, other: &Self) -> bool {
        let comm = self.0 * other.0 - other.0 * self.0;
        let size = comm.iter().map(|z| z.norm()).fold(0.0, f64::max);
        size <= 1e-8 * self.max_norm() * other.max_norm()
    }

    pub fn classify(&self) -> Sl2Class {
        let t = self.trace();
        if t.im.abs() > CLASS_TOL || t.re.abs() > 2.0 + CLASS_TOL {
            Sl2Class::Loxodromic
        } else if (t.re.abs() - 2.0).abs() <= CLASS_TOL {
            let s = t.re.signum();
            if self.approx_eq(&Self(Matrix2::identity() * C::new(s, 0.0)), 1e-9) {
                Sl2Class::Identity
            } else {
                Sl2Class::Parabolic
            }
        } else {
            Sl2Class::Elliptic
        }
    }

    /// Eigenvalues `(λ, 1/λ)` with `|λ| >= 1`.
    pub fn eigenvalues(&self) -> (C, C) {
        let t = self.trace();
        let mut r = (t * t - 4.0).sqrt();
        if (t.conj() * r).re < 0.0 {
            r = -r;
        }
        let lambda = (t + r) * 0.5;
        (lambda, lambda.inv())
    }

    /// `2 ln |λ|`; zero for elliptic and parabolic matrices.
    pub fn spectral_length(&self) -> f64 {
        (2.0 * self.eigenvalues().0.norm().ln()).max(0.0)
    }

    /// Translation length of a loxodromic matrix.
    pub fn length(&self) -> Result<f64> {
        match self.classify() {
            Sl2Class::Loxodromic => Ok(self.spectral_length()),
            class => Err(Error::NotLoxodromic(class)),
        }
    }

    /// `|tr - 2| + |tr + 2|`, equal to `2 (e^{l/2} + e^{-l/2})`.
    pub fn length_gauge(&self) -> f64 {
        trace_gauge(self.trace())
    }
}

/// `|t - 2| + |t + 2|`.
pub fn trace_gauge(t: C) -> f64 {
    (t - 2.0).norm() + (t + 2.0).norm()
}

/// A word in signed generator indices; `-i` is the inverse of generator `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<i32>);

impl Word {
    pub fn new(letters: Vec<i32>) -> Result<Self> {
        if letters.contains(&0) {
            return Err(Error::ZeroLetter);
        }
        Ok(Self(letters))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// The single letter `g` (1-based).
    pub fn generator(g: i32) -> Self {
        assert!(g != 0, "generator letters are nonzero");
        Self(alloc::vec![g])
    }

    pub fn letters(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest generator index used.
    pub fn max_index(&self) -> usize {
        self.0.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.iter().rev().map(|l| -l).collect())
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Self(v)
    }

    pub fn pow(&self, n: i64) -> Self {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut v = Vec::with_capacity(base.len() * n.unsigned_abs() as usize);
        for _ in 0..n.unsigned_abs() {
            v.extend_from_slice(&base.0);
        }
        Self(v)
    }

    /// Free reduction.
    pub fn reduced(&self) -> Self {
        let mut v: Vec<i32> = Vec::with_capacity(self.len());
        for &l in &self.0 {
            if v.last() == Some(&-l) {
                v.pop();
            } else {
                v.push(l);
            }
        }
        Self(v)
    }

    /// Free and cyclic reduction.
    pub fn cyclically_reduced(&self) -> Self {
        let v = self.reduced().0;
        let (mut i, mut j) = (0, v.len());
        while j - i > 1 && v[i] == -v[j - 1] {
            i += 1;
            j -= 1;
        }
        Self(v[i..j].to_vec())
    }

    /// Representative of the conjugacy class of `{w, w^-1}`: the least
    /// rotation of the cyclic reduction of either.
    pub fn canonical(&self) -> Self {
        let w = self.cyclically_reduced();
        if w.is_empty() {
            return w;
        }
        let mut best: Option<Vec<i32>> = None;
        for v in [w.0.clone(), w.inverse().0] {
            for i in 0..v.len() {
                let mut r = v[i..].to_vec();
                r.extend_from_slice(&v[..i]);
                if best.as_ref().is_none_or(|b| r < *b) {
                    best = Some(r);
                }
            }
        }
        Self(best.unwrap_or_default())
    }

    /// `(root, k)` with `self = root^k` and `k` maximal.
    pub fn root(&self) -> (Self, usize) {
        let n = self.len();
        for p in 1..=n {
            if n.is_multiple_of(p) && (p..n).all(|i| self.0[i] == self.0[i - p]) {
                return (Self(self.0[..p].to_vec()), n / p);
            }
        }
        (self.clone(), 1)
    }

    /// Exponent sum of each generator.
    pub fn exponent_sums(&self, arity: usize) -> Vec<i64> {
        let mut s = alloc::vec![0i64; arity];
        for &l in &self.0 {
            let idx = l.unsigned_abs() as usize - 1;
            if idx < arity {
                s[idx] += i64::from(l.signum());
            }
        }
        s
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str("]")
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Parses `[1,-2,1]`; whitespace is ignored and `[]` is the empty word.
    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or(Error::InvalidConfig("words are written as [i,j,...]"))?;
        if body.trim().is_empty() {
            return Ok(Self::empty());
        }
        let letters = body
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i32>()
                    .map_err(|_| Error::InvalidConfig("word letters must be integers"))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(letters)
    }
}

/// All freely reduced nonempty words of length `<= max_len` in shortlex order
/// with letters ordered `1, -1, 2, -2, ...`.
pub fn reduced_words(arity: usize, max_len: usize) -> Vec<Word> {
    let alphabet: Vec<i32> = (1..=arity as i32).flat_map(|g| [g, -g]).collect();
    let mut out = Vec::new();
    let mut layer: Vec<Vec<i32>> = alloc::vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for &l in &alphabet {
                if w.last() == Some(&-l) {
                    continue;
                }
                let mut v = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned().map(Word));
        layer = next;
    }
    out
}

/// Keeps the first word of each class under conjugation and inversion,
/// dropping empty classes and proper powers.
pub fn dedupe_primitive(words: impl IntoIterator<Item = Word>) -> Vec<Word> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for w in words {
        let c = w.canonical();
        if c.is_empty() || c.root().1 > 1 {
            continue;
        }
        if seen.insert(c) {
            out.push(w);
        }
    }
    out
}

/// A tuple of generator matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct Sl2Rep {
    generators: Vec<Sl2>,
}

impl Sl2Rep {
    pub fn new(generators: Vec<Sl2>) -> Self {
        Self { generators }
    }

    pub fn generators(&self) -> &[Sl2] {
        &self.generators
    }

    pub fn arity(&self) -> usize {
        self.generators.len()
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        match w.letters().iter().find(|l| l.unsigned_abs() as usize > self.arity()) {
            Some(l) => Err(Error::GeneratorIndex {
                index: l.unsigned_abs() as usize,
                arity: self.arity(),
            }),
            None => Ok(()),
        }
    }

    fn letter(&self, l: i32) -> Sl2 {
        let g = self.generators[l.unsigned_abs() as usize - 1];
        if l > 0 {
            g
        } else {
            g.inverse()
        }
    }

    /// Product of the letters in order.
    pub fn evaluate(&self, w: &Word) -> Result<Sl2> {
        self.check_word(w)?;
        Ok(w.letters()
            .iter()
            .fold(Sl2::identity(), |acc, &l| acc.mul(&self.letter(l))))
    }

    pub fn trace_word(&self, w: &Word) -> Result<C> {
        Ok(self.evaluate(w)?.trace())
    }

    /// Translation length of a word, failing on non-loxodromic images.
    pub fn word_length(&self, w: &Word) -> Result<f64> {
        let m = self.evaluate(w)?;
        match m.classify() {
            Sl2Class::Loxodromic => Ok(m.spectral_length()),
            class => Err(Error::WordNotLoxodromic { word: w.clone(), class }),
        }
    }

    /// `C^{-1} X C` for every generator.
    pub fn conjugate_by(&self, c: &Sl2) -> Self {
        let ci = c.inverse();
        Self::new(self.generators.iter().map(|g| ci.mul(g).mul(c)).collect())
    }

    /// Entrywise complex conjugate of every generator.
    pub fn complex_conjugate(&self) -> Self {
        Self::new(self.generators.iter().map(Sl2::conj).collect())
    }

    /// Pairwise products and longer words have 4 distinct fixed points for
    /// some loxodromic pair.
    pub fn is_nonelementary(&self) -> bool {
        let candidates: Vec<Sl2> = reduced_words(self.arity(), 3)
            .into_iter()
            .filter_map(|w| self.evaluate(&w).ok())
            .filter(|m| m.classify() == Sl2Class::Loxodromic)
            .collect();
        let fixed: Vec<_> = candidates
            .iter()
            .filter_map(|m| crate::spectrum::fixed_points(m).ok())
            .collect();
        for (i, p) in fixed.iter().enumerate() {
            for q in &fixed[i + 1..] {
                let pts = [p.repelling, p.attracting, q.repelling, q.attracting];
                let distinct = (0..4).all(|a| (a + 1..4).all(|b| pts[a].chordal(&pts[b]) > 1e-8));
                if distinct {
                    return true;
                }
            }
        }
        false
    }
}

/// `P`, `Q`, `Δ = P^2 - 4Q` and the roots of `z^2 - P z + Q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vogt {
    pub p: C,
    pub q: C,
    pub delta: C,
    pub roots: [C; 2],
}

pub fn vogt(x1: C, x2: C, x3: C, y12: C, y13: C, y23: C) -> Vogt {
    let p = x1 * y23 + x2 * y13 + x3 * y12 - x1 * x2 * x3;
    let q = x1 * x1 + x2 * x2 + x3 * x3 + y12 * y12 + y13 * y13 + y23 * y23 + y12 * y13 * y23
        - x1 * x2 * y12
        - x1 * x3 * y13
        - x2 * x3 * y23
        - 4.0;
    let delta = p * p - q * 4.0;
    let r = delta.sqrt();
    Vogt {
        p,
        q,
        delta,
        roots: [(p + r) * 0.5, (p - r) * 0.5],
    }
}

impl Vogt {
    /// Vogt data of a triple from its traces.
    pub fn of_triple(x: &Sl2, y: &Sl2, z: &Sl2) -> Self {
        vogt(
            x.trace(),
            y.trace(),
            z.trace(),
            x.mul(y).trace(),
            x.mul(z).trace(),
            y.mul(z).trace(),
        )
    }

    /// `|z^2 - P z + Q|`.
    pub fn residual(&self, z: C) -> f64 {
        (z * z - self.p * z + self.q).norm()
    }
}

/// The seven words `X, Y, Z, XY, XZ, YZ, XYZ`.
pub fn triple_words() -> Vec<Word> {
    [
        alloc::vec![1],
        alloc::vec![2],
        alloc::vec![3],
        alloc::vec![1, 2],
        alloc::vec![1, 3],
        alloc::vec![2, 3],
        alloc::vec![1, 2, 3],
    ]
    .into_iter()
    .map(Word)
    .collect()
}

/// `X, Y, XY, XY^-1, X^2 Y, X Y^2`.
pub fn default_length_words() -> Vec<Word> {
    [
        alloc::vec![1],
        alloc::vec![2],
        alloc::vec![1, 2],
        alloc::vec![1, -2],
        alloc::vec![1, 1, 2],
        alloc::vec![1, 2, 2],
    ]
    .into_iter()
    .map(Word)
    .collect()
}

fn basis() -> [Matrix2<C>; 3] {
    [
        Matrix2::new(ONE, ZERO, ZERO, -ONE),
        Matrix2::new(ZERO, ONE, ZERO, ZERO),
        Matrix2::new(ZERO, ZERO, ONE, ZERO),
    ]
}

/// Coordinates of a traceless matrix in the basis `H, E, F`.
pub fn sl2_coords(xi: &Matrix2<C>) -> [C; 3] {
    [xi[(0, 0)], xi[(0, 1)], xi[(1, 0)]]
}

/// Complex Jacobian and its rank.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexJacobian {
    pub matrix: DMatrix<C>,
    pub rank: RankReport,
}

impl ComplexJacobian {
    fn new(matrix: DMatrix<C>) -> Self {
        let rank = linalg::rank_complex(&matrix, RANK_TOL);
        Self { matrix, rank }
    }

    pub fn kernel_dim(&self) -> usize {
        self.rank.kernel_dim(self.matrix.ncols())
    }
}

/// Real Jacobian and its rank.
#[derive(Clone, Debug, PartialEq)]
pub struct RealJacobian {
    pub matrix: DMatrix<f64>,
    pub rank: RankReport,
}

impl RealJacobian {
    fn new(matrix: DMatrix<f64>) -> Self {
        let rank = linalg::rank_real(&matrix, RANK_TOL);
        Self { matrix, rank }
    }

    pub fn kernel_dim(&self) -> usize {
        self.rank.kernel_dim(self.matrix.ncols())
    }
}

fn check_words(rep: &Sl2Rep, words: &[Word]) -> Result<()> {
    words.iter().try_for_each(|w| rep.check_word(w))
}

/// `d tr(w)` along `X_g -> X_g e^{ε B}` for each generator `g` and basis
/// element `B`; column `3 g + b`.
fn trace_gradient(rep: &Sl2Rep, w: &Word) -> Vec<C> {
    let n = w.len();
    let mats: Vec<Matrix2<C>> = w.letters().iter().map(|&l| *rep.letter(l).matrix()).collect();
    // prefix[i] = w_0 ... w_{i-1}, suffix[i] = w_i ... w_{n-1}
    let mut prefix = alloc::vec![Matrix2::identity(); n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] * mats[i];
    }
    let mut suffix = alloc::vec![Matrix2::identity(); n + 1];
    for i in (0..n).rev() {
        suffix[i] = mats[i] * suffix[i + 1];
    }
    let basis = basis();
    let mut grad = alloc::vec![ZERO; 3 * rep.arity()];
    for (i, &l) in w.letters().iter().enumerate() {
        let g = l.unsigned_abs() as usize - 1;
        let x = *rep.generators[g].matrix();
        for (b, e) in basis.iter().enumerate() {
            let inner = if l > 0 { x * e } else { -(e * rep.letter(l).matrix()) };
            grad[3 * g + b] += (suffix[i + 1] * prefix[i] * inner).trace();
        }
    }
    grad
}

/// Analytic trace Jacobian: rows are words, columns `(generator, H/E/F)`.
pub fn trace_jacobian(rep: &Sl2Rep, words: &[Word]) -> Result<ComplexJacobian> {
    check_words(rep, words)?;
    let cols = 3 * rep.arity();
    let mut m = DMatrix::zeros(words.len(), cols);
    for (r, w) in words.iter().enumerate() {
        for (c, v) in trace_gradient(rep, w).into_iter().enumerate() {
            m[(r, c)] = v;
        }
    }
    Ok(ComplexJacobian::new(m))
}

/// `exp B` for traceless `B`, using `B^2 = -det(B) I`.
fn exp_traceless(b: &Matrix2<C>) -> Matrix2<C> {
    let det = b.determinant();
    // B^2 = -det(B) I
    let mu = (-det).sqrt();
    let (cosh, sinhc) = if mu.norm() < 1e-8 {
        (ONE + mu * mu * 0.5, ONE + mu * mu / 6.0)
    } else {
        (mu.cosh(), mu.sinh() / mu)
    };
    Matrix2::identity() * cosh + b * sinhc
}

fn perturbed(rep: &Sl2Rep, g: usize, direction: &Matrix2<C>) -> Sl2Rep {
    let mut gens = rep.generators.clone();
    gens[g] = Sl2(gens[g].0 * exp_traceless(direction));
    Sl2Rep::new(gens)
}

/// Central finite-difference trace Jacobian with step `1e-5`.
pub fn trace_jacobian_fd(rep: &Sl2Rep, words: &[Word]) -> Result<ComplexJacobian> {
    check_words(rep, words)?;
    let cols = 3 * rep.arity();
    let mut m = DMatrix::zeros(words.len(), cols);
    for (c, (g, b)) in (0..rep.arity()).flat_map(|g| (0..3).map(move |b| (g, b))).enumerate() {
        let dir = basis()[b] * C::new(FD_STEP, 0.0);
        let plus = perturbed(rep, g, &dir);
        let minus = perturbed(rep, g, &(-dir));
        for (r, w) in words.iter().enumerate() {
            m[(r, c)] = (plus.trace_word(w)? - minus.trace_word(w)?) / (2.0 * FD_STEP);
        }
    }
    Ok(ComplexJacobian::new(m))
}

fn loxodromic_words(rep: &Sl2Rep, words: &[Word]) -> Result<Vec<Sl2>> {
    words
        .iter()
        .map(|w| {
            let m = rep.evaluate(w)?;
            match m.classify() {
                Sl2Class::Loxodromic => Ok(m),
                class => Err(Error::WordNotLoxodromic { word: w.clone(), class }),
            }
        })
        .collect()
}

/// Analytic length Jacobian over the `6 · arity` real parameters
/// `(Re, Im) x (H, E, F)` per generator; `dl = 2 Re(dtr / (λ - 1/λ))`.
pub fn length_jacobian(rep: &Sl2Rep, words: &[Word]) -> Result<RealJacobian> {
    check_words(rep, words)?;
    let mats = loxodromic_words(rep, words)?;
    let cols = 6 * rep.arity();
    let mut m = DMatrix::zeros(words.len(), cols);
    for (r, (w, mat)) in words.iter().zip(&mats).enumerate() {
        let (lambda, inv) = mat.eigenvalues();
        let k = (lambda - inv).inv() * 2.0;
        for (j, d) in trace_gradient(rep, w).into_iter().enumerate() {
            let g = j / 3;
            let b = j % 3;
            m[(r, 6 * g + 2 * b)] = (k * d).re;
            m[(r, 6 * g + 2 * b + 1)] = (k * d * C::i()).re;
        }
    }
    Ok(RealJacobian::new(m))
}

/// Central finite-difference length Jacobian.
pub fn length_jacobian_fd(rep: &Sl2Rep, words: &[Word]) -> Result<RealJacobian> {
    check_words(rep, words)?;
    loxodromic_words(rep, words)?;
    let cols = 6 * rep.arity();
    let mut m = DMatrix::zeros(words.len(), cols);
    for c in 0..cols {
        let (g, b, imag) = (c / 6, (c % 6) / 2, c % 2 == 1);
        let unit = if imag { C::i() } else { ONE };
        let dir = basis()[b] * (unit * FD_STEP);
        let plus = perturbed(rep, g, &dir);
        let minus = perturbed(rep, g, &(-dir));
        for (r, w) in words.iter().enumerate() {
            let lp = plus.evaluate(w)?.spectral_length();
            let lm = minus.evaluate(w)?.spectral_length();
            m[(r, c)] = (lp - lm) / (2.0 * FD_STEP);
        }
    }
    Ok(RealJacobian::new(m))
}

/// Tangent of the conjugation `X -> e^{εA} X e^{-εA}` in the coordinates
/// used by [`trace_jacobian`]: `ξ = X^{-1} A X - A` per generator.
pub fn conjugation_direction(rep: &Sl2Rep, a: &Matrix2<C>) -> Vec<C> {
    rep.generators
        .iter()
        .flat_map(|x| sl2_coords(&(x.inverse().0 * a * x.0 - a)))
        .collect()
}

/// Real form of [`conjugation_direction`] for [`length_jacobian`] columns.
pub fn conjugation_direction_real(rep: &Sl2Rep, a: &Matrix2<C>) -> Vec<f64> {
    conjugation_direction(rep, a)
        .into_iter()
        .flat_map(|z| [z.re, z.im])
        .collect()
}

/// Searches short words for a loxodromic one, seeds first.
fn find_loxodromic(rep: &Sl2Rep, seeds: &[Word]) -> Option<Word> {
    seeds.iter().cloned().chain(reduced_words(rep.arity(), 4)).find(|w| {
        rep.evaluate(w)
            .map(|m| m.classify() == Sl2Class::Loxodromic)
            .unwrap_or(false)
    })
}

fn is_lox(rep: &Sl2Rep, w: &Word) -> bool {
    rep.evaluate(w)
        .map(|m| m.classify() == Sl2Class::Loxodromic)
        .unwrap_or(false)
}

fn commute(rep: &Sl2Rep, a: &Word, b: &Word) -> bool {
    match (rep.evaluate(a), rep.evaluate(b)) {
        (Ok(x), Ok(y)) => x.commutes_with(&y),
        _ => true,
    }
}

fn pairwise_noncommuting(rep: &Sl2Rep, w: &[Word]) -> bool {
    w.len() >= 3 && !commute(rep, &w[0], &w[1]) && !commute(rep, &w[0], &w[2]) && !commute(rep, &w[1], &w[2])
}

/// Default cap on the number of words returned by [`coordinate_words`].
pub const COORDINATE_BUDGET: usize = 64;

/// Length-coordinate words at a nonelementary rep:
///
/// 1. non-loxodromic seeds `w` become `w h^k`, `w h^-k` for a loxodromic `h`,
///    which is added too;
/// 2. the first three words are made pairwise non-commuting, replacing
///    `X1, Xi, Xk` by `X1 Xi, X1 Xk, Xk` when `Xi` commutes with `X1`;
/// 3. reduced words are appended while they raise the rank of the length
///    Jacobian, up to `6 · arity - 6` or `budget` words.
pub fn coordinate_words(rep: &Sl2Rep, seed_words: &[Word], budget: usize) -> Result<Vec<Word>> {
    if !rep.is_nonelementary() {
        return Err(Error::Elementary);
    }
    for w in seed_words {
        rep.check_word(w)?;
    }
    let h = find_loxodromic(rep, seed_words).ok_or(Error::Elementary)?;

    let mut words: Vec<Word> = Vec::new();
    let mut add_h = false;
    for w in seed_words {
        if is_lox(rep, w) {
            words.push(w.clone());
            continue;
        }
        let k = (1..=32)
            .find(|&k| is_lox(rep, &w.concat(&h.pow(k))) && is_lox(rep, &w.concat(&h.pow(-k))))
            .ok_or(Error::Elementary)?;
        words.push(w.concat(&h.pow(k)));
        words.push(w.concat(&h.pow(-k)));
        add_h = true;
    }
    if add_h || words.is_empty() {
        words.push(h.clone());
    }

    make_leading_triple(rep, &mut words)?;

    let target = 6 * rep.arity() - 6;
    let mut rank = length_jacobian(rep, &words)?.rank.rank;
    let mut seen: BTreeSet<Word> = words.iter().map(Word::canonical).collect();
    for w in dedupe_primitive(reduced_words(rep.arity(), 6)) {
        if rank >= target || words.len() >= budget {
            break;
        }
        if !seen.insert(w.canonical()) || !is_lox(rep, &w) {
            continue;
        }
        words.push(w);
        let r = length_jacobian(rep, &words)?.rank.rank;
        if r > rank {
            rank = r;
        } else {
            words.pop();
        }
    }
    Ok(words)
}

fn make_leading_triple(rep: &Sl2Rep, words: &mut Vec<Word>) -> Result<()> {
    if pairwise_noncommuting(rep, words) {
        return Ok(());
    }
    // Make sure there is a partner for the first word and a third candidate.
    for extra in reduced_words(rep.arity(), 3) {
        let k_exists = words.iter().skip(1).any(|w| !commute(rep, &words[0], w));
        if k_exists && words.len() >= 3 {
            break;
        }
        if is_lox(rep, &extra) && !words.iter().any(|w| w.canonical() == extra.canonical()) {
            words.push(extra);
        }
    }
    let k = (1..words.len())
        .find(|&k| !commute(rep, &words[0], &words[k]))
        .ok_or(Error::Elementary)?;
    // Prefer a third word that commutes with neither.
    if let Some(i) =
        (1..words.len()).find(|&i| i != k && !commute(rep, &words[0], &words[i]) && !commute(rep, &words[k], &words[i]))
    {
        let triple = [words[0].clone(), words[k].clone(), words[i].clone()];
        reorder(words, &[0, k, i], triple);
        return Ok(());
    }
    for i in (1..words.len()).filter(|&i| i != k) {
        if commute(rep, &words[0], &words[i]) {
            let x1i = words[0].concat(&words[i]);
            let x1k = words[0].concat(&words[k]);
            let triple = [x1i, x1k, words[k].clone()];
            if triple.iter().all(|w| is_lox(rep, w)) && pairwise_noncommuting(rep, &triple) {
                reorder(words, &[0, i, k], triple);
                return Ok(());
            }
        }
    }
    // Fall back to a short word that commutes with neither of the pair.
    let pair = [words[0].clone(), words[k].clone()];
    let third = reduced_words(rep.arity(), 4)
        .into_iter()
        .find(|w| is_lox(rep, w) && !commute(rep, &pair[0], w) && !commute(rep, &pair[1], w))
        .ok_or(Error::Elementary)?;
    let mut rest: Vec<Word> = words
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != 0 && j != k)
        .map(|(_, w)| w.clone())
        .collect();
    let mut out = alloc::vec![pair[0].clone(), pair[1].clone(), third];
    out.append(&mut rest);
    *words = out;
    Ok(())
}

/// Replaces the words at `slots` by `triple` and moves them to the front.
fn reorder(words: &mut Vec<Word>, slots: &[usize; 3], triple: [Word; 3]) {
    let rest: Vec<Word> = words
        .iter()
        .enumerate()
        .filter(|(j, _)| !slots.contains(j))
        .map(|(_, w)| w.clone())
        .collect();
    let mut out: Vec<Word> = triple.into_iter().collect();
    out.extend(rest);
    *words = out;
}
