//! Invariant suites for every module of `rank1kit-core`.
//!
//! Each suite draws `samples` seeded random cases and reports the worst
//! error against a tolerance. The acceptance tests call the same suites with
//! larger sample counts.

use std::fmt::Write as _;

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rank1kit_core::algebra::{AlgebraElement, AlgebraKind};
use rank1kit_core::ballmodel::{crossratio_ball, stereo, stereo_inv, BallPoint};
use rank1kit_core::isometry::{
    identity_report, identity_residual, GroupMatrix, IdentityReading, NormalIsometry, ReadingResiduals,
};
use rank1kit_core::nilboundary::{crossratio_nil, NilPoint, SpaceConfig};
use rank1kit_core::sl2::{trace_jacobian, trace_jacobian_fd, triple_words, Sl2, Sl2Class, Sl2Rep, Vogt};
use rank1kit_core::spectrum::{
    conjugacy_distance, crossratio_estimate, lemma1_sequence, pair_crossratio, random_schottky_pair, reconstruct,
    LengthOracle, ReconstructConfig,
};
use rank1kit_core::Word;

/// One invariant: the worst observed error against its tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub module: &'static str,
    pub name: String,
    pub worst: f64,
    pub tol: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(module: &'static str, name: impl Into<String>, worst: f64, tol: f64) -> Self {
        Self {
            module,
            name: name.into(),
            worst,
            tol,
            passed: worst <= tol,
        }
    }

    /// A yes/no condition, recorded as worst 0 (held) or 1 (failed).
    pub fn holds(module: &'static str, name: impl Into<String>, ok: bool) -> Self {
        Self::new(module, name, if ok { 0.0 } else { 1.0 }, 0.0)
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

fn rel_elem(a: &AlgebraElement, b: &AlgebraElement) -> f64 {
    let s = a.norm().max(b.norm());
    if s == 0.0 {
        0.0
    } else {
        (*a - *b).norm() / s
    }
}

/// Spaces covering every algebra.
pub fn spaces() -> Vec<SpaceConfig> {
    [
        (AlgebraKind::R, 3),
        (AlgebraKind::C, 3),
        (AlgebraKind::H, 3),
        (AlgebraKind::O, 2),
    ]
    .into_iter()
    .map(|(k, m)| SpaceConfig::new(k, m).expect("valid space"))
    .collect()
}

fn kind_name(kind: AlgebraKind) -> String {
    format!("{kind:?}")
}

/// Octonion laws: norm, multiplicativity, right inverse, inverse of a
/// product, alternativity; associativity of H.
pub fn algebra_checks(samples: usize, seed: u64) -> Vec<Check> {
    let mut r = rng(seed);
    let o = AlgebraKind::O;
    let mut worst = [0.0f64; 6];
    for _ in 0..samples {
        let x = AlgebraElement::random(o, &mut r);
        let y = AlgebraElement::random(o, &mut r);
        let xc = x * x.conj();
        worst[0] = worst[0].max(rel(xc.re(), x.norm_sqr()).max(xc.im().norm() / x.norm_sqr()));
        worst[1] = worst[1].max(rel((x * y).norm(), x.norm() * y.norm()));
        let yi = y.inv().expect("nonzero sample");
        worst[2] = worst[2].max(rel_elem(&((x * y) * yi), &x));
        let lhs = (x * y).inv().expect("nonzero sample");
        worst[3] = worst[3].max(rel_elem(&lhs, &(yi * x.inv().expect("nonzero sample"))));
        worst[4] = worst[4].max(rel_elem(&(x * (x * y)), &((x * x) * y)));
        let h = AlgebraKind::H;
        let (p, q, s) = (
            AlgebraElement::random(h, &mut r),
            AlgebraElement::random(h, &mut r),
            AlgebraElement::random(h, &mut r),
        );
        worst[5] = worst[5].max(rel_elem(&((p * q) * s), &(p * (q * s))));
    }
    let names = [
        ("conj_product_is_norm", 1e-12),
        ("norm_multiplicative", 1e-12),
        ("right_inverse", 1e-12),
        ("inverse_of_product", 1e-12),
        ("left_alternative", 1e-12),
        ("quaternions_associative", 1e-12),
    ];
    names
        .iter()
        .zip(worst)
        .map(|(&(n, tol), w)| Check::new("algebra", n, w, tol))
        .collect()
}

/// Left invariance of the boundary distance and `e^{-s}` homogeneity under
/// dilation, per algebra.
pub fn nil_checks(samples: usize, seed: u64) -> Vec<Check> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    for config in spaces() {
        let (mut inv, mut hom, mut red) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..samples {
            let g = NilPoint::random(config, &mut r);
            let h = NilPoint::random(config, &mut r);
            let k = NilPoint::random(config, &mut r);
            let d = g.dist(&h).expect("finite points");
            let moved = k.mul(&g).and_then(|kg| kg.dist(&k.mul(&h)?)).expect("finite points");
            inv = inv.max(rel(d, moved));
            let s: f64 = r.random_range(-2.0..2.0);
            let ds = g.dilate(s).dist(&h.dilate(s)).expect("finite points");
            hom = hom.max(rel(ds, (-s).exp() * d));
            let inf = NilPoint::infinity(config);
            let hi = h.inv().expect("finite point");
            let a = crossratio_nil(&NilPoint::identity(config), &g, &inf, &h).expect("generic points");
            let b = crossratio_nil(&hi, &hi.mul(&g).expect("finite"), &inf, &NilPoint::identity(config))
                .expect("generic points");
            red = red.max(rel(a, b));
        }
        let kn = kind_name(config.kind());
        out.push(Check::new("nilboundary", format!("left_invariance[{kn}]"), inv, 1e-12));
        out.push(Check::new(
            "nilboundary",
            format!("dilation_homogeneity[{kn}]"),
            hom,
            1e-12,
        ));
        out.push(Check::new(
            "nilboundary",
            format!("crossratio_translation[{kn}]"),
            red,
            1e-9,
        ));
    }
    out
}

/// Projection values, round trip, sphere membership and the cross-ratio
/// against the poles.
pub fn ball_checks(samples: usize, seed: u64) -> Vec<Check> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    let mut fixed = true;
    for config in spaces() {
        let north = BallPoint::on_axis(config, 1.0);
        let south = BallPoint::on_axis(config, -1.0);
        fixed &= stereo(&NilPoint::identity(config)) == north && stereo(&NilPoint::infinity(config)) == south;
    }
    out.push(Check::holds("ballmodel", "projection_fixed_values", fixed));
    for config in spaces() {
        let kn = kind_name(config.kind());
        let (mut trip, mut sphere, mut gauge, mut models) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        let north = BallPoint::on_axis(config, 1.0);
        let south = BallPoint::on_axis(config, -1.0);
        for _ in 0..samples {
            let g: Vec<_> = (0..4).map(|_| NilPoint::random(config, &mut r)).collect();
            let x: Vec<_> = g.iter().map(stereo).collect();
            sphere = sphere.max((x[0].norm_sqr() - 1.0).abs());
            let back = stereo_inv(&x[0]).expect("boundary point");
            let scale = g[0].center().norm().max(g[0].horizontal_norm_sqr().sqrt()).max(1.0);
            let mut err = (*back.center() - *g[0].center()).norm();
            for (a, b) in back.horizontal().iter().zip(g[0].horizontal()) {
                err = err.max((*a - *b).norm());
            }
            trip = trip.max(err / scale);
            let cr = crossratio_ball(&south, &north, &x[0], &x[1]).expect("distinct points");
            let q0 = g[0].qnorm().expect("finite");
            let q1 = g[1].qnorm().expect("finite");
            gauge = gauge.max(rel(cr, q1 * q1 / (q0 * q0)));
            let nil = crossratio_nil(&g[0], &g[1], &g[2], &g[3]).expect("generic points");
            let ball = crossratio_ball(&x[0], &x[1], &x[2], &x[3]).expect("generic points");
            models = models.max(rel(nil, ball));
        }
        out.push(Check::new("ballmodel", format!("round_trip[{kn}]"), trip, 1e-10));
        out.push(Check::new(
            "ballmodel",
            format!("sphere_membership[{kn}]"),
            sphere,
            1e-10,
        ));
        out.push(Check::new("ballmodel", format!("crossratio_gauge[{kn}]"), gauge, 1e-9));
        out.push(Check::new(
            "ballmodel",
            format!("nil_ball_crossratio[{kn}]"),
            models,
            1e-9,
        ));
    }
    out
}

/// Largest coordinate gap between two ball points.
pub fn ball_gap(x: &BallPoint, y: &BallPoint) -> f64 {
    let mut gap = (*x.w2() - *y.w2()).norm();
    for (a, b) in x.w1().iter().zip(y.w1()) {
        gap = gap.max((*a - *b).norm());
    }
    gap
}

/// Worst `|stereo(act_nil g) - act_ball(stereo g)|` per algebra.
pub fn equivariance_checks(samples: usize, seed: u64) -> Vec<Check> {
    let mut r = rng(seed);
    spaces()
        .into_iter()
        .map(|config| {
            let mut worst = 0.0f64;
            for _ in 0..samples {
                let s: f64 = r.random_range(-2.0..2.0);
                let iso = NormalIsometry::random(config, s, &mut r);
                let g = NilPoint::random(config, &mut r);
                let via_nil = stereo(&iso.act_nil(&g).expect("finite point"));
                let via_ball = iso.act_ball(&stereo(&g)).expect("boundary point");
                worst = worst.max(ball_gap(&via_nil, &via_ball));
            }
            Check::new(
                "isometry",
                format!("equivariance[{}]", kind_name(config.kind())),
                worst,
                1e-9,
            )
        })
        .collect()
}

/// The corrected bracketing of the `w2` identity on random octonion inputs.
pub fn identity_check(samples: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let s: f64 = r.random_range(-2.0..2.0);
        let knorm: f64 = r.random_range(0.0..2.0);
        let q = AlgebraElement::random_imaginary(AlgebraKind::O, &mut r);
        let nu = AlgebraElement::random_unit(AlgebraKind::O, &mut r);
        let res = identity_residual(IdentityReading::Corrected, s, &q, &nu, knorm).expect("valid inputs");
        worst = worst.max(res);
    }
    Check::new("isometry", "identity_corrected[O]", worst, 1e-10)
}

/// Residuals of every reading of the identity, per algebra H and O.
pub fn identity_readings(samples: usize, seed: u64) -> Vec<(AlgebraKind, Vec<ReadingResiduals>)> {
    let mut r = rng(seed);
    [AlgebraKind::H, AlgebraKind::O]
        .into_iter()
        .map(|k| (k, identity_report(k, samples, &mut r).expect("valid inputs")))
        .collect()
}

/// Translation lengths of matrices built from normal forms.
pub fn translation_checks(samples: usize, seed: u64) -> Vec<Check> {
    let mut r = rng(seed);
    [(AlgebraKind::R, 3), (AlgebraKind::C, 2), (AlgebraKind::H, 2)]
        .into_iter()
        .map(|(k, m)| {
            let config = SpaceConfig::new(k, m).expect("valid space");
            let mut worst = 0.0f64;
            for _ in 0..samples.min(50) {
                let s: f64 = r.random_range(0.5..2.5);
                let iso = NormalIsometry::random(config, s, &mut r);
                let l = GroupMatrix::from_normal(&iso)
                    .and_then(|g| g.translation_length())
                    .unwrap_or(f64::INFINITY);
                worst = worst.max(rel(l, iso.translation_length()));
            }
            Check::new("isometry", format!("translation_length[{k:?}]"), worst, 1e-6)
        })
        .collect()
}

pub fn random_loxodromic<R: Rng>(r: &mut R) -> Sl2 {
    loop {
        let m = Sl2::random(r);
        if m.classify() == Sl2Class::Loxodromic {
            return m;
        }
    }
}

/// `|tr - 2| + |tr + 2| = 2 (e^{l/2} + e^{-l/2})` on random loxodromics.
pub fn lemma2_check(samples: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let a = random_loxodromic(&mut r);
        let l = a.length().expect("loxodromic");
        worst = worst.max(rel(a.length_gauge(), 2.0 * ((l / 2.0).exp() + (-l / 2.0).exp())));
    }
    Check::new("sl2", "trace_length_gauge", worst, 1e-12)
}

/// Residual of `z^2 - P z + Q` at `tr XYZ`, relative to the size of its terms.
pub fn vogt_check(samples: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let (x, y, z) = (Sl2::random(&mut r), Sl2::random(&mut r), Sl2::random(&mut r));
        let v = Vogt::of_triple(&x, &y, &z);
        let t = x.mul(&y).mul(&z).trace();
        let scale = 1.0 + v.q.norm() + (v.p * t).norm() + (t * t).norm();
        worst = worst.max(v.residual(t) / scale);
    }
    Check::new("sl2", "vogt_residual", worst, 1e-10)
}

/// Analytic and finite-difference trace Jacobians, entrywise.
pub fn gradient_check(samples: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    let words = triple_words();
    let mut worst = 0.0f64;
    for _ in 0..samples.min(50) {
        let rep = Sl2Rep::new((0..3).map(|_| Sl2::random(&mut r)).collect());
        let a = trace_jacobian(&rep, &words).expect("valid words").matrix;
        let f = trace_jacobian_fd(&rep, &words).expect("valid words").matrix;
        worst = worst.max((a - f).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    Check::new("sl2", "jacobian_gradient_check", worst, 1e-7)
}

/// Kernel dimensions of the trace Jacobian on the triple words.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelReport {
    pub commuting_seven: usize,
    pub commuting_six: usize,
    pub commuting_delta: f64,
    pub generic: usize,
}

/// `X, Y` diagonal loxodromics and `Z` with equal off-diagonal entries.
pub fn commuting_triple() -> Sl2Rep {
    let a = C::new(1.2, 0.3);
    let b = C::new(0.8, -0.5);
    let d = (C::new(1.0, 0.0) + b * b) / a;
    Sl2Rep::new(vec![
        Sl2::diag(C::new(1.3, 0.4)).expect("nonzero"),
        Sl2::diag(C::new(0.7, -0.9)).expect("nonzero"),
        Sl2::new(a, b, b, d).expect("unit determinant"),
    ])
}

pub fn generic_triple(seed: u64) -> Sl2Rep {
    let mut r = rng(seed);
    loop {
        let rep = Sl2Rep::new((0..3).map(|_| random_loxodromic(&mut r)).collect());
        if rep.is_nonelementary() {
            return rep;
        }
    }
}

pub fn kernel_report(seed: u64) -> KernelReport {
    let words = triple_words();
    let rep = commuting_triple();
    let g = rep.generators();
    let kernel = |rep: &Sl2Rep, w: &[Word]| trace_jacobian(rep, w).expect("valid words").kernel_dim();
    KernelReport {
        commuting_seven: kernel(&rep, &words),
        commuting_six: kernel(&rep, &words[..6]),
        commuting_delta: Vogt::of_triple(&g[0], &g[1], &g[2]).delta.norm(),
        generic: kernel(&generic_triple(seed), &words),
    }
}

/// Relative gap between `seq_n` and the fixed-point cross-ratio at `n`.
pub fn lemma1_error(rep: &Sl2Rep, n: usize) -> f64 {
    let oracle = LengthOracle::from_rep(rep.clone());
    let seq = lemma1_sequence(&oracle, &Word::generator(1), &Word::generator(2), n).expect("loxodromic powers");
    let g = rep.generators();
    let cr = pair_crossratio(&g[0], &g[1]).expect("loxodromic generators");
    rel(seq[n - 1], cr)
}

pub fn spectrum_checks(samples: usize, seed: u64) -> Vec<Check> {
    let mut r = rng(seed);
    let pairs = samples.clamp(1, 20);
    let mut lemma1 = 0.0f64;
    let mut conj = 0.0f64;
    for _ in 0..pairs {
        let rep = random_schottky_pair(&mut r);
        lemma1 = lemma1.max(lemma1_error(&rep, 24));
        let c = Sl2::random(&mut r);
        conj = conj
            .max(conjugacy_distance(&rep, &rep.conjugate_by(&c)).expect("same arity") / c.max_norm().powi(4).max(1.0));
        conj = conj.max(conjugacy_distance(&rep, &rep.complex_conjugate()).expect("same arity"));
    }
    let seq: Vec<f64> = (1..=12).map(|n| 3.0 + 2.0 * 0.5f64.powi(n)).collect();
    let est = crossratio_estimate(&seq)
        .map(|e| (e.value - 3.0).abs())
        .unwrap_or(f64::INFINITY);
    let rep = random_schottky_pair(&mut r);
    let dist = reconstruct(&LengthOracle::from_rep(rep.clone()), 2, ReconstructConfig::default())
        .map(|rec| conjugacy_distance(&rec.rep, &rep).expect("same arity"))
        .unwrap_or(f64::INFINITY);
    vec![
        Check::new("spectrum", "lemma1_at_24", lemma1, 1e-5),
        Check::new("spectrum", "geometric_extrapolation", est, 1e-9),
        Check::new("spectrum", "conjugacy_invariance", conj, 1e-12),
        Check::new("spectrum", "reconstruction_round_trip", dist, 1e-4),
    ]
}

/// Full `verify` output: the check matrix plus the identity and kernel
/// reports.
#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub readings: Vec<(AlgebraKind, Vec<ReadingResiduals>)>,
    pub kernels: KernelReport,
}

impl VerifyReport {
    pub fn run(samples: usize, seed: u64) -> Self {
        let mut checks = algebra_checks(samples, seed);
        checks.extend(nil_checks(samples, seed.wrapping_add(1)));
        checks.extend(ball_checks(samples, seed.wrapping_add(2)));
        checks.extend(equivariance_checks(samples, seed.wrapping_add(3)));
        checks.push(identity_check(samples, seed.wrapping_add(4)));
        checks.extend(translation_checks(samples, seed.wrapping_add(5)));
        checks.push(lemma2_check(samples, seed.wrapping_add(6)));
        checks.push(vogt_check(samples, seed.wrapping_add(7)));
        checks.push(gradient_check(samples, seed.wrapping_add(8)));
        let kernels = kernel_report(seed.wrapping_add(9));
        checks.push(Check::holds("sl2", "generic_triple_kernel_is_3", kernels.generic == 3));
        checks.extend(spectrum_checks(samples, seed.wrapping_add(10)));
        Self {
            checks,
            readings: identity_readings(samples, seed.wrapping_add(11)),
            kernels,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let w = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let _ = writeln!(
            s,
            "{:<12} {:<w$} {:<6} {:>10} {:>10}",
            "module", "check", "result", "worst", "tol"
        );
        for c in &self.checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(
                s,
                "{:<12} {:<w$} {:<6} {:>10.3e} {:>10.1e}",
                c.module, c.name, verdict, c.worst, c.tol
            );
        }
        let _ = writeln!(s, "\nidentity readings (max |lhs - rhs|, max |lhs - ball action|)");
        for (kind, rows) in &self.readings {
            for r in rows {
                let _ = writeln!(
                    s,
                    "{kind:?} {:<14} {:>10.3e} {:>10.3e}",
                    r.reading.name(),
                    r.max_vs_rhs,
                    r.max_vs_ball
                );
            }
        }
        let k = &self.kernels;
        let _ = writeln!(s, "\ntrace jacobian kernels (complex dimension)");
        let _ = writeln!(
            s,
            "commuting triple, 7 words: {} (|delta| = {:.1e})",
            k.commuting_seven, k.commuting_delta
        );
        let _ = writeln!(s, "commuting triple, first 6 words: {}", k.commuting_six);
        let _ = writeln!(s, "generic triple, 7 words: {}", k.generic);
        s
    }
}
