use num_complex::Complex64 as C;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rank1kit_core::algebra::{AlgebraElement, AlgebraKind};
use rank1kit_core::ballmodel::{coshdist, crossratio_ball, stereo, stereo_inv, BallPoint};
use rank1kit_core::isometry::{identity_residual, GroupMatrix, IdentityReading, NormalIsometry};
use rank1kit_core::nilboundary::{crossratio_nil, NilPoint, SpaceConfig};
use rank1kit_core::sl2::{trace_gauge, vogt, Sl2, Sl2Rep, Vogt, Word};
use rank1kit_core::spectrum::{conjugacy_distance, fixed_points, RiemannPoint};

fn kind() -> impl Strategy<Value = AlgebraKind> {
    prop_oneof![
        Just(AlgebraKind::R),
        Just(AlgebraKind::C),
        Just(AlgebraKind::H),
        Just(AlgebraKind::O)
    ]
}

fn config() -> impl Strategy<Value = SpaceConfig> {
    prop_oneof![
        Just((AlgebraKind::R, 2)),
        Just((AlgebraKind::R, 3)),
        Just((AlgebraKind::C, 2)),
        Just((AlgebraKind::C, 3)),
        Just((AlgebraKind::H, 2)),
        Just((AlgebraKind::H, 3)),
        Just((AlgebraKind::O, 2)),
    ]
    .prop_map(|(k, m)| SpaceConfig::new(k, m).unwrap())
}

/// Configurations carried by the matrix model.
fn matrix_config() -> impl Strategy<Value = SpaceConfig> {
    prop_oneof![
        Just((AlgebraKind::R, 2)),
        Just((AlgebraKind::R, 3)),
        Just((AlgebraKind::C, 2)),
        Just((AlgebraKind::H, 2)),
    ]
    .prop_map(|(k, m)| SpaceConfig::new(k, m).unwrap())
}

fn element(kind: AlgebraKind) -> impl Strategy<Value = AlgebraElement> {
    proptest::collection::vec(-3.0f64..3.0, kind.dim()).prop_map(move |c| AlgebraElement::new(kind, &c).unwrap())
}

fn triple() -> impl Strategy<Value = (AlgebraElement, AlgebraElement, AlgebraElement)> {
    kind().prop_flat_map(|k| (element(k), element(k), element(k)))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

fn word() -> impl Strategy<Value = Word> {
    proptest::collection::vec(
        prop_oneof![Just(1), Just(-1), Just(2), Just(-2), Just(3), Just(-3)],
        0..10,
    )
    .prop_map(|l| Word::new(l).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 128,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn norm_is_multiplicative((x, y, _) in triple()) {
        let p = x * y;
        prop_assert!(close(p.norm(), x.norm() * y.norm(), 1e-12));
    }

    #[test]
    fn conjugate_product_is_norm((x, _, _) in triple()) {
        let p = x * x.conj();
        prop_assert!(close(p.re(), x.norm_sqr(), 1e-12));
        prop_assert!(p.im().norm() <= 1e-12 * x.norm_sqr().max(1.0));
        prop_assert!(p.approx_eq(&(x.conj() * x), 1e-12 * x.norm_sqr().max(1.0)));
    }

    #[test]
    fn alternative_laws((x, y, _) in triple()) {
        let tol = 1e-10 * (x.norm_sqr() * y.norm()).max(1.0);
        prop_assert!((x * (x * y)).approx_eq(&((x * x) * y), tol));
        prop_assert!(((y * x) * x).approx_eq(&(y * (x * x)), tol));
        prop_assert!(((x * y) * x).approx_eq(&(x * (y * x)), tol));
    }

    #[test]
    fn conjugation_reverses_products((x, y, _) in triple()) {
        let tol = 1e-12 * (x.norm() * y.norm()).max(1.0);
        prop_assert!((x * y).conj().approx_eq(&(y.conj() * x.conj()), tol));
    }

    #[test]
    fn associative_below_octonions((x, y, z) in triple()) {
        let a = AlgebraElement::associator(&x, &y, &z).unwrap();
        if x.kind().is_associative() {
            prop_assert!(a.norm() <= 1e-11 * (x.norm() * y.norm() * z.norm()).max(1.0));
        }
    }

    #[test]
    fn embedding_is_a_homomorphism((x, y, _) in triple()) {
        let ox = x.embed(AlgebraKind::O).unwrap();
        let oy = y.embed(AlgebraKind::O).unwrap();
        let tol = 1e-12 * (x.norm() * y.norm()).max(1.0);
        prop_assert!((ox * oy).approx_eq(&(x * y).embed(AlgebraKind::O).unwrap(), tol));
    }

    #[test]
    fn inverse_is_two_sided((x, _, _) in triple()) {
        prop_assume!(x.norm() > 1e-3);
        let one = AlgebraElement::from_real(x.kind(), 1.0);
        let inv = x.inv().unwrap();
        prop_assert!((x * inv).approx_eq(&one, 1e-10));
        prop_assert!((inv * x).approx_eq(&one, 1e-10));
    }

    #[test]
    fn nil_group_axioms(config in config(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b, c) = (NilPoint::random(config, &mut r), NilPoint::random(config, &mut r), NilPoint::random(config, &mut r));
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(left.approx_eq(&right, 1e-9));
        prop_assert!(a.mul(&a.inv().unwrap()).unwrap().approx_eq(&NilPoint::identity(config), 1e-10));
        prop_assert!(a.inv().unwrap().mul(&a).unwrap().approx_eq(&NilPoint::identity(config), 1e-10));
        prop_assert!(a.mul(&NilPoint::identity(config)).unwrap().approx_eq(&a, 1e-12));
    }

    #[test]
    fn qnorm_is_homogeneous(config in config(), seed in any::<u64>(), s in -3.0f64..3.0) {
        let g = NilPoint::random(config, &mut rng(seed));
        let lhs = g.dilate(s).qnorm().unwrap();
        prop_assert!(close(lhs, (-s).exp() * g.qnorm().unwrap(), 1e-10));
    }

    #[test]
    fn dist_is_symmetric_and_left_invariant(config in config(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let (g, h, k) = (NilPoint::random(config, &mut r), NilPoint::random(config, &mut r), NilPoint::random(config, &mut r));
        let d = g.dist(&h).unwrap();
        prop_assert!(close(d, h.dist(&g).unwrap(), 1e-10));
        let moved = k.mul(&g).unwrap().dist(&k.mul(&h).unwrap()).unwrap();
        prop_assert!(close(d, moved, 1e-8));
        // sqrt of a rounding-level gauge
        prop_assert!(g.dist(&g).unwrap() <= 1e-7);
    }

    #[test]
    fn crossratio_reduction(config in config(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let (g1, g2) = (NilPoint::random(config, &mut r), NilPoint::random(config, &mut r));
        let (o, inf) = (NilPoint::identity(config), NilPoint::infinity(config));
        let g2i = g2.inv().unwrap();
        let lhs = crossratio_nil(&o, &g1, &inf, &g2).unwrap();
        let rhs = crossratio_nil(&g2i, &g2i.mul(&g1).unwrap(), &inf, &o).unwrap();
        prop_assert!(close(lhs, rhs, 1e-9));
    }

    #[test]
    fn stereo_round_trip(config in config(), seed in any::<u64>()) {
        let g = NilPoint::random(config, &mut rng(seed));
        let x = stereo(&g);
        prop_assert!((x.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!(stereo_inv(&x).unwrap().approx_eq(&g, 1e-9));
    }

    #[test]
    fn projection_factorization(k in 0.0f64..5.0, t in 0.0f64..5.0, q in 0.0f64..5.0) {
        let (k2, t2, q2) = (k * k, t * t, q * q);
        let lhs = (k2 * k2 + k2 + t2 + q2).powi(2) + t2 + q2;
        let rhs = (k2 * k2 + t2 + q2) * ((1.0 + k2).powi(2) + t2 + q2);
        prop_assert!(close(lhs, rhs, 1e-12));
    }

    #[test]
    fn ball_and_nil_crossratios_agree(config in config(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let g: Vec<_> = (0..4).map(|_| NilPoint::random(config, &mut r)).collect();
        let nil = crossratio_nil(&g[0], &g[1], &g[2], &g[3]).unwrap();
        let x: Vec<_> = g.iter().map(stereo).collect();
        let ball = crossratio_ball(&x[0], &x[1], &x[2], &x[3]).unwrap();
        prop_assert!(close(nil, ball, 1e-8));
    }

    #[test]
    fn crossratio_against_poles_is_gauge_ratio(config in config(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let (g1, g2) = (NilPoint::random(config, &mut r), NilPoint::random(config, &mut r));
        let south = BallPoint::on_axis(config, -1.0);
        let north = BallPoint::on_axis(config, 1.0);
        let cr = crossratio_ball(&south, &north, &stereo(&g1), &stereo(&g2)).unwrap();
        let expected = g2.inv().unwrap().gauge().unwrap().norm() / g1.inv().unwrap().gauge().unwrap().norm();
        prop_assert!(close(cr, expected, 1e-8));
    }

    #[test]
    fn matrices_preserve_distance_and_crossratio(config in matrix_config(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = GroupMatrix::random_form_preserving(config, &mut r).unwrap();
        let pts: Vec<_> = (0..4).map(|_| stereo(&NilPoint::random(config, &mut r))).collect();
        let cr = crossratio_ball(&pts[0], &pts[1], &pts[2], &pts[3]).unwrap();
        let moved: Vec<_> = pts.iter().map(|p| a.act(p).unwrap()).collect();
        let cr2 = crossratio_ball(&moved[0], &moved[1], &moved[2], &moved[3]).unwrap();
        prop_assert!(close(cr, cr2, 1e-7));
        let inner = |s: f64| BallPoint::on_axis(config, s);
        let (x, y) = (inner(0.3), inner(-0.5));
        let d = coshdist(&x, &y).unwrap();
        let d2 = coshdist(&a.act(&x).unwrap(), &a.act(&y).unwrap()).unwrap();
        prop_assert!(close(d, d2, 1e-8));
    }

    #[test]
    fn normal_form_is_equivariant(config in config(), seed in any::<u64>(), s in -2.0f64..2.0) {
        let mut r = rng(seed);
        let iso = NormalIsometry::random(config, s, &mut r);
        let g = NilPoint::random(config, &mut r);
        let via_nil = stereo(&iso.act_nil(&g).unwrap());
        let via_ball = iso.act_ball(&stereo(&g)).unwrap();
        prop_assert!(via_nil.approx_eq(&via_ball, 1e-8));
    }

    #[test]
    fn corrected_identity_holds(k in prop_oneof![Just(AlgebraKind::H), Just(AlgebraKind::O)], seed in any::<u64>()) {
        let mut r = rng(seed);
        let s: f64 = r.random_range(-2.0..2.0);
        let knorm: f64 = r.random_range(0.0..2.0);
        let q = AlgebraElement::random_imaginary(k, &mut r);
        let nu = AlgebraElement::random_unit(k, &mut r);
        prop_assert!(identity_residual(IdentityReading::Corrected, s, &q, &nu, knorm).unwrap() < 1e-9);
    }

    #[test]
    fn length_gauge_relation(seed in any::<u64>()) {
        let m = Sl2::random(&mut rng(seed));
        if let Ok(l) = m.length() {
            let expected = 2.0 * ((l / 2.0).exp() + (-l / 2.0).exp());
            prop_assert!(close(m.length_gauge(), expected, 1e-9));
        }
        prop_assert!(close(trace_gauge(m.trace()), m.length_gauge(), 0.0));
    }

    #[test]
    fn trace_identities(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b) = (Sl2::random(&mut r), Sl2::random(&mut r));
        let tab = a.mul(&b).trace();
        let tabi = a.mul(&b.inverse()).trace();
        let scale = (a.max_norm() * b.max_norm()).powi(2).max(1.0);
        prop_assert!((tab + tabi - a.trace() * b.trace()).norm() <= 1e-10 * scale);
        prop_assert!((a.inverse().trace() - a.trace()).norm() <= 1e-10 * scale);
        prop_assert!((a.mul(&b).trace() - b.mul(&a).trace()).norm() <= 1e-10 * scale);
    }

    #[test]
    fn vogt_root_is_the_other_triple_trace(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (x, y, z) = (Sl2::random(&mut r), Sl2::random(&mut r), Sl2::random(&mut r));
        let v = Vogt::of_triple(&x, &y, &z);
        let t = x.mul(&y).mul(&z).trace();
        let t2 = x.mul(&z).mul(&y).trace();
        let scale = (x.max_norm() * y.max_norm() * z.max_norm()).powi(2).max(1.0);
        prop_assert!(v.residual(t) <= 1e-9 * scale * scale);
        prop_assert!(((t + t2) - v.p).norm() <= 1e-9 * scale);
        prop_assert!(((t * t2) - v.q).norm() <= 1e-9 * scale * scale);
    }

    #[test]
    fn vogt_delta_is_consistent(x in proptest::array::uniform6(-3.0f64..3.0)) {
        let c: Vec<C> = x.iter().map(|&v| C::new(v, 0.5 * v)).collect();
        let v = vogt(c[0], c[1], c[2], c[3], c[4], c[5]);
        prop_assert!((v.delta - (v.p * v.p - v.q * 4.0)).norm() <= 1e-12 * v.delta.norm().max(1.0));
        for root in v.roots {
            prop_assert!(v.residual(root) <= 1e-9 * (v.p.norm_sqr() + v.q.norm()).max(1.0));
        }
    }

    #[test]
    fn word_reduction(w in word()) {
        let red = w.reduced();
        prop_assert_eq!(red.reduced(), red.clone());
        prop_assert!(red.letters().windows(2).all(|p| p[0] != -p[1]));
        prop_assert!(w.concat(&w.inverse()).reduced().is_empty());
    }

    #[test]
    fn word_canonical_is_a_class_invariant(w in word(), shift in 0usize..10) {
        let c = w.canonical();
        prop_assert_eq!(c.canonical(), c.clone());
        let letters = w.letters();
        if !letters.is_empty() {
            let k = shift % letters.len();
            let mut rotated = letters[k..].to_vec();
            rotated.extend_from_slice(&letters[..k]);
            prop_assert_eq!(Word::new(rotated).unwrap().canonical(), c.clone());
        }
        prop_assert_eq!(w.inverse().canonical(), c);
    }

    #[test]
    fn word_text_round_trip(w in word()) {
        let parsed: Word = w.to_string().parse().unwrap();
        prop_assert_eq!(parsed, w);
    }

    #[test]
    fn word_lengths_are_conjugation_invariant(w in word(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let rep = Sl2Rep::new((0..3).map(|_| Sl2::random(&mut r)).collect());
        let g = Sl2::random(&mut r);
        let conj = rep.conjugate_by(&g);
        let a = rep.trace_word(&w).unwrap();
        let b = conj.trace_word(&w).unwrap();
        prop_assert!((a - b).norm() <= 1e-8 * a.norm().max(1.0));
        // the length is not Lipschitz near parabolics
        if let Ok(l) = rep.evaluate(&w).unwrap().length() {
            prop_assume!(l > 1e-3);
            prop_assert!(close(l, conj.evaluate(&w).unwrap().spectral_length(), 1e-7));
        }
    }

    #[test]
    fn conjugacy_distance_ignores_conjugation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rep = Sl2Rep::new((0..2).map(|_| Sl2::random(&mut r)).collect());
        let g = Sl2::random(&mut r);
        let d = conjugacy_distance(&rep, &rep.conjugate_by(&g)).unwrap();
        prop_assert!(d <= 1e-7, "{d}");
    }

    #[test]
    fn fixed_points_are_equivariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, g) = (Sl2::random(&mut r), Sl2::random(&mut r));
        prop_assume!(a.length().map(|l| l > 0.1).unwrap_or(false));
        let fp = fixed_points(&a).unwrap();
        let fc = fixed_points(&g.mul(&a).mul(&g.inverse())).unwrap();
        let moved: RiemannPoint = fp.attracting.mobius(&g);
        prop_assert!(moved.chordal(&fc.attracting) < 1e-6);
        prop_assert!(fp.repelling.mobius(&g).chordal(&fc.repelling) < 1e-6);
    }
}
