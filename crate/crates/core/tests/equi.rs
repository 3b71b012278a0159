mod common;

use std::f64::consts::PI;

use common::*;
use nilclose_core::closure::{torus_curve_closure, MonomialCurve};
use nilclose_core::equi::{cud_numeric, cud_verdict_polynomial, nonzero_frequencies, weyl_sum, NumericCurve};
use nilclose_core::expr::{parse, Context, Expr};
use nilclose_core::field::{rat, Field, Rational};
use nilclose_core::linalg::Vector;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dot(m: &[i64], v: &[f64]) -> f64 {
    m.iter().zip(v).map(|(a, b)| *a as f64 * b).sum()
}

fn linear_closed_form(alpha: f64, t: f64) -> Complex64 {
    if alpha == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let z = Complex64::new(0.0, 2.0 * PI * alpha * t);
    (z.exp() - 1.0) / z
}

fn rand_frequency(rng: &mut ChaCha8Rng, dim: usize) -> Vec<i64> {
    loop {
        let m: Vec<i64> = (0..dim).map(|_| rng.gen_range(-3..=3)).collect();
        if m.iter().any(|&x| x != 0) {
            return m;
        }
    }
}

/// Random curve with exponents in `1..=deg` and an optional constant term.
fn rand_monomial_curve(rng: &mut ChaCha8Rng, f: &Field, dim: usize, deg: u32) -> MonomialCurve {
    let mut terms: Vec<(Rational, Vector)> = Vec::new();
    for a in 0..=deg {
        if a > 0 && !rng.gen_bool(0.7) {
            continue;
        }
        terms.push((rat(a as i64), (0..dim).map(|_| if rng.gen_bool(0.7) { rand_scalar(rng, f) } else { f.zero() }).collect()));
    }
    MonomialCurve::new(f, dim, terms).unwrap()
}

#[test]
fn linear_curves_match_closed_form() {
    let f = sqrt2();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..20 {
        let dim = rng.gen_range(1..=3);
        let a: Vector = (0..dim).map(|_| rand_scalar(&mut rng, &f)).collect();
        let af: Vec<f64> = a.iter().map(|s| s.to_f64()).collect();
        let sigma = MonomialCurve::new(&f, dim, vec![(rat(1), a)]).unwrap();
        let curve = NumericCurve::from_monomial(&sigma).unwrap();
        let m = rand_frequency(&mut rng, dim);
        for t in [10.0, 100.0, 1000.0] {
            let w = weyl_sum(&curve, &m, t, 1e-8).unwrap();
            let exact = linear_closed_form(dot(&m, &af), t);
            assert!((w - exact).norm() < 1e-6, "a = {af:?}, m = {m:?}, T = {t}: {w} vs {exact}");
        }
    }
}

#[test]
fn verdict_agrees_with_torus_closure_and_probes() {
    let f = sqrt2();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut non_dense = 0;
    for _ in 0..30 {
        let dim = rng.gen_range(1..=3);
        let sigma = rand_monomial_curve(&mut rng, &f, dim, 3);
        let closure = torus_curve_closure(&sigma).unwrap();
        let verdict = cud_verdict_polynomial(&sigma).unwrap();
        assert_eq!(verdict.cud, closure.dense);
        assert_eq!(verdict.cud, verdict.witnesses.is_empty());

        // t <m, sigma'(t)> is a polynomial without constant term: bounded iff m is a relation.
        // Rational rescaling keeps the relations and keeps the oscillation count small.
        let k = Rational::new(1.into(), 1000.into());
        let scaled: Vec<(Rational, Vector)> =
            sigma.terms().iter().map(|(a, v)| (a.clone(), v.iter().map(|x| x.scale(&k)).collect())).collect();
        let curve = NumericCurve::from_monomial(&MonomialCurve::new(&f, dim, scaled).unwrap()).unwrap();
        let ms = nonzero_frequencies(dim, 6);
        let report = cud_numeric(&curve, &ms, &[10.0, 100.0], 1e-6).unwrap();
        let relations: Vec<Vec<i64>> = ms
            .iter()
            .filter(|m| {
                let v: Vector = m.iter().map(|&x| f.from_int(x)).collect();
                closure.relations.contains(&v).unwrap()
            })
            .cloned()
            .collect();
        assert_eq!(report.verdict.bounded_probes, relations);
        for m in &relations {
            non_dense += 1;
            let w = weyl_sum(&curve, m, 100.0, 1e-8).unwrap();
            assert!((w.norm() - 1.0).abs() < 1e-6, "relation {m:?} has |W| = {}", w.norm());
            assert!(!report.verdict.cud_consistent);
        }
    }
    assert!(non_dense > 0, "no relations exercised");
}

fn frequency() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-3i64..=3, 2).prop_filter("nonzero", |m| m.iter().any(|&x| x != 0))
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(p, q)| Rational::new(p.into(), q.into()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weyl_modulus_at_most_one(
        c1 in small_rational(), c2 in small_rational(), c3 in small_rational(),
        m in frequency(), t in 1.0f64..30.0,
    ) {
        let f = Field::rationals();
        let q = |c: &Rational| f.from_rational(c.clone());
        // The cubic coefficient is kept small so every case fits the evaluation budget.
        let cubic = f.from_rational(c1.clone() / Rational::from_integer(16.into()));
        let sigma = MonomialCurve::new(&f, 2, vec![
            (rat(1), vec![q(&c1), q(&c2)]),
            (rat(2), vec![q(&c3), f.zero()]),
            (rat(3), vec![f.zero(), cubic]),
        ]).unwrap();
        let curve = NumericCurve::from_monomial(&sigma).unwrap();
        let w = weyl_sum(&curve, &m, t, 1e-6).unwrap();
        prop_assert!(w.norm() <= 1.0 + 1e-6);
    }

    #[test]
    fn weyl_conjugate_and_integer_shift_invariance(
        c1 in small_rational(), c2 in small_rational(), k in -5i64..=5,
        m in frequency(), t in 1.0f64..40.0,
    ) {
        let f = sqrt2();
        let a = vec![f.from_rational(c1.clone()), f.theta().scale(&c2)];
        let base = MonomialCurve::new(&f, 2, vec![(rat(2), a.clone())]).unwrap();
        let shifted = MonomialCurve::new(&f, 2, vec![(rat(0), vec![f.from_int(k), f.from_int(-k)]), (rat(2), a)]).unwrap();
        let cb = NumericCurve::from_monomial(&base).unwrap();
        let cs = NumericCurve::from_monomial(&shifted).unwrap();
        let tol = 1e-6;
        let w = weyl_sum(&cb, &m, t, tol).unwrap();
        let neg: Vec<i64> = m.iter().map(|x| -x).collect();
        let wn = weyl_sum(&cb, &neg, t, tol).unwrap();
        prop_assert!((wn - w.conj()).norm() < 1e-9);
        let ws = weyl_sum(&cs, &m, t, tol).unwrap();
        prop_assert!((ws - w).norm() <= 2.0 * tol);
    }
}

fn var_name() -> impl Strategy<Value = String> {
    prop_oneof![Just("t".to_string()), Just("s".to_string()), (1u32..30).prop_map(|i| format!("x{i}"))]
}

fn expr_tree() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0i64..50, 1i64..7).prop_map(|(p, q)| Expr::Num(Rational::new(p.into(), q.into()))),
        Just(Expr::Theta),
        var_name().prop_map(Expr::Var),
        var_name().prop_map(Expr::Ln1p),
    ];
    leaf.prop_recursive(5, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            (inner, 0u32..6).prop_map(|(a, k)| Expr::Pow(Box::new(a), k)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn display_parse_round_trip(e in expr_tree()) {
        let text = e.to_string();
        let back = parse(&text, Context::NumericCurve).unwrap();
        prop_assert_eq!(back, e, "{}", text);
    }
}

fn curve_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0i64..9, 1i64..4).prop_map(|(p, q)| Expr::Num(Rational::new(p.into(), q.into()))),
        Just(Expr::Theta),
        Just(Expr::Var("t".into())),
        Just(Expr::Ln1p("t".into())),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            (inner, 0u32..4).prop_map(|(a, k)| Expr::Pow(Box::new(a), k)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn derivative_matches_finite_difference(e in curve_expr(), t in 0.5f64..5.0) {
        let c = e.compile(2f64.sqrt(), &["t"]).unwrap();
        let d = c.derivative(0).simplify();
        let h = 1e-5;
        let fd = (c.eval(&[t + h]) - c.eval(&[t - h])) / (2.0 * h);
        let exact = d.eval(&[t]);
        let scale = 1.0 + exact.abs() + c.eval(&[t]).abs();
        prop_assert!((fd - exact).abs() <= 1e-5 * scale, "{}: {} vs {}", e, fd, exact);
    }
}
