mod common;

use common::*;
use nilclose_core::closure::polymap_closure;
use nilclose_core::matrix::Ring;
use nilclose_core::nilcore::{GroupSpec, PolyMatrix, Shape};
use nilclose_core::poly::Poly;
use nilclose_core::verify::{
    chart_ball, coverage, directed_max, sample_orbit, sample_predicted, verify_polymap, PredictedModel, SamplePlan,
    Strategy, Tolerances,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// t -> exp(t E12 + theta t E23): dense in the Heisenberg nilmanifold.
fn heisenberg_line() -> (PolyMatrix, GroupSpec) {
    let f = sqrt2();
    let t = Poly::var(&f, 1, 0);
    let x = e(&f, 3, 1, 2).add(&e(&f, 3, 2, 3).scale(&f.theta()));
    let entries = x.matrix().map(|s| Poly::constant(s.clone(), 1).mul(&t));
    let fm = PolyMatrix::exp_product(&[PolyMatrix::new(entries, Shape::Nilpotent).unwrap()]).unwrap();
    (fm, GroupSpec::full(&f, 3))
}

#[test]
fn random_plans_are_deterministic() {
    let (fm, g) = heisenberg_line();
    let r = polymap_closure(&fm, &g).unwrap();
    let model = PredictedModel::from_result(&r).unwrap();
    let orbit = SamplePlan::cube(1, 0.0, 1000.0, Strategy::Random { seed: 7 }, 4000).unwrap();
    let pred = model.default_plan(Strategy::Random { seed: 8 }, 1000).unwrap();
    let tol = Tolerances::default();
    let (a, sa) = verify_polymap(&fm, &r, &orbit, &pred, &tol).unwrap();
    let (b, sb) = verify_polymap(&fm, &r, &orbit, &pred, &tol).unwrap();
    assert_eq!(a, b);
    assert_eq!(sa.len(), sb.len());
    assert!(sa.iter().zip(&sb).all(|(x, y)| x.rep == y.rep && x.gamma == y.gamma));

    let other = SamplePlan::cube(1, 0.0, 1000.0, Strategy::Random { seed: 9 }, 4000).unwrap();
    let (c, _) = verify_polymap(&fm, &r, &other, &pred, &tol).unwrap();
    assert_ne!(a.max_predicted_to_orbit, c.max_predicted_to_orbit);
}

#[test]
fn nested_orbits_never_lose_density_or_coverage() {
    let (fm, g) = heisenberg_line();
    let r = polymap_closure(&fm, &g).unwrap();
    let ball = chart_ball(r.coset.algebra().group());
    for strategy in [Strategy::LowDiscrepancy, Strategy::Random { seed: 3 }] {
        let pred_plan = PredictedModel::from_result(&r).unwrap().default_plan(strategy, 2000).unwrap();
        let predicted = sample_predicted(&r, &pred_plan).unwrap();
        let big = SamplePlan::cube(1, 0.0, 5000.0, strategy, 40_000).unwrap();
        let all = sample_orbit(&fm, &big).unwrap();
        let mut last_d = f64::INFINITY;
        let mut last_c = 0.0;
        for n in [2_500, 5_000, 10_000, 20_000, 40_000] {
            // Plans are prefix-nested, so the smaller orbit is a prefix of the larger one.
            let orbit = sample_orbit(&fm, &big.with_count(n).unwrap()).unwrap();
            assert!(orbit.iter().zip(&all).all(|(x, y)| x.rep == y.rep));
            let d = directed_max(&predicted, &orbit, &ball);
            let c = coverage(&orbit, &predicted, &ball, 0.125);
            assert!(d <= last_d, "{strategy:?}, N = {n}: density {d} > {last_d}");
            assert!(c >= last_c, "{strategy:?}, N = {n}: coverage {c} < {last_c}");
            last_d = d;
            last_c = c;
        }
        assert!(last_d < 0.2 && last_c > 0.95, "{strategy:?}: {last_d}, {last_c}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn orbit_samples_lie_on_the_closure(seed in any::<u64>(), n in 3usize..=4, nvars in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = sqrt2();
        let g = GroupSpec::full(&f, n);
        let fm = rand_polymap(&mut rng, &f, n, nvars, 2);
        let r = polymap_closure(&fm, &g).unwrap();
        let model = PredictedModel::from_result(&r).unwrap();
        let plan = SamplePlan::new(vec![-3.0; nvars], vec![3.0; nvars], Strategy::Random { seed }, 200).unwrap();
        for p in sample_orbit(&fm, &plan).unwrap() {
            prop_assert!(model.residual(&p) <= 1e-9, "residual {}", model.residual(&p));
        }
    }
}
