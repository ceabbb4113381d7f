use proptest::prelude::{any, prop_assert, prop_assert_eq, prop_assume, proptest};
use proptest::strategy::Strategy as _;

use qpd_core::equilibrium::{grid_best_response, haar_convergence, StrategySpace};
use qpd_core::par::Execution;
use qpd_core::prelude::*;
use qpd_core::protocol::{play_monte_carlo, pure_probabilities};

fn arb_su2() -> impl proptest::strategy::Strategy<Value = Unitary2> {
    any::<u64>().prop_map(|seed| SeededRng::new(seed).haar_sample())
}

fn arb_gamma() -> impl proptest::strategy::Strategy<Value = EntanglerSpec> {
    (0.0..=std::f64::consts::FRAC_PI_2).prop_map(|g| EntanglerSpec::new(g).unwrap())
}

proptest! {
    #[test]
    fn tensor_apply_preserves_norm(a in arb_su2(), b in arb_su2(), s in arb_su2(), t in arb_su2()) {
        // a generic normalized state: (s ⊗ t) applied to an entangled input
        let psi = tensor_apply(&s, &t, &initial_state(&EntanglerSpec::new(0.9).unwrap()));
        let out = tensor_apply(&a, &b, &psi);
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn end_to_end_norm(a in arb_su2(), b in arb_su2(), e in arb_gamma()) {
        prop_assert!((final_state(&a, &b, &e).norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sign_of_a_move_is_irrelevant(x in arb_su2(), y in arb_su2(), e in arb_gamma()) {
        let base = pure_probabilities(&x, &y, &e);
        prop_assert_eq!(base, pure_probabilities(&-x, &y, &e));
        prop_assert_eq!(base, pure_probabilities(&x, &-y, &e));
    }

    #[test]
    fn mixtures_are_linear(
        xs in proptest::collection::vec(arb_su2(), 1..5),
        raw in proptest::collection::vec(0.01f64..1.0, 5),
        y in arb_su2(),
        e in arb_gamma(),
    ) {
        let total: f64 = raw[..xs.len()].iter().sum();
        let comps: Vec<(f64, Unitary2)> =
            xs.iter().zip(&raw).map(|(x, w)| (w / total, *x)).collect();
        let wsum: f64 = comps.iter().map(|(w, _)| w).sum();
        prop_assume!((wsum - 1.0).abs() <= 1e-12);
        let m = Strategy::Mixed(Mixture::new(comps.clone()).unwrap());
        let got = play(&m, &y.into(), &PayoffTable::default(), &e).distribution.to_array();
        let mut want = [0.0; 4];
        for (w, x) in &comps {
            let p = pure_probabilities(x, &y, &e);
            for k in 0..4 {
                want[k] += w * p[k];
            }
        }
        for k in 0..4 {
            prop_assert!((got[k] - want[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn mirror_preserves_su2(x in arb_su2()) {
        let y = mirror(&x);
        prop_assert!((y.det().re - 1.0).abs() < 1e-10 && y.det().im.abs() < 1e-10);
        prop_assert!((y * y.dagger()).max_abs_diff(&Unitary2::IDENTITY) < 1e-10);
    }
}

#[test]
fn mirror_consistency_through_protocol() {
    let e = EntanglerSpec::maximal();
    let id = Unitary2::IDENTITY;
    let mut rng = SeededRng::new(31);
    for _ in 0..1000 {
        let x = rng.haar_sample();
        let f = state_fidelity(&final_state(&x, &id, &e), &final_state(&id, &mirror(&x), &e));
        assert!(f > 1.0 - 1e-10);
    }
}

#[test]
fn haar_analytic_is_identical_for_any_move() {
    let (t, e) = (PayoffTable::default(), EntanglerSpec::maximal());
    let mut rng = SeededRng::new(12);
    let reference = play(&Strategy::HaarRandom, &Unitary2::IDENTITY.into(), &t, &e);
    for _ in 0..100 {
        let y = rng.haar_sample();
        assert_eq!(play(&Strategy::HaarRandom, &y.into(), &t, &e), reference);
        assert_eq!(play(&y.into(), &Strategy::HaarRandom, &t, &e), reference);
    }
}

#[test]
fn haar_monte_carlo_converges_as_inverse_sqrt() {
    let e = EntanglerSpec::maximal();
    let bob = Strategy::Pure(ewl_unitary(&EwlParams::new(1.0, 0.3).unwrap()));
    let sizes = [1_000, 10_000, 100_000];
    let series = haar_convergence(&bob, &sizes, 42, &e, Execution::Parallel);
    // deviation * sqrt(N) relative to a single-outcome binomial standard error
    let sigma = (0.25f64 * 0.75).sqrt();
    let scaled: Vec<f64> = series
        .iter()
        .map(|c| c.max_deviation * (c.samples as f64).sqrt() / sigma)
        .collect();
    for s in &scaled {
        assert!((0.25..=4.0).contains(s), "scaled deviations {scaled:?}");
    }
}

#[test]
fn monte_carlo_play_agrees_with_analytic() {
    let (t, e) = (PayoffTable::default(), EntanglerSpec::maximal());
    let q = Strategy::from(NamedStrategy::Q);
    let mc = play_monte_carlo(&Strategy::HaarRandom, &q, &t, &e, 50_000, 3, Execution::Parallel);
    assert!(mc.distribution.max_abs_diff(&OutcomeDistribution::UNIFORM) < 4.0 * (0.1875f64 / 50_000.0).sqrt());
    let seq = play_monte_carlo(&Strategy::HaarRandom, &q, &t, &e, 50_000, 3, Execution::Sequential);
    assert_eq!(mc, seq);
}

#[test]
fn grid_best_response_climbs_with_nested_grids() {
    let (t, e) = (PayoffTable::default(), EntanglerSpec::maximal());
    let mut rng = SeededRng::new(404);
    for _ in 0..5 {
        let x = Strategy::Pure(rng.haar_sample());
        let mut prev = f64::NEG_INFINITY;
        // alpha, delta: n -> 2n; beta: m -> 2m - 1 keeps every old point
        for (n, m) in [(4, 3), (8, 5), (16, 9), (32, 17)] {
            let space = StrategySpace::full(n, m, n).unwrap();
            let br = grid_best_response(&x, Role::B, &space, &t, &e, Execution::Parallel).unwrap();
            assert!(br.payoff <= 5.0 + 1e-12);
            assert!(br.payoff >= prev - 1e-12, "{} < {prev}", br.payoff);
            prev = br.payoff;
        }
        assert!(prev > 4.5, "finest grid only reached {prev}");
    }
}

#[test]
fn parser_round_trips_strategy_display() {
    let mut rng = SeededRng::new(6);
    for _ in 0..50 {
        let (u, v) = (rng.haar_sample(), rng.haar_sample());
        let m = Strategy::Mixed(Mixture::new(vec![(0.125, u), (0.875, v)]).unwrap());
        assert_eq!(parse_strategy(&m.to_string()).unwrap(), m);
    }
}
