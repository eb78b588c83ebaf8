use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use smir_core::meanfield::*;

fn params() -> impl Strategy<Value = MeanFieldParams> {
    (0.01f64..1.0, 1.0f64..5.0, 0.02f64..1.0, 0.05f64..0.95, 0.5f64..=1.0, 1e-4f64..0.05).prop_map(
        |(beta_o, lambda, gamma, mu, alpha, epsilon)| MeanFieldParams {
            beta_o,
            lambda,
            gamma,
            mu,
            alpha,
            epsilon,
        },
    )
}

fn random_state(rng: &mut ChaCha8Rng, mu: f64) -> MeanFieldState {
    let split = |rng: &mut ChaCha8Rng, total: f64| {
        let a: f64 = rng.random();
        let b: f64 = rng.random();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        [total * lo, total * (hi - lo), total * (1.0 - hi)]
    };
    let o = split(rng, mu);
    let m = split(rng, 1.0 - mu);
    MeanFieldState::from_array([o[0], o[1], o[2], m[0], m[1], m[2]])
}

#[test]
fn homophily_form_reduces_to_well_mixed_at_one_half() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = MeanFieldParams {
            beta_o: rng.random_range(0.01..2.0),
            lambda: rng.random_range(1.0..5.0),
            gamma: rng.random_range(0.01..1.0),
            mu: rng.random_range(0.0..=1.0),
            alpha: 0.5,
            epsilon: 0.001,
        };
        let s = random_state(&mut rng, p.mu);
        let a = derivatives(&s, &p);
        let b = derivatives_well_mixed(&s, &p);
        for k in 0..6 {
            worst = worst.max((a[k] - b[k]).abs());
        }
    }
    assert!(worst <= 1e-15, "max deviation {worst:e}");
}

#[test]
fn rk4_converges_at_fourth_order() {
    let p = MeanFieldParams {
        lambda: 2.0,
        alpha: 0.7,
        ..MeanFieldParams::default()
    };
    let reference = integrate(&p, &SolverConfig::rk4(1.0 / 256.0, 60)).unwrap();
    let err = |dt: f64| {
        let t = integrate(&p, &SolverConfig::rk4(dt, 60)).unwrap();
        t.states
            .iter()
            .zip(&reference.states)
            .flat_map(|(a, b)| {
                let (a, b) = (a.to_array(), b.to_array());
                (0..6).map(move |k| (a[k] - b[k]).abs())
            })
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (err(0.5), err(0.25));
    let ratio = e1 / e2;
    assert!(ratio > 12.0 && ratio < 20.0, "error ratio {ratio} ({e1:e} / {e2:e})");
}

#[test]
fn threshold_behaviour_at_lambda_one() {
    for (r0, epidemic) in [(0.5, false), (0.9, false), (1.5, true), (2.5, true)] {
        let p = MeanFieldParams {
            beta_o: r0 * 0.2,
            ..MeanFieldParams::default()
        };
        let total = summarize(&integrate(&p, &SolverConfig::default()).unwrap()).overall.total_infected;
        let excess = total - p.epsilon;
        if epidemic {
            assert!(excess > 0.1, "R0 {r0}: {excess}");
        } else {
            assert!(excess < 0.01, "R0 {r0}: {excess}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn population_is_conserved(p in params()) {
        for solver in [SolverConfig::euler(0.1, 80), SolverConfig::rk4(0.1, 80)] {
            let t = integrate(&p, &solver).unwrap();
            for s in &t.states {
                let a = s.to_array();
                prop_assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                prop_assert!((a[0] + a[1] + a[2] - p.mu).abs() < 1e-12);
                prop_assert!(a.iter().all(|&v| v >= -1e-12));
            }
        }
    }

    #[test]
    fn susceptibles_fall_and_recovered_rise(p in params()) {
        let t = integrate(&p, &SolverConfig::rk4(0.1, 80)).unwrap();
        for w in t.states.windows(2) {
            prop_assert!(w[1].s_o <= w[0].s_o + 1e-15 && w[1].s_m <= w[0].s_m + 1e-15);
            prop_assert!(w[1].r_o >= w[0].r_o - 1e-15 && w[1].r_m >= w[0].r_m - 1e-15);
        }
    }

    #[test]
    fn derivatives_sum_to_zero(p in params(), seed in any::<u64>()) {
        let s = random_state(&mut ChaCha8Rng::seed_from_u64(seed), p.mu);
        let d = derivatives(&s, &p);
        prop_assert!(d.iter().sum::<f64>().abs() < 1e-15);
        prop_assert!((d[0] + d[1] + d[2]).abs() < 1e-15);
    }

    #[test]
    fn groups_are_interchangeable_at_lambda_one(p in params()) {
        // relabelling the groups maps the system onto itself
        let p = MeanFieldParams { lambda: 1.0, ..p };
        let q = MeanFieldParams { mu: 1.0 - p.mu, ..p };
        let a = integrate(&p, &SolverConfig::euler(0.1, 80)).unwrap();
        let b = integrate(&q, &SolverConfig::euler(0.1, 80)).unwrap();
        for (x, y) in a.states.iter().zip(&b.states) {
            prop_assert!((x.i_o - y.i_m).abs() < 1e-12 && (x.s_m - y.s_o).abs() < 1e-12);
        }
    }

    #[test]
    fn larger_lambda_never_lowers_the_attack_rate(p in params(), bump in 0.0f64..2.0) {
        let q = MeanFieldParams { lambda: p.lambda + bump, ..p };
        let a = summarize(&integrate(&p, &SolverConfig::rk4(0.1, 100)).unwrap());
        let b = summarize(&integrate(&q, &SolverConfig::rk4(0.1, 100)).unwrap());
        prop_assert!(b.overall.total_infected >= a.overall.total_infected - 1e-12);
    }
}
