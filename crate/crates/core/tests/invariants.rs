use gbmflow_core::mc::{mix64, simulate_ensemble, RngSpec};
use gbmflow_core::numerics::{integrate_adaptive, lin_space, QuadratureSpec};
use gbmflow_core::passage::{g_kernel_curve, mfpt_open, mfpt_reset, survival_free_curve, survival_mortal, survival_open_curve};
use gbmflow_core::*;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = ModelParams> {
    (-0.1..0.2f64, 0.05..0.6f64, 0.2..5.0f64, 0.0..20.0f64, 0.0..2.0f64)
        .prop_map(|(mu, sigma, x0, lr, lm)| ModelParams::new(mu, sigma, x0, lr, lm).unwrap())
}

fn mortal_params() -> impl Strategy<Value = ModelParams> {
    (-0.1..0.2f64, 0.05..0.6f64, 0.2..5.0f64, 0.0..20.0f64, 0.02..2.0f64)
        .prop_map(|(mu, sigma, x0, lr, lm)| ModelParams::new(mu, sigma, x0, lr, lm).unwrap())
}

fn setup() -> impl Strategy<Value = FirstPassageSetup> {
    (-0.05..0.15f64, 0.1..0.5f64, 0.5..3.0f64, 1.05..4.0f64)
        .prop_map(|(mu, sigma, x0, ratio)| FirstPassageSetup::new(ModelParams::new(mu, sigma, x0, 0.0, 0.0).unwrap(), x0 * ratio).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn phi_solves_the_rate_equation(p in params(), t in 0.01..50.0f64) {
        // dphi/dt = lambda_r - lambda_m phi
        let h = 1e-4 * t.max(1.0);
        let d = (phi(&p, t + h).unwrap() - phi(&p, t - h).unwrap()) / (2.0 * h);
        let rhs = p.lambda_r() - p.lambda_m() * phi(&p, t).unwrap();
        prop_assert!((d - rhs).abs() <= 1e-6 * (1.0 + rhs.abs() + p.lambda_r()));
        prop_assert!(phi(&p, t).unwrap() > 0.0);
        prop_assert_eq!(phi(&p, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn stationary_density_is_normalized(p in mortal_params()) {
        let sd = StationaryDensityParams::new(&p).unwrap();
        prop_assert!(sd.exponent_above <= 0.0 && sd.exponent_below <= 0.0);
        let spec = QuadratureSpec::new(1e-13, 1e-11, 60).unwrap();
        let l0 = p.x0().ln();
        let w = 60.0 * p.sigma2().max(0.05) / p.lambda_m().max(0.05).sqrt() + 60.0;
        let g = |u: f64| u.exp() * sd.value_at(u.exp());
        let total = integrate_adaptive(g, l0 - w, l0, spec).unwrap().value + integrate_adaptive(g, l0, l0 + w, spec).unwrap().value;
        prop_assert!((total - 1.0).abs() < 1e-7, "{}", total);
    }

    #[test]
    fn finite_moments_match_stationary_values(p in mortal_params(), n in 1u32..3) {
        if let StationaryMoment::Finite(v) = stationary_moment(&p, n).unwrap() {
            let k = p.lambda_m() - beta(&p, n).unwrap();
            let t = 60.0 / k.min(p.lambda_m());
            let m = moment(&p, n, t).unwrap();
            prop_assert!((m / v - 1.0).abs() < 1e-9, "{} vs {}", m, v);
        }
    }

    #[test]
    fn moments_are_positive_and_start_at_x0(p in params(), n in 1u32..4, t in 0.0..30.0f64) {
        prop_assert!(moment(&p, n, t).unwrap() > 0.0);
        prop_assert!((moment(&p, n, 0.0).unwrap() / p.x0().powi(n as i32) - 1.0).abs() < 1e-14);
        prop_assert!(msd(&p, t).unwrap() >= -1e-12 * p.x0().powi(2));
    }

    #[test]
    fn ldf_is_nonnegative_and_grows_away_from_zero(p in mortal_params(), y in -1.0..1.0f64) {
        let i = ldf(&p, y);
        let ys = LdfParams::new(&p).y_star;
        prop_assert!(i >= 0.0);
        prop_assert!(ys > 0.0);
        prop_assert!(i >= ldf(&p, 0.5 * y) - 1e-15);
    }

    #[test]
    fn survival_curves_are_monotone_probabilities(s in setup(), lr in 0.0..10.0f64, lm in 0.0..2.0f64) {
        let ts = lin_space(0.0, 40.0, 81);
        for q in [survival_free_curve(&s, &ts).unwrap(), survival_open_curve(&s, lr, lm, &ts).unwrap()] {
            prop_assert_eq!(q[0], 1.0);
            prop_assert!(q.iter().all(|v| (0.0..=1.0).contains(v)));
            prop_assert!(q.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        }
        // a mortal searcher is never more likely to hit than an immortal one
        let free = survival_free_curve(&s, &ts).unwrap();
        for (t, qf) in ts.iter().zip(&free) {
            prop_assert!(survival_mortal(&s, lm, *t).unwrap() >= qf - 1e-12);
        }
    }

    #[test]
    fn g_kernel_is_increasing(s in setup(), lm in 0.0..2.0f64) {
        let ts = lin_space(0.0, 50.0, 101);
        let g: Vec<f64> = g_kernel_curve(&s, lm, &ts).unwrap().iter().map(|k| k.g()).collect();
        prop_assert!(g[0].abs() < 1e-15);
        prop_assert!(g.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn more_recruits_never_slow_the_search(s in setup(), lr in 0.2..5.0f64, lm in 0.05..1.0f64) {
        let slow = mfpt_open(&s, lr, lm).unwrap();
        let fast = mfpt_open(&s, 2.0 * lr, lm).unwrap();
        prop_assert!(fast <= slow * (1.0 + 1e-8));
    }

    #[test]
    fn resetting_is_continuous_at_zero_rate(mu in 0.03..0.15f64, sigma in 0.1..0.4f64, ratio in 1.1..3.0f64) {
        let p = ModelParams::new(mu, sigma, 1.0, 0.0, 0.0).unwrap();
        prop_assume!(p.mu_bar() > 0.01);
        let s = FirstPassageSetup::new(p, ratio).unwrap();
        let at0 = mfpt_reset(&s, 0.0).unwrap();
        let near = mfpt_reset(&s, 1e-9).unwrap();
        prop_assert!((near / at0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rng_streams_are_reproducible(seed in any::<u64>(), idx in 0u64..1000) {
        let a = RngSpec::new(seed, idx);
        prop_assert_eq!(a.child(3), RngSpec::new(seed, idx).child(3));
        prop_assert_ne!(a.child(3), a.child(4));
        prop_assert_ne!(mix64(seed), seed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn simulated_particles_are_positive(p in params(), seed in any::<u64>()) {
        let rates = [p.lambda_r(), p.lambda_m(), p.mu(), p.sigma2()];
        let dt = 0.05 / rates.iter().fold(0.1f64, |m, r| m.max(r.abs()));
        let out = simulate_ensemble(&p, 3.0, dt, &[1.0, 3.0], RngSpec::new(seed, 0)).unwrap();
        prop_assert_eq!(out.len(), 2);
        prop_assert!(out.iter().all(|s| s.particles.iter().all(|&x| x > 0.0 && x.is_finite())));
    }
}
