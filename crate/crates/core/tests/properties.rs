mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stieltjes::g_exponential::{g_exp, g_exp_via_hbar};
use stieltjes::ls_measure::{integrate, measure_interval, Integrand, SignedMeasureView};
use stieltjes::solver::{build_grid, euler_solve, residual, StieltjesIvp};
use stieltjes::Derivator;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Three ordered points of `[a, b]` from unit fractions.
fn ordered(g: &Derivator, f: [f64; 3]) -> (f64, f64, f64) {
    let (a, b) = g.domain();
    let mut p = f.map(|x| (a + (b - a) * x).min(b));
    p.sort_by(f64::total_cmp);
    (p[0], p[1], p[2])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn measure_of_prefix_is_increment(seed in any::<u64>(), x in 0.0..=1.0f64) {
        let lin = common::linear_derivator(&mut rng(seed), 6, true, true);
        let (a, b) = lin.g.domain();
        let t = (a + (b - a) * x).min(b);
        let m = measure_interval(&lin.g, a, t).unwrap();
        prop_assert!((m - (lin.value(t) - lin.value(a))).abs() <= 1e-12 * lin.g.scale());
    }

    #[test]
    fn measure_is_additive(seed in any::<u64>(), f in prop::array::uniform3(0.0..=1.0f64)) {
        let g = common::bv_derivator(&mut rng(seed));
        let (u, v, w) = ordered(&g, f);
        let whole = measure_interval(&g, u, w).unwrap();
        let parts = measure_interval(&g, u, v).unwrap() + measure_interval(&g, v, w).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-12 * g.scale());
    }

    #[test]
    fn integral_is_additive_and_linear(seed in any::<u64>(), f in prop::array::uniform3(0.0..=1.0f64), c in -3.0..3.0f64) {
        // sampled densities use cellwise quadrature, which is additive only for step integrands
        let g = common::exact_derivator(&mut rng(seed));
        let (u, v, w) = ordered(&g, f);
        let p = Integrand::polynomial(vec![0.5, -1.0, 0.25]);
        let scaled = Integrand::polynomial(vec![0.5 * c, -c, 0.25 * c]);
        let whole = integrate(&p, &g, u, w).unwrap();
        let parts = integrate(&p, &g, u, v).unwrap() + integrate(&p, &g, v, w).unwrap();
        let tol = 1e-11 * g.scale() * (1.0 + whole.abs());
        prop_assert!((whole - parts).abs() <= tol);
        prop_assert!((integrate(&scaled, &g, u, w).unwrap() - c * whole).abs() <= tol * (1.0 + c.abs()));
    }

    #[test]
    fn step_integral_is_additive(seed in any::<u64>(), f in prop::array::uniform3(0.0..=1.0f64), vals in prop::array::uniform3(-2.0..2.0f64)) {
        let g = common::bv_derivator(&mut rng(seed));
        let (a, b) = g.domain();
        let h = Integrand::step(vec![a, a + 0.3 * (b - a), a + 0.7 * (b - a)], vals.to_vec());
        let (u, v, w) = ordered(&g, f);
        let whole = integrate(&h, &g, u, w).unwrap();
        let parts = integrate(&h, &g, u, v).unwrap() + integrate(&h, &g, v, w).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-11 * g.scale() * (1.0 + whole.abs()));
    }

    #[test]
    fn abs_measure_dominates(seed in any::<u64>(), f in prop::array::uniform3(0.0..=1.0f64)) {
        let g = common::bv_derivator(&mut rng(seed));
        let view = SignedMeasureView::new(&g);
        let (u, _, w) = ordered(&g, f);
        let signed = view.measure_interval(u, w).unwrap();
        let total = view.total_variation(u, w).unwrap();
        let (pos, neg) = (view.positive_part(u, w).unwrap(), view.negative_part(u, w).unwrap());
        let tol = 1e-12 * g.scale();
        prop_assert!(signed.abs() <= total + tol);
        prop_assert!((pos - neg - signed).abs() <= tol && (pos + neg - total).abs() <= tol);
        prop_assert!(pos >= -tol && neg >= -tol);
    }

    #[test]
    fn jordan_parts_reconstruct(seed in any::<u64>(), x in 0.0..=1.0f64) {
        let g = common::bv_derivator(&mut rng(seed));
        let (a, b) = g.domain();
        let t = (a + (b - a) * x).min(b);
        let (g1, g2) = g.jordan();
        let rec = g.eval(a).unwrap() + g1.eval(t).unwrap() - g2.eval(t).unwrap();
        prop_assert!((rec - g.eval(t).unwrap()).abs() <= 1e-12 * g.scale());
        prop_assert!(g1.is_nondecreasing() && g2.is_nondecreasing() && g.variation().is_nondecreasing());
    }

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let g = common::bv_derivator(&mut rng(seed));
        let back = Derivator::from_json(&g.to_json()).unwrap();
        for t in common::probes(&g, 17) {
            prop_assert_eq!(g.eval(t).unwrap(), back.eval(t).unwrap());
        }
    }

    #[test]
    fn exponential_forms_agree(seed in any::<u64>(), hv in prop::collection::vec(-3.0..3.0f64, 1..5), x in 0.0..=1.0f64) {
        let lin = common::linear_derivator(&mut rng(seed), 8, true, true);
        let (a, b) = lin.g.domain();
        let nodes: Vec<f64> = (0..hv.len()).map(|k| a + (b - a) * k as f64 / hv.len() as f64).collect();
        let h = Integrand::step(nodes, hv);
        let t = (a + (b - a) * x).min(b);
        let p = g_exp(&h, &lin.g, t).unwrap();
        let q = g_exp_via_hbar(&h, &lin.g, t).unwrap();
        prop_assert!((p - q).abs() <= 1e-12 * p.abs().max(1.0), "{} vs {}", p, q);
    }

    #[test]
    fn grid_contains_jumps_and_respects_step(seed in any::<u64>(), step in 0.01..0.5f64) {
        let g = common::bv_derivator(&mut rng(seed));
        let grid = build_grid(std::slice::from_ref(&g), step).unwrap();
        let (a, b) = g.domain();
        prop_assert_eq!(grid[0], a);
        prop_assert_eq!(*grid.last().unwrap(), b);
        prop_assert!(grid.windows(2).all(|w| w[0] < w[1] && w[1] - w[0] <= step * (1.0 + 1e-9)));
        for (t, _) in g.jump_points() {
            prop_assert!(grid.contains(&t));
        }
    }

    #[test]
    fn euler_holds_state_on_flats(seed in any::<u64>(), x0 in -2.0..2.0f64, step in 0.02..0.3f64) {
        let lin = common::linear_derivator(&mut rng(seed), 3, true, true);
        let g = lin.g.clone();
        let ivp = StieltjesIvp::new(vec![g.clone()], vec![x0], |t, x, out| out[0] = (t + x[0]).sin()).unwrap();
        let traj = euler_solve(&ivp, step).unwrap();
        for k in 0..traj.grid.len() - 1 {
            let (s, e) = (traj.grid[k], traj.grid[k + 1]);
            if measure_interval(&g, s, e).unwrap() == 0.0 && g.jump_at(s) == 0.0 {
                prop_assert_eq!(&traj.states[k], &traj.states[k + 1]);
            }
        }
        prop_assert!(residual(&traj, &ivp).unwrap() <= 1e-10 * g.scale() * (1.0 + x0.abs()));
    }
}
