mod common;

use std::f64::consts::PI;

use phase_balance::analysis::{
    convergence_point, locus_line, perturbation_bounds, predict_reference_direction, synthesize_gains,
};
use phase_balance::control::{control_input, ControlLaw};
use phase_balance::model::{self, GainVector, Point, SwarmState};
use phase_balance::sim::{simulate, IntegratorSettings, Scenario};
use proptest::prelude::*;

fn headings(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    n.prop_flat_map(|n| prop::collection::vec(-PI..PI, n))
}

fn state(h: &[f64]) -> SwarmState {
    let pos = (0..h.len()).map(|k| Point::new(k as f64, 0.0)).collect();
    SwarmState::new(0.0, pos, h.to_vec()).unwrap()
}

fn nonzero_gain() -> impl Strategy<Value = f64> {
    prop_oneof![0.1..5.0f64, -5.0..-0.1f64]
}

/// Sorted headings in (−π, π) with a minimum gap.
fn ordered_headings(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-PI + 0.05..PI - 0.05, n)
        .prop_map(|mut v| {
            v.sort_by(f64::total_cmp);
            v
        })
        .prop_filter("gap", |v| v.windows(2).all(|w| w[1] - w[0] > 0.05))
}

proptest! {
    #[test]
    fn harmonic_magnitude_bounded(h in headings(1..=12), m in 1u32..6) {
        let p = model::order_parameter(&h, m).unwrap();
        prop_assert!(p.magnitude <= 1.0 / m as f64 + 1e-12);
        let (re, im) = common::harmonic(&h, m);
        prop_assert!((p.re - re).abs() < 1e-12 && (p.im - im).abs() < 1e-12);
        prop_assert!((p.magnitude - re.hypot(im)).abs() < 1e-12);
    }

    #[test]
    fn potentials_match_pairwise_sums(h in headings(2..=10)) {
        let u = model::potential_u(&h).unwrap().value;
        let w = model::potential_w(&h).unwrap().value;
        prop_assert!((u - common::potential_u(&h)).abs() < 1e-12);
        prop_assert!((w - common::potential_w(&h)).abs() < 1e-12);
        if h.len() <= 3 {
            prop_assert_eq!(u, w);
        }
    }

    #[test]
    fn gradients_match_finite_differences(h in headings(2..=10)) {
        let g = model::grad_u(&h).unwrap();
        let fd = common::fd_gradient(common::potential_u, &h, 1e-5);
        for (a, b) in g.iter().zip(&fd) {
            prop_assert!((a - b).abs() <= 1e-6 * b.abs().max(1.0), "{} vs {}", a, b);
        }
        let g = model::grad_w(&h).unwrap();
        let fd = common::fd_gradient(common::potential_w, &h, 1e-5);
        for (a, b) in g.iter().zip(&fd) {
            prop_assert!((a - b).abs() <= 1e-6 * b.abs().max(1.0), "{} vs {}", a, b);
        }
    }

    #[test]
    fn gradient_sums_to_zero(h in headings(2..=10)) {
        let s: f64 = model::grad_u(&h).unwrap().iter().sum();
        prop_assert!(s.abs() < 1e-12);
        let s: f64 = model::grad_w(&h).unwrap().iter().sum();
        prop_assert!(s.abs() < 1e-12);
    }

    #[test]
    fn hessian_matches_finite_differences(h in headings(2..=8)) {
        let hess = model::hessian_u(&h).unwrap();
        let fd = common::fd_hessian(common::potential_u, &h, 1e-4);
        for i in 0..h.len() {
            for j in 0..h.len() {
                let (a, b) = (hess[(i, j)], fd[i][j]);
                prop_assert!((a - b).abs() <= 1e-5 * b.abs().max(1.0), "{} vs {}", a, b);
            }
        }
    }

    #[test]
    fn two_cluster_hessian_is_indefinite(minority in 1usize..4, extra in 1usize..4, psi in -PI..PI) {
        // `minority` agents at ψ + π, the rest at ψ; q pairs two agents at ψ.
        let n = 2 * minority + extra;
        let h: Vec<f64> = (0..n).map(|k| if k < minority { psi + PI } else { psi }).collect();
        let p = common::p_mag(&h);
        let hess = model::hessian_u(&h).unwrap();
        let (a, b) = (n - 2, n - 1);
        let qhq = hess[(a, a)] + hess[(b, b)] - hess[(a, b)] - hess[(b, a)];
        prop_assert!((qhq + 2.0 * p).abs() < 1e-12, "{} vs {}", qhq, -2.0 * p);
    }

    #[test]
    fn balance_law_is_feedback_on_grad_u(
        (h, k) in (2usize..=8).prop_flat_map(|n| (
            prop::collection::vec(-PI..PI, n),
            prop::collection::vec(nonzero_gain(), n),
        )),
        omega0 in -1.0..1.0f64,
    ) {
        let law = ControlLaw::balance(GainVector::new(k.clone()).unwrap(), omega0);
        let u = control_input(&state(&h), &law).unwrap();
        let fd = common::fd_gradient(common::potential_u, &h, 1e-5);
        for i in 0..h.len() {
            prop_assert!((u[i] - (omega0 - k[i] * fd[i])).abs() < 1e-8);
        }
        let s: f64 = u.iter().zip(&k).map(|(u, k)| (u - omega0) / k).sum();
        prop_assert!(s.abs() < 1e-12);
    }

    #[test]
    fn control_scales_with_gains(h in headings(2..=8), k in prop::collection::vec(0.1..5.0f64, 8)) {
        let k = GainVector::new(k[..h.len()].to_vec()).unwrap();
        let s = state(&h);
        let u1 = control_input(&s, &ControlLaw::balance(k.clone(), 0.0)).unwrap();
        let u2 = control_input(&s, &ControlLaw::balance(k.scaled(2.0).unwrap(), 0.0)).unwrap();
        for (a, b) in u1.iter().zip(&u2) {
            prop_assert_eq!(2.0 * a, *b);
        }
    }

    #[test]
    fn splay_equals_balance_for_small_n(h in headings(2..=3), omega0 in -1.0..1.0f64) {
        let k = GainVector::new(vec![1.5, 0.5, 2.0][..h.len()].to_vec()).unwrap();
        let s = state(&h);
        let ub = control_input(&s, &ControlLaw::balance(k.clone(), omega0)).unwrap();
        let us = control_input(&s, &ControlLaw::splay(k, omega0)).unwrap();
        prop_assert_eq!(ub, us);
    }

    #[test]
    fn positive_gain_weights_are_convex(
        h in ordered_headings(3),
        seed in any::<u64>(),
    ) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        prop_assume!(common::p_mag(&h) > 0.05);
        let k = common::ordered_gains(&mut rng, &h);
        let r = predict_reference_direction(&h, &GainVector::new(k.clone()).unwrap()).unwrap();
        prop_assert!(r.lambda.iter().all(|&l| l > 0.0));
        prop_assert!((r.lambda.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!((r.reference_direction - common::theta_f(&h, &k)).abs() < 1e-12);
        let sh = common::shifted(&h);
        let lo = sh.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = sh.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo < r.reference_direction && r.reference_direction < hi);
    }

    #[test]
    fn signed_synthesis_round_trips(target in -PI..PI, c in 0.2..2.0f64) {
        let theta0 = [0.0, 2.0 * PI / 3.0];
        prop_assume!((target + PI / 3.0).abs() > 1e-6 && target.abs() > 1e-6);
        let syn = synthesize_gains(&theta0, target, c).unwrap();
        let g = syn.gains.as_slice();
        prop_assert!(g[0] + g[1] > 0.0);
        let r = predict_reference_direction(&theta0, &syn.gains).unwrap();
        prop_assert!((r.reference_direction - target).abs() < 1e-9);
        prop_assert!((common::theta_f(&theta0, g) - target).abs() < 1e-9);
    }

    #[test]
    fn offsets_scale_inversely_with_eta(
        t1 in -PI..PI, gap in 0.2..(PI - 0.2), eta in 0.2..5.0f64, rho in 0.2..5.0f64,
    ) {
        let theta0 = [t1, t1 + gap];
        let r0 = [Point::new(0.0, 0.0), Point::new(1.0, 0.0)];
        let a = convergence_point(theta0, r0, [eta, eta / rho]).unwrap();
        let b = convergence_point(theta0, r0, [2.0 * eta, 2.0 * eta / rho]).unwrap();
        for (x, y) in [(a.offset.x, b.offset.x), (a.offset.y, b.offset.y)] {
            prop_assert!((x - 2.0 * y).abs() <= 1e-8 * x.abs().max(1e-3));
        }
        let line = locus_line(theta0, a.initial_centroid, rho).unwrap();
        prop_assert!(line.distance_to(a.point) < 1e-8);
    }

    #[test]
    fn equal_gain_offset_matches_log_form(gap in 0.2..(PI - 0.2), t1 in -PI..PI, k in 0.2..4.0f64) {
        // With equal gains the integrand reduces to (cos, sin)(θ̄)/sin ξ, which
        // integrates to ln(cot(δ₀/4)) along θ̄ = (θ₁₀ + θ₂₀)/2.
        let theta0 = [t1, t1 + gap];
        let r0 = [Point::new(0.0, 0.0), Point::new(0.0, 0.0)];
        let cp = convergence_point(theta0, r0, [k, k]).unwrap();
        let mag = (1.0 / (gap / 4.0).tan()).ln() / k;
        let bar = t1 + gap / 2.0;
        prop_assert!((cp.offset.x - mag * bar.cos()).abs() < 1e-8);
        prop_assert!((cp.offset.y - mag * bar.sin()).abs() < 1e-8);
    }

    #[test]
    fn perturbed_reference_stays_in_bounds(
        a in -2.0..-0.01f64, b in -2.0..-0.01f64, c in -2.0..-0.01f64,
        sigma in 0.01..0.9f64,
        s in prop::collection::vec(-1.0..1.0f64, 3),
        k in 0.5..4.0f64,
    ) {
        // Shifted headings are (a, b, c); undo the splay shift to get θ₀.
        prop_assume!((a - b).abs() > 1e-6 || (b - c).abs() > 1e-6);
        let sh = [a, b, c];
        let theta0: Vec<f64> = sh.iter().enumerate().map(|(i, t)| t + 2.0 * PI * i as f64 / 3.0).collect();
        let bounds = perturbation_bounds(&theta0, sigma).unwrap();
        let kp: Vec<f64> = s.iter().map(|s| k * (1.0 + sigma * s)).collect();
        let tf = common::theta_f(&theta0, &kp);
        let i = bounds.interval;
        prop_assert!(tf > i.lo - 1e-9 && tf < i.hi + 1e-9, "{} not in {:?}", tf, i);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn simulation_invariants(seed in any::<u64>(), n in 2usize..=3, omega0 in -0.5..0.5f64) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let h = common::random_headings(&mut rng, n);
        let k = common::ordered_gains(&mut rng, &h);
        let settings = IntegratorSettings { t_max: 4.0, balance_tol: 1e-300, record_stride: 10, ..Default::default() };
        let law = ControlLaw::balance(GainVector::new(k.clone()).unwrap(), omega0);
        let trace = simulate(&Scenario::new(state(&h), law.clone(), settings).unwrap()).unwrap();

        prop_assert!(trace.conserved_drift().unwrap() < 1e-9);
        for w in trace.samples.windows(2) {
            prop_assert!(w[1].p_mag <= w[0].p_mag + 1e-9);
        }

        let fine = IntegratorSettings { dt: 5e-4, record_stride: 20, ..settings };
        let trace2 = simulate(&Scenario::new(state(&h), law, fine).unwrap()).unwrap();
        let (a, b) = (trace.last(), trace2.last());
        prop_assert!((a.t() - b.t()).abs() < 1e-12);
        for (x, y) in a.state.headings.iter().zip(&b.state.headings) {
            prop_assert!((x - y).abs() < 1e-6);
        }
    }
}
