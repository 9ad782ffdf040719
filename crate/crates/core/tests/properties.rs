use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use mirrorvis::params::derive_dimensionless;
use mirrorvis::propagator::Propagator;
use mirrorvis::scan::run_scan;
use mirrorvis::visibility::{first_revival, visibility_closed_form, visibility_thermal};
use mirrorvis::{DimensionlessParams, Execution, PhysConstants, PhysicalParams};

const C: PhysConstants = PhysConstants::CODATA;

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.log10()..hi.log10()).prop_map(|e| 10f64.powf(e))
}

prop_compose! {
    fn physical()(
        mass in log_uniform(1e-15, 1e-6),
        omega_m in log_uniform(1e2, 1e6),
        temperature in log_uniform(1e-9, 1e2),
        gamma in log_uniform(1e-8, 1e1),
        lambda_qq in prop_oneof![Just(0.0), 1.0f64..50.0],
    ) -> PhysicalParams {
        PhysicalParams {
            mass,
            omega_m,
            omega_c: 3e15,
            cavity_length: 5e-2,
            temperature,
            gamma,
            lambda_qq,
            lambda_nonenv: 0.0,
        }
    }
}

prop_compose! {
    fn coupled()(
        kappa in 0.1f64..2.0,
        lambda in 0.0f64..0.3,
        chi in 0.0f64..0.2,
        inv_q in log_uniform(1e-5, 1e-2),
        n_bar in 0.0f64..20.0,
    ) -> DimensionlessParams {
        // nudge onto the admissible side of chi*Lambda >= inv_Q^2/16
        let chi = if chi * lambda > 0.0 { chi.max(inv_q * inv_q / (16.0 * lambda)) } else { chi };
        DimensionlessParams::new(kappa, lambda, chi, inv_q, n_bar).unwrap()
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

proptest! {
    #[test]
    fn positivity_identity_is_exact(p in physical()) {
        let d = derive_dimensionless(&p, &C).unwrap();
        let expected = p.lambda_qq * d.inv_q * d.inv_q / 16.0;
        if expected > 0.0 {
            prop_assert!(rel(d.chi * d.lambda_t, expected) < 1e-12);
        } else {
            prop_assert_eq!(d.chi, 0.0);
        }
    }

    #[test]
    fn thermal_strength_is_linear_in_t_and_gamma(p in physical(), s in 1.1f64..10.0) {
        let d = derive_dimensionless(&p, &C).unwrap();
        let hot = derive_dimensionless(&PhysicalParams { temperature: s * p.temperature, ..p }, &C).unwrap();
        let lossy = derive_dimensionless(&PhysicalParams { gamma: s * p.gamma, ..p }, &C).unwrap();
        prop_assert!(rel(hot.lambda_t, s * d.lambda_t) < 1e-12);
        prop_assert!(rel(lossy.lambda_t, s * d.lambda_t) < 1e-12);
    }

    #[test]
    fn thermal_strength_depends_on_hbar_and_kb_only_through_their_ratio(p in physical(), s in 0.1f64..10.0) {
        let scaled = PhysConstants::new(C.hbar * s, C.k_b * s).unwrap();
        let a = derive_dimensionless(&p, &C).unwrap();
        let b = derive_dimensionless(&p, &scaled).unwrap();
        prop_assert!(rel(b.lambda_t, a.lambda_t) < 1e-12);
        prop_assert!(rel(b.n_bar, a.n_bar) < 1e-12 || a.n_bar < 1e-300);
    }

    #[test]
    fn first_revival_ignores_occupation(d in coupled(), n in 0.0f64..1e6) {
        let a = first_revival(&d).unwrap();
        let b = first_revival(&DimensionlessParams { n_bar: n, ..d }).unwrap();
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn c6_is_affine_in_the_initial_amplitude(d in coupled(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let prop = Propagator::new(200).unwrap();
        let probes = prop.probes(&d, 2.0 * PI).unwrap();
        let alpha = Complex64::new(re, im);
        let direct = prop.propagate(&d, alpha, 2.0 * PI).unwrap();
        for (i, s) in direct.states.iter().enumerate() {
            prop_assert!((s.c6() - probes.c6_at(i, alpha)).norm() < 1e-9);
        }
    }

    #[test]
    fn visibility_is_a_probability(d in coupled()) {
        let prop = Propagator::new(200).unwrap();
        let s = visibility_thermal(&d, 4.0 * PI, &prop).unwrap();
        prop_assert!(s.nu.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!(s.neg_log_nu.iter().all(|v| *v >= -1e-12));
        let c = visibility_closed_form(&d, &s.t_seconds).unwrap();
        prop_assert!(c.nu.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn scan_cells_are_pure(
        t in proptest::collection::vec(log_uniform(1e-10, 1e-2), 2..6),
        g in proptest::collection::vec(log_uniform(1e-8, 1e-1), 2..6),
        lambda_qq in prop_oneof![Just(0.0), 1.0f64..10.0],
    ) {
        let base = PhysicalParams {
            mass: 1e-12, omega_m: 3e3, omega_c: 3e15, cavity_length: 5e-2,
            temperature: 2e-3, gamma: 3e-2, lambda_qq, lambda_nonenv: 0.0,
        };
        let mut t = t;
        let mut g = g;
        t.sort_by(f64::total_cmp);
        t.dedup();
        g.sort_by(f64::total_cmp);
        g.dedup();
        let fwd = run_scan(&base, &t, &g, 1.0, lambda_qq, &C, Execution::Parallel).unwrap();
        let seq = run_scan(&base, &t, &g, 1.0, lambda_qq, &C, Execution::Sequential).unwrap();
        prop_assert_eq!(&fwd.cells, &seq.cells);

        for i in 0..t.len() {
            for j in 0..g.len() {
                let single = run_scan(&base, &t[i..=i], &g[j..=j], 1.0, lambda_qq, &C, Execution::Sequential).unwrap();
                prop_assert_eq!(fwd.cell(i, j), single.cell(0, 0));
            }
            // monotone in gamma
            let row = fwd.gamma_row(i);
            prop_assert!(row.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn classical_limit_is_rank_one(
        t in proptest::collection::vec(log_uniform(1e-10, 1e-2), 3),
        g in proptest::collection::vec(log_uniform(1e-8, 1e-1), 3),
    ) {
        let (mut t, mut g) = (t, g);
        t.sort_by(f64::total_cmp);
        g.sort_by(f64::total_cmp);
        prop_assume!(t.windows(2).all(|w| w[1] > w[0]) && g.windows(2).all(|w| w[1] > w[0]));
        let base = PhysicalParams {
            mass: 1e-12, omega_m: 3e3, omega_c: 3e15, cavity_length: 5e-2,
            temperature: 2e-3, gamma: 3e-2, lambda_qq: 0.0, lambda_nonenv: 0.0,
        };
        let grid = run_scan(&base, &t, &g, 1.0, 0.0, &C, Execution::Parallel).unwrap();
        let v = |i: usize, j: usize| grid.cell(i, j).as_ref().unwrap().neg_log_nu;
        for i in 0..3 {
            for j in 0..3 {
                let r = v(i, j) * v(0, 0) / (v(i, 0) * v(0, j));
                prop_assert!((r - 1.0).abs() < 1e-12);
                prop_assert!(rel(v(i, j), v(0, 0) * t[i] * g[j] / (t[0] * g[0])) < 1e-12);
            }
        }
    }
}
