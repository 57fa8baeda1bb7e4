use hetnet_core::association::{case_probabilities, prob_case_closed, prob_case_quadrature};
use hetnet_core::distances::{ServingDistancePdf, SUPPORTED};
use hetnet_core::montecarlo::{simulate, simulate_range, McOptions, McResult};
use hetnet_core::quadrature::{integrate_interval, integrate_semi_infinite, QuadOptions};
use hetnet_core::rates::{avg_rate_quadrature, big_g_alpha, interference_guard, RateQuery};
use hetnet_core::specfun::{fox_h, FoxHParams};
use hetnet_core::{AssociationCase, LinkDirection, NetworkConfig};
use proptest::prelude::*;

const CASES: [AssociationCase; 3] = [AssociationCase::Case1, AssociationCase::Case2, AssociationCase::Case4];

/// Valid configurations over the ranges the closed forms are meant for.
fn config() -> impl Strategy<Value = NetworkConfig> {
    (2.5f64..4.0, 2.0f64..4.0, 0.0f64..30.0, 0.0f64..30.0, -1.0f64..2.0, -7.0f64..-5.0)
        .prop_map(|(am, as_, pm_off, q_off, log_ratio, log_lm)| NetworkConfig {
            alpha_m: am,
            alpha_s: as_,
            p_m_dbm: 20.0 + pm_off,
            p_s_dbm: 20.0,
            g_s_dbi: 0.0,
            q_s_dbm: 20.0 + q_off,
            lambda_m: 10f64.powf(log_lm),
            ..NetworkConfig::table_nlos()
        }
        .with_density_ratio(10f64.powf(log_ratio)))
        .prop_filter("valid config", |c| c.validate().is_ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn probabilities_form_a_simplex(cfg in config()) {
        let p = case_probabilities(&cfg).unwrap();
        prop_assert_eq!(p[2], 0.0);
        for v in p {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!((p[0] + p[1] + p[3] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn closed_form_matches_quadrature(cfg in config()) {
        for case in CASES {
            let a = prob_case_closed(&cfg, case).unwrap();
            let b = prob_case_quadrature(&cfg, case).unwrap();
            prop_assert!((a - b).abs() < 1e-6, "{case}: {a} vs {b}");
        }
    }

    #[test]
    fn equal_exponents_depend_only_on_density_ratio(alpha in 2.5f64..4.0, c in 0.01f64..100.0, ratio in 0.1f64..100.0) {
        let base = NetworkConfig { alpha_m: alpha, alpha_s: alpha, ..NetworkConfig::table_nlos() }.with_density_ratio(ratio);
        let scaled = NetworkConfig { lambda_m: base.lambda_m * c, lambda_s: base.lambda_s * c, ..base.clone() };
        let (p, q) = (case_probabilities(&base).unwrap(), case_probabilities(&scaled).unwrap());
        for k in 0..4 {
            prop_assert!((p[k] - q[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn z_scales_with_density(cfg in config(), c in 0.1f64..10.0) {
        let d = cfg.derive().unwrap();
        let scaled = NetworkConfig { lambda_m: cfg.lambda_m * c, lambda_s: cfg.lambda_s * c, ..cfg.clone() };
        let e = scaled.derive().unwrap();
        let expect = c.powf((cfg.alpha_m / cfg.alpha_s - 1.0) / 2.0);
        prop_assert!((e.z1 / d.z1 / expect - 1.0).abs() < 1e-10);
        prop_assert!((e.z2 / d.z2 / expect - 1.0).abs() < 1e-10);
        prop_assert!(d.z1 <= d.z2 * (1.0 + 1e-12));
    }

    #[test]
    fn association_kernel_decreases(beta in 0.3f64..1.0, lz in -3.0f64..3.0, step in 0.01f64..1.0) {
        let p = FoxHParams::association(beta).unwrap();
        let z = 10f64.powf(lz);
        let (a, b) = (fox_h(&p, z).unwrap(), fox_h(&p, z * 10f64.powf(step)).unwrap());
        prop_assert!(b < a && b > 0.0);
    }

    #[test]
    fn big_g_is_nondecreasing(alpha in 2.2f64..5.0, t in 0.001f64..20.0, dt in 0.001f64..5.0) {
        prop_assert!(big_g_alpha(alpha, t + dt).unwrap() >= big_g_alpha(alpha, t).unwrap());
    }

    #[test]
    fn guard_is_nonincreasing(x in 1.0f64..500.0, dx in 0.1f64..100.0, t in 0.01f64..5.0, dt in 0.01f64..2.0, k in 1.0f64..10.0) {
        let cfg = NetworkConfig::table_nlos();
        let denser = NetworkConfig { lambda_iu: Some(cfg.lambda_m * k), ..cfg.clone() };
        let g = interference_guard(&cfg, LinkDirection::Ul, x, t).unwrap();
        prop_assert!(interference_guard(&cfg, LinkDirection::Ul, x + dx, t).unwrap() <= g);
        prop_assert!(interference_guard(&cfg, LinkDirection::Ul, x, t + dt).unwrap() <= g);
        prop_assert!(interference_guard(&denser, LinkDirection::Ul, x, t).unwrap() <= g);
    }

    #[test]
    fn quadrature_is_linear(a in 0.2f64..5.0, k in 0.0f64..3.0, u in -3.0f64..3.0, v in -3.0f64..3.0) {
        let f = |x: f64| (-a * x).exp();
        let g = |x: f64| (k * x.ln() - x).exp() / (1.0 + x);
        let tol = 1e-10;
        let lhs = integrate_semi_infinite(|x| u * f(x) + v * g(x), 0.0, tol).unwrap().value;
        let (fi, gi) = (integrate_semi_infinite(f, 0.0, tol).unwrap().value, integrate_semi_infinite(g, 0.0, tol).unwrap().value);
        prop_assert!((lhs - (u * fi + v * gi)).abs() <= 10.0 * tol * (u.abs() * fi + v.abs() * gi) + 1e-300);
    }

    #[test]
    fn error_estimate_bounds_true_error(a in 0.5f64..20.0, b in 0.1f64..3.0) {
        // ∫_0^b e^{−a x} dx = (1 − e^{−ab})/a
        let r = integrate_interval(|x: f64| (-a * x).exp(), 0.0, b, &QuadOptions::with_rel_tol(1e-6)).unwrap();
        let exact = -(-a * b).exp_m1() / a;
        prop_assert!((r.value - exact).abs() <= r.abs_error_estimate.max(1e-15));
    }

    #[test]
    fn merge_matches_single_run(split in 1u64..299, seed in 0u64..1000) {
        let cfg = NetworkConfig::table_nlos().with_density_ratio(5.0);
        let opts = McOptions { shadowing: false, collect_distances: true };
        let whole = simulate(&cfg, 300, seed, &opts).unwrap();
        let mut merged = McResult::default();
        merged.merge(&simulate_range(&cfg, split..300, seed, &opts).unwrap());
        merged.merge(&simulate_range(&cfg, 0..split, seed, &opts).unwrap());
        prop_assert_eq!(whole.summary(), merged.summary());
        prop_assert_eq!(whole.case_counts, merged.case_counts);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn distance_pdfs_are_densities(cfg in config()) {
        for (case, tier) in SUPPORTED {
            let law = match ServingDistancePdf::new(&cfg, case, tier) {
                Ok(l) => l,
                Err(hetnet_core::Error::ZeroProbabilityCase { .. }) => continue,
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            };
            for i in 0..=50 {
                prop_assert!(law.pdf(law.x_max() * i as f64 / 50.0) >= 0.0);
            }
            prop_assert!((law.total_mass().unwrap() - 1.0).abs() < 1e-6);
        }
    }
}

#[test]
fn rates_fall_as_noise_rises() {
    for q in RateQuery::all() {
        let mut last = f64::INFINITY;
        for noise in [-20.0, -10.0, 0.0, 10.0, 20.0] {
            let cfg = NetworkConfig { noise_m_dbm: noise, noise_s_dbm: noise, ..NetworkConfig::table_nlos() }.with_density_ratio(10.0);
            let r = avg_rate_quadrature(&cfg, q).unwrap();
            assert!(r < last, "{q} at {noise} dBm: {r} !< {last}");
            last = r;
        }
    }
}
