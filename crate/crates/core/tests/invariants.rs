use std::f64::consts::PI;

use photon_store::dark_state::dark_bright_amplitudes;
use photon_store::numerics::{cubic_midpoints, simpson_fn};
use photon_store::{
    coupling_from_bandwidth, design_drive, Complex64, DoubleLobePulse, InputPulse, PhysicalParams,
    SampledPulse, SpectralModel, TimeGrid,
};
use proptest::prelude::*;

fn lobe() -> DoubleLobePulse {
    DoubleLobePulse::new(PI).unwrap()
}

fn base(w: f64) -> PhysicalParams {
    PhysicalParams {
        g_cav: 30.0 * PI,
        gamma_l: 6.0 * PI,
        delta1: 0.0,
        delta2: 0.0,
        big_gamma: lobe().equilibrium_coupling(w),
        bandwidth_w: w,
        rho_offset: 0.004,
        pulse_duration: PI,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectral_identities(gamma in 0.1f64..50.0, w in 0.1f64..50.0, om in -100.0f64..100.0, t in 1e-9f64..5.0) {
        let s = SpectralModel::new(gamma, w).unwrap();
        prop_assert!((s.coupling(om).norm_sqr() - s.density(om)).abs() <= 1e-12 * s.density(om));
        prop_assert_eq!(s.impulse_response(-t), 0.0);
        prop_assert_eq!(s.memory_kernel(t), s.memory_kernel(-t));
        prop_assert!(s.density(om) <= s.density(0.0));
    }

    #[test]
    fn rotation_preserves_norm(gr in -1.0f64..1.0, gi in -1.0f64..1.0, er in -1.0f64..1.0, ei in -1.0f64..1.0, phi in -7.0f64..7.0) {
        let (g, e) = (Complex64::new(gr, gi), Complex64::new(er, ei));
        let (d, b) = dark_bright_amplitudes(g, e, phi);
        let before = g.norm_sqr() + e.norm_sqr();
        prop_assert!((d.norm_sqr() + b.norm_sqr() - before).abs() <= 1e-14);
    }

    #[test]
    fn cubic_midpoints_reproduce_cubics(c in prop::array::uniform4(-5.0f64..5.0)) {
        let f = |x: f64| c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x;
        let nodes: Vec<f64> = (0..9).map(|i| f(i as f64 * 0.25)).collect();
        for (i, m) in cubic_midpoints(&nodes).iter().enumerate() {
            prop_assert!((m - f((i as f64 + 0.5) * 0.25)).abs() < 1e-11);
        }
    }

    #[test]
    fn equilibrium_coupling_closes_the_initial_condition(w in 0.2f64..60.0, big_t in 0.5f64..6.0) {
        let p = DoubleLobePulse::new(big_t).unwrap();
        let gamma = coupling_from_bandwidth(&p, w).unwrap();
        prop_assert!((gamma / p.equilibrium_coupling(w) - 1.0).abs() < 1e-6);
        let s = SpectralModel::new(gamma, w).unwrap();
        let n0 = w * gamma.sqrt() * simpson_fn(|t| (-w * t).exp() * p.value(t), 0.0, big_t, 40_000);
        let g_dot0 = p.d2(0.0) / (w * gamma.sqrt());
        prop_assert!((n0 - g_dot0).abs() <= 1e-8 * g_dot0.abs());
        prop_assert!(s.density(0.0) > 0.0);
    }

    #[test]
    fn sampled_envelopes_are_renormalized(scale in 0.1f64..10.0, n in 50usize..400) {
        let p = lobe();
        let times: Vec<f64> = (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect();
        let values: Vec<f64> = times.iter().map(|&t| scale * p.value(t)).collect();
        let s = SampledPulse::from_samples(times, values, 1e-3).unwrap();
        let norm = simpson_fn(|t| s.value(t).powi(2), 0.0, PI, 20_000);
        prop_assert!((norm - 1.0).abs() < 1e-6);
        prop_assert_eq!(s.value(PI + 0.1), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn detunings_leave_population_and_modulus_alone(
        d1 in -30.0f64..30.0,
        d2 in -30.0f64..30.0,
        d1b in -30.0f64..30.0,
        w in prop::sample::select(vec![0.5, 1.0, 2.0, 25.0]),
    ) {
        let p = lobe();
        let grid = TimeGrid::with_step(PI, 1e-3).unwrap();
        let a = design_drive(&p, &PhysicalParams { delta1: d1, delta2: d2, ..base(w) }, &grid).unwrap();
        let b = design_drive(&p, &PhysicalParams { delta1: d1b, delta2: d2, ..base(w) }, &grid).unwrap();
        let r = design_drive(&p, &base(w), &grid).unwrap();
        prop_assert_eq!(&a.rho_ee, &r.rho_ee);
        for i in 0..a.alpha.len() {
            prop_assert!((a.omega_modulus[i] - b.omega_modulus[i]).abs() <= 1e-9 * (1.0 + a.omega_modulus[i]));
            let m2 = a.alpha[i].powi(2) + a.beta[i].powi(2);
            prop_assert!((a.omega_modulus[i].powi(2) - m2).abs() <= 1e-10 * m2.max(1e-30));
        }
        prop_assert!(a.rho_ee.iter().all(|&v| v >= 0.0));
    }
}
