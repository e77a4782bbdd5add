use std::f64::consts::PI;

use photon_store::dynamics::bath::run_discrete_bath;
use photon_store::numerics::simpson_fn;
use photon_store::{
    design_drive, simulate_nonmarkovian, BathDiscretization, DoubleLobePulse, Error, InitialState,
    PhysicalParams, TimeGrid,
};

fn setup(gamma_l: f64) -> (DoubleLobePulse, PhysicalParams, TimeGrid) {
    let p = DoubleLobePulse::new(PI).unwrap();
    let w = 2.0;
    let params = PhysicalParams {
        g_cav: 30.0 * PI,
        gamma_l,
        delta1: 0.0,
        delta2: 0.0,
        big_gamma: p.equilibrium_coupling(w),
        bandwidth_w: w,
        rho_offset: 0.002,
        pulse_duration: PI,
    };
    (p, params, TimeGrid::with_step(PI, 1e-4).unwrap())
}

fn sup_g_error(n_modes: usize, band: f64) -> f64 {
    let (p, pr, grid) = setup(6.0 * PI);
    let d = design_drive(&p, &pr, &grid).unwrap();
    let init = InitialState::with_offset(pr.rho_offset).unwrap();
    let reduced = simulate_nonmarkovian(&p, &d.drive(), &pr, &init, &grid).unwrap();
    let bath = BathDiscretization::new(&pr.spectral(), n_modes, band).unwrap();
    let run = run_discrete_bath(&p, &d.drive(), &pr, &init, &grid, &bath).unwrap();
    run.trajectory
        .g
        .iter()
        .zip(&reduced.g)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

#[test]
fn discrete_bath_reproduces_memory_kernel_solver() {
    let coarse = sup_g_error(1000, 40.0);
    let fine = sup_g_error(2000, 80.0);
    assert!(fine <= 1e-3, "{fine}");
    // same mode spacing, twice the band
    assert!(fine < coarse, "{fine} !< {coarse}");
}

#[test]
fn lossless_oracle_is_unitary() {
    let (p, pr, _) = setup(0.0);
    let grid = TimeGrid::with_step(PI, 1e-3).unwrap();
    let d = design_drive(&p, &pr, &grid).unwrap();
    let init = InitialState::with_offset(pr.rho_offset).unwrap();
    let bath = BathDiscretization::new(&pr.spectral(), 400, 40.0).unwrap();
    let run = run_discrete_bath(&p, &d.drive(), &pr, &init, &grid, &bath).unwrap();
    let norm = run.total_norm();
    let drift = norm.iter().map(|v| (v - norm[0]).abs()).fold(0.0, f64::max);
    assert!(drift <= 1e-8, "{drift}");
}

#[test]
fn mode_weights_cover_the_band_density() {
    let (_, pr, _) = setup(0.0);
    let s = pr.spectral();
    let bath = BathDiscretization::new(&s, 2000, 80.0).unwrap();
    let exact = simpson_fn(|w| s.density(w), -80.0, 80.0, 100_000);
    assert!((bath.total_weight() / exact - 1.0).abs() < 0.01);
}

#[test]
fn narrow_band_is_rejected() {
    let (p, pr, _) = setup(0.0);
    let grid = TimeGrid::with_step(PI, 1e-3).unwrap();
    let d = design_drive(&p, &pr, &grid).unwrap();
    let bath = BathDiscretization::new(&pr.spectral(), 50, 2.0).unwrap();
    let err =
        run_discrete_bath(&p, &d.drive(), &pr, &InitialState::empty(), &grid, &bath).unwrap_err();
    assert!(matches!(err, Error::BandTooNarrow { captured } if captured < 0.999));
    assert!(BathDiscretization::new(&pr.spectral(), 1, 10.0).is_err());
}
