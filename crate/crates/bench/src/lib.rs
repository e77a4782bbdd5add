//! Shared setup for the solver benchmarks in `benches/`.

use std::f64::consts::PI;

use photon_store::{coupling_from_bandwidth, DoubleLobePulse, PhysicalParams, TimeGrid};

/// The storage scenario used throughout: `g_cav = 30 pi`, `gamma_L = 6 pi`,
/// `rho_offset = 0.002`, built-in pulse of duration pi.
pub fn scenario(w: f64, dt: f64) -> (DoubleLobePulse, PhysicalParams, TimeGrid) {
    let pulse = DoubleLobePulse::new(PI).expect("positive duration");
    let params = PhysicalParams {
        g_cav: 30.0 * PI,
        gamma_l: 6.0 * PI,
        delta1: 0.0,
        delta2: 0.0,
        big_gamma: coupling_from_bandwidth(&pulse, w)
            .expect("built-in pulse has a finite coupling"),
        bandwidth_w: w,
        rho_offset: 0.002,
        pulse_duration: PI,
    };
    let grid = TimeGrid::with_step(PI, dt).expect("positive step");
    (pulse, params, grid)
}
