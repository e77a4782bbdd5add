//! Brute-force oracle: the bath as a finite set of explicit modes.
//!
//! Modes sit at the midpoints of a uniform frequency grid over
//! `[-B, B]` and couple to the cavity with weight `kappa(w_j) sqrt(dw)`.
//! The incoming photon starts in the modes,
//! `c_j(0) = -sqrt(dw / 2pi) int Phi_in(tau) e^{i w_j tau} dtau`, with the sign
//! that makes the modes' back-action on the cavity equal to `+N(t)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{
    atom_rhs, check_drive, ensure_finite, stage_time, InitialState, Solver, Trajectory, ZERO,
};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::model::{future_drive, pulse_series, InputPulse, PhysicalParams, SpectralModel};
use crate::numerics::Rk4;
use crate::pulse_design::DriveSeries;

/// Smallest fraction of the input photon the band must capture.
pub const MIN_CAPTURED: f64 = 0.999;

#[derive(Debug, Clone, PartialEq)]
pub struct BathDiscretization {
    pub n_modes: usize,
    pub band_halfwidth: f64,
    pub mode_freqs: Vec<f64>,
    pub mode_weights: Vec<Complex64>,
}

impl BathDiscretization {
    pub fn new(spectral: &SpectralModel, n_modes: usize, band_halfwidth: f64) -> Result<Self> {
        if n_modes < 2 {
            return Err(Error::InvalidParameter {
                name: "oracle.n_modes",
                reason: format!("need at least 2 modes, got {n_modes}"),
            });
        }
        if !(band_halfwidth.is_finite() && band_halfwidth > 0.0) {
            return Err(Error::InvalidParameter {
                name: "oracle.band",
                reason: format!("must be finite and > 0, got {band_halfwidth}"),
            });
        }
        let dw = 2.0 * band_halfwidth / n_modes as f64;
        let mode_freqs: Vec<f64> = (0..n_modes)
            .map(|j| -band_halfwidth + (j as f64 + 0.5) * dw)
            .collect();
        let mode_weights = mode_freqs
            .iter()
            .map(|&w| spectral.coupling(w) * dw.sqrt())
            .collect();
        Ok(Self {
            n_modes,
            band_halfwidth,
            mode_freqs,
            mode_weights,
        })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.band_halfwidth / self.n_modes as f64
    }

    /// `sum |weight_j|^2`, the discrete stand-in for `int J` over the band.
    pub fn total_weight(&self) -> f64 {
        self.mode_weights.iter().map(|w| w.norm_sqr()).sum()
    }

    /// Initial mode amplitudes holding the input photon, by Simpson
    /// quadrature of its Fourier transform on `grid`.
    pub fn initial_amplitudes(&self, pulse: &dyn InputPulse, grid: &TimeGrid) -> Vec<Complex64> {
        let phi = pulse_series(pulse, grid);
        let dt = grid.dt();
        let pref = -(self.spacing() / (2.0 * PI)).sqrt() * dt / 6.0;
        self.mode_freqs
            .iter()
            .map(|&w| {
                let half = Complex64::from_polar(1.0, 0.5 * w * dt);
                let mut acc = ZERO;
                let mut rot = Complex64::new(1.0, 0.0);
                for i in 0..grid.steps() {
                    if i % 512 == 0 {
                        // re-anchor the phasor to keep rounding drift bounded
                        rot = Complex64::from_polar(1.0, w * grid.t(i));
                    }
                    let mid = rot * half;
                    let next = mid * half;
                    acc += rot * phi.nodes[i] + mid * (4.0 * phi.mids[i]) + next * phi.nodes[i + 1];
                    rot = next;
                }
                acc * pref
            })
            .collect()
    }
}

/// Everything an oracle run produces beyond the trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRun {
    pub trajectory: Trajectory,
    /// Fraction of the input photon the band holds at `t = 0`.
    pub captured: f64,
    /// `sum_j |c_j|^2` at every node.
    pub bath_population: Vec<f64>,
    pub final_modes: Vec<Complex64>,
}

impl OracleRun {
    /// Atom, cavity and bath populations plus atomic loss at every node.
    pub fn total_norm(&self) -> Vec<f64> {
        let tr = &self.trajectory;
        (0..tr.g.len())
            .map(|i| {
                tr.g[i].norm_sqr()
                    + tr.e[i].norm_sqr()
                    + tr.x[i].norm_sqr()
                    + self.bath_population[i]
                    + tr.lost[i]
            })
            .collect()
    }
}

/// Integrates the atom, the cavity and every bath mode explicitly.
///
/// In the returned trajectory `consumed` stays zero, since the input photon
/// lives in the modes from the start. The reflected field is rebuilt from the final mode amplitudes,
/// `Phi_out(t) = sum_j c_j(T) sqrt(dw / 2pi) e^{-i w_j (t - T)}`, which is
/// exact for `t <= T` because the cavity only radiates forward in time.
pub fn simulate_discrete_bath(
    pulse: &dyn InputPulse,
    drive: &DriveSeries,
    params: &PhysicalParams,
    init: &InitialState,
    grid: &TimeGrid,
    bath: &BathDiscretization,
) -> Result<Trajectory> {
    run_discrete_bath(pulse, drive, params, init, grid, bath).map(|r| r.trajectory)
}

/// [`simulate_discrete_bath`] keeping the mode amplitudes.
pub fn run_discrete_bath(
    pulse: &dyn InputPulse,
    drive: &DriveSeries,
    params: &PhysicalParams,
    init: &InitialState,
    grid: &TimeGrid,
    bath: &BathDiscretization,
) -> Result<OracleRun> {
    params.validate()?;
    check_drive(drive, grid)?;
    let n_drive = future_drive(pulse, &params.spectral(), grid)?;
    let modes0 = bath.initial_amplitudes(pulse, grid);
    let captured: f64 = modes0.iter().map(|c| c.norm_sqr()).sum();
    if captured < MIN_CAPTURED {
        return Err(Error::BandTooNarrow { captured });
    }

    let m = bath.n_modes;
    // layout: G, E, X, atomic loss accumulator, modes
    let dim = 4 + m;
    let freqs = &bath.mode_freqs;
    let weights = &bath.mode_weights;
    let dt = grid.dt();

    let mut state = vec![ZERO; dim];
    state[0] = init.g_amp;
    state[1] = init.e_amp;
    state[2] = init.x_amp;
    state[4..].copy_from_slice(&modes0);

    let mut traj = Trajectory::with_capacity(Solver::DiscreteBath, grid);
    let mut back_action = Vec::with_capacity(grid.len());
    let mut bath_population = Vec::with_capacity(grid.len());
    let mut push = |traj: &mut Trajectory, s: &[Complex64]| {
        traj.g.push(s[0]);
        traj.e.push(s[1]);
        traj.x.push(s[2]);
        traj.lost.push(s[3].re);
        // fixed summation order keeps runs reproducible
        let mut acc = ZERO;
        let mut pop = 0.0;
        for (w, c) in weights.iter().zip(&s[4..]) {
            acc += w.conj() * c;
            pop += c.norm_sqr();
        }
        back_action.push(acc);
        bath_population.push(pop);
    };
    push(&mut traj, &state);

    let mut rk = Rk4::<Complex64>::new(dim);
    for i in 0..grid.steps() {
        rk.step(&mut state, dt, |stage, s, d| {
            let t = stage_time(grid, i, stage);
            let (de, dx, dg_atom) = atom_rhs(params, t, drive.at(i, stage), s[0], s[1], s[2]);
            let g = s[0];
            let mut sum = ZERO;
            for j in 0..m {
                let c = s[4 + j];
                sum += weights[j].conj() * c;
                d[4 + j] = Complex64::new(0.0, -freqs[j]) * c + weights[j] * g;
            }
            d[0] = dg_atom - sum;
            d[1] = de;
            d[2] = dx;
            d[3] = Complex64::new(2.0 * params.gamma_l * s[2].norm_sqr(), 0.0);
        });
        ensure_finite(&state, grid.t(i + 1))?;
        push(&mut traj, &state);
    }

    // Output field from the final mode amplitudes.
    let end = grid.end();
    let scale = (bath.spacing() / (2.0 * PI)).sqrt();
    let mut phi_out = vec![ZERO; grid.len()];
    for (j, &w) in freqs.iter().enumerate() {
        let amp = state[4 + j] * scale;
        let step = Complex64::from_polar(1.0, -w * dt);
        let mut rot = Complex64::new(1.0, 0.0);
        for (i, out) in phi_out.iter_mut().enumerate() {
            if i % 512 == 0 {
                rot = Complex64::from_polar(1.0, -w * (grid.t(i) - end));
            }
            *out += amp * rot;
            rot *= step;
        }
    }

    let phi = pulse_series(pulse, grid);
    let emitted: Vec<f64> = {
        let mut acc = 0.0;
        let mut out = vec![0.0];
        for k in 1..grid.len() {
            acc += 0.5 * dt * (phi_out[k - 1].norm_sqr() + phi_out[k].norm_sqr());
            out.push(acc);
        }
        out
    };
    traj.phi_in = phi.nodes.clone();
    traj.z_mem = back_action
        .iter()
        .zip(&n_drive)
        .map(|(b, &nv)| b + nv)
        .collect();
    traj.y_out = phi_out
        .iter()
        .zip(&phi.nodes)
        .map(|(o, &p)| o + p)
        .collect();
    traj.phi_out = phi_out;
    traj.emitted = emitted;
    traj.consumed = vec![0.0; grid.len()];
    traj.drive_n = n_drive;
    Ok(OracleRun {
        trajectory: traj,
        captured,
        bath_population,
        final_modes: state[4..].to_vec(),
    })
}
