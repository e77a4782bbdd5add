//! The inverse problem: from a target input wavepacket to the classical
//! drive that absorbs it without reflection.
//!
//! Impedance matching fixes the cavity amplitude `G`, the cavity equation
//! then fixes the rotated upper-level amplitude `x~`, and the remaining two
//! equations fix the lower-level population and the complex drive.
//! `x~` relates to the simulator amplitude by `X = -i e^{i delta2 t} x~`.

use crate::error::{Error, Result};
use crate::grid::{Stage, Staggered, TimeGrid};
use crate::model::{future_drive_staggered, pulse_series, InputPulse, PhysicalParams};
use crate::numerics::{
    cubic_midpoints, cumulative_simpson, hermite_mid, simpson_fn, unwrap_phase, Rk4,
};

/// Smallest excited-state population the design accepts.
pub const RHO_FLOOR: f64 = 1e-12;

/// Which reduced model a design or trajectory belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    NonMarkovian,
    Markovian,
}

/// Cavity amplitude forced by impedance matching, with two derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct CavityAmplitude {
    pub g: Staggered,
    pub g_dot: Staggered,
    pub g_ddot: Staggered,
}

/// `G = (Phi' + W Phi) / (W sqrt(Gamma))`, from the pulse's own derivatives.
pub fn cavity_amplitude(
    pulse: &dyn InputPulse,
    params: &PhysicalParams,
    grid: &TimeGrid,
) -> CavityAmplitude {
    let w = params.bandwidth_w;
    let den = w * params.big_gamma.sqrt();
    CavityAmplitude {
        g: Staggered::sample(grid, |t| (pulse.d1(t) + w * pulse.value(t)) / den),
        g_dot: Staggered::sample(grid, |t| (pulse.d2(t) + w * pulse.d1(t)) / den),
        g_ddot: Staggered::sample(grid, |t| (pulse.d3(t) + w * pulse.d2(t)) / den),
    }
}

/// Cavity amplitude in the wide-band limit, `G_f = Phi / sqrt(Gamma)`.
pub fn cavity_amplitude_markovian(
    pulse: &dyn InputPulse,
    params: &PhysicalParams,
    grid: &TimeGrid,
) -> CavityAmplitude {
    let sg = params.big_gamma.sqrt();
    CavityAmplitude {
        g: Staggered::sample(grid, |t| pulse.value(t) / sg),
        g_dot: Staggered::sample(grid, |t| pulse.d1(t) / sg),
        g_ddot: Staggered::sample(grid, |t| pulse.d2(t) / sg),
    }
}

/// The rotated upper-level amplitude together with the drive and memory
/// terms it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct IntracavityAmplitude {
    pub x_tilde: Staggered,
    pub x_tilde_dot: Staggered,
    /// Source term of the cavity equation (`N` or `sqrt(Gamma) Phi_in`).
    pub drive_n: Staggered,
    /// Memory term of the cavity equation (`Z` or `Gamma G / 2`).
    pub memory_z: Staggered,
}

/// Memory accumulator `Z = int_0^t f(t - tau) G(tau) dtau` from its exact
/// linear ODE, with Hermite midpoints.
pub fn memory_accumulator(g: &Staggered, params: &PhysicalParams, grid: &TimeGrid) -> Staggered {
    let w = params.bandwidth_w;
    let src = 0.5 * w * params.big_gamma;
    let dt = grid.dt();
    let mut z = Staggered::zeros(grid);
    let mut rk = Rk4::<f64>::new(1);
    let mut y = [0.0];
    for i in 0..grid.steps() {
        rk.step(&mut y, dt, |stage, s, d| {
            d[0] = -w * s[0] + src * g.at(i, stage)
        });
        z.nodes[i + 1] = y[0];
    }
    for i in 0..grid.steps() {
        let d0 = -w * z.nodes[i] + src * g.nodes[i];
        let d1 = -w * z.nodes[i + 1] + src * g.nodes[i + 1];
        z.mids[i] = hermite_mid(z.nodes[i], z.nodes[i + 1], d0, d1, dt);
    }
    z
}

/// `x~ = (-G' + N - Z) / g_cav` and its derivative, built from closed-form
/// constituent derivatives rather than by differencing `x~`.
pub fn intracavity_amplitude(
    cavity: &CavityAmplitude,
    drive_n: &Staggered,
    pulse: &dyn InputPulse,
    params: &PhysicalParams,
    grid: &TimeGrid,
) -> Result<IntracavityAmplitude> {
    grid.check_len(cavity.g.nodes.len())?;
    grid.check_len(drive_n.nodes.len())?;
    let w = params.bandwidth_w;
    let sg = params.big_gamma.sqrt();
    let gc = params.g_cav;
    let z = memory_accumulator(&cavity.g, params, grid);
    let phi = pulse_series(pulse, grid);
    let n_dot = drive_n.zip_with(&phi, |n, p| w * n - w * sg * p);
    let z_dot = z.zip_with(&cavity.g, |z, g| -w * z + 0.5 * w * params.big_gamma * g);
    let x_tilde = combine(&cavity.g_dot, drive_n, &z, gc);
    let x_tilde_dot = combine(&cavity.g_ddot, &n_dot, &z_dot, gc);
    Ok(IntracavityAmplitude {
        x_tilde,
        x_tilde_dot,
        drive_n: drive_n.clone(),
        memory_z: z,
    })
}

fn combine(g_dot: &Staggered, n: &Staggered, z: &Staggered, gc: f64) -> Staggered {
    let f = |a: f64, b: f64, c: f64| (-a + b - c) / gc;
    Staggered {
        nodes: (0..n.nodes.len())
            .map(|i| f(g_dot.nodes[i], n.nodes[i], z.nodes[i]))
            .collect(),
        mids: (0..n.mids.len())
            .map(|i| f(g_dot.mids[i], n.mids[i], z.mids[i]))
            .collect(),
    }
}

fn markovian_intracavity(
    cavity: &CavityAmplitude,
    pulse: &dyn InputPulse,
    params: &PhysicalParams,
    grid: &TimeGrid,
) -> IntracavityAmplitude {
    let gam = params.big_gamma;
    let sg = gam.sqrt();
    let gc = params.g_cav;
    let drive_n = pulse_series(pulse, grid).map(|p| sg * p);
    let memory_z = cavity.g.map(|g| 0.5 * gam * g);
    let x_tilde = cavity
        .g_dot
        .zip_with(&cavity.g, |gd, g| (-gd + 0.5 * gam * g) / gc);
    let x_tilde_dot = cavity
        .g_ddot
        .zip_with(&cavity.g_dot, |gdd, gd| (-gdd + 0.5 * gam * gd) / gc);
    IntracavityAmplitude {
        x_tilde,
        x_tilde_dot,
        drive_n,
        memory_z,
    }
}

/// `rho_ee = rho_offset - x~^2 + int_0^t (2 g_cav x~ G - 2 gamma_L x~^2)`.
///
/// Fails with [`Error::InfeasibleDesign`] at the first node or midpoint
/// where the population drops below [`RHO_FLOOR`].
pub fn excited_population(
    x_tilde: &Staggered,
    g: &Staggered,
    params: &PhysicalParams,
    grid: &TimeGrid,
) -> Result<Staggered> {
    grid.check_len(x_tilde.nodes.len())?;
    grid.check_len(g.nodes.len())?;
    let (gc, gl) = (params.g_cav, params.gamma_l);
    let flux = x_tilde.zip_with(g, |x, g| 2.0 * gc * x * g - 2.0 * gl * x * x);
    let acc = cumulative_simpson(&flux, grid);
    let rho = acc.zip_with(x_tilde, |a, x| params.rho_offset - x * x + a);
    for i in 0..grid.len() {
        if i > 0 && rho.mids[i - 1] < RHO_FLOOR {
            return Err(Error::InfeasibleDesign {
                t: grid.mid(i - 1),
                rho: rho.mids[i - 1],
            });
        }
        if !(rho.nodes[i] >= RHO_FLOOR) {
            return Err(Error::InfeasibleDesign {
                t: grid.t(i),
                rho: rho.nodes[i],
            });
        }
    }
    Ok(rho)
}

/// Node series of a finished design. Every vector has `grid.len()` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult {
    pub regime: Regime,
    pub grid: TimeGrid,
    pub phi_in: Vec<f64>,
    pub g: Vec<f64>,
    pub g_dot: Vec<f64>,
    pub g_ddot: Vec<f64>,
    pub x_tilde: Vec<f64>,
    pub x_tilde_dot: Vec<f64>,
    pub rho_ee: Vec<f64>,
    pub a_accum: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub omega_modulus: Vec<f64>,
    /// Continuous branch of `atan2(beta, alpha)`.
    pub omega_phase: Vec<f64>,
    pub omega_phase_principal: Vec<f64>,
    pub drive_n: Vec<f64>,
    pub memory_z: Vec<f64>,
}

/// Markovian designs share the layout, with `regime == Regime::Markovian`.
pub type MarkovianDesignResult = DesignResult;

/// Complex drive sampled at the nodes and at every step midpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveSeries {
    pub nodes: Vec<num_complex::Complex64>,
    pub mids: Vec<num_complex::Complex64>,
}

impl DriveSeries {
    /// Drive from node samples; midpoints by four-point cubic interpolation.
    pub fn from_nodes(nodes: Vec<num_complex::Complex64>) -> Self {
        let mids = cubic_midpoints(&nodes);
        Self { nodes, mids }
    }

    pub fn zeros(grid: &TimeGrid) -> Self {
        Self::from_nodes(vec![num_complex::Complex64::new(0.0, 0.0); grid.len()])
    }

    #[inline]
    pub fn at(&self, i: usize, stage: Stage) -> num_complex::Complex64 {
        match stage {
            Stage::Start => self.nodes[i],
            Stage::Mid => self.mids[i],
            Stage::End => self.nodes[i + 1],
        }
    }
}

impl DesignResult {
    /// `Omega = alpha + i beta` ready for the forward solvers.
    pub fn drive(&self) -> DriveSeries {
        DriveSeries::from_nodes(
            self.alpha
                .iter()
                .zip(&self.beta)
                .map(|(&a, &b)| num_complex::Complex64::new(a, b))
                .collect(),
        )
    }

    /// Drive value at `t = 0`.
    pub fn initial_drive(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.alpha[0], self.beta[0])
    }
}

fn check_design_inputs(
    pulse: &dyn InputPulse,
    params: &PhysicalParams,
    grid: &TimeGrid,
) -> Result<()> {
    params.validate()?;
    if !(params.rho_offset > 0.0) {
        return Err(Error::InvalidParameter {
            name: "rho_offset",
            reason: "pulse design needs rho_offset > 0".into(),
        });
    }
    if grid.end() < pulse.duration() * (1.0 - 1e-12) {
        return Err(Error::GridMismatch {
            grid_start: 0.0,
            grid_end: grid.end(),
            support_end: pulse.duration(),
        });
    }
    Ok(())
}

/// Drive that stores `pulse` perfectly through the Lorentzian bath.
pub fn design_drive(
    pulse: &dyn InputPulse,
    params: &PhysicalParams,
    grid: &TimeGrid,
) -> Result<DesignResult> {
    check_design_inputs(pulse, params, grid)?;
    let cavity = cavity_amplitude(pulse, params, grid);
    let n = future_drive_staggered(pulse, &params.spectral(), grid)?;
    let x = intracavity_amplitude(&cavity, &n, pulse, params, grid)?;
    assemble(Regime::NonMarkovian, pulse, params, grid, cavity, x)
}

/// Drive that stores `pulse` perfectly when the bath is memoryless.
pub fn design_drive_markovian(
    pulse: &dyn InputPulse,
    params: &PhysicalParams,
    grid: &TimeGrid,
) -> Result<MarkovianDesignResult> {
    check_design_inputs(pulse, params, grid)?;
    let cavity = cavity_amplitude_markovian(pulse, params, grid);
    let x = markovian_intracavity(&cavity, pulse, params, grid);
    assemble(Regime::Markovian, pulse, params, grid, cavity, x)
}

fn assemble(
    regime: Regime,
    pulse: &dyn InputPulse,
    params: &PhysicalParams,
    grid: &TimeGrid,
    cavity: CavityAmplitude,
    x: IntracavityAmplitude,
) -> Result<DesignResult> {
    let rho = excited_population(&x.x_tilde, &cavity.g, params, grid)?;
    let (d2, delta) = (params.delta2, params.detuning());
    let (gc, gl) = (params.g_cav, params.gamma_l);

    let ratio = x.x_tilde.zip_with(&rho, |x, r| x * x / r);
    let ratio_int = cumulative_simpson(&ratio, grid);
    let a_accum: Vec<f64> = (0..grid.len())
        .map(|i| -delta * grid.t(i) + d2 * ratio_int.nodes[i])
        .collect();

    let len = grid.len();
    let mut alpha = Vec::with_capacity(len);
    let mut beta = Vec::with_capacity(len);
    let mut modulus = Vec::with_capacity(len);
    for (i, phase) in a_accum.iter().enumerate() {
        let xt = x.x_tilde.nodes[i];
        let a = x.x_tilde_dot.nodes[i] - gc * cavity.g.nodes[i] + gl * xt;
        let sr = rho.nodes[i].sqrt();
        let (s, c) = phase.sin_cos();
        alpha.push((a * c + d2 * xt * s) / sr);
        beta.push((d2 * xt * c - a * s) / sr);
        // Written without the phase so it is exactly independent of delta1.
        modulus.push(((a * a + d2 * d2 * xt * xt) / rho.nodes[i]).sqrt());
    }
    let principal: Vec<f64> = alpha.iter().zip(&beta).map(|(&a, &b)| b.atan2(a)).collect();
    let omega_phase = unwrap_phase(&principal);

    Ok(DesignResult {
        regime,
        grid: *grid,
        phi_in: (0..len).map(|i| pulse.value(grid.t(i))).collect(),
        g: cavity.g.nodes,
        g_dot: cavity.g_dot.nodes,
        g_ddot: cavity.g_ddot.nodes,
        x_tilde: x.x_tilde.nodes,
        x_tilde_dot: x.x_tilde_dot.nodes,
        rho_ee: rho.nodes,
        a_accum,
        alpha,
        beta,
        omega_modulus: modulus,
        omega_phase,
        omega_phase_principal: principal,
        drive_n: x.drive_n.nodes,
        memory_z: x.memory_z.nodes,
    })
}

/// Coupling strength that satisfies the equilibrium condition `G'(0) = N(0)`
/// at bandwidth `w`:
/// `Gamma = Phi''(0) / (W^2 int_0^T e^{-W tau} Phi(tau) dtau)`.
pub fn coupling_from_bandwidth(pulse: &dyn InputPulse, w: f64) -> Result<f64> {
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::InvalidParameter {
            name: "bandwidth_w",
            reason: format!("must be finite and > 0, got {w}"),
        });
    }
    let big_t = pulse.duration();
    let curvature = pulse.d2(0.0);
    if !(curvature.abs() > 1e-12 * big_t.powf(-2.5)) {
        return Err(Error::DegeneratePulse);
    }
    let panels = 20_000usize.max((50.0 * w * big_t).ceil() as usize);
    let laplace = simpson_fn(|t| (-w * t).exp() * pulse.value(t), 0.0, big_t, panels);
    let gamma = curvature / (w * w * laplace);
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidPulse(format!(
            "equilibrium condition gives a non-positive coupling ({gamma:.6e})"
        )));
    }
    Ok(gamma)
}

/// Sign statistics of a drive over one time window.
#[derive(Debug, Clone, PartialEq)]
pub struct SignWindow {
    pub start: f64,
    pub end: f64,
    pub min: f64,
    pub max: f64,
    /// Fraction of interior nodes where the drive is negative.
    pub negative_fraction: f64,
}

impl SignWindow {
    pub fn strictly_negative(&self) -> bool {
        self.max < 0.0
    }
    pub fn strictly_positive(&self) -> bool {
        self.min > 0.0
    }
}

/// Interior zeros and local maxima of a sampled envelope, in time order.
/// A zero is a sign change or a local minimum of `|phi|` below `1e-6` of
/// the peak; the latter catches even-order zeros that never change sign.
pub fn envelope_landmarks(phi: &[f64], grid: &TimeGrid) -> Vec<f64> {
    let scale = phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let small = 1e-6 * scale;
    let mut marks = Vec::new();
    for i in 1..phi.len().saturating_sub(1) {
        let (a, b, c) = (phi[i - 1], phi[i], phi[i + 1]);
        let touch = b.abs() < small && b.abs() < a.abs() && b.abs() <= c.abs();
        let crossing = a * b < 0.0;
        let peak = b > a && b >= c && b > small;
        if touch || crossing || peak {
            marks.push(grid.t(i));
        }
    }
    marks
}

/// Splits `[0, T]` at `boundaries` and reports the sign of `omega` on each
/// piece. Nodes within `guard` of a boundary are ignored.
pub fn sign_windows(
    omega: &[f64],
    grid: &TimeGrid,
    boundaries: &[f64],
    guard: f64,
) -> Vec<SignWindow> {
    let mut edges = vec![0.0];
    edges.extend_from_slice(boundaries);
    edges.push(grid.end());
    edges
        .windows(2)
        .map(|e| {
            let (lo, hi) = (e[0] + guard, e[1] - guard);
            let vals: Vec<f64> = (0..grid.len())
                .filter(|&i| grid.t(i) > lo && grid.t(i) < hi)
                .map(|i| omega[i])
                .collect();
            let neg = vals.iter().filter(|v| **v < 0.0).count();
            SignWindow {
                start: e[0],
                end: e[1],
                min: vals.iter().copied().fold(f64::INFINITY, f64::min),
                max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                negative_fraction: if vals.is_empty() {
                    0.0
                } else {
                    neg as f64 / vals.len() as f64
                },
            }
        })
        .collect()
}

/// Times at which a sampled series changes sign.
pub fn sign_changes(series: &[f64], grid: &TimeGrid) -> Vec<f64> {
    (1..series.len())
        .filter(|&i| (series[i] < 0.0) != (series[i - 1] < 0.0))
        .map(|i| grid.t(i))
        .collect()
}
