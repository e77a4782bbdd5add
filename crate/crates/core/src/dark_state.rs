//! Adiabatic transfer through the cavity dark state (resonant case only).
//!
//! With the bright state eliminated, the dark amplitude `d1` obeys a single
//! memory equation driven through the mixing angle `phi`,
//! `tan(phi) = g_cav / Omega`. Impedance matching then requires
//! `cos(phi) d1 = G`, which fixes the angle and hence the drive.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Staggered, TimeGrid};
use crate::model::{future_drive_staggered, pulse_series, InputPulse, PhysicalParams};
use crate::numerics::{cumulative_simpson, Rk4};
use crate::pulse_design::{cavity_amplitude, intracavity_amplitude, DesignResult};

/// `|cos(phi)|` may exceed one by this much before the design is rejected.
pub const ANGLE_SLACK: f64 = 1e-8;
/// Most negative `2 int M` accepted.
pub const ACCUMULATOR_SLACK: f64 = 1e-10;

/// `D = -cos(phi) G + sin(phi) E`, `B = sin(phi) G + cos(phi) E`.
pub fn dark_bright_amplitudes(
    g_amp: Complex64,
    e_amp: Complex64,
    phi: f64,
) -> (Complex64, Complex64) {
    let (s, c) = phi.sin_cos();
    (-g_amp * c + e_amp * s, g_amp * s + e_amp * c)
}

/// `g_cav^2 / (gamma_L Gamma)`; infinite without atomic loss.
pub fn adiabaticity_margin(params: &PhysicalParams) -> f64 {
    if params.gamma_l == 0.0 {
        f64::INFINITY
    } else {
        params.g_cav * params.g_cav / (params.gamma_l * params.big_gamma)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DarkDesign {
    pub grid: TimeGrid,
    pub g: Vec<f64>,
    pub d1: Vec<f64>,
    /// `G^2 + 2 g_cav int G x~`, the numerically preferred form of `d1^2`.
    pub d1_sq: Vec<f64>,
    /// `2 int M`, the same quantity accumulated from `M` directly.
    pub two_int_m: Vec<f64>,
    pub cos_phi: Vec<f64>,
    pub mixing_angle: Vec<f64>,
    /// `g_cav / tan(phi)`; infinite at `t = 0`, where the dark state
    /// starts as the bare cavity mode.
    pub omega_adiabatic: Vec<f64>,
    /// `M = G (N - Z)`.
    pub m_integrand: Vec<f64>,
    pub(crate) cos_phi_mids: Vec<f64>,
}

fn require_resonant(params: &PhysicalParams) -> Result<()> {
    if params.is_resonant() {
        Ok(())
    } else {
        Err(Error::UnsupportedRegime(format!(
            "dark-state transfer is only implemented for delta1 = delta2 = 0 (got {}, {})",
            params.delta1, params.delta2
        )))
    }
}

/// Mixing angle and drive that keep the cavity impedance matched while the
/// excitation follows the dark state.
///
/// `d1^2` is formed as `G^2 + Q` with `Q = 2 g_cav int_0^t G x~`, which equals
/// `2 int M` analytically but keeps `|cos(phi)| <= 1` exact whenever `Q >= 0`.
/// At `t = 0` both `G` and `d1` vanish; the limit `cos(phi) -> sign(G'(0))`
/// is used there.
pub fn adiabatic_design(
    pulse: &dyn InputPulse,
    params: &PhysicalParams,
    grid: &TimeGrid,
) -> Result<DarkDesign> {
    params.validate()?;
    require_resonant(params)?;
    let cavity = cavity_amplitude(pulse, params, grid);
    let n = future_drive_staggered(pulse, &params.spectral(), grid)?;
    let x = intracavity_amplitude(&cavity, &n, pulse, params, grid)?;
    let g = &cavity.g;

    let m = Staggered {
        nodes: (0..grid.len())
            .map(|i| g.nodes[i] * (n.nodes[i] - x.memory_z.nodes[i]))
            .collect(),
        mids: (0..grid.steps())
            .map(|i| g.mids[i] * (n.mids[i] - x.memory_z.mids[i]))
            .collect(),
    };
    let two_int_m = cumulative_simpson(&m, grid).map(|v| 2.0 * v);
    let gx = g.zip_with(&x.x_tilde, |a, b| params.g_cav * a * b);
    let q = cumulative_simpson(&gx, grid).map(|v| 2.0 * v);

    for i in 0..grid.len() {
        if two_int_m.nodes[i] < -ACCUMULATOR_SLACK {
            return Err(Error::NegativeAccumulator {
                t: grid.t(i),
                value: two_int_m.nodes[i],
            });
        }
    }

    let sign0 = if cavity.g_dot.nodes[0] < 0.0 {
        -1.0
    } else {
        1.0
    };
    let angle = |t: f64, gv: f64, qv: f64| -> Result<(f64, f64, f64)> {
        let d_sq = gv * gv + qv.max(0.0);
        if qv < 0.0 {
            // |cos(phi)| computed with the unclamped accumulator
            let raw = gv * gv + qv;
            let ratio = if raw > 0.0 {
                gv.abs() / raw.sqrt()
            } else {
                f64::INFINITY
            };
            if ratio > 1.0 + ANGLE_SLACK {
                return Err(Error::AngleDomain { t, ratio });
            }
        }
        let d1 = d_sq.sqrt();
        if t == 0.0 || d1 == 0.0 {
            // G(0) is zero up to rounding, so its sign carries no information
            return Ok((d1, sign0, 0.0));
        }
        Ok((d1, gv / d1, -qv.max(0.0).sqrt() / d1))
    };

    let len = grid.len();
    let mut d1 = Vec::with_capacity(len);
    let mut d1_sq = Vec::with_capacity(len);
    let mut cos_phi = Vec::with_capacity(len);
    let mut mixing = Vec::with_capacity(len);
    let mut omega = Vec::with_capacity(len);
    for i in 0..len {
        let (gv, qv) = (g.nodes[i], q.nodes[i]);
        let (d, c, s) = angle(grid.t(i), gv, qv)?;
        d1.push(d);
        d1_sq.push(d * d);
        cos_phi.push(c);
        mixing.push(s.atan2(c));
        omega.push(if s == 0.0 {
            -c.signum() * f64::INFINITY
        } else {
            params.g_cav * c / s
        });
    }
    let mut cos_phi_mids = Vec::with_capacity(grid.steps());
    for i in 0..grid.steps() {
        cos_phi_mids.push(angle(grid.mid(i), g.mids[i], q.mids[i])?.1);
    }

    Ok(DarkDesign {
        grid: *grid,
        g: g.nodes.clone(),
        d1,
        d1_sq,
        two_int_m: two_int_m.nodes,
        cos_phi,
        mixing_angle: mixing,
        omega_adiabatic: omega,
        m_integrand: m.nodes,
        cos_phi_mids,
    })
}

/// Result of integrating the adiabatic dark-state equation.
#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticRun {
    pub d1: Vec<f64>,
    pub phi_out: Vec<f64>,
    /// Dark population, emitted flux, remaining input and structured-bath
    /// excitation; constant in exact arithmetic.
    pub budget: Vec<f64>,
    /// `max_t |budget(t) - budget(0)|`.
    pub conservation_drift: f64,
    /// `int |Phi_out|^2` over the grid.
    pub reflected: f64,
}

/// Integrates `d1' = cos(phi) (N - Z_d)` with `Z_d` the memory of
/// `cos(phi) d1`, and the output `Phi_out = int h cos(phi) d1 - Phi_in`.
pub fn adiabatic_simulate(
    pulse: &dyn InputPulse,
    design: &DarkDesign,
    params: &PhysicalParams,
    grid: &TimeGrid,
) -> Result<AdiabaticRun> {
    params.validate()?;
    require_resonant(params)?;
    grid.check_len(design.cos_phi.len())?;
    let n = future_drive_staggered(pulse, &params.spectral(), grid)?;
    let phi = pulse_series(pulse, grid);
    let cos = Staggered {
        nodes: design.cos_phi.clone(),
        mids: design.cos_phi_mids.clone(),
    };
    let w = params.bandwidth_w;
    let gam = params.big_gamma;
    let sg = gam.sqrt();
    let dt = grid.dt();

    // d1, Z_d, y_d, emitted, consumed
    let mut state = [0.0f64; 5];
    let mut d1 = vec![0.0];
    let mut out = vec![-phi.nodes[0]];
    let mut budget_parts = vec![(0.0, 0.0, 0.0, 0.0)];
    let mut rk = Rk4::<f64>::new(5);
    for i in 0..grid.steps() {
        rk.step(&mut state, dt, |stage, s, d| {
            let (c, nv, p) = (cos.at(i, stage), n.at(i, stage), phi.at(i, stage));
            let o = s[2] - p;
            d[0] = c * (nv - s[1]);
            d[1] = -w * s[1] + 0.5 * w * gam * c * s[0];
            d[2] = -w * s[2] + w * sg * c * s[0];
            d[3] = o * o;
            d[4] = p * p;
        });
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t: grid.t(i + 1) });
        }
        d1.push(state[0]);
        out.push(state[2] - phi.nodes[i + 1]);
        budget_parts.push((state[2], state[3], state[4], 0.0));
    }
    let total_in = budget_parts.last().map_or(0.0, |b| b.2).max(1.0);
    let budget: Vec<f64> = (0..grid.len())
        .map(|i| {
            let (y, emitted, consumed, _) = budget_parts[i];
            d1[i] * d1[i] + emitted + (total_in - consumed) + y * y / (2.0 * w)
                - 2.0 * y * n.nodes[i] / (w * sg)
        })
        .collect();
    let conservation_drift = budget
        .iter()
        .map(|b| (b - budget[0]).abs())
        .fold(0.0, f64::max);
    let reflected = budget_parts.last().map_or(0.0, |b| b.1);
    Ok(AdiabaticRun {
        d1,
        phi_out: out,
        budget,
        conservation_drift,
        reflected,
    })
}

/// Dark-state amplitude of the exact resonant design,
/// `G cos(phi1) - sqrt(rho_ee) sin(phi1)` with `phi1 = atan2(g_cav, Omega)`.
///
/// The two-argument arctangent keeps `phi1` in `(0, pi)` for either sign of
/// the drive; a one-argument arctangent would flip the sign of the amplitude
/// where `Omega < 0` and leave the population unchanged.
pub fn exact_dark_population(design: &DesignResult, params: &PhysicalParams) -> Result<Vec<f64>> {
    require_resonant(params)?;
    Ok((0..design.g.len())
        .map(|i| {
            let phi1 = params.g_cav.atan2(design.alpha[i]);
            let (s, c) = phi1.sin_cos();
            design.g[i] * c - design.rho_ee[i].sqrt() * s
        })
        .collect())
}

/// Adiabatic and exact dark populations side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct DarkComparison {
    pub d1_sq: Vec<f64>,
    pub d_dark_sq: Vec<f64>,
    pub sup_diff: f64,
    /// Time of the largest `|Omega_adiabatic - Omega_exact|` over nodes where
    /// both are finite.
    pub omega_gap_at: f64,
}

pub fn dark_comparison(
    dark: &DarkDesign,
    exact: &DesignResult,
    params: &PhysicalParams,
) -> Result<DarkComparison> {
    let d = exact_dark_population(exact, params)?;
    dark.grid.check_len(d.len())?;
    let d_dark_sq: Vec<f64> = d.iter().map(|v| v * v).collect();
    let sup_diff = dark
        .d1_sq
        .iter()
        .zip(&d_dark_sq)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..d.len() {
        let gap = (dark.omega_adiabatic[i] - exact.alpha[i]).abs();
        if gap.is_finite() && gap > best.0 {
            best = (gap, dark.grid.t(i));
        }
    }
    Ok(DarkComparison {
        d1_sq: dark.d1_sq.clone(),
        d_dark_sq,
        sup_diff,
        omega_gap_at: best.1,
    })
}
