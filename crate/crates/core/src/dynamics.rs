//! Forward solvers for the single-excitation amplitudes.
//!
//! Both reduced solvers carry the convolutions over the bath as extra
//! linear ODEs (the kernels are single exponentials), plus running
//! integrals of the emitted flux, the atomic loss and the consumed input so
//! the excitation budget can be closed without a second quadrature pass.

pub mod bath;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Stage, TimeGrid};
use crate::model::{future_drive_staggered, pulse_series, InputPulse, PhysicalParams};
use crate::numerics::{trapezoid, Rk4};
use crate::pulse_design::DriveSeries;

pub use bath::{simulate_discrete_bath, BathDiscretization};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Amplitudes at `t = 0`: cavity `G`, lower level `E`, upper level `X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub g_amp: Complex64,
    pub e_amp: Complex64,
    pub x_amp: Complex64,
}

impl InitialState {
    pub fn new(g_amp: Complex64, e_amp: Complex64, x_amp: Complex64) -> Result<Self> {
        let s = Self {
            g_amp,
            e_amp,
            x_amp,
        };
        let norm = s.norm_sqr();
        if !(norm.is_finite() && norm <= 1.0 + 1e-12) {
            return Err(Error::InvalidParameter {
                name: "initial_state",
                reason: format!("total population {norm} exceeds 1"),
            });
        }
        Ok(s)
    }

    /// Everything in the ground manifold of the atom-cavity system.
    pub fn empty() -> Self {
        Self {
            g_amp: ZERO,
            e_amp: ZERO,
            x_amp: ZERO,
        }
    }

    /// The state a design with offset `rho_offset` assumes: `E(0) = sqrt(rho_offset)`.
    pub fn with_offset(rho_offset: f64) -> Result<Self> {
        Self::new(ZERO, Complex64::new(rho_offset.max(0.0).sqrt(), 0.0), ZERO)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.g_amp.norm_sqr() + self.e_amp.norm_sqr() + self.x_amp.norm_sqr()
    }
}

/// Which equations produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    NonMarkovian,
    Markovian,
    DiscreteBath,
}

/// Node series of a forward run. All vectors have `grid.len()` entries.
///
/// `z_mem` and `y_out` are complex because detuned runs rotate `G` out of
/// the real axis; in resonant runs their imaginary parts vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub solver: Solver,
    pub grid: TimeGrid,
    pub phi_in: Vec<f64>,
    pub g: Vec<Complex64>,
    pub e: Vec<Complex64>,
    pub x: Vec<Complex64>,
    pub phi_out: Vec<Complex64>,
    /// Memory term `int f(t - tau) G(tau) dtau`.
    pub z_mem: Vec<Complex64>,
    /// Output convolution `int h(t - tau) G(tau) dtau`.
    pub y_out: Vec<Complex64>,
    /// `int_0^t |Phi_out|^2`.
    pub emitted: Vec<f64>,
    /// `int_0^t 2 gamma_L |X|^2`.
    pub lost: Vec<f64>,
    /// `int_0^t Phi_in^2`.
    pub consumed: Vec<f64>,
    /// Future drive `N(t)` at the nodes (zero for the other solvers).
    pub drive_n: Vec<f64>,
}

impl Trajectory {
    fn with_capacity(solver: Solver, grid: &TimeGrid) -> Self {
        let n = grid.len();
        Self {
            solver,
            grid: *grid,
            phi_in: Vec::with_capacity(n),
            g: Vec::with_capacity(n),
            e: Vec::with_capacity(n),
            x: Vec::with_capacity(n),
            phi_out: Vec::with_capacity(n),
            z_mem: Vec::with_capacity(n),
            y_out: Vec::with_capacity(n),
            emitted: Vec::with_capacity(n),
            lost: Vec::with_capacity(n),
            consumed: Vec::with_capacity(n),
            drive_n: Vec::with_capacity(n),
        }
    }

    /// `|E|^2`, the population of the storage level.
    pub fn rho_ee(&self) -> Vec<f64> {
        self.e.iter().map(|e| e.norm_sqr()).collect()
    }
}

/// Scalar summary of a forward run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StorageMetrics {
    /// `int |Phi_out|^2 dt`, trapezoidal on the nodes.
    pub reflected: f64,
    pub final_rho_ee: f64,
    pub final_cavity: f64,
    pub peak_upper: f64,
}

pub fn storage_metrics(traj: &Trajectory) -> StorageMetrics {
    let flux: Vec<f64> = traj.phi_out.iter().map(|p| p.norm_sqr()).collect();
    let last = traj.g.len().saturating_sub(1);
    StorageMetrics {
        reflected: trapezoid(&flux, traj.grid.dt()),
        final_rho_ee: traj.e.get(last).map_or(0.0, |e| e.norm_sqr()),
        final_cavity: traj.g.get(last).map_or(0.0, |g| g.norm_sqr()),
        peak_upper: traj.x.iter().map(|x| x.norm_sqr()).fold(0.0, f64::max),
    }
}

/// Total probability at every node: atom-cavity populations, emitted and
/// lost flux, input not yet arrived, and (non-Markovian) the excitation
/// held by the structured part of the bath,
/// `|y|^2 / (2W) - 2 Re(y) N / (W sqrt(Gamma))`.
///
/// For a normalized input this stays equal to `1 + |init|^2`.
pub fn excitation_budget(traj: &Trajectory, params: &PhysicalParams) -> Vec<f64> {
    let total_in = traj.consumed.last().copied().unwrap_or(0.0).max(1.0);
    let w = params.bandwidth_w;
    let sg = params.big_gamma.sqrt();
    (0..traj.g.len())
        .map(|i| {
            let system = traj.g[i].norm_sqr() + traj.e[i].norm_sqr() + traj.x[i].norm_sqr();
            let structured = match traj.solver {
                Solver::NonMarkovian => {
                    let y = traj.y_out[i];
                    y.norm_sqr() / (2.0 * w) - 2.0 * y.re * traj.drive_n[i] / (w * sg)
                }
                _ => 0.0,
            };
            system + traj.emitted[i] + traj.lost[i] + (total_in - traj.consumed[i]) + structured
        })
        .collect()
}

fn check_drive(drive: &DriveSeries, grid: &TimeGrid) -> Result<()> {
    if drive.nodes.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            found: drive.nodes.len(),
        });
    }
    if drive.mids.len() != grid.steps() {
        return Err(Error::LengthMismatch {
            expected: grid.steps(),
            found: drive.mids.len(),
        });
    }
    Ok(())
}

#[inline]
fn stage_time(grid: &TimeGrid, i: usize, stage: Stage) -> f64 {
    match stage {
        Stage::Start => grid.t(i),
        Stage::Mid => grid.mid(i),
        Stage::End => grid.t(i + 1),
    }
}

fn ensure_finite(state: &[Complex64], t: f64) -> Result<()> {
    if state.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteState { t })
    }
}

// State layout shared by the reduced solvers.
const G: usize = 0;
const E: usize = 1;
const X: usize = 2;
const Z: usize = 3;
const Y: usize = 4;
const EMIT: usize = 5;
const LOSS: usize = 6;
const USED: usize = 7;
const DIM: usize = 8;

/// Atom and drive part of the right-hand side, shared by every solver.
/// Returns `(dE, dX)` and the `-i g X e^{-i delta2 t}` term of `dG`.
#[inline]
pub(crate) fn atom_rhs(
    params: &PhysicalParams,
    t: f64,
    omega: Complex64,
    g: Complex64,
    e: Complex64,
    x: Complex64,
) -> (Complex64, Complex64, Complex64) {
    let i = Complex64::i();
    let rot1 = Complex64::from_polar(1.0, params.delta1 * t);
    let rot2 = Complex64::from_polar(1.0, params.delta2 * t);
    let de = -i * omega.conj() * rot1.conj() * x;
    let dx = -i * omega * rot1 * e - i * params.g_cav * g * rot2 - x * params.gamma_l;
    let dg_atom = -i * params.g_cav * x * rot2.conj();
    (de, dx, dg_atom)
}

/// Integrates the memory-kernel equations of motion under drive `drive`.
pub fn simulate_nonmarkovian(
    pulse: &dyn InputPulse,
    drive: &DriveSeries,
    params: &PhysicalParams,
    init: &InitialState,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    params.validate()?;
    check_drive(drive, grid)?;
    let n = future_drive_staggered(pulse, &params.spectral(), grid)?;
    let phi = pulse_series(pulse, grid);
    let w = params.bandwidth_w;
    let gam = params.big_gamma;
    let sg = gam.sqrt();
    let dt = grid.dt();

    let mut state = [ZERO; DIM];
    state[G] = init.g_amp;
    state[E] = init.e_amp;
    state[X] = init.x_amp;
    let mut traj = Trajectory::with_capacity(Solver::NonMarkovian, grid);
    let record = |traj: &mut Trajectory, s: &[Complex64], i: usize| {
        traj.phi_in.push(phi.nodes[i]);
        traj.g.push(s[G]);
        traj.e.push(s[E]);
        traj.x.push(s[X]);
        traj.z_mem.push(s[Z]);
        traj.y_out.push(s[Y]);
        traj.phi_out.push(s[Y] - phi.nodes[i]);
        traj.emitted.push(s[EMIT].re);
        traj.lost.push(s[LOSS].re);
        traj.consumed.push(s[USED].re);
        traj.drive_n.push(n.nodes[i]);
    };
    record(&mut traj, &state, 0);

    let mut rk = Rk4::<Complex64>::new(DIM);
    for i in 0..grid.steps() {
        rk.step(&mut state, dt, |stage, s, d| {
            let t = stage_time(grid, i, stage);
            let (p, nv) = (phi.at(i, stage), n.at(i, stage));
            let (de, dx, dg_atom) = atom_rhs(params, t, drive.at(i, stage), s[G], s[E], s[X]);
            let out = s[Y] - p;
            d[G] = dg_atom + nv - s[Z];
            d[E] = de;
            d[X] = dx;
            d[Z] = -s[Z] * w + s[G] * (0.5 * w * gam);
            d[Y] = -s[Y] * w + s[G] * (w * sg);
            d[EMIT] = Complex64::new(out.norm_sqr(), 0.0);
            d[LOSS] = Complex64::new(2.0 * params.gamma_l * s[X].norm_sqr(), 0.0);
            d[USED] = Complex64::new(p * p, 0.0);
        });
        ensure_finite(&state, grid.t(i + 1))?;
        record(&mut traj, &state, i + 1);
    }
    Ok(traj)
}

/// Integrates the memoryless equations: drive `sqrt(Gamma) Phi_in`,
/// damping `Gamma G / 2`, output `sqrt(Gamma) G - Phi_in`.
pub fn simulate_markovian(
    pulse: &dyn InputPulse,
    drive: &DriveSeries,
    params: &PhysicalParams,
    init: &InitialState,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    params.validate()?;
    check_drive(drive, grid)?;
    if grid.end() < pulse.duration() * (1.0 - 1e-12) {
        return Err(Error::GridMismatch {
            grid_start: 0.0,
            grid_end: grid.end(),
            support_end: pulse.duration(),
        });
    }
    let phi = pulse_series(pulse, grid);
    let gam = params.big_gamma;
    let sg = gam.sqrt();
    let dt = grid.dt();

    let mut state = [ZERO; DIM];
    state[G] = init.g_amp;
    state[E] = init.e_amp;
    state[X] = init.x_amp;
    let mut traj = Trajectory::with_capacity(Solver::Markovian, grid);
    let record = |traj: &mut Trajectory, s: &[Complex64], i: usize| {
        traj.phi_in.push(phi.nodes[i]);
        traj.g.push(s[G]);
        traj.e.push(s[E]);
        traj.x.push(s[X]);
        traj.z_mem.push(s[G] * (0.5 * gam));
        traj.y_out.push(s[G] * sg);
        traj.phi_out.push(s[G] * sg - phi.nodes[i]);
        traj.emitted.push(s[EMIT].re);
        traj.lost.push(s[LOSS].re);
        traj.consumed.push(s[USED].re);
        traj.drive_n.push(0.0);
    };
    record(&mut traj, &state, 0);

    let mut rk = Rk4::<Complex64>::new(DIM);
    for i in 0..grid.steps() {
        rk.step(&mut state, dt, |stage, s, d| {
            let t = stage_time(grid, i, stage);
            let p = phi.at(i, stage);
            let (de, dx, dg_atom) = atom_rhs(params, t, drive.at(i, stage), s[G], s[E], s[X]);
            let out = s[G] * sg - p;
            d[G] = dg_atom + sg * p - s[G] * (0.5 * gam);
            d[E] = de;
            d[X] = dx;
            d[Z] = ZERO;
            d[Y] = ZERO;
            d[EMIT] = Complex64::new(out.norm_sqr(), 0.0);
            d[LOSS] = Complex64::new(2.0 * params.gamma_l * s[X].norm_sqr(), 0.0);
            d[USED] = Complex64::new(p * p, 0.0);
        });
        ensure_finite(&state, grid.t(i + 1))?;
        record(&mut traj, &state, i + 1);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DoubleLobePulse;
    use crate::pulse_design::{design_drive, design_drive_markovian};
    use std::f64::consts::PI;

    struct Silent;

    impl InputPulse for Silent {
        fn duration(&self) -> f64 {
            1.0
        }
        fn value(&self, _t: f64) -> f64 {
            0.0
        }
        fn d1(&self, _t: f64) -> f64 {
            0.0
        }
        fn d2(&self, _t: f64) -> f64 {
            0.0
        }
        fn d3(&self, _t: f64) -> f64 {
            0.0
        }
    }

    fn lobe() -> DoubleLobePulse {
        DoubleLobePulse::new(PI).unwrap()
    }

    fn params(w: f64, rho: f64) -> PhysicalParams {
        PhysicalParams {
            g_cav: 30.0 * PI,
            gamma_l: 6.0 * PI,
            delta1: 0.0,
            delta2: 0.0,
            big_gamma: lobe().equilibrium_coupling(w),
            bandwidth_w: w,
            rho_offset: rho,
            pulse_duration: PI,
        }
    }

    fn grid() -> TimeGrid {
        TimeGrid::with_step(PI, 1e-4).unwrap()
    }

    #[test]
    fn silence_stays_silent() {
        let g = TimeGrid::with_step(1.0, 1e-3).unwrap();
        let drive = DriveSeries::from_nodes(vec![Complex64::new(3.0, -1.0); g.len()]);
        let pr = params(2.0, 0.002);
        for traj in [
            simulate_nonmarkovian(&Silent, &drive, &pr, &InitialState::empty(), &g).unwrap(),
            simulate_markovian(&Silent, &drive, &pr, &InitialState::empty(), &g).unwrap(),
        ] {
            assert!(traj
                .g
                .iter()
                .chain(&traj.e)
                .chain(&traj.x)
                .all(|c| c.norm() == 0.0));
            let m = storage_metrics(&traj);
            assert_eq!(
                (m.reflected, m.final_rho_ee, m.final_cavity, m.peak_upper),
                (0.0, 0.0, 0.0, 0.0)
            );
        }
    }

    #[test]
    fn initial_state_norm_is_bounded() {
        let one = Complex64::new(1.0, 0.0);
        assert!(InitialState::new(one, one, ZERO).is_err());
        assert!(InitialState::new(ZERO, one, ZERO).is_ok());
    }

    #[test]
    fn matched_design_is_not_reflected() {
        let p = lobe();
        let pr = params(1.6716, 0.002);
        let g = grid();
        let d = design_drive(&p, &pr, &g).unwrap();
        let traj = simulate_nonmarkovian(
            &p,
            &d.drive(),
            &pr,
            &InitialState::with_offset(0.002).unwrap(),
            &g,
        )
        .unwrap();
        let m = storage_metrics(&traj);
        assert!(m.reflected <= 1e-6, "{}", m.reflected);
        // the forward run reproduces the designed population
        let err = traj
            .rho_ee()
            .iter()
            .zip(&d.rho_ee)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-9);
        // and the intended cavity amplitude
        let gerr = traj
            .g
            .iter()
            .zip(&d.g)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(gerr < 1e-9);
    }

    #[test]
    fn mismatch_reflection_is_bounded_by_the_offset() {
        // Linearity: the mismatched run is the matched run minus the free
        // evolution of sqrt(rho_offset), so at most rho_offset is re-emitted.
        let p = lobe();
        let pr = params(1.6716, 0.002);
        let g = grid();
        let d = design_drive(&p, &pr, &g).unwrap();
        let traj = simulate_nonmarkovian(&p, &d.drive(), &pr, &InitialState::empty(), &g).unwrap();
        let r = storage_metrics(&traj).reflected;
        assert!(r > 0.0 && r <= 0.002, "{r}");
    }

    #[test]
    fn detuned_round_trip_is_matched() {
        let p = lobe();
        let pr = PhysicalParams {
            delta1: 20.0,
            delta2: 5.0,
            ..params(1.6716, 0.002)
        };
        let g = grid();
        let d = design_drive(&p, &pr, &g).unwrap();
        let traj = simulate_nonmarkovian(
            &p,
            &d.drive(),
            &pr,
            &InitialState::with_offset(0.002).unwrap(),
            &g,
        )
        .unwrap();
        assert!(storage_metrics(&traj).reflected <= 1e-6);
    }

    #[test]
    fn markovian_round_trip_is_matched() {
        let p = lobe();
        let pr = params(25.0, 0.0075);
        let g = grid();
        let d = design_drive_markovian(&p, &pr, &g).unwrap();
        let traj = simulate_markovian(
            &p,
            &d.drive(),
            &pr,
            &InitialState::with_offset(0.0075).unwrap(),
            &g,
        )
        .unwrap();
        assert!(storage_metrics(&traj).reflected <= 1e-6);
    }

    #[test]
    fn backflow_at_narrow_bandwidth() {
        let p = lobe();
        let pr = params(0.5, 0.0075);
        let g = grid();
        let d = design_drive(&p, &pr, &g).unwrap();
        let traj = simulate_nonmarkovian(
            &p,
            &d.drive(),
            &pr,
            &InitialState::with_offset(0.0075).unwrap(),
            &g,
        )
        .unwrap();
        let rho = traj.rho_ee();
        assert!(rho.windows(2).any(|w| w[1] < w[0] - 1e-9));
    }

    #[test]
    fn reduced_solvers_agree_for_a_wide_band() {
        let p = lobe();
        let pr = params(400.0, 0.0075);
        let g = grid();
        let d = design_drive(&p, &pr, &g).unwrap();
        let init = InitialState::with_offset(0.0075).unwrap();
        let nm = simulate_nonmarkovian(&p, &d.drive(), &pr, &init, &g).unwrap();
        let mk = simulate_markovian(&p, &d.drive(), &pr, &init, &g).unwrap();
        let sup =
            nm.g.iter()
                .zip(&mk.g)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
        assert!(sup <= 0.02, "{sup}");
    }

    #[test]
    fn memory_and_output_match_direct_convolution() {
        let p = lobe();
        let pr = params(2.0, 0.002);
        let g = grid();
        let d = design_drive(&p, &pr, &g).unwrap();
        let traj = simulate_nonmarkovian(
            &p,
            &d.drive(),
            &pr,
            &InitialState::with_offset(0.002).unwrap(),
            &g,
        )
        .unwrap();
        let spec = pr.spectral();
        let dt = g.dt();
        for i in [3000usize, 15000, 31000] {
            let (mut z, mut y) = (0.0, 0.0);
            for j in 0..=i {
                let wgt = if j == 0 || j == i { 0.5 } else { 1.0 };
                let lag = g.t(i) - g.t(j);
                z += wgt * spec.memory_kernel(lag) * traj.g[j].re;
                y += wgt * spec.impulse_response(lag) * traj.g[j].re;
            }
            assert!((traj.z_mem[i].re - z * dt).abs() < 1e-6);
            // input-output relation
            assert!((traj.phi_in[i] + traj.phi_out[i].re - y * dt).abs() < 1e-6);
        }
    }

    #[test]
    fn lossless_budget_is_conserved() {
        let p = lobe();
        let pr = PhysicalParams {
            gamma_l: 0.0,
            ..params(1.6716, 0.002)
        };
        let g = grid();
        let d = design_drive(&p, &pr, &g).unwrap();
        for init in [
            InitialState::empty(),
            InitialState::with_offset(0.002).unwrap(),
        ] {
            let traj = simulate_nonmarkovian(&p, &d.drive(), &pr, &init, &g).unwrap();
            let b = excitation_budget(&traj, &pr);
            let drift = b.iter().map(|v| (v - b[0]).abs()).fold(0.0, f64::max);
            assert!(drift <= 1e-6, "{drift}");
            assert!((b[0] - 1.0 - init.norm_sqr()).abs() < 1e-9);
        }
    }

    #[test]
    fn lossy_budget_closes_with_the_loss_channel() {
        let p = lobe();
        let pr = params(0.5, 0.0075);
        let g = grid();
        let d = design_drive_markovian(&p, &pr, &g).unwrap();
        let traj = simulate_markovian(&p, &d.drive(), &pr, &InitialState::empty(), &g).unwrap();
        let b = excitation_budget(&traj, &pr);
        assert!(b.iter().all(|v| (v - b[0]).abs() < 1e-6));
        assert!(*traj.lost.last().unwrap() > 0.0);
    }

    #[test]
    fn blow_up_is_reported() {
        let p = lobe();
        let pr = params(2.0, 0.002);
        let g = TimeGrid::with_step(PI, 1e-3).unwrap();
        let mut nodes = vec![Complex64::new(1.0, 0.0); g.len()];
        nodes[500] = Complex64::new(f64::NAN, 0.0);
        let drive = DriveSeries::from_nodes(nodes);
        let err = simulate_nonmarkovian(&p, &drive, &pr, &InitialState::empty(), &g).unwrap_err();
        match err {
            Error::NonFiniteState { t } => assert!(t > 0.49 && t < 0.51, "{t}"),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn drive_length_is_checked() {
        let p = lobe();
        let g = TimeGrid::with_step(PI, 1e-3).unwrap();
        let drive = DriveSeries::from_nodes(vec![ZERO; 10]);
        assert!(matches!(
            simulate_markovian(&p, &drive, &params(2.0, 0.002), &InitialState::empty(), &g),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
