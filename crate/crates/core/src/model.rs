//! System constants, input wavepackets and the Lorentzian bath kernels.
//!
//! Units: frequencies are in MHz read as rad/us and times are in us, so a
//! product such as `g_cav * t` is a dimensionless phase. The rotating frame
//! is centred on the cavity frequency, so every spectrum is a function of the
//! detuning from it.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Staggered, TimeGrid};
use crate::numerics::{hermite_mid, simpson_fn, Rk4};

/// All constants of the atom-cavity-bath system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Atom-cavity coupling (MHz rad).
    pub g_cav: f64,
    /// Spontaneous-emission amplitude damping of the upper level (MHz rad).
    pub gamma_l: f64,
    /// Drive detuning (MHz rad).
    pub delta1: f64,
    /// Cavity detuning (MHz rad).
    pub delta2: f64,
    /// Cavity-input coupling strength (MHz).
    pub big_gamma: f64,
    /// Bath bandwidth (MHz).
    pub bandwidth_w: f64,
    /// Initial excited-state population assumed by the pulse design.
    pub rho_offset: f64,
    /// Support length of the input wavepacket (us).
    pub pulse_duration: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and > 0, got {v}"),
                })
            }
        }
        fn finite(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite, got {v}"),
                })
            }
        }
        positive("g_cav", self.g_cav)?;
        positive("big_gamma", self.big_gamma)?;
        positive("bandwidth_w", self.bandwidth_w)?;
        positive("pulse_duration", self.pulse_duration)?;
        finite("delta1", self.delta1)?;
        finite("delta2", self.delta2)?;
        if !(self.gamma_l.is_finite() && self.gamma_l >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "gamma_L",
                reason: format!("must be finite and >= 0, got {}", self.gamma_l),
            });
        }
        if !(self.rho_offset >= 0.0 && self.rho_offset < 1.0) {
            return Err(Error::InvalidParameter {
                name: "rho_offset",
                reason: format!("must lie in [0, 1), got {}", self.rho_offset),
            });
        }
        Ok(())
    }

    /// `delta2 - delta1`.
    pub fn detuning(&self) -> f64 {
        self.delta2 - self.delta1
    }

    pub fn spectral(&self) -> SpectralModel {
        SpectralModel {
            big_gamma: self.big_gamma,
            bandwidth_w: self.bandwidth_w,
        }
    }

    pub fn is_resonant(&self) -> bool {
        self.delta1 == 0.0 && self.delta2 == 0.0
    }
}

/// Lorentzian cavity-bath coupling `kappa(w) = sqrt(Gamma/2pi) W / (W - i w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralModel {
    pub big_gamma: f64,
    pub bandwidth_w: f64,
}

impl SpectralModel {
    pub fn new(big_gamma: f64, bandwidth_w: f64) -> Result<Self> {
        if !(big_gamma.is_finite() && big_gamma > 0.0) {
            return Err(Error::InvalidParameter {
                name: "big_gamma",
                reason: format!("must be finite and > 0, got {big_gamma}"),
            });
        }
        if !(bandwidth_w.is_finite() && bandwidth_w > 0.0) {
            return Err(Error::InvalidParameter {
                name: "bandwidth_w",
                reason: format!("must be finite and > 0, got {bandwidth_w}"),
            });
        }
        Ok(Self {
            big_gamma,
            bandwidth_w,
        })
    }

    /// Complex coupling amplitude at detuning `omega` from the cavity.
    pub fn coupling(&self, omega: f64) -> Complex64 {
        let w = self.bandwidth_w;
        let amp = (self.big_gamma / (2.0 * PI)).sqrt();
        Complex64::new(amp * w, 0.0) / Complex64::new(w, -omega)
    }

    /// Spectral density `J(w) = |kappa(w)|^2`.
    pub fn density(&self, omega: f64) -> f64 {
        let w = self.bandwidth_w;
        self.big_gamma / (2.0 * PI) * w * w / (w * w + omega * omega)
    }

    /// One-sided impulse response `h(t) = W sqrt(Gamma) e^{-W t}` for
    /// `t >= 0`, zero before. The step is taken right-continuous.
    pub fn impulse_response(&self, t: f64) -> f64 {
        if t < 0.0 {
            0.0
        } else {
            self.bandwidth_w * self.big_gamma.sqrt() * (-self.bandwidth_w * t).exp()
        }
    }

    /// Memory kernel `f(t) = (W Gamma / 2) e^{-W |t|}`.
    pub fn memory_kernel(&self, t: f64) -> f64 {
        0.5 * self.bandwidth_w * self.big_gamma * (-self.bandwidth_w * t.abs()).exp()
    }
}

/// Real single-photon envelope supported on `[0, duration]`.
///
/// Implementations must return zero (and zero derivatives) outside the
/// support and must start smoothly: `value(0) = d1(0) = 0`.
pub trait InputPulse: Send + Sync {
    fn duration(&self) -> f64;
    fn value(&self, t: f64) -> f64;
    fn d1(&self, t: f64) -> f64;
    fn d2(&self, t: f64) -> f64;
    fn d3(&self, t: f64) -> f64;
}

impl<P: InputPulse + ?Sized> InputPulse for &P {
    fn duration(&self) -> f64 {
        (**self).duration()
    }
    fn value(&self, t: f64) -> f64 {
        (**self).value(t)
    }
    fn d1(&self, t: f64) -> f64 {
        (**self).d1(t)
    }
    fn d2(&self, t: f64) -> f64 {
        (**self).d2(t)
    }
    fn d3(&self, t: f64) -> f64 {
        (**self).d3(t)
    }
}

impl<P: InputPulse + ?Sized> InputPulse for Box<P> {
    fn duration(&self) -> f64 {
        (**self).duration()
    }
    fn value(&self, t: f64) -> f64 {
        (**self).value(t)
    }
    fn d1(&self, t: f64) -> f64 {
        (**self).d1(t)
    }
    fn d2(&self, t: f64) -> f64 {
        (**self).d2(t)
    }
    fn d3(&self, t: f64) -> f64 {
        (**self).d3(t)
    }
}

#[inline]
fn in_support(t: f64, duration: f64) -> bool {
    (0.0..=duration).contains(&t)
}

/// The two-lobe packet `8 sin^2(2 pi t/T) cos^2(pi t/T) / sqrt(7 T)`.
///
/// Written as the cosine series
/// `c [1/4 + cos(2at)/8 - cos(4at)/4 - cos(6at)/8]`, `a = pi/T`, which gives
/// every derivative in closed form and normalizes to exactly one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleLobePulse {
    duration: f64,
    scale: f64,
}

const LOBE_COEFFS: [(f64, f64); 3] = [(2.0, 0.125), (4.0, -0.25), (6.0, -0.125)];

impl DoubleLobePulse {
    pub const NAME: &'static str = "double_lobe";

    pub fn new(duration: f64) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::InvalidParameter {
                name: "pulse_duration",
                reason: format!("must be finite and > 0, got {duration}"),
            });
        }
        Ok(Self {
            duration,
            scale: 8.0 / (7.0 * duration).sqrt(),
        })
    }

    fn base_freq(&self) -> f64 {
        PI / self.duration
    }

    fn derivative(&self, t: f64, order: u32) -> f64 {
        if !in_support(t, self.duration) {
            return 0.0;
        }
        let a = self.base_freq();
        let shift = order as f64 * 0.5 * PI;
        let mut acc = if order == 0 { 0.25 } else { 0.0 };
        for (m, c) in LOBE_COEFFS {
            let k = m * a;
            acc += c * k.powi(order as i32) * (k * t + shift).cos();
        }
        self.scale * acc
    }

    /// Interior zeros of the envelope (the lobe boundaries).
    pub fn interior_zeros(&self) -> Vec<f64> {
        vec![0.5 * self.duration]
    }

    /// Coupling strength that satisfies the equilibrium condition at
    /// bandwidth `w`, from the Laplace transform of the cosine series.
    pub fn equilibrium_coupling(&self, w: f64) -> f64 {
        let a = self.base_freq();
        let mut sum = 0.25 / (w * w);
        for (m, c) in LOBE_COEFFS {
            let k = m * a;
            sum += c / (w * w + k * k);
        }
        let decay = 1.0 - (-w * self.duration).exp();
        8.0 * a * a / (w.powi(3) * decay * sum)
    }
}

impl InputPulse for DoubleLobePulse {
    fn duration(&self) -> f64 {
        self.duration
    }
    fn value(&self, t: f64) -> f64 {
        self.derivative(t, 0)
    }
    fn d1(&self, t: f64) -> f64 {
        self.derivative(t, 1)
    }
    fn d2(&self, t: f64) -> f64 {
        self.derivative(t, 2)
    }
    fn d3(&self, t: f64) -> f64 {
        self.derivative(t, 3)
    }
}

/// A bare envelope function, without derivatives.
pub trait Envelope: Send + Sync {
    fn eval(&self, t: f64) -> f64;
}

impl<F: Fn(f64) -> f64 + Send + Sync> Envelope for F {
    fn eval(&self, t: f64) -> f64 {
        self(t)
    }
}

/// Derivatives of an envelope by second-order finite differences with a
/// fixed step. Central stencils are used in the interior and one-sided
/// stencils within two steps of either support edge, so the stencil never
/// reaches across the discontinuity at the edge.
///
/// Truncation error is `O(step^2)` in every derivative.
#[derive(Debug, Clone)]
pub struct FiniteDifference<F> {
    envelope: F,
    duration: f64,
    step: f64,
}

impl<F: Envelope> FiniteDifference<F> {
    pub fn new(envelope: F, duration: f64, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0 && 4.0 * step <= duration) {
            return Err(Error::InvalidParameter {
                name: "fd_step",
                reason: format!("need 0 < step <= duration/4, got {step}"),
            });
        }
        Ok(Self {
            envelope,
            duration,
            step,
        })
    }

    fn f(&self, t: f64) -> f64 {
        self.envelope.eval(t.clamp(0.0, self.duration))
    }

    fn stencil(&self, t: f64, order: u32) -> f64 {
        if !in_support(t, self.duration) {
            return 0.0;
        }
        let h = self.step;
        let f = |k: f64| self.f(t + k * h);
        if t - 2.0 * h < 0.0 {
            match order {
                1 => (-3.0 * f(0.0) + 4.0 * f(1.0) - f(2.0)) / (2.0 * h),
                2 => (2.0 * f(0.0) - 5.0 * f(1.0) + 4.0 * f(2.0) - f(3.0)) / (h * h),
                _ => {
                    (-5.0 * f(0.0) + 18.0 * f(1.0) - 24.0 * f(2.0) + 14.0 * f(3.0) - 3.0 * f(4.0))
                        / (2.0 * h * h * h)
                }
            }
        } else if t + 2.0 * h > self.duration {
            match order {
                1 => (3.0 * f(0.0) - 4.0 * f(-1.0) + f(-2.0)) / (2.0 * h),
                2 => (2.0 * f(0.0) - 5.0 * f(-1.0) + 4.0 * f(-2.0) - f(-3.0)) / (h * h),
                _ => {
                    (5.0 * f(0.0) - 18.0 * f(-1.0) + 24.0 * f(-2.0) - 14.0 * f(-3.0)
                        + 3.0 * f(-4.0))
                        / (2.0 * h * h * h)
                }
            }
        } else {
            match order {
                1 => (f(1.0) - f(-1.0)) / (2.0 * h),
                2 => (f(1.0) - 2.0 * f(0.0) + f(-1.0)) / (h * h),
                _ => (f(2.0) - 2.0 * f(1.0) + 2.0 * f(-1.0) - f(-2.0)) / (2.0 * h * h * h),
            }
        }
    }
}

impl<F: Envelope> InputPulse for FiniteDifference<F> {
    fn duration(&self) -> f64 {
        self.duration
    }
    fn value(&self, t: f64) -> f64 {
        if in_support(t, self.duration) {
            self.envelope.eval(t)
        } else {
            0.0
        }
    }
    fn d1(&self, t: f64) -> f64 {
        self.stencil(t, 1)
    }
    fn d2(&self, t: f64) -> f64 {
        self.stencil(t, 2)
    }
    fn d3(&self, t: f64) -> f64 {
        self.stencil(t, 3)
    }
}

/// Cubic spline through `(t, value)` samples with zero end slopes.
#[derive(Debug, Clone)]
pub struct ClampedSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl ClampedSpline {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = knots.len();
        if n < 4 || values.len() != n {
            return Err(Error::InvalidPulse(format!(
                "need at least 4 samples with matching lengths, got {} times and {} values",
                n,
                values.len()
            )));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPulse(
                "sample times must be strictly increasing".into(),
            ));
        }
        // Tridiagonal system for the knot second derivatives, clamped ends.
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut lower = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        diag[0] = h[0] / 3.0;
        upper[0] = h[0] / 6.0;
        rhs[0] = (values[1] - values[0]) / h[0];
        for i in 1..n - 1 {
            lower[i] = h[i - 1] / 6.0;
            diag[i] = (h[i - 1] + h[i]) / 3.0;
            upper[i] = h[i] / 6.0;
            rhs[i] = (values[i + 1] - values[i]) / h[i] - (values[i] - values[i - 1]) / h[i - 1];
        }
        lower[n - 1] = h[n - 2] / 6.0;
        diag[n - 1] = h[n - 2] / 3.0;
        rhs[n - 1] = -(values[n - 1] - values[n - 2]) / h[n - 2];
        for i in 1..n {
            let m = lower[i] / diag[i - 1];
            diag[i] -= m * upper[i - 1];
            rhs[i] -= m * rhs[i - 1];
        }
        let mut second = vec![0.0; n];
        second[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            second[i] = (rhs[i] - upper[i] * second[i + 1]) / diag[i];
        }
        Ok(Self {
            knots,
            values,
            second,
        })
    }

    pub fn at(&self, t: f64) -> f64 {
        let n = self.knots.len();
        let t = t.clamp(self.knots[0], self.knots[n - 1]);
        let i = match self.knots.partition_point(|&k| k <= t) {
            0 => 0,
            p => (p - 1).min(n - 2),
        };
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - t) / h;
        let b = (t - self.knots[i]) / h;
        a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h
                / 6.0
    }

    fn scale(&mut self, s: f64) {
        self.values.iter_mut().for_each(|v| *v *= s);
        self.second.iter_mut().for_each(|v| *v *= s);
    }
}

impl Envelope for ClampedSpline {
    fn eval(&self, t: f64) -> f64 {
        self.at(t)
    }
}

/// Envelope given as samples (for example read from a two-column file).
///
/// The samples are interpolated by a [`ClampedSpline`], rescaled to unit
/// norm, and differentiated with [`FiniteDifference`].
#[derive(Debug, Clone)]
pub struct SampledPulse {
    inner: FiniteDifference<ClampedSpline>,
    /// Norm of the samples before rescaling.
    pub raw_norm: f64,
}

impl SampledPulse {
    /// Builds a pulse from samples starting at `t = 0`. `fd_step` is the
    /// finite-difference step, normally the simulation grid step.
    pub fn from_samples(times: Vec<f64>, values: Vec<f64>, fd_step: f64) -> Result<Self> {
        if times.first().copied() != Some(0.0) {
            return Err(Error::InvalidPulse("samples must start at t = 0".into()));
        }
        let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(peak > 0.0) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPulse(
                "envelope must be finite and not identically zero".into(),
            ));
        }
        if values[0].abs() > 1e-6 * peak {
            return Err(Error::InvalidPulse(format!(
                "envelope must start at zero, got {}",
                values[0]
            )));
        }
        let duration = *times.last().unwrap();
        let panels = 64 * times.len();
        let mut spline = ClampedSpline::new(times, values)?;
        let norm = simpson_fn(|t| spline.at(t).powi(2), 0.0, duration, panels);
        spline.scale(1.0 / norm.sqrt());
        let inner = FiniteDifference::new(spline, duration, fd_step)?;
        Ok(Self {
            inner,
            raw_norm: norm,
        })
    }
}

impl InputPulse for SampledPulse {
    fn duration(&self) -> f64 {
        self.inner.duration()
    }
    fn value(&self, t: f64) -> f64 {
        self.inner.value(t)
    }
    fn d1(&self, t: f64) -> f64 {
        self.inner.d1(t)
    }
    fn d2(&self, t: f64) -> f64 {
        self.inner.d2(t)
    }
    fn d3(&self, t: f64) -> f64 {
        self.inner.d3(t)
    }
}

/// The input envelope sampled at the nodes and midpoints of `grid`.
pub fn pulse_series(pulse: &dyn InputPulse, grid: &TimeGrid) -> Staggered {
    Staggered::sample(grid, |t| pulse.value(t))
}

fn check_cover(pulse: &dyn InputPulse, grid: &TimeGrid) -> Result<()> {
    if grid.end() < pulse.duration() * (1.0 - 1e-12) {
        return Err(Error::GridMismatch {
            grid_start: 0.0,
            grid_end: grid.end(),
            support_end: pulse.duration(),
        });
    }
    Ok(())
}

/// Future drive `N(t) = W sqrt(Gamma) int_t^T e^{-W (tau - t)} Phi_in(tau) dtau`
/// at the grid nodes.
pub fn future_drive(
    pulse: &dyn InputPulse,
    spectral: &SpectralModel,
    grid: &TimeGrid,
) -> Result<Vec<f64>> {
    Ok(future_drive_staggered(pulse, spectral, grid)?.nodes)
}

/// [`future_drive`] at nodes and midpoints.
///
/// `N` obeys `dN/dt = W N - W sqrt(Gamma) Phi_in` with `N = 0` at the end of
/// the grid, which is integrated backwards with RK4. Midpoint values come
/// from cubic Hermite interpolation using the exact node slopes.
pub fn future_drive_staggered(
    pulse: &dyn InputPulse,
    spectral: &SpectralModel,
    grid: &TimeGrid,
) -> Result<Staggered> {
    check_cover(pulse, grid)?;
    let w = spectral.bandwidth_w;
    let src = w * spectral.big_gamma.sqrt();
    let phi = pulse_series(pulse, grid);
    let dt = grid.dt();
    let mut out = Staggered::zeros(grid);
    let mut rk = Rk4::<f64>::new(1);
    let mut y = [0.0];
    for i in (0..grid.steps()).rev() {
        rk.step(&mut y, -dt, |stage, s, d| {
            // backward step: Start is the later node
            let p = match stage {
                crate::grid::Stage::Start => phi.nodes[i + 1],
                crate::grid::Stage::Mid => phi.mids[i],
                crate::grid::Stage::End => phi.nodes[i],
            };
            d[0] = w * s[0] - src * p;
        });
        out.nodes[i] = y[0];
    }
    for i in 0..grid.steps() {
        let (n0, n1) = (out.nodes[i], out.nodes[i + 1]);
        let d0 = w * n0 - src * phi.nodes[i];
        let d1 = w * n1 - src * phi.nodes[i + 1];
        out.mids[i] = hermite_mid(n0, n1, d0, d1, dt);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn lobe() -> DoubleLobePulse {
        DoubleLobePulse::new(PI).unwrap()
    }

    #[test]
    fn density_is_squared_coupling() {
        let s = SpectralModel::new(16.03, 2.0).unwrap();
        for w in [-50.0, -1.0, 0.0, 0.3, 7.0] {
            assert_relative_eq!(s.coupling(w).norm_sqr(), s.density(w), max_relative = 1e-14);
        }
        assert_relative_eq!(s.density(0.0), 16.03 / (2.0 * PI));
    }

    #[test]
    fn memory_kernel_is_fourier_transform_of_density() {
        // Even integrand: 2 int_0^L J cos(w t) dw, with the tail beyond L
        // below 1e-7 for these parameters.
        let s = SpectralModel::new(3.0, 2.5).unwrap();
        let cut = 8000.0;
        for t in [0.0, 0.1, 0.4] {
            let direct = 2.0
                * simpson_fn(
                    |om: f64| s.density(om) * (om * t).cos(),
                    0.0,
                    cut,
                    2_000_000,
                );
            let tail = if t == 0.0 {
                2.0 * s.big_gamma / (2.0 * PI) * 2.5 * 2.5 / cut
            } else {
                0.0
            };
            assert_relative_eq!(direct + tail, s.memory_kernel(t), max_relative = 1e-6);
        }
    }

    #[test]
    fn impulse_response_is_causal_and_right_continuous() {
        let s = SpectralModel::new(4.0, 3.0).unwrap();
        assert_eq!(s.impulse_response(-1e-12), 0.0);
        assert_relative_eq!(s.impulse_response(0.0), 6.0);
        // f(t) = int h(t + s) h(s) ds
        let t = 0.3;
        let auto = simpson_fn(
            |u| s.impulse_response(t + u) * s.impulse_response(u),
            0.0,
            20.0,
            20_000,
        );
        assert_relative_eq!(auto, s.memory_kernel(t), max_relative = 1e-9);
    }

    #[test]
    fn double_lobe_is_normalized_and_smooth_at_edges() {
        let p = lobe();
        let norm = simpson_fn(|t| p.value(t).powi(2), 0.0, PI, 4000);
        assert_relative_eq!(norm, 1.0, epsilon = 1e-12);
        assert!(p.value(0.0).abs() < 1e-15 && p.d1(0.0).abs() < 1e-14);
        assert!(p.value(PI).abs() < 1e-14 && p.d1(PI).abs() < 1e-13);
        assert_eq!(p.value(-0.1), 0.0);
        assert_eq!(p.d2(PI + 0.1), 0.0);
        assert_relative_eq!(p.d2(0.0), 64.0 / (7.0 * PI).sqrt(), max_relative = 1e-13);
        assert!(p.d3(0.0).abs() < 1e-12);
    }

    #[test]
    fn double_lobe_matches_product_form() {
        let p = lobe();
        for t in [0.2f64, 0.9, 1.5, 2.8] {
            let direct = 8.0 * (2.0 * t).sin().powi(2) * t.cos().powi(2) / (7.0 * PI).sqrt();
            assert_relative_eq!(p.value(t), direct, epsilon = 1e-14);
        }
    }

    #[test]
    fn double_lobe_derivatives_agree_with_differences() {
        let p = lobe();
        let h = 1e-4;
        for t in [0.4, 1.3, 2.2] {
            assert_relative_eq!(
                p.d1(t),
                (p.value(t + h) - p.value(t - h)) / (2.0 * h),
                epsilon = 1e-6
            );
            assert_relative_eq!(
                p.d2(t),
                (p.d1(t + h) - p.d1(t - h)) / (2.0 * h),
                epsilon = 1e-5
            );
            assert_relative_eq!(
                p.d3(t),
                (p.d2(t + h) - p.d2(t - h)) / (2.0 * h),
                epsilon = 1e-4
            );
        }
    }

    fn literal_coupling(w: f64) -> f64 {
        let w2 = w * w;
        (w2 + 4.0) * (w2 + 16.0) * (w2 + 36.0)
            / (w * (w2 * w2 + 28.0 * w2 + 72.0) * (1.0 - (-PI * w).exp()))
    }

    #[test]
    fn equilibrium_coupling_matches_rational_form() {
        let p = lobe();
        for w in [0.5, 1.0, 1.6716, 2.0, 17.238, 25.0] {
            assert_relative_eq!(
                p.equilibrium_coupling(w),
                literal_coupling(w),
                max_relative = 1e-12
            );
        }
        assert!((p.equilibrium_coupling(2.0) - 16.0300).abs() < 5e-4);
    }

    #[test]
    fn finite_difference_adapter_is_second_order_at_edges() {
        let p = lobe();
        let fd = FiniteDifference::new(|t| p.value(t), PI, 1e-3).unwrap();
        for t in [0.0, 0.0005, 1.0, PI - 0.0005, PI] {
            assert!((fd.d1(t) - p.d1(t)).abs() < 1e-4, "d1 at {t}");
            assert!((fd.d2(t) - p.d2(t)).abs() < 1e-3, "d2 at {t}");
            assert!((fd.d3(t) - p.d3(t)).abs() < 2e-2, "d3 at {t}");
        }
    }

    #[test]
    fn sampled_pulse_reproduces_built_in() {
        let p = lobe();
        let n = 2001;
        let times: Vec<f64> = (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect();
        // deliberately mis-scaled samples
        let values: Vec<f64> = times.iter().map(|&t| 3.0 * p.value(t)).collect();
        let s = SampledPulse::from_samples(times, values, 1e-3).unwrap();
        assert_relative_eq!(s.raw_norm, 9.0, max_relative = 1e-6);
        for t in [0.0, 0.3, 1.1, 2.0, 3.0] {
            assert!((s.value(t) - p.value(t)).abs() < 1e-7);
            assert!((s.d1(t) - p.d1(t)).abs() < 1e-4);
            assert!(
                (s.d2(t) - p.d2(t)).abs() < 2e-3,
                "d2 at {t}: {} vs {}",
                s.d2(t),
                p.d2(t)
            );
        }
    }

    #[test]
    fn sampled_pulse_rejects_nonzero_start() {
        let r = SampledPulse::from_samples(vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 2.0, 1.0, 0.0], 0.1);
        assert!(matches!(r, Err(Error::InvalidPulse(_))));
    }

    #[test]
    fn future_drive_matches_direct_quadrature() {
        let p = lobe();
        let s = SpectralModel::new(16.03, 2.0).unwrap();
        let grid = TimeGrid::with_step(PI, 1e-3).unwrap();
        let n = future_drive_staggered(&p, &s, &grid).unwrap();
        let direct = |t: f64| {
            s.bandwidth_w
                * s.big_gamma.sqrt()
                * simpson_fn(
                    |u| (-s.bandwidth_w * (u - t)).exp() * p.value(u),
                    t,
                    PI,
                    4000,
                )
        };
        for i in [0, 500, 1571, 3000] {
            assert_relative_eq!(n.nodes[i], direct(grid.t(i)), epsilon = 1e-9);
        }
        assert_relative_eq!(n.mids[700], direct(grid.mid(700)), epsilon = 1e-9);
        assert_eq!(*n.nodes.last().unwrap(), 0.0);
    }

    #[test]
    fn future_drive_rejects_short_grid() {
        let p = lobe();
        let s = SpectralModel::new(1.0, 1.0).unwrap();
        let grid = TimeGrid::new(2.0, 100).unwrap();
        assert!(matches!(
            future_drive(&p, &s, &grid),
            Err(Error::GridMismatch { .. })
        ));
    }

    #[test]
    fn params_validation() {
        let mut p = PhysicalParams {
            g_cav: 30.0 * PI,
            gamma_l: 6.0 * PI,
            delta1: 0.0,
            delta2: 0.0,
            big_gamma: 16.03,
            bandwidth_w: 2.0,
            rho_offset: 0.002,
            pulse_duration: PI,
        };
        assert!(p.validate().is_ok());
        p.rho_offset = 1.0;
        assert!(p.validate().is_err());
        p.rho_offset = 0.0;
        p.gamma_l = -1.0;
        assert!(matches!(
            p.validate(),
            Err(Error::InvalidParameter {
                name: "gamma_L",
                ..
            })
        ));
    }
}
