//! Fixed-step integration, quadrature and interpolation helpers.

use std::ops::{Add, Mul};

use crate::grid::{Stage, Staggered, TimeGrid};

/// Classical fourth-order Runge-Kutta stepper with reusable stage buffers.
///
/// The right-hand side receives the stage position, the trial state and an
/// output slice for the derivative. It is called in the order
/// `Start, Mid, Mid, End` within every step.
#[derive(Debug, Clone)]
pub struct Rk4<T> {
    k1: Vec<T>,
    k2: Vec<T>,
    k3: Vec<T>,
    k4: Vec<T>,
    trial: Vec<T>,
}

impl<T> Rk4<T>
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![T::default(); dim],
            k2: vec![T::default(); dim],
            k3: vec![T::default(); dim],
            k4: vec![T::default(); dim],
            trial: vec![T::default(); dim],
        }
    }

    /// Advances `y` by `dt` in place. A negative `dt` integrates backwards;
    /// `Stage::Start` then refers to the later time.
    pub fn step<F>(&mut self, y: &mut [T], dt: f64, mut rhs: F)
    where
        F: FnMut(Stage, &[T], &mut [T]),
    {
        let half = 0.5 * dt;
        rhs(Stage::Start, y, &mut self.k1);
        for ((t, &yi), &k) in self.trial.iter_mut().zip(y.iter()).zip(&self.k1) {
            *t = yi + k * half;
        }
        rhs(Stage::Mid, &self.trial, &mut self.k2);
        for ((t, &yi), &k) in self.trial.iter_mut().zip(y.iter()).zip(&self.k2) {
            *t = yi + k * half;
        }
        rhs(Stage::Mid, &self.trial, &mut self.k3);
        for ((t, &yi), &k) in self.trial.iter_mut().zip(y.iter()).zip(&self.k3) {
            *t = yi + k * dt;
        }
        rhs(Stage::End, &self.trial, &mut self.k4);
        let sixth = dt / 6.0;
        for (i, yi) in y.iter_mut().enumerate() {
            let incr = self.k1[i] + self.k2[i] * 2.0 + self.k3[i] * 2.0 + self.k4[i];
            *yi = *yi + incr * sixth;
        }
    }
}

/// Cubic Hermite value at the midpoint of `[t, t + h]` from endpoint values
/// and slopes.
#[inline]
pub fn hermite_mid(y0: f64, y1: f64, dy0: f64, dy1: f64, h: f64) -> f64 {
    0.5 * (y0 + y1) + 0.125 * h * (dy0 - dy1)
}

/// Midpoint values of a uniformly sampled series by four-point Lagrange
/// interpolation (one-sided at the two ends).
pub fn cubic_midpoints<T>(nodes: &[T]) -> Vec<T>
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
{
    let n = nodes.len();
    match n {
        0 | 1 => Vec::new(),
        2 => vec![(nodes[0] + nodes[1]) * 0.5],
        3 => vec![
            nodes[0] * 0.375 + nodes[1] * 0.75 + nodes[2] * -0.125,
            nodes[0] * -0.125 + nodes[1] * 0.75 + nodes[2] * 0.375,
        ],
        _ => (0..n - 1)
            .map(|i| {
                if i == 0 {
                    nodes[0] * (5.0 / 16.0)
                        + nodes[1] * (15.0 / 16.0)
                        + nodes[2] * (-5.0 / 16.0)
                        + nodes[3] * (1.0 / 16.0)
                } else if i == n - 2 {
                    nodes[n - 1] * (5.0 / 16.0)
                        + nodes[n - 2] * (15.0 / 16.0)
                        + nodes[n - 3] * (-5.0 / 16.0)
                        + nodes[n - 4] * (1.0 / 16.0)
                } else {
                    (nodes[i] + nodes[i + 1]) * (9.0 / 16.0)
                        + (nodes[i - 1] + nodes[i + 2]) * (-1.0 / 16.0)
                }
            })
            .collect(),
    }
}

/// Running integral `int_0^t f` of a staggered integrand.
///
/// Node values use Simpson's rule on each step (the quadrature RK4 reduces
/// to for a pure integral); midpoint values integrate the interpolating
/// parabola over the first half of the step.
pub fn cumulative_simpson(f: &Staggered, grid: &TimeGrid) -> Staggered {
    let dt = grid.dt();
    let mut out = Staggered::zeros(grid);
    let mut acc = 0.0;
    for i in 0..grid.steps() {
        let (f0, fm, f1) = (f.nodes[i], f.mids[i], f.nodes[i + 1]);
        out.mids[i] = acc + dt / 24.0 * (5.0 * f0 + 8.0 * fm - f1);
        acc += dt / 6.0 * (f0 + 4.0 * fm + f1);
        out.nodes[i + 1] = acc;
    }
    out
}

/// Composite Simpson integral of a staggered integrand over the whole grid.
pub fn simpson(f: &Staggered, grid: &TimeGrid) -> f64 {
    let dt = grid.dt();
    (0..grid.steps())
        .map(|i| dt / 6.0 * (f.nodes[i] + 4.0 * f.mids[i] + f.nodes[i + 1]))
        .sum()
}

/// Composite Simpson integral of `f` over `[a, b]` with `panels` panels.
pub fn simpson_fn(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for i in 0..panels {
        let x0 = a + i as f64 * h;
        acc += f(x0) + 4.0 * f(x0 + 0.5 * h) + f(x0 + h);
    }
    acc * h / 6.0
}

/// Trapezoidal integral of node samples.
pub fn trapezoid(values: &[f64], dt: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    dt * (inner + 0.5 * (values[0] + values[values.len() - 1]))
}

/// Running trapezoidal integral, starting at zero.
pub fn cumulative_trapezoid(values: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * dt * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Direct `O(n^2)` trapezoidal evaluation of `int_0^{t_i} k(t_i - tau) g(tau) dtau`
/// for every node. Used to cross-check the auxiliary-ODE memory path.
pub fn convolve_trapezoid(
    kernel: impl Fn(f64) -> f64,
    series: &[f64],
    grid: &TimeGrid,
) -> Vec<f64> {
    let dt = grid.dt();
    let lags: Vec<f64> = (0..grid.len()).map(|j| kernel(j as f64 * dt)).collect();
    (0..grid.len())
        .map(|i| {
            if i == 0 {
                return 0.0;
            }
            let mut acc = 0.5 * (lags[i] * series[0] + lags[0] * series[i]);
            for j in 1..i {
                acc += lags[i - j] * series[j];
            }
            acc * dt
        })
        .collect()
}

/// Removes `2*pi` jumps between consecutive phase samples.
pub fn unwrap_phase(phase: &[f64]) -> Vec<f64> {
    use std::f64::consts::{PI, TAU};
    let mut out = Vec::with_capacity(phase.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for &p in phase {
        if let Some(q) = prev {
            let d = p - q;
            if d > PI {
                offset -= TAU;
            } else if d < -PI {
                offset += TAU;
            }
        }
        out.push(p + offset);
        prev = Some(p);
    }
    out
}
