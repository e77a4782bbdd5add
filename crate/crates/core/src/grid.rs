//! Uniform time grids and series sampled on them.
//!
//! Every integrator in this crate advances with classical RK4, which samples
//! time-dependent inputs at the step start, the step midpoint and the step
//! end. [`Staggered`] keeps a real series at both the grid nodes and the step
//! midpoints so that those inputs never need to be guessed.

use crate::error::{Error, Result};

/// Uniform grid `t_i = i * dt`, `i = 0..=steps`, starting at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    end: f64,
    steps: usize,
}

impl TimeGrid {
    /// Grid over `[0, end]` with exactly `steps` intervals.
    pub fn new(end: f64, steps: usize) -> Result<Self> {
        if !(end.is_finite() && end > 0.0) {
            return Err(Error::InvalidParameter {
                name: "grid.span",
                reason: format!("must be finite and positive, got {end}"),
            });
        }
        if steps < 3 {
            return Err(Error::InvalidParameter {
                name: "grid.steps",
                reason: format!("need at least 3 steps, got {steps}"),
            });
        }
        Ok(Self { end, steps })
    }

    /// Grid over `[0, end]` whose step is the largest value `<= dt` that
    /// divides `end` evenly.
    pub fn with_step(end: f64, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter {
                name: "grid.dt",
                reason: format!("must be finite and positive, got {dt}"),
            });
        }
        let steps = (end / dt - 1e-9).ceil().max(1.0) as usize;
        Self::new(end, steps)
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of nodes, `steps + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        self.end / self.steps as f64
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    #[inline]
    pub fn t(&self, i: usize) -> f64 {
        if i == self.steps {
            self.end
        } else {
            i as f64 * self.dt()
        }
    }

    #[inline]
    pub fn mid(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.t(i)).collect()
    }

    /// Same span, `factor` times as many steps.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            end: self.end,
            steps: self.steps * factor.max(1),
        }
    }

    pub(crate) fn check_len(&self, found: usize) -> Result<()> {
        if found != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found,
            });
        }
        Ok(())
    }
}

/// Real series known at the grid nodes and at every step midpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Staggered {
    pub nodes: Vec<f64>,
    pub mids: Vec<f64>,
}

impl Staggered {
    pub fn zeros(grid: &TimeGrid) -> Self {
        Self {
            nodes: vec![0.0; grid.len()],
            mids: vec![0.0; grid.steps()],
        }
    }

    /// Samples `f` at every node and midpoint of `grid`.
    pub fn sample(grid: &TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            nodes: (0..grid.len()).map(|i| f(grid.t(i))).collect(),
            mids: (0..grid.steps()).map(|i| f(grid.mid(i))).collect(),
        }
    }

    /// Applies `f` pointwise to nodes and midpoints of `self` and `other`.
    pub fn zip_with(&self, other: &Staggered, f: impl Fn(f64, f64) -> f64) -> Staggered {
        Staggered {
            nodes: self
                .nodes
                .iter()
                .zip(&other.nodes)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            mids: self
                .mids
                .iter()
                .zip(&other.mids)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Staggered {
        Staggered {
            nodes: self.nodes.iter().map(|&a| f(a)).collect(),
            mids: self.mids.iter().map(|&a| f(a)).collect(),
        }
    }

    /// Value at RK4 stage `stage` of step `i`.
    #[inline]
    pub fn at(&self, i: usize, stage: Stage) -> f64 {
        match stage {
            Stage::Start => self.nodes[i],
            Stage::Mid => self.mids[i],
            Stage::End => self.nodes[i + 1],
        }
    }
}

/// Sample position inside one RK4 step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Start,
    Mid,
    End,
}

impl Stage {
    #[inline]
    pub fn offset(self, dt: f64) -> f64 {
        match self {
            Stage::Start => 0.0,
            Stage::Mid => 0.5 * dt,
            Stage::End => dt,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn with_step_divides_span_evenly() {
        let g = TimeGrid::with_step(std::f64::consts::PI, 1e-4).unwrap();
        assert_eq!(g.steps(), 31416);
        assert!(g.dt() <= 1e-4);
        assert_eq!(g.t(g.steps()), std::f64::consts::PI);
    }

    #[test]
    fn exact_division_is_not_rounded_up() {
        let g = TimeGrid::with_step(1.0, 0.25).unwrap();
        assert_eq!(g.steps(), 4);
    }

    #[test]
    fn rejects_bad_step() {
        assert!(TimeGrid::with_step(1.0, 0.0).is_err());
        assert!(TimeGrid::with_step(1.0, f64::NAN).is_err());
        assert!(TimeGrid::new(-1.0, 10).is_err());
    }
}
