use thiserror::Error;

/// Errors raised by pulse design and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid input pulse: {0}")]
    InvalidPulse(String),

    #[error(
        "time grid [{grid_start}, {grid_end}] does not cover pulse support [0, {support_end}]"
    )]
    GridMismatch {
        grid_start: f64,
        grid_end: f64,
        support_end: f64,
    },

    #[error("series length {found} does not match grid length {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("infeasible design: excited-state population {rho:.3e} at t = {t:.6} us is below the floor; increase rho_offset")]
    InfeasibleDesign { t: f64, rho: f64 },

    #[error("pulse has vanishing second derivative at t = 0; no finite coupling satisfies the equilibrium condition")]
    DegeneratePulse,

    #[error("state became non-finite at t = {t:.6} us")]
    NonFiniteState { t: f64 },

    #[error("discretized band captures only {captured:.6} of the input photon (need >= 0.999)")]
    BandTooNarrow { captured: f64 },

    #[error("adiabatic accumulator 2*int(M) = {value:.3e} is negative at t = {t:.6} us")]
    NegativeAccumulator { t: f64, value: f64 },

    #[error("|cos(phi)| = {ratio:.9} exceeds 1 at t = {t:.6} us")]
    AngleDomain { t: f64, ratio: f64 },

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
