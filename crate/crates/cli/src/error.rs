use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// One problem found in a config document. `line == 0` means the value came
/// from the command line or a preset rather than the file.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub line: usize,
    pub key: String,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    Invalid(String),
    Missing,
    Duplicate {
        first_line: usize,
    },
    UnknownKey {
        suggestion: Option<String>,
    },
    /// A frequency above `1e6`, most likely given in Hz instead of MHz.
    UnitSuspect {
        value: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "`{}`: ", self.key)?;
        } else {
            write!(f, "line {}: `{}`: ", self.line, self.key)?;
        }
        match &self.kind {
            ViolationKind::Invalid(msg) => write!(f, "{msg}"),
            ViolationKind::Missing => write!(f, "required key is missing"),
            ViolationKind::Duplicate { first_line } => {
                write!(f, "already set on line {first_line}")
            }
            ViolationKind::UnknownKey {
                suggestion: Some(s),
            } => write!(f, "unknown key (did you mean `{s}`?)"),
            ViolationKind::UnknownKey { suggestion: None } => write!(f, "unknown key"),
            ViolationKind::UnitSuspect { value } => {
                write!(f, "{value:e} looks like Hz; frequencies are in MHz")
            }
        }
    }
}

/// All violations found in one config, in line order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub Vec<Violation>);

impl ConfigError {
    pub fn single(line: usize, key: &str, msg: impl Into<String>) -> Self {
        Self(vec![Violation {
            line,
            key: key.into(),
            kind: ViolationKind::Invalid(msg.into()),
        }])
    }

    pub fn mentions(&self, key: &str) -> bool {
        self.0.iter().any(|v| v.key == key)
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} config problem(s)", self.0.len())?;
        for v in &self.0 {
            write!(f, "\n  {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Core(#[from] photon_store::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 config, 3 infeasible design, 4 solver
    /// blow-up, 5 oracle band too narrow, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        use photon_store::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                E::InvalidParameter { .. }
                | E::InvalidPulse(_)
                | E::DegeneratePulse
                | E::UnsupportedRegime(_) => 2,
                E::InfeasibleDesign { .. }
                | E::NegativeAccumulator { .. }
                | E::AngleDomain { .. } => 3,
                E::NonFiniteState { .. } => 4,
                E::BandTooNarrow { .. } => 5,
                E::GridMismatch { .. } | E::LengthMismatch { .. } => 1,
            },
            CliError::Io { .. } | CliError::Csv(_) => 1,
        }
    }

    /// Short machine-readable tag, used in sweep rows.
    pub fn tag(&self) -> &'static str {
        use photon_store::Error as E;
        match self {
            CliError::Config(_) => "config",
            CliError::Core(e) => match e {
                E::InvalidParameter { .. } => "invalid_parameter",
                E::InvalidPulse(_) => "invalid_pulse",
                E::GridMismatch { .. } => "grid_mismatch",
                E::LengthMismatch { .. } => "length_mismatch",
                E::InfeasibleDesign { .. } => "infeasible_design",
                E::DegeneratePulse => "degenerate_pulse",
                E::NonFiniteState { .. } => "non_finite_state",
                E::BandTooNarrow { .. } => "band_too_narrow",
                E::NegativeAccumulator { .. } => "negative_accumulator",
                E::AngleDomain { .. } => "angle_domain",
                E::UnsupportedRegime(_) => "unsupported_regime",
            },
            CliError::Io { .. } => "io",
            CliError::Csv(_) => "csv",
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
