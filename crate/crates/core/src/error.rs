use alloc::vec::Vec;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// One violated parameter range.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamViolation {
    pub field: &'static str,
    pub value: f64,
    pub rule: &'static str,
}

impl fmt::Display for ParamViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {} violates {}", self.field, self.value, self.rule)
    }
}

struct Violations<'a>(&'a [ParamViolation]);

impl fmt::Display for Violations<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid time grid: {0}")]
    InvalidGrid(&'static str),
    #[error("invalid noise parameter `{field}` = {value}: must be {rule}")]
    InvalidNoise {
        field: &'static str,
        value: f64,
        rule: &'static str,
    },
    #[error("invalid parameters: {}", Violations(.0))]
    InvalidParams(Vec<ParamViolation>),
    #[error("invalid dilution band ({b1}, {b2}): need 0 < b1 < b2")]
    InvalidBand { b1: f64, b2: f64 },
    #[error("band ({b1}, {b2}) makes the lower z-bound denominator non-positive ({denominator})")]
    DegenerateBound { b1: f64, b2: f64, denominator: f64 },
    #[error("Monod denominator a + s vanishes or changes sign at s = {s}")]
    Singular { s: f64 },
    #[error("proportion undefined: total biomass is zero")]
    ProportionUndefined,
    #[error("path is empty")]
    EmptyPath,
    #[error("noise path does not match the integration grid: {0}")]
    NoiseMismatch(&'static str),
    #[error("coordinate mismatch: {0}")]
    CoordinateMismatch(&'static str),
    #[error("integration failed at t = {t} (last valid state at t = {last_valid}): {reason}")]
    Integration {
        t: f64,
        last_valid: f64,
        reason: StepFailure,
    },
}

/// Why a single integration step was rejected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepFailure {
    /// NaN or infinite state component.
    NonFinite,
    /// Monod singularity reached (`s <= -a`).
    Singular { s: f64 },
    /// Component left the admissible region by more than the tolerance.
    Inadmissible { component: &'static str, value: f64 },
}

impl fmt::Display for StepFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepFailure::NonFinite => f.write_str("state is not finite"),
            StepFailure::Singular { s } => write!(f, "Monod singularity, s = {s}"),
            StepFailure::Inadmissible { component, value } => {
                write!(f, "{component} = {value} left the admissible region")
            }
        }
    }
}
