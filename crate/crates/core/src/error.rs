use alloc::string::String;
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Which tail of the increment law an excess constant refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "snake_case"))]
pub enum Side {
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A family parameter violates its constraint.
    InvalidParameter(String),
    NonPositiveMean { mean: f64 },
    NoNegativeMass,
    /// `E[exp(-tX)]` is infinite at `t`.
    MomentDiverges { t: f64, rate: f64 },
    EmptyConditioningSet { x: f64 },
    /// `E[exp(-tX)] = 1` has no positive root below the divergence rate.
    NoRoot,
    ToleranceNotMet { residual: f64 },
    /// The unrestricted supremum is infinite. `witness` is a finite value the
    /// supremum is known to exceed.
    DivergentExcess { side: Side, witness: f64 },
    StepLimitExceeded { steps: u64 },
    OverflowGuard,
    EmptyTail { x: f64 },
    QuadratureFailed { estimate: f64, abs_error: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    /// Stable short name, used in machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::NonPositiveMean { .. } => "non_positive_mean",
            Error::NoNegativeMass => "no_negative_mass",
            Error::MomentDiverges { .. } => "moment_diverges",
            Error::EmptyConditioningSet { .. } => "empty_conditioning_set",
            Error::NoRoot => "no_root",
            Error::ToleranceNotMet { .. } => "tolerance_not_met",
            Error::DivergentExcess { .. } => "divergent_excess",
            Error::StepLimitExceeded { .. } => "step_limit_exceeded",
            Error::OverflowGuard => "overflow_guard",
            Error::EmptyTail { .. } => "empty_tail",
            Error::QuadratureFailed { .. } => "quadrature_failed",
        }
    }

    /// True for errors caused by the input law rather than by a numeric failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_) | Error::NonPositiveMean { .. } | Error::NoNegativeMass
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::NonPositiveMean { mean } => write!(f, "increment mean {mean} is not positive"),
            Error::NoNegativeMass => f.write_str("increment law puts no mass below zero"),
            Error::MomentDiverges { t, rate } => {
                write!(f, "E[exp(-tX)] diverges at t={t} (divergence rate {rate})")
            }
            Error::EmptyConditioningSet { x } => write!(f, "conditioning set at x={x} has zero probability"),
            Error::NoRoot => f.write_str("no positive root of E[exp(-tX)] = 1 below the divergence rate"),
            Error::ToleranceNotMet { residual } => write!(f, "root solver stopped with residual {residual:e}"),
            Error::DivergentExcess { side, witness } => {
                write!(f, "{side:?} excess constant is infinite (exceeds {witness})")
            }
            Error::StepLimitExceeded { steps } => write!(f, "walk exceeded {steps} steps"),
            Error::OverflowGuard => f.write_str("exponential martingale value overflows f64"),
            Error::EmptyTail { x } => write!(f, "no atom at or above {x}"),
            Error::QuadratureFailed { estimate, abs_error } => {
                write!(f, "quadrature did not converge (estimate {estimate}, error {abs_error:e})")
            }
        }
    }
}

impl core::error::Error for Error {}
