use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A structural hypothesis on the data that failed.
#[derive(Debug, Clone, PartialEq)]
pub enum HypothesisViolation {
    ComplexSpectrum { imaginary_part: f64 },
    Xi1NotSimple { multiplicity: usize },
    X1ZeroComponent { index: usize },
    Xi1NotPositive { xi1: f64 },
    H1NonPositive { h1: f64 },
    /// Which of `b > 0`, `c < 0`, `D > 0` fail for a 2×2 matrix.
    TwoByTwo { b_positive: bool, c_negative: bool, discriminant_positive: bool },
}

impl HypothesisViolation {
    /// Stable machine-readable tag.
    pub fn code(&self) -> &'static str {
        match self {
            Self::ComplexSpectrum { .. } => "complex_spectrum",
            Self::Xi1NotSimple { .. } => "xi1_not_simple",
            Self::X1ZeroComponent { .. } => "x1_zero_component",
            Self::Xi1NotPositive { .. } => "xi1_not_positive",
            Self::H1NonPositive { .. } => "h1_nonpositive",
            Self::TwoByTwo { .. } => "H1",
        }
    }
}

impl fmt::Display for HypothesisViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ComplexSpectrum { imaginary_part } => {
                write!(f, "complex_spectrum (|Im ξ| = {imaginary_part:e})")
            }
            Self::Xi1NotSimple { multiplicity } => {
                write!(f, "xi1_not_simple (multiplicity {multiplicity})")
            }
            Self::X1ZeroComponent { index } => {
                write!(f, "x1_zero_component (component {index})")
            }
            Self::Xi1NotPositive { xi1 } => write!(f, "xi1_not_positive (ξ₁ = {xi1})"),
            Self::H1NonPositive { h1 } => write!(f, "h1_nonpositive (⟨h, φ₁⟩ = {h1:e})"),
            Self::TwoByTwo { b_positive, c_negative, discriminant_positive } => {
                let mut failing = Vec::new();
                if !b_positive {
                    failing.push("b ≤ 0");
                }
                if !c_negative {
                    failing.push("c ≥ 0");
                }
                if !discriminant_positive {
                    failing.push("D ≤ 0");
                }
                write!(f, "H1: {}", failing.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("hypothesis violation: {0}")]
    Hypothesis(HypothesisViolation),

    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),

    #[error("shift {sigma} lies within {distance:e} of discrete eigenvalue {eigenvalue}")]
    NearSingularShift { sigma: f64, eigenvalue: f64, distance: f64 },

    #[error("μ = {mu} is within 1e-10 of the principal eigenvalue μ₁₁ = {mu11}")]
    AtEigenvalue { mu: f64, mu11: f64 },

    #[error("eigen-iteration did not converge: residual {residual:e} after {iterations} iterations")]
    ConvergenceFailure { iterations: usize, residual: f64 },

    #[error("eigenvalue cluster at {eigenvalue} is too ill-conditioned for a Jordan decomposition: {reason}")]
    IllConditionedCluster { eigenvalue: f64, reason: String },

    #[error("block system is numerically singular (pivot {pivot:e} at row {row})")]
    SingularSystem { row: usize, pivot: f64 },

    #[error("sign pattern absent at the start of the search interval ({at})")]
    PatternAbsent { at: f64 },
}

impl Error {
    /// Stable machine-readable tag used by the batch driver's error records.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "invalid_grid",
            Error::InvalidInput(_) => "invalid_input",
            Error::Hypothesis(v) => v.code(),
            Error::HypothesisNotMet(_) => "hypothesis_not_met",
            Error::NearSingularShift { .. } => "near_singular_shift",
            Error::AtEigenvalue { .. } => "at_eigenvalue",
            Error::ConvergenceFailure { .. } => "convergence_failure",
            Error::IllConditionedCluster { .. } => "ill_conditioned_cluster",
            Error::SingularSystem { .. } => "singular_system",
            Error::PatternAbsent { .. } => "pattern_absent",
        }
    }

    pub fn is_hypothesis(&self) -> bool {
        matches!(self, Error::Hypothesis(_) | Error::HypothesisNotMet(_))
    }
}

impl From<HypothesisViolation> for Error {
    fn from(v: HypothesisViolation) -> Self {
        Error::Hypothesis(v)
    }
}
