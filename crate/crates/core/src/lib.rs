//! Finite-difference laboratory for the sign of solutions to linear elliptic
//! systems `−ΔU = AU + μU + F` with Dirichlet boundary conditions, near the
//! lowest principal eigenvalue `μ₁₁ = λ₁ − ξ₁`.
//!
//! The building blocks, bottom-up:
//!
//! * [`grid`] and [`laplacian`]: tensor grids, the discrete Dirichlet
//!   Laplacian, its two leading eigenpairs and shifted solves.
//! * [`coupling`]: the spectrum and Jordan decomposition `A = PJP⁻¹`.
//! * [`scalar`]: the single equation, its groundstate split and the
//!   empirical antimaximum interval.
//! * [`system`]: the coupled system, solved in the Jordan basis and as a
//!   monolithic block system.
//! * [`analysis`]: sign predictions from `X₁` and their verification.

pub mod analysis;
pub mod band;
pub mod bisect;
pub mod coupling;
pub mod error;
pub mod grid;
pub mod laplacian;
pub mod poly;
pub mod scalar;
pub mod sign;
pub mod system;

pub use analysis::annex::{annex_2x2, annex_theorem_check, annex_theorem_checks, AnnexTheorem, TheoremVerdict, TwoByTwoData};
pub use analysis::{
    auto_window, check_hf1, empirical_delta_system, predict, sweep, verify, DeltaEstimate, Hf1, Prediction, Side, SignReport,
    SweepPoint,
};
pub use coupling::{CouplingMatrix, HypothesisReport, DEFAULT_TOL};
pub use error::{Error, HypothesisViolation, Result};
pub use grid::{DomainGrid, GridFunction};
pub use laplacian::{apply_neg_laplacian, leading_eigenpairs, normal_derivative_signs, solve_shifted, DomainSpectrum};
pub use scalar::{check_perp_bound, estimate_amp_interval, solve_scalar, split, AmpEstimate, GroundstateSplit, ScalarSolution};
pub use sign::Sign;
pub use system::{solve_direct, solve_jordan, transform_source, Method, SystemProblem, SystemSolution};
