//! The scalar problem `−Δz = σz + h`, `z = 0` on the boundary, studied
//! through the groundstate split `h = h¹φ₁ + h^⊥`.

use crate::bisect;
use crate::error::{Error, HypothesisViolation, Result};
use crate::grid::GridFunction;
use crate::laplacian::{boundary_sign, interior_sign, solve_shifted, DomainSpectrum};
use crate::sign::Sign;

/// Searches start this far above `λ₁`.
pub const SEARCH_START_OFFSET: f64 = 1e-6;
/// Searches stop this far below `λ₂`.
pub const SEARCH_END_MARGIN: f64 = 1e-3;
/// Bisection bracket width in the shift.
pub const BRACKET_WIDTH: f64 = 1e-6;

/// `q = 2N + 1`, which satisfies `q > N`.
pub fn default_q(dimension: usize) -> f64 {
    (2 * dimension + 1) as f64
}

#[derive(Debug, Clone)]
pub struct GroundstateSplit {
    pub h1: f64,
    pub h_perp: GridFunction,
    pub q: f64,
    pub q_norm_perp: f64,
}

/// `h¹ = ⟨h, φ₁⟩`, `h^⊥ = h − h¹φ₁`.
pub fn split(h: &GridFunction, spectrum: &DomainSpectrum, q: f64) -> GroundstateSplit {
    let h1 = h.inner(&spectrum.phi1);
    let mut h_perp = h.clone();
    h_perp.axpy(-h1, &spectrum.phi1);
    let q_norm_perp = h_perp.norm_lq(q);
    GroundstateSplit { h1, h_perp, q, q_norm_perp }
}

#[derive(Debug, Clone)]
pub struct ScalarSolution {
    pub sigma: f64,
    pub z: GridFunction,
    /// `⟨z, φ₁⟩`, equal to `h¹/(λ₁ − σ)`.
    pub z1: f64,
    pub z_perp: GridFunction,
}

impl ScalarSolution {
    /// `‖z‖_{L²} / ‖h‖_{L²}`; unbounded near `λ₁` unless `h ⟂ φ₁`.
    pub fn gain(&self, h: &GridFunction) -> f64 {
        self.z.norm_l2() / h.norm_l2()
    }
}

pub fn solve_scalar(sigma: f64, h: &GridFunction, spectrum: &DomainSpectrum) -> Result<ScalarSolution> {
    let z = solve_shifted(sigma, h, spectrum)?;
    let z1 = z.inner(&spectrum.phi1);
    let mut z_perp = z.clone();
    z_perp.axpy(-z1, &spectrum.phi1);
    Ok(ScalarSolution { sigma, z, z1, z_perp })
}

/// Interior positive and outward normal derivative negative everywhere.
pub fn maximum_pattern(z: &GridFunction) -> bool {
    interior_sign(z) == Sign::Positive && boundary_sign(z) == Sign::Negative
}

/// Interior negative and outward normal derivative positive everywhere.
pub fn antimaximum_pattern(z: &GridFunction) -> bool {
    interior_sign(z) == Sign::Negative && boundary_sign(z) == Sign::Positive
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerpBound {
    pub holds: bool,
    /// `‖z^⊥‖ (λ₂ − λ₁) / ‖h^⊥‖`; 0 when `h^⊥` vanishes.
    pub ratio: f64,
}

/// Checks `‖z^⊥‖_{L²} ≤ ‖h^⊥‖_{L²}/(λ₂ − λ₁)` up to a relative `1e-6`.
pub fn check_perp_bound(split: &GroundstateSplit, z_perp: &GridFunction, spectrum: &DomainSpectrum) -> PerpBound {
    let hp = split.h_perp.norm_l2();
    let zp = z_perp.norm_l2();
    let bound = hp / spectrum.gap();
    if hp == 0.0 || hp <= 1e-12 * (hp + split.h1.abs()) {
        return PerpBound { holds: zp <= 1e-8 * (1.0 + split.h1.abs()) / spectrum.gap(), ratio: 0.0 };
    }
    PerpBound { holds: zp <= bound * (1.0 + 1e-6), ratio: zp / bound }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmpEstimate {
    /// Supremum of the shifts where the antimaximum pattern holds, to within the bracket.
    pub mu_threshold: f64,
    /// `mu_threshold − λ₁`.
    pub delta_empirical: f64,
    /// `delta_empirical · ‖h^⊥‖_q / h¹`, an empirical surrogate for the constant `K`.
    pub delta_formula_ratio: f64,
    pub h1: f64,
    pub h_perp_q_norm: f64,
    pub q: f64,
    /// The pattern held all the way to `λ₂ − 1e-3`.
    pub reached_cap: bool,
    pub bracket_width: f64,
}

/// Locates by bisection the largest `σ ∈ (λ₁ + 1e-6, λ₂ − 1e-3)` for which
/// the solution shows the antimaximum sign pattern.
pub fn estimate_amp_interval(h: &GridFunction, spectrum: &DomainSpectrum, q: f64) -> Result<AmpEstimate> {
    let sp = split(h, spectrum, q);
    if !(sp.h1 > 1e-12 * h.norm_l2()) {
        return Err(HypothesisViolation::H1NonPositive { h1: sp.h1 }.into());
    }
    let lo = spectrum.lambda1 + SEARCH_START_OFFSET;
    let hi = spectrum.lambda2 - SEARCH_END_MARGIN;
    if hi <= lo {
        return Err(Error::InvalidInput("spectral gap too small for the antimaximum search".into()));
    }
    let bracket = bisect::last_true(lo, hi, BRACKET_WIDTH, |sigma| {
        Ok(antimaximum_pattern(&solve_shifted(sigma, h, spectrum)?))
    })?
    .ok_or(Error::PatternAbsent { at: lo })?;
    let delta = bracket.last_true - spectrum.lambda1;
    Ok(AmpEstimate {
        mu_threshold: bracket.last_true,
        delta_empirical: delta,
        delta_formula_ratio: delta * sp.q_norm_perp / sp.h1,
        h1: sp.h1,
        h_perp_q_norm: sp.q_norm_perp,
        q,
        reached_cap: bracket.capped,
        bracket_width: bracket.width(),
    })
}
