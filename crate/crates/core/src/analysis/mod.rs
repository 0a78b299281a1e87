//! Sign predictions for the solution components near `μ₁₁ = λ₁ − ξ₁` and
//! their verification against computed solutions.
//!
//! Below `μ₁₁` each component `u_i` takes the sign of `p_{i1}` and its
//! outward normal derivative the opposite sign; just above `μ₁₁` both flip.
//! The prediction is made in the orientation of `X₁` for which the groundstate
//! coefficient `⟨f̃₁, φ₁⟩` is positive, which makes it independent of how `X₁`
//! was normalized.

pub mod annex;

use std::fmt;

use crate::bisect;
use crate::coupling::CouplingMatrix;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::laplacian::{boundary_sign_relative_to, interior_sign_relative_to, normal_derivative_scale, DomainSpectrum};
use crate::scalar::{BRACKET_WIDTH, SEARCH_END_MARGIN, SEARCH_START_OFFSET};
use crate::sign::{Sign, DEADBAND};
use crate::system::{solve_jordan, SystemProblem, SystemSolution};

/// `|μ − μ₁₁|` below this is treated as sitting on the eigenvalue.
pub const AT_EIGENVALUE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Below,
    Above,
}

impl Side {
    pub fn of(mu: f64, mu11: f64) -> Side {
        if mu < mu11 {
            Side::Below
        } else {
            Side::Above
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Below => "below",
            Side::Above => "above",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Positivity of the first transformed source component `f̃₁ = (P⁻¹F)₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hf1 {
    /// `f̃₁ ≥ 0` up to the dead-band and not identically zero.
    pub strict: bool,
    /// `⟨f̃₁, φ₁⟩ > 0`.
    pub weak: bool,
    pub f_tilde_1_phi1: f64,
}

fn first_transformed(cm: &CouplingMatrix, f: &[GridFunction]) -> GridFunction {
    let mut acc = GridFunction::zeros(*f[0].grid());
    for (j, fj) in f.iter().enumerate() {
        acc.axpy(cm.p_inv()[(0, j)], fj);
    }
    acc
}

fn hf1_of(f1: &GridFunction, phi1: &GridFunction) -> Hf1 {
    let band = DEADBAND * f1.norm_max();
    let inner = f1.inner(phi1);
    Hf1 {
        strict: f1.norm_max() > 0.0 && f1.min() >= -band && f1.max() > band,
        weak: inner > 1e-9 * f1.norm_l2(),
        f_tilde_1_phi1: inner,
    }
}

/// Evaluates the source hypothesis in the stored basis.
pub fn check_hf1(cm: &CouplingMatrix, f: &[GridFunction], spectrum: &DomainSpectrum) -> Hf1 {
    hf1_of(&first_transformed(cm, f), &spectrum.phi1)
}

/// Orientation `±1` of `X₁` making `⟨f̃₁, φ₁⟩ ≥ 0`, and the hypothesis evaluated in it.
pub fn oriented_hf1(cm: &CouplingMatrix, f: &[GridFunction], spectrum: &DomainSpectrum) -> (f64, Hf1) {
    let f1 = first_transformed(cm, f);
    if f1.inner(&spectrum.phi1) < 0.0 {
        (-1.0, hf1_of(&-&f1, &spectrum.phi1))
    } else {
        (1.0, hf1_of(&f1, &spectrum.phi1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub side: Side,
    pub signs: Vec<Sign>,
    /// `μ` lies inside the caller's window around `μ₁₁`.
    pub valid: bool,
}

/// Signs of `p_{i1}` below `μ₁₁`, negated above. Components with
/// `|p_{i1}| ≤ tol` are predicted zero.
pub fn predict(cm: &CouplingMatrix, mu: f64, spectrum: &DomainSpectrum, window: f64) -> Result<Prediction> {
    let mu11 = cm.principal_system_eigenvalue(spectrum.lambda1);
    if (mu - mu11).abs() < AT_EIGENVALUE {
        return Err(Error::AtEigenvalue { mu, mu11 });
    }
    let side = Side::of(mu, mu11);
    let below: Vec<Sign> = cm.x1().iter().map(|&p| Sign::of(p, cm.tol())).collect();
    let signs = match side {
        Side::Below => below,
        Side::Above => below.into_iter().map(|s| -s).collect(),
    };
    Ok(Prediction { side, signs, valid: (mu - mu11).abs() < window })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignReport {
    pub mu: f64,
    pub side: Side,
    pub predicted: Vec<Sign>,
    pub observed_interior: Vec<Sign>,
    pub observed_normal: Vec<Sign>,
    pub hypothesis_hf1: bool,
    /// Predicted equals observed interior sign for every component and every
    /// normal-derivative sign is the negation of the interior sign.
    pub matches: bool,
}

/// Observed interior and boundary signs of every component, with dead-bands
/// relative to the largest value and the largest normal derivative over all components.
pub fn observed_signs(u: &[GridFunction]) -> (Vec<Sign>, Vec<Sign>) {
    let reference = u.iter().map(GridFunction::norm_max).fold(0.0, f64::max);
    let flux = u.iter().map(normal_derivative_scale).fold(0.0, f64::max);
    let interior = u.iter().map(|ui| interior_sign_relative_to(ui, reference)).collect();
    let normal = u.iter().map(|ui| boundary_sign_relative_to(ui, flux)).collect();
    (interior, normal)
}

pub fn verify(problem: &SystemProblem<'_>, solution: &SystemSolution) -> Result<SignReport> {
    let (orientation, hf1) = oriented_hf1(problem.cm, problem.f, problem.spectrum);
    let prediction = predict(problem.cm, problem.mu, problem.spectrum, f64::INFINITY)?;
    let predicted: Vec<Sign> =
        prediction.signs.into_iter().map(|s| if orientation < 0.0 { -s } else { s }).collect();
    let (observed_interior, observed_normal) = observed_signs(&solution.u);
    let matches = predicted == observed_interior
        && observed_normal.iter().zip(&observed_interior).all(|(&n, &i)| n == -i);
    Ok(SignReport {
        mu: problem.mu,
        side: prediction.side,
        predicted,
        observed_interior,
        observed_normal,
        hypothesis_hf1: hf1.weak,
        matches,
    })
}

/// Solves at `μ` (Jordan route) and verifies.
pub fn solve_and_verify(
    cm: &CouplingMatrix,
    mu: f64,
    f: &[GridFunction],
    spectrum: &DomainSpectrum,
) -> Result<(SystemSolution, SignReport)> {
    let problem = SystemProblem::new(cm, mu, f, spectrum)?;
    let solution = solve_jordan(&problem)?;
    let report = verify(&problem, &solution)?;
    Ok((solution, report))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaEstimate {
    pub side: Side,
    /// Largest verified offset `|μ − μ₁₁|` with a matching sign report.
    pub delta: f64,
    /// `min{ξ₁ − ξ₂, λ₂ − λ₁} − 1e-3`.
    pub cap: f64,
    pub reached_cap: bool,
    pub bracket_width: f64,
}

/// Upper end of the offset search on either side of `μ₁₁`.
pub fn delta_search_cap(cm: &CouplingMatrix, spectrum: &DomainSpectrum) -> f64 {
    let mut eps = spectrum.gap();
    if let Some(xi2) = cm.xi2() {
        eps = eps.min(cm.xi1() - xi2);
    }
    eps - SEARCH_END_MARGIN
}

/// Bisection on `|μ − μ₁₁|` for the largest offset on `side` at which the
/// predicted sign pattern is observed.
pub fn empirical_delta_system(
    cm: &CouplingMatrix,
    f: &[GridFunction],
    spectrum: &DomainSpectrum,
    side: Side,
) -> Result<DeltaEstimate> {
    let (_, hf1) = oriented_hf1(cm, f, spectrum);
    if !hf1.weak {
        return Err(Error::HypothesisNotMet(format!(
            "⟨f̃₁, φ₁⟩ = {:e} is not positive in either orientation of X₁",
            hf1.f_tilde_1_phi1
        )));
    }
    let mu11 = cm.principal_system_eigenvalue(spectrum.lambda1);
    let dir = match side {
        Side::Below => -1.0,
        Side::Above => 1.0,
    };
    let cap = delta_search_cap(cm, spectrum);
    if cap <= SEARCH_START_OFFSET {
        return Err(Error::InvalidInput("eigenvalue gaps too small for a δ search".into()));
    }
    let bracket = bisect::last_true(SEARCH_START_OFFSET, cap, BRACKET_WIDTH, |offset| {
        Ok(solve_and_verify(cm, mu11 + dir * offset, f, spectrum)?.1.matches)
    })?
    .ok_or(Error::PatternAbsent { at: mu11 + dir * SEARCH_START_OFFSET })?;
    Ok(DeltaEstimate {
        side,
        delta: bracket.last_true,
        cap,
        reached_cap: bracket.capped,
        bracket_width: bracket.width(),
    })
}

/// `count` evenly spaced values of `μ` across `μ₁₁ ± cap/2`. With an odd
/// count the centre lands on `μ₁₁` itself and is reported as such by [`sweep`].
pub fn auto_window(cm: &CouplingMatrix, spectrum: &DomainSpectrum, count: usize) -> Vec<f64> {
    let mu11 = cm.principal_system_eigenvalue(spectrum.lambda1);
    let half = 0.5 * delta_search_cap(cm, spectrum);
    linspace(mu11 - half, mu11 + half, count)
}

pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![0.5 * (lo + hi)],
        _ => (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub mu: f64,
    pub report: Option<SignReport>,
    /// Error code when the point could not be solved: `at_eigenvalue` or
    /// `near_singular_shift`.
    pub excluded: Option<&'static str>,
    pub hf1: Hf1,
    pub backward_error: f64,
    pub u1_tilde_max: f64,
}

/// One point of a sweep. Points on `μ₁₁` or with a shift on a discrete
/// eigenvalue are recorded as excluded; any other failure is returned.
pub fn sweep_point(cm: &CouplingMatrix, mu: f64, f: &[GridFunction], spectrum: &DomainSpectrum) -> Result<SweepPoint> {
    let (_, hf1) = oriented_hf1(cm, f, spectrum);
    let excluded = |code| SweepPoint {
        mu,
        report: None,
        excluded: Some(code),
        hf1,
        backward_error: f64::NAN,
        u1_tilde_max: f64::NAN,
    };
    match solve_and_verify(cm, mu, f, spectrum) {
        Ok((solution, report)) => Ok(SweepPoint {
            mu,
            report: Some(report),
            excluded: None,
            hf1,
            backward_error: solution.backward_error,
            u1_tilde_max: solution.u_tilde[0].norm_max(),
        }),
        Err(e @ (Error::AtEigenvalue { .. } | Error::NearSingularShift { .. })) => {
            let mu11 = cm.principal_system_eigenvalue(spectrum.lambda1);
            Ok(excluded(if (mu - mu11).abs() < AT_EIGENVALUE { "at_eigenvalue" } else { e.code() }))
        }
        Err(e) => Err(e),
    }
}

/// Sweep points in increasing `μ`, whatever order `mus` is given in.
pub fn sweep(cm: &CouplingMatrix, mus: &[f64], f: &[GridFunction], spectrum: &DomainSpectrum) -> Result<Vec<SweepPoint>> {
    let mut sorted = mus.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.iter().map(|&mu| sweep_point(cm, mu, f, spectrum)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DomainGrid;
    use crate::laplacian::leading_eigenpairs;

    #[test]
    fn sweep_flags_the_eigenvalue_and_orders_rows() {
        let (cm, s) = setup();
        let f = vec![s.phi1.clone(), s.phi1.clone()];
        let mus = auto_window(&cm, &s, 5);
        let mut shuffled = mus.clone();
        shuffled.reverse();
        let pts = sweep(&cm, &shuffled, &f, &s).unwrap();
        assert_eq!(pts.iter().map(|p| p.mu).collect::<Vec<_>>(), mus);
        assert!(pts[2].report.is_none());
        assert!(pts.iter().enumerate().all(|(k, p)| k == 2 || p.report.as_ref().unwrap().matches));
    }

    fn setup() -> (CouplingMatrix, DomainSpectrum) {
        let cm = CouplingMatrix::from_rows(&[vec![2.0, 1.0], vec![-0.5, 0.0]], 1e-8).unwrap();
        let s = leading_eigenpairs(&DomainGrid::interval(1.0, 99).unwrap()).unwrap();
        (cm, s)
    }

    fn pushed_forward(cm: &CouplingMatrix, field: &GridFunction) -> Vec<GridFunction> {
        (0..cm.n()).map(|i| field.scaled(cm.p()[(i, 0)])).collect()
    }

    #[test]
    fn hf1_examples() {
        let (cm, s) = setup();
        let h = check_hf1(&cm, &pushed_forward(&cm, &s.phi1), &s);
        assert!(h.strict && h.weak);
        assert!((h.f_tilde_1_phi1 - 1.0).abs() < 1e-12);
        let h = check_hf1(&cm, &pushed_forward(&cm, &s.phi2), &s);
        assert!(!h.strict && !h.weak);
        assert!(h.f_tilde_1_phi1.abs() < 1e-10);
    }

    #[test]
    fn prediction_flips_across_mu11() {
        let (cm, s) = setup();
        let mu11 = cm.principal_system_eigenvalue(s.lambda1);
        let below = predict(&cm, mu11 - 0.1, &s, 1.0).unwrap();
        let above = predict(&cm, mu11 + 0.1, &s, 1.0).unwrap();
        assert_eq!(below.signs, vec![Sign::Positive, Sign::Negative]);
        assert_eq!(above.signs, vec![Sign::Negative, Sign::Positive]);
        assert!(!predict(&cm, mu11 + 2.0, &s, 1.0).unwrap().valid);
        assert!(matches!(predict(&cm, mu11, &s, 1.0), Err(Error::AtEigenvalue { .. })));
    }

    #[test]
    fn diagonal_matrix_predicts_kronecker_column() {
        let (_, s) = setup();
        let cm = CouplingMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]], 1e-8).unwrap();
        let mu11 = cm.principal_system_eigenvalue(s.lambda1);
        let p = predict(&cm, mu11 - 0.1, &s, f64::INFINITY).unwrap();
        assert_eq!(p.signs, vec![Sign::Positive, Sign::Zero]);
    }

    #[test]
    fn verify_both_sides() {
        let (cm, s) = setup();
        let f = vec![s.phi1.clone(), s.phi1.clone()];
        let mu11 = cm.principal_system_eigenvalue(s.lambda1);
        let (_, below) = solve_and_verify(&cm, mu11 - 0.05, &f, &s).unwrap();
        assert_eq!(below.observed_interior, vec![Sign::Positive, Sign::Negative]);
        assert!(below.matches && below.hypothesis_hf1);
        let (_, above) = solve_and_verify(&cm, mu11 + 0.01, &f, &s).unwrap();
        assert_eq!(above.observed_interior, vec![Sign::Negative, Sign::Positive]);
        assert!(above.matches);
    }

    #[test]
    fn orthogonal_source_fails_hypothesis_gate() {
        let (cm, s) = setup();
        let f = pushed_forward(&cm, &s.phi2);
        let mu11 = cm.principal_system_eigenvalue(s.lambda1);
        let (_, r) = solve_and_verify(&cm, mu11 + 0.01, &f, &s).unwrap();
        assert!(!r.hypothesis_hf1);
        assert!(matches!(empirical_delta_system(&cm, &f, &s, Side::Above), Err(Error::HypothesisNotMet(_))));
    }

    #[test]
    fn pure_groundstate_source_reaches_cap_above() {
        let (cm, s) = setup();
        let f = pushed_forward(&cm, &s.phi1);
        let d = empirical_delta_system(&cm, &f, &s, Side::Above).unwrap();
        assert!(d.reached_cap, "{d:?}");
    }
}
