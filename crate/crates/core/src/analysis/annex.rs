//! Closed forms for a 2×2 non-cooperative coupling
//! `A = [[a, b], [c, d]]` with `b > 0`, `c < 0`, `D = (a − d)² + 4bc > 0`,
//! and checks of the three classical sign results for it.

use std::fmt;

use crate::coupling::{CouplingMatrix, DEFAULT_TOL};
use crate::error::{Error, HypothesisViolation, Result};
use crate::grid::GridFunction;
use crate::laplacian::DomainSpectrum;
use crate::sign::{Sign, DEADBAND};
use crate::system::{solve_direct, SystemProblem};

use super::{empirical_delta_system, observed_signs, verify, Side};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoByTwoData {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// `D = (a − d)² + 4bc`.
    pub discriminant: f64,
    /// `(a + d + √D)/2`.
    pub xi1: f64,
    /// `(a + d − √D)/2`.
    pub xi2: f64,
    /// `λ₁ − ξ₁`.
    pub mu_minus: f64,
    /// `λ₁ − ξ₂`.
    pub mu_plus: f64,
    /// `(d − a + √D)/(−2c)`.
    pub t_star: f64,
    /// Columns `X_k = (b, ξ_k − a)`.
    pub p: [[f64; 2]; 2],
    pub p_inv: [[f64; 2]; 2],
    /// Both `a` and `d` lie outside `[ξ₂, ξ₁]`.
    pub diagonal_outside_spectrum: bool,
}

impl TwoByTwoData {
    pub fn rows(&self) -> Vec<Vec<f64>> {
        vec![vec![self.a, self.b], vec![self.c, self.d]]
    }

    /// `f̃₁ = [(a − ξ₂) f + b g] / (b (ξ₁ − ξ₂))` in the closed-form basis.
    pub fn first_transformed(&self, f: &GridFunction, g: &GridFunction) -> GridFunction {
        let mut out = f.scaled(self.a - self.xi2);
        out.axpy(self.b, g);
        out.scaled(1.0 / (self.b * (self.xi1 - self.xi2)))
    }
}

pub fn annex_2x2(a: f64, b: f64, c: f64, d: f64, spectrum: &DomainSpectrum) -> Result<TwoByTwoData> {
    let discriminant = (a - d).powi(2) + 4.0 * b * c;
    let (b_positive, c_negative, discriminant_positive) = (b > 0.0, c < 0.0, discriminant > 0.0);
    if !(b_positive && c_negative && discriminant_positive) {
        return Err(HypothesisViolation::TwoByTwo { b_positive, c_negative, discriminant_positive }.into());
    }
    let root = discriminant.sqrt();
    let xi1 = 0.5 * (a + d + root);
    let xi2 = 0.5 * (a + d - root);
    let scale = 1.0 / (b * (xi1 - xi2));
    let outside = |x: f64| x < xi2 || x > xi1;
    Ok(TwoByTwoData {
        a,
        b,
        c,
        d,
        discriminant,
        xi1,
        xi2,
        mu_minus: spectrum.lambda1 - xi1,
        mu_plus: spectrum.lambda1 - xi2,
        t_star: (d - a + root) / (-2.0 * c),
        p: [[b, b], [xi1 - a, xi2 - a]],
        p_inv: [[scale * (a - xi2), scale * b], [scale * (xi1 - a), -scale * b]],
        diagonal_outside_spectrum: outside(a) && outside(d),
    })
}

/// The three classical sign results for the 2×2 system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnnexTheorem {
    /// `d < a`, `f, g ≥ 0`, `μ` just above `μ₁⁻`: `u < 0 < v`.
    MixedSignsAbove,
    /// `a < d`, `f ≤ 0 ≤ g`, `μ` just above `μ₁⁻`: `u, v < 0`.
    NegativeAbove,
    /// `a < d`, `f, g ≥ 0`, `t*g − f ≥ 0`, any `μ < μ₁⁻`: `u, v > 0`.
    PositiveBelow,
}

impl AnnexTheorem {
    pub const ALL: [AnnexTheorem; 3] =
        [AnnexTheorem::MixedSignsAbove, AnnexTheorem::NegativeAbove, AnnexTheorem::PositiveBelow];

    pub fn as_str(self) -> &'static str {
        match self {
            AnnexTheorem::MixedSignsAbove => "mixed_signs_above",
            AnnexTheorem::NegativeAbove => "negative_above",
            AnnexTheorem::PositiveBelow => "positive_below",
        }
    }

    /// Interior signs of `(u, v)` asserted by the result.
    pub fn expected(self) -> [Sign; 2] {
        match self {
            AnnexTheorem::MixedSignsAbove => [Sign::Negative, Sign::Positive],
            AnnexTheorem::NegativeAbove => [Sign::Negative, Sign::Negative],
            AnnexTheorem::PositiveBelow => [Sign::Positive, Sign::Positive],
        }
    }
}

impl fmt::Display for AnnexTheorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremVerdict {
    pub theorem: AnnexTheorem,
    pub mu: f64,
    pub expected: [Sign; 2],
    pub observed_interior: Vec<Sign>,
    pub observed_normal: Vec<Sign>,
    /// Observed interior signs equal the expected ones and the normal
    /// derivatives carry the opposite signs.
    pub passed: bool,
    /// Signs predicted from `X₁` by the general theory.
    pub general_prediction: Vec<Sign>,
    pub agrees_with_general: bool,
    /// For results stated just above `μ₁⁻`: whether `μ − μ₁⁻` is inside the
    /// empirically located window.
    pub within_empirical_delta: Option<bool>,
}

fn nonnegative(g: &GridFunction) -> bool {
    g.norm_max() > 0.0 && g.min() >= -DEADBAND * g.norm_max()
}

fn require(cond: bool, clause: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::HypothesisNotMet(clause.to_string()))
    }
}

fn check_hypotheses(theorem: AnnexTheorem, data: &TwoByTwoData, f: &GridFunction, g: &GridFunction, mu: f64) -> Result<()> {
    let above = mu > data.mu_minus && mu < data.mu_plus;
    match theorem {
        AnnexTheorem::MixedSignsAbove => {
            require(above, "μ₁⁻ < μ < μ₁⁺")?;
            require(data.d < data.a, "d < a")?;
            require(nonnegative(f), "f ≥ 0, f ≢ 0")?;
            require(nonnegative(g), "g ≥ 0, g ≢ 0")
        }
        AnnexTheorem::NegativeAbove => {
            require(above, "μ₁⁻ < μ < μ₁⁺")?;
            require(data.a < data.d, "a < d")?;
            require(nonnegative(&-f), "f ≤ 0, f ≢ 0")?;
            require(nonnegative(g), "g ≥ 0, g ≢ 0")
        }
        AnnexTheorem::PositiveBelow => {
            require(mu < data.mu_minus, "μ < μ₁⁻")?;
            require(data.a < data.d, "a < d")?;
            require(nonnegative(f), "f ≥ 0, f ≢ 0")?;
            require(nonnegative(g), "g ≥ 0, g ≢ 0")?;
            let mut w = g.scaled(data.t_star);
            w.axpy(-1.0, f);
            require(nonnegative(&w), "t*g − f ≥ 0, ≢ 0")
        }
    }
}

/// Solves the 2×2 system at `μ` and compares the observed signs with the
/// conclusion of `theorem` and with the general prediction.
pub fn annex_theorem_check(
    theorem: AnnexTheorem,
    data: &TwoByTwoData,
    f: &GridFunction,
    g: &GridFunction,
    mu: f64,
    spectrum: &DomainSpectrum,
) -> Result<TheoremVerdict> {
    check_hypotheses(theorem, data, f, g, mu)?;
    let cm = CouplingMatrix::from_rows(&data.rows(), DEFAULT_TOL)?;
    let sources = [f.clone(), g.clone()];
    let problem = SystemProblem::new(&cm, mu, &sources, spectrum)?;
    let solution = solve_direct(&problem)?;
    let (observed_interior, observed_normal) = observed_signs(&solution.u);
    let expected = theorem.expected();
    let passed = observed_interior == expected
        && observed_normal.iter().zip(&expected).all(|(&n, &e)| n == -e);
    let general = verify(&problem, &solution)?.predicted;
    let within_empirical_delta = match theorem {
        AnnexTheorem::PositiveBelow => None,
        _ => {
            let est = empirical_delta_system(&cm, &sources, spectrum, Side::Above)?;
            Some(mu - data.mu_minus <= est.delta)
        }
    };
    Ok(TheoremVerdict {
        theorem,
        mu,
        expected,
        observed_interior,
        observed_normal,
        passed,
        agrees_with_general: general == expected,
        general_prediction: general,
        within_empirical_delta,
    })
}

/// All three checks; each entry carries its own hypothesis outcome.
pub fn annex_theorem_checks(
    data: &TwoByTwoData,
    f: &GridFunction,
    g: &GridFunction,
    mu: f64,
    spectrum: &DomainSpectrum,
) -> Vec<(AnnexTheorem, Result<TheoremVerdict>)> {
    AnnexTheorem::ALL.iter().map(|&t| (t, annex_theorem_check(t, data, f, g, mu, spectrum))).collect()
}
