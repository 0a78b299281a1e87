//! Browser bindings for three interactive views on the unit interval:
//! a scalar profile, a 2×2 system profile and the antimaximum window.

use signlab::{
    annex_2x2, estimate_amp_interval, leading_eigenpairs, solve_direct, solve_shifted, CouplingMatrix, DomainGrid,
    DomainSpectrum, GridFunction, Result, SystemProblem, DEFAULT_TOL,
};
use wasm_bindgen::prelude::*;

fn js(e: signlab::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct Demo {
    spectrum: DomainSpectrum,
}

#[wasm_bindgen]
impl Demo {
    /// Interval `(0, 1)` with `nodes` interior points.
    #[wasm_bindgen(constructor)]
    pub fn new(nodes: usize) -> std::result::Result<Demo, JsError> {
        Demo::build(nodes).map_err(js)
    }

    pub fn lambda1(&self) -> f64 {
        self.spectrum.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.spectrum.lambda2
    }

    pub fn xs(&self) -> Vec<f64> {
        let g = self.spectrum.grid();
        (0..g.node_count()).map(|i| g.coordinates(i)[0]).collect()
    }

    /// `z` solving `−z'' − σz = φ₁ + tφ₂`.
    pub fn scalar_profile(&self, sigma: f64, t: f64) -> std::result::Result<Vec<f64>, JsError> {
        self.scalar(sigma, t).map_err(js)
    }

    /// `[u; v]` for `A = [[a, b], [c, d]]` and `F = (φ₁, φ₁)`, concatenated.
    pub fn system_profile(&self, a: f64, b: f64, c: f64, d: f64, mu: f64) -> std::result::Result<Vec<f64>, JsError> {
        self.system(a, b, c, d, mu).map_err(js)
    }

    /// `[ξ₁, ξ₂, μ₁⁻, μ₁⁺]` for the same matrix.
    pub fn system_summary(&self, a: f64, b: f64, c: f64, d: f64) -> std::result::Result<Vec<f64>, JsError> {
        let t = annex_2x2(a, b, c, d, &self.spectrum).map_err(js)?;
        Ok(vec![t.xi1, t.xi2, t.mu_minus, t.mu_plus])
    }

    /// Width of the antimaximum window above `λ₁` for `h = φ₁ + tφ₂`.
    pub fn amp_delta(&self, t: f64) -> std::result::Result<f64, JsError> {
        self.amp(t).map_err(js)
    }
}

impl Demo {
    pub fn build(nodes: usize) -> Result<Demo> {
        Ok(Demo { spectrum: leading_eigenpairs(&DomainGrid::interval(1.0, nodes)?)? })
    }

    fn source(&self, t: f64) -> GridFunction {
        let mut h = self.spectrum.phi1.clone();
        h.axpy(t, &self.spectrum.phi2);
        h
    }

    pub fn scalar(&self, sigma: f64, t: f64) -> Result<Vec<f64>> {
        Ok(solve_shifted(sigma, &self.source(t), &self.spectrum)?.into_values())
    }

    pub fn system(&self, a: f64, b: f64, c: f64, d: f64, mu: f64) -> Result<Vec<f64>> {
        let cm = CouplingMatrix::from_rows(&[vec![a, b], vec![c, d]], DEFAULT_TOL)?;
        let f = [self.spectrum.phi1.clone(), self.spectrum.phi1.clone()];
        let sol = solve_direct(&SystemProblem::new(&cm, mu, &f, &self.spectrum)?)?;
        Ok(sol.u.into_iter().flat_map(GridFunction::into_values).collect())
    }

    pub fn amp(&self, t: f64) -> Result<f64> {
        Ok(estimate_amp_interval(&self.source(t), &self.spectrum, 3.0)?.delta_empirical)
    }
}
