//! The system `−ΔU = AU + μU + F`, `U = 0` on the boundary, solved two ways:
//! sequentially in the Jordan basis (`U = PŨ`) and as one monolithic
//! block-banded system.

use crate::band::BandMatrix;
use crate::coupling::CouplingMatrix;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::laplacian::{apply_neg_laplacian, check_shift, DomainSpectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Jordan,
    Direct,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Jordan => "jordan",
            Method::Direct => "direct",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SystemProblem<'a> {
    pub cm: &'a CouplingMatrix,
    pub mu: f64,
    pub f: &'a [GridFunction],
    pub spectrum: &'a DomainSpectrum,
}

impl<'a> SystemProblem<'a> {
    /// Checks component count, a shared grid, and that no `ξ_k + μ` hits the
    /// discrete Laplacian spectrum.
    pub fn new(cm: &'a CouplingMatrix, mu: f64, f: &'a [GridFunction], spectrum: &'a DomainSpectrum) -> Result<Self> {
        if f.len() != cm.n() {
            return Err(Error::InvalidInput(format!("{} source components for a {}×{} system", f.len(), cm.n(), cm.n())));
        }
        if f.iter().any(|fi| fi.grid() != spectrum.grid()) {
            return Err(Error::InvalidInput("source components must share the spectrum's grid".into()));
        }
        for &xi in cm.eigenvalues() {
            check_shift(spectrum.grid(), xi + mu)?;
        }
        Ok(SystemProblem { cm, mu, f, spectrum })
    }

    pub fn n(&self) -> usize {
        self.cm.n()
    }

    pub fn mu11(&self) -> f64 {
        self.cm.principal_system_eigenvalue(self.spectrum.lambda1)
    }

    pub fn with_mu(&self, mu: f64) -> Result<SystemProblem<'a>> {
        SystemProblem::new(self.cm, mu, self.f, self.spectrum)
    }
}

#[derive(Debug, Clone)]
pub struct SystemSolution {
    pub u: Vec<GridFunction>,
    /// `Ũ = P⁻¹U`.
    pub u_tilde: Vec<GridFunction>,
    /// `max_i ‖(−Δ_h u − AU − μU − F)_i‖_max`.
    pub residual: f64,
    /// `residual / (‖L‖_∞ max_i ‖u_i‖_max + max_i ‖f_i‖_max)`, with `L` the
    /// discrete system operator.
    pub backward_error: f64,
    pub method: Method,
}

fn mix(m: &nalgebra::DMatrix<f64>, v: &[GridFunction]) -> Vec<GridFunction> {
    let grid = *v[0].grid();
    (0..m.nrows())
        .map(|i| {
            let mut acc = GridFunction::zeros(grid);
            for (j, vj) in v.iter().enumerate() {
                let c = m[(i, j)];
                if c != 0.0 {
                    acc.axpy(c, vj);
                }
            }
            acc
        })
        .collect()
}

/// `F̃ = P⁻¹F`, nodewise.
pub fn transform_source(cm: &CouplingMatrix, f: &[GridFunction]) -> Vec<GridFunction> {
    mix(cm.p_inv(), f)
}

/// `U = PŨ`, nodewise.
pub fn to_physical(cm: &CouplingMatrix, u_tilde: &[GridFunction]) -> Vec<GridFunction> {
    mix(cm.p(), u_tilde)
}

/// Residual and backward error of `u` in the discrete system.
pub fn system_residual(problem: &SystemProblem<'_>, u: &[GridFunction]) -> (f64, f64) {
    let a = problem.cm.entries();
    let mut residual = 0.0_f64;
    for i in 0..problem.n() {
        let mut r = apply_neg_laplacian(&u[i]);
        for (j, uj) in u.iter().enumerate() {
            r.axpy(-a[(i, j)], uj);
        }
        r.axpy(-problem.mu, &u[i]);
        r.axpy(-1.0, &problem.f[i]);
        residual = residual.max(r.norm_max());
    }
    let grid = problem.spectrum.grid();
    let stencil: f64 = grid.spacing().iter().map(|h| 4.0 / (h * h)).sum();
    let coupling = (0..problem.n()).map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let op_norm = stencil + coupling + problem.mu.abs();
    let umax = u.iter().map(GridFunction::norm_max).fold(0.0, f64::max);
    let fmax = problem.f.iter().map(GridFunction::norm_max).fold(0.0, f64::max);
    let denom = op_norm * umax + fmax;
    (residual, if denom > 0.0 { residual / denom } else { 0.0 })
}

/// Sequential solve in the Jordan basis: `ũ_j` solves
/// `(−Δ_h − ξ_j − μ) ũ_j = f̃_j + ũ_{j−1}`, the coupling term present only
/// inside a block. Factorizations are shared through the spectrum's cache,
/// so repeated shifts within a block are factored once.
pub fn solve_jordan(problem: &SystemProblem<'_>) -> Result<SystemSolution> {
    let cm = problem.cm;
    let f_tilde = transform_source(cm, problem.f);
    let solver = problem.spectrum.solver();
    let mut u_tilde: Vec<GridFunction> = Vec::with_capacity(cm.n());
    for (j, fj) in f_tilde.iter().enumerate() {
        let shift = cm.eigenvalues()[j] + problem.mu;
        let component = if cm.starts_block(j) {
            solver.solve(shift, fj)?
        } else {
            solver.solve(shift, &(fj + &u_tilde[j - 1]))?
        };
        u_tilde.push(component);
    }
    let u = to_physical(cm, &u_tilde);
    let (residual, backward_error) = system_residual(problem, &u);
    Ok(SystemSolution { u, u_tilde, residual, backward_error, method: Method::Jordan })
}

/// Monolithic solve of the block system. Unknowns are node-major: all
/// components of a node are contiguous, so the coupling block is dense and
/// local and the bandwidth is `n` (1D) or `n·nx` (2D).
pub fn solve_direct(problem: &SystemProblem<'_>) -> Result<SystemSolution> {
    let n = problem.n();
    let grid = *problem.spectrum.grid();
    let (nx, ny) = (grid.nx(), grid.ny());
    let nodes = grid.node_count();
    let two_d = grid.dimension() == 2;
    let bw = if two_d { n * nx } else { n };
    let cx = 1.0 / grid.spacing()[0].powi(2);
    let cy = if two_d { 1.0 / grid.spacing()[1].powi(2) } else { 0.0 };
    let a = problem.cm.entries();

    let mut m = BandMatrix::zeros(nodes * n, bw, bw);
    for iy in 0..ny {
        for ix in 0..nx {
            let node = grid.index(ix, iy);
            for c in 0..n {
                let row = node * n + c;
                for d in 0..n {
                    let mut v = -a[(c, d)];
                    if c == d {
                        v += 2.0 * cx + 2.0 * cy - problem.mu;
                    }
                    m.add(row, node * n + d, v);
                }
                if ix > 0 {
                    m.add(row, (node - 1) * n + c, -cx);
                }
                if ix + 1 < nx {
                    m.add(row, (node + 1) * n + c, -cx);
                }
                if iy > 0 {
                    m.add(row, (node - nx) * n + c, -cy);
                }
                if iy + 1 < ny {
                    m.add(row, (node + nx) * n + c, -cy);
                }
            }
        }
    }

    let mut rhs = vec![0.0; nodes * n];
    for (c, fc) in problem.f.iter().enumerate() {
        for (node, &v) in fc.values().iter().enumerate() {
            rhs[node * n + c] = v;
        }
    }
    let lu = m.clone().factor()?;
    let mut x = lu.solve(&rhs);
    let mx = m.matvec(&x);
    let r: Vec<f64> = rhs.iter().zip(&mx).map(|(b, y)| b - y).collect();
    for (xi, d) in x.iter_mut().zip(lu.solve(&r)) {
        *xi += d;
    }

    let u: Vec<GridFunction> = (0..n)
        .map(|c| GridFunction::new(grid, (0..nodes).map(|node| x[node * n + c]).collect()))
        .collect::<Result<_>>()?;
    let u_tilde = mix(problem.cm.p_inv(), &u);
    let (residual, backward_error) = system_residual(problem, &u);
    Ok(SystemSolution { u, u_tilde, residual, backward_error, method: Method::Direct })
}
