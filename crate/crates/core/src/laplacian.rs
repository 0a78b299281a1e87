//! Second-order finite-difference Dirichlet Laplacian on tensor grids.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use crate::band::{BandLu, BandMatrix};
use crate::error::{Error, Result};
use crate::grid::{DomainGrid, GridFunction};
use crate::sign::{Sign, DEADBAND};

/// Shifts closer than this to a discrete eigenvalue are rejected.
pub const SHIFT_EXCLUSION: f64 = 1e-8;

/// Relative residual `‖−Δ_h φ − λφ‖ / λ` accepted for an eigenpair.
pub const EIGEN_TOLERANCE: f64 = 1e-10;

const MAX_EIGEN_ITERATIONS: usize = 2000;
const CACHE_CAPACITY: usize = 64;

/// `−Δ_h g` with the 3-point (1D) or 5-point (2D) stencil and zero boundary values.
pub fn apply_neg_laplacian(g: &GridFunction) -> GridFunction {
    let grid = *g.grid();
    let (nx, ny) = (grid.nx(), grid.ny());
    let u = g.values();
    let hx2 = grid.spacing()[0].powi(2);
    let hy2 = if grid.dimension() == 2 { grid.spacing()[1].powi(2) } else { f64::INFINITY };
    let at = |ix: isize, iy: isize| -> f64 {
        if ix < 0 || iy < 0 || ix >= nx as isize || iy >= ny as isize {
            0.0
        } else {
            u[iy as usize * nx + ix as usize]
        }
    };
    let mut out = vec![0.0; u.len()];
    for iy in 0..ny as isize {
        for ix in 0..nx as isize {
            let c = at(ix, iy);
            let mut v = (2.0 * c - at(ix - 1, iy) - at(ix + 1, iy)) / hx2;
            if grid.dimension() == 2 {
                v += (2.0 * c - at(ix, iy - 1) - at(ix, iy + 1)) / hy2;
            }
            out[iy as usize * nx + ix as usize] = v;
        }
    }
    GridFunction::new(grid, out).expect("same node count")
}

/// Banded matrix of `−Δ_h − σI`.
pub fn shifted_operator(grid: &DomainGrid, sigma: f64) -> BandMatrix {
    let (nx, ny) = (grid.nx(), grid.ny());
    let bw = if grid.dimension() == 2 { nx } else { 1 };
    let mut m = BandMatrix::zeros(grid.node_count(), bw, bw);
    let cx = 1.0 / grid.spacing()[0].powi(2);
    let cy = if grid.dimension() == 2 { 1.0 / grid.spacing()[1].powi(2) } else { 0.0 };
    for iy in 0..ny {
        for ix in 0..nx {
            let i = grid.index(ix, iy);
            m.add(i, i, 2.0 * cx + 2.0 * cy - sigma);
            if ix > 0 {
                m.add(i, i - 1, -cx);
            }
            if ix + 1 < nx {
                m.add(i, i + 1, -cx);
            }
            if iy > 0 {
                m.add(i, i - nx, -cy);
            }
            if iy + 1 < ny {
                m.add(i, i + nx, -cy);
            }
        }
    }
    m
}

/// Factorizations of `−Δ_h − σI`, cached per shift. Safe for concurrent use.
pub struct ShiftedSolver {
    grid: DomainGrid,
    cache: RwLock<HashMap<u64, Arc<BandLu>>>,
}

impl fmt::Debug for ShiftedSolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cached = self.cache.read().map(|c| c.len()).unwrap_or(0);
        f.debug_struct("ShiftedSolver").field("grid", &self.grid).field("cached", &cached).finish()
    }
}

impl ShiftedSolver {
    pub fn new(grid: DomainGrid) -> Self {
        ShiftedSolver { grid, cache: RwLock::new(HashMap::new()) }
    }

    pub fn grid(&self) -> &DomainGrid {
        &self.grid
    }

    pub fn factorization(&self, sigma: f64) -> Result<Arc<BandLu>> {
        let key = sigma.to_bits();
        if let Some(lu) = self.cache.read().expect("cache lock").get(&key) {
            return Ok(Arc::clone(lu));
        }
        let lu = Arc::new(shifted_operator(&self.grid, sigma).factor()?);
        let mut cache = self.cache.write().expect("cache lock");
        if cache.len() >= CACHE_CAPACITY {
            cache.clear();
        }
        Ok(Arc::clone(cache.entry(key).or_insert(lu)))
    }

    /// Solves `(−Δ_h − σI) z = h` with one step of iterative refinement.
    /// Does not check the shift against the spectrum.
    pub fn solve_unchecked(&self, sigma: f64, h: &GridFunction) -> Result<GridFunction> {
        assert_eq!(h.grid(), &self.grid, "source lives on a different grid");
        let lu = self.factorization(sigma)?;
        let mut z = lu.solve(h.values());
        let zf = GridFunction::new(self.grid, z.clone())?;
        let az = apply_neg_laplacian(&zf);
        let r: Vec<f64> =
            h.values().iter().zip(az.values()).zip(&z).map(|((hv, a), zv)| hv - (a - sigma * zv)).collect();
        let dz = lu.solve(&r);
        for (a, d) in z.iter_mut().zip(dz) {
            *a += d;
        }
        GridFunction::new(self.grid, z)
    }

    pub fn solve(&self, sigma: f64, h: &GridFunction) -> Result<GridFunction> {
        check_shift(&self.grid, sigma)?;
        self.solve_unchecked(sigma, h)
    }
}

/// Rejects shifts within [`SHIFT_EXCLUSION`] of the discrete stencil spectrum.
pub fn check_shift(grid: &DomainGrid, sigma: f64) -> Result<()> {
    if !sigma.is_finite() {
        return Err(Error::InvalidInput(format!("shift {sigma} is not finite")));
    }
    let eigenvalue = grid.nearest_discrete_eigenvalue(sigma);
    let distance = (eigenvalue - sigma).abs();
    if distance < SHIFT_EXCLUSION {
        return Err(Error::NearSingularShift { sigma, eigenvalue, distance });
    }
    Ok(())
}

/// The two smallest eigenpairs of `−Δ_h`, normalized in discrete L².
#[derive(Debug, Clone)]
pub struct DomainSpectrum {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Strictly positive at every interior node.
    pub phi1: GridFunction,
    /// Orthogonal to `phi1`; sign fixed so its first non-negligible node value is positive.
    pub phi2: GridFunction,
    solver: Arc<ShiftedSolver>,
}

impl DomainSpectrum {
    pub fn grid(&self) -> &DomainGrid {
        self.phi1.grid()
    }

    pub fn solver(&self) -> &ShiftedSolver {
        &self.solver
    }

    /// Eigenpair `k ∈ {1, 2}`.
    pub fn mode(&self, k: usize) -> Option<&GridFunction> {
        match k {
            1 => Some(&self.phi1),
            2 => Some(&self.phi2),
            _ => None,
        }
    }

    pub fn gap(&self) -> f64 {
        self.lambda2 - self.lambda1
    }
}

fn rayleigh_residual(v: &GridFunction) -> (f64, f64) {
    let av = apply_neg_laplacian(v);
    let lambda = av.inner(v) / v.inner(v);
    let mut r = av;
    r.axpy(-lambda, v);
    (lambda, r.norm_l2() / (lambda.abs() * v.norm_l2()))
}

fn inverse_iteration(
    lu: &BandLu,
    start: GridFunction,
    deflate: Option<&GridFunction>,
) -> Result<(f64, GridFunction)> {
    let grid = *start.grid();
    let project = |v: &mut GridFunction| {
        if let Some(p) = deflate {
            // twice is enough against cancellation
            for _ in 0..2 {
                let c = v.inner(p);
                v.axpy(-c, p);
            }
        }
    };
    let mut v = start;
    project(&mut v);
    let n = v.norm_l2();
    v = v.scaled(1.0 / n);
    let mut converged_at = None;
    let mut last_residual = f64::INFINITY;
    for it in 0..MAX_EIGEN_ITERATIONS {
        let mut w = GridFunction::new(grid, lu.solve(v.values()))?;
        project(&mut w);
        let n = w.norm_l2();
        v = w.scaled(1.0 / n);
        let (lambda, residual) = rayleigh_residual(&v);
        last_residual = residual;
        match converged_at {
            None if residual < EIGEN_TOLERANCE => converged_at = Some(it),
            // a few extra sweeps polish the vector below the tolerance
            Some(c) if it >= c + 3 => return Ok((lambda, v)),
            _ => {}
        }
    }
    if converged_at.is_some() {
        let (lambda, _) = rayleigh_residual(&v);
        return Ok((lambda, v));
    }
    Err(Error::ConvergenceFailure { iterations: MAX_EIGEN_ITERATIONS, residual: last_residual })
}

/// Inverse power iteration at shift 0 for `(λ₁, φ₁)`, then deflation against
/// `φ₁` for `(λ₂, φ₂)`.
pub fn leading_eigenpairs(grid: &DomainGrid) -> Result<DomainSpectrum> {
    let solver = Arc::new(ShiftedSolver::new(*grid));
    let lu = solver.factorization(0.0)?;

    let (lambda1, mut phi1) = inverse_iteration(&lu, GridFunction::constant(*grid, 1.0), None)?;
    if phi1.values().iter().sum::<f64>() < 0.0 {
        phi1 = -&phi1;
    }
    if phi1.min() <= 0.0 {
        return Err(Error::ConvergenceFailure { iterations: MAX_EIGEN_ITERATIONS, residual: phi1.min().abs() });
    }

    let [lx, ly] = [grid.extents()[0], *grid.extents().get(1).unwrap_or(&0.0)];
    let start = GridFunction::from_fn(*grid, |x, y| (x - 0.5 * lx) + 0.1 * (y - 0.5 * ly));
    let (lambda2, mut phi2) = inverse_iteration(&lu, start, Some(&phi1))?;
    let c = phi2.inner(&phi1);
    phi2.axpy(-c, &phi1);
    phi2 = phi2.scaled(1.0 / phi2.norm_l2());
    let cutoff = 1e-3 * phi2.norm_max();
    if let Some(&first) = phi2.values().iter().find(|v| v.abs() > cutoff) {
        if first < 0.0 {
            phi2 = -&phi2;
        }
    }

    Ok(DomainSpectrum { lambda1, lambda2, phi1, phi2, solver })
}

/// Solves `(−Δ_h − σI) z = h`, rejecting shifts near the discrete spectrum.
pub fn solve_shifted(sigma: f64, h: &GridFunction, spectrum: &DomainSpectrum) -> Result<GridFunction> {
    spectrum.solver.solve(sigma, h)
}

/// For each boundary node: the two interior node indices along the inward
/// normal and the spacing along that normal.
fn boundary_stencils(grid: &DomainGrid) -> Vec<(usize, usize, f64)> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let hx = grid.spacing()[0];
    if grid.dimension() == 1 {
        return vec![(0, 1, hx), (nx - 1, nx - 2, hx)];
    }
    let hy = grid.spacing()[1];
    let mut out = Vec::with_capacity(2 * (nx + ny));
    for iy in 0..ny {
        out.push((grid.index(0, iy), grid.index(1, iy), hx));
    }
    for iy in 0..ny {
        out.push((grid.index(nx - 1, iy), grid.index(nx - 2, iy), hx));
    }
    for ix in 0..nx {
        out.push((grid.index(ix, 0), grid.index(ix, 1), hy));
    }
    for ix in 0..nx {
        out.push((grid.index(ix, ny - 1), grid.index(ix, ny - 2), hy));
    }
    out
}

/// Outward normal derivative at every boundary node (faces in the order
/// left, right, bottom, top), by the one-sided second-order difference
/// `∂u/∂ν ≈ −(4u₁ − u₂)/(2h)` with `u₀ = 0`.
pub fn normal_derivatives(g: &GridFunction) -> Vec<f64> {
    let u = g.values();
    boundary_stencils(g.grid()).into_iter().map(|(a, b, h)| -(4.0 * u[a] - u[b]) / (2.0 * h)).collect()
}

/// Largest `|∂g/∂ν|` over the boundary; the scale of the normal-derivative dead-band.
pub fn normal_derivative_scale(g: &GridFunction) -> f64 {
    normal_derivatives(g).into_iter().fold(0.0, |m, d| m.max(d.abs()))
}

/// Sign of the outward normal derivative at each boundary node.
pub fn normal_derivative_signs(g: &GridFunction) -> Vec<Sign> {
    let band = DEADBAND * normal_derivative_scale(g);
    normal_derivatives(g).into_iter().map(|d| Sign::of(d, band)).collect()
}

/// Uniform sign of `g` over interior nodes.
pub fn interior_sign(g: &GridFunction) -> Sign {
    interior_sign_relative_to(g, g.norm_max())
}

/// Uniform sign of the outward normal derivative over the boundary.
pub fn boundary_sign(g: &GridFunction) -> Sign {
    boundary_sign_relative_to(g, normal_derivative_scale(g))
}

/// [`interior_sign`] with the dead-band scaled by `reference` instead of
/// `‖g‖_max`; used for components of a vector solution.
pub fn interior_sign_relative_to(g: &GridFunction, reference: f64) -> Sign {
    Sign::uniform(g.values().iter().copied(), DEADBAND * reference)
}

/// [`boundary_sign`] with the dead-band scaled by `reference`, a normal-derivative magnitude.
pub fn boundary_sign_relative_to(g: &GridFunction, reference: f64) -> Sign {
    Sign::uniform(normal_derivatives(g), DEADBAND * reference)
}
