//! Tensor grids on an interval or rectangle and functions sampled on their
//! interior nodes. Boundary values are implicitly zero.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Interior-node grid on `(0, Lx)` or `(0, Lx) × (0, Ly)`.
///
/// Nodes are numbered row-major with `x` varying fastest: `index = iy·nx + ix`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainGrid {
    dimension: usize,
    extents: [f64; 2],
    resolution: [usize; 2],
    spacing: [f64; 2],
}

impl DomainGrid {
    pub fn new(dimension: usize, extents: &[f64], resolution: &[usize]) -> Result<Self> {
        if dimension != 1 && dimension != 2 {
            return Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {dimension}")));
        }
        if extents.len() != dimension || resolution.len() != dimension {
            return Err(Error::InvalidGrid(format!(
                "expected {dimension} extents and resolutions, got {} and {}",
                extents.len(),
                resolution.len()
            )));
        }
        let mut e = [1.0; 2];
        let mut r = [1usize; 2];
        let mut s = [1.0; 2];
        for axis in 0..dimension {
            if !(extents[axis] > 0.0) || !extents[axis].is_finite() {
                return Err(Error::InvalidGrid(format!("extent {} is not positive", extents[axis])));
            }
            if resolution[axis] < 3 {
                return Err(Error::InvalidGrid(format!(
                    "resolution {} is below the minimum of 3",
                    resolution[axis]
                )));
            }
            e[axis] = extents[axis];
            r[axis] = resolution[axis];
            s[axis] = extents[axis] / (resolution[axis] + 1) as f64;
        }
        Ok(DomainGrid { dimension, extents: e, resolution: r, spacing: s })
    }

    pub fn interval(length: f64, nodes: usize) -> Result<Self> {
        Self::new(1, &[length], &[nodes])
    }

    pub fn rectangle(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Self> {
        Self::new(2, &[lx, ly], &[nx, ny])
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents[..self.dimension]
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution[..self.dimension]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.dimension]
    }

    pub fn nx(&self) -> usize {
        self.resolution[0]
    }

    /// 1 for an interval.
    pub fn ny(&self) -> usize {
        if self.dimension == 2 {
            self.resolution[1]
        } else {
            1
        }
    }

    pub fn node_count(&self) -> usize {
        self.nx() * self.ny()
    }

    /// Volume element of the discrete L² inner product.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().iter().product()
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx() + ix
    }

    /// Physical coordinates of node `index`; `y` is 0 on an interval.
    pub fn coordinates(&self, index: usize) -> [f64; 2] {
        let (ix, iy) = (index % self.nx(), index / self.nx());
        let x = (ix + 1) as f64 * self.spacing[0];
        let y = if self.dimension == 2 { (iy + 1) as f64 * self.spacing[1] } else { 0.0 };
        [x, y]
    }

    fn axis_eigenvalue(&self, axis: usize, k: usize) -> f64 {
        let h = self.spacing[axis];
        let s = (k as f64 * PI / (2.0 * (self.resolution[axis] + 1) as f64)).sin();
        4.0 / (h * h) * s * s
    }

    /// Exact eigenvalue of the discrete Dirichlet stencil for mode `(kx, ky)`,
    /// `1 ≤ k ≤ resolution` (`ky` ignored in 1D).
    pub fn discrete_eigenvalue(&self, kx: usize, ky: usize) -> f64 {
        let mut l = self.axis_eigenvalue(0, kx);
        if self.dimension == 2 {
            l += self.axis_eigenvalue(1, ky);
        }
        l
    }

    /// Discrete stencil eigenvalue closest to `sigma`.
    pub fn nearest_discrete_eigenvalue(&self, sigma: f64) -> f64 {
        // per-axis eigenvalues increase with k
        let axis_values =
            |axis: usize| -> Vec<f64> { (1..=self.resolution[axis]).map(|k| self.axis_eigenvalue(axis, k)).collect() };
        let xs = axis_values(0);
        if self.dimension == 1 {
            return xs.into_iter().min_by(|a, b| (a - sigma).abs().total_cmp(&(b - sigma).abs())).unwrap_or(f64::NAN);
        }
        let ys = axis_values(1);
        let mut best = f64::NAN;
        let mut best_d = f64::INFINITY;
        for &lx in &xs {
            // for fixed lx the best ly is the one closest to sigma - lx
            let target = sigma - lx;
            let j = ys.partition_point(|&v| v < target);
            for cand in [j.wrapping_sub(1), j] {
                if let Some(&ly) = ys.get(cand) {
                    let d = (lx + ly - sigma).abs();
                    if d < best_d {
                        best_d = d;
                        best = lx + ly;
                    }
                }
            }
        }
        best
    }

    /// Header row of the grid-function CSV format.
    pub fn csv_header(&self) -> String {
        let join_f = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("x");
        let join_u = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("x");
        format!(
            "grid:dimension={};extents={};resolution={}",
            self.dimension,
            join_f(self.extents()),
            join_u(self.resolution())
        )
    }

    pub fn from_csv_header(line: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("malformed grid header `{line}`"));
        let body = line.trim().strip_prefix("grid:").ok_or_else(bad)?;
        let (mut dim, mut ext, mut res) = (None, None, None);
        for part in body.split(';') {
            let (k, v) = part.split_once('=').ok_or_else(bad)?;
            match k {
                "dimension" => dim = Some(v.parse::<usize>().map_err(|_| bad())?),
                "extents" => {
                    ext = Some(v.split('x').map(str::parse::<f64>).collect::<Result<Vec<_>, _>>().map_err(|_| bad())?)
                }
                "resolution" => {
                    res = Some(v.split('x').map(str::parse::<usize>).collect::<Result<Vec<_>, _>>().map_err(|_| bad())?)
                }
                _ => return Err(bad()),
            }
        }
        DomainGrid::new(dim.ok_or_else(bad)?, &ext.ok_or_else(bad)?, &res.ok_or_else(bad)?)
    }
}

/// A real value per interior node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: DomainGrid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: DomainGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::InvalidInput(format!(
                "grid has {} interior nodes but {} values were given",
                grid.node_count(),
                values.len()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: DomainGrid) -> Self {
        GridFunction { grid, values: vec![0.0; grid.node_count()] }
    }

    pub fn constant(grid: DomainGrid, c: f64) -> Self {
        GridFunction { grid, values: vec![c; grid.node_count()] }
    }

    /// Samples `f(x, y)` at every interior node (`y = 0` in 1D).
    pub fn from_fn(grid: DomainGrid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let values = (0..grid.node_count())
            .map(|i| {
                let [x, y] = grid.coordinates(i);
                f(x, y)
            })
            .collect();
        GridFunction { grid, values }
    }

    pub fn grid(&self) -> &DomainGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.grid == other.grid
    }

    /// Discrete L² inner product `Σ u v · dV`.
    pub fn inner(&self, other: &GridFunction) -> f64 {
        assert!(self.same_grid(other), "inner product across different grids");
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn norm_l2(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// Quadrature surrogate of the L^q norm, `(Σ |u|^q dV)^{1/q}`.
    pub fn norm_lq(&self, q: f64) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.abs().powf(q)).sum::<f64>() * self.grid.cell_volume();
        s.powf(1.0 / q)
    }

    pub fn norm_max(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, s: f64) -> GridFunction {
        GridFunction { grid: self.grid, values: self.values.iter().map(|v| v * s).collect() }
    }

    /// `self += a · x`
    pub fn axpy(&mut self, a: f64, x: &GridFunction) {
        assert!(self.same_grid(x), "axpy across different grids");
        for (s, v) in self.values.iter_mut().zip(&x.values) {
            *s += a * v;
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Single-column CSV: grid header row, then one value per line in node order.
    pub fn to_csv(&self) -> String {
        let mut out = self.grid.csv_header();
        out.push('\n');
        for v in &self.values {
            // `{:?}` on f64 is the shortest round-trip form, with an exponent at the extremes
            let _ = writeln!(out, "{v:?}");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::InvalidInput("empty grid-function CSV".into()))?;
        let grid = DomainGrid::from_csv_header(header)?;
        let values = lines
            .map(|l| l.trim().parse::<f64>().map_err(|e| Error::InvalidInput(format!("bad value `{l}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        GridFunction::new(grid, values)
    }
}

impl Add<&GridFunction> for &GridFunction {
    type Output = GridFunction;

    fn add(self, rhs: &GridFunction) -> GridFunction {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub<&GridFunction> for &GridFunction {
    type Output = GridFunction;

    fn sub(self, rhs: &GridFunction) -> GridFunction {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Mul<&GridFunction> for f64 {
    type Output = GridFunction;

    fn mul(self, rhs: &GridFunction) -> GridFunction {
        rhs.scaled(self)
    }
}

impl Neg for &GridFunction {
    type Output = GridFunction;

    fn neg(self) -> GridFunction {
        self.scaled(-1.0)
    }
}
