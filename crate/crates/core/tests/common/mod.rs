#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use signlab::laplacian::normal_derivatives;
use signlab::{DomainGrid, GridFunction};
use std::f64::consts::PI;

/// A matrix `P₀J₀P₀⁻¹` with known lower Jordan form.
pub struct Constructed {
    pub entries: DMatrix<f64>,
    /// Eigenvalue of every Jordan block, largest first.
    pub block_eigenvalues: Vec<f64>,
    pub block_sizes: Vec<usize>,
}

impl Constructed {
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut out = vec![];
        for (&xi, &m) in self.block_eigenvalues.iter().zip(&self.block_sizes) {
            out.extend(std::iter::repeat_n(xi, m));
        }
        out
    }
}

fn random_basis(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    loop {
        let p = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let sv = p.singular_values();
        if sv.min() > 0.0 && sv.max() / sv.min() < 30.0 {
            return p;
        }
    }
}

/// Random `n×n` real-spectrum matrix with a simple top eigenvalue. Below it,
/// eigenvalues are at least 0.5 apart; with `jordan_block` the last two
/// coincide in one block of size 2.
pub fn random_coupling(rng: &mut ChaCha8Rng, n: usize, jordan_block: bool) -> Constructed {
    assert!(n >= 1 && (!jordan_block || n >= 3));
    let mut xi = rng.random_range(0.5..4.0);
    let mut block_eigenvalues = vec![xi];
    let mut block_sizes = vec![1];
    let mut left = n - 1;
    while left > 0 {
        xi -= rng.random_range(0.5..2.0);
        let m = if jordan_block && left == 2 { 2 } else { 1 };
        block_eigenvalues.push(xi);
        block_sizes.push(m);
        left -= m;
    }
    let mut j = DMatrix::zeros(n, n);
    let mut at = 0;
    for (&lam, &m) in block_eigenvalues.iter().zip(&block_sizes) {
        for k in 0..m {
            j[(at + k, at + k)] = lam;
            if k > 0 {
                j[(at + k, at + k - 1)] = 1.0;
            }
        }
        at += m;
    }
    let p = random_basis(rng, n);
    let entries = &p * j * p.clone().try_inverse().unwrap();
    Constructed { entries, block_eigenvalues, block_sizes }
}

/// `k`-th Dirichlet mode of the 1D grid, normalized in discrete L².
pub fn analytic_mode(grid: &DomainGrid, k: usize) -> GridFunction {
    let length = grid.extents()[0];
    let g = GridFunction::from_fn(*grid, |x, _| (k as f64 * PI * x / length).sin());
    let norm = g.norm_l2();
    g.scaled(1.0 / norm)
}

/// Largest `σ ∈ (λ₁, λ₂)` at which `φ₁/(λ₁−σ) + t φ₂/(λ₂−σ)` keeps the
/// antimaximum pattern, from the closed-form two-mode expansion.
pub fn two_mode_threshold(grid: &DomainGrid, t: f64) -> f64 {
    let (l1, l2) = (grid.discrete_eigenvalue(1, 1), grid.discrete_eigenvalue(2, 1));
    let (p1, p2) = (analytic_mode(grid, 1), analytic_mode(grid, 2));
    let mut worst: f64 = 0.0;
    for (a, b) in p1.values().iter().zip(p2.values()) {
        worst = worst.max(b / a);
    }
    for (a, b) in normal_derivatives(&p1).iter().zip(normal_derivatives(&p2)) {
        worst = worst.max(b / a);
    }
    let tm = t * worst;
    (tm * l1 + l2) / (tm + 1.0)
}

pub fn max_rel_diff(a: &[GridFunction], b: &[GridFunction]) -> f64 {
    let scale = a.iter().map(GridFunction::norm_max).fold(0.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y).norm_max()).fold(0.0, f64::max) / scale
}
