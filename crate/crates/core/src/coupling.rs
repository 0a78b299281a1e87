//! The coupling matrix `A`: real spectrum, the principal eigenvector `X₁`
//! and a Jordan decomposition `A = P J P⁻¹` with lower-triangular blocks.
//!
//! Within a Jordan block of eigenvalue `ξ` occupying columns `c..c+k` of `P`,
//! `(A − ξI) p_j = p_{j+1}` and `(A − ξI) p_{c+k−1} = 0`, so `J` carries ones
//! on its first subdiagonal. The first block is always the `1×1` block of `ξ₁`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, HypothesisViolation, Result};
use crate::poly;

/// Default relative tolerance for eigenvalue clustering and zero tests.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Matrices up to this size use characteristic-polynomial roots.
const POLYNOMIAL_ROUTE_MAX_N: usize = 4;

/// Relative singular-value threshold for nullity decisions inside a cluster.
const RANK_TOL: f64 = 1e-6;

/// Flags of the structural hypothesis on `A`. `verdict` is their conjunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HypothesisReport {
    pub real_spectrum: bool,
    pub xi1_positive: bool,
    pub xi1_alg_simple: bool,
    pub xi1_geom_simple: bool,
    pub x1_nonzero_components: bool,
    pub verdict: bool,
}

impl HypothesisReport {
    fn new(xi1_positive: bool, x1_nonzero_components: bool) -> Self {
        HypothesisReport {
            real_spectrum: true,
            xi1_positive,
            xi1_alg_simple: true,
            xi1_geom_simple: true,
            x1_nonzero_components,
            verdict: xi1_positive && x1_nonzero_components,
        }
    }

    /// Non-fatal violations, in a fixed order.
    pub fn violations(&self, cm: &CouplingMatrix) -> Vec<HypothesisViolation> {
        let mut v = Vec::new();
        if !self.xi1_positive {
            v.push(HypothesisViolation::Xi1NotPositive { xi1: cm.xi1() });
        }
        if !self.x1_nonzero_components {
            let index = cm.x1().iter().position(|c| c.abs() <= cm.tol()).unwrap_or(0);
            v.push(HypothesisViolation::X1ZeroComponent { index });
        }
        v
    }
}

#[derive(Debug, Clone)]
pub struct CouplingMatrix {
    entries: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    p: DMatrix<f64>,
    p_inv: DMatrix<f64>,
    jordan: DMatrix<f64>,
    block_sizes: Vec<usize>,
    x1_scale: f64,
    report: HypothesisReport,
    tol: f64,
}

#[derive(Debug, Clone, Copy)]
struct Cluster {
    sum: Complex64,
    count: usize,
}

impl Cluster {
    fn mean(&self) -> Complex64 {
        self.sum / self.count as f64
    }
}

/// Merge radius for a cluster of `m` roots. A defective eigenvalue of
/// multiplicity `m` splits by about `ε^{1/m}` in floating point.
fn merge_radius(m: usize, tol: f64, scale: f64) -> f64 {
    scale * tol.max(10.0 * f64::EPSILON.powf(1.0 / m as f64))
}

fn cluster_roots(raw: &[Complex64], tol: f64, scale: f64) -> Vec<Cluster> {
    let mut clusters: Vec<Cluster> = raw.iter().map(|&z| Cluster { sum: z, count: 1 }).collect();
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let d = (clusters[i].mean() - clusters[j].mean()).norm();
                let m = clusters[i].count + clusters[j].count;
                if d <= merge_radius(m, tol, scale) && best.is_none_or(|(_, _, bd)| d < bd) {
                    best = Some((i, j, d));
                }
            }
        }
        match best {
            Some((i, j, _)) => {
                let b = clusters.remove(j);
                clusters[i].sum += b.sum;
                clusters[i].count += b.count;
            }
            None => return clusters,
        }
    }
}

fn raw_eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    if n <= POLYNOMIAL_ROUTE_MAX_N {
        return Ok(poly::roots(&poly::characteristic_polynomial(a)));
    }
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 100_000)
        .ok_or(Error::ConvergenceFailure { iterations: 100_000, residual: f64::NAN })?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Right singular vectors of `m`, ordered by increasing singular value.
fn smallest_singular(m: &DMatrix<f64>) -> (Vec<f64>, Vec<DVector<f64>>) {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let values = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let vectors = idx.iter().map(|&i| v_t.row(i).transpose()).collect();
    (values, vectors)
}

fn orthonormal_append(basis: &mut Vec<DVector<f64>>, v: &DVector<f64>) -> f64 {
    let mut r = v.clone();
    for _ in 0..2 {
        for b in basis.iter() {
            let c = b.dot(&r);
            r -= b * c;
        }
    }
    let norm = r.norm();
    if norm > 0.0 {
        basis.push(r / norm);
    }
    norm
}

/// Jordan chains of one eigenvalue cluster. Returns top vectors (in full
/// coordinates, unit norm) with their chain lengths, longest first.
fn jordan_chains(a: &DMatrix<f64>, xi: f64, m: usize, scale: f64) -> Result<Vec<(usize, DVector<f64>)>> {
    let n = a.nrows();
    let ill = |reason: String| Error::IllConditionedCluster { eigenvalue: xi, reason };
    let b = a - DMatrix::<f64>::identity(n, n) * xi;

    // orthonormal basis G of the generalized eigenspace ker (A − ξI)^m
    let mut bm = DMatrix::<f64>::identity(n, n);
    for _ in 0..m {
        bm = &b * bm;
    }
    let (_, vs) = smallest_singular(&bm);
    let g = DMatrix::from_columns(&vs[..m]);
    let c = g.transpose() * &b * &g;
    let leak = (&b * &g - &g * &c).norm();
    if leak > 1e-6 * scale.max(1.0) {
        return Err(ill(format!("generalized eigenspace is not invariant (leak {leak:e})")));
    }

    // nullities d_k of C^k and kernel bases
    let c_scale = scale.max(1.0);
    let mut d = vec![0usize; m + 2];
    let mut kernels: Vec<Vec<DVector<f64>>> = vec![Vec::new(); m + 1];
    let mut ck = DMatrix::<f64>::identity(m, m);
    for k in 1..=m {
        ck = &c * ck;
        let (sv, vecs) = smallest_singular(&ck);
        let thr = RANK_TOL * c_scale.powi(k as i32);
        let nullity = if k == m { m } else { sv.iter().filter(|&&s| s <= thr).count().max(d[k - 1]) };
        d[k] = nullity;
        kernels[k] = vecs[..nullity].to_vec();
    }
    d[m + 1] = d[m];
    if d[1] == 0 {
        return Err(ill("no eigenvector found".into()));
    }

    let mut chains: Vec<(usize, DVector<f64>)> = Vec::new();
    for k in (1..=m).rev() {
        let fresh = (d[k] - d[k - 1]) as isize - (d[k + 1] - d[k]) as isize;
        if fresh < 0 {
            return Err(ill(format!("inconsistent nullity sequence {:?}", &d[1..=m])));
        }
        if fresh == 0 {
            continue;
        }
        let mut span: Vec<DVector<f64>> = Vec::new();
        for v in &kernels[k - 1] {
            orthonormal_append(&mut span, v);
        }
        for (len, top) in &chains {
            let mut w = top.clone();
            for _ in 0..(len - k) {
                w = &c * w;
            }
            orthonormal_append(&mut span, &w);
        }
        for _ in 0..fresh {
            let mut best: Option<(f64, DVector<f64>)> = None;
            for cand in &kernels[k] {
                let mut trial = span.clone();
                let r = orthonormal_append(&mut trial, cand);
                if best.as_ref().is_none_or(|(br, _)| r > *br) {
                    best = Some((r, trial.pop().unwrap_or_else(|| cand.clone())));
                }
            }
            let (r, v) = best.ok_or_else(|| ill("empty kernel".into()))?;
            if r < 1e-6 {
                return Err(ill("could not complete a Jordan chain".into()));
            }
            orthonormal_append(&mut span, &v);
            chains.push((k, v));
        }
    }
    if chains.iter().map(|(l, _)| l).sum::<usize>() != m {
        return Err(ill("chain lengths do not add up to the multiplicity".into()));
    }
    Ok(chains
        .into_iter()
        .map(|(len, top)| {
            let full = &g * top;
            // unit norm, first largest-magnitude component positive
            let norm = full.norm() * full[full.iamax()].signum();
            (len, full / norm)
        })
        .collect())
}

impl CouplingMatrix {
    /// Validates the structural hypothesis on `entries` and decomposes it.
    ///
    /// Complex spectra and a multiple top eigenvalue are fatal. A non-positive
    /// `ξ₁` or a vanishing component of `X₁` is only flagged in [`HypothesisReport`].
    pub fn analyze(entries: &DMatrix<f64>, tol: f64) -> Result<CouplingMatrix> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n {
            return Err(Error::InvalidInput(format!(
                "coupling matrix must be square and non-empty, got {}×{}",
                n,
                entries.ncols()
            )));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("coupling matrix has non-finite entries".into()));
        }
        let a = entries.clone();
        let amax = a.amax();
        let scale = if amax > 0.0 { amax } else { 1.0 };

        let raw = raw_eigenvalues(&a)?;
        let clusters = cluster_roots(&raw, tol, scale);
        // an m-fold root is only located to ~ε^{1/m}, so realness is judged on that scale
        for c in &clusters {
            let im = c.mean().im.abs();
            if im > merge_radius(c.count, tol, scale) {
                return Err(HypothesisViolation::ComplexSpectrum { imaginary_part: im }.into());
            }
        }

        let charpoly = (n <= POLYNOMIAL_ROUTE_MAX_N).then(|| poly::characteristic_polynomial(&a));
        let mut spectrum: Vec<(f64, usize)> = clusters
            .iter()
            .map(|cl| {
                let x = cl.mean().re;
                let polished = match &charpoly {
                    Some(cp) => {
                        // a root of multiplicity m is a simple root of p^{(m−1)}
                        let mut dp = cp.clone();
                        for _ in 1..cl.count {
                            dp = poly::derivative(&dp);
                        }
                        let y = poly::polish_real(&dp, x);
                        if (y - x).abs() <= merge_radius(cl.count, tol, scale) {
                            y
                        } else {
                            x
                        }
                    }
                    None => x,
                };
                (polished, cl.count)
            })
            .collect();
        spectrum.sort_by(|a, b| b.0.total_cmp(&a.0));

        let (xi1, m1) = spectrum[0];
        if m1 > 1 {
            return Err(HypothesisViolation::Xi1NotSimple { multiplicity: m1 }.into());
        }

        let mut columns: Vec<DVector<f64>> = Vec::with_capacity(n);
        let mut diag: Vec<f64> = Vec::with_capacity(n);
        let mut block_sizes = Vec::new();

        let b1 = &a - DMatrix::<f64>::identity(n, n) * xi1;
        let (sv, vs) = smallest_singular(&b1);
        if n > 1 && sv[1] <= RANK_TOL * scale {
            return Err(HypothesisViolation::Xi1NotSimple { multiplicity: 2 }.into());
        }
        let mut x1 = vs[0].clone();
        let lead = x1.iamax();
        let x1_scale = 1.0 / x1[lead];
        x1 *= x1_scale;
        columns.push(x1);
        diag.push(xi1);
        block_sizes.push(1);

        for &(xi, m) in &spectrum[1..] {
            for (len, top) in jordan_chains(&a, xi, m, scale)? {
                let bxi = &a - DMatrix::<f64>::identity(n, n) * xi;
                let mut v = top;
                for _ in 0..len {
                    let next = &bxi * &v;
                    columns.push(v);
                    diag.push(xi);
                    v = next;
                }
                block_sizes.push(len);
            }
        }

        let p = DMatrix::from_columns(&columns);
        let mut jordan = DMatrix::<f64>::from_diagonal(&DVector::from_vec(diag.clone()));
        let mut start = 0;
        for &k in &block_sizes {
            for j in start + 1..start + k {
                jordan[(j, j - 1)] = 1.0;
            }
            start += k;
        }
        let p_inv = p
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::IllConditionedCluster { eigenvalue: xi1, reason: "P is singular".into() })?;

        let x1_nonzero = p.column(0).iter().all(|c| c.abs() > tol);
        let report = HypothesisReport::new(xi1 > 0.0, x1_nonzero);
        Ok(CouplingMatrix { entries: a, eigenvalues: diag, p, p_inv, jordan, block_sizes, x1_scale, report, tol })
    }

    /// Row-major convenience constructor.
    pub fn from_rows(rows: &[Vec<f64>], tol: f64) -> Result<CouplingMatrix> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("coupling matrix rows must all have length n".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::analyze(&DMatrix::from_row_slice(n, n, &flat), tol)
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// `ξ₁ > ξ₂ ≥ … ≥ ξ_n`, repeated by multiplicity; equals the diagonal of `J`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn xi1(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Largest eigenvalue strictly below `ξ₁`, if any.
    pub fn xi2(&self) -> Option<f64> {
        self.eigenvalues.get(1).copied()
    }

    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn p_inv(&self) -> &DMatrix<f64> {
        &self.p_inv
    }

    pub fn jordan(&self) -> &DMatrix<f64> {
        &self.jordan
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    /// Whether column `j` of `P` opens a Jordan block.
    pub fn starts_block(&self, j: usize) -> bool {
        let mut start = 0;
        for &k in &self.block_sizes {
            if start == j {
                return true;
            }
            start += k;
        }
        false
    }

    /// `X₁`, column 1 of `P`, normalized so its first largest-magnitude component is `+1`.
    pub fn x1(&self) -> Vec<f64> {
        self.p.column(0).iter().copied().collect()
    }

    /// Scalar applied to the raw unit eigenvector to obtain [`Self::x1`].
    pub fn x1_scale(&self) -> f64 {
        self.x1_scale
    }

    pub fn report(&self) -> &HypothesisReport {
        &self.report
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `‖A − PJP⁻¹‖_max / ‖A‖_max`.
    pub fn reconstruction_error(&self) -> f64 {
        let r = &self.p * &self.jordan * &self.p_inv;
        let scale = self.entries.amax();
        (&self.entries - r).amax() / if scale > 0.0 { scale } else { 1.0 }
    }

    /// `μ₁₁ = λ₁ − ξ₁`, the lowest principal eigenvalue of the unforced system.
    pub fn principal_system_eigenvalue(&self, lambda1: f64) -> f64 {
        lambda1 - self.xi1()
    }

    /// Candidate eigenvalues `λ_j − ξ_k` of the unforced system for the given
    /// Laplacian eigenvalues (distinct `ξ_k` only).
    pub fn system_eigenvalue_candidates(&self, lambdas: &[f64]) -> Vec<f64> {
        let mut xs = self.eigenvalues.clone();
        xs.dedup();
        lambdas.iter().flat_map(|l| xs.iter().map(move |x| l - x)).collect()
    }

    /// The same decomposition with `X₁` negated and row 1 of `P⁻¹` compensated.
    pub fn with_x1_negated(&self) -> CouplingMatrix {
        let mut out = self.clone();
        out.p.column_mut(0).neg_mut();
        out.p_inv.row_mut(0).neg_mut();
        out.x1_scale = -out.x1_scale;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> DMatrix<f64> {
        let n = rows.len();
        DMatrix::from_row_slice(n, n, &rows.concat())
    }

    #[test]
    fn two_by_two_annex_matrix() {
        let cm = CouplingMatrix::analyze(&m(&[&[2.0, 1.0], &[-0.5, 0.0]]), DEFAULT_TOL).unwrap();
        let s = std::f64::consts::SQRT_2 / 2.0;
        assert!((cm.eigenvalues()[0] - (1.0 + s)).abs() < 1e-14);
        assert!((cm.eigenvalues()[1] - (1.0 - s)).abs() < 1e-14);
        let x1 = cm.x1();
        assert!((x1[0] - 1.0).abs() < 1e-14);
        assert!((x1[1] - (s - 1.0)).abs() < 1e-12, "{x1:?}");
        assert!(cm.report().verdict);
        assert!(cm.reconstruction_error() < 1e-12);
    }

    #[test]
    fn lower_jordan_input_is_its_own_form() {
        let a = m(&[&[3.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 1.0, 1.0]]);
        let cm = CouplingMatrix::analyze(&a, DEFAULT_TOL).unwrap();
        assert_eq!(cm.block_sizes(), &[1, 2]);
        assert_eq!(cm.eigenvalues(), &[3.0, 1.0, 1.0]);
        assert!((cm.jordan() - &a).amax() < 1e-12);
        assert!((cm.p() - DMatrix::<f64>::identity(3, 3)).amax() < 1e-12, "{}", cm.p());
        assert!(cm.reconstruction_error() < 1e-12);
        // X₁ = e₁ has zero components: flagged, not fatal
        assert!(!cm.report().x1_nonzero_components);
        assert!(!cm.report().verdict);
        assert!(cm.starts_block(0) && cm.starts_block(1) && !cm.starts_block(2));
    }

    #[test]
    fn rotation_is_rejected() {
        let err = CouplingMatrix::analyze(&m(&[&[0.0, 1.0], &[-1.0, 0.0]]), DEFAULT_TOL).unwrap_err();
        assert_eq!(err.code(), "complex_spectrum");
    }

    #[test]
    fn identity_is_rejected() {
        let err = CouplingMatrix::analyze(&m(&[&[1.0, 0.0], &[0.0, 1.0]]), DEFAULT_TOL).unwrap_err();
        assert_eq!(err.code(), "xi1_not_simple");
    }

    #[test]
    fn nonpositive_xi1_is_flagged() {
        let cm = CouplingMatrix::analyze(&m(&[&[-1.0, 0.5], &[0.5, -2.0]]), DEFAULT_TOL).unwrap();
        assert!(!cm.report().xi1_positive);
        assert!(!cm.report().verdict);
        assert_eq!(cm.report().violations(&cm)[0].code(), "xi1_not_positive");
    }

    #[test]
    fn principal_eigenvalue_examples() {
        let pi2 = std::f64::consts::PI.powi(2);
        let cm = CouplingMatrix::analyze(&m(&[&[2.0, 1.0], &[-0.5, 0.0]]), DEFAULT_TOL).unwrap();
        assert!((cm.principal_system_eigenvalue(pi2) - 8.16249).abs() < 1e-5);
        let diag = CouplingMatrix::analyze(&m(&[&[3.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 1.0, 1.0]]), 1e-8).unwrap();
        assert!((diag.principal_system_eigenvalue(pi2) - (pi2 - 3.0)).abs() < 1e-12);
        let zero = CouplingMatrix::analyze(&m(&[&[0.0]]), DEFAULT_TOL).unwrap();
        assert_eq!(zero.principal_system_eigenvalue(7.5), 7.5);
    }

    #[test]
    fn conjugated_jordan_block_is_recovered() {
        // A = P₀ J₀ P₀⁻¹ with J₀ = diag(2) ⊕ J₂(−1) (lower convention)
        let j0 = m(&[&[2.0, 0.0, 0.0], &[0.0, -1.0, 0.0], &[0.0, 1.0, -1.0]]);
        let p0 = m(&[&[1.0, 0.3, -0.2], &[0.5, 1.0, 0.1], &[-0.4, 0.2, 1.0]]);
        let a = &p0 * j0 * p0.clone().try_inverse().unwrap();
        let cm = CouplingMatrix::analyze(&a, DEFAULT_TOL).unwrap();
        assert_eq!(cm.block_sizes(), &[1, 2]);
        assert!((cm.xi1() - 2.0).abs() < 1e-12);
        assert!((cm.eigenvalues()[1] + 1.0).abs() < 1e-8);
        assert!(cm.reconstruction_error() < 1e-10, "{}", cm.reconstruction_error());
        assert!((cm.p() * cm.p_inv() - DMatrix::<f64>::identity(3, 3)).amax() < 1e-10);
    }

    #[test]
    fn large_matrix_uses_similarity_route() {
        let d = [5.0, 3.0, 2.0, 1.0, -1.0, -2.5];
        let n = d.len();
        let j0 = DMatrix::from_diagonal(&DVector::from_row_slice(&d));
        let p0 = DMatrix::from_fn(n, n, |i, j| if i == j { 2.0 } else { ((i * 7 + j * 3) % 5) as f64 * 0.1 - 0.2 });
        let a = &p0 * j0 * p0.clone().try_inverse().unwrap();
        let cm = CouplingMatrix::analyze(&a, DEFAULT_TOL).unwrap();
        for (got, want) in cm.eigenvalues().iter().zip(d) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
        assert!(cm.reconstruction_error() < 1e-10);
    }

    #[test]
    fn negation_compensates() {
        let cm = CouplingMatrix::analyze(&m(&[&[2.0, 1.0], &[-0.5, 0.0]]), DEFAULT_TOL).unwrap();
        let neg = cm.with_x1_negated();
        assert!(neg.reconstruction_error() < 1e-12);
        assert_eq!(neg.x1()[0], -1.0);
    }
}
