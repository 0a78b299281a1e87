//! Characteristic polynomials and their roots for small matrices.
//!
//! Coefficients are stored lowest degree first: `c[0] + c[1]ξ + … + c[n]ξⁿ`.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Coefficients of `det(ξI − A)` by the Faddeev–LeVerrier recursion.
pub fn characteristic_polynomial(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        m = a * &m;
        for i in 0..n {
            m[(i, i)] += c[n - k + 1];
        }
        c[n - k] = -(a * &m).trace() / k as f64;
    }
    c
}

pub fn eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

pub fn eval_complex(c: &[f64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

pub fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, &a)| k as f64 * a).collect()
}

/// All complex roots of a monic-or-not polynomial by the Aberth–Ehrlich iteration.
pub fn roots(c: &[f64]) -> Vec<Complex64> {
    let deg = c.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = c[deg];
    let monic: Vec<f64> = c.iter().map(|v| v / lead).collect();
    if deg == 1 {
        return vec![Complex64::new(-monic[0], 0.0)];
    }
    let dc = derivative(&monic);
    // Cauchy bound on root moduli
    let radius = 1.0 + monic[..deg].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / deg as f64 + 0.4;
            Complex64::from_polar(0.5 * radius, theta)
        })
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0_f64;
        for i in 0..deg {
            let p = eval_complex(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / eval_complex(&dc, z[i]);
            let repulsion: Complex64 =
                (0..deg).filter(|&j| j != i).map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j])).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                moved = moved.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-16 {
            break;
        }
    }
    z
}

/// Newton refinement of a real root of `c`.
pub fn polish_real(c: &[f64], mut x: f64) -> f64 {
    let dc = derivative(c);
    let mut best = (eval(c, x).abs(), x);
    for _ in 0..20 {
        let d = eval(&dc, x);
        if d == 0.0 {
            break;
        }
        x -= eval(c, x) / d;
        let r = eval(c, x).abs();
        if r < best.0 {
            best = (r, x);
        } else {
            break;
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_polynomial() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, -0.5, 0.0]);
        // ξ² − 2ξ + 0.5
        let c = characteristic_polynomial(&a);
        assert_eq!(c, vec![0.5, -2.0, 1.0]);
    }

    #[test]
    fn roots_of_cubic_with_double_root() {
        // (ξ − 3)(ξ − 1)² = ξ³ − 5ξ² + 7ξ − 3
        let r = roots(&[-3.0, 7.0, -5.0, 1.0]);
        let mut re: Vec<f64> = r.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] - 1.0).abs() < 1e-6 && (re[1] - 1.0).abs() < 1e-6);
        assert!((re[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn complex_roots_are_found() {
        let r = roots(&[1.0, 0.0, 1.0]);
        for z in r {
            assert!((z.norm() - 1.0).abs() < 1e-12 && z.re.abs() < 1e-12);
        }
    }
}
