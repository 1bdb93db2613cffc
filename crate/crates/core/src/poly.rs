//! Small polynomial helpers: companion-matrix roots and characteristic
//! polynomials.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Evaluates a polynomial given by ascending coefficients (Horner).
pub fn eval(ascending: &[f64], x: f64) -> f64 {
    ascending.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Derivative coefficients, ascending.
pub fn derivative(ascending: &[f64]) -> Vec<f64> {
    ascending.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect()
}

/// All complex roots of a polynomial with ascending coefficients, as the
/// eigenvalues of its companion matrix. Trailing zero leading coefficients
/// are dropped first.
pub fn roots(ascending: &[f64]) -> Vec<Complex64> {
    let mut coeffs = ascending.to_vec();
    while coeffs.last().is_some_and(|c| *c == 0.0) {
        coeffs.pop();
    }
    let n = coeffs.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = coeffs[n];
    let mut companion = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        companion[(i, n - 1)] = -coeffs[i] / lead;
    }
    companion.complex_eigenvalues().iter().copied().collect()
}

/// Coefficients `[1, c1, …, cn]` of `det(xI − M)` (descending powers) by the
/// Faddeev–LeVerrier recursion.
pub fn characteristic_polynomial(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut coeffs = vec![1.0];
    let mut aux = DMatrix::<f64>::zeros(n, n);
    let identity = DMatrix::<f64>::identity(n, n);
    for k in 1..=n {
        aux = m * &aux + &identity * coeffs[k - 1];
        let c = -(m * &aux).trace() / k as f64;
        coeffs.push(c);
    }
    coeffs
}
