//! Linear stability of relative equilibria and Hessian signatures on Casimir
//! level sets.
//!
//! The characteristic polynomial of the reduced Jacobian always has the form
//! `x(−x⁴ + a x² + b)`; the equilibrium is linearly stable iff `a < 0`,
//! `a² + 4b > 0` and `b < 0`.

use nalgebra::{DMatrix, Matrix2, Matrix2x3, Matrix3x2, SMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equilibria::EquilibriumRecord;
use crate::error::{Error, Result};
use crate::poly;
use crate::potential::Potential;
use crate::reduced::{grad_casimir, grad_hamiltonian, hessian_casimir, hessian_hamiltonian, jacobian, Mat5};
use crate::tolerance::{Tolerances, RECORD_RESIDUAL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    LinearlyStable,
    LinearlyUnstable,
    Degenerate,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::LinearlyStable => "LinearlyStable",
            Classification::LinearlyUnstable => "LinearlyUnstable",
            Classification::Degenerate => "Degenerate",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_zero: usize,
}

impl Signature {
    pub fn is_definite(&self) -> bool {
        self.n_zero == 0 && (self.n_plus == 0 || self.n_minus == 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearizationReport {
    pub jacobian: Mat5,
    /// `(a, b)` of the factor `−x⁴ + a x² + b`.
    pub char_coeffs: (f64, f64),
    /// `[1, c1, …, c5]` of `det(xI − J)`.
    pub char_poly: [f64; 6],
    pub eigenvalues: Vec<Complex64>,
    pub classification: Classification,
    /// `None` when the restricted Hessian is singular (cusp points).
    pub hessian_signature: Option<Signature>,
}

/// Stability from `(a, b)` with tolerance `tol` on `a`, `a² + 4b` and `b`.
pub fn classify(a: f64, b: f64, tol: f64) -> Classification {
    let disc = a * a + 4.0 * b;
    if a.abs() <= tol || b.abs() <= tol || disc.abs() <= tol {
        Classification::Degenerate
    } else if a < 0.0 && disc > 0.0 && b < 0.0 {
        Classification::LinearlyStable
    } else {
        Classification::LinearlyUnstable
    }
}

/// [`classify`] after rescaling time so that the larger of `|a|`, `√|b|` is at
/// most one. The sign conditions are unchanged; the tolerance becomes relative,
/// which matters near `q → 0, π` where `a` reaches 1e12.
pub fn classify_scaled(a: f64, b: f64, tol: f64) -> Classification {
    let s = (a * a).max(b.abs()).max(1.0);
    classify(a / s.sqrt(), b / s, tol)
}

/// `det(xI − J)` coefficients, `(a, b)` after deflating the zero root, and
/// the spectrum.
pub fn characteristic_data(jac: &Mat5) -> ([f64; 6], (f64, f64), Vec<Complex64>) {
    let mut cp = [0.0; 6];
    if let Some(k) = bipartite_block(jac) {
        // det(xI − J) = x det(x²I − K)
        cp = [1.0, 0.0, -k.trace(), 0.0, k.determinant(), 0.0];
    } else {
        let dense = DMatrix::from_iterator(5, 5, jac.iter().copied());
        cp.copy_from_slice(&poly::characteristic_polynomial(&dense));
        if cp[5].abs() < 1e-12 {
            cp[5] = 0.0;
        }
    }
    // −det(xI − J) = −x⁵ + a x³ + b x once the odd terms vanish.
    let (a, b) = (-cp[2], -cp[4]);
    let eig = jac.complex_eigenvalues().iter().copied().collect();
    (cp, (a, b), eig)
}

/// At equilibria (`m1 = p = 0`) the coordinates split into `{m1, p}` and
/// `{m2, m3, q}` with `J` coupling only across the split. Then `J²` is block
/// diagonal and its nonzero spectrum is that of the 2×2 block `K = A·C`.
fn bipartite_block(jac: &Mat5) -> Option<Matrix2<f64>> {
    const OUTER: [usize; 2] = [0, 4];
    const INNER: [usize; 3] = [1, 2, 3];
    let split = OUTER.iter().all(|&i| OUTER.iter().all(|&j| jac[(i, j)] == 0.0))
        && INNER.iter().all(|&i| INNER.iter().all(|&j| jac[(i, j)] == 0.0));
    if !split {
        return None;
    }
    let a = Matrix2x3::from_fn(|r, c| jac[(OUTER[r], INNER[c])]);
    let c = Matrix3x2::from_fn(|r, col| jac[(INNER[r], OUTER[col])]);
    Some(a * c)
}

/// Linearizes the reduced flow at an equilibrium.
pub fn linearize(record: &EquilibriumRecord, v: &dyn Potential) -> Result<LinearizationReport> {
    record.check_residual(RECORD_RESIDUAL)?;
    let jac = jacobian(&record.state, &record.params, v);
    let (char_poly, (a, b), eigenvalues) = characteristic_data(&jac);
    let classification = classify_scaled(a, b, Tolerances::default().classify);
    let hessian_signature = hessian_signature(record, v).ok();
    Ok(LinearizationReport {
        jacobian: jac,
        char_coeffs: (a, b),
        char_poly,
        eigenvalues,
        classification,
        hessian_signature,
    })
}

/// Boundary field strength of Type I stability,
/// `√(cos³q (2 + cos q) / (2 sin³q sin²(q/2)))`, defined for `q ∈ (0, π/2]`.
/// Below the curve the equilibria are linearly unstable, above it stable.
pub fn type1_boundary(q: f64) -> Result<f64> {
    let radicand = q.cos().powi(3) * (2.0 + q.cos()) / (2.0 * q.sin().powi(3) * (q / 2.0).sin().powi(2));
    if !(q > 0.0 && q < std::f64::consts::PI) || !radicand.is_finite() || radicand < -1e-15 {
        return Err(Error::OutsideDomain { q });
    }
    Ok(radicand.max(0.0).sqrt())
}

/// Stability of the degenerate Type II equilibrium on the threshold curve:
/// decided by the sign of `1 + 2 cos q0`.
pub fn threshold_stability(q0: f64) -> Classification {
    let s = 1.0 + 2.0 * q0.cos();
    if s.abs() <= Tolerances::default().classify {
        Classification::Degenerate
    } else if s > 0.0 {
        Classification::LinearlyStable
    } else {
        Classification::LinearlyUnstable
    }
}

/// `∇H = λ∇C` at an equilibrium (least squares).
pub fn casimir_multiplier(record: &EquilibriumRecord, v: &dyn Potential) -> f64 {
    let gh = grad_hamiltonian(&record.state, &record.params, v);
    let gc = grad_casimir(&record.state, &record.params);
    gh.dot(&gc) / gc.norm_squared()
}

/// The 4×4 Hessian of `H − λC` restricted to the tangent space `∇C^⊥` of the
/// Casimir level set, in an orthonormal basis of that space.
pub fn restricted_hessian(record: &EquilibriumRecord, v: &dyn Potential) -> SMatrix<f64, 4, 4> {
    let gc = grad_casimir(&record.state, &record.params);
    let lambda = casimir_multiplier(record, v);
    let hess =
        hessian_hamiltonian(&record.state, &record.params, v) - hessian_casimir(&record.state, &record.params) * lambda;

    // Orthonormal complement of ∇C: eigenvectors of I − n nᵀ with eigenvalue 1.
    let n = gc / gc.norm();
    let projector = Mat5::identity() - n * n.transpose();
    let eig = SymmetricEigen::new(projector);
    let mut basis = SMatrix::<f64, 5, 4>::zeros();
    let mut idx: Vec<usize> = (0..5).collect();
    idx.sort_by(|a, b| eig.eigenvalues[*b].total_cmp(&eig.eigenvalues[*a]));
    for (col, &k) in idx.iter().take(4).enumerate() {
        basis.set_column(col, &eig.eigenvectors.column(k));
    }
    let r = basis.transpose() * hess * basis;
    (r + r.transpose()) * 0.5
}

/// Signature of [`restricted_hessian`]. Fails with `DegeneratePoint` when its
/// determinant falls below the configured tolerance.
pub fn hessian_signature(record: &EquilibriumRecord, v: &dyn Potential) -> Result<Signature> {
    let h = restricted_hessian(record, v);
    let det = h.determinant();
    if !det.is_finite() || det.abs() < Tolerances::default().hessian_det {
        return Err(Error::DegeneratePoint { det });
    }
    let eig = SymmetricEigen::new(h).eigenvalues;
    let scale = eig.amax().max(1.0);
    let zero = 1e-12 * scale;
    Ok(Signature {
        n_plus: eig.iter().filter(|e| **e > zero).count(),
        n_minus: eig.iter().filter(|e| **e < -zero).count(),
        n_zero: eig.iter().filter(|e| e.abs() <= zero).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{threshold_field, type1, type2};
    use crate::params::SystemParams;
    use crate::potential::cot_potential;
    use crate::reduced::numerical_jacobian;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn unit_cot() -> crate::potential::CotPotential {
        cot_potential(&SystemParams::identical(1.0))
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(-2.0, -0.5, 1e-10), Classification::LinearlyStable);
        assert_eq!(classify(1.0, -0.5, 1e-10), Classification::LinearlyUnstable);
        assert_eq!(classify(-2.0, 0.0, 1e-10), Classification::Degenerate);
        assert_eq!(classify(-2.0, 0.5, 1e-10), Classification::LinearlyUnstable);
        assert_eq!(classify(-1.0, -0.3, 1e-10), Classification::LinearlyUnstable);
        assert_eq!(classify_scaled(-4e12, -4e24 + 1e8, 1e-10), Classification::Degenerate);
        assert_eq!(classify_scaled(-2e6, -0.5e12, 1e-10), Classification::LinearlyStable);
    }

    #[test]
    fn threshold_factorization() {
        let v = unit_cot();
        for q0 in [0.7, 1.5, FRAC_PI_2, 2.0, 2.5] {
            let b = threshold_field(q0);
            let r = type2(q0, b).unwrap()[0];
            let rep = linearize(&r, &v).unwrap();
            let k = q0.sin().powi(-3);
            // x(x² + 2k)(x² + 2(1 + 2cos q0)k) = x⁵ + (2k + 2(1+2c)k) x³ + 4(1+2c)k² x
            let c = q0.cos();
            let want = [1.0, 0.0, 2.0 * k + 2.0 * (1.0 + 2.0 * c) * k, 0.0, 4.0 * (1.0 + 2.0 * c) * k * k, 0.0];
            for (g, w) in rep.char_poly.iter().zip(want) {
                assert!((g - w).abs() < 1e-8, "q0={q0}: {:?} vs {want:?}", rep.char_poly);
            }
        }
        assert_eq!(threshold_stability(FRAC_PI_2), Classification::LinearlyStable);
        assert_eq!(threshold_stability(2.0 * PI / 3.0), Classification::Degenerate);
        assert_eq!(threshold_stability(2.5), Classification::LinearlyUnstable);
    }

    #[test]
    fn spectrum_is_symmetric_with_one_zero() {
        let v = unit_cot();
        for (q, b) in [(1.0, 2.0), (2.0, 1.0), (2.2, 3.0)] {
            let mut recs = type1(q, b).unwrap().to_vec();
            recs.extend(type2(q, b).unwrap());
            for r in recs {
                let rep = linearize(&r, &v).unwrap();
                let zeros = rep.eigenvalues.iter().filter(|z| z.norm() < 1e-8).count();
                assert_eq!(zeros, 1);
                for z in &rep.eigenvalues {
                    assert!(rep.eigenvalues.iter().any(|w| (w + z).norm() < 1e-8));
                }
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences_at_equilibria() {
        let v = unit_cot();
        for (q, b) in [(0.8, 1.2), (2.4, 2.5), (1.9, 4.0)] {
            for r in type1(q, b).unwrap() {
                let params = SystemParams::identical(b);
                let a = jacobian(&r.state, &params, &v);
                let n = numerical_jacobian(&r.state, &params, &v, 1e-6);
                assert!((a - n).amax() < 1e-6);
            }
        }
    }

    #[test]
    fn type1_boundary_values_and_straddle() {
        assert!(type1_boundary(FRAC_PI_2 - 1e-9).unwrap() < 1e-4);
        assert!(type1_boundary(2.0).is_err());
        let q = PI / 3.0;
        let expect = ((1.0 / 8.0) * 2.5 / (2.0 * (3.0 * 3f64.sqrt() / 8.0) * 0.25)).sqrt();
        assert!((type1_boundary(q).unwrap() - expect).abs() < 1e-14);
        let v = unit_cot();
        let b = type1_boundary(1.0).unwrap();
        let below = linearize(&type1(1.0, b - 1e-3).unwrap()[0], &v).unwrap().classification;
        let above = linearize(&type1(1.0, b + 1e-3).unwrap()[0], &v).unwrap().classification;
        assert_eq!(below, Classification::LinearlyUnstable);
        assert_eq!(above, Classification::LinearlyStable);
    }

    #[test]
    fn definite_signature_implies_linear_stability() {
        let v = unit_cot();
        let mut seen_definite = false;
        for b in [2.5, 5.0] {
            for i in 1..60 {
                let q = 0.3 + 2.6 * i as f64 / 60.0;
                if (q - FRAC_PI_2).abs() < 1e-3 {
                    continue;
                }
                let mut recs = type2(q, b).unwrap();
                recs.extend(type1(q, b).unwrap());
                for r in recs {
                    let rep = linearize(&r, &v).unwrap();
                    if let Some(sig) = rep.hessian_signature {
                        assert_eq!(sig.n_zero, 0);
                        if sig.is_definite() {
                            seen_definite = true;
                            assert_eq!(rep.classification, Classification::LinearlyStable);
                        }
                    }
                }
            }
        }
        assert!(seen_definite);
    }

    #[test]
    fn restricted_hessian_is_singular_on_type1_boundary() {
        let v = unit_cot();
        let q = 1.0;
        let b = type1_boundary(q).unwrap();
        let r = type1(q, b).unwrap()[0];
        assert!(matches!(hessian_signature(&r, &v), Err(Error::DegeneratePoint { .. })));
        assert!(hessian_signature(&type1(q, b + 0.1).unwrap()[0], &v).is_ok());
    }
}
