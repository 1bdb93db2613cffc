//! The reduced Poisson system on `(m1, m2, m3, q, p)`.
//!
//! Brackets (all others zero, antisymmetric completion implied):
//!
//! ```text
//! {m1,m2} = −m3 − B(e1 + e2 cos q)   {m2,m3} = −m1
//! {m1,m3} =  m2 − B e2 sin q         {m2,p}  =  B e2 cos q
//! {m3,p}  =  B e2 sin q              {q,p}   =  1
//! ```
//!
//! and `ẋ = P(x)·∇H(x)`.

mod integrate;

pub(crate) use integrate::rk4_step;
pub use integrate::{integrate, IntegrateOptions, InvariantDrift, Trajectory};

use nalgebra::SMatrix;

use crate::params::SystemParams;
use crate::potential::Potential;
use crate::state::{ReducedState, Vec5};

pub type Mat5 = SMatrix<f64, 5, 5>;

pub const M1: usize = 0;
pub const M2: usize = 1;
pub const M3: usize = 2;
pub const Q: usize = 3;
pub const P: usize = 4;

/// Antisymmetric 5×5 bracket matrix `P[i][j] = {x_i, x_j}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonTensor {
    pub matrix: Mat5,
}

impl PoissonTensor {
    pub fn apply(&self, covector: &Vec5) -> Vec5 {
        self.matrix * covector
    }
}

pub fn hamiltonian(state: &ReducedState, params: &SystemParams, v: &dyn Potential) -> f64 {
    let ReducedState { m1, m2, m3, q, p } = *state;
    let (mu1, mu2) = (params.mu1, params.mu2);
    let cot = 1.0 / q.tan();
    let csc2 = 1.0 / q.sin().powi(2);
    (mu2 * ((m1 - p).powi(2) + m2 * m2) + m3 * (-2.0 * mu2 * m2 * cot + mu1 * m3 * csc2 + mu2 * m3 * cot * cot))
        / (2.0 * mu1 * mu2)
        + p * p / (2.0 * mu2)
        + v.value(q)
}

pub fn casimir(state: &ReducedState, params: &SystemParams) -> f64 {
    let (a, b, c) = body_momentum_map(state, params);
    a * a + b * b + c * c
}

/// Body-frame value of the momentum map, `(m1, m2 − B e2 sin q, m3 + B(e1 + e2 cos q))`.
pub fn body_momentum_map(state: &ReducedState, params: &SystemParams) -> (f64, f64, f64) {
    let (s, c) = state.q.sin_cos();
    let b = params.b;
    (state.m1, state.m2 - b * params.e2 * s, state.m3 + b * (params.e1 + params.e2 * c))
}

pub fn poisson_tensor(state: &ReducedState, params: &SystemParams) -> PoissonTensor {
    let (s, c) = state.q.sin_cos();
    let (b, e1, e2) = (params.b, params.e1, params.e2);
    let mut m = Mat5::zeros();
    let mut set = |i: usize, j: usize, v: f64| {
        m[(i, j)] = v;
        m[(j, i)] = -v;
    };
    set(M1, M2, -state.m3 - b * (e1 + e2 * c));
    set(M1, M3, state.m2 - b * e2 * s);
    set(M2, M3, -state.m1);
    set(M2, P, b * e2 * c);
    set(M3, P, b * e2 * s);
    set(Q, P, 1.0);
    PoissonTensor { matrix: m }
}

/// Right-hand side of the reduced equations of motion.
pub fn vector_field(state: &ReducedState, params: &SystemParams, v: &dyn Potential) -> Vec5 {
    let ReducedState { m1, m2, m3, q, p } = *state;
    let SystemParams { mu1, mu2, e1, e2, b } = *params;
    let (s, c) = q.sin_cos();
    let cot = c / s;
    let csc = 1.0 / s;
    let csc2 = csc * csc;
    let inv = 1.0 / (mu1 * mu2);

    let dm1 =
        -inv * (mu2 * (m2 - m3 * cot) * (b * e1 + m2 * cot + m3) + b * e2 * mu1 * m3 * csc - mu1 * m2 * m3 * csc2);
    let dm2 = inv
        * (mu2 * (m1 - p) * (b * e1 + m3) + b * e2 * mu1 * p * c + mu2 * m1 * cot * (m2 - m3 * cot)
            - mu1 * m1 * m3 * csc2);
    let dm3 = inv * (mu1 * b * e2 * p * s + mu2 * (m2 * p - m1 * m3 * cot));
    let dq = inv * (p * (mu1 + mu2) - mu2 * m1);
    let dp =
        -inv * (m3 * csc * (b * e2 * mu1 + csc * (mu2 * m2 - m3 * (mu1 + mu2) * cot)) + mu1 * mu2 * v.derivative(q));
    Vec5::new(dm1, dm2, dm3, dq, dp)
}

/// Analytic `∇H`, using `H = (m1−p)²/2μ1 + (m2 − m3 cot q)²/2μ1 + m3² csc²q/2μ2 + p²/2μ2 + V`.
pub fn grad_hamiltonian(state: &ReducedState, params: &SystemParams, v: &dyn Potential) -> Vec5 {
    let ReducedState { m1, m2, m3, q, p } = *state;
    let (mu1, mu2) = (params.mu1, params.mu2);
    let cot = 1.0 / q.tan();
    let csc2 = 1.0 / q.sin().powi(2);
    let u = m2 - m3 * cot;
    Vec5::new(
        (m1 - p) / mu1,
        u / mu1,
        -cot * u / mu1 + m3 * csc2 / mu2,
        u * m3 * csc2 / mu1 - m3 * m3 * csc2 * cot / mu2 + v.derivative(q),
        -(m1 - p) / mu1 + p / mu2,
    )
}

pub fn hessian_hamiltonian(state: &ReducedState, params: &SystemParams, v: &dyn Potential) -> Mat5 {
    let ReducedState { m2, m3, q, .. } = *state;
    let (mu1, mu2) = (params.mu1, params.mu2);
    let k = 1.0 / q.tan();
    let s2 = 1.0 / q.sin().powi(2);
    let u = m2 - m3 * k;

    let mut h = Mat5::zeros();
    let mut set = |i: usize, j: usize, val: f64| {
        h[(i, j)] = val;
        h[(j, i)] = val;
    };
    set(M1, M1, 1.0 / mu1);
    set(M1, P, -1.0 / mu1);
    set(P, P, 1.0 / mu1 + 1.0 / mu2);
    set(M2, M2, 1.0 / mu1);
    set(M2, M3, -k / mu1);
    set(M2, Q, m3 * s2 / mu1);
    set(M3, M3, k * k / mu1 + s2 / mu2);
    set(M3, Q, s2 * (u - k * m3) / mu1 - 2.0 * m3 * s2 * k / mu2);
    set(
        Q,
        Q,
        m3 * s2 * (m3 * s2 - 2.0 * u * k) / mu1 + m3 * m3 * s2 * (2.0 * k * k + s2) / mu2 + v.second_derivative(q),
    );
    h
}

pub fn grad_casimir(state: &ReducedState, params: &SystemParams) -> Vec5 {
    let (s, c) = state.q.sin_cos();
    let (b, e2) = (params.b, params.e2);
    let (a1, a2, a3) = body_momentum_map(state, params);
    Vec5::new(2.0 * a1, 2.0 * a2, 2.0 * a3, -2.0 * b * e2 * (a2 * c + a3 * s), 0.0)
}

pub fn hessian_casimir(state: &ReducedState, params: &SystemParams) -> Mat5 {
    let (s, c) = state.q.sin_cos();
    let (b, e2) = (params.b, params.e2);
    let (_, a2, a3) = body_momentum_map(state, params);
    let mut h = Mat5::zeros();
    h[(M1, M1)] = 2.0;
    h[(M2, M2)] = 2.0;
    h[(M3, M3)] = 2.0;
    h[(M2, Q)] = -2.0 * b * e2 * c;
    h[(Q, M2)] = h[(M2, Q)];
    h[(M3, Q)] = -2.0 * b * e2 * s;
    h[(Q, M3)] = h[(M3, Q)];
    h[(Q, Q)] = 2.0 * b * b * e2 * e2 + 2.0 * b * e2 * (a2 * s - a3 * c);
    h
}

/// Analytic Jacobian of [`vector_field`]:
/// `J[:,k] = P·∂_k∇H + (∂_k P)·∇H`.
pub fn jacobian(state: &ReducedState, params: &SystemParams, v: &dyn Potential) -> Mat5 {
    let tensor = poisson_tensor(state, params).matrix;
    let grad = grad_hamiltonian(state, params, v);
    let mut jac = tensor * hessian_hamiltonian(state, params, v);

    let (s, c) = state.q.sin_cos();
    let be2 = params.b * params.e2;
    let mut dp = |entries: &[(usize, usize, f64)], col: usize| {
        let mut d = Mat5::zeros();
        for &(i, j, val) in entries {
            d[(i, j)] = val;
            d[(j, i)] = -val;
        }
        let term = d * grad;
        for r in 0..5 {
            jac[(r, col)] += term[r];
        }
    };
    dp(&[(M2, M3, -1.0)], M1);
    dp(&[(M1, M3, 1.0)], M2);
    dp(&[(M1, M2, -1.0)], M3);
    dp(&[(M1, M2, be2 * s), (M1, M3, -be2 * c), (M2, P, -be2 * s), (M3, P, be2 * c)], Q);
    jac
}

/// Central-difference gradient, step `1e-6` scaled by coordinate magnitude.
/// Test-facing fallback for cross-checking the analytic formulas.
pub fn numerical_gradient<F: Fn(&ReducedState) -> f64>(f: F, state: &ReducedState) -> Vec5 {
    let x = state.to_vector();
    let mut g = Vec5::zeros();
    for i in 0..5 {
        let h = 1e-6 * x[i].abs().max(1.0);
        let mut hi = x;
        let mut lo = x;
        hi[i] += h;
        lo[i] -= h;
        g[i] = (f(&ReducedState::from_vector(&hi)) - f(&ReducedState::from_vector(&lo))) / (2.0 * h);
    }
    g
}

/// Central-difference Jacobian of `vector_field` with fixed step `h`.
pub fn numerical_jacobian(state: &ReducedState, params: &SystemParams, v: &dyn Potential, h: f64) -> Mat5 {
    let x = state.to_vector();
    let mut jac = Mat5::zeros();
    for k in 0..5 {
        let mut hi = x;
        let mut lo = x;
        hi[k] += h;
        lo[k] -= h;
        let col = (vector_field(&ReducedState::from_vector(&hi), params, v)
            - vector_field(&ReducedState::from_vector(&lo), params, v))
            / (2.0 * h);
        jac.set_column(k, &col);
    }
    jac
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::cot_potential;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn random_state(rng: &mut StdRng, qmin: f64) -> ReducedState {
        ReducedState {
            m1: rng.random_range(-3.0..3.0),
            m2: rng.random_range(-3.0..3.0),
            m3: rng.random_range(-3.0..3.0),
            q: rng.random_range(qmin..PI - qmin),
            p: rng.random_range(-3.0..3.0),
        }
    }

    fn random_params(rng: &mut StdRng) -> SystemParams {
        let sign = |r: &mut StdRng| if r.random_bool(0.5) { 1.0 } else { -1.0 };
        SystemParams {
            mu1: rng.random_range(0.5..3.0),
            mu2: rng.random_range(0.5..3.0),
            e1: sign(rng) * rng.random_range(0.5..2.0),
            e2: sign(rng) * rng.random_range(0.5..2.0),
            b: rng.random_range(-4.0..4.0),
        }
    }

    /// Direct transcription of the identical-particle equations (μ = e = 1, V = cot).
    fn identical_field(s: &ReducedState, b: f64) -> Vec5 {
        let ReducedState { m1, m2, m3, q, p } = *s;
        let cot = 1.0 / q.tan();
        let csc = 1.0 / q.sin();
        Vec5::new(
            -(m2 - m3 * cot) * (b + m2 * cot + m3) - m3 * csc * (b - m2 * csc),
            m1 * (b + 2.0 * m3) - p * (2.0 * b * (q / 2.0).sin().powi(2) + m3) + m1 * m2 * cot
                - 2.0 * m1 * m3 * csc * csc,
            p * (b * q.sin() + m2) - m1 * m3 * cot,
            2.0 * p - m1,
            csc * (csc * (-m2 * m3 + 2.0 * m3 * m3 * cot + 1.0) - b * m3),
        )
    }

    #[test]
    fn hamiltonian_reference_values() {
        let params = SystemParams::identical(1.0);
        let v = cot_potential(&params);
        let s = ReducedState::at_rest(0.0, 0.0, PI / 2.0);
        assert!(hamiltonian(&s, &params, &v).abs() < 1e-15);

        // Zero-Casimir slice. Substituting into the reduced Hamiltonian gives
        // (m1 − p)²/2 + p²/2 = p² for the momentum part, not 3/2 p².
        let b: f64 = 1.7;
        let params = SystemParams::identical(b);
        for (q, p) in [(0.6f64, 0.3f64), (1.9, -1.2), (2.8, 0.0)] {
            let s = ReducedState { m1: 0.0, m2: b * q.sin(), m3: -b * (1.0 + q.cos()), q, p };
            let expect = p * p + b * b / (q / 2.0).tan().powi(2) + 1.0 / q.tan();
            assert!((hamiltonian(&s, &params, &v) - expect).abs() < 1e-12);
            assert!(casimir(&s, &params).abs() < 1e-24);
        }
    }

    #[test]
    fn hamiltonian_on_casimir_slice_with_m1() {
        // m1 = √C0, m2 = B sin q, m3 = −B(1 + cos q), p = 0 → H = C0/2 + cot q + B² cot²(q/2)
        let (b, c0): (f64, f64) = (2.5, 3.0);
        let params = SystemParams::identical(b);
        let v = cot_potential(&params);
        for q in [0.3f64, 1.0, 2.0, 3.0] {
            let s = ReducedState { m1: c0.sqrt(), m2: b * q.sin(), m3: -b * (1.0 + q.cos()), q, p: 0.0 };
            let expect = c0 / 2.0 + 1.0 / q.tan() + b * b / (q / 2.0).tan().powi(2);
            assert!((hamiltonian(&s, &params, &v) - expect).abs() < 1e-12);
            assert!((casimir(&s, &params) - c0).abs() < 1e-12);
        }
    }

    #[test]
    fn casimir_without_field_is_momentum_norm() {
        let mut rng = StdRng::seed_from_u64(1);
        for _ in 0..50 {
            let mut params = random_params(&mut rng);
            params.b = 0.0;
            let s = random_state(&mut rng, 0.1);
            let expect = s.m1 * s.m1 + s.m2 * s.m2 + s.m3 * s.m3;
            assert!((casimir(&s, &params) - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn poisson_tensor_entries() {
        let s = ReducedState { m1: 0.3, m2: -1.1, m3: 0.7, q: PI / 2.0, p: 0.2 };
        let params = SystemParams::identical(1.9);
        let t = poisson_tensor(&s, &params).matrix;
        assert!(t[(M2, P)].abs() < 1e-15);
        assert!((t[(M3, P)] - 1.9).abs() < 1e-15);
        assert_eq!(t[(Q, P)], 1.0);

        let flat = poisson_tensor(&s, &params.with_field(0.0)).matrix;
        assert_eq!(flat[(M1, M2)], -s.m3);
        assert_eq!(flat[(M1, M3)], s.m2);
        assert_eq!(flat[(M2, M3)], -s.m1);
        assert_eq!(flat[(M2, P)], 0.0);
        assert_eq!(flat[(M3, P)], 0.0);
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(t[(i, j)], -t[(j, i)]);
            }
        }
    }

    #[test]
    fn casimir_gradient_in_kernel() {
        let mut rng = StdRng::seed_from_u64(2);
        for _ in 0..1000 {
            let params = random_params(&mut rng);
            let s = random_state(&mut rng, 0.05);
            let r = poisson_tensor(&s, &params).apply(&grad_casimir(&s, &params));
            assert!(r.amax() < 1e-11, "kernel residual {}", r.amax());
        }
    }

    #[test]
    fn vector_field_is_tensor_times_gradient() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..100 {
            let params = random_params(&mut rng);
            let v = cot_potential(&params);
            let s = random_state(&mut rng, 0.2);
            let grad = grad_hamiltonian(&s, &params, &v);
            let fd = numerical_gradient(|x| hamiltonian(x, &params, &v), &s);
            assert!((grad - fd).amax() < 1e-6 * grad.amax().max(1.0));
            let f = vector_field(&s, &params, &v);
            let g = poisson_tensor(&s, &params).apply(&grad);
            assert!((f - g).amax() < 1e-9, "σ·∇H mismatch {}", (f - g).amax());
            let expect_qdot = (s.p * (params.mu1 + params.mu2) - params.mu2 * s.m1) / (params.mu1 * params.mu2);
            assert!((f[Q] - expect_qdot).abs() < 1e-13);
        }
    }

    #[test]
    fn identical_specialization_agrees() {
        let mut rng = StdRng::seed_from_u64(4);
        for _ in 0..1000 {
            let b = rng.random_range(-4.0..4.0);
            let params = SystemParams::identical(b);
            let v = cot_potential(&params);
            let s = random_state(&mut rng, 0.2);
            let d = vector_field(&s, &params, &v) - identical_field(&s, b);
            let scale = identical_field(&s, b).amax().max(1.0);
            assert!(d.amax() < 1e-13 * scale, "{}", d.amax());
        }
    }

    #[test]
    fn hessians_match_finite_differences() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..100 {
            let params = random_params(&mut rng);
            let v = cot_potential(&params);
            let s = random_state(&mut rng, 0.3);
            let hh = hessian_hamiltonian(&s, &params, &v);
            let hc = hessian_casimir(&s, &params);
            let x = s.to_vector();
            for k in 0..5 {
                let h = 1e-6;
                let mut hi = x;
                let mut lo = x;
                hi[k] += h;
                lo[k] -= h;
                let (sh, sl) = (ReducedState::from_vector(&hi), ReducedState::from_vector(&lo));
                let col_h = (grad_hamiltonian(&sh, &params, &v) - grad_hamiltonian(&sl, &params, &v)) / (2.0 * h);
                let col_c = (grad_casimir(&sh, &params) - grad_casimir(&sl, &params)) / (2.0 * h);
                let scale = hh.amax().max(1.0);
                assert!((hh.column(k) - col_h).amax() < 1e-6 * scale);
                assert!((hc.column(k) - col_c).amax() < 1e-6 * hc.amax().max(1.0));
            }
            assert_eq!(hh, hh.transpose());
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = StdRng::seed_from_u64(6);
        for _ in 0..200 {
            let params = random_params(&mut rng);
            let v = cot_potential(&params);
            let s = random_state(&mut rng, 0.3);
            let a = jacobian(&s, &params, &v);
            let n = numerical_jacobian(&s, &params, &v, 1e-6);
            assert!((a - n).amax() < 1e-6 * a.amax().max(1.0), "{}", (a - n).amax());
        }
    }
}
