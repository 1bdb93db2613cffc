use nalgebra::SVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;

pub type Vec5 = SVector<f64, 5>;

/// Point of the reduced phase space: body angular momentum `(m1, m2, m3)`,
/// geodesic distance `q ∈ (0, π)` and its conjugate momentum `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub q: f64,
    pub p: f64,
}

impl ReducedState {
    pub fn new(m1: f64, m2: f64, m3: f64, q: f64, p: f64) -> Result<Self> {
        let s = Self { m1, m2, m3, q, p };
        s.check(0.0)?;
        Ok(s)
    }

    /// Rejects non-finite coordinates and `q` outside `[guard, π − guard]`
    /// (the open interval when `guard == 0`).
    pub fn check(&self, guard: f64) -> Result<()> {
        if !self.to_vector().iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteState { t: f64::NAN });
        }
        let pi = std::f64::consts::PI;
        let inside = if guard > 0.0 { self.q >= guard && self.q <= pi - guard } else { self.q > 0.0 && self.q < pi };
        if inside {
            Ok(())
        } else {
            Err(Error::OutsideDomain { q: self.q })
        }
    }

    pub fn to_vector(&self) -> Vec5 {
        Vec5::new(self.m1, self.m2, self.m3, self.q, self.p)
    }

    pub fn from_vector(v: &Vec5) -> Self {
        Self { m1: v[0], m2: v[1], m3: v[2], q: v[3], p: v[4] }
    }

    /// An equilibrium candidate `(0, m2, m3, q, 0)`.
    pub fn at_rest(m2: f64, m3: f64, q: f64) -> Self {
        Self { m1: 0.0, m2, m3, q, p: 0.0 }
    }
}

/// Body-frame angular velocity together with `q̇`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyFrameVelocity {
    pub omega1: f64,
    pub omega2: f64,
    pub omega3: f64,
    pub qdot: f64,
}

impl BodyFrameVelocity {
    pub fn omega(&self) -> nalgebra::Vector3<f64> {
        nalgebra::Vector3::new(self.omega1, self.omega2, self.omega3)
    }
}

/// Inverse Legendre map `(m, p) ↦ (ω, q̇)` at fixed `q`.
pub fn reduced_to_body_velocity(state: &ReducedState, params: &SystemParams) -> BodyFrameVelocity {
    let ReducedState { m1, m2, m3, q, p } = *state;
    let (mu1, mu2) = (params.mu1, params.mu2);
    let cot = 1.0 / q.tan();
    let csc2 = 1.0 / (q.sin() * q.sin());
    BodyFrameVelocity {
        omega1: (m1 - p) / mu1,
        omega2: (m2 - m3 * cot) / mu1,
        omega3: cot * (m3 * cot - m2) / mu1 + m3 * csc2 / mu2,
        qdot: (p * (mu1 + mu2) - mu2 * m1) / (mu1 * mu2),
    }
}

/// Legendre map `m_i = ∂T/∂ω_i`, `p = ∂T/∂q̇` for the kinetic energy
/// `T = μ1/2 (ω1² + ω2²) + μ2/2 ((ω1 + q̇)² + (ω3 sin q + ω2 cos q)²)`.
pub fn body_velocity_to_reduced(vel: &BodyFrameVelocity, q: f64, params: &SystemParams) -> ReducedState {
    let (mu1, mu2) = (params.mu1, params.mu2);
    let (s, c) = q.sin_cos();
    let lateral = vel.omega3 * s + vel.omega2 * c;
    let p = mu2 * (vel.omega1 + vel.qdot);
    ReducedState { m1: mu1 * vel.omega1 + p, m2: mu1 * vel.omega2 + mu2 * c * lateral, m3: mu2 * s * lateral, q, p }
}

/// Kinetic energy expressed through body velocities.
pub fn kinetic_energy(vel: &BodyFrameVelocity, q: f64, params: &SystemParams) -> f64 {
    let (s, c) = q.sin_cos();
    let lateral = vel.omega3 * s + vel.omega2 * c;
    0.5 * params.mu1 * (vel.omega1.powi(2) + vel.omega2.powi(2))
        + 0.5 * params.mu2 * ((vel.omega1 + vel.qdot).powi(2) + lateral.powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_excluded_distances() {
        assert!(ReducedState::new(0.0, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(ReducedState::new(0.0, 0.0, 0.0, PI, 0.0).is_err());
        assert!(ReducedState::new(0.0, f64::NAN, 0.0, 1.0, 0.0).is_err());
        let s = ReducedState::new(0.0, 0.0, 0.0, 1e-9, 0.0).unwrap();
        assert!(s.check(1e-8).is_err());
    }

    #[test]
    fn zero_m1_and_p_give_zero_omega1_and_qdot() {
        let params = SystemParams::identical(0.0);
        for (m2, m3, q) in [(1.0, -2.0, 0.7), (-0.3, 0.4, 2.5)] {
            let v = reduced_to_body_velocity(&ReducedState::at_rest(m2, m3, q), &params);
            assert_eq!(v.omega1, 0.0);
            assert_eq!(v.qdot, 0.0);
        }
    }

    #[test]
    fn unequal_masses_reference_state() {
        let params = SystemParams::new(2.0, 3.0, 1.0, 1.0, 0.0).unwrap();
        let s = ReducedState::new(1.0, 0.0, 0.0, PI / 2.0, 1.0).unwrap();
        let v = reduced_to_body_velocity(&s, &params);
        assert!(v.omega1.abs() < 1e-15);
        assert!(v.omega2.abs() < 1e-15);
        assert!(v.omega3.abs() < 1e-15);
        assert!((v.qdot - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn type_ii_angular_velocity_matches_closed_form() {
        // ω2± = −½ tan(q/2) (B ± R), ω3± = ½ (B ± R), R = √(B² − 2 csc²(q/2) csc q)
        let (q, b) = (2.0f64, 3.0f64);
        let r = (b * b - 2.0 / ((q / 2.0).sin().powi(2) * q.sin())).sqrt();
        for sign in [1.0, -1.0] {
            let k = b + sign * r;
            let m2 = -2.0 * (q / 2.0).sin().powi(4) / q.sin() * k;
            let m3 = (q / 2.0).sin().powi(2) * k;
            let v = reduced_to_body_velocity(&ReducedState::at_rest(m2, m3, q), &SystemParams::identical(b));
            assert!(v.omega1.abs() < 1e-15);
            assert!((v.omega2 + 0.5 * (q / 2.0).tan() * k).abs() < 1e-12);
            assert!((v.omega3 - 0.5 * k).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn legendre_round_trip(
            m1 in -5.0..5.0f64, m2 in -5.0..5.0f64, m3 in -5.0..5.0f64,
            q in 0.05..(PI - 0.05), p in -5.0..5.0f64,
            mu1 in 0.3..4.0f64, mu2 in 0.3..4.0f64,
        ) {
            let params = SystemParams::new(mu1, mu2, 1.0, 1.0, 0.0).unwrap();
            let s = ReducedState { m1, m2, m3, q, p };
            let v = reduced_to_body_velocity(&s, &params);
            let back = body_velocity_to_reduced(&v, q, &params);
            let scale = 1.0 + 1.0 / q.sin().powi(2);
            prop_assert!((back.to_vector() - s.to_vector()).amax() < 1e-12 * scale * scale);
        }
    }
}
