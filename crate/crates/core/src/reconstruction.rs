//! Rigid rotations in `R³` corresponding to relative equilibria.

use nalgebra::{Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::equilibria::EquilibriumRecord;
use crate::error::{Error, Result};
use crate::fullspace::{lift_state, reference_positions, FullState};
use crate::state::reduced_to_body_velocity;

/// Rotation of the configuration at constant angular velocity, placed at
/// `g(0) = I` so that body and space frames agree at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidRotation {
    pub q: f64,
    /// Angular velocity (body frame, equal to space frame since `ω` is fixed).
    pub omega: [f64; 3],
    /// Unit rotation axis, oriented as `−ω/|ω|`.
    pub axis: [f64; 3],
    pub rate: f64,
    /// Cosines of the angles between the axis and each particle.
    pub cos_theta: [f64; 2],
}

pub fn rigid_rotation(record: &EquilibriumRecord) -> Result<RigidRotation> {
    let vel = reduced_to_body_velocity(&record.state, &record.params);
    if vel.qdot.abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("record is not a relative equilibrium (q' = {:e})", vel.qdot)));
    }
    let w = vel.omega();
    let rate = w.norm();
    if rate < 1e-14 {
        return Err(Error::DegenerateConfiguration);
    }
    let axis = -w / rate;
    let (x1, x2) = reference_positions(record.q());
    Ok(RigidRotation {
        q: record.q(),
        omega: w.into(),
        axis: axis.into(),
        rate,
        cos_theta: [x1.dot(&axis), x2.dot(&axis)],
    })
}

/// `cos θ1 + cos θ2` along the Type I family, equal to
/// `B(sec q + 1)/√(B² sec² q + 2 csc³ q)`.
pub fn type1_axis_cosine_sum(q: f64, b: f64) -> f64 {
    let sec = 1.0 / q.cos();
    b * (sec + 1.0) / (b * b * sec * sec + 2.0 / q.sin().powi(3)).sqrt()
}

impl RigidRotation {
    /// Full state at time `t`: the `t = 0` lift rotated by `exp(t ω̂)`.
    pub fn state_at(&self, record: &EquilibriumRecord, t: f64) -> FullState {
        let r = Rotation3::new(Vector3::from(self.omega) * t);
        lift_state(&record.state, &record.params).rotated(r.matrix())
    }
}
