//! Discrete symmetries of the reduced system: particle exchange (identical
//! particles only), time reversal and the opposite-charge involution.

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::params::SystemParams;
use crate::state::ReducedState;

/// Particle exchange acting on `(m1, m2, m3, p)` at fixed `q`.
pub fn swap_matrix(q: f64) -> Matrix4<f64> {
    let (s, c) = q.sin_cos();
    Matrix4::new(
        -1.0, 0.0, 0.0, 0.0, //
        0.0, -c, -s, 0.0, //
        0.0, -s, c, 0.0, //
        -1.0, 0.0, 0.0, 1.0,
    )
}

/// Relabels the two (identical) particles; `q` is unchanged.
pub fn swap(state: &ReducedState) -> ReducedState {
    let x = swap_matrix(state.q) * Vector4::new(state.m1, state.m2, state.m3, state.p);
    ReducedState { m1: x[0], m2: x[1], m3: x[2], q: state.q, p: x[3] }
}

/// Flips `B, m1, m2, m3, p`. `H` is invariant and the flow is reversed.
pub fn time_reversal(state: &ReducedState, params: &SystemParams) -> (ReducedState, SystemParams) {
    (
        ReducedState { m1: -state.m1, m2: -state.m2, m3: -state.m3, q: state.q, p: -state.p },
        params.with_field(-params.b),
    )
}

/// `(m1, m2, m3, q, p) ↦ (−m1, −m2, m3, π − q, −p)` with `e2 ↦ −e2`. The
/// potential must be carried along as `V(π − q)` (see [`crate::potential::Reflected`]).
pub fn opposite_charge(state: &ReducedState, params: &SystemParams) -> (ReducedState, SystemParams) {
    (
        ReducedState { m1: -state.m1, m2: -state.m2, m3: state.m3, q: PI - state.q, p: -state.p },
        SystemParams { e2: -params.e2, ..*params },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReducedMap {
    Swap,
    TimeReversal,
    OppositeCharge,
}

impl ReducedMap {
    pub const ALL: [ReducedMap; 3] = [ReducedMap::Swap, ReducedMap::TimeReversal, ReducedMap::OppositeCharge];

    pub fn action(&self, state: &ReducedState, params: &SystemParams) -> ReducedState {
        self.apply(state, params).0
    }

    pub fn param_action(&self, params: &SystemParams) -> SystemParams {
        match self {
            ReducedMap::Swap => *params,
            ReducedMap::TimeReversal => params.with_field(-params.b),
            ReducedMap::OppositeCharge => SystemParams { e2: -params.e2, ..*params },
        }
    }

    pub fn apply(&self, state: &ReducedState, params: &SystemParams) -> (ReducedState, SystemParams) {
        match self {
            ReducedMap::Swap => (swap(state), *params),
            ReducedMap::TimeReversal => time_reversal(state, params),
            ReducedMap::OppositeCharge => opposite_charge(state, params),
        }
    }
}
