//! Relative equilibria: points `(0, m2, m3, q, 0)` where the reduced flow
//! vanishes.
//!
//! At `m1 = p = 0` only the `ṁ1` and `ṗ` components of the vector field can
//! be nonzero, so every solver reduces to a 2×2 system in `(m2, m3)` at fixed
//! `q`. Candidates from closed forms or the quartic are polished by Newton on
//! that system before their residual is recorded.

mod general;
mod identical;

pub use general::{quartic_coefficients, solve_general, solve_right_angle, RightAngleFamily, RightAngleSolution};
pub(crate) use identical::type1_pair;
pub use identical::{casimir_on_type1, threshold_field, type1, type2, type2_discriminant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::potential::Potential;
use crate::reduced::{casimir, hamiltonian, jacobian, vector_field, M1, M2, M3, P};
use crate::state::ReducedState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "TypeI_plus")]
    TypeIPlus,
    #[serde(rename = "TypeI_minus")]
    TypeIMinus,
    #[serde(rename = "TypeII_plus")]
    TypeIIPlus,
    #[serde(rename = "TypeII_minus")]
    TypeIIMinus,
    General,
    RightAngle,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::TypeIPlus => "TypeI_plus",
            Family::TypeIMinus => "TypeI_minus",
            Family::TypeIIPlus => "TypeII_plus",
            Family::TypeIIMinus => "TypeII_minus",
            Family::General => "General",
            Family::RightAngle => "RightAngle",
        }
    }

    pub fn is_type1(&self) -> bool {
        matches!(self, Family::TypeIPlus | Family::TypeIMinus)
    }

    pub fn is_type2(&self) -> bool {
        matches!(self, Family::TypeIIPlus | Family::TypeIIMinus)
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A located relative equilibrium. `state.m1` and `state.p` are exactly zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "RecordJson", from = "RecordJson")]
pub struct EquilibriumRecord {
    pub family: Family,
    pub state: ReducedState,
    pub params: SystemParams,
    pub energy: f64,
    pub casimir: f64,
    /// Max-norm of the reduced vector field at `state`.
    pub residual: f64,
    /// Set for merged double roots (threshold curve, discriminant zero).
    pub degenerate: bool,
}

impl EquilibriumRecord {
    /// Builds a record at `(0, m2, m3, q, 0)` and evaluates `H`, `C` and the residual.
    pub fn evaluate(
        family: Family,
        m2: f64,
        m3: f64,
        q: f64,
        params: &SystemParams,
        v: &dyn Potential,
        degenerate: bool,
    ) -> Self {
        let state = ReducedState::at_rest(m2, m3, q);
        Self {
            family,
            state,
            params: *params,
            energy: hamiltonian(&state, params, v),
            casimir: casimir(&state, params),
            residual: vector_field(&state, params, v).amax(),
            degenerate,
        }
    }

    pub fn q(&self) -> f64 {
        self.state.q
    }

    pub fn m2(&self) -> f64 {
        self.state.m2
    }

    pub fn m3(&self) -> f64 {
        self.state.m3
    }

    pub fn check_residual(&self, tol: f64) -> Result<()> {
        if self.residual.is_finite() && self.residual <= tol {
            Ok(())
        } else {
            Err(Error::ResidualTooLarge { residual: self.residual, tol })
        }
    }
}

/// Flat JSON layout: `family, q, B, m2, m3, H, C, residual, degenerate`
/// plus the remaining parameters so records deserialize losslessly.
#[derive(Serialize, Deserialize)]
struct RecordJson {
    family: Family,
    q: f64,
    #[serde(rename = "B")]
    b: f64,
    m2: f64,
    m3: f64,
    #[serde(rename = "H")]
    energy: f64,
    #[serde(rename = "C")]
    casimir: f64,
    residual: f64,
    degenerate: bool,
    mu1: f64,
    mu2: f64,
    e1: f64,
    e2: f64,
}

impl From<EquilibriumRecord> for RecordJson {
    fn from(r: EquilibriumRecord) -> Self {
        Self {
            family: r.family,
            q: r.state.q,
            b: r.params.b,
            m2: r.state.m2,
            m3: r.state.m3,
            energy: r.energy,
            casimir: r.casimir,
            residual: r.residual,
            degenerate: r.degenerate,
            mu1: r.params.mu1,
            mu2: r.params.mu2,
            e1: r.params.e1,
            e2: r.params.e2,
        }
    }
}

impl From<RecordJson> for EquilibriumRecord {
    fn from(j: RecordJson) -> Self {
        Self {
            family: j.family,
            state: ReducedState::at_rest(j.m2, j.m3, j.q),
            params: SystemParams { mu1: j.mu1, mu2: j.mu2, e1: j.e1, e2: j.e2, b: j.b },
            energy: j.energy,
            casimir: j.casimir,
            residual: j.residual,
            degenerate: j.degenerate,
        }
    }
}

/// Newton on `(ṁ1, ṗ) = 0` in `(m2, m3)` at fixed `q`. Keeps the best iterate,
/// so a candidate never gets worse.
pub(crate) fn polish(m2: f64, m3: f64, q: f64, params: &SystemParams, v: &dyn Potential) -> (f64, f64) {
    let residual = |a: f64, b: f64| {
        let f = vector_field(&ReducedState::at_rest(a, b, q), params, v);
        (f[M1], f[P])
    };
    let (mut x, mut y) = (m2, m3);
    let (mut f1, mut f2) = residual(x, y);
    let mut best = (x, y, f1.abs().max(f2.abs()));
    for _ in 0..12 {
        if best.2 == 0.0 {
            break;
        }
        let j = jacobian(&ReducedState::at_rest(x, y, q), params, v);
        let (a, b, c, d) = (j[(M1, M2)], j[(M1, M3)], j[(P, M2)], j[(P, M3)]);
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        x -= (d * f1 - b * f2) / det;
        y -= (a * f2 - c * f1) / det;
        (f1, f2) = residual(x, y);
        let r = f1.abs().max(f2.abs());
        if !r.is_finite() {
            break;
        }
        if r < best.2 {
            best = (x, y, r);
        } else if r > 1e3 * best.2 {
            break;
        }
    }
    (best.0, best.1)
}

/// Ordering used by every solver: family, then `m3`.
pub(crate) fn sort_records(records: &mut [EquilibriumRecord]) {
    records.sort_by(|a, b| a.family.cmp(&b.family).then(a.state.m3.total_cmp(&b.state.m3)));
}
