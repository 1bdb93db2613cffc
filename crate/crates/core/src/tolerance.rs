use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by every module.
///
/// The defaults are the values the library is tested against; callers may
/// override individual fields (the CLI exposes `--tol` for `residual`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Maximum accepted max-norm of the reduced vector field at an equilibrium.
    pub residual: f64,
    /// Threshold below which an eigenvalue is treated as zero.
    pub eigenvalue: f64,
    /// Distance kept from the excluded set `q ∈ {0, π}`.
    pub q_guard: f64,
    /// Band around `q = π/2` where the general formula for `m2` is indeterminate.
    pub right_angle: f64,
    /// Tolerance on the three stability quantities `a`, `a² + 4b`, `b`.
    pub classify: f64,
    /// Acceptance tolerance for the un-squared branch equation after polishing.
    pub branch: f64,
    /// Small negative values of the radicand `A` are clamped to zero above this.
    pub radicand: f64,
    /// Discriminant magnitude treated as an exact double root.
    pub discriminant: f64,
    /// Restricted-Hessian determinant below which a point is reported degenerate.
    pub hessian_det: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-10,
            eigenvalue: 1e-8,
            q_guard: 1e-8,
            right_angle: 1e-6,
            classify: 1e-10,
            branch: 1e-7,
            radicand: 1e-12,
            discriminant: 1e-12,
            hessian_det: 1e-10,
        }
    }
}

/// Equilibrium records are accepted up to this residual (looser than
/// [`Tolerances::residual`] to leave room for ill-conditioned cells).
pub const RECORD_RESIDUAL: f64 = 1e-9;
