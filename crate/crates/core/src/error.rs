use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("inter-particle distance q = {q} is outside the admissible interval")]
    OutsideDomain { q: f64 },

    #[error("collision/antipodal approach at t = {t}: q = {q}")]
    CollisionApproach { t: f64, q: f64 },

    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("q = {q} is within {tol} of pi/2; use the right-angle solver")]
    NearRightAngle { q: f64, tol: f64 },

    #[error("no admissible root of the m3 quartic at q = {q}")]
    NoAdmissibleRoot { q: f64 },

    #[error("equilibrium residual {residual:e} exceeds tolerance {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("degenerate equilibrium: restricted Hessian determinant {det:e}")]
    DegeneratePoint { det: f64 },

    #[error("degenerate configuration: particles coincide or are antipodal")]
    DegenerateConfiguration,

    #[error("invalid potential table: {0}")]
    InvalidPotential(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
