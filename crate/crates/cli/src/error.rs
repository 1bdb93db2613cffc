use std::io;

use magsphere::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Library(#[from] Error),

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    /// 1 for bad configuration or unusable input, 2 when the computation
    /// itself leaves the admissible domain.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Library(e) => match e {
                Error::InvalidParams(_) | Error::InvalidPotential(_) | Error::InvalidArgument(_) => 1,
                Error::OutsideDomain { .. }
                | Error::CollisionApproach { .. }
                | Error::NonFiniteState { .. }
                | Error::NearRightAngle { .. }
                | Error::NoAdmissibleRoot { .. }
                | Error::ResidualTooLarge { .. }
                | Error::DegeneratePoint { .. }
                | Error::DegenerateConfiguration => 2,
            },
        }
    }
}
