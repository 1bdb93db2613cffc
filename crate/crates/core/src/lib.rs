//! Reduced dynamics, relative equilibria and linear stability of one and two
//! charged particles on the unit sphere in a uniform radial magnetic field.

pub mod atlas;
pub mod equilibria;
pub mod error;
pub mod fullspace;
pub mod params;
pub mod poly;
pub mod potential;
pub mod reconstruction;
pub mod reduced;
pub mod stability;
pub mod state;
pub mod symmetry;
pub mod tolerance;

pub use error::{Error, Result};
pub use params::SystemParams;
pub use potential::{cot_potential, CotPotential, Potential, Reflected, TablePotential, ZeroPotential};
pub use state::{body_velocity_to_reduced, reduced_to_body_velocity, BodyFrameVelocity, ReducedState};
pub use tolerance::Tolerances;
