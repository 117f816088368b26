//! Time evolution of the emitter's reduced density matrix under the secular
//! and non-secular master equations, plus steady states and frame maps.

mod evolve;
mod state;
mod steady;

pub use evolve::{evolve_nonsecular, evolve_secular, real_generator, to_lab_frame, Equation, FrameTag, Propagation, Trajectory};
pub use state::{Basis, BasisMap, DensityMatrix, POPULATION_TOLERANCE};
pub use steady::{steady_state, thermal_excited_population, SteadyMode};

use pfme_model::ModelError;
use pfme_rates::RateError;

#[derive(Debug, thiserror::Error)]
pub enum DynamicsError {
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("time grid must be non-empty, non-negative and strictly increasing")]
    InvalidGrid,
    #[error("adaptive stepper failed: {0}")]
    Stepper(String),
    #[error(transparent)]
    Rates(#[from] RateError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("output failed: {0}")]
    Io(String),
}

impl From<csv::Error> for DynamicsError {
    fn from(e: csv::Error) -> Self {
        DynamicsError::Io(e.to_string())
    }
}
