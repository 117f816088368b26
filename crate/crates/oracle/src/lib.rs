//! Independent reference calculations used to validate the analytic rates
//! and the master-equation dynamics.
//!
//! * [`CorrOracle`] evaluates the correlation-function transforms by direct
//!   quadrature over frequency and time, without the closed forms.
//! * [`discretise_bath`], [`build_effective_hamiltonian`] and [`exact_evolve`]
//!   propagate a few-mode bath exactly with dense linear algebra.
//! * [`fock_correlation`] evaluates a single-mode correlation function by
//!   brute force in a truncated Fock space.

mod discrete;
mod exact;
mod fock;
mod hamiltonian;
mod quadrature;

pub use discrete::{discretise_bath, DiscreteBath, MomentErrors};
pub use exact::{exact_evolve, EnsembleOptions, ExactRun};
pub use fock::{fock_correlation, SingleMode};
pub use hamiltonian::{build_effective_hamiltonian, EffectiveHamiltonian, FockConfig};
pub use quadrature::{numeric_corr_ft, oracle_rate_set, CorrOracle, OracleEstimate, OracleOptions};

use pfme_bath::BathError;
use pfme_dynamics::DynamicsError;
use pfme_model::ModelError;
use pfme_numerics::NumericsError;
use pfme_rates::RateError;

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("Hilbert-space dimension {dim} exceeds the limit {max}")]
    DimensionOverflow { dim: usize, max: usize },
    #[error("only collinear dipoles are supported by the few-mode oracle")]
    NonCollinear,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Bath(#[from] BathError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Rates(#[from] RateError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}
