//! The free-space photon bath: spectral density `J(ν) = S ν³/ν_c² e^{−ν/ν_c}`,
//! the photon propagator φ(s), the polaron renormalisation κ and the
//! sideband line representations of `e^{±φ(s)−φ(0)}`.

mod lines;
mod propagator;

pub use lines::{
    lattice_lines, line_weights, sideband_kernel, sideband_lines, truncation_mode, LineSpectrum, SeriesKind,
    SidebandKernel, TruncationMode,
};
pub use propagator::{kappa, propagator_phi, propagator_phi_quadrature, Propagator};

use pfme_numerics::NumericsError;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum BathError {
    #[error("invalid bath parameter `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("bath quadrature failed: {0}")]
    Quadrature(#[from] NumericsError),
    #[error("line-weight series did not converge: {0}")]
    Series(String),
}

/// Super-ohmic spectral density family and bath temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    pub huang_rhys: f64,
    pub cutoff: f64,
    pub beta: f64,
}

impl BathSpec {
    pub fn new(huang_rhys: f64, cutoff: f64, beta: f64) -> Result<Self, BathError> {
        if !(huang_rhys >= 0.0 && huang_rhys.is_finite()) {
            return Err(BathError::Invalid { field: "huang_rhys", reason: "must be finite and non-negative".into() });
        }
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(BathError::Invalid { field: "cutoff", reason: "must be positive".into() });
        }
        if !(beta > 0.0) {
            return Err(BathError::Invalid { field: "beta", reason: "must be positive".into() });
        }
        Ok(Self { huang_rhys, cutoff, beta })
    }

    /// Upper limit of frequency integrals, 40 ν_c.
    pub fn nu_max(&self) -> f64 {
        40.0 * self.cutoff
    }

    /// Prefactor `S/ν_c²`.
    pub fn amplitude(&self) -> f64 {
        self.huang_rhys / (self.cutoff * self.cutoff)
    }
}

/// `J(ν) = S ν³/ν_c² e^{−ν/ν_c}` for ν > 0, zero otherwise.
pub fn spectral_density(nu: f64, bath: &BathSpec) -> f64 {
    if nu <= 0.0 {
        0.0
    } else {
        bath.amplitude() * nu.powi(3) * (-nu / bath.cutoff).exp()
    }
}

/// `J̄(ν) = J(ν)/ν`.
pub fn spectral_density_bar(nu: f64, bath: &BathSpec) -> f64 {
    if nu <= 0.0 {
        0.0
    } else {
        bath.amplitude() * nu * nu * (-nu / bath.cutoff).exp()
    }
}

/// Reorganisation energy `λ = ∫ J(ν)/ν dν = 2 ν_c S`.
pub fn reorganisation_energy(bath: &BathSpec) -> f64 {
    2.0 * bath.cutoff * bath.huang_rhys
}
