use pfme_bath::{BathSpec, Propagator};
use pfme_model::{build_eigenframe, coupling_weights, DipoleGeometry, SystemParams};
use pfme_rates::{RateEngine, RateOptions};
use serde::{Deserialize, Serialize};

use crate::state::{Basis, BasisMap, DensityMatrix};
use crate::DynamicsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SteadyMode {
    /// Fixed point `γ↑/(γ↑+γ↓)` of the secular rate equation.
    RateRatio,
    /// Gibbs state of the renormalised system Hamiltonian.
    Thermal,
}

/// `ρ_ee(∞) = ½[1 − (ε/η) tanh(βη/2)]` with `η = (ε² + 4κ²|V|²)^{1/2}`.
pub fn thermal_excited_population(sys: &SystemParams, kappa: f64) -> Result<f64, DynamicsError> {
    let frame = build_eigenframe(sys, kappa)?;
    Ok(0.5 * (1.0 - sys.epsilon / frame.eta * (0.5 * sys.beta * frame.eta).tanh()))
}

/// Steady state in the bare basis of the polaron frame.
pub fn steady_state(
    sys: &SystemParams,
    geom: &DipoleGeometry,
    bath: &BathSpec,
    mode: SteadyMode,
) -> Result<DensityMatrix, DynamicsError> {
    let kappa = Propagator::new(*bath, coupling_weights(geom).omega_deltadelta).kappa_sq().sqrt();
    let frame = build_eigenframe(sys, kappa)?;
    let map = BasisMap::new(frame.mixing_angle, sys.drive_phase);
    let p = match mode {
        SteadyMode::Thermal => {
            let x = (-sys.beta * frame.eta).exp();
            x / (1.0 + x)
        }
        SteadyMode::RateRatio => {
            RateEngine::new(*sys, *geom, *bath, RateOptions::default())?.rate_set()?.secular.upper_population()
        }
    };
    Ok(map.to_bare(&DensityMatrix::diagonal(Basis::Eigen, p)))
}
