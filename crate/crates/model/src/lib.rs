//! Physical parameters of a driven two-level emitter coupled to the free-space
//! electromagnetic field through transition and permanent dipoles.
//!
//! Energies are in eV and times in eV⁻¹ (ħ = 1).

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ModelError {
    ModelError::Invalid { field, reason: reason.into() }
}

fn finite(field: &'static str, x: f64) -> Result<f64, ModelError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(field, format!("must be finite, got {x}")))
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Emitter energy, drive `V = |V| e^{iϑ_V}` and inverse temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub epsilon: f64,
    pub drive_magnitude: f64,
    pub drive_phase: f64,
    pub beta: f64,
}

impl SystemParams {
    pub fn new(epsilon: f64, drive_magnitude: f64, drive_phase: f64, beta: f64) -> Result<Self, ModelError> {
        finite("epsilon", epsilon)?;
        finite("drive_magnitude", drive_magnitude)?;
        finite("drive_phase", drive_phase)?;
        if epsilon < 0.0 {
            return Err(invalid("epsilon", "must be non-negative"));
        }
        if drive_magnitude < 0.0 {
            return Err(invalid("drive_magnitude", "must be non-negative"));
        }
        if !(beta > 0.0) {
            return Err(invalid("beta", "must be positive"));
        }
        Ok(Self { epsilon, drive_magnitude, drive_phase: wrap_angle(drive_phase), beta })
    }

    /// Real signed drive amplitude: negative values are stored as phase π.
    pub fn with_signed_drive(epsilon: f64, drive: f64, beta: f64) -> Result<Self, ModelError> {
        let phase = if drive < 0.0 { PI } else { 0.0 };
        Self::new(epsilon, drive.abs(), phase, beta)
    }
}

/// How the field polarisation sum enters the coupling weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolidAngle {
    /// Free space, unpolarised: Ω_pq = (8π/3)|d_p||d_q|.
    Isotropic,
    /// Field aligned with the dipoles: Ω_pq = |d_p||d_q|.
    Aligned,
}

impl SolidAngle {
    pub fn factor(self) -> f64 {
        match self {
            SolidAngle::Isotropic => 8.0 * PI / 3.0,
            SolidAngle::Aligned => 1.0,
        }
    }
}

/// Dimensionless dipole magnitudes, the angle between the transition and
/// permanent-dipole-difference vectors, and the transition-dipole phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleGeometry {
    pub d_mu: f64,
    pub d_delta: f64,
    pub d_d: f64,
    pub theta_mu_delta: f64,
    pub vartheta_mu: f64,
    pub solid_angle: SolidAngle,
}

impl DipoleGeometry {
    pub fn new(
        d_mu: f64,
        d_delta: f64,
        d_d: f64,
        theta_mu_delta: f64,
        vartheta_mu: f64,
        solid_angle: SolidAngle,
    ) -> Result<Self, ModelError> {
        for (field, v) in [("d_mu", d_mu), ("d_delta", d_delta), ("d_d", d_d)] {
            finite(field, v)?;
            if v < 0.0 {
                return Err(invalid(field, "magnitude must be non-negative"));
            }
        }
        finite("theta_mu_delta", theta_mu_delta)?;
        finite("vartheta_mu", vartheta_mu)?;
        Ok(Self {
            d_mu,
            d_delta,
            d_d,
            theta_mu_delta: wrap_angle(theta_mu_delta),
            vartheta_mu: wrap_angle(vartheta_mu),
            solid_angle,
        })
    }

    /// Geometry along a signed |d_Δ| axis: negative values mean anti-parallel dipoles (θ_μΔ = π).
    pub fn with_signed_delta(
        d_mu: f64,
        signed_delta: f64,
        vartheta_mu: f64,
        solid_angle: SolidAngle,
    ) -> Result<Self, ModelError> {
        let theta = if signed_delta < 0.0 { PI } else { 0.0 };
        Self::new(d_mu, signed_delta.abs(), 0.0, theta, vartheta_mu, solid_angle)
    }

    /// Relative phase ϑ_μV = ϑ_μ − ϑ_V.
    pub fn relative_phase(&self, sys: &SystemParams) -> f64 {
        self.vartheta_mu - sys.drive_phase
    }
}

/// Pairwise weights Ω_pq and the phases of the complex overlaps h_pq.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingWeights {
    pub omega_mumu: f64,
    pub omega_deltadelta: f64,
    pub omega_mudelta: f64,
    /// Phase of h_μΔ = Ω_μΔ cos θ_μΔ e^{iϑ_μ}.
    pub h_mudelta_phase: f64,
    /// Phase of h_μμ = Ω_μμ e^{2iϑ_μ}.
    pub h_mumu_phase: f64,
    pub cos_theta: f64,
}

pub fn coupling_weights(geom: &DipoleGeometry) -> CouplingWeights {
    let f = geom.solid_angle.factor();
    CouplingWeights {
        omega_mumu: f * geom.d_mu * geom.d_mu,
        omega_deltadelta: f * geom.d_delta * geom.d_delta,
        omega_mudelta: f * geom.d_mu * geom.d_delta,
        h_mudelta_phase: geom.vartheta_mu,
        h_mumu_phase: wrap_angle(2.0 * geom.vartheta_mu),
        cos_theta: clean_cos(geom.theta_mu_delta),
    }
}

/// Cosine that returns exact zeros and signs at multiples of π/2.
pub fn clean_cos(x: f64) -> f64 {
    let q = x / (0.5 * PI);
    if (q - q.round()).abs() < 1e-15 {
        match (q.round() as i64).rem_euclid(4) {
            0 => 1.0,
            1 | 3 => 0.0,
            _ => -1.0,
        }
    } else {
        x.cos()
    }
}

/// Polaron-frame eigenbasis of the renormalised system Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenFrame {
    pub eta: f64,
    pub mixing_angle: f64,
    pub kappa: f64,
}

impl EigenFrame {
    /// cos(φ_mix/2).
    pub fn cos_half(&self) -> f64 {
        (0.5 * self.mixing_angle).cos()
    }

    /// sin(φ_mix/2).
    pub fn sin_half(&self) -> f64 {
        (0.5 * self.mixing_angle).sin()
    }
}

/// Diagonalises `(ε/2)σ_z + κ|V|σ_x`.
pub fn build_eigenframe(sys: &SystemParams, kappa: f64) -> Result<EigenFrame, ModelError> {
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(invalid("kappa", format!("must lie in (0, 1], got {kappa}")));
    }
    let coupling = 2.0 * kappa * sys.drive_magnitude;
    let eta = sys.epsilon.hypot(coupling);
    if eta <= 0.0 {
        return Err(invalid("epsilon", "emitter energy and drive cannot both vanish"));
    }
    Ok(EigenFrame { eta, mixing_angle: coupling.atan2(sys.epsilon), kappa })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_examples() {
        let g = DipoleGeometry::new(0.01, 0.05, 0.0, 0.0, 0.0, SolidAngle::Isotropic).unwrap();
        let w = coupling_weights(&g);
        assert!((w.omega_mudelta - 4.188_790_204_786_391e-3).abs() < 1e-15);
        let g = DipoleGeometry::new(0.01, 0.05, 0.0, 0.0, 0.0, SolidAngle::Aligned).unwrap();
        assert!((coupling_weights(&g).omega_mudelta - 5e-4).abs() < 1e-18);
        let g = DipoleGeometry::new(0.01, 0.0, 0.0, 0.0, 0.0, SolidAngle::Isotropic).unwrap();
        let w = coupling_weights(&g);
        assert_eq!(w.omega_deltadelta, 0.0);
        assert_eq!(w.omega_mudelta, 0.0);
    }

    #[test]
    fn eigenframe_examples() {
        let f = build_eigenframe(&SystemParams::new(1.0, 0.0, 0.0, 2.0).unwrap(), 0.9).unwrap();
        assert_eq!(f.eta, 1.0);
        assert_eq!(f.mixing_angle, 0.0);
        let f = build_eigenframe(&SystemParams::new(1.0, 0.05, 0.0, 2.0).unwrap(), 0.962f64.sqrt()).unwrap();
        assert!((f.eta - 1.004_800).abs() < 1e-5);
        let f = build_eigenframe(&SystemParams::new(0.0, 0.1, 0.0, 2.0).unwrap(), 1.0).unwrap();
        assert!((f.mixing_angle - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_kappa_and_inputs() {
        let sys = SystemParams::new(1.0, 0.0, 0.0, 2.0).unwrap();
        assert!(build_eigenframe(&sys, 0.0).is_err());
        assert!(build_eigenframe(&sys, 1.1).is_err());
        assert!(SystemParams::new(1.0, -0.1, 0.0, 2.0).is_err());
        assert!(SystemParams::new(1.0, 0.1, 0.0, 0.0).is_err());
        assert!(DipoleGeometry::new(-0.1, 0.0, 0.0, 0.0, 0.0, SolidAngle::Aligned).is_err());
    }

    #[test]
    fn angles_are_wrapped() {
        let sys = SystemParams::new(1.0, 0.1, -PI / 2.0, 2.0).unwrap();
        assert!((sys.drive_phase - 1.5 * PI).abs() < 1e-15);
        let sys = SystemParams::with_signed_drive(1.0, -0.2, 2.0).unwrap();
        assert_eq!(sys.drive_phase, PI);
        assert_eq!(sys.drive_magnitude, 0.2);
    }

    #[test]
    fn clean_cos_is_exact_at_quadrants() {
        assert_eq!(clean_cos(PI / 2.0), 0.0);
        assert_eq!(clean_cos(PI), -1.0);
        assert_eq!(clean_cos(1.5 * PI), 0.0);
    }
}
