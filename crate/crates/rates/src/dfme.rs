//! Displaced-frame rates. The system Hamiltonian `(ε/2)σ_z + Vσ_+ + V*σ_−` is
//! diagonalised without polaron renormalisation and the full dipole operator
//! `d_Δ σ_z/2 + d_μ σ_+ + d_μ* σ_−` is treated to second order.

use num_complex::Complex64;
use pfme_bath::BathSpec;
use pfme_model::{build_eigenframe, DipoleGeometry, SystemParams};

use crate::golden::golden_y;
use crate::redfield::{Channel, Frame, GammaTable, RateSet};
use crate::RateError;

type Vec3 = [Complex64; 3];

fn bilinear(a: &Vec3, b: &Vec3) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Eigenbasis coupling vectors `D_α` with `H_I = Σ_α τ_α ⊗ (D_α · E)`, in units of the
/// dimensionless dipoles, together with the mixing angle and `η^d`.
pub fn displaced_couplings(sys: &SystemParams, geom: &DipoleGeometry) -> Result<([Vec3; 3], f64, f64), RateError> {
    let frame = build_eigenframe(sys, 1.0)?;
    let (c, s) = (frame.cos_half(), frame.sin_half());
    let zero = Complex64::new(0.0, 0.0);
    let d_delta = [Complex64::new(geom.d_delta, 0.0), zero, zero];
    let st = geom.theta_mu_delta.sin();
    let m = Complex64::from_polar(geom.d_mu, geom.vartheta_mu);
    let d_mu = [m * pfme_model::clean_cos(geom.theta_mu_delta), m * st, zero];
    let ph = Complex64::from_polar(1.0, -sys.drive_phase);
    let comb = |a: f64, b: Complex64, d: Complex64| -> Vec3 {
        let mut out = [zero; 3];
        for i in 0..3 {
            out[i] = a * d_delta[i] + b * d_mu[i] + d * d_mu[i].conj();
        }
        out
    };
    let d_z = comb(c * c - s * s, c * s * ph, c * s * ph.conj());
    let d_plus = comb(-2.0 * c * s, c * c * ph, -s * s * ph.conj());
    let d_minus = [d_plus[0].conj(), d_plus[1].conj(), d_plus[2].conj()];
    Ok(([d_z, d_plus, d_minus], frame.mixing_angle, frame.eta))
}

fn index(a: Channel) -> usize {
    match a {
        Channel::Z => 0,
        Channel::Plus => 1,
        Channel::Minus => 2,
    }
}

/// `Γ^d_αβ(ω) = F (D_α* · D_β) Γ_Y(ω)` at `ω ∈ {−η^d, 0, η^d}`.
pub fn dfme_gamma_table(sys: &SystemParams, geom: &DipoleGeometry, bath: &BathSpec) -> Result<(GammaTable, f64), RateError> {
    if (sys.beta - bath.beta).abs() > 1e-12 * sys.beta {
        return Err(RateError::Inconsistent(format!("system beta {} differs from bath beta {}", sys.beta, bath.beta)));
    }
    let (d, mixing, eta) = displaced_couplings(sys, geom)?;
    let f = geom.solid_angle.factor();
    let kernels = [golden_y(-eta, bath)?, golden_y(0.0, bath)?, golden_y(eta, bath)?];
    let table = GammaTable::build(eta, |a, b, w| {
        let k = if w < 0.0 {
            0
        } else if w == 0.0 {
            1
        } else {
            2
        };
        Ok::<_, RateError>(f * bilinear(&d[index(a)], &d[index(b)]) * kernels[k])
    })?;
    Ok((table, mixing))
}

pub fn dfme_rates(sys: &SystemParams, geom: &DipoleGeometry, bath: &BathSpec) -> Result<RateSet, RateError> {
    let (table, mixing) = dfme_gamma_table(sys, geom, bath)?;
    Ok(RateSet::from_table(Frame::Displaced, mixing, 1.0, table))
}
