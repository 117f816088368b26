//! One-sided transforms of the bare bath correlation functions:
//!
//! `Γ_Y(x) = ∫_0^∞ e^{ixs} Y(s) ds = π[J(x)Ñ(x) + J(−x)N(−x)] + i P∫ J(ν)[Ñ(ν)/(x−ν) + N(ν)/(x+ν)] dν`
//!
//! `Γ_X(x) = ∫_0^∞ e^{ixs} X(s) ds = π[J̄(x)Ñ(x) − J̄(−x)N(−x)] + i P∫ J̄(ν)[Ñ(ν)/(x−ν) − N(ν)/(x+ν)] dν`
//!
//! with `Ñ = N + 1` and `J̄ = J/ν`.

use num_complex::Complex64;
use pfme_bath::{spectral_density, spectral_density_bar, BathSpec, LineSpectrum};
use pfme_model::CouplingWeights;
use pfme_numerics::{bose, pv_inverse_difference, QuadOptions};
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::RateError;

/// Half-width of the symmetric window around each principal-value pole (eV).
pub const PV_WINDOW: f64 = 1e-3;

fn pv_opts() -> QuadOptions {
    QuadOptions { abs_tol: 1e-15, rel_tol: 1e-10, max_intervals: 2000 }
}

fn transform(x: f64, bath: &BathSpec, jf: fn(f64, &BathSpec) -> f64, odd: bool) -> Result<Complex64, RateError> {
    let beta = bath.beta;
    let emission = |nu: f64| jf(nu, bath) * (bose(nu, beta) + 1.0);
    let absorption = |nu: f64| jf(nu, bath) * bose(nu, beta);
    let sgn = if odd { -1.0 } else { 1.0 };
    let re = if x > 0.0 {
        PI * emission(x)
    } else if x < 0.0 {
        sgn * PI * absorption(-x)
    } else {
        0.0
    };
    let l = bath.nu_max();
    let pe = pv_inverse_difference(emission, x, 0.0, l, PV_WINDOW, pv_opts())?;
    // P∫ g(ν)/(x+ν) = −P∫ g(ν)/((−x)−ν)
    let pa = pv_inverse_difference(absorption, -x, 0.0, l, PV_WINDOW, pv_opts())?;
    Ok(Complex64::new(re, pe.value - sgn * pa.value))
}

/// `Γ_Y(x)`, the transform of the one-photon correlation function.
pub fn golden_y(x: f64, bath: &BathSpec) -> Result<Complex64, RateError> {
    transform(x, bath, spectral_density, false)
}

/// `Γ_X(x)`, the transform of the `J̄` correlation function.
pub fn golden_x(x: f64, bath: &BathSpec) -> Result<Complex64, RateError> {
    transform(x, bath, spectral_density_bar, true)
}

/// Standard optical master equation kernel `Γ_SOME(ω) = Ω_μμ Γ_Y(ω)`.
pub fn gamma_some(omega: f64, weights: &CouplingWeights, bath: &BathSpec) -> Result<Complex64, RateError> {
    Ok(weights.omega_mumu * golden_y(omega, bath)?)
}

/// `Σ_ℓ A_ℓ f(ω − E_ℓ)` over the line spectrum, in parallel.
pub fn line_sum(
    omega: f64,
    lines: &LineSpectrum,
    f: impl Fn(f64) -> Result<Complex64, RateError> + Sync,
) -> Result<Complex64, RateError> {
    let items: Vec<(f64, f64)> = lines.iter().filter(|(_, _, w)| *w != 0.0).map(|(_, e, w)| (e, w)).collect();
    items
        .par_iter()
        .map(|(e, w)| f(omega - e).map(|v| v * *w))
        .try_reduce(|| Complex64::new(0.0, 0.0), |a, b| Ok(a + b))
}

/// One-photon sideband channel `Ω_ab Σ_ℓ A_ℓ Γ_Y(ω − E_ℓ)` for a real pair weight `omega_ab`.
pub fn gamma_1(omega: f64, omega_ab: f64, lines: &LineSpectrum, bath: &BathSpec) -> Result<Complex64, RateError> {
    Ok(omega_ab * line_sum(omega, lines, |x| golden_y(x, bath))?)
}

/// Drive-induced one-photon channel `amplitude · Σ_ℓ A_ℓ Γ_X(ω − E_ℓ)`.
///
/// `amplitude = ±4 Ω_μΔ |V| cos ϑ_μV cos θ_μΔ`, the sign selecting the orientation.
pub fn gamma_v1(omega: f64, amplitude: f64, lines: &LineSpectrum, bath: &BathSpec) -> Result<Complex64, RateError> {
    if amplitude == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(amplitude * line_sum(omega, lines, |x| golden_x(x, bath))?)
}
