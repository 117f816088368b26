use num_complex::Complex64;
use pfme_numerics::{hurwitz_zeta, integrate, nu_coth, Estimate, QuadOptions};

use crate::{BathError, BathSpec};

/// Closed-form bath correlation functions for the super-ohmic family.
///
/// With `a = 1/ν_c`, `z₁ = (a + is)/β` and `z₂ = (a − is)/β + 1`:
///
/// * `φ(s) = 4Ω_ΔΔ ∫ J(ν)/ν² [coth(βν/2) cos νs − i sin νs] dν`
/// * `X(s) = ∫ J(ν)/ν [Ñ(ν) e^{−iνs} − N(ν) e^{iνs}] dν`
/// * `Y(s) = ∫ J(ν) [Ñ(ν) e^{−iνs} + N(ν) e^{iνs}] dν`
///
/// are sums of Hurwitz zeta functions, analytic in `s` away from the
/// imaginary axis, so they may be evaluated on complex contours.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagator {
    pub bath: BathSpec,
    pub omega_dd: f64,
    phi0: f64,
}

impl Propagator {
    pub fn new(bath: BathSpec, omega_dd: f64) -> Self {
        let mut p = Self { bath, omega_dd, phi0: 0.0 };
        p.phi0 = p.phi(Complex64::new(0.0, 0.0)).re;
        p
    }

    fn args(&self, s: Complex64) -> (Complex64, Complex64) {
        let a = 1.0 / self.bath.cutoff;
        let b = self.bath.beta;
        let is = Complex64::i() * s;
        ((a + is) / b, (a - is) / b + 1.0)
    }

    pub fn phi(&self, s: Complex64) -> Complex64 {
        if self.omega_dd == 0.0 || self.bath.huang_rhys == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let (z1, z2) = self.args(s);
        let b = self.bath.beta;
        4.0 * self.omega_dd * self.bath.amplitude() / (b * b) * (hurwitz_zeta(2, z1) + hurwitz_zeta(2, z2))
    }

    pub fn x(&self, s: Complex64) -> Complex64 {
        let (z1, z2) = self.args(s);
        let b = self.bath.beta;
        2.0 * self.bath.amplitude() / b.powi(3) * (hurwitz_zeta(3, z1) - hurwitz_zeta(3, z2))
    }

    pub fn y(&self, s: Complex64) -> Complex64 {
        let (z1, z2) = self.args(s);
        let b = self.bath.beta;
        6.0 * self.bath.amplitude() / b.powi(4) * (hurwitz_zeta(4, z1) + hurwitz_zeta(4, z2))
    }

    /// φ(0), real and non-negative.
    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    /// κ² = e^{−φ(0)}.
    pub fn kappa_sq(&self) -> f64 {
        (-self.phi0).exp()
    }
}

/// φ(s) at real `s` from the closed form.
pub fn propagator_phi(s: f64, bath: &BathSpec, omega_dd: f64) -> Result<Complex64, BathError> {
    if !(omega_dd >= 0.0) {
        return Err(BathError::Invalid { field: "omega_dd", reason: "must be non-negative".into() });
    }
    Ok(Propagator::new(*bath, omega_dd).phi(Complex64::new(s, 0.0)))
}

/// φ(s) by adaptive quadrature of its frequency integral over `[0, 40ν_c]`.
pub fn propagator_phi_quadrature(s: f64, bath: &BathSpec, omega_dd: f64) -> Result<Estimate<Complex64>, BathError> {
    let pref = 4.0 * omega_dd * bath.amplitude();
    let beta = bath.beta;
    let nc = bath.cutoff;
    let r = integrate(
        |nu: f64| {
            let decay = (-nu / nc).exp();
            let (sn, cs) = (nu * s).sin_cos();
            [nu_coth(nu, beta) * cs * decay, -nu * sn * decay]
        },
        0.0,
        bath.nu_max(),
        QuadOptions::with_tolerances(1e-15, 1e-11),
    )?;
    Ok(Estimate {
        value: Complex64::new(r.value[0], r.value[1]) * pref,
        error: r.error * pref,
        evaluations: r.evaluations,
    })
}

/// κ = e^{−φ(0)/2}.
pub fn kappa(bath: &BathSpec, omega_dd: f64) -> Result<f64, BathError> {
    Ok((-0.5 * propagator_phi(0.0, bath, omega_dd)?.re).exp())
}
