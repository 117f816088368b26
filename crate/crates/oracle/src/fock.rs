use nalgebra::DMatrix;
use num_complex::Complex64;
use pfme_rates::CorrKind;
use serde::{Deserialize, Serialize};

use crate::OracleError;

/// One field mode with its three dipole couplings, for brute-force checks of
/// the correlation functions in a truncated Fock space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleMode {
    pub nu: f64,
    pub mu: Complex64,
    pub mu_bar: Complex64,
    pub delta: Complex64,
    pub drive_magnitude: f64,
    pub drive_phase: f64,
    pub beta: f64,
    pub cutoff: usize,
}

fn annihilation(n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |i, j| if j == i + 1 { Complex64::new((j as f64).sqrt(), 0.0) } else { Complex64::new(0.0, 0.0) })
}

fn displacement(a: &DMatrix<Complex64>, alpha: Complex64) -> DMatrix<Complex64> {
    let ad = a.adjoint();
    (ad * alpha - a * alpha.conj()).exp()
}

impl SingleMode {
    fn validate(&self) -> Result<(), OracleError> {
        if !(self.nu > 0.0 && self.beta > 0.0) {
            return Err(OracleError::Invalid("mode energy and beta must be positive".into()));
        }
        if self.cutoff < 2 {
            return Err(OracleError::Invalid("Fock cutoff must be at least 2".into()));
        }
        Ok(())
    }

    /// Fluctuation operator `B(δ) π B(δ) e^{−iϑ_V} + |V| B(2δ) − ⟨·⟩` with
    /// `π = μ a† + μ̄* a` and `δ = Δ/ν`, plus the thermal populations.
    fn operator(&self) -> (DMatrix<Complex64>, Vec<f64>) {
        let n = self.cutoff + 1;
        let a = annihilation(n);
        let delta = self.delta / self.nu;
        let b1 = displacement(&a, delta);
        let b2 = displacement(&a, 2.0 * delta);
        let pi = a.adjoint() * self.mu + &a * self.mu_bar.conj();
        let mut c = &b1 * pi * &b1 * Complex64::from_polar(1.0, -self.drive_phase) + b2 * Complex64::new(self.drive_magnitude, 0.0);

        let x = (-self.beta * self.nu).exp();
        let mut rho: Vec<f64> = (0..n).map(|k| x.powi(k as i32)).collect();
        let z: f64 = rho.iter().sum();
        rho.iter_mut().for_each(|r| *r /= z);

        let mean: Complex64 = (0..n).map(|k| c[(k, k)] * rho[k]).sum();
        for k in 0..n {
            c[(k, k)] -= mean;
        }
        (c, rho)
    }
}

/// `⟨A(s) B(0)⟩` for the requested pair of fluctuation operators at the given times.
pub fn fock_correlation(mode: &SingleMode, kind: CorrKind, times: &[f64]) -> Result<Vec<Complex64>, OracleError> {
    mode.validate()?;
    let (c, rho) = mode.operator();
    let cd = c.adjoint();
    let (first, second) = match kind {
        CorrKind::DagDot => (&cd, &c),
        CorrKind::DotDag => (&c, &cd),
        CorrKind::DagDag => (&cd, &cd),
        CorrKind::DotDot => (&c, &c),
    };
    let n = rho.len();
    Ok(times
        .iter()
        .map(|&s| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &r) in rho.iter().enumerate() {
                if r < 1e-300 {
                    continue;
                }
                for m in 0..n {
                    let phase = Complex64::from_polar(1.0, mode.nu * (k as f64 - m as f64) * s);
                    acc += r * phase * first[(k, m)] * second[(m, k)];
                }
            }
            acc
        })
        .collect())
}
