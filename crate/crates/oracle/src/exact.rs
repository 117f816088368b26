use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use pfme_dynamics::{Basis, DensityMatrix, Equation, FrameTag, Trajectory};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{EffectiveHamiltonian, OracleError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleOptions {
    /// Gibbs weight that may be left out of the thermal ensemble.
    pub discard_tol: f64,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        Self { discard_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExactRun {
    pub trajectory: Trajectory,
    /// Thermal weight outside the propagated ensemble, including the part
    /// beyond the Fock cutoffs.
    pub discarded_weight: f64,
    pub members: usize,
    /// Largest deviation of any member's norm from one.
    pub max_norm_drift: f64,
}

/// Thermal ensemble members `(bath index, weight)` sorted by weight, before renormalisation.
fn ensemble(h: &EffectiveHamiltonian, beta: f64, tol: f64) -> (Vec<(usize, f64)>, f64) {
    let fc = &h.config;
    // normalised against the untruncated Gibbs distribution
    let z: f64 = h.nu.iter().map(|nu| 1.0 - (-beta * nu).exp()).product();
    let mut members: Vec<(usize, f64)> = (0..fc.bath_dim())
        .map(|b| {
            let energy: f64 = fc.occupations(b).iter().zip(&h.nu).map(|(&n, nu)| n as f64 * nu).sum();
            (b, (-beta * energy).exp() * z)
        })
        .collect();
    members.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut kept = 0.0;
    let mut count = 0;
    for (_, w) in &members {
        if 1.0 - kept < tol {
            break;
        }
        kept += w;
        count += 1;
    }
    members.truncate(count.max(1));
    let kept: f64 = members.iter().map(|m| m.1).sum();
    (members, (1.0 - kept).max(0.0))
}

/// Propagates `|g⟩⟨g| ⊗ ρ_th` under `H̄` by diagonalisation and returns the
/// reduced emitter state in the bare `(e, g)` basis.
pub fn exact_evolve(
    h: &EffectiveHamiltonian,
    beta: f64,
    times: &[f64],
    opts: &EnsembleOptions,
) -> Result<ExactRun, OracleError> {
    if times.is_empty() || times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(OracleError::Invalid("time grid must be non-empty and non-negative".into()));
    }
    if !(beta > 0.0) {
        return Err(OracleError::Invalid("beta must be positive".into()));
    }
    let nb = h.bath_dim();
    let eig = h.matrix.clone().symmetric_eigen();
    let u: DMatrix<Complex64> = eig.eigenvectors;
    let energies: DVector<f64> = eig.eigenvalues;

    let (members, discarded) = ensemble(h, beta, opts.discard_tol);
    let total: f64 = members.iter().map(|m| m.1).sum();

    let results: Vec<(Vec<[[Complex64; 2]; 2]>, f64)> = members
        .par_iter()
        .map(|&(b, w)| {
            let start = nb + b;
            let c0: DVector<Complex64> = u.row(start).transpose().map(|z| z.conj());
            let mut drift = 0.0f64;
            let states = times
                .iter()
                .map(|&t| {
                    let ct = DVector::from_fn(c0.len(), |i, _| c0[i] * Complex64::from_polar(1.0, -energies[i] * t));
                    let psi = &u * ct;
                    drift = drift.max((psi.norm() - 1.0).abs());
                    let mut rho = [[Complex64::new(0.0, 0.0); 2]; 2];
                    for (i, row) in rho.iter_mut().enumerate() {
                        for (j, entry) in row.iter_mut().enumerate() {
                            *entry = (0..nb).map(|k| psi[i * nb + k] * psi[j * nb + k].conj()).sum::<Complex64>()
                                * (w / total);
                        }
                    }
                    rho
                })
                .collect();
            (states, drift)
        })
        .collect();

    let mut acc = vec![[[Complex64::new(0.0, 0.0); 2]; 2]; times.len()];
    let mut max_norm_drift = 0.0f64;
    for (states, drift) in results {
        max_norm_drift = max_norm_drift.max(drift);
        for (a, s) in acc.iter_mut().zip(states) {
            for i in 0..2 {
                for j in 0..2 {
                    a[i][j] += s[i][j];
                }
            }
        }
    }
    let states = acc.into_iter().map(|m| DensityMatrix::new(Basis::Bare, m)).collect();
    Ok(ExactRun {
        trajectory: Trajectory { times: times.to_vec(), states, frame: FrameTag::Lab, equation: Equation::Exact },
        discarded_weight: discarded,
        members: members.len(),
        max_norm_drift,
    })
}
