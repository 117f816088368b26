use nalgebra::DMatrix;
use num_complex::Complex64;
use pfme_model::SystemParams;
use serde::{Deserialize, Serialize};

use crate::{DiscreteBath, OracleError};

/// Per-mode photon-number cutoffs and the largest admissible dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockConfig {
    pub cutoffs: Vec<usize>,
    pub max_dim: usize,
}

impl FockConfig {
    pub fn uniform(modes: usize, cutoff: usize) -> Self {
        Self { cutoffs: vec![cutoff; modes], max_dim: 4096 }
    }

    /// Bath dimension `Π(n_k + 1)`.
    pub fn bath_dim(&self) -> usize {
        self.cutoffs.iter().map(|c| c + 1).product()
    }

    pub fn dim(&self) -> usize {
        2 * self.bath_dim()
    }

    pub fn validate(&self, modes: usize) -> Result<(), OracleError> {
        if self.cutoffs.len() != modes {
            return Err(OracleError::Invalid(format!(
                "{} cutoffs supplied for {modes} modes",
                self.cutoffs.len()
            )));
        }
        if self.cutoffs.iter().any(|&c| c < 1) {
            return Err(OracleError::Invalid("every Fock cutoff must be at least 1".into()));
        }
        let dim = self
            .cutoffs
            .iter()
            .try_fold(2usize, |acc, c| acc.checked_mul(c + 1))
            .unwrap_or(usize::MAX);
        if dim > self.max_dim {
            return Err(OracleError::DimensionOverflow { dim, max: self.max_dim });
        }
        Ok(())
    }

    /// Occupation numbers of bath index `b` in mixed radix, first mode slowest.
    pub fn occupations(&self, mut b: usize) -> Vec<usize> {
        let mut occ = vec![0; self.cutoffs.len()];
        for (k, c) in self.cutoffs.iter().enumerate().rev() {
            occ[k] = b % (c + 1);
            b /= c + 1;
        }
        occ
    }

    pub fn stride(&self, k: usize) -> usize {
        self.cutoffs[k + 1..].iter().map(|c| c + 1).product()
    }
}

/// Dense `H̄` on `{e, g} ⊗ Fock`, index `s·D_B + b` with `s = 0` for `e`.
#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    pub matrix: DMatrix<Complex64>,
    pub config: FockConfig,
    pub nu: Vec<f64>,
    pub eps_tilde: f64,
    pub v_tilde: Complex64,
}

impl EffectiveHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn bath_dim(&self) -> usize {
        self.config.bath_dim()
    }

    /// Largest `|H − H†|` entry.
    pub fn hermiticity_defect(&self) -> f64 {
        let h = &self.matrix;
        let mut worst = 0.0f64;
        for i in 0..h.nrows() {
            for j in 0..h.ncols() {
                worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

/// Assembles `H̄ = (ε̃/2)σ_z + Ṽσ₊ + Ṽ*σ₋ + Σν_k b_k†b_k + π′_ΔΔ(1+σ_z) + π′_μμ̄σ₊ + π′_μ̄μσ₋`.
///
/// `π′_pq = Σ_k (p_k b_k† + q_k* b_k)`, `ε̃ = ε + 2G_ΔΔ`, `Ṽ = V + G_μμ̄` with
/// `G_pq = Σ_k (p_k δ_k* + q_k* δ_k)` and `δ_k = Δ_k/ν_k`.
pub fn build_effective_hamiltonian(
    db: &DiscreteBath,
    sys: &SystemParams,
    fc: &FockConfig,
) -> Result<EffectiveHamiltonian, OracleError> {
    fc.validate(db.len())?;
    let eps_tilde = sys.epsilon + 2.0 * db.g_pq(&db.delta, &db.delta).re;
    let v = Complex64::from_polar(sys.drive_magnitude, sys.drive_phase);
    let v_tilde = v + db.g_pq(&db.mu, &db.mu_bar);

    let nb = fc.bath_dim();
    let dim = 2 * nb;
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    let (e, g) = (0usize, nb);

    for b in 0..nb {
        let occ = fc.occupations(b);
        let free: f64 = occ.iter().zip(&db.nu).map(|(&n, nu)| n as f64 * nu).sum();
        h[(e + b, e + b)] += Complex64::new(0.5 * eps_tilde + free, 0.0);
        h[(g + b, g + b)] += Complex64::new(-0.5 * eps_tilde + free, 0.0);
        h[(e + b, g + b)] += v_tilde;
        h[(g + b, e + b)] += v_tilde.conj();

        for k in 0..db.len() {
            if occ[k] == fc.cutoffs[k] {
                continue;
            }
            // ⟨n+1| b† |n⟩
            let up = b + fc.stride(k);
            let amp = ((occ[k] + 1) as f64).sqrt();
            let dk = 2.0 * db.delta[k] * amp;
            h[(e + up, e + b)] += dk;
            h[(e + b, e + up)] += dk.conj();
            // σ₊ ⊗ (μ_k b† + μ̄_k* b)
            h[(e + up, g + b)] += db.mu[k] * amp;
            h[(e + b, g + up)] += db.mu_bar[k].conj() * amp;
            // σ₋ ⊗ (μ̄_k b† + μ_k* b)
            h[(g + up, e + b)] += db.mu_bar[k] * amp;
            h[(g + b, e + up)] += db.mu[k].conj() * amp;
        }
    }
    Ok(EffectiveHamiltonian { matrix: h, config: fc.clone(), nu: db.nu.clone(), eps_tilde, v_tilde })
}
