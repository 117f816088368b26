use num_complex::Complex64;
use pfme_bath::{spectral_density, BathSpec};
use pfme_model::DipoleGeometry;
use pfme_numerics::{integrate, QuadOptions};
use serde::{Deserialize, Serialize};

use crate::OracleError;

/// Relative errors of the discrete bath's moments against the continuum.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MomentErrors {
    /// `λ = ∫ J/ν`
    pub lambda: f64,
    /// `μ₁ ∝ ∫ J/ν`
    pub mu1: f64,
    /// `μ₂ ∝ ∫ J`
    pub mu2: f64,
}

/// Finite set of field modes with per-channel couplings `p_k = i f_k (d_p·e_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteBath {
    pub nu: Vec<f64>,
    /// `∫_bin J(ν) dν`, the squared coupling per unit dipole weight.
    pub weight: Vec<f64>,
    pub mu: Vec<Complex64>,
    pub mu_bar: Vec<Complex64>,
    pub delta: Vec<Complex64>,
    pub d: Vec<Complex64>,
    pub beta: f64,
    pub moment_errors: MomentErrors,
}

impl DiscreteBath {
    pub fn len(&self) -> usize {
        self.nu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nu.is_empty()
    }

    /// `G_pq = Σ_k (p_k δ_k* + q_k* δ_k)` with `δ_k = Δ_k/ν_k`.
    pub fn g_pq(&self, p: &[Complex64], q: &[Complex64]) -> Complex64 {
        (0..self.len())
            .map(|k| {
                let dk = self.delta[k] / self.nu[k];
                p[k] * dk.conj() + q[k].conj() * dk
            })
            .sum()
    }
}

/// `∫_0^x t² e^{−t} dt`
fn lower2(x: f64) -> f64 {
    if x.is_infinite() {
        2.0
    } else {
        2.0 - (-x).exp() * (x * x + 2.0 * x + 2.0)
    }
}

/// `∫_0^x t³ e^{−t} dt`
fn lower3(x: f64) -> f64 {
    if x.is_infinite() {
        6.0
    } else {
        6.0 - (-x).exp() * (x * x * x + 3.0 * x * x + 6.0 * x + 6.0)
    }
}

fn invert_lower2(target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 200.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if lower2(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Splits the spectral density into `n` bins of equal reorganisation energy.
///
/// Each mode sits at the bin's `∫J / ∫(J/ν)` and carries `∫_bin J`, so `λ`,
/// `μ₁` and `μ₂` are reproduced exactly; `n = 1` gives the truncation mode.
pub fn discretise_bath(bath: &BathSpec, geom: &DipoleGeometry, n: usize) -> Result<DiscreteBath, OracleError> {
    if n == 0 {
        return Err(OracleError::Invalid("at least one mode is required".into()));
    }
    let c = geom.theta_mu_delta.cos();
    if geom.d_delta > 0.0 && geom.d_mu > 0.0 && (c.abs() - 1.0).abs() > 1e-12 {
        return Err(OracleError::NonCollinear);
    }
    let empty = DiscreteBath {
        nu: vec![],
        weight: vec![],
        mu: vec![],
        mu_bar: vec![],
        delta: vec![],
        d: vec![],
        beta: bath.beta,
        moment_errors: MomentErrors::default(),
    };
    if bath.huang_rhys == 0.0 {
        return Ok(empty);
    }
    let nc = bath.cutoff;
    let a = bath.amplitude();
    let edges: Vec<f64> = (0..=n)
        .map(|j| if j == n { f64::INFINITY } else { invert_lower2(2.0 * j as f64 / n as f64) })
        .collect();
    let mut nu = Vec::with_capacity(n);
    let mut weight = Vec::with_capacity(n);
    for w in edges.windows(2) {
        let lam = a * nc.powi(3) * (lower2(w[1]) - lower2(w[0]));
        let j = a * nc.powi(4) * (lower3(w[1]) - lower3(w[0]));
        nu.push(j / lam);
        weight.push(j);
    }

    let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-12, max_intervals: 500 };
    let top = bath.nu_max();
    let lam_c = integrate(|x: f64| spectral_density(x, bath) / x, 0.0, top, opts)?.value;
    let mu2_c = integrate(|x: f64| spectral_density(x, bath), 0.0, top, opts)?.value;
    let lam_d: f64 = nu.iter().zip(&weight).map(|(v, g)| g / v).sum();
    let mu2_d: f64 = weight.iter().sum();
    let rel = |d: f64, c: f64| (d - c).abs() / c;
    let moment_errors = MomentErrors { lambda: rel(lam_d, lam_c), mu1: rel(lam_d, lam_c), mu2: rel(mu2_d, mu2_c) };

    let f = geom.solid_angle.factor().sqrt();
    let i = Complex64::i();
    let sign = if c < 0.0 { -1.0 } else { 1.0 };
    let amp = |d: f64, phase: f64| -> Vec<Complex64> {
        weight.iter().map(|g| i * Complex64::from_polar(f * d * g.sqrt(), phase)).collect()
    };
    Ok(DiscreteBath {
        mu: amp(geom.d_mu, geom.vartheta_mu),
        mu_bar: amp(geom.d_mu, -geom.vartheta_mu),
        delta: amp(sign * geom.d_delta, 0.0),
        d: amp(geom.d_d, 0.0),
        nu,
        weight,
        moment_errors,
        ..empty
    })
}
