use std::f64::consts::PI;

use num_complex::Complex64;
use pfme_numerics::{bose, integrate, legendre_rule, nu_coth, QuadOptions};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::{spectral_density, BathError, BathSpec};

/// Moment-matched single mode replacing the permanent-dipole part of the bath.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationMode {
    pub nu_s: f64,
    pub s_s: f64,
    /// +1 for the `e^{+φ}` family, −1 for `e^{−φ}`.
    pub sign: i8,
    pub mu1: f64,
    pub mu2: f64,
}

impl TruncationMode {
    pub fn with_sign(self, sign: i8) -> Self {
        Self { sign: if sign < 0 { -1 } else { 1 }, ..self }
    }
}

/// Truncation mode from the moments `μ_m = 4Ω_ΔΔ ∫ J(ν) ν^{m−2} dν`.
///
/// A bath without permanent-dipole coupling yields `S_s = 0`, whose line
/// spectrum is the identity kernel.
pub fn truncation_mode(bath: &BathSpec, omega_dd: f64) -> Result<TruncationMode, BathError> {
    if !(omega_dd >= 0.0) {
        return Err(BathError::Invalid { field: "omega_dd", reason: "must be non-negative".into() });
    }
    let opts = QuadOptions::with_tolerances(0.0, 1e-12);
    let m = integrate(
        |nu: f64| {
            let j = spectral_density(nu, bath);
            [j / nu.max(f64::MIN_POSITIVE), j]
        },
        0.0,
        bath.nu_max(),
        opts,
    )?;
    let mu1 = 4.0 * omega_dd * m.value[0];
    let mu2 = 4.0 * omega_dd * m.value[1];
    if mu1 <= 0.0 || mu2 <= 0.0 {
        return Ok(TruncationMode { nu_s: 3.0 * bath.cutoff, s_s: 0.0, sign: 1, mu1: 0.0, mu2: 0.0 });
    }
    Ok(TruncationMode { nu_s: mu2 / mu1, s_s: mu1 * mu1 / mu2, sign: 1, mu1, mu2 })
}

/// Weights `A_ℓ` of delta lines at `ℓ·spacing`, for ℓ = first, first+1, ….
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSpectrum {
    pub spacing: f64,
    pub first: i64,
    pub weights: Vec<f64>,
    pub sign: i8,
}

impl LineSpectrum {
    pub fn identity(spacing: f64, sign: i8) -> Self {
        Self { spacing, first: 0, weights: vec![1.0], sign }
    }

    pub fn weight(&self, l: i64) -> f64 {
        let idx = l - self.first;
        if idx < 0 {
            0.0
        } else {
            self.weights.get(idx as usize).copied().unwrap_or(0.0)
        }
    }

    /// `(ℓ, position, weight)` triples.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64, f64)> + '_ {
        self.weights.iter().enumerate().map(move |(i, w)| {
            let l = self.first + i as i64;
            (l, l as f64 * self.spacing, *w)
        })
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn l_max(&self) -> i64 {
        self.first + self.weights.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    fn trimmed(mut self, threshold: f64) -> Self {
        let keep = |w: &f64| w.abs() > threshold;
        let start = self.weights.iter().position(keep).unwrap_or(0);
        let end = self.weights.iter().rposition(keep).map_or(start + 1, |e| e + 1);
        self.weights = self.weights[start..end].to_vec();
        self.first += start as i64;
        self
    }
}

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Σ_q x^{q+l}/(q+l)! · y^q/q! · e^{−x−y}, computed in log space.
fn bessel_like(x: f64, y: f64, l: u64) -> f64 {
    if l > 0 && x == 0.0 {
        return 0.0;
    }
    let lx = if l == 0 { 0.0 } else { l as f64 * x.ln() };
    let mut term = (lx - ln_factorial(l) - x - y).exp();
    let mut sum = term;
    let mut q = 0u64;
    while y > 0.0 {
        term *= x * y / ((q + l + 1) as f64 * (q + 1) as f64);
        sum += term;
        q += 1;
        if term < 1e-18 * sum && (q as f64) > (x * y).sqrt() {
            break;
        }
        if q > 1_000_000 {
            break;
        }
    }
    sum
}

/// Franck–Condon weights of the single truncation mode at inverse temperature `beta`.
pub fn line_weights(mode: &TruncationMode, beta: f64, tail_tol: f64) -> Result<LineSpectrum, BathError> {
    if !(tail_tol > 0.0) {
        return Err(BathError::Invalid { field: "tail_tol", reason: "must be positive".into() });
    }
    if mode.s_s == 0.0 {
        return Ok(LineSpectrum::identity(mode.nu_s, mode.sign));
    }
    let n = bose(mode.nu_s, beta);
    let x = mode.s_s * (n + 1.0);
    let y = mode.s_s * n;
    let sgn = |l: i64| if mode.sign < 0 && l.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
    let mut pos = vec![bessel_like(x, y, 0)];
    let mut neg: Vec<f64> = Vec::new();
    let mut total = pos[0];
    let mut l: u64 = 0;
    loop {
        l += 1;
        let ap = bessel_like(x, y, l);
        let an = bessel_like(y, x, l);
        pos.push(ap);
        neg.push(an);
        total += ap + an;
        let past_peak = (l as f64) > x + 1.0;
        if past_peak && ((1.0 - total).abs() < tail_tol || ap + an < 1e-300) {
            break;
        }
        if l > 100_000 {
            return Err(BathError::Series(format!(
                "tail mass {:.3e} after {l} lines (S_s = {}, N = {n})",
                1.0 - total,
                mode.s_s
            )));
        }
    }
    let lmax = l as i64;
    let mut weights = Vec::with_capacity(2 * l as usize + 1);
    for k in (1..=lmax).rev() {
        weights.push(sgn(-k) * neg[(k - 1) as usize]);
    }
    for (k, w) in pos.iter().enumerate() {
        weights.push(sgn(k as i64) * w);
    }
    Ok(LineSpectrum { spacing: mode.nu_s, first: -lmax, weights, sign: mode.sign }.trimmed(0.0))
}

/// Which discrete-mode representation of the sideband is used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SeriesKind {
    /// One moment-matched mode at `ν_s = μ₂/μ₁`.
    SingleMode,
    /// Equally spaced modes at `k·spacing·ν_c`, k = 1, 2, …, up to 40ν_c.
    Lattice { spacing: f64 },
}

impl Default for SeriesKind {
    fn default() -> Self {
        SeriesKind::Lattice { spacing: 0.01 }
    }
}

/// Weights of `e^{±φ(s)−φ(0)} = Σ_m A_m e^{−i m δ s}` for the bath discretised on a
/// frequency lattice of spacing `delta`.
///
/// The lattice mode k carries the Huang–Rhys factor of its frequency bin; the
/// exponential of the lattice propagator is expanded exactly with a discrete
/// Fourier transform whose length is doubled until aliasing is below `tail_tol`.
pub fn lattice_lines(
    bath: &BathSpec,
    omega_dd: f64,
    delta: f64,
    sign: i8,
    tail_tol: f64,
) -> Result<LineSpectrum, BathError> {
    if !(delta > 0.0) {
        return Err(BathError::Invalid { field: "spacing", reason: "must be positive".into() });
    }
    if omega_dd * bath.huang_rhys == 0.0 {
        return Ok(LineSpectrum::identity(delta, sign));
    }
    let pref = 4.0 * omega_dd * bath.amplitude();
    let nc = bath.cutoff;
    let beta = bath.beta;
    let rule = legendre_rule(8)?;
    let n_modes = (bath.nu_max() / delta).ceil() as usize;
    // (emission, absorption) weights: bin integrals of 4Ω_ΔΔ J(ν)/ν² (N+1) and 4Ω_ΔΔ J(ν)/ν² N
    let modes: Vec<(f64, f64)> = (1..=n_modes)
        .map(|k| {
            let lo = if k == 1 { 0.0 } else { (k as f64 - 0.5) * delta };
            let hi = (k as f64 + 0.5) * delta;
            let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            rule.iter().fold((0.0, 0.0), |(e, a), (x, w)| {
                let nu = c + h * x;
                let g = pref * nu * (-nu / nc).exp() * h * w;
                let thermal = 0.5 * (nu_coth(nu, beta) / nu - 1.0);
                (e + g * (thermal + 1.0), a + g * thermal)
            })
        })
        .collect();
    let sigma = if sign < 0 { -1.0 } else { 1.0 };
    let mut m_len = (4 * n_modes).next_power_of_two().max(1024);
    let mut planner = FftPlanner::<f64>::new();
    loop {
        let mut a = vec![Complex64::new(0.0, 0.0); m_len];
        for (k, (emission, absorption)) in modes.iter().enumerate() {
            a[k + 1] += emission;
            a[m_len - k - 1] += absorption;
        }
        let phi0: f64 = a.iter().map(|z| z.re).sum();
        planner.plan_fft_forward(m_len).process(&mut a);
        for z in a.iter_mut() {
            *z = (sigma * *z - phi0).exp();
        }
        planner.plan_fft_inverse(m_len).process(&mut a);
        let scale = 1.0 / m_len as f64;
        let half = m_len / 2;
        let alias: f64 = (m_len / 4..3 * m_len / 4).map(|m| a[m].norm() * scale).sum();
        if alias < tail_tol || m_len >= 1 << 24 {
            if alias >= tail_tol {
                return Err(BathError::Series(format!("lattice aliasing mass {alias:.3e} at length {m_len}")));
            }
            let first = -(half as i64);
            let weights = (0..m_len)
                .map(|i| {
                    let m = (i as i64 + first).rem_euclid(m_len as i64) as usize;
                    a[m].re * scale
                })
                .collect();
            return Ok(LineSpectrum { spacing: delta, first, weights, sign }.trimmed(1e-17));
        }
        m_len *= 2;
    }
}

/// Line representation for the chosen series kind.
pub fn sideband_lines(
    bath: &BathSpec,
    omega_dd: f64,
    kind: SeriesKind,
    sign: i8,
    tail_tol: f64,
) -> Result<LineSpectrum, BathError> {
    match kind {
        SeriesKind::SingleMode => {
            let mode = truncation_mode(bath, omega_dd)?.with_sign(sign);
            line_weights(&mode, bath.beta, tail_tol)
        }
        SeriesKind::Lattice { spacing } => lattice_lines(bath, omega_dd, spacing * bath.cutoff, sign, tail_tol),
    }
}

/// `K(ε) = Σ_ℓ A_ℓ [δ(ε − E_ℓ) + (i/π) P 1/(ε − E_ℓ)]` as delta lines plus a principal-value part.
#[derive(Debug, Clone, PartialEq)]
pub struct SidebandKernel {
    lines: Vec<(f64, f64)>,
}

pub fn sideband_kernel(lines: &LineSpectrum) -> SidebandKernel {
    SidebandKernel { lines: lines.iter().map(|(_, e, w)| (e, w)).collect() }
}

impl SidebandKernel {
    /// `(position, weight)` of each delta line.
    pub fn delta_lines(&self) -> &[(f64, f64)] {
        &self.lines
    }

    /// Weight of the delta line sitting at `eps`, zero between lines.
    pub fn delta_weight_at(&self, eps: f64) -> f64 {
        let scale = self.lines.iter().map(|(e, _)| e.abs()).fold(1.0, f64::max);
        self.lines
            .iter()
            .filter(|(e, _)| (e - eps).abs() <= 1e-12 * scale)
            .map(|(_, w)| w)
            .sum()
    }

    /// `(1/π) Σ_ℓ A_ℓ P 1/(ε − E_ℓ)`, skipping a line that coincides with `eps`.
    pub fn pv_part(&self, eps: f64) -> f64 {
        self.lines
            .iter()
            .filter(|(e, _)| eps != *e)
            .map(|(e, w)| w / (eps - e))
            .sum::<f64>()
            / PI
    }

    /// Kernel convolved with a normalised Lorentzian of half-width `gamma`.
    pub fn smeared(&self, eps: f64, gamma: f64) -> Complex64 {
        self.lines
            .iter()
            .map(|(e, w)| {
                let d = eps - e;
                let den = d * d + gamma * gamma;
                Complex64::new(gamma, d) * (w / (PI * den))
            })
            .sum()
    }
}
