use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use pfme_bath::{spectral_density, BathSpec};
use pfme_model::{build_eigenframe, clean_cos, coupling_weights, CouplingWeights, DipoleGeometry, EigenFrame, SystemParams};
use pfme_numerics::{bose, composite_rule, legendre_rule, nu_coth, uniform_edges};
use pfme_rates::{Channel, CorrKind, Frame, GammaTable, RateComponent, RateSet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::OracleError;

const ORDER: usize = 16;
const PRODUCTS: usize = 7;
const TAIL_POWERS: [i32; 5] = [2, 3, 4, 5, 6];

/// Generalised exponential integral `E_n(z) = ∫_1^∞ e^{−zt} t^{−n} dt` for `n ≥ 2`.
fn expint(n: u32, z: Complex64) -> Complex64 {
    const EPS: f64 = 1e-16;
    let nf = n as f64;
    if z.norm() == 0.0 {
        return Complex64::new(1.0 / (nf - 1.0), 0.0);
    }
    if z.norm() > 1.0 {
        let tiny = 1e-300;
        let mut b = z + nf;
        let mut c = Complex64::new(1.0 / tiny, 0.0);
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let a = -(i as f64) * (nf - 1.0 + i as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).norm() < EPS {
                break;
            }
        }
        return h * (-z).exp();
    }
    let euler = 0.577_215_664_901_532_9;
    let psi = -euler + (1..n).map(|m| 1.0 / m as f64).sum::<f64>();
    let mut fact = 1.0;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut power = Complex64::new(1.0, 0.0);
    let mut k = 0u32;
    let mut special = Complex64::new(0.0, 0.0);
    loop {
        if k == n - 1 {
            special = power / fact * (psi - z.ln());
        } else {
            let term = -power / ((k as f64 - nf + 1.0) * fact);
            sum += term;
            if k > n && term.norm() < EPS * sum.norm() {
                break;
            }
        }
        k += 1;
        fact *= k as f64;
        power *= -z;
    }
    sum + special
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    /// Largest |ω| the time grid must resolve; `None` uses `4·max(η, ν_c)`.
    pub omega_max: Option<f64>,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { omega_max: None }
    }
}

/// Transform value with the magnitude of its tail correction as error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub component: RateComponent,
    pub error: f64,
}

/// Frequency nodes with the weights of `φ`, `X` and `Y` folded in.
#[derive(Debug, Clone)]
struct FrequencyNodes {
    nu: Vec<f64>,
    phi_c: Vec<f64>,
    phi_s: Vec<f64>,
    x_em: Vec<f64>,
    x_abs: Vec<f64>,
    y_em: Vec<f64>,
    y_abs: Vec<f64>,
}

impl FrequencyNodes {
    fn new(bath: &BathSpec, omega_dd: f64, s_max: f64) -> Result<Self, OracleError> {
        let width = (0.25 * bath.cutoff).min(std::f64::consts::PI / s_max);
        let rule = composite_rule(&uniform_edges(0.0, bath.nu_max(), width), &legendre_rule(ORDER)?);
        let mut n = Self {
            nu: vec![],
            phi_c: vec![],
            phi_s: vec![],
            x_em: vec![],
            x_abs: vec![],
            y_em: vec![],
            y_abs: vec![],
        };
        for (nu, w) in rule {
            let j = spectral_density(nu, bath);
            let occ = bose(nu, bath.beta);
            n.nu.push(nu);
            n.phi_c.push(4.0 * omega_dd * w * j / (nu * nu * nu) * nu_coth(nu, bath.beta));
            n.phi_s.push(4.0 * omega_dd * w * j / (nu * nu));
            n.x_em.push(w * j / nu * (occ + 1.0));
            n.x_abs.push(w * j / nu * occ);
            n.y_em.push(w * j * (occ + 1.0));
            n.y_abs.push(w * j * occ);
        }
        Ok(n)
    }

    /// `(φ(s), X(s), Y(s))` for real `s`.
    fn eval(&self, s: f64) -> (Complex64, Complex64, Complex64) {
        let (mut pr, mut pi) = (0.0, 0.0);
        let (mut xr, mut xi) = (0.0, 0.0);
        let (mut yr, mut yi) = (0.0, 0.0);
        for k in 0..self.nu.len() {
            let (sn, cs) = (self.nu[k] * s).sin_cos();
            pr += self.phi_c[k] * cs;
            pi -= self.phi_s[k] * sn;
            xr += (self.x_em[k] - self.x_abs[k]) * cs;
            xi -= (self.x_em[k] + self.x_abs[k]) * sn;
            yr += (self.y_em[k] + self.y_abs[k]) * cs;
            yi -= (self.y_em[k] - self.y_abs[k]) * sn;
        }
        (Complex64::new(pr, pi), Complex64::new(xr, xi), Complex64::new(yr, yi))
    }
}

fn expm1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        z * (1.0 + z / 2.0 * (1.0 + z / 3.0 * (1.0 + z / 4.0 * (1.0 + z / 5.0))))
    } else {
        z.exp() - 1.0
    }
}

/// Direct-quadrature evaluation of the four correlation transforms.
///
/// The bath functions are built from frequency integrals on a fixed
/// Gauss–Legendre grid, the time integral runs along the real axis up to
/// `S = max(40/ν_c, 12β)`, and the remainder follows from an inverse-power
/// fit of the integrand on `[S/2, S]` integrated with exponential integrals.
#[derive(Debug, Clone)]
pub struct CorrOracle {
    pub weights: CouplingWeights,
    pub frame: EigenFrame,
    kappa_sq: f64,
    drive: f64,
    cos_rel: f64,
    pair_phase: Complex64,
    omega_max: f64,
    s_max: f64,
    freq: FrequencyNodes,
    nodes: Vec<(f64, f64)>,
    values: Vec<[Complex64; PRODUCTS]>,
}

impl CorrOracle {
    pub fn new(sys: &SystemParams, geom: &DipoleGeometry, bath: &BathSpec, opts: OracleOptions) -> Result<Self, OracleError> {
        if (sys.beta - bath.beta).abs() > 1e-12 * sys.beta {
            return Err(OracleError::Invalid("system and bath temperatures differ".into()));
        }
        let weights = coupling_weights(geom);
        let s_max = (40.0 / bath.cutoff).max(12.0 * bath.beta);
        let freq = FrequencyNodes::new(bath, weights.omega_deltadelta, s_max)?;
        let phi0: f64 = freq.phi_c.iter().sum();
        let kappa_sq = (-phi0).exp();
        let frame = build_eigenframe(sys, kappa_sq.sqrt())?;
        let omega_max = opts.omega_max.unwrap_or(4.0 * frame.eta.max(bath.cutoff));
        let width = std::f64::consts::PI / (omega_max + 20.0 * bath.cutoff);
        let nodes = composite_rule(&uniform_edges(0.0, s_max, width), &legendre_rule(ORDER)?);
        let rel = geom.relative_phase(sys);
        let mut oracle = Self {
            weights,
            frame,
            kappa_sq,
            drive: sys.drive_magnitude,
            cos_rel: clean_cos(rel),
            pair_phase: Complex64::from_polar(1.0, -2.0 * rel),
            omega_max,
            s_max,
            freq,
            nodes,
            values: vec![],
        };
        oracle.values = oracle.nodes.par_iter().map(|(s, _)| oracle.products(*s)).collect();
        Ok(oracle)
    }

    pub fn kappa_sq(&self) -> f64 {
        self.kappa_sq
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    /// `κ²e^{φ}Y, κ²e^{φ}X², κ²e^{φ}X, κ²(e^{φ}−1), κ²e^{−φ}Y, κ²e^{−φ}X², κ²(e^{−φ}−1)`.
    fn products(&self, s: f64) -> [Complex64; PRODUCTS] {
        let (phi, x, y) = self.freq.eval(s);
        let k2 = self.kappa_sq;
        let (ep1, em1) = (expm1(phi), expm1(-phi));
        let (ep, em) = (k2 * (ep1 + 1.0), k2 * (em1 + 1.0));
        [ep * y, ep * x * x, ep * x, k2 * ep1, em * y, em * x * x, k2 * em1]
    }

    fn combine(&self, kind: CorrKind, p: &[Complex64; PRODUCTS]) -> [Complex64; 4] {
        let zero = Complex64::new(0.0, 0.0);
        let w = self.weights.omega_mudelta * self.weights.cos_theta;
        let v = self.drive;
        let v1 = 4.0 * v * w * self.cos_rel;
        let mumu = self.weights.omega_mumu;
        match kind {
            CorrKind::DagDot | CorrKind::DotDag => {
                let sign = if kind == CorrKind::DagDot { 1.0 } else { -1.0 };
                [mumu * p[0], 4.0 * w * w * p[1], sign * v1 * p[2], v * v * p[3]]
            }
            CorrKind::DagDag | CorrKind::DotDot => {
                let phase = if kind == CorrKind::DagDag { self.pair_phase } else { self.pair_phase.conj() };
                [phase * mumu * p[4], -phase * 4.0 * w * w * p[5], zero, v * v * p[6]]
            }
        }
    }

    /// Time-domain correlation function `⟨A(s)B(0)⟩` split into its four parts.
    pub fn correlation(&self, kind: CorrKind, s: f64) -> RateComponent {
        let [a, b, c, d] = self.combine(kind, &self.products(s));
        RateComponent::from_parts(a, b, c, d)
    }

    /// Coefficients `c_p` of `f(s) ≈ Σ_p c_p (S/s)^p` fitted on `[S/2, S]`.
    fn tail_fit(&self, powers: &[i32]) -> Vec<[Complex64; PRODUCTS]> {
        let s = self.s_max;
        let n = powers.len();
        let pts: Vec<f64> = (0..n).map(|j| s * (0.5 + 0.5 * j as f64 / (n - 1) as f64)).collect();
        let vals: Vec<[Complex64; PRODUCTS]> = pts.iter().map(|&t| self.products(t)).collect();
        let lu = DMatrix::from_fn(n, n, |r, c| Complex64::new((s / pts[r]).powi(powers[c]), 0.0)).lu();
        let mut coeffs = vec![[Complex64::new(0.0, 0.0); PRODUCTS]; n];
        for i in 0..PRODUCTS {
            let rhs = DVector::from_fn(n, |r, _| vals[r][i]);
            let c = lu.solve(&rhs).expect("distinct fit points");
            for (k, row) in coeffs.iter_mut().enumerate() {
                row[i] = c[k];
            }
        }
        coeffs
    }

    /// `∫_S^∞ e^{iωs} f(s) ds` from the algebraic tail fit, with the change
    /// between fit orders as error estimate.
    fn tail(&self, omega: f64) -> ([Complex64; PRODUCTS], f64) {
        let z = Complex64::new(0.0, -omega * self.s_max);
        let integrate = |powers: &[i32]| {
            let coeffs = self.tail_fit(powers);
            let mut acc = [Complex64::new(0.0, 0.0); PRODUCTS];
            for (p, c) in powers.iter().zip(&coeffs) {
                let e = self.s_max * expint(*p as u32, z);
                for i in 0..PRODUCTS {
                    acc[i] += c[i] * e;
                }
            }
            acc
        };
        let coarse = integrate(&TAIL_POWERS[..TAIL_POWERS.len() - 1]);
        let fine = integrate(&TAIL_POWERS);
        let err = (0..PRODUCTS).map(|i| (fine[i] - coarse[i]).norm()).fold(0.0, f64::max);
        (fine, err)
    }

    /// `∫_0^∞ e^{iωs} ⟨A(s)B(0)⟩ ds` for one correlation kind.
    pub fn corr_ft(&self, kind: CorrKind, omega: f64) -> Result<OracleEstimate, OracleError> {
        Ok(self.corr_all(omega)?[CorrKind::ALL.iter().position(|k| *k == kind).expect("listed")])
    }

    /// All four transforms at one frequency, ordered as [`CorrKind::ALL`].
    pub fn corr_all(&self, omega: f64) -> Result<[OracleEstimate; 4], OracleError> {
        if omega.abs() > self.omega_max * (1.0 + 1e-12) {
            return Err(OracleError::Invalid(format!(
                "|ω| = {} exceeds the resolved range {}",
                omega.abs(),
                self.omega_max
            )));
        }
        let mut body = [Complex64::new(0.0, 0.0); PRODUCTS];
        for ((s, w), f) in self.nodes.iter().zip(&self.values) {
            let k = Complex64::from_polar(*w, omega * s);
            for i in 0..PRODUCTS {
                body[i] += k * f[i];
            }
        }
        let (tail, tail_err) = self.tail(omega);
        let total: [Complex64; PRODUCTS] = std::array::from_fn(|i| body[i] + tail[i]);
        let scale = self.combine(CorrKind::DagDot, &[Complex64::new(1.0, 0.0); PRODUCTS])
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        Ok(CorrKind::ALL.map(|kind| {
            let [a, b, c, d] = self.combine(kind, &total);
            OracleEstimate { component: RateComponent::from_parts(a, b, c, d), error: tail_err * scale }
        }))
    }

    /// `(a_α, b_α)` in `g_α = a_α C + b_α C†`.
    fn coefficients(&self, alpha: Channel) -> (f64, f64) {
        let (c, s) = (self.frame.cos_half(), self.frame.sin_half());
        match alpha {
            Channel::Plus => (c * c, -s * s),
            Channel::Minus => (-s * s, c * c),
            Channel::Z => (s * c, s * c),
        }
    }

    pub fn gamma_table(&self) -> Result<GammaTable, OracleError> {
        let eta = self.frame.eta;
        let corr = [self.corr_all(-eta)?, self.corr_all(0.0)?, self.corr_all(eta)?];
        GammaTable::build(eta, |a, b, w| {
            let k = if w < 0.0 {
                0
            } else if w == 0.0 {
                1
            } else {
                2
            };
            let (aa, ba) = self.coefficients(a);
            let (ab, bb) = self.coefficients(b);
            let coeff = [aa * ab, ba * bb, aa * bb, ba * ab];
            Ok::<_, OracleError>(coeff.iter().zip(&corr[k]).map(|(c, e)| *c * e.component.total).sum())
        })
    }
}

/// One transform from a freshly built oracle resolving `|ω|`.
pub fn numeric_corr_ft(
    kind: CorrKind,
    omega: f64,
    sys: &SystemParams,
    geom: &DipoleGeometry,
    bath: &BathSpec,
) -> Result<OracleEstimate, OracleError> {
    let probe = CorrOracle::new(sys, geom, bath, OracleOptions::default())?;
    if omega.abs() <= probe.omega_max() {
        return probe.corr_ft(kind, omega);
    }
    let opts = OracleOptions { omega_max: Some(omega.abs()), ..OracleOptions::default() };
    CorrOracle::new(sys, geom, bath, opts)?.corr_ft(kind, omega)
}

/// Polaron-frame rate set assembled from oracle transforms.
pub fn oracle_rate_set(
    sys: &SystemParams,
    geom: &DipoleGeometry,
    bath: &BathSpec,
    opts: OracleOptions,
) -> Result<RateSet, OracleError> {
    let oracle = CorrOracle::new(sys, geom, bath, opts)?;
    let table = oracle.gamma_table()?;
    Ok(RateSet::from_table(Frame::Polaron, oracle.frame.mixing_angle, oracle.frame.kappa, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use pfme_numerics::{integrate, QuadOptions};

    #[test]
    fn exponential_integral_matches_quadrature() {
        for w in [0.05, 0.7, 3.0] {
            let direct = integrate(
                |t: f64| Complex64::from_polar(t.powi(-6), w * t),
                1.0,
                400.0,
                QuadOptions { abs_tol: 1e-15, rel_tol: 1e-12, max_intervals: 20_000 },
            )
            .unwrap();
            assert!((expint(6, Complex64::new(0.0, -w)) - direct.value).norm() < 1e-12, "w={w}");
        }
        assert!((expint(3, Complex64::new(0.0, 0.0)) - 0.5).norm() < 1e-15);
    }

    #[test]
    fn exponential_integral_recurrence_holds_across_branches() {
        for w in [0.1, 0.9, 1.1, 5.0, 40.0] {
            let z = Complex64::new(0.0, -w);
            for n in 2u32..6 {
                let lhs = n as f64 * expint(n + 1, z);
                let rhs = (-z).exp() - z * expint(n, z);
                assert!((lhs - rhs).norm() < 1e-13, "n={n} w={w}");
            }
        }
    }
}
