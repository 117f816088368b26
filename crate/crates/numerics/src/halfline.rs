//! Quadrature rules for one-sided Fourier transforms `∫_0^∞ e^{iωs} f(s) ds`
//! of functions that are analytic off the imaginary axis.
//!
//! The contour runs along the real axis up to `s_cut` and then turns parallel
//! to the imaginary axis, upwards for ω ≥ 0 and downwards for ω < 0, where
//! `e^{iωs}` decays exponentially.

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use crate::NumericsError;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn legendre_rule(order: usize) -> Result<Vec<(f64, f64)>, NumericsError> {
    let degree = std::num::NonZeroUsize::new(order).ok_or(NumericsError::InvalidOrder(order))?;
    let rule = GaussLegendre::new(degree);
    let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs)
}

/// Composite Gauss–Legendre rule over consecutive edges.
pub fn composite_rule(edges: &[f64], rule: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(edges.len().saturating_sub(1) * rule.len());
    for w in edges.windows(2) {
        let c = 0.5 * (w[0] + w[1]);
        let h = 0.5 * (w[1] - w[0]);
        out.extend(rule.iter().map(|(x, wt)| (c + h * x, h * wt)));
    }
    out
}

/// Uniform panel edges covering `[a, b]` with panels no wider than `width`.
pub fn uniform_edges(a: f64, b: f64, width: f64) -> Vec<f64> {
    let n = ((b - a) / width).ceil().max(1.0) as usize;
    (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect()
}

/// Node set for the one-sided transform.
#[derive(Debug, Clone)]
pub struct HalfLineRule {
    pub s_cut: f64,
    /// Real-axis nodes `(s, w)`.
    pub real: Vec<(f64, f64)>,
    /// Vertical-branch nodes `(s, ds)` above the real axis, `s = s_cut + i y`.
    pub upper: Vec<(Complex64, Complex64)>,
    /// Vertical-branch nodes below the real axis, `s = s_cut − i y`.
    pub lower: Vec<(Complex64, Complex64)>,
}

const T_EDGES: [f64; 14] = [
    0.0, 1e-5, 1e-4, 1e-3, 5e-3, 0.02, 0.06, 0.15, 0.3, 0.5, 0.7, 0.85, 0.95, 1.0,
];

impl HalfLineRule {
    /// Builds the rule with real-axis panels of width `panel`, up to `s_cut`.
    pub fn new(s_cut: f64, panel: f64, order: usize) -> Result<Self, NumericsError> {
        if !(s_cut > 0.0 && panel > 0.0) {
            return Err(NumericsError::InvalidInterval { a: 0.0, b: s_cut });
        }
        let rule = legendre_rule(order)?;
        let real = composite_rule(&uniform_edges(0.0, s_cut, panel), &rule);
        let tnodes = composite_rule(&T_EDGES, &rule);
        let mut upper = Vec::with_capacity(tnodes.len());
        let mut lower = Vec::with_capacity(tnodes.len());
        for (t, w) in tnodes {
            let y = s_cut * t / (1.0 - t);
            let dy = s_cut / ((1.0 - t) * (1.0 - t)) * w;
            upper.push((Complex64::new(s_cut, y), Complex64::new(0.0, dy)));
            lower.push((Complex64::new(s_cut, -y), Complex64::new(0.0, -dy)));
        }
        Ok(Self { s_cut, real, upper, lower })
    }

    /// Vertical-branch nodes used for the sign of `omega`.
    pub fn branch(&self, omega: f64) -> &[(Complex64, Complex64)] {
        if omega >= 0.0 {
            &self.upper
        } else {
            &self.lower
        }
    }

    /// Transform of tabulated values: `real_vals` at `self.real`, `branch_vals` at `self.branch(omega)`.
    pub fn apply(&self, omega: f64, damping: f64, real_vals: &[Complex64], branch_vals: &[Complex64]) -> Complex64 {
        let k = Complex64::new(-damping, omega);
        let mut acc = Complex64::new(0.0, 0.0);
        for ((s, w), f) in self.real.iter().zip(real_vals) {
            acc += f * (k * s).exp() * w;
        }
        for ((s, ds), f) in self.branch(omega).iter().zip(branch_vals) {
            acc += f * (k * s).exp() * ds;
        }
        acc
    }

    /// Transform of a function evaluated directly on the contour.
    pub fn transform<F: Fn(Complex64) -> Complex64>(&self, omega: f64, damping: f64, f: F) -> Complex64 {
        let real: Vec<Complex64> = self.real.iter().map(|(s, _)| f(Complex64::new(*s, 0.0))).collect();
        let branch: Vec<Complex64> = self.branch(omega).iter().map(|(s, _)| f(*s)).collect();
        self.apply(omega, damping, &real, &branch)
    }
}
