//! Tabulated `e^{±φ(s)}`, `X(s)`, `Y(s)` on a deformed half-line contour and
//! the one-sided transforms of their products.

use num_complex::Complex64;
use pfme_bath::Propagator;
use pfme_numerics::HalfLineRule;
use rayon::prelude::*;

use crate::RateError;

const GL_ORDER: usize = 20;

#[derive(Debug, Clone, Copy)]
struct NodeValues {
    /// `e^{φ(s)} − 1`
    ep1: Complex64,
    /// `e^{−φ(s)} − 1`
    em1: Complex64,
    x: Complex64,
    y: Complex64,
}

/// Time-domain products whose one-sided transforms build every rate channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeProduct {
    /// `κ² e^{φ} Y`
    PlusY,
    /// `κ² e^{φ} X²`
    PlusXX,
    /// `κ² e^{φ} X`
    PlusX,
    /// `κ² (e^{φ} − 1)`
    PlusSideband,
    /// `κ² e^{−φ} Y`
    MinusY,
    /// `κ² e^{−φ} X²`
    MinusXX,
    /// `κ² (e^{−φ} − 1)`
    MinusSideband,
    /// `κ² (e^{φ} − 1) Y`
    PlusSidebandY,
    /// `κ² (e^{φ} − 1) X`
    PlusSidebandX,
    /// `κ² (e^{−φ} − 1) Y`
    MinusSidebandY,
}

impl TimeProduct {
    pub const ALL: [TimeProduct; 10] = [
        TimeProduct::PlusY,
        TimeProduct::PlusXX,
        TimeProduct::PlusX,
        TimeProduct::PlusSideband,
        TimeProduct::MinusY,
        TimeProduct::MinusXX,
        TimeProduct::MinusSideband,
        TimeProduct::PlusSidebandY,
        TimeProduct::PlusSidebandX,
        TimeProduct::MinusSidebandY,
    ];

    fn eval(self, v: &NodeValues, k2: f64) -> Complex64 {
        let ep = v.ep1 + 1.0;
        let em = v.em1 + 1.0;
        k2 * match self {
            TimeProduct::PlusY => ep * v.y,
            TimeProduct::PlusXX => ep * v.x * v.x,
            TimeProduct::PlusX => ep * v.x,
            TimeProduct::PlusSideband => v.ep1,
            TimeProduct::MinusY => em * v.y,
            TimeProduct::MinusXX => em * v.x * v.x,
            TimeProduct::MinusSideband => v.em1,
            TimeProduct::PlusSidebandY => v.ep1 * v.y,
            TimeProduct::PlusSidebandX => v.ep1 * v.x,
            TimeProduct::MinusSidebandY => v.em1 * v.y,
        }
    }
}

fn expm1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        z * (1.0 + z / 2.0 * (1.0 + z / 3.0 * (1.0 + z / 4.0 * (1.0 + z / 5.0))))
    } else {
        z.exp() - 1.0
    }
}

/// Node tables for one bath and coupling strength.
#[derive(Debug, Clone)]
pub struct TimeTable {
    rule: HalfLineRule,
    kappa_sq: f64,
    omega_max: f64,
    real: Vec<NodeValues>,
    upper: Vec<NodeValues>,
    lower: Vec<NodeValues>,
}

impl TimeTable {
    /// Builds the tables, resolving `e^{iωs}` for `|ω| ≤ omega_max`.
    pub fn new(prop: &Propagator, omega_max: f64) -> Result<Self, RateError> {
        let a = 1.0 / prop.bath.cutoff;
        let s_cut = (10.0 * a).max(6.0 * prop.bath.beta);
        let panel = (0.5 * a).min(4.0 / omega_max.max(1e-12));
        let rule = HalfLineRule::new(s_cut, panel, GL_ORDER)?;
        let eval = |s: Complex64| {
            let phi = prop.phi(s);
            NodeValues { ep1: expm1(phi), em1: expm1(-phi), x: prop.x(s), y: prop.y(s) }
        };
        let real = rule.real.par_iter().map(|(s, _)| eval(Complex64::new(*s, 0.0))).collect();
        let upper = rule.upper.par_iter().map(|(s, _)| eval(*s)).collect();
        let lower = rule.lower.par_iter().map(|(s, _)| eval(*s)).collect();
        Ok(Self { rule, kappa_sq: prop.kappa_sq(), omega_max, real, upper, lower })
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    pub fn kappa_sq(&self) -> f64 {
        self.kappa_sq
    }

    /// `lim_{0⁺} ∫_0^∞ e^{(iω − 0⁺)s} f(s) ds` for each product in `products`.
    pub fn transforms(&self, omega: f64, products: &[TimeProduct]) -> Vec<Complex64> {
        self.transforms_at(Complex64::new(omega, 0.0), products)
    }

    /// `∫_0^∞ e^{izs} f(s) ds` at a complex frequency with `Im z ≥ 0` and `|Re z| ≤ omega_max`.
    pub fn transforms_at(&self, z: Complex64, products: &[TimeProduct]) -> Vec<Complex64> {
        let k = Complex64::i() * z;
        let branch_vals = if z.re >= 0.0 { &self.upper } else { &self.lower };
        let mut acc = vec![Complex64::new(0.0, 0.0); products.len()];
        let nodes = self
            .rule
            .real
            .iter()
            .map(|(s, w)| (Complex64::new(*s, 0.0), Complex64::new(*w, 0.0)))
            .zip(&self.real)
            .chain(self.rule.branch(z.re).iter().copied().zip(branch_vals));
        for ((s, w), v) in nodes {
            let kernel = (k * s).exp() * w;
            for (a, p) in acc.iter_mut().zip(products) {
                *a += kernel * p.eval(v, self.kappa_sq);
            }
        }
        acc
    }

    pub fn transform(&self, omega: f64, product: TimeProduct) -> Complex64 {
        self.transforms(omega, &[product])[0]
    }
}
