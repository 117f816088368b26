//! Numerical building blocks: adaptive quadrature, principal values,
//! the Hurwitz zeta function, one-sided Fourier transforms and Bose factors.

pub mod halfline;
pub mod hurwitz;
pub mod quad;

pub use halfline::{composite_rule, legendre_rule, uniform_edges, HalfLineRule};
pub use hurwitz::hurwitz_zeta;
pub use quad::{integrate, integrate_with_breaks, pv_inverse_difference, Estimate, QuadOptions, QuadValue};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("quadrature did not converge: achieved error {achieved:.3e}, requested {requested:.3e}")]
    NotConverged { achieved: f64, requested: f64 },
    #[error("invalid integration interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("invalid Gauss-Legendre order {0}")]
    InvalidOrder(usize),
}

/// Bose–Einstein occupation N(ν) = 1/(e^{βν} − 1) for ν > 0.
pub fn bose(nu: f64, beta: f64) -> f64 {
    1.0 / (beta * nu).exp_m1()
}

/// `ν·(N(ν) + ½)·2 = ν coth(βν/2)`, finite as ν → 0.
pub fn nu_coth(nu: f64, beta: f64) -> f64 {
    let x = 0.5 * beta * nu;
    if x.abs() < 1e-4 {
        // x coth x = 1 + x²/3 − x⁴/45
        let x2 = x * x;
        2.0 / beta * (1.0 + x2 / 3.0 - x2 * x2 / 45.0)
    } else {
        nu / x.tanh()
    }
}
