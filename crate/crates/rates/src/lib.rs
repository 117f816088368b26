//! Rates of the polaron-frame (PFME) and displaced-frame (DFME) master
//! equations of a driven emitter with permanent dipoles.
//!
//! The central object is the one-sided transform of the polaron-frame
//! correlation functions, [`RateEngine::corr_ft`], split into its one-photon,
//! two-photon, drive-induced one-photon and drive-induced zero-photon parts.
//! These are assembled into eigenbasis coupling-operator transforms
//! [`RateEngine::gamma_alpha_beta`] and finally into a Redfield generator.

mod dfme;
mod engine;
pub mod golden;
mod redfield;
pub mod timedomain;

pub use dfme::{dfme_gamma_table, dfme_rates, displaced_couplings};
pub use engine::{corr_ft, nonsecular_rates, rate_set, secular_rates, RateEngine};
pub use golden::{gamma_1, gamma_some, gamma_v1, golden_x, golden_y};
pub use redfield::{
    closed_form_nonsecular, redfield_generator, Channel, Frame, GammaTable, Generator, NonSecularRates, RateSet,
    SecularRates,
};

use num_complex::Complex64;
use pfme_bath::{BathError, SeriesKind};
use pfme_model::ModelError;
use pfme_numerics::NumericsError;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum RateError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Bath(#[from] BathError),
    #[error("rate quadrature failed: {0}")]
    Quadrature(#[from] NumericsError),
    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),
}

/// The four polaron-frame correlation functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrKind {
    /// `⟨C†(s) C(0)⟩`
    DagDot,
    /// `⟨C(s) C†(0)⟩`
    DotDag,
    /// `⟨C†(s) C†(0)⟩`
    DagDag,
    /// `⟨C(s) C(0)⟩`
    DotDot,
}

impl CorrKind {
    pub const ALL: [CorrKind; 4] = [CorrKind::DagDot, CorrKind::DotDag, CorrKind::DagDag, CorrKind::DotDot];
}

/// A transformed correlation function and its four physical contributions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RateComponent {
    pub total: Complex64,
    pub one_photon: Complex64,
    pub two_photon: Complex64,
    pub drive_one: Complex64,
    pub drive_zero: Complex64,
}

impl RateComponent {
    pub fn from_parts(one_photon: Complex64, two_photon: Complex64, drive_one: Complex64, drive_zero: Complex64) -> Self {
        Self { total: one_photon + two_photon + drive_one + drive_zero, one_photon, two_photon, drive_one, drive_zero }
    }

    pub fn parts(&self) -> [Complex64; 4] {
        [self.one_photon, self.two_photon, self.drive_one, self.drive_zero]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_parts(self.one_photon * c, self.two_photon * c, self.drive_one * c, self.drive_zero * c)
    }

    pub fn plus(&self, o: &Self) -> Self {
        Self::from_parts(
            self.one_photon + o.one_photon,
            self.two_photon + o.two_photon,
            self.drive_one + o.drive_one,
            self.drive_zero + o.drive_zero,
        )
    }
}

/// How the sideband-shifted one-photon channels are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "route")]
pub enum Route {
    /// Delta-line series over a discrete-mode representation of `e^{±φ(s)}`.
    Series { series: SeriesKind },
    /// Direct one-sided transform of the time-domain correlation functions.
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateOptions {
    pub route: Route,
    /// Residual line mass tolerated when truncating line spectra.
    pub tail_tol: f64,
}

impl Default for RateOptions {
    fn default() -> Self {
        Self { route: Route::Quadrature, tail_tol: 1e-12 }
    }
}

impl RateOptions {
    pub fn series(series: SeriesKind) -> Self {
        Self { route: Route::Series { series }, ..Self::default() }
    }
}
