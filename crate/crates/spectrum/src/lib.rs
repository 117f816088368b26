//! Emission (polarisation) spectrum of the emitter via the quantum regression
//! theorem, its sum rules, and recovery of model parameters from a spectrum.

mod compute;
mod extract;
mod grid;
mod qrt;

pub use compute::{
    polarisation_spectrum, spectra, spectrum_power, SpectralLine, SpectrumOptions, SpectrumSeries, SpectrumSet,
    Variant,
};
pub use extract::{
    detect_peaks, extract_parameters, lorentzian_regions, sideband_fraction, BathShape, ExtractOptions,
    ExtractionReport, Peak, Region, RegionRule,
};
pub use grid::{frequency_grid, trapezoid, GridOptions};
pub use qrt::{qrt_correlation, ExpTerm, QrtGenerator, QrtModel};

use pfme_model::ModelError;
use pfme_rates::RateError;

#[derive(Debug, thiserror::Error)]
pub enum SpectrumError {
    #[error("steady state unavailable: {0}")]
    NoSteadyState(String),
    #[error("invalid spectrum: {0}")]
    InvalidSeries(String),
    #[error("invalid integration regions: {0}")]
    InvalidRegions(String),
    #[error("no Lorentzian peak could be detected")]
    NoPeak,
    #[error(transparent)]
    Rates(#[from] RateError),
    #[error(transparent)]
    Bath(#[from] pfme_bath::BathError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("output failed: {0}")]
    Io(String),
}

impl From<csv::Error> for SpectrumError {
    fn from(e: csv::Error) -> Self {
        SpectrumError::Io(e.to_string())
    }
}
