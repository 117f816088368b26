use num_complex::Complex64;
use pfme_bath::{BathSpec, Propagator};
use pfme_model::{coupling_weights, DipoleGeometry, SystemParams};
use pfme_rates::timedomain::{TimeProduct, TimeTable};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

use crate::grid::{frequency_grid, trapezoid, GridOptions};
use crate::qrt::{ExpTerm, QrtGenerator, QrtModel};
use crate::SpectrumError;

/// Which polarisation spectrum a series holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Full spectrum including the phonon-assisted sideband.
    WithSideband,
    /// Same correlation with `e^{φ(τ)} → 1`.
    NoSideband,
    /// Full spectrum recomputed with `|d_Δ| = 0`.
    NoPd,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::WithSideband, Variant::NoSideband, Variant::NoPd];

    pub fn label(self) -> &'static str {
        match self {
            Variant::WithSideband => "with_sideband",
            Variant::NoSideband => "no_sideband",
            Variant::NoPd => "no_pd",
        }
    }
}

/// A spectral component of zero width, `weight · δ(ω − position)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralLine {
    pub position: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSeries {
    pub variant: Variant,
    /// Frequencies (eV), strictly increasing.
    pub omega: Vec<f64>,
    /// Continuous part of the spectrum (eV⁻¹).
    pub intensity: Vec<f64>,
    /// Undamped (elastic) components not representable on the grid.
    pub lines: Vec<SpectralLine>,
    pub kappa_sq: f64,
    /// Steady-state excited population used to seed the regression.
    pub rho_ee: f64,
    /// Estimated Lorentzian mass outside the grid relative to the total power.
    pub tail_mass: f64,
    pub warnings: Vec<String>,
}

impl SpectrumSeries {
    pub fn continuum_power(&self) -> f64 {
        trapezoid(&self.omega, &self.intensity)
    }

    pub fn line_power(&self) -> f64 {
        self.lines.iter().map(|l| l.weight).sum()
    }

    pub fn validate(&self) -> Result<(), SpectrumError> {
        if self.omega.len() < 3 || self.omega.len() != self.intensity.len() {
            return Err(SpectrumError::InvalidSeries("grid and values must match and hold at least three points".into()));
        }
        if self.omega.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SpectrumError::InvalidSeries("grid is not strictly increasing".into()));
        }
        if self.intensity.iter().any(|v| !v.is_finite()) {
            return Err(SpectrumError::InvalidSeries("non-finite intensity".into()));
        }
        Ok(())
    }
}

/// `P = ∫ I(ω) dω` over the grid plus the weight of the discrete lines.
pub fn spectrum_power(s: &SpectrumSeries) -> f64 {
    s.continuum_power() + s.line_power()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub generator: QrtGenerator,
    pub grid: GridOptions,
}

/// The three variants on one shared grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSet {
    pub with_sideband: SpectrumSeries,
    pub no_sideband: SpectrumSeries,
    pub no_pd: SpectrumSeries,
}

impl SpectrumSet {
    pub fn get(&self, v: Variant) -> &SpectrumSeries {
        match v {
            Variant::WithSideband => &self.with_sideband,
            Variant::NoSideband => &self.no_sideband,
            Variant::NoPd => &self.no_pd,
        }
    }

    /// Writes `omega_eV` and one intensity column per variant.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), SpectrumError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["omega_eV", "I_with_sideband", "I_no_sideband", "I_no_pd"])?;
        for (i, w) in self.with_sideband.omega.iter().enumerate() {
            out.write_record([
                format!("{w:.12e}"),
                format!("{:.12e}", self.with_sideband.intensity[i]),
                format!("{:.12e}", self.no_sideband.intensity[i]),
                format!("{:.12e}", self.no_pd.intensity[i]),
            ])?;
        }
        out.flush().map_err(|e| SpectrumError::Io(e.to_string()))?;
        Ok(())
    }
}

struct Prepared {
    model: QrtModel,
    propagator: Propagator,
}

fn prepare(
    sys: &SystemParams,
    geom: &DipoleGeometry,
    bath: &BathSpec,
    opts: &SpectrumOptions,
) -> Result<Prepared, SpectrumError> {
    let model = QrtModel::build(sys, geom, bath, opts.generator)?;
    let propagator = Propagator::new(*bath, coupling_weights(geom).omega_deltadelta);
    Ok(Prepared { model, propagator })
}

fn without_delta(geom: &DipoleGeometry) -> Result<DipoleGeometry, SpectrumError> {
    Ok(DipoleGeometry::new(geom.d_mu, 0.0, geom.d_d, geom.theta_mu_delta, geom.vartheta_mu, geom.solid_angle)?)
}

fn grid_for(models: &[&QrtModel], bath: &BathSpec, opts: &GridOptions) -> Vec<f64> {
    let eta = models.iter().map(|m| m.secular.eta_bar).fold(0.0, f64::max);
    let lo = -eta - opts.red_span * bath.cutoff;
    let hi = eta + opts.blue_span * bath.cutoff;
    let lines: Vec<(f64, f64)> = models
        .iter()
        .flat_map(|m| m.terms.iter().filter(|t| !m.is_line(t)).map(|t| (t.centre(), t.width())))
        .collect();
    frequency_grid(lo, hi, bath.cutoff, &lines, opts)
}

fn evaluate(p: &Prepared, omega: &[f64], variant: Variant) -> Result<SpectrumSeries, SpectrumError> {
    let m = &p.model;
    let k2 = m.kappa_sq;
    let sideband = variant == Variant::WithSideband && p.propagator.phi0() > 0.0;
    let shift = m.terms.iter().map(|t| t.rate.im.abs()).fold(0.0, f64::max);
    let reach = omega.iter().map(|w| w.abs()).fold(0.0, f64::max) + shift;
    let table = if sideband { Some(TimeTable::new(&p.propagator, reach.max(1e-3))?) } else { None };
    let (lines, lorentz): (Vec<&ExpTerm>, Vec<&ExpTerm>) = m.terms.iter().partition(|t| m.is_line(t));
    let intensity: Vec<f64> = omega
        .par_iter()
        .map(|&w| {
            let iw = Complex64::new(0.0, w);
            let mut acc = 0.0;
            for t in &lorentz {
                acc += (k2 * t.amplitude / (t.rate + iw)).re;
            }
            if let Some(tab) = &table {
                for t in &m.terms {
                    let z = Complex64::new(-w - t.rate.im, t.rate.re.max(0.0));
                    acc += (t.amplitude * tab.transforms_at(z, &[TimeProduct::PlusSideband])[0]).re;
                }
            }
            acc
        })
        .collect();
    let lines: Vec<SpectralLine> =
        lines.iter().map(|t| SpectralLine { position: t.centre(), weight: PI * k2 * t.amplitude.re }).collect();
    let (lo, hi) = (omega[0], omega[omega.len() - 1]);
    let tail: f64 = lorentz
        .iter()
        .map(|t| k2 * t.amplitude.norm() * t.width() * (1.0 / (t.centre() - lo).abs() + 1.0 / (hi - t.centre()).abs()))
        .sum();
    let total = PI * m.rho_ee;
    let tail_mass = if total > 0.0 { tail / total } else { 0.0 };
    let mut warnings = Vec::new();
    if tail_mass > 1e-3 {
        warnings.push(format!("grid truncation: estimated tail mass {tail_mass:.2e} of the total power"));
    }
    let series = SpectrumSeries {
        variant,
        omega: omega.to_vec(),
        intensity,
        lines,
        kappa_sq: m.kappa_sq,
        rho_ee: m.rho_ee,
        tail_mass,
        warnings,
    };
    series.validate()?;
    Ok(series)
}

/// One polarisation spectrum on a grid adapted to its own lines.
pub fn polarisation_spectrum(
    sys: &SystemParams,
    geom: &DipoleGeometry,
    bath: &BathSpec,
    variant: Variant,
    opts: &SpectrumOptions,
) -> Result<SpectrumSeries, SpectrumError> {
    let g = if variant == Variant::NoPd { without_delta(geom)? } else { *geom };
    let p = prepare(sys, &g, bath, opts)?;
    let omega = grid_for(&[&p.model], bath, &opts.grid);
    evaluate(&p, &omega, variant)
}

/// All three variants on a common grid.
pub fn spectra(
    sys: &SystemParams,
    geom: &DipoleGeometry,
    bath: &BathSpec,
    opts: &SpectrumOptions,
) -> Result<SpectrumSet, SpectrumError> {
    let full = prepare(sys, geom, bath, opts)?;
    let bare = prepare(sys, &without_delta(geom)?, bath, opts)?;
    let omega = grid_for(&[&full.model, &bare.model], bath, &opts.grid);
    Ok(SpectrumSet {
        with_sideband: evaluate(&full, &omega, Variant::WithSideband)?,
        no_sideband: evaluate(&full, &omega, Variant::NoSideband)?,
        no_pd: evaluate(&bare, &omega, Variant::NoPd)?,
    })
}
