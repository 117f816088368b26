//! Versioned TOML run configuration with dotted-key overrides.

use pfme_bath::{BathError, BathSpec, SeriesKind};
use pfme_dynamics::Propagation;
use pfme_model::{DipoleGeometry, ModelError, SolidAngle, SystemParams};
use pfme_rates::{RateOptions, Route};
use pfme_spectrum::{ExtractOptions, GridOptions, QrtGenerator, RegionRule, SpectrumOptions};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};

use crate::CliError;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    RatesSweep,
    PhaseSweep,
    DynamicsCompare,
    Spectrum,
    Extract,
    OracleValidate,
    Custom,
}

impl Scenario {
    pub fn label(self) -> &'static str {
        match self {
            Scenario::RatesSweep => "rates-sweep",
            Scenario::PhaseSweep => "phase-sweep",
            Scenario::DynamicsCompare => "dynamics-compare",
            Scenario::Spectrum => "spectrum",
            Scenario::Extract => "extract",
            Scenario::OracleValidate => "oracle-validate",
            Scenario::Custom => "custom",
        }
    }

    fn takes_sweep(self) -> bool {
        matches!(self, Scenario::RatesSweep | Scenario::PhaseSweep | Scenario::Custom)
    }
}

/// Emitter energy (eV), signed drive amplitude (eV), drive phase and inverse temperature (eV⁻¹).
///
/// A negative `drive` adds π to `drive_phase`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemBlock {
    pub epsilon: f64,
    pub drive: f64,
    pub drive_phase: f64,
    pub beta: f64,
}

impl Default for SystemBlock {
    fn default() -> Self {
        Self { epsilon: 1.0, drive: 0.0, drive_phase: 0.0, beta: 2.0 }
    }
}

/// Dipole magnitudes and angles. A negative `d_delta` adds π to `theta_mu_delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DipoleBlock {
    pub d_mu: f64,
    pub d_delta: f64,
    pub d_d: f64,
    pub theta_mu_delta: f64,
    pub vartheta_mu: f64,
    pub solid_angle: SolidAngle,
}

impl Default for DipoleBlock {
    fn default() -> Self {
        Self { d_mu: 0.01, d_delta: 0.0, d_d: 0.0, theta_mu_delta: 0.0, vartheta_mu: 0.0, solid_angle: SolidAngle::Isotropic }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BathBlock {
    pub huang_rhys: f64,
    /// ν_c in eV.
    pub cutoff: f64,
}

impl Default for BathBlock {
    fn default() -> Self {
        Self { huang_rhys: 1.0 / PI, cutoff: 1.0 }
    }
}

/// A uniform sweep of one named parameter; `steps = 1` evaluates `start` only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepBlock {
    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let n = self.steps - 1;
        (0..self.steps)
            .map(|k| if k == n { self.stop } else { self.start + (self.stop - self.start) * k as f64 / n as f64 })
            .collect()
    }
}

/// Names accepted by `[sweep] parameter`.
pub const SWEEP_PARAMETERS: [&str; 11] = [
    "epsilon",
    "drive",
    "drive_phase",
    "beta",
    "d_mu",
    "d_delta",
    "d_d",
    "theta_mu_delta",
    "vartheta_mu",
    "huang_rhys",
    "cutoff",
];

/// Column label of a swept parameter with its unit suffix.
pub fn axis_label(parameter: &str) -> String {
    match parameter {
        "epsilon" | "drive" | "cutoff" => format!("{parameter}_eV"),
        "beta" => format!("{parameter}_per_eV"),
        "drive_phase" | "theta_mu_delta" | "vartheta_mu" => format!("{parameter}_rad"),
        _ => parameter.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RouteName {
    Quadrature,
    Series,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesName {
    Lattice,
    SingleMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropagationName {
    Stepper,
    MatrixExponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsBlock {
    pub route: RouteName,
    pub series: SeriesName,
    /// Lattice spacing in units of ν_c.
    pub lattice_spacing: f64,
    pub tail_tol: f64,
    pub propagation: PropagationName,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for NumericsBlock {
    fn default() -> Self {
        Self {
            route: RouteName::Quadrature,
            series: SeriesName::Lattice,
            lattice_spacing: 0.01,
            tail_tol: 1e-12,
            propagation: PropagationName::MatrixExponential,
            rtol: 1e-9,
            atol: 1e-12,
        }
    }
}

impl NumericsBlock {
    pub fn series_kind(&self) -> SeriesKind {
        match self.series {
            SeriesName::Lattice => SeriesKind::Lattice { spacing: self.lattice_spacing },
            SeriesName::SingleMode => SeriesKind::SingleMode,
        }
    }

    pub fn rate_options(&self) -> RateOptions {
        let route = match self.route {
            RouteName::Quadrature => Route::Quadrature,
            RouteName::Series => Route::Series { series: self.series_kind() },
        };
        RateOptions { route, tail_tol: self.tail_tol }
    }

    pub fn propagation(&self) -> Propagation {
        match self.propagation {
            PropagationName::Stepper => Propagation::Stepper { rtol: self.rtol, atol: self.atol },
            PropagationName::MatrixExponential => Propagation::MatrixExponential,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsBlock {
    /// Final time in eV⁻¹; absent means three relaxation times `3/(γ↓ + γ↑)`.
    pub t_max: Option<f64>,
    /// Number of output times including `t = 0`.
    pub steps: usize,
    /// Initial excited population of the bare emitter.
    pub initial_excited: f64,
    /// Whether to run the few-mode exact oracle.
    pub exact: bool,
    pub modes: usize,
    pub cutoffs: Vec<usize>,
    pub max_dim: usize,
    pub discard_tol: f64,
}

impl Default for DynamicsBlock {
    fn default() -> Self {
        Self {
            t_max: None,
            steps: 201,
            initial_excited: 0.0,
            exact: true,
            modes: 3,
            cutoffs: vec![7, 4, 3],
            max_dim: 4096,
            discard_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumBlock {
    pub generator: QrtGenerator,
    /// Background grid spacing in units of ν_c.
    pub spacing: f64,
    pub red_span: f64,
    pub blue_span: f64,
}

impl Default for SpectrumBlock {
    fn default() -> Self {
        let g = GridOptions::default();
        Self { generator: QrtGenerator::Secular, spacing: g.spacing, red_span: g.red_span, blue_span: g.blue_span }
    }
}

impl SpectrumBlock {
    pub fn options(&self) -> SpectrumOptions {
        SpectrumOptions {
            generator: self.generator,
            grid: GridOptions { spacing: self.spacing, red_span: self.red_span, blue_span: self.blue_span, ..GridOptions::default() },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleName {
    ToOnset,
    FwhmMultiple,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtractBlock {
    /// Spectrum CSV with an `omega_eV` column; absent means compute the spectrum first.
    pub input: Option<PathBuf>,
    pub column: String,
    pub rule: RuleName,
    pub fwhm_multiple: f64,
    pub min_rel_height: f64,
    pub max_fwhm: f64,
}

impl Default for ExtractBlock {
    fn default() -> Self {
        let o = ExtractOptions::default();
        Self {
            input: None,
            column: "I_with_sideband_per_eV".into(),
            rule: RuleName::ToOnset,
            fwhm_multiple: 5.0,
            min_rel_height: o.min_rel_height,
            max_fwhm: o.max_fwhm,
        }
    }
}

impl ExtractBlock {
    pub fn options(&self) -> ExtractOptions {
        let rule = match self.rule {
            RuleName::ToOnset => RegionRule::ToOnset,
            RuleName::FwhmMultiple => RegionRule::FwhmMultiple { multiple: self.fwhm_multiple },
        };
        ExtractOptions { rule, min_rel_height: self.min_rel_height, max_fwhm: self.max_fwhm }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub svg: bool,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { svg: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub scenario: Scenario,
    pub out: PathBuf,
    #[serde(default)]
    pub system: SystemBlock,
    #[serde(default)]
    pub dipoles: DipoleBlock,
    #[serde(default)]
    pub bath: BathBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
    #[serde(default)]
    pub numerics: NumericsBlock,
    #[serde(default)]
    pub dynamics: DynamicsBlock,
    #[serde(default)]
    pub spectrum: SpectrumBlock,
    #[serde(default)]
    pub extract: ExtractBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

/// Validated physical inputs of one evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physics {
    pub sys: SystemParams,
    pub geom: DipoleGeometry,
    pub bath: BathSpec,
}

fn config_error(field: impl Into<String>, reason: impl Into<String>) -> CliError {
    CliError::Config { field: field.into(), reason: reason.into() }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Invalid { field, reason } => config_error(field, reason),
        }
    }
}

fn bath_error(e: BathError) -> CliError {
    match e {
        BathError::Invalid { field, reason } => config_error(format!("bath.{field}"), reason),
        other => CliError::Numerics { module: "bath", message: other.to_string() },
    }
}

/// Splits `key=value`; the value is parsed as a TOML value, falling back to a bare string.
pub fn parse_override(raw: &str) -> Result<(String, toml::Value), CliError> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| config_error("--set", format!("expected key=value, got `{raw}`")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(config_error("--set", format!("malformed key `{key}`")));
    }
    let value = value.trim();
    let parsed = format!("v = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    Ok((key.to_string(), parsed))
}

/// Sets a dotted key, creating intermediate tables.
pub fn apply_override(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), CliError> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().expect("split yields at least one part");
    let mut cur = table;
    for p in parts {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| config_error(key, format!("`{p}` is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

impl RunConfig {
    /// Parses TOML text, applies overrides in order and validates the result.
    pub fn from_toml(text: &str, overrides: &[(String, toml::Value)]) -> Result<Self, CliError> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| config_error("<file>", e.message()))?;
        for (k, v) in overrides {
            apply_override(&mut table, k, v.clone())?;
        }
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| config_error("<file>", e.message()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[(String, toml::Value)]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    /// The sweep to execute, with scenario defaults when none is given.
    pub fn effective_sweep(&self) -> Option<SweepBlock> {
        match (self.scenario, &self.sweep) {
            (_, Some(s)) => Some(s.clone()),
            (Scenario::RatesSweep, None) => {
                Some(SweepBlock { parameter: "d_delta".into(), start: -0.5, stop: 0.5, steps: 101 })
            }
            (Scenario::PhaseSweep, None) => {
                Some(SweepBlock { parameter: "drive_phase".into(), start: 0.0, stop: TAU, steps: 73 })
            }
            _ => None,
        }
    }

    /// Physical inputs with `parameter` replaced by `value`.
    pub fn physics_at(&self, point: Option<(&str, f64)>) -> Result<Physics, CliError> {
        let mut s = self.system;
        let mut d = self.dipoles;
        let mut b = self.bath;
        if let Some((name, x)) = point {
            match name {
                "epsilon" => s.epsilon = x,
                "drive" => s.drive = x,
                "drive_phase" => s.drive_phase = x,
                "beta" => s.beta = x,
                "d_mu" => d.d_mu = x,
                "d_delta" => d.d_delta = x,
                "d_d" => d.d_d = x,
                "theta_mu_delta" => d.theta_mu_delta = x,
                "vartheta_mu" => d.vartheta_mu = x,
                "huang_rhys" => b.huang_rhys = x,
                "cutoff" => b.cutoff = x,
                other => return Err(config_error("sweep.parameter", format!("unknown parameter `{other}`"))),
            }
        }
        let phase = s.drive_phase + if s.drive < 0.0 { PI } else { 0.0 };
        let sys = SystemParams::new(s.epsilon, s.drive.abs(), phase, s.beta)?;
        let theta = d.theta_mu_delta + if d.d_delta < 0.0 { PI } else { 0.0 };
        let geom = DipoleGeometry::new(d.d_mu, d.d_delta.abs(), d.d_d, theta, d.vartheta_mu, d.solid_angle)?;
        let bath = BathSpec::new(b.huang_rhys, b.cutoff, s.beta).map_err(bath_error)?;
        Ok(Physics { sys, geom, bath })
    }

    pub fn physics(&self) -> Result<Physics, CliError> {
        self.physics_at(None)
    }

    /// Checks every referenced parameter, including each sweep point.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.version != CONFIG_VERSION {
            return Err(config_error("version", format!("unsupported version {}, expected {CONFIG_VERSION}", self.version)));
        }
        if self.out.as_os_str().is_empty() {
            return Err(config_error("out", "output directory must be given"));
        }
        if self.sweep.is_some() && !self.scenario.takes_sweep() {
            return Err(config_error("sweep", format!("scenario `{}` does not take a sweep", self.scenario.label())));
        }
        let n = &self.numerics;
        for (field, v) in [("numerics.lattice_spacing", n.lattice_spacing), ("numerics.rtol", n.rtol), ("numerics.atol", n.atol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(config_error(field, "must be positive"));
            }
        }
        if !(n.tail_tol > 0.0 && n.tail_tol < 1.0) {
            return Err(config_error("numerics.tail_tol", "must lie in (0, 1)"));
        }
        self.validate_dynamics()?;
        let sp = &self.spectrum;
        for (field, v) in [("spectrum.spacing", sp.spacing), ("spectrum.red_span", sp.red_span), ("spectrum.blue_span", sp.blue_span)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(config_error(field, "must be positive"));
            }
        }
        let ex = &self.extract;
        if !(ex.fwhm_multiple > 0.0) {
            return Err(config_error("extract.fwhm_multiple", "must be positive"));
        }
        if !(ex.min_rel_height >= 0.0 && ex.min_rel_height < 1.0) {
            return Err(config_error("extract.min_rel_height", "must lie in [0, 1)"));
        }
        if !(ex.max_fwhm > 0.0) {
            return Err(config_error("extract.max_fwhm", "must be positive"));
        }
        self.physics()?;
        if let Some(sweep) = self.effective_sweep() {
            if !SWEEP_PARAMETERS.contains(&sweep.parameter.as_str()) {
                return Err(config_error(
                    "sweep.parameter",
                    format!("unknown parameter `{}`; expected one of {}", sweep.parameter, SWEEP_PARAMETERS.join(", ")),
                ));
            }
            if sweep.steps == 0 {
                return Err(config_error("sweep.steps", "must be at least 1"));
            }
            if !(sweep.start.is_finite() && sweep.stop.is_finite()) {
                return Err(config_error("sweep.start", "range must be finite"));
            }
            for x in sweep.points() {
                self.physics_at(Some((&sweep.parameter, x)))?;
            }
        }
        Ok(())
    }

    fn validate_dynamics(&self) -> Result<(), CliError> {
        let d = &self.dynamics;
        if let Some(t) = d.t_max {
            if !(t > 0.0 && t.is_finite()) {
                return Err(config_error("dynamics.t_max", "must be positive"));
            }
        }
        if d.steps < 2 {
            return Err(config_error("dynamics.steps", "need at least two output times"));
        }
        if !(0.0..=1.0).contains(&d.initial_excited) {
            return Err(config_error("dynamics.initial_excited", "must lie in [0, 1]"));
        }
        if d.exact && d.initial_excited != 0.0 {
            return Err(config_error("dynamics.initial_excited", "the exact oracle starts in the ground state"));
        }
        if d.modes == 0 || d.modes > 8 {
            return Err(config_error("dynamics.modes", "must lie in 1..=8"));
        }
        if d.cutoffs.len() != d.modes {
            return Err(config_error("dynamics.cutoffs", format!("expected {} entries, got {}", d.modes, d.cutoffs.len())));
        }
        if !(d.discard_tol > 0.0 && d.discard_tol < 1.0) {
            return Err(config_error("dynamics.discard_tol", "must lie in (0, 1)"));
        }
        Ok(())
    }
}
