use pfme_bath::{BathSpec, Propagator};
use pfme_model::SolidAngle;
use serde::{Deserialize, Serialize};

use crate::compute::SpectrumSeries;
use crate::SpectrumError;

/// A resolved Lorentzian peak of the continuous spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub centre: f64,
    pub height: f64,
    pub fwhm: f64,
    /// Grid index of the sampled maximum.
    pub index: usize,
}

impl Peak {
    pub fn lorentzian(&self, w: f64) -> f64 {
        let x = 2.0 * (w - self.centre) / self.fwhm;
        self.height / (1.0 + x * x)
    }
}

/// Closed frequency interval attributed to one peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lo: f64,
    pub hi: f64,
    pub centre: f64,
    pub fwhm: f64,
}

/// How far a peak's region extends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule")]
pub enum RegionRule {
    /// Out to where the spectrum minus all Lorentzian fits exceeds the peak's own fit.
    ToOnset,
    /// At most `multiple` FWHM from the centre, and never past the onset.
    FwhmMultiple { multiple: f64 },
}

impl Default for RegionRule {
    fn default() -> Self {
        RegionRule::ToOnset
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractOptions {
    pub rule: RegionRule,
    /// Peaks lower than this fraction of the global maximum are ignored.
    pub min_rel_height: f64,
    /// Widest accepted peak in units of the bath cutoff.
    pub max_fwhm: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self { rule: RegionRule::default(), min_rel_height: 1e-6, max_fwhm: 0.05 }
    }
}

/// Bath parameters assumed known when inverting κ for the dipole difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathShape {
    pub huang_rhys: f64,
    pub cutoff: f64,
    pub solid_angle: SolidAngle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionReport {
    /// Integral of the continuous spectrum.
    pub power: f64,
    pub rho_ee_inf: Option<f64>,
    pub kappa_sq: Option<f64>,
    pub eta_hat: Option<f64>,
    pub epsilon_hat: Option<f64>,
    pub v_hat: Option<f64>,
    pub d_delta_hat: Option<f64>,
    pub peaks: Vec<Peak>,
    pub regions: Vec<Region>,
    pub failures: Vec<String>,
}

fn vertex(x: [f64; 3], y: [f64; 3]) -> f64 {
    let (a, b) = (x[1] - x[0], x[1] - x[2]);
    let num = a * a * (y[1] - y[2]) - b * b * (y[1] - y[0]);
    let den = a * (y[1] - y[2]) - b * (y[1] - y[0]);
    if den == 0.0 {
        x[1]
    } else {
        x[1] - 0.5 * num / den
    }
}

/// Half-maximum crossing walking from `i` in direction `step`; `None` if the curve rises first.
fn half_crossing(w: &[f64], v: &[f64], i: usize, step: isize, half: f64) -> Option<f64> {
    let mut k = i;
    loop {
        let next = k as isize + step;
        if next < 0 || next as usize >= v.len() {
            return None;
        }
        let n = next as usize;
        if v[n] > v[k] {
            return None;
        }
        if v[n] <= half {
            let t = (v[k] - half) / (v[k] - v[n]);
            return Some(w[k] + t * (w[n] - w[k]));
        }
        k = n;
    }
}

/// Narrow local maxima of the continuous spectrum, ordered by centre.
pub fn detect_peaks(s: &SpectrumSeries, cutoff: f64, opts: &ExtractOptions) -> Vec<Peak> {
    let (w, v) = (&s.omega, &s.intensity);
    let top = v.iter().cloned().fold(0.0, f64::max);
    let mut peaks = Vec::new();
    for i in 1..v.len().saturating_sub(1) {
        if !(v[i] > v[i - 1] && v[i] >= v[i + 1] && v[i] > opts.min_rel_height * top) {
            continue;
        }
        let half = 0.5 * v[i];
        let (Some(l), Some(r)) = (half_crossing(w, v, i, -1, half), half_crossing(w, v, i, 1, half)) else {
            continue;
        };
        let fwhm = r - l;
        if fwhm < opts.max_fwhm * cutoff {
            let centre = vertex([w[i - 1], w[i], w[i + 1]], [v[i - 1], v[i], v[i + 1]]);
            peaks.push(Peak { centre, height: v[i], fwhm, index: i });
        }
    }
    peaks
}

/// Integration regions around each peak following `rule`, clipped to midpoints between neighbours.
pub fn lorentzian_regions(s: &SpectrumSeries, peaks: &[Peak], rule: RegionRule) -> Vec<Region> {
    let (w, v) = (&s.omega, &s.intensity);
    let residual = |k: usize| v[k] - peaks.iter().map(|p| p.lorentzian(w[k])).sum::<f64>();
    let n = w.len();
    peaks
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let mut lo_lim = if j > 0 { 0.5 * (peaks[j - 1].centre + p.centre) } else { w[0] };
            let mut hi_lim = if j + 1 < peaks.len() { 0.5 * (peaks[j + 1].centre + p.centre) } else { w[n - 1] };
            if let RegionRule::FwhmMultiple { multiple } = rule {
                lo_lim = lo_lim.max(p.centre - multiple * p.fwhm);
                hi_lim = hi_lim.min(p.centre + multiple * p.fwhm);
            }
            let mut hi = p.index;
            while hi + 1 < n && w[hi + 1] <= hi_lim {
                hi += 1;
                if residual(hi) > p.lorentzian(w[hi]) {
                    break;
                }
            }
            let mut lo = p.index;
            while lo > 0 && w[lo - 1] >= lo_lim {
                lo -= 1;
                if residual(lo) > p.lorentzian(w[lo]) {
                    break;
                }
            }
            let hi_w = if hi + 1 == n || w[hi] >= hi_lim || residual(hi) > p.lorentzian(w[hi]) { w[hi] } else { hi_lim };
            let lo_w = if lo == 0 || w[lo] <= lo_lim || residual(lo) > p.lorentzian(w[lo]) { w[lo] } else { lo_lim };
            Region { lo: lo_w, hi: hi_w, centre: p.centre, fwhm: p.fwhm }
        })
        .collect()
}

/// Trapezoidal integral over `[a, b]` with linear interpolation at the ends.
fn integrate_range(x: &[f64], y: &[f64], a: f64, b: f64) -> f64 {
    let mut acc = 0.0;
    for k in 0..x.len() - 1 {
        let (x0, x1) = (x[k], x[k + 1]);
        let (l, r) = (x0.max(a), x1.min(b));
        if r <= l {
            continue;
        }
        let lerp = |t: f64| y[k] + (y[k + 1] - y[k]) * (t - x0) / (x1 - x0);
        acc += 0.5 * (r - l) * (lerp(l) + lerp(r));
    }
    acc
}

/// `∫_R I(ω) dω / ∫ I(ω) dω` over the continuous spectrum.
pub fn sideband_fraction(s: &SpectrumSeries, regions: &[Region]) -> Result<f64, SpectrumError> {
    s.validate()?;
    for r in regions {
        if !(r.hi > r.lo) {
            return Err(SpectrumError::InvalidRegions(format!("degenerate region [{}, {}]", r.lo, r.hi)));
        }
    }
    let mut sorted: Vec<&Region> = regions.iter().collect();
    sorted.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    if sorted.windows(2).any(|p| p[1].lo < p[0].hi) {
        return Err(SpectrumError::InvalidRegions("regions overlap".into()));
    }
    let total = s.continuum_power();
    if !(total > 0.0) {
        return Err(SpectrumError::InvalidSeries("spectrum has no power".into()));
    }
    Ok(sorted.iter().map(|r| integrate_range(&s.omega, &s.intensity, r.lo, r.hi)).sum::<f64>() / total)
}

/// Recovers `ρ_ee(∞)`, κ², η, ε, |V| and |d_Δ| from the continuous part of a full spectrum.
pub fn extract_parameters(
    s: &SpectrumSeries,
    beta: f64,
    shape: &BathShape,
    opts: &ExtractOptions,
) -> Result<ExtractionReport, SpectrumError> {
    s.validate()?;
    let power = s.continuum_power();
    let peaks = detect_peaks(s, shape.cutoff, opts);
    if peaks.is_empty() {
        return Err(SpectrumError::NoPeak);
    }
    let regions = lorentzian_regions(s, &peaks, opts.rule);
    let mut failures = Vec::new();

    let rho = power / std::f64::consts::PI;
    let rho_ee_inf = if rho > 0.0 && rho < 0.5 {
        Some(rho)
    } else {
        failures.push(format!("ρ_ee estimate {rho} outside (0, 1/2)"));
        None
    };

    let kappa_sq = match sideband_fraction(s, &regions) {
        Ok(k) if k > 0.0 && k <= 1.0 + 1e-9 => Some(k.min(1.0)),
        Ok(k) => {
            failures.push(format!("κ² estimate {k} outside (0, 1]"));
            None
        }
        Err(e) => {
            failures.push(e.to_string());
            None
        }
    };

    let dominant = peaks.iter().max_by(|a, b| a.height.total_cmp(&b.height)).expect("non-empty");
    let eta_hat = Some(dominant.centre.abs());

    let epsilon_hat = match (eta_hat, rho_ee_inf) {
        (Some(eta), Some(rho)) => Some(eta * (1.0 - 2.0 * rho) / (0.5 * beta * eta).tanh()),
        _ => None,
    };

    let v_hat = match (eta_hat, epsilon_hat, kappa_sq) {
        (Some(eta), Some(eps), Some(k2)) if eta >= eps.abs() => Some((eta * eta - eps * eps).sqrt() / (2.0 * k2.sqrt())),
        (Some(_), Some(eps), Some(_)) => {
            failures.push(format!("ε estimate {eps} exceeds the peak position; |V| undefined"));
            None
        }
        _ => None,
    };

    let d_delta_hat = match kappa_sq {
        Some(k2) => {
            let bath = BathSpec::new(shape.huang_rhys, shape.cutoff, beta)?;
            let unit = Propagator::new(bath, shape.solid_angle.factor()).phi0();
            if unit > 0.0 {
                Some((-k2.ln() / unit).max(0.0).sqrt())
            } else {
                failures.push("bath gives no dressing; |d_Δ| undefined".into());
                None
            }
        }
        None => None,
    };

    Ok(ExtractionReport {
        power,
        rho_ee_inf,
        kappa_sq,
        eta_hat,
        epsilon_hat,
        v_hat,
        d_delta_hat,
        peaks,
        regions,
        failures,
    })
}
