use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use pfme_bath::BathSpec;
use pfme_dynamics::{real_generator, Basis, BasisMap, DensityMatrix};
use pfme_model::{DipoleGeometry, SystemParams};
use pfme_rates::{RateEngine, RateOptions, RateSet, SecularRates};
use serde::{Deserialize, Serialize};

use crate::SpectrumError;

type M2 = [[Complex64; 2]; 2];

/// Generator used to evolve the regression operator `Λ(τ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QrtGenerator {
    #[default]
    Secular,
    NonSecular,
}

/// One exponential `amplitude · e^{−rate·τ}` of the stationary correlation function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpTerm {
    pub amplitude: Complex64,
    pub rate: Complex64,
}

impl ExpTerm {
    /// Frequency at which this term's Lorentzian peaks.
    pub fn centre(&self) -> f64 {
        0.0 - self.rate.im
    }

    pub fn width(&self) -> f64 {
        self.rate.re
    }
}

/// `C(τ) = Tr[σ⁺ Λ(τ)]` with `Λ(0) = σ⁻ ρ_ss`, written as a sum of exponentials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QrtModel {
    pub terms: Vec<ExpTerm>,
    pub kappa_sq: f64,
    /// Bare-basis steady-state excited population.
    pub rho_ee: f64,
    pub secular: SecularRates,
    pub generator: QrtGenerator,
}

fn mul(a: &M2, b: &M2) -> M2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// `Tr[A B]` with `B` given row-major as `(B_00, B_01, B_10, B_11)`.
fn trace_with(a: &M2, b: &[Complex64; 4]) -> Complex64 {
    a[0][0] * b[0] + a[0][1] * b[2] + a[1][0] * b[1] + a[1][1] * b[3]
}

fn ladder_ops(map: &BasisMap) -> (M2, M2) {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let plus = map.to_eigen(&DensityMatrix::new(Basis::Bare, [[z, o], [z, z]])).m;
    let minus = map.to_eigen(&DensityMatrix::new(Basis::Bare, [[z, z], [o, z]])).m;
    (plus, minus)
}

impl QrtModel {
    pub fn build(
        sys: &SystemParams,
        geom: &DipoleGeometry,
        bath: &BathSpec,
        generator: QrtGenerator,
    ) -> Result<Self, SpectrumError> {
        let engine = RateEngine::new(*sys, *geom, *bath, RateOptions::default())?;
        let rates = engine.rate_set()?;
        Self::from_rates(&rates, sys.drive_phase, engine.propagator().kappa_sq(), generator)
    }

    pub fn from_rates(
        rates: &RateSet,
        drive_phase: f64,
        kappa_sq: f64,
        generator: QrtGenerator,
    ) -> Result<Self, SpectrumError> {
        let map = BasisMap::new(rates.mixing_angle, drive_phase);
        let (sp, sm) = ladder_ops(&map);
        let (terms, rho) = match generator {
            QrtGenerator::Secular => secular_terms(&rates.secular, &sp, &sm)?,
            QrtGenerator::NonSecular => nonsecular_terms(rates, &sp, &sm)?,
        };
        let rho_ee = map.to_bare(&rho).upper();
        Ok(Self { terms, kappa_sq, rho_ee, secular: rates.secular, generator })
    }

    /// `C(τ)` at a single lag.
    pub fn eval(&self, tau: f64) -> Complex64 {
        self.terms.iter().map(|t| t.amplitude * (-t.rate * tau).exp()).sum()
    }

    /// Terms with no decay, which appear as discrete lines in the spectrum.
    pub fn is_line(&self, t: &ExpTerm) -> bool {
        let scale = self.terms.iter().map(|t| t.rate.norm()).fold(0.0, f64::max).max(1e-300);
        t.rate.re <= 1e-13 * scale
    }
}

fn secular_terms(r: &SecularRates, sp: &M2, sm: &M2) -> Result<(Vec<ExpTerm>, DensityMatrix), SpectrumError> {
    let total = r.gamma_up + r.gamma_down;
    if !(total > 0.0) {
        return Err(SpectrumError::NoSteadyState("secular relaxation rate vanishes".into()));
    }
    let p = r.gamma_up / total;
    let rho = DensityMatrix::diagonal(Basis::Eigen, p);
    let l0 = mul(sm, &rho.m);
    let tr = l0[0][0] + l0[1][1];
    let z = Complex64::new(0.0, 0.0);
    let terms = vec![
        ExpTerm { amplitude: (sp[0][0] * p + sp[1][1] * (1.0 - p)) * tr, rate: z },
        ExpTerm { amplitude: (sp[0][0] - sp[1][1]) * (l0[0][0] - p * tr), rate: Complex64::new(total, 0.0) },
        ExpTerm { amplitude: sp[1][0] * l0[0][1], rate: Complex64::new(r.gamma_d, r.eta_bar) },
        ExpTerm { amplitude: sp[0][1] * l0[1][0], rate: Complex64::new(r.gamma_d, -r.eta_bar) },
    ];
    Ok((terms, rho))
}

fn complex_generator(rates: &RateSet) -> Matrix4<Complex64> {
    Matrix4::from_fn(|r, c| rates.generator[r][c])
}

fn nonsecular_terms(rates: &RateSet, sp: &M2, sm: &M2) -> Result<(Vec<ExpTerm>, DensityMatrix), SpectrumError> {
    let g = complex_generator(rates);
    // steady state: G v = 0 with the first row replaced by the trace condition
    let mut a = g;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    a.set_row(0, &nalgebra::RowVector4::new(one, zero, zero, one));
    let rhs = Vector4::new(one, zero, zero, zero);
    let v = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| SpectrumError::NoSteadyState("generator has no unique fixed point".into()))?;
    let rho = DensityMatrix::from_vec(Basis::Eigen, [v[0], v[1], v[2], v[3]]);
    let l0 = mul(sm, &rho.m);
    let mut x = Vector4::new(l0[0][0], l0[0][1], l0[1][0], l0[1][1]);
    let mut moments = [zero; 4];
    for m in moments.iter_mut() {
        *m = trace_with(sp, &[x[0], x[1], x[2], x[3]]);
        x = g * x;
    }
    let mu = real_generator(&rates.generator).complex_eigenvalues();
    let vander = Matrix4::from_fn(|r, c| mu[c].powi(r as i32));
    let amps = vander
        .lu()
        .solve(&Vector4::from_column_slice(&moments))
        .ok_or_else(|| SpectrumError::NoSteadyState("degenerate generator spectrum".into()))?;
    let scale = mu.iter().map(|m| m.norm()).fold(0.0, f64::max);
    let terms = (0..4)
        .map(|j| {
            let rate = if mu[j].norm() <= 1e-12 * scale { zero } else { -mu[j] };
            ExpTerm { amplitude: amps[j], rate }
        })
        .collect();
    Ok((terms, rho))
}

/// `C(τ) = ⟨σ₊(τ)σ₋(0)⟩` in the polaron frame on the given lags, evolved with the secular equation.
pub fn qrt_correlation(
    taus: &[f64],
    sys: &SystemParams,
    geom: &DipoleGeometry,
    bath: &BathSpec,
) -> Result<Vec<Complex64>, SpectrumError> {
    let model = QrtModel::build(sys, geom, bath, QrtGenerator::Secular)?;
    Ok(taus.iter().map(|&t| model.eval(t)).collect())
}
