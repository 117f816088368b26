use num_complex::Complex64;
use pfme_bath::{sideband_lines, BathSpec, LineSpectrum, Propagator};
use pfme_model::{build_eigenframe, coupling_weights, CouplingWeights, DipoleGeometry, EigenFrame, SystemParams};

use crate::golden::{gamma_1, gamma_v1, golden_x, golden_y};
use crate::redfield::{Channel, Frame, GammaTable, NonSecularRates, RateSet, SecularRates};
use crate::timedomain::{TimeProduct, TimeTable};
use crate::{CorrKind, RateComponent, RateError, RateOptions, Route};

struct Base {
    one: [Complex64; 2],
    xx: [Complex64; 2],
    side: [Complex64; 2],
    x: Complex64,
}

/// Precomputed bath tables and line spectra for one parameter set.
#[derive(Debug, Clone)]
pub struct RateEngine {
    pub sys: SystemParams,
    pub geom: DipoleGeometry,
    pub bath: BathSpec,
    pub weights: CouplingWeights,
    pub frame: EigenFrame,
    pub options: RateOptions,
    propagator: Propagator,
    table: TimeTable,
    lines: Option<(LineSpectrum, LineSpectrum)>,
}

impl RateEngine {
    pub fn new(sys: SystemParams, geom: DipoleGeometry, bath: BathSpec, options: RateOptions) -> Result<Self, RateError> {
        if (sys.beta - bath.beta).abs() > 1e-12 * sys.beta {
            return Err(RateError::Inconsistent(format!(
                "system beta {} differs from bath beta {}",
                sys.beta, bath.beta
            )));
        }
        let weights = coupling_weights(&geom);
        let propagator = Propagator::new(bath, weights.omega_deltadelta);
        let frame = build_eigenframe(&sys, propagator.kappa_sq().sqrt())?;
        let omega_max = 4.0 * frame.eta.max(bath.cutoff);
        let table = TimeTable::new(&propagator, omega_max)?;
        let lines = match options.route {
            Route::Quadrature => None,
            Route::Series { series } => Some((
                sideband_lines(&bath, weights.omega_deltadelta, series, 1, options.tail_tol)?,
                sideband_lines(&bath, weights.omega_deltadelta, series, -1, options.tail_tol)?,
            )),
        };
        Ok(Self { sys, geom, bath, weights, frame, options, propagator, table, lines })
    }

    pub fn kappa(&self) -> f64 {
        self.frame.kappa
    }

    pub fn propagator(&self) -> &Propagator {
        &self.propagator
    }

    /// Line spectra `(A⁺, A⁻)` used by the series route.
    pub fn lines(&self) -> Option<&(LineSpectrum, LineSpectrum)> {
        self.lines.as_ref()
    }

    fn cos_rel(&self) -> f64 {
        pfme_model::clean_cos(self.geom.relative_phase(&self.sys))
    }

    /// `e^{−2iϑ_μV}`, the phase carried by `⟨C†C†⟩`.
    fn pair_phase(&self) -> Complex64 {
        Complex64::from_polar(1.0, -2.0 * self.geom.relative_phase(&self.sys))
    }

    fn w_mu_delta(&self) -> f64 {
        self.weights.omega_mudelta * self.weights.cos_theta
    }

    fn transforms(&self, omega: f64, products: &[TimeProduct]) -> Result<Vec<Complex64>, RateError> {
        if omega.abs() <= self.table.omega_max() {
            Ok(self.table.transforms(omega, products))
        } else {
            Ok(TimeTable::new(&self.propagator, omega.abs())?.transforms(omega, products))
        }
    }

    /// Two-photon channel `4 Ω_μΔ² cos²θ ∫ e^{iωs} κ² e^{±φ(s)} X(s)² ds` (no phase or sign).
    pub fn gamma_2(&self, omega: f64, sign: i8) -> Result<Complex64, RateError> {
        let w = self.w_mu_delta();
        if w == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let p = if sign >= 0 { TimeProduct::PlusXX } else { TimeProduct::MinusXX };
        Ok(4.0 * w * w * self.transforms(omega, &[p])?[0])
    }

    /// Drive-induced zero-photon channel `|V|² ∫ e^{iωs} κ² (e^{±φ(s)} − 1) ds`.
    pub fn gamma_v0(&self, omega: f64, sign: i8) -> Result<Complex64, RateError> {
        let v = self.sys.drive_magnitude;
        if v == 0.0 || self.weights.omega_deltadelta == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let p = if sign >= 0 { TimeProduct::PlusSideband } else { TimeProduct::MinusSideband };
        Ok(v * v * self.transforms(omega, &[p])?[0])
    }

    fn base(&self, omega: f64) -> Result<Base, RateError> {
        use TimeProduct::*;
        let t = self.transforms(
            omega,
            &[PlusXX, MinusXX, PlusSideband, MinusSideband, PlusSidebandY, MinusSidebandY, PlusSidebandX],
        )?;
        let k2 = self.propagator.kappa_sq();
        let quad = self.lines.is_none();
        let needs_x = self.sys.drive_magnitude * self.w_mu_delta() != 0.0;
        let (gy, gx) = if quad {
            (golden_y(omega, &self.bath)?, if needs_x { golden_x(omega, &self.bath)? } else { Complex64::new(0.0, 0.0) })
        } else {
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
        };
        let (one_p, one_m, x_p) = match &self.lines {
            None => (k2 * gy + t[4], k2 * gy + t[5], k2 * gx + t[6]),
            Some((lp, lm)) => (
                gamma_1(omega, 1.0, lp, &self.bath)?,
                gamma_1(omega, 1.0, lm, &self.bath)?,
                if needs_x { gamma_v1(omega, 1.0, lp, &self.bath)? } else { Complex64::new(0.0, 0.0) },
            ),
        };
        Ok(Base { one: [one_p, one_m], xx: [t[0], t[1]], side: [t[2], t[3]], x: x_p })
    }

    fn corr_from(&self, kind: CorrKind, b: &Base) -> RateComponent {
        let zero = Complex64::new(0.0, 0.0);
        let w = self.w_mu_delta();
        let v = self.sys.drive_magnitude;
        let v1_amp = 4.0 * v * w * self.cos_rel();
        let (family, phase, v1_sign) = match kind {
            CorrKind::DagDot => (0, Complex64::new(1.0, 0.0), 1.0),
            CorrKind::DotDag => (0, Complex64::new(1.0, 0.0), -1.0),
            CorrKind::DagDag => (1, self.pair_phase(), 0.0),
            CorrKind::DotDot => (1, self.pair_phase().conj(), 0.0),
        };
        let one = phase * self.weights.omega_mumu * b.one[family];
        let two_sign = if family == 0 { 1.0 } else { -1.0 };
        let two = if w == 0.0 { zero } else { phase * two_sign * 4.0 * w * w * b.xx[family] };
        let drive_one = if v1_amp == 0.0 || v1_sign == 0.0 { zero } else { v1_sign * v1_amp * b.x };
        let drive_zero = if v == 0.0 || self.weights.omega_deltadelta == 0.0 { zero } else { v * v * b.side[family] };
        RateComponent::from_parts(one, two, drive_one, drive_zero)
    }

    /// Transform of one of the four polaron-frame correlation functions, with its parts.
    pub fn corr_ft(&self, kind: CorrKind, omega: f64) -> Result<RateComponent, RateError> {
        Ok(self.corr_from(kind, &self.base(omega)?))
    }

    /// All four correlation transforms at one frequency, ordered as [`CorrKind::ALL`].
    pub fn corr_all(&self, omega: f64) -> Result<[RateComponent; 4], RateError> {
        let b = self.base(omega)?;
        Ok(CorrKind::ALL.map(|k| self.corr_from(k, &b)))
    }

    /// `(a_α, b_α)` in `g_α = a_α C + b_α C†`.
    pub fn coefficients(&self, alpha: Channel) -> (f64, f64) {
        let (c, s) = (self.frame.cos_half(), self.frame.sin_half());
        match alpha {
            Channel::Plus => (c * c, -s * s),
            Channel::Minus => (-s * s, c * c),
            Channel::Z => (s * c, s * c),
        }
    }

    /// `Γ_αβ(ω)` from a precomputed set of the four correlation transforms at ω.
    pub fn assemble(&self, alpha: Channel, beta: Channel, corr: &[RateComponent; 4]) -> RateComponent {
        let (aa, ba) = self.coefficients(alpha);
        let (ab, bb) = self.coefficients(beta);
        let coeff = [aa * ab, ba * bb, aa * bb, ba * ab];
        let mut out = RateComponent::default();
        for (c, k) in coeff.iter().zip(corr) {
            if *c != 0.0 {
                out = out.plus(&k.scaled(*c));
            }
        }
        out
    }

    /// `Γ_αβ(ω) = a_α a_β Γ^{†·} + b_α b_β Γ^{·†} + a_α b_β Γ^{††} + b_α a_β Γ^{··}`.
    pub fn gamma_alpha_beta(&self, alpha: Channel, beta: Channel, omega: f64) -> Result<RateComponent, RateError> {
        Ok(self.assemble(alpha, beta, &self.corr_all(omega)?))
    }

    pub fn gamma_table(&self) -> Result<GammaTable, RateError> {
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
            Ok::<_, RateError>(self.assemble(a, b, &corr[k]).total)
        })
    }

    pub fn rate_set(&self) -> Result<RateSet, RateError> {
        Ok(RateSet::from_table(Frame::Polaron, self.frame.mixing_angle, self.frame.kappa, self.gamma_table()?))
    }

    /// Secular decay rate `γ↓ = 2 Re Γ_−−(η)` split into its four contributions.
    pub fn decay_parts(&self) -> Result<RateComponent, RateError> {
        Ok(self.gamma_alpha_beta(Channel::Minus, Channel::Minus, self.frame.eta)?.scaled(2.0))
    }
}

/// Convenience wrapper building a quadrature-route engine for a single transform.
pub fn corr_ft(
    kind: CorrKind,
    omega: f64,
    sys: &SystemParams,
    geom: &DipoleGeometry,
    bath: &BathSpec,
) -> Result<RateComponent, RateError> {
    RateEngine::new(*sys, *geom, *bath, RateOptions::default())?.corr_ft(kind, omega)
}

pub fn rate_set(sys: &SystemParams, geom: &DipoleGeometry, bath: &BathSpec) -> Result<RateSet, RateError> {
    RateEngine::new(*sys, *geom, *bath, RateOptions::default())?.rate_set()
}

pub fn secular_rates(sys: &SystemParams, geom: &DipoleGeometry, bath: &BathSpec) -> Result<SecularRates, RateError> {
    Ok(rate_set(sys, geom, bath)?.secular)
}

pub fn nonsecular_rates(sys: &SystemParams, geom: &DipoleGeometry, bath: &BathSpec) -> Result<NonSecularRates, RateError> {
    Ok(rate_set(sys, geom, bath)?.nonsecular)
}
