//! Redfield generator for a two-level system in its eigenbasis, built from
//! the transforms `Γ_αβ(ω) = ∫_0^∞ e^{iωs} ⟨g_α†(s) g_β(0)⟩ ds` of the coupling
//! operators in `H_I = Σ_α τ_α ⊗ g_α`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Eigenbasis operator labels: `τ_z`, `τ_+ = |+⟩⟨−|`, `τ_− = |−⟩⟨+|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    Z,
    Plus,
    Minus,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::Z, Channel::Plus, Channel::Minus];

    fn index(self) -> usize {
        match self {
            Channel::Z => 0,
            Channel::Plus => 1,
            Channel::Minus => 2,
        }
    }

    /// Label of the adjoint operator.
    pub fn adjoint(self) -> Channel {
        match self {
            Channel::Z => Channel::Z,
            Channel::Plus => Channel::Minus,
            Channel::Minus => Channel::Plus,
        }
    }

    /// Bohr frequency of `τ_α` in the interaction picture, `τ_α(t) = τ_α e^{iω_α t}`.
    pub fn bohr(self, eta: f64) -> f64 {
        match self {
            Channel::Z => 0.0,
            Channel::Plus => eta,
            Channel::Minus => -eta,
        }
    }

    fn matrix(self) -> Mat2 {
        let z = Complex64::new(0.0, 0.0);
        let o = Complex64::new(1.0, 0.0);
        match self {
            Channel::Z => [[o, z], [z, -o]],
            Channel::Plus => [[z, o], [z, z]],
            Channel::Minus => [[z, z], [o, z]],
        }
    }
}

type Mat2 = [[Complex64; 2]; 2];

fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

fn axpy(acc: &mut Mat2, s: Complex64, m: &Mat2) {
    for i in 0..2 {
        for j in 0..2 {
            acc[i][j] += s * m[i][j];
        }
    }
}

/// `Γ_αβ` at the three frequencies `−η, 0, +η` entering the generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaTable {
    pub eta: f64,
    values: [[[Complex64; 3]; 3]; 3],
}

impl GammaTable {
    /// Fills the table from `f(α, β, ω)` for ω ∈ {−η, 0, η}.
    pub fn build<E>(eta: f64, mut f: impl FnMut(Channel, Channel, f64) -> Result<Complex64, E>) -> Result<Self, E> {
        let mut values = [[[Complex64::new(0.0, 0.0); 3]; 3]; 3];
        for (k, w) in [-eta, 0.0, eta].into_iter().enumerate() {
            for a in Channel::ALL {
                for b in Channel::ALL {
                    values[k][a.index()][b.index()] = f(a, b, w)?;
                }
            }
        }
        Ok(Self { eta, values })
    }

    /// `Γ_αβ(ω)` for ω one of `−η, 0, η`.
    pub fn get(&self, a: Channel, b: Channel, omega: f64) -> Complex64 {
        let k = if omega == 0.0 {
            1
        } else if (omega - self.eta).abs() <= 1e-12 * self.eta.abs().max(1.0) {
            2
        } else if (omega + self.eta).abs() <= 1e-12 * self.eta.abs().max(1.0) {
            0
        } else {
            panic!("GammaTable holds only ω ∈ {{−η, 0, η}}, requested {omega}")
        };
        self.values[k][a.index()][b.index()]
    }
}

/// Superoperator acting on `vec(ρ) = (ρ_++, ρ_+−, ρ_−+, ρ_−−)`.
pub type Generator = [[Complex64; 4]; 4];

/// Full (non-secular) Redfield generator including the free evolution under `(η/2)τ_z`.
///
/// `D(ρ) = −Σ_αβ { Γ_αβ(−ω_β)[τ_α†τ_β ρ − τ_β ρ τ_α†] + Γ_α'β'(ω_β)*[ρ τ_β τ_α† − τ_α† ρ τ_β] }`
/// where primes denote adjoint labels.
pub fn redfield_generator(table: &GammaTable) -> Generator {
    let eta = table.eta;
    let mut gen = [[Complex64::new(0.0, 0.0); 4]; 4];
    for col in 0..4 {
        let mut rho = [[Complex64::new(0.0, 0.0); 2]; 2];
        rho[col / 2][col % 2] = Complex64::new(1.0, 0.0);
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        // free part −i[(η/2)τ_z, ρ]
        let hz = Channel::Z.matrix();
        let comm_l = mul(&hz, &rho);
        let comm_r = mul(&rho, &hz);
        axpy(&mut out, Complex64::new(0.0, -0.5 * eta), &comm_l);
        axpy(&mut out, Complex64::new(0.0, 0.5 * eta), &comm_r);
        for a in Channel::ALL {
            let ad = a.adjoint().matrix();
            for b in Channel::ALL {
                let tb = b.matrix();
                let wb = b.bohr(eta);
                let g1 = table.get(a, b, -wb);
                let g2 = table.get(a.adjoint(), b.adjoint(), wb).conj();
                if g1 != Complex64::new(0.0, 0.0) {
                    axpy(&mut out, -g1, &mul(&mul(&ad, &tb), &rho));
                    axpy(&mut out, g1, &mul(&mul(&tb, &rho), &ad));
                }
                if g2 != Complex64::new(0.0, 0.0) {
                    axpy(&mut out, -g2, &mul(&mul(&rho, &tb), &ad));
                    axpy(&mut out, g2, &mul(&mul(&ad, &rho), &tb));
                }
            }
        }
        for row in 0..4 {
            gen[row][col] = out[row / 2][row % 2];
        }
    }
    gen
}

/// Population and coherence rates of the secular master equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecularRates {
    pub gamma_down: f64,
    pub gamma_up: f64,
    pub gamma_d: f64,
    pub eta_bar: f64,
}

impl SecularRates {
    pub fn from_table(t: &GammaTable) -> Self {
        let eta = t.eta;
        let down = t.get(Channel::Minus, Channel::Minus, eta);
        let up = t.get(Channel::Plus, Channel::Plus, -eta);
        let zz = t.get(Channel::Z, Channel::Z, 0.0);
        let gamma_down = 2.0 * down.re;
        let gamma_up = 2.0 * up.re;
        Self {
            gamma_down,
            gamma_up,
            gamma_d: 0.5 * (gamma_up + gamma_down) + 4.0 * zz.re,
            eta_bar: eta + (down - up).im,
        }
    }

    /// Steady-state upper-eigenstate population `γ↑/(γ↑ + γ↓)`.
    pub fn upper_population(&self) -> f64 {
        self.gamma_up / (self.gamma_up + self.gamma_down)
    }
}

/// Couplings between populations and coherences dropped by the secular approximation.
///
/// With `vec(ρ)` ordered as `(ρ_++, ρ_+−, ρ_−+, ρ_−−)`:
/// `∂ρ_++ = −γ↓ρ_++ + γ↑ρ_−− + γ̄ ρ_−+ + γ̄* ρ_+−` and
/// `∂ρ_+− = −(γ_d + iη̄)ρ_+− + k₁ρ_−+ + k_−ρ_−− + k_+* ρ_++`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonSecularRates {
    pub gamma_bar: Complex64,
    pub k_1: Complex64,
    pub k_plus: Complex64,
    pub k_minus: Complex64,
}

impl NonSecularRates {
    pub fn from_generator(g: &Generator) -> Self {
        Self { gamma_bar: g[0][2], k_1: g[1][2], k_plus: g[1][0].conj(), k_minus: g[1][3] }
    }
}

/// Closed-form non-secular rates written directly in terms of `Γ_αβ`:
/// `γ̄ = Γ_−z(0) + Γ_+z(0)*`, `k₁ = Γ_−+(−η) + Γ_+−(η)*`,
/// `k_± = ∓Γ_±z(0) ± Γ_∓z(0)* ± 2Γ_z∓(±η)`.
pub fn closed_form_nonsecular(t: &GammaTable) -> NonSecularRates {
    use Channel::{Minus, Plus, Z};
    let eta = t.eta;
    NonSecularRates {
        gamma_bar: t.get(Minus, Z, 0.0) + t.get(Plus, Z, 0.0).conj(),
        k_1: t.get(Minus, Plus, -eta) + t.get(Plus, Minus, eta).conj(),
        k_plus: -t.get(Plus, Z, 0.0) + t.get(Minus, Z, 0.0).conj() + 2.0 * t.get(Z, Minus, eta),
        k_minus: t.get(Minus, Z, 0.0) - t.get(Plus, Z, 0.0).conj() - 2.0 * t.get(Z, Plus, -eta),
    }
}

/// Frame in which a rate set was derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Frame {
    Polaron,
    Displaced,
}

/// Everything a dynamics or spectrum calculation needs from the rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSet {
    pub frame: Frame,
    pub eta: f64,
    pub mixing_angle: f64,
    pub kappa: f64,
    pub secular: SecularRates,
    pub nonsecular: NonSecularRates,
    pub generator: Generator,
    pub table: GammaTable,
}

impl RateSet {
    pub fn from_table(frame: Frame, mixing_angle: f64, kappa: f64, table: GammaTable) -> Self {
        let generator = redfield_generator(&table);
        Self {
            frame,
            eta: table.eta,
            mixing_angle,
            kappa,
            secular: SecularRates::from_table(&table),
            nonsecular: NonSecularRates::from_generator(&generator),
            generator,
            table,
        }
    }
}
