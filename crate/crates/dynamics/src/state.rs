use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::DynamicsError;

/// Basis in which a density matrix is written.
///
/// `Eigen` orders the states as `(|+⟩, |−⟩)`, `Bare` as `(|e⟩, |g⟩)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    Eigen,
    Bare,
}

/// A 2×2 density matrix tagged with its basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    pub basis: Basis,
    pub m: [[Complex64; 2]; 2],
}

/// Tolerance on populations leaving `[0, 1]`, which Redfield equations may do transiently.
pub const POPULATION_TOLERANCE: f64 = 1e-6;

impl DensityMatrix {
    pub fn new(basis: Basis, m: [[Complex64; 2]; 2]) -> Self {
        Self { basis, m }
    }

    /// Diagonal state with upper population `p` (ρ_++ or ρ_ee).
    pub fn diagonal(basis: Basis, p: f64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self::new(basis, [[Complex64::new(p, 0.0), z], [z, Complex64::new(1.0 - p, 0.0)]])
    }

    /// Pure state `a|0⟩ + b|1⟩` in the given basis, normalised.
    pub fn pure(basis: Basis, a: Complex64, b: Complex64) -> Self {
        let n = a.norm_sqr() + b.norm_sqr();
        Self::new(basis, [[a * a.conj() / n, a * b.conj() / n], [b * a.conj() / n, b * b.conj() / n]])
    }

    pub fn upper(&self) -> f64 {
        self.m[0][0].re
    }

    pub fn lower(&self) -> f64 {
        self.m[1][1].re
    }

    /// The `⟨0|ρ|1⟩` coherence (ρ_+− or ρ_eg).
    pub fn coherence(&self) -> Complex64 {
        self.m[0][1]
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let d = (self.m[0][1] - self.m[1][0].conj()).norm();
        d.max(self.m[0][0].im.abs()).max(self.m[1][1].im.abs())
    }

    pub fn validate(&self, tol: f64) -> Result<(), DynamicsError> {
        if (self.trace() - 1.0).norm() > tol {
            return Err(DynamicsError::InvalidState(format!("trace {} differs from one", self.trace())));
        }
        if self.hermiticity_error() > tol {
            return Err(DynamicsError::InvalidState("matrix is not Hermitian".into()));
        }
        for p in [self.upper(), self.lower()] {
            if !(-POPULATION_TOLERANCE..=1.0 + POPULATION_TOLERANCE).contains(&p) {
                return Err(DynamicsError::InvalidState(format!("population {p} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Row-major vectorisation `(ρ_00, ρ_01, ρ_10, ρ_11)`.
    pub fn to_vec(&self) -> [Complex64; 4] {
        [self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]]
    }

    pub fn from_vec(basis: Basis, v: [Complex64; 4]) -> Self {
        Self::new(basis, [[v[0], v[1]], [v[2], v[3]]])
    }

    pub fn scale_add(&self, a: f64, other: &Self, b: f64) -> Self {
        let mut m = self.m;
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = *x * a + other.m[i][j] * b;
            }
        }
        Self::new(self.basis, m)
    }
}

/// Relation between the eigenbasis and the bare basis:
/// `|+⟩ = c|e⟩ + s e^{−iϑ_V}|g⟩`, `|−⟩ = −s|e⟩ + c e^{−iϑ_V}|g⟩`
/// with `c, s = cos, sin(φ_mix/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisMap {
    pub mixing_angle: f64,
    pub drive_phase: f64,
}

impl BasisMap {
    pub fn new(mixing_angle: f64, drive_phase: f64) -> Self {
        Self { mixing_angle, drive_phase }
    }

    /// Columns are the eigenvectors written in the bare basis.
    fn unitary(&self) -> [[Complex64; 2]; 2] {
        let (s, c) = (0.5 * self.mixing_angle).sin_cos();
        let ph = Complex64::from_polar(1.0, -self.drive_phase);
        [[Complex64::new(c, 0.0), Complex64::new(-s, 0.0)], [s * ph, c * ph]]
    }

    fn conjugate(u: &[[Complex64; 2]; 2], m: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        out[i][j] += u[i][k] * m[k][l] * u[j][l].conj();
                    }
                }
            }
        }
        out
    }

    pub fn to_bare(&self, rho: &DensityMatrix) -> DensityMatrix {
        match rho.basis {
            Basis::Bare => *rho,
            Basis::Eigen => DensityMatrix::new(Basis::Bare, Self::conjugate(&self.unitary(), &rho.m)),
        }
    }

    pub fn to_eigen(&self, rho: &DensityMatrix) -> DensityMatrix {
        match rho.basis {
            Basis::Eigen => *rho,
            Basis::Bare => {
                let u = self.unitary();
                let ud = [[u[0][0].conj(), u[1][0].conj()], [u[0][1].conj(), u[1][1].conj()]];
                DensityMatrix::new(Basis::Eigen, Self::conjugate(&ud, &rho.m))
            }
        }
    }
}
