use nalgebra::Matrix4;
use num_complex::Complex64;
use ode_solvers::{dop_shared::OutputType, Dopri5, System, Vector4};
use pfme_rates::{Frame, Generator, RateSet, SecularRates};
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::state::{Basis, BasisMap, DensityMatrix};
use crate::DynamicsError;

/// Which master equation produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Equation {
    PfmeSecular,
    PfmeNonsecular,
    DfmeNonsecular,
    /// Unitary propagation of a discretised bath.
    Exact,
}

impl Equation {
    pub fn label(self) -> &'static str {
        match self {
            Equation::PfmeSecular => "pfme-secular",
            Equation::PfmeNonsecular => "pfme-nonsecular",
            Equation::DfmeNonsecular => "dfme-nonsecular",
            Equation::Exact => "exact",
        }
    }
}

/// Reference frame of the observables in a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameTag {
    Polaron,
    Displaced,
    Lab,
}

impl FrameTag {
    pub fn label(self) -> &'static str {
        match self {
            FrameTag::Polaron => "polaron",
            FrameTag::Displaced => "displaced",
            FrameTag::Lab => "lab",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub frame: FrameTag,
    pub equation: Equation,
}

impl Trajectory {
    pub fn to_bare(&self, map: &BasisMap) -> Trajectory {
        Trajectory { states: self.states.iter().map(|r| map.to_bare(r)).collect(), ..self.clone() }
    }

    /// Upper-state population `ρ_ee` (bare) or `ρ_++` (eigen) at each time.
    pub fn upper(&self) -> Vec<f64> {
        self.states.iter().map(|r| r.upper()).collect()
    }

    pub fn lower(&self) -> Vec<f64> {
        self.states.iter().map(|r| r.lower()).collect()
    }

    /// Writes `t, Re/Im of the four entries, basis, frame, equation` as CSV.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), DynamicsError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "t_per_eV", "re_rho00", "im_rho00", "re_rho01", "im_rho01", "re_rho10", "im_rho10", "re_rho11",
            "im_rho11", "basis", "frame", "equation",
        ])?;
        for (t, r) in self.times.iter().zip(&self.states) {
            let mut rec = vec![format!("{t:.10e}")];
            for z in r.to_vec() {
                rec.push(format!("{:.12e}", z.re));
                rec.push(format!("{:.12e}", z.im));
            }
            rec.push(match r.basis {
                Basis::Eigen => "eigen".into(),
                Basis::Bare => "bare".into(),
            });
            rec.push(self.frame.label().into());
            rec.push(self.equation.label().into());
            out.write_record(&rec)?;
        }
        out.flush().map_err(|e| DynamicsError::Io(e.to_string()))?;
        Ok(())
    }
}

fn check_grid(t: &[f64]) -> Result<(), DynamicsError> {
    if t.is_empty() || t.windows(2).any(|w| !(w[1] > w[0])) || t[0] < 0.0 {
        return Err(DynamicsError::InvalidGrid);
    }
    Ok(())
}

fn require_eigen(rho: &DensityMatrix) -> Result<(), DynamicsError> {
    if rho.basis != Basis::Eigen {
        return Err(DynamicsError::InvalidState("initial state must be given in the eigenbasis".into()));
    }
    rho.validate(1e-10)
}

/// Closed-form solution of the secular equations in the eigenbasis.
pub fn evolve_secular(rho0: &DensityMatrix, rates: &SecularRates, times: &[f64]) -> Result<Trajectory, DynamicsError> {
    require_eigen(rho0)?;
    check_grid(times)?;
    let total = rates.gamma_up + rates.gamma_down;
    let p_inf = if total > 0.0 { rates.gamma_up / total } else { rho0.upper() };
    let p0 = rho0.upper();
    let decay = Complex64::new(rates.gamma_d, rates.eta_bar);
    let states = times
        .iter()
        .map(|&t| {
            let p = p_inf + (p0 - p_inf) * (-total * t).exp();
            let c = rho0.coherence() * (-decay * t).exp();
            DensityMatrix::new(
                Basis::Eigen,
                [[Complex64::new(p, 0.0), c], [c.conj(), Complex64::new(1.0 - p, 0.0)]],
            )
        })
        .collect();
    Ok(Trajectory { times: times.to_vec(), states, frame: FrameTag::Polaron, equation: Equation::PfmeSecular })
}

/// How the linear non-secular equations are integrated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum Propagation {
    /// Adaptive Dormand–Prince stepping.
    Stepper { rtol: f64, atol: f64 },
    /// Exact propagator `exp(L t)`.
    MatrixExponential,
}

impl Default for Propagation {
    fn default() -> Self {
        Propagation::Stepper { rtol: 1e-9, atol: 1e-12 }
    }
}

/// Real form of the generator acting on `(ρ_++, Re ρ_+−, Im ρ_+−, ρ_−−)`.
pub fn real_generator(g: &Generator) -> Matrix4<f64> {
    // vec(ρ) = T x with T mapping the real coordinates to (ρ_++, ρ_+−, ρ_−+, ρ_−−)
    let i = Complex64::i();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let t = [[one, zero, zero, zero], [zero, one, i, zero], [zero, one, -i, zero], [zero, zero, zero, one]];
    let mut gt = [[zero; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            gt[r][c] = (0..4).map(|k| g[r][k] * t[k][c]).sum();
        }
    }
    let rows = [gt[0], gt[1], gt[1], gt[3]];
    Matrix4::from_fn(|r, c| match r {
        2 => rows[r][c].im,
        _ => rows[r][c].re,
    })
}

fn to_real(rho: &DensityMatrix) -> Vector4<f64> {
    Vector4::new(rho.upper(), rho.coherence().re, rho.coherence().im, rho.lower())
}

fn from_real(x: &Vector4<f64>) -> DensityMatrix {
    let c = Complex64::new(x[1], x[2]);
    DensityMatrix::new(Basis::Eigen, [[Complex64::new(x[0], 0.0), c], [c.conj(), Complex64::new(x[3], 0.0)]])
}

struct Linear(Matrix4<f64>);

impl System<f64, Vector4<f64>> for Linear {
    fn system(&self, _t: f64, y: &Vector4<f64>, dy: &mut Vector4<f64>) {
        *dy = self.0 * y;
    }
}

/// Propagates the full Redfield generator of `rates` from `rho0` (eigenbasis).
pub fn evolve_nonsecular(
    rho0: &DensityMatrix,
    rates: &RateSet,
    times: &[f64],
    method: Propagation,
) -> Result<Trajectory, DynamicsError> {
    require_eigen(rho0)?;
    check_grid(times)?;
    let l = real_generator(&rates.generator);
    let mut x = to_real(rho0);
    let mut t_prev = 0.0;
    let mut states = Vec::with_capacity(times.len());
    for &t in times {
        let dt = t - t_prev;
        if dt > 0.0 {
            x = match method {
                Propagation::MatrixExponential => (l * dt).exp() * x,
                Propagation::Stepper { rtol, atol } => step(&l, x, t_prev, t, rtol, atol)?,
            };
        }
        states.push(from_real(&x));
        t_prev = t;
    }
    let (frame, equation) = match rates.frame {
        Frame::Polaron => (FrameTag::Polaron, Equation::PfmeNonsecular),
        Frame::Displaced => (FrameTag::Displaced, Equation::DfmeNonsecular),
    };
    Ok(Trajectory { times: times.to_vec(), states, frame, equation })
}

fn step(l: &Matrix4<f64>, x: Vector4<f64>, t0: f64, t1: f64, rtol: f64, atol: f64) -> Result<Vector4<f64>, DynamicsError> {
    let h_max = t1 - t0;
    let mut solver = Dopri5::from_param(
        Linear(*l),
        t0,
        t1,
        h_max,
        x,
        rtol,
        atol,
        0.9,
        0.04,
        0.2,
        10.0,
        h_max,
        0.0,
        u32::MAX,
        u32::MAX,
        OutputType::Sparse,
    );
    solver.integrate().map_err(|e| DynamicsError::Stepper(e.to_string()))?;
    solver.y_out().last().copied().ok_or_else(|| DynamicsError::Stepper("no output produced".into()))
}

/// Maps polaron-frame bare-basis states to the lab frame by scaling `ρ_eg` with κ.
pub fn to_lab_frame(traj: &Trajectory, kappa: f64) -> Result<Trajectory, DynamicsError> {
    if traj.frame != FrameTag::Polaron {
        return Err(DynamicsError::InvalidState("trajectory is not in the polaron frame".into()));
    }
    if traj.states.iter().any(|r| r.basis != Basis::Bare) {
        return Err(DynamicsError::InvalidState("lab-frame map needs bare-basis states".into()));
    }
    let states = traj
        .states
        .iter()
        .map(|r| {
            let mut m = r.m;
            m[0][1] *= kappa;
            m[1][0] *= kappa;
            DensityMatrix::new(Basis::Bare, m)
        })
        .collect();
    Ok(Trajectory { states, frame: FrameTag::Lab, ..traj.clone() })
}
