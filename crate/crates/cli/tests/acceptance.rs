//! Acceptance criteria 1 to 9, one PASS/FAIL line each.
//!
//! Criteria 4 and 8 are reported but do not fail the run; every other
//! criterion must pass.

use num_complex::Complex64;
use pfme_bath::{line_weights, sideband_lines, truncation_mode, BathSpec, Propagator, SeriesKind};
use pfme_dynamics::{
    evolve_nonsecular, thermal_excited_population, Basis, BasisMap, DensityMatrix, Propagation,
};
use pfme_model::{coupling_weights, DipoleGeometry, SolidAngle, SystemParams};
use pfme_oracle::{build_effective_hamiltonian, discretise_bath, exact_evolve, CorrOracle, EnsembleOptions, FockConfig, OracleOptions};
use pfme_rates::{dfme_rates, gamma_some, Channel, CorrKind, GammaTable, RateEngine, RateOptions, RateSet, SecularRates};
use pfme_spectrum::{extract_parameters, spectra, spectrum_power, BathShape, ExtractOptions, SpectrumOptions, Variant};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

type Check = Result<(bool, String), String>;

const S: f64 = 1.0 / PI;
const BETA: f64 = 2.0;

fn bath(cutoff: f64) -> BathSpec {
    BathSpec::new(S, cutoff, BETA).unwrap()
}

fn sys(eps: f64, drive: f64) -> SystemParams {
    SystemParams::with_signed_drive(eps, drive, BETA).unwrap()
}

fn geom(d_delta: f64, solid: SolidAngle) -> DipoleGeometry {
    DipoleGeometry::with_signed_delta(0.01, d_delta, 0.0, solid).unwrap()
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn kappa_sq(g: &DipoleGeometry, b: &BathSpec) -> f64 {
    Propagator::new(*b, coupling_weights(g).omega_deltadelta).kappa_sq()
}

fn within_runtime(t: Duration, limit: Duration, (ok, detail): (bool, String)) -> (bool, String) {
    let fast = t < limit;
    (ok && fast, format!("{detail}; runtime {:.2} s (limit {:.0} s)", t.as_secs_f64(), limit.as_secs_f64()))
}

fn criterion_1() -> Check {
    let b = bath(1.0);
    let mut ok = true;
    let mut parts = Vec::new();
    for (d, target) in [(0.05, 0.962), (0.1, 0.855)] {
        let k2 = kappa_sq(&geom(d, SolidAngle::Isotropic), &b);
        ok &= (k2 - target).abs() <= 1e-3;
        parts.push(format!("kappa^2({d}) = {k2:.5} (target {target} +/- 0.001)"));
    }
    Ok((ok, parts.join(", ")))
}

fn criterion_2() -> Check {
    let b = bath(1.0);
    let mut ok = true;
    let mut parts = Vec::new();
    for (d, v, target, tol) in [(0.05, 0.05, 0.120, 1e-3), (0.1, 0.25, 0.136, 2e-3)] {
        let k = kappa_sq(&geom(d, SolidAngle::Isotropic), &b).sqrt();
        let rho = thermal_excited_population(&sys(1.0, v), k).map_err(err)?;
        ok &= (rho - target).abs() <= tol;
        parts.push(format!("rho_ee(d={d}, V={v}) = {rho:.5} (target {target} +/- {tol})"));
    }
    Ok((ok, parts.join(", ")))
}

fn criterion_3() -> Check {
    let mut ok = true;
    let (mut worst_up, mut worst_d, mut slowest) = (0.0f64, 0.0f64, Duration::ZERO);
    for cutoff in [0.2, 1.0] {
        for d in [-0.5, 0.0, 0.26, 0.5] {
            let t0 = Instant::now();
            let r = RateEngine::new(sys(1.0, 0.0), geom(d, SolidAngle::Isotropic), bath(cutoff), RateOptions::default())
                .and_then(|e| e.rate_set())
                .map_err(err)?
                .secular;
            slowest = slowest.max(t0.elapsed());
            worst_up = worst_up.max((r.gamma_up / r.gamma_down - (-2.0f64).exp()).abs());
            worst_d = worst_d.max((r.gamma_d / r.gamma_down - 0.5677).abs());
        }
    }
    ok &= worst_up <= 1e-4 && worst_d <= 1e-4;
    Ok(within_runtime(
        slowest,
        Duration::from_secs(10),
        (ok, format!("max |gamma_up/gamma_down - e^-2| = {worst_up:.2e}, max |gamma_d/gamma_down - 0.5677| = {worst_d:.2e} over 8 points")),
    ))
}

fn decay_rate(d: f64) -> Result<f64, String> {
    RateEngine::new(sys(1.0, 0.05), geom(d, SolidAngle::Isotropic), bath(1.0), RateOptions::default())
        .and_then(|e| e.rate_set())
        .map(|r| r.secular.gamma_down)
        .map_err(err)
}

fn criterion_4() -> Check {
    let grid: Vec<f64> = (0..=100).map(|k| -0.5 + 0.01 * k as f64).collect();
    let rates: Vec<f64> = grid.par_iter().map(|&d| decay_rate(d)).collect::<Result<_, _>>()?;
    let max = rates.iter().cloned().fold(f64::MIN, f64::max);
    let imin = (0..rates.len()).min_by(|&a, &b| rates[a].total_cmp(&rates[b])).unwrap();
    let grid_ratio = rates[imin] / max;

    // golden-section search in the neighbouring grid cells
    let (mut a, mut b) = (grid[imin.saturating_sub(1)], grid[(imin + 1).min(grid.len() - 1)]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut e) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fe) = (decay_rate(c)?, decay_rate(e)?);
    while b - a > 1e-7 {
        if fc < fe {
            b = e;
            e = c;
            fe = fc;
            c = b - g * (b - a);
            fc = decay_rate(c)?;
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + g * (b - a);
            fe = decay_rate(e)?;
        }
    }
    let (d_min, g_min) = if fc < fe { (c, fc) } else { (e, fe) };
    let ratio = g_min / max;
    let ok = (1.0 / 8000.0..=1.0 / 2000.0).contains(&ratio) && (d_min - 0.1).abs() < 0.05;
    Ok((
        ok,
        format!(
            "minimum gamma_down = {g_min:.3e} eV at d = {d_min:.5}, max {max:.3e} eV, min/max = {ratio:.3e} (1/{:.0}); \
             101-point grid gives min/max = {grid_ratio:.3e} at d = {:.2}; window [1/8000, 1/2000]",
            1.0 / ratio,
            grid[imin]
        ),
    ))
}

fn criterion_5() -> Check {
    let b = bath(1.0);
    let mut ok = true;
    let mut parts = Vec::new();
    for (d, v) in [(0.05, 0.05), (0.1, 0.25)] {
        let t0 = Instant::now();
        let set = spectra(&sys(1.0, v), &geom(d, SolidAngle::Isotropic), &b, &SpectrumOptions::default()).map_err(err)?;
        let elapsed = t0.elapsed();
        let p = spectrum_power(&set.with_sideband);
        let power_err = (p - PI * set.with_sideband.rho_ee).abs() / p;
        let k2 = set.with_sideband.kappa_sq;
        let frac_err = (spectrum_power(&set.no_sideband) / p - k2).abs() / k2;
        ok &= power_err < 1e-2 && frac_err < 5e-3 && elapsed < Duration::from_secs(60);
        parts.push(format!(
            "(d={d}, V={v}): |P - pi rho|/P = {power_err:.2e}, |int I_x/P - kappa^2|/kappa^2 = {frac_err:.2e}, {:.2} s",
            elapsed.as_secs_f64()
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn criterion_6() -> Check {
    let b = bath(1.0);
    let shape = BathShape { huang_rhys: S, cutoff: 1.0, solid_angle: SolidAngle::Isotropic };
    let cases = [((0.05, 0.05), [0.953, 0.119, 1.004, 0.027, 0.050]), ((0.1, 0.25), [0.832, 0.113, 1.071, 0.164, 0.108])];
    let mut ok = true;
    let mut parts = Vec::new();
    for ((d, v), m) in cases {
        let set = spectra(&sys(1.0, v), &geom(d, SolidAngle::Isotropic), &b, &SpectrumOptions::default()).map_err(err)?;
        let r = extract_parameters(set.get(Variant::WithSideband), BETA, &shape, &ExtractOptions::default()).map_err(err)?;
        let got = [r.kappa_sq, r.rho_ee_inf, r.epsilon_hat, r.v_hat, r.d_delta_hat];
        let tol = [0.01, 0.01, 0.08, 0.5 * m[3], 0.01];
        let mut row = Vec::new();
        for (k, name) in ["kappa^2", "rho_ee", "eps", "|V|", "|d|"].iter().enumerate() {
            match got[k] {
                Some(x) => {
                    ok &= (x - m[k]).abs() <= tol[k];
                    row.push(format!("{name} {x:.3}/{}", m[k]));
                }
                None => {
                    ok = false;
                    row.push(format!("{name} missing"));
                }
            }
        }
        parts.push(format!("(d={d}, V={v}): {}", row.join(" ")));
    }
    Ok((ok, parts.join("; ")))
}

fn worst_relative(a: &GammaTable, b: &GammaTable) -> f64 {
    let eta = b.eta;
    let mut pairs: Vec<(Complex64, Complex64)> = Vec::new();
    for x in Channel::ALL {
        for y in Channel::ALL {
            for w in [-eta, 0.0, eta] {
                pairs.push((a.get(x, y, w), b.get(x, y, w)));
            }
        }
    }
    let scale = pairs.iter().map(|p| p.1.norm()).fold(0.0, f64::max);
    let floor = 1e-9 * scale;
    let mut worst = pairs.iter().map(|(p, q)| (p - q).norm() / q.norm().max(floor)).fold(0.0, f64::max);
    let (sa, sb) = (SecularRates::from_table(a), SecularRates::from_table(b));
    for (p, q) in [(sa.gamma_down, sb.gamma_down), (sa.gamma_up, sb.gamma_up), (sa.gamma_d, sb.gamma_d)] {
        worst = worst.max((p - q).abs() / q.abs());
    }
    worst
}

fn criterion_7() -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for cutoff in [0.2, 1.0] {
        for d in [0.1, 0.26] {
            let (s, g, b) = (sys(1.0, 0.0), geom(d, SolidAngle::Isotropic), bath(cutoff));
            let oracle = CorrOracle::new(&s, &g, &b, OracleOptions::default()).map_err(err)?.gamma_table().map_err(err)?;
            let series = RateEngine::new(s, g, b, RateOptions::series(SeriesKind::default()))
                .and_then(|e| e.gamma_table())
                .map_err(err)?;
            let quad = RateEngine::new(s, g, b, RateOptions::default()).and_then(|e| e.gamma_table()).map_err(err)?;
            let (rs, rq) = (worst_relative(&series, &oracle), worst_relative(&quad, &oracle));
            ok &= rs < 1e-2 && rq < 1e-3;
            parts.push(format!("(nu_c={cutoff}, d={d}): series {rs:.1e}, quadrature {rq:.1e}"));
        }
    }
    Ok((ok, format!("max relative deviation from the oracle over all channels and gamma_down/up/d: {}", parts.join(", "))))
}

fn ground_population(set: &RateSet, drive_phase: f64, times: &[f64]) -> Result<Vec<f64>, String> {
    let map = BasisMap::new(set.mixing_angle, drive_phase);
    let start = map.to_eigen(&DensityMatrix::diagonal(Basis::Bare, 0.0));
    Ok(evolve_nonsecular(&start, set, times, Propagation::MatrixExponential).map_err(err)?.to_bare(&map).lower())
}

fn criterion_8() -> Check {
    let (s, g, b) = (sys(0.36, -0.0064), geom(0.5, SolidAngle::Aligned), bath(1.0));
    let pfme = RateEngine::new(s, g, b, RateOptions::default()).and_then(|e| e.rate_set()).map_err(err)?;
    let dfme = dfme_rates(&s, &g, &b).map_err(err)?;
    let t_rel = 1.0 / (pfme.secular.gamma_down + pfme.secular.gamma_up);
    let times: Vec<f64> = (0..=200).map(|k| 3.0 * t_rel * k as f64 / 200.0).collect();
    let p = ground_population(&pfme, s.drive_phase, &times)?;
    let q = ground_population(&dfme, s.drive_phase, &times)?;

    let db = discretise_bath(&b, &g, 3).map_err(err)?;
    let fc = FockConfig { cutoffs: vec![7, 4, 3], max_dim: 4096 };
    let h = build_effective_hamiltonian(&db, &s, &fc).map_err(err)?;
    let run = exact_evolve(&h, BETA, &times, &EnsembleOptions::default()).map_err(err)?;
    let x = run.trajectory.lower();

    let max_err = |y: &[f64]| y.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let (ep, ed) = (max_err(&p), max_err(&q));
    let map = BasisMap::new(pfme.mixing_angle, s.drive_phase);
    let steady = map.to_bare(&DensityMatrix::diagonal(Basis::Eigen, pfme.secular.upper_population())).lower();
    let steady_gap = (steady - x[x.len() - 1]).abs();
    if !(ed > ep) {
        return Err(format!("DFME error {ed:.3e} does not exceed PFME error {ep:.3e}"));
    }
    let ok = ep < 0.05 && steady_gap < 0.02 && ed > ep;
    Ok((
        ok,
        format!(
            "N=3 modes at nu = {:.2?}, dim {}, t_rel = {t_rel:.3e} 1/eV: max |rho_gg PFME - exact| = {ep:.3} (limit 0.05), \
             steady-state gap {steady_gap:.3} (limit 0.02), DFME error {ed:.3} > PFME error {ep:.3}; exact rho_gg(3 t_rel) = {:.4}, \
             discarded thermal weight {:.1e}",
            db.nu,
            h.dim(),
            x[x.len() - 1],
            run.discarded_weight
        ),
    ))
}

fn criterion_9() -> Check {
    let b = bath(1.0);
    let mut failures = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_string());
        }
    };

    // line-weight normalisation
    let mut worst_norm = 0.0f64;
    for d in [0.05, 0.26, 0.5, 1.0] {
        let w = coupling_weights(&geom(d, SolidAngle::Isotropic)).omega_deltadelta;
        let mode = truncation_mode(&b, w).map_err(err)?;
        worst_norm = worst_norm.max((line_weights(&mode.with_sign(1), BETA, 1e-12).map_err(err)?.total() - 1.0).abs());
        let lattice = sideband_lines(&b, w, SeriesKind::default(), 1, 1e-12).map_err(err)?;
        worst_norm = worst_norm.max((lattice.total() - 1.0).abs());
    }
    check("A_l normalisation", worst_norm < 1e-10);

    // trace and Hermiticity under the full generator
    let (s, g) = (sys(1.0, 0.25), geom(0.1, SolidAngle::Isotropic));
    let set = RateEngine::new(s, g, b, RateOptions::default()).and_then(|e| e.rate_set()).map_err(err)?;
    let rho0 = DensityMatrix::pure(Basis::Eigen, Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8));
    let times: Vec<f64> = (0..=50).map(|k| 200.0 * k as f64).collect();
    let traj = evolve_nonsecular(&rho0, &set, &times, Propagation::MatrixExponential).map_err(err)?;
    let drift = traj.states.iter().map(|r| (r.trace() - 1.0).norm().max(r.hermiticity_error())).fold(0.0, f64::max);
    check("trace/Hermiticity", drift < 1e-10);

    // V = 0 freezes coherences
    let set0 = RateEngine::new(sys(1.0, 0.0), g, b, RateOptions::default()).and_then(|e| e.rate_set()).map_err(err)?;
    let ns = set0.nonsecular;
    check("V=0 couplings", ns.gamma_bar == Complex64::new(0.0, 0.0) && ns.k_plus == Complex64::new(0.0, 0.0) && ns.k_minus == Complex64::new(0.0, 0.0));
    let traj0 = evolve_nonsecular(&DensityMatrix::diagonal(Basis::Eigen, 0.3), &set0, &times, Propagation::MatrixExponential).map_err(err)?;
    check("V=0 coherence freeze", traj0.states.iter().all(|r| r.coherence() == Complex64::new(0.0, 0.0)));

    // perpendicular dipoles remove the cross channels
    let perp = DipoleGeometry::new(0.01, 0.26, 0.0, PI / 2.0, 0.0, SolidAngle::Isotropic).map_err(err)?;
    let engine = RateEngine::new(sys(1.0, 0.05), perp, b, RateOptions::default()).map_err(err)?;
    let mut perp_ok = true;
    for kind in CorrKind::ALL {
        for w in [-1.0, 0.0, 1.0] {
            let c = engine.corr_ft(kind, w).map_err(err)?;
            perp_ok &= c.drive_one == Complex64::new(0.0, 0.0) && c.two_photon == Complex64::new(0.0, 0.0);
        }
    }
    check("theta=pi/2 channels", perp_ok);

    // standard optical limit
    let g_none = geom(0.0, SolidAngle::Isotropic);
    let r = RateEngine::new(sys(1.0, 0.0), g_none, b, RateOptions::default()).and_then(|e| e.rate_set()).map_err(err)?;
    let some = 2.0 * gamma_some(1.0, &coupling_weights(&g_none), &b).map_err(err)?.re;
    check("SOME limit", (r.secular.gamma_down - some).abs() <= 1e-8 * some.abs());

    // drive phase periodicity
    let mut worst_phase = 0.0f64;
    for phase in [0.3, 1.7, 4.0] {
        let at = |p: f64| {
            let s = SystemParams::new(1.0, 0.05, p, BETA).unwrap();
            RateEngine::new(s, g, b, RateOptions::default()).and_then(|e| e.rate_set()).map(|r| r.secular)
        };
        let (x, y) = (at(phase).map_err(err)?, at(phase + 2.0 * PI).map_err(err)?);
        worst_phase = worst_phase.max((x.gamma_down - y.gamma_down).abs() / x.gamma_down.abs());
        worst_phase = worst_phase.max((x.gamma_d - y.gamma_d).abs() / x.gamma_d.abs());
    }
    check("2pi periodicity", worst_phase < 1e-12);

    let ok = failures.is_empty();
    let detail = format!(
        "line-weight norm error {worst_norm:.1e}, trace/Hermiticity drift {drift:.1e}, phase periodicity {worst_phase:.1e}{}",
        if ok { String::new() } else { format!("; failing: {}", failures.join(", ")) }
    );
    Ok((ok, detail))
}

fn main() -> ExitCode {
    let criteria: [(u8, &str, fn() -> Check); 9] = [
        (1, "kappa^2 reproduction", criterion_1),
        (2, "thermal steady state", criterion_2),
        (3, "detailed balance", criterion_3),
        (4, "rate suppression", criterion_4),
        (5, "spectrum sum rules", criterion_5),
        (6, "parameter extraction round-trip", criterion_6),
        (7, "oracle equivalence of rates", criterion_7),
        (8, "exact-dynamics property check", criterion_8),
        (9, "invariant suites", criterion_9),
    ];
    let reported_only = [4u8, 8];
    let mut blocking = 0;
    for (id, title, f) in criteria {
        let t0 = Instant::now();
        let (pass, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        let limit = match id {
            1 | 2 => Some(Duration::from_secs(1)),
            4 => Some(Duration::from_secs(120)),
            _ => None,
        };
        let elapsed = t0.elapsed();
        let (pass, detail) = match limit {
            Some(l) => within_runtime(elapsed, l, (pass, detail)),
            None => (pass, format!("{detail}; {:.2} s", elapsed.as_secs_f64())),
        };
        println!("criterion {id} ({title}): {} | {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass && !reported_only.contains(&id) {
            blocking += 1;
        }
    }
    if blocking == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{blocking} blocking criteria failed");
        ExitCode::FAILURE
    }
}
