use num_complex::Complex64;
use pfme_dynamics::{
    evolve_nonsecular, evolve_secular, thermal_excited_population, to_lab_frame, Basis, BasisMap, DensityMatrix,
    Trajectory,
};
use pfme_oracle::{
    build_effective_hamiltonian, discretise_bath, exact_evolve, CorrOracle, EnsembleOptions, FockConfig, OracleOptions,
};
use pfme_rates::{dfme_rates, Channel, RateEngine, RateOptions, RateSet, Route};
use pfme_spectrum::{
    extract_parameters, polarisation_spectrum, spectra, spectrum_power, BathShape, SpectrumSeries, Variant,
};
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use std::f64::consts::PI;
use std::fmt::Display;
use std::path::Path;

use crate::config::{axis_label, Physics, RunConfig, Scenario};
use crate::output::{fmt_num, io_error, Artefacts, Plot, Table};
use crate::CliError;

fn numerics<E: Display>(module: &'static str) -> impl Fn(E) -> CliError {
    move |e| CliError::Numerics { module, message: e.to_string() }
}

pub fn execute(cfg: &RunConfig) -> Result<Artefacts, CliError> {
    match cfg.scenario {
        Scenario::RatesSweep | Scenario::PhaseSweep | Scenario::Custom => rates_sweep(cfg),
        Scenario::DynamicsCompare => dynamics_compare(cfg),
        Scenario::Spectrum => spectrum(cfg),
        Scenario::Extract => extract(cfg),
        Scenario::OracleValidate => oracle_validate(cfg),
    }
}

/// Secular rates at one point together with the four contributions to γ↓.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub x: f64,
    pub gamma_down: f64,
    pub parts: [f64; 4],
    pub gamma_up: f64,
    pub gamma_d: f64,
    pub eta: f64,
    pub eta_bar: f64,
    pub kappa_sq: f64,
    pub rho_ee: f64,
}

pub fn rate_point(p: &Physics, options: RateOptions, x: f64) -> Result<RatePoint, CliError> {
    let engine = RateEngine::new(p.sys, p.geom, p.bath, options).map_err(numerics("rates"))?;
    let parts = engine.decay_parts().map_err(numerics("rates"))?;
    let set = engine.rate_set().map_err(numerics("rates"))?;
    let rho_ee = thermal_excited_population(&p.sys, engine.kappa()).map_err(numerics("dynamics"))?;
    Ok(RatePoint {
        x,
        gamma_down: set.secular.gamma_down,
        parts: [parts.one_photon.re, parts.two_photon.re, parts.drive_one.re, parts.drive_zero.re],
        gamma_up: set.secular.gamma_up,
        gamma_d: set.secular.gamma_d,
        eta: set.eta,
        eta_bar: set.secular.eta_bar,
        kappa_sq: engine.kappa() * engine.kappa(),
        rho_ee,
    })
}

const RATE_COLUMNS: [&str; 11] = [
    "gamma_down_eV",
    "gamma_down_one_photon_eV",
    "gamma_down_two_photon_eV",
    "gamma_down_drive_one_eV",
    "gamma_down_drive_zero_eV",
    "gamma_up_eV",
    "gamma_d_eV",
    "eta_eV",
    "eta_bar_eV",
    "kappa_sq",
    "rho_ee_thermal",
];

fn rates_sweep(cfg: &RunConfig) -> Result<Artefacts, CliError> {
    let options = cfg.numerics.rate_options();
    let sweep = cfg.effective_sweep();
    let (axis, points) = match &sweep {
        Some(s) => (s.parameter.clone(), s.points()),
        None => ("point".to_string(), vec![0.0]),
    };
    let rows: Vec<RatePoint> = points
        .par_iter()
        .map(|&x| {
            let phys = match &sweep {
                Some(s) => cfg.physics_at(Some((&s.parameter, x)))?,
                None => cfg.physics()?,
            };
            rate_point(&phys, options, x)
        })
        .collect::<Result<_, _>>()?;

    let x_label = axis_label(&axis);
    let mut columns = vec![x_label.clone()];
    columns.extend(RATE_COLUMNS.iter().map(|c| c.to_string()));
    let mut table = Table::with_columns("rates.csv", columns);
    for r in &rows {
        let mut v = vec![r.x, r.gamma_down];
        v.extend(r.parts);
        v.extend([r.gamma_up, r.gamma_d, r.eta, r.eta_bar, r.kappa_sq, r.rho_ee]);
        table.push_numbers(&v);
    }

    let mut art = Artefacts::default();
    let (imin, imax) = extrema(rows.iter().map(|r| r.gamma_down));
    let (lo, hi) = (rows[imin], rows[imax]);
    let res = &mut art.results;
    res.insert("sweep_parameter".into(), json!(axis));
    res.insert("points".into(), json!(rows.len()));
    res.insert("gamma_down_min_eV".into(), json!(lo.gamma_down));
    res.insert("gamma_down_min_at".into(), json!(lo.x));
    res.insert("gamma_down_max_eV".into(), json!(hi.gamma_down));
    res.insert("gamma_down_max_at".into(), json!(hi.x));
    if hi.gamma_down > 0.0 {
        res.insert("gamma_down_min_over_max".into(), json!(lo.gamma_down / hi.gamma_down));
    }
    if rows.iter().any(|r| r.gamma_down < 0.0) {
        art.warnings.push("negative decay rate encountered in the sweep".into());
    }
    if rows.len() == 1 {
        res.insert("gamma_up_eV".into(), json!(lo.gamma_up));
        res.insert("gamma_d_eV".into(), json!(lo.gamma_d));
        res.insert("eta_bar_eV".into(), json!(lo.eta_bar));
        res.insert("kappa_sq".into(), json!(lo.kappa_sq));
        res.insert("rho_ee_thermal".into(), json!(lo.rho_ee));
    }

    if cfg.output.svg && rows.len() > 1 {
        let x: Vec<f64> = rows.iter().map(|r| r.x).collect();
        let names = ["one-photon", "two-photon", "drive one-photon", "drive zero-photon"];
        let mut series = vec![("gamma_down".to_string(), rows.iter().map(|r| r.gamma_down).collect())];
        for (k, n) in names.iter().enumerate() {
            series.push((n.to_string(), rows.iter().map(|r| r.parts[k]).collect()));
        }
        art.plots.push(Plot {
            file: "rates.svg".into(),
            title: format!("decay rate, {}", cfg.scenario.label()),
            x_label,
            y_label: "rate (eV)".into(),
            x,
            series,
        });
    }
    art.tables.push(table);
    Ok(art)
}

fn extrema(values: impl Iterator<Item = f64>) -> (usize, usize) {
    let v: Vec<f64> = values.collect();
    let imin = (0..v.len()).min_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap_or(0);
    let imax = (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap_or(0);
    (imin, imax)
}

/// Polaron-frame and displaced-frame trajectories from a bare-basis initial state.
pub struct MasterEquationRuns {
    pub pfme: RateSet,
    pub dfme: RateSet,
    pub secular: Trajectory,
    pub nonsecular: Trajectory,
    pub lab: Trajectory,
    pub displaced: Trajectory,
}

pub fn master_equation_runs(
    p: &Physics,
    cfg: &RunConfig,
    rho0: &DensityMatrix,
    times: &[f64],
) -> Result<MasterEquationRuns, CliError> {
    let dynamics = numerics("dynamics");
    let pfme = RateEngine::new(p.sys, p.geom, p.bath, cfg.numerics.rate_options())
        .and_then(|e| e.rate_set())
        .map_err(numerics("rates"))?;
    let dfme = dfme_rates(&p.sys, &p.geom, &p.bath).map_err(numerics("rates"))?;
    let method = cfg.numerics.propagation();
    let pmap = BasisMap::new(pfme.mixing_angle, p.sys.drive_phase);
    let start = pmap.to_eigen(rho0);
    let secular = evolve_secular(&start, &pfme.secular, times).map_err(&dynamics)?.to_bare(&pmap);
    let nonsecular = evolve_nonsecular(&start, &pfme, times, method).map_err(&dynamics)?.to_bare(&pmap);
    let lab = to_lab_frame(&nonsecular, pfme.kappa).map_err(&dynamics)?;
    let dmap = BasisMap::new(dfme.mixing_angle, p.sys.drive_phase);
    let displaced = evolve_nonsecular(&dmap.to_eigen(rho0), &dfme, times, method).map_err(&dynamics)?.to_bare(&dmap);
    Ok(MasterEquationRuns { pfme, dfme, secular, nonsecular, lab, displaced })
}

/// Secular relaxation time `1/(γ↓ + γ↑)`.
pub fn relaxation_time(set: &RateSet) -> f64 {
    1.0 / (set.secular.gamma_down + set.secular.gamma_up)
}

fn steady_lower(set: &RateSet, drive_phase: f64) -> f64 {
    let map = BasisMap::new(set.mixing_angle, drive_phase);
    map.to_bare(&DensityMatrix::diagonal(Basis::Eigen, set.secular.upper_population())).lower()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn dynamics_compare(cfg: &RunConfig) -> Result<Artefacts, CliError> {
    let phys = cfg.physics()?;
    let d = &cfg.dynamics;
    let probe = RateEngine::new(phys.sys, phys.geom, phys.bath, cfg.numerics.rate_options())
        .and_then(|e| e.rate_set())
        .map_err(numerics("rates"))?;
    let t_rel = relaxation_time(&probe);
    let t_max = d.t_max.unwrap_or(3.0 * t_rel);
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(CliError::Numerics { module: "dynamics", message: format!("relaxation time {t_rel} is not usable") });
    }
    let n = d.steps - 1;
    let times: Vec<f64> = (0..=n).map(|k| t_max * k as f64 / n as f64).collect();
    let rho0 = DensityMatrix::diagonal(Basis::Bare, d.initial_excited);
    let runs = master_equation_runs(&phys, cfg, &rho0, &times)?;

    let secular = runs.secular.lower();
    let nonsecular = runs.nonsecular.lower();
    let displaced = runs.displaced.lower();
    let coherence: Vec<f64> = runs.lab.states.iter().map(|r| r.coherence().norm()).collect();

    let mut art = Artefacts::default();
    let exact = if d.exact {
        let db = discretise_bath(&phys.bath, &phys.geom, d.modes).map_err(numerics("oracle"))?;
        let fc = FockConfig { cutoffs: d.cutoffs.clone(), max_dim: d.max_dim };
        let h = build_effective_hamiltonian(&db, &phys.sys, &fc).map_err(numerics("oracle"))?;
        let run = exact_evolve(&h, phys.sys.beta, &times, &EnsembleOptions { discard_tol: d.discard_tol })
            .map_err(numerics("oracle"))?;
        let res = &mut art.results;
        res.insert("exact_modes".into(), json!(db.nu));
        res.insert("exact_dimension".into(), json!(h.dim()));
        res.insert("exact_members".into(), json!(run.members));
        res.insert("exact_discarded_weight".into(), json!(run.discarded_weight));
        res.insert("exact_max_norm_drift".into(), json!(run.max_norm_drift));
        Some(run.trajectory.lower())
    } else {
        None
    };

    let mut columns = vec!["time_per_eV", "rho_gg_pfme_secular", "rho_gg_pfme_nonsecular", "rho_gg_dfme"];
    if exact.is_some() {
        columns.push("rho_gg_exact");
    }
    columns.push("abs_rho_eg_pfme_lab");
    let mut table = Table::new("dynamics.csv", &columns);
    for (k, t) in times.iter().enumerate() {
        let mut row = vec![*t, secular[k], nonsecular[k], displaced[k]];
        if let Some(e) = &exact {
            row.push(e[k]);
        }
        row.push(coherence[k]);
        table.push_numbers(&row);
    }

    let res = &mut art.results;
    res.insert("relaxation_time_per_eV".into(), json!(t_rel));
    res.insert("t_max_per_eV".into(), json!(t_max));
    res.insert("kappa".into(), json!(runs.pfme.kappa));
    res.insert("pfme_gamma_down_eV".into(), json!(runs.pfme.secular.gamma_down));
    res.insert("pfme_gamma_up_eV".into(), json!(runs.pfme.secular.gamma_up));
    res.insert("dfme_gamma_down_eV".into(), json!(runs.dfme.secular.gamma_down));
    res.insert("dfme_gamma_up_eV".into(), json!(runs.dfme.secular.gamma_up));
    res.insert("pfme_steady_rho_gg".into(), json!(steady_lower(&runs.pfme, phys.sys.drive_phase)));
    res.insert("dfme_steady_rho_gg".into(), json!(steady_lower(&runs.dfme, phys.sys.drive_phase)));
    res.insert("final_rho_gg_pfme_secular".into(), json!(secular[n]));
    res.insert("final_rho_gg_pfme_nonsecular".into(), json!(nonsecular[n]));
    res.insert("final_rho_gg_dfme".into(), json!(displaced[n]));
    if let Some(e) = &exact {
        res.insert("final_rho_gg_exact".into(), json!(e[n]));
        res.insert("max_error_pfme_secular".into(), json!(max_abs_diff(&secular, e)));
        res.insert("max_error_pfme_nonsecular".into(), json!(max_abs_diff(&nonsecular, e)));
        res.insert("max_error_dfme".into(), json!(max_abs_diff(&displaced, e)));
    }

    if cfg.output.svg {
        let mut series = vec![
            ("PFME secular".to_string(), secular),
            ("PFME non-secular".to_string(), nonsecular),
            ("DFME".to_string(), displaced),
        ];
        if let Some(e) = exact {
            series.push(("exact few-mode".to_string(), e));
        }
        art.plots.push(Plot {
            file: "dynamics.svg".into(),
            title: "ground-state population".into(),
            x_label: "t (1/eV)".into(),
            y_label: "rho_gg".into(),
            x: times,
            series,
        });
    }
    art.tables.push(table);
    Ok(art)
}

fn series_summary(s: &SpectrumSeries) -> Value {
    json!({
        "power": spectrum_power(s),
        "continuum_power": s.continuum_power(),
        "line_power": s.line_power(),
        "kappa_sq": s.kappa_sq,
        "rho_ee": s.rho_ee,
        "tail_mass": s.tail_mass,
        "points": s.omega.len(),
    })
}

fn shape(cfg: &RunConfig, p: &Physics) -> BathShape {
    BathShape { huang_rhys: p.bath.huang_rhys, cutoff: p.bath.cutoff, solid_angle: cfg.dipoles.solid_angle }
}

fn spectrum(cfg: &RunConfig) -> Result<Artefacts, CliError> {
    let phys = cfg.physics()?;
    let set = spectra(&phys.sys, &phys.geom, &phys.bath, &cfg.spectrum.options()).map_err(numerics("spectrum"))?;
    let mut table = Table::new(
        "spectrum.csv",
        &["omega_eV", "I_with_sideband_per_eV", "I_no_sideband_per_eV", "I_no_pd_per_eV"],
    );
    for (k, w) in set.with_sideband.omega.iter().enumerate() {
        table.push_numbers(&[*w, set.with_sideband.intensity[k], set.no_sideband.intensity[k], set.no_pd.intensity[k]]);
    }
    let mut lines = Table::new("spectrum_lines.csv", &["variant", "position_eV", "weight"]);
    for v in Variant::ALL {
        for l in &set.get(v).lines {
            lines.push(vec![v.label().to_string(), fmt_num(l.position), fmt_num(l.weight)]);
        }
    }

    let mut art = Artefacts::default();
    let full = &set.with_sideband;
    let p = spectrum_power(full);
    let res = &mut art.results;
    for v in Variant::ALL {
        res.insert(v.label().into(), series_summary(set.get(v)));
    }
    res.insert("power_sum_rule_rel_error".into(), json!((p - PI * full.rho_ee).abs() / p));
    res.insert("no_sideband_fraction".into(), json!(spectrum_power(&set.no_sideband) / p));
    res.insert("sideband_fraction_error".into(), json!((spectrum_power(&set.no_sideband) / p - full.kappa_sq).abs()));
    match extract_parameters(full, phys.sys.beta, &shape(cfg, &phys), &cfg.extract.options()) {
        Ok(r) => {
            res.insert("extraction".into(), serde_json::to_value(&r).expect("report serialises"));
        }
        Err(e) => art.warnings.push(format!("extraction failed: {e}")),
    }
    for v in Variant::ALL {
        art.warnings.extend(set.get(v).warnings.iter().map(|w| format!("{}: {w}", v.label())));
    }

    if cfg.output.svg {
        art.plots.push(Plot {
            file: "spectrum.svg".into(),
            title: "polarisation spectrum".into(),
            x_label: "omega (eV)".into(),
            y_label: "I (1/eV)".into(),
            x: full.omega.clone(),
            series: Variant::ALL.iter().map(|v| (v.label().to_string(), set.get(*v).intensity.clone())).collect(),
        });
    }
    art.tables.push(table);
    art.tables.push(lines);
    Ok(art)
}

/// Reads `omega_eV` and `column` from a spectrum CSV.
pub fn read_spectrum_csv(path: &Path, column: &str) -> Result<SpectrumSeries, CliError> {
    let name = path.display().to_string();
    let config = |reason: String| CliError::Config { field: "extract.input".into(), reason };
    let mut reader = csv::Reader::from_path(path).map_err(|e| config(format!("cannot read {name}: {e}")))?;
    let headers = reader.headers().map_err(|e| io_error(&name, e))?.clone();
    let find = |c: &str| headers.iter().position(|h| h == c).ok_or_else(|| config(format!("{name} has no column `{c}`")));
    let (iw, ii) = (find("omega_eV")?, find(column)?);
    let mut omega = Vec::new();
    let mut intensity = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| io_error(&name, e))?;
        let parse = |k: usize| -> Result<f64, CliError> {
            rec.get(k)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| config(format!("{name} row {}: column {k} is not a number", line + 2)))
        };
        omega.push(parse(iw)?);
        intensity.push(parse(ii)?);
    }
    let s = SpectrumSeries {
        variant: Variant::WithSideband,
        omega,
        intensity,
        lines: Vec::new(),
        kappa_sq: f64::NAN,
        rho_ee: f64::NAN,
        tail_mass: 0.0,
        warnings: Vec::new(),
    };
    s.validate().map_err(|e| config(e.to_string()))?;
    Ok(s)
}

fn extract(cfg: &RunConfig) -> Result<Artefacts, CliError> {
    let phys = cfg.physics()?;
    let (series, source) = match &cfg.extract.input {
        Some(path) => (read_spectrum_csv(path, &cfg.extract.column)?, path.display().to_string()),
        None => (
            polarisation_spectrum(&phys.sys, &phys.geom, &phys.bath, Variant::WithSideband, &cfg.spectrum.options())
                .map_err(numerics("spectrum"))?,
            "computed".to_string(),
        ),
    };
    let report = extract_parameters(&series, phys.sys.beta, &shape(cfg, &phys), &cfg.extract.options())
        .map_err(numerics("spectrum"))?;

    let mut peaks = Table::new(
        "peaks.csv",
        &["centre_eV", "height_per_eV", "fwhm_eV", "region_lo_eV", "region_hi_eV"],
    );
    for (pk, rg) in report.peaks.iter().zip(&report.regions) {
        peaks.push_numbers(&[pk.centre, pk.height, pk.fwhm, rg.lo, rg.hi]);
    }
    let mut art = Artefacts::default();
    art.warnings.extend(report.failures.iter().cloned());
    art.results.insert("source".into(), json!(source));
    let value = serde_json::to_value(&report).expect("report serialises");
    if let Value::Object(m) = value {
        for (k, v) in m {
            if k != "peaks" && k != "regions" && k != "failures" {
                art.results.insert(k, v);
            }
        }
    }
    art.tables.push(peaks);
    Ok(art)
}

fn rel_diff(a: Complex64, b: Complex64, floor: f64) -> f64 {
    (a - b).norm() / b.norm().max(floor)
}

fn oracle_validate(cfg: &RunConfig) -> Result<Artefacts, CliError> {
    let phys = cfg.physics()?;
    let rates = numerics("rates");
    let tail_tol = cfg.numerics.tail_tol;
    let quad = RateEngine::new(phys.sys, phys.geom, phys.bath, RateOptions { route: Route::Quadrature, tail_tol })
        .map_err(&rates)?;
    let series = RateEngine::new(
        phys.sys,
        phys.geom,
        phys.bath,
        RateOptions { route: Route::Series { series: cfg.numerics.series_kind() }, tail_tol },
    )
    .map_err(&rates)?;
    let oracle = CorrOracle::new(&phys.sys, &phys.geom, &phys.bath, OracleOptions::default()).map_err(numerics("oracle"))?;
    let t_quad = quad.gamma_table().map_err(&rates)?;
    let t_series = series.gamma_table().map_err(&rates)?;
    let t_oracle = oracle.gamma_table().map_err(numerics("oracle"))?;

    let eta = t_quad.eta;
    let mut entries = Vec::new();
    for a in Channel::ALL {
        for b in Channel::ALL {
            for w in [-eta, 0.0, eta] {
                entries.push((a, b, w, t_series.get(a, b, w), t_quad.get(a, b, w), t_oracle.get(a, b, w)));
            }
        }
    }
    let scale = entries.iter().map(|e| e.5.norm()).fold(0.0, f64::max);
    let floor = 1e-9 * scale.max(f64::MIN_POSITIVE);
    let mut table = Table::new(
        "oracle_validate.csv",
        &[
            "alpha",
            "beta",
            "omega_eV",
            "series_re_eV",
            "series_im_eV",
            "quadrature_re_eV",
            "quadrature_im_eV",
            "oracle_re_eV",
            "oracle_im_eV",
            "rel_series_vs_oracle",
            "rel_quadrature_vs_oracle",
        ],
    );
    let (mut worst_series, mut worst_quad) = (0.0f64, 0.0f64);
    for (a, b, w, s, q, o) in &entries {
        let (rs, rq) = (rel_diff(*s, *o, floor), rel_diff(*q, *o, floor));
        worst_series = worst_series.max(rs);
        worst_quad = worst_quad.max(rq);
        let mut row = vec![channel_name(*a).to_string(), channel_name(*b).to_string()];
        row.extend([*w, s.re, s.im, q.re, q.im, o.re, o.im, rs, rq].iter().map(|x| fmt_num(*x)));
        table.push(row);
    }

    let secular = |t| pfme_rates::SecularRates::from_table(t);
    let (ss, sq, so) = (secular(&t_series), secular(&t_quad), secular(&t_oracle));
    let mut assembled = Map::new();
    for (name, f) in [
        ("gamma_down", (ss.gamma_down, sq.gamma_down, so.gamma_down)),
        ("gamma_up", (ss.gamma_up, sq.gamma_up, so.gamma_up)),
        ("gamma_d", (ss.gamma_d, sq.gamma_d, so.gamma_d)),
    ] {
        let (s, q, o) = f;
        let rs = (s - o).abs() / o.abs();
        let rq = (q - o).abs() / o.abs();
        worst_series = worst_series.max(rs);
        worst_quad = worst_quad.max(rq);
        assembled.insert(
            name.into(),
            json!({"series_eV": s, "quadrature_eV": q, "oracle_eV": o, "rel_series_vs_oracle": rs, "rel_quadrature_vs_oracle": rq}),
        );
    }
    let mut art = Artefacts::default();
    let res = &mut art.results;
    res.insert("eta_eV".into(), json!(eta));
    res.insert("assembled".into(), Value::Object(assembled));
    res.insert("max_rel_series_vs_oracle".into(), json!(worst_series));
    res.insert("max_rel_quadrature_vs_oracle".into(), json!(worst_quad));
    art.tables.push(table);
    Ok(art)
}

fn channel_name(c: Channel) -> &'static str {
    match c {
        Channel::Z => "z",
        Channel::Plus => "+",
        Channel::Minus => "-",
    }
}
