use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use pfme_bath::BathSpec;
use pfme_model::{DipoleGeometry, SolidAngle, SystemParams};
use pfme_rates::rate_set;
use pfme_spectrum::*;
use std::f64::consts::PI;

fn bath() -> BathSpec {
    BathSpec::new(1.0 / PI, 1.0, 2.0).unwrap()
}

fn case(d: f64, v: f64) -> (SystemParams, DipoleGeometry) {
    (
        SystemParams::new(1.0, v, 0.0, 2.0).unwrap(),
        DipoleGeometry::new(0.01, d, 0.0, 0.0, 0.0, SolidAngle::Isotropic).unwrap(),
    )
}

fn shape() -> BathShape {
    BathShape { huang_rhys: 1.0 / PI, cutoff: 1.0, solid_angle: SolidAngle::Isotropic }
}

fn coarse() -> SpectrumOptions {
    SpectrumOptions { grid: GridOptions { spacing: 1.0 / 50.0, ..GridOptions::default() }, ..Default::default() }
}

#[test]
fn correlation_at_zero_lag_is_excited_population() {
    let (sys, geom) = case(0.1, 0.25);
    let m = QrtModel::build(&sys, &geom, &bath(), QrtGenerator::Secular).unwrap();
    let c0 = qrt_correlation(&[0.0], &sys, &geom, &bath()).unwrap()[0];
    assert!((c0 - m.rho_ee).norm() < 1e-14);
    assert!((m.rho_ee - 0.136).abs() < 2e-3);
}

#[test]
fn undriven_correlation_decays_at_dephasing_rate() {
    let (sys, geom) = case(0.2, 0.0);
    let m = QrtModel::build(&sys, &geom, &bath(), QrtGenerator::Secular).unwrap();
    let g = m.secular.gamma_d;
    for &t in &[0.0, 100.0, 2000.0, 1e4] {
        let c = m.eval(t);
        assert!((c.norm() - m.rho_ee * (-g * t).exp()).abs() < 1e-14, "τ={t}");
    }
}

#[test]
fn nonsecular_terms_reproduce_direct_propagation() {
    let (sys, geom) = case(0.1, 0.25);
    let rates = rate_set(&sys, &geom, &bath()).unwrap();
    let m = QrtModel::from_rates(&rates, sys.drive_phase, 0.855, QrtGenerator::NonSecular).unwrap();
    let g = Matrix4::from_fn(|r, c| rates.generator[r][c]);
    // Λ(0) = σ⁻ ρ_ss evaluated through the model's own τ = 0 value and direct propagation of the steady state
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut a = g;
    a.set_row(0, &nalgebra::RowVector4::new(one, zero, zero, one));
    let rho = a.lu().solve(&Vector4::new(one, zero, zero, zero)).unwrap();
    let (s, c) = (0.5 * rates.mixing_angle).sin_cos();
    // σ⁻ and σ⁺ in the eigenbasis for zero drive phase
    let sm = [[s * c, -s * s], [c * c, -s * c]];
    let sp = [[s * c, c * c], [-s * s, -s * c]];
    let l0 = Vector4::new(
        sm[0][0] * rho[0] + sm[0][1] * rho[2],
        sm[0][0] * rho[1] + sm[0][1] * rho[3],
        sm[1][0] * rho[0] + sm[1][1] * rho[2],
        sm[1][0] * rho[1] + sm[1][1] * rho[3],
    );
    for &t in &[0.0, 3.7, 50.0, 400.0] {
        let l = (g * Complex64::new(t, 0.0)).exp() * l0;
        let direct = sp[0][0] * l[0] + sp[0][1] * l[2] + sp[1][0] * l[1] + sp[1][1] * l[3];
        let model = m.eval(t);
        assert!((direct - model).norm() < 1e-7 * m.rho_ee, "τ={t}: {direct} vs {model}");
    }
}

#[test]
fn secular_and_nonsecular_nearly_agree_without_drive() {
    let (sys, geom) = case(0.1, 0.0);
    let a = QrtModel::build(&sys, &geom, &bath(), QrtGenerator::Secular).unwrap();
    let b = QrtModel::build(&sys, &geom, &bath(), QrtGenerator::NonSecular).unwrap();
    for &t in &[0.0, 10.0, 1e3] {
        let d = (a.eval(t) - b.eval(t)).norm(); assert!(d < 1e-4 * a.rho_ee, "τ={t}: {d}");
    }
}

#[test]
fn no_dipole_difference_has_no_sideband() {
    let (sys, geom) = case(0.0, 0.05);
    let set = spectra(&sys, &geom, &bath(), &coarse()).unwrap();
    assert_eq!(set.with_sideband.intensity, set.no_sideband.intensity);
    assert_eq!(set.with_sideband.intensity, set.no_pd.intensity);
}

#[test]
fn sum_rules_hold_for_both_table_cases() {
    for (d, v) in [(0.05, 0.05), (0.1, 0.25)] {
        let (sys, geom) = case(d, v);
        let set = spectra(&sys, &geom, &bath(), &SpectrumOptions::default()).unwrap();
        let p = spectrum_power(&set.with_sideband);
        let rho = set.with_sideband.rho_ee;
        assert!((p - PI * rho).abs() / p < 1e-3, "power {p} vs π·{rho}");
        let frac = spectrum_power(&set.no_sideband) / p;
        assert!((frac - set.with_sideband.kappa_sq).abs() < 1e-4, "{frac}");
        assert!(set.with_sideband.warnings.is_empty());
    }
}

#[test]
fn nonsecular_regression_obeys_power_sum_rule() {
    let (sys, geom) = case(0.1, 0.25);
    let opts = SpectrumOptions { generator: QrtGenerator::NonSecular, ..coarse() };
    let s = polarisation_spectrum(&sys, &geom, &bath(), Variant::WithSideband, &opts).unwrap();
    let p = spectrum_power(&s);
    assert!((p - PI * s.rho_ee).abs() / p < 1e-2);
}

#[test]
fn table_one_extraction_round_trip() {
    // (d, V) → (κ², ρ_ee, ε, |V|, |d_Δ|) measured targets
    let cases = [((0.05, 0.05), (0.953, 0.119, 1.004, 0.027, 0.050)), ((0.1, 0.25), (0.832, 0.113, 1.071, 0.164, 0.108))];
    for ((d, v), (k2, rho, eps, vv, dd)) in cases {
        let (sys, geom) = case(d, v);
        let s = polarisation_spectrum(&sys, &geom, &bath(), Variant::WithSideband, &SpectrumOptions::default()).unwrap();
        let r = extract_parameters(&s, 2.0, &shape(), &ExtractOptions::default()).unwrap();
        assert!(r.failures.is_empty(), "{:?}", r.failures);
        assert!((r.kappa_sq.unwrap() - k2).abs() <= 0.01, "κ² {:?}", r.kappa_sq);
        assert!((r.rho_ee_inf.unwrap() - rho).abs() <= 0.01);
        assert!((r.epsilon_hat.unwrap() - eps).abs() <= 0.08);
        assert!((r.v_hat.unwrap() - vv).abs() <= 0.5 * vv);
        assert!((r.d_delta_hat.unwrap() - dd).abs() <= 0.01);
        assert_eq!(r.peaks.len(), 3);
    }
}

#[test]
fn pure_optical_spectrum_extracts_unit_kappa() {
    let (sys, geom) = case(0.0, 0.05);
    let s = polarisation_spectrum(&sys, &geom, &bath(), Variant::WithSideband, &coarse()).unwrap();
    let r = extract_parameters(&s, 2.0, &shape(), &ExtractOptions::default()).unwrap();
    assert!((r.kappa_sq.unwrap() - 1.0).abs() < 1e-12);
    assert!(r.d_delta_hat.unwrap() < 1e-5);
    let whole = Region { lo: s.omega[0], hi: *s.omega.last().unwrap(), centre: 0.0, fwhm: 1.0 };
    assert!((sideband_fraction(&s, &[whole]).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn overlapping_or_empty_regions_are_rejected() {
    let (sys, geom) = case(0.05, 0.05);
    let s = polarisation_spectrum(&sys, &geom, &bath(), Variant::WithSideband, &coarse()).unwrap();
    let a = Region { lo: 0.0, hi: 1.0, centre: 0.5, fwhm: 0.1 };
    let b = Region { lo: 0.9, hi: 1.2, centre: 1.0, fwhm: 0.1 };
    assert!(matches!(sideband_fraction(&s, &[a, b]), Err(SpectrumError::InvalidRegions(_))));
    let c = Region { lo: 1.0, hi: 1.0, centre: 1.0, fwhm: 0.1 };
    assert!(matches!(sideband_fraction(&s, &[c]), Err(SpectrumError::InvalidRegions(_))));
}

#[test]
fn undriven_spectrum_ignores_dipole_phase() {
    let sys = SystemParams::new(1.0, 0.0, 0.0, 2.0).unwrap();
    let g1 = DipoleGeometry::new(0.01, 0.1, 0.0, 0.0, 0.0, SolidAngle::Isotropic).unwrap();
    let g2 = DipoleGeometry::new(0.01, 0.1, 0.0, 0.0, 1.3, SolidAngle::Isotropic).unwrap();
    let a = polarisation_spectrum(&sys, &g1, &bath(), Variant::WithSideband, &coarse()).unwrap();
    let b = polarisation_spectrum(&sys, &g2, &bath(), Variant::WithSideband, &coarse()).unwrap();
    assert_eq!(a.omega, b.omega);
    for (x, y) in a.intensity.iter().zip(&b.intensity) {
        assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-12));
    }
}

#[test]
fn cold_undriven_emitter_is_dark() {
    let sys = SystemParams::new(1.0, 0.0, 0.0, 40.0).unwrap();
    let (_, geom) = case(0.05, 0.0);
    let b = BathSpec::new(1.0 / PI, 1.0, 40.0).unwrap();
    let s = polarisation_spectrum(&sys, &geom, &b, Variant::WithSideband, &coarse()).unwrap();
    assert!(spectrum_power(&s) < 1e-15);
}

#[test]
fn dressing_broadens_the_lines() {
    let (sys, geom) = case(0.1, 0.25);
    let set = spectra(&sys, &geom, &bath(), &coarse()).unwrap();
    let opts = ExtractOptions::default();
    let widest = |s: &SpectrumSeries| {
        let p = detect_peaks(s, 1.0, &opts);
        p.iter().max_by(|a, b| a.height.total_cmp(&b.height)).unwrap().fwhm
    };
    assert!(widest(&set.with_sideband) > 2.0 * widest(&set.no_pd));
}

#[test]
fn sideband_adds_weight_away_from_the_lines() {
    let (sys, geom) = case(0.1, 0.25);
    let set = spectra(&sys, &geom, &bath(), &coarse()).unwrap();
    let peaks = detect_peaks(&set.with_sideband, 1.0, &ExtractOptions::default());
    let top = set.with_sideband.intensity.iter().cloned().fold(0.0, f64::max);
    for (i, w) in set.with_sideband.omega.iter().enumerate() {
        if peaks.iter().all(|p| (w - p.centre).abs() > 20.0 * p.fwhm) {
            let diff = set.with_sideband.intensity[i] - set.no_sideband.intensity[i];
            assert!(diff >= -1e-9 * top, "ω={w}: {diff}");
        }
    }
}

#[test]
fn csv_holds_one_row_per_frequency() {
    let (sys, geom) = case(0.05, 0.05);
    let set = spectra(&sys, &geom, &bath(), &coarse()).unwrap();
    let mut buf = Vec::new();
    set.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "omega_eV,I_with_sideband,I_no_sideband,I_no_pd");
    assert_eq!(lines.count(), set.with_sideband.omega.len());
}
