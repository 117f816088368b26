use pfme_cli::config::{apply_override, parse_override};
use pfme_cli::scenarios::rate_point;
use pfme_cli::{run, verify_manifest, CliError, RunConfig, Scenario};
use pfme_rates::RateOptions;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pfme-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn config(scenario: &str, out: &Path, body: &str) -> String {
    format!("version = 1\nscenario = \"{scenario}\"\nout = \"{}\"\n{body}", out.display())
}

fn field_of(e: CliError) -> String {
    match e {
        CliError::Config { field, .. } => field,
        other => panic!("expected a configuration error, got {other}"),
    }
}

#[test]
fn overrides_parse_typed_values_and_create_tables() {
    assert_eq!(parse_override("system.drive=-0.05").unwrap(), ("system.drive".into(), toml::Value::Float(-0.05)));
    assert_eq!(parse_override("dynamics.steps = 11").unwrap().1, toml::Value::Integer(11));
    assert_eq!(parse_override("output.svg=false").unwrap().1, toml::Value::Boolean(false));
    assert_eq!(parse_override("scenario=spectrum").unwrap().1, toml::Value::String("spectrum".into()));
    assert_eq!(
        parse_override("dynamics.cutoffs=[2,2]").unwrap().1,
        toml::Value::Array(vec![toml::Value::Integer(2), toml::Value::Integer(2)])
    );
    assert!(parse_override("no-equals-sign").is_err());
    assert!(parse_override("a..b=1").is_err());

    let mut t = toml::Table::new();
    apply_override(&mut t, "sweep.parameter", toml::Value::String("beta".into())).unwrap();
    assert_eq!(t["sweep"]["parameter"].as_str(), Some("beta"));
    apply_override(&mut t, "x", toml::Value::Integer(1)).unwrap();
    assert!(apply_override(&mut t, "x.y", toml::Value::Integer(1)).is_err());
}

#[test]
fn overrides_take_precedence_over_the_file() {
    let text = config("spectrum", Path::new("o"), "[system]\nepsilon = 1.0\ndrive = 0.05\n");
    let cfg = RunConfig::from_toml(
        &text,
        &[
            parse_override("system.drive=-0.1").unwrap(),
            parse_override("scenario=rates-sweep").unwrap(),
            parse_override("dipoles.d_delta=-0.2").unwrap(),
        ],
    )
    .unwrap();
    assert_eq!(cfg.scenario, Scenario::RatesSweep);
    let p = cfg.physics().unwrap();
    assert_eq!(p.sys.drive_magnitude, 0.1);
    assert!((p.sys.drive_phase - std::f64::consts::PI).abs() < 1e-15);
    assert_eq!(p.geom.d_delta, 0.2);
    assert!((p.geom.theta_mu_delta - std::f64::consts::PI).abs() < 1e-15);
}

#[test]
fn invalid_configurations_name_the_offending_field() {
    let out = Path::new("o");
    let cases = [
        (config("spectrum", out, "[system]\nbeta = -1.0\n"), "beta"),
        (config("spectrum", out, "[dipoles]\nd_mu = -0.01\n"), "d_mu"),
        (config("spectrum", out, "[bath]\ncutoff = 0.0\n"), "bath.cutoff"),
        (config("rates-sweep", out, "[sweep]\nparameter = \"colour\"\nstart = 0.0\nstop = 1.0\nsteps = 3\n"), "sweep.parameter"),
        (config("rates-sweep", out, "[sweep]\nparameter = \"beta\"\nstart = 1.0\nstop = 2.0\nsteps = 0\n"), "sweep.steps"),
        (config("rates-sweep", out, "[sweep]\nparameter = \"beta\"\nstart = 1.0\nstop = -2.0\nsteps = 3\n"), "beta"),
        (config("spectrum", out, "[sweep]\nparameter = \"beta\"\nstart = 1.0\nstop = 2.0\nsteps = 3\n"), "sweep"),
        (config("dynamics-compare", out, "[dynamics]\nmodes = 2\ncutoffs = [3]\n"), "dynamics.cutoffs"),
        (config("dynamics-compare", out, "[dynamics]\nmodes = 9\n"), "dynamics.modes"),
        (config("spectrum", out, "[numerics]\ntail_tol = 2.0\n"), "numerics.tail_tol"),
    ];
    for (text, field) in cases {
        assert_eq!(field_of(RunConfig::from_toml(&text, &[]).unwrap_err()), field, "{text}");
    }
    let wrong_version = config("spectrum", out, "").replace("version = 1", "version = 2");
    assert_eq!(field_of(RunConfig::from_toml(&wrong_version, &[]).unwrap_err()), "version");
    let unknown_key = config("spectrum", out, "[system]\ntemperature = 300.0\n");
    assert!(RunConfig::from_toml(&unknown_key, &[]).is_err());
    let unknown_scenario = config("fig7", out, "");
    assert!(RunConfig::from_toml(&unknown_scenario, &[]).is_err());
}

#[test]
fn single_point_sweep_matches_direct_library_call() {
    let out = scratch("single");
    let text = config(
        "rates-sweep",
        &out,
        "[system]\ndrive = 0.05\n[sweep]\nparameter = \"d_delta\"\nstart = -0.1\nstop = 0.4\nsteps = 1\n",
    );
    let cfg = RunConfig::from_toml(&text, &[]).unwrap();
    run(&cfg).unwrap();
    let csv = fs::read_to_string(out.join("rates.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);

    let geom = pfme_model::DipoleGeometry::with_signed_delta(0.01, -0.1, 0.0, pfme_model::SolidAngle::Isotropic).unwrap();
    let sys = pfme_model::SystemParams::new(1.0, 0.05, 0.0, 2.0).unwrap();
    let bath = pfme_bath::BathSpec::new(1.0 / std::f64::consts::PI, 1.0, 2.0).unwrap();
    let set = pfme_rates::RateEngine::new(sys, geom, bath, RateOptions::default()).unwrap().rate_set().unwrap();
    let cells: Vec<f64> = lines[1].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(cells[0], -0.1);
    assert_eq!(lines[1].split(',').nth(1).unwrap(), format!("{:.12e}", set.secular.gamma_down));
    assert_eq!(lines[1].split(',').nth(6).unwrap(), format!("{:.12e}", set.secular.gamma_up));
    assert_eq!(lines[1].split(',').nth(7).unwrap(), format!("{:.12e}", set.secular.gamma_d));

    let p = cfg.physics_at(Some(("d_delta", -0.1))).unwrap();
    let point = rate_point(&p, RateOptions::default(), -0.1).unwrap();
    assert_eq!(point.gamma_down, set.secular.gamma_down);
    let parts: f64 = point.parts.iter().sum();
    assert!((parts - point.gamma_down).abs() <= 1e-12 * point.gamma_down.abs());
    assert!(!out.join("rates.svg").exists());
    fs::remove_dir_all(&out).unwrap();
}

#[test]
fn repeated_runs_are_byte_identical() {
    let (a, b) = (scratch("det-a"), scratch("det-b"));
    let body = "[system]\ndrive = 0.02\n[dipoles]\nd_delta = 0.1\n[sweep]\nparameter = \"drive_phase\"\nstart = 0.0\nstop = 6.283185307179586\nsteps = 9\n";
    let ma = run(&RunConfig::from_toml(&config("phase-sweep", &a, body), &[]).unwrap()).unwrap();
    let mb = run(&RunConfig::from_toml(&config("phase-sweep", &b, body), &[]).unwrap()).unwrap();
    for name in ["rates.csv", "rates.svg"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let sums = |m: &pfme_cli::Manifest| {
        m.files.iter().filter(|f| f.path.ends_with(".csv")).map(|f| f.sha256.clone()).collect::<Vec<_>>()
    };
    assert_eq!(sums(&ma), sums(&mb));
    fs::remove_dir_all(&a).unwrap();
    fs::remove_dir_all(&b).unwrap();
}

#[test]
fn manifest_lists_every_artefact_with_its_checksum() {
    let out = scratch("manifest");
    let body = "[system]\ndrive = 0.05\n[dipoles]\nd_delta = 0.1\n[sweep]\nparameter = \"d_delta\"\nstart = -0.2\nstop = 0.2\nsteps = 5\n";
    let m = run(&RunConfig::from_toml(&config("custom", &out, body), &[]).unwrap()).unwrap();
    let mut listed: Vec<String> = m.files.iter().map(|f| f.path.clone()).collect();
    listed.push("manifest.json".into());
    listed.sort();
    let mut present: Vec<String> =
        fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    present.sort();
    assert_eq!(listed, present);
    assert!(verify_manifest(&out).unwrap().is_empty());

    let summary: serde_json::Value = serde_json::from_slice(&fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["numerics"]["route"], "quadrature");
    assert_eq!(summary["results"]["points"], 5);

    fs::write(out.join("rates.csv"), "tampered\n").unwrap();
    assert_eq!(verify_manifest(&out).unwrap(), vec!["rates.csv".to_string()]);
    fs::remove_dir_all(&out).unwrap();
}

#[test]
fn spectrum_csv_feeds_extraction() {
    let spec_dir = scratch("spectrum");
    let ext_dir = scratch("extract");
    let body = "[system]\ndrive = 0.05\n[dipoles]\nd_delta = 0.05\n[output]\nsvg = false\n";
    run(&RunConfig::from_toml(&config("spectrum", &spec_dir, body), &[]).unwrap()).unwrap();
    let input = spec_dir.join("spectrum.csv");
    let ext = format!("[extract]\ninput = \"{}\"\n", input.display());
    run(&RunConfig::from_toml(&config("extract", &ext_dir, &ext), &[]).unwrap()).unwrap();
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(ext_dir.join("summary.json")).unwrap()).unwrap();
    let r = &summary["results"];
    let get = |k: &str| r[k].as_f64().unwrap_or_else(|| panic!("{k} missing"));
    assert!((get("kappa_sq") - 0.953).abs() <= 0.01);
    assert!((get("rho_ee_inf") - 0.119).abs() <= 0.01);
    assert!((get("epsilon_hat") - 1.004).abs() <= 0.08);
    assert!((get("v_hat") - 0.027).abs() <= 0.5 * 0.027);
    assert!((get("d_delta_hat") - 0.050).abs() <= 0.01);
    let peaks = fs::read_to_string(ext_dir.join("peaks.csv")).unwrap();
    assert_eq!(peaks.lines().count(), 4);
    fs::remove_dir_all(&spec_dir).unwrap();
    fs::remove_dir_all(&ext_dir).unwrap();
}

#[test]
fn oracle_validation_reports_agreement() {
    let out = scratch("oracle");
    let body = "[dipoles]\nd_delta = 0.26\n[bath]\ncutoff = 0.2\n";
    run(&RunConfig::from_toml(&config("oracle-validate", &out, body), &[]).unwrap()).unwrap();
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert!(summary["results"]["max_rel_series_vs_oracle"].as_f64().unwrap() < 1e-2);
    assert!(summary["results"]["max_rel_quadrature_vs_oracle"].as_f64().unwrap() < 1e-3);
    let csv = fs::read_to_string(out.join("oracle_validate.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 27);
    fs::remove_dir_all(&out).unwrap();
}

#[test]
fn dynamics_comparison_without_oracle_omits_exact_column() {
    let out = scratch("dynamics");
    let body = "[system]\nepsilon = 0.36\ndrive = -0.0064\n[dipoles]\nd_delta = 0.5\nsolid_angle = \"aligned\"\n[dynamics]\nsteps = 21\nexact = false\ninitial_excited = 1.0\n";
    run(&RunConfig::from_toml(&config("dynamics-compare", &out, body), &[]).unwrap()).unwrap();
    let csv = fs::read_to_string(out.join("dynamics.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(!header.contains("exact"));
    let first: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!(first[1].abs() < 1e-12 && first[2].abs() < 1e-12 && first[3].abs() < 1e-12);
    assert_eq!(csv.lines().count(), 22);
    fs::remove_dir_all(&out).unwrap();
}

fn pfme(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_pfme")).args(args).env("PFME_THREADS", "1").output().unwrap()
}

#[test]
fn binary_exit_codes_distinguish_failures() {
    let dir = scratch("exit");
    fs::create_dir_all(&dir).unwrap();
    let out = dir.join("out");
    let cfg = dir.join("run.toml");
    fs::write(&cfg, config("rates-sweep", &out, "[sweep]\nparameter = \"d_delta\"\nstart = 0.0\nstop = 0.1\nsteps = 2\n")).unwrap();
    let cfg_s = cfg.to_str().unwrap();

    let ok = pfme(&["run", "--config", cfg_s]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let manifest: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(manifest["scenario"], "rates-sweep");
    assert!(verify_manifest(&out).unwrap().is_empty());

    let missing = pfme(&["run", "--config", dir.join("absent.toml").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&missing.stderr).unwrap();
    assert_eq!(report["error"]["kind"], "config");

    let bad = pfme(&["run", "--config", cfg_s, "--set", "system.beta=-2"]);
    assert_eq!(bad.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&bad.stderr).unwrap();
    assert_eq!(report["error"]["field"], "beta");

    let unknown = pfme(&["run", "--config", cfg_s, "--scenario", "nonsense"]);
    assert_eq!(unknown.status.code(), Some(1));

    let flags = pfme(&["run", "--bogus"]);
    assert_eq!(flags.status.code(), Some(1));

    let overflow = pfme(&[
        "run",
        "--config",
        cfg_s,
        "--scenario",
        "dynamics-compare",
        "--set",
        "sweep.steps=1",
        "--set",
        "dynamics.max_dim=8",
        "--set",
        "dynamics.steps=3",
    ]);
    assert_eq!(overflow.status.code(), Some(1), "sweep is rejected for dynamics-compare");

    fs::write(&cfg, config("dynamics-compare", &out, "[dipoles]\nd_delta = 0.5\n[dynamics]\nsteps = 3\nmax_dim = 8\n")).unwrap();
    let overflow = pfme(&["run", "--config", cfg_s]);
    assert_eq!(overflow.status.code(), Some(2), "{}", String::from_utf8_lossy(&overflow.stderr));
    let report: serde_json::Value = serde_json::from_slice(&overflow.stderr).unwrap();
    assert_eq!(report["error"]["kind"], "numerics");
    assert_eq!(report["error"]["module"], "oracle");
    fs::remove_dir_all(&dir).unwrap();
}
