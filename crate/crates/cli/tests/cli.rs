use std::process::Command;

use jpm_parity_cli::config::{Fig2Params, Fig3Params, GridConfig, JpmConfig, RegisterConfig};
use jpm_parity_cli::{catalog, catalog_json, run_scenario, scenario_names, validate, CliError, ScenarioConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_jpm-parity"))
}

fn default_config(name: &str) -> ScenarioConfig {
    let entry = catalog().into_iter().find(|e| e.name == name).expect("scenario in catalog");
    (entry.default_config)()
}

fn small_fig2() -> ScenarioConfig {
    ScenarioConfig::new(
        "fig2-drive-occupation",
        &Fig2Params {
            register: RegisterConfig::uniform(4, 5e6),
            target_occupation: 9.0,
            grid: GridConfig {
                t_end_s: 100e-9,
                points: 11,
            },
        },
    )
}

#[test]
fn catalog_names_are_stable_and_cover_every_figure() {
    let names = scenario_names();
    assert!(names.len() >= 6);
    for required in [
        "fig2-drive-occupation",
        "fig3-contrast",
        "fig4-mismatch",
        "decay-envelope",
        "jc-occupation",
        "jc-contrast",
    ] {
        assert!(names.contains(&required), "{required} missing from {names:?}");
    }
    assert_eq!(names, scenario_names());
}

#[test]
fn every_default_config_round_trips_and_validates() {
    for entry in catalog() {
        let cfg = (entry.default_config)();
        assert_eq!(cfg.scenario, entry.name);
        let text = serde_json::to_string(&cfg).unwrap();
        let back = ScenarioConfig::from_json(&text).unwrap();
        assert_eq!(back, cfg);
        validate(&back).unwrap_or_else(|e| panic!("{}: {e}", entry.name));
    }
    let listed: serde_json::Value = serde_json::from_str(&catalog_json()).unwrap();
    assert_eq!(listed.as_array().unwrap().len(), catalog().len());
}

#[test]
fn unknown_scenario_lists_valid_names() {
    let mut cfg = small_fig2();
    cfg.scenario = "fig9-nonsense".into();
    let err = validate(&cfg).unwrap_err();
    assert!(matches!(err, CliError::Config(_)));
    assert_eq!(err.exit_code(), 2);
    let msg = err.to_string();
    for name in scenario_names() {
        assert!(msg.contains(name), "{msg}");
    }
}

#[test]
fn header_and_param_violations_are_config_errors() {
    let good = serde_json::to_value(small_fig2()).unwrap();

    let mut v = good.clone();
    v["schema_version"] = 2.into();
    assert!(matches!(ScenarioConfig::from_json(&v.to_string()), Err(CliError::Config(_))));

    let mut v = good.clone();
    v["convention"] = "omega".into();
    let err = ScenarioConfig::from_json(&v.to_string()).unwrap_err();
    assert!(err.to_string().contains("convention"), "{err}");

    let mut v = good.clone();
    v["extra"] = 1.into();
    assert!(ScenarioConfig::from_json(&v.to_string()).is_err());

    let mut v = good.clone();
    v["params"]["register"]["chi_mhz"] = 5.into();
    let cfg = ScenarioConfig::from_json(&v.to_string()).unwrap();
    assert!(matches!(validate(&cfg), Err(CliError::Config(_))));

    let mut v = good;
    v["params"]["register"]["epsilons_hz"] = serde_json::json!([0.0, 1.0]);
    let cfg = ScenarioConfig::from_json(&v.to_string()).unwrap();
    let err = validate(&cfg).unwrap_err();
    assert!(err.to_string().contains("epsilons"), "{err}");
}

#[test]
fn fig2_has_five_bands_and_dark_even_bands() {
    let res = run_scenario(&small_fig2()).unwrap();
    assert_eq!(res.columns.len(), 6);
    assert_eq!(res.columns[0], "t_s");
    for (name, parity) in [
        ("occ_-4.0000chi", "even"),
        ("occ_-2.0000chi", "odd"),
        ("occ_+0.0000chi", "even"),
        ("occ_+2.0000chi", "odd"),
        ("occ_+4.0000chi", "even"),
    ] {
        let col = res.column(name).unwrap_or_else(|| panic!("{name} in {:?}", res.columns));
        let meta = res.metadata_value(&format!("band {name}")).unwrap();
        assert!(meta.starts_with(&format!("parity={parity}")), "{meta}");
        let last = *col.last().unwrap();
        if parity == "even" {
            assert!(last < 1e-18, "{name}: {last:e}");
        } else {
            assert!((last - 9.0).abs() < 1e-9, "{name}: {last}");
        }
    }
}

#[test]
fn csv_carries_conventions_and_fixed_formatting() {
    let csv = run_scenario(&small_fig2()).unwrap().to_csv();
    for key in ["tool", "scenario", "units", "basis", "reset_policy", "epsilon_pattern", "jc_split", "config"] {
        assert!(csv.lines().any(|l| l.starts_with(&format!("# {key}: "))), "missing {key}");
    }
    let data: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(data[0].starts_with("t_s,"));
    for line in &data[1..] {
        for cell in line.split(',') {
            let v: f64 = cell.parse().unwrap();
            assert!(v.is_finite());
            let mantissa = cell.trim_start_matches('-').split('e').next().unwrap();
            assert_eq!(mantissa.len(), 18, "{cell}");
        }
    }
}

#[test]
fn fig3_and_fig4_columns() {
    let mut cfg = default_config("fig3-contrast");
    let mut p: Fig3Params = cfg.params().unwrap();
    p.grid = GridConfig {
        t_end_s: 10e-9,
        points: 3,
    };
    cfg.params = serde_json::to_value(&p).unwrap();
    let res = run_scenario(&cfg).unwrap();
    assert_eq!(res.columns, ["t_s", "bright_p2chi", "bright_m2chi", "dark", "contrast"]);
    assert!(res.metadata_value("hygiene").is_some());

    let res = run_scenario(&default_config("fig4-mismatch")).unwrap();
    for c in ["even_detection_ideal", "odd_coherence_abs", "even_coherence_abs"] {
        assert!(res.column(c).is_some(), "{c}");
    }
    let eps = res.column("eps_over_chi").unwrap();
    assert!((eps[0] - 0.01).abs() < 1e-15 && (eps.last().unwrap() - 0.2).abs() < 1e-15);
}

#[test]
fn binary_lists_validates_and_runs() {
    let out = bin().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), catalog().len());

    let out = bin().args(["list", "--json"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v[0]["name"], "fig2-drive-occupation");

    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("fig2.json");
    std::fs::write(&cfg_path, serde_json::to_string(&small_fig2()).unwrap()).unwrap();
    let out = bin().args(["validate", "--config"]).arg(&cfg_path).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let csv_path = dir.path().join("fig2.csv");
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&csv_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let written = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(written, run_scenario(&small_fig2()).unwrap().to_csv());

    let out = bin().args(["run", "--config"]).arg(&cfg_path).output().unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), written);
}

#[test]
fn binary_exit_codes_separate_config_and_physics_failures() {
    let dir = tempfile::tempdir().unwrap();

    let missing = bin().args(["run", "--config"]).arg(dir.path().join("nope.json")).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));

    let bad = dir.path().join("bad.json");
    let mut cfg = small_fig2();
    cfg.scenario = "not-a-scenario".into();
    std::fs::write(&bad, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out = bin().args(["validate", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("fig3-contrast"), "{stderr}");

    // A cavity too large for the joint detector model passes the schema but
    // fails inside the measurement module.
    let mut cfg = default_config("fig3-contrast");
    let mut p: Fig3Params = cfg.params().unwrap();
    p.cavity_dim = 2000;
    p.jpm = JpmConfig::baseline(6e9);
    cfg.params = serde_json::to_value(&p).unwrap();
    let huge = dir.path().join("huge.json");
    std::fs::write(&huge, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out = bin().args(["validate", "--config"]).arg(&huge).output().unwrap();
    assert!(out.status.success());
    let out = bin().args(["run", "--config"]).arg(&huge).output().unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
