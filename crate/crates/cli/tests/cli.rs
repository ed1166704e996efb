use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use iontrap_cli::output::{parse_shots, Format, Metadata, Table};
use iontrap_cli::scenario::{NoiseConfig, Scenario, SweepConfig, SweepVariable};
use proptest::prelude::*;

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.scenario"))
}

fn bundled(name: &str) -> Scenario {
    Scenario::load(&scenario_path(name)).unwrap()
}

fn iontrap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iontrap")).args(args).output().unwrap()
}

fn write_scenario(dir: &Path, s: &Scenario) -> PathBuf {
    let p = dir.join(format!("{}.scenario", s.name));
    std::fs::write(&p, s.to_toml()).unwrap();
    p
}

fn read(p: PathBuf) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn bundled_scenarios_round_trip_and_validate() {
    for name in ["fig3b", "fig4b", "table1"] {
        let s = bundled(name);
        let again = Scenario::from_toml(&s.to_toml()).unwrap();
        assert_eq!(s, again, "{name}");
        assert_eq!(s.config_hash(), again.config_hash());
        s.validate().unwrap();
    }
}

#[test]
fn table1_labels_its_coefficients() {
    let s = bundled("table1");
    let labels: Vec<(&str, &str)> = s
        .noise
        .iter()
        .filter_map(|n| match n {
            NoiseConfig::Kerr { calibration, .. } => Some(("kerr", calibration.as_deref()?)),
            NoiseConfig::SpectatorDephasing { calibration, .. } => Some(("spectator", calibration.as_deref()?)),
            NoiseConfig::Readout { calibration, .. } => Some(("readout", calibration.as_deref()?)),
            _ => None,
        })
        .collect();
    assert_eq!(labels, [("kerr", "fitted"), ("spectator", "fitted"), ("readout", "synthetic")]);
}

#[test]
fn fig4b_run_reaches_the_bell_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = iontrap(&["run", "--scenario", scenario_path("fig4b").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = read(dir.path().join("fig4b.csv"));
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# scenario=fig4b seed=20240404 config_sha256="));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!(header.iter().all(|h| h.contains('[') && h.ends_with(']')), "{header:?}");
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!(last[2] < 0.01, "mixed {}", last[2]);
    assert!((last[1] - 0.5).abs() < 1e-6 && (last[3] - 0.5).abs() < 1e-6);

    let shots = parse_shots(&read(dir.path().join("fig4b.shots.csv"))).unwrap();
    assert_eq!(shots.len(), 101 * 200);
    assert!(shots.iter().enumerate().all(|(i, s)| s.shot_index == i as u64 && s.counts.is_none()));
}

#[test]
fn runs_are_byte_identical_and_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario_path("fig3b");
    let run = |sub: &str, jobs: &str, format: &str| {
        let out = dir.path().join(format!("{sub}-{jobs}-{format}"));
        let o = iontrap(&["run", path.to_str().unwrap(), "--jobs", jobs, "--format", format, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    for format in ["csv", "json-lines"] {
        let ext = if format == "csv" { "csv" } else { "jsonl" };
        let a = run("a", "1", format);
        let b = run("b", "1", format);
        let c = run("c", "4", format);
        for file in [format!("fig3b.{ext}"), format!("fig3b.shots.{ext}")] {
            let x = std::fs::read(a.join(&file)).unwrap();
            assert_eq!(x, std::fs::read(b.join(&file)).unwrap(), "{file}");
            assert_eq!(x, std::fs::read(c.join(&file)).unwrap(), "{file}");
        }
    }
    let csv = parse_shots(&read(dir.path().join("a-1-csv/fig3b.shots.csv"))).unwrap();
    let json = parse_shots(&read(dir.path().join("a-1-json-lines/fig3b.shots.jsonl"))).unwrap();
    assert_eq!(csv, json);
}

#[test]
fn seed_flag_overrides_the_scenario_seed() {
    let path = scenario_path("fig3b");
    let a = iontrap(&["run", path.to_str().unwrap()]);
    let b = iontrap(&["run", path.to_str().unwrap(), "--seed", "7"]);
    let a = String::from_utf8(a.stdout).unwrap();
    let b = String::from_utf8(b.stdout).unwrap();
    assert!(b.starts_with("# scenario=fig3b seed=7 "));
    assert_ne!(a.lines().skip(2).collect::<Vec<_>>(), b.lines().skip(2).collect::<Vec<_>>());
}

#[test]
fn sideband_fit_from_shot_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario_path("fig3b");
    let out = dir.path().to_str().unwrap();
    assert!(iontrap(&["run", path.to_str().unwrap(), "--out", out]).status.success());
    let shots = dir.path().join("fig3b.shots.csv");
    let o = iontrap(&["fit", path.to_str().unwrap(), "--shots", shots.to_str().unwrap(), "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: toml::Value = toml::from_str(&read(dir.path().join("fig3b.fit.toml"))).unwrap();
    assert_eq!(doc["kind"].as_str(), Some("sideband_nbar"));
    let nbar = doc["parameters"]["nbar"]["value"].as_float().unwrap();
    assert!((0.02..=0.09).contains(&nbar), "{nbar}");
}

#[test]
fn parity_fit_from_json_lines_shot_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = bundled("fig4b");
    s.name = "scan".into();
    s.experiment = iontrap_cli::scenario::Experiment::ParityScan;
    s.sweep = Some(SweepConfig {
        variable: SweepVariable::AnalysisPhaseRad,
        values: None,
        start: Some(0.0),
        stop: Some(2.0 * std::f64::consts::PI),
        points: Some(20),
        endpoint_excluded: true,
    });
    let path = write_scenario(dir.path(), &s);
    let out = dir.path().to_str().unwrap();
    assert!(iontrap(&["run", path.to_str().unwrap(), "--format", "json-lines", "--out", out]).status.success());
    let shots = dir.path().join("scan.shots.jsonl");
    let o = iontrap(&["fit", path.to_str().unwrap(), "--shots", shots.to_str().unwrap(), "--even-population", "0.994"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: toml::Value = toml::from_str(&String::from_utf8(o.stdout).unwrap()).unwrap();
    let [lo, hi] = [0, 1].map(|i| doc["parameters"]["contrast"]["interval"][i].as_float().unwrap());
    assert!(hi >= 0.99 && lo > 0.95, "[{lo}, {hi}]");
    assert!(doc["bell_fidelity"].as_float().unwrap() > 0.97);
}

#[test]
fn sweep_reports_gate_infidelity() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = bundled("fig4b");
    s.name = "ramp".into();
    s.sweep = Some(SweepConfig { variable: SweepVariable::RampUs, values: Some(vec![0.0, 2.0, 5.0]), start: None, stop: None, points: None, endpoint_excluded: false });
    let path = write_scenario(dir.path(), &s);
    let a = iontrap(&["sweep", path.to_str().unwrap(), "--jobs", "1"]);
    let b = iontrap(&["sweep", path.to_str().unwrap(), "--jobs", "3"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text.lines().skip(2).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[2] < 1e-6), "{rows:?}");
    assert!((rows[2][1] - rows[0][1] - 5.0).abs() < 1e-9);
}

#[test]
fn budget_document_parses() {
    let mut s = bundled("fig4b");
    s.noise = vec![NoiseConfig::Heating { rate_quanta_per_s: 60.0 }, NoiseConfig::SpontaneousEmission { lifetime_s: 1.1 }];
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), &s);
    let o = iontrap(&["budget", "--scenario", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8(o.stdout).unwrap().contains("Motional mode heating"));
    let doc: iontrap_cli::output::BudgetDocument = toml::from_str(&read(dir.path().join("fig4b.budget.toml"))).unwrap();
    assert_eq!(doc.metadata.config_sha256, s.config_hash());
    let heating = doc.entries.iter().find(|e| e.source == "Motional mode heating").unwrap().infidelity;
    assert!((heating - 60.0 * (2.0 * std::f64::consts::PI / (2.0 * std::f64::consts::PI * 15e3)) / 2.0).abs() < 1e-12);
    let sum: f64 = doc.entries.iter().map(|e| e.infidelity).sum();
    assert!((sum - doc.total_infidelity).abs() < 1e-15);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |text: &str, sub: &str| {
        let p = dir.path().join("x.scenario");
        std::fs::write(&p, text).unwrap();
        iontrap(&[sub, p.to_str().unwrap()]).status.code().unwrap()
    };
    let good = bundled("fig4b").to_toml();
    assert_eq!(code(&good, "validate"), 0);
    assert_eq!(code("name = ", "validate"), 2);
    assert_eq!(code(&good.replace("shots_per_point = 200", "shots_per_point = 200\nshots = 3"), "validate"), 2);
    assert_eq!(code(&good.replace("shots_per_point = 200", "shots_per_point = 0"), "validate"), 3);
    assert_eq!(code(&good.replace("waist_x_um = 6.5", "waist_x_um = -6.5"), "validate"), 3);
    let mut s = bundled("fig4b");
    s.noise = vec![NoiseConfig::Kerr { chi_per_phonon_rad_per_s: vec![1.0], spectator_nbars: vec![1.0, 2.0], calibration: None }];
    assert_eq!(code(&s.to_toml(), "validate"), 3);
    s.noise = vec![NoiseConfig::Heating { rate_quanta_per_s: 1e6 }];
    assert_eq!(code(&s.to_toml(), "run"), 4);
    assert_eq!(iontrap(&["run", "/nonexistent.scenario"]).status.code(), Some(2));
    assert_eq!(iontrap(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn tables_render_in_both_formats() {
    let meta = Metadata { scenario: "t".into(), seed: 1, config_sha256: "00".into(), tool_version: "v".into() };
    let mut t = Table::new(&["x [us]", "y [1]"]);
    t.push(vec![1.0, 1e-9]);
    let csv = t.render(&meta, Format::Csv);
    assert_eq!(csv.lines().nth(2), Some("1,1e-9"));
    let json = t.render(&meta, Format::JsonLines);
    let row: serde_json::Value = serde_json::from_str(json.lines().nth(1).unwrap()).unwrap();
    assert_eq!(row["y [1]"].as_f64(), Some(1e-9));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn edited_scenarios_round_trip(
        seed in any::<u64>(),
        shots in 1u64..100_000,
        nbar in 0.0..5.0f64,
        detuning in -100.0..100.0f64,
        ramp in 0.0..20.0f64,
        power in 0.0..10.0f64,
        loss in 0.0..20.0f64,
        values in prop::collection::vec(-1e6..1e6f64, 1..8),
    ) {
        let mut s = bundled("table1");
        s.seed = seed;
        s.shots_per_point = shots;
        s.modes[1].nbar = nbar;
        s.drive.detuning_khz = detuning;
        s.drive.ramp_us = ramp;
        s.beam.input_power_mw = power;
        s.beam.losses[1].loss_db = loss;
        s.sweep = Some(SweepConfig { variable: SweepVariable::Nbar, values: Some(values), start: None, stop: None, points: None, endpoint_excluded: false });
        let again = Scenario::from_toml(&s.to_toml()).unwrap();
        prop_assert_eq!(&s, &again);
        prop_assert_eq!(s.config_hash(), again.config_hash());
    }
}
