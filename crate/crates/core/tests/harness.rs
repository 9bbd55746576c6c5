use std::fs;

use infobench::harness::{
    generate_synthetic_forcing, load_forcing_csv, run_experiment_a, write_forcing_csv,
    ExperimentConfig, ExperimentKind, Scale, MANIFEST_FILE, PROBABILITIES_FILE,
};
use infobench::{Error, ModelKind};

fn pairs(items: &[(&str, &str)]) -> Vec<(String, String)> {
    items
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

#[test]
fn forcing_csv_loads_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.csv");
    fs::write(
        &path,
        "day,precip_mm,pet_mm\n0,0.0,2.0\n1,5.5,2.1\n2,0.0,2.2\n",
    )
    .unwrap();
    let f = load_forcing_csv(&path).unwrap();
    assert_eq!(f.len(), 3);
    assert_eq!(f.precip(), &[0.0, 5.5, 0.0]);

    let copy = dir.path().join("copy.csv");
    write_forcing_csv(&copy, &f).unwrap();
    assert_eq!(load_forcing_csv(&copy).unwrap(), f);

    let synthetic = generate_synthetic_forcing(3, 200).unwrap();
    write_forcing_csv(&copy, &synthetic).unwrap();
    assert_eq!(load_forcing_csv(&copy).unwrap(), synthetic);
}

#[test]
fn negative_precipitation_names_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "day,precip_mm,pet_mm\n0,-1.0,2.0\n").unwrap();
    match load_forcing_csv(&path) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("expected a parse error, got {other:?}"),
    }
    fs::write(&path, "day,rain,pet_mm\n0,1.0,2.0\n").unwrap();
    assert!(matches!(
        load_forcing_csv(&path),
        Err(Error::Parse { line: 1, .. })
    ));
}

#[test]
fn synthetic_forcing_statistics() {
    let f = generate_synthetic_forcing(11, 10_000).unwrap();
    let wet = f.precip().iter().filter(|&&p| p > 0.0).count() as f64 / 10_000.0;
    assert!((wet - 0.30).abs() < 0.02, "{wet}");
    assert!(f.pet().iter().all(|&e| e > 0.0));
    assert_eq!(f, generate_synthetic_forcing(11, 10_000).unwrap());
    assert_ne!(f, generate_synthetic_forcing(12, 10_000).unwrap());
}

#[test]
fn config_errors_are_reported() {
    let cases = [
        vec![("b.lag", "0")],
        vec![("a.sigma_u", "0.1,-0.2")],
        vec![("nonsense", "1")],
        vec![("scale", "enormous")],
        vec![("b.fractions", "0.5,0.2")],
        vec![("experiment", "appendix_z")],
    ];
    for case in cases {
        let err = ExperimentConfig::from_pairs(&pairs(&case)).unwrap_err();
        assert!(err.is_validation(), "{case:?}: {err}");
    }
    let full = ExperimentConfig::from_pairs(&pairs(&[("scale", "full")])).unwrap();
    assert_eq!(full.scale, Scale::Full);
    assert_eq!(full.a.n_params, 500);
}

#[test]
fn config_text_round_trips() {
    let cfg =
        ExperimentConfig::from_pairs(&pairs(&[("seed", "5"), ("c.particles", "300")])).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.txt");
    fs::write(&path, cfg.to_text()).unwrap();
    assert_eq!(ExperimentConfig::load(&path, &[]).unwrap(), cfg);
}

#[test]
fn small_experiment_a_writes_a_normalised_table() {
    let cfg = ExperimentConfig::from_pairs(&pairs(&[
        ("experiment", "appendix_a"),
        ("a.n_params", "8"),
        ("a.n_forcings", "4"),
        ("a.n_days", "300"),
        ("a.warmup", "100"),
    ]))
    .unwrap();
    assert_eq!(cfg.experiment, Some(ExperimentKind::AppendixA));
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment_a(&cfg, dir.path()).unwrap();
    assert_eq!(report.table.rows.len(), 18);
    for cell in report.table.rows.chunks(2) {
        assert_eq!(cell[0].model, ModelKind::Nash);
        assert_eq!(cell[1].model, ModelKind::Abc);
        assert!((cell[0].prob_mean + cell[1].prob_mean - 1.0).abs() < 1e-12);
    }
    let csv = fs::read_to_string(dir.path().join(PROBABILITIES_FILE)).unwrap();
    assert_eq!(csv.lines().count(), 19);
    let manifest = fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
    assert!(manifest.contains("\"complete\""));
}
