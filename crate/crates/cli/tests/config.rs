use colding_cli::config::{ExperimentConfig, Family, Tolerances};
use colding_cli::Status;

fn spectral(ladder: &str, grid: usize, tolerances: &str) -> String {
    format!(
        r#"{{
  "name": "probe",
  "flow": {{ "kind": "flat_torus", "n": 1, "T": 2.0, "tau_min": 0.1, "points_per_dim": {grid} }},
  "potential": {{ "kind": "torus_spectral", "base": 1.0, "modes": [{{ "amplitude": 0.5, "wave": [1] }}] }},
  "N_ladder": {ladder},
  "lambda_grid": [0.5, 1.0],
  "tolerances": {tolerances}
}}"#
    )
}

fn fields(text: &str) -> Vec<String> {
    ExperimentConfig::from_json(text)
        .unwrap_err()
        .problems
        .into_iter()
        .map(|(f, _)| f)
        .collect()
}

#[test]
fn shipped_defaults() {
    let cfg = ExperimentConfig::from_json(&spectral("[128, 256]", 64, "{}")).unwrap();
    assert_eq!(cfg.family(), Family::TorusSpectral);
    assert_eq!(cfg.lambda0_fraction, 0.5);
    assert_eq!(cfg.tolerances, Tolerances::default());
    assert_eq!(cfg.tolerances.volume_rate, [1.7, 2.3]);
}

#[test]
fn empty_ladder_is_rejected() {
    assert_eq!(fields(&spectral("[]", 64, "{}")), ["N_ladder"]);
}

#[test]
fn bad_ladders_are_rejected() {
    assert!(fields(&spectral("[4, 8]", 64, "{}")).contains(&"N_ladder[0]".to_string()));
    assert_eq!(fields(&spectral("[256, 128]", 64, "{}")), ["N_ladder"]);
    assert_eq!(fields(&spectral("[128, 256, 1024]", 64, "{}")), ["N_ladder"]);
}

#[test]
fn lambda_at_horizon_is_rejected() {
    let text = spectral("[128, 256]", 64, "{}").replace("[0.5, 1.0]", "[0.5, 2.0, 3.0]");
    assert_eq!(fields(&text), ["lambda_grid[1]", "lambda_grid[2]"]);
}

#[test]
fn every_problem_is_reported() {
    let text = spectral("[]", 7, r#"{ "area_rate": [1.1, 0.9] }"#).replace("\"base\": 1.0", "\"base\": 0.4");
    let f = fields(&text);
    for want in ["flow.points_per_dim", "potential.base", "N_ladder", "tolerances.area_rate"] {
        assert!(f.iter().any(|x| x == want), "{want} missing from {f:?}");
    }
}

#[test]
fn spectral_potential_needs_a_torus() {
    let text = r#"{
  "name": "x",
  "flow": { "kind": "round_sphere", "n": 2, "T": 2.0, "tau_min": 0.1, "sphere_a0": 0.0 },
  "potential": { "kind": "torus_spectral", "base": 1.0, "modes": [] },
  "N_ladder": [128, 256],
  "lambda_grid": [1.0]
}"#;
    assert!(fields(text).contains(&"potential.kind".to_string()));
}

#[test]
fn malformed_json_is_a_config_error() {
    assert!(ExperimentConfig::from_json("{ \"name\": ").is_err());
    assert!(ExperimentConfig::from_json(r#"{ "name": "x", "flow": { "kind": "klein_bottle" } }"#).is_err());
}

#[test]
fn tightened_window_on_short_ladder_fails_cleanly() {
    let tight = r#"{ "level_set_rate": [0.99, 1.01] }"#;
    let cfg = ExperimentConfig::from_json(&spectral("[16, 32, 64, 128]", 64, tight)).unwrap();
    let report = colding_cli::run(&cfg).unwrap();
    let c9 = &report.criteria[8];
    assert_eq!(c9.status, Status::Fail, "{}", c9.detail);
    assert!(!c9.numerical_error, "{}", c9.detail);
    assert!(c9.detail.contains("window [0.99, 1.01]"), "{}", c9.detail);

    let loose = ExperimentConfig::from_json(&spectral("[16, 32, 64, 128]", 64, "{}")).unwrap();
    assert_eq!(colding_cli::run(&loose).unwrap().criteria[8].status, Status::Pass);
}
