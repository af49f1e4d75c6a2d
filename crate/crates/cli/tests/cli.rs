use std::path::PathBuf;
use std::process::{Command, Output};

fn heatjet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heatjet"))
        .args(args)
        .env_remove("HEATJET_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

fn csv(o: &Output) -> Vec<Vec<String>> {
    stdout(o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn weil_demo_dimensions() {
    let o = heatjet(&["weil-demo", "--l", "2", "--r", "3", "--gen", "s1^2 - s2"]);
    assert!(o.status.success());
    let d = json(&o);
    assert_eq!(d["algebra"]["dimension"], 3);
    assert_eq!(d["generator_membership_defects"][0], 0.0);

    let o = heatjet(&["weil-demo", "--l", "1", "--r", "2"]);
    assert_eq!(json(&o)["algebra"]["dimension"], 2);
}

#[test]
fn weil_demo_reduces() {
    let o = heatjet(&["weil-demo", "--l", "2", "--r", "3", "--gen", "s1^2 - s2", "--reduce", "s1^2"]);
    let d = json(&o);
    let coords = &d["reductions"][0]["report"]["quotient_coeffs"];
    assert_eq!(coords, &serde_json::json!([0.0, 0.0, 1.0]));
}

#[test]
fn malformed_input_is_a_usage_error() {
    assert_eq!(heatjet(&["weil-demo", "--l", "2", "--r", "3", "--gen", "s1^^2"]).status.code(), Some(2));
    assert_eq!(heatjet(&["weil-demo", "--l", "2", "--r", "3", "--gen", "s3"]).status.code(), Some(2));
    assert_eq!(heatjet(&["weil-demo", "--l", "2"]).status.code(), Some(2));
    assert_eq!(heatjet(&["verify", "--only", "no-such"]).status.code(), Some(2));
    assert_eq!(heatjet(&["evolve", "--t", "1", "--grid", "0:1"]).status.code(), Some(2));
    assert_eq!(heatjet(&["heat-table", "--phi", "bump[2,1]"]).status.code(), Some(2));
    assert_eq!(heatjet(&["lubs-demo", "--family", "wobbly"]).status.code(), Some(2));
}

#[test]
fn weil_demo_from_spec_file() {
    let dir = std::env::temp_dir().join(format!("heatjet-spec-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("spec.json");
    std::fs::write(
        &path,
        r#"{"l":2,"r":3,"generators":[[{"exponents":[1,1],"coeff":1.0}]]}"#,
    )
    .unwrap();
    let o = heatjet(&["weil-demo", "--spec", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["algebra"]["dimension"], 5);
    std::fs::write(&path, "{not json").unwrap();
    assert_eq!(heatjet(&["weil-demo", "--spec", path.to_str().unwrap()]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_single_criterion() {
    let o = heatjet(&["verify", "--only", "limit-lemma", "--no-timing"]);
    assert_eq!(o.status.code(), Some(0));
    let d = json(&o);
    assert_eq!(d["criteria"].as_array().unwrap().len(), 1);
    assert_eq!(d["criteria"][0]["name"], "limit-lemma");
    assert_eq!(d["passed"], true);
}

#[test]
fn verify_fails_under_impossible_tolerance() {
    let o = heatjet(&["verify", "--only", "derivative-identity", "--tol", "1e-15"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["passed"], false);
}

#[test]
fn evolve_dirac_is_the_kernel() {
    let o = heatjet(&["evolve", "--t", "0.5", "--grid=-2:2:0.25"]);
    assert!(o.status.success());
    let rows = csv(&o);
    assert_eq!(rows.len(), 17);
    for r in rows {
        let x: f64 = r[1].parse().unwrap();
        let v: f64 = r[2].parse().unwrap();
        let g = (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        assert!((v - g).abs() < 1e-14, "{x} {v} {g}");
    }
}

#[test]
fn limit_table_approaches_second_derivative() {
    let o = heatjet(&["limit-table", "--phi", "bump"]);
    assert!(o.status.success());
    let rows = csv(&o);
    assert_eq!(rows.len(), 11);
    let last: f64 = rows.last().unwrap()[2].parse().unwrap();
    let exact = -2.0 / std::f64::consts::E;
    assert!((last - exact).abs() < 1e-3);
}

#[test]
fn heat_table_columns_agree() {
    let o = heatjet(&["heat-table", "--phi", "gauss", "--t", "0.25"]);
    let rows = csv(&o);
    let v: Vec<f64> = rows[0].iter().map(|s| s.parse().unwrap()).collect();
    // <K(t), exp(-x^2)> = 1 / sqrt(1 + 4t)
    assert!((v[1] - 0.5f64.sqrt()).abs() < 1e-12);
    assert!((v[2] - v[3]).abs() < 1e-6);
    assert!((v[4] - v[5]).abs() < 1e-5);
}

#[test]
fn sqrt_is_not_square_smooth() {
    let o = heatjet(&["smoothness-report", "--f", "sqrt"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["square_smooth"], false);
    let o = heatjet(&["smoothness-report", "--f", "cos_sqrt"]);
    assert_eq!(json(&o)["square_smooth"], true);
}

#[test]
fn lubs_demo_outputs() {
    let o = heatjet(&["lubs-demo", "--family", "moving", "--k", "6"]);
    assert!(o.status.success());
    let rows = csv(&o);
    assert_eq!(rows.len(), 7);
    for r in &rows[1..] {
        assert_eq!(r[4], "1");
    }
    let o = heatjet(&["lubs-demo", "--family", "dilating"]);
    assert!(stdout(&o).starts_with("t,radius,bound,checked\n"));
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["verify", "--no-timing"][..],
        &["heat-table", "--phi", "poly*bump"][..],
        &["weil-demo", "--l", "2", "--r", "4", "--gen", "s1 s2"][..],
    ] {
        assert_eq!(heatjet(args).stdout, heatjet(args).stdout, "{args:?}");
    }
}

#[test]
fn output_directory_override() {
    let dir: PathBuf = std::env::temp_dir().join(format!("heatjet-out-{}", std::process::id()));
    let o = Command::new(env!("CARGO_BIN_EXE_heatjet"))
        .args(["limit-table", "--output", "limit.csv", "--out-dir", "/nonexistent/ignored"])
        .env("HEATJET_OUT_DIR", &dir)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(dir.join("limit.csv")).unwrap();
    assert!(text.starts_with("j,t,quotient\n"));
    std::fs::remove_dir_all(&dir).ok();
}
