use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use nilclose_core::expr::{parse, Context};
use serde_json::Value;

const EXAMPLES: [(&str, &str); 5] = [
    ("heisenberg-line", "closure-polymap"),
    ("heisenberg-abelian", "closure-orbit"),
    ("kronecker", "equi"),
    ("ln-curve", "equi"),
    ("hrushovski", "equi"),
];

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nilclose"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nilclose-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad json ({e}): {}\nstderr: {}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn example_file(dir: &Path, name: &str) -> PathBuf {
    let out = run(&["examples", name, "--out-dir", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    dir.join(format!("{name}.json"))
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema").join(name);
    let v: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&v).unwrap()
}

#[test]
fn examples_lists_bundled_files() {
    let v = stdout_json(&run(&["examples"]));
    let names: Vec<&str> = v["examples"].as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    assert_eq!(names, EXAMPLES.map(|e| e.0));
    assert_eq!(v["format"], 1);
}

#[test]
fn unknown_example_is_input_error() {
    let out = run(&["examples", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("heisenberg-line"));
}

#[test]
fn every_example_runs_quickly_and_matches_schemas() {
    let dir = scratch("all");
    let problem = schema("problem.schema.json");
    let output = schema("output.schema.json");
    for (name, cmd) in EXAMPLES {
        let file = example_file(&dir, name);
        let text: Value = serde_json::from_str(&fs::read_to_string(&file).unwrap()).unwrap();
        assert!(problem.is_valid(&text), "{name} violates the problem schema");
        let start = Instant::now();
        let out = run(&[cmd, "--input", file.to_str().unwrap()]);
        assert!(start.elapsed() < Duration::from_secs(60), "{name} took {:?}", start.elapsed());
        assert!(out.status.success(), "{name}: {}", stderr(&out));
        let v = stdout_json(&out);
        assert!(output.is_valid(&v), "{name} output violates the output schema");
        assert_eq!(v["format"], 1);
    }
}

#[test]
fn heisenberg_line_is_dense() {
    let dir = scratch("line");
    let file = example_file(&dir, "heisenberg-line");
    let v = stdout_json(&run(&["closure-polymap", "--input", file.to_str().unwrap()]));
    assert_eq!(v["dense_in_group"], true);
    assert_eq!(v["dims"]["raw"], 1);
    assert_eq!(v["dims"]["closed"], 3);
    assert_eq!(v["algebra_basis"], serde_json::json!([["1", "0", "theta"]]));
}

#[test]
fn heisenberg_abelian_closes_to_two_torus() {
    let dir = scratch("abelian");
    let file = example_file(&dir, "heisenberg-abelian");
    let f = file.to_str().unwrap();
    let v = stdout_json(&run(&["closure-orbit", "--input", f]));
    assert_eq!(v["algebra_rational_basis"], serde_json::json!([["1", "0", "0"], ["0", "1", "0"]]));
    assert_eq!(v["dense_in_group"], false);
    let r = stdout_json(&run(&["rationalize", "--input", f]));
    assert_eq!(r["basis"], v["algebra_rational_basis"]);
    let m = stdout_json(&run(&["malcev", "--input", f]));
    assert_eq!(m["through_rank"], 1);
    assert_eq!(m["elements"][0], serde_json::json!(["1", "theta", "0"]));
    assert_eq!(m["elements"].as_array().unwrap().len(), 3);
}

#[test]
fn kronecker_weyl_sums_decay() {
    let dir = scratch("kronecker");
    let file = example_file(&dir, "kronecker");
    let v = stdout_json(&run(&["equi", "--input", file.to_str().unwrap(), "--out-dir", dir.to_str().unwrap()]));
    assert_eq!(v["numeric"]["cud_consistent"], true);
    assert_eq!(v["polynomial"]["cud"], true);
    let csv = fs::read_to_string(dir.join("weyl.csv")).unwrap();
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols[1] == "10000" {
            let abs: f64 = cols[4].parse().unwrap();
            assert!(abs < 0.02, "{line}");
            rows += 1;
        }
    }
    assert_eq!(rows, 5);
}

#[test]
fn ln_curve_is_not_cud() {
    let dir = scratch("ln");
    let file = example_file(&dir, "ln-curve");
    let v = stdout_json(&run(&["equi", "--input", file.to_str().unwrap()]));
    assert_eq!(v["numeric"]["cud_consistent"], false);
    assert_eq!(v["numeric"]["failed_cells"], 0);
    assert_eq!(v["numeric"]["bounded_probes"], serde_json::json!([[0, 1]]));
    assert!(v["polynomial"].is_null());
}

#[test]
fn hrushovski_nearest_coset() {
    let dir = scratch("hrushovski");
    let file = example_file(&dir, "hrushovski");
    let v = stdout_json(&run(&["equi", "--input", file.to_str().unwrap()]));
    assert_eq!(v["nearest_coset"]["point"], serde_json::json!(["0", "0"]));
    assert_eq!(v["nearest_coset"]["direction"], serde_json::json!([["1", "0"]]));
}

#[test]
fn verify_passes_and_writes_samples() {
    let dir = scratch("verify");
    let file = example_file(&dir, "heisenberg-line");
    let out = run(&["verify", "--input", file.to_str().unwrap(), "--out-dir", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = stdout_json(&out);
    assert_eq!(v["pass"], true);
    assert!(v["max_orbit_to_predicted"].as_f64().unwrap() <= 1e-6);
    let csv = fs::read_to_string(dir.join("samples.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x12,x13,x23"));
    assert_eq!(csv.lines().count(), 100_001);
}

#[test]
fn sparse_verify_fails_with_exit_3() {
    let dir = scratch("sparse");
    let file = example_file(&dir, "heisenberg-line");
    let out = run(&["verify", "--input", file.to_str().unwrap(), "--samples", "50"]);
    assert_eq!(out.status.code(), Some(3));
    let v = stdout_json(&out);
    assert_eq!(v["containment_pass"], true);
    assert_eq!(v["density_pass"], false);
    assert_eq!(v["orbit_samples"], 50);
}

const RANDOM_LINE: &str = r#"{
  "format": 1,
  "field": { "min_poly": [-2, 0, 1], "root_interval": ["1", "2"] },
  "map": { "vars": ["t"], "exp": [[["0", "t", "0"], ["0", "0", "theta*t"], ["0", "0", "0"]]] },
  "options": { "samples": 3000, "strategy": "random", "seed": 7, "parameter_box": { "lo": [0], "hi": [1000] } }
}"#;

#[test]
fn seeded_runs_are_deterministic() {
    let dir = scratch("seed");
    let file = write(&dir, "p.json", RANDOM_LINE);
    let f = file.to_str().unwrap();
    let a = run(&["verify", "--input", f]);
    let b = bin().args(["verify", "--input", f]).env("NILCLOSE_THREADS", "1").output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["verify", "--input", f, "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn flags_override_file_options() {
    let dir = scratch("flags");
    let file = write(&dir, "p.json", RANDOM_LINE);
    let v = stdout_json(&run(&["verify", "--input", file.to_str().unwrap(), "--samples", "123", "--tol", "0.5"]));
    assert_eq!(v["orbit_samples"], 123);
    assert_eq!(v["tolerances"]["containment"], 0.5);
}

#[test]
fn zero_denominator_reports_position() {
    let dir = scratch("zero");
    let file = write(&dir, "p.json", "{\n  \"format\": 1,\n  \"subalgebra\": [[\"1/0\", \"0\", \"0\"]]\n}\n");
    let out = run(&["rationalize", "--input", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("line 3 column 20"), "{err}");
    assert!(err.contains("zero denominator"), "{err}");
}

#[test]
fn unknown_fields_are_rejected_with_location() {
    let dir = scratch("unknown");
    let file = write(&dir, "p.json", "{\n  \"subalgebra\": [[\"1\", \"0\", \"0\"]],\n  \"colour\": \"red\"\n}\n");
    let out = run(&["closure-orbit", "--input", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3 column"), "{}", stderr(&out));
    let v: Value = serde_json::from_str(&fs::read_to_string(&file).unwrap()).unwrap();
    assert!(!schema("problem.schema.json").is_valid(&v));
}

#[test]
fn ln1p_outside_curves_is_rejected() {
    let dir = scratch("ln1p");
    let body = r#"{ "map": { "vars": ["t"], "matrix": [["1", "ln1p(t)"], ["0", "1"]] } }"#;
    let file = write(&dir, "p.json", body);
    let out = run(&["closure-polymap", "--input", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn image_outside_group_exits_4() {
    let dir = scratch("group");
    let body = r#"{
  "group": { "n": 3, "algebra_basis": [["1", "0", "0"], ["0", "1", "0"]] },
  "map": { "vars": ["t"], "matrix": [["1", "0", "0"], ["0", "1", "t"], ["0", "0", "1"]] }
}"#;
    let file = write(&dir, "p.json", body);
    let out = run(&["closure-polymap", "--input", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}

#[test]
fn non_subalgebra_exits_4() {
    let dir = scratch("nonsub");
    let body = r#"{ "subalgebra": [["1", "0", "0"], ["0", "0", "1"]] }"#;
    let file = write(&dir, "p.json", body);
    let out = run(&["rationalize", "--input", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}

#[test]
fn missing_payload_and_input_are_input_errors() {
    let dir = scratch("missing");
    let file = write(&dir, "p.json", r#"{ "format": 1 }"#);
    assert_eq!(run(&["equi", "--input", file.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["malcev"]).status.code(), Some(2));
    let file = write(&dir, "q.json", r#"{ "format": 2, "subalgebra": [["1"]] }"#);
    assert_eq!(run(&["malcev", "--input", file.to_str().unwrap()]).status.code(), Some(2));
}

fn strings(v: &Value, out: &mut Vec<String>) {
    match v {
        Value::String(s) => out.push(s.clone()),
        Value::Array(a) => a.iter().for_each(|x| strings(x, out)),
        Value::Object(m) => {
            for (k, x) in m {
                if k != "description" && k != "exponent" && k != "root_interval" && k != "vars" {
                    strings(x, out);
                }
            }
        }
        _ => {}
    }
}

#[test]
fn parser_round_trip_on_bundled_corpus() {
    let dir = scratch("corpus");
    let mut exprs = Vec::new();
    for (name, _) in EXAMPLES {
        let v: Value = serde_json::from_str(&fs::read_to_string(example_file(&dir, name)).unwrap()).unwrap();
        strings(&v, &mut exprs);
    }
    assert!(exprs.len() > 20);
    for s in exprs {
        let Ok(e) = parse(&s, Context::NumericCurve) else { continue };
        let again = parse(&e.to_string(), Context::NumericCurve).unwrap();
        assert_eq!(e, again, "{s}");
    }
}
