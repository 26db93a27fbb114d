use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

struct Run {
    stdout: String,
    stderr: String,
    code: i32,
}

fn adtnet(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_adtnet")).args(args).current_dir(root()).output().unwrap();
    Run {
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
        code: out.status.code().unwrap(),
    }
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let r = adtnet(&full);
    let v = serde_json::from_str(&r.stdout).unwrap_or_else(|e| panic!("{args:?}: {e}\n{}", r.stdout));
    (v, r.code)
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("adtnet-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn load_schema(name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(root().join("schema").join(name)).unwrap()).unwrap()
}

fn schema_errors(report: &Value) -> Vec<String> {
    let registry = jsonschema::Registry::new()
        .add(
            "https://adtnet.invalid/schema/network.schema.json",
            jsonschema::Resource::from_contents(load_schema("network.schema.json")),
        )
        .unwrap()
        .add(
            "https://adtnet.invalid/schema/assignment.schema.json",
            jsonschema::Resource::from_contents(load_schema("assignment.schema.json")),
        )
        .unwrap()
        .prepare()
        .unwrap();
    let schema = load_schema("report.schema.json");
    let validator = jsonschema::options().with_registry(&registry).build(&schema).unwrap();
    validator.iter_errors(report).map(|e| format!("{} at {}", e, e.instance_path())).collect()
}

fn check_schema(reports: &[Value]) {
    for r in reports {
        let errors = schema_errors(r);
        assert!(errors.is_empty(), "report does not match schema: {errors:?}\n{r:#}");
    }
}

#[test]
fn schema_rejects_drift() {
    let (mut v, _) = json(&["mincut", "fixtures/fig2.json"]);
    v["result"]["pairs"][0]["extra"] = Value::Bool(true);
    assert!(!schema_errors(&v).is_empty());
    let (mut v, _) = json(&["validate", "fixtures/fig2.json"]);
    v["schema_version"] = Value::from(2);
    assert!(!schema_errors(&v).is_empty());
}

#[test]
fn reports_match_schema() {
    let infeasible = scratch("fig2-cut.json");
    fs::write(&infeasible, fig2_without_first_edges()).unwrap();
    let infeasible = infeasible.to_str().unwrap().to_string();
    let code_out = scratch("fig2-code.json");
    let code_out = code_out.to_str().unwrap().to_string();
    let runs: Vec<Vec<&str>> = vec![
        vec!["validate", "fixtures/fig2.json"],
        vec!["validate", "fixtures/cycle2.json", "--static"],
        vec!["mincut", "fixtures/fig2.json"],
        vec!["mincut", "fixtures/butterfly.json", "--method", "algebraic", "--q", "65536"],
        vec!["code", "fixtures/butterfly.json", "--out", &code_out],
        vec!["code", &infeasible],
        vec!["code", "fixtures/fig2.json", "--trials", "1", "--q", "2"],
        vec!["verify", "fixtures/butterfly.json", &code_out],
        vec!["erasure", "fixtures/diamond.json", "--static"],
        vec!["erasure", "fixtures/parallel.json", "--mode", "monte-carlo", "--samples", "500"],
        vec!["delay", "fixtures/cycle2.json"],
        vec!["delay", "fixtures/fig2.json", "--order", "4"],
        vec!["fixtures"],
        vec!["fixtures", "--show", "fig2"],
        vec!["verify", "fixtures/fig2.json", "no-such-file.json"],
    ];
    let reports: Vec<Value> = runs.iter().map(|a| json(a).0).collect();
    check_schema(&reports);
}

#[test]
fn network_schema_accepts_fixtures() {
    let registry = jsonschema::Registry::new().prepare().unwrap();
    let schema = load_schema("network.schema.json");
    let validator = jsonschema::options().with_registry(&registry).build(&schema).unwrap();
    for entry in fs::read_dir(root().join("fixtures")).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
            assert!(validator.is_valid(&v), "{}", path.display());
        }
    }
}

fn fig2_without_first_edges() -> String {
    let text = fs::read_to_string(root().join("fixtures/fig2.json")).unwrap();
    text.replace("    [1,3],\n    [1,8],\n", "")
}

#[test]
fn mincut_fig2_enumeration() {
    let (v, code) = json(&["mincut", "fixtures/fig2.json", "--method", "enumeration"]);
    assert_eq!(code, 0);
    let pair = &v["result"]["pairs"][0];
    assert_eq!(pair["value"], 2);
    assert_eq!(pair["witness"]["cut"], serde_json::json!(["S"]));
}

#[test]
fn malformed_edge_direction_exits_one() {
    let text = fs::read_to_string(root().join("fixtures/fig2.json")).unwrap().replace("[1,3]", "[3,1]");
    let path = scratch("backwards.json");
    fs::write(&path, text).unwrap();
    let r = adtnet(&["validate", path.to_str().unwrap()]);
    assert_eq!(r.code, 1, "{}{}", r.stdout, r.stderr);
    let r = adtnet(&["code", path.to_str().unwrap()]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.starts_with("error: "), "{}", r.stderr);
}

#[test]
fn syntax_error_reports_position() {
    let path = scratch("broken.json");
    fs::write(&path, "{\n  \"field\": {\"p\":2,\"m\":8},\n  \"nodes\": [,]\n}\n").unwrap();
    let r = adtnet(&["validate", path.to_str().unwrap()]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("line 3"), "{}", r.stderr);
}

#[test]
fn cycle_gating() {
    assert_eq!(adtnet(&["validate", "fixtures/cycle2.json", "--static"]).code, 1);
    assert_eq!(adtnet(&["validate", "fixtures/cycle2.json", "--delay"]).code, 0);
    assert_eq!(adtnet(&["code", "fixtures/cycle2.json"]).code, 1);
    let (v, code) = json(&["delay", "fixtures/cycle2.json"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["nilpotency"], Value::Null);
    assert_eq!(v["result"]["verdict"]["feasible"], true);
}

#[test]
fn multisource_multiple_multicast_is_feasible() {
    let (v, code) = json(&["code", "fixtures/multisource.json", "--class", "multiple-multicast"]);
    assert_eq!(code, 0);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["result"]["verdict"]["feasible"], true);
}

#[test]
fn infeasible_demand_exits_two() {
    let path = scratch("cut.json");
    fs::write(&path, fig2_without_first_edges()).unwrap();
    let (v, code) = json(&["code", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(v["status"], "infeasible");
    let cut = &v["result"]["cuts"][0];
    assert!(cut["mincut"].as_u64().unwrap() < cut["required"].as_u64().unwrap());
}

#[test]
fn code_then_verify_round_trip() {
    let out = scratch("butterfly-code.json");
    let r = adtnet(&["code", "fixtures/butterfly.json", "--seed", "7", "--out", out.to_str().unwrap()]);
    assert_eq!(r.code, 0);
    let r = adtnet(&["verify", "fixtures/butterfly.json", out.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert!(r.stdout.ends_with("feasible\n"));
}

#[test]
fn erasure_requires_a_model() {
    let r = adtnet(&["erasure", "fixtures/fig2.json"]);
    assert_eq!(r.code, 1);
    let r = adtnet(&["erasure", "fixtures/fig2.json", "--iid", "0.1"]);
    assert_eq!(r.code, 2, "{}", r.stdout);
}

#[test]
fn same_seed_same_bytes() {
    for args in [
        vec!["--format", "json", "code", "fixtures/combination.json", "--seed", "11"],
        vec!["--format", "json", "mincut", "fixtures/butterfly.json", "--method", "algebraic", "--seed", "3"],
        vec![
            "--format",
            "json",
            "erasure",
            "fixtures/parallel.json",
            "--mode",
            "monte-carlo",
            "--samples",
            "2000",
            "--seed",
            "5",
        ],
        vec!["--format", "json", "delay", "fixtures/fig2.json", "--seed", "9"],
    ] {
        let a = adtnet(&args);
        let b = adtnet(&args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        let mut seq = args.clone();
        seq.push("--sequential");
        assert_eq!(a.stdout, adtnet(&seq).stdout, "sequential differs: {args:?}");
    }
}

#[test]
fn fixtures_out_writes_files() {
    let dir = scratch("fixtures-out");
    let r = adtnet(&["fixtures", "--out", dir.to_str().unwrap()]);
    assert_eq!(r.code, 0);
    for name in ["fig2.json", "twolevel.json", "README.md"] {
        assert_eq!(fs::read_to_string(dir.join(name)).unwrap(), fs::read_to_string(root().join("fixtures").join(name)).unwrap());
    }
}

/// Compares against `tests/golden/NAME`; set `ADTNET_BLESS=1` to rewrite.
fn golden(name: &str, args: &[&str]) {
    let r = adtnet(args);
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("ADTNET_BLESS").is_some() {
        fs::write(&path, &r.stdout).unwrap();
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(r.stdout, expected, "{name} drifted");
}

#[test]
fn golden_outputs() {
    golden("validate_fig2.txt", &["validate", "fixtures/fig2.json"]);
    golden("mincut_fig2.json", &["--format", "json", "mincut", "fixtures/fig2.json"]);
    golden("code_fig2.json", &["--format", "json", "code", "fixtures/fig2.json", "--seed", "1"]);
    golden("code_twolevel.txt", &["code", "fixtures/twolevel.json"]);
    golden("erasure_parallel.txt", &["erasure", "fixtures/parallel.json"]);
    golden("delay_cycle2.json", &["--format", "json", "delay", "fixtures/cycle2.json", "--order", "6"]);
    golden("fixtures.txt", &["fixtures"]);
}

#[test]
fn help_exits_zero() {
    let r = adtnet(&["--help"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("mincut"));
    assert_eq!(adtnet(&["mincut"]).code, 1);
}
