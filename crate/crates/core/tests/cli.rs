use std::path::Path;
use std::process::Command;

use dendrite_core::cli::{exit_code_for, run};
use dendrite_core::report::SCHEMA;
use serde_json::Value;

const TENT: &str = "name = tent\n\n[tree]\nvertices = a b\na b 1\n\n[map]\na -> @a\nb -> @a\n0 : 0=@a, 1/2=@b, 1=@a\n";
const HALF: &str = "[tree]\nvertices = a b\na b 1\n[map]\na -> @a\nb -> 0:1/2\n";

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["dendrite"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

/// Checks `v` against the subset of JSON Schema the report schema uses.
fn validate(root: &Value, schema: &Value, v: &Value, path: &str) -> Result<(), String> {
    if let Some(r) = schema.get("$ref").and_then(Value::as_str) {
        let name = r.strip_prefix("#/$defs/").ok_or_else(|| format!("unsupported ref {r}"))?;
        return validate(root, &root["$defs"][name], v, path);
    }
    if let Some(t) = schema.get("type") {
        let types: Vec<&str> = match t {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
            _ => return Err(format!("{path}: bad type keyword")),
        };
        let ok = types.iter().any(|t| match *t {
            "object" => v.is_object(),
            "array" => v.is_array(),
            "string" => v.is_string(),
            "integer" => v.is_i64() || v.is_u64(),
            "number" => v.is_number(),
            "boolean" => v.is_boolean(),
            "null" => v.is_null(),
            _ => false,
        });
        if !ok {
            return Err(format!("{path}: expected {types:?}, found {v}"));
        }
    }
    if let Some(e) = schema.get("enum").and_then(Value::as_array) {
        if !e.contains(v) {
            return Err(format!("{path}: {v} not in {e:?}"));
        }
    }
    if let Some(alts) = schema.get("oneOf").and_then(Value::as_array) {
        let n = alts.iter().filter(|s| validate(root, s, v, path).is_ok()).count();
        if n != 1 {
            return Err(format!("{path}: {n} oneOf branches match"));
        }
    }
    if let Some(obj) = v.as_object() {
        for k in schema.get("required").and_then(Value::as_array).into_iter().flatten() {
            let k = k.as_str().unwrap();
            if !obj.contains_key(k) {
                return Err(format!("{path}: missing `{k}`"));
            }
        }
        let props = schema.get("properties").and_then(Value::as_object);
        for (k, val) in obj {
            let sub = format!("{path}/{k}");
            match props.and_then(|p| p.get(k)) {
                Some(s) => validate(root, s, val, &sub)?,
                None => match schema.get("additionalProperties") {
                    Some(Value::Bool(false)) => return Err(format!("{path}: unexpected `{k}`")),
                    Some(s @ Value::Object(_)) => validate(root, s, val, &sub)?,
                    _ => {}
                },
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), v.as_array()) {
        for (i, x) in arr.iter().enumerate() {
            validate(root, items, x, &format!("{path}/{i}"))?;
        }
    }
    Ok(())
}

fn check_schema(text: &str) -> Value {
    let schema: Value = serde_json::from_str(SCHEMA).unwrap();
    let v: Value = serde_json::from_str(text).unwrap();
    if let Err(e) = validate(&schema, &schema, &v, "") {
        panic!("schema violation: {e}\n{text}");
    }
    v
}

#[test]
fn validator_rejects_bad_reports() {
    let schema: Value = serde_json::from_str(SCHEMA).unwrap();
    let (_, out, _) = call(&["fixed", "example:tent", "--no-timings"]);
    let mut v: Value = serde_json::from_str(&out).unwrap();
    assert!(validate(&schema, &schema, &v, "").is_ok());
    v["status"] = Value::String("great".into());
    assert!(validate(&schema, &schema, &v, "").is_err());
    v["status"] = Value::String("ok".into());
    v["surprise"] = Value::Bool(true);
    assert!(validate(&schema, &schema, &v, "").is_err());
    v.as_object_mut().unwrap().remove("surprise");
    v.as_object_mut().unwrap().remove("system");
    assert!(validate(&schema, &schema, &v, "").is_err());
}

#[test]
fn tent_config_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "tent.ini", TENT);
    let (code, out, err) = call(&["analyze", &f, "--no-timings"]);
    assert_eq!(code, 0, "{err}");
    let v = check_schema(&out);
    assert_eq!(v["status"], "consistent");
    assert_eq!(v["system"]["name"], "tent");
    let fix = &v["results"]["fixed"];
    assert!(fix.is_object());
    let (code2, out2, _) = call(&["analyze", &f, "--no-timings"]);
    assert_eq!(code2, 0);
    assert_eq!(out, out2, "reports must be byte-identical");
    let with = call(&["analyze", &f]).1;
    assert!(check_schema(&with)["timings_us"]["total"].is_u64());
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let (_, out, _) = call(&["theorem", "example:shift_star:6", "--no-timings"]);
    let (code, printed, _) = call(&["theorem", "example:shift_star:6", "--no-timings", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(printed.is_empty() || printed == out);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), out);
}

#[test]
fn every_command_matches_the_schema() {
    let runs: &[&[&str]] = &[
        &["theorem", "example:shift_star:6", "--no-timings"],
        &["defect", "example:odometer:5", "--delta", "1/16", "--no-timings"],
        &["limits", "example:tent", "--point", "0:1/3", "--point", "@1", "--no-timings"],
        &["fixed", "example:y_rotation", "--no-timings"],
        &["analyze", "example:bump", "--no-timings"],
        &["corpus", "--seeds", "1..3", "--no-timings"],
    ];
    for args in runs {
        let (code, out, err) = call(args);
        assert_eq!(code, 0, "{args:?}: {err}");
        let v = check_schema(&out);
        assert_eq!(v["command"], args[0]);
    }
    let (_, out, _) = call(&["theorem", "example:shift_star:6", "--no-timings"]);
    let v = check_schema(&out);
    assert_eq!(v["status"], "consistent");
    assert_eq!(v["results"]["theorem"]["consistent"], true);
    let (_, out, _) = call(&["defect", "example:odometer:5", "--delta", "1/16", "--no-timings"]);
    assert_eq!(check_schema(&out)["results"]["defect"]["curve"][0]["defect"], "1/16");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let half = write(dir.path(), "half.ini", HALF);
    let (code, out, _) = call(&["theorem", &half, "--no-timings"]);
    assert_eq!(code, 3);
    let v = check_schema(&out);
    assert_eq!(v["status"], "resource_limit");
    assert!(v["errors"]["theorem"].as_str().unwrap().contains("limit"));

    let (code, _, err) = call(&["analyze", "/nonexistent/system.ini"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error:"));
    assert_eq!(call(&["frobnicate"]).0, 1);
    assert_eq!(call(&["analyze", "example:tent", "--analyses", ""]).0, 1);
    assert_eq!(call(&["analyze", "example:tent", "--analyses", "fixed,bogus"]).0, 1);
    assert_eq!(call(&["theorem", "example:odometer:13"]).0, 3);
    assert_eq!(call(&["theorem", "example:odometer:0"]).0, 1);
    assert_eq!(call(&["theorem", "example:tent", "--epsilon", "0"]).0, 1);

    let bad = write(dir.path(), "bad.ini", "[tree]\nvertices = a b\na b -1\n");
    let (code, _, err) = call(&["fixed", &bad]);
    assert_eq!(code, 1);
    assert!(err.contains("line 3"), "{err}");

    assert_eq!(exit_code_for("ok"), 0);
    assert_eq!(exit_code_for("consistent"), 0);
    assert_eq!(exit_code_for("undetermined"), 0);
    assert_eq!(exit_code_for("inconsistent"), 2);
    assert_eq!(exit_code_for("resource_limit"), 3);
}

#[test]
fn export_round_trip_keeps_the_hash() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("star.ini");
    let (code, _, err) = call(&["export", "example:shift_star:4", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let a = check_schema(&call(&["fixed", "example:shift_star:4", "--no-timings"]).1);
    let b = check_schema(&call(&["fixed", path.to_str().unwrap(), "--no-timings"]).1);
    assert_eq!(a["system"]["hash"], b["system"]["hash"]);
    assert_eq!(a["results"], b["results"]);
}

#[test]
fn list_names_every_example() {
    let (code, out, _) = call(&["list"]);
    assert_eq!(code, 0);
    for n in dendrite_core::examples::names() {
        assert!(out.contains(n), "{n} missing from list");
    }
}

#[test]
fn binary_runs() {
    let out = Command::new(env!("CARGO_BIN_EXE_dendrite"))
        .args(["defect", "example:odometer:5", "--delta", "1/16", "--no-timings"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let (_, inproc, _) = call(&["defect", "example:odometer:5", "--delta", "1/16", "--no-timings"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), inproc);
    let out = Command::new(env!("CARGO_BIN_EXE_dendrite")).arg("bogus").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
