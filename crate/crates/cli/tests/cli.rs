use std::path::Path;
use std::process::{Command, Output};

fn confflat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confflat")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn spec_file(dir: &Path, text: &str) -> String {
    let path = dir.join("spec.json");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn classify_reports_the_type_vi_row() {
    let o = confflat(&["classify", "--family", "VI", "--grid", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let v = &r["verdicts"];
    for k in ["lcf", "p", "q"] {
        assert_eq!(v[k], "satisfied", "{k}");
    }
    assert_eq!(v["parallel_ricci"], "violated");
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["points"].as_array().unwrap().len(), 81);
}

#[test]
fn classify_writes_the_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = confflat(&["classify", "--family", "S4", "--grid", "2", "--format", "csv", "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("LCF ✗"), "{}", stdout(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 17);
    assert!(csv.starts_with("index,x1,"));
}

#[test]
fn classify_output_is_byte_identical() {
    let a = confflat(&["classify", "--family", "V", "--grid", "3"]);
    let b = confflat(&["classify", "--family", "V", "--grid", "3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn single_thread_override_gives_the_same_report() {
    let a = confflat(&["classify", "--family", "IX", "--grid", "3"]);
    let b = Command::new(env!("CARGO_BIN_EXE_confflat"))
        .args(["classify", "--family", "IX", "--grid", "3"])
        .env("CONFFLAT_THREADS", "1")
        .output()
        .unwrap();
    assert!(b.status.success(), "{}", stderr(&b));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn check_rejects_equal_exponents() {
    let dir = tempfile::tempdir().unwrap();
    let spec = spec_file(dir.path(), r#"{"family": "VI", "params": {"a": 1.0, "b": 1.0}}"#);
    let o = confflat(&["check", &spec]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("a ≠ b"), "{}", stderr(&o));
}

#[test]
fn check_accepts_the_defaults() {
    for tag in ["I", "III2", "V", "S10", "R2c"] {
        let o = confflat(&["check", "--family", tag]);
        assert!(o.status.success(), "{tag}: {}", stderr(&o));
        assert!(stdout(&o).starts_with("ok: "));
    }
}

#[test]
fn malformed_spec_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let spec = spec_file(dir.path(), r#"{"family": "VII", "parms": {}}"#);
    let o = confflat(&["classify", &spec]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("parms"), "{}", stderr(&o));
    let spec = spec_file(dir.path(), r#"{"family": "VII", "params": {"a6": "four"}}"#);
    let o = confflat(&["check", &spec]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_spec_file_is_an_io_error() {
    let o = confflat(&["classify", "/nonexistent/spec.json"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn eigen_matches_the_closed_form() {
    let o = confflat(&["eigen", "--family", "VII", "--point", "0.05,2.05,4.05,6.05"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<(f64, f64)> = text
        .lines()
        .filter_map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            (f.len() == 3 && f[0].parse::<usize>().is_ok()).then(|| (f[1].parse().unwrap(), f[2].parse().unwrap()))
        })
        .collect();
    assert_eq!(rows.len(), 4, "{text}");
    for (computed, closed) in rows {
        assert!((computed - closed).abs() < 1e-6, "{text}");
    }
}

#[test]
fn eigen_needs_four_coordinates() {
    let o = confflat(&["eigen", "--family", "I", "--point", "0,0,0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("4 coordinates"));
}

#[test]
fn verify_passes_on_a_profile_family() {
    let o = confflat(&["verify", "--family", "III2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("jets vs finite differences"));
}

#[test]
fn list_covers_the_catalog() {
    let text = stdout(&confflat(&["list"]));
    for tag in ["I ", "III1", "VIII", "IX", "S1 ", "S10", "R2b"] {
        assert!(text.contains(tag), "{tag}");
    }
}

fn key_paths(v: &serde_json::Value, prefix: &str, out: &mut Vec<String>) {
    match v {
        serde_json::Value::Object(m) => {
            for (k, x) in m {
                let p = format!("{prefix}{k}");
                out.push(p.clone());
                key_paths(x, &format!("{p}."), out);
            }
        }
        serde_json::Value::Array(a) if a.first().is_some_and(|x| x.is_object()) => {
            key_paths(&a[0], &format!("{}[].", prefix.trim_end_matches('.')), out);
        }
        _ => {}
    }
}

#[test]
fn schema_document_lists_every_report_field() {
    let doc = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/report_schema.md")).unwrap();
    let documented: Vec<&str> = doc
        .lines()
        .filter_map(|l| l.strip_prefix("| `")?.split('`').next())
        .collect();
    let mut seen = Vec::new();
    for args in [
        vec!["classify", "--family", "S2", "--grid", "1"],
        vec!["classify", "--family", "IV", "--grid", "1"],
    ] {
        let r: serde_json::Value = serde_json::from_str(&stdout(&confflat(&args))).unwrap();
        key_paths(&r, "", &mut seen);
    }
    for k in &seen {
        assert!(documented.contains(&k.as_str()), "undocumented field {k}");
    }
    for k in documented {
        assert!(k == "spec.box" || seen.iter().any(|s| s == k), "documented field {k} never appears");
    }
}

#[test]
fn report_round_trips() {
    let text = stdout(&confflat(&["classify", "--family", "VIII", "--grid", "2"]));
    let report: confflat::classify::ConditionReport = serde_json::from_str(&text).unwrap();
    assert_eq!(confflat::classify::report_json(&report).unwrap(), text);
}
