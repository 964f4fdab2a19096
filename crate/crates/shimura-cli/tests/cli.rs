use std::process::Command;

fn shimura(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_shimura")).args(args).output().unwrap()
}

#[test]
fn group_lists_subgroups() {
    let out = shimura(&["group", "26", "1"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let keys: Vec<&str> = v.as_array().unwrap().iter().map(|g| g["key"].as_str().unwrap()).collect();
    assert_eq!(keys, ["26.1.1", "26.1.2", "26.1.13", "26.1.26", "26.1.2-13"]);
}

#[test]
fn points_with_certificate() {
    let out = shimura(&["points", "26.1.13", "--height", "20", "--certify"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["status"], "complete_certified");
    assert_eq!(v["points"], serde_json::json!(["(4,-9)", "(4,4)", "inf"]));
}

#[test]
fn unknown_curve_fails() {
    let out = shimura(&["local", "38.1.7"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn verify_all_table() {
    let out = shimura(&["--table", "verify-all", "--jobs", "2", "--height", "60"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("38.1.19"));
}

#[test]
fn catalog_override() {
    let dir = std::env::temp_dir().join(format!("shimura-cli-empty-{}", std::process::id()));
    std::fs::create_dir_all(dir.join("curves")).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_shimura"))
        .args(["verify-all"])
        .env("SHIMURA_CATALOG", &dir)
        .output()
        .unwrap();
    std::fs::remove_dir_all(&dir).unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["summary"]["records"], 0);
}
