use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hetnet(args: &[&str], env_threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hetnet"));
    cmd.args(args).env_remove("HETNET_THREADS");
    if let Some(t) = env_threads {
        cmd.env("HETNET_THREADS", t);
    }
    cmd.output().unwrap()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn writes_csv_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = write(tmp.path(), "s.toml", "name = \"t\"\noutputs = [\"assoc_probs\"]\n[sweep]\ndensity_ratio = [1, 10]\n");
    let out = tmp.path().join("out");
    let o = hetnet(&["run", &sc, "--out", out.to_str().unwrap(), "--los"], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("assoc_probs.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "ratio,alpha_s,case1,case2,case4");
    assert_eq!(lines.len(), 3);
    let m = manifest(&out);
    assert_eq!(m["status"], "ok");
    assert_eq!(m["exit_code"], 0);
}

#[test]
fn invalid_scenario_exits_3_with_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = write(tmp.path(), "bad.toml", "outputs = [\"assoc_probs\"]\n[sweep]\ndensity_ratio = [5, 1]\n");
    let out = tmp.path().join("out");
    let o = hetnet(&["run", &sc, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(3));
    let m = manifest(&out);
    assert_eq!(m["status"], "error");
    assert_eq!(m["exit_code"], 3);
    assert!(!m["error"].as_str().unwrap().is_empty());
}

#[test]
fn missing_scenario_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = hetnet(&["run", tmp.path().join("nope.toml").to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(3));
    assert!(out.join("manifest.json").exists());
}

#[test]
fn bad_thread_settings_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = write(tmp.path(), "s.toml", "outputs = [\"assoc_probs\"]\n[sweep]\ndensity_ratio = [1]\n");
    let out = tmp.path().join("out");
    let o = hetnet(&["run", &sc, "--out", out.to_str().unwrap()], Some("many"));
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(manifest(&out)["exit_code"], 2);
    let o = hetnet(&["run", &sc, "--out", out.to_str().unwrap(), "--threads", "0"], None);
    assert_eq!(o.status.code(), Some(2));
    let o = hetnet(&["run", &sc, "--bogus"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = write(tmp.path(), "s.toml", "outputs = [\"assoc_probs\"]\n[sweep]\ndensity_ratio = [1]\n");
    let blocker = write(tmp.path(), "file", "");
    let out = Path::new(&blocker).join("sub");
    let o = hetnet(&["run", &sc, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn invalid_physics_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = write(tmp.path(), "s.toml", "outputs = [\"assoc_probs\"]\n[base]\np_m_dbm = 10\n[sweep]\ndensity_ratio = [1]\n");
    let out = tmp.path().join("out");
    let o = hetnet(&["run", &sc, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(manifest(&out)["status"], "error");
}
