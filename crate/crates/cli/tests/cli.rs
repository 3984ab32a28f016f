use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poison-bounds"))
        .args(args)
        .env("POISON_BOUNDS_THREADS", "2")
        .output()
        .unwrap()
}

fn config(dir: &Path, body: &str) -> String {
    let p = dir.join("c.toml");
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const COIN: &str = r#"
[experiment]
name = "coin"
kind = "coin-game"
seed = 3
trials = 500

[grid]
eta = [0.1]
n = [101]
"#;

#[test]
fn run_writes_files_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let o = bin(&["run", &config(dir.path(), COIN), "--out", out_dir.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out_dir.join("results.csv")).unwrap();
    assert!(csv.starts_with("experiment,kind,n,eta,d,metric,estimate,stderr,ci_lo,ci_hi,bound,verdict,seed\n"));
    assert!(csv.contains("coin,coin-game,101,0.1,,regret,"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["all_pass"], true);
    assert_eq!(summary["threads"], 2);
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
[experiment]
name = "bad"
kind = "realizable-upper"
seed = 1
trials = 50

[class]
kind = "full-cube"
m = 2

[learner]
base = "const0"
meta = "none"

[distribution]
target_row = 3

[grid]
eta = [0.5]
n = [20]
"#;
    let o = bin(&[
        "run",
        &config(dir.path(), body),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL standard_risk"));
}

#[test]
fn bad_config_exits_two_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["run", &config(dir.path(), "[experiment]\nname = 1\n")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error:"));
}

#[test]
fn certify_prints_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
[experiment]
name = "cert"
kind = "realizable-upper"
seed = 4
trials = 1

[class]
kind = "intervals"
m = 4

[learner]
base = "erm"
blocks = 3

[certify]
oracle = true

[grid]
eta = [0.2]
n = [6]
"#;
    let out_dir = dir.path().join("o");
    let o = bin(&["certify", &config(dir.path(), body), "--out", out_dir.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.starts_with("x\tprediction\tcert_exact\tcert_paper\toracle_edits\n"));
    assert_eq!(stdout.lines().count(), 6);
    assert!(out_dir.join("certificates.csv").exists());
}

#[test]
fn list_experiments_names_every_kind() {
    let o = bin(&["list-experiments"]);
    assert!(o.status.success());
    let s = String::from_utf8_lossy(&o.stdout);
    for k in [
        "realizable-upper",
        "realizable-lower",
        "proper",
        "agnostic",
        "coin-game",
        "certify",
        "sandwich",
    ] {
        assert!(s.lines().any(|l| l.starts_with(k)), "{k}");
    }
}

#[test]
fn selftest_passes() {
    let o = bin(&["selftest"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(String::from_utf8_lossy(&o.stdout).matches(" ok ").count(), 3);
}
