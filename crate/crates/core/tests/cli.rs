use std::path::PathBuf;
use std::process::Command;

fn qw(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_qw")).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qw-cli-it-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn every_subcommand_runs() {
    let inst = scratch("inst.json");
    let path = inst.to_str().unwrap();
    let (code, _, err) = qw(&["gen", "--family", "random-sep", "--n", "5", "--size", "2", "--seed", "4", "-o", path]);
    assert_eq!(code, 0, "{err}");

    let (code, out, _) = qw(&["evaluate", "-i", path]);
    assert_eq!(code, 0);
    let answer = serde_json::from_str::<serde_json::Value>(&out).unwrap()["answer"].clone();

    for method in ["compress", "depth", "direct"] {
        let (code, out, err) = qw(&["solve", "-i", path, "--method", method, "--witness"]);
        assert_eq!(code, 0, "{err}");
        let report: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(report["answer"], answer, "{method}");
    }

    let (code, out, _) = qw(&["septree", "-i", path, "--depth", "4", "--size", "2"]);
    assert_eq!(code, 0);
    assert!(out.contains("\"uniform_size\":2"));

    let (code, out, _) = qw(&["compress", "-i", path]);
    assert_eq!(code, 0);
    assert!(serde_json::from_str::<serde_json::Value>(&out).unwrap()["admissible"].as_bool().unwrap());

    let (code, out, err) = qw(&["arith", "-i", path]);
    assert_eq!(code, 0, "{err}");
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(doc["audit"]["queries_used"].as_u64().unwrap() <= doc["audit"]["h_target"].as_u64().unwrap());

    let (code, out, _) = qw(&["bench", "--family", "star", "--sizes", "4,8,16"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().filter(|l| l.starts_with('{')).count(), 3);
}

#[test]
fn exit_codes() {
    assert_eq!(qw(&["--help"]).0, 0);
    assert_eq!(qw(&["solve"]).0, 2);
    let (code, _, err) = qw(&["evaluate", "-i", "/nonexistent/instance.json"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error:"));
    let (code, _, err) = qw(&["septree", "-i", "/dev/null"]);
    assert_eq!(code, 1, "{err}");
}

#[test]
fn capacity_errors_exit_one() {
    let inst = scratch("big.json");
    let path = inst.to_str().unwrap();
    assert_eq!(qw(&["gen", "--family", "chain", "--n", "12", "-o", path]).0, 0);
    let (code, _, err) = qw(&["solve", "-i", path, "--method", "depth", "--cap", "4"]);
    assert_eq!(code, 1);
    assert!(err.contains("capacity") || err.contains("cap"), "{err}");
}
