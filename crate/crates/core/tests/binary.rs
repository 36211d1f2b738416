//! The installed binary: exit codes and output routing.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_colorsurg"))
}

fn scratch(name: &str) -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("colorsurg-bin-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn exit_codes() {
    assert_eq!(bin().args(["lattice", "--d", "5"]).output().unwrap().status.code(), Some(0));
    assert_eq!(bin().args(["lattice", "--d", "4"]).output().unwrap().status.code(), Some(1));
    assert_eq!(bin().args(["frobnicate"]).output().unwrap().status.code(), Some(1));
    assert_eq!(bin().args(["--help"]).output().unwrap().status.code(), Some(0));
    let v = bin()
        .args(["verify", "--protocol", "cnot", "--d", "3", "--seeds", "2"])
        .output()
        .unwrap();
    assert_eq!(v.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&v.stdout).contains("PASS"));
}

#[test]
fn output_dir_from_environment() {
    let dir = scratch("env");
    let o = bin().env("COLORSURG_OUT", &dir).args(["resources", "table3"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("wrote "));
    let text = std::fs::read_to_string(dir.join("table3.csv")).unwrap();
    assert!(text.starts_with("method,allocation,d3"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn montecarlo_file_output_is_reproducible() {
    let dir = scratch("mc");
    let args = |out: &str| {
        vec![
            "montecarlo",
            "--protocol",
            "inject_t",
            "--d",
            "3",
            "--p",
            "0.002",
            "--trials",
            "4000",
            "--seed",
            "12",
            "--out",
            out,
        ]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>()
    };
    let (a, b) = (dir.join("a.csv"), dir.join("b.csv"));
    for p in [&a, &b] {
        assert!(bin().args(args(p.to_str().unwrap())).status().unwrap().success());
    }
    let text = std::fs::read(&a).unwrap();
    assert_eq!(text, std::fs::read(&b).unwrap());
    assert!(String::from_utf8_lossy(&text).lines().nth(1).unwrap().starts_with("inject_t,3,"));
    std::fs::remove_dir_all(dir).unwrap();
}
