use std::process::{Command, Output};

use sha2::{Digest, Sha256};

const BIN: &str = env!("CARGO_BIN_EXE_intermittency");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn digest(o: &Output) -> Vec<u8> {
    Sha256::digest(&o.stdout).to_vec()
}

const PHI: [&str; 10] = ["moments", "phi", "--n", "2", "--t", "1", "--samples", "20000", "--seed", "42"];

#[test]
fn monte_carlo_output_is_deterministic() {
    let a = run(&PHI);
    let b = run(&PHI);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(digest(&a), digest(&b));
    let mut one = PHI.to_vec();
    one.extend(["--threads", "1"]);
    let mut three = PHI.to_vec();
    three.extend(["--threads", "3"]);
    assert_eq!(digest(&run(&one)), digest(&a));
    assert_eq!(digest(&run(&three)), digest(&a));
    let mut other = PHI.to_vec();
    other[9] = "43";
    assert_ne!(digest(&run(&other)), digest(&a));
}

#[test]
fn json_envelope() {
    let o = run(&["kernels", "mass", "--kernel", "wave1", "--t", "0.5"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["result"]["total_mass"], 0.5);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["diagrams", "count", "4,4"]).status.code(), Some(0));
    assert_eq!(String::from_utf8(run(&["diagrams", "count", "4,4"]).stdout).unwrap().trim(), "24");
    let v = run(&["smallball", "verify", "--kernel", "heat1", "--a", "1", "--b", "2"]);
    assert_eq!(v.status.code(), Some(1));
    let missing = run(&["moments", "phi", "--n", "1", "--t", "1"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("ERROR MISSING_SEED"));
    assert_eq!(run(&["kernels", "mass", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["kernels", "density", "--kernel", "heat1", "--t", "-1", "--x", "0"]).status.code(), Some(2));
}

#[test]
fn csv_output() {
    let o = run(&["--output", "csv", "exponents", "table"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("equation"));
    assert!(lines[1].contains("5/3") && lines[1].contains("7/3"));
}

#[test]
fn config_file_and_precedence() {
    let dir = std::env::temp_dir().join(format!("intermittency-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("cfg.json");
    std::fs::write(&cfg, r#"{"kernel": "wave1", "t": 0.25}"#).unwrap();
    let c = cfg.to_str().unwrap();
    let from_file = run(&["kernels", "mass", "--config", c]);
    let v: serde_json::Value = serde_json::from_slice(&from_file.stdout).unwrap();
    assert_eq!(v["result"]["total_mass"], 0.25);
    let flag_wins = run(&["kernels", "mass", "--config", c, "--t", "0.75"]);
    let v: serde_json::Value = serde_json::from_slice(&flag_wins.stdout).unwrap();
    assert_eq!(v["result"]["total_mass"], 0.75);
    let out = dir.join("out.json");
    let written = run(&["kernels", "mass", "--config", c, "--out", out.to_str().unwrap()]);
    assert_eq!(written.status.code(), Some(0));
    assert_eq!(std::fs::read(&out).unwrap(), from_file.stdout);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn help_everywhere() {
    let subs: &[&[&str]] = &[
        &[],
        &["exponents", "table"],
        &["exponents", "check"],
        &["diagrams", "count"],
        &["diagrams", "enumerate"],
        &["diagrams", "constrained"],
        &["kernels", "density"],
        &["kernels", "ball-mass"],
        &["kernels", "fourier"],
        &["kernels", "mass"],
        &["kernels", "mittag-leffler"],
        &["moments", "estimate"],
        &["moments", "phi"],
        &["moments", "diagram"],
        &["moments", "fd"],
        &["lower", "value"],
        &["lower", "exponents"],
        &["lower", "mc"],
        &["smallball", "verify"],
        &["smallball", "claim"],
        &["smallball", "fit"],
        &["hls", "fit"],
        &["hls", "mass"],
        &["hls", "spread"],
    ];
    for s in subs {
        let mut args = s.to_vec();
        args.push("--help");
        let o = run(&args);
        assert_eq!(o.status.code(), Some(0), "{s:?}");
        assert!(!o.stdout.is_empty());
    }
}
