use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qhelab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qhelab"))
        .args(args)
        .current_dir(dir)
        .env_remove("QHELAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn workdir() -> tempfile::TempDir {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("h.qc"), "QUBITS 1\nH 0\n").unwrap();
    fs::write(d.path().join("t.qc"), "QUBITS 1\nH 0\nT 0\nH 0\n").unwrap();
    fs::write(d.path().join("bad.qc"), "QUBITS 1\nH 0\nFROB 0\n").unwrap();
    d
}

#[test]
fn pauli_roundtrip_is_exact() {
    let d = workdir();
    let o = qhelab(&["roundtrip", "pauli", "-c", "h.qc", "-i", "0", "--seed", "1"], d.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("trace distance 0.000e0"));
}

#[test]
fn perm_roundtrip_m5() {
    let d = workdir();
    let o = qhelab(&["roundtrip", "perm", "-m", "5", "-c", "h.qc", "-i", "+", "--seed", "1", "--format", "json"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["trace_distance"].as_f64().unwrap() < 1e-10);
}

#[test]
fn malformed_circuit_is_a_usage_error() {
    let d = workdir();
    let o = qhelab(&["roundtrip", "pauli", "-c", "bad.qc", "-i", "0", "--seed", "1"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn randomized_commands_need_a_seed() {
    let d = workdir();
    let o = qhelab(&["roundtrip", "pauli", "-c", "h.qc", "-i", "0"], d.path());
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_qhelab"))
        .args(["roundtrip", "pauli", "-c", "h.qc", "-i", "0"])
        .current_dir(d.path())
        .env("QHELAB_SEED", "4")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn security_reports() {
    let d = workdir();
    let o = qhelab(&["security", "pauli", "--inputs", "0,1", "--format", "json"], d.path());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["delta"].as_f64().unwrap(), 0.0);

    let o = qhelab(&["security", "perm", "-m", "1", "-o", "sec.json"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("sec.json")).unwrap()).unwrap();
    assert!(v["delta"].as_f64().unwrap() <= 0.5f64.sqrt());

    let o = qhelab(&["security", "pauli", "-n", "10"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("oracle cap exceeded"));
}

#[test]
fn resources_reference_rows() {
    let d = workdir();
    let o = qhelab(&["resources", "--reference", "--ntot", "1e6,1e8,1e10"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    for r in rows {
        let f: Vec<&str> = r.split(',').collect();
        assert_eq!((f[2], f[3], f[4]), ("11", "529", "430140480"));
    }
}

#[test]
fn resources_csv_and_json_agree() {
    let d = workdir();
    let args = ["resources", "--ancillas", "0", "--depth", "0", "--ntot", "10000,1e6"];
    let csv = stdout(&qhelab(&args, d.path()));
    let json: serde_json::Value =
        serde_json::from_str(&stdout(&qhelab(&[&args[..], &["--format", "json"]].concat(), d.path()))).unwrap();
    for (line, row) in csv.lines().skip(1).zip(json.as_array().unwrap()) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[5], row["m"].to_string());
        assert_eq!(f[6], row["r_bound"].to_string());
        let approx: f64 = f[7].parse().unwrap();
        assert!((approx - row["r_approx"].as_f64().unwrap()).abs() < 1e-6);
    }
    assert!(csv.contains("10000,10,11,529,0,55,90,"));
}

#[test]
fn resources_nonconvergent() {
    let d = workdir();
    let o = qhelab(&["resources", "--p0", "1e-3", "--pthr", "1e-3"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nonconvergent"));
}

#[test]
fn qec_demo_corrects() {
    let d = workdir();
    let o = qhelab(&["qec-demo", "steane", "-e", "IIIIZII", "--seed", "3"], d.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("correction +IIIIZII"));
    let o = qhelab(&["qec-demo", "repetition", "-e", "XXI", "-i", "0", "--seed", "3"], d.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn t_gate_demo_writes_transcript() {
    let d = workdir();
    let o = qhelab(&["t-gate", "deterministic", "-m", "1", "--runs", "3", "--seed", "2", "--transcript", "t.jsonl"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let log = fs::read_to_string(d.path().join("t.jsonl")).unwrap();
    assert_eq!(log.lines().filter(|l| l.contains("t0.phase_label")).count(), 3);
}

#[test]
fn cv_check_passes() {
    let d = workdir();
    let o = qhelab(&["cv-check", "--seed", "1", "--trials", "20"], d.path());
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn audit_passes_honest_and_flags_canary() {
    let d = workdir();
    let o = qhelab(&["audit", "perm", "-c", "t.qc", "--seed", "5", "--jobs", "2"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = qhelab(&["audit", "leaky", "-c", "h.qc", "--seed", "5"], d.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("LEAK"));
}

#[test]
fn audit_from_config_file() {
    let d = workdir();
    fs::write(
        d.path().join("session.json"),
        r#"{"scheme": {"kind": "pauli"}, "circuit": "t.qc", "plaintexts": ["0", "+"], "seed": 3}"#,
    )
    .unwrap();
    let o = qhelab(&["audit", "--config", "session.json"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn outputs_are_byte_identical_under_seed() {
    let d = workdir();
    let args = ["t-gate", "deterministic", "--runs", "4", "--seed", "9", "--transcript"];
    qhelab(&[&args[..], &["a.jsonl"]].concat(), d.path());
    qhelab(&[&args[..], &["b.jsonl"]].concat(), d.path());
    assert_eq!(fs::read(d.path().join("a.jsonl")).unwrap(), fs::read(d.path().join("b.jsonl")).unwrap());
}
