use std::path::Path;
use std::process::{Command, Output};

use qtvm::engine::read_dump;

fn qtvm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtvm"))
        .args(args)
        .current_dir(dir)
        .env_remove("QTVM_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn schema_valid(name: &str, json: &str) -> bool {
    let path = format!("{}/schemas/{name}", env!("CARGO_MANIFEST_DIR"));
    let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let v: serde_json::Value = serde_json::from_str(json).unwrap();
    jsonschema::validator_for(&s).unwrap().is_valid(&v)
}

#[test]
fn missing_file_is_a_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let o = qtvm(&["run", "absent.qtasm"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    assert_eq!(qtvm(&["frobnicate"], d.path()).status.code(), Some(2));
}

#[test]
fn compile_errors_exit_2_with_line() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("bad.qtasm"), "qubits 2\nh(0)\nh(9)\n").unwrap();
    let o = qtvm(&["asm", "bad.qtasm"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn generated_shor15_runs_to_four_keys() {
    let d = tempfile::tempdir().unwrap();
    assert!(qtvm(&["gen", "shor", "--n", "15", "--t", "4", "-o", "shor15.qtasm"], d.path()).status.success());
    let o = qtvm(&["run", "shor15.qtasm", "--shots", "1000", "--seed", "7", "--json", "h.json", "--csv", "h.csv"], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json = std::fs::read_to_string(d.path().join("h.json")).unwrap();
    assert!(schema_valid("histogram.schema.json", &json));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let keys: Vec<&String> = v["counts"].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["0000", "0100", "1000", "1100"]);
    let csv = std::fs::read_to_string(d.path().join("h.csv")).unwrap();
    assert!(csv.starts_with("bitstring,count\n"));
    assert_eq!(csv.lines().count(), 5);
    // the same seed reproduces the same file
    qtvm(&["run", "shor15.qtasm", "--shots", "1000", "--seed", "7", "--json", "h2.json"], d.path());
    assert_eq!(json, std::fs::read_to_string(d.path().join("h2.json")).unwrap());
}

#[test]
fn teleport_single_shot_and_tree() {
    let d = tempfile::tempdir().unwrap();
    let o = qtvm(&["gen", "teleport", "--theta", "0.7", "--phi", "-1.0", "--lambda", "0.2"], d.path());
    std::fs::write(d.path().join("tp.qtasm"), &o.stdout).unwrap();
    let o = qtvm(&["run", "tp.qtasm", "--shots", "1", "--snapshots", "shots.json"], d.path());
    assert!(o.status.success());
    let shots = std::fs::read_to_string(d.path().join("shots.json")).unwrap();
    assert!(schema_valid("shots.schema.json", &shots));
    let v: serde_json::Value = serde_json::from_str(&shots).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 1);

    let o = qtvm(&["debug", "tp.qtasm", "--tree"], d.path());
    assert_eq!(stdout(&o).matches("leaf").count(), 4);
    let o = qtvm(&["debug", "tp.qtasm", "--json"], d.path());
    assert!(schema_valid("branch_tree.schema.json", &stdout(&o)));
    let o = qtvm(&["debug", "tp.qtasm", "--break", "5", "--top", "3"], d.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("pc 5"), "{}", stdout(&o));
}

#[test]
fn state_dump_sizes_and_budget() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("bell.qtasm"), "qubits 2\nh(0)\ncnot(0, 1)\n").unwrap();
    assert!(qtvm(&["state", "bell.qtasm", "-o", "bell.bin"], d.path()).status.success());
    let s = read_dump(std::fs::File::open(d.path().join("bell.bin")).unwrap()).unwrap();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    assert!((s.amplitude(0).re - r).abs() < 1e-15 && (s.amplitude(3).re - r).abs() < 1e-15);

    std::fs::write(d.path().join("big.qtasm"), "qubits 20\nh(19)\n").unwrap();
    assert!(qtvm(&["state", "big.qtasm", "-o", "big.bin"], d.path()).status.success());
    let len = std::fs::metadata(d.path().join("big.bin")).unwrap().len();
    assert_eq!(len, 2 * (1 << 20) * 8 + 9);

    let o = qtvm(&["state", "big.qtasm", "-o", "x.bin", "--mem", "1M"], d.path());
    assert_eq!(o.status.code(), Some(3));
    std::fs::write(d.path().join("huge.qtasm"), "qubits 34\nh(0)\n").unwrap();
    assert_eq!(qtvm(&["state", "huge.qtasm", "-o", "x.bin"], d.path()).status.code(), Some(3));
}

#[test]
fn paged_engine_gives_the_same_histogram() {
    let d = tempfile::tempdir().unwrap();
    qtvm(&["gen", "shor", "--n", "15", "--t", "3", "-o", "s.qtasm"], d.path());
    let a = qtvm(&["run", "s.qtasm", "--shots", "50", "--json", "a.json"], d.path());
    let b = qtvm(&["run", "s.qtasm", "--shots", "50", "--json", "b.json", "--engine", "paged", "--sector-bits", "6"], d.path());
    assert!(a.status.success() && b.status.success());
    let ja = std::fs::read_to_string(d.path().join("a.json")).unwrap();
    let jb = std::fs::read_to_string(d.path().join("b.json")).unwrap();
    assert_eq!(ja, jb);
    let bad = qtvm(&["run", "s.qtasm", "--sector-bits", "6"], d.path());
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn asm_emits_optimized_text() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("p.qtasm"), "qubits 1\nrz(0, 0.25)\nrz(0, 0.5)\nh(0)\nh(0)\n").unwrap();
    let o = qtvm(&["asm", "p.qtasm", "-O1", "--emit"], d.path());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2, "{text}");
    let p = qtvm::asm::compile(&text).unwrap();
    match &p.instructions[..] {
        [qtvm::isa::Instruction::Gate(qtvm::isa::Gate::U { target: 0, theta: th, phi: ph, lambda: la })] => {
            assert!(th.abs() < 1e-15 && ph.abs() < 1e-15 && (la - 0.75).abs() < 1e-14);
        }
        other => panic!("unexpected {other:?}"),
    }
    let o = qtvm(&["asm", "p.qtasm", "--emit"], d.path());
    assert_eq!(stdout(&o).lines().count(), 5);
}

#[test]
fn gen_tfim_matches_library_generator() {
    let d = tempfile::tempdir().unwrap();
    let o = qtvm(&["gen", "tfim", "--l", "10", "--g0", "0", "--g1", "2", "--dt", "0.01", "--steps", "500"], d.path());
    assert!(o.status.success());
    let p = qtvm::asm::compile(&stdout(&o)).unwrap();
    assert_eq!(p.gate_count(), 20_000);
    assert_eq!(p.num_qubits, 10);
    let o = qtvm(&["gen", "tfim", "--l", "4", "--g0", "0.5", "--g1", "2", "--dt", "0.01", "--steps", "5"], d.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_and_quench_outputs() {
    let d = tempfile::tempdir().unwrap();
    let o = qtvm(&["bench", "--min-qubits", "4", "--max-qubits", "6", "--shots", "10", "--csv", "b.csv"], d.path());
    assert!(o.status.success());
    let csv = std::fs::read_to_string(d.path().join("b.csv")).unwrap();
    assert!(csv.starts_with("qubits,gates,shots,seconds\n4,200,10,"));
    assert_eq!(csv.lines().count(), 4);

    let o = qtvm(&["quench", "--l", "6", "--steps", "100", "--dt", "0.02", "--out", "q"], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = std::fs::read_to_string(d.path().join("q/summary.json")).unwrap();
    assert!(schema_valid("quench_summary.schema.json", &summary));
    assert!(std::fs::read_to_string(d.path().join("q/mz.csv")).unwrap().starts_with("t,mz\n0,1\n"));
    assert!(std::fs::read_to_string(d.path().join("q/rate.csv")).unwrap().starts_with("t,rate\n"));
}

#[test]
fn thread_variable_is_honoured() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("p.qtasm"), "qubits 1\nh(0)\nmeas(0, 0)\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_qtvm"))
        .args(["run", "p.qtasm", "--shots", "4"])
        .current_dir(d.path())
        .env("QTVM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_qtvm"))
        .args(["run", "p.qtasm", "--shots", "4"])
        .current_dir(d.path())
        .env("QTVM_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.success());
}
