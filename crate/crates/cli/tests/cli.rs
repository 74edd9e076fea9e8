use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Command, Output, Stdio};
use std::sync::OnceLock;

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_csgesture"))
}

fn ok(out: Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// A small synthetic dataset and a model trained on it, built once.
struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn data(&self) -> &Path {
        self.dir.path()
    }

    fn manifest(&self) -> String {
        self.data().join("data/manifest.txt").display().to_string()
    }

    fn model(&self) -> String {
        self.data().join("model.json").display().to_string()
    }
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("data");
        ok(bin()
            .args(["synth", "--seed", "3", "--train", "10", "--test", "3", "--unspecified", "4"])
            .arg("--out")
            .arg(&data)
            .output()
            .unwrap());
        let f = Fixture { dir };
        ok(bin()
            .args(["train", "--manifest", &f.manifest(), "--model", &f.model()])
            .output()
            .unwrap());
        f
    })
}

#[test]
fn synth_writes_manifest_and_frames() {
    let f = fixture();
    let manifest = std::fs::read_to_string(f.manifest()).unwrap();
    assert_eq!(manifest.lines().filter(|l| l.starts_with("train ")).count(), 50);
    assert_eq!(manifest.lines().filter(|l| l.starts_with("test ")).count(), 15);
    assert_eq!(manifest.lines().filter(|l| l.starts_with("unspecified ")).count(), 4);
    assert!(f.data().join("data/train/z_000/frame_0000.pgm").is_file());
    assert!(f.data().join("data/train/z_000/truth.txt").is_file());
}

#[test]
fn train_is_deterministic() {
    let f = fixture();
    let again = f.data().join("again.json");
    ok(bin()
        .args(["train", "--manifest", &f.manifest(), "--model"])
        .arg(&again)
        .output()
        .unwrap());
    assert_eq!(std::fs::read(f.model()).unwrap(), std::fs::read(again).unwrap());
}

#[test]
fn eval_prints_table_and_json() {
    let f = fixture();
    let table = ok(bin()
        .args(["eval", "--manifest", &f.manifest(), "--model", &f.model()])
        .output()
        .unwrap());
    assert!(table.contains("overall recognition:"));
    assert!(table.contains("false detection:"));
    let json = ok(bin()
        .args(["eval", "--json", "--manifest", &f.manifest(), "--model", &f.model()])
        .output()
        .unwrap());
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["labels"].as_array().unwrap().len(), 5);
    assert_eq!(v["false_detection"]["total"], 4);
}

#[test]
fn extract_writes_center_file() {
    let f = fixture();
    let out = f.data().join("centers.txt");
    ok(bin()
        .arg("extract")
        .arg(f.data().join("data/test/plus_000"))
        .arg("-o")
        .arg(&out)
        .output()
        .unwrap());
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.lines().count() > 20);
    for line in text.lines() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(fields.len(), 5);
        fields[0].parse::<usize>().unwrap();
        fields[3].parse::<usize>().unwrap();
        let x: f64 = fields[1].parse().unwrap();
        assert!((0.0..=1.0).contains(&x));
    }
}

#[test]
fn run_prints_wire_messages() {
    let f = fixture();
    let out = ok(bin()
        .arg("run")
        .arg(f.data().join("data/test/x_001"))
        .args(["--model", &f.model()])
        .output()
        .unwrap());
    let msgs: Vec<serde_json::Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(msgs.iter().filter(|m| m["type"] == "center").count() > 20);
    let events: Vec<_> = msgs.iter().filter(|m| m["type"] == "event").collect();
    assert_eq!(events.len(), 1);
    assert_eq!(events[0]["embedding"].as_array().unwrap().len(), 3);
}

#[test]
fn sweep_prints_csv() {
    let out = ok(bin()
        .args(["sweep-m", "--ms", "20,400", "--trials", "1", "--duration", "20"])
        .output()
        .unwrap());
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "m,mean_error,truth_error,agreement,frames");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("20,"));
    assert!(lines[2].starts_with("400,"));
}

#[test]
fn sweep_reads_frame_directory() {
    let f = fixture();
    let out = ok(bin()
        .args(["sweep-m", "--ms", "300", "--trials", "1", "--frames"])
        .arg(f.data().join("data/test/circle_000"))
        .output()
        .unwrap());
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row.len(), 5);
    assert!(row[2].parse::<f64>().unwrap() <= 1.0);
}

#[test]
fn config_file_is_applied() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, "width = 320\nheight = 240\nblock = 16\n").unwrap();
    let out = ok(bin()
        .args(["sweep-m", "--ms", "50", "--trials", "1", "--duration", "12", "--noise", "0"])
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap());
    assert!(out.lines().nth(1).unwrap().starts_with("50,"));

    std::fs::write(&cfg, "no_such_key = 1\n").unwrap();
    let bad = bin().args(["sweep-m"]).arg("--config").arg(&cfg).output().unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("error"));
}

#[test]
fn missing_model_is_an_error() {
    let out = bin().args(["run", "."]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--model"));
}

#[test]
fn serve_answers_one_connection() {
    use tungstenite::Message;
    let f = fixture();
    let mut child = bin()
        .args(["serve", "--addr", "127.0.0.1:0", "--max-connections", "1", "--model", &f.model()])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let url = line.trim().strip_prefix("listening on ").unwrap().to_string();
    let (mut ws, _) = tungstenite::connect(url).unwrap();
    ws.send(Message::text(r#"{"type":"init","width":1,"height":1}"#)).unwrap();
    let reply = ws.read().unwrap();
    let v: serde_json::Value = serde_json::from_str(reply.to_text().unwrap()).unwrap();
    assert_eq!(v["type"], "error");
    ws.close(None).unwrap();
    while ws.read().is_ok() {}
    assert!(child.wait().unwrap().success());
}
