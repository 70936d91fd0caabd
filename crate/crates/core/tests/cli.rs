mod common;

use std::path::PathBuf;
use std::process::{Command, Output};

use common::scratch;

fn adic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adic")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = adic(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

struct Fixture {
    dir: PathBuf,
}

impl Fixture {
    fn new(name: &str) -> Self {
        Fixture { dir: scratch(name) }
    }

    fn path(&self, f: &str) -> String {
        self.dir.join(f).to_str().unwrap().to_string()
    }

    fn two_to_one(&self) -> String {
        let (o, t) = (self.path("o2.json"), self.path("t2.json"));
        ok(&["build", "odometer", "--params", &vec!["2"; 60].join(","), "--out", &o]);
        ok(&["extend", &o, "--mode", "two", "--triple", &t]);
        t
    }
}

#[test]
fn build_file_round_trips() {
    let f = Fixture::new("cli-round-trip");
    let a = f.path("s.json");
    ok(&["build", "sturmian", "--params", "1,2,1,3", "--out", &a]);
    let again = ok(&["build", "file", "--input", &a]);
    assert_eq!(again.as_bytes(), std::fs::read(&a).unwrap());
}

#[test]
fn exit_codes() {
    let f = Fixture::new("cli-exit-codes");
    let t = f.two_to_one();
    assert_eq!(adic(&["orbit", &t, "--steps", "5000", "--budget-steps", "100"]).status.code(), Some(2));
    assert_eq!(adic(&["realize", &t, "--nu", "0.999"]).status.code(), Some(3));
    assert_eq!(adic(&["build", "odometer", "--params", "2,1"]).status.code(), Some(4));
    assert_eq!(adic(&["build", "odometer", "--params", "2,2", "--format", "csv"]).status.code(), Some(4));
    let e = adic(&["orbit", &f.path("missing.json"), "--steps", "3"]);
    assert_ne!(e.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&e.stderr).starts_with("error: "));
}

#[test]
fn empty_grid_scans_cleanly() {
    let f = Fixture::new("cli-empty-grid");
    let t = f.two_to_one();
    let out = ok(&["scan", &t, "--grid", "0"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v.to_string().contains("witnesses"));
}

#[test]
fn config_supplies_defaults_and_flags_win() {
    let f = Fixture::new("cli-config");
    let t = f.two_to_one();
    let cfg = f.path("c.toml");
    std::fs::write(&cfg, "budget_steps = 50\nseed = 3\nformat = \"json\"\n").unwrap();
    assert_eq!(adic(&["orbit", &t, "--steps", "60", "--config", &cfg]).status.code(), Some(2));
    let json = ok(&["orbit", &t, "--steps", "60", "--config", &cfg, "--budget-steps", "100"]);
    assert!(serde_json::from_str::<serde_json::Value>(&json).is_ok());
    std::fs::write(&cfg, "budget = 1\n").unwrap();
    assert_eq!(adic(&["orbit", &t, "--steps", "5", "--config", &cfg]).status.code(), Some(4));
}

#[test]
fn identity_triple_never_visits_d() {
    let f = Fixture::new("cli-identity");
    let o = f.path("o.json");
    ok(&["build", "odometer", "--params", "2,2,2,2", "--out", &o]);
    let d = adic::Diagram::from_json(&std::fs::read_to_string(&o).unwrap()).unwrap();
    let spec = adic::extension::CopyPasteSpec::identity(&d);
    let t = adic::extension::ExtensionTriple::new(d, spec, adic::extension::Construction::Generic).unwrap();
    let tp = f.path("id.json");
    std::fs::write(&tp, t.to_json().unwrap()).unwrap();
    let csv = ok(&["orbit", &tp, "--steps", "15", "--format", "csv"]);
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "S_D").expect("S_D column");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 15);
    assert!(rows.iter().all(|r| r.split(',').nth(col) == Some("0/1")));
    assert!(rows.iter().all(|r| r.contains(",out,")));
}
