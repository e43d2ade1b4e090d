//! End-to-end runs of the `cwsat` binary.

mod common;

use std::fs;
use std::process::{Command, Output};

use common::data;

fn cwsat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cwsat")).args(args).output().expect("binary runs")
}

fn path(name: &str) -> String {
    data(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn validate() {
    let ok = cwsat(&["validate", &path("fig1.apx"), &path("fig2.kx")]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(stdout(&ok), "VALID width=3\n");
    let bad = cwsat(&["validate", &path("fig3_left.apx"), &path("fig2.kx")]);
    assert_eq!(bad.status.code(), Some(3));
    assert_eq!(stdout(&bad), "INVALID\n");
}

#[test]
fn encode_writes_the_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("out.cnf");
    let prov = dir.path().join("out.prov");
    let o = cwsat(&[
        "encode", "--sem", "stb", &path("fig1.apx"), &path("fig2.kx"),
        "-o", cnf.to_str().unwrap(), "--provenance", prov.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("vars="));
    assert_eq!(fs::read_to_string(&cnf).unwrap(), fs::read_to_string(data("golden/fig2_stb.cnf")).unwrap());
    assert_eq!(fs::read_to_string(&prov).unwrap(), fs::read_to_string(data("golden/fig2_stb.prov")).unwrap());

    let solved = cwsat(&["solve", cnf.to_str().unwrap()]);
    assert_eq!(stdout(&solved), "SAT\n");
}

#[test]
fn second_level_encodings() {
    let q = cwsat(&["encode", "--sem", "prf", &path("fig1.apx"), &path("fig2.kx")]);
    assert_eq!(stdout(&q), fs::read_to_string(data("golden/fig2_prf.qcir")).unwrap());
    let dnf = cwsat(&["encode", "--sem", "sst", "--dnf-matrix", &path("fig1.apx"), &path("fig2.kx")]);
    assert_eq!(dnf.status.code(), Some(0));
    assert!(stdout(&dnf).lines().any(|l| l.starts_with("p cnf")));
    let first = cwsat(&["encode", "--sem", "adm", "--dnf-matrix", &path("fig1.apx"), &path("fig2.kx")]);
    assert_eq!(first.status.code(), Some(3));
}

#[test]
fn counts() {
    for (sem, want) in [("cf", "8"), ("adm", "6"), ("com", "3"), ("stb", "2"), ("prf", "2"), ("sst", "2"), ("stg", "2")] {
        let o = cwsat(&["count", "--sem", sem, &path("fig1.apx"), &path("fig2.kx")]);
        assert_eq!(stdout(&o).trim(), want, "{sem}");
        let oracle = cwsat(&["oracle", "--sem", sem, &path("fig1.apx")]);
        assert_eq!(stdout(&oracle).trim(), want, "{sem}");
    }
    let o = cwsat(&["count", "--sem", "stg", &path("fig3_right.apx"), &path("fig3_right.kx")]);
    assert_eq!(stdout(&o), "3\n");
}

#[test]
fn acceptance_exit_codes() {
    let yes = cwsat(&["accept", "--sem", "stb", "--arg", "z", "--mode", "skept", &path("fig1.apx"), &path("fig2.kx")]);
    assert_eq!((stdout(&yes).as_str(), yes.status.code()), ("YES\n", Some(0)));
    let no = cwsat(&["accept", "--sem", "stb", "--arg", "o", "--mode", "cred", &path("fig1.apx"), &path("fig2.kx")]);
    assert_eq!((stdout(&no).as_str(), no.status.code()), ("NO\n", Some(1)));
    let unknown = cwsat(&["accept", "--sem", "stb", "--arg", "q", "--mode", "cred", &path("fig1.apx")]);
    assert_eq!(unknown.status.code(), Some(3));
    let bad_sem = cwsat(&["count", "--sem", "grounded", &path("fig1.apx")]);
    assert_eq!(bad_sem.status.code(), Some(2));
}

#[test]
fn oracle_enumerates() {
    let o = cwsat(&["oracle", "--sem", "stb", "--enumerate", &path("fig1.apx")]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines.iter().all(|l| l.contains('z')));
}

#[test]
fn witness_and_generator() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.kx");
    let o = cwsat(&["witness", "--sem", "stb", &path("fig1.apx"), &path("fig2.kx"), "-o", w.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with(" ok\n"), "{}", stdout(&o));
    assert!(fs::read_to_string(&w).unwrap().starts_with("# k'="));

    let af = dir.path().join("hard.apx");
    let g = cwsat(&["gen-hard", &path("phi.cnf"), "-o", af.to_str().unwrap()]);
    assert_eq!(stdout(&g), "arguments=10 attacks=15\n");
    let acc = cwsat(&["accept", "--sem", "adm", "--arg", "sat", "--mode", "cred", af.to_str().unwrap()]);
    assert_eq!(stdout(&acc), "YES\n");
}

#[test]
fn find_kexpr() {
    let o = cwsat(&["find-kexpr", "--kmax", "3", &path("fig1.apx")]);
    assert_eq!(o.status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let x = dir.path().join("x.kx");
    fs::write(&x, stdout(&o)).unwrap();
    assert_eq!(cwsat(&["validate", &path("fig1.apx"), x.to_str().unwrap()]).status.code(), Some(0));
}
