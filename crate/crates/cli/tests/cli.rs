use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn saix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_saix"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn index_then_query() {
    let dir = TempDir::new().unwrap();
    let fasta = write(dir.path(), "fixture.fa", ">fixture\nATTG\nCTAC\n");
    let out = saix(&["index", &fasta]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).starts_with("indexed n=8 sigma=4 in "));
    let index = dir.path().join("fixture.saix");
    assert!(index.exists());

    let index = index.to_str().unwrap();
    let out = saix(&["query", index, "6", "0"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "1\nA\n");
    let out = saix(&["query", index, "3", "3"]);
    assert_eq!(stdout(&out), "5\nGCTAC\n");
    let out = saix(&["query", index, "0", "8"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn serial_and_parallel_indexes_are_identical() {
    let dir = TempDir::new().unwrap();
    let fasta = write(dir.path(), "x.fa", ">x\nACGTTGCAACGGTACCAGTTAGCA\n");
    let serial = dir.path().join("s.saix");
    let parallel = dir.path().join("p.saix");
    assert!(saix(&["index", &fasta, "--out", serial.to_str().unwrap()])
        .status
        .success());
    let out = saix(&[
        "index",
        &fasta,
        "--out",
        parallel.to_str().unwrap(),
        "--engine",
        "parallel",
        "--workers",
        "2",
        "--chunk",
        "5",
    ]);
    assert!(out.status.success(), "{out:?}");
    assert_eq!(fs::read(serial).unwrap(), fs::read(parallel).unwrap());
}

#[test]
fn overlap_prints_json() {
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "a.fa", ">a\nATTGCTAC\n");
    let b = write(dir.path(), "b.fa", ">b\nGCTAAAA\n");
    let out = saix(&["overlap", &a, &b]);
    assert!(out.status.success(), "{out:?}");
    assert_eq!(
        stdout(&out).trim(),
        r#"{"length":4,"posA":3,"posB":0,"substring":"GCTA"}"#
    );
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.fa");
    assert_eq!(
        saix(&["index", missing.to_str().unwrap()]).status.code(),
        Some(2)
    );

    let multi = write(dir.path(), "multi.fa", ">a\nACGT\n>b\nTTGA\n");
    let out = saix(&["index", &multi]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2 records"));

    let bad = write(dir.path(), "bad.fa", ">a\nACGXT\n");
    assert_eq!(saix(&["index", &bad]).status.code(), Some(3));
    let with_n = write(dir.path(), "n.fa", ">a\nACNGT\n");
    assert_eq!(saix(&["index", &with_n]).status.code(), Some(3));
    assert!(saix(&["index", &with_n, "--allow-n"]).status.success());

    let junk = write(dir.path(), "junk.saix", "not an index");
    assert_eq!(saix(&["query", &junk, "0", "0"]).status.code(), Some(3));

    assert_eq!(saix(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn bench_writes_csvs() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("b.csv");
    let out = saix(&[
        "bench",
        "--sizes",
        "256,1024",
        "--reps",
        "1",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let records = fs::read_to_string(&csv).unwrap();
    let mut lines = records.lines();
    assert_eq!(lines.next(), Some("label,n,seed,chunk32,reps,seconds"));
    assert_eq!(lines.count(), 6);
    let speedup = fs::read_to_string(dir.path().join("b_speedup.csv")).unwrap();
    assert!(speedup.starts_with("n,baseline,subject,ratio\n"));
    assert_eq!(speedup.lines().count(), 5);
}

#[test]
fn selftest_passes() {
    let out = saix(&["selftest"]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.lines().all(|l| l.starts_with("PASS ")));
    assert!(text.contains("fixture suffix array"));
}
