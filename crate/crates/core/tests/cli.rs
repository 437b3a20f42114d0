mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::*;

fn run(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tx-infer"));
    cmd.args(args).env_remove("TXINFER_TABLE");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn path(name: &str) -> String {
    data_dir("fixtures").join(format!("{name}.jtx")).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn prints_typed_source_by_default() {
    let o = run(&[&path("Fac")], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), golden("Fac.typed.jtx"));
}

#[test]
fn emits_requested_artifacts_in_order() {
    let o = run(&[&path("OL"), "--emit", "signatures,descriptors"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), golden("OL.sigs.txt") + &golden("OL.desc.txt"));
}

#[test]
fn type_error_exits_with_one() {
    let o = run(&[&path("Broken")], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no typing for class `Broken`"), "{}", stderr(&o));
}

#[test]
fn syntax_error_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("Bad.jtx");
    std::fs::write(&bad, "class Bad { m( { } }").unwrap();
    let o = run(&[bad.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("syntax error"), "{}", stderr(&o));
}

#[test]
fn missing_input_exits_with_two() {
    let o = run(&["/nonexistent/Nope.jtx"], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn out_dir_receives_one_file_per_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&[&path("OLFun"), "-o", out, "--emit", "typed-source,signatures,descriptors,funifaces"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    let read = |f: &str| std::fs::read_to_string(Path::new(out).join(f)).unwrap();
    assert_eq!(read("OLFun.typed.jtx"), golden("OLFun.typed.jtx"));
    assert_eq!(read("OLFun.sigs.txt"), golden("OLFun.sigs.txt"));
    assert_eq!(read("OLFun.desc.txt"), golden("OLFun.desc.txt"));
    assert_eq!(read("OLFun.funifaces.txt"), golden("OLFun.funifaces.txt"));
    assert!(!Path::new(out).join("OLFun.constraints.txt").exists());
}

#[test]
fn dump_stage_goes_to_stderr() {
    let o = run(&[&path("Fac"), "--dump-stage", "constraints"], &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("class Fac:"), "{}", stderr(&o));
    assert_eq!(stdout(&o), golden("Fac.typed.jtx"));
}

#[test]
fn table_flag_and_environment_are_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("table.json");
    std::fs::write(&broken, "{ not json").unwrap();
    let broken = broken.to_str().unwrap();
    let o = run(&[&path("Fac"), "--table", broken], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("invalid class table"), "{}", stderr(&o));
    let o = run(&[&path("Fac")], &[("TXINFER_TABLE", broken)]);
    assert_eq!(o.status.code(), Some(2));

    let bundled = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/builtins.json");
    let o = run(&[&path("Fac"), "--table", bundled.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), golden("Fac.typed.jtx"));
}

#[test]
fn several_inputs_print_in_argument_order() {
    let o = run(&[&path("OL"), &path("Fac"), "--emit", "signatures"], &[]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("OL.sigs.txt") + &golden("Fac.sigs.txt"));
}
