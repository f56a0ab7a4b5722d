use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mtrepair::corpus::Class2Relational;
use mtrepair::diff::diff_models;
use mtrepair::edits::{apply_patch, Patch};
use mtrepair::model::parse_model;
use mtrepair::mtl::execute;
use tempfile::TempDir;

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus/class2relational").canonicalize().unwrap()
}

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mtrepair")).args(args).env("MTREPAIR_OUT", out).output().unwrap()
}

/// Writes a manifest pointing at the shipped corpus, plus `extra` lines.
fn manifest(dir: &Path, program: &str, extra: &str) -> PathBuf {
    let c = corpus();
    let program = c.join(program);
    let text = format!(
        "source_metamodel = {c}/Class.mm\n\
         target_metamodel = {c}/Relational.mm\n\
         transformation = {p}\n\
         base = {c}/correct.mtl\n\
         test = family : {c}/family.model : {c}/family_expected.model\n\
         {extra}\n",
        c = c.display(),
        p = program.display()
    );
    let path = dir.join("run.manifest");
    fs::write(&path, text).unwrap();
    path
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn transform_writes_the_outputs() {
    let tmp = TempDir::new().unwrap();
    let c = Class2Relational::load();
    let m = manifest(tmp.path(), "faulty.mtl", "");
    let o = run(tmp.path(), &["transform", "--manifest", m.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let written = parse_model(&fs::read_to_string(tmp.path().join("out/family.model")).unwrap(), &c.tgt).unwrap();
    assert_eq!(written, execute(&c.faulty, &c.input, &c.src, &c.tgt).unwrap());
    assert_eq!(diff_models(&c.expected, &written, &c.tgt).count(), 3);

    let m = manifest(tmp.path(), "correct.mtl", "output = fixed");
    assert_eq!(code(&run(tmp.path(), &["transform", "--manifest", m.to_str().unwrap()])), 0);
    let written = parse_model(&fs::read_to_string(tmp.path().join("fixed/family.model")).unwrap(), &c.tgt).unwrap();
    assert!(diff_models(&c.expected, &written, &c.tgt).is_empty());
}

#[test]
fn missing_and_malformed_inputs_have_distinct_codes() {
    let tmp = TempDir::new().unwrap();
    let m = manifest(tmp.path(), "faulty.mtl", "source_metamodel = nowhere.mm");
    assert_eq!(code(&run(tmp.path(), &["transform", "--manifest", m.to_str().unwrap()])), 3);
    assert_eq!(code(&run(tmp.path(), &["transform", "--manifest", "absent.manifest"])), 3);
    let m = manifest(tmp.path(), "faulty.mtl", "colour = red");
    assert_eq!(code(&run(tmp.path(), &["repair", "--manifest", m.to_str().unwrap()])), 2);
    let m = manifest(tmp.path(), "faulty.mtl", "");
    assert_eq!(code(&run(tmp.path(), &["repair", "--manifest", m.to_str().unwrap(), "--pop", "5"])), 6);
    assert_eq!(code(&run(tmp.path(), &["repair"])), 2);
    let bad = tmp.path().join("bad.mtl");
    fs::write(&bad, "module M; create OUT : Relational from IN : Class; rule {").unwrap();
    let m = manifest(tmp.path(), bad.to_str().unwrap(), "");
    assert_eq!(code(&run(tmp.path(), &["transform", "--manifest", m.to_str().unwrap()])), 4);
}

#[test]
fn failing_execution_exits_with_its_location() {
    let tmp = TempDir::new().unwrap();
    let prog = tmp.path().join("crash.mtl");
    let text = fs::read_to_string(corpus().join("correct.mtl")).unwrap().replace("from c : Class!Class", "from c : Class!Classifier");
    fs::write(&prog, text).unwrap();
    let m = manifest(tmp.path(), prog.to_str().unwrap(), "");
    let o = run(tmp.path(), &["transform", "--manifest", m.to_str().unwrap()]);
    assert_eq!(code(&o), 5);
    assert!(String::from_utf8_lossy(&o.stderr).contains("rule Class2Table"));
}

#[test]
fn diff_reports_and_exit_status() {
    let tmp = TempDir::new().unwrap();
    let c = corpus();
    let m = manifest(tmp.path(), "faulty.mtl", "");
    run(tmp.path(), &["transform", "--manifest", m.to_str().unwrap()]);
    let actual = tmp.path().join("out/family.model");
    let expected = c.join("family_expected.model");
    let mm = c.join("Relational.mm");
    let o = run(tmp.path(), &["diff", expected.to_str().unwrap(), actual.to_str().unwrap(), mm.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(json["count"], 3);
    let o = run(tmp.path(), &["diff", expected.to_str().unwrap(), expected.to_str().unwrap(), mm.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let other = c.join("Class.mm");
    let o = run(tmp.path(), &["diff", expected.to_str().unwrap(), actual.to_str().unwrap(), other.to_str().unwrap()]);
    assert_eq!(code(&o), 7);
}

#[test]
fn repair_writes_result_and_patch() {
    let tmp = TempDir::new().unwrap();
    let c = Class2Relational::load();
    let m = manifest(tmp.path(), "faulty.mtl", "");
    let o = run(tmp.path(), &["repair", "--manifest", m.to_str().unwrap(), "--seed", "0", "--sd-mode", "objective"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let patch = Patch::parse(&fs::read_to_string(tmp.path().join("out/best.patch")).unwrap()).unwrap();
    let (fixed, _) = apply_patch(&c.faulty, &patch);
    let out = execute(&fixed, &c.input, &c.src, &c.tgt).unwrap();
    assert!(diff_models(&c.expected, &out, &c.tgt).is_empty());
    let first = fs::read(tmp.path().join("out/repair.json")).unwrap();
    run(tmp.path(), &["repair", "--manifest", m.to_str().unwrap(), "--seed", "0", "--sd-mode", "objective"]);
    assert_eq!(first, fs::read(tmp.path().join("out/repair.json")).unwrap());

    let o = run(tmp.path(), &["repair", "--manifest", m.to_str().unwrap(), "--max-gens", "0", "--seed", "3"]);
    assert_eq!(code(&o), 1);
    let json: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("out/repair.json")).unwrap()).unwrap();
    assert_eq!(json["optimal"], false);
    assert_eq!(json["generations_used"], 0);
}

#[test]
fn mutate_covers_every_class_then_experiment_runs() {
    let tmp = TempDir::new().unwrap();
    let m = manifest(tmp.path(), "faulty.mtl", "benchmark = 1x9\nmax_generations = 5\nseeds = 2\nconfigs = objective");
    let o = run(tmp.path(), &["mutate", "--manifest", m.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let root = tmp.path().join("out/mutants");
    let mut classes = Vec::new();
    for i in 1..=9 {
        let inj = fs::read_to_string(root.join(format!("mutant_{i:02}/injections.json"))).unwrap();
        let v: serde_json::Value = serde_json::from_str(&inj).unwrap();
        classes.push(v[0]["class"].as_str().unwrap().to_string());
    }
    classes.sort();
    assert_eq!(classes, ["BL", "BR", "CT", "EB", "MB", "OP", "TA", "TIP", "TOP"]);
    assert!(!root.join("mutant_10").exists());

    let o = run(tmp.path(), &["experiment", "--manifest", m.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 9);
    let csv = fs::read_to_string(tmp.path().join("out/summary.csv")).unwrap();
    assert!(csv.starts_with("config,errors,runs,successes,success_rate"));
    assert!(csv.contains("objective,1,9,"));
}

#[test]
fn empty_benchmark_writes_nothing() {
    let tmp = TempDir::new().unwrap();
    let m = manifest(tmp.path(), "faulty.mtl", "");
    assert_eq!(code(&run(tmp.path(), &["mutate", "--manifest", m.to_str().unwrap()])), 0);
    assert!(!tmp.path().join("out/mutants").exists());
}
