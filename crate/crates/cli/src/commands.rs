use std::fs;
use std::path::{Path, PathBuf};

use mtrepair::diff::diff_models;
use mtrepair::evolve::{repair, TestCase};
use mtrepair::model::{parse_metamodel, parse_model, serialize_model, Metamodel, Model, ModelError};
use mtrepair::mtl::{execute, parse_transformation, static_check, Transformation};
use mtrepair::mutants::build_benchmark;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, Outcome};
use crate::manifest::Manifest;

pub(crate) fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|_| CliError::MissingInput(path.to_path_buf()))
}

pub(crate) fn write(path: &Path, content: &str) -> Result<(), CliError> {
    let fail = |e: std::io::Error| CliError::Output { path: path.to_path_buf(), message: e.to_string() };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(fail)?;
    }
    fs::write(path, content).map_err(fail)
}

fn parse_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Parse { path: path.to_path_buf(), message: e.to_string() }
}

pub fn load_metamodel(path: &Path) -> Result<Metamodel, CliError> {
    parse_metamodel(&read(path)?).map_err(|e| parse_error(path, e))
}

pub fn load_model(path: &Path, mm: &Metamodel) -> Result<Model, CliError> {
    parse_model(&read(path)?, mm).map_err(|e| match e {
        ModelError::MetamodelMismatch { .. } => CliError::MetamodelMismatch(format!("{}: {e}", path.display())),
        e => parse_error(path, e),
    })
}

/// Parses a program and checks it against the metamodels.
pub fn load_program(path: &Path, src: &Metamodel, tgt: &Metamodel) -> Result<Transformation, CliError> {
    let t = parse_transformation(&read(path)?).map_err(|e| parse_error(path, e))?;
    if t.source_mm != src.name() || t.target_mm != tgt.name() {
        return Err(CliError::MetamodelMismatch(format!(
            "{}: program maps {} to {}, metamodels are {} and {}",
            path.display(),
            t.source_mm,
            t.target_mm,
            src.name(),
            tgt.name()
        )));
    }
    let violations = static_check(&t, src, tgt);
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(parse_error(path, format!("static check failed:\n{}", lines.join("\n"))));
    }
    Ok(t)
}

/// Metamodels and test cases shared by every manifest-driven command.
pub struct Setup {
    pub src: Metamodel,
    pub tgt: Metamodel,
    pub tests: Vec<TestCase>,
}

impl Setup {
    pub fn load(m: &Manifest) -> Result<Setup, CliError> {
        let src = load_metamodel(m.require(&m.source_metamodel, "source_metamodel")?)?;
        let tgt = load_metamodel(m.require(&m.target_metamodel, "target_metamodel")?)?;
        let tests = m
            .tests
            .iter()
            .map(|t| {
                Ok(TestCase { id: t.id.clone(), input: load_model(&t.input, &src)?, expected: load_model(&t.expected, &tgt)? })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(Setup { src, tgt, tests })
    }
}

pub fn transform(m: &Manifest) -> Result<Outcome, CliError> {
    let s = Setup::load(m)?;
    let t = load_program(m.require(&m.transformation, "transformation")?, &s.src, &s.tgt)?;
    for tc in &s.tests {
        let out = execute(&t, &tc.input, &s.src, &s.tgt)
            .map_err(|e| CliError::Execution { test: tc.id.clone(), message: e.to_string() })?;
        let path = m.output.join(format!("{}.model", tc.id));
        write(&path, &serialize_model(&out, &s.tgt))?;
        println!("{}", path.display());
    }
    Ok(Outcome::Positive)
}

pub fn diff(expected: &Path, actual: &Path, metamodel: &Path) -> Result<Outcome, CliError> {
    let mm = load_metamodel(metamodel)?;
    let e = load_model(expected, &mm)?;
    let a = load_model(actual, &mm)?;
    let report = diff_models(&e, &a, &mm);
    println!("{}", report.to_json());
    Ok(if report.is_empty() { Outcome::Positive } else { Outcome::Negative })
}

pub fn repair_cmd(m: &Manifest) -> Result<Outcome, CliError> {
    let s = Setup::load(m)?;
    let t = load_program(m.require(&m.transformation, "transformation")?, &s.src, &s.tgt)?;
    let r = repair(&t, &s.tests, &s.src, &s.tgt, &m.config).map_err(CliError::from)?;
    write(&m.output.join("repair.json"), &(r.to_json() + "\n"))?;
    let best = r.best_patch().map(|b| b.patch.clone()).unwrap_or_default();
    write(&m.output.join("best.patch"), &best)?;
    println!(
        "{} after {} generations, best diff {}",
        if r.optimal { "optimal" } else { "not optimal" },
        r.generations_used,
        r.best_patch().map_or(r.baseline_diff, |b| b.diff_total)
    );
    Ok(if r.optimal { Outcome::Positive } else { Outcome::Negative })
}

pub fn mutate(m: &Manifest) -> Result<Outcome, CliError> {
    let s = Setup::load(m)?;
    let base_path = m.base.as_ref().or(m.transformation.as_ref());
    let base = load_program(m.require(&base_path.cloned(), "base")?, &s.src, &s.tgt)?;
    for tc in &s.tests {
        let correct = execute(&base, &tc.input, &s.src, &s.tgt)
            .is_ok_and(|out| diff_models(&tc.expected, &out, &s.tgt).is_empty());
        if !correct {
            return Err(CliError::Mutation(format!("base program is not correct on test `{}`", tc.id)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(m.config.seed);
    let mutants = build_benchmark(&mut rng, &base, &s.tests, &s.src, &s.tgt, &m.benchmark, &m.class_weights)
        .map_err(|e| CliError::Mutation(e.to_string()))?;
    for (i, mutant) in mutants.iter().enumerate() {
        let dir = bundle_dir(&m.mutants_dir(), i);
        for (name, content) in mutant.bundle_files() {
            write(&dir.join(name), &content)?;
        }
        let classes: Vec<&str> = mutant.classes().iter().map(|c| c.tag()).collect();
        println!("{} {}", dir.display(), classes.join(" "));
    }
    Ok(Outcome::Positive)
}

pub fn bundle_dir(root: &Path, index: usize) -> PathBuf {
    root.join(format!("mutant_{:02}", index + 1))
}
