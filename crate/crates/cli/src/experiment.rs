//! Runs every (mutant, configuration, seed) cell and aggregates the rows.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use mtrepair::edits::{apply_patch, Patch};
use mtrepair::evolve::{repair, Config, SdMode};
use mtrepair::mutants::{residual_errors, ErrorClass, Mutant};
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::{read, write, Setup};
use crate::error::{CliError, Outcome};
use crate::manifest::Manifest;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub class: ErrorClass,
    pub fixed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub mutant: String,
    pub errors: usize,
    pub config: SdMode,
    pub seed: u64,
    pub optimal: bool,
    pub generations_used: usize,
    pub best_diff: usize,
    pub residual: Vec<Residual>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub config: SdMode,
    pub errors: usize,
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Over all runs; unsuccessful runs count their full budget.
    pub mean_generations: f64,
    /// Over successful runs only; zero when there are none.
    pub mean_generations_success: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassSummary {
    pub config: SdMode,
    pub class: ErrorClass,
    pub injections: usize,
    pub fixed: usize,
    pub correction_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub max_generations: usize,
    pub population: usize,
    pub rows: Vec<Row>,
    pub summary: Vec<GroupSummary>,
    pub classes: Vec<ClassSummary>,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Aggregates per (configuration, error count) and per (configuration, class).
pub fn aggregate(rows: &[Row]) -> (Vec<GroupSummary>, Vec<ClassSummary>) {
    let mut groups: BTreeMap<(SdMode, usize), Vec<&Row>> = BTreeMap::new();
    let mut classes: BTreeMap<(SdMode, ErrorClass), (usize, usize)> = BTreeMap::new();
    for r in rows {
        groups.entry((r.config, r.errors)).or_default().push(r);
        for res in &r.residual {
            let e = classes.entry((r.config, res.class)).or_default();
            e.0 += 1;
            e.1 += usize::from(res.fixed);
        }
    }
    let summary = groups
        .into_iter()
        .map(|((config, errors), rs)| {
            let successes: Vec<&&Row> = rs.iter().filter(|r| r.optimal).collect();
            let gens: usize = rs.iter().map(|r| r.generations_used).sum();
            let success_gens: usize = successes.iter().map(|r| r.generations_used).sum();
            GroupSummary {
                config,
                errors,
                runs: rs.len(),
                successes: successes.len(),
                success_rate: ratio(successes.len(), rs.len()),
                mean_generations: ratio(gens, rs.len()),
                mean_generations_success: ratio(success_gens, successes.len()),
            }
        })
        .collect();
    let classes = classes
        .into_iter()
        .map(|((config, class), (injections, fixed))| ClassSummary {
            config,
            class,
            injections,
            fixed,
            correction_rate: ratio(fixed, injections),
        })
        .collect();
    (summary, classes)
}

pub fn load_bundles(root: &Path) -> Result<Vec<(String, Mutant)>, CliError> {
    let entries = fs::read_dir(root).map_err(|_| CliError::MissingInput(root.to_path_buf()))?;
    let mut dirs: Vec<PathBuf> = entries.filter_map(Result::ok).map(|e| e.path()).filter(|p| p.is_dir()).collect();
    dirs.sort();
    dirs.into_iter()
        .map(|d| {
            let name = d.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let m = Mutant::from_bundle(
                &read(&d.join("base.mtl"))?,
                &read(&d.join("faulty.mtl"))?,
                &read(&d.join("injections.json"))?,
            )
            .map_err(|e| CliError::Parse { path: d.clone(), message: e.to_string() })?;
            Ok((name, m))
        })
        .collect()
}

fn run_cell(setup: &Setup, name: &str, m: &Mutant, cfg: &Config) -> Row {
    let mut row = Row {
        mutant: name.to_string(),
        errors: m.injections.len(),
        config: cfg.sd_mode,
        seed: cfg.seed,
        optimal: false,
        generations_used: 0,
        best_diff: 0,
        residual: Vec::new(),
        error: None,
    };
    match repair(&m.faulty, &setup.tests, &setup.src, &setup.tgt, cfg) {
        Ok(r) => {
            row.optimal = r.optimal;
            row.generations_used = r.generations_used;
            let best = r.best_patch().map(|b| b.patch.as_str()).unwrap_or("");
            row.best_diff = r.best_patch().map_or(r.baseline_diff, |b| b.diff_total);
            let patch = Patch::parse(best).unwrap_or_default();
            let (patched, _) = apply_patch(&m.faulty, &patch);
            row.residual =
                residual_errors(&patched, m).into_iter().map(|(class, fixed)| Residual { class, fixed }).collect();
        }
        Err(e) => {
            row.error = Some(e.to_string());
            row.residual = m.injections.iter().map(|i| Residual { class: i.class, fixed: false }).collect();
        }
    }
    row
}

/// Runs every cell; rows come out in (mutant, configuration, seed) order.
pub fn run_experiment(setup: &Setup, mutants: &[(String, Mutant)], m: &Manifest) -> ExperimentReport {
    let mut cells = Vec::new();
    for (name, mutant) in mutants {
        for mode in &m.configs {
            for seed in &m.seeds {
                let cfg = Config { sd_mode: *mode, seed: *seed, parallel: false, ..m.config.clone() };
                cells.push((name.as_str(), mutant, cfg));
            }
        }
    }
    let rows: Vec<Row> = if m.config.parallel {
        cells.par_iter().map(|(n, mu, cfg)| run_cell(setup, n, mu, cfg)).collect()
    } else {
        cells.iter().map(|(n, mu, cfg)| run_cell(setup, n, mu, cfg)).collect()
    };
    let (summary, classes) = aggregate(&rows);
    ExperimentReport {
        max_generations: m.config.max_generations,
        population: m.config.population,
        rows,
        summary,
        classes,
    }
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn summary_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let _ = w.write_record(["config", "errors", "runs", "successes", "success_rate", "mean_generations", "mean_generations_success"]);
        for g in &self.summary {
            let _ = w.write_record([
                g.config.to_string(),
                g.errors.to_string(),
                g.runs.to_string(),
                g.successes.to_string(),
                format!("{:.4}", g.success_rate),
                format!("{:.2}", g.mean_generations),
                format!("{:.2}", g.mean_generations_success),
            ]);
        }
        String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
    }

    pub fn classes_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let _ = w.write_record(["config", "class", "injections", "fixed", "correction_rate"]);
        for c in &self.classes {
            let _ = w.write_record([
                c.config.to_string(),
                c.class.to_string(),
                c.injections.to_string(),
                c.fixed.to_string(),
                format!("{:.4}", c.correction_rate),
            ]);
        }
        String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
    }
}

pub fn experiment(m: &Manifest) -> Result<Outcome, CliError> {
    let setup = Setup::load(m)?;
    let mutants = load_bundles(&m.mutants_dir())?;
    let report = run_experiment(&setup, &mutants, m);
    write(&m.output.join("report.json"), &report.to_json())?;
    write(&m.output.join("summary.csv"), &report.summary_csv())?;
    write(&m.output.join("classes.csv"), &report.classes_csv())?;
    for g in &report.summary {
        println!(
            "{:<9} errors={} success={}/{} mean_generations={:.1}",
            g.config, g.errors, g.successes, g.runs, g.mean_generations
        );
    }
    Ok(Outcome::Positive)
}
