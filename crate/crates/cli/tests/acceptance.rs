//! One test per acceptance criterion; each prints a single PASS/FAIL line.
//! Run with `cargo test -p mtrepair-cli --test acceptance -- --nocapture`.

#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use mtrepair::corpus::{Class2Relational, REPAIR_PATCH};
use mtrepair::diff::{diff_count, diff_models};
use mtrepair::edits::{apply_edit, apply_patch, build_pools, Patch};
use mtrepair::evolve::{
    crowding_distance, dominates, fast_nondominated_sort, repair, repair_observed, Config, Distance, RepairContext,
    SdMode, TestCase,
};
use mtrepair::mtl::{execute, static_check};
use mtrepair::mutants::{build_benchmark, inject_error, merge_mutants, ErrorClass, Mutant};
use num_rational::BigRational;
use num_traits::Zero;
use oracles::nsga::{crowding, dominance_matrix, frac, int, peel, random_population};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

fn verdict(n: usize, ok: bool, detail: String) {
    println!("criterion {n}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n}: {detail}");
}

fn family_case() -> (Class2Relational, Vec<TestCase>) {
    let c = Class2Relational::load();
    let tests = vec![TestCase { id: "family".into(), input: c.input.clone(), expected: c.expected.clone() }];
    (c, tests)
}

#[test]
fn criterion_1_worked_example() {
    let (c, tests) = family_case();
    let start = Instant::now();
    let ctx = RepairContext::new(&c.faulty, &tests, &c.src, &c.tgt);
    let lines: Vec<&str> = REPAIR_PATCH.lines().collect();
    let score = |idx: &[usize]| {
        let text: String = idx.iter().map(|&i| format!("{}\n", lines[i])).collect();
        ctx.evaluate(&Patch::parse(&text).unwrap()).diff_total
    };
    let got = [ctx.baseline_total(), score(&[0, 1]), score(&[2]), score(&[0, 1, 2])];
    let elapsed = start.elapsed();
    verdict(
        1,
        got == [3, 1, 2, 0] && elapsed < Duration::from_secs(1),
        format!("faulty, {{e1,e2}}, {{e3}}, full = {got:?}, expected [3, 1, 2, 0], {elapsed:.2?}"),
    );
}

#[test]
fn criterion_2_end_to_end_repair() {
    let (c, tests) = family_case();
    let mut optimal = 0;
    let mut slowest = Duration::ZERO;
    let mut gens = Vec::new();
    for seed in 0..5 {
        let cfg = Config { seed, sd_mode: SdMode::Objective, population: 40, max_generations: 2000, ..Config::default() };
        let start = Instant::now();
        let r = repair(&c.faulty, &tests, &c.src, &c.tgt, &cfg).unwrap();
        slowest = slowest.max(start.elapsed());
        let best = r.best_patch().unwrap();
        let (fixed, _) = apply_patch(&c.faulty, &Patch::parse(&best.patch).unwrap());
        let verified = execute(&fixed, &c.input, &c.src, &c.tgt).is_ok_and(|out| diff_models(&c.expected, &out, &c.tgt).is_empty());
        if r.optimal && verified {
            optimal += 1;
        }
        gens.push(r.generations_used);
    }
    verdict(
        2,
        optimal >= 4 && slowest < Duration::from_secs(300),
        format!("{optimal}/5 seeds optimal, generations {gens:?}, slowest run {slowest:.2?}"),
    );
}

#[test]
fn criterion_3_nsga_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut mismatches = 0;
    for round in 0..100 {
        let objs = random_population(&mut rng, 50, 2 + round % 2);
        let matrix: Vec<Vec<bool>> = objs.iter().map(|a| objs.iter().map(|b| dominates(a, b)).collect()).collect();
        if matrix != dominance_matrix(&objs) || fast_nondominated_sort(&objs) != peel(&objs) {
            mismatches += 1;
        }
    }
    verdict(3, mismatches == 0, format!("{mismatches} of 100 random populations disagree with peeling"));
}

#[test]
fn criterion_4_crowding_hand_case() {
    let objs: Vec<Vec<BigRational>> = [(0, 4), (1, 2), (2, 1), (4, 0)].iter().map(|&(a, b)| vec![int(a), int(b)]).collect();
    let got = crowding_distance(&objs, &[0, 1, 2, 3]);
    let hand = [Distance::Infinite, Distance::Finite(frac(5, 4)), Distance::Finite(frac(5, 4)), Distance::Infinite];
    let oracle: Vec<Distance> = crowding(&objs).into_iter().map(|d| d.map_or(Distance::Infinite, Distance::Finite)).collect();
    verdict(4, got == hand && got == oracle, format!("{got:?}"));
}

#[test]
fn criterion_5_sd_conservation() {
    let (c, tests) = family_case();
    let ctx = RepairContext::new(&c.faulty, &tests, &c.src, &c.tgt);
    let out = execute(&c.faulty, &c.input, &c.src, &c.tgt).unwrap();
    let baseline: BTreeSet<String> =
        diff_models(&c.expected, &out, &c.tgt).keys().iter().map(|k| format!("family::{k}")).collect();
    let mut checked = 0;
    let mut broken = Vec::new();
    for mode in SdMode::ALL {
        let cfg = Config { seed: 5, sd_mode: mode, max_generations: 200, ..Config::default() };
        repair_observed(&ctx, &cfg, &mut |view| {
            checked += 1;
            let total = view.population.iter().fold(BigRational::zero(), |a, i| a + &i.sd);
            let covered: BTreeSet<&String> = view.population.iter().flat_map(|i| &i.eval.fixed).collect();
            if total != int(covered.len() as i64) || !covered.iter().all(|k| baseline.contains(*k)) {
                broken.push((mode, view.gen));
            }
        })
        .unwrap();
    }
    verdict(5, broken.is_empty(), format!("{checked} generations traced, violations {broken:?}"));
}

#[test]
fn criterion_6_directional_replication() {
    let (c, tests) = family_case();
    let spec = [(2, 3), (3, 3), (4, 3), (5, 3)];
    let mutants = build_benchmark(
        &mut ChaCha8Rng::seed_from_u64(1),
        &c.correct,
        &tests,
        &c.src,
        &c.tgt,
        &spec,
        &ErrorClass::DEFAULT_WEIGHTS,
    )
    .unwrap();
    // (runs, successes, generations) on the mutants with at least three errors
    let mut stats = [(0usize, 0usize, 0usize); 3];
    for m in mutants.iter().filter(|m| m.injections.len() >= 3) {
        for (slot, mode) in SdMode::ALL.into_iter().enumerate() {
            for seed in 0..5 {
                let cfg = Config { seed, sd_mode: mode, max_generations: 1000, ..Config::default() };
                let r = repair(&m.faulty, &tests, &c.src, &c.tgt, &cfg).unwrap();
                stats[slot].0 += 1;
                stats[slot].1 += usize::from(r.optimal);
                stats[slot].2 += r.generations_used;
            }
        }
    }
    let rate = |s: (usize, usize, usize)| s.1 as f64 / s.0 as f64;
    let mean = |s: (usize, usize, usize)| s.2 as f64 / s.0 as f64;
    let [off, crowd, objective] = stats;
    let rates_ok = rate(objective) + 0.05 >= rate(crowd) && rate(crowd) + 0.05 >= rate(off);
    let gens_ok = mean(objective) <= mean(crowd) && mean(crowd) <= mean(off);
    let detail = format!(
        "{} mutants; success off {}/{} crowding {}/{} objective {}/{}; mean generations off {:.1} crowding {:.1} objective {:.1}",
        mutants.len(),
        off.1,
        off.0,
        crowd.1,
        crowd.0,
        objective.1,
        objective.0,
        mean(off),
        mean(crowd),
        mean(objective)
    );
    verdict(6, rates_ok && gens_ok, detail);
}

fn restores(m: &Mutant, base: &mtrepair::mtl::Transformation) -> bool {
    let mut t = m.faulty.clone();
    m.injections.iter().rev().all(|i| apply_edit(&mut t, &i.reverse)) && t == *base
}

#[test]
fn criterion_7_mutant_validity() {
    let (c, tests) = family_case();
    let pools = build_pools(&c.correct, &c.src, &c.tgt);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut valid = Vec::new();
    for class in ErrorClass::ALL {
        let ok = inject_error(&mut rng, &c.correct, class, &pools, &c.src, &c.tgt, &tests)
            .and_then(|inj| merge_mutants(&[inj], &c.correct, &c.src, &c.tgt, &tests))
            .is_ok_and(|m| {
                static_check(&m.faulty, &c.src, &c.tgt).is_empty()
                    && RepairContext::new(&m.faulty, &tests, &c.src, &c.tgt).baseline_total() >= 1
                    && restores(&m, &c.correct)
            });
        if ok {
            valid.push(class);
        }
    }
    let bench =
        build_benchmark(&mut rng, &c.correct, &tests, &c.src, &c.tgt, &[(2, 4), (3, 4), (5, 4)], &ErrorClass::DEFAULT_WEIGHTS)
            .unwrap();
    let merged_ok = bench.iter().filter(|m| restores(m, &c.correct)).count();
    verdict(
        7,
        valid.len() == 9 && merged_ok == bench.len(),
        format!("{}/9 classes valid, {merged_ok}/{} merged mutants restore the base", valid.len(), bench.len()),
    );
}

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus/class2relational").canonicalize().unwrap()
}

fn cli(root: &Path, args: &[&str]) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_mtrepair")).args(args).env("MTREPAIR_OUT", root).output().unwrap();
    out.status.code().unwrap()
}

#[test]
fn criterion_8_determinism() {
    let tmp = TempDir::new().unwrap();
    let c = corpus();
    let base = format!(
        "source_metamodel = {c}/Class.mm\ntarget_metamodel = {c}/Relational.mm\n\
         transformation = {c}/faulty.mtl\nbase = {c}/correct.mtl\n\
         test = family : {c}/family.model : {c}/family_expected.model\n\
         mutants = {m}\nbenchmark = 2x2\nseed = 4\nmax_generations = 40\nseeds = 0, 1\n",
        c = c.display(),
        m = tmp.path().join("mutants").display()
    );
    let run = |name: &str, parallel: bool, cmd: &str| {
        let path = tmp.path().join(format!("{name}.manifest"));
        fs::write(&path, format!("{base}output = {name}\nparallel = {parallel}\n")).unwrap();
        cli(tmp.path(), &[cmd, "--manifest", path.to_str().unwrap()])
    };
    let read = |name: &str, file: &str| fs::read(tmp.path().join(name).join(file)).unwrap();
    let mut same = true;
    for (i, (parallel, name)) in [(false, "r1"), (false, "r2"), (true, "r3")].into_iter().enumerate() {
        run(name, parallel, "repair");
        if i > 0 {
            same &= read("r1", "repair.json") == read(name, "repair.json") && read("r1", "best.patch") == read(name, "best.patch");
        }
    }
    assert_eq!(run("m", false, "mutate"), 0);
    for (i, (parallel, name)) in [(false, "e1"), (false, "e2"), (true, "e3")].into_iter().enumerate() {
        assert_eq!(run(name, parallel, "experiment"), 0);
        if i > 0 {
            same &= read("e1", "report.json") == read(name, "report.json");
        }
    }
    verdict(8, same, "repair and experiment outputs compared across repeats, parallel off and on".into());
}

#[test]
fn criterion_9_diff_oracle() {
    let mm = oracles::diff::graph_mm();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut mismatches = 0;
    for _ in 0..200 {
        let a = oracles::diff::random_model(&mut rng, "a", 6);
        let b = oracles::diff::random_model(&mut rng, "b", 6);
        if diff_count(&diff_models(&a, &b, &mm)) != oracles::diff::brute_force_diff_count(&a, &b, &mm) {
            mismatches += 1;
        }
    }
    verdict(9, mismatches == 0, format!("{mismatches} of 200 random pairs disagree with the brute-force differ"));
}
