use std::collections::{BTreeSet, HashMap, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::config::{Config, ConfigError, SdMode};
use super::nsga::{crowding_distance, fast_nondominated_sort, Distance};
use crate::diff::{diff_models, DiffReport};
use crate::edits::{apply_patch, build_pools, crossover, mutate_patch, random_edit, ExhaustedPools, Patch, ValuePools};
use crate::model::{Metamodel, Model};
use crate::mtl::{execute, Transformation};

#[derive(Debug, Clone, PartialEq)]
pub struct TestCase {
    pub id: String,
    pub input: Model,
    pub expected: Model,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Evaluation {
    pub diff_total: usize,
    /// Baseline keys, prefixed with their test id, absent after patching.
    /// Failed executions fix nothing.
    pub fixed: BTreeSet<String>,
    pub introduced: usize,
    pub failed_executions: usize,
    pub patch_len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub patch: Patch,
    pub eval: Evaluation,
    pub sd: BigRational,
    pub rank: usize,
    pub secondary: Distance,
}

impl Individual {
    pub fn new(patch: Patch, eval: Evaluation) -> Self {
        Individual { patch, eval, sd: BigRational::zero(), rank: 0, secondary: Distance::zero() }
    }

    /// Minimized objective vector for `mode`.
    pub fn objectives(&self, mode: SdMode) -> Vec<BigRational> {
        let int = |n: usize| BigRational::from_integer(BigInt::from(n));
        let mut v = vec![int(self.eval.diff_total)];
        if mode == SdMode::Objective {
            v.push(-self.sd.clone());
        }
        v.push(int(self.eval.patch_len));
        v
    }
}

#[derive(Debug, Error)]
pub enum RepairError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Exhausted(#[from] ExhaustedPools),
}

fn namespaced(test: &TestCase, report: &DiffReport) -> BTreeSet<String> {
    report.keys().into_iter().map(|k| format!("{}::{}", test.id, k.0)).collect()
}

/// Runs `t` on every test; a failed execution counts as an empty output.
/// The flags mark the failed tests.
fn run_tests(t: &Transformation, tests: &[TestCase], src: &Metamodel, tgt: &Metamodel) -> Vec<(DiffReport, bool)> {
    tests
        .iter()
        .map(|tc| match execute(t, &tc.input, src, tgt) {
            Ok(actual) => (diff_models(&tc.expected, &actual, tgt), false),
            Err(_) => {
                let empty = Model::new(format!("{}_out", tc.input.name), tgt.name());
                (diff_models(&tc.expected, &empty, tgt), true)
            }
        })
        .collect()
}

/// Fitness of one patch against the unpatched program's baseline reports.
pub fn evaluate(
    patch: &Patch,
    faulty: &Transformation,
    tests: &[TestCase],
    baseline: &[DiffReport],
    src: &Metamodel,
    tgt: &Metamodel,
) -> Evaluation {
    let (patched, _) = apply_patch(faulty, patch);
    let mut e = evaluate_program(&patched, tests, baseline, src, tgt);
    e.patch_len = patch.len();
    e
}

fn evaluate_program(
    t: &Transformation,
    tests: &[TestCase],
    baseline: &[DiffReport],
    src: &Metamodel,
    tgt: &Metamodel,
) -> Evaluation {
    let mut e = Evaluation::default();
    for ((tc, (now, failed)), before) in tests.iter().zip(run_tests(t, tests, src, tgt)).zip(baseline) {
        e.diff_total += now.count();
        let now_keys = namespaced(tc, &now);
        let base_keys = namespaced(tc, before);
        e.introduced += now_keys.difference(&base_keys).count();
        if failed {
            e.failed_executions += 1;
        } else {
            e.fixed.extend(base_keys.difference(&now_keys).cloned());
        }
    }
    e
}

/// sd(p) = sum over the keys p fixes of 1 / (number of members fixing that key).
pub fn social_diversity(fixed: &[&BTreeSet<String>]) -> Vec<BigRational> {
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for set in fixed {
        for k in set.iter() {
            *freq.entry(k.as_str()).or_default() += 1;
        }
    }
    fixed
        .iter()
        .map(|set| {
            set.iter().fold(BigRational::zero(), |acc, k| {
                acc + BigRational::new(BigInt::from(1), BigInt::from(freq[k.as_str()]))
            })
        })
        .collect()
}

/// Recomputes sd, ranks and secondary values; returns the fronts.
pub fn rank_population(pop: &mut [Individual], mode: SdMode) -> Vec<Vec<usize>> {
    let sd = social_diversity(&pop.iter().map(|i| &i.eval.fixed).collect::<Vec<_>>());
    for (ind, s) in pop.iter_mut().zip(sd) {
        ind.sd = s;
    }
    let objs: Vec<_> = pop.iter().map(|i| i.objectives(mode)).collect();
    let fronts = fast_nondominated_sort(&objs);
    for (rank, front) in fronts.iter().enumerate() {
        let crowd = if mode == SdMode::Crowding { None } else { Some(crowding_distance(&objs, front)) };
        for (k, &i) in front.iter().enumerate() {
            pop[i].rank = rank;
            pop[i].secondary = match &crowd {
                Some(c) => c[k].clone(),
                None => Distance::Finite(pop[i].sd.clone()),
            };
        }
    }
    fronts
}

/// Indices of `n` survivors: whole fronts first, the boundary front cut by
/// descending secondary value. Repeated patches only fill leftover places.
pub fn select_survivors(pop: &[Individual], fronts: &[Vec<usize>], n: usize) -> Vec<usize> {
    let mut seen = HashSet::new();
    let (mut unique, mut clones): (Vec<Vec<usize>>, Vec<usize>) = (Vec::new(), Vec::new());
    for front in fronts {
        let (u, c): (Vec<usize>, Vec<usize>) = front.iter().partition(|&&i| seen.insert(&pop[i].patch));
        unique.push(u);
        clones.extend(c);
    }
    let mut out = Vec::with_capacity(n);
    for front in unique.iter().chain(std::iter::once(&clones)) {
        if out.len() + front.len() <= n {
            out.extend(front);
        } else {
            let mut rest = front.clone();
            rest.sort_by(|&a, &b| pop[b].secondary.cmp(&pop[a].secondary).then(a.cmp(&b)));
            out.extend(rest.into_iter().take(n - out.len()));
        }
        if out.len() == n {
            break;
        }
    }
    out
}

fn better(pop: &[Individual], a: usize, b: usize) -> usize {
    let (x, y) = (&pop[a], &pop[b]);
    let key = x
        .rank
        .cmp(&y.rank)
        .then_with(|| y.secondary.cmp(&x.secondary))
        .then_with(|| x.patch.len().cmp(&y.patch.len()))
        .then_with(|| a.cmp(&b));
    if key.is_le() {
        a
    } else {
        b
    }
}

fn tournament<R: Rng>(rng: &mut R, pop: &[Individual]) -> usize {
    let a = rng.gen_range(0..pop.len());
    let b = rng.gen_range(0..pop.len());
    better(pop, a, b)
}

/// Draws `count` offspring patches from the ranked parents.
pub fn make_offspring<R: Rng>(
    rng: &mut R,
    parents: &[Individual],
    cfg: &Config,
    pools: &ValuePools,
    count: usize,
) -> Result<Vec<Patch>, ExhaustedPools> {
    let mut out = Vec::with_capacity(count + 1);
    while out.len() < count {
        let a = &parents[tournament(rng, parents)].patch;
        let b = &parents[tournament(rng, parents)].patch;
        let (mut c1, mut c2) = if rng.gen::<f64>() < cfg.crossover_prob {
            crossover(rng, a, b, cfg.mutation.max_len)
        } else {
            (a.clone(), b.clone())
        };
        for c in [&mut c1, &mut c2] {
            if rng.gen::<f64>() < cfg.mutation_prob {
                *c = mutate_patch(rng, c, pools, &cfg.mutation)?;
            }
        }
        out.push(c1);
        out.push(c2);
    }
    out.truncate(count);
    Ok(out)
}

/// Everything fixed for one repair problem.
pub struct RepairContext<'a> {
    pub faulty: &'a Transformation,
    pub tests: &'a [TestCase],
    pub src: &'a Metamodel,
    pub tgt: &'a Metamodel,
    pub baseline: Vec<DiffReport>,
    pub pools: ValuePools,
}

impl<'a> RepairContext<'a> {
    pub fn new(faulty: &'a Transformation, tests: &'a [TestCase], src: &'a Metamodel, tgt: &'a Metamodel) -> Self {
        let baseline = run_tests(faulty, tests, src, tgt).into_iter().map(|(r, _)| r).collect();
        RepairContext { faulty, tests, src, tgt, baseline, pools: build_pools(faulty, src, tgt) }
    }

    pub fn baseline_total(&self) -> usize {
        self.baseline.iter().map(DiffReport::count).sum()
    }

    pub fn evaluate(&self, patch: &Patch) -> Evaluation {
        evaluate(patch, self.faulty, self.tests, &self.baseline, self.src, self.tgt)
    }
}

/// Evaluations keyed by the patched program, so equivalent patches run once.
struct Evaluator<'c, 'a> {
    ctx: &'c RepairContext<'a>,
    cache: HashMap<Transformation, Evaluation>,
    parallel: bool,
}

impl Evaluator<'_, '_> {
    fn run(&mut self, patches: Vec<Patch>) -> Vec<Individual> {
        let programs: Vec<Transformation> = patches.iter().map(|p| apply_patch(self.ctx.faulty, p).0).collect();
        let mut seen = HashSet::new();
        let todo: Vec<&Transformation> =
            programs.iter().filter(|t| !self.cache.contains_key(*t) && seen.insert(*t)).collect();
        let ctx = self.ctx;
        let eval = |t: &&Transformation| evaluate_program(t, ctx.tests, &ctx.baseline, ctx.src, ctx.tgt);
        let fresh: Vec<Evaluation> =
            if self.parallel { todo.par_iter().map(eval).collect() } else { todo.iter().map(eval).collect() };
        for (t, e) in todo.into_iter().zip(fresh) {
            self.cache.insert(t.clone(), e);
        }
        patches
            .into_iter()
            .zip(&programs)
            .map(|(p, t)| {
                let mut e = self.cache[t].clone();
                e.patch_len = p.len();
                Individual::new(p, e)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryRow {
    pub gen: usize,
    pub best_diff: usize,
    pub front0_size: usize,
    pub mean_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestPatch {
    pub patch: String,
    pub diff_total: usize,
    pub patch_len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepairResult {
    pub config: Config,
    pub baseline_diff: usize,
    pub optimal: bool,
    pub generations_used: usize,
    pub best: Vec<BestPatch>,
    pub history: Vec<HistoryRow>,
}

impl RepairResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("repair results serialize")
    }

    /// The first best patch with the lowest difference count.
    pub fn best_patch(&self) -> Option<&BestPatch> {
        self.best.first()
    }
}

/// One ranked population, as seen after each generation.
pub struct GenerationView<'p> {
    pub gen: usize,
    pub population: &'p [Individual],
    pub fronts: &'p [Vec<usize>],
}

pub fn repair(
    faulty: &Transformation,
    tests: &[TestCase],
    src: &Metamodel,
    tgt: &Metamodel,
    cfg: &Config,
) -> Result<RepairResult, RepairError> {
    repair_observed(&RepairContext::new(faulty, tests, src, tgt), cfg, &mut |_| {})
}

pub fn repair_observed(
    ctx: &RepairContext<'_>,
    cfg: &Config,
    observe: &mut dyn FnMut(&GenerationView<'_>),
) -> Result<RepairResult, RepairError> {
    cfg.validate()?;
    let mut result = RepairResult {
        config: cfg.clone(),
        baseline_diff: ctx.baseline_total(),
        optimal: false,
        generations_used: 0,
        best: Vec::new(),
        history: Vec::new(),
    };
    if result.baseline_diff == 0 {
        result.optimal = true;
        result.best.push(BestPatch { patch: String::new(), diff_total: 0, patch_len: 0 });
        return Ok(result);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut evaluator = Evaluator { ctx, cache: HashMap::new(), parallel: cfg.parallel };
    let half = cfg.parents();

    let mut initial = Vec::with_capacity(half);
    for _ in 0..half {
        let len = rng.gen_range(cfg.init_min_len..=cfg.init_max_len);
        let edits = (0..len).map(|_| random_edit(&mut rng, &ctx.pools)).collect::<Result<Vec<_>, _>>()?;
        initial.push(Patch::new(edits));
    }
    let mut pop = evaluator.run(initial);
    let mut fronts = rank_population(&mut pop, cfg.sd_mode);
    record(&mut result, 0, &pop, &fronts);
    observe(&GenerationView { gen: 0, population: &pop, fronts: &fronts });

    let mut gen = 0;
    while !result.optimal && gen < cfg.max_generations {
        gen += 1;
        let parents = pop;
        let children = make_offspring(&mut rng, &parents, cfg, &ctx.pools, half)?;
        let mut merged = parents;
        merged.extend(evaluator.run(children));
        fronts = rank_population(&mut merged, cfg.sd_mode);
        record(&mut result, gen, &merged, &fronts);
        observe(&GenerationView { gen, population: &merged, fronts: &fronts });
        if result.optimal {
            pop = merged;
            break;
        }
        let keep = select_survivors(&merged, &fronts, half);
        let mut slots: Vec<Option<Individual>> = merged.into_iter().map(Some).collect();
        pop = keep.iter().map(|&i| slots[i].take().expect("survivors are distinct")).collect();
        fronts = rank_population(&mut pop, cfg.sd_mode);
    }
    result.generations_used = gen;

    let mut best: Vec<&Individual> = fronts[0].iter().map(|&i| &pop[i]).collect();
    best.sort_by(|a, b| {
        (a.eval.diff_total, a.patch.len(), a.patch.to_text()).cmp(&(b.eval.diff_total, b.patch.len(), b.patch.to_text()))
    });
    best.dedup_by(|a, b| a.patch == b.patch);
    result.best = best
        .into_iter()
        .map(|i| BestPatch { patch: i.patch.to_text(), diff_total: i.eval.diff_total, patch_len: i.patch.len() })
        .collect();
    Ok(result)
}

fn record(result: &mut RepairResult, gen: usize, pop: &[Individual], fronts: &[Vec<usize>]) {
    let best_diff = pop.iter().map(|i| i.eval.diff_total).min().unwrap_or(0);
    let total_sd = pop.iter().fold(BigRational::zero(), |acc, i| acc + &i.sd);
    let mean = total_sd / BigRational::from_integer(BigInt::from(pop.len().max(1)));
    result.history.push(HistoryRow {
        gen,
        best_diff,
        front0_size: fronts.first().map_or(0, Vec::len),
        mean_sd: mean.to_f64().unwrap_or(0.0),
    });
    result.optimal = best_diff == 0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Class2Relational, REPAIR_PATCH};

    fn family_case() -> (Class2Relational, Vec<TestCase>) {
        let c = Class2Relational::load();
        let tests = vec![TestCase { id: "family".into(), input: c.input.clone(), expected: c.expected.clone() }];
        (c, tests)
    }

    #[test]
    fn partial_patches_score_as_in_the_worked_example() {
        let (c, tests) = family_case();
        let ctx = RepairContext::new(&c.faulty, &tests, &c.src, &c.tgt);
        let full = Patch::parse(REPAIR_PATCH).unwrap();
        let sub = |idx: &[usize]| Patch::new(idx.iter().map(|&i| full.edits[i].clone()).collect());
        assert_eq!(ctx.baseline_total(), 3);
        assert_eq!(ctx.evaluate(&Patch::default()).diff_total, 3);
        assert_eq!(ctx.evaluate(&sub(&[0])).diff_total, 3);
        assert_eq!(ctx.evaluate(&sub(&[0, 1])).diff_total, 1);
        assert_eq!(ctx.evaluate(&sub(&[2])).diff_total, 2);
        let e = ctx.evaluate(&full);
        assert_eq!(e.diff_total, 0);
        assert_eq!(e.fixed.len(), 3);
        assert_eq!(e.patch_len, 3);
        assert!(e.fixed.iter().all(|k| k.starts_with("family::")));
    }

    #[test]
    fn failing_execution_counts_as_empty_output() {
        let (c, tests) = family_case();
        let ctx = RepairContext::new(&c.faulty, &tests, &c.src, &c.tgt);
        let p = Patch::parse("source-type rule=Class2Table new=Classifier\n").unwrap();
        let e = ctx.evaluate(&p);
        assert_eq!(e.failed_executions, 1);
        assert_eq!(e.diff_total, c.expected.len());
        assert!(e.fixed.is_empty());
    }

    #[test]
    fn sd_examples() {
        let set = |ks: &[&str]| ks.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        let (p, q, r) = (set(&["d1"]), set(&["d1"]), set(&["d2"]));
        let sd = social_diversity(&[&p, &q, &r]);
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(sd, [half.clone(), half, BigRational::from_integer(1.into())]);
        let lone = set(&["a", "b", "c"]);
        assert_eq!(social_diversity(&[&lone]), [BigRational::from_integer(3.into())]);
        assert_eq!(social_diversity(&[&set(&[])]), [BigRational::zero()]);
    }

    #[test]
    fn correct_program_stops_immediately() {
        let (c, tests) = family_case();
        let r = repair(&c.correct, &tests, &c.src, &c.tgt, &Config::default()).unwrap();
        assert!(r.optimal);
        assert_eq!(r.generations_used, 0);
        assert_eq!(r.best[0].patch, "");
    }

    #[test]
    fn zero_generations_reports_the_initial_population() {
        let (c, tests) = family_case();
        let cfg = Config { max_generations: 0, seed: 4, ..Config::default() };
        let r = repair(&c.faulty, &tests, &c.src, &c.tgt, &cfg).unwrap();
        assert_eq!(r.generations_used, 0);
        assert_eq!(r.history.len(), 1);
        assert_eq!(r.optimal, r.best[0].diff_total == 0);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let (c, tests) = family_case();
        let cfg = Config { population: 7, ..Config::default() };
        assert!(matches!(repair(&c.faulty, &tests, &c.src, &c.tgt, &cfg), Err(RepairError::Config(_))));
    }
}
