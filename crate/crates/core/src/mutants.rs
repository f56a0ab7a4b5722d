//! Seeded semantic faults: single injections from the nine error classes,
//! multi-error mutants, and residual-error classification.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diff::diff_models;
use crate::edits::{apply_edit, build_pools, EditKind, EditOp, LocRoot, Locator, ValuePools};
use crate::evolve::TestCase;
use crate::model::Metamodel;
use crate::mtl::{execute, parse_transformation, pretty_print, static_check, Expr, Rule, Transformation};

/// Injection attempts per error before giving up.
pub const ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorClass {
    /// Type of an output pattern element.
    #[serde(rename = "TOP")]
    Top,
    /// Type of the input pattern element.
    #[serde(rename = "TIP")]
    Tip,
    /// Operation call.
    #[serde(rename = "OP")]
    Op,
    /// Type argument of a type test.
    #[serde(rename = "TA")]
    Ta,
    /// Collection type.
    #[serde(rename = "CT")]
    Ct,
    /// Binding left-hand side.
    #[serde(rename = "BL")]
    Bl,
    /// Binding right-hand side.
    #[serde(rename = "BR")]
    Br,
    /// Missing binding.
    #[serde(rename = "MB")]
    Mb,
    /// Extra binding.
    #[serde(rename = "EB")]
    Eb,
}

impl ErrorClass {
    pub const ALL: [ErrorClass; 9] = [
        ErrorClass::Top,
        ErrorClass::Tip,
        ErrorClass::Op,
        ErrorClass::Ta,
        ErrorClass::Ct,
        ErrorClass::Bl,
        ErrorClass::Br,
        ErrorClass::Mb,
        ErrorClass::Eb,
    ];

    /// Occurrence counts of the reference error dataset, used as sampling weights.
    pub const DEFAULT_WEIGHTS: [u32; 9] = [32, 13, 22, 19, 9, 29, 30, 29, 21];

    pub fn tag(self) -> &'static str {
        match self {
            ErrorClass::Top => "TOP",
            ErrorClass::Tip => "TIP",
            ErrorClass::Op => "OP",
            ErrorClass::Ta => "TA",
            ErrorClass::Ct => "CT",
            ErrorClass::Bl => "BL",
            ErrorClass::Br => "BR",
            ErrorClass::Mb => "MB",
            ErrorClass::Eb => "EB",
        }
    }

    fn kinds(self) -> &'static [EditKind] {
        match self {
            ErrorClass::Top => &[EditKind::TargetType],
            ErrorClass::Tip => &[EditKind::SourceType],
            ErrorClass::Op => &[EditKind::PredefOpCall, EditKind::CollOpCall, EditKind::IteratorCall],
            ErrorClass::Ta => &[EditKind::TypeArg],
            ErrorClass::Ct => &[EditKind::CollectionType],
            ErrorClass::Bl => &[EditKind::BindingTarget],
            ErrorClass::Br => &[EditKind::NavExpr],
            ErrorClass::Mb => &[EditKind::DeleteBinding],
            ErrorClass::Eb => &[EditKind::CreateBinding],
        }
    }

    fn index(self) -> usize {
        ErrorClass::ALL.iter().position(|c| *c == self).expect("listed")
    }
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ErrorClass {
    type Err = MutantError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ErrorClass::ALL.into_iter().find(|c| c.tag() == s).ok_or_else(|| MutantError::UnknownClass(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MutantError {
    #[error("no valid {0} injection found within {ATTEMPTS} attempts")]
    NotInjectable(ErrorClass),
    #[error("conflicting injections: {0}")]
    Conflict(String),
    #[error("could not build a mutant with {errors} distinct errors within {ATTEMPTS} attempts")]
    Exhausted { errors: usize },
    #[error("unknown error class `{0}`")]
    UnknownClass(String),
    #[error("malformed mutant bundle: {0}")]
    Bundle(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Injection {
    pub class: ErrorClass,
    pub forward: EditOp,
    pub reverse: EditOp,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mutant {
    pub base: Transformation,
    pub injections: Vec<Injection>,
    pub faulty: Transformation,
}

/// The part of a program an edit changes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Site {
    InputType { rule: String },
    OutputType { rule: String, elem: String },
    Binding { rule: String, elem: String, target: String },
    Node { rule: String, loc: Locator },
}

impl Site {
    fn of(edit: &EditOp, base: &Transformation) -> Vec<Site> {
        let rule = edit.rule().to_string();
        let binding = |elem: &str, target: &str| Site::Binding { rule: rule.clone(), elem: elem.into(), target: target.into() };
        match edit {
            EditOp::CreateBinding { elem, target, .. } | EditOp::DeleteBinding { elem, target, .. } => {
                vec![binding(elem, target)]
            }
            EditOp::BindingTarget { elem, old, new, .. } => vec![binding(elem, old), binding(elem, new)],
            EditOp::SourceType { .. } => vec![Site::InputType { rule }],
            EditOp::TargetType { elem, .. } => vec![Site::OutputType { rule, elem: elem.clone() }],
            EditOp::CollectionType { loc, .. }
            | EditOp::TypeArg { loc, .. }
            | EditOp::NavExpr { loc, .. }
            | EditOp::PredefOpCall { loc, .. }
            | EditOp::CollOpCall { loc, .. }
            | EditOp::IteratorCall { loc, .. } => {
                let mut sites = vec![Site::Node { rule: rule.clone(), loc: loc.clone() }];
                if let (LocRoot::Binding { elem, target }, Some(r)) = (&loc.root, base.rule(&rule)) {
                    if let Some(o) = r.outputs.get(*elem) {
                        sites.push(binding(&o.var, target));
                    }
                }
                sites
            }
        }
    }
}

/// Two node edits clash only on the same node; otherwise any shared site
/// clashes, so a binding edit also clashes with every node inside it.
fn conflicts(a: &[Site], b: &[Site]) -> bool {
    if is_node(a) && is_node(b) {
        return a[0] == b[0];
    }
    a.iter().any(|x| b.contains(x))
}

fn is_node(s: &[Site]) -> bool {
    matches!(s.first(), Some(Site::Node { .. }))
}

fn node<'r>(rule: &'r Rule, loc: &Locator) -> Option<&'r Expr> {
    let root = match &loc.root {
        LocRoot::Guard => rule.input.guard.as_ref()?,
        LocRoot::Binding { elem, target } => &rule.outputs.get(*elem)?.binding(target)?.expr,
    };
    root.at_path(&loc.path)
}

/// The edit undoing `forward` on `t`, or None if `forward` does not apply.
pub fn reverse_edit(t: &Transformation, forward: &EditOp) -> Option<EditOp> {
    let rule = t.rule(forward.rule())?;
    let rn = rule.name.clone();
    let out = |elem: &str| rule.outputs.iter().find(|o| o.var == elem);
    Some(match forward {
        EditOp::CreateBinding { elem, target, .. } => {
            EditOp::DeleteBinding { rule: rn, elem: elem.clone(), target: target.clone() }
        }
        EditOp::DeleteBinding { elem, target, .. } => EditOp::CreateBinding {
            rule: rn,
            elem: elem.clone(),
            target: target.clone(),
            expr: out(elem)?.binding(target)?.expr.clone(),
        },
        EditOp::SourceType { .. } => EditOp::SourceType { rule: rn, new: rule.input.ty.class.clone() },
        EditOp::TargetType { elem, .. } => {
            EditOp::TargetType { rule: rn, elem: elem.clone(), new: out(elem)?.ty.class.clone() }
        }
        EditOp::NavExpr { loc, old, new, .. } => {
            EditOp::NavExpr { rule: rn, loc: loc.clone(), old: new.clone(), new: old.clone() }
        }
        EditOp::BindingTarget { elem, old, new, .. } => {
            EditOp::BindingTarget { rule: rn, elem: elem.clone(), old: new.clone(), new: old.clone() }
        }
        EditOp::CollectionType { loc, .. } => match node(rule, loc)? {
            Expr::Collection { kind, .. } => EditOp::CollectionType { rule: rn, loc: loc.clone(), new: *kind },
            _ => return None,
        },
        EditOp::TypeArg { loc, .. } => match node(rule, loc)? {
            Expr::TypeTest { ty, .. } => EditOp::TypeArg { rule: rn, loc: loc.clone(), new: ty.clone() },
            _ => return None,
        },
        EditOp::PredefOpCall { loc, .. } => match node(rule, loc)? {
            Expr::Predef { op, .. } => EditOp::PredefOpCall { rule: rn, loc: loc.clone(), new: *op },
            _ => return None,
        },
        EditOp::CollOpCall { loc, .. } => match node(rule, loc)? {
            Expr::CollOp { op, .. } => EditOp::CollOpCall { rule: rn, loc: loc.clone(), new: *op },
            _ => return None,
        },
        EditOp::IteratorCall { loc, .. } => match node(rule, loc)? {
            Expr::Iterate { op, .. } => EditOp::IteratorCall { rule: rn, loc: loc.clone(), new: *op },
            _ => return None,
        },
    })
}

/// True when `t` passes the static check and some test output differs from
/// the expected one; a failed execution counts as an empty output.
fn is_semantic_fault(t: &Transformation, src: &Metamodel, tgt: &Metamodel, tests: &[TestCase]) -> bool {
    static_check(t, src, tgt).is_empty()
        && tests.iter().any(|tc| match execute(t, &tc.input, src, tgt) {
            Ok(out) => !diff_models(&tc.expected, &out, tgt).is_empty(),
            Err(_) => !tc.expected.is_empty(),
        })
}

fn candidates<'p>(class: ErrorClass, t: &Transformation, pools: &'p ValuePools, src: &Metamodel) -> Vec<&'p EditOp> {
    class
        .kinds()
        .iter()
        .flat_map(|k| pools.candidates(*k))
        .filter(|e| match e {
            EditOp::SourceType { rule, new } => t
                .rule(rule)
                .is_some_and(|r| src.conforms(new, &r.input.ty.class) || src.conforms(&r.input.ty.class, new)),
            EditOp::NavExpr { loc, .. } => matches!(loc.root, LocRoot::Binding { .. }),
            _ => true,
        })
        .collect()
}

/// Applies `forward` and its computed reverse checks.
fn checked_injection(
    t: &Transformation,
    class: ErrorClass,
    forward: &EditOp,
    src: &Metamodel,
    tgt: &Metamodel,
    tests: &[TestCase],
) -> Option<Injection> {
    let reverse = reverse_edit(t, forward)?;
    let mut faulty = t.clone();
    if !apply_edit(&mut faulty, forward) || !is_semantic_fault(&faulty, src, tgt, tests) {
        return None;
    }
    let mut back = faulty.clone();
    (apply_edit(&mut back, &reverse) && back == *t).then(|| Injection { class, forward: forward.clone(), reverse })
}

pub fn inject_error<R: Rng + ?Sized>(
    rng: &mut R,
    t: &Transformation,
    class: ErrorClass,
    pools: &ValuePools,
    src: &Metamodel,
    tgt: &Metamodel,
    tests: &[TestCase],
) -> Result<Injection, MutantError> {
    let mut pool = candidates(class, t, pools, src);
    pool.shuffle(rng);
    pool.into_iter()
        .take(ATTEMPTS)
        .find_map(|e| checked_injection(t, class, e, src, tgt, tests))
        .ok_or(MutantError::NotInjectable(class))
}

/// Applies every forward edit to `base` in order and checks the result.
pub fn merge_mutants(
    injections: &[Injection],
    base: &Transformation,
    src: &Metamodel,
    tgt: &Metamodel,
    tests: &[TestCase],
) -> Result<Mutant, MutantError> {
    let sites: Vec<Vec<Site>> = injections.iter().map(|i| Site::of(&i.forward, base)).collect();
    for a in 0..sites.len() {
        for b in a + 1..sites.len() {
            if conflicts(&sites[a], &sites[b]) {
                return Err(MutantError::Conflict(format!(
                    "`{}` and `{}` touch the same site",
                    injections[a].forward, injections[b].forward
                )));
            }
        }
    }
    let mut faulty = base.clone();
    for inj in injections {
        if !apply_edit(&mut faulty, &inj.forward) {
            return Err(MutantError::Conflict(format!("`{}` no longer applies", inj.forward)));
        }
    }
    if !is_semantic_fault(&faulty, src, tgt, tests) {
        return Err(MutantError::Conflict("merged program is not a semantic fault".into()));
    }
    let mut back = faulty.clone();
    for inj in injections.iter().rev() {
        apply_edit(&mut back, &inj.reverse);
    }
    if back != *base {
        return Err(MutantError::Conflict("reverse edits do not restore the base program".into()));
    }
    Ok(Mutant { base: base.clone(), injections: injections.to_vec(), faulty })
}

/// Text of a node without its children, so nested faults are judged apart.
fn node_head(e: &Expr) -> String {
    match e {
        Expr::Nav { feature, .. } => format!("nav {feature}"),
        Expr::Collection { kind, items } => format!("{kind} {}", items.len()),
        Expr::Binary { op, .. } => format!("binary {op}"),
        Expr::Not(_) => "not".into(),
        Expr::TypeTest { op, ty, .. } => format!("{op} {}!{}", ty.metamodel, ty.class),
        Expr::CollOp { op, args, .. } => format!("{op} {}", args.len()),
        Expr::Iterate { op, var, .. } => format!("{op} {var}"),
        Expr::Predef { op, args, .. } => format!("{op} {}", args.len()),
        Expr::Var(_) | Expr::Lit(_) => crate::mtl::expr_to_string(e),
    }
}

fn site_text(t: &Transformation, site: &Site) -> Option<String> {
    match site {
        Site::InputType { rule } => Some(t.rule(rule)?.input.ty.class.clone()),
        Site::OutputType { rule, elem } => {
            Some(t.rule(rule)?.outputs.iter().find(|o| &o.var == elem)?.ty.class.clone())
        }
        Site::Binding { rule, elem, target } => {
            let o = t.rule(rule)?.outputs.iter().find(|o| &o.var == elem)?;
            Some(o.binding(target).map_or_else(|| "unbound".into(), |b| crate::mtl::expr_to_string(&b.expr)))
        }
        Site::Node { rule, loc } => node(t.rule(rule)?, loc).map(node_head),
    }
}

/// For each injection, whether `patched` agrees with the base program at the
/// injected site.
pub fn residual_errors(patched: &Transformation, mutant: &Mutant) -> Vec<(ErrorClass, bool)> {
    mutant
        .injections
        .iter()
        .map(|inj| {
            let sites = Site::of(&inj.forward, &mutant.base);
            let own: Vec<&Site> = if is_node(&sites) { vec![&sites[0]] } else { sites.iter().collect() };
            let fixed = own.iter().all(|s| site_text(patched, s) == site_text(&mutant.base, s));
            (inj.class, fixed)
        })
        .collect()
}

fn weighted_class<R: Rng + ?Sized>(rng: &mut R, from: &[ErrorClass], weights: &[u32; 9]) -> Option<ErrorClass> {
    from.choose_weighted(rng, |c| weights[c.index()]).ok().copied()
}

/// For each `(errors, count)` pair, `count` mutants with `errors` injections
/// each. Classes not yet present in the benchmark are drawn first.
pub fn build_benchmark<R: Rng + ?Sized>(
    rng: &mut R,
    base: &Transformation,
    tests: &[TestCase],
    src: &Metamodel,
    tgt: &Metamodel,
    spec: &[(usize, usize)],
    weights: &[u32; 9],
) -> Result<Vec<Mutant>, MutantError> {
    let pools = build_pools(base, src, tgt);
    let mut covered: BTreeSet<ErrorClass> = BTreeSet::new();
    let mut out = Vec::new();
    for &(errors, count) in spec {
        for _ in 0..count {
            let mut made = None;
            for _ in 0..ATTEMPTS {
                let mut classes = Vec::with_capacity(errors);
                let mut fresh: Vec<ErrorClass> =
                    ErrorClass::ALL.into_iter().filter(|c| !covered.contains(c) && weights[c.index()] > 0).collect();
                while classes.len() < errors {
                    let pick = if fresh.is_empty() {
                        weighted_class(rng, &ErrorClass::ALL, weights)
                    } else {
                        let c = weighted_class(rng, &fresh, weights);
                        fresh.retain(|f| Some(*f) != c);
                        c
                    };
                    classes.push(pick.ok_or(MutantError::Exhausted { errors })?);
                }
                let injections: Result<Vec<Injection>, MutantError> =
                    classes.iter().map(|c| inject_error(rng, base, *c, &pools, src, tgt, tests)).collect();
                let Ok(injections) = injections else { continue };
                if let Ok(m) = merge_mutants(&injections, base, src, tgt, tests) {
                    made = Some(m);
                    break;
                }
            }
            let m = made.ok_or(MutantError::Exhausted { errors })?;
            covered.extend(m.injections.iter().map(|i| i.class));
            out.push(m);
        }
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct InjectionRecord {
    class: ErrorClass,
    forward: String,
    reverse: String,
}

impl Mutant {
    pub fn classes(&self) -> Vec<ErrorClass> {
        self.injections.iter().map(|i| i.class).collect()
    }

    /// File name and content of each bundle file.
    pub fn bundle_files(&self) -> [(&'static str, String); 3] {
        let records: Vec<InjectionRecord> = self
            .injections
            .iter()
            .map(|i| InjectionRecord { class: i.class, forward: i.forward.to_string(), reverse: i.reverse.to_string() })
            .collect();
        [
            ("base.mtl", pretty_print(&self.base)),
            ("faulty.mtl", pretty_print(&self.faulty)),
            ("injections.json", serde_json::to_string_pretty(&records).expect("records serialize") + "\n"),
        ]
    }

    pub fn from_bundle(base: &str, faulty: &str, injections: &str) -> Result<Mutant, MutantError> {
        let bad = |e: &dyn fmt::Display| MutantError::Bundle(e.to_string());
        let base = parse_transformation(base).map_err(|e| bad(&e))?;
        let faulty = parse_transformation(faulty).map_err(|e| bad(&e))?;
        let records: Vec<InjectionRecord> = serde_json::from_str(injections).map_err(|e| bad(&e))?;
        let injections = records
            .into_iter()
            .map(|r| {
                Ok(Injection {
                    class: r.class,
                    forward: r.forward.parse().map_err(|e| bad(&e))?,
                    reverse: r.reverse.parse().map_err(|e| bad(&e))?,
                })
            })
            .collect::<Result<Vec<_>, MutantError>>()?;
        let mut replay = base.clone();
        for i in &injections {
            apply_edit(&mut replay, &i.forward);
        }
        if replay != faulty {
            return Err(MutantError::Bundle("faulty program differs from the base with its injections".into()));
        }
        Ok(Mutant { base, injections, faulty })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Class2Relational, REPAIR_PATCH};
    use crate::edits::{apply_patch, Patch};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (Class2Relational, Vec<TestCase>) {
        let c = Class2Relational::load();
        let tests = vec![TestCase { id: "family".into(), input: c.input.clone(), expected: c.expected.clone() }];
        (c, tests)
    }

    fn seeded_injections(c: &Class2Relational) -> Vec<Injection> {
        let fix = Patch::parse(REPAIR_PATCH).unwrap();
        let mut faults = Vec::new();
        let mut t = c.faulty.clone();
        for e in &fix.edits {
            let undo = reverse_edit(&t, e).unwrap();
            apply_edit(&mut t, e);
            faults.push((undo, e.clone()));
        }
        let classes = [ErrorClass::Op, ErrorClass::Op, ErrorClass::Br];
        faults.into_iter().zip(classes).map(|((forward, reverse), class)| Injection { class, forward, reverse }).collect()
    }

    #[test]
    fn seeded_faults_merge_into_the_faulty_program() {
        let (c, tests) = setup();
        let m = merge_mutants(&seeded_injections(&c), &c.correct, &c.src, &c.tgt, &tests).unwrap();
        assert_eq!(m.faulty, c.faulty);
        let (patched, _) = apply_patch(&m.faulty, &Patch::parse(REPAIR_PATCH).unwrap());
        assert!(residual_errors(&patched, &m).iter().all(|(_, fixed)| *fixed));
        assert!(residual_errors(&m.faulty, &m).iter().all(|(_, fixed)| !fixed));
    }

    #[test]
    fn partial_fix_flags_only_fixed_sites() {
        let (c, tests) = setup();
        let m = merge_mutants(&seeded_injections(&c), &c.correct, &c.src, &c.tgt, &tests).unwrap();
        let fix = Patch::parse(REPAIR_PATCH).unwrap();
        let (patched, _) = apply_patch(&m.faulty, &Patch::new(vec![fix.edits[1].clone(), fix.edits[2].clone()]));
        let flags: Vec<bool> = residual_errors(&patched, &m).into_iter().map(|(_, f)| f).collect();
        assert_eq!(flags, [false, true, true]);
    }

    #[test]
    fn same_binding_conflicts() {
        let (c, tests) = setup();
        let del = "delete-binding rule=Class2Table elem=out target=col".parse::<EditOp>().unwrap();
        let op = "coll-op-call rule=Class2Table loc=to.0.col new=excluding".parse::<EditOp>().unwrap();
        let inj = |class, forward: &EditOp| Injection {
            class,
            forward: forward.clone(),
            reverse: reverse_edit(&c.correct, forward).unwrap(),
        };
        let r = merge_mutants(&[inj(ErrorClass::Mb, &del), inj(ErrorClass::Op, &op)], &c.correct, &c.src, &c.tgt, &tests);
        assert!(matches!(r, Err(MutantError::Conflict(_))));
    }

    #[test]
    fn every_class_injects_on_the_corrected_program() {
        let (c, tests) = setup();
        let pools = build_pools(&c.correct, &c.src, &c.tgt);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for class in ErrorClass::ALL {
            let inj = inject_error(&mut rng, &c.correct, class, &pools, &c.src, &c.tgt, &tests)
                .unwrap_or_else(|e| panic!("{e}"));
            let single = merge_mutants(&[inj.clone()], &c.correct, &c.src, &c.tgt, &tests).unwrap();
            assert!(static_check(&single.faulty, &c.src, &c.tgt).is_empty());
            assert_eq!(residual_errors(&single.faulty, &single), [(class, false)]);
        }
    }

    #[test]
    fn deleting_name_binding_is_a_missing_binding() {
        let (c, tests) = setup();
        let e = "delete-binding rule=SingleValuedDataTypeAttribute2Column elem=out target=name".parse().unwrap();
        let inj = checked_injection(&c.correct, ErrorClass::Mb, &e, &c.src, &c.tgt, &tests).unwrap();
        assert!(matches!(inj.reverse, EditOp::CreateBinding { .. }));
    }

    #[test]
    fn benchmark_shape_and_determinism() {
        let (c, tests) = setup();
        let spec = [(2, 2), (3, 1)];
        let run = |seed| {
            build_benchmark(&mut ChaCha8Rng::seed_from_u64(seed), &c.correct, &tests, &c.src, &c.tgt, &spec, &ErrorClass::DEFAULT_WEIGHTS)
                .unwrap()
        };
        let a = run(5);
        assert_eq!(a.iter().map(|m| m.injections.len()).collect::<Vec<_>>(), [2, 2, 3]);
        assert_eq!(a, run(5));
        assert!(build_benchmark(&mut ChaCha8Rng::seed_from_u64(1), &c.correct, &tests, &c.src, &c.tgt, &[], &ErrorClass::DEFAULT_WEIGHTS)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn too_many_errors_is_exhausted() {
        let (c, tests) = setup();
        let t = parse_transformation(
            "module M; create OUT : Relational from IN : Class;
             rule R { from c : Class!Class to t : Relational!Table (name <- c.name) }",
        )
        .unwrap();
        let r = build_benchmark(&mut ChaCha8Rng::seed_from_u64(1), &t, &tests, &c.src, &c.tgt, &[(30, 1)], &ErrorClass::DEFAULT_WEIGHTS);
        assert_eq!(r, Err(MutantError::Exhausted { errors: 30 }));
    }

    #[test]
    fn bundle_round_trip() {
        let (c, tests) = setup();
        let m = merge_mutants(&seeded_injections(&c), &c.correct, &c.src, &c.tgt, &tests).unwrap();
        let [(_, base), (_, faulty), (_, inj)] = m.bundle_files();
        assert_eq!(Mutant::from_bundle(&base, &faulty, &inj).unwrap(), m);
        assert!(inj.contains("\"class\": \"OP\""));
    }
}
