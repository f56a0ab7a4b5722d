//! Sampling domains for the edit operations, harvested from the program and
//! its metamodels.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use super::ops::{EditKind, EditOp, Locator};
use crate::model::{FeatureKind, FeatureType, Metamodel, Primitive};
use crate::mtl::{ClassRef, CollOpName, CollectionKind, Expr, IteratorOp, Literal, PredefOp, Transformation};

#[derive(Debug, Clone, Copy, Error, PartialEq, Eq)]
#[error("no edit operation has an applicable site")]
pub struct ExhaustedPools;

/// A static type, as far as the pools need one.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Ty {
    Unknown,
    Prim(Primitive),
    Source(String),
    Target(String),
    Many(Box<Ty>),
}

impl Ty {
    fn element(&self) -> Ty {
        match self {
            Ty::Many(e) => (**e).clone(),
            _ => Ty::Unknown,
        }
    }

    fn of_feature(ty: &FeatureType, many: bool, source: bool) -> Ty {
        let base = match ty {
            FeatureType::Primitive(p) => Ty::Prim(*p),
            FeatureType::Class(c) if source => Ty::Source(c.clone()),
            FeatureType::Class(c) => Ty::Target(c.clone()),
        };
        if many {
            Ty::Many(Box::new(base))
        } else {
            base
        }
    }
}

struct Infer<'a> {
    src: &'a Metamodel,
    /// (path, receiver class) of every navigation with a known source receiver
    navs: Vec<(Vec<usize>, String)>,
}

impl Infer<'_> {
    fn expr(&mut self, e: &Expr, path: &mut Vec<usize>, env: &mut Vec<(String, Ty)>) -> Ty {
        let mut child = |me: &mut Self, i: usize, c: &Expr, env: &mut Vec<(String, Ty)>| {
            path.push(i);
            let t = me.expr(c, path, env);
            path.pop();
            t
        };
        match e {
            Expr::Var(v) => env.iter().rev().find(|(n, _)| n == v).map(|(_, t)| t.clone()).unwrap_or(Ty::Unknown),
            Expr::Lit(Literal::Str(_)) => Ty::Prim(Primitive::String),
            Expr::Lit(Literal::Bool(_)) => Ty::Prim(Primitive::Boolean),
            Expr::Lit(Literal::Int(_)) => Ty::Prim(Primitive::Integer),
            Expr::Nav { receiver, feature } => match child(self, 0, receiver, env) {
                Ty::Source(c) => {
                    self.navs.push((path.clone(), c.clone()));
                    match self.src.feature(&c, feature) {
                        Some(f) => Ty::of_feature(&f.ty, f.many, true),
                        None => Ty::Unknown,
                    }
                }
                _ => Ty::Unknown,
            },
            Expr::Collection { items, .. } => {
                let mut elem = None;
                for (i, it) in items.iter().enumerate() {
                    let t = child(self, i, it, env);
                    elem.get_or_insert(t);
                }
                Ty::Many(Box::new(elem.unwrap_or(Ty::Unknown)))
            }
            Expr::Binary { lhs, rhs, .. } => {
                let l = child(self, 0, lhs, env);
                let r = child(self, 1, rhs, env);
                match (l, r) {
                    (Ty::Prim(Primitive::Integer), Ty::Prim(Primitive::Integer)) => Ty::Prim(Primitive::Integer),
                    (Ty::Prim(Primitive::String), _) | (_, Ty::Prim(Primitive::String)) => Ty::Prim(Primitive::String),
                    _ => Ty::Prim(Primitive::Boolean),
                }
            }
            Expr::Not(inner) => {
                child(self, 0, inner, env);
                Ty::Prim(Primitive::Boolean)
            }
            Expr::TypeTest { receiver, .. } => {
                child(self, 0, receiver, env);
                Ty::Prim(Primitive::Boolean)
            }
            Expr::CollOp { receiver, op, args } => {
                let r = child(self, 0, receiver, env);
                for (i, a) in args.iter().enumerate() {
                    child(self, i + 1, a, env);
                }
                match op {
                    CollOpName::First => r.element(),
                    CollOpName::Size => Ty::Prim(Primitive::Integer),
                    CollOpName::IsEmpty | CollOpName::NotEmpty => Ty::Prim(Primitive::Boolean),
                    CollOpName::Flatten => match r.element() {
                        Ty::Many(inner) => Ty::Many(inner),
                        other => Ty::Many(Box::new(other)),
                    },
                    _ => r,
                }
            }
            Expr::Iterate { receiver, op, var, body } => {
                let r = child(self, 0, receiver, env);
                env.push((var.clone(), r.element()));
                let b = child(self, 1, body, env);
                env.pop();
                match op {
                    IteratorOp::Collect => Ty::Many(Box::new(b)),
                    IteratorOp::Select | IteratorOp::Reject => r,
                    _ => Ty::Prim(Primitive::Boolean),
                }
            }
            Expr::Predef { receiver, args, .. } => {
                child(self, 0, receiver, env);
                for (i, a) in args.iter().enumerate() {
                    child(self, i + 1, a, env);
                }
                Ty::Prim(Primitive::String)
            }
        }
    }
}

fn compatible(feature_kind: FeatureKind, fty: &FeatureType, many: bool, value: &Ty) -> bool {
    let scalar_ok = |t: &Ty| match (feature_kind, fty, t) {
        (FeatureKind::Attribute, FeatureType::Primitive(p), Ty::Prim(q)) => p == q,
        (FeatureKind::Reference, _, Ty::Source(_) | Ty::Target(_)) => true,
        _ => false,
    };
    match value {
        Ty::Many(e) => many && scalar_ok(e),
        t => scalar_ok(t),
    }
}

/// Candidate edits grouped by operation kind and then by site; the edits of
/// one site differ only in their new value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValuePools {
    pub source_classes: Vec<String>,
    pub target_classes: Vec<String>,
    sites: Vec<(EditKind, Vec<Vec<EditOp>>)>,
    /// Per kind: every candidate with its parameter texts, for one-parameter mutation.
    flat: Vec<(EditKind, Vec<(EditOp, Vec<String>)>)>,
}

pub fn build_pools(t: &Transformation, src: &Metamodel, tgt: &Metamodel) -> ValuePools {
    let source_classes: Vec<String> = src.classes().iter().map(|c| c.name.clone()).collect();
    let target_classes: Vec<String> =
        tgt.classes().iter().filter(|c| !c.is_abstract).map(|c| c.name.clone()).collect();

    let mut literals = BTreeSet::new();
    for r in &t.rules {
        let mut roots: Vec<&Expr> = r.input.guard.iter().collect();
        roots.extend(r.outputs.iter().flat_map(|o| o.bindings.iter().map(|b| &b.expr)));
        for root in roots {
            root.walk(&mut |_, e| {
                if let Expr::Lit(l) = e {
                    literals.insert(l.clone());
                }
            });
        }
    }

    let mut by_kind: Vec<(EditKind, Vec<Vec<EditOp>>)> = EditKind::ALL.iter().map(|k| (*k, Vec::new())).collect();
    let mut push = |kind: EditKind, site: Vec<EditOp>| {
        if !site.is_empty() {
            by_kind.iter_mut().find(|(k, _)| *k == kind).unwrap().1.push(site);
        }
    };

    for rule in &t.rules {
        let rn = rule.name.clone();
        let in_class = rule.input.ty.class.clone();
        push(
            EditKind::SourceType,
            source_classes
                .iter()
                .filter(|c| **c != in_class)
                .map(|c| EditOp::SourceType { rule: rn.clone(), new: c.clone() })
                .collect(),
        );

        let mut fragments: Vec<(Expr, Ty)> = vec![(Expr::var(&rule.input.var), Ty::Source(in_class.clone()))];
        for f in src.all_features(&in_class) {
            fragments.push((Expr::var(&rule.input.var).nav(&f.name), Ty::of_feature(&f.ty, f.many, true)));
        }
        for o in &rule.outputs {
            fragments.push((Expr::var(&o.var), Ty::Target(o.ty.class.clone())));
        }
        for l in &literals {
            let ty = match l {
                Literal::Str(_) => Ty::Prim(Primitive::String),
                Literal::Bool(_) => Ty::Prim(Primitive::Boolean),
                Literal::Int(_) => Ty::Prim(Primitive::Integer),
            };
            fragments.push((Expr::Lit(l.clone()), ty));
        }

        let mut env: Vec<(String, Ty)> = vec![(rule.input.var.clone(), Ty::Source(in_class.clone()))];
        for o in &rule.outputs {
            env.push((o.var.clone(), Ty::Target(o.ty.class.clone())));
        }

        for o in &rule.outputs {
            let elem = o.var.clone();
            push(
                EditKind::TargetType,
                target_classes
                    .iter()
                    .filter(|c| **c != o.ty.class)
                    .map(|c| EditOp::TargetType { rule: rn.clone(), elem: elem.clone(), new: c.clone() })
                    .collect(),
            );
            let features = tgt.all_features(&o.ty.class);
            let unbound: Vec<&str> =
                features.iter().map(|f| f.name.as_str()).filter(|n| o.binding(n).is_none()).collect();
            for f in features.iter().filter(|f| o.binding(&f.name).is_none()) {
                push(
                    EditKind::CreateBinding,
                    fragments
                        .iter()
                        .filter(|(e, ty)| *e != Expr::var(&o.var) && compatible(f.kind, &f.ty, f.many, ty))
                        .map(|(e, _)| EditOp::CreateBinding {
                            rule: rn.clone(),
                            elem: elem.clone(),
                            target: f.name.clone(),
                            expr: e.clone(),
                        })
                        .collect(),
                );
            }
            for b in &o.bindings {
                push(
                    EditKind::DeleteBinding,
                    vec![EditOp::DeleteBinding { rule: rn.clone(), elem: elem.clone(), target: b.target.clone() }],
                );
                push(
                    EditKind::BindingTarget,
                    unbound
                        .iter()
                        .map(|n| EditOp::BindingTarget {
                            rule: rn.clone(),
                            elem: elem.clone(),
                            old: b.target.clone(),
                            new: n.to_string(),
                        })
                        .collect(),
                );
            }
        }

        let mut roots: Vec<(Locator, &Expr)> = Vec::new();
        if let Some(g) = &rule.input.guard {
            roots.push((Locator::guard(vec![]), g));
        }
        for (i, o) in rule.outputs.iter().enumerate() {
            for b in &o.bindings {
                roots.push((Locator::binding(i, &b.target, vec![]), &b.expr));
            }
        }
        for (root_loc, root) in roots {
            let at = |path: &[usize]| Locator { root: root_loc.root.clone(), path: path.to_vec() };
            let mut infer = Infer { src, navs: Vec::new() };
            infer.expr(root, &mut Vec::new(), &mut env.clone());
            let mut nodes: Vec<(Vec<usize>, Expr)> = Vec::new();
            root.walk(&mut |p, e| nodes.push((p.to_vec(), e.clone())));
            for (path, e) in nodes {
                let loc = at(&path);
                match e {
                    Expr::Collection { kind, .. } => push(
                        EditKind::CollectionType,
                        CollectionKind::ALL
                            .iter()
                            .filter(|k| **k != kind)
                            .map(|k| EditOp::CollectionType { rule: rn.clone(), loc: loc.clone(), new: *k })
                            .collect(),
                    ),
                    Expr::TypeTest { ty, .. } => {
                        let mm = if ty.metamodel == tgt.name() { tgt } else { src };
                        push(
                            EditKind::TypeArg,
                            mm.classes()
                                .iter()
                                .filter(|c| c.name != ty.class)
                                .map(|c| EditOp::TypeArg {
                                    rule: rn.clone(),
                                    loc: loc.clone(),
                                    new: ClassRef::new(mm.name(), &c.name),
                                })
                                .collect(),
                        )
                    }
                    Expr::Nav { feature, .. } => {
                        let Some((_, class)) = infer.navs.iter().find(|(p, _)| *p == path) else {
                            continue;
                        };
                        push(
                            EditKind::NavExpr,
                            src.all_features(class)
                                .iter()
                                .filter(|f| f.name != feature)
                                .map(|f| EditOp::NavExpr {
                                    rule: rn.clone(),
                                    loc: loc.clone(),
                                    old: feature.clone(),
                                    new: f.name.clone(),
                                })
                                .collect(),
                        )
                    }
                    Expr::Predef { op, args, .. } => push(
                        EditKind::PredefOpCall,
                        PredefOp::ALL
                            .iter()
                            .filter(|o| **o != op && o.arity() == args.len())
                            .map(|o| EditOp::PredefOpCall { rule: rn.clone(), loc: loc.clone(), new: *o })
                            .collect(),
                    ),
                    Expr::CollOp { op, args, .. } => push(
                        EditKind::CollOpCall,
                        CollOpName::ALL
                            .iter()
                            .filter(|o| **o != op && o.arity() == args.len())
                            .map(|o| EditOp::CollOpCall { rule: rn.clone(), loc: loc.clone(), new: *o })
                            .collect(),
                    ),
                    Expr::Iterate { op, .. } => push(
                        EditKind::IteratorCall,
                        IteratorOp::ALL
                            .iter()
                            .filter(|o| **o != op)
                            .map(|o| EditOp::IteratorCall { rule: rn.clone(), loc: loc.clone(), new: *o })
                            .collect(),
                    ),
                    _ => {}
                }
            }
        }
    }

    let flat = by_kind
        .iter()
        .map(|(k, sites)| {
            let all = sites
                .iter()
                .flatten()
                .map(|e| (e.clone(), e.params().into_iter().map(|(_, v)| v).collect()))
                .collect();
            (*k, all)
        })
        .collect();
    ValuePools { source_classes, target_classes, sites: by_kind, flat }
}

impl ValuePools {
    /// Sites of one kind; each site lists its alternative edits.
    pub fn sites(&self, kind: EditKind) -> &[Vec<EditOp>] {
        self.sites.iter().find(|(k, _)| *k == kind).map(|(_, s)| s.as_slice()).unwrap_or(&[])
    }

    pub fn candidates(&self, kind: EditKind) -> impl Iterator<Item = &EditOp> {
        self.sites(kind).iter().flatten()
    }

    /// Kinds with at least one candidate.
    pub fn applicable_kinds(&self) -> Vec<EditKind> {
        self.sites.iter().filter(|(_, s)| !s.is_empty()).map(|(k, _)| *k).collect()
    }

    /// Candidates of the same kind differing from `edit` in exactly one parameter.
    pub fn neighbours(&self, edit: &EditOp) -> Vec<&EditOp> {
        let mine: Vec<String> = edit.params().into_iter().map(|(_, v)| v).collect();
        let Some((_, all)) = self.flat.iter().find(|(k, _)| *k == edit.kind()) else {
            return Vec::new();
        };
        all.iter()
            .filter(|(_, params)| params.len() == mine.len() && params.iter().zip(&mine).filter(|(a, b)| a != b).count() == 1)
            .map(|(e, _)| e)
            .collect()
    }
}

/// Uniform over applicable kinds, then over that kind's sites, then over values.
pub fn random_edit<R: Rng + ?Sized>(rng: &mut R, pools: &ValuePools) -> Result<EditOp, ExhaustedPools> {
    let kinds = pools.applicable_kinds();
    let kind = kinds.choose(rng).ok_or(ExhaustedPools)?;
    let site = pools.sites(*kind).choose(rng).expect("applicable kinds have sites");
    Ok(site.choose(rng).expect("sites are non-empty").clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Class2Relational;
    use crate::edits::apply_patch;
    use crate::edits::Patch;
    use crate::mtl::parse_transformation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn faulty_program_collection_operation_sites() {
        let c = Class2Relational::load();
        let pools = build_pools(&c.faulty, &c.src, &c.tgt);
        let coll_op_locs: Vec<String> =
            pools.sites(EditKind::CollOpCall).iter().map(|s| s[0].params()[1].1.clone()).collect();
        assert_eq!(coll_op_locs, ["to.0.col"]);
        let iter_locs: Vec<String> =
            pools.sites(EditKind::IteratorCall).iter().map(|s| s[0].params()[1].1.clone()).collect();
        assert_eq!(iter_locs, ["to.0.col.1"]);
        for edit in Patch::parse(crate::corpus::REPAIR_PATCH).unwrap().edits {
            assert!(pools.candidates(edit.kind()).any(|e| *e == edit), "{edit}");
        }
    }

    #[test]
    fn every_kind_has_sites_on_the_faulty_program() {
        let c = Class2Relational::load();
        let pools = build_pools(&c.faulty, &c.src, &c.tgt);
        assert_eq!(pools.applicable_kinds(), EditKind::ALL);
    }

    #[test]
    fn empty_transformation_has_only_no_rule_sites() {
        let c = Class2Relational::load();
        let t = parse_transformation("create OUT : Relational from IN : Class;").unwrap();
        let pools = build_pools(&t, &c.src, &c.tgt);
        assert!(pools.applicable_kinds().is_empty());
        assert_eq!(random_edit(&mut ChaCha8Rng::seed_from_u64(1), &pools), Err(ExhaustedPools));
    }

    #[test]
    fn deterministic_pools() {
        let c = Class2Relational::load();
        assert_eq!(build_pools(&c.faulty, &c.src, &c.tgt), build_pools(&c.faulty, &c.src, &c.tgt));
    }

    #[test]
    fn single_candidate_is_certain() {
        let c = Class2Relational::load();
        let t = parse_transformation(
            "create OUT : Relational from IN : Class;
             rule R { from c : Class!Class to t : Relational!Table (name <- c.name, col <- Sequence{}, key <- Sequence{}) }",
        )
        .unwrap();
        let mut pools = build_pools(&t, &c.src, &c.tgt);
        pools.sites.retain(|(k, _)| *k == EditKind::CollectionType);
        pools.sites[0].1.truncate(1);
        pools.sites[0].1[0].truncate(1);
        let only = pools.sites[0].1[0][0].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            assert_eq!(random_edit(&mut rng, &pools).unwrap(), only);
        }
    }

    #[test]
    fn seeded_edit_is_reproducible() {
        let c = Class2Relational::load();
        let pools = build_pools(&c.faulty, &c.src, &c.tgt);
        let a = random_edit(&mut ChaCha8Rng::seed_from_u64(1), &pools).unwrap();
        let b = random_edit(&mut ChaCha8Rng::seed_from_u64(1), &pools).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), SEED_1_EDIT);
    }

    const SEED_1_EDIT: &str = "nav-expr rule=SingleValuedDataTypeAttribute2Column loc=to.0.name old=name new=multiValued";

    #[test]
    fn pool_edits_apply_on_the_original() {
        let c = Class2Relational::load();
        let pools = build_pools(&c.faulty, &c.src, &c.tgt);
        for kind in EditKind::ALL {
            for e in pools.candidates(kind) {
                let (_, flags) = apply_patch(&c.faulty, &Patch::new(vec![e.clone()]));
                assert_eq!(flags, [true], "{e}");
            }
        }
    }
}
