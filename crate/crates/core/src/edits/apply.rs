use super::ops::{EditOp, LocRoot, Locator, Patch};
use crate::mtl::{Binding, Expr, Rule, Transformation};

fn node_mut<'r>(rule: &'r mut Rule, loc: &Locator) -> Option<&'r mut Expr> {
    let root = match &loc.root {
        LocRoot::Guard => rule.input.guard.as_mut()?,
        LocRoot::Binding { elem, target } => &mut rule.outputs.get_mut(*elem)?.binding_mut(target)?.expr,
    };
    root.at_path_mut(&loc.path)
}

/// Applies one edit in place. Returns false, leaving `t` untouched, when the
/// edit's rule, element, binding or locator no longer resolves.
pub fn apply_edit(t: &mut Transformation, edit: &EditOp) -> bool {
    let Some(rule) = t.rule_mut(edit.rule()) else {
        return false;
    };
    match edit {
        EditOp::CreateBinding { elem, target, expr, .. } => {
            let Some(o) = rule.outputs.iter_mut().find(|o| &o.var == elem) else {
                return false;
            };
            if o.binding(target).is_some() {
                return false;
            }
            o.bindings.push(Binding { target: target.clone(), expr: expr.clone() });
            true
        }
        EditOp::DeleteBinding { elem, target, .. } => {
            let Some(o) = rule.outputs.iter_mut().find(|o| &o.var == elem) else {
                return false;
            };
            let before = o.bindings.len();
            o.bindings.retain(|b| &b.target != target);
            o.bindings.len() != before
        }
        EditOp::SourceType { new, .. } => {
            rule.input.ty.class = new.clone();
            true
        }
        EditOp::TargetType { elem, new, .. } => match rule.outputs.iter_mut().find(|o| &o.var == elem) {
            Some(o) => {
                o.ty.class = new.clone();
                true
            }
            None => false,
        },
        EditOp::CollectionType { loc, new, .. } => match node_mut(rule, loc) {
            Some(Expr::Collection { kind, .. }) => {
                *kind = *new;
                true
            }
            _ => false,
        },
        EditOp::TypeArg { loc, new, .. } => match node_mut(rule, loc) {
            Some(Expr::TypeTest { ty, .. }) => {
                *ty = new.clone();
                true
            }
            _ => false,
        },
        EditOp::NavExpr { loc, old, new, .. } => match node_mut(rule, loc) {
            Some(Expr::Nav { feature, .. }) if feature == old => {
                *feature = new.clone();
                true
            }
            _ => false,
        },
        EditOp::BindingTarget { elem, old, new, .. } => {
            let Some(o) = rule.outputs.iter_mut().find(|o| &o.var == elem) else {
                return false;
            };
            if new != old && o.binding(new).is_some() {
                return false;
            }
            match o.binding_mut(old) {
                Some(b) => {
                    b.target = new.clone();
                    true
                }
                None => false,
            }
        }
        EditOp::PredefOpCall { loc, new, .. } => match node_mut(rule, loc) {
            Some(Expr::Predef { op, args, .. }) if args.len() == new.arity() => {
                *op = *new;
                true
            }
            _ => false,
        },
        EditOp::CollOpCall { loc, new, .. } => match node_mut(rule, loc) {
            Some(Expr::CollOp { op, args, .. }) if args.len() == new.arity() => {
                *op = *new;
                true
            }
            _ => false,
        },
        EditOp::IteratorCall { loc, new, .. } => match node_mut(rule, loc) {
            Some(Expr::Iterate { op, .. }) => {
                *op = *new;
                true
            }
            _ => false,
        },
    }
}

/// Applies the edits left to right on a copy of `t`; the flags say which
/// edits resolved.
pub fn apply_patch(t: &Transformation, p: &Patch) -> (Transformation, Vec<bool>) {
    let mut out = t.clone();
    let flags = p.edits.iter().map(|e| apply_edit(&mut out, e)).collect();
    (out, flags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Class2Relational, REPAIR_PATCH};
    use crate::mtl::pretty_print;

    #[test]
    fn repair_patch_yields_corrected_program() {
        let c = Class2Relational::load();
        let before = pretty_print(&c.faulty);
        let (fixed, flags) = apply_patch(&c.faulty, &Patch::parse(REPAIR_PATCH).unwrap());
        assert_eq!(flags, [true, true, true]);
        assert_eq!(fixed, c.correct);
        assert_eq!(pretty_print(&c.faulty), before);
    }

    #[test]
    fn empty_patch_is_identity() {
        let c = Class2Relational::load();
        let (t, flags) = apply_patch(&c.faulty, &Patch::default());
        assert_eq!(t, c.faulty);
        assert!(flags.is_empty());
    }

    #[test]
    fn deleting_twice() {
        let c = Class2Relational::load();
        let del = "delete-binding rule=Class2Table elem=out target=key".parse::<EditOp>().unwrap();
        let (once, _) = apply_patch(&c.faulty, &Patch::new(vec![del.clone()]));
        let (twice, flags) = apply_patch(&c.faulty, &Patch::new(vec![del.clone(), del]));
        assert_eq!(flags, [true, false]);
        assert_eq!(once, twice);
    }

    #[test]
    fn stale_targets_are_no_ops() {
        let c = Class2Relational::load();
        let p = Patch::parse(
            "nav-expr rule=MultiValuedClassAttribute2Column loc=to.2.name.0 old=owner new=name\n\
             coll-op-call rule=Class2Table loc=to.0.col new=first\n\
             binding-target rule=Class2Table elem=out old=col new=key\n\
             iterator-call rule=Nope loc=from new=select\n\
             type-arg rule=Class2Table loc=from new=Class!Class\n\
             binding-target rule=Class2Table elem=out old=key new=key\n",
        )
        .unwrap();
        let (t, flags) = apply_patch(&c.faulty, &p);
        assert_eq!(flags, [false, false, false, false, false, true]);
        assert_eq!(t, c.faulty);
    }
}
