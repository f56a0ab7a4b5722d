//! Two-phase execution: match rules against source objects, then evaluate
//! bindings and resolve source objects to their trace targets.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use super::ast::*;
use crate::digest::fnv1a64;
use crate::model::{
    Feature, FeatureKind, FeatureType, Metamodel, Model, ModelObject, Primitive, SlotValue, Value,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjRef {
    Source(usize),
    Target(usize),
}

/// A runtime value. `Null` stands for OCL's undefined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RtValue {
    Null,
    Str(String),
    Bool(bool),
    Int(i64),
    Obj(ObjRef),
    Coll(CollectionKind, Vec<RtValue>),
}

impl RtValue {
    fn kind_name(&self) -> &'static str {
        match self {
            RtValue::Null => "undefined",
            RtValue::Str(_) => "String",
            RtValue::Bool(_) => "Boolean",
            RtValue::Int(_) => "Integer",
            RtValue::Obj(_) => "object",
            RtValue::Coll(..) => "collection",
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RuntimeError {
    #[error("class `{class}` has no feature `{feature}`")]
    UnknownFeature { class: String, feature: String },
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("`{op}` cannot be applied to {found}")]
    WrongKind { op: String, found: String },
    #[error("a collection cannot be assigned to single-valued feature `{0}`")]
    ListIntoScalar(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
}

fn wrong(op: impl Into<String>, v: &RtValue) -> RuntimeError {
    RuntimeError::WrongKind { op: op.into(), found: v.kind_name().to_string() }
}

/// Where and why an execution aborted.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub struct ExecutionFailure {
    pub rule: String,
    /// `from` for pattern matching, `guard`, or `<outputVar>.<feature>` for a binding.
    pub location: String,
    pub cause: RuntimeError,
}

impl fmt::Display for ExecutionFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {} at {}: {}", self.rule, self.location, self.cause)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceLink {
    pub source: String,
    pub rule: String,
    pub targets: Vec<String>,
}

struct TargetObj {
    id: String,
    class: String,
    slots: BTreeMap<String, SlotValue>,
}

/// Evaluation context shared by guards and bindings.
pub struct Context<'a> {
    src: &'a Model,
    src_mm: &'a Metamodel,
    tgt_mm: &'a Metamodel,
    targets: Vec<TargetObj>,
    /// source object index → first target of its first trace
    resolution: HashMap<usize, usize>,
}

impl<'a> Context<'a> {
    pub fn new(src: &'a Model, src_mm: &'a Metamodel, tgt_mm: &'a Metamodel) -> Self {
        Context { src, src_mm, tgt_mm, targets: Vec::new(), resolution: HashMap::new() }
    }

    fn object_class(&self, r: ObjRef) -> (&Metamodel, &str) {
        match r {
            ObjRef::Source(i) => (self.src_mm, &self.src.objects()[i].class),
            ObjRef::Target(i) => (self.tgt_mm, &self.targets[i].class),
        }
    }

    fn object_text(&self, r: ObjRef) -> String {
        match r {
            ObjRef::Source(i) => format!("@s:{}", self.src.objects()[i].id),
            ObjRef::Target(i) => format!("@t:{}", self.targets[i].id),
        }
    }

    fn canonical_text(&self, v: &RtValue) -> String {
        match v {
            RtValue::Null => "null".into(),
            RtValue::Str(s) => format!("s:{s}"),
            RtValue::Bool(b) => format!("b:{b}"),
            RtValue::Int(i) => format!("i:{i}"),
            RtValue::Obj(r) => self.object_text(*r),
            RtValue::Coll(k, items) => {
                let inner: Vec<String> = items.iter().map(|x| self.canonical_text(x)).collect();
                format!("{k}{{{}}}", inner.join(","))
            }
        }
    }

    /// Builds a collection of the given kind. Sets are deduplicated and
    /// iterate in digest order, like a hash set with a fixed hash function.
    fn make_coll(&self, kind: CollectionKind, items: Vec<RtValue>) -> RtValue {
        if kind != CollectionKind::Set {
            return RtValue::Coll(kind, items);
        }
        let mut seen = HashSet::new();
        let mut keyed: Vec<(u64, String, RtValue)> = Vec::new();
        for v in items {
            let text = self.canonical_text(&v);
            if seen.insert(text.clone()) {
                keyed.push((fnv1a64(text.as_bytes()), text, v));
            }
        }
        keyed.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
        RtValue::Coll(kind, keyed.into_iter().map(|(_, _, v)| v).collect())
    }

    fn from_slot(&self, v: &Value) -> RtValue {
        match v {
            Value::Str(s) => RtValue::Str(s.clone()),
            Value::Bool(b) => RtValue::Bool(*b),
            Value::Int(i) => RtValue::Int(*i),
            Value::Ref(id) => match self.src.position(id) {
                Some(i) => RtValue::Obj(ObjRef::Source(i)),
                None => RtValue::Null,
            },
        }
    }

    fn navigate(&self, recv: &RtValue, feature: &str) -> Result<RtValue, RuntimeError> {
        let RtValue::Obj(ObjRef::Source(i)) = recv else {
            return Err(wrong(format!(".{feature}"), recv));
        };
        let obj = &self.src.objects()[*i];
        let f = self.src_mm.feature(&obj.class, feature).ok_or_else(|| RuntimeError::UnknownFeature {
            class: obj.class.clone(),
            feature: feature.to_string(),
        })?;
        Ok(match (obj.slot(feature), f.many) {
            (None, false) => RtValue::Null,
            (None, true) => RtValue::Coll(coll_kind_for(f), Vec::new()),
            (Some(SlotValue::Single(v)), false) => self.from_slot(v),
            (Some(slot), _) => {
                let items = slot.values().iter().map(|v| self.from_slot(v)).collect();
                self.make_coll(coll_kind_for(f), items)
            }
        })
    }

    /// String rendering of an operand of `+`: objects render through their `name`.
    fn concat_operand(&self, v: &RtValue) -> Option<String> {
        match v {
            RtValue::Str(s) => Some(s.clone()),
            RtValue::Obj(ObjRef::Source(i)) => match self.src.objects()[*i].slot("name") {
                Some(SlotValue::Single(Value::Str(s))) => Some(s.clone()),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn eval(&self, e: &Expr, env: &mut Vec<(String, RtValue)>) -> Result<RtValue, RuntimeError> {
        match e {
            Expr::Var(name) => env
                .iter()
                .rev()
                .find(|(n, _)| n == name)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| RuntimeError::UnboundVariable(name.clone())),
            Expr::Lit(Literal::Str(s)) => Ok(RtValue::Str(s.clone())),
            Expr::Lit(Literal::Bool(b)) => Ok(RtValue::Bool(*b)),
            Expr::Lit(Literal::Int(i)) => Ok(RtValue::Int(*i)),
            Expr::Nav { receiver, feature } => {
                let r = self.eval(receiver, env)?;
                self.navigate(&r, feature)
            }
            Expr::Collection { kind, items } => {
                let vals = items.iter().map(|i| self.eval(i, env)).collect::<Result<Vec<_>, _>>()?;
                Ok(self.make_coll(*kind, vals))
            }
            Expr::Binary { op, lhs, rhs } => {
                let l = self.eval(lhs, env)?;
                let r = self.eval(rhs, env)?;
                self.binary(*op, l, r)
            }
            Expr::Not(inner) => match self.eval(inner, env)? {
                RtValue::Bool(b) => Ok(RtValue::Bool(!b)),
                other => Err(wrong("not", &other)),
            },
            Expr::TypeTest { receiver, op, ty } => {
                let r = self.eval(receiver, env)?;
                let mm = if ty.metamodel == self.src_mm.name() {
                    self.src_mm
                } else if ty.metamodel == self.tgt_mm.name() {
                    self.tgt_mm
                } else {
                    return Err(RuntimeError::UnknownClass(ty.to_string()));
                };
                if !mm.has_class(&ty.class) {
                    return Err(RuntimeError::UnknownClass(ty.to_string()));
                }
                let RtValue::Obj(o) = r else {
                    return Ok(RtValue::Bool(false));
                };
                let (omm, class) = self.object_class(o);
                if omm.name() != mm.name() {
                    return Ok(RtValue::Bool(false));
                }
                Ok(RtValue::Bool(match op {
                    TypeTestOp::KindOf => mm.conforms(class, &ty.class),
                    TypeTestOp::TypeOf => class == ty.class,
                }))
            }
            Expr::CollOp { receiver, op, args } => {
                let r = self.eval(receiver, env)?;
                let a = args.iter().map(|x| self.eval(x, env)).collect::<Result<Vec<_>, _>>()?;
                self.coll_op(*op, r, a)
            }
            Expr::Iterate { receiver, op, var, body } => {
                let r = self.eval(receiver, env)?;
                let RtValue::Coll(kind, items) = r else {
                    return Err(wrong(format!("->{op}"), &r));
                };
                let mut kept = Vec::new();
                let mut mapped = Vec::new();
                for item in items {
                    env.push((var.clone(), item.clone()));
                    let res = self.eval(body, env);
                    env.pop();
                    let res = res?;
                    if *op == IteratorOp::Collect {
                        mapped.push(res);
                        continue;
                    }
                    let RtValue::Bool(b) = res else {
                        return Err(wrong(format!("->{op} body"), &res));
                    };
                    match op {
                        IteratorOp::Select if b => kept.push(item),
                        IteratorOp::Reject if !b => kept.push(item),
                        IteratorOp::Exists if b => return Ok(RtValue::Bool(true)),
                        IteratorOp::ForAll if !b => return Ok(RtValue::Bool(false)),
                        _ => {}
                    }
                }
                Ok(match op {
                    IteratorOp::Select | IteratorOp::Reject => self.make_coll(kind, kept),
                    IteratorOp::Collect => {
                        let k = if kind == CollectionKind::Sequence { kind } else { CollectionKind::Bag };
                        RtValue::Coll(k, mapped)
                    }
                    IteratorOp::Exists => RtValue::Bool(false),
                    IteratorOp::ForAll => RtValue::Bool(true),
                })
            }
            Expr::Predef { receiver, op, args } => {
                let r = self.eval(receiver, env)?;
                if !args.is_empty() {
                    return Err(RuntimeError::WrongKind {
                        op: format!(".{op}"),
                        found: format!("{} argument(s)", args.len()),
                    });
                }
                let RtValue::Str(s) = r else {
                    return Err(wrong(format!(".{op}"), &r));
                };
                Ok(RtValue::Str(match op {
                    PredefOp::FirstToLower => map_first(&s, |c| c.to_lowercase().collect()),
                    PredefOp::FirstToUpper => map_first(&s, |c| c.to_uppercase().collect()),
                    PredefOp::ToLower => s.to_lowercase(),
                    PredefOp::ToUpper => s.to_uppercase(),
                }))
            }
        }
    }

    fn binary(&self, op: BinaryOp, l: RtValue, r: RtValue) -> Result<RtValue, RuntimeError> {
        match op {
            BinaryOp::Eq => Ok(RtValue::Bool(l == r)),
            BinaryOp::Ne => Ok(RtValue::Bool(l != r)),
            BinaryOp::And | BinaryOp::Or => match (&l, &r) {
                (RtValue::Bool(a), RtValue::Bool(b)) => {
                    Ok(RtValue::Bool(if op == BinaryOp::And { *a && *b } else { *a || *b }))
                }
                (RtValue::Bool(_), bad) | (bad, _) => Err(wrong(op.as_str(), bad)),
            },
            BinaryOp::Add => match (&l, &r) {
                (RtValue::Int(a), RtValue::Int(b)) => Ok(RtValue::Int(a.wrapping_add(*b))),
                _ if matches!(l, RtValue::Str(_)) || matches!(r, RtValue::Str(_)) => {
                    match (self.concat_operand(&l), self.concat_operand(&r)) {
                        (Some(a), Some(b)) => Ok(RtValue::Str(a + &b)),
                        (None, _) => Err(wrong("+", &l)),
                        (_, None) => Err(wrong("+", &r)),
                    }
                }
                _ => Err(wrong("+", &l)),
            },
        }
    }

    fn coll_op(&self, op: CollOpName, recv: RtValue, args: Vec<RtValue>) -> Result<RtValue, RuntimeError> {
        let name = format!("->{op}");
        let RtValue::Coll(kind, items) = recv else {
            return Err(wrong(name, &recv));
        };
        if args.len() != op.arity() {
            return Err(RuntimeError::WrongKind { op: name, found: format!("{} argument(s)", args.len()) });
        }
        let mut args = args.into_iter();
        Ok(match op {
            CollOpName::Union => match args.next().unwrap() {
                RtValue::Coll(_, more) => self.make_coll(kind, items.into_iter().chain(more).collect()),
                other => return Err(wrong(name, &other)),
            },
            CollOpName::Excluding => {
                let x = args.next().unwrap();
                RtValue::Coll(kind, items.into_iter().filter(|v| *v != x).collect())
            }
            CollOpName::Including => {
                let x = args.next().unwrap();
                let mut items = items;
                items.push(x);
                self.make_coll(kind, items)
            }
            CollOpName::First => items.into_iter().next().unwrap_or(RtValue::Null),
            CollOpName::Size => RtValue::Int(items.len() as i64),
            CollOpName::IsEmpty => RtValue::Bool(items.is_empty()),
            CollOpName::NotEmpty => RtValue::Bool(!items.is_empty()),
            CollOpName::Flatten => {
                let mut flat = Vec::new();
                flatten_into(items, &mut flat);
                self.make_coll(kind, flat)
            }
            CollOpName::AsSet => self.make_coll(CollectionKind::Set, items),
            CollOpName::AsSequence => RtValue::Coll(CollectionKind::Sequence, items),
        })
    }

    /// Source objects become the first target of their first trace; returns
    /// None when unresolvable. A reference feature cannot hold a primitive,
    /// so primitives are unresolvable there too.
    fn resolve(&self, f: &Feature, v: RtValue) -> Option<RtValue> {
        match v {
            RtValue::Null => None,
            RtValue::Obj(ObjRef::Source(i)) => self.resolution.get(&i).map(|&t| RtValue::Obj(ObjRef::Target(t))),
            RtValue::Str(_) | RtValue::Bool(_) | RtValue::Int(_) if f.kind == FeatureKind::Reference => None,
            other => Some(other),
        }
    }

    fn to_slot(&self, f: &Feature, v: RtValue) -> Result<Value, RuntimeError> {
        let ok = match (&f.kind, &f.ty, &v) {
            (FeatureKind::Attribute, FeatureType::Primitive(Primitive::String), RtValue::Str(_)) => true,
            (FeatureKind::Attribute, FeatureType::Primitive(Primitive::Boolean), RtValue::Bool(_)) => true,
            (FeatureKind::Attribute, FeatureType::Primitive(Primitive::Integer), RtValue::Int(_)) => true,
            (FeatureKind::Reference, _, RtValue::Obj(ObjRef::Target(_))) => true,
            _ => false,
        };
        if !ok {
            return Err(wrong(format!("assignment to `{}`", f.name), &v));
        }
        Ok(match v {
            RtValue::Str(s) => Value::Str(s),
            RtValue::Bool(b) => Value::Bool(b),
            RtValue::Int(i) => Value::Int(i),
            RtValue::Obj(ObjRef::Target(t)) => Value::Ref(self.targets[t].id.clone()),
            _ => unreachable!("checked above"),
        })
    }

    fn assign(&mut self, target: usize, f: &Feature, v: RtValue) -> Result<(), RuntimeError> {
        let slot = if f.many {
            let mut flat = Vec::new();
            match v {
                RtValue::Coll(_, items) => flatten_into(items, &mut flat),
                other => flat.push(other),
            }
            let mut vals = Vec::new();
            for item in flat {
                if let Some(resolved) = self.resolve(f, item) {
                    vals.push(self.to_slot(f, resolved)?);
                }
            }
            Some(SlotValue::Many(vals))
        } else {
            if matches!(v, RtValue::Coll(..)) {
                return Err(RuntimeError::ListIntoScalar(f.name.clone()));
            }
            match self.resolve(f, v) {
                Some(resolved) => Some(SlotValue::Single(self.to_slot(f, resolved)?)),
                None => None,
            }
        };
        match slot {
            Some(s) => {
                self.targets[target].slots.insert(f.name.clone(), s);
            }
            None => {
                self.targets[target].slots.remove(&f.name);
            }
        }
        Ok(())
    }
}

fn coll_kind_for(f: &Feature) -> CollectionKind {
    if f.ordered {
        CollectionKind::Sequence
    } else {
        CollectionKind::Bag
    }
}

fn flatten_into(items: Vec<RtValue>, out: &mut Vec<RtValue>) {
    for v in items {
        match v {
            RtValue::Coll(_, inner) => flatten_into(inner, out),
            other => out.push(other),
        }
    }
}

fn map_first(s: &str, f: impl Fn(char) -> String) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => f(c) + chars.as_str(),
        None => String::new(),
    }
}

pub fn execute(t: &Transformation, input: &Model, src: &Metamodel, tgt: &Metamodel) -> Result<Model, ExecutionFailure> {
    execute_traced(t, input, src, tgt).map(|(m, _)| m)
}

/// Like [`execute`], also returning the trace links in creation order.
pub fn execute_traced(
    t: &Transformation,
    input: &Model,
    src: &Metamodel,
    tgt: &Metamodel,
) -> Result<(Model, Vec<TraceLink>), ExecutionFailure> {
    let mut ctx = Context::new(input, src, tgt);
    let fail = |rule: &Rule, location: &str, cause| ExecutionFailure {
        rule: rule.name.clone(),
        location: location.to_string(),
        cause,
    };
    for rule in &t.rules {
        if !src.has_class(&rule.input.ty.class) || rule.input.ty.metamodel != src.name() {
            return Err(fail(rule, "from", RuntimeError::UnknownClass(rule.input.ty.to_string())));
        }
        for o in &rule.outputs {
            let abstract_class = tgt.class(&o.ty.class).is_none_or(|c| c.is_abstract);
            if abstract_class || o.ty.metamodel != tgt.name() {
                return Err(fail(rule, &o.var, RuntimeError::UnknownClass(o.ty.to_string())));
            }
        }
    }

    // Match phase.
    struct Matched<'r> {
        rule: &'r Rule,
        source: usize,
        first_target: usize,
    }
    let mut matched: Vec<Matched> = Vec::new();
    let mut traces = Vec::new();
    let mut env: Vec<(String, RtValue)> = Vec::new();
    for (si, obj) in input.objects().iter().enumerate() {
        for rule in &t.rules {
            if !src.conforms(&obj.class, &rule.input.ty.class) {
                continue;
            }
            if let Some(g) = &rule.input.guard {
                env.clear();
                env.push((rule.input.var.clone(), RtValue::Obj(ObjRef::Source(si))));
                match ctx.eval(g, &mut env) {
                    Ok(RtValue::Bool(true)) => {}
                    Ok(RtValue::Bool(false)) => continue,
                    Ok(other) => return Err(fail(rule, "guard", wrong("guard", &other))),
                    Err(e) => return Err(fail(rule, "guard", e)),
                }
            }
            let first_target = ctx.targets.len();
            let mut ids = Vec::new();
            for o in &rule.outputs {
                let id = format!("{}_{}_{}", rule.name, o.var, obj.id);
                ids.push(id.clone());
                ctx.targets.push(TargetObj { id, class: o.ty.class.clone(), slots: BTreeMap::new() });
            }
            ctx.resolution.entry(si).or_insert(first_target);
            traces.push(TraceLink { source: obj.id.clone(), rule: rule.name.clone(), targets: ids });
            matched.push(Matched { rule, source: si, first_target });
        }
    }

    // Apply phase.
    for m in &matched {
        env.clear();
        env.push((m.rule.input.var.clone(), RtValue::Obj(ObjRef::Source(m.source))));
        for (k, o) in m.rule.outputs.iter().enumerate() {
            env.push((o.var.clone(), RtValue::Obj(ObjRef::Target(m.first_target + k))));
        }
        for (k, o) in m.rule.outputs.iter().enumerate() {
            for b in &o.bindings {
                let location = format!("{}.{}", o.var, b.target);
                let Some(feature) = tgt.feature(&o.ty.class, &b.target).cloned() else {
                    return Err(fail(
                        m.rule,
                        &location,
                        RuntimeError::UnknownFeature { class: o.ty.class.clone(), feature: b.target.clone() },
                    ));
                };
                let v = ctx.eval(&b.expr, &mut env).map_err(|e| fail(m.rule, &location, e))?;
                ctx.assign(m.first_target + k, &feature, v).map_err(|e| fail(m.rule, &location, e))?;
            }
        }
    }

    let mut out = Model::new(format!("{}_out", input.name), tgt.name());
    for t in ctx.targets {
        out.push(ModelObject { id: t.id, class: t.class, slots: t.slots })
            .expect("generated ids are unique per (rule, output, source)");
    }
    Ok((out, traces))
}

/// Evaluates a closed expression, or one whose free variables are bound to
/// objects of `input` by id.
pub fn eval_expr(
    e: &Expr,
    bindings: &[(&str, &str)],
    input: &Model,
    src: &Metamodel,
    tgt: &Metamodel,
) -> Result<RtValue, RuntimeError> {
    let ctx = Context::new(input, src, tgt);
    let mut env = Vec::new();
    for (name, id) in bindings {
        let idx = input.position(id).ok_or_else(|| RuntimeError::UnboundVariable(name.to_string()))?;
        env.push((name.to_string(), RtValue::Obj(ObjRef::Source(idx))));
    }
    ctx.eval(e, &mut env)
}
