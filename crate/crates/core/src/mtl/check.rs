//! Static checking with a small type inference over declared feature types.
//! Only errors that are certain are reported; anything unknowable stays
//! `Unknown` and passes.

use std::fmt;

use super::ast::*;
use crate::model::{FeatureKind, FeatureType, Metamodel, Primitive};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct StaticViolation {
    /// Empty for header problems.
    pub rule: String,
    pub location: String,
    pub message: String,
}

impl fmt::Display for StaticViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rule.is_empty() {
            write!(f, "{}: {}", self.location, self.message)
        } else {
            write!(f, "rule {} at {}: {}", self.rule, self.location, self.message)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Source,
    Target,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum SType {
    Unknown,
    Str,
    Bool,
    Int,
    Obj(Side, String),
    Coll(Box<SType>),
}

impl SType {
    fn describe(&self) -> String {
        match self {
            SType::Unknown => "unknown".into(),
            SType::Str => "String".into(),
            SType::Bool => "Boolean".into(),
            SType::Int => "Integer".into(),
            SType::Obj(_, c) => format!("object of {c}"),
            SType::Coll(_) => "collection".into(),
        }
    }

    fn is_coll_or_unknown(&self) -> bool {
        matches!(self, SType::Coll(_) | SType::Unknown)
    }

    fn element(&self) -> SType {
        match self {
            SType::Coll(e) => (**e).clone(),
            _ => SType::Unknown,
        }
    }
}

struct Checker<'a> {
    src: &'a Metamodel,
    tgt: &'a Metamodel,
    rule: String,
    location: String,
    out: Vec<StaticViolation>,
}

impl<'a> Checker<'a> {
    fn report(&mut self, message: impl Into<String>) {
        self.out.push(StaticViolation {
            rule: self.rule.clone(),
            location: self.location.clone(),
            message: message.into(),
        });
    }

    fn mm(&self, side: Side) -> &'a Metamodel {
        match side {
            Side::Source => self.src,
            Side::Target => self.tgt,
        }
    }

    fn feature_type(&self, side: Side, ty: &FeatureType, many: bool) -> SType {
        let base = match ty {
            FeatureType::Primitive(Primitive::String) => SType::Str,
            FeatureType::Primitive(Primitive::Boolean) => SType::Bool,
            FeatureType::Primitive(Primitive::Integer) => SType::Int,
            FeatureType::Class(c) => SType::Obj(side, c.clone()),
        };
        if many {
            SType::Coll(Box::new(base))
        } else {
            base
        }
    }

    fn expr(&mut self, e: &Expr, env: &mut Vec<(String, SType)>) -> SType {
        match e {
            Expr::Var(name) => match env.iter().rev().find(|(n, _)| n == name) {
                Some((_, t)) => t.clone(),
                None => {
                    self.report(format!("unbound variable `{name}`"));
                    SType::Unknown
                }
            },
            Expr::Lit(Literal::Str(_)) => SType::Str,
            Expr::Lit(Literal::Bool(_)) => SType::Bool,
            Expr::Lit(Literal::Int(_)) => SType::Int,
            Expr::Nav { receiver, feature } => {
                let r = self.expr(receiver, env);
                match r {
                    SType::Unknown => SType::Unknown,
                    SType::Obj(Side::Target, c) => {
                        self.report(format!("cannot navigate `{feature}` on target element of {c}"));
                        SType::Unknown
                    }
                    SType::Obj(side, c) => self.navigate(side, &c, feature),
                    other => {
                        self.report(format!("cannot navigate `{feature}` on {}", other.describe()));
                        SType::Unknown
                    }
                }
            }
            Expr::Collection { items, .. } => {
                let mut elem: Option<SType> = None;
                for i in items {
                    let t = self.expr(i, env);
                    elem = Some(match elem {
                        None => t,
                        Some(prev) if prev == t => prev,
                        Some(_) => SType::Unknown,
                    });
                }
                SType::Coll(Box::new(elem.unwrap_or(SType::Unknown)))
            }
            Expr::Binary { op, lhs, rhs } => {
                let l = self.expr(lhs, env);
                let r = self.expr(rhs, env);
                match op {
                    BinaryOp::Eq | BinaryOp::Ne => SType::Bool,
                    BinaryOp::And | BinaryOp::Or => {
                        for t in [&l, &r] {
                            if !matches!(t, SType::Bool | SType::Unknown) {
                                self.report(format!("`{op}` applied to {}", t.describe()));
                            }
                        }
                        SType::Bool
                    }
                    BinaryOp::Add => match (&l, &r) {
                        (SType::Int, SType::Int) => SType::Int,
                        (SType::Unknown, _) | (_, SType::Unknown) => SType::Unknown,
                        _ if l == SType::Str || r == SType::Str => {
                            for t in [&l, &r] {
                                if !matches!(t, SType::Str | SType::Obj(Side::Source, _)) {
                                    self.report(format!("`+` applied to {}", t.describe()));
                                }
                            }
                            SType::Str
                        }
                        _ => {
                            self.report(format!("`+` applied to {} and {}", l.describe(), r.describe()));
                            SType::Unknown
                        }
                    },
                }
            }
            Expr::Not(inner) => {
                let t = self.expr(inner, env);
                if !matches!(t, SType::Bool | SType::Unknown) {
                    self.report(format!("`not` applied to {}", t.describe()));
                }
                SType::Bool
            }
            Expr::TypeTest { receiver, op, ty } => {
                self.expr(receiver, env);
                let known = [self.src, self.tgt].iter().any(|mm| mm.name() == ty.metamodel && mm.has_class(&ty.class));
                if !known {
                    self.report(format!("`{op}` argument {ty} is not a known class"));
                }
                SType::Bool
            }
            Expr::CollOp { receiver, op, args } => {
                let r = self.expr(receiver, env);
                let arg_types: Vec<SType> = args.iter().map(|a| self.expr(a, env)).collect();
                if !r.is_coll_or_unknown() {
                    self.report(format!("`->{op}` applied to {}", r.describe()));
                    return SType::Unknown;
                }
                if args.len() != op.arity() {
                    self.report(format!("`->{op}` expects {} argument(s), got {}", op.arity(), args.len()));
                    return SType::Unknown;
                }
                match op {
                    CollOpName::Union => {
                        if !arg_types[0].is_coll_or_unknown() {
                            self.report(format!("`->union` argument is {}", arg_types[0].describe()));
                        }
                        r
                    }
                    CollOpName::Excluding | CollOpName::Including | CollOpName::AsSet | CollOpName::AsSequence => r,
                    CollOpName::First => r.element(),
                    CollOpName::Size => SType::Int,
                    CollOpName::IsEmpty | CollOpName::NotEmpty => SType::Bool,
                    CollOpName::Flatten => match r.element() {
                        SType::Coll(inner) => SType::Coll(inner),
                        SType::Unknown => SType::Coll(Box::new(SType::Unknown)),
                        other => SType::Coll(Box::new(other)),
                    },
                }
            }
            Expr::Iterate { receiver, op, var, body } => {
                let r = self.expr(receiver, env);
                if !r.is_coll_or_unknown() {
                    self.report(format!("`->{op}` applied to {}", r.describe()));
                    return SType::Unknown;
                }
                env.push((var.clone(), r.element()));
                let b = self.expr(body, env);
                env.pop();
                match op {
                    IteratorOp::Collect => SType::Coll(Box::new(b)),
                    _ => {
                        if !matches!(b, SType::Bool | SType::Unknown) {
                            self.report(format!("`->{op}` body is {}", b.describe()));
                        }
                        if matches!(op, IteratorOp::Select | IteratorOp::Reject) {
                            if r == SType::Unknown { SType::Unknown } else { r }
                        } else {
                            SType::Bool
                        }
                    }
                }
            }
            Expr::Predef { receiver, op, args } => {
                let r = self.expr(receiver, env);
                for a in args {
                    self.expr(a, env);
                }
                if !matches!(r, SType::Str | SType::Unknown) {
                    self.report(format!("`.{op}()` applied to {}", r.describe()));
                    return SType::Unknown;
                }
                if args.len() != op.arity() {
                    self.report(format!("`.{op}()` expects {} argument(s), got {}", op.arity(), args.len()));
                }
                SType::Str
            }
        }
    }

    /// Accepts features of the class, its ancestors, or any descendant: a
    /// navigation guarded by a type test may legitimately reach a subclass feature.
    fn navigate(&mut self, side: Side, class: &str, feature: &str) -> SType {
        let mm = self.mm(side);
        if let Some(f) = mm.feature(class, feature) {
            return self.feature_type(side, &f.ty, f.many);
        }
        let found = mm.descendants(class).iter().find_map(|d| mm.feature(d, feature));
        match found {
            Some(f) => self.feature_type(side, &f.ty, f.many),
            None => {
                self.report(format!("class {class} has no feature `{feature}`"));
                SType::Unknown
            }
        }
    }

    fn binding(&mut self, class: &str, b: &Binding, env: &mut Vec<(String, SType)>) {
        let value = self.expr(&b.expr, env);
        let Some(f) = self.tgt.feature(class, &b.target) else {
            self.report(format!("class {class} has no feature `{}`", b.target));
            return;
        };
        if !f.many && matches!(value, SType::Coll(_)) {
            self.report(format!("collection assigned to single-valued `{}`", b.target));
            return;
        }
        let elem = if f.many { value.element_or_self() } else { value };
        let ok = match (&f.kind, &f.ty, &elem) {
            (_, _, SType::Unknown) => true,
            (FeatureKind::Attribute, FeatureType::Primitive(Primitive::String), t) => *t == SType::Str,
            (FeatureKind::Attribute, FeatureType::Primitive(Primitive::Boolean), t) => *t == SType::Bool,
            (FeatureKind::Attribute, FeatureType::Primitive(Primitive::Integer), t) => *t == SType::Int,
            (FeatureKind::Reference, _, t) => matches!(t, SType::Obj(..)),
            _ => true,
        };
        if !ok {
            self.report(format!("`{}` of type {} cannot hold {}", b.target, f.ty, elem.describe()));
        }
    }
}

impl SType {
    fn element_or_self(self) -> SType {
        match self {
            SType::Coll(e) => e.element_or_self(),
            other => other,
        }
    }
}

pub fn static_check(t: &Transformation, src: &Metamodel, tgt: &Metamodel) -> Vec<StaticViolation> {
    let mut c = Checker { src, tgt, rule: String::new(), location: "header".into(), out: Vec::new() };
    if t.source_mm != src.name() {
        c.report(format!("source metamodel is {}, expected {}", t.source_mm, src.name()));
    }
    if t.target_mm != tgt.name() {
        c.report(format!("target metamodel is {}, expected {}", t.target_mm, tgt.name()));
    }
    for rule in &t.rules {
        c.rule = rule.name.clone();
        c.location = "from".into();
        let input_ok = rule.input.ty.metamodel == src.name() && src.has_class(&rule.input.ty.class);
        if !input_ok {
            c.report(format!("input type {} is not a source class", rule.input.ty));
        }
        let input_ty = if input_ok {
            SType::Obj(Side::Source, rule.input.ty.class.clone())
        } else {
            SType::Unknown
        };
        let mut env = vec![(rule.input.var.clone(), input_ty)];
        if let Some(g) = &rule.input.guard {
            c.location = "guard".into();
            let gt = c.expr(g, &mut env);
            if !matches!(gt, SType::Bool | SType::Unknown) {
                c.report(format!("guard is {}", gt.describe()));
            }
        }
        let mut outputs_ok = Vec::new();
        for o in &rule.outputs {
            c.location = o.var.clone();
            let ok = o.ty.metamodel == tgt.name() && tgt.class(&o.ty.class).is_some_and(|k| !k.is_abstract);
            if !ok {
                c.report(format!("output type {} is not a concrete target class", o.ty));
            }
            outputs_ok.push(ok);
            let ty = if ok { SType::Obj(Side::Target, o.ty.class.clone()) } else { SType::Unknown };
            env.push((o.var.clone(), ty));
        }
        for (o, ok) in rule.outputs.iter().zip(outputs_ok) {
            let mut seen: Vec<&str> = Vec::new();
            for b in &o.bindings {
                c.location = format!("{}.{}", o.var, b.target);
                if seen.contains(&b.target.as_str()) {
                    c.report(format!("feature `{}` bound twice", b.target));
                }
                seen.push(&b.target);
                if ok {
                    c.binding(&o.ty.class, b, &mut env);
                } else {
                    c.expr(&b.expr, &mut env);
                }
            }
        }
    }
    c.out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Class2Relational;
    use crate::mtl::parse_transformation;

    fn check(body: &str) -> Vec<StaticViolation> {
        let c = Class2Relational::load();
        let t = parse_transformation(&format!("create OUT : Relational from IN : Class;\n{body}")).unwrap();
        static_check(&t, &c.src, &c.tgt)
    }

    #[test]
    fn corpus_programs_are_clean() {
        let c = Class2Relational::load();
        assert_eq!(static_check(&c.faulty, &c.src, &c.tgt), vec![]);
        assert_eq!(static_check(&c.correct, &c.src, &c.tgt), vec![]);
    }

    #[test]
    fn unknown_binding_target() {
        let v = check("rule R { from c : Class!Class to t : Relational!Table (cols <- Sequence{}) }");
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].location, "t.cols");
    }

    #[test]
    fn unknown_type_test_class() {
        let v = check("rule R { from a : Class!Attribute (a.type.oclIsKindOf(Class!NoSuch)) to t : Relational!Column (name <- a.name) }");
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].location, "guard");
    }

    #[test]
    fn kind_errors() {
        let bad = [
            "rule R { from c : Class!Class to t : Relational!Table (name <- c.name->size()) }",
            "rule R { from c : Class!Class to t : Relational!Table (name <- c.attr.firstToLower()) }",
            "rule R { from c : Class!Class to t : Relational!Table (name <- c.attr) }",
            "rule R { from c : Class!Class to t : Relational!Table (name <- c.nope) }",
            "rule R { from c : Class!Class (c.name) to t : Relational!Table }",
            "rule R { from c : Class!Nope to t : Relational!Table }",
            "rule R { from c : Class!Class to t : Relational!Named }",
            "rule R { from c : Class!Class to t : Relational!Table (name <- x) }",
            "rule R { from c : Class!Class to t : Relational!Table (col <- Sequence{c.name}) }",
        ];
        for b in bad {
            assert_eq!(check(b).len(), 1, "{b}: {:?}", check(b));
        }
    }

    #[test]
    fn downcast_navigation_is_lenient() {
        let v = check("rule R { from a : Class!Attribute to t : Relational!Table (name <- a.type.name, col <- a.type.attr->collect(x | x)) }");
        assert_eq!(v, vec![]);
    }
}
