use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

/// `MM!Class`: a class qualified by the metamodel alias it belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassRef {
    pub metamodel: String,
    pub class: String,
}

impl ClassRef {
    pub fn new(metamodel: impl Into<String>, class: impl Into<String>) -> Self {
        ClassRef { metamodel: metamodel.into(), class: class.into() }
    }
}

impl fmt::Display for ClassRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}!{}", self.metamodel, self.class)
    }
}

macro_rules! keyword_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }

            pub fn from_name(s: &str) -> Option<Self> {
                match s { $($text => Some($name::$variant),)+ _ => None }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

keyword_enum!(CollectionKind { Sequence => "Sequence", Set => "Set", Bag => "Bag" });

keyword_enum!(BinaryOp { Add => "+", And => "and", Or => "or", Eq => "=", Ne => "<>" });

keyword_enum!(TypeTestOp { KindOf => "oclIsKindOf", TypeOf => "oclIsTypeOf" });

keyword_enum!(
    /// Operations called with `->` on a collection.
    CollOpName {
        Union => "union",
        Excluding => "excluding",
        Including => "including",
        First => "first",
        Size => "size",
        IsEmpty => "isEmpty",
        NotEmpty => "notEmpty",
        Flatten => "flatten",
        AsSet => "asSet",
        AsSequence => "asSequence",
    }
);

impl CollOpName {
    pub fn arity(self) -> usize {
        match self {
            CollOpName::Union | CollOpName::Excluding | CollOpName::Including => 1,
            _ => 0,
        }
    }
}

keyword_enum!(IteratorOp {
    Select => "select",
    Reject => "reject",
    Collect => "collect",
    Exists => "exists",
    ForAll => "forAll",
});

keyword_enum!(
    /// String operations called with `.`.
    PredefOp {
        FirstToLower => "firstToLower",
        FirstToUpper => "firstToUpper",
        ToLower => "toLower",
        ToUpper => "toUpper",
    }
);

impl PredefOp {
    pub fn arity(self) -> usize {
        0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    Str(String),
    Bool(bool),
    Int(i64),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Var(String),
    Lit(Literal),
    Nav { receiver: Box<Expr>, feature: String },
    Collection { kind: CollectionKind, items: Vec<Expr> },
    Binary { op: BinaryOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Not(Box<Expr>),
    TypeTest { receiver: Box<Expr>, op: TypeTestOp, ty: ClassRef },
    CollOp { receiver: Box<Expr>, op: CollOpName, args: Vec<Expr> },
    Iterate { receiver: Box<Expr>, op: IteratorOp, var: String, body: Box<Expr> },
    Predef { receiver: Box<Expr>, op: PredefOp, args: Vec<Expr> },
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn str(s: &str) -> Expr {
        Expr::Lit(Literal::Str(s.to_string()))
    }

    pub fn nav(self, feature: &str) -> Expr {
        Expr::Nav { receiver: Box::new(self), feature: feature.to_string() }
    }

    /// Children in locator order: receiver first, then arguments, items, or body.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Var(_) | Expr::Lit(_) => vec![],
            Expr::Nav { receiver, .. } | Expr::TypeTest { receiver, .. } => vec![receiver],
            Expr::Collection { items, .. } => items.iter().collect(),
            Expr::Binary { lhs, rhs, .. } => vec![lhs, rhs],
            Expr::Not(inner) => vec![inner],
            Expr::CollOp { receiver, args, .. } | Expr::Predef { receiver, args, .. } => {
                std::iter::once(receiver.as_ref()).chain(args.iter()).collect()
            }
            Expr::Iterate { receiver, body, .. } => vec![receiver, body],
        }
    }

    pub fn child_mut(&mut self, idx: usize) -> Option<&mut Expr> {
        match self {
            Expr::Var(_) | Expr::Lit(_) => None,
            Expr::Nav { receiver, .. } | Expr::TypeTest { receiver, .. } => (idx == 0).then_some(receiver.as_mut()),
            Expr::Collection { items, .. } => items.get_mut(idx),
            Expr::Binary { lhs, rhs, .. } => match idx {
                0 => Some(lhs),
                1 => Some(rhs),
                _ => None,
            },
            Expr::Not(inner) => (idx == 0).then_some(inner.as_mut()),
            Expr::CollOp { receiver, args, .. } | Expr::Predef { receiver, args, .. } => {
                if idx == 0 {
                    Some(receiver)
                } else {
                    args.get_mut(idx - 1)
                }
            }
            Expr::Iterate { receiver, body, .. } => match idx {
                0 => Some(receiver),
                1 => Some(body),
                _ => None,
            },
        }
    }

    pub fn at_path(&self, path: &[usize]) -> Option<&Expr> {
        let mut e = self;
        for &i in path {
            e = *e.children().get(i)?;
        }
        Some(e)
    }

    pub fn at_path_mut(&mut self, path: &[usize]) -> Option<&mut Expr> {
        let mut e = self;
        for &i in path {
            e = e.child_mut(i)?;
        }
        Some(e)
    }

    /// Pre-order walk yielding each node with its child-index path.
    pub fn walk(&self, f: &mut dyn FnMut(&[usize], &Expr)) {
        fn go(e: &Expr, path: &mut Vec<usize>, f: &mut dyn FnMut(&[usize], &Expr)) {
            f(path, e);
            for (i, c) in e.children().into_iter().enumerate() {
                path.push(i);
                go(c, path, f);
                path.pop();
            }
        }
        go(self, &mut Vec::new(), f);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Binding {
    pub target: String,
    pub expr: Expr,
}

#[derive(Debug, Clone)]
pub struct OutputElement {
    pub var: String,
    pub ty: ClassRef,
    pub bindings: Vec<Binding>,
}

impl OutputElement {
    pub fn binding(&self, target: &str) -> Option<&Binding> {
        self.bindings.iter().find(|b| b.target == target)
    }

    pub fn binding_mut(&mut self, target: &str) -> Option<&mut Binding> {
        self.bindings.iter_mut().find(|b| b.target == target)
    }

    fn keyed(&self) -> BTreeMap<&str, &Expr> {
        self.bindings.iter().map(|b| (b.target.as_str(), &b.expr)).collect()
    }
}

// Bindings assign distinct features, so their order carries no meaning:
// equality and hashing treat them as a map keyed by target feature.
impl PartialEq for OutputElement {
    fn eq(&self, other: &Self) -> bool {
        self.var == other.var
            && self.ty == other.ty
            && self.bindings.len() == other.bindings.len()
            && self.keyed() == other.keyed()
    }
}

impl Eq for OutputElement {}

impl Hash for OutputElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.var.hash(state);
        self.ty.hash(state);
        self.bindings.len().hash(state);
        for (k, v) in self.keyed() {
            k.hash(state);
            v.hash(state);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InputPattern {
    pub var: String,
    pub ty: ClassRef,
    pub guard: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub name: String,
    pub input: InputPattern,
    pub outputs: Vec<OutputElement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transformation {
    pub name: String,
    /// Alias of the target model in the `create` header (`OUT` in ATL).
    pub target_alias: String,
    pub target_mm: String,
    pub source_alias: String,
    pub source_mm: String,
    pub rules: Vec<Rule>,
}

impl Transformation {
    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }

    pub fn rule_mut(&mut self, name: &str) -> Option<&mut Rule> {
        self.rules.iter_mut().find(|r| r.name == name)
    }
}
