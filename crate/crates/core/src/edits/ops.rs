use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::mtl::{expr_to_string, parse_expr, ClassRef, CollOpName, CollectionKind, Expr, IteratorOp, PredefOp};

/// Root of a locator: the guard of the input pattern, or the right-hand side
/// of a binding of the output element at `elem` (by position).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LocRoot {
    Guard,
    Binding { elem: usize, target: String },
}

/// Path of child indices from a rule's expression root to one expression node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Locator {
    pub root: LocRoot,
    pub path: Vec<usize>,
}

impl Locator {
    pub fn guard(path: Vec<usize>) -> Self {
        Locator { root: LocRoot::Guard, path }
    }

    pub fn binding(elem: usize, target: &str, path: Vec<usize>) -> Self {
        Locator { root: LocRoot::Binding { elem, target: target.to_string() }, path }
    }
}

impl fmt::Display for Locator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.root {
            LocRoot::Guard => f.write_str("from")?,
            LocRoot::Binding { elem, target } => write!(f, "to.{elem}.{target}")?,
        }
        for i in &self.path {
            write!(f, ".{i}")?;
        }
        Ok(())
    }
}

impl FromStr for Locator {
    type Err = PatchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PatchError::BadValue { param: "loc".into(), value: s.to_string() };
        let mut parts = s.split('.');
        let root = match parts.next() {
            Some("from") => LocRoot::Guard,
            Some("to") => {
                let elem = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
                let target = parts.next().filter(|t| is_ident(t)).ok_or_else(bad)?;
                LocRoot::Binding { elem, target: target.to_string() }
            }
            _ => return Err(bad()),
        };
        let path = parts.map(|p| p.parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
        Ok(Locator { root, path })
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// The eleven atomic edit operations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EditOp {
    CreateBinding { rule: String, elem: String, target: String, expr: Expr },
    DeleteBinding { rule: String, elem: String, target: String },
    SourceType { rule: String, new: String },
    TargetType { rule: String, elem: String, new: String },
    CollectionType { rule: String, loc: Locator, new: CollectionKind },
    TypeArg { rule: String, loc: Locator, new: ClassRef },
    NavExpr { rule: String, loc: Locator, old: String, new: String },
    BindingTarget { rule: String, elem: String, old: String, new: String },
    PredefOpCall { rule: String, loc: Locator, new: PredefOp },
    CollOpCall { rule: String, loc: Locator, new: CollOpName },
    IteratorCall { rule: String, loc: Locator, new: IteratorOp },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EditKind {
    CreateBinding,
    DeleteBinding,
    SourceType,
    TargetType,
    CollectionType,
    TypeArg,
    NavExpr,
    BindingTarget,
    PredefOpCall,
    CollOpCall,
    IteratorCall,
}

impl EditKind {
    pub const ALL: [EditKind; 11] = [
        EditKind::CreateBinding,
        EditKind::DeleteBinding,
        EditKind::SourceType,
        EditKind::TargetType,
        EditKind::CollectionType,
        EditKind::TypeArg,
        EditKind::NavExpr,
        EditKind::BindingTarget,
        EditKind::PredefOpCall,
        EditKind::CollOpCall,
        EditKind::IteratorCall,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            EditKind::CreateBinding => "create-binding",
            EditKind::DeleteBinding => "delete-binding",
            EditKind::SourceType => "source-type",
            EditKind::TargetType => "target-type",
            EditKind::CollectionType => "collection-type",
            EditKind::TypeArg => "type-arg",
            EditKind::NavExpr => "nav-expr",
            EditKind::BindingTarget => "binding-target",
            EditKind::PredefOpCall => "predef-op-call",
            EditKind::CollOpCall => "coll-op-call",
            EditKind::IteratorCall => "iterator-call",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }
}

impl EditOp {
    pub fn kind(&self) -> EditKind {
        match self {
            EditOp::CreateBinding { .. } => EditKind::CreateBinding,
            EditOp::DeleteBinding { .. } => EditKind::DeleteBinding,
            EditOp::SourceType { .. } => EditKind::SourceType,
            EditOp::TargetType { .. } => EditKind::TargetType,
            EditOp::CollectionType { .. } => EditKind::CollectionType,
            EditOp::TypeArg { .. } => EditKind::TypeArg,
            EditOp::NavExpr { .. } => EditKind::NavExpr,
            EditOp::BindingTarget { .. } => EditKind::BindingTarget,
            EditOp::PredefOpCall { .. } => EditKind::PredefOpCall,
            EditOp::CollOpCall { .. } => EditKind::CollOpCall,
            EditOp::IteratorCall { .. } => EditKind::IteratorCall,
        }
    }

    pub fn rule(&self) -> &str {
        match self {
            EditOp::CreateBinding { rule, .. }
            | EditOp::DeleteBinding { rule, .. }
            | EditOp::SourceType { rule, .. }
            | EditOp::TargetType { rule, .. }
            | EditOp::CollectionType { rule, .. }
            | EditOp::TypeArg { rule, .. }
            | EditOp::NavExpr { rule, .. }
            | EditOp::BindingTarget { rule, .. }
            | EditOp::PredefOpCall { rule, .. }
            | EditOp::CollOpCall { rule, .. }
            | EditOp::IteratorCall { rule, .. } => rule,
        }
    }

    /// Parameters as `(name, text)` pairs, in their textual order.
    pub fn params(&self) -> Vec<(&'static str, String)> {
        let r = |rule: &String| ("rule", rule.clone());
        match self {
            EditOp::CreateBinding { rule, elem, target, expr } => vec![
                r(rule),
                ("elem", elem.clone()),
                ("target", target.clone()),
                ("expr", expr_to_string(expr)),
            ],
            EditOp::DeleteBinding { rule, elem, target } => {
                vec![r(rule), ("elem", elem.clone()), ("target", target.clone())]
            }
            EditOp::SourceType { rule, new } => vec![r(rule), ("new", new.clone())],
            EditOp::TargetType { rule, elem, new } => vec![r(rule), ("elem", elem.clone()), ("new", new.clone())],
            EditOp::CollectionType { rule, loc, new } => vec![r(rule), ("loc", loc.to_string()), ("new", new.to_string())],
            EditOp::TypeArg { rule, loc, new } => vec![r(rule), ("loc", loc.to_string()), ("new", new.to_string())],
            EditOp::NavExpr { rule, loc, old, new } => {
                vec![r(rule), ("loc", loc.to_string()), ("old", old.clone()), ("new", new.clone())]
            }
            EditOp::BindingTarget { rule, elem, old, new } => {
                vec![r(rule), ("elem", elem.clone()), ("old", old.clone()), ("new", new.clone())]
            }
            EditOp::PredefOpCall { rule, loc, new } => vec![r(rule), ("loc", loc.to_string()), ("new", new.to_string())],
            EditOp::CollOpCall { rule, loc, new } => vec![r(rule), ("loc", loc.to_string()), ("new", new.to_string())],
            EditOp::IteratorCall { rule, loc, new } => vec![r(rule), ("loc", loc.to_string()), ("new", new.to_string())],
        }
    }
}

fn needs_quotes(v: &str) -> bool {
    v.is_empty() || v.chars().any(|c| c.is_whitespace() || c == '"' || c == '=' || c == '\\')
}

fn quote(v: &str) -> String {
    if !needs_quotes(v) {
        return v.to_string();
    }
    let mut out = String::from("\"");
    for c in v.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

impl fmt::Display for EditOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind().tag())?;
        for (k, v) in self.params() {
            write!(f, " {k}={}", quote(&v))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PatchError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown edit operation `{0}`")]
    UnknownTag(String),
    #[error("missing parameter `{0}`")]
    MissingParam(String),
    #[error("unexpected parameter `{0}`")]
    UnexpectedParam(String),
    #[error("invalid value for `{param}`: {value}")]
    BadValue { param: String, value: String },
}

fn split_fields(line: &str) -> Result<Vec<String>, String> {
    let mut fields = Vec::new();
    let mut chars = line.chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        if chars.peek().is_none() {
            return Ok(fields);
        }
        let mut field = String::new();
        while let Some(&c) = chars.peek() {
            if c.is_whitespace() {
                break;
            }
            chars.next();
            if c != '"' {
                field.push(c);
                continue;
            }
            loop {
                match chars.next() {
                    None => return Err("unterminated quoted value".into()),
                    Some('"') => break,
                    Some('\\') => match chars.next() {
                        Some('n') => field.push('\n'),
                        Some('t') => field.push('\t'),
                        Some(c) => field.push(c),
                        None => return Err("dangling escape".into()),
                    },
                    Some(c) => field.push(c),
                }
            }
        }
        fields.push(field);
    }
}

fn parse_class_ref(v: &str) -> Option<ClassRef> {
    let (mm, class) = v.split_once('!')?;
    (is_ident(mm) && is_ident(class)).then(|| ClassRef::new(mm, class))
}

impl FromStr for EditOp {
    type Err = PatchError;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let fields = split_fields(line).map_err(|m| PatchError::Syntax { line: 1, message: m })?;
        let (tag, rest) = fields.split_first().ok_or(PatchError::Syntax { line: 1, message: "empty edit".into() })?;
        let kind = EditKind::from_tag(tag).ok_or_else(|| PatchError::UnknownTag(tag.clone()))?;
        let mut params: Vec<(String, String)> = Vec::new();
        for f in rest {
            let (k, v) = f.split_once('=').ok_or_else(|| PatchError::Syntax {
                line: 1,
                message: format!("expected key=value, found `{f}`"),
            })?;
            params.push((k.to_string(), v.to_string()));
        }
        let mut take = |name: &str| -> Result<String, PatchError> {
            let i = params.iter().position(|(k, _)| k == name).ok_or_else(|| PatchError::MissingParam(name.into()))?;
            Ok(params.remove(i).1)
        };
        let bad = |param: &str, value: &str| PatchError::BadValue { param: param.into(), value: value.into() };
        let rule = take("rule")?;
        let op = match kind {
            EditKind::CreateBinding => {
                let elem = take("elem")?;
                let target = take("target")?;
                let text = take("expr")?;
                let expr = parse_expr(&text).map_err(|_| bad("expr", &text))?;
                EditOp::CreateBinding { rule, elem, target, expr }
            }
            EditKind::DeleteBinding => EditOp::DeleteBinding { rule, elem: take("elem")?, target: take("target")? },
            EditKind::SourceType => EditOp::SourceType { rule, new: take("new")? },
            EditKind::TargetType => EditOp::TargetType { rule, elem: take("elem")?, new: take("new")? },
            EditKind::CollectionType => {
                let loc = take("loc")?.parse()?;
                let v = take("new")?;
                let new = CollectionKind::from_name(&v).ok_or_else(|| bad("new", &v))?;
                EditOp::CollectionType { rule, loc, new }
            }
            EditKind::TypeArg => {
                let loc = take("loc")?.parse()?;
                let v = take("new")?;
                let new = parse_class_ref(&v).ok_or_else(|| bad("new", &v))?;
                EditOp::TypeArg { rule, loc, new }
            }
            EditKind::NavExpr => {
                let loc = take("loc")?.parse()?;
                EditOp::NavExpr { rule, loc, old: take("old")?, new: take("new")? }
            }
            EditKind::BindingTarget => {
                EditOp::BindingTarget { rule, elem: take("elem")?, old: take("old")?, new: take("new")? }
            }
            EditKind::PredefOpCall => {
                let loc = take("loc")?.parse()?;
                let v = take("new")?;
                let new = PredefOp::from_name(&v).ok_or_else(|| bad("new", &v))?;
                EditOp::PredefOpCall { rule, loc, new }
            }
            EditKind::CollOpCall => {
                let loc = take("loc")?.parse()?;
                let v = take("new")?;
                let new = CollOpName::from_name(&v).ok_or_else(|| bad("new", &v))?;
                EditOp::CollOpCall { rule, loc, new }
            }
            EditKind::IteratorCall => {
                let loc = take("loc")?.parse()?;
                let v = take("new")?;
                let new = IteratorOp::from_name(&v).ok_or_else(|| bad("new", &v))?;
                EditOp::IteratorCall { rule, loc, new }
            }
        };
        if let Some((k, _)) = params.first() {
            return Err(PatchError::UnexpectedParam(k.clone()));
        }
        Ok(op)
    }
}

/// An ordered sequence of edits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Patch {
    pub edits: Vec<EditOp>,
}

impl Patch {
    pub fn new(edits: Vec<EditOp>) -> Self {
        Patch { edits }
    }

    pub fn len(&self) -> usize {
        self.edits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edits.is_empty()
    }

    /// One edit per line, each terminated by a newline.
    pub fn to_text(&self) -> String {
        self.edits.iter().map(|e| format!("{e}\n")).collect()
    }

    /// Parses the line format; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Patch, PatchError> {
        let mut edits = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let edit = trimmed.parse::<EditOp>().map_err(|e| match e {
                PatchError::Syntax { message, .. } => PatchError::Syntax { line: i + 1, message },
                other => PatchError::Syntax { line: i + 1, message: other.to_string() },
            })?;
            edits.push(edit);
        }
        Ok(Patch { edits })
    }
}

impl fmt::Display for Patch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
