//! Metamodels and models as typed object graphs.
//!
//! Both come with a line-oriented text format. A metamodel looks like
//!
//! ```text
//! metamodel Relational
//! class Named abstract { attr name: String; }
//! class Table extends Named { ref col: Column * ordered containment; ref key: Column *; }
//! class Column extends Named { }
//! ```
//!
//! and a model conforming to it like
//!
//! ```text
//! model schema conforms Relational
//! t1: Table { name = "Family"; col = [c1]; }
//! c1: Column { name = "FamilyId"; }
//! ```

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::lexer::{tokenize, Cursor, LexError, LexOptions, Tok};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Primitive {
    String,
    Boolean,
    Integer,
}

impl Primitive {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "String" => Some(Primitive::String),
            "Boolean" => Some(Primitive::Boolean),
            "Integer" => Some(Primitive::Integer),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Primitive::String => "String",
            Primitive::Boolean => "Boolean",
            Primitive::Integer => "Integer",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    Attribute,
    Reference,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FeatureType {
    Primitive(Primitive),
    Class(String),
}

impl fmt::Display for FeatureType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureType::Primitive(p) => f.write_str(p.name()),
            FeatureType::Class(c) => f.write_str(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Feature {
    pub name: String,
    pub kind: FeatureKind,
    pub ty: FeatureType,
    pub many: bool,
    pub ordered: bool,
    pub containment: bool,
}

impl Feature {
    pub fn attribute(name: &str, ty: Primitive) -> Self {
        Feature {
            name: name.to_string(),
            kind: FeatureKind::Attribute,
            ty: FeatureType::Primitive(ty),
            many: false,
            ordered: false,
            containment: false,
        }
    }

    pub fn reference(name: &str, target: &str, many: bool, ordered: bool, containment: bool) -> Self {
        Feature {
            name: name.to_string(),
            kind: FeatureKind::Reference,
            ty: FeatureType::Class(target.to_string()),
            many,
            ordered,
            containment,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaClass {
    pub name: String,
    pub is_abstract: bool,
    pub supertypes: Vec<String>,
    pub features: Vec<Feature>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum MetamodelError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("duplicate class `{0}`")]
    DuplicateClass(String),
    #[error("class `{class}`: feature `{feature}` has unresolved type `{ty}`")]
    UnresolvedType { class: String, feature: String, ty: String },
    #[error("class `{class}` extends unknown class `{supertype}`")]
    UnknownSupertype { class: String, supertype: String },
    #[error("inheritance cycle through class `{0}`")]
    InheritanceCycle(String),
    #[error("class `{class}` declares feature `{feature}` more than once (possibly inherited)")]
    DuplicateFeature { class: String, feature: String },
    #[error("class `{class}`: feature `{feature}` {message}")]
    InvalidFeature { class: String, feature: String, message: String },
}

impl From<LexError> for MetamodelError {
    fn from(e: LexError) -> Self {
        MetamodelError::Syntax { line: e.line, col: e.col, message: e.message }
    }
}

#[derive(Debug, Clone)]
struct ClassInfo {
    /// Inherited features first, depth-first over supertypes in declaration order.
    all_features: Vec<Feature>,
    ancestors: HashSet<String>,
    descendants: Vec<String>,
}

/// A validated metamodel. Construct through [`Metamodel::new`] or [`parse_metamodel`].
#[derive(Debug, Clone)]
pub struct Metamodel {
    name: String,
    classes: Vec<MetaClass>,
    info: HashMap<String, ClassInfo>,
}

impl PartialEq for Metamodel {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.classes == other.classes
    }
}

impl Metamodel {
    pub fn new(name: impl Into<String>, classes: Vec<MetaClass>) -> Result<Self, MetamodelError> {
        let name = name.into();
        let mut by_name: HashMap<&str, &MetaClass> = HashMap::new();
        for c in &classes {
            if by_name.insert(c.name.as_str(), c).is_some() {
                return Err(MetamodelError::DuplicateClass(c.name.clone()));
            }
        }
        for c in &classes {
            for s in &c.supertypes {
                if !by_name.contains_key(s.as_str()) {
                    return Err(MetamodelError::UnknownSupertype { class: c.name.clone(), supertype: s.clone() });
                }
            }
        }
        // Cycle detection: DFS with colors.
        fn visit<'a>(
            c: &'a str,
            by_name: &HashMap<&'a str, &'a MetaClass>,
            state: &mut HashMap<&'a str, u8>,
        ) -> Result<(), String> {
            match state.get(c) {
                Some(1) => return Err(c.to_string()),
                Some(2) => return Ok(()),
                _ => {}
            }
            state.insert(c, 1);
            for s in &by_name[c].supertypes {
                visit(s.as_str(), by_name, state)?;
            }
            state.insert(c, 2);
            Ok(())
        }
        let mut state = HashMap::new();
        for c in &classes {
            visit(&c.name, &by_name, &mut state).map_err(MetamodelError::InheritanceCycle)?;
        }

        for c in &classes {
            for f in &c.features {
                match (&f.kind, &f.ty) {
                    (FeatureKind::Attribute, FeatureType::Class(t)) => {
                        return Err(if by_name.contains_key(t.as_str()) {
                            MetamodelError::InvalidFeature {
                                class: c.name.clone(),
                                feature: f.name.clone(),
                                message: "is an attribute but has a class type".into(),
                            }
                        } else {
                            MetamodelError::UnresolvedType { class: c.name.clone(), feature: f.name.clone(), ty: t.clone() }
                        });
                    }
                    (FeatureKind::Reference, FeatureType::Class(t)) if !by_name.contains_key(t.as_str()) => {
                        return Err(MetamodelError::UnresolvedType {
                            class: c.name.clone(),
                            feature: f.name.clone(),
                            ty: t.clone(),
                        });
                    }
                    (FeatureKind::Reference, FeatureType::Primitive(_)) => {
                        return Err(MetamodelError::InvalidFeature {
                            class: c.name.clone(),
                            feature: f.name.clone(),
                            message: "is a reference but has a primitive type".into(),
                        });
                    }
                    (FeatureKind::Attribute, FeatureType::Primitive(_)) if f.containment => {
                        return Err(MetamodelError::InvalidFeature {
                            class: c.name.clone(),
                            feature: f.name.clone(),
                            message: "is an attribute and cannot be a containment".into(),
                        });
                    }
                    _ => {}
                }
            }
        }

        fn collect<'a>(
            c: &'a str,
            by_name: &HashMap<&'a str, &'a MetaClass>,
            feats: &mut Vec<Feature>,
            anc: &mut HashSet<String>,
        ) {
            if !anc.insert(c.to_string()) {
                return;
            }
            let mc = by_name[c];
            for s in &mc.supertypes {
                collect(s, by_name, feats, anc);
            }
            feats.extend(mc.features.iter().cloned());
        }
        let mut info = HashMap::new();
        for c in &classes {
            let mut feats = Vec::new();
            let mut anc = HashSet::new();
            collect(&c.name, &by_name, &mut feats, &mut anc);
            let mut seen = HashSet::new();
            for f in &feats {
                if !seen.insert(f.name.as_str()) {
                    return Err(MetamodelError::DuplicateFeature { class: c.name.clone(), feature: f.name.clone() });
                }
            }
            info.insert(c.name.clone(), ClassInfo { all_features: feats, ancestors: anc, descendants: Vec::new() });
        }
        for c in &classes {
            let descendants: Vec<String> = classes
                .iter()
                .filter(|d| info[&d.name].ancestors.contains(&c.name))
                .map(|d| d.name.clone())
                .collect();
            info.get_mut(&c.name).unwrap().descendants = descendants;
        }
        Ok(Metamodel { name, classes, info })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn classes(&self) -> &[MetaClass] {
        &self.classes
    }

    pub fn class(&self, name: &str) -> Option<&MetaClass> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn has_class(&self, name: &str) -> bool {
        self.info.contains_key(name)
    }

    /// All features of a class, inherited ones first.
    pub fn all_features(&self, class: &str) -> &[Feature] {
        self.info.get(class).map(|i| i.all_features.as_slice()).unwrap_or(&[])
    }

    pub fn feature(&self, class: &str, feature: &str) -> Option<&Feature> {
        self.all_features(class).iter().find(|f| f.name == feature)
    }

    pub fn feature_index(&self, class: &str, feature: &str) -> Option<usize> {
        self.all_features(class).iter().position(|f| f.name == feature)
    }

    /// True when `sub` is `sup` or inherits from it.
    pub fn conforms(&self, sub: &str, sup: &str) -> bool {
        self.info.get(sub).is_some_and(|i| i.ancestors.contains(sup))
    }

    /// `class` itself and every class inheriting from it, in declaration order.
    pub fn descendants(&self, class: &str) -> &[String] {
        self.info.get(class).map(|i| i.descendants.as_slice()).unwrap_or(&[])
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("metamodel {}\n", self.name);
        for c in &self.classes {
            out.push_str("class ");
            out.push_str(&c.name);
            if c.is_abstract {
                out.push_str(" abstract");
            }
            if !c.supertypes.is_empty() {
                out.push_str(" extends ");
                out.push_str(&c.supertypes.join(","));
            }
            out.push_str(" {");
            for f in &c.features {
                match f.kind {
                    FeatureKind::Attribute => {
                        let _ = write!(out, " attr {}: {}", f.name, f.ty);
                    }
                    FeatureKind::Reference => {
                        let _ = write!(out, " ref {}: {}", f.name, f.ty);
                    }
                }
                if f.many {
                    out.push_str(" *");
                }
                if f.ordered {
                    out.push_str(" ordered");
                }
                if f.containment {
                    out.push_str(" containment");
                }
                out.push(';');
            }
            out.push_str(" }\n");
        }
        out
    }
}

const MODEL_LEX: LexOptions = LexOptions { hash_comments: true, dash_comments: false };

pub fn parse_metamodel(text: &str) -> Result<Metamodel, MetamodelError> {
    let mut cur = Cursor::new(tokenize(text, MODEL_LEX)?);
    cur.expect_keyword("metamodel")?;
    let name = cur.expect_ident()?;
    let mut classes = Vec::new();
    while !cur.at_eof() {
        cur.expect_keyword("class")?;
        let cname = cur.expect_ident()?;
        let is_abstract = cur.eat_keyword("abstract");
        let mut supertypes = Vec::new();
        if cur.eat_keyword("extends") {
            supertypes.push(cur.expect_ident()?);
            while cur.eat_punct(",") {
                supertypes.push(cur.expect_ident()?);
            }
        }
        cur.expect_punct("{")?;
        let mut features = Vec::new();
        while !cur.eat_punct("}") {
            let kind = if cur.eat_keyword("attr") {
                FeatureKind::Attribute
            } else if cur.eat_keyword("ref") {
                FeatureKind::Reference
            } else {
                return Err(cur.unexpected("`attr`, `ref` or `}`").into());
            };
            let fname = cur.expect_ident()?;
            cur.expect_punct(":")?;
            let tname = cur.expect_ident()?;
            let ty = match Primitive::from_name(&tname) {
                Some(p) => FeatureType::Primitive(p),
                None => FeatureType::Class(tname),
            };
            let mut f = Feature { name: fname, kind, ty, many: false, ordered: false, containment: false };
            loop {
                if cur.eat_punct("*") {
                    f.many = true;
                } else if cur.eat_keyword("ordered") {
                    f.ordered = true;
                } else if cur.eat_keyword("containment") {
                    f.containment = true;
                } else {
                    break;
                }
            }
            cur.expect_punct(";")?;
            features.push(f);
        }
        classes.push(MetaClass { name: cname, is_abstract, supertypes, features });
    }
    Metamodel::new(name, classes)
}

/// A single slot value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Str(String),
    Bool(bool),
    Int(i64),
    /// Reference to another object of the same model, by id.
    Ref(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Str(s) => write!(f, "\"{}\"", escape(s)),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Ref(id) => f.write_str(id),
        }
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SlotValue {
    Single(Value),
    Many(Vec<Value>),
}

impl SlotValue {
    pub fn values(&self) -> &[Value] {
        match self {
            SlotValue::Single(v) => std::slice::from_ref(v),
            SlotValue::Many(vs) => vs,
        }
    }
}

impl fmt::Display for SlotValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlotValue::Single(v) => write!(f, "{v}"),
            SlotValue::Many(vs) => {
                f.write_str("[")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelObject {
    pub id: String,
    pub class: String,
    pub slots: BTreeMap<String, SlotValue>,
}

impl ModelObject {
    pub fn new(id: impl Into<String>, class: impl Into<String>) -> Self {
        ModelObject { id: id.into(), class: class.into(), slots: BTreeMap::new() }
    }

    pub fn with(mut self, feature: &str, value: SlotValue) -> Self {
        self.slots.insert(feature.to_string(), value);
        self
    }

    pub fn slot(&self, feature: &str) -> Option<&SlotValue> {
        self.slots.get(feature)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("model conforms to `{found}` but metamodel `{expected}` was supplied")]
    MetamodelMismatch { expected: String, found: String },
    #[error("object `{id}`: unknown class `{class}`")]
    UnknownClass { id: String, class: String },
    #[error("object `{id}`: class `{class}` has no feature `{feature}`")]
    UnknownFeature { id: String, class: String, feature: String },
    #[error("object `{id}`: feature `{feature}` refers to unknown object `{target}`")]
    UnresolvedObject { id: String, feature: String, target: String },
    #[error("duplicate object id `{0}`")]
    DuplicateObject(String),
}

impl From<LexError> for ModelError {
    fn from(e: LexError) -> Self {
        ModelError::Syntax { line: e.line, col: e.col, message: e.message }
    }
}

/// An object graph. Objects keep their declaration order; lookups by id are indexed.
#[derive(Debug, Clone)]
pub struct Model {
    pub name: String,
    pub metamodel: String,
    objects: Vec<ModelObject>,
    index: HashMap<String, usize>,
}

/// Structural equality: same header and the same objects by id, regardless of declaration order.
impl PartialEq for Model {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.metamodel == other.metamodel
            && self.objects.len() == other.objects.len()
            && self.objects.iter().all(|o| other.object(&o.id) == Some(o))
    }
}

impl Model {
    pub fn new(name: impl Into<String>, metamodel: impl Into<String>) -> Self {
        Model { name: name.into(), metamodel: metamodel.into(), objects: Vec::new(), index: HashMap::new() }
    }

    pub fn push(&mut self, obj: ModelObject) -> Result<(), ModelError> {
        if self.index.contains_key(&obj.id) {
            return Err(ModelError::DuplicateObject(obj.id));
        }
        self.index.insert(obj.id.clone(), self.objects.len());
        self.objects.push(obj);
        Ok(())
    }

    pub fn objects(&self) -> &[ModelObject] {
        &self.objects
    }

    pub fn object(&self, id: &str) -> Option<&ModelObject> {
        self.index.get(id).map(|&i| &self.objects[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    /// A copy with objects reordered; used by order-independence checks.
    pub fn reordered(&self, order: &[usize]) -> Model {
        let mut m = Model::new(self.name.clone(), self.metamodel.clone());
        for &i in order {
            m.push(self.objects[i].clone()).expect("ids stay unique under permutation");
        }
        m
    }
}

pub fn parse_model(text: &str, mm: &Metamodel) -> Result<Model, ModelError> {
    let mut cur = Cursor::new(tokenize(text, MODEL_LEX)?);
    cur.expect_keyword("model")?;
    let name = cur.expect_ident()?;
    cur.expect_keyword("conforms")?;
    let mm_name = cur.expect_ident()?;
    if mm_name != mm.name() {
        return Err(ModelError::MetamodelMismatch { expected: mm.name().to_string(), found: mm_name });
    }
    let mut model = Model::new(name, mm_name);
    while !cur.at_eof() {
        let id = cur.expect_ident()?;
        cur.expect_punct(":")?;
        let class = cur.expect_ident()?;
        if !mm.has_class(&class) {
            return Err(ModelError::UnknownClass { id, class });
        }
        cur.expect_punct("{")?;
        let mut obj = ModelObject::new(id.clone(), class.clone());
        while !cur.eat_punct("}") {
            let feature = cur.expect_ident()?;
            if mm.feature(&class, &feature).is_none() {
                return Err(ModelError::UnknownFeature { id, class, feature });
            }
            cur.expect_punct("=")?;
            let value = if cur.eat_punct("[") {
                let mut items = Vec::new();
                if !cur.eat_punct("]") {
                    loop {
                        items.push(parse_value(&mut cur)?);
                        if cur.eat_punct("]") {
                            break;
                        }
                        cur.expect_punct(",")?;
                    }
                }
                SlotValue::Many(items)
            } else {
                SlotValue::Single(parse_value(&mut cur)?)
            };
            cur.expect_punct(";")?;
            obj.slots.insert(feature, value);
        }
        model.push(obj)?;
    }
    for obj in model.objects() {
        for (feature, value) in &obj.slots {
            for v in value.values() {
                if let Value::Ref(target) = v {
                    if model.object(target).is_none() {
                        return Err(ModelError::UnresolvedObject {
                            id: obj.id.clone(),
                            feature: feature.clone(),
                            target: target.clone(),
                        });
                    }
                }
            }
        }
    }
    Ok(model)
}

fn parse_value(cur: &mut Cursor) -> Result<Value, ModelError> {
    match cur.next() {
        Tok::Str(s, _) => Ok(Value::Str(s)),
        Tok::Int(i) => Ok(Value::Int(i)),
        Tok::Ident(s) if s == "true" => Ok(Value::Bool(true)),
        Tok::Ident(s) if s == "false" => Ok(Value::Bool(false)),
        Tok::Ident(s) => Ok(Value::Ref(s)),
        other => Err(cur.error(format!("expected a value, found {other}")).into()),
    }
}

/// Canonical text: objects sorted by id, slots in the metamodel's feature order.
pub fn serialize_model(m: &Model, mm: &Metamodel) -> String {
    let mut out = format!("model {} conforms {}\n", m.name, m.metamodel);
    let mut objs: Vec<&ModelObject> = m.objects().iter().collect();
    objs.sort_by(|a, b| a.id.cmp(&b.id));
    for o in objs {
        let _ = write!(out, "{}: {} {{", o.id, o.class);
        let order = mm.all_features(&o.class);
        let mut emitted = HashSet::new();
        for f in order {
            if let Some(v) = o.slots.get(&f.name) {
                let _ = write!(out, " {} = {};", f.name, v);
                emitted.insert(f.name.as_str());
            }
        }
        // Slots unknown to the metamodel still round-trip (sorted by name).
        for (name, v) in &o.slots {
            if !emitted.contains(name.as_str()) {
                let _ = write!(out, " {name} = {v};");
            }
        }
        out.push_str(" }\n");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub object: String,
    pub feature: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.feature.is_empty() {
            write!(f, "{}: {}", self.object, self.message)
        } else {
            write!(f, "{}.{}: {}", self.object, self.feature, self.message)
        }
    }
}

/// Conformance violations sorted by (object id, feature name).
pub fn check_conformance(m: &Model, mm: &Metamodel) -> Vec<Violation> {
    let mut out = Vec::new();
    let v = |o: &ModelObject, feature: &str, message: String| Violation {
        object: o.id.clone(),
        feature: feature.to_string(),
        message,
    };
    if m.metamodel != mm.name() {
        out.push(Violation {
            object: String::new(),
            feature: String::new(),
            message: format!("model conforms to `{}`, not `{}`", m.metamodel, mm.name()),
        });
    }
    for o in m.objects() {
        let Some(class) = mm.class(&o.class) else {
            out.push(v(o, "", format!("unknown class `{}`", o.class)));
            continue;
        };
        if class.is_abstract {
            out.push(v(o, "", format!("instantiates abstract class `{}`", o.class)));
        }
        for (fname, value) in &o.slots {
            let Some(feature) = mm.feature(&o.class, fname) else {
                out.push(v(o, fname, "no such feature".into()));
                continue;
            };
            match (feature.many, value) {
                (false, SlotValue::Many(_)) => {
                    out.push(v(o, fname, "single-valued feature holds a list".into()));
                    continue;
                }
                (true, SlotValue::Single(_)) => {
                    out.push(v(o, fname, "many-valued feature holds a single value".into()));
                    continue;
                }
                _ => {}
            }
            for val in value.values() {
                let ok = match (&feature.ty, val) {
                    (FeatureType::Primitive(Primitive::String), Value::Str(_)) => true,
                    (FeatureType::Primitive(Primitive::Boolean), Value::Bool(_)) => true,
                    (FeatureType::Primitive(Primitive::Integer), Value::Int(_)) => true,
                    (FeatureType::Class(c), Value::Ref(id)) => match m.object(id) {
                        Some(target) => mm.conforms(&target.class, c),
                        None => false,
                    },
                    _ => false,
                };
                if !ok {
                    out.push(v(o, fname, format!("value `{val}` does not conform to type `{}`", feature.ty)));
                    break;
                }
            }
        }
    }
    out.sort();
    out
}
