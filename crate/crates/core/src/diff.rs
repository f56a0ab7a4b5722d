//! Model differencing. Objects of the expected and actual models are paired
//! by a minimum-cost matching: every unpaired object costs one difference, a
//! paired object costs one per attribute or reference that differs, where
//! reference targets are compared through the matching itself.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::digest::fnv1a64;
use crate::model::{FeatureKind, Metamodel, Model, SlotValue, Value};

/// Search nodes explored before the best matching found so far is accepted.
pub const DEFAULT_NODE_BUDGET: u64 = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum DiffKind {
    MissingObject,
    ExtraObject,
    AttributeMismatch,
    ReferenceMismatch,
}

impl DiffKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DiffKind::MissingObject => "MissingObject",
            DiffKind::ExtraObject => "ExtraObject",
            DiffKind::AttributeMismatch => "AttributeMismatch",
            DiffKind::ReferenceMismatch => "ReferenceMismatch",
        }
    }
}

impl fmt::Display for DiffKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Stable identifier of a difference: `kind|class|anchor|feature|digest`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct DiffKey(pub String);

impl fmt::Display for DiffKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Difference {
    pub kind: DiffKind,
    pub class: String,
    /// Content-derived path of the object, e.g. `Table:Family/Column:FamilyId`.
    pub anchor: String,
    /// Empty for object-level differences.
    pub feature: String,
    pub expected: String,
    pub actual: String,
}

impl Difference {
    pub fn key(&self) -> DiffKey {
        let digest_of = match self.kind {
            DiffKind::ExtraObject => &self.actual,
            _ => &self.expected,
        };
        DiffKey(format!(
            "{}|{}|{}|{}|{:016x}",
            self.kind,
            self.class,
            self.anchor,
            self.feature,
            fnv1a64(digest_of.as_bytes())
        ))
    }

    fn order_key(&self) -> (DiffKind, &str, &str) {
        (self.kind, &self.anchor, &self.feature)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DiffReport {
    differences: Vec<Difference>,
    keys: Vec<DiffKey>,
    /// False when the matching search hit its node budget.
    pub exact: bool,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    count: usize,
    differences: Vec<DifferenceJson<'a>>,
}

#[derive(Serialize)]
struct DifferenceJson<'a> {
    key: &'a DiffKey,
    kind: &'a str,
    anchor: &'a str,
    feature: &'a str,
    expected: &'a str,
    actual: &'a str,
}

impl DiffReport {
    fn new(mut differences: Vec<Difference>, exact: bool) -> Self {
        differences.sort_by(|a, b| a.order_key().cmp(&b.order_key()));
        let keys = differences.iter().map(Difference::key).collect();
        DiffReport { differences, keys, exact }
    }

    pub fn differences(&self) -> &[Difference] {
        &self.differences
    }

    pub fn keys(&self) -> &[DiffKey] {
        &self.keys
    }

    pub fn count(&self) -> usize {
        self.differences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.differences.is_empty()
    }

    pub fn to_json(&self) -> String {
        let doc = ReportJson {
            count: self.count(),
            differences: self
                .differences
                .iter()
                .zip(&self.keys)
                .map(|(d, key)| DifferenceJson {
                    key,
                    kind: d.kind.as_str(),
                    anchor: &d.anchor,
                    feature: &d.feature,
                    expected: &d.expected,
                    actual: &d.actual,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("report serializes")
    }
}

pub fn diff_count(r: &DiffReport) -> usize {
    r.count()
}

/// A pairing of expected objects with actual objects, by model position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_expected: Vec<usize>,
    pub unmatched_actual: Vec<usize>,
    pub cost: usize,
    /// True when the search proved the cost minimal.
    pub exact: bool,
}

/// Per-object data of one side, with features addressed by position in the
/// class's feature list.
struct Side<'m> {
    model: &'m Model,
    /// Normalized attribute values: absent single = [], unordered lists sorted.
    attrs: Vec<Vec<Vec<Value>>>,
    attr_names: Vec<Vec<&'m str>>,
    refs: Vec<Vec<Vec<usize>>>,
    ref_names: Vec<Vec<&'m str>>,
    ref_ordered: Vec<Vec<bool>>,
    shallow: Vec<String>,
    signature: Vec<String>,
    anchor: Vec<String>,
}

impl<'m> Side<'m> {
    fn new(model: &'m Model, mm: &'m Metamodel) -> Self {
        let n = model.len();
        let mut side = Side {
            model,
            attrs: Vec::with_capacity(n),
            attr_names: Vec::with_capacity(n),
            refs: Vec::with_capacity(n),
            ref_names: Vec::with_capacity(n),
            ref_ordered: Vec::with_capacity(n),
            shallow: Vec::with_capacity(n),
            signature: Vec::with_capacity(n),
            anchor: Vec::new(),
        };
        let mut container: Vec<Option<usize>> = vec![None; n];
        let mut identity = Vec::with_capacity(n);
        for o in model.objects() {
            let mut attrs = Vec::new();
            let mut attr_names = Vec::new();
            let mut refs = Vec::new();
            let mut ref_names = Vec::new();
            let mut ref_ordered = Vec::new();
            let mut shallow = format!("{} {{", o.class);
            let mut name = None;
            for f in mm.all_features(&o.class) {
                let slot = o.slot(&f.name);
                match f.kind {
                    FeatureKind::Attribute => {
                        let mut vals = slot.map(|s| s.values().to_vec()).unwrap_or_default();
                        if !f.ordered {
                            vals.sort();
                        }
                        if let Some(s) = slot {
                            shallow.push_str(&format!(" {} = {s};", f.name));
                            if f.name == "name" {
                                if let SlotValue::Single(Value::Str(v)) = s {
                                    name = Some(v.clone());
                                }
                            }
                        }
                        attrs.push(vals);
                        attr_names.push(f.name.as_str());
                    }
                    FeatureKind::Reference => {
                        let targets: Vec<usize> = slot
                            .map(|s| {
                                s.values()
                                    .iter()
                                    .filter_map(|v| match v {
                                        Value::Ref(id) => model.position(id),
                                        _ => None,
                                    })
                                    .collect()
                            })
                            .unwrap_or_default();
                        refs.push(targets);
                        ref_names.push(f.name.as_str());
                        ref_ordered.push(f.ordered);
                    }
                }
            }
            shallow.push_str(" }");
            identity.push(match name {
                Some(n) => format!("{}:{n}", o.class),
                None => {
                    let inner = shallow.trim_start_matches(o.class.as_str()).trim();
                    format!("{}:{inner}", o.class)
                }
            });
            side.attrs.push(attrs);
            side.attr_names.push(attr_names);
            side.refs.push(refs);
            side.ref_names.push(ref_names);
            side.ref_ordered.push(ref_ordered);
            side.shallow.push(shallow);
        }
        // The first container found depends on declaration order; settle
        // multiple containers by content instead.
        for (i, c) in container.iter_mut().enumerate() {
            let mut owners: Vec<usize> = (0..n)
                .filter(|&j| {
                    side.refs[j].iter().zip(&side.ref_names[j]).any(|(ts, fname)| {
                        ts.contains(&i)
                            && mm
                                .feature(&model.objects()[j].class, fname)
                                .is_some_and(|f| f.containment)
                    })
                })
                .filter(|&j| j != i)
                .collect();
            owners.sort_by(|&a, &b| side.shallow[a].cmp(&side.shallow[b]).then(a.cmp(&b)));
            *c = owners.first().copied();
        }
        // Colour refinement: each round folds in the colours of reference
        // targets and referrers, so objects tie only when their neighbourhoods do.
        let mut colour: Vec<u64> = (0..n)
            .map(|i| {
                let mut text = side.shallow[i].clone();
                if let Some(c) = container[i] {
                    text.push_str(" in ");
                    text.push_str(&side.shallow[c]);
                }
                fnv1a64(text.as_bytes())
            })
            .collect();
        for _ in 0..n.min(4) {
            let mut incoming: Vec<Vec<(&str, u64, usize)>> = vec![Vec::new(); n];
            for j in 0..n {
                for (k, (name, ts)) in side.ref_names[j].iter().zip(&side.refs[j]).enumerate() {
                    let ordered = side.ref_ordered[j][k];
                    for (pos, &t) in ts.iter().enumerate() {
                        incoming[t].push((name, colour[j], if ordered { pos } else { 0 }));
                    }
                }
            }
            colour = (0..n)
                .map(|i| {
                    let mut text = format!("{:x}", colour[i]);
                    for (k, (name, ts)) in side.ref_names[i].iter().zip(&side.refs[i]).enumerate() {
                        let mut cs: Vec<u64> = ts.iter().map(|&t| colour[t]).collect();
                        if !side.ref_ordered[i][k] {
                            cs.sort_unstable();
                        }
                        text.push_str(&format!(" {name}{cs:?}"));
                    }
                    incoming[i].sort_unstable();
                    text.push_str(&format!(" <-{:?}", incoming[i]));
                    fnv1a64(text.as_bytes())
                })
                .collect();
        }
        for i in 0..n {
            side.signature.push(format!("{} {:016x}", side.shallow[i], colour[i]));
        }
        let mut raw = Vec::with_capacity(n);
        for i in 0..n {
            let mut parts = vec![identity[i].as_str()];
            let mut cur = container[i];
            let mut seen = vec![i];
            while let Some(c) = cur {
                if seen.contains(&c) {
                    break;
                }
                seen.push(c);
                parts.push(&identity[c]);
                cur = container[c];
            }
            parts.reverse();
            raw.push(parts.join("/"));
        }
        let mut groups: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, r) in raw.iter().enumerate() {
            groups.entry(r.as_str()).or_default().push(i);
        }
        side.anchor = raw.clone();
        for (_, mut members) in groups {
            if members.len() < 2 {
                continue;
            }
            members.sort_by(|&a, &b| side.signature[a].cmp(&side.signature[b]).then(a.cmp(&b)));
            for (k, &m) in members.iter().enumerate() {
                side.anchor[m] = format!("{}#{}", raw[m], k + 1);
            }
        }
        side
    }

    fn class(&self, i: usize) -> &str {
        &self.model.objects()[i].class
    }

    fn slot_text(&self, i: usize, feature: &str) -> String {
        match self.model.objects()[i].slot(feature) {
            Some(s) => s.to_string(),
            None => "unset".into(),
        }
    }

    fn content_text(&self, i: usize) -> String {
        let mut s = self.shallow[i].clone();
        for (name, ts) in self.ref_names[i].iter().zip(&self.refs[i]) {
            let targets: Vec<&str> = ts.iter().map(|&t| self.anchor[t].as_str()).collect();
            s.push_str(&format!(" {name} -> [{}]", targets.join(", ")));
        }
        s
    }
}

struct Problem<'a, 'm> {
    exp: &'a Side<'m>,
    act: &'a Side<'m>,
    /// attribute mismatches of each same-class pair
    attr_cost: HashMap<(usize, usize), usize>,
    /// mismatches certain whatever the matching: attributes plus references whose
    /// lengths or target classes already disagree
    base: HashMap<(usize, usize), usize>,
    /// candidate actual objects per expected object, cheapest first
    candidates: Vec<Vec<usize>>,
}

fn multiset_eq<T: Ord + Clone>(a: &[T], b: &[T]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort();
    y.sort();
    x == y
}

fn ref_equal(te: &[usize], ta: &[usize], ordered: bool, to_exp: &[Option<usize>]) -> bool {
    if te.len() != ta.len() {
        return false;
    }
    let mapped: Vec<Option<usize>> = ta.iter().map(|&t| to_exp[t]).collect();
    let wanted: Vec<Option<usize>> = te.iter().map(|&t| Some(t)).collect();
    if ordered {
        mapped == wanted
    } else {
        multiset_eq(&mapped, &wanted)
    }
}

impl<'a, 'm> Problem<'a, 'm> {
    fn new(exp: &'a Side<'m>, act: &'a Side<'m>) -> Self {
        let mut attr_cost = HashMap::new();
        let mut base = HashMap::new();
        let mut candidates = vec![Vec::new(); exp.model.len()];
        for e in 0..exp.model.len() {
            for a in 0..act.model.len() {
                if exp.class(e) != act.class(a) {
                    continue;
                }
                let attrs = exp.attrs[e].iter().zip(&act.attrs[a]).filter(|(x, y)| x != y).count();
                let mut certain = attrs;
                for (k, (te, ta)) in exp.refs[e].iter().zip(&act.refs[a]).enumerate() {
                    let ce: Vec<&str> = te.iter().map(|&t| exp.class(t)).collect();
                    let ca: Vec<&str> = ta.iter().map(|&t| act.class(t)).collect();
                    let same = if exp.ref_ordered[e][k] { ce == ca } else { multiset_eq(&ce, &ca) };
                    if !same {
                        certain += 1;
                    }
                }
                attr_cost.insert((e, a), attrs);
                base.insert((e, a), certain);
                candidates[e].push(a);
            }
            candidates[e].sort_by(|&x, &y| {
                base[&(e, x)].cmp(&base[&(e, y)]).then_with(|| act.signature[x].cmp(&act.signature[y])).then(x.cmp(&y))
            });
        }
        Problem { exp, act, attr_cost, base, candidates }
    }

    fn ref_mismatches(&self, e: usize, a: usize, to_exp: &[Option<usize>]) -> usize {
        let mut n = 0;
        for (k, (te, ta)) in self.exp.refs[e].iter().zip(&self.act.refs[a]).enumerate() {
            if !ref_equal(te, ta, self.exp.ref_ordered[e][k], to_exp) {
                n += 1;
            }
        }
        n
    }

    /// Total cost of a complete assignment (expected → actual).
    fn cost(&self, assign: &[Option<usize>]) -> usize {
        let mut to_exp = vec![None; self.act.model.len()];
        for (e, a) in assign.iter().enumerate() {
            if let Some(a) = a {
                to_exp[*a] = Some(e);
            }
        }
        let mut total = to_exp.iter().filter(|m| m.is_none()).count();
        for (e, a) in assign.iter().enumerate() {
            match a {
                None => total += 1,
                Some(a) => total += self.attr_cost[&(e, *a)] + self.ref_mismatches(e, *a, &to_exp),
            }
        }
        total
    }

    fn container_signature<'s>(side: &'s Side, i: usize) -> Option<&'s str> {
        side.anchor[i].rsplit_once('/').map(|(c, _)| c)
    }

    /// Greedy matching: cheapest pairs first, preferring pairs whose containers agree.
    fn greedy(&self) -> Vec<Option<usize>> {
        let mut pairs: Vec<(usize, bool, usize, usize)> = self
            .base
            .iter()
            .filter(|(_, &c)| c <= 1)
            .map(|(&(e, a), &c)| {
                let same_container = Self::container_signature(self.exp, e) == Self::container_signature(self.act, a);
                (c, !same_container, e, a)
            })
            .collect();
        pairs.sort_by(|x, y| {
            (x.0, x.1)
                .cmp(&(y.0, y.1))
                .then_with(|| self.exp.signature[x.2].cmp(&self.exp.signature[y.2]))
                .then_with(|| self.act.signature[x.3].cmp(&self.act.signature[y.3]))
                .then((x.2, x.3).cmp(&(y.2, y.3)))
        });
        let mut assign = vec![None; self.exp.model.len()];
        let mut used = vec![false; self.act.model.len()];
        for (_, _, e, a) in pairs {
            if assign[e].is_none() && !used[a] {
                assign[e] = Some(a);
                used[a] = true;
            }
        }
        assign
    }
}

struct Search<'p, 'a, 'm> {
    p: &'p Problem<'a, 'm>,
    order: Vec<usize>,
    /// suffix sums over `order` of min(1, cheapest base - 1)
    optimistic: Vec<isize>,
    assign: Vec<Option<usize>>,
    used: Vec<bool>,
    best: Vec<Option<usize>>,
    best_cost: usize,
    best_unmatched: usize,
    nodes: u64,
    budget: u64,
}

impl Search<'_, '_, '_> {
    fn run(&mut self, k: usize, fixed: usize, matched: usize) {
        if self.nodes >= self.budget {
            return;
        }
        self.nodes += 1;
        let available = (self.p.act.model.len() - matched) as isize;
        let bound = fixed as isize + available + self.optimistic[k];
        // Among equal costs prefer fewer unpaired objects, which makes the
        // result symmetric in its Missing/Extra split.
        let remaining = (self.order.len() - k) as isize;
        let unmatched_bound = (k - matched) as isize + (remaining - available).abs();
        let best = self.best_cost as isize;
        if bound > best || (bound == best && unmatched_bound >= self.best_unmatched as isize) {
            return;
        }
        if k == self.order.len() {
            let c = self.p.cost(&self.assign);
            let unmatched = unmatched_count(&self.assign, self.p.act.model.len());
            if (c, unmatched) < (self.best_cost, self.best_unmatched) {
                self.best_cost = c;
                self.best_unmatched = unmatched;
                self.best = self.assign.clone();
            }
            return;
        }
        let e = self.order[k];
        for &a in &self.p.candidates[e] {
            if self.used[a] {
                continue;
            }
            self.used[a] = true;
            self.assign[e] = Some(a);
            self.run(k + 1, fixed + self.p.base[&(e, a)], matched + 1);
            self.assign[e] = None;
            self.used[a] = false;
        }
        self.run(k + 1, fixed + 1, matched);
    }
}

fn unmatched_count(assign: &[Option<usize>], actual_len: usize) -> usize {
    let paired = assign.iter().filter(|a| a.is_some()).count();
    assign.len() - paired + actual_len - paired
}

pub fn match_objects(expected: &Model, actual: &Model, mm: &Metamodel) -> Matching {
    let exp = Side::new(expected, mm);
    let act = Side::new(actual, mm);
    matching(&exp, &act, DEFAULT_NODE_BUDGET)
}

fn matching(exp: &Side, act: &Side, budget: u64) -> Matching {
    let p = Problem::new(exp, act);
    let mut order: Vec<usize> = (0..exp.model.len()).collect();
    order.sort_by(|&x, &y| {
        p.candidates[x]
            .len()
            .cmp(&p.candidates[y].len())
            .then_with(|| exp.signature[x].cmp(&exp.signature[y]))
            .then(x.cmp(&y))
    });
    let mut optimistic = vec![0isize; order.len() + 1];
    for k in (0..order.len()).rev() {
        let e = order[k];
        let cheapest = p.candidates[e].first().map(|&a| p.base[&(e, a)] as isize - 1).unwrap_or(1);
        optimistic[k] = optimistic[k + 1] + cheapest.min(1);
    }
    let best = p.greedy();
    let best_cost = p.cost(&best);
    let best_unmatched = unmatched_count(&best, act.model.len());
    let mut s = Search {
        p: &p,
        order,
        optimistic,
        assign: vec![None; exp.model.len()],
        used: vec![false; act.model.len()],
        best,
        best_cost,
        best_unmatched,
        nodes: 0,
        budget,
    };
    s.run(0, 0, 0);
    let exact = s.nodes < s.budget;
    let mut pairs = Vec::new();
    let mut unmatched_expected = Vec::new();
    let mut used = vec![false; act.model.len()];
    for (e, a) in s.best.iter().enumerate() {
        match a {
            Some(a) => {
                pairs.push((e, *a));
                used[*a] = true;
            }
            None => unmatched_expected.push(e),
        }
    }
    let unmatched_actual = (0..act.model.len()).filter(|&a| !used[a]).collect();
    Matching { pairs, unmatched_expected, unmatched_actual, cost: s.best_cost, exact }
}

pub fn diff_models(expected: &Model, actual: &Model, mm: &Metamodel) -> DiffReport {
    diff_models_with_budget(expected, actual, mm, DEFAULT_NODE_BUDGET)
}

pub fn diff_models_with_budget(expected: &Model, actual: &Model, mm: &Metamodel, budget: u64) -> DiffReport {
    let exp = Side::new(expected, mm);
    let act = Side::new(actual, mm);
    let m = matching(&exp, &act, budget);
    let mut to_exp = vec![None; actual.len()];
    for &(e, a) in &m.pairs {
        to_exp[a] = Some(e);
    }
    let mut diffs = Vec::with_capacity(m.cost);
    for &e in &m.unmatched_expected {
        diffs.push(Difference {
            kind: DiffKind::MissingObject,
            class: exp.class(e).to_string(),
            anchor: exp.anchor[e].clone(),
            feature: String::new(),
            expected: exp.content_text(e),
            actual: String::new(),
        });
    }
    for &a in &m.unmatched_actual {
        diffs.push(Difference {
            kind: DiffKind::ExtraObject,
            class: act.class(a).to_string(),
            anchor: act.anchor[a].clone(),
            feature: String::new(),
            expected: String::new(),
            actual: act.content_text(a),
        });
    }
    for &(e, a) in &m.pairs {
        for (k, name) in exp.attr_names[e].iter().enumerate() {
            if exp.attrs[e][k] != act.attrs[a][k] {
                diffs.push(Difference {
                    kind: DiffKind::AttributeMismatch,
                    class: exp.class(e).to_string(),
                    anchor: exp.anchor[e].clone(),
                    feature: name.to_string(),
                    expected: exp.slot_text(e, name),
                    actual: act.slot_text(a, name),
                });
            }
        }
        for (k, name) in exp.ref_names[e].iter().enumerate() {
            let (te, ta) = (&exp.refs[e][k], &act.refs[a][k]);
            if ref_equal(te, ta, exp.ref_ordered[e][k], &to_exp) {
                continue;
            }
            let expected_text: Vec<&str> = te.iter().map(|&t| exp.anchor[t].as_str()).collect();
            let actual_text: Vec<String> = ta
                .iter()
                .map(|&t| match to_exp[t] {
                    Some(x) => exp.anchor[x].clone(),
                    None => format!("+{}", act.anchor[t]),
                })
                .collect();
            diffs.push(Difference {
                kind: DiffKind::ReferenceMismatch,
                class: exp.class(e).to_string(),
                anchor: exp.anchor[e].clone(),
                feature: name.to_string(),
                expected: format!("[{}]", expected_text.join(", ")),
                actual: format!("[{}]", actual_text.join(", ")),
            });
        }
    }
    debug_assert_eq!(diffs.len(), m.cost);
    DiffReport::new(diffs, m.exact)
}

impl PartialOrd for Difference {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Difference {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order_key()
            .cmp(&other.order_key())
            .then_with(|| (&self.expected, &self.actual).cmp(&(&other.expected, &other.actual)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Class2Relational;
    use crate::model::parse_model;
    use crate::mtl::execute;

    #[test]
    fn faulty_output_differs_in_three_places() {
        let c = Class2Relational::load();
        let out = execute(&c.faulty, &c.input, &c.src, &c.tgt).unwrap();
        let r = diff_models(&c.expected, &out, &c.tgt);
        assert!(r.exact);
        assert_eq!(diff_count(&r), 3, "{}", r.to_json());
        let kinds: Vec<(DiffKind, &str, &str)> =
            r.differences().iter().map(|d| (d.kind, d.anchor.as_str(), d.feature.as_str())).collect();
        assert_eq!(
            kinds,
            [
                (DiffKind::AttributeMismatch, "Table:Family_members/Column:membersId", "name"),
                (DiffKind::ReferenceMismatch, "Table:Family", "col"),
                (DiffKind::ReferenceMismatch, "Table:Person", "col"),
            ]
        );
        assert_eq!(r.differences()[1].expected, "[Table:Family/Column:FamilyId, Table:Family/Column:name]");
        assert_eq!(r.differences()[1].actual, "[Table:Family/Column:FamilyId]");
    }

    #[test]
    fn corrected_output_matches() {
        let c = Class2Relational::load();
        let out = execute(&c.correct, &c.input, &c.src, &c.tgt).unwrap();
        assert_eq!(diff_count(&diff_models(&c.expected, &out, &c.tgt)), 0);
    }

    #[test]
    fn identity_and_empty_sides() {
        let c = Class2Relational::load();
        let m = &c.expected;
        let r = diff_models(m, m, &c.tgt);
        assert!(r.is_empty());
        let matching = match_objects(m, m, &c.tgt);
        assert_eq!(matching.pairs.len(), m.len());
        assert!(matching.unmatched_expected.is_empty() && matching.unmatched_actual.is_empty());

        let empty = Model::new("e", "Relational");
        let r = diff_models(&empty, m, &c.tgt);
        assert_eq!(r.count(), 9);
        assert!(r.differences().iter().all(|d| d.kind == DiffKind::ExtraObject));
        let r = diff_models(m, &empty, &c.tgt);
        assert!(r.differences().iter().all(|d| d.kind == DiffKind::MissingObject));
    }

    #[test]
    fn one_extra_expected_column() {
        let c = Class2Relational::load();
        let exp = parse_model(
            "model a conforms Relational t: Table { name = \"T\"; } x: Column { name = \"x\"; } y: Column { name = \"y\"; }",
            &c.tgt,
        )
        .unwrap();
        let act = parse_model(
            "model b conforms Relational t: Table { name = \"T\"; } x: Column { name = \"x\"; }",
            &c.tgt,
        )
        .unwrap();
        let r = diff_models(&exp, &act, &c.tgt);
        assert_eq!(r.count(), 1);
        assert_eq!(r.differences()[0].kind, DiffKind::MissingObject);
        assert_eq!(r.differences()[0].anchor, "Column:y");
    }

    #[test]
    fn duplicate_anchors_are_numbered() {
        let c = Class2Relational::load();
        let m = parse_model(
            "model a conforms Relational t: Table { name = \"T\"; col = [x, y]; } x: Column { name = \"id\"; } y: Column { name = \"id\"; }",
            &c.tgt,
        )
        .unwrap();
        let empty = Model::new("e", "Relational");
        let r = diff_models(&m, &empty, &c.tgt);
        let anchors: Vec<&str> = r.differences().iter().map(|d| d.anchor.as_str()).collect();
        assert_eq!(anchors, ["Table:T", "Table:T/Column:id#1", "Table:T/Column:id#2"]);
        let keys: std::collections::HashSet<_> = r.keys().iter().collect();
        assert_eq!(keys.len(), 3);
    }

    #[test]
    fn json_shape() {
        let c = Class2Relational::load();
        let out = execute(&c.faulty, &c.input, &c.src, &c.tgt).unwrap();
        let v: serde_json::Value = serde_json::from_str(&diff_models(&c.expected, &out, &c.tgt).to_json()).unwrap();
        assert_eq!(v["count"], 3);
        let d = &v["differences"][0];
        for field in ["key", "kind", "anchor", "feature", "expected", "actual"] {
            assert!(d[field].is_string(), "{field}");
        }
        assert_eq!(d["expected"], "\"membersId\"");
        assert_eq!(d["actual"], "\"PersonId\"");
    }
}
