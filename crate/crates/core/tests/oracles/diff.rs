//! Brute-force differ: tries every partial one-to-one pairing of same-class
//! objects and keeps the cheapest.

use std::collections::HashMap;

use mtrepair::model::{
    parse_metamodel, FeatureKind, Metamodel, Model, ModelObject, SlotValue, Value,
};
use rand::seq::SliceRandom;
use rand::Rng;

pub const GRAPH_MM: &str = "metamodel G
class Named abstract { attr name: String; }
class Box extends Named { ref items: Item * ordered containment; ref marks: Item *; }
class Item extends Named { attr size: Integer; ref peer: Item; }
class Tag { attr label: String; attr weight: Integer; }
";

pub fn graph_mm() -> Metamodel {
    parse_metamodel(GRAPH_MM).unwrap()
}

/// A random model over the graph metamodel with at most `max` objects and a
/// deliberately small value alphabet so names collide.
pub fn random_model<R: Rng>(rng: &mut R, name: &str, max: usize) -> Model {
    let n = rng.gen_range(0..=max);
    let classes: Vec<&str> = (0..n).map(|_| *["Box", "Item", "Item", "Tag"].choose(rng).unwrap()).collect();
    let ids: Vec<String> = (0..n).map(|i| format!("o{i}")).collect();
    let items: Vec<&String> = ids.iter().zip(&classes).filter(|(_, c)| **c == "Item").map(|(i, _)| i).collect();
    let mut m = Model::new(name, "G");
    for (i, class) in classes.iter().enumerate() {
        let mut o = ModelObject::new(ids[i].clone(), *class);
        let pick_items = |rng: &mut R| -> Vec<Value> {
            let k = rng.gen_range(0..=items.len().min(3));
            (0..k).map(|_| Value::Ref(items.choose(rng).unwrap().to_string())).collect()
        };
        match *class {
            "Box" => {
                if rng.gen_bool(0.8) {
                    o = o.with("name", SlotValue::Single(Value::Str(["a", "b"].choose(rng).unwrap().to_string())));
                }
                if !items.is_empty() {
                    let its = pick_items(rng);
                    o = o.with("items", SlotValue::Many(its));
                    let ms = pick_items(rng);
                    o = o.with("marks", SlotValue::Many(ms));
                }
            }
            "Item" => {
                if rng.gen_bool(0.8) {
                    o = o.with("name", SlotValue::Single(Value::Str(["a", "b", "c"].choose(rng).unwrap().to_string())));
                }
                o = o.with("size", SlotValue::Single(Value::Int(rng.gen_range(0..2))));
                if !items.is_empty() && rng.gen_bool(0.5) {
                    o = o.with("peer", SlotValue::Single(Value::Ref(items.choose(rng).unwrap().to_string())));
                }
            }
            _ => {
                o = o.with("label", SlotValue::Single(Value::Str(["x", "y"].choose(rng).unwrap().to_string())));
                if rng.gen_bool(0.5) {
                    o = o.with("weight", SlotValue::Single(Value::Int(rng.gen_range(0..2))));
                }
            }
        }
        m.push(o).unwrap();
    }
    m
}

fn slot_values(o: &ModelObject, f: &str) -> Vec<Value> {
    o.slot(f).map(|s| s.values().to_vec()).unwrap_or_default()
}

/// Cost of one pairing; `pair` maps expected id to actual id.
fn pairing_cost(exp: &Model, act: &Model, mm: &Metamodel, pair: &HashMap<String, String>) -> usize {
    let inverse: HashMap<&String, &String> = pair.iter().map(|(e, a)| (a, e)).collect();
    let mut cost = exp.len() - pair.len() + act.len() - pair.len();
    for (e_id, a_id) in pair {
        let e = exp.object(e_id).unwrap();
        let a = act.object(a_id).unwrap();
        for f in mm.all_features(&e.class) {
            let ev = slot_values(e, &f.name);
            let av = slot_values(a, &f.name);
            let same = match f.kind {
                FeatureKind::Attribute => {
                    let (mut x, mut y) = (ev, av);
                    if !f.ordered {
                        x.sort();
                        y.sort();
                    }
                    x == y
                }
                FeatureKind::Reference => {
                    let want: Vec<Option<String>> =
                        ev.iter().map(|v| if let Value::Ref(id) = v { Some(id.clone()) } else { None }).collect();
                    let got: Vec<Option<String>> = av
                        .iter()
                        .map(|v| match v {
                            Value::Ref(id) => inverse.get(id).map(|s| s.to_string()),
                            _ => None,
                        })
                        .collect();
                    let (mut x, mut y) = (want, got);
                    if !f.ordered {
                        x.sort();
                        y.sort();
                    }
                    x.len() == y.len() && x.iter().zip(&y).all(|(p, q)| p.is_some() && p == q)
                }
            };
            if !same {
                cost += 1;
            }
        }
    }
    cost
}

pub fn brute_force_diff_count(exp: &Model, act: &Model, mm: &Metamodel) -> usize {
    fn go(
        k: usize,
        exp: &Model,
        act: &Model,
        mm: &Metamodel,
        used: &mut Vec<bool>,
        pair: &mut HashMap<String, String>,
        best: &mut usize,
    ) {
        if k == exp.len() {
            *best = (*best).min(pairing_cost(exp, act, mm, pair));
            return;
        }
        let e = &exp.objects()[k];
        go(k + 1, exp, act, mm, used, pair, best);
        for (j, a) in act.objects().iter().enumerate() {
            if used[j] || a.class != e.class {
                continue;
            }
            used[j] = true;
            pair.insert(e.id.clone(), a.id.clone());
            go(k + 1, exp, act, mm, used, pair, best);
            pair.remove(&e.id);
            used[j] = false;
        }
    }
    let mut best = usize::MAX;
    go(0, exp, act, mm, &mut vec![false; act.len()], &mut HashMap::new(), &mut best);
    best
}
