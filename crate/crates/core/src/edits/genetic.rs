//! Mutation and crossover on patches.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use super::ops::Patch;
use super::pools::{random_edit, ExhaustedPools, ValuePools};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MutationConfigError {
    #[error("maximum patch length must be positive")]
    ZeroLength,
    #[error("mutation weights must be non-negative with a positive sum")]
    BadWeights,
    #[error("parameter probability {0} is outside [0, 1]")]
    BadProbability(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MutationConfig {
    pub max_len: usize,
    pub add_weight: f64,
    pub remove_weight: f64,
    pub modify_weight: f64,
    /// Chance that a modification changes a single parameter rather than
    /// replacing the whole edit.
    pub p_param: f64,
}

impl Default for MutationConfig {
    fn default() -> Self {
        MutationConfig { max_len: 12, add_weight: 1.0, remove_weight: 1.0, modify_weight: 1.0, p_param: 0.5 }
    }
}

impl MutationConfig {
    pub fn validate(&self) -> Result<(), MutationConfigError> {
        if self.max_len == 0 {
            return Err(MutationConfigError::ZeroLength);
        }
        let w = [self.add_weight, self.remove_weight, self.modify_weight];
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) || w.iter().sum::<f64>() <= 0.0 {
            return Err(MutationConfigError::BadWeights);
        }
        if !(0.0..=1.0).contains(&self.p_param) {
            return Err(MutationConfigError::BadProbability(self.p_param));
        }
        Ok(())
    }
}

/// One add, remove or modify step. Removing from an empty patch, or modifying
/// one, leaves it unchanged.
pub fn mutate_patch<R: Rng + ?Sized>(
    rng: &mut R,
    patch: &Patch,
    pools: &ValuePools,
    cfg: &MutationConfig,
) -> Result<Patch, ExhaustedPools> {
    let mut edits = patch.edits.clone();
    let total = cfg.add_weight + cfg.remove_weight + cfg.modify_weight;
    let pick = rng.gen::<f64>() * total;
    if pick < cfg.add_weight {
        let e = random_edit(rng, pools)?;
        let at = rng.gen_range(0..=edits.len());
        edits.insert(at, e);
        edits.truncate(cfg.max_len);
    } else if pick < cfg.add_weight + cfg.remove_weight {
        if !edits.is_empty() {
            let at = rng.gen_range(0..edits.len());
            edits.remove(at);
        }
    } else if !edits.is_empty() {
        let at = rng.gen_range(0..edits.len());
        let one_param = rng.gen::<f64>() < cfg.p_param;
        let replacement = if one_param {
            let near = pools.neighbours(&edits[at]);
            match near.choose(rng) {
                Some(e) => (*e).clone(),
                None => random_edit(rng, pools)?,
            }
        } else {
            random_edit(rng, pools)?
        };
        edits[at] = replacement;
    }
    Ok(Patch::new(edits))
}

/// One-point crossover with an independent cut point in each parent.
pub fn crossover<R: Rng + ?Sized>(rng: &mut R, a: &Patch, b: &Patch, max_len: usize) -> (Patch, Patch) {
    let i = rng.gen_range(0..=a.len());
    let j = rng.gen_range(0..=b.len());
    let mut c1: Vec<_> = a.edits[..i].iter().chain(&b.edits[j..]).cloned().collect();
    let mut c2: Vec<_> = b.edits[..j].iter().chain(&a.edits[i..]).cloned().collect();
    c1.truncate(max_len);
    c2.truncate(max_len);
    (Patch::new(c1), Patch::new(c2))
}
