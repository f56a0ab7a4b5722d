//! Edit operations on transformations, patches, and their variation operators.

mod apply;
mod genetic;
mod ops;
mod pools;

pub use apply::{apply_edit, apply_patch};
pub use genetic::{crossover, mutate_patch, MutationConfig, MutationConfigError};
pub use ops::{EditKind, EditOp, LocRoot, Locator, Patch, PatchError};
pub use pools::{build_pools, random_edit, ExhaustedPools, ValuePools};
