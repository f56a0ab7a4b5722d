//! Multi-objective repair search: NSGA-II over patches with social diversity.

mod config;
mod engine;
mod nsga;

pub use config::{Config, ConfigError, SdMode, UnknownSdMode};
pub use engine::{
    evaluate, make_offspring, rank_population, repair, repair_observed, select_survivors, social_diversity,
    BestPatch, Evaluation, GenerationView, HistoryRow, Individual, RepairContext, RepairError, RepairResult, TestCase,
};
pub use nsga::{crowding_distance, dominates, fast_nondominated_sort, Distance};
