use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::edits::{MutationConfig, MutationConfigError};

/// How social diversity takes part in the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SdMode {
    /// Two objectives, crowding distance as secondary sort.
    Off,
    /// Two objectives, diversity as secondary sort.
    Crowding,
    /// Diversity as a third objective, crowding distance as secondary sort.
    Objective,
}

impl SdMode {
    pub const ALL: [SdMode; 3] = [SdMode::Off, SdMode::Crowding, SdMode::Objective];

    pub fn as_str(self) -> &'static str {
        match self {
            SdMode::Off => "off",
            SdMode::Crowding => "crowding",
            SdMode::Objective => "objective",
        }
    }
}

impl fmt::Display for SdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown sd mode `{0}` (expected off, crowding or objective)")]
pub struct UnknownSdMode(pub String);

impl FromStr for SdMode {
    type Err = UnknownSdMode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SdMode::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| UnknownSdMode(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("population size {0} must be even and at least 4")]
    Population(usize),
    #[error("{name} probability {value} is outside [0, 1]")]
    Probability { name: &'static str, value: f64 },
    #[error("initial patch length range {min}..={max} is empty or exceeds the maximum length")]
    InitialLength { min: usize, max: usize },
    #[error(transparent)]
    Mutation(#[from] MutationConfigError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    /// Size of the merged population; parents and offspring are half each.
    pub population: usize,
    pub max_generations: usize,
    pub sd_mode: SdMode,
    pub mutation_prob: f64,
    pub crossover_prob: f64,
    pub init_min_len: usize,
    pub init_max_len: usize,
    pub mutation: MutationConfig,
    pub seed: u64,
    /// Evaluates offspring on the rayon pool; results do not depend on it.
    #[serde(skip)]
    pub parallel: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            population: 40,
            max_generations: 2000,
            sd_mode: SdMode::Objective,
            mutation_prob: 0.9,
            crossover_prob: 0.8,
            init_min_len: 1,
            init_max_len: 3,
            mutation: MutationConfig::default(),
            seed: 0,
            parallel: false,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.population < 4 || self.population % 2 != 0 {
            return Err(ConfigError::Population(self.population));
        }
        for (name, value) in [("mutation", self.mutation_prob), ("crossover", self.crossover_prob)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ConfigError::Probability { name, value });
            }
        }
        self.mutation.validate()?;
        if self.init_min_len > self.init_max_len || self.init_max_len > self.mutation.max_len {
            return Err(ConfigError::InitialLength { min: self.init_min_len, max: self.init_max_len });
        }
        Ok(())
    }

    pub fn parents(&self) -> usize {
        self.population / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Config::default().validate().is_ok());
        for n in [0, 2, 5, 41] {
            assert_eq!(Config { population: n, ..Config::default() }.validate(), Err(ConfigError::Population(n)));
        }
        assert!(Config { population: 4, ..Config::default() }.validate().is_ok());
        assert!(matches!(
            Config { crossover_prob: -0.1, ..Config::default() }.validate(),
            Err(ConfigError::Probability { name: "crossover", .. })
        ));
        assert!(matches!(
            Config { init_min_len: 4, ..Config::default() }.validate(),
            Err(ConfigError::InitialLength { .. })
        ));
    }

    #[test]
    fn sd_mode_names() {
        for m in SdMode::ALL {
            assert_eq!(m.as_str().parse::<SdMode>().unwrap(), m);
        }
        assert!("none".parse::<SdMode>().is_err());
    }
}
