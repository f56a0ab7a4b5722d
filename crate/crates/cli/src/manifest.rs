//! `key = value` run manifests. Paths are relative to the manifest's directory.

use std::fs;
use std::path::{Path, PathBuf};

use mtrepair::evolve::{Config, SdMode};
use mtrepair::mutants::ErrorClass;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestSpec {
    pub id: String,
    pub input: PathBuf,
    pub expected: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub path: PathBuf,
    pub source_metamodel: Option<PathBuf>,
    pub target_metamodel: Option<PathBuf>,
    pub transformation: Option<PathBuf>,
    /// Correct program that mutants are derived from.
    pub base: Option<PathBuf>,
    pub tests: Vec<TestSpec>,
    pub output: PathBuf,
    pub config: Config,
    /// `(errors per mutant, mutant count)` pairs.
    pub benchmark: Vec<(usize, usize)>,
    pub class_weights: [u32; 9],
    /// Directory holding one sub-directory per mutant bundle.
    pub mutants: Option<PathBuf>,
    pub seeds: Vec<u64>,
    pub configs: Vec<SdMode>,
}

/// Command-line values that replace manifest entries.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub sd_mode: Option<SdMode>,
    pub max_generations: Option<usize>,
    pub population: Option<usize>,
}

fn list<T>(value: &str, item: impl Fn(&str) -> Option<T>) -> Option<Vec<T>> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(item).collect()
}

impl Manifest {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Manifest, CliError> {
        let text = fs::read_to_string(path).map_err(|_| CliError::MissingInput(path.to_path_buf()))?;
        let mut m = Manifest::parse(&text, path)?;
        if let Some(s) = overrides.seed {
            m.config.seed = s;
            m.seeds = vec![s];
        }
        if let Some(mode) = overrides.sd_mode {
            m.config.sd_mode = mode;
            m.configs = vec![mode];
        }
        if let Some(g) = overrides.max_generations {
            m.config.max_generations = g;
        }
        if let Some(n) = overrides.population {
            m.config.population = n;
        }
        m.config.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(m)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Manifest, CliError> {
        let dir = path.parent().unwrap_or(Path::new("."));
        let out_root = std::env::var_os("MTREPAIR_OUT").map(PathBuf::from).unwrap_or_else(|| dir.to_path_buf());
        let mut m = Manifest {
            path: path.to_path_buf(),
            source_metamodel: None,
            target_metamodel: None,
            transformation: None,
            base: None,
            tests: Vec::new(),
            output: out_root.join("out"),
            config: Config::default(),
            benchmark: Vec::new(),
            class_weights: ErrorClass::DEFAULT_WEIGHTS,
            mutants: None,
            seeds: vec![0],
            configs: SdMode::ALL.to_vec(),
        };
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| CliError::Manifest { line: n + 1, message: msg.to_string() };
            let (key, value) = line.split_once('=').ok_or_else(|| bad("expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            let invalid = || bad(&format!("invalid value `{value}` for `{key}`"));
            let num = || value.parse::<usize>().map_err(|_| invalid());
            let prob = || value.parse::<f64>().map_err(|_| invalid());
            match key {
                "source_metamodel" => m.source_metamodel = Some(dir.join(value)),
                "target_metamodel" => m.target_metamodel = Some(dir.join(value)),
                "transformation" => m.transformation = Some(dir.join(value)),
                "base" => m.base = Some(dir.join(value)),
                "mutants" => m.mutants = Some(dir.join(value)),
                "output" => m.output = out_root.join(value),
                "test" => {
                    let parts: Vec<&str> = value.split(':').map(str::trim).collect();
                    let [id, input, expected] = parts[..] else {
                        return Err(bad("expected `test = id : input : expected`"));
                    };
                    if m.tests.iter().any(|t| t.id == id) {
                        return Err(bad(&format!("duplicate test id `{id}`")));
                    }
                    m.tests.push(TestSpec { id: id.into(), input: dir.join(input), expected: dir.join(expected) });
                }
                "seed" => m.config.seed = value.parse().map_err(|_| invalid())?,
                "sd_mode" => m.config.sd_mode = value.parse().map_err(|_| invalid())?,
                "max_generations" => m.config.max_generations = num()?,
                "population" => m.config.population = num()?,
                "mutation_prob" => m.config.mutation_prob = prob()?,
                "crossover_prob" => m.config.crossover_prob = prob()?,
                "max_patch_len" => m.config.mutation.max_len = num()?,
                "parallel" => m.config.parallel = value.parse().map_err(|_| invalid())?,
                "seeds" => m.seeds = list(value, |s| s.parse().ok()).ok_or_else(invalid)?,
                "configs" => m.configs = list(value, |s| s.parse().ok()).ok_or_else(invalid)?,
                "benchmark" => {
                    m.benchmark = list(value, |s| {
                        let (k, r) = s.split_once('x')?;
                        Some((k.trim().parse().ok()?, r.trim().parse().ok()?))
                    })
                    .ok_or_else(invalid)?
                }
                "class_weights" => {
                    let pairs = list(value, |s| {
                        let (c, w) = s.split_once(':')?;
                        Some((c.trim().parse::<ErrorClass>().ok()?, w.trim().parse::<u32>().ok()?))
                    })
                    .ok_or_else(invalid)?;
                    for (c, w) in pairs {
                        let i = ErrorClass::ALL.iter().position(|x| *x == c).expect("listed");
                        m.class_weights[i] = w;
                    }
                }
                _ => return Err(bad(&format!("unknown key `{key}`"))),
            }
        }
        Ok(m)
    }

    /// Where `mutate` writes bundles and `experiment` reads them.
    pub fn mutants_dir(&self) -> PathBuf {
        self.mutants.clone().unwrap_or_else(|| self.output.join("mutants"))
    }

    pub fn require<'a>(&self, value: &'a Option<PathBuf>, key: &str) -> Result<&'a Path, CliError> {
        value.as_deref().ok_or_else(|| CliError::Manifest { line: 0, message: format!("missing `{key}` entry") })
    }
}
