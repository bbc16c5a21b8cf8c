//! Experiment settings: a flat `key = value` file overridden by flags.
//!
//! Keys are the long flag names; `-` and `_` are interchangeable. Lines
//! starting with `#` are comments.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rulingset_core::modelcheck::Start;
use rulingset_core::verifier::random_configuration;
use rulingset_core::{Configuration, Daemon, Graph, GraphKind, NodeSet, Params, XorShift64Star};

use crate::error::{read_file, CliError};
use crate::formats::{parse_config, parse_graph};

pub const KEYS: &[&str] = &[
    "graph",
    "gen",
    "n",
    "rows",
    "cols",
    "max_degree",
    "graph_seed",
    "k",
    "daemon",
    "p",
    "script",
    "seed",
    "max_steps",
    "inject",
    "init",
    "runs",
    "jobs",
    "trace",
    "out",
    "state",
    "layers",
    "layer_cap",
    "big_k",
    "problem",
    "budget",
    "from",
    "check",
    "format",
];

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", i + 1)))?;
        let key = normalize(key);
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("config line {}: unknown key {key:?}", i + 1)));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!("config line {}: duplicate key {key:?}", i + 1)));
        }
    }
    Ok(map)
}

/// Resolved key/value settings of one command invocation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Settings {
    map: BTreeMap<String, String>,
    /// Directory relative file names in a config file are resolved against.
    base: Option<PathBuf>,
}

impl Settings {
    pub fn new() -> Self {
        Settings::default()
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let map = parse_kv(&read_file(path)?)?;
        Ok(Settings { map, base: path.parent().map(Path::to_path_buf) })
    }

    /// Flag values win over file values.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        let key = normalize(key);
        debug_assert!(KEYS.contains(&key.as_str()), "unknown key {key}");
        self.map.insert(key, value.to_string());
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.set(key, value);
        self
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.str(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| CliError::Usage(format!("invalid value for {key}: {v:?}"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        self.get(key)?.ok_or_else(|| CliError::Usage(format!("missing required setting {key}")))
    }

    /// A file path; file-relative when it came from a config file.
    pub fn path(&self, key: &str) -> Option<PathBuf> {
        let p = PathBuf::from(self.str(key)?);
        match &self.base {
            Some(base) if p.is_relative() && !p.exists() => Some(base.join(p)),
            _ => Some(p),
        }
    }

    pub fn graph(&self) -> Result<Graph, CliError> {
        match (self.path("graph"), self.str("gen")) {
            (Some(_), Some(_)) => Err(CliError::Usage("give either graph or gen, not both".into())),
            (Some(path), None) => parse_graph(&read_file(&path)?),
            (None, Some(kind)) => Ok(Graph::generate(&self.graph_kind(kind)?)?),
            (None, None) => Err(CliError::Usage("no graph: set graph (a file) or gen".into())),
        }
    }

    fn graph_kind(&self, kind: &str) -> Result<GraphKind, CliError> {
        Ok(match kind {
            "path" => GraphKind::Path { n: self.require("n")? },
            "cycle" => GraphKind::Cycle { n: self.require("n")? },
            "grid" => GraphKind::Grid { rows: self.require("rows")?, cols: self.require("cols")? },
            "random" => GraphKind::RandomBoundedDegree {
                n: self.require("n")?,
                max_degree: self.require("max_degree")?,
                seed: self.get_or("graph_seed", 0)?,
            },
            other => return Err(CliError::Usage(format!("unknown generator {other:?} (path, cycle, grid, random)"))),
        })
    }

    pub fn params(&self, default_k: Option<u32>) -> Result<Params, CliError> {
        let k = match default_k {
            Some(d) => self.get_or("k", d)?,
            None => self.require("k")?,
        };
        Ok(Params::new(k)?)
    }

    pub fn daemon(&self, default: Daemon) -> Result<Daemon, CliError> {
        let Some(name) = self.str("daemon") else {
            return Ok(default);
        };
        let d = match name {
            "synchronous" => Daemon::Synchronous,
            "central-random" | "central_random" => Daemon::CentralRandom,
            "subset-random" | "subset_random" => Daemon::SubsetRandom(self.get_or("p", 0.5)?),
            "round-robin" | "round_robin" => Daemon::RoundRobinFair,
            "scripted" => Daemon::Scripted(parse_script(
                self.str("script").ok_or_else(|| CliError::Usage("the scripted daemon needs script".into()))?,
            )?),
            other => {
                return Err(CliError::Usage(format!(
                    "unknown daemon {other:?} (synchronous, central-random, subset-random, round-robin, scripted)"
                )))
            }
        };
        if let Daemon::SubsetRandom(p) = d {
            if !(p > 0.0 && p <= 1.0) {
                return Err(CliError::Usage(format!("p must be in (0, 1], got {p}")));
            }
        }
        Ok(d)
    }

    /// `step:m` pairs separated by commas, sorted by step.
    pub fn injections(&self) -> Result<Vec<(u64, usize)>, CliError> {
        let Some(spec) = self.str("inject") else {
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let bad = || CliError::Usage(format!("invalid injection {item:?}, expected step:m"));
            let (s, m) = item.split_once(':').ok_or_else(bad)?;
            out.push((s.trim().parse().map_err(|_| bad())?, m.trim().parse().map_err(|_| bad())?));
        }
        out.sort();
        Ok(out)
    }

    /// Initial configuration: `random` (default), `uniform`, or a JSON file.
    pub fn initial(&self, params: Params, n: usize, rng: &mut XorShift64Star) -> Result<Configuration, CliError> {
        match self.str("init").unwrap_or("random") {
            "random" => Ok(random_configuration(params, n, rng)),
            "uniform" => Ok(Configuration::uniform(params, n)),
            _ => {
                let cfg = parse_config(&read_file(&self.path("init").unwrap())?)?;
                if cfg.params != params || cfg.n() != n {
                    return Err(CliError::Usage(format!(
                        "initial configuration has k={} n={}, expected k={} n={n}",
                        cfg.params.k(),
                        cfg.n(),
                        params.k()
                    )));
                }
                Ok(cfg)
            }
        }
    }

    /// `all` or `sample:m:seed`.
    pub fn start(&self) -> Result<Start, CliError> {
        match self.str("from").unwrap_or("all") {
            "all" => Ok(Start::All),
            s => {
                let bad = || CliError::Usage(format!("invalid from {s:?}, expected all or sample:m:seed"));
                let parts: Vec<&str> = s.split(':').collect();
                match parts.as_slice() {
                    ["sample", m, seed] => {
                        Ok(Start::Sample { m: m.parse().map_err(|_| bad())?, seed: seed.parse().map_err(|_| bad())? })
                    }
                    _ => Err(bad()),
                }
            }
        }
    }
}

/// Selections separated by `;`, nodes within one by spaces or commas.
pub fn parse_script(text: &str) -> Result<Vec<NodeSet>, CliError> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|sel| {
            sel.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| t.parse().map_err(|_| CliError::Usage(format!("invalid node {t:?} in script"))))
                .collect()
        })
        .collect()
}
