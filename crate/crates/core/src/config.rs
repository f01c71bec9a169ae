//! Scenario configuration and its flat `key = value` file format.
//!
//! ```text
//! # comments start with '#'
//! scenario = OSN
//! catalog_size = 100000000
//! avg_filesize = 10MB
//! cache_size = 10GB
//! strategy = LCD
//! ```
//!
//! Byte sizes accept binary suffixes (`KB` = 1024 B, `MB`, `GB`, `TB`, `PB`).
//! Unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::content_store::ReplacementPolicy;
use crate::strategies::{
    CachingStrategy, MagicParams, MpcParams, ProbCacheParams, StrategyKind, DEFAULT_MPC_THRESHOLD,
    DEFAULT_POPULARITY_CAPACITY, DEFAULT_T_TW,
};
use crate::topology::{builtin, NodeId, Topology, TopologyError};

pub const KB: u64 = 1024;
pub const MB: u64 = 1024 * KB;
pub const GB: u64 = 1024 * MB;
pub const TB: u64 = 1024 * GB;
pub const PB: u64 = 1024 * TB;

pub const DEFAULT_CHUNK_SIZE: u64 = 4 * KB;
pub const DEFAULT_DURATION_S: f64 = 86_400.0;
pub const DEFAULT_REQUEST_RATE: f64 = 1.0;
pub const DEFAULT_WARMUP_FRACTION: f64 = 0.1;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key {key:?} given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("{key}: {reason}")]
    InvalidValue { key: String, reason: String },
    #[error("topology {name:?}: {reason}")]
    Topology { name: String, reason: String },
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioName {
    Isp,
    Vod,
    Osn,
    Custom,
}

impl ScenarioName {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Isp => "ISP",
            Self::Vod => "VOD",
            Self::Osn => "OSN",
            Self::Custom => "CUSTOM",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ISP" => Ok(Self::Isp),
            "VOD" => Ok(Self::Vod),
            "OSN" => Ok(Self::Osn),
            "CUSTOM" => Ok(Self::Custom),
            other => Err(format!("unknown scenario {other:?}")),
        }
    }
}

/// Strategy parameters; each strategy reads only its own fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyParams {
    pub probcache_t_tw: f64,
    pub mpc_threshold: u32,
    pub popularity_capacity: usize,
    /// `None`: same number of entries as the Content Store holds chunks.
    pub two_lru_name_capacity: Option<usize>,
}

impl Default for StrategyParams {
    fn default() -> Self {
        StrategyParams {
            probcache_t_tw: DEFAULT_T_TW,
            mpc_threshold: DEFAULT_MPC_THRESHOLD,
            popularity_capacity: DEFAULT_POPULARITY_CAPACITY,
            two_lru_name_capacity: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: ScenarioName,
    /// Builtin topology name or a path to a topology file.
    pub topology: String,
    pub catalog_size: u64,
    pub avg_filesize: u64,
    pub chunk_size: u64,
    pub alpha: f64,
    pub beta: f64,
    /// Per-router cache, bytes, before scaling.
    pub cache_bytes: u64,
    pub duration_s: f64,
    /// Poisson requests per second per client.
    pub request_rate: f64,
    pub strategy: StrategyKind,
    pub params: StrategyParams,
    pub policy: ReplacementPolicy,
    pub seed: u64,
    /// Catalog size and cache size are both divided by this factor.
    pub scale: u64,
    /// Leading share of simulated time excluded from metrics.
    pub warmup_fraction: f64,
    /// `None`: farthest leaf from the highest-betweenness router.
    pub producer: Option<NodeId>,
    /// `None`: every router except the producer.
    pub clients: Option<Vec<NodeId>>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            scenario: ScenarioName::Custom,
            topology: "abilene".into(),
            catalog_size: 10_000,
            avg_filesize: DEFAULT_CHUNK_SIZE,
            chunk_size: DEFAULT_CHUNK_SIZE,
            alpha: 0.8,
            beta: 0.0,
            cache_bytes: 100 * DEFAULT_CHUNK_SIZE,
            duration_s: DEFAULT_DURATION_S,
            request_rate: DEFAULT_REQUEST_RATE,
            strategy: StrategyKind::Lce,
            params: StrategyParams::default(),
            policy: ReplacementPolicy::Lru,
            seed: 1,
            scale: 1,
            warmup_fraction: DEFAULT_WARMUP_FRACTION,
            producer: None,
            clients: None,
        }
    }
}

const KEYS: &[&str] = &[
    "scenario",
    "topology",
    "catalog_size",
    "avg_filesize",
    "chunk_size",
    "alpha",
    "beta",
    "cache_size",
    "duration",
    "request_rate",
    "strategy",
    "policy",
    "seed",
    "scale",
    "warmup_fraction",
    "producer",
    "clients",
    "probcache_t_tw",
    "mpc_threshold",
    "popularity_capacity",
    "two_lru_name_capacity",
];

impl ScenarioConfig {
    pub fn caching_strategy(&self) -> CachingStrategy {
        let p = &self.params;
        match self.strategy {
            StrategyKind::Lce => CachingStrategy::Lce,
            StrategyKind::TwoLru => CachingStrategy::TwoLru {
                name_capacity: p.two_lru_name_capacity,
            },
            StrategyKind::Clfm => CachingStrategy::Clfm,
            StrategyKind::ProbCache => CachingStrategy::ProbCache(ProbCacheParams {
                t_tw: p.probcache_t_tw,
            }),
            StrategyKind::Magic => CachingStrategy::Magic(MagicParams {
                popularity_capacity: p.popularity_capacity,
            }),
            StrategyKind::Lcd => CachingStrategy::Lcd,
            StrategyKind::Mpc => CachingStrategy::Mpc(MpcParams {
                threshold: p.mpc_threshold,
                popularity_capacity: p.popularity_capacity,
            }),
        }
    }

    /// Objects simulated after dividing by the scale factor (at least one).
    pub fn scaled_catalog_size(&self) -> u64 {
        (self.catalog_size / self.scale.max(1)).max(1)
    }

    pub fn scaled_cache_bytes(&self) -> u64 {
        self.cache_bytes / self.scale.max(1)
    }

    /// Per-router Content Store capacity in chunks.
    pub fn cache_capacity_chunks(&self) -> usize {
        if self.chunk_size == 0 {
            return 0;
        }
        (self.scaled_cache_bytes() / self.chunk_size) as usize
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.catalog_size == 0 {
            return Err(invalid("catalog_size", "must be positive"));
        }
        if self.avg_filesize == 0 {
            return Err(invalid("avg_filesize", "must be positive"));
        }
        if self.chunk_size == 0 {
            return Err(invalid("chunk_size", "must be positive"));
        }
        if self.scale == 0 {
            return Err(invalid("scale", "must be at least 1"));
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(invalid("duration", "must be positive"));
        }
        if !(self.request_rate >= 0.0 && self.request_rate.is_finite()) {
            return Err(invalid("request_rate", "must be finite and non-negative"));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha", "must be finite and non-negative"));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(invalid("beta", "must be finite and non-negative"));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(invalid("warmup_fraction", "must lie in [0, 1)"));
        }
        if self.cache_bytes > 0 && self.cache_capacity_chunks() == 0 {
            return Err(invalid(
                "cache_size",
                format!(
                    "{} B scaled by 1/{} is smaller than one {} B chunk",
                    self.cache_bytes, self.scale, self.chunk_size
                ),
            ));
        }
        if let Some(clients) = &self.clients {
            if clients.is_empty() {
                return Err(invalid("clients", "list is empty"));
            }
        }
        self.caching_strategy()
            .validate()
            .map_err(|e| invalid("strategy", e))
    }

    /// Resolves `topology` as a builtin name, else as a file path relative to
    /// `base_dir`.
    pub fn load_topology(&self, base_dir: Option<&Path>) -> Result<Topology, ConfigError> {
        let terr = |reason: String| ConfigError::Topology {
            name: self.topology.clone(),
            reason,
        };
        if let Some(res) = builtin::load(&self.topology) {
            return res.map_err(|e: TopologyError| terr(e.to_string()));
        }
        let mut path = PathBuf::from(&self.topology);
        if path.is_relative() {
            if let Some(base) = base_dir {
                path = base.join(path);
            }
        }
        let text = std::fs::read_to_string(&path)
            .map_err(|e| terr(format!("cannot read {}: {e}", path.display())))?;
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.topology.clone());
        Topology::parse(label, &text).map_err(|e| terr(e.to_string()))
    }

    /// Ordered `(key, value)` pairs; parsing them back yields `self`.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let p = &self.params;
        vec![
            ("scenario", self.scenario.to_string()),
            ("topology", self.topology.clone()),
            ("catalog_size", self.catalog_size.to_string()),
            ("avg_filesize", format_bytes(self.avg_filesize)),
            ("chunk_size", format_bytes(self.chunk_size)),
            ("alpha", self.alpha.to_string()),
            ("beta", self.beta.to_string()),
            ("cache_size", format_bytes(self.cache_bytes)),
            ("duration", self.duration_s.to_string()),
            ("request_rate", self.request_rate.to_string()),
            ("strategy", self.strategy.to_string()),
            ("policy", self.policy.to_string()),
            ("seed", self.seed.to_string()),
            ("scale", self.scale.to_string()),
            ("warmup_fraction", self.warmup_fraction.to_string()),
            (
                "producer",
                self.producer
                    .map_or_else(|| "auto".into(), |n| n.to_string()),
            ),
            (
                "clients",
                self.clients.as_ref().map_or_else(
                    || "all".into(),
                    |c| {
                        c.iter()
                            .map(|n| n.to_string())
                            .collect::<Vec<_>>()
                            .join(",")
                    },
                ),
            ),
            ("probcache_t_tw", p.probcache_t_tw.to_string()),
            ("mpc_threshold", p.mpc_threshold.to_string()),
            ("popularity_capacity", p.popularity_capacity.to_string()),
            (
                "two_lru_name_capacity",
                p.two_lru_name_capacity
                    .map_or_else(|| "auto".into(), |c| c.to_string()),
            ),
        ]
    }

    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.to_pairs() {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        }
        out
    }

    /// Stable digest of everything except the seed; groups runs that differ
    /// only by seed.
    pub fn config_hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.to_pairs() {
            if k != "seed" {
                h.update(k.as_bytes());
                h.update(b"=");
                h.update(v.as_bytes());
                h.update(b"\n");
            }
        }
        h.finalize()[..8]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        let k = key.trim();
        let err = |reason: String| invalid(k, reason);
        match k {
            "scenario" => self.scenario = v.parse().map_err(err)?,
            "topology" => {
                if v.is_empty() {
                    return Err(err("empty".into()));
                }
                self.topology = v.to_string()
            }
            "catalog_size" => self.catalog_size = parse_count(v).map_err(err)?,
            "avg_filesize" => self.avg_filesize = parse_bytes(v).map_err(err)?,
            "chunk_size" => self.chunk_size = parse_bytes(v).map_err(err)?,
            "alpha" => self.alpha = parse_f64(v).map_err(err)?,
            "beta" => self.beta = parse_f64(v).map_err(err)?,
            "cache_size" | "cache_bytes" => self.cache_bytes = parse_bytes(v).map_err(err)?,
            "duration" => self.duration_s = parse_f64(v).map_err(err)?,
            "request_rate" => self.request_rate = parse_f64(v).map_err(err)?,
            "strategy" => self.strategy = v.parse().map_err(err)?,
            "policy" => self.policy = v.parse().map_err(err)?,
            "seed" => self.seed = parse_count(v).map_err(err)?,
            "scale" => self.scale = parse_count(v).map_err(err)?,
            "warmup_fraction" => self.warmup_fraction = parse_f64(v).map_err(err)?,
            "producer" => {
                self.producer = if v.eq_ignore_ascii_case("auto") {
                    None
                } else {
                    Some(NodeId(parse_count(v).map_err(err)? as u32))
                }
            }
            "clients" => {
                self.clients = if v.eq_ignore_ascii_case("all") {
                    None
                } else {
                    Some(
                        v.split(',')
                            .map(|s| parse_count(s.trim()).map(|n| NodeId(n as u32)))
                            .collect::<Result<_, _>>()
                            .map_err(err)?,
                    )
                }
            }
            "probcache_t_tw" => self.params.probcache_t_tw = parse_f64(v).map_err(err)?,
            "mpc_threshold" => self.params.mpc_threshold = parse_count(v).map_err(err)? as u32,
            "popularity_capacity" => {
                self.params.popularity_capacity = parse_count(v).map_err(err)? as usize
            }
            "two_lru_name_capacity" => {
                self.params.two_lru_name_capacity = if v.eq_ignore_ascii_case("auto") {
                    None
                } else {
                    Some(parse_count(v).map_err(err)? as usize)
                }
            }
            _ => {
                return Err(ConfigError::UnknownKey {
                    line: 0,
                    key: k.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Parses a scenario file. Missing keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ScenarioConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (line, key, value) in key_values(text)? {
            if seen.contains(&key) {
                return Err(ConfigError::DuplicateKey { line, key });
            }
            cfg.set(&key, &value).map_err(|e| match e {
                ConfigError::UnknownKey { key, .. } => ConfigError::UnknownKey { line, key },
                other => other,
            })?;
            seen.push(key);
        }
        Ok(cfg)
    }

    pub fn is_known_key(key: &str) -> bool {
        KEYS.contains(&key) || key == "cache_bytes"
    }
}

/// Splits a `key = value` document into `(line, key, value)` triples.
pub fn key_values(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                reason: format!("expected `key = value`, got {:?}", raw.trim()),
            });
        };
        let k = k.trim();
        if k.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                reason: "empty key".into(),
            });
        }
        out.push((line, k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Parses `4096`, `4KB`, `10 MB`, `1TB` (binary multiples).
pub fn parse_bytes(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let split = s
        .find(|c: char| !(c.is_ascii_digit() || c == '.'))
        .unwrap_or(s.len());
    let (num, unit) = s.split_at(split);
    let mult = match unit.trim().to_ascii_uppercase().as_str() {
        "" | "B" => 1,
        "K" | "KB" | "KIB" => KB,
        "M" | "MB" | "MIB" => MB,
        "G" | "GB" | "GIB" => GB,
        "T" | "TB" | "TIB" => TB,
        "P" | "PB" | "PIB" => PB,
        other => return Err(format!("unknown size unit {other:?}")),
    };
    if let Ok(n) = num.parse::<u64>() {
        return n
            .checked_mul(mult)
            .ok_or_else(|| format!("size {s:?} overflows"));
    }
    let f: f64 = num.parse().map_err(|_| format!("bad size {s:?}"))?;
    let bytes = f * mult as f64;
    if !(bytes >= 0.0 && bytes < u64::MAX as f64) || bytes.fract() != 0.0 {
        return Err(format!("size {s:?} is not a whole number of bytes"));
    }
    Ok(bytes as u64)
}

/// Largest binary unit that divides `bytes` exactly.
pub fn format_bytes(bytes: u64) -> String {
    for (mult, unit) in [(PB, "PB"), (TB, "TB"), (GB, "GB"), (MB, "MB"), (KB, "KB")] {
        if bytes >= mult && bytes.is_multiple_of(mult) {
            return format!("{}{unit}", bytes / mult);
        }
    }
    bytes.to_string()
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>()
        .map_err(|_| format!("expected a number, got {s:?}"))
}

/// Integer, also accepting exact scientific notation such as `1e12`.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let f: f64 = s
        .parse()
        .map_err(|_| format!("expected a non-negative integer, got {s:?}"))?;
    if f >= 0.0 && f.fract() == 0.0 && f <= 9.007_199_254_740_992e15 {
        Ok(f as u64)
    } else {
        Err(format!("expected a non-negative integer, got {s:?}"))
    }
}

/// The three evaluation scenarios, each with its two per-router cache sizes.
pub mod presets {
    use super::*;

    /// Scale factors keep each scaled catalog at 10^5 objects.
    pub const ISP_SCALE: u64 = 10_000_000;
    pub const VOD_SCALE: u64 = 10_000;
    pub const OSN_SCALE: u64 = 1_000;

    // Per-client request rates: one simulated day on Abilene issues roughly
    // 10^6 chunk Interests per preset, a few seconds of wall time. Objects
    // with more chunks get proportionally fewer requests.
    pub const ISP_RATE: f64 = 0.4;
    pub const VOD_RATE: f64 = 0.000_05;
    pub const OSN_RATE: f64 = 0.000_5;

    fn base(scenario: ScenarioName) -> ScenarioConfig {
        ScenarioConfig {
            scenario,
            topology: "abilene".into(),
            chunk_size: 4 * KB,
            duration_s: 86_400.0,
            beta: 0.0,
            ..ScenarioConfig::default()
        }
    }

    pub fn isp(cache_bytes: u64) -> ScenarioConfig {
        ScenarioConfig {
            catalog_size: 1_000_000_000_000,
            avg_filesize: 10 * KB,
            alpha: 0.65,
            cache_bytes,
            scale: ISP_SCALE,
            request_rate: ISP_RATE,
            ..base(ScenarioName::Isp)
        }
    }

    pub fn vod(cache_bytes: u64) -> ScenarioConfig {
        ScenarioConfig {
            catalog_size: 1_000_000_000,
            avg_filesize: 100 * MB,
            alpha: 0.75,
            cache_bytes,
            scale: VOD_SCALE,
            request_rate: VOD_RATE,
            ..base(ScenarioName::Vod)
        }
    }

    pub fn osn(cache_bytes: u64) -> ScenarioConfig {
        ScenarioConfig {
            catalog_size: 100_000_000,
            avg_filesize: 10 * MB,
            alpha: 1.14,
            cache_bytes,
            scale: OSN_SCALE,
            request_rate: OSN_RATE,
            ..base(ScenarioName::Osn)
        }
    }

    /// `(file stem, config)` for the six preset runs.
    pub fn all() -> Vec<(String, ScenarioConfig)> {
        vec![
            ("isp_100GB".into(), isp(100 * GB)),
            ("isp_1TB".into(), isp(TB)),
            ("vod_25GB".into(), vod(25 * GB)),
            ("vod_250GB".into(), vod(250 * GB)),
            ("osn_10GB".into(), osn(10 * GB)),
            ("osn_100GB".into(), osn(100 * GB)),
        ]
    }
}
