//! Discrete-event simulator for in-network caching in content-centric networks.
//!
//! A run takes a [`config::ScenarioConfig`] and a [`topology::Topology`],
//! generates a Zipf-like request stream, forwards chunk Interests toward a
//! single producer and lets the configured caching strategy decide where the
//! returning Data is stored.
//!
//! ```
//! use ccnsim::config::ScenarioConfig;
//! use ccnsim::topology::builtin;
//!
//! let mut cfg = ScenarioConfig::default();
//! cfg.topology = "abilene".into();
//! cfg.catalog_size = 200;
//! cfg.duration_s = 200.0;
//! let topo = builtin::load("abilene").unwrap().unwrap();
//! let report = ccnsim::engine::run(&cfg, &topo).unwrap();
//! assert!(report.cache_hit_ratio().is_some());
//! ```

pub mod ccn_node;
pub mod cli;
pub mod config;
pub mod content_store;
pub mod engine;
pub mod strategies;
pub mod topology;
pub mod workload;

pub use config::ScenarioConfig;
pub use content_store::{ContentStore, ReplacementPolicy};
pub use engine::{run, MetricsReport};
pub use strategies::{CachingStrategy, StrategyKind};
pub use topology::{NodeId, Topology};

/// Random generator used for every stochastic decision.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Independent sub-seed for stream `stream` of a run seeded with `seed`
/// (SplitMix64 finaliser).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
