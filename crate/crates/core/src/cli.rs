//! Experiment runner: sweeps, CSV output, preset files, savings arithmetic.
//!
//! The binary in `src/bin/ccnsim.rs` is a thin argument parser over these
//! functions so they stay testable.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use crate::config::{key_values, presets, ScenarioConfig};
use crate::engine::{run, traffic_savings, MetricsReport};
use crate::topology::Topology;

pub const CSV_HEADER: &str = "scenario,strategy,policy,cache_bytes,scale,seed,cache_hit_ratio,avg_hops,avg_delay_ms,replications,events";

/// A base scenario plus axes whose cross product (times `seeds`) defines
/// the runs of a sweep.
///
/// ```text
/// topology = abilene
/// alpha = 0.8
/// axis.strategy = LCE, 2-LRU, LCD
/// axis.cache_size = 1MB, 10MB
/// seeds = 1..5
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: ScenarioConfig,
    /// `(key, values)` in file order; the last axis varies fastest.
    pub axes: Vec<(String, Vec<String>)>,
    /// Empty means "the base seed only".
    pub seeds: Vec<u64>,
}

impl SweepSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut base = ScenarioConfig::default();
        let mut axes: Vec<(String, Vec<String>)> = Vec::new();
        let mut seeds = Vec::new();
        for (line, key, value) in key_values(text)? {
            if let Some(axis) = key.strip_prefix("axis.") {
                if !ScenarioConfig::is_known_key(axis) || axis == "seed" {
                    bail!("line {line}: cannot sweep over {axis:?}");
                }
                if axes.iter().any(|(k, _)| k == axis) {
                    bail!("line {line}: axis {axis:?} declared twice");
                }
                let values: Vec<String> = value
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
                if values.is_empty() {
                    bail!("line {line}: axis {axis:?} has no values");
                }
                axes.push((axis.to_string(), values));
            } else if key == "seeds" {
                seeds = parse_seeds(&value).with_context(|| format!("line {line}"))?;
            } else {
                base.set(&key, &value)
                    .map_err(|e| anyhow::anyhow!("line {line}: {e}"))?;
            }
        }
        Ok(SweepSpec { base, axes, seeds })
    }

    /// Every run configuration, in a fixed order.
    pub fn expand(&self) -> Result<Vec<ScenarioConfig>> {
        let mut configs = vec![self.base.clone()];
        for (key, values) in &self.axes {
            let mut next = Vec::with_capacity(configs.len() * values.len());
            for cfg in &configs {
                for v in values {
                    let mut c = cfg.clone();
                    c.set(key, v)
                        .map_err(|e| anyhow::anyhow!("axis {key}: {e}"))?;
                    next.push(c);
                }
            }
            configs = next;
        }
        if self.seeds.is_empty() {
            return Ok(configs);
        }
        let mut out = Vec::with_capacity(configs.len() * self.seeds.len());
        for cfg in &configs {
            for &seed in &self.seeds {
                out.push(ScenarioConfig {
                    seed,
                    ..cfg.clone()
                });
            }
        }
        Ok(out)
    }
}

/// `1,2,3`, `1..5` (inclusive) or a mix of both.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u64 = lo.trim().parse().context("bad seed range")?;
            let hi: u64 = hi.trim().parse().context("bad seed range")?;
            if hi < lo {
                bail!("empty seed range {part}");
            }
            seeds.extend(lo..=hi);
        } else {
            seeds.push(part.parse().with_context(|| format!("bad seed {part:?}"))?);
        }
    }
    if seeds.is_empty() {
        bail!("no seeds given");
    }
    Ok(seeds)
}

/// Runs every configuration on at most `jobs` threads and returns reports
/// sorted by (config hash, seed). Topology files resolve against `base_dir`.
pub fn run_all(
    configs: &[ScenarioConfig],
    jobs: usize,
    base_dir: Option<&Path>,
) -> Result<Vec<MetricsReport>> {
    let mut topologies: BTreeMap<String, Topology> = BTreeMap::new();
    for cfg in configs {
        if !topologies.contains_key(&cfg.topology) {
            topologies.insert(cfg.topology.clone(), cfg.load_topology(base_dir)?);
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .context("cannot start worker pool")?;
    let results: Vec<Result<MetricsReport>> = pool.install(|| {
        configs
            .par_iter()
            .map(|cfg| {
                run(cfg, &topologies[&cfg.topology]).with_context(|| {
                    format!("{} / {} seed {}", cfg.scenario, cfg.strategy, cfg.seed)
                })
            })
            .collect()
    });
    let mut reports = results.into_iter().collect::<Result<Vec<_>>>()?;
    sort_reports(&mut reports);
    Ok(reports)
}

pub fn sort_reports(reports: &mut [MetricsReport]) {
    reports.sort_by(|a, b| a.config_hash.cmp(&b.config_hash).then(a.seed.cmp(&b.seed)));
}

fn opt(v: Option<f64>, prec: usize) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.prec$}"))
}

pub fn csv_row(r: &MetricsReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        r.scenario,
        r.strategy,
        r.policy,
        r.cache_bytes,
        r.scale,
        r.seed,
        opt(r.cache_hit_ratio(), 6),
        opt(r.avg_hops(), 6),
        opt(r.avg_delay_ms(), 6),
        r.replication_count,
        r.events_processed,
    )
}

/// Header plus one row per report, in the given order.
pub fn write_csv<W: Write>(out: &mut W, reports: &[MetricsReport]) -> io::Result<usize> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in reports {
        writeln!(out, "{}", csv_row(r))?;
    }
    Ok(reports.len())
}

/// Writes the CSV file and returns the number of data rows.
pub fn emit_csv(reports: &[MetricsReport], path: &Path) -> io::Result<usize> {
    let mut buf = Vec::new();
    let n = write_csv(&mut buf, reports)?;
    fs::write(path, buf)?;
    Ok(n)
}

/// Writes the six preset scenario files into `dir`.
pub fn write_presets(dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (stem, cfg) in presets::all() {
        let path = dir.join(format!("{stem}.conf"));
        fs::write(&path, cfg.to_config_string())?;
        written.push(path);
    }
    Ok(written)
}

pub fn format_savings(daily_volume_tb: f64, hit_ratio: f64) -> Result<String> {
    let tb = traffic_savings(daily_volume_tb, hit_ratio)?;
    Ok(format!("{tb:.1} TB/day"))
}

/// Reads a scenario file and applies command-line overrides.
pub fn load_scenario(path: &Path, seed: Option<u64>, scale: Option<u64>) -> Result<ScenarioConfig> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut cfg = ScenarioConfig::parse(&text).with_context(|| format!("in {}", path.display()))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(s) = scale {
        cfg.scale = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_syntax() {
        assert_eq!(parse_seeds("1..3, 7").unwrap(), vec![1, 2, 3, 7]);
        assert!(parse_seeds("3..1").is_err());
        assert!(parse_seeds("x").is_err());
        assert!(parse_seeds("").is_err());
    }

    #[test]
    fn sweep_cross_product_order() {
        let spec = SweepSpec::parse(
            "alpha = 0.9\naxis.strategy = LCE, LCD\naxis.cache_size = 4KB, 8KB\nseeds = 1..2\n",
        )
        .unwrap();
        let runs = spec.expand().unwrap();
        assert_eq!(runs.len(), 8);
        assert!(runs.iter().all(|c| c.alpha == 0.9));
        let labels: Vec<_> = runs
            .iter()
            .map(|c| format!("{}/{}/{}", c.strategy, c.cache_bytes, c.seed))
            .collect();
        assert_eq!(labels[0], "LCE/4096/1");
        assert_eq!(labels[1], "LCE/4096/2");
        assert_eq!(labels[2], "LCE/8192/1");
        assert_eq!(labels[7], "LCD/8192/2");
    }

    #[test]
    fn sweep_rejects_bad_axes() {
        assert!(SweepSpec::parse("axis.color = red\n").is_err());
        assert!(SweepSpec::parse("axis.seed = 1,2\n").is_err());
        assert!(SweepSpec::parse("axis.alpha = 1\naxis.alpha = 2\n").is_err());
        let bad_value = SweepSpec::parse("axis.strategy = LCE, NOPE\n").unwrap();
        assert!(bad_value.expand().is_err());
    }

    #[test]
    fn savings_text() {
        assert_eq!(format_savings(8600.0, 0.027).unwrap(), "232.2 TB/day");
        assert_eq!(format_savings(8600.0, 0.005).unwrap(), "43.0 TB/day");
    }
}
