//! Experiment driver: builds the network for each run, sweeps the
//! parameter cross product over seeds in parallel and serializes results.

pub mod config;
pub mod offline;
pub mod validate;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::engine::{self, EngineError, SimConfig, SimReport};
use crate::strategy::Strategy;
use crate::topology::{self, assign_random_costs, Network, NodeId, TopologyError};
use crate::workload::{WorkloadError, ZipfCatalog};

pub use config::{ConfigError, ExperimentSpec, TopologySource};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "LCMSIM_OUTPUT_DIR";

pub const CSV_HEADER: &str =
    "strategy,policy,alpha,ratio,topology,seed,link_cost_paid,no_cache_cost,caching_gain,server_hits,requests_measured";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("topology {path}: {source}")]
    TopologyFile { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("writing {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub strategy: String,
    pub policy: String,
    pub alpha: f64,
    pub ratio: f64,
    pub topology: String,
    pub seed: u64,
    pub link_cost_paid: f64,
    pub no_cache_cost: f64,
    pub caching_gain: f64,
    pub server_hits: u64,
    pub requests_measured: u64,
    #[serde(skip)]
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSummary {
    pub strategy: String,
    pub policy: String,
    pub alpha: f64,
    pub ratio: f64,
    pub topology: String,
    pub runs: usize,
    pub mean_caching_gain: f64,
    pub std_caching_gain: f64,
    pub mean_link_cost_paid: f64,
    pub mean_server_hit_ratio: f64,
    pub mean_wall_time: f64,
}

pub fn load_topology(source: &TopologySource) -> Result<Network, HarnessError> {
    Ok(match source {
        TopologySource::Geant => topology::geant(),
        TopologySource::SingleCache => topology::single_cache(),
        TopologySource::File(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|source| HarnessError::TopologyFile { path: path.clone(), source })?;
            topology::load_network(&text)?
        }
    })
}

/// Splits `floor(ratio * catalog)` slots evenly over the nodes that source
/// nothing, handing the remainder to the smallest node ids.
pub fn cache_budgets(net: &Network, catalog_size: usize, ratio: f64) -> Result<Vec<usize>, TopologyError> {
    let sources = net.check_catalog(catalog_size)?;
    let cache_nodes: Vec<NodeId> = (0..net.node_count()).filter(|n| !sources.contains(n)).collect();
    let mut budgets = vec![0; net.node_count()];
    if cache_nodes.is_empty() {
        return Ok(budgets);
    }
    let total = (ratio * catalog_size as f64 + 1e-9).floor() as usize;
    let base = total / cache_nodes.len();
    let extra = total % cache_nodes.len();
    for (i, &n) in cache_nodes.iter().enumerate() {
        budgets[n] = base + usize::from(i < extra);
    }
    Ok(budgets)
}

/// Network for one run: costs redrawn under `seed` when choices are given,
/// capacities from the cache ratio.
pub fn prepare_network(
    base: &Network,
    spec: &ExperimentSpec,
    ratio: f64,
    seed: u64,
) -> Result<Network, TopologyError> {
    let net = if spec.cost_choices.is_empty() {
        base.clone()
    } else {
        assign_random_costs(base, &spec.cost_choices, seed)?
    };
    let budgets = cache_budgets(&net, spec.catalog_size, ratio)?;
    net.with_capacities(budgets)
}

#[derive(Debug, Clone, Copy)]
struct Job {
    alpha_idx: usize,
    ratio_idx: usize,
    strategy: Strategy,
    seed: u64,
}

fn jobs(spec: &ExperimentSpec) -> Vec<Job> {
    let mut out = Vec::new();
    for alpha_idx in 0..spec.zipf_alpha.len() {
        for ratio_idx in 0..spec.cache_ratio.len() {
            for &strategy in &spec.strategies {
                for &seed in &spec.seeds {
                    out.push(Job { alpha_idx, ratio_idx, strategy, seed });
                }
            }
        }
    }
    out
}

/// Runs every `(alpha, ratio, strategy, seed)` combination. Rows come back
/// in that nesting order regardless of completion order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>, HarnessError> {
    spec.validate()?;
    let base = load_topology(&spec.topology)?;
    let label = spec.topology.label();
    let catalogs: Vec<Arc<ZipfCatalog>> = spec
        .zipf_alpha
        .iter()
        .map(|&a| ZipfCatalog::new(spec.catalog_size, a).map(Arc::new))
        .collect::<Result<_, _>>()?;

    jobs(spec)
        .into_par_iter()
        .map(|job| {
            let ratio = spec.cache_ratio[job.ratio_idx];
            let net = Arc::new(prepare_network(&base, spec, ratio, job.seed)?);
            let config = SimConfig {
                network: net,
                catalog: Arc::clone(&catalogs[job.alpha_idx]),
                strategy: job.strategy,
                ewma_alpha: spec.ewma_alpha,
                rate: spec.rate,
                warmup: spec.warmup,
                measure: spec.measure,
                seed: job.seed,
                preload: None,
            };
            let report = engine::run(&config)?;
            Ok(row(job.strategy, spec.zipf_alpha[job.alpha_idx], ratio, &label, job.seed, &report))
        })
        .collect()
}

fn row(strategy: Strategy, alpha: f64, ratio: f64, topology: &str, seed: u64, r: &SimReport) -> ResultRow {
    ResultRow {
        strategy: strategy.kind_name().to_string(),
        policy: strategy.policy_name().to_string(),
        alpha,
        ratio,
        topology: topology.to_string(),
        seed,
        link_cost_paid: r.link_cost_paid,
        no_cache_cost: r.no_cache_cost,
        caching_gain: r.caching_gain,
        server_hits: r.server_hits,
        requests_measured: r.requests_measured,
        wall_time: r.wall_time,
    }
}

pub fn write_csv<W: Write>(out: W, rows: &[ResultRow]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|source| HarnessError::Output { path: PathBuf::from("<csv>"), source })?;
    Ok(())
}

pub fn csv_string(rows: &[ResultRow]) -> Result<String, HarnessError> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Mean and sample standard deviation per parameter point, in row order.
pub fn summarize(rows: &[ResultRow]) -> Vec<PointSummary> {
    let mut out: Vec<(PointSummary, Vec<&ResultRow>)> = Vec::new();
    for r in rows {
        let key = |s: &PointSummary| {
            s.strategy == r.strategy && s.policy == r.policy && s.alpha == r.alpha && s.ratio == r.ratio && s.topology == r.topology
        };
        match out.iter_mut().find(|(s, _)| key(s)) {
            Some((_, group)) => group.push(r),
            None => out.push((
                PointSummary {
                    strategy: r.strategy.clone(),
                    policy: r.policy.clone(),
                    alpha: r.alpha,
                    ratio: r.ratio,
                    topology: r.topology.clone(),
                    runs: 0,
                    mean_caching_gain: 0.0,
                    std_caching_gain: 0.0,
                    mean_link_cost_paid: 0.0,
                    mean_server_hit_ratio: 0.0,
                    mean_wall_time: 0.0,
                },
                vec![r],
            )),
        }
    }
    out.into_iter()
        .map(|(mut s, group)| {
            let n = group.len() as f64;
            let mean = |f: &dyn Fn(&ResultRow) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / n;
            s.runs = group.len();
            s.mean_caching_gain = mean(&|r| r.caching_gain);
            s.mean_link_cost_paid = mean(&|r| r.link_cost_paid);
            s.mean_server_hit_ratio = mean(&|r| r.server_hits as f64 / r.requests_measured as f64);
            s.mean_wall_time = mean(&|r| r.wall_time);
            s.std_caching_gain = if group.len() > 1 {
                let var = group.iter().map(|r| (r.caching_gain - s.mean_caching_gain).powi(2)).sum::<f64>() / (n - 1.0);
                var.sqrt()
            } else {
                0.0
            };
            s
        })
        .collect()
}

/// Writes `<prefix>.csv` and `<prefix>.json`, returning both paths.
pub fn write_outputs(prefix: &Path, rows: &[ResultRow]) -> Result<(PathBuf, PathBuf), HarnessError> {
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| HarnessError::Output { path: dir.into(), source })?;
    }
    let csv_path = prefix.with_extension("csv");
    let json_path = prefix.with_extension("json");
    let file = std::fs::File::create(&csv_path).map_err(|source| HarnessError::Output { path: csv_path.clone(), source })?;
    write_csv(file, rows)?;
    let summary = summarize(rows);
    let json = serde_json::to_string_pretty(&summary)?;
    std::fs::write(&json_path, json + "\n").map_err(|source| HarnessError::Output { path: json_path.clone(), source })?;
    Ok((csv_path, json_path))
}

/// Output prefix for a spec: its `output` key, else `$LCMSIM_OUTPUT_DIR/results`.
pub fn output_prefix(spec: &ExperimentSpec) -> Option<PathBuf> {
    spec.output
        .clone()
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(|d| PathBuf::from(d).join("results")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budgets_floor_with_remainder_first() {
        let net = topology::load_network("nodes 4\nedge 0 1 1\nedge 1 2 1\nedge 2 3 1\nsource 0 3\nsource 1 3\n").unwrap();
        // 0.7 * 10 = 7 slots over nodes 0, 1, 2
        assert_eq!(cache_budgets(&net, 2, 3.5).unwrap(), vec![3, 2, 2, 0]);
        assert_eq!(cache_budgets(&net, 2, 0.0).unwrap(), vec![0, 0, 0, 0]);
    }

    #[test]
    fn header_matches_schema() {
        let rows = vec![ResultRow {
            strategy: "utilcache".into(),
            policy: "lfu".into(),
            alpha: 1.0,
            ratio: 0.01,
            topology: "geant".into(),
            seed: 1,
            link_cost_paid: 1.5,
            no_cache_cost: 3.0,
            caching_gain: 1.5,
            server_hits: 2,
            requests_measured: 4,
            wall_time: 0.3,
        }];
        let text = csv_string(&rows).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(text.lines().nth(1).unwrap(), "utilcache,lfu,1.0,0.01,geant,1,1.5,3.0,1.5,2,4");
    }

    #[test]
    fn summary_statistics() {
        let mk = |seed, gain| ResultRow {
            strategy: "grd".into(),
            policy: "none".into(),
            alpha: 1.0,
            ratio: 0.01,
            topology: "t".into(),
            seed,
            link_cost_paid: 10.0 - gain,
            no_cache_cost: 10.0,
            caching_gain: gain,
            server_hits: 1,
            requests_measured: 2,
            wall_time: 0.0,
        };
        let s = summarize(&[mk(1, 1.0), mk(2, 2.0), mk(3, 3.0)]);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].runs, 3);
        assert_eq!(s[0].mean_caching_gain, 2.0);
        assert_eq!(s[0].std_caching_gain, 1.0);
        assert_eq!(s[0].mean_server_hit_ratio, 0.5);
    }
}
