//! One cache in front of three origins at costs 10, 100 and 1000. Compares
//! UtilCache and LCE with the static utility-optimal placement.

use std::sync::Arc;

use utilcache::cache::Policy;
use utilcache::engine::{run, SimConfig};
use utilcache::objective::{single_cache_optimal, Placement};
use utilcache::strategy::Strategy;
use utilcache::topology::{self, route};
use utilcache::workload::ZipfCatalog;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let catalog_size = 200;
    let net = Arc::new(topology::single_cache());
    let catalog = Arc::new(ZipfCatalog::new(catalog_size, 0.8)?);
    let costs = (0..catalog_size).map(|c| Ok(route(&net, 0, c)?.cost(&net))).collect::<Result<Vec<f64>, topology::TopologyError>>()?;
    let mut best = Placement::empty(net.capacities().to_vec(), catalog_size);
    for c in single_cache_optimal(catalog.pmf(), &costs, net.capacity(0)) {
        best.set(0, c, true);
    }
    let strategies = [
        (Strategy::Static, Some(best)),
        (Strategy::UtilCache(Policy::Lfu), None),
        (Strategy::UtilCache(Policy::Lru), None),
        (Strategy::Lce(Policy::Lfu), None),
        (Strategy::Lce(Policy::Lru), None),
    ];
    for (strategy, preload) in strategies {
        let report = run(&SimConfig {
            network: Arc::clone(&net),
            catalog: Arc::clone(&catalog),
            strategy,
            ewma_alpha: 0.1,
            rate: 12.0,
            warmup: 20_000,
            measure: 100_000,
            seed: 1,
            preload,
        })?;
        println!("{:<8} gain {:>12.0}  server hits {:>6}", strategy.to_string(), report.caching_gain, report.server_hits);
    }
    Ok(())
}
