//! Small sweep on the bundled GEANT-sized network: every strategy over two
//! Zipf exponents, summarized per point.

use utilcache::harness::{run_experiment, summarize, ExperimentSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ExperimentSpec {
        zipf_alpha: vec![0.8, 1.0],
        warmup: 20_000,
        measure: 40_000,
        seeds: vec![1, 2],
        ..ExperimentSpec::default()
    };
    let rows = run_experiment(&spec)?;
    for s in summarize(&rows) {
        println!(
            "{:<10} {:<5} alpha {:<4} gain {:>12.0} +- {:>10.0}  server hit ratio {:.3}",
            s.strategy, s.policy, s.alpha, s.mean_caching_gain, s.std_caching_gain, s.mean_server_hit_ratio
        );
    }
    Ok(())
}
