//! Follows individual requests through the simulator and prints the ULC
//! value each node sees on the way down.

use std::sync::Arc;

use utilcache::cache::Policy;
use utilcache::engine::Simulator;
use utilcache::strategy::Strategy;
use utilcache::topology::load_network;
use utilcache::workload::Request;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let net = Arc::new(load_network("nodes 4\nedge 0 1 10\nedge 1 2 100\nedge 2 3 1000\ncap 0 1\ncap 1 1\ncap 2 1\nsource 0 3\nsource 1 3\n")?);
    let mut sim = Simulator::new(net, 2, Strategy::UtilCache(Policy::Lru), 0.1, 3)?;
    for (seq, content) in [0, 0, 1, 0, 1, 1].into_iter().enumerate() {
        let req = Request { sequence: seq as u64, timestamp: seq as f64, requester: 0, content };
        let mut hops = Vec::new();
        let rec = sim.process_request_with(&req, None, |node, ulc| hops.push(format!("{node}:{ulc}")));
        println!(
            "request {seq} for {content}: served by {} at depth {}, paid {}, ulc [{}]",
            rec.serving_node,
            rec.hit_depth,
            rec.cost_paid,
            hops.join(" ")
        );
    }
    println!("caches: {:?}", sim.snapshot_caches());
    Ok(())
}
