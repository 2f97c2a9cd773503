//! Greedy placement against the exhaustive optimum on a small tree.

use std::collections::BTreeMap;

use utilcache::objective::{brute_force_optimal, greedy_placement, Instance, DEFAULT_BRUTE_FORCE_LIMIT};
use utilcache::topology::{build_request_classes, load_network};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let net = load_network(
        "nodes 5\nedge 0 2 10\nedge 1 2 10\nedge 2 3 100\nedge 3 4 1000\n\
         cap 0 1\ncap 1 1\ncap 2 1\ncap 3 1\n\
         source 0 4\nsource 1 4\nsource 2 4\nsource 3 4\n",
    )?;
    let mut demand = BTreeMap::new();
    for (c, rate) in [4.0, 3.0, 2.0, 1.0].into_iter().enumerate() {
        demand.insert((0, c), rate);
        demand.insert((1, c), rate * 0.5);
    }
    let inst = Instance::new(&net, build_request_classes(&net, &demand)?, 4)?;
    let greedy = greedy_placement(&inst);
    let best = brute_force_optimal(&inst, DEFAULT_BRUTE_FORCE_LIMIT)?;
    println!("greedy  {:?}  gain {}", greedy.entries(), inst.gain(&greedy));
    println!("optimal {:?}  gain {}", best.entries(), inst.gain(&best));
    println!("ratio {:.4}", inst.gain(&greedy) / inst.gain(&best));
    Ok(())
}
