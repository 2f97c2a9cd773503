//! Marginal caching gain equals filtered arrival rate times average
//! upstream cost.

use std::collections::BTreeMap;

use utilcache::objective::{analytic_utility, marginal_value, Instance};
use utilcache::topology::{build_request_classes, load_network};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // 0 - 1 - 2 - 3, content 0 at node 3, requests from 0 and 1
    let net = load_network("nodes 4\nedge 0 1 10\nedge 1 2 100\nedge 2 3 1000\ncap 0 1\ncap 1 1\ncap 2 1\nsource 0 3\n")?;
    let demand = BTreeMap::from([((0, 0), 3.0), ((1, 0), 1.0)]);
    let inst = Instance::new(&net, build_request_classes(&net, &demand)?, 1)?;
    let mut x = inst.empty_placement();
    for step in 0..3 {
        for node in 0..3 {
            let m = marginal_value(&inst.classes, &x, 0, node);
            let (rate, w) = analytic_utility(&inst.classes, &x, 0, node);
            println!("step {step} node {node}: m = {m:>6}  rate {rate} x w {w} = {}", rate * w);
        }
        x.set(2 - step, 0, true);
        println!("cache content 0 at node {}", 2 - step);
    }
    Ok(())
}
