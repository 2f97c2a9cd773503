//! Parses a topology, routes requests to the nearest source and builds
//! request classes for the offline model.

use std::collections::BTreeMap;

use utilcache::topology::{build_request_classes, load_network, route};

const TOPOLOGY: &str = "\
nodes 5
edge 0 1 10
edge 1 2 10
edge 2 4 10
edge 0 3 100
edge 3 4 1 1000   # 3->4 costs 1, 4->3 costs 1000
source 0 4
source 1 3
requesters list 0
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let net = load_network(TOPOLOGY)?;
    for content in 0..2 {
        let path = route(&net, 0, content)?;
        println!("content {content}: path {:?}, hop costs {:?}, cost {}", path.nodes, path.hop_costs(&net), path.cost(&net));
    }
    let demand = BTreeMap::from([((0, 0), 2.0), ((0, 1), 0.5), ((1, 0), 0.0)]);
    for class in build_request_classes(&net, &demand)? {
        println!("class c={} rate={} via {:?}", class.content, class.rate, class.path.nodes);
    }
    Ok(())
}
