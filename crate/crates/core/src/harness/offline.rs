//! Offline placement from a topology and a demand file.
//!
//! Demand files are line based; `#` starts a comment.
//!
//! ```text
//! rate <requester> <content> <lambda>
//! zipf <catalog> <exponent> <total_rate>
//! ```
//!
//! `zipf` spreads `total_rate * p(c)` evenly over the network's requesters.
//! Explicit `rate` lines add to whatever is already there.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::objective::{greedy_placement, Instance, ObjectiveError, Placement};
use crate::topology::{build_request_classes, ContentId, Network, NodeId, TopologyError};
use crate::workload::{WorkloadError, ZipfCatalog};

#[derive(Debug, Error)]
pub enum DemandError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("demand is empty")]
    Empty,
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Demand {
    pub catalog_size: usize,
    pub rates: BTreeMap<(NodeId, ContentId), f64>,
}

pub fn parse_demand(text: &str, net: &Network) -> Result<Demand, DemandError> {
    let mut rates: BTreeMap<(NodeId, ContentId), f64> = BTreeMap::new();
    let mut catalog_size = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let err = |msg: &str| DemandError::Parse { line, msg: msg.to_string() };
        let words: Vec<&str> = body.split_whitespace().collect();
        match words.as_slice() {
            ["rate", node, content, lambda] => {
                let node: NodeId = node.parse().map_err(|_| err("bad node id"))?;
                let content: ContentId = content.parse().map_err(|_| err("bad content id"))?;
                let lambda: f64 = lambda.parse().map_err(|_| err("bad rate"))?;
                if node >= net.node_count() {
                    return Err(err("node out of range"));
                }
                if !(lambda >= 0.0 && lambda.is_finite()) {
                    return Err(err("rate must be a non-negative number"));
                }
                *rates.entry((node, content)).or_default() += lambda;
                catalog_size = catalog_size.max(content + 1);
            }
            ["zipf", size, exponent, total] => {
                let size: usize = size.parse().map_err(|_| err("bad catalog size"))?;
                let exponent: f64 = exponent.parse().map_err(|_| err("bad exponent"))?;
                let total: f64 = total.parse().map_err(|_| err("bad total rate"))?;
                let catalog = ZipfCatalog::new(size, exponent)?;
                let requesters = net.requesters(size)?;
                let share = total / requesters.len() as f64;
                for &r in &requesters {
                    for (c, p) in catalog.pmf().iter().enumerate() {
                        if !net.sources_of(c).contains(&r) {
                            *rates.entry((r, c)).or_default() += share * p;
                        }
                    }
                }
                catalog_size = catalog_size.max(size);
            }
            _ => return Err(err("expected `rate <node> <content> <lambda>` or `zipf <catalog> <exponent> <rate>`")),
        }
    }
    if catalog_size == 0 {
        return Err(DemandError::Empty);
    }
    Ok(Demand { catalog_size, rates })
}

#[derive(Debug, Clone)]
pub struct OfflineResult {
    pub placement: Placement,
    pub gain: f64,
}

/// Greedy placement under the topology's `cap` lines.
pub fn solve(net: &Network, demand: &Demand) -> Result<OfflineResult, DemandError> {
    let classes = build_request_classes(net, &demand.rates)?;
    let inst = Instance::new(net, classes, demand.catalog_size)?;
    let placement = greedy_placement(&inst);
    let gain = inst.gain(&placement);
    Ok(OfflineResult { placement, gain })
}

/// One `cache <node> <content>` line per entry, then `gain <value>`.
pub fn format_result(result: &OfflineResult) -> String {
    let mut out = String::new();
    for (node, content) in result.placement.entries() {
        writeln!(out, "cache {node} {content}").expect("writing to a string");
    }
    writeln!(out, "gain {}", result.gain).expect("writing to a string");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::load_network;

    fn line_net() -> Network {
        load_network("nodes 3\nedge 0 1 1\nedge 1 2 1\ncap 0 1\ncap 1 1\nsource 0 2\nsource 1 2\nrequesters list 0\n").unwrap()
    }

    #[test]
    fn explicit_rates() {
        let net = line_net();
        let demand = parse_demand("# two contents\nrate 0 0 3\nrate 0 1 1\n", &net).unwrap();
        let result = solve(&net, &demand).unwrap();
        assert_eq!(format_result(&result), "cache 0 0\ncache 1 1\ngain 7\n");
    }

    #[test]
    fn zipf_directive_spreads_over_requesters() {
        let net = line_net();
        let demand = parse_demand("zipf 2 0 4\n", &net).unwrap();
        assert_eq!(demand.rates, BTreeMap::from([((0, 0), 2.0), ((0, 1), 2.0)]));
    }

    #[test]
    fn errors_carry_lines() {
        let net = line_net();
        assert!(matches!(parse_demand("rate 0 0 1\nrate 9 0 1\n", &net), Err(DemandError::Parse { line: 2, .. })));
        assert!(matches!(parse_demand("rate 0 0 -1\n", &net), Err(DemandError::Parse { line: 1, .. })));
        assert!(matches!(parse_demand("# nothing\n", &net), Err(DemandError::Empty)));
    }
}
