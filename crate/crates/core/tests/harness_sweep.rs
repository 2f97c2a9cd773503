use utilcache::harness::{
    self, cache_budgets, csv_string, run_experiment, write_outputs, ExperimentSpec, TopologySource, CSV_HEADER,
};
use utilcache::topology;

fn small_spec() -> ExperimentSpec {
    ExperimentSpec {
        catalog_size: 1_000,
        zipf_alpha: vec![0.8, 1.2],
        cache_ratio: vec![0.01, 0.05],
        warmup: 2_000,
        measure: 6_000,
        seeds: vec![1, 2],
        ..ExperimentSpec::default()
    }
}

#[test]
fn sweep_is_byte_identical_and_ordered() {
    let spec = small_spec();
    let rows = run_experiment(&spec).unwrap();
    assert_eq!(rows.len(), 2 * 2 * 5 * 2);
    let text = csv_string(&rows).unwrap();
    assert_eq!(text, csv_string(&run_experiment(&spec).unwrap()).unwrap());
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    // alpha, ratio, strategy, seed nesting
    assert_eq!((rows[0].alpha, rows[0].ratio, rows[0].seed), (0.8, 0.01, 1));
    assert_eq!(rows[1].seed, 2);
    assert_eq!(rows.last().map(|r| (r.alpha, r.ratio)), Some((1.2, 0.05)));
}

#[test]
fn gain_grows_with_skew_and_cache_size() {
    let rows = run_experiment(&small_spec()).unwrap();
    let summary = harness::summarize(&rows);
    let at = |s: &str, p: &str, a: f64, r: f64| {
        summary.iter().find(|x| x.strategy == s && x.policy == p && x.alpha == a && x.ratio == r).unwrap().mean_caching_gain
    };
    for (s, p) in [("utilcache", "lfu"), ("lce", "lru"), ("grd", "none")] {
        assert!(at(s, p, 1.2, 0.01) > at(s, p, 0.8, 0.01), "{s}-{p} over alpha");
        assert!(at(s, p, 0.8, 0.05) > at(s, p, 0.8, 0.01), "{s}-{p} over ratio");
    }
}

#[test]
fn outputs_written_to_prefix() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ExperimentSpec { zipf_alpha: vec![1.0], cache_ratio: vec![0.01], seeds: vec![3], ..small_spec() };
    let rows = run_experiment(&spec).unwrap();
    let (csv, json) = write_outputs(&dir.path().join("nested/run"), &rows).unwrap();
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text, csv_string(&rows).unwrap());
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(summary.as_array().unwrap().len(), 5);
}

#[test]
fn spec_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("line.topo"), "nodes 2\nedge 0 1 5\nsources random 1 seed 1 among 1\nrequesters list 0\n")
        .unwrap();
    let path = dir.path().join("exp.spec");
    std::fs::write(&path, "topology = line.topo\ncatalog_size = 10\ncache_ratio = 0.2\nstrategies = [lce-lru]\nmeasure = 1e3\nwarmup = 0\ncost_choices = []\n").unwrap();
    let spec = ExperimentSpec::load(&path).unwrap();
    assert_eq!(spec.topology, TopologySource::File(dir.path().join("line.topo")));
    let rows = run_experiment(&spec).unwrap();
    assert_eq!(rows[0].topology, "line");
    assert_eq!(rows[0].requests_measured, 1000);
    assert!(rows[0].caching_gain > 0.0);
}

#[test]
fn geant_budgets_match_ratio() {
    let net = topology::geant();
    for (catalog, ratio) in [(5_000, 0.01), (5_000, 0.002), (300_000, 0.01)] {
        let budgets = cache_budgets(&net, catalog, ratio).unwrap();
        assert_eq!(budgets.iter().sum::<usize>(), (catalog as f64 * ratio).round() as usize);
        let nonzero: Vec<usize> = budgets.iter().copied().filter(|&b| b > 0).collect();
        assert!(nonzero.iter().max().unwrap() - nonzero.iter().min().unwrap() <= 1);
    }
}
