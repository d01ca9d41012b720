#![allow(dead_code)]

use crn_game::{generate_scenario, Channel, Node, NodeId, Scenario, ScenarioParams};

/// Hand-placed scenario on a 1 km square with `n_channels` channels and
/// `q_levels` power levels. Nodes are `(x, y, channels)`; routes list node ids.
pub fn build(
    n_channels: usize,
    q_levels: usize,
    nodes: &[(f64, f64, &[u16])],
    routes: &[&[usize]],
) -> Scenario {
    let params = ScenarioParams {
        n_nodes: nodes.len(),
        n_channels,
        channel_subset_min: 1,
        channel_subset_max: n_channels,
        q_levels,
        n_flows: routes.len(),
        ..ScenarioParams::default()
    };
    let nodes = nodes
        .iter()
        .enumerate()
        .map(|(i, &(x, y, channels))| Node {
            id: NodeId(i),
            x,
            y,
            channels: channels.iter().map(|&c| Channel(c)).collect(),
        })
        .collect();
    let routes = routes
        .iter()
        .map(|r| r.iter().map(|&n| NodeId(n)).collect())
        .collect();
    Scenario::from_parts(params, nodes, routes).expect("valid fixture")
}

/// Mid-sized random scenario: 40 nodes on 300 m, three channels, four power
/// levels. `None` when the flows cannot be routed.
pub fn small_random(n_flows: usize, seed: u64) -> Option<Scenario> {
    let params = ScenarioParams {
        n_nodes: 40,
        side_length: 300.0,
        n_channels: 3,
        channel_subset_min: 1,
        channel_subset_max: 3,
        q_levels: 4,
        max_hops: 4,
        n_flows,
        seed,
        ..ScenarioParams::default()
    };
    generate_scenario(&params).ok()
}

pub fn fixture_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}
