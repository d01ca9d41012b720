//! JSON scenario files. Powers are written in dBm and the SINR threshold in
//! dB; they are converted to linear units on load.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Channel, Node, NodeId, Scenario, ScenarioParams};
use crate::error::{Error, Result};
use crate::units::{db_to_linear, dbm_to_watts, linear_to_db, watts_to_dbm};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    params: ParamsRecord,
    nodes: Vec<NodeRecord>,
    flows: Vec<FlowRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsRecord {
    n_nodes: usize,
    side_length: f64,
    n_channels: usize,
    region_size: f64,
    channel_subset_min: usize,
    channel_subset_max: usize,
    p_max_dbm: f64,
    q_levels: usize,
    path_loss_exp: f64,
    sinr_threshold_db: f64,
    noise_power_dbm: f64,
    max_hops: usize,
    n_flows: usize,
    seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    id: usize,
    x: f64,
    y: f64,
    channels: Vec<u16>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlowRecord {
    id: usize,
    src: usize,
    dst: usize,
    route: Vec<usize>,
}

/// Logarithmic value whose conversion back to linear reproduces `linear`
/// exactly, so files round-trip bit for bit. Falls back to the plain
/// conversion if no neighbouring float qualifies.
fn exact_log(linear: f64, to_log: fn(f64) -> f64, to_linear: fn(f64) -> f64) -> f64 {
    let guess = to_log(linear);
    let mut candidates = [guess; 5];
    candidates[1] = guess.next_up();
    candidates[2] = guess.next_down();
    candidates[3] = guess.next_up().next_up();
    candidates[4] = guess.next_down().next_down();
    candidates
        .into_iter()
        .find(|&v| to_linear(v) == linear)
        .unwrap_or(guess)
}

pub fn scenario_to_json(scenario: &Scenario) -> String {
    let p = scenario.params();
    let file = ScenarioFile {
        params: ParamsRecord {
            n_nodes: p.n_nodes,
            side_length: p.side_length,
            n_channels: p.n_channels,
            region_size: p.region_size,
            channel_subset_min: p.channel_subset_min,
            channel_subset_max: p.channel_subset_max,
            p_max_dbm: exact_log(p.p_max, watts_to_dbm, dbm_to_watts),
            q_levels: p.q_levels,
            path_loss_exp: p.path_loss_exp,
            sinr_threshold_db: exact_log(p.sinr_threshold, linear_to_db, db_to_linear),
            noise_power_dbm: exact_log(p.noise_power, watts_to_dbm, dbm_to_watts),
            max_hops: p.max_hops,
            n_flows: p.n_flows,
            seed: p.seed,
        },
        nodes: scenario
            .nodes()
            .iter()
            .map(|n| NodeRecord {
                id: n.id.0,
                x: n.x,
                y: n.y,
                channels: n.channels.iter().map(|c| c.0).collect(),
            })
            .collect(),
        flows: scenario
            .flows()
            .iter()
            .map(|f| FlowRecord {
                id: f.id.0,
                src: f.source.0,
                dst: f.destination.0,
                route: scenario.route(f.id).into_iter().map(|n| n.0).collect(),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("scenario serializes");
    text.push('\n');
    text
}

pub fn scenario_from_json(text: &str) -> Result<Scenario> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let r = file.params;
    let params = ScenarioParams {
        n_nodes: r.n_nodes,
        side_length: r.side_length,
        n_channels: r.n_channels,
        region_size: r.region_size,
        channel_subset_min: r.channel_subset_min,
        channel_subset_max: r.channel_subset_max,
        p_max: dbm_to_watts(r.p_max_dbm),
        q_levels: r.q_levels,
        path_loss_exp: r.path_loss_exp,
        sinr_threshold: db_to_linear(r.sinr_threshold_db),
        noise_power: dbm_to_watts(r.noise_power_dbm),
        max_hops: r.max_hops,
        n_flows: r.n_flows,
        seed: r.seed,
    };
    let nodes = file
        .nodes
        .into_iter()
        .map(|n| Node {
            id: NodeId(n.id),
            x: n.x,
            y: n.y,
            channels: n.channels.into_iter().map(Channel).collect(),
        })
        .collect();
    let mut routes = Vec::with_capacity(file.flows.len());
    for (i, f) in file.flows.into_iter().enumerate() {
        if f.id != i {
            return Err(Error::invariant(
                format!("flows[{i}].id"),
                format!("expected {i}, found {}", f.id),
            ));
        }
        if f.route.first() != Some(&f.src) {
            return Err(Error::invariant(
                format!("flows[{i}].src"),
                "does not match the first route node",
            ));
        }
        if f.route.last() != Some(&f.dst) {
            return Err(Error::invariant(
                format!("flows[{i}].dst"),
                "does not match the last route node",
            ));
        }
        routes.push(f.route.into_iter().map(NodeId).collect());
    }
    Scenario::from_parts(params, nodes, routes)
}

pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, scenario_to_json(scenario)).map_err(|e| Error::io(path, e))
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    scenario_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::generate_scenario;

    const FIXTURE: &str = r#"{
  "params": {
    "n_nodes": 3, "side_length": 200.0, "n_channels": 2, "region_size": 100.0,
    "channel_subset_min": 1, "channel_subset_max": 2,
    "p_max_dbm": 20.0, "q_levels": 16, "path_loss_exp": 4.0,
    "sinr_threshold_db": 10.0, "noise_power_dbm": -70.0,
    "max_hops": 6, "n_flows": 1, "seed": 0
  },
  "nodes": [
    {"id": 0, "x": 10.0, "y": 10.0, "channels": [0, 1]},
    {"id": 1, "x": 90.0, "y": 10.0, "channels": [1]},
    {"id": 2, "x": 170.0, "y": 10.0, "channels": [0, 1]}
  ],
  "flows": [{"id": 0, "src": 0, "dst": 2, "route": [0, 1, 2]}]
}"#;

    #[test]
    fn round_trip_is_exact() {
        let params = ScenarioParams {
            n_flows: 15,
            seed: 21,
            ..Default::default()
        };
        let scenario = generate_scenario(&params).unwrap();
        let text = scenario_to_json(&scenario);
        let back = scenario_from_json(&text).unwrap();
        assert_eq!(scenario, back);
        assert_eq!(text, scenario_to_json(&back));
    }

    #[test]
    fn hand_written_fixture_loads_and_routes() {
        let scenario = scenario_from_json(FIXTURE).unwrap();
        assert_eq!(scenario.links().len(), 2);
        // Node 1 only has channel 1, so both hops are restricted to it.
        for link in scenario.links() {
            assert_eq!(link.channels, vec![Channel(1)]);
            assert!((link.direct_gain - 80f64.powi(-4)).abs() < 1e-20);
        }
        // 0 and 2 are 160 m apart: the relay is the only way through.
        assert_eq!(
            scenario.topology().shortest_route(NodeId(0), NodeId(2)),
            Some(vec![NodeId(0), NodeId(1), NodeId(2)])
        );
    }

    #[test]
    fn node_outside_area_is_rejected() {
        let text = FIXTURE.replace(r#""x": 170.0"#, r#""x": 250.0"#);
        match scenario_from_json(&text) {
            Err(Error::Invariant { field, .. }) => assert_eq!(field, "nodes[2].x"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_json_reports_position() {
        let text = FIXTURE.replace(r#""q_levels": 16"#, r#""q_levels": "sixteen""#);
        match scenario_from_json(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn broken_route_is_rejected() {
        let text = FIXTURE.replace(r#""route": [0, 1, 2]"#, r#""route": [0, 2]"#);
        assert!(matches!(
            scenario_from_json(&text),
            Err(Error::Invariant { .. })
        ));
    }
}
