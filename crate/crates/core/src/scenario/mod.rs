//! Random network instances: nodes with regional channel subsets, and flows
//! routed over the connectivity graph.

mod file;
mod routing;

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radio::{meets_threshold, path_gain};
use crate::units::{db_to_linear, dbm_to_watts};

pub use file::{load_scenario, save_scenario, scenario_from_json, scenario_to_json};
pub use routing::{generate_flows, shortest_route, Topology};

/// Resampling budget for one flow whose endpoints are unreachable or too far apart.
pub const FLOW_RESAMPLE_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FlowId(pub usize);

/// A non-interfering frequency channel, numbered from zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Channel(pub u16);

impl Channel {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

macro_rules! id_display {
    ($($t:ty => $p:literal),*) => {
        $(impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($p, "{}"), self.0)
            }
        })*
    };
}
id_display!(NodeId => "n", LinkId => "l", FlowId => "f", Channel => "c");

/// Physical and topological parameters of one network instance.
///
/// Powers are in watts and the SINR threshold is a linear ratio; use
/// [`ScenarioParams::with_db`] to build from dBm / dB values.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub n_nodes: usize,
    /// Side of the square deployment area, meters.
    pub side_length: f64,
    pub n_channels: usize,
    /// Side of the square regions sharing a channel subset, meters.
    pub region_size: f64,
    pub channel_subset_min: usize,
    pub channel_subset_max: usize,
    pub p_max: f64,
    /// Number of power levels including the zero (OFF) level.
    pub q_levels: usize,
    pub path_loss_exp: f64,
    pub sinr_threshold: f64,
    pub noise_power: f64,
    pub max_hops: usize,
    pub n_flows: usize,
    pub seed: u64,
}

impl Default for ScenarioParams {
    /// 200 nodes on 1 km², 10 channels, 100 m regions with 3..=8 channels,
    /// 20 dBm / 16 levels, γ = 4, α = 10 dB, −70 dBm noise, at most 6 hops.
    fn default() -> Self {
        ScenarioParams {
            n_nodes: 200,
            side_length: 1000.0,
            n_channels: 10,
            region_size: 100.0,
            channel_subset_min: 3,
            channel_subset_max: 8,
            p_max: dbm_to_watts(20.0),
            q_levels: 16,
            path_loss_exp: 4.0,
            sinr_threshold: db_to_linear(10.0),
            noise_power: dbm_to_watts(-70.0),
            max_hops: 6,
            n_flows: 10,
            seed: 0,
        }
    }
}

impl ScenarioParams {
    /// Replaces the power-related fields from logarithmic units.
    pub fn with_db(mut self, p_max_dbm: f64, sinr_threshold_db: f64, noise_dbm: f64) -> Self {
        self.p_max = dbm_to_watts(p_max_dbm);
        self.sinr_threshold = db_to_linear(sinr_threshold_db);
        self.noise_power = dbm_to_watts(noise_dbm);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_nodes == 0 {
            return Err(Error::invalid("n_nodes", "must be positive"));
        }
        if !(self.side_length.is_finite() && self.side_length > 0.0) {
            return Err(Error::invalid("side_length", "must be a positive length"));
        }
        if !(self.region_size.is_finite() && self.region_size > 0.0) {
            return Err(Error::invalid("region_size", "must be a positive length"));
        }
        let regions = self.side_length / self.region_size;
        if (regions - regions.round()).abs() > 1e-9 * regions.max(1.0) || regions.round() < 1.0 {
            return Err(Error::invalid(
                "region_size",
                format!(
                    "side length {} is not a whole number of {} m regions",
                    self.side_length, self.region_size
                ),
            ));
        }
        if self.n_channels == 0 || self.n_channels > u16::MAX as usize {
            return Err(Error::invalid("n_channels", "must be in 1..=65535"));
        }
        if self.channel_subset_min < 1
            || self.channel_subset_min > self.channel_subset_max
            || self.channel_subset_max > self.n_channels
        {
            return Err(Error::invalid(
                "channel_subset_min",
                format!(
                    "need 1 <= min ({}) <= max ({}) <= n_channels ({})",
                    self.channel_subset_min, self.channel_subset_max, self.n_channels
                ),
            ));
        }
        if self.q_levels < 2 || self.q_levels > u8::MAX as usize + 1 {
            return Err(Error::invalid("q_levels", "must be in 2..=256"));
        }
        if !(self.p_max.is_finite() && self.p_max > 0.0) {
            return Err(Error::invalid("p_max", "must be positive"));
        }
        if !(self.noise_power.is_finite() && self.noise_power > 0.0) {
            return Err(Error::invalid("noise_power", "must be positive"));
        }
        if !(self.sinr_threshold.is_finite() && self.sinr_threshold > 1.0) {
            return Err(Error::invalid("sinr_threshold", "must exceed 1 (0 dB)"));
        }
        if !(self.path_loss_exp.is_finite() && self.path_loss_exp > 0.0) {
            return Err(Error::invalid("path_loss_exp", "must be positive"));
        }
        if self.max_hops < 1 {
            return Err(Error::invalid("max_hops", "must be at least 1"));
        }
        Ok(())
    }

    /// Regions per side of the deployment square.
    pub fn regions_per_side(&self) -> usize {
        (self.side_length / self.region_size).round() as usize
    }

    /// Distance at which a lone full-power transmission just reaches the SINR threshold.
    pub fn max_range(&self) -> f64 {
        (self.p_max / (self.sinr_threshold * self.noise_power)).powf(1.0 / self.path_loss_exp)
    }

    /// Whether a hop of length `distance` can be closed at full power without interference.
    pub fn in_range(&self, distance: f64) -> bool {
        let snr = self.p_max * path_gain(distance, self.path_loss_exp) / self.noise_power;
        meets_threshold(snr, self.sinr_threshold)
    }

    /// Transmit power of quantized level `level` (level 0 is OFF).
    pub fn power_of_level(&self, level: u8) -> f64 {
        level as f64 * self.p_max / (self.q_levels - 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub x: f64,
    pub y: f64,
    /// Ascending, no duplicates.
    pub channels: Vec<Channel>,
}

impl Node {
    pub fn distance_to(&self, other: &Node) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Flow {
    pub id: FlowId,
    pub source: NodeId,
    pub destination: NodeId,
    /// Links from source to destination.
    pub links: Vec<LinkId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectedLink {
    pub id: LinkId,
    pub tx: NodeId,
    pub rx: NodeId,
    pub direct_gain: f64,
    /// Channels available at both endpoints, ascending.
    pub channels: Vec<Channel>,
    pub flow: FlowId,
    pub index_in_flow: usize,
}

/// An immutable network instance. Links are numbered flow by flow in route
/// order, so link ids double as the round-robin order of the link games.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    params: ScenarioParams,
    nodes: Vec<Node>,
    flows: Vec<Flow>,
    links: Vec<DirectedLink>,
}

impl Scenario {
    /// Assembles and validates a scenario from nodes and node-level routes.
    pub fn from_parts(
        params: ScenarioParams,
        nodes: Vec<Node>,
        routes: Vec<Vec<NodeId>>,
    ) -> Result<Scenario> {
        params.validate()?;
        validate_nodes(&params, &nodes)?;
        if routes.len() != params.n_flows {
            return Err(Error::invariant(
                "params.n_flows",
                format!(
                    "declares {} flows but {} are given",
                    params.n_flows,
                    routes.len()
                ),
            ));
        }

        let mut flows = Vec::with_capacity(routes.len());
        let mut links = Vec::new();
        for (f, route) in routes.iter().enumerate() {
            let field = |what: &str| format!("flows[{f}].{what}");
            if route.len() < 2 {
                return Err(Error::invariant(field("route"), "needs at least two nodes"));
            }
            let hops = route.len() - 1;
            if hops > params.max_hops {
                return Err(Error::invariant(
                    field("route"),
                    format!("{hops} hops exceed max_hops = {}", params.max_hops),
                ));
            }
            if route[0] == route[hops] {
                return Err(Error::invariant(field("dst"), "source equals destination"));
            }
            let mut flow_links = Vec::with_capacity(hops);
            for (i, pair) in route.windows(2).enumerate() {
                let (tx, rx) = (pair[0], pair[1]);
                let (Some(a), Some(b)) = (nodes.get(tx.0), nodes.get(rx.0)) else {
                    return Err(Error::invariant(
                        format!("flows[{f}].route[{}]", i + 1),
                        "unknown node id",
                    ));
                };
                let distance = a.distance_to(b);
                if !params.in_range(distance) {
                    return Err(Error::invariant(
                        format!("flows[{f}].route[{}]", i + 1),
                        format!("hop {tx}->{rx} of {distance:.3} m exceeds the transmission range"),
                    ));
                }
                let channels = common_channels(a, b);
                if channels.is_empty() {
                    return Err(Error::invariant(
                        format!("flows[{f}].route[{}]", i + 1),
                        format!("hop {tx}->{rx} has no common channel"),
                    ));
                }
                let id = LinkId(links.len());
                links.push(DirectedLink {
                    id,
                    tx,
                    rx,
                    direct_gain: path_gain(distance, params.path_loss_exp),
                    channels,
                    flow: FlowId(f),
                    index_in_flow: i,
                });
                flow_links.push(id);
            }
            flows.push(Flow {
                id: FlowId(f),
                source: route[0],
                destination: route[hops],
                links: flow_links,
            });
        }

        Ok(Scenario {
            params,
            nodes,
            flows,
            links,
        })
    }

    pub fn params(&self) -> &ScenarioParams {
        &self.params
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn flows(&self) -> &[Flow] {
        &self.flows
    }

    pub fn links(&self) -> &[DirectedLink] {
        &self.links
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn link(&self, id: LinkId) -> &DirectedLink {
        &self.links[id.0]
    }

    pub fn flow(&self, id: FlowId) -> &Flow {
        &self.flows[id.0]
    }

    /// Node sequence of a flow, source first.
    pub fn route(&self, id: FlowId) -> Vec<NodeId> {
        let flow = self.flow(id);
        let mut route = vec![flow.source];
        route.extend(flow.links.iter().map(|&l| self.link(l).rx));
        route
    }

    /// Mean hop count over all flows, or `None` without flows.
    pub fn mean_links_per_flow(&self) -> Option<f64> {
        (!self.flows.is_empty()).then(|| self.links.len() as f64 / self.flows.len() as f64)
    }

    pub fn topology(&self) -> Topology {
        Topology::new(&self.params, &self.nodes)
    }
}

fn common_channels(a: &Node, b: &Node) -> Vec<Channel> {
    a.channels
        .iter()
        .filter(|c| b.channels.binary_search(c).is_ok())
        .copied()
        .collect()
}

fn validate_nodes(params: &ScenarioParams, nodes: &[Node]) -> Result<()> {
    if nodes.len() != params.n_nodes {
        return Err(Error::invariant(
            "params.n_nodes",
            format!(
                "declares {} nodes but {} are given",
                params.n_nodes,
                nodes.len()
            ),
        ));
    }
    let side = params.side_length;
    for (i, node) in nodes.iter().enumerate() {
        if node.id.0 != i {
            return Err(Error::invariant(
                format!("nodes[{i}].id"),
                format!("expected {i}, found {}", node.id.0),
            ));
        }
        for (axis, v) in [("x", node.x), ("y", node.y)] {
            if !(v.is_finite() && (0.0..=side).contains(&v)) {
                return Err(Error::invariant(
                    format!("nodes[{i}].{axis}"),
                    format!("{v} lies outside [0, {side}]"),
                ));
            }
        }
        let n = node.channels.len();
        if n < params.channel_subset_min || n > params.channel_subset_max {
            return Err(Error::invariant(
                format!("nodes[{i}].channels"),
                format!(
                    "{n} channels outside [{}, {}]",
                    params.channel_subset_min, params.channel_subset_max
                ),
            ));
        }
        if node.channels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invariant(
                format!("nodes[{i}].channels"),
                "must be strictly ascending",
            ));
        }
        if let Some(c) = node
            .channels
            .iter()
            .find(|c| c.index() >= params.n_channels)
        {
            return Err(Error::invariant(
                format!("nodes[{i}].channels"),
                format!("channel {} >= n_channels = {}", c.0, params.n_channels),
            ));
        }
    }
    Ok(())
}

/// Index of the region containing `(x, y)`, row-major from the origin.
pub fn region_of(params: &ScenarioParams, x: f64, y: f64) -> usize {
    let per_side = params.regions_per_side();
    let cell = |v: f64| ((v / params.region_size) as usize).min(per_side - 1);
    cell(y) * per_side + cell(x)
}

/// Generates a random instance. The same parameters (including the seed)
/// always produce the same scenario.
///
/// Draw order: one channel subset per region, then node positions, then flows.
pub fn generate_scenario(params: &ScenarioParams) -> Result<Scenario> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let per_side = params.regions_per_side();
    let region_channels: Vec<Vec<Channel>> = (0..per_side * per_side)
        .map(|_| {
            let size = rng.random_range(params.channel_subset_min..=params.channel_subset_max);
            let picked: BTreeSet<usize> = index::sample(&mut rng, params.n_channels, size)
                .into_iter()
                .collect();
            picked.into_iter().map(|c| Channel(c as u16)).collect()
        })
        .collect();

    let side = params.side_length;
    let nodes: Vec<Node> = (0..params.n_nodes)
        .map(|i| {
            let x = rng.random_range(0.0..side);
            let y = rng.random_range(0.0..side);
            Node {
                id: NodeId(i),
                x,
                y,
                channels: region_channels[region_of(params, x, y)].clone(),
            }
        })
        .collect();

    let topology = Topology::new(params, &nodes);
    let routes = generate_flows(&topology, params.max_hops, params.n_flows, &mut rng)?;
    Scenario::from_parts(params.clone(), nodes, routes)
}
