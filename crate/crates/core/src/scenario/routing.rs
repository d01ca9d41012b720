use std::collections::VecDeque;

use rand::Rng;

use super::{Node, NodeId, Scenario, ScenarioParams, FLOW_RESAMPLE_ATTEMPTS};
use crate::error::{Error, Result};

/// Connectivity graph: an edge joins two nodes within transmission range
/// that share at least one channel. Neighbour lists are ascending by id.
#[derive(Debug, Clone)]
pub struct Topology {
    adjacency: Vec<Vec<NodeId>>,
}

impl Topology {
    pub fn new(params: &ScenarioParams, nodes: &[Node]) -> Self {
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (i, a) in nodes.iter().enumerate() {
            for b in &nodes[i + 1..] {
                let shares = a
                    .channels
                    .iter()
                    .any(|c| b.channels.binary_search(c).is_ok());
                if shares && params.in_range(a.distance_to(b)) {
                    adjacency[i].push(b.id);
                    adjacency[b.id.0].push(a.id);
                }
            }
        }
        Topology { adjacency }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbours(&self, node: NodeId) -> &[NodeId] {
        &self.adjacency[node.0]
    }

    /// Minimum-hop route from `source` to `destination`, choosing the
    /// lexicographically smallest node sequence among equally short ones.
    ///
    /// With unit edge weights Dijkstra reduces to a breadth-first sweep; the
    /// sweep runs from the destination so the route can be walked forward
    /// greedily, always taking the smallest-id neighbour one hop closer.
    pub fn shortest_route(&self, source: NodeId, destination: NodeId) -> Option<Vec<NodeId>> {
        if source == destination {
            return None;
        }
        let mut hops_to_dst = vec![usize::MAX; self.adjacency.len()];
        hops_to_dst[destination.0] = 0;
        let mut queue = VecDeque::from([destination]);
        while let Some(node) = queue.pop_front() {
            if node == source {
                break;
            }
            let next = hops_to_dst[node.0] + 1;
            for &n in self.neighbours(node) {
                if hops_to_dst[n.0] == usize::MAX {
                    hops_to_dst[n.0] = next;
                    queue.push_back(n);
                }
            }
        }
        if hops_to_dst[source.0] == usize::MAX {
            return None;
        }

        let mut route = vec![source];
        let mut current = source;
        while current != destination {
            let want = hops_to_dst[current.0] - 1;
            current = *self
                .neighbours(current)
                .iter()
                .find(|n| hops_to_dst[n.0] == want)
                .expect("a node on a shortest path has a neighbour one hop closer");
            route.push(current);
        }
        Some(route)
    }
}

/// Convenience wrapper building the topology of `scenario` first.
pub fn shortest_route(
    scenario: &Scenario,
    source: NodeId,
    destination: NodeId,
) -> Option<Vec<NodeId>> {
    scenario.topology().shortest_route(source, destination)
}

/// Samples `n_flows` source/destination pairs and routes them. Pairs that are
/// unreachable or need more than `max_hops` hops are redrawn, up to
/// [`FLOW_RESAMPLE_ATTEMPTS`] times per flow.
pub fn generate_flows<R: Rng + ?Sized>(
    topology: &Topology,
    max_hops: usize,
    n_flows: usize,
    rng: &mut R,
) -> Result<Vec<Vec<NodeId>>> {
    let n = topology.node_count();
    if n_flows > 0 && n < 2 {
        return Err(Error::Generation(format!(
            "{n_flows} flows requested but only {n} node(s)"
        )));
    }
    (0..n_flows)
        .map(|f| {
            for _ in 0..FLOW_RESAMPLE_ATTEMPTS {
                let source = rng.random_range(0..n);
                let destination = (source + rng.random_range(1..n)) % n;
                match topology.shortest_route(NodeId(source), NodeId(destination)) {
                    Some(route) if route.len() - 1 <= max_hops => return Ok(route),
                    _ => continue,
                }
            }
            Err(Error::Generation(format!(
                "flow {f}: no routable pair within {max_hops} hops after {FLOW_RESAMPLE_ATTEMPTS} draws"
            )))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Channel;

    fn node(id: usize, x: f64, y: f64, channels: &[u16]) -> Node {
        Node {
            id: NodeId(id),
            x,
            y,
            channels: channels.iter().map(|&c| Channel(c)).collect(),
        }
    }

    fn params(n: usize) -> ScenarioParams {
        ScenarioParams {
            n_nodes: n,
            n_flows: 0,
            channel_subset_min: 1,
            ..Default::default()
        }
    }

    #[test]
    fn adjacent_nodes_route_directly() {
        let nodes = vec![node(0, 10.0, 10.0, &[3]), node(1, 60.0, 10.0, &[1, 3])];
        let topo = Topology::new(&params(2), &nodes);
        assert_eq!(
            topo.shortest_route(NodeId(0), NodeId(1)),
            Some(vec![NodeId(0), NodeId(1)])
        );
    }

    #[test]
    fn relay_bridges_out_of_range_pair() {
        let nodes = vec![
            node(0, 0.0, 0.0, &[0]),
            node(1, 150.0, 0.0, &[0]),
            node(2, 75.0, 0.0, &[0]),
        ];
        let topo = Topology::new(&params(3), &nodes);
        assert_eq!(
            topo.shortest_route(NodeId(0), NodeId(1)),
            Some(vec![NodeId(0), NodeId(2), NodeId(1)])
        );
    }

    #[test]
    fn no_common_channel_means_no_edge() {
        let nodes = vec![node(0, 0.0, 0.0, &[0]), node(1, 50.0, 0.0, &[1])];
        let topo = Topology::new(&params(2), &nodes);
        assert_eq!(topo.shortest_route(NodeId(0), NodeId(1)), None);
    }

    #[test]
    fn ties_prefer_smaller_relay_ids() {
        // Two equally short relays; node 1 must win over node 2.
        let nodes = vec![
            node(0, 0.0, 0.0, &[0]),
            node(1, 75.0, 10.0, &[0]),
            node(2, 75.0, -10.0, &[0]),
            node(3, 150.0, 0.0, &[0]),
        ];
        let topo = Topology::new(&params(4), &nodes);
        assert_eq!(
            topo.shortest_route(NodeId(0), NodeId(3)),
            Some(vec![NodeId(0), NodeId(1), NodeId(3)])
        );
    }

    #[test]
    fn same_endpoint_has_no_route() {
        let nodes = vec![node(0, 0.0, 0.0, &[0])];
        let topo = Topology::new(&params(1), &nodes);
        assert_eq!(topo.shortest_route(NodeId(0), NodeId(0)), None);
    }
}
