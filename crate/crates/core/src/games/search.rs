//! Backtracking search for a joint strategy that establishes every link of a
//! flow at once.
//!
//! Links are assigned in route order, channels ascending and power levels
//! ascending, so the first activation found is the first one in the flow's
//! enumeration order. A partial assignment is abandoned as soon as one of
//! its links drops below the threshold: assigning further links of the same
//! flow only adds interference, so it can never recover. Two further cuts
//! keep the result unchanged:
//!
//! - levels below a link's own minimum on a channel are skipped outright;
//! - once raising a link's power breaks an earlier link (or a protected
//!   flow), higher levels on that channel break it too.

use crate::radio::{NetworkState, RadioModel, Strategy};
use crate::scenario::LinkId;

use super::utility::min_level;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    /// Strategies for the flow's links, in route order.
    Found(Vec<Strategy>),
    /// The whole space was ruled out.
    NotFound,
    /// The node budget ran out first.
    CapReached,
}

/// Flows that must survive the activation, up to an allowed number of casualties.
#[derive(Debug, Clone)]
pub struct VictimGuard {
    pub flows: Vec<Vec<LinkId>>,
    pub max_broken: usize,
}

impl VictimGuard {
    fn holds(&self, model: &RadioModel, state: &NetworkState) -> bool {
        let broken = self
            .flows
            .iter()
            .filter(|links| links.iter().any(|&l| !model.is_active(state, l)))
            .count();
        broken <= self.max_broken
    }
}

struct Search<'a> {
    model: &'a RadioModel,
    links: &'a [LinkId],
    guard: Option<&'a VictimGuard>,
    cap: u64,
    nodes: u64,
}

enum Step {
    Found,
    Exhausted,
    Cap,
}

impl Search<'_> {
    fn descend(&mut self, state: &mut NetworkState, depth: usize) -> Step {
        let Some(&link) = self.links.get(depth) else {
            return Step::Found;
        };
        let top = self.model.q_levels() as u8 - 1;
        for &channel in self.model.link_channels(link) {
            let Some(first) = min_level(self.model, state, link, channel) else {
                continue;
            };
            for level in first..=top {
                if self.nodes == self.cap {
                    return Step::Cap;
                }
                self.nodes += 1;
                state.apply_unchecked(self.model, link, Strategy::on(level, channel));
                let earlier_ok = self.links[..depth]
                    .iter()
                    .all(|&l| self.model.is_active(state, l));
                let guard_ok = self.guard.is_none_or(|g| g.holds(self.model, state));
                if earlier_ok && guard_ok {
                    match self.descend(state, depth + 1) {
                        Step::Found => return Step::Found,
                        Step::Cap => {
                            state.apply_unchecked(self.model, link, Strategy::OFF);
                            return Step::Cap;
                        }
                        Step::Exhausted => {}
                    }
                }
                state.apply_unchecked(self.model, link, Strategy::OFF);
                if !(earlier_ok && guard_ok) {
                    break;
                }
            }
        }
        Step::Exhausted
    }
}

/// Searches for a full activation of `links` (one flow, in route order).
///
/// Every link in `links` must be OFF in `state` on entry, and is OFF again on
/// return; the caller applies a found assignment. Returns the outcome and the
/// number of candidate strategies tried.
pub fn find_activation(
    model: &RadioModel,
    state: &mut NetworkState,
    links: &[LinkId],
    guard: Option<&VictimGuard>,
    cap: u64,
) -> (SearchOutcome, u64) {
    debug_assert!(links.iter().all(|&l| state.strategy(l).is_off()));
    // Each link must at least be able to close on its own against the
    // interference that is already there.
    let hopeless = links.iter().any(|&l| {
        model
            .link_channels(l)
            .iter()
            .all(|&c| min_level(model, state, l, c).is_none())
    });
    if hopeless || links.is_empty() {
        return (SearchOutcome::NotFound, 0);
    }

    let mut search = Search {
        model,
        links,
        guard,
        cap,
        nodes: 0,
    };
    let outcome = match search.descend(state, 0) {
        Step::Found => {
            let found = links.iter().map(|&l| state.strategy(l)).collect();
            for &l in links {
                state.apply_unchecked(model, l, Strategy::OFF);
            }
            SearchOutcome::Found(found)
        }
        Step::Exhausted => SearchOutcome::NotFound,
        Step::Cap => SearchOutcome::CapReached,
    };
    (outcome, search.nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::utility::strategy_space;
    use crate::scenario::{generate_scenario, FlowId, ScenarioParams};

    /// Plain odometer over the flow's joint space (OFF excluded), in the same
    /// lexicographic order the search promises.
    fn first_by_enumeration(
        model: &RadioModel,
        state: &NetworkState,
        links: &[LinkId],
    ) -> Option<Vec<Strategy>> {
        let spaces: Vec<Vec<Strategy>> = links
            .iter()
            .map(|&l| strategy_space(model, l)[1..].to_vec())
            .collect();
        let mut idx = vec![0usize; links.len()];
        loop {
            let mut trial = state.clone();
            for (k, &l) in links.iter().enumerate() {
                trial.apply(model, l, spaces[k][idx[k]]).unwrap();
            }
            if links.iter().all(|&l| model.is_active(&trial, l)) {
                return Some(idx.iter().enumerate().map(|(k, &i)| spaces[k][i]).collect());
            }
            // Last link varies fastest.
            let mut k = links.len();
            loop {
                if k == 0 {
                    return None;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < spaces[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    #[test]
    fn agrees_with_plain_enumeration_on_short_flows() {
        let mut checked = 0;
        for seed in 0..6 {
            let params = ScenarioParams {
                n_flows: 20,
                q_levels: 4,
                seed,
                ..Default::default()
            };
            let scenario = generate_scenario(&params).unwrap();
            let model = RadioModel::new(&scenario);
            let mut state = NetworkState::new(&model);
            // Fill the network with other flows' first-found activations,
            // then probe each remaining short flow against that background.
            for flow in scenario.flows() {
                let links = &flow.links;
                if links.len() > 3 {
                    continue;
                }
                let expected = first_by_enumeration(&model, &state, links);
                let (outcome, _) = find_activation(&model, &mut state, links, None, u64::MAX);
                match (&outcome, &expected) {
                    (SearchOutcome::Found(a), Some(b)) => assert_eq!(a, b),
                    (SearchOutcome::NotFound, None) => {}
                    _ => panic!("flow {}: {outcome:?} vs {expected:?}", flow.id),
                }
                checked += 1;
                if let SearchOutcome::Found(a) = outcome {
                    for (&l, &s) in links.iter().zip(&a) {
                        state.apply(&model, l, s).unwrap();
                    }
                }
            }
        }
        assert!(checked > 30);
    }

    #[test]
    fn leaves_the_flow_off() {
        let params = ScenarioParams {
            n_flows: 5,
            seed: 4,
            ..Default::default()
        };
        let scenario = generate_scenario(&params).unwrap();
        let model = RadioModel::new(&scenario);
        let mut state = NetworkState::new(&model);
        let links = &scenario.flow(FlowId(0)).links;
        let before = state.clone();
        let (outcome, nodes) = find_activation(&model, &mut state, links, None, u64::MAX);
        assert!(matches!(outcome, SearchOutcome::Found(_)));
        assert!(nodes >= links.len() as u64);
        assert_eq!(state.strategies(), before.strategies());
    }

    #[test]
    fn cap_is_reported() {
        let params = ScenarioParams {
            n_flows: 5,
            seed: 4,
            ..Default::default()
        };
        let scenario = generate_scenario(&params).unwrap();
        let model = RadioModel::new(&scenario);
        let mut state = NetworkState::new(&model);
        let flow = scenario
            .flows()
            .iter()
            .find(|f| f.links.len() >= 2)
            .expect("a multi-hop flow");
        let (outcome, nodes) = find_activation(&model, &mut state, &flow.links, None, 1);
        assert_eq!(outcome, SearchOutcome::CapReached);
        assert_eq!(nodes, 1);
        assert!(flow.links.iter().all(|&l| state.strategy(l).is_off()));
    }
}
