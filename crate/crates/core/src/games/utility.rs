//! Strategy spaces and per-player utilities. Utilities are `-1`, `0` or `1`
//! except for the potential, which counts established flows.

use crate::radio::{NetworkState, RadioModel, Strategy};
use crate::scenario::{Flow, LinkId};

/// OFF first, then every (level, channel) pair: channels ascending, levels
/// ascending within a channel.
pub fn strategy_space(model: &RadioModel, link: LinkId) -> Vec<Strategy> {
    let levels = model.q_levels() as u8 - 1;
    let mut space = vec![Strategy::OFF];
    for &c in model.link_channels(link) {
        space.extend((1..=levels).map(|q| Strategy::on(q, c)));
    }
    space
}

pub fn flow_active(model: &RadioModel, state: &NetworkState, flow: &Flow) -> bool {
    flow.links.iter().all(|&l| model.is_active(state, l))
}

fn flow_off(state: &NetworkState, flow: &Flow) -> bool {
    flow.links.iter().all(|&l| state.strategy(l).is_off())
}

/// Local flow game: 1 when the whole flow is up, 0 when it is silent,
/// −1 for any other mix.
pub fn lfg_utility(model: &RadioModel, state: &NetworkState, flow: &Flow) -> i8 {
    if flow_active(model, state, flow) {
        1
    } else if flow_off(state, flow) {
        0
    } else {
        -1
    }
}

/// Number of established flows; the utility of every potential-game player.
pub fn potential(model: &RadioModel, state: &NetworkState, flows: &[Flow]) -> usize {
    flows
        .iter()
        .filter(|f| flow_active(model, state, f))
        .count()
}

pub fn llg_utility(model: &RadioModel, state: &NetworkState, link: LinkId) -> i8 {
    if model.is_active(state, link) {
        1
    } else if state.strategy(link).is_off() {
        0
    } else {
        -1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ClgPhase {
    /// The link and every link before it on the route must be up.
    Prefix,
    /// The whole flow must be up.
    Flow,
}

/// Cooperative link game utility of the link at `index` on `flow`'s route.
pub fn clg_utility(
    model: &RadioModel,
    state: &NetworkState,
    flow: &Flow,
    index: usize,
    phase: ClgPhase,
) -> i8 {
    let scope = match phase {
        ClgPhase::Prefix => &flow.links[..=index],
        ClgPhase::Flow => &flow.links[..],
    };
    if scope.iter().all(|&l| model.is_active(state, l)) {
        1
    } else if state.strategy(flow.links[index]).is_off() {
        0
    } else {
        -1
    }
}

/// Lowest level at which `link` would be up on its own on `channel`, given
/// everyone else's current strategies; `None` if even full power fails.
pub(crate) fn min_level(
    model: &RadioModel,
    state: &NetworkState,
    link: LinkId,
    channel: crate::scenario::Channel,
) -> Option<u8> {
    let interference = state.interference(link, channel);
    if interference.is_infinite() {
        return None;
    }
    let top = model.q_levels() as u8 - 1;
    let full = model.power(Strategy::on(top, channel));
    // Solve level·step·g/(N+I) ≥ α, then settle the rounding against the
    // exact activity test.
    let needed = model.alpha() * (model.noise() + interference)
        / (model.gains().get(link, link) * full / top as f64);
    let mut level = needed.ceil().clamp(1.0, top as f64 + 1.0) as u8;
    let up = |q: u8| model.is_active_if(state, link, link, Strategy::on(q, channel));
    while level > 1 && up(level - 1) {
        level -= 1;
    }
    while level <= top && !up(level) {
        level += 1;
    }
    (level <= top).then_some(level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{scenario_from_json, Channel, FlowId, Scenario};

    fn fixture() -> Scenario {
        scenario_from_json(include_str!("../../tests/fixtures/three_flows.json")).unwrap()
    }

    #[test]
    fn strategy_space_counts_and_order() {
        let scenario = crate::scenario::generate_scenario(&crate::ScenarioParams {
            n_flows: 5,
            seed: 2,
            ..Default::default()
        })
        .unwrap();
        let model = RadioModel::new(&scenario);
        for link in scenario.links() {
            let space = strategy_space(&model, link.id);
            assert_eq!(space.len(), 1 + 15 * link.channels.len());
            assert_eq!(space[0], Strategy::OFF);
            assert_eq!(space[1], Strategy::on(1, link.channels[0]));
            assert_eq!(space[15], Strategy::on(15, link.channels[0]));
            assert_eq!(space, strategy_space(&model, link.id));
        }
    }

    #[test]
    fn two_level_single_channel_space() {
        let text = include_str!("../../tests/fixtures/three_flows.json")
            .replace(r#""q_levels": 16"#, r#""q_levels": 2"#);
        let scenario = scenario_from_json(&text).unwrap();
        let model = RadioModel::new(&scenario);
        // Flow 2 only has channel 0.
        let link = scenario.flow(FlowId(2)).links[0];
        assert_eq!(
            strategy_space(&model, link),
            vec![Strategy::OFF, Strategy::on(1, Channel(0))]
        );
        assert_eq!(
            model.power(Strategy::on(1, Channel(0))),
            scenario.params().p_max
        );
    }

    #[test]
    fn lfg_and_potential_values() {
        let scenario = fixture();
        let model = RadioModel::new(&scenario);
        let mut state = NetworkState::new(&model);
        let flows = scenario.flows();
        assert_eq!(potential(&model, &state, flows), 0);
        assert!(flows.iter().all(|f| lfg_utility(&model, &state, f) == 0));

        // Flow 0 on channels 0 then 1; flow 2 on channel 0, far away.
        state
            .apply(&model, LinkId(0), Strategy::on(15, Channel(0)))
            .unwrap();
        state
            .apply(&model, LinkId(1), Strategy::on(15, Channel(1)))
            .unwrap();
        state
            .apply(&model, LinkId(3), Strategy::on(15, Channel(0)))
            .unwrap();
        assert_eq!(lfg_utility(&model, &state, &flows[0]), 1);
        assert_eq!(lfg_utility(&model, &state, &flows[1]), 0);
        assert_eq!(potential(&model, &state, flows), 2);

        // Flow 1 right next to flow 0 on channel 0 breaks itself and flow 0.
        state
            .apply(&model, LinkId(2), Strategy::on(15, Channel(0)))
            .unwrap();
        assert_eq!(lfg_utility(&model, &state, &flows[1]), -1);
        assert_eq!(lfg_utility(&model, &state, &flows[0]), -1);
        assert_eq!(llg_utility(&model, &state, LinkId(2)), -1);
        assert_eq!(llg_utility(&model, &state, LinkId(1)), 1);
        assert_eq!(potential(&model, &state, flows), 1);
    }

    #[test]
    fn partially_on_flow_is_minus_one() {
        let scenario = fixture();
        let model = RadioModel::new(&scenario);
        let mut state = NetworkState::new(&model);
        state
            .apply(&model, LinkId(0), Strategy::on(15, Channel(0)))
            .unwrap();
        assert_eq!(lfg_utility(&model, &state, scenario.flow(FlowId(0))), -1);
    }

    #[test]
    fn clg_phases() {
        let scenario = fixture();
        let model = RadioModel::new(&scenario);
        let mut state = NetworkState::new(&model);
        let flow = scenario.flow(FlowId(0));
        state
            .apply(&model, LinkId(0), Strategy::on(15, Channel(0)))
            .unwrap();
        assert_eq!(clg_utility(&model, &state, flow, 0, ClgPhase::Prefix), 1);
        assert_eq!(clg_utility(&model, &state, flow, 0, ClgPhase::Flow), -1);
        assert_eq!(clg_utility(&model, &state, flow, 1, ClgPhase::Prefix), 0);
        state
            .apply(&model, LinkId(1), Strategy::on(15, Channel(1)))
            .unwrap();
        for i in 0..2 {
            assert_eq!(clg_utility(&model, &state, flow, i, ClgPhase::Flow), 1);
        }
        // Same channel as hop 0: hop 0 is jammed at the shared node.
        state
            .apply(&model, LinkId(1), Strategy::on(15, Channel(0)))
            .unwrap();
        assert_eq!(clg_utility(&model, &state, flow, 1, ClgPhase::Prefix), -1);
    }

    #[test]
    fn min_level_is_the_lowest_activating_level() {
        let scenario = fixture();
        let model = RadioModel::new(&scenario);
        let state = NetworkState::new(&model);
        for link in scenario.links() {
            for &c in &link.channels {
                let brute = (1..16u8)
                    .find(|&q| model.is_active_if(&state, link.id, link.id, Strategy::on(q, c)));
                assert_eq!(min_level(&model, &state, link.id, c), brute);
            }
        }
    }
}
