use serde::{Deserialize, Serialize};

use super::search::{find_activation, SearchOutcome, VictimGuard};
use super::utility::{
    clg_utility, flow_active, lfg_utility, llg_utility, min_level, potential, ClgPhase,
};
use super::{GameConfig, GameKind};
use crate::error::Result;
use crate::experiments::RunMetrics;
use crate::radio::{NetworkState, RadioModel, Strategy};
use crate::scenario::{Flow, FlowId, LinkId, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Player {
    Flow(FlowId),
    Link(LinkId),
}

/// One accepted better-response move.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveRecord {
    /// 1-based round-robin cycle.
    pub cycle: usize,
    pub player: Player,
    /// CLG only: which of the two utilities the move improved.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase: Option<super::ClgPhase>,
    /// Links whose strategies the move covers, with old and new values.
    pub links: Vec<LinkId>,
    pub old: Vec<Strategy>,
    pub new: Vec<Strategy>,
    pub utility_before: i64,
    pub utility_after: i64,
    /// PFG only: number of established flows after the move.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    /// A full cycle passed without any strategy change.
    Stable,
    /// CLG: a full cycle passed without any flow becoming established.
    NoImprovement,
    MaxCycles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub game: GameKind,
    pub seed: u64,
    pub records: Vec<MoveRecord>,
    /// Turns taken by link players; for flow games, the links of every flow turn.
    pub link_steps: u64,
    /// Turns taken by flow players; for link games, link steps over the mean
    /// number of links per flow.
    pub flow_steps: f64,
    pub cycles: usize,
    pub converged: bool,
    pub termination: Termination,
    /// Flow moves abandoned because the search budget ran out.
    pub cap_exhaustions: u64,
}

impl Trajectory {
    /// Player turns taken before termination.
    pub fn player_turns(&self) -> u64 {
        match self.game {
            GameKind::Lfg | GameKind::Pfg => self.flow_steps as u64,
            GameKind::Llg | GameKind::Clg => self.link_steps,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GameRun {
    pub state: NetworkState,
    pub trajectory: Trajectory,
    pub metrics: RunMetrics,
}

struct Engine<'a> {
    scenario: &'a Scenario,
    model: &'a RadioModel,
    config: &'a GameConfig,
    state: NetworkState,
    records: Vec<MoveRecord>,
    cycle: usize,
    link_steps: u64,
    flow_turns: u64,
    cap_exhaustions: u64,
}

/// Plays `config.game` on `scenario` from the all-OFF profile until it settles
/// or `config.max_cycles` round-robin cycles have passed.
pub fn run_game(scenario: &Scenario, config: &GameConfig) -> Result<GameRun> {
    let model = RadioModel::new(scenario);
    run_game_with(scenario, &model, config)
}

/// As [`run_game`], reusing a prebuilt radio model of `scenario`.
pub fn run_game_with(
    scenario: &Scenario,
    model: &RadioModel,
    config: &GameConfig,
) -> Result<GameRun> {
    config.validate()?;
    let mut engine = Engine {
        scenario,
        model,
        config,
        state: NetworkState::new(model),
        records: Vec::new(),
        cycle: 0,
        link_steps: 0,
        flow_turns: 0,
        cap_exhaustions: 0,
    };

    let mut termination = Termination::MaxCycles;
    while engine.cycle < config.max_cycles {
        engine.cycle += 1;
        let mut progressed = false;
        for flow in scenario.flows() {
            progressed |= match config.game {
                GameKind::Llg => flow
                    .links
                    .iter()
                    .fold(false, |acc, &l| engine.llg_turn(l) | acc),
                GameKind::Lfg => engine.lfg_turn(flow),
                GameKind::Pfg => engine.pfg_turn(flow),
                GameKind::Clg => engine.clg_turn(flow),
            };
        }
        if !progressed {
            termination = match config.game {
                GameKind::Clg => Termination::NoImprovement,
                _ => Termination::Stable,
            };
            break;
        }
    }

    let flow_steps = if config.game.flows_are_players() {
        engine.flow_turns as f64
    } else {
        scenario
            .mean_links_per_flow()
            .map_or(0.0, |mean| engine.link_steps as f64 / mean)
    };
    let trajectory = Trajectory {
        game: config.game,
        seed: config.seed,
        records: engine.records,
        link_steps: engine.link_steps,
        flow_steps,
        cycles: engine.cycle,
        converged: termination != Termination::MaxCycles,
        termination,
        cap_exhaustions: engine.cap_exhaustions,
    };
    let metrics = RunMetrics::from_run(0, scenario, model, &engine.state, &trajectory);
    Ok(GameRun {
        state: engine.state,
        trajectory,
        metrics,
    })
}

impl Engine<'_> {
    fn strategies(&self, links: &[LinkId]) -> Vec<Strategy> {
        links.iter().map(|&l| self.state.strategy(l)).collect()
    }

    fn set(&mut self, links: &[LinkId], strategies: &[Strategy]) {
        for (&l, &s) in links.iter().zip(strategies) {
            self.state.apply_unchecked(self.model, l, s);
        }
    }

    fn silence(&mut self, links: &[LinkId]) {
        for &l in links {
            self.state.apply_unchecked(self.model, l, Strategy::OFF);
        }
    }

    /// First activating strategy of `link` (channels, then levels ascending)
    /// under the current profile, subject to `also` holding afterwards.
    fn first_activation(&self, link: LinkId, also: impl Fn(Strategy) -> bool) -> Option<Strategy> {
        let top = self.model.q_levels() as u8 - 1;
        for &c in self.model.link_channels(link) {
            let Some(first) = min_level(self.model, &self.state, link, c) else {
                continue;
            };
            for level in first..=top {
                let s = Strategy::on(level, c);
                if also(s) {
                    return Some(s);
                }
            }
        }
        None
    }

    #[allow(clippy::too_many_arguments)]
    fn record(
        &mut self,
        player: Player,
        phase: Option<super::ClgPhase>,
        links: Vec<LinkId>,
        old: Vec<Strategy>,
        utility_before: i64,
        utility_after: i64,
        potential: Option<usize>,
    ) {
        let new = self.strategies(&links);
        self.records.push(MoveRecord {
            cycle: self.cycle,
            player,
            phase,
            links,
            old,
            new,
            utility_before,
            utility_after,
            potential,
        });
    }

    fn llg_turn(&mut self, link: LinkId) -> bool {
        self.link_steps += 1;
        let before = llg_utility(self.model, &self.state, link);
        if before == 1 {
            return false;
        }
        let old = self.state.strategy(link);
        let target = match self.first_activation(link, |_| true) {
            Some(s) => s,
            None if before == -1 => Strategy::OFF,
            None => return false,
        };
        self.state.apply_unchecked(self.model, link, target);
        let after = llg_utility(self.model, &self.state, link);
        debug_assert!(after > before);
        self.record(
            Player::Link(link),
            None,
            vec![link],
            vec![old],
            before.into(),
            after.into(),
            None,
        );
        true
    }

    fn lfg_turn(&mut self, flow: &Flow) -> bool {
        self.flow_turns += 1;
        self.link_steps += flow.links.len() as u64;
        let before = lfg_utility(self.model, &self.state, flow);
        if before == 1 {
            return false;
        }
        let old = self.strategies(&flow.links);
        self.silence(&flow.links);
        let (outcome, _) = find_activation(
            self.model,
            &mut self.state,
            &flow.links,
            None,
            self.config.search_node_cap,
        );
        match outcome {
            SearchOutcome::Found(strategies) => self.set(&flow.links, &strategies),
            SearchOutcome::CapReached | SearchOutcome::NotFound => {
                if outcome == SearchOutcome::CapReached {
                    self.cap_exhaustions += 1;
                }
                if before == 0 {
                    // Already silent; nothing better was found.
                    self.set(&flow.links, &old);
                    return false;
                }
            }
        }
        let after = lfg_utility(self.model, &self.state, flow);
        debug_assert!(after > before);
        self.record(
            Player::Flow(flow.id),
            None,
            flow.links.clone(),
            old,
            before.into(),
            after.into(),
            None,
        );
        true
    }

    /// Tries all-OFF first, then full activations of the flow, taking the
    /// first that raises the number of established flows. Partially
    /// transmitting profiles are never better than all-OFF for this utility.
    fn pfg_turn(&mut self, flow: &Flow) -> bool {
        self.flow_turns += 1;
        self.link_steps += flow.links.len() as u64;
        let flows = self.scenario.flows();
        let before = potential(self.model, &self.state, flows);
        let old = self.strategies(&flow.links);
        self.silence(&flow.links);

        // Flows that stand with this one silent. Adding its transmissions can
        // only take flows away from this set, never add to it.
        let standing: Vec<Vec<LinkId>> = flows
            .iter()
            .filter(|f| f.id != flow.id && flow_active(self.model, &self.state, f))
            .map(|f| f.links.clone())
            .collect();
        let silent_value = standing.len();

        let accepted = if silent_value > before {
            true
        } else if silent_value + 1 > before {
            let guard = VictimGuard {
                flows: standing,
                max_broken: silent_value - before,
            };
            let (outcome, _) = find_activation(
                self.model,
                &mut self.state,
                &flow.links,
                Some(&guard),
                self.config.search_node_cap,
            );
            match outcome {
                SearchOutcome::Found(strategies) => {
                    self.set(&flow.links, &strategies);
                    true
                }
                SearchOutcome::CapReached => {
                    self.cap_exhaustions += 1;
                    false
                }
                SearchOutcome::NotFound => false,
            }
        } else {
            false
        };

        if !accepted {
            self.set(&flow.links, &old);
            return false;
        }
        let after = potential(self.model, &self.state, flows);
        debug_assert!(after > before);
        self.record(
            Player::Flow(flow.id),
            None,
            flow.links.clone(),
            old,
            before as i64,
            after as i64,
            Some(after),
        );
        true
    }

    /// Links of the flow play in route order; then, unless the flow came up
    /// as a whole, every link falls silent. Returns whether the flow was
    /// newly established by this turn, which is what keeps a CLG run going.
    /// Falling back to silence is not progress: otherwise two flows that
    /// keep knocking each other out would never let the game stop.
    fn clg_turn(&mut self, flow: &Flow) -> bool {
        let was_active = flow_active(self.model, &self.state, flow);

        for (i, &link) in flow.links.iter().enumerate() {
            self.link_steps += 1;
            let before = clg_utility(self.model, &self.state, flow, i, ClgPhase::Prefix);
            if before == 1 {
                continue;
            }
            let old = self.state.strategy(link);
            let earlier = &flow.links[..i];
            let model = self.model;
            let state = &self.state;
            let keeps_earlier = |s: Strategy| {
                earlier
                    .iter()
                    .all(|&e| model.is_active_if(state, e, link, s))
            };
            let target = match self.first_activation(link, keeps_earlier) {
                Some(s) => s,
                None if before == -1 => Strategy::OFF,
                None => continue,
            };
            self.state.apply_unchecked(self.model, link, target);
            let after = clg_utility(self.model, &self.state, flow, i, ClgPhase::Prefix);
            debug_assert!(after > before);
            self.record(
                Player::Link(link),
                Some(ClgPhase::Prefix),
                vec![link],
                vec![old],
                before.into(),
                after.into(),
                None,
            );
        }

        if !flow_active(self.model, &self.state, flow) {
            for (i, &link) in flow.links.iter().enumerate() {
                let old = self.state.strategy(link);
                if old.is_off() {
                    continue;
                }
                let before = clg_utility(self.model, &self.state, flow, i, ClgPhase::Flow);
                self.state.apply_unchecked(self.model, link, Strategy::OFF);
                self.record(
                    Player::Link(link),
                    Some(ClgPhase::Flow),
                    vec![link],
                    vec![old],
                    before.into(),
                    0,
                    None,
                );
            }
        }

        !was_active && flow_active(self.model, &self.state, flow)
    }
}
