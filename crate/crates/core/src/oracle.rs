//! Brute-force ground truth for tiny instances: exhaustive enumeration of
//! joint profiles, the global optimum of the number of established flows,
//! and pure Nash equilibrium checks by trying every unilateral deviation.
//!
//! Everything here recomputes SINR from node positions on every evaluation
//! and shares no code with the incremental radio engine or the move search.

use crate::error::{Error, Result};
use crate::games::{flow_active, run_game, GameConfig, GameKind, Player};
use crate::radio::{RadioModel, Strategy, THRESHOLD_REL_TOL};
use crate::scenario::{generate_scenario, LinkId, Scenario, ScenarioParams};

/// Largest joint space the oracle will enumerate.
pub const MAX_PROFILES: u128 = 10_000_000;

struct Evaluator<'a> {
    scenario: &'a Scenario,
    spaces: Vec<Vec<Strategy>>,
}

impl<'a> Evaluator<'a> {
    fn new(scenario: &'a Scenario) -> Self {
        let q = scenario.params().q_levels as u8;
        let spaces = scenario
            .links()
            .iter()
            .map(|link| {
                std::iter::once(Strategy::OFF)
                    .chain(
                        link.channels
                            .iter()
                            .flat_map(|&c| (1..q).map(move |level| Strategy::on(level, c))),
                    )
                    .collect()
            })
            .collect();
        Evaluator { scenario, spaces }
    }

    fn power(&self, s: Strategy) -> f64 {
        let p = self.scenario.params();
        s.level() as f64 * p.p_max / (p.q_levels - 1) as f64
    }

    fn gain(&self, from: LinkId, to: LinkId) -> f64 {
        let tx = self.scenario.node(self.scenario.link(from).tx);
        let rx = self.scenario.node(self.scenario.link(to).rx);
        let d = ((tx.x - rx.x).powi(2) + (tx.y - rx.y).powi(2)).sqrt();
        if d == 0.0 {
            f64::INFINITY
        } else {
            d.powf(-self.scenario.params().path_loss_exp)
        }
    }

    fn link_active(&self, profile: &[Strategy], l: usize) -> bool {
        let own = profile[l];
        let Some(channel) = own.channel() else {
            return false;
        };
        let mut interference = 0.0;
        for (m, s) in profile.iter().enumerate() {
            if m != l && s.channel() == Some(channel) {
                interference += self.power(*s) * self.gain(LinkId(m), LinkId(l));
            }
        }
        let p = self.scenario.params();
        let sinr = if interference.is_infinite() {
            0.0
        } else {
            self.power(own) * self.gain(LinkId(l), LinkId(l)) / (p.noise_power + interference)
        };
        sinr >= p.sinr_threshold * (1.0 - THRESHOLD_REL_TOL)
    }

    fn flow_active(&self, profile: &[Strategy], f: usize) -> bool {
        self.scenario.flows()[f]
            .links
            .iter()
            .all(|l| self.link_active(profile, l.0))
    }

    fn active_flows(&self, profile: &[Strategy]) -> usize {
        (0..self.scenario.flows().len())
            .filter(|&f| self.flow_active(profile, f))
            .count()
    }

    fn utility(&self, game: GameKind, player: Player, profile: &[Strategy]) -> i64 {
        let signed = |up: bool, silent: bool| {
            if up {
                1
            } else if silent {
                0
            } else {
                -1
            }
        };
        match (game, player) {
            (GameKind::Pfg, _) => self.active_flows(profile) as i64,
            (GameKind::Lfg, Player::Flow(f)) => {
                let links = &self.scenario.flows()[f.0].links;
                signed(
                    self.flow_active(profile, f.0),
                    links.iter().all(|l| profile[l.0].is_off()),
                )
            }
            (GameKind::Llg, Player::Link(l)) => {
                signed(self.link_active(profile, l.0), profile[l.0].is_off())
            }
            _ => unreachable!("player kind checked by caller"),
        }
    }

    fn space_size(&self, links: impl Iterator<Item = usize>) -> u128 {
        links.fold(1u128, |acc, l| {
            acc.saturating_mul(self.spaces[l].len() as u128)
        })
    }

    fn guard(&self, size: u128) -> Result<()> {
        if size > MAX_PROFILES {
            return Err(Error::SpaceTooLarge {
                size,
                limit: MAX_PROFILES,
            });
        }
        Ok(())
    }

    /// Calls `visit` with `profile` set to every combination of strategies of
    /// `links` (others untouched), last link varying fastest. Stops early when
    /// `visit` returns `false`.
    fn for_each(
        &self,
        links: &[usize],
        profile: &mut [Strategy],
        mut visit: impl FnMut(&[Strategy]) -> bool,
    ) {
        let mut idx = vec![0usize; links.len()];
        for &l in links {
            profile[l] = self.spaces[l][0];
        }
        loop {
            if !visit(profile) {
                return;
            }
            let mut k = links.len();
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < self.spaces[links[k]].len() {
                    profile[links[k]] = self.spaces[links[k]][idx[k]];
                    break;
                }
                idx[k] = 0;
                profile[links[k]] = self.spaces[links[k]][0];
            }
        }
    }
}

/// Maximum number of simultaneously established flows and the first profile
/// (in enumeration order) reaching it.
pub fn global_optimum(scenario: &Scenario) -> Result<(usize, Vec<Strategy>)> {
    let eval = Evaluator::new(scenario);
    let n = scenario.links().len();
    eval.guard(eval.space_size(0..n))?;
    let all: Vec<usize> = (0..n).collect();
    let mut profile = vec![Strategy::OFF; n];
    let mut best = (0, profile.clone());
    let ceiling = scenario.flows().len();
    eval.for_each(&all, &mut profile, |p| {
        let value = eval.active_flows(p);
        if value > best.0 {
            best = (value, p.to_vec());
        }
        best.0 < ceiling
    });
    Ok(best)
}

/// Whether no player of `game` can strictly improve its utility by any
/// unilateral deviation from `profile`. Flow players deviate over the full
/// joint space of their links. CLG has no single utility and is rejected.
pub fn is_pure_nash(profile: &[Strategy], game: GameKind, scenario: &Scenario) -> Result<bool> {
    if game == GameKind::Clg {
        return Err(Error::Unsupported(
            "the cooperative link game has no single per-player utility to check".into(),
        ));
    }
    if profile.len() != scenario.links().len() {
        return Err(Error::invalid(
            "profile",
            "one strategy per link is required",
        ));
    }
    let eval = Evaluator::new(scenario);
    let players: Vec<(Player, Vec<usize>)> = if game.flows_are_players() {
        scenario
            .flows()
            .iter()
            .map(|f| (Player::Flow(f.id), f.links.iter().map(|l| l.0).collect()))
            .collect()
    } else {
        scenario
            .links()
            .iter()
            .map(|l| (Player::Link(l.id), vec![l.id.0]))
            .collect()
    };
    for (_, links) in &players {
        eval.guard(eval.space_size(links.iter().copied()))?;
    }

    for (player, links) in &players {
        let current = eval.utility(game, *player, profile);
        let mut trial = profile.to_vec();
        let mut improvable = false;
        eval.for_each(links, &mut trial, |p| {
            improvable = eval.utility(game, *player, p) > current;
            !improvable
        });
        if improvable {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Parameters for an enumerable instance: a handful of nodes on 200 m × 200 m,
/// two channels, on/off power, at most two hops per flow.
pub fn tiny_params(n_flows: usize, seed: u64) -> ScenarioParams {
    ScenarioParams {
        n_nodes: 8,
        side_length: 200.0,
        n_channels: 2,
        region_size: 100.0,
        channel_subset_min: 1,
        channel_subset_max: 2,
        q_levels: 2,
        max_hops: 2,
        n_flows,
        seed,
        ..ScenarioParams::default()
    }
}

/// Tiny instance with two or three flows; redraws the seed until the flows route.
pub fn tiny_scenario(seed: u64) -> Scenario {
    let n_flows = 2 + (seed % 2) as usize;
    (0..)
        .find_map(|k: u64| {
            generate_scenario(&tiny_params(
                n_flows,
                seed.wrapping_mul(1000).wrapping_add(k),
            ))
            .ok()
        })
        .expect("some seed routes")
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

/// Cross-checks the dynamics against enumeration on one tiny instance:
/// converged LLG/LFG/PFG profiles are pure NE, PFG moves strictly raise the
/// potential, the optimum witness is a PFG equilibrium, and CLG ends with
/// every flow fully up or fully silent.
pub fn verify_instance(scenario: &Scenario) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let (optimum, witness) = global_optimum(scenario)?;
    checks.push(check(
        "optimum witness is a PFG equilibrium",
        is_pure_nash(&witness, GameKind::Pfg, scenario)?,
        format!("optimum {optimum}"),
    ));

    for game in [GameKind::Llg, GameKind::Lfg, GameKind::Pfg] {
        let run = run_game(scenario, &GameConfig::new(game))?;
        if run.trajectory.converged {
            let ne = is_pure_nash(run.state.strategies(), game, scenario)?;
            checks.push(check(
                format!("{game} terminal profile is a pure NE"),
                ne,
                format!("{} active flows", run.metrics.flows_active),
            ));
        } else {
            checks.push(check(
                format!("{game} terminal profile is a pure NE"),
                true,
                "not converged, nothing to check",
            ));
        }
        if game == GameKind::Pfg {
            let mut last = 0;
            let monotone = run.trajectory.records.iter().all(|r| {
                let ok = r.utility_after > r.utility_before
                    && r.utility_before == last
                    && r.potential == Some(r.utility_after as usize);
                last = r.utility_after;
                ok
            });
            checks.push(check(
                "PFG potential strictly increases on every move",
                monotone,
                format!("{} moves", run.trajectory.records.len()),
            ));
            checks.push(check(
                "PFG converges within the optimum",
                run.trajectory.converged && run.metrics.flows_active <= optimum,
                format!("{} of optimum {optimum}", run.metrics.flows_active),
            ));
        }
    }

    let clg = run_game(scenario, &GameConfig::new(GameKind::Clg))?;
    let model = RadioModel::new(scenario);
    let clean = scenario.flows().iter().all(|f| {
        let on = f
            .links
            .iter()
            .filter(|l| !clg.state.strategy(**l).is_off())
            .count();
        on == 0 || (on == f.links.len() && flow_active(&model, &clg.state, f))
    });
    checks.push(check(
        "CLG flows end fully up or fully silent",
        clean,
        format!("{} active flows", clg.metrics.flows_active),
    ));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{scenario_from_json, Channel};

    fn two_links(distance_between: f64) -> Scenario {
        // Two single-hop flows, one shared channel, full power only.
        let text = format!(
            r#"{{
  "params": {{"n_nodes": 4, "side_length": 1000.0, "n_channels": 1, "region_size": 100.0,
    "channel_subset_min": 1, "channel_subset_max": 1, "p_max_dbm": 20.0, "q_levels": 2,
    "path_loss_exp": 4.0, "sinr_threshold_db": 10.0, "noise_power_dbm": -70.0,
    "max_hops": 1, "n_flows": 2, "seed": 0}},
  "nodes": [
    {{"id": 0, "x": 0.0, "y": 0.0, "channels": [0]}},
    {{"id": 1, "x": 80.0, "y": 0.0, "channels": [0]}},
    {{"id": 2, "x": {a}, "y": 0.0, "channels": [0]}},
    {{"id": 3, "x": {b}, "y": 0.0, "channels": [0]}}
  ],
  "flows": [{{"id": 0, "src": 0, "dst": 1, "route": [0, 1]}},
            {{"id": 1, "src": 2, "dst": 3, "route": [2, 3]}}]
}}"#,
            a = 80.0 + distance_between,
            b = 160.0 + distance_between
        );
        scenario_from_json(&text).unwrap()
    }

    #[test]
    fn mutually_jamming_pair_has_optimum_one() {
        let scenario = two_links(20.0);
        let (opt, witness) = global_optimum(&scenario).unwrap();
        assert_eq!(opt, 1);
        // First in enumeration order: flow 0 silent, flow 1 on.
        assert_eq!(witness, vec![Strategy::OFF, Strategy::on(1, Channel(0))]);
        assert!(is_pure_nash(&witness, GameKind::Pfg, &scenario).unwrap());
    }

    #[test]
    fn distant_pair_has_optimum_two() {
        let scenario = two_links(800.0);
        assert_eq!(global_optimum(&scenario).unwrap().0, 2);
    }

    #[test]
    fn no_flows_optimum_zero() {
        let scenario = generate_scenario(&ScenarioParams {
            n_nodes: 3,
            n_flows: 0,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(global_optimum(&scenario).unwrap(), (0, vec![]));
    }

    #[test]
    fn all_off_is_not_an_lfg_equilibrium_when_a_flow_can_start() {
        let scenario = two_links(800.0);
        let off = vec![Strategy::OFF; 2];
        assert!(!is_pure_nash(&off, GameKind::Lfg, &scenario).unwrap());
        assert!(!is_pure_nash(&off, GameKind::Llg, &scenario).unwrap());
        assert!(is_pure_nash(&off, GameKind::Clg, &scenario).is_err());
    }

    #[test]
    fn guard_rejects_large_spaces() {
        let scenario = generate_scenario(&ScenarioParams {
            n_flows: 10,
            seed: 1,
            ..Default::default()
        })
        .unwrap();
        assert!(matches!(
            global_optimum(&scenario),
            Err(Error::SpaceTooLarge { .. })
        ));
    }

    #[test]
    fn tiny_instances_pass_every_check() {
        for seed in 0..4 {
            let scenario = tiny_scenario(seed);
            for c in verify_instance(&scenario).unwrap() {
                assert!(c.passed, "seed {seed}: {} ({})", c.name, c.detail);
            }
        }
    }
}
