//! The four allocation dynamics and the engine that plays them.
//!
//! | game | players | utility |
//! |------|---------|---------|
//! | LLG  | links   | own link established (+1), OFF (0), failing (−1) |
//! | LFG  | flows   | whole flow established (+1), all OFF (0), otherwise (−1) |
//! | PFG  | flows   | number of established flows in the network |
//! | CLG  | links   | two-phase cooperative rule along the route |
//!
//! All games start from the all-OFF profile and are played as a repeated
//! sequential game with round-robin scheduling and first-found better
//! responses, so a run is a pure function of the scenario and config.

mod engine;
pub mod search;
pub mod utility;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use engine::{run_game, run_game_with, GameRun, MoveRecord, Player, Termination, Trajectory};
pub use search::{find_activation, SearchOutcome, VictimGuard};
pub use utility::{
    clg_utility, flow_active, lfg_utility, llg_utility, potential, strategy_space, ClgPhase,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GameKind {
    #[serde(rename = "LLG")]
    Llg,
    #[serde(rename = "LFG")]
    Lfg,
    #[serde(rename = "PFG")]
    Pfg,
    #[serde(rename = "CLG")]
    Clg,
}

impl GameKind {
    pub const ALL: [GameKind; 4] = [GameKind::Llg, GameKind::Clg, GameKind::Lfg, GameKind::Pfg];

    /// Flows are the players (LFG, PFG); otherwise links are.
    pub fn flows_are_players(self) -> bool {
        matches!(self, GameKind::Lfg | GameKind::Pfg)
    }

    pub fn label(self) -> &'static str {
        match self {
            GameKind::Llg => "LLG",
            GameKind::Lfg => "LFG",
            GameKind::Pfg => "PFG",
            GameKind::Clg => "CLG",
        }
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for GameKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "llg" => Ok(GameKind::Llg),
            "lfg" => Ok(GameKind::Lfg),
            "pfg" => Ok(GameKind::Pfg),
            "clg" => Ok(GameKind::Clg),
            other => Err(Error::invalid(
                "game",
                format!("unknown game `{other}` (expected llg, lfg, pfg or clg)"),
            )),
        }
    }
}

pub const DEFAULT_MAX_CYCLES: usize = 50;
pub const DEFAULT_SEARCH_NODE_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameConfig {
    pub game: GameKind,
    /// Round-robin cycles before a run is declared non-converged.
    pub max_cycles: usize,
    /// Candidate strategies a flow may try in one move before giving up.
    pub search_node_cap: u64,
    /// Recorded with the run. The dynamics themselves are deterministic.
    pub seed: u64,
}

impl GameConfig {
    pub fn new(game: GameKind) -> Self {
        GameConfig {
            game,
            max_cycles: DEFAULT_MAX_CYCLES,
            search_node_cap: DEFAULT_SEARCH_NODE_CAP,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_cycles < 1 {
            return Err(Error::invalid("max_cycles", "must be at least 1"));
        }
        if self.search_node_cap < 1 {
            return Err(Error::invalid("search_node_cap", "must be at least 1"));
        }
        Ok(())
    }
}
