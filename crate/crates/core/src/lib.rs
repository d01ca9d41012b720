//! Joint channel and transmit-power allocation for multihop cognitive radio
//! networks under the physical (SINR) interference model.
//!
//! The crate is organised bottom-up:
//!
//! - [`scenario`]: random network instances, minimum-hop routing, scenario files.
//! - [`radio`]: path gains, SINR and an incrementally maintained interference cache.
//! - [`games`]: the four allocation dynamics (LLG, LFG, PFG, CLG) and the
//!   round-robin engine that plays them to convergence.
//! - [`oracle`]: brute-force ground truth for tiny instances.
//! - [`experiments`]: Monte-Carlo sweeps, aggregation and CSV output.

pub mod error;
pub mod experiments;
pub mod games;
pub mod oracle;
pub mod radio;
pub mod scenario;
pub mod units;

pub use error::{Error, Result};
pub use games::{run_game, GameConfig, GameKind, GameRun, Trajectory};

pub use radio::{GainMatrix, NetworkState, RadioModel, Strategy};
pub use scenario::{
    generate_scenario, load_scenario, save_scenario, Channel, DirectedLink, Flow, FlowId, LinkId,
    Node, NodeId, Scenario, ScenarioParams,
};
