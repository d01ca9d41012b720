//! Physical interference model: path gains, SINR, and a network state whose
//! per-receiver co-channel interference totals are maintained incrementally.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{Channel, LinkId, Scenario};

/// Gain between co-located transmitter and receiver.
pub const INFINITE_GAIN: f64 = f64::INFINITY;

/// Relative slack on the SINR threshold so that a link sitting exactly on
/// the boundary (e.g. full power at the nominal range) is not lost to rounding.
pub const THRESHOLD_REL_TOL: f64 = 1e-12;

/// A subtraction that shrinks a cached total below this fraction of its
/// previous value triggers an exact recomputation of that cache cell.
const CANCELLATION_GUARD: f64 = 1e-3;

pub fn path_gain(distance: f64, path_loss_exp: f64) -> f64 {
    if distance == 0.0 {
        INFINITE_GAIN
    } else {
        distance.powf(-path_loss_exp)
    }
}

/// `sinr ≥ α`, up to [`THRESHOLD_REL_TOL`].
pub fn meets_threshold(sinr: f64, alpha: f64) -> bool {
    sinr >= alpha * (1.0 - THRESHOLD_REL_TOL)
}

/// A link's action: a quantized power level and a channel. Level 0 is the
/// canonical OFF strategy and carries no channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Strategy {
    level: u8,
    channel: Option<Channel>,
}

impl Strategy {
    pub const OFF: Strategy = Strategy {
        level: 0,
        channel: None,
    };

    /// Transmitting strategy. Panics on level 0; use [`Strategy::OFF`].
    pub fn on(level: u8, channel: Channel) -> Strategy {
        assert!(level > 0, "level 0 is the OFF strategy");
        Strategy {
            level,
            channel: Some(channel),
        }
    }

    pub fn level(self) -> u8 {
        self.level
    }

    pub fn channel(self) -> Option<Channel> {
        self.channel
    }

    pub fn is_off(self) -> bool {
        self.level == 0
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.channel {
            None => f.write_str("OFF"),
            Some(c) => write!(f, "q{}@{}", self.level, c),
        }
    }
}

/// Cross gains between every ordered pair of links: entry `(m, l)` is the gain
/// from the transmitter of `m` to the receiver of `l`.
#[derive(Debug, Clone)]
pub struct GainMatrix {
    n: usize,
    gains: Vec<f64>,
}

impl GainMatrix {
    pub fn new(scenario: &Scenario) -> Self {
        let links = scenario.links();
        let n = links.len();
        let gamma = scenario.params().path_loss_exp;
        let mut gains = Vec::with_capacity(n * n);
        for from in links {
            let tx = scenario.node(from.tx);
            for to in links {
                gains.push(if from.id == to.id {
                    from.direct_gain
                } else {
                    path_gain(tx.distance_to(scenario.node(to.rx)), gamma)
                });
            }
        }
        GainMatrix { n, gains }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, from: LinkId, to: LinkId) -> f64 {
        self.gains[from.0 * self.n + to.0]
    }
}

/// Immutable physical context of a scenario, shared by every game run on it.
#[derive(Debug, Clone)]
pub struct RadioModel {
    gains: GainMatrix,
    noise: f64,
    alpha: f64,
    power_step: f64,
    q_levels: usize,
    n_channels: usize,
    link_channels: Vec<Vec<Channel>>,
}

impl RadioModel {
    pub fn new(scenario: &Scenario) -> Self {
        let p = scenario.params();
        RadioModel {
            gains: GainMatrix::new(scenario),
            noise: p.noise_power,
            alpha: p.sinr_threshold,
            power_step: p.p_max / (p.q_levels - 1) as f64,
            q_levels: p.q_levels,
            n_channels: p.n_channels,
            link_channels: scenario
                .links()
                .iter()
                .map(|l| l.channels.clone())
                .collect(),
        }
    }

    pub fn gains(&self) -> &GainMatrix {
        &self.gains
    }

    pub fn link_count(&self) -> usize {
        self.gains.len()
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn q_levels(&self) -> usize {
        self.q_levels
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn link_channels(&self, link: LinkId) -> &[Channel] {
        &self.link_channels[link.0]
    }

    pub fn power(&self, strategy: Strategy) -> f64 {
        strategy.level as f64 * self.power_step
    }

    pub fn is_admissible(&self, link: LinkId, strategy: Strategy) -> bool {
        match strategy.channel {
            None => true,
            Some(c) => {
                (strategy.level as usize) < self.q_levels
                    && self.link_channels[link.0].binary_search(&c).is_ok()
            }
        }
    }

    /// SINR of `link` in `state`; 0 for an OFF link or under infinite interference.
    pub fn sinr(&self, state: &NetworkState, link: LinkId) -> f64 {
        let s = state.strategy(link);
        let Some(c) = s.channel else { return 0.0 };
        let cell = state.cell(link, c);
        if state.infinite[cell] > 0 {
            return 0.0;
        }
        self.power(s) * self.gains.get(link, link) / (self.noise + state.interference[cell])
    }

    pub fn is_active(&self, state: &NetworkState, link: LinkId) -> bool {
        !state.strategy(link).is_off() && meets_threshold(self.sinr(state, link), self.alpha)
    }

    /// SINR `victim` would see if `mover` switched to `strategy`, everything
    /// else unchanged. `victim` may be the mover itself.
    pub fn sinr_if(
        &self,
        state: &NetworkState,
        victim: LinkId,
        mover: LinkId,
        strategy: Strategy,
    ) -> f64 {
        let own = if victim == mover {
            strategy
        } else {
            state.strategy(victim)
        };
        let Some(c) = own.channel else { return 0.0 };
        let cell = state.cell(victim, c);
        let mut finite = state.interference[cell];
        let mut infinite = state.infinite[cell] as i64;
        if victim != mover {
            let g = self.gains.get(mover, victim);
            let old = state.strategy(mover);
            if old.channel == Some(c) {
                if g.is_infinite() {
                    infinite -= 1;
                } else {
                    finite -= self.power(old) * g;
                }
            }
            if strategy.channel == Some(c) {
                if g.is_infinite() {
                    infinite += 1;
                } else {
                    finite += self.power(strategy) * g;
                }
            }
        }
        if infinite > 0 {
            return 0.0;
        }
        self.power(own) * self.gains.get(victim, victim) / (self.noise + finite.max(0.0))
    }

    pub fn is_active_if(
        &self,
        state: &NetworkState,
        victim: LinkId,
        mover: LinkId,
        strategy: Strategy,
    ) -> bool {
        let own = if victim == mover {
            strategy
        } else {
            state.strategy(victim)
        };
        !own.is_off() && meets_threshold(self.sinr_if(state, victim, mover, strategy), self.alpha)
    }

    /// Co-channel interference at the receiver of `link` on `channel`, summed
    /// directly over all transmitting links. Returns the finite part and the
    /// number of infinite-gain contributors.
    pub fn interference_from_scratch(
        &self,
        state: &NetworkState,
        link: LinkId,
        channel: Channel,
    ) -> (f64, u32) {
        let mut finite = 0.0;
        let mut infinite = 0;
        for (m, s) in state.strategies.iter().enumerate() {
            let m = LinkId(m);
            if m == link || s.channel != Some(channel) {
                continue;
            }
            let g = self.gains.get(m, link);
            if g.is_infinite() {
                infinite += 1;
            } else {
                finite += self.power(*s) * g;
            }
        }
        (finite, infinite)
    }
}

/// Strategy of every link plus cached interference totals per
/// (receiving link, channel). The cache always excludes the link's own signal.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    strategies: Vec<Strategy>,
    n_channels: usize,
    interference: Vec<f64>,
    infinite: Vec<u32>,
}

impl NetworkState {
    /// Every link OFF.
    pub fn new(model: &RadioModel) -> Self {
        let cells = model.link_count() * model.n_channels;
        NetworkState {
            strategies: vec![Strategy::OFF; model.link_count()],
            n_channels: model.n_channels,
            interference: vec![0.0; cells],
            infinite: vec![0; cells],
        }
    }

    #[inline]
    fn cell(&self, link: LinkId, channel: Channel) -> usize {
        link.0 * self.n_channels + channel.index()
    }

    pub fn strategy(&self, link: LinkId) -> Strategy {
        self.strategies[link.0]
    }

    pub fn strategies(&self) -> &[Strategy] {
        &self.strategies
    }

    /// Cached interference at the receiver of `link` on `channel`
    /// (infinite if a co-located transmitter uses it).
    pub fn interference(&self, link: LinkId, channel: Channel) -> f64 {
        let cell = self.cell(link, channel);
        if self.infinite[cell] > 0 {
            f64::INFINITY
        } else {
            self.interference[cell]
        }
    }

    /// Switches `link` to `strategy`, updating the cache at every receiver.
    pub fn apply(&mut self, model: &RadioModel, link: LinkId, strategy: Strategy) -> Result<()> {
        if !model.is_admissible(link, strategy) {
            return Err(Error::InvalidStrategy {
                link: link.0,
                strategy: strategy.to_string(),
            });
        }
        self.apply_unchecked(model, link, strategy);
        Ok(())
    }

    pub(crate) fn apply_unchecked(&mut self, model: &RadioModel, link: LinkId, strategy: Strategy) {
        let old = self.strategies[link.0];
        if old == strategy {
            return;
        }
        self.strategies[link.0] = Strategy::OFF;
        if let Some(c) = old.channel {
            self.withdraw(model, link, model.power(old), c);
        }
        self.strategies[link.0] = strategy;
        if let Some(c) = strategy.channel {
            self.contribute(model, link, model.power(strategy), c);
        }
    }

    /// Applies a whole profile, e.g. one produced by an oracle.
    pub fn set_profile(&mut self, model: &RadioModel, profile: &[Strategy]) -> Result<()> {
        for (l, &s) in profile.iter().enumerate() {
            self.apply(model, LinkId(l), s)?;
        }
        Ok(())
    }

    fn contribute(&mut self, model: &RadioModel, link: LinkId, power: f64, channel: Channel) {
        for r in 0..self.strategies.len() {
            if r == link.0 {
                continue;
            }
            let cell = self.cell(LinkId(r), channel);
            let g = model.gains.get(link, LinkId(r));
            if g.is_infinite() {
                self.infinite[cell] += 1;
            } else {
                self.interference[cell] += power * g;
            }
        }
    }

    fn withdraw(&mut self, model: &RadioModel, link: LinkId, power: f64, channel: Channel) {
        for r in 0..self.strategies.len() {
            if r == link.0 {
                continue;
            }
            let receiver = LinkId(r);
            let cell = self.cell(receiver, channel);
            let g = model.gains.get(link, receiver);
            if g.is_infinite() {
                self.infinite[cell] -= 1;
                continue;
            }
            let before = self.interference[cell];
            let after = before - power * g;
            self.interference[cell] = if after <= before * CANCELLATION_GUARD {
                model.interference_from_scratch(self, receiver, channel).0
            } else {
                after
            };
        }
    }
}
