//! Monte Carlo simulation of the adaptive betting game.
//!
//! A player repeatedly picks an unused coordinate `e_t` of `{0..m}` and a cost
//! `c_t`; a biased coin then gives `X_t = +1` with probability `epsilon` and
//! `-1` otherwise. The player may stop at any time and afterwards declares a
//! stake vector `w` from a finite family `W`. The event of interest is that
//! some `w` in `W` has nonnegative drift-corrected payoff
//! `sum X_t w(e_t) c_t + (1 - 2 eps)/2 * sum w(e_t) c_t >= 0` while its stake
//! mass `sum w(e_t) c_t` is at least `lambda`. Its probability is at most
//! `2 |W| exp(-(1 - 2 eps)^2 lambda / 5)`.
//!
//! Strategies are polled one move at a time and only see past outcomes; the
//! coin for step `t` is the `t`-th draw of the trial's own ChaCha stream.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, streams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameStep {
    pub coord: usize,
    pub cost: f64,
    /// `+1` (player wins) or `-1`.
    pub outcome: i8,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Move {
    Play { coord: usize, cost: f64 },
    Stop,
}

pub trait Strategy {
    /// Next move given everything revealed so far.
    fn next_move(&mut self, history: &[GameStep], m: usize) -> Move;

    /// Index into `stakes` of the declared vector. Defaults to the best payoff.
    fn declare(&self, history: &[GameStep], stakes: &[Vec<f64>]) -> usize {
        best_payoff_index(history, stakes)
    }
}

fn best_payoff_index(history: &[GameStep], stakes: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_payoff = f64::NEG_INFINITY;
    for (i, w) in stakes.iter().enumerate() {
        let (payoff, _) = accounting(history, w);
        if payoff > best_payoff {
            best_payoff = payoff;
            best = i;
        }
    }
    best
}

/// `(payoff, stake mass)` of a history under stake vector `w`.
pub fn accounting(history: &[GameStep], w: &[f64]) -> (f64, f64) {
    let mut payoff = 0.0;
    let mut mass = 0.0;
    for s in history {
        let stake = w[s.coord] * s.cost;
        payoff += f64::from(s.outcome) * stake;
        mass += stake;
    }
    (payoff, mass)
}

/// Plays coordinates `0, 1, ..., m-1` at unit cost and never stops early.
#[derive(Debug, Clone, Default)]
pub struct FixedOrder;

impl Strategy for FixedOrder {
    fn next_move(&mut self, history: &[GameStep], m: usize) -> Move {
        let t = history.len();
        if t < m {
            Move::Play { coord: t, cost: 1.0 }
        } else {
            Move::Stop
        }
    }
}

/// Plays in order at unit cost until the first loss.
#[derive(Debug, Clone, Default)]
pub struct StopAtFirstLoss;

impl Strategy for StopAtFirstLoss {
    fn next_move(&mut self, history: &[GameStep], m: usize) -> Move {
        match history.last() {
            Some(s) if s.outcome < 0 => Move::Stop,
            _ if history.len() >= m => Move::Stop,
            _ => Move::Play {
                coord: history.len(),
                cost: 1.0,
            },
        }
    }
}

/// Splits the coordinates into a low and a high half, keeps playing the half
/// that just won and switches after a loss, then declares whichever half's
/// indicator stake paid more. Meant for [`double_down_stakes`].
#[derive(Debug, Clone, Default)]
pub struct DoubleDown {
    next_low: usize,
    next_high: Option<usize>,
    in_high: bool,
}

impl Strategy for DoubleDown {
    fn next_move(&mut self, history: &[GameStep], m: usize) -> Move {
        let half = m / 2;
        if history.is_empty() {
            *self = DoubleDown {
                next_low: 0,
                next_high: Some(half),
                in_high: false,
            };
        }
        if let Some(s) = history.last() {
            if s.outcome < 0 {
                self.in_high = !self.in_high;
            }
        }
        let high = self.next_high.unwrap_or(half);
        let low_left = self.next_low < half;
        let high_left = high < m;
        let use_high = match (low_left, high_left) {
            (false, false) => return Move::Stop,
            (true, false) => false,
            (false, true) => true,
            (true, true) => self.in_high,
        };
        let coord = if use_high {
            self.next_high = Some(high + 1);
            high
        } else {
            self.next_low += 1;
            self.next_low - 1
        };
        Move::Play { coord, cost: 1.0 }
    }
}

pub fn all_ones_stakes(m: usize) -> Vec<Vec<f64>> {
    vec![vec![1.0; m]]
}

/// Indicators of the low half `[0, m/2)` and the high half `[m/2, m)`.
pub fn double_down_stakes(m: usize) -> Vec<Vec<f64>> {
    let half = m / 2;
    let low = (0..m).map(|i| if i < half { 1.0 } else { 0.0 }).collect();
    let high = (0..m).map(|i| if i < half { 0.0 } else { 1.0 }).collect();
    vec![low, high]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    FixedOrder,
    StopAtFirstLoss,
    DoubleDown,
}

impl StrategyKind {
    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::FixedOrder => "fixed-order",
            StrategyKind::StopAtFirstLoss => "stop-at-first-loss",
            StrategyKind::DoubleDown => "double-down",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        adversarial_strategy_library()
            .into_iter()
            .map(|(_, k, _)| k)
            .find(|k| k.name() == name)
    }

    /// The stake family the strategy is designed around.
    pub fn default_stakes(self, m: usize) -> Vec<Vec<f64>> {
        match self {
            StrategyKind::FixedOrder | StrategyKind::StopAtFirstLoss => all_ones_stakes(m),
            StrategyKind::DoubleDown => double_down_stakes(m),
        }
    }

    pub fn build(self) -> Box<dyn Strategy> {
        match self {
            StrategyKind::FixedOrder => Box::new(FixedOrder),
            StrategyKind::StopAtFirstLoss => Box::new(StopAtFirstLoss),
            StrategyKind::DoubleDown => Box::new(DoubleDown::default()),
        }
    }
}

/// Built-in strategies as `(name, kind, description)`.
pub fn adversarial_strategy_library() -> Vec<(&'static str, StrategyKind, &'static str)> {
    vec![
        (
            "fixed-order",
            StrategyKind::FixedOrder,
            "plays every coordinate in order at unit cost; non-adaptive baseline",
        ),
        (
            "stop-at-first-loss",
            StrategyKind::StopAtFirstLoss,
            "plays in order and stops right after the first loss",
        ),
        (
            "double-down",
            StrategyKind::DoubleDown,
            "stays on the half of the coordinates that last won, then declares the better half",
        ),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub m: usize,
    pub epsilon: f64,
    pub strategy: StrategyKind,
    /// Explicit stake family; each vector has length `m` with entries in `[0, 1]`.
    pub stakes: Vec<Vec<f64>>,
    pub trials: usize,
    pub lambda: f64,
}

impl GameConfig {
    pub fn new(m: usize, epsilon: f64, strategy: StrategyKind, trials: usize, lambda: f64) -> Self {
        GameConfig {
            m,
            epsilon,
            strategy,
            stakes: strategy.default_stakes(m),
            trials,
            lambda,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.epsilon) {
            return Err(Error::param(format!("epsilon {} not in [0, 1/2)", self.epsilon)));
        }
        if self.stakes.is_empty() {
            return Err(Error::param("stake family is empty"));
        }
        for w in &self.stakes {
            if w.len() != self.m {
                return Err(Error::param(format!("stake vector of length {} for m = {}", w.len(), self.m)));
            }
            if w.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(Error::param("stakes must lie in [0, 1]"));
            }
        }
        if self.trials == 0 {
            return Err(Error::param("trials must be positive"));
        }
        Ok(())
    }

    /// `2 |W| exp(-(1 - 2 eps)^2 lambda / 5)`.
    pub fn theoretical_bound(&self) -> f64 {
        let gap = 1.0 - 2.0 * self.epsilon;
        2.0 * self.stakes.len() as f64 * (-gap * gap * self.lambda / 5.0).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    /// Payoff under the declared stake vector.
    pub payoff: f64,
    pub stake_mass: f64,
    /// Twice the stake on winning steps; equals `payoff + stake_mass`.
    pub winning_stake: f64,
    pub steps: usize,
    pub declared: usize,
    pub event: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameOutcome {
    pub m: usize,
    pub epsilon: f64,
    pub lambda: f64,
    pub trials: usize,
    pub events: usize,
    pub empirical_prob: f64,
    pub theoretical_bound: f64,
    pub std_err: f64,
    pub mean_stake_mass: f64,
    #[serde(skip)]
    pub per_trial: Vec<TrialOutcome>,
}

fn play_trial(config: &GameConfig, strategy: &mut dyn Strategy, seed: u64, trial: usize) -> Result<TrialOutcome> {
    let mut coins = rng::stream(seed, streams::GAME_BASE + trial as u64);
    let mut used = vec![false; config.m];
    let mut history: Vec<GameStep> = Vec::new();
    loop {
        match strategy.next_move(&history, config.m) {
            Move::Stop => break,
            Move::Play { coord, cost } => {
                if coord >= config.m || used[coord] {
                    return Err(Error::Protocol(format!("coordinate {coord} is not available")));
                }
                if !(0.0..=1.0).contains(&cost) {
                    return Err(Error::Protocol(format!("cost {cost} outside [0, 1]")));
                }
                used[coord] = true;
                let outcome = if coins.random::<f64>() < config.epsilon { 1 } else { -1 };
                history.push(GameStep { coord, cost, outcome });
            }
        }
    }

    let drift = (1.0 - 2.0 * config.epsilon) / 2.0;
    // Boundary cases (payoff exactly -drift * mass) count as events; the
    // tolerance absorbs rounding in `drift`.
    let event = config.stakes.iter().any(|w| {
        let (payoff, mass) = accounting(&history, w);
        let tol = 1e-9 * mass.max(1.0);
        payoff + drift * mass >= -tol && mass >= config.lambda - tol
    });
    let declared = strategy.declare(&history, &config.stakes);
    if declared >= config.stakes.len() {
        return Err(Error::Protocol(format!("declared stake index {declared} out of range")));
    }
    let w = &config.stakes[declared];
    let (payoff, stake_mass) = accounting(&history, w);
    let winning_stake = 2.0
        * history
            .iter()
            .filter(|s| s.outcome > 0)
            .map(|s| w[s.coord] * s.cost)
            .sum::<f64>();
    Ok(TrialOutcome {
        payoff,
        stake_mass,
        winning_stake,
        steps: history.len(),
        declared,
        event,
    })
}

/// Runs `config.trials` independent games of a built-in strategy.
pub fn simulate_game(config: &GameConfig, seed: u64) -> Result<GameOutcome> {
    let kind = config.strategy;
    simulate_game_with(config, seed, || kind.build())
}

/// Runs independent games, building a fresh strategy per trial. Trials are
/// spread over the rayon pool; each uses its own coin stream so the result does
/// not depend on scheduling.
pub fn simulate_game_with<F>(config: &GameConfig, seed: u64, make: F) -> Result<GameOutcome>
where
    F: Fn() -> Box<dyn Strategy> + Sync,
{
    config.validate()?;
    let per_trial = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let mut strategy = make();
            play_trial(config, strategy.as_mut(), seed, t)
        })
        .collect::<Result<Vec<_>>>()?;
    let events = per_trial.iter().filter(|t| t.event).count();
    let trials = config.trials as f64;
    let p = events as f64 / trials;
    Ok(GameOutcome {
        m: config.m,
        epsilon: config.epsilon,
        lambda: config.lambda,
        trials: config.trials,
        events,
        empirical_prob: p,
        theoretical_bound: config.theoretical_bound(),
        std_err: (p * (1.0 - p) / trials).sqrt(),
        mean_stake_mass: per_trial.iter().map(|t| t.stake_mass).sum::<f64>() / trials,
        per_trial,
    })
}
