use cclab::game::{simulate_game, simulate_game_with, GameConfig, GameStep, Move, Strategy, StrategyKind};
use proptest::prelude::*;
use proptest::sample::Index;
use statrs::distribution::{Binomial, DiscreteCDF};

/// Event probability of the non-adaptive all-ones strategy: with `w` wins out
/// of `m` unit plays, payoff is `2w - m`, so the event is
/// `2w - m + (1 - 2 eps) m / 2 >= 0` (when `m >= lambda`).
fn exact_fixed_order(m: u64, eps: f64, lambda: f64) -> f64 {
    if (m as f64) < lambda {
        return 0.0;
    }
    let need = ((m as f64 - (1.0 - 2.0 * eps) * m as f64 / 2.0) / 2.0).ceil() as u64;
    if need == 0 {
        return 1.0;
    }
    let dist = Binomial::new(eps, m).unwrap();
    1.0 - dist.cdf(need - 1)
}

#[test]
fn fixed_order_matches_binomial_tail() {
    for (m, eps, lambda) in [(100u64, 0.4, 50.0), (60, 0.3, 10.0), (400, 0.45, 100.0)] {
        let cfg = GameConfig::new(m as usize, eps, StrategyKind::FixedOrder, 40_000, lambda);
        let out = simulate_game(&cfg, 17).unwrap();
        let exact = exact_fixed_order(m, eps, lambda);
        let se = (exact * (1.0 - exact) / 40_000.0).sqrt();
        assert!(
            (out.empirical_prob - exact).abs() <= 4.0 * se + 1e-12,
            "m={m}: empirical {} exact {exact}",
            out.empirical_prob
        );
    }
}

#[test]
fn threshold_case_is_far_below_bound() {
    let cfg = GameConfig::new(2000, 0.4, StrategyKind::FixedOrder, 20_000, 400.0);
    let out = simulate_game(&cfg, 1).unwrap();
    let exact = exact_fixed_order(2000, 0.4, 400.0);
    assert!(exact < 1e-4);
    assert!((out.theoretical_bound - 2.0 * (-3.2f64).exp()).abs() < 1e-12);
    assert!(out.empirical_prob <= out.theoretical_bound);
}

/// Plays random unused coordinates at random costs for a random length.
struct Wanderer {
    order: Vec<usize>,
    costs: Vec<f64>,
    stop_at: usize,
}

impl Strategy for Wanderer {
    fn next_move(&mut self, history: &[GameStep], _m: usize) -> Move {
        let t = history.len();
        if t >= self.stop_at {
            return Move::Stop;
        }
        Move::Play { coord: self.order[t], cost: self.costs[t] }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn built_in_strategies_stay_under_bound(kind_ix in 0usize..3, eps in 0.05f64..0.45, m in 20usize..200, seed in 0u64..1000) {
        let kind = [StrategyKind::FixedOrder, StrategyKind::StopAtFirstLoss, StrategyKind::DoubleDown][kind_ix];
        let gap = 1.0 - 2.0 * eps;
        let lambda = 3.0 / (gap * gap);
        let cfg = GameConfig::new(m, eps, kind, 2000, lambda);
        let out = simulate_game(&cfg, seed).unwrap();
        prop_assert!(out.empirical_prob <= out.theoretical_bound + 3.0 * out.std_err);
        for t in &out.per_trial {
            prop_assert!((t.payoff + t.stake_mass - t.winning_stake).abs() < 1e-9);
            prop_assert!(t.steps <= m);
        }
    }

    #[test]
    fn scripted_strategies_respect_protocol(picks in prop::collection::vec(any::<Index>(), 30), costs in prop::collection::vec(0.0f64..1.0, 30), stop in 0usize..31) {
        // Random permutation of the coordinates.
        let mut pool: Vec<usize> = (0..30).collect();
        let perm: Vec<usize> = picks.iter().map(|ix| pool.remove(ix.index(pool.len()))).collect();
        let cfg = GameConfig::new(30, 0.3, StrategyKind::FixedOrder, 50, 1.0);
        let out = simulate_game_with(&cfg, 4, || Box::new(Wanderer { order: perm.clone(), costs: costs.clone(), stop_at: stop })).unwrap();
        for t in &out.per_trial {
            prop_assert_eq!(t.steps, stop);
            let mass: f64 = costs[..stop].iter().sum();
            prop_assert!((t.stake_mass - mass).abs() < 1e-9);
        }
    }
}
