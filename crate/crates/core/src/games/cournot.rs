use serde::{Deserialize, Serialize};

use super::rng::Stream;
use super::{normalize, Instance};
use crate::ambiguity::Distribution;
use crate::error::{Error, Result};
use crate::game::GameInstance;
use crate::matrix::Matrix;

/// Cournot duopoly on the quantity grid `{1, …, n}` for both firms.
///
/// `u_i(y₁, y₂) = P(y₁ + y₂)·y_i − C_i(y_i)` with `P(x) = 75 − s·x`,
/// `C₁(y) = c₁ + d₁·y`, `C₂(y) = c₂ + d₂·y`; the coefficient ranges are
/// inclusive integer ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CournotParams {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    #[serde(default = "default_slope")]
    pub slope: (i64, i64),
    #[serde(default = "default_leader_fixed")]
    pub leader_fixed: (i64, i64),
    #[serde(default = "default_leader_marginal")]
    pub leader_marginal: (i64, i64),
    #[serde(default = "default_follower_fixed")]
    pub follower_fixed: (i64, i64),
    #[serde(default = "default_follower_marginal")]
    pub follower_marginal: (i64, i64),
}

fn default_slope() -> (i64, i64) {
    (1, 10)
}
fn default_leader_fixed() -> (i64, i64) {
    (10, 40)
}
fn default_leader_marginal() -> (i64, i64) {
    (10, 20)
}
fn default_follower_fixed() -> (i64, i64) {
    (2, 20)
}
fn default_follower_marginal() -> (i64, i64) {
    (1, 5)
}

impl CournotParams {
    pub fn new(n: usize, k: usize, seed: u64) -> Self {
        Self {
            n,
            k,
            seed,
            slope: default_slope(),
            leader_fixed: default_leader_fixed(),
            leader_marginal: default_leader_marginal(),
            follower_fixed: default_follower_fixed(),
            follower_marginal: default_follower_marginal(),
        }
    }
}

/// Raw (unnormalized) payoff of a firm producing `own` against `other`.
pub(crate) fn profit(slope: i64, fixed: i64, marginal: i64, own: usize, other: usize) -> f64 {
    let total = (own + other) as f64;
    let price = 75.0 - slope as f64 * total;
    price * own as f64 - (fixed as f64 + marginal as f64 * own as f64)
}

/// Draw order: leader slope, leader fixed cost, leader marginal cost; then
/// per follower type a slope, fixed cost and marginal cost; finally the
/// nominal weights as one probability vector of length `k`.
pub fn gen_cournot_instance(params: &CournotParams) -> Result<Instance> {
    if params.n < 2 {
        return Err(Error::InvalidInput("Cournot games need n >= 2".into()));
    }
    if params.k == 0 {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    let n = params.n;
    let mut rng = Stream::new(params.seed);
    let draw = |rng: &mut Stream, r: (i64, i64)| rng.randint(r.0, r.1);
    let s = draw(&mut rng, params.slope);
    let c1 = draw(&mut rng, params.leader_fixed);
    let d1 = draw(&mut rng, params.leader_marginal);
    let leader = Matrix::from_fn(n, n, |i, a| profit(s, c1, d1, i + 1, a + 1));
    let mut followers = Vec::with_capacity(params.k);
    for _ in 0..params.k {
        let s2 = draw(&mut rng, params.slope);
        let c2 = draw(&mut rng, params.follower_fixed);
        let d2 = draw(&mut rng, params.follower_marginal);
        followers.push(normalize(&Matrix::from_fn(n, n, |i, a| profit(s2, c2, d2, a + 1, i + 1))));
    }
    let weights = rng.probability_vector(params.k);
    let game = GameInstance::finite(normalize(&leader), followers.clone())?;
    Ok(Instance {
        game,
        nominal: Distribution::new(weights, followers)?,
    })
}

pub fn gen_cournot(params: &CournotParams) -> Result<GameInstance> {
    Ok(gen_cournot_instance(params)?.game)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_two_by_two() {
        let g = gen_cournot(&CournotParams::new(2, 1, 3)).unwrap();
        assert_eq!((g.n, g.m), (2, 2));
        assert_eq!(g.u_l.min(), 0.0);
        assert_eq!(g.u_l.max(), 1.0);
        let u = &g.follower.finite().unwrap()[0];
        assert_eq!((u.min(), u.max()), (0.0, 1.0));
    }

    #[test]
    fn unit_slope_without_costs() {
        // P(x) = 75 − x: at low totals, producing more pays more.
        assert!(profit(1, 0, 0, 2, 1) > profit(1, 0, 0, 1, 1));
        assert_eq!(profit(1, 0, 0, 1, 1), 73.0);
        assert_eq!(profit(1, 0, 0, 2, 1), 144.0);
    }

    #[test]
    fn independent_follower_types() {
        let inst = gen_cournot_instance(&CournotParams::new(4, 3, 11)).unwrap();
        let us = inst.game.follower.finite().unwrap();
        assert_eq!(us.len(), 3);
        assert!((inst.nominal.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
