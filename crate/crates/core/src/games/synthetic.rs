use serde::{Deserialize, Serialize};

use super::rng::Stream;
use super::Instance;
use crate::ambiguity::Distribution;
use crate::error::{Error, Result};
use crate::game::GameInstance;
use crate::matrix::Matrix;

/// Leader and follower matrices with i.i.d. `U[0, 1)` entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticParams {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub seed: u64,
}

/// Draw order: leader matrix row-major, then each follower matrix row-major,
/// then the nominal weights as one probability vector of length `k`.
pub fn gen_synthetic_instance(params: &SyntheticParams) -> Result<Instance> {
    if params.n == 0 || params.m == 0 || params.k == 0 {
        return Err(Error::InvalidInput("n, m and k must be positive".into()));
    }
    let mut rng = Stream::new(params.seed);
    let u_l = Matrix::from_fn(params.n, params.m, |_, _| rng.unit());
    let followers: Vec<Matrix> = (0..params.k)
        .map(|_| Matrix::from_fn(params.n, params.m, |_, _| rng.unit()))
        .collect();
    let weights = rng.probability_vector(params.k);
    let game = GameInstance::finite(u_l, followers.clone())?;
    Ok(Instance {
        game,
        nominal: Distribution::new(weights, followers)?,
    })
}

pub fn gen_synthetic(params: &SyntheticParams) -> Result<GameInstance> {
    Ok(gen_synthetic_instance(params)?.game)
}
