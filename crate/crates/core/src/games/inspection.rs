use serde::{Deserialize, Serialize};

use super::rng::Stream;
use super::Instance;
use crate::ambiguity::Distribution;
use crate::error::{Error, Result};
use crate::game::{FollowerUniverse, GameInstance, InspectionFamily, InspectionPayoffs};
use crate::matrix::Matrix;

/// Simple Inspection Game: the leader inspects a subset of size at most `p`
/// of an `s`-element ground set, the follower cheats on a subset of size at
/// most `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InspectionParams {
    pub s: usize,
    pub p: usize,
    pub q: usize,
    pub k: usize,
    pub seed: u64,
}

impl InspectionParams {
    pub fn validate(&self) -> Result<()> {
        if self.s == 0 || self.s > 8 {
            return Err(Error::InvalidInput(format!("s = {} must satisfy 0 < s <= 8", self.s)));
        }
        if self.p == 0 || self.p > self.s || self.q == 0 || self.q > self.s {
            return Err(Error::InvalidInput("need 0 < p, q <= s".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidInput("k must be positive".into()));
        }
        Ok(())
    }
}

/// Non-empty subsets of `{0, …, s−1}` with at most `max` elements, as bit
/// masks, ordered by size and then lexicographically by element list.
pub fn subsets_up_to(s: usize, max: usize) -> Vec<u32> {
    let mut out = Vec::new();
    for size in 1..=max {
        let mut current: Vec<usize> = (0..size).collect();
        loop {
            out.push(current.iter().fold(0u32, |acc, &e| acc | (1 << e)));
            // Advance to the next combination in lexicographic order.
            let mut i = size;
            while i > 0 && current[i - 1] == s - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            current[i - 1] += 1;
            for t in i..size {
                current[t] = current[t - 1] + 1;
            }
        }
    }
    out
}

/// Draw order: for each nominal `j`, `α_j ~ U[0.3, 0.6)` then
/// `β_j ~ U[0.7, 1)`. `α` sits on intersecting cells (the inspectee is
/// caught), `β` elsewhere. The nominal distribution is uniform.
pub fn gen_inspection_instance(params: &InspectionParams) -> Result<Instance> {
    params.validate()?;
    let leader = subsets_up_to(params.s, params.p);
    let follower = subsets_up_to(params.s, params.q);
    let mask: Vec<Vec<bool>> = leader
        .iter()
        .map(|&l| follower.iter().map(|&f| l & f != 0).collect())
        .collect();
    let u_l = Matrix::from_fn(leader.len(), follower.len(), |i, a| if mask[i][a] { 0.5 } else { 0.0 });
    let mut rng = Stream::new(params.seed);
    let nominals: Vec<InspectionPayoffs> = (0..params.k)
        .map(|_| {
            let alpha = rng.uniform(0.3, 0.6);
            let beta = rng.uniform(0.7, 1.0);
            InspectionPayoffs { alpha, beta }
        })
        .collect();
    let family = InspectionFamily { mask, nominals };
    let support = family.nominal_matrices();
    let game = GameInstance::new(u_l, FollowerUniverse::Inspection(family))?;
    Ok(Instance {
        game,
        nominal: Distribution::uniform(support)?,
    })
}

pub fn gen_inspection(params: &InspectionParams) -> Result<GameInstance> {
    Ok(gen_inspection_instance(params)?.game)
}
