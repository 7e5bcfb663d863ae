// `!(x >= 0.0)` rejects NaN along with negatives; index loops mirror the
// subscripted formulations.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod ambiguity;
pub mod error;
pub mod game;
pub mod matrix;
pub mod par;
pub mod solver;

pub use ambiguity::{AmbiguitySpec, Distribution, GroundMetric, PolytopeSet, WassersteinBall};
pub use error::{Error, Result};
pub use game::{FollowerUniverse, FollowerUtility, GameInstance, MixedStrategy};
pub use matrix::Matrix;
pub use par::ExecMode;
pub mod finite;
mod model;
pub mod solution;

pub use solution::{BigMConfig, DrsssSolution, RunOptions, RunStatus};
pub mod baselines;
pub mod games;
pub mod wasserstein;
pub mod experiment;
pub mod config;
