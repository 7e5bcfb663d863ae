//! Instance generators for the three experiment families.
//!
//! Each generator draws everything from one [`rng::Stream`] seeded by the
//! parameters' seed, in the order documented on the generator.

mod cournot;
mod inspection;
pub mod rng;
mod synthetic;

use serde::{Deserialize, Serialize};

use crate::ambiguity::Distribution;
use crate::game::GameInstance;

pub use cournot::{gen_cournot, gen_cournot_instance, CournotParams};
pub use inspection::{gen_inspection, gen_inspection_instance, subsets_up_to, InspectionParams};
pub use synthetic::{gen_synthetic, gen_synthetic_instance, SyntheticParams};

/// A generated game with the nominal distribution its experiment uses.
#[derive(Debug, Clone)]
pub struct Instance {
    pub game: GameInstance,
    pub nominal: Distribution,
}

/// Game family selector used by configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Inspection,
    Cournot,
    Synthetic,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Inspection => "inspection",
            Family::Cournot => "cournot",
            Family::Synthetic => "synthetic",
        })
    }
}

/// Min-max normalization into `[0, 1]`; a constant matrix maps to zeros.
pub(crate) fn normalize(m: &crate::Matrix) -> crate::Matrix {
    let (lo, hi) = (m.min(), m.max());
    if hi - lo <= 0.0 {
        return crate::Matrix::zeros(m.rows(), m.cols());
    }
    m.map(|v| ((v - lo) / (hi - lo)).clamp(0.0, 1.0))
}
