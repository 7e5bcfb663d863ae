//! File formats read by the command-line tool.
//!
//! Every config is TOML, or JSON when the file name ends in `.json`. Relative
//! paths inside a config resolve against the config file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::ambiguity::{AmbiguitySpec, Distribution, DistributionDoc, GroundMetric, PolytopeSet, SupportDoc, WassersteinBall};
use crate::error::{Error, Result};
use crate::experiment::{build_instance, family_defaults};
use crate::game::GameInstance;
use crate::games::{Family, Instance};
use crate::solution::BigMConfig;
use crate::wasserstein::Algorithm1Config;

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        Ok(serde_json::from_str(&text)?)
    } else {
        toml::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Input of `drstack gen`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenConfig {
    pub family: Family,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
}

impl GenConfig {
    pub fn generate(&self) -> Result<Instance> {
        let names = family_defaults(self.family);
        let mut params: BTreeMap<String, f64> = names.iter().map(|&(n, v)| (n.to_string(), v)).collect();
        for (k, v) in &self.params {
            if !params.contains_key(k) {
                return Err(Error::InvalidInput(format!("unknown {} parameter `{k}`", self.family)));
            }
            params.insert(k.clone(), *v);
        }
        build_instance(self.family, &params, self.seed)
    }
}

/// A distribution given inline or as a path to a distribution JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistributionSource {
    Path(PathBuf),
    Inline(DistributionDoc),
}

impl DistributionSource {
    pub fn load(&self, base: &Path, g: &GameInstance) -> Result<Distribution> {
        let doc = match self {
            DistributionSource::Path(p) => {
                let text = std::fs::read_to_string(resolve(base, p))?;
                serde_json::from_str::<DistributionDoc>(&text)?
            }
            DistributionSource::Inline(doc) => doc.clone(),
        };
        doc.resolve(g.follower.finite())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum AmbiguityConfig {
    /// `{μ ∈ Δ^k : Aμ ≤ b}` over a finite support; without `A` the full
    /// simplex. The support defaults to the whole finite universe.
    Polytope {
        #[serde(default)]
        support: Option<SupportDoc>,
        #[serde(default, rename = "A")]
        a: Vec<Vec<f64>>,
        #[serde(default)]
        b: Vec<f64>,
    },
    Wasserstein {
        nominal: DistributionSource,
        theta: f64,
        #[serde(default = "two")]
        t: f64,
        #[serde(default)]
        metric: GroundMetric,
    },
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    /// One big-M MIP (the finite Wasserstein MIP for balls).
    #[default]
    Mip,
    /// One LP per best-response mapping.
    Enumeration,
    /// The fixed-mapping LP baseline for Wasserstein balls.
    EnumLp,
    /// Bayesian MIP under the ball's nominal distribution.
    Bayesian,
}

/// Input of `drstack solve` and `drstack wasserstein`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    /// Path to a game JSON file.
    pub game: PathBuf,
    pub ambiguity: AmbiguityConfig,
    #[serde(default)]
    pub method: SolveMethod,
    #[serde(default = "two", rename = "M")]
    pub big_m: f64,
    #[serde(default = "eps")]
    pub epsilon_strict: f64,
    /// Algorithm 1 only.
    #[serde(default = "tol")]
    pub tol_gamma: f64,
    /// Algorithm 1 only.
    #[serde(default = "iters")]
    pub max_iter: usize,
    /// Algorithm 1 only: `auto`, `box`, `inspection`, `box-inspection` or
    /// `finite`.
    #[serde(default = "auto")]
    pub oracle: String,
}

fn eps() -> f64 {
    1e-6
}
fn tol() -> f64 {
    1e-6
}
fn iters() -> usize {
    200
}
fn auto() -> String {
    "auto".into()
}

/// A solve config with its game and ambiguity set loaded.
pub struct LoadedProblem {
    pub game: GameInstance,
    pub ambiguity: AmbiguitySpec,
    pub config: SolveConfig,
}

impl SolveConfig {
    pub fn big_m_config(&self) -> BigMConfig {
        BigMConfig {
            big_m: self.big_m,
            epsilon_strict: self.epsilon_strict,
        }
    }

    pub fn algorithm1_config(&self) -> Algorithm1Config {
        Algorithm1Config {
            big_m: self.big_m,
            epsilon_strict: self.epsilon_strict,
            tol_gamma: self.tol_gamma,
            max_iter: self.max_iter,
            ..Algorithm1Config::default()
        }
    }

    /// Loads the config at `path` and everything it refers to.
    pub fn load_problem(path: &Path) -> Result<LoadedProblem> {
        let config: SolveConfig = load(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let game = GameInstance::from_json(&std::fs::read_to_string(resolve(base, &config.game))?)?;
        let ambiguity = match &config.ambiguity {
            AmbiguityConfig::Polytope { support, a, b } => {
                let support = match support {
                    Some(doc) => doc.clone().resolve(game.follower.finite())?,
                    None => game
                        .follower
                        .finite()
                        .ok_or_else(|| {
                            Error::InvalidInput("a polytope without an explicit support needs a finite universe".into())
                        })?
                        .to_vec(),
                };
                AmbiguitySpec::Polytope(PolytopeSet::new(support, a.clone(), b.clone())?)
            }
            AmbiguityConfig::Wasserstein {
                nominal,
                theta,
                t,
                metric,
            } => {
                let nominal = nominal.load(base, &game)?;
                AmbiguitySpec::Wasserstein(WassersteinBall::new(nominal, *theta, *t, *metric)?)
            }
        };
        Ok(LoadedProblem {
            game,
            ambiguity,
            config,
        })
    }
}
