//! Solution type shared by every DRSSS method, plus per-run options.

use std::ops::Deref;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{self, MixedStrategy};
use crate::par::ExecMode;
use crate::solver::{Backend, BackendKind, DumpingBackend, SolveOptions};

/// Big-M constant and strict-inequality gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BigMConfig {
    #[serde(rename = "M")]
    pub big_m: f64,
    pub epsilon_strict: f64,
}

impl Default for BigMConfig {
    fn default() -> Self {
        Self {
            big_m: 2.0,
            epsilon_strict: 1e-6,
        }
    }
}

impl BigMConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.big_m >= 1.0) {
            return Err(Error::BigMTooSmall(format!(
                "M = {} cannot separate payoffs in [0, 1]",
                self.big_m
            )));
        }
        if !(self.epsilon_strict > 0.0) {
            return Err(Error::InvalidInput("epsilon_strict must be positive".into()));
        }
        Ok(())
    }
}

/// Execution settings that do not change the mathematical answer.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub backend: BackendKind,
    pub exec: ExecMode,
    pub time_limit: Option<Duration>,
    /// Write every program to this directory in LP format.
    pub dump_lp: Option<PathBuf>,
}

impl RunOptions {
    pub fn sequential() -> Self {
        Self {
            exec: ExecMode::Sequential,
            ..Self::default()
        }
    }

    pub fn backend(&self) -> Result<BackendHandle> {
        let inner = self.backend.backend();
        Ok(match &self.dump_lp {
            Some(dir) => BackendHandle::Dump(DumpingBackend::new(inner, dir)?),
            None => BackendHandle::Plain(inner),
        })
    }

    pub fn deadline(&self) -> Deadline {
        Deadline {
            end: self.time_limit.map(|l| Instant::now() + l),
        }
    }
}

pub enum BackendHandle {
    Plain(&'static dyn Backend),
    Dump(DumpingBackend<'static>),
}

impl Deref for BackendHandle {
    type Target = dyn Backend;

    fn deref(&self) -> &Self::Target {
        match self {
            BackendHandle::Plain(b) => *b,
            BackendHandle::Dump(d) => d,
        }
    }
}

/// Wall-clock budget shared by every solve of one run.
#[derive(Debug, Clone, Copy)]
pub struct Deadline {
    end: Option<Instant>,
}

impl Deadline {
    pub fn none() -> Self {
        Self { end: None }
    }

    pub fn check(&self) -> Result<()> {
        match self.end {
            Some(end) if Instant::now() >= end => Err(Error::TimeLimit),
            _ => Ok(()),
        }
    }

    /// Options for the next solve, limited to the remaining budget.
    pub fn solve_options(&self) -> Result<SolveOptions> {
        self.check()?;
        Ok(SolveOptions {
            time_limit: self.end.map(|e| e.saturating_duration_since(Instant::now())),
        })
    }
}

/// Convergence state of an iterative method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    /// Exact method, or Algorithm 1 with `Γ ≥ −tol`.
    #[default]
    Converged,
    /// Iteration budget exhausted; the solution is the last master solution.
    Unconverged,
    /// Violations remain but every violator duplicates a stored utility.
    Stalled,
}

/// One row of the Algorithm 1 iteration log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub tau: usize,
    pub master_objective: f64,
    pub lambda: f64,
    pub generated: usize,
    pub gamma: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub method: String,
    pub status: RunStatus,
    /// LP/MILP/QP solves performed.
    pub programs_solved: usize,
    /// Best-response mappings whose program was feasible (enumeration).
    pub feasible_mappings: usize,
    pub iterations: Vec<IterationRecord>,
    /// Utilities added by the separation step, in order.
    pub violators: Vec<GeneratedUtility>,
}

/// A utility the separation step added to the master.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedUtility {
    pub tau: usize,
    pub nominal: usize,
    /// Follower action the oracle certified as the strong response.
    pub action: usize,
    /// Leader strategy the certification refers to.
    pub x: Vec<f64>,
    pub utility: crate::Matrix,
}

/// A leader strategy with its worst-case value and certificate data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrsssSolution {
    pub x: MixedStrategy,
    pub value: f64,
    /// Follower action per support point (finite methods) or per nominal
    /// point (Algorithm 1).
    pub mapping: Vec<usize>,
    pub lambda: Option<f64>,
    pub w: Option<Vec<f64>>,
    pub solver_time_s: f64,
    #[serde(skip)]
    pub diagnostics: Diagnostics,
}

impl DrsssSolution {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn iterations(&self) -> usize {
        self.diagnostics.iterations.len()
    }
}

/// Re-checks that each mapped action is a best response at `x`.
///
/// A failure means the big-M constant let the MIP pick a non-response.
pub(crate) fn verify_mapping(
    utilities: &[game::FollowerUtility],
    x: &MixedStrategy,
    mapping: &[usize],
) -> Result<()> {
    for (j, (u, &a)) in utilities.iter().zip(mapping).enumerate() {
        let br = game::best_response_set(u, x.as_slice(), game::VERIFY_TOL * 10.0);
        if !br.contains(&a) {
            return Err(Error::BigMTooSmall(format!(
                "utility {j}: mapped action {a} is not a best response (best responses {br:?})"
            )));
        }
    }
    Ok(())
}
