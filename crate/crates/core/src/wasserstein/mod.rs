//! Algorithm 1: incremental MIP generation for Wasserstein balls around a
//! finitely supported nominal over an arbitrary universe of follower
//! utilities.
//!
//! Each round solves a master MIP over the utilities generated so far,
//! then asks a separation oracle, per nominal point `j`, for the utility that
//! most violates `w_j ≤ λ d^t(u, û_j) + h(x, u)`. Violators are added to
//! their nominal's list until no violation beyond `tol_gamma` remains.

pub mod oracle;

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::ambiguity::WassersteinBall;
use crate::error::{Error, Result};
use crate::finite::{selector_block, value_row};
use crate::game::{self, GameInstance, MixedStrategy};
use crate::matrix::Matrix;
use crate::model::{self, leader_simplex};
use crate::par::map_range;
use crate::solution::{
    Diagnostics, DrsssSolution, GeneratedUtility, IterationRecord, RunOptions, RunStatus,
};
use crate::solver::{Backend, MixedIntegerProgram, Sense, SolveOptions, SolveStatus, Var};

pub use oracle::{
    default_oracle, BoxFrobeniusOracle, FiniteOracle, InnerSolution, InspectionOracle, SeparationOracle,
    SeparationQuery,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Algorithm1Config {
    #[serde(rename = "M")]
    pub big_m: f64,
    pub epsilon_strict: f64,
    pub tol_gamma: f64,
    pub max_iter: usize,
    /// Violators this close (Frobenius) to a stored utility are not added.
    pub dedup_tol: f64,
}

impl Default for Algorithm1Config {
    fn default() -> Self {
        Self {
            big_m: 2.0,
            epsilon_strict: 1e-6,
            tol_gamma: 1e-6,
            max_iter: 200,
            dedup_tol: 1e-8,
        }
    }
}

/// Generated utilities and the latest master solution.
#[derive(Debug, Clone)]
pub struct MasterState {
    pub tau: usize,
    /// `E_{τ,j}`: utilities generated for nominal point `j`, nominal first.
    pub generated: Vec<Vec<Matrix>>,
    pub x: Vec<f64>,
    pub lambda: f64,
    pub w: Vec<f64>,
    /// Selected follower action per generated utility, same layout as `generated`.
    pub delta: Vec<Vec<usize>>,
    pub gamma_history: Vec<f64>,
}

impl MasterState {
    pub fn new(ball: &WassersteinBall) -> Self {
        Self {
            tau: 1,
            generated: ball.nominal.support.iter().map(|u| vec![u.clone()]).collect(),
            x: Vec::new(),
            lambda: 0.0,
            w: Vec::new(),
            delta: Vec::new(),
            gamma_history: Vec::new(),
        }
    }

    /// `|E_τ|`.
    pub fn size(&self) -> usize {
        self.generated.iter().map(Vec::len).sum()
    }

    /// Adds `u` to `E_{τ,j}` unless a stored utility lies within `tol`.
    pub fn add(&mut self, j: usize, u: Matrix, tol: f64) -> bool {
        if self.generated[j].iter().any(|v| v.frobenius_sq(&u) <= tol * tol) {
            return false;
        }
        self.generated[j].push(u);
        true
    }
}

/// The master program with handles to its variables.
pub struct MasterMip {
    pub program: MixedIntegerProgram,
    pub x: Vec<Var>,
    pub lambda: Var,
    pub w: Vec<Var>,
    /// Selector blocks, grouped per nominal point like `MasterState::generated`.
    pub delta: Vec<Vec<Vec<Var>>>,
}

/// `min λθ^t − Σ_j ν_j w_j` over `x ∈ Δ^n`, `λ ≥ 0`, `w`, and one selector
/// block per generated utility; value rows link each utility only to the
/// nominal point it was generated for.
///
/// Row counts: `m²·|E_τ|` best-response rows, `m·Σ_j |E_{τ,j}|` value rows,
/// `|E_τ|` one-hot rows and one simplex row.
pub fn build_master_mip(state: &MasterState, g: &GameInstance, ball: &WassersteinBall, cfg: &Algorithm1Config) -> MasterMip {
    let k = ball.k();
    let budget = ball.budget();
    let mut p = MixedIntegerProgram::new(Sense::Minimize);
    let x = leader_simplex(&mut p, g.n);
    let lambda_max = if budget > 0.0 { 1.0 / budget } else { f64::INFINITY };
    let lambda = p.add_var("lambda", 0.0, lambda_max, budget);
    let w: Vec<Var> = (0..k)
        .map(|j| p.add_var(format!("w{j}"), f64::NEG_INFINITY, f64::INFINITY, -ball.nominal.weights[j]))
        .collect();
    let mut delta = Vec::with_capacity(k);
    for (j, list) in state.generated.iter().enumerate() {
        let blocks = selector_block(&mut p, &x, list, g.m, cfg.big_m, &format!("n{j}_"));
        for (e, u) in list.iter().enumerate() {
            let cost = ball.metric.cost(u, &ball.nominal.support[j], ball.exponent);
            for a in 0..g.m {
                let terms = vec![(w[j], 1.0), (lambda, -cost)];
                value_row(&mut p, format!("val{j}_{e}_{a}"), &x, &g.u_l, a, terms, blocks[e][a], cfg.big_m);
            }
        }
        delta.push(blocks);
    }
    let size = state.size();
    assert_eq!(p.num_binaries(), g.m * size);
    assert_eq!(p.lp.num_constraints(), g.m * g.m * size + g.m * size + size + 1);
    MasterMip {
        program: p,
        x,
        lambda,
        w,
        delta,
    }
}

/// Result of separating one nominal point.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// `Γ(τ, j) = min_a [inner_a + u_l(x, a)]`.
    pub gamma: f64,
    pub violator: Matrix,
    pub action: usize,
}

/// `Γ(τ, j)` and its minimizer for the current master solution.
///
/// With `θ = 0` the ball is the nominal alone and the only candidate is
/// `û_j`, giving `Γ = h(x, û_j)`.
#[allow(clippy::too_many_arguments)]
pub fn separate(
    oracle: &dyn SeparationOracle,
    state: &MasterState,
    g: &GameInstance,
    ball: &WassersteinBall,
    j: usize,
    cfg: &Algorithm1Config,
    backend: &dyn Backend,
    options: &SolveOptions,
) -> Result<OracleResult> {
    let nominal = &ball.nominal.support[j];
    if ball.radius == 0.0 {
        let (h, a) = game::strong_response(&g.u_l, nominal, &state.x, game::BR_TOL);
        return Ok(OracleResult {
            gamma: h,
            violator: nominal.clone(),
            action: a,
        });
    }
    let q = SeparationQuery {
        game: g,
        x: &state.x,
        lambda: state.lambda,
        nominal,
        metric: ball.metric,
        exponent: ball.exponent,
        epsilon_strict: cfg.epsilon_strict,
        backend,
        options: options.clone(),
    };
    let leader = g.leader_payoffs(&state.x);
    let mut best: Option<OracleResult> = None;
    for a in 0..g.m {
        let Some(inner) = oracle.inner(&q, a)? else { continue };
        let gamma = inner.cost + leader[a];
        if best.as_ref().is_none_or(|b| gamma < b.gamma - 1e-12) {
            best = Some(OracleResult {
                gamma,
                violator: inner.utility,
                action: a,
            });
        }
    }
    best.ok_or_else(|| {
        Error::OracleFailure(format!(
            "{}: every response region was empty for nominal {j}",
            oracle.name()
        ))
    })
}

/// Runs Algorithm 1 to convergence, the iteration budget, or a stall.
pub fn run_algorithm1(
    g: &GameInstance,
    ball: &WassersteinBall,
    oracle: &dyn SeparationOracle,
    cfg: &Algorithm1Config,
    opts: &RunOptions,
) -> Result<DrsssSolution> {
    if !oracle.supports(&g.follower, ball.metric, ball.exponent) {
        return Err(Error::UnsupportedUniverse(format!(
            "oracle {} does not handle a {} universe with this metric and exponent",
            oracle.name(),
            g.follower.kind()
        )));
    }
    if cfg.big_m < 1.0 {
        return Err(Error::BigMTooSmall(format!("M = {}", cfg.big_m)));
    }
    for u in &ball.nominal.support {
        g.check_utility(u)?;
        if !g.follower.contains(u, 1e-9) {
            return Err(Error::InvalidInput("nominal point outside the follower universe".into()));
        }
    }
    let start = Instant::now();
    let backend = opts.backend()?;
    let deadline = opts.deadline();
    let mut state = MasterState::new(ball);
    let mut diag = Diagnostics {
        method: "algorithm1".into(),
        ..Diagnostics::default()
    };
    let k = ball.k();
    let mut objective;
    loop {
        let mip = build_master_mip(&state, g, ball, cfg);
        let out = backend.solve_milp(&mip.program, &deadline.solve_options()?)?;
        diag.programs_solved += 1;
        match out.status {
            SolveStatus::Optimal => {}
            SolveStatus::LimitHit => return Err(Error::TimeLimit),
            other => {
                return Err(Error::Solver(crate::solver::SolverError::NumericalFailure(format!(
                    "master MIP ended with {other:?}"
                ))))
            }
        }
        let values = out.point().expect("optimal");
        objective = out.objective.expect("optimal");
        state.x = MixedStrategy::from_solver(&mip.x.iter().map(|&v| values[v.0]).collect::<Vec<_>>())
            .as_slice()
            .to_vec();
        state.lambda = values[mip.lambda.0];
        state.w = mip.w.iter().map(|&v| values[v.0]).collect();
        state.delta = mip
            .delta
            .iter()
            .map(|blocks| blocks.iter().map(|b| model::selected(values, b)).collect())
            .collect();

        let options = deadline.solve_options()?;
        let results = map_range(opts.exec, k, |j| {
            separate(oracle, &state, g, ball, j, cfg, &*backend, &options)
        });
        let results: Vec<OracleResult> = results.into_iter().collect::<Result<_>>()?;
        diag.programs_solved += k * g.m;
        let gamma = results
            .iter()
            .zip(&state.w)
            .map(|(r, w)| r.gamma - w)
            .fold(f64::INFINITY, f64::min);
        state.gamma_history.push(gamma);
        diag.iterations.push(IterationRecord {
            tau: state.tau,
            master_objective: objective,
            lambda: state.lambda,
            generated: state.size(),
            gamma,
            wall_time_s: start.elapsed().as_secs_f64(),
        });
        if gamma >= -cfg.tol_gamma {
            diag.status = RunStatus::Converged;
            break;
        }
        if state.tau >= cfg.max_iter {
            diag.status = RunStatus::Unconverged;
            break;
        }
        let mut added = 0;
        for (j, r) in results.into_iter().enumerate() {
            if r.gamma - state.w[j] < -cfg.tol_gamma && state.add(j, r.violator.clone(), cfg.dedup_tol) {
                diag.violators.push(GeneratedUtility {
                    tau: state.tau,
                    nominal: j,
                    action: r.action,
                    x: state.x.clone(),
                    utility: r.violator,
                });
                added += 1;
            }
        }
        if added == 0 {
            diag.status = RunStatus::Stalled;
            break;
        }
        deadline.check()?;
        state.tau += 1;
    }
    let mapping = state.delta.iter().map(|d| d[0]).collect();
    Ok(DrsssSolution {
        x: MixedStrategy::from_solver(&state.x),
        value: -objective,
        mapping,
        lambda: Some(state.lambda),
        w: Some(state.w.clone()),
        solver_time_s: start.elapsed().as_secs_f64(),
        diagnostics: diag,
    })
}

#[derive(Serialize)]
struct IterationRow {
    tau: usize,
    master_objective: f64,
    lambda: f64,
    #[serde(rename = "E_size")]
    generated: usize,
    #[serde(rename = "Gamma")]
    gamma: f64,
    wall_time_s: f64,
}

/// Writes the iteration log as CSV:
/// `tau,master_objective,lambda,E_size,Gamma,wall_time_s`.
pub fn write_iteration_csv<W: Write>(records: &[IterationRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(IterationRow {
            tau: r.tau,
            master_objective: r.master_objective,
            lambda: r.lambda,
            generated: r.generated,
            gamma: r.gamma,
            wall_time_s: r.wall_time_s,
        })
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}
