//! Separation oracles: for a fixed follower action `a`, the cheapest move of
//! the adversary from a nominal utility `û` into the region where `a` is the
//! strong response to the leader strategy `x`.
//!
//! The region is `{u ∈ E^f : u(x, a) − u(x, a') ≥ ε for a' ∈ B_x(a),
//! u(x, a) − u(x, a') ≥ 0 otherwise}`, where `B_x(a)` are the actions the
//! leader strictly prefers to `a`.

use crate::ambiguity::GroundMetric;
use crate::error::{Error, Result};
use crate::game::{self, FollowerUniverse, GameInstance, InspectionFamily};
use crate::matrix::Matrix;
use crate::solver::{Backend, QuadraticProgram, Relation, SolveOptions, SolveStatus, Var};

/// Everything an oracle needs for one separation call.
pub struct SeparationQuery<'a> {
    pub game: &'a GameInstance,
    pub x: &'a [f64],
    pub lambda: f64,
    pub nominal: &'a Matrix,
    pub metric: GroundMetric,
    pub exponent: f64,
    pub epsilon_strict: f64,
    pub backend: &'a dyn Backend,
    pub options: SolveOptions,
}

impl SeparationQuery<'_> {
    /// `B_x(a)` as a mask over follower actions.
    pub fn better_than(&self, a: usize) -> Vec<bool> {
        let lp = self.game.leader_payoffs(self.x);
        lp.iter().map(|&v| v > lp[a] + 1e-12).collect()
    }
}

/// Minimizer of `λ d^t(u, û)` over the response region of one action.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution {
    /// `λ d^t(u*, û)`.
    pub cost: f64,
    pub utility: Matrix,
}

pub trait SeparationOracle: Send + Sync {
    fn name(&self) -> &'static str;

    /// Whether the oracle handles this universe, metric and exponent.
    fn supports(&self, universe: &FollowerUniverse, metric: GroundMetric, exponent: f64) -> bool;

    /// `inf λ d^t(u, û)` over the response region of `action`; `None` when
    /// the region is empty.
    fn inner(&self, q: &SeparationQuery<'_>, action: usize) -> Result<Option<InnerSolution>>;
}

fn qp_failure(oracle: &str, status: SolveStatus) -> Error {
    Error::OracleFailure(format!("{oracle}: QP ended with {status:?}"))
}

/// Convex QP over the box `[0,1]^{n×m}` for the Frobenius metric with `t = 2`.
///
/// With `family` set the cells are tied into the two classes of an
/// inspection mask, which restricts the search to that family.
#[derive(Debug, Clone, Default)]
pub struct BoxFrobeniusOracle {
    pub family: Option<Vec<Vec<bool>>>,
}

impl BoxFrobeniusOracle {
    pub fn restricted_to(family: &InspectionFamily) -> Self {
        Self {
            family: Some(family.mask.clone()),
        }
    }
}

impl SeparationOracle for BoxFrobeniusOracle {
    fn name(&self) -> &'static str {
        "box-frobenius"
    }

    fn supports(&self, universe: &FollowerUniverse, metric: GroundMetric, exponent: f64) -> bool {
        let universe_ok = match (universe, &self.family) {
            (FollowerUniverse::Box, None) => true,
            (FollowerUniverse::Inspection(f), Some(mask)) => &f.mask == mask,
            _ => false,
        };
        universe_ok && metric == GroundMetric::Frobenius && exponent == 2.0
    }

    fn inner(&self, q: &SeparationQuery<'_>, action: usize) -> Result<Option<InnerSolution>> {
        let (n, m) = (q.game.n, q.game.m);
        let better = q.better_than(action);
        let mut p = QuadraticProgram::new();
        // λ Σ (u − û)² = ½ uᵀ(2λI)u − 2λ û·u + λ‖û‖².
        let cells: Vec<Var> = (0..n * m)
            .map(|c| {
                let target = q.nominal.as_slice()[c];
                p.add_var(format!("u{}_{}", c / m, c % m), 0.0, 1.0, -2.0 * q.lambda * target)
            })
            .collect();
        for &v in &cells {
            p.add_quadratic(v, v, 2.0 * q.lambda);
        }
        p.lp.objective_offset = q.lambda * q.nominal.as_slice().iter().map(|v| v * v).sum::<f64>();
        for b in (0..m).filter(|&b| b != action) {
            let mut terms = Vec::with_capacity(2 * n);
            for i in 0..n {
                if q.x[i] != 0.0 {
                    terms.push((cells[i * m + action], q.x[i]));
                    terms.push((cells[i * m + b], -q.x[i]));
                }
            }
            let rhs = if better[b] { q.epsilon_strict } else { 0.0 };
            p.add_constraint(format!("resp{b}"), terms, Relation::Ge, rhs);
        }
        if let Some(mask) = &self.family {
            let mut anchors: [Option<Var>; 2] = [None, None];
            for i in 0..n {
                for a in 0..m {
                    let class = usize::from(mask[i][a]);
                    let v = cells[i * m + a];
                    match anchors[class] {
                        None => anchors[class] = Some(v),
                        Some(anchor) => {
                            p.add_constraint(format!("tie{i}_{a}"), vec![(v, 1.0), (anchor, -1.0)], Relation::Eq, 0.0)
                        }
                    }
                }
            }
        }
        let out = q.backend.solve_qp(&p, &q.options)?;
        match out.status {
            SolveStatus::Optimal => {
                let u = Matrix::from_vec(n, m, out.values.expect("optimal"))?;
                let cost = q.lambda * u.frobenius_sq(q.nominal);
                Ok(Some(InnerSolution { cost, utility: u }))
            }
            SolveStatus::Infeasible => Ok(None),
            other => Err(qp_failure(self.name(), other)),
        }
    }
}

/// Two-variable QP over `(α, β)` for the inspection family.
///
/// A family member has `α` on the `c` intersecting cells and `β` on the
/// remaining `nm − c`, so `d_F²(u, û) = c(α − α̂)² + (nm − c)(β − β̂)²` and
/// `u(x, a) − u(x, a') = (α − β)(c_a − c_a')` with `c_a = Σ_i x_i mask(i, a)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct InspectionOracle;

impl InspectionOracle {
    fn family<'a>(&self, g: &'a GameInstance) -> Result<&'a InspectionFamily> {
        match &g.follower {
            FollowerUniverse::Inspection(f) => Ok(f),
            other => Err(Error::UnsupportedUniverse(format!(
                "inspection oracle needs an inspection universe, got {}",
                other.kind()
            ))),
        }
    }
}

/// `(α̂, β̂)` read off a family member.
pub fn family_coordinates(family: &InspectionFamily, u: &Matrix) -> (f64, f64) {
    let mut alpha = None;
    let mut beta = None;
    for (i, row) in family.mask.iter().enumerate() {
        for (a, &hit) in row.iter().enumerate() {
            if hit && alpha.is_none() {
                alpha = Some(u[(i, a)]);
            }
            if !hit && beta.is_none() {
                beta = Some(u[(i, a)]);
            }
        }
    }
    (alpha.unwrap_or(0.0), beta.unwrap_or(0.0))
}

impl SeparationOracle for InspectionOracle {
    fn name(&self) -> &'static str {
        "inspection"
    }

    fn supports(&self, universe: &FollowerUniverse, metric: GroundMetric, exponent: f64) -> bool {
        matches!(universe, FollowerUniverse::Inspection(_)) && metric == GroundMetric::Frobenius && exponent == 2.0
    }

    fn inner(&self, q: &SeparationQuery<'_>, action: usize) -> Result<Option<InnerSolution>> {
        let family = self.family(q.game)?;
        let c = family.intersect_count() as f64;
        let rest = family.cells() as f64 - c;
        let (a_hat, b_hat) = family_coordinates(family, q.nominal);
        let weights = family.intersect_weights(q.x);
        let better = q.better_than(action);
        let mut p = QuadraticProgram::new();
        let lam = q.lambda;
        let alpha = p.add_var("alpha", 0.0, 1.0, -2.0 * lam * c * a_hat);
        let beta = p.add_var("beta", 0.0, 1.0, -2.0 * lam * rest * b_hat);
        p.add_quadratic(alpha, alpha, 2.0 * lam * c);
        p.add_quadratic(beta, beta, 2.0 * lam * rest);
        p.lp.objective_offset = lam * (c * a_hat * a_hat + rest * b_hat * b_hat);
        for b in (0..q.game.m).filter(|&b| b != action) {
            let gap = weights[action] - weights[b];
            let rhs = if better[b] { q.epsilon_strict } else { 0.0 };
            p.add_constraint(format!("resp{b}"), vec![(alpha, gap), (beta, -gap)], Relation::Ge, rhs);
        }
        let out = q.backend.solve_qp(&p, &q.options)?;
        match out.status {
            SolveStatus::Optimal => {
                let (av, bv) = (out.value(alpha), out.value(beta));
                let cost = lam * (c * (av - a_hat).powi(2) + rest * (bv - b_hat).powi(2));
                let utility = family.member(game::InspectionPayoffs { alpha: av, beta: bv });
                Ok(Some(InnerSolution { cost, utility }))
            }
            SolveStatus::Infeasible => Ok(None),
            other => Err(qp_failure(self.name(), other)),
        }
    }
}

/// Exact separation over a finite universe by scanning every member.
///
/// Membership in a response region uses the strong tie-break at tolerance
/// [`game::BR_TOL`], so every utility is assigned to exactly one action.
#[derive(Debug, Clone, Copy, Default)]
pub struct FiniteOracle;

impl SeparationOracle for FiniteOracle {
    fn name(&self) -> &'static str {
        "finite"
    }

    fn supports(&self, universe: &FollowerUniverse, _metric: GroundMetric, _exponent: f64) -> bool {
        matches!(universe, FollowerUniverse::Finite { .. })
    }

    fn inner(&self, q: &SeparationQuery<'_>, action: usize) -> Result<Option<InnerSolution>> {
        let universe = q.game.follower.finite().ok_or_else(|| {
            Error::UnsupportedUniverse("finite oracle needs a finite universe".into())
        })?;
        let mut best: Option<InnerSolution> = None;
        for u in universe {
            let (_, a) = game::strong_response(&q.game.u_l, u, q.x, game::BR_TOL);
            if a != action {
                continue;
            }
            let cost = q.lambda * q.metric.cost(u, q.nominal, q.exponent);
            if best.as_ref().is_none_or(|b| cost < b.cost) {
                best = Some(InnerSolution {
                    cost,
                    utility: u.clone(),
                });
            }
        }
        Ok(best)
    }
}

/// Picks the oracle matching a universe.
pub fn default_oracle(universe: &FollowerUniverse) -> Box<dyn SeparationOracle> {
    match universe {
        FollowerUniverse::Finite { .. } => Box::new(FiniteOracle),
        FollowerUniverse::Box => Box::new(BoxFrobeniusOracle::default()),
        FollowerUniverse::Inspection(_) => Box::new(InspectionOracle),
    }
}
