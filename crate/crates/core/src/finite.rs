//! DRSSS over a finite universe of follower utilities.
//!
//! Three routes: enumeration over best-response mappings with one LP per
//! mapping, one big-M MIP with binary response selectors, and the direct MIP
//! for Wasserstein balls whose nominal lives on the universe.
//!
//! For polytope ambiguity `{μ ∈ Δ^k : Aμ ≤ b}` the inner `min_μ q·μ` is
//! replaced by its LP dual `max b·y + z₀` s.t. `Aᵀy + z₀·1 ≤ q`, `y ≤ 0`,
//! which merges into the outer maximization.
//!
//! Wasserstein programs minimize `λθ^t − Σ_j ν_j w_j`; the reported leader
//! value is the negation.

use std::time::Instant;

use crate::ambiguity::{AmbiguitySpec, PolytopeSet, WassersteinBall};
use crate::error::{Error, Result};
use crate::game::{FollowerUtility, GameInstance, MixedStrategy};
use crate::model::{self, leader_simplex, payoff, payoff_gap};
use crate::par::map_range;
use crate::solution::{verify_mapping, BigMConfig, Deadline, Diagnostics, DrsssSolution, RunOptions};
use crate::solver::{Backend, LinearProgram, MixedIntegerProgram, Relation, Sense, SolveStatus, Var};

/// Largest number of best-response mappings enumeration will visit.
pub const ENUMERATION_LIMIT: f64 = 1e5;

/// The utilities the ambiguity set ranges over, checked against the universe.
pub(crate) fn finite_support<'a>(g: &'a GameInstance, amb: &AmbiguitySpec) -> Result<&'a [FollowerUtility]> {
    let universe = g.follower.finite().ok_or_else(|| {
        Error::UnsupportedUniverse(format!(
            "finite-set methods need a finite universe, got {}",
            g.follower.kind()
        ))
    })?;
    if amb.support() != universe {
        return Err(Error::InvalidInput(
            "the ambiguity set must be supported on the game's finite universe".into(),
        ));
    }
    Ok(universe)
}

/// Outcome of the program for one fixed mapping.
pub(crate) struct MappingOutcome {
    pub value: f64,
    pub x: Vec<f64>,
    pub lambda: Option<f64>,
    pub w: Option<Vec<f64>>,
}

/// Adds `u_i(x, z_i) ≥ u_i(x, a')` for every utility and every other action.
fn exact_br_rows(lp: &mut LinearProgram, x: &[Var], utilities: &[FollowerUtility], z: &[usize], m: usize) {
    for (i, (u, &a)) in utilities.iter().zip(z).enumerate() {
        for b in (0..m).filter(|&b| b != a) {
            lp.add_constraint(format!("br{i}_{b}"), payoff_gap(x, u, a, b), Relation::Ge, 0.0);
        }
    }
}

fn polytope_mapping_lp(g: &GameInstance, set: &PolytopeSet, z: &[usize]) -> (LinearProgram, Vec<Var>, Var) {
    let mut lp = LinearProgram::new(Sense::Maximize);
    let x = leader_simplex(&mut lp, g.n);
    let y: Vec<Var> = (0..set.b.len())
        .map(|r| lp.add_var(format!("y{r}"), f64::NEG_INFINITY, 0.0, set.b[r]))
        .collect();
    let z0 = lp.add_var("z0", f64::NEG_INFINITY, f64::INFINITY, 1.0);
    exact_br_rows(&mut lp, &x, &set.support, z, g.m);
    for (i, &a) in z.iter().enumerate() {
        let mut terms: Vec<(Var, f64)> = y.iter().zip(&set.a).map(|(&v, row)| (v, row[i])).collect();
        terms.push((z0, 1.0));
        terms.extend(payoff(&x, &g.u_l, a, -1.0));
        lp.add_constraint(format!("dual{i}"), terms, Relation::Le, 0.0);
    }
    (lp, x, z0)
}

/// Dual of the worst case over a Wasserstein ball with the response of each
/// support point fixed: only the rows of the selected actions, no big-M.
fn wasserstein_mapping_lp(g: &GameInstance, ball: &WassersteinBall, z: &[usize]) -> (LinearProgram, Vec<Var>, Var, Vec<Var>) {
    let k = ball.k();
    let costs = ball.nominal_costs();
    let mut lp = LinearProgram::new(Sense::Minimize);
    let x = leader_simplex(&mut lp, g.n);
    let lambda = lp.add_var("lambda", 0.0, f64::INFINITY, ball.budget());
    let w: Vec<Var> = (0..k)
        .map(|j| lp.add_var(format!("w{j}"), f64::NEG_INFINITY, f64::INFINITY, -ball.nominal.weights[j]))
        .collect();
    exact_br_rows(&mut lp, &x, &ball.nominal.support, z, g.m);
    for (i, &a) in z.iter().enumerate() {
        for j in 0..k {
            let mut terms = vec![(w[j], 1.0), (lambda, -costs[i * k + j])];
            terms.extend(payoff(&x, &g.u_l, a, -1.0));
            lp.add_constraint(format!("val{i}_{j}"), terms, Relation::Le, 0.0);
        }
    }
    (lp, x, lambda, w)
}

fn solve_mapping(
    backend: &dyn Backend,
    g: &GameInstance,
    amb: &AmbiguitySpec,
    z: &[usize],
    deadline: &Deadline,
) -> Result<Option<MappingOutcome>> {
    let opts = deadline.solve_options()?;
    let (lp, x, extra) = match amb {
        AmbiguitySpec::Polytope(set) => {
            let (lp, x, _) = polytope_mapping_lp(g, set, z);
            (lp, x, None)
        }
        AmbiguitySpec::Wasserstein(ball) => {
            let (lp, x, lambda, w) = wasserstein_mapping_lp(g, ball, z);
            (lp, x, Some((lambda, w)))
        }
    };
    let out = backend.solve_lp(&lp, &opts)?;
    match out.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => return Ok(None),
        SolveStatus::LimitHit => return Err(Error::TimeLimit),
        SolveStatus::Unbounded => {
            return Err(Error::Solver(crate::solver::SolverError::NumericalFailure(
                "mapping LP reported unbounded".into(),
            )))
        }
    }
    let obj = out.objective.expect("optimal outcome has an objective");
    let xs = x.iter().map(|&v| out.value(v)).collect();
    Ok(Some(match extra {
        None => MappingOutcome {
            value: obj,
            x: xs,
            lambda: None,
            w: None,
        },
        Some((lambda, w)) => MappingOutcome {
            value: -obj,
            x: xs,
            lambda: Some(out.value(lambda)),
            w: Some(w.iter().map(|&v| out.value(v)).collect()),
        },
    }))
}

/// Picks the best feasible mapping; ties go to the lowest enumeration index,
/// so the answer does not depend on the execution mode.
pub(crate) fn best_of(results: Vec<Result<Option<MappingOutcome>>>, m: usize, k: usize) -> Result<(usize, Vec<usize>, MappingOutcome)> {
    let mut feasible = 0;
    let mut best: Option<(Vec<usize>, MappingOutcome)> = None;
    for (idx, r) in results.into_iter().enumerate() {
        let Some(o) = r? else { continue };
        feasible += 1;
        if best.as_ref().is_none_or(|(_, b)| o.value > b.value + 1e-12) {
            best = Some((model::decode_mapping(idx, m, k), o));
        }
    }
    let (z, o) = best.ok_or_else(|| {
        Error::Solver(crate::solver::SolverError::NumericalFailure(
            "no best-response mapping was feasible".into(),
        ))
    })?;
    Ok((feasible, z, o))
}

/// Enumerates every best-response mapping `z ∈ [m]^k` and solves one LP each.
pub fn solve_by_enumeration(g: &GameInstance, amb: &AmbiguitySpec, opts: &RunOptions) -> Result<DrsssSolution> {
    let start = Instant::now();
    let utilities = finite_support(g, amb)?;
    let k = utilities.len();
    let count = model::mapping_count(g.m, k, ENUMERATION_LIMIT)?;
    let backend = opts.backend()?;
    let deadline = opts.deadline();
    let results = map_range(opts.exec, count, |idx| {
        let z = model::decode_mapping(idx, g.m, k);
        solve_mapping(&*backend, g, amb, &z, &deadline)
    });
    let (feasible, z, best) = best_of(results, g.m, k)?;
    let x = MixedStrategy::from_solver(&best.x);
    verify_mapping(utilities, &x, &z)?;
    Ok(DrsssSolution {
        x,
        value: best.value,
        mapping: z,
        lambda: best.lambda,
        w: best.w,
        solver_time_s: start.elapsed().as_secs_f64(),
        diagnostics: Diagnostics {
            method: "enumeration".into(),
            programs_solved: count,
            feasible_mappings: feasible,
            ..Diagnostics::default()
        },
    })
}

/// Response selectors `δ[i][a]`, one-hot rows, and big-M best-response rows
/// `u_i(x, a) ≥ u_i(x, a') + M(δ_{a,i} − 1)` for every `a, a'` (including
/// `a' = a`, which is vacuous but keeps the row count at `m²` per utility).
pub(crate) fn selector_block(
    p: &mut MixedIntegerProgram,
    x: &[Var],
    utilities: &[FollowerUtility],
    m: usize,
    big_m: f64,
    tag: &str,
) -> Vec<Vec<Var>> {
    let mut delta = Vec::with_capacity(utilities.len());
    for (i, u) in utilities.iter().enumerate() {
        let block: Vec<Var> = (0..m).map(|a| p.add_binary(format!("d{tag}{i}_{a}"), 0.0)).collect();
        for a in 0..m {
            for b in 0..m {
                let mut terms = payoff_gap(x, u, a, b);
                terms.push((block[a], -big_m));
                p.add_constraint(format!("br{tag}{i}_{a}_{b}"), terms, Relation::Ge, -big_m);
            }
        }
        p.add_constraint(
            format!("onehot{tag}{i}"),
            block.iter().map(|&d| (d, 1.0)).collect(),
            Relation::Eq,
            1.0,
        );
        delta.push(block);
    }
    delta
}

/// `lhs_terms ≤ (1 − δ)M + u_l(x, a) + extra_terms`, written as
/// `lhs − extra − u_l(x, a) + Mδ ≤ M`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn value_row(
    p: &mut MixedIntegerProgram,
    name: String,
    x: &[Var],
    u_l: &crate::Matrix,
    a: usize,
    mut terms: Vec<(Var, f64)>,
    delta: Var,
    big_m: f64,
) {
    terms.extend(payoff(x, u_l, a, -1.0));
    terms.push((delta, big_m));
    p.add_constraint(name, terms, Relation::Le, big_m);
}

fn solve_mip_checked(
    backend: &dyn Backend,
    p: &MixedIntegerProgram,
    deadline: &Deadline,
) -> Result<crate::solver::SolveOutcome> {
    let out = backend.solve_milp(p, &deadline.solve_options()?)?;
    match out.status {
        SolveStatus::Optimal => Ok(out),
        SolveStatus::LimitHit => Err(Error::TimeLimit),
        other => Err(Error::Solver(crate::solver::SolverError::NumericalFailure(format!(
            "MIP ended with {other:?}"
        )))),
    }
}

fn mapping_from(values: &[f64], delta: &[Vec<Var>]) -> Vec<usize> {
    delta.iter().map(|block| model::selected(values, block)).collect()
}

/// The single big-M MIP with response selectors.
///
/// Polytope ambiguity uses the dualized inner minimum; Wasserstein balls are
/// forwarded to [`solve_wasserstein_finite_mip`].
pub fn solve_by_mip(g: &GameInstance, amb: &AmbiguitySpec, cfg: &BigMConfig, opts: &RunOptions) -> Result<DrsssSolution> {
    let set = match amb {
        AmbiguitySpec::Wasserstein(ball) => return solve_wasserstein_finite_mip(g, ball, cfg, opts),
        AmbiguitySpec::Polytope(set) => set,
    };
    cfg.validate()?;
    let start = Instant::now();
    let utilities = finite_support(g, amb)?;
    let k = utilities.len();
    let mut p = MixedIntegerProgram::new(Sense::Maximize);
    let x = leader_simplex(&mut p, g.n);
    let q: Vec<Var> = (0..k).map(|i| p.add_var(format!("q{i}"), 0.0, 1.0, 0.0)).collect();
    let y: Vec<Var> = (0..set.b.len())
        .map(|r| p.add_var(format!("y{r}"), f64::NEG_INFINITY, 0.0, set.b[r]))
        .collect();
    let z0 = p.add_var("z0", f64::NEG_INFINITY, f64::INFINITY, 1.0);
    let delta = selector_block(&mut p, &x, utilities, g.m, cfg.big_m, "");
    for i in 0..k {
        for a in 0..g.m {
            value_row(&mut p, format!("link{i}_{a}"), &x, &g.u_l, a, vec![(q[i], 1.0)], delta[i][a], cfg.big_m);
        }
        let mut terms: Vec<(Var, f64)> = y.iter().zip(&set.a).map(|(&v, row)| (v, row[i])).collect();
        terms.push((z0, 1.0));
        terms.push((q[i], -1.0));
        p.add_constraint(format!("dual{i}"), terms, Relation::Le, 0.0);
    }
    let backend = opts.backend()?;
    let out = solve_mip_checked(&*backend, &p, &opts.deadline())?;
    let values = out.point().expect("optimal");
    let xs = MixedStrategy::from_solver(&x.iter().map(|&v| values[v.0]).collect::<Vec<_>>());
    let mapping = mapping_from(values, &delta);
    verify_mapping(utilities, &xs, &mapping)?;
    Ok(DrsssSolution {
        x: xs,
        value: out.objective.expect("optimal"),
        mapping,
        lambda: None,
        w: None,
        solver_time_s: start.elapsed().as_secs_f64(),
        diagnostics: Diagnostics {
            method: "mip".into(),
            programs_solved: 1,
            ..Diagnostics::default()
        },
    })
}

/// Variable and row handles of the finite-support Wasserstein MIP.
pub struct WassersteinMip {
    pub program: MixedIntegerProgram,
    pub x: Vec<Var>,
    pub lambda: Var,
    pub w: Vec<Var>,
    pub delta: Vec<Vec<Var>>,
}

/// Builds `min λθ^t − Σ_j ν_j w_j` over `x ∈ Δ^n`, `λ ≥ 0`, free `w`, and
/// selectors `δ ∈ {0,1}^{m×k}`, with value rows
/// `w_j ≤ (1 − δ_{a,i})M + λ d^t(u_i, u_j) + u_l(x, a)` for all `a, i, j`.
///
/// The program has exactly `n + k + 1` continuous variables and `m·k`
/// binaries. When `θ > 0`, `λ` is bounded by `1/θ^t`, a bound any optimal
/// solution satisfies because larger `λ` makes the objective positive while
/// `λ = 0` keeps it non-positive.
pub fn build_wasserstein_mip(g: &GameInstance, ball: &WassersteinBall, cfg: &BigMConfig) -> WassersteinMip {
    let k = ball.k();
    let costs = ball.nominal_costs();
    let budget = ball.budget();
    let mut p = MixedIntegerProgram::new(Sense::Minimize);
    let x = leader_simplex(&mut p, g.n);
    let lambda_max = if budget > 0.0 { 1.0 / budget } else { f64::INFINITY };
    let lambda = p.add_var("lambda", 0.0, lambda_max, budget);
    let w: Vec<Var> = (0..k)
        .map(|j| p.add_var(format!("w{j}"), f64::NEG_INFINITY, f64::INFINITY, -ball.nominal.weights[j]))
        .collect();
    let delta = selector_block(&mut p, &x, &ball.nominal.support, g.m, cfg.big_m, "");
    for a in 0..g.m {
        for i in 0..k {
            for j in 0..k {
                let terms = vec![(w[j], 1.0), (lambda, -costs[i * k + j])];
                value_row(&mut p, format!("val{a}_{i}_{j}"), &x, &g.u_l, a, terms, delta[i][a], cfg.big_m);
            }
        }
    }
    assert_eq!(p.num_continuous(), g.n + k + 1);
    assert_eq!(p.num_binaries(), g.m * k);
    WassersteinMip {
        program: p,
        x,
        lambda,
        w,
        delta,
    }
}

/// Solves the finite-support Wasserstein DRSSS as one MIP.
pub fn solve_wasserstein_finite_mip(
    g: &GameInstance,
    ball: &WassersteinBall,
    cfg: &BigMConfig,
    opts: &RunOptions,
) -> Result<DrsssSolution> {
    cfg.validate()?;
    let start = Instant::now();
    let amb = AmbiguitySpec::Wasserstein(ball.clone());
    let utilities = finite_support(g, &amb)?;
    let mip = build_wasserstein_mip(g, ball, cfg);
    let backend = opts.backend()?;
    let out = solve_mip_checked(&*backend, &mip.program, &opts.deadline())?;
    let values = out.point().expect("optimal");
    let xs = MixedStrategy::from_solver(&mip.x.iter().map(|&v| values[v.0]).collect::<Vec<_>>());
    let mapping = mapping_from(values, &mip.delta);
    verify_mapping(utilities, &xs, &mapping)?;
    Ok(DrsssSolution {
        x: xs,
        value: -out.objective.expect("optimal"),
        mapping,
        lambda: Some(values[mip.lambda.0]),
        w: Some(mip.w.iter().map(|&v| values[v.0]).collect()),
        solver_time_s: start.elapsed().as_secs_f64(),
        diagnostics: Diagnostics {
            method: "wasserstein-mip".into(),
            programs_solved: 1,
            ..Diagnostics::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambiguity::{Distribution, GroundMetric};
    use crate::matrix::Matrix;

    fn mat(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn wasserstein_mip_sizes() {
        let u = mat(&[&[0.1, 0.5, 0.9], &[0.3, 0.2, 0.8]]);
        let v = mat(&[&[0.7, 0.5, 0.1], &[0.3, 0.6, 0.4]]);
        let g = GameInstance::finite(Matrix::filled(2, 3, 0.5), vec![u.clone(), v.clone()]).unwrap();
        let nu = Distribution::uniform(vec![u, v]).unwrap();
        let ball = WassersteinBall::new(nu, 0.1, 2.0, GroundMetric::Frobenius).unwrap();
        let mip = build_wasserstein_mip(&g, &ball, &BigMConfig::default());
        assert_eq!(mip.program.num_continuous(), 2 + 2 + 1);
        assert_eq!(mip.program.num_binaries(), 6);
        // m²k BR rows + mk² value rows + k one-hot rows + 1 simplex row.
        assert_eq!(mip.program.lp.num_constraints(), 9 * 2 + 3 * 4 + 2 + 1);
    }

    #[test]
    fn sse_example() {
        // Committing to the first row makes the follower answer with a2.
        let g = GameInstance::finite(
            mat(&[&[1.0, 0.0], &[0.0, 0.0]]),
            vec![mat(&[&[0.0, 1.0], &[1.0, 0.0]])],
        )
        .unwrap();
        let amb = AmbiguitySpec::Polytope(PolytopeSet::full_simplex(g.follower.finite().unwrap().to_vec()).unwrap());
        let opts = RunOptions::sequential();
        let e = solve_by_enumeration(&g, &amb, &opts).unwrap();
        let m = solve_by_mip(&g, &amb, &BigMConfig::default(), &opts).unwrap();
        // x = (1/2, 1/2) makes the follower indifferent; strong tie-break gives 1/2.
        assert!((e.value - 0.5).abs() < 1e-7, "{}", e.value);
        assert!((m.value - e.value).abs() < 1e-7);
    }

    #[test]
    fn rejects_foreign_support_and_guard() {
        let u = mat(&[&[0.1, 0.2]]);
        let g = GameInstance::finite(mat(&[&[0.5, 0.5]]), vec![u.clone()]).unwrap();
        let other = PolytopeSet::full_simplex(vec![mat(&[&[0.9, 0.9]])]).unwrap();
        let err = solve_by_enumeration(&g, &AmbiguitySpec::Polytope(other), &RunOptions::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));

        let many: Vec<Matrix> = (0..17).map(|i| mat(&[&[0.01 * i as f64, 0.5]])).collect();
        let g = GameInstance::finite(mat(&[&[0.5, 0.5]]), many.clone()).unwrap();
        let amb = AmbiguitySpec::Polytope(PolytopeSet::full_simplex(many).unwrap());
        let err = solve_by_enumeration(&g, &amb, &RunOptions::default()).unwrap_err();
        assert!(matches!(err, Error::EnumerationGuard { .. }));
    }
}
