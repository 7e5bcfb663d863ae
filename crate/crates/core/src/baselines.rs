//! Baselines for the finite-support Wasserstein problem: one LP per fixed
//! selector matrix δ, and the non-robust Bayesian Stackelberg MIP.

use std::time::Instant;

use crate::ambiguity::{AmbiguitySpec, Distribution, WassersteinBall};
use crate::error::{Error, Result};
use crate::finite::{best_of, finite_support, selector_block, value_row, MappingOutcome, ENUMERATION_LIMIT};
use crate::game::{GameInstance, MixedStrategy};
use crate::model::{self, leader_simplex, payoff, payoff_gap};
use crate::par::map_range;
use crate::solution::{verify_mapping, BigMConfig, Deadline, Diagnostics, DrsssSolution, RunOptions};
use crate::solver::{Backend, LinearProgram, MixedIntegerProgram, Relation, Sense, SolveStatus, Var};

/// The Wasserstein MIP with `δ` fixed to the one-hot matrix of mapping `z`:
/// every big-M row is kept, with `δ` substituted as a constant.
fn fixed_selector_lp(g: &GameInstance, ball: &WassersteinBall, cfg: &BigMConfig, z: &[usize]) -> (LinearProgram, Vec<Var>, Var, Vec<Var>) {
    let k = ball.k();
    let costs = ball.nominal_costs();
    let big_m = cfg.big_m;
    let mut lp = LinearProgram::new(Sense::Minimize);
    let x = leader_simplex(&mut lp, g.n);
    let lambda = lp.add_var("lambda", 0.0, f64::INFINITY, ball.budget());
    let w: Vec<Var> = (0..k)
        .map(|j| lp.add_var(format!("w{j}"), f64::NEG_INFINITY, f64::INFINITY, -ball.nominal.weights[j]))
        .collect();
    let delta = |a: usize, i: usize| if z[i] == a { 1.0 } else { 0.0 };
    for (i, u) in ball.nominal.support.iter().enumerate() {
        for a in 0..g.m {
            for b in 0..g.m {
                lp.add_constraint(
                    format!("br{i}_{a}_{b}"),
                    payoff_gap(&x, u, a, b),
                    Relation::Ge,
                    big_m * (delta(a, i) - 1.0),
                );
            }
        }
    }
    for a in 0..g.m {
        for i in 0..k {
            for j in 0..k {
                let mut terms = vec![(w[j], 1.0), (lambda, -costs[i * k + j])];
                terms.extend(payoff(&x, &g.u_l, a, -1.0));
                lp.add_constraint(
                    format!("val{a}_{i}_{j}"),
                    terms,
                    Relation::Le,
                    (1.0 - delta(a, i)) * big_m,
                );
            }
        }
    }
    (lp, x, lambda, w)
}

fn solve_fixed(
    backend: &dyn Backend,
    g: &GameInstance,
    ball: &WassersteinBall,
    cfg: &BigMConfig,
    z: &[usize],
    deadline: &Deadline,
) -> Result<Option<MappingOutcome>> {
    let (lp, x, lambda, w) = fixed_selector_lp(g, ball, cfg, z);
    let out = backend.solve_lp(&lp, &deadline.solve_options()?)?;
    match out.status {
        SolveStatus::Optimal => Ok(Some(MappingOutcome {
            value: -out.objective.expect("optimal"),
            x: x.iter().map(|&v| out.value(v)).collect(),
            lambda: Some(out.value(lambda)),
            w: Some(w.iter().map(|&v| out.value(v)).collect()),
        })),
        SolveStatus::Infeasible => Ok(None),
        SolveStatus::LimitHit => Err(Error::TimeLimit),
        SolveStatus::Unbounded => Err(Error::Solver(crate::solver::SolverError::NumericalFailure(
            "fixed-selector LP reported unbounded".into(),
        ))),
    }
}

/// `max_{δ ∈ 𝒬} OPT-LP(δ)` over all one-hot selector matrices.
pub fn enumeration_lp_baseline(g: &GameInstance, ball: &WassersteinBall, cfg: &BigMConfig, opts: &RunOptions) -> Result<DrsssSolution> {
    cfg.validate()?;
    let start = Instant::now();
    let utilities = finite_support(g, &AmbiguitySpec::Wasserstein(ball.clone()))?;
    let k = ball.k();
    let count = model::mapping_count(g.m, k, ENUMERATION_LIMIT)?;
    let backend = opts.backend()?;
    let deadline = opts.deadline();
    let results = map_range(opts.exec, count, |idx| {
        let z = model::decode_mapping(idx, g.m, k);
        solve_fixed(&*backend, g, ball, cfg, &z, &deadline)
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
            method: "enum-lp".into(),
            programs_solved: count,
            feasible_mappings: feasible,
            ..Diagnostics::default()
        },
    })
}

/// Bayesian Stackelberg MIP: `max Σ_j ν_j w_j` with
/// `w_j ≤ (1 − δ_{a,j})M + u_l(x, a)`.
///
/// Each `w_j` is tied to the selector of its own utility `u_j`.
pub fn bayesian_mip(g: &GameInstance, nu: &Distribution, cfg: &BigMConfig, opts: &RunOptions) -> Result<DrsssSolution> {
    cfg.validate()?;
    let start = Instant::now();
    let k = nu.len();
    for u in &nu.support {
        g.check_utility(u)?;
    }
    let mut p = MixedIntegerProgram::new(Sense::Maximize);
    let x = leader_simplex(&mut p, g.n);
    let w: Vec<Var> = (0..k)
        .map(|j| p.add_var(format!("w{j}"), f64::NEG_INFINITY, 1.0, nu.weights[j]))
        .collect();
    let delta = selector_block(&mut p, &x, &nu.support, g.m, cfg.big_m, "");
    for j in 0..k {
        for a in 0..g.m {
            value_row(&mut p, format!("val{j}_{a}"), &x, &g.u_l, a, vec![(w[j], 1.0)], delta[j][a], cfg.big_m);
        }
    }
    let backend = opts.backend()?;
    let out = backend.solve_milp(&p, &opts.deadline().solve_options()?)?;
    match out.status {
        SolveStatus::Optimal => {}
        SolveStatus::LimitHit => return Err(Error::TimeLimit),
        other => {
            return Err(Error::Solver(crate::solver::SolverError::NumericalFailure(format!(
                "Bayesian MIP ended with {other:?}"
            ))))
        }
    }
    let values = out.point().expect("optimal");
    let xs = MixedStrategy::from_solver(&x.iter().map(|&v| values[v.0]).collect::<Vec<_>>());
    let mapping: Vec<usize> = delta.iter().map(|b| model::selected(values, b)).collect();
    verify_mapping(&nu.support, &xs, &mapping)?;
    Ok(DrsssSolution {
        x: xs,
        value: out.objective.expect("optimal"),
        mapping,
        lambda: None,
        w: Some(w.iter().map(|&v| values[v.0]).collect()),
        solver_time_s: start.elapsed().as_secs_f64(),
        diagnostics: Diagnostics {
            method: "bayesian".into(),
            programs_solved: 1,
            ..Diagnostics::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambiguity::GroundMetric;
    use crate::matrix::Matrix;

    #[test]
    fn bayesian_ignores_zero_weight_type() {
        let u1 = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let u2 = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let u_l = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let g = GameInstance::finite(u_l, vec![u1.clone(), u2.clone()]).unwrap();
        let opts = RunOptions::sequential();
        let cfg = BigMConfig::default();
        let only_first = Distribution::new(vec![1.0, 0.0], vec![u1.clone(), u2.clone()]).unwrap();
        let single = Distribution::point_mass(u1.clone());
        let a = bayesian_mip(&g, &only_first, &cfg, &opts).unwrap();
        let b = bayesian_mip(&g, &single, &cfg, &opts).unwrap();
        assert!((a.value - b.value).abs() < 1e-7);
        assert!((a.value - 0.5).abs() < 1e-7);

        let ball = WassersteinBall::new(only_first, 0.0, 2.0, GroundMetric::Frobenius).unwrap();
        let e = enumeration_lp_baseline(&g, &ball, &cfg, &opts).unwrap();
        assert!((e.value - a.value).abs() < 1e-6);
    }
}
