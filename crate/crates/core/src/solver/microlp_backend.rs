use microlp::{ComparisonOp, OptimizationDirection, Problem, SolveOptions as MlpOptions, Variable};

use super::{
    Backend, LinearProgram, MixedIntegerProgram, RawOutcome, Relation, Sense, SolveOptions,
    SolverError,
};

/// Adapter over the `microlp` sparse revised simplex and its branch-and-bound.
#[derive(Debug, Clone, Copy, Default)]
pub struct MicrolpBackend;

impl Backend for MicrolpBackend {
    fn name(&self) -> &'static str {
        "microlp"
    }

    fn solve_lp_raw(&self, p: &LinearProgram, opts: &SolveOptions) -> Result<RawOutcome, SolverError> {
        run(p, None, opts)
    }

    fn solve_milp_raw(
        &self,
        p: &MixedIntegerProgram,
        opts: &SolveOptions,
    ) -> Result<RawOutcome, SolverError> {
        run(&p.lp, Some(&p.binary), opts)
    }
}

#[derive(Clone, Copy)]
enum Column {
    Single(Variable),
    Split(Variable, Variable),
}

fn run(p: &LinearProgram, binary: Option<&[bool]>, opts: &SolveOptions) -> Result<RawOutcome, SolverError> {
    let direction = match p.sense {
        Sense::Minimize => OptimizationDirection::Minimize,
        Sense::Maximize => OptimizationDirection::Maximize,
    };
    let mut problem = Problem::new(direction);
    // microlp can loop forever on free columns, so each one is split into
    // a difference of two non-negative columns.
    let vars: Vec<Column> = p
        .variables
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let cost = p.objective[j];
            if binary.is_some_and(|b| b[j]) {
                Column::Single(problem.add_binary_var(cost))
            } else if v.lower.is_infinite() && v.upper.is_infinite() {
                Column::Split(
                    problem.add_var(cost, (0.0, f64::INFINITY)),
                    problem.add_var(-cost, (0.0, f64::INFINITY)),
                )
            } else {
                Column::Single(problem.add_var(cost, (v.lower, v.upper)))
            }
        })
        .collect();
    for c in &p.constraints {
        // microlp rejects repeated variables in one row.
        let mut merged: Vec<(Variable, f64)> = Vec::with_capacity(c.terms.len());
        for &(v, a) in &c.terms {
            let parts = match vars[v.0] {
                Column::Single(x) => [Some((x, a)), None],
                Column::Split(pos, neg) => [Some((pos, a)), Some((neg, -a))],
            };
            for (x, a) in parts.into_iter().flatten() {
                match merged.iter_mut().find(|(i, _)| *i == x) {
                    Some(entry) => entry.1 += a,
                    None => merged.push((x, a)),
                }
            }
        }
        let op = match c.relation {
            Relation::Le => ComparisonOp::Le,
            Relation::Eq => ComparisonOp::Eq,
            Relation::Ge => ComparisonOp::Ge,
        };
        problem.add_constraint(
            merged,
            op,
            c.rhs,
        );
    }
    let mut options = MlpOptions::default();
    options.time_limit = opts.time_limit;
    match problem.solve_with(options) {
        Ok(outcome) => {
            if !outcome.is_optimal() {
                return Ok(RawOutcome::LimitHit);
            }
            let Some(solution) = outcome.solution() else {
                return Ok(RawOutcome::LimitHit);
            };
            Ok(RawOutcome::optimal(
                vars.iter()
                    .map(|c| match *c {
                        Column::Single(x) => solution.var_value(x),
                        Column::Split(pos, neg) => solution.var_value(pos) - solution.var_value(neg),
                    })
                    .collect(),
            ))
        }
        Err(microlp::Error::Infeasible) => Ok(RawOutcome::Infeasible),
        Err(microlp::Error::Unbounded) => Ok(RawOutcome::Unbounded),
        Err(e) => Err(SolverError::NumericalFailure(format!("microlp: {e}"))),
    }
}
