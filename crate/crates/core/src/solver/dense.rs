//! Dense bounded-variable primal simplex and a depth-first branch-and-bound.
//!
//! Meant for small programs (a few hundred rows): the tableau is stored in
//! full. Variables are shifted so that every column lives in `[0, U]` with `U`
//! possibly infinite; non-basic columns sit at either bound, so binaries never
//! need explicit `δ ≤ 1` rows.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};

use super::{
    Backend, LinearProgram, MixedIntegerProgram, RawOutcome, Relation, Sense, SolveOptions,
    SolverError, INTEGRALITY_TOL,
};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-10;
const DEGENERATE_RUN_BEFORE_BLAND: usize = 50;

#[derive(Debug, Clone, Copy)]
pub struct DenseBackend {
    max_nodes: usize,
}

impl DenseBackend {
    pub const fn new() -> Self {
        Self { max_nodes: 1_000_000 }
    }
}

impl Default for DenseBackend {
    fn default() -> Self {
        Self::new()
    }
}

impl Backend for DenseBackend {
    fn name(&self) -> &'static str {
        "dense"
    }

    fn solve_lp_raw(&self, p: &LinearProgram, opts: &SolveOptions) -> Result<RawOutcome, SolverError> {
        let deadline = opts.time_limit.map(|d| Instant::now() + d);
        let bounds: Vec<(f64, f64)> = p.variables.iter().map(|v| (v.lower, v.upper)).collect();
        Ok(match solve_bounded(p, &bounds, deadline)? {
            LpResult::Optimal(x) => RawOutcome::optimal(x),
            LpResult::Infeasible => RawOutcome::Infeasible,
            LpResult::Unbounded => RawOutcome::Unbounded,
            LpResult::LimitHit => RawOutcome::LimitHit,
        })
    }

    fn solve_milp_raw(
        &self,
        p: &MixedIntegerProgram,
        opts: &SolveOptions,
    ) -> Result<RawOutcome, SolverError> {
        branch_and_bound(p, opts.time_limit, self.max_nodes)
    }
}

enum LpResult {
    Optimal(Vec<f64>),
    Infeasible,
    Unbounded,
    LimitHit,
}

/// How an original variable maps onto standard-form columns.
#[derive(Debug, Clone, Copy)]
enum ColumnMap {
    /// x = lower + y
    Shift { col: usize, lower: f64 },
    /// x = upper − y
    Mirror { col: usize, upper: f64 },
    /// x = y⁺ − y⁻
    Split { pos: usize, neg: usize },
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// Row-major `rows × cols`, holds B⁻¹A.
    t: Vec<f64>,
    /// Original standard-form matrix, kept for the final refinement solve.
    a: Vec<f64>,
    b: Vec<f64>,
    upper: Vec<f64>,
    basis: Vec<usize>,
    basic_row: Vec<Option<usize>>,
    at_upper: Vec<bool>,
    beta: Vec<f64>,
    artificial: Vec<bool>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.cols + c]
    }

    fn nonbasic_value(&self, c: usize) -> f64 {
        if self.at_upper[c] {
            self.upper[c]
        } else {
            0.0
        }
    }

    fn value(&self, c: usize) -> f64 {
        match self.basic_row[c] {
            Some(r) => self.beta[r],
            None => self.nonbasic_value(c),
        }
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for r in 0..self.rows {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.t[r * self.cols..(r + 1) * self.cols];
                for (dj, &a) in d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        for r in 0..self.rows {
            d[self.basis[r]] = 0.0;
        }
        d
    }

    fn pivot(&mut self, r: usize, c: usize, d: &mut [f64]) {
        let cols = self.cols;
        let piv = self.t[r * cols + c];
        for k in 0..cols {
            self.t[r * cols + k] /= piv;
        }
        let (before, rest) = self.t.split_at_mut(r * cols);
        let (prow, after) = rest.split_at_mut(cols);
        for other in before.chunks_mut(cols).chain(after.chunks_mut(cols)) {
            let f = other[c];
            if f != 0.0 {
                for (o, &p) in other.iter_mut().zip(prow.iter()) {
                    *o -= f * p;
                }
                other[c] = 0.0;
            }
        }
        let f = d[c];
        if f != 0.0 {
            for (dk, &p) in d.iter_mut().zip(prow.iter()) {
                *dk -= f * p;
            }
            d[c] = 0.0;
        }
        let leaving = self.basis[r];
        self.basic_row[leaving] = None;
        self.basis[r] = c;
        self.basic_row[c] = Some(r);
    }

    /// Runs primal simplex iterations on cost vector `cost` until optimal.
    fn optimize(
        &mut self,
        cost: &[f64],
        allowed: &dyn Fn(usize) -> bool,
        deadline: Option<Instant>,
    ) -> Result<Phase, SolverError> {
        let mut d = self.reduced_costs(cost);
        let max_iter = 50 * (self.rows + self.cols) + 1000;
        let mut degenerate_run = 0usize;
        for iter in 0..max_iter {
            if iter % 64 == 0 {
                if let Some(dl) = deadline {
                    if Instant::now() > dl {
                        return Ok(Phase::LimitHit);
                    }
                }
            }
            let bland = degenerate_run >= DEGENERATE_RUN_BEFORE_BLAND;
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..self.cols {
                if self.basic_row[j].is_some() || !allowed(j) || self.upper[j] == 0.0 {
                    continue;
                }
                let score = if self.at_upper[j] { d[j] } else { -d[j] };
                if score > COST_TOL {
                    if bland {
                        entering = Some((j, score));
                        break;
                    }
                    if entering.is_none_or(|(_, s)| score > s) {
                        entering = Some((j, score));
                    }
                }
            }
            let Some((j, _)) = entering else {
                return Ok(Phase::Optimal);
            };
            let sigma = if self.at_upper[j] { -1.0 } else { 1.0 };

            let mut step = self.upper[j];
            let mut leave: Option<(usize, bool)> = None;
            let mut leave_mag = 0.0;
            for r in 0..self.rows {
                let alpha = sigma * self.at(r, j);
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                let bvar = self.basis[r];
                let (limit, to_upper) = if alpha > 0.0 {
                    (self.beta[r].max(0.0) / alpha, false)
                } else if self.upper[bvar].is_finite() {
                    ((self.upper[bvar] - self.beta[r]).max(0.0) / -alpha, true)
                } else {
                    continue;
                };
                let take = match leave {
                    None => limit <= step,
                    Some((lr, _)) if bland => {
                        limit < step || (limit == step && self.basis[r] < self.basis[lr])
                    }
                    // Among near-ties prefer the largest pivot element.
                    Some(_) => {
                        limit < step - 1e-12 || (limit <= step + 1e-12 && alpha.abs() > leave_mag)
                    }
                };
                if take {
                    step = step.min(limit);
                    leave = Some((r, to_upper));
                    leave_mag = alpha.abs();
                }
            }
            if step.is_infinite() {
                return Ok(Phase::Unbounded);
            }
            if step <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            for r in 0..self.rows {
                let a = self.at(r, j);
                if a != 0.0 {
                    self.beta[r] -= sigma * a * step;
                }
            }
            match leave {
                // A row limit that ties the entering bound still pivots, keeping
                // the basis in sync with the bound that was actually reached.
                Some((r, to_upper)) => {
                    let leaving = self.basis[r];
                    let entering_value = if sigma > 0.0 { step } else { self.upper[j] - step };
                    self.pivot(r, j, &mut d);
                    self.at_upper[leaving] = to_upper;
                    self.at_upper[j] = false;
                    self.beta[r] = entering_value;
                }
                None => {
                    self.at_upper[j] = !self.at_upper[j];
                }
            }
        }
        Err(SolverError::NumericalFailure(
            "dense simplex iteration limit reached".into(),
        ))
    }

    /// Recomputes basic values from the original columns with an LU solve.
    fn refine(&mut self) {
        let m = self.rows;
        if m == 0 {
            return;
        }
        let mut bmat = DMatrix::<f64>::zeros(m, m);
        for (k, &c) in self.basis.iter().enumerate() {
            for r in 0..m {
                bmat[(r, k)] = self.a[r * self.cols + c];
            }
        }
        let mut rhs = DVector::<f64>::from_column_slice(&self.b);
        for c in 0..self.cols {
            if self.basic_row[c].is_none() && self.at_upper[c] {
                let u = self.upper[c];
                for r in 0..m {
                    rhs[r] -= self.a[r * self.cols + c] * u;
                }
            }
        }
        if let Some(sol) = bmat.lu().solve(&rhs) {
            let drift = sol
                .iter()
                .zip(&self.beta)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if sol.iter().all(|v| v.is_finite()) && drift < 1e-6 {
                for r in 0..m {
                    self.beta[r] = sol[r];
                }
            }
        }
    }
}

enum Phase {
    Optimal,
    Unbounded,
    LimitHit,
}

fn solve_bounded(
    p: &LinearProgram,
    bounds: &[(f64, f64)],
    deadline: Option<Instant>,
) -> Result<LpResult, SolverError> {
    let nvars = p.num_vars();
    let mut maps = Vec::with_capacity(nvars);
    let mut upper: Vec<f64> = Vec::new();
    let mut cost: Vec<f64> = Vec::new();
    let obj_sign = match p.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    for (j, &(lo, hi)) in bounds.iter().enumerate() {
        let c = obj_sign * p.objective[j];
        if lo.is_finite() {
            maps.push(ColumnMap::Shift { col: upper.len(), lower: lo });
            upper.push(hi - lo);
            cost.push(c);
        } else if hi.is_finite() {
            maps.push(ColumnMap::Mirror { col: upper.len(), upper: hi });
            upper.push(f64::INFINITY);
            cost.push(-c);
        } else {
            let pos = upper.len();
            maps.push(ColumnMap::Split { pos, neg: pos + 1 });
            upper.extend([f64::INFINITY, f64::INFINITY]);
            cost.extend([c, -c]);
        }
    }
    let structural = upper.len();
    let rows = p.num_constraints();
    let slack_count = p
        .constraints
        .iter()
        .filter(|c| c.relation != Relation::Eq)
        .count();

    // Row data in standard form, before artificials are known.
    let mut dense_rows: Vec<Vec<f64>> = Vec::with_capacity(rows);
    let mut b = Vec::with_capacity(rows);
    let mut slack_col = Vec::with_capacity(rows);
    let mut next_slack = structural;
    for c in &p.constraints {
        let mut row = vec![0.0; structural + slack_count];
        let mut rhs = c.rhs;
        for &(v, a) in &c.terms {
            match maps[v.0] {
                ColumnMap::Shift { col, lower } => {
                    row[col] += a;
                    rhs -= a * lower;
                }
                ColumnMap::Mirror { col, upper } => {
                    row[col] -= a;
                    rhs -= a * upper;
                }
                ColumnMap::Split { pos, neg } => {
                    row[pos] += a;
                    row[neg] -= a;
                }
            }
        }
        let slack = match c.relation {
            Relation::Le => {
                row[next_slack] = 1.0;
                next_slack += 1;
                Some(next_slack - 1)
            }
            Relation::Ge => {
                row[next_slack] = -1.0;
                next_slack += 1;
                Some(next_slack - 1)
            }
            Relation::Eq => None,
        };
        if rhs < 0.0 {
            row.iter_mut().for_each(|v| *v = -*v);
            rhs = -rhs;
        }
        dense_rows.push(row);
        b.push(rhs);
        slack_col.push(slack);
    }
    upper.extend(std::iter::repeat_n(f64::INFINITY, slack_count));
    cost.extend(std::iter::repeat_n(0.0, slack_count));

    let needs_artificial: Vec<bool> = (0..rows)
        .map(|r| match slack_col[r] {
            Some(s) => dense_rows[r][s] != 1.0,
            None => true,
        })
        .collect();
    let art_count = needs_artificial.iter().filter(|&&x| x).count();
    let cols = structural + slack_count + art_count;
    upper.extend(std::iter::repeat_n(f64::INFINITY, art_count));
    cost.extend(std::iter::repeat_n(0.0, art_count));
    let mut artificial = vec![false; cols];
    let mut t = vec![0.0; rows * cols];
    let mut basis = Vec::with_capacity(rows);
    let mut next_art = structural + slack_count;
    for r in 0..rows {
        t[r * cols..r * cols + structural + slack_count].copy_from_slice(&dense_rows[r]);
        if needs_artificial[r] {
            t[r * cols + next_art] = 1.0;
            artificial[next_art] = true;
            basis.push(next_art);
            next_art += 1;
        } else {
            basis.push(slack_col[r].expect("slack present"));
        }
    }
    let mut basic_row = vec![None; cols];
    for (r, &c) in basis.iter().enumerate() {
        basic_row[c] = Some(r);
    }
    let mut tab = Tableau {
        rows,
        cols,
        a: t.clone(),
        t,
        b: b.clone(),
        upper,
        basis,
        basic_row,
        at_upper: vec![false; cols],
        beta: b,
        artificial,
    };

    if art_count > 0 {
        let phase1: Vec<f64> = tab.artificial.iter().map(|&a| if a { 1.0 } else { 0.0 }).collect();
        match tab.optimize(&phase1, &|_| true, deadline)? {
            Phase::LimitHit => return Ok(LpResult::LimitHit),
            Phase::Unbounded => {
                return Err(SolverError::NumericalFailure(
                    "phase one reported unbounded".into(),
                ))
            }
            Phase::Optimal => {}
        }
        let infeas: f64 = (0..cols).filter(|&c| tab.artificial[c]).map(|c| tab.value(c)).sum();
        let bmax = tab.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if infeas > 1e-8 * (1.0 + bmax) {
            return Ok(LpResult::Infeasible);
        }
        for c in 0..cols {
            if tab.artificial[c] {
                tab.upper[c] = 0.0;
                tab.at_upper[c] = false;
                if let Some(r) = tab.basic_row[c] {
                    tab.beta[r] = 0.0;
                }
            }
        }
    }
    let artificial = tab.artificial.clone();
    match tab.optimize(&cost, &|c| !artificial[c], deadline)? {
        Phase::LimitHit => return Ok(LpResult::LimitHit),
        Phase::Unbounded => return Ok(LpResult::Unbounded),
        Phase::Optimal => {}
    }
    tab.refine();

    let x = maps
        .iter()
        .map(|m| match *m {
            ColumnMap::Shift { col, lower } => lower + tab.value(col),
            ColumnMap::Mirror { col, upper } => upper - tab.value(col),
            ColumnMap::Split { pos, neg } => tab.value(pos) - tab.value(neg),
        })
        .collect();
    Ok(LpResult::Optimal(x))
}

/// Depth-first branch-and-bound on the binary variables.
fn branch_and_bound(
    p: &MixedIntegerProgram,
    time_limit: Option<Duration>,
    max_nodes: usize,
) -> Result<RawOutcome, SolverError> {
    let deadline = time_limit.map(|d| Instant::now() + d);
    let lp = &p.lp;
    let sign = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let base: Vec<(f64, f64)> = lp.variables.iter().map(|v| (v.lower, v.upper)).collect();
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut stack: Vec<Vec<(usize, f64)>> = vec![Vec::new()];
    let mut nodes = 0usize;
    let mut root_unbounded = false;

    while let Some(fixes) = stack.pop() {
        nodes += 1;
        if nodes > max_nodes {
            return Ok(RawOutcome::LimitHit);
        }
        if deadline.is_some_and(|dl| Instant::now() > dl) {
            return Ok(RawOutcome::LimitHit);
        }
        let mut bounds = base.clone();
        for &(j, v) in &fixes {
            bounds[j] = (v, v);
        }
        let x = match solve_bounded(lp, &bounds, deadline)? {
            LpResult::Optimal(x) => x,
            LpResult::Infeasible => continue,
            LpResult::Unbounded => {
                if fixes.is_empty() {
                    root_unbounded = true;
                    break;
                }
                continue;
            }
            LpResult::LimitHit => return Ok(RawOutcome::LimitHit),
        };
        let obj = sign * lp.evaluate(&x);
        if let Some((best, _)) = &incumbent {
            if obj >= best - 1e-9 * (1.0 + best.abs()) {
                continue;
            }
        }
        let branch = p
            .binary
            .iter()
            .enumerate()
            .filter(|&(j, &b)| b && (x[j] - x[j].round()).abs() > INTEGRALITY_TOL)
            .map(|(j, _)| (j, (x[j] - 0.5).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match branch {
            None => incumbent = Some((obj, x)),
            Some((j, _)) => {
                let near = x[j].round();
                let mut far = fixes.clone();
                far.push((j, 1.0 - near));
                let mut close = fixes;
                close.push((j, near));
                stack.push(far);
                stack.push(close);
            }
        }
    }
    if root_unbounded {
        return Ok(RawOutcome::Unbounded);
    }
    Ok(match incumbent {
        Some((_, x)) => RawOutcome::optimal(x),
        None => RawOutcome::Infeasible,
    })
}
