//! Mathematical-program types and the solver backend contract.
//!
//! Every algorithm in this crate reduces to one of three program classes:
//! linear programs, mixed-integer programs whose integer variables are binary,
//! and convex quadratic programs with linear constraints. Programs are plain
//! values built with [`LinearProgram`] and friends; a [`Backend`] turns them
//! into a [`SolveOutcome`].
//!
//! Two backends ship with the crate:
//!
//! - [`MicrolpBackend`], an adapter over the `microlp` sparse simplex and
//!   branch-and-bound engine. This is the default.
//! - [`DenseBackend`], a self-contained dense bounded simplex with a
//!   depth-first branch-and-bound. It has no dependencies beyond `nalgebra` and
//!   is used as the reference implementation in cross-checks.
//!
//! Quadratic programs are solved by the dual active-set method in [`qp`] for
//! both backends.
//!
//! Outcomes are verified after every solve: an `Optimal` status guarantees the
//! returned point satisfies every row and bound within [`FEASIBILITY_TOL`]
//! (relative to the row scale), and binaries are exactly 0 or 1.

mod dense;
mod lp_format;
mod microlp_backend;
pub mod qp;

use std::fmt;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dense::DenseBackend;
pub use lp_format::write_lp_format;
pub use microlp_backend::MicrolpBackend;

/// Primal feasibility tolerance for LP and MILP outcomes.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// KKT residual bound for QP outcomes.
pub const KKT_TOL: f64 = 1e-6;
/// Distance from {0,1} at which a binary counts as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("solver backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("quadratic term is not positive semidefinite: {0}")]
    NonConvex(String),
    #[error("malformed program: {0}")]
    InvalidProgram(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

/// Handle to a variable of a program; the index into its variable list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(Var, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * x[v.0]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }

    fn scale(&self, x: &[f64]) -> f64 {
        let terms = self
            .terms
            .iter()
            .map(|&(v, a)| (a * x[v.0]).abs())
            .fold(0.0, f64::max);
        1.0 + terms.max(self.rhs.abs())
    }
}

/// A linear program: `min|max c·x + offset` subject to linear rows and bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub variables: Vec<Variable>,
    pub objective: Vec<f64>,
    pub objective_offset: f64,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        Self {
            sense,
            variables: Vec::new(),
            objective: Vec::new(),
            objective_offset: 0.0,
            constraints: Vec::new(),
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> Var {
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
        });
        self.objective.push(cost);
        Var(self.variables.len() - 1)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(Var, f64)>,
        relation: Relation,
        rhs: f64,
    ) {
        self.constraints.push(Constraint {
            name: name.into(),
            terms,
            relation,
            rhs,
        });
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective_offset + self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    /// Largest relative row or bound violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|c| c.violation(x) / c.scale(x))
            .fold(0.0, f64::max);
        let bounds = self
            .variables
            .iter()
            .zip(x)
            .map(|(v, &xi)| {
                let under = (v.lower - xi).max(0.0);
                let over = (xi - v.upper).max(0.0);
                under.max(over) / (1.0 + xi.abs())
            })
            .fold(0.0, f64::max);
        rows.max(bounds)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.objective.len() != self.variables.len() {
            return Err(SolverError::InvalidProgram(format!(
                "objective has {} coefficients for {} variables",
                self.objective.len(),
                self.variables.len()
            )));
        }
        for v in &self.variables {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(SolverError::InvalidProgram(format!(
                    "variable {} has bounds [{}, {}]",
                    v.name, v.lower, v.upper
                )));
            }
            if v.lower == f64::INFINITY || v.upper == f64::NEG_INFINITY {
                return Err(SolverError::InvalidProgram(format!(
                    "variable {} has an empty domain",
                    v.name
                )));
            }
        }
        for c in &self.constraints {
            if !c.rhs.is_finite() {
                return Err(SolverError::InvalidProgram(format!(
                    "row {} has non-finite rhs",
                    c.name
                )));
            }
            for &(v, a) in &c.terms {
                if v.0 >= self.variables.len() {
                    return Err(SolverError::InvalidProgram(format!(
                        "row {} references undeclared variable {}",
                        c.name, v.0
                    )));
                }
                if !a.is_finite() {
                    return Err(SolverError::InvalidProgram(format!(
                        "row {} has a non-finite coefficient",
                        c.name
                    )));
                }
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(SolverError::InvalidProgram("non-finite objective".into()));
        }
        Ok(())
    }
}

/// A linear program in which some variables are restricted to {0, 1}.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedIntegerProgram {
    pub lp: LinearProgram,
    pub binary: Vec<bool>,
}

impl MixedIntegerProgram {
    pub fn new(sense: Sense) -> Self {
        Self {
            lp: LinearProgram::new(sense),
            binary: Vec::new(),
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> Var {
        self.binary.push(false);
        self.lp.add_var(name, lower, upper, cost)
    }

    pub fn add_binary(&mut self, name: impl Into<String>, cost: f64) -> Var {
        self.binary.push(true);
        self.lp.add_var(name, 0.0, 1.0, cost)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(Var, f64)>,
        relation: Relation,
        rhs: f64,
    ) {
        self.lp.add_constraint(name, terms, relation, rhs);
    }

    pub fn num_binaries(&self) -> usize {
        self.binary.iter().filter(|&&b| b).count()
    }

    pub fn num_continuous(&self) -> usize {
        self.binary.len() - self.num_binaries()
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        self.lp.validate()?;
        if self.binary.len() != self.lp.variables.len() {
            return Err(SolverError::InvalidProgram(
                "binary flags do not cover every variable".into(),
            ));
        }
        for (v, &b) in self.lp.variables.iter().zip(&self.binary) {
            if b && (v.lower != 0.0 || v.upper != 1.0) {
                return Err(SolverError::InvalidProgram(format!(
                    "binary variable {} must have bounds [0, 1]",
                    v.name
                )));
            }
        }
        Ok(())
    }

    /// Same program with binaries fixed to the given 0/1 values.
    pub fn fixed(&self, values: &[f64]) -> LinearProgram {
        let mut lp = self.lp.clone();
        for (i, &b) in self.binary.iter().enumerate() {
            if b {
                let v = values[i].round().clamp(0.0, 1.0);
                lp.variables[i].lower = v;
                lp.variables[i].upper = v;
            }
        }
        lp
    }
}

/// `min ½ xᵀQx + c·x + offset` subject to the rows and bounds of `lp`.
///
/// `quadratic` is a dense, row-major `n × n` symmetric matrix. Only
/// minimization is accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticProgram {
    pub lp: LinearProgram,
    pub quadratic: Vec<f64>,
}

impl QuadraticProgram {
    pub fn new() -> Self {
        Self {
            lp: LinearProgram::new(Sense::Minimize),
            quadratic: Vec::new(),
        }
    }

    /// Adds a variable; the quadratic matrix grows with a zero row and column.
    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> Var {
        let n = self.lp.num_vars();
        let mut q = vec![0.0; (n + 1) * (n + 1)];
        for i in 0..n {
            for j in 0..n {
                q[i * (n + 1) + j] = self.quadratic[i * n + j];
            }
        }
        self.quadratic = q;
        self.lp.add_var(name, lower, upper, cost)
    }

    /// Adds `value` to both `Q[i][j]` and `Q[j][i]` (once on the diagonal).
    pub fn add_quadratic(&mut self, i: Var, j: Var, value: f64) {
        let n = self.lp.num_vars();
        self.quadratic[i.0 * n + j.0] += value;
        if i != j {
            self.quadratic[j.0 * n + i.0] += value;
        }
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(Var, f64)>,
        relation: Relation,
        rhs: f64,
    ) {
        self.lp.add_constraint(name, terms, relation, rhs);
    }

    pub fn q(&self, i: usize, j: usize) -> f64 {
        self.quadratic[i * self.lp.num_vars() + j]
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let n = self.lp.num_vars();
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += x[i] * self.quadratic[i * n + j] * x[j];
            }
        }
        0.5 * quad + self.lp.evaluate(x)
    }

    pub fn is_zero_quadratic(&self) -> bool {
        self.quadratic.iter().all(|&q| q == 0.0)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        self.lp.validate()?;
        let n = self.lp.num_vars();
        if self.quadratic.len() != n * n {
            return Err(SolverError::InvalidProgram(
                "quadratic matrix has the wrong size".into(),
            ));
        }
        if self.lp.sense != Sense::Minimize {
            return Err(SolverError::NonConvex(
                "quadratic programs must be minimized".into(),
            ));
        }
        for i in 0..n {
            if self.q(i, i) < 0.0 {
                return Err(SolverError::NonConvex(format!(
                    "negative diagonal entry {} on variable {}",
                    self.q(i, i),
                    self.lp.variables[i].name
                )));
            }
            for j in 0..i {
                let (a, b) = (self.q(i, j), self.q(j, i));
                if (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
                    return Err(SolverError::NonConvex("quadratic matrix is not symmetric".into()));
                }
            }
        }
        Ok(())
    }
}

impl Default for QuadraticProgram {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    LimitHit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Present iff `status == Optimal`.
    pub values: Option<Vec<f64>>,
    pub objective: Option<f64>,
    pub wall_time: Duration,
    /// Only reported by QP solves that produce multipliers.
    pub kkt_residual: Option<f64>,
}

impl SolveOutcome {
    pub fn without_point(status: SolveStatus, wall_time: Duration) -> Self {
        Self {
            status,
            values: None,
            objective: None,
            wall_time,
            kkt_residual: None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Values of an optimal outcome; `None` otherwise.
    pub fn point(&self) -> Option<&[f64]> {
        self.values.as_deref()
    }

    pub fn value(&self, v: Var) -> f64 {
        self.values.as_ref().expect("outcome has no point")[v.0]
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    pub time_limit: Option<Duration>,
}

impl SolveOptions {
    pub fn with_time_limit(limit: Duration) -> Self {
        Self {
            time_limit: Some(limit),
        }
    }
}

/// A concrete LP/MILP/QP engine.
///
/// Implementors provide the `*_raw` methods; callers use the provided
/// `solve_*` methods, which validate the program, time the solve and verify
/// the returned point.
pub trait Backend: Send + Sync {
    fn name(&self) -> &'static str;

    fn solve_lp_raw(&self, p: &LinearProgram, opts: &SolveOptions) -> Result<RawOutcome, SolverError>;

    fn solve_milp_raw(
        &self,
        p: &MixedIntegerProgram,
        opts: &SolveOptions,
    ) -> Result<RawOutcome, SolverError>;

    fn solve_qp_raw(&self, p: &QuadraticProgram, opts: &SolveOptions) -> Result<RawOutcome, SolverError> {
        qp::solve(self, p, opts)
    }

    fn solve_lp(&self, p: &LinearProgram, opts: &SolveOptions) -> Result<SolveOutcome, SolverError> {
        p.validate()?;
        let start = Instant::now();
        let raw = self.solve_lp_raw(p, opts)?;
        finish_linear(p, None, raw, start.elapsed())
    }

    fn solve_milp(
        &self,
        p: &MixedIntegerProgram,
        opts: &SolveOptions,
    ) -> Result<SolveOutcome, SolverError> {
        p.validate()?;
        let start = Instant::now();
        let mut raw = self.solve_milp_raw(p, opts)?;
        if let RawOutcome::Optimal { values, .. } = &mut raw {
            polish_integral(self, p, values, opts)?;
        }
        finish_linear(&p.lp, Some(&p.binary), raw, start.elapsed())
    }

    fn solve_qp(&self, p: &QuadraticProgram, opts: &SolveOptions) -> Result<SolveOutcome, SolverError> {
        p.validate()?;
        let start = Instant::now();
        let raw = self.solve_qp_raw(p, opts)?;
        let wall_time = start.elapsed();
        match raw {
            RawOutcome::Optimal { values, kkt_residual } => {
                let viol = p.lp.max_violation(&values);
                if viol > FEASIBILITY_TOL {
                    return Err(SolverError::NumericalFailure(format!(
                        "QP point violates constraints by {viol:e}"
                    )));
                }
                if let Some(r) = kkt_residual {
                    if r > KKT_TOL {
                        return Err(SolverError::NumericalFailure(format!(
                            "QP KKT residual {r:e} exceeds {KKT_TOL:e}"
                        )));
                    }
                }
                Ok(SolveOutcome {
                    status: SolveStatus::Optimal,
                    objective: Some(p.evaluate(&values)),
                    values: Some(values),
                    wall_time,
                    kkt_residual,
                })
            }
            other => Ok(SolveOutcome::without_point(other.status(), wall_time)),
        }
    }
}

/// What a backend hands back before verification.
#[derive(Debug, Clone, PartialEq)]
pub enum RawOutcome {
    Optimal {
        values: Vec<f64>,
        kkt_residual: Option<f64>,
    },
    Infeasible,
    Unbounded,
    LimitHit,
}

impl RawOutcome {
    pub fn optimal(values: Vec<f64>) -> Self {
        RawOutcome::Optimal {
            values,
            kkt_residual: None,
        }
    }

    pub fn status(&self) -> SolveStatus {
        match self {
            RawOutcome::Optimal { .. } => SolveStatus::Optimal,
            RawOutcome::Infeasible => SolveStatus::Infeasible,
            RawOutcome::Unbounded => SolveStatus::Unbounded,
            RawOutcome::LimitHit => SolveStatus::LimitHit,
        }
    }
}

fn finish_linear(
    p: &LinearProgram,
    binary: Option<&[bool]>,
    raw: RawOutcome,
    wall_time: Duration,
) -> Result<SolveOutcome, SolverError> {
    let RawOutcome::Optimal { mut values, .. } = raw else {
        return Ok(SolveOutcome::without_point(raw.status(), wall_time));
    };
    if values.len() != p.num_vars() || values.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NumericalFailure(
            "backend returned a malformed point".into(),
        ));
    }
    if let Some(binary) = binary {
        for (x, &b) in values.iter_mut().zip(binary) {
            if b {
                if (*x - x.round()).abs() > INTEGRALITY_TOL {
                    return Err(SolverError::NumericalFailure(format!(
                        "binary variable at fractional value {x}"
                    )));
                }
                *x = x.round();
            }
        }
    }
    // Snap values that drifted a hair outside their bounds.
    for (x, v) in values.iter_mut().zip(&p.variables) {
        *x = x.clamp(v.lower, v.upper);
    }
    let viol = p.max_violation(&values);
    if viol > FEASIBILITY_TOL {
        return Err(SolverError::NumericalFailure(format!(
            "returned point violates constraints by {viol:e}"
        )));
    }
    Ok(SolveOutcome {
        status: SolveStatus::Optimal,
        objective: Some(p.evaluate(&values)),
        values: Some(values),
        wall_time,
        kkt_residual: None,
    })
}

/// Re-solves the continuous part with binaries fixed at their rounded values.
///
/// Branch-and-bound leaves binaries within the integrality tolerance of 0/1,
/// which lets big-M rows drift by `M` times that tolerance. Fixing the
/// binaries and re-solving the LP gives a point that satisfies every row to
/// simplex accuracy. The polished point is kept only if it is at least as good.
fn polish_integral<B: Backend + ?Sized>(
    backend: &B,
    p: &MixedIntegerProgram,
    values: &mut Vec<f64>,
    opts: &SolveOptions,
) -> Result<(), SolverError> {
    if !p.binary.iter().any(|&b| b) {
        return Ok(());
    }
    let fixed = p.fixed(values);
    let before = p.lp.evaluate(values);
    if let RawOutcome::Optimal { values: polished, .. } = backend.solve_lp_raw(&fixed, opts)? {
        let after = fixed.evaluate(&polished);
        let better_or_equal = match p.lp.sense {
            Sense::Minimize => after <= before + 1e-6 * (1.0 + before.abs()),
            Sense::Maximize => after >= before - 1e-6 * (1.0 + before.abs()),
        };
        if better_or_equal {
            *values = polished;
        }
    }
    Ok(())
}

/// Wraps another backend and writes every program it sees to a directory in
/// LP file format before solving it.
pub struct DumpingBackend<'a> {
    inner: &'a dyn Backend,
    dir: PathBuf,
    counter: AtomicUsize,
}

impl<'a> DumpingBackend<'a> {
    pub fn new(inner: &'a dyn Backend, dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            inner,
            dir,
            counter: AtomicUsize::new(0),
        })
    }

    fn dump(&self, kind: &str, text: String) -> Result<(), SolverError> {
        let id = self.counter.fetch_add(1, Ordering::Relaxed);
        let path = self.dir.join(format!("{kind}_{id:06}.lp"));
        std::fs::write(&path, text).map_err(|e| {
            SolverError::BackendUnavailable(format!("cannot write {}: {e}", path.display()))
        })
    }
}

impl Backend for DumpingBackend<'_> {
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    fn solve_lp_raw(&self, p: &LinearProgram, opts: &SolveOptions) -> Result<RawOutcome, SolverError> {
        self.dump("lp", write_lp_format(p, None, None))?;
        self.inner.solve_lp_raw(p, opts)
    }

    fn solve_milp_raw(
        &self,
        p: &MixedIntegerProgram,
        opts: &SolveOptions,
    ) -> Result<RawOutcome, SolverError> {
        self.dump("milp", write_lp_format(&p.lp, Some(&p.binary), None))?;
        self.inner.solve_milp_raw(p, opts)
    }

    fn solve_qp_raw(&self, p: &QuadraticProgram, opts: &SolveOptions) -> Result<RawOutcome, SolverError> {
        self.dump("qp", write_lp_format(&p.lp, None, Some(&p.quadratic)))?;
        self.inner.solve_qp_raw(p, opts)
    }
}

/// Backend selector used by configuration files and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Microlp,
    Dense,
}

impl BackendKind {
    pub fn backend(self) -> &'static dyn Backend {
        static MICROLP: MicrolpBackend = MicrolpBackend;
        static DENSE: DenseBackend = DenseBackend::new();
        match self {
            BackendKind::Microlp => &MICROLP,
            BackendKind::Dense => &DENSE,
        }
    }
}

impl std::str::FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "microlp" => Ok(BackendKind::Microlp),
            "dense" => Ok(BackendKind::Dense),
            other => Err(format!("unknown backend `{other}` (expected microlp or dense)")),
        }
    }
}

/// The backend algorithms use when the caller does not pick one.
pub fn default_backend() -> &'static dyn Backend {
    BackendKind::default().backend()
}

#[cfg(test)]
mod tests;
