//! Finitely supported distributions, polytope ambiguity sets and Wasserstein
//! balls, with the transport and worst-case-expectation LPs.

use std::borrow::Cow;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::FollowerUtility;
use crate::matrix::Matrix;
use crate::solver::{default_backend, LinearProgram, Relation, Sense, SolveOptions, SolveStatus, Var};

/// Distance between follower utility matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroundMetric {
    /// Frobenius norm of the difference.
    #[default]
    Frobenius,
}

impl GroundMetric {
    fn eval(self, u1: &Matrix, u2: &Matrix) -> f64 {
        match self {
            GroundMetric::Frobenius => u1.frobenius_sq(u2).sqrt(),
        }
    }

    /// `d(u1, u2)^t`, avoiding the square root for Frobenius with `t = 2`.
    pub fn cost(self, u1: &Matrix, u2: &Matrix, t: f64) -> f64 {
        match self {
            GroundMetric::Frobenius if t == 2.0 => u1.frobenius_sq(u2),
            _ => self.eval(u1, u2).powf(t),
        }
    }
}

pub fn ground_distance(metric: GroundMetric, u1: &FollowerUtility, u2: &FollowerUtility) -> Result<f64> {
    if u1.shape() != u2.shape() {
        return Err(Error::DimensionMismatch(format!(
            "cannot compare {:?} with {:?}",
            u1.shape(),
            u2.shape()
        )));
    }
    Ok(metric.eval(u1, u2))
}

/// A finitely supported probability measure over follower utilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    pub weights: Vec<f64>,
    pub support: Vec<FollowerUtility>,
}

impl Distribution {
    pub fn new(weights: Vec<f64>, support: Vec<FollowerUtility>) -> Result<Self> {
        check_probability(&weights)?;
        if weights.len() != support.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} support points",
                weights.len(),
                support.len()
            )));
        }
        if let Some(first) = support.first() {
            if support.iter().any(|u| u.shape() != first.shape()) {
                return Err(Error::DimensionMismatch("support matrices differ in shape".into()));
            }
        }
        Ok(Self { weights, support })
    }

    pub fn uniform(support: Vec<FollowerUtility>) -> Result<Self> {
        let k = support.len();
        Self::new(vec![1.0 / k as f64; k], support)
    }

    pub fn point_mass(u: FollowerUtility) -> Self {
        Self {
            weights: vec![1.0],
            support: vec![u],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Parses the distribution document; index supports are resolved against
    /// `universe`.
    pub fn from_json(text: &str, universe: Option<&[FollowerUtility]>) -> Result<Self> {
        let doc: DistributionDoc = serde_json::from_str(text)?;
        doc.resolve(universe)
    }
}

/// Serialized form of a [`Distribution`]: the support is either a list of
/// matrices or a list of indices into a game's finite universe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionDoc {
    pub weights: Vec<f64>,
    pub support: SupportDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SupportDoc {
    Indices(Vec<usize>),
    Matrices(Vec<Matrix>),
}

impl DistributionDoc {
    pub fn resolve(self, universe: Option<&[FollowerUtility]>) -> Result<Distribution> {
        Distribution::new(self.weights, self.support.resolve(universe)?)
    }
}

impl SupportDoc {
    pub fn resolve(self, universe: Option<&[FollowerUtility]>) -> Result<Vec<FollowerUtility>> {
        Ok(match self {
            SupportDoc::Matrices(ms) => ms,
            SupportDoc::Indices(idx) => {
                let universe = universe.ok_or_else(|| {
                    Error::InvalidInput("index support needs a finite universe".into())
                })?;
                idx.iter()
                    .map(|&i| {
                        universe.get(i).cloned().ok_or_else(|| {
                            Error::InvalidInput(format!("support index {i} out of range"))
                        })
                    })
                    .collect::<Result<_>>()?
            }
        })
    }
}

fn check_probability(w: &[f64]) -> Result<()> {
    if w.is_empty() {
        return Err(Error::InvalidInput("empty probability vector".into()));
    }
    if w.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::InvalidInput("negative or NaN weight".into()));
    }
    let s: f64 = w.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("weights sum to {s}")));
    }
    Ok(())
}

/// `{μ ∈ Δ^k : Aμ ≤ b}` over a fixed finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct PolytopeSet {
    pub support: Vec<FollowerUtility>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl PolytopeSet {
    /// Validates shapes and checks non-emptiness with one feasibility LP.
    pub fn new(support: Vec<FollowerUtility>, a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let k = support.len();
        if k == 0 {
            return Err(Error::InvalidInput("polytope support is empty".into()));
        }
        if a.len() != b.len() || a.iter().any(|r| r.len() != k) {
            return Err(Error::DimensionMismatch("polytope rows must have k entries".into()));
        }
        let set = Self { support, a, b };
        let probe = set.minimize(&vec![0.0; k])?;
        if probe.is_none() {
            return Err(Error::InvalidInput("polytope ambiguity set is empty".into()));
        }
        Ok(set)
    }

    pub fn full_simplex(support: Vec<FollowerUtility>) -> Result<Self> {
        Self::new(support, Vec::new(), Vec::new())
    }

    /// The set containing only `ν`.
    pub fn singleton(nu: &Distribution) -> Result<Self> {
        let k = nu.len();
        let mut a = Vec::with_capacity(2 * k);
        let mut b = Vec::with_capacity(2 * k);
        for i in 0..k {
            let mut e = vec![0.0; k];
            e[i] = 1.0;
            a.push(e.clone());
            b.push(nu.weights[i]);
            a.push(e.iter().map(|v| -v).collect());
            b.push(-nu.weights[i]);
        }
        Self::new(nu.support.clone(), a, b)
    }

    pub fn k(&self) -> usize {
        self.support.len()
    }

    fn minimize(&self, values: &[f64]) -> Result<Option<WorstCase>> {
        let k = self.k();
        let mut lp = LinearProgram::new(Sense::Minimize);
        let mu: Vec<Var> = (0..k)
            .map(|i| lp.add_var(format!("mu{i}"), 0.0, f64::INFINITY, values[i]))
            .collect();
        lp.add_constraint("simplex", mu.iter().map(|&v| (v, 1.0)).collect(), Relation::Eq, 1.0);
        for (r, (row, &rhs)) in self.a.iter().zip(&self.b).enumerate() {
            let terms = mu.iter().zip(row).map(|(&v, &c)| (v, c)).collect();
            lp.add_constraint(format!("a{r}"), terms, Relation::Le, rhs);
        }
        let out = default_backend().solve_lp(&lp, &SolveOptions::default())?;
        match out.status {
            SolveStatus::Optimal => Ok(Some(WorstCase {
                value: out.objective.unwrap_or(0.0),
                distribution: mu.iter().map(|&v| out.value(v)).collect(),
            })),
            SolveStatus::Infeasible => Ok(None),
            other => Err(Error::Solver(crate::solver::SolverError::NumericalFailure(format!(
                "polytope LP ended with {other:?}"
            )))),
        }
    }
}

/// `{μ : W_t(μ, ν) ≤ θ}` around a finitely supported nominal `ν`.
#[derive(Debug)]
pub struct WassersteinBall {
    pub nominal: Distribution,
    pub radius: f64,
    pub exponent: f64,
    pub metric: GroundMetric,
    costs: OnceLock<Vec<f64>>,
}

impl Clone for WassersteinBall {
    fn clone(&self) -> Self {
        Self {
            nominal: self.nominal.clone(),
            radius: self.radius,
            exponent: self.exponent,
            metric: self.metric,
            costs: self.costs.clone(),
        }
    }
}

impl WassersteinBall {
    pub fn new(nominal: Distribution, radius: f64, exponent: f64, metric: GroundMetric) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::InvalidInput(format!("radius {radius} must be finite and >= 0")));
        }
        if !(exponent >= 1.0) || !exponent.is_finite() {
            return Err(Error::InvalidInput(format!("exponent {exponent} must be >= 1")));
        }
        Ok(Self {
            nominal,
            radius,
            exponent,
            metric,
            costs: OnceLock::new(),
        })
    }

    pub fn k(&self) -> usize {
        self.nominal.len()
    }

    /// `θ^t`.
    pub fn budget(&self) -> f64 {
        self.radius.powf(self.exponent)
    }

    /// `d^t(u, û_j)` for every nominal point `j`.
    pub fn cost_to_nominal(&self, u: &FollowerUtility) -> Vec<f64> {
        self.nominal
            .support
            .iter()
            .map(|v| self.metric.cost(u, v, self.exponent))
            .collect()
    }

    /// Row-major `k × k` matrix of `d^t` between nominal support points,
    /// computed once.
    pub fn nominal_costs(&self) -> &[f64] {
        self.costs.get_or_init(|| {
            let s = &self.nominal.support;
            let mut c = Vec::with_capacity(s.len() * s.len());
            for u in s {
                c.extend(self.cost_to_nominal(u));
            }
            c
        })
    }

    /// Row-major `|candidates| × k` cost matrix, served from the cache when
    /// the candidates are the nominal support itself.
    pub fn costs_from<'a>(&'a self, candidates: &[FollowerUtility]) -> Cow<'a, [f64]> {
        if candidates == self.nominal.support.as_slice() {
            return Cow::Borrowed(self.nominal_costs());
        }
        Cow::Owned(candidates.iter().flat_map(|u| self.cost_to_nominal(u)).collect())
    }

    /// Largest ground distance between two nominal points.
    pub fn support_diameter(&self) -> f64 {
        let s = &self.nominal.support;
        let mut d: f64 = 0.0;
        for u in s {
            for v in s {
                d = d.max(self.metric.eval(u, v));
            }
        }
        d
    }
}

#[derive(Debug, Clone)]
pub enum AmbiguitySpec {
    Polytope(PolytopeSet),
    Wasserstein(WassersteinBall),
}

/// Result of a worst-case expectation: `inf E_μ[h]` and an attaining `μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct WorstCase {
    pub value: f64,
    pub distribution: Vec<f64>,
}

impl AmbiguitySpec {
    /// Support points the worst case ranges over when none are supplied.
    pub fn support(&self) -> &[FollowerUtility] {
        match self {
            AmbiguitySpec::Polytope(p) => &p.support,
            AmbiguitySpec::Wasserstein(b) => &b.nominal.support,
        }
    }

    /// `inf_μ Σ_i μ_i values_i` with candidate utilities `candidates`.
    ///
    /// For polytopes the candidates must be the polytope's support. For a
    /// Wasserstein ball the candidates may be any finite set (typically the
    /// game's finite universe) and the LP runs over transport plans from the
    /// candidates to the nominal support.
    pub fn worstcase_over(&self, candidates: &[FollowerUtility], values: &[f64]) -> Result<WorstCase> {
        if values.len() != candidates.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} candidates",
                values.len(),
                candidates.len()
            )));
        }
        match self {
            AmbiguitySpec::Polytope(p) => {
                if candidates.len() != p.k() {
                    return Err(Error::DimensionMismatch(
                        "polytope values must cover its support".into(),
                    ));
                }
                p.minimize(values)?.ok_or_else(|| {
                    Error::InvalidInput("polytope ambiguity set is empty".into())
                })
            }
            AmbiguitySpec::Wasserstein(ball) => wasserstein_worstcase(ball, candidates, values),
        }
    }
}

/// Worst-case expectation over the ambiguity set's own support.
pub fn worstcase_expectation(amb: &AmbiguitySpec, values: &[f64]) -> Result<WorstCase> {
    amb.worstcase_over(amb.support(), values)
}

fn wasserstein_worstcase(ball: &WassersteinBall, candidates: &[FollowerUtility], values: &[f64]) -> Result<WorstCase> {
    let k = ball.k();
    let c = candidates.len();
    let costs = ball.costs_from(candidates);
    let mut lp = LinearProgram::new(Sense::Minimize);
    let mut gamma = Vec::with_capacity(c * k);
    for i in 0..c {
        for j in 0..k {
            gamma.push(lp.add_var(format!("g{i}_{j}"), 0.0, f64::INFINITY, values[i]));
        }
    }
    for j in 0..k {
        let terms = (0..c).map(|i| (gamma[i * k + j], 1.0)).collect();
        lp.add_constraint(format!("nu{j}"), terms, Relation::Eq, ball.nominal.weights[j]);
    }
    let budget_terms = gamma.iter().zip(costs.iter()).map(|(&g, &d)| (g, d)).collect();
    lp.add_constraint("budget", budget_terms, Relation::Le, ball.budget());
    let out = default_backend().solve_lp(&lp, &SolveOptions::default())?;
    if !out.is_optimal() {
        return Err(Error::InvalidInput(format!(
            "worst-case transport LP ended with {:?}; the candidates must be able to reach the nominal",
            out.status
        )));
    }
    let distribution = (0..c)
        .map(|i| (0..k).map(|j| out.value(gamma[i * k + j])).sum())
        .collect();
    Ok(WorstCase {
        value: out.objective.unwrap_or(0.0),
        distribution,
    })
}

fn transport_costs(mu: &Distribution, nu: &Distribution, t: f64, metric: GroundMetric) -> Result<Vec<f64>> {
    let mut c = Vec::with_capacity(mu.len() * nu.len());
    for u in &mu.support {
        for v in &nu.support {
            if u.shape() != v.shape() {
                return Err(Error::DimensionMismatch("support shapes differ".into()));
            }
            c.push(metric.cost(u, v, t));
        }
    }
    Ok(c)
}

/// Optimal transport between two finitely supported distributions.
///
/// Returns `W_t(μ, ν)` and the optimal plan (`|μ| × |ν|`).
pub fn wasserstein_primal(mu: &Distribution, nu: &Distribution, t: f64, metric: GroundMetric) -> Result<(f64, Matrix)> {
    let (p, q) = (mu.len(), nu.len());
    let costs = transport_costs(mu, nu, t, metric)?;
    let mut lp = LinearProgram::new(Sense::Minimize);
    let plan: Vec<Var> = (0..p * q)
        .map(|idx| lp.add_var(format!("g{}_{}", idx / q, idx % q), 0.0, f64::INFINITY, costs[idx]))
        .collect();
    for i in 0..p {
        let terms = (0..q).map(|j| (plan[i * q + j], 1.0)).collect();
        lp.add_constraint(format!("mu{i}"), terms, Relation::Eq, mu.weights[i]);
    }
    for j in 0..q {
        let terms = (0..p).map(|i| (plan[i * q + j], 1.0)).collect();
        lp.add_constraint(format!("nu{j}"), terms, Relation::Eq, nu.weights[j]);
    }
    let out = default_backend().solve_lp(&lp, &SolveOptions::default())?;
    let obj = out.objective.ok_or_else(|| {
        Error::Solver(crate::solver::SolverError::NumericalFailure(format!(
            "transport LP ended with {:?}",
            out.status
        )))
    })?;
    let gamma = Matrix::from_vec(p, q, plan.iter().map(|&v| out.value(v)).collect())?;
    Ok((obj.max(0.0).powf(1.0 / t), gamma))
}

/// Kantorovich dual `max r·μ + s·ν` s.t. `r_i + s_j ≤ d^t(u_i, v_j)`.
///
/// Equals `wasserstein_primal(..).0^t` by LP duality.
pub fn wasserstein_dual(mu: &Distribution, nu: &Distribution, t: f64, metric: GroundMetric) -> Result<f64> {
    let (p, q) = (mu.len(), nu.len());
    let costs = transport_costs(mu, nu, t, metric)?;
    let mut lp = LinearProgram::new(Sense::Maximize);
    let r: Vec<Var> = (0..p)
        .map(|i| lp.add_var(format!("r{i}"), f64::NEG_INFINITY, f64::INFINITY, mu.weights[i]))
        .collect();
    let s: Vec<Var> = (0..q)
        .map(|j| lp.add_var(format!("s{j}"), f64::NEG_INFINITY, f64::INFINITY, nu.weights[j]))
        .collect();
    for i in 0..p {
        for j in 0..q {
            lp.add_constraint(
                format!("c{i}_{j}"),
                vec![(r[i], 1.0), (s[j], 1.0)],
                Relation::Le,
                costs[i * q + j],
            );
        }
    }
    let out = default_backend().solve_lp(&lp, &SolveOptions::default())?;
    out.objective.ok_or_else(|| {
        Error::Solver(crate::solver::SolverError::NumericalFailure(format!(
            "transport dual ended with {:?}",
            out.status
        )))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m1(v: f64) -> Matrix {
        Matrix::from_vec(1, 1, vec![v]).unwrap()
    }

    #[test]
    fn ground_distance_examples() {
        let u = Matrix::filled(2, 2, 0.3);
        assert_eq!(ground_distance(GroundMetric::Frobenius, &u, &u).unwrap(), 0.0);
        let d = ground_distance(GroundMetric::Frobenius, &m1(0.2), &m1(0.7)).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
        let d = ground_distance(GroundMetric::Frobenius, &Matrix::zeros(2, 2), &Matrix::filled(2, 2, 1.0)).unwrap();
        assert!((d - 2.0).abs() < 1e-15);
        assert!(ground_distance(GroundMetric::Frobenius, &m1(0.0), &Matrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn transport_examples() {
        let (u1, u2) = (m1(0.2), m1(0.7));
        let mu = Distribution::new(vec![0.5, 0.5], vec![u1.clone(), u2.clone()]).unwrap();
        let (w, _) = wasserstein_primal(&mu, &mu, 2.0, GroundMetric::Frobenius).unwrap();
        assert!(w.abs() < 1e-7);
        let a = Distribution::point_mass(u1.clone());
        let b = Distribution::point_mass(u2.clone());
        let (w, plan) = wasserstein_primal(&a, &b, 2.0, GroundMetric::Frobenius).unwrap();
        assert!((w - 0.5).abs() < 1e-9);
        assert!((plan[(0, 0)] - 1.0).abs() < 1e-9);
        let dual = wasserstein_dual(&a, &b, 2.0, GroundMetric::Frobenius).unwrap();
        assert!((dual - 0.25).abs() < 1e-9);
        let nu = Distribution::new(vec![1.0, 0.0], vec![u1, u2]).unwrap();
        for t in [1.0, 2.0, 3.0] {
            let (w, _) = wasserstein_primal(&mu, &nu, t, GroundMetric::Frobenius).unwrap();
            let expect = (0.5 * 0.5f64.powf(t)).powf(1.0 / t);
            assert!((w - expect).abs() < 1e-7, "t={t}: {w} vs {expect}");
        }
    }

    #[test]
    fn worstcase_examples() {
        let support = vec![m1(0.0), m1(0.5), m1(1.0)];
        let nu = Distribution::new(vec![0.2, 0.3, 0.5], support.clone()).unwrap();
        let h = [0.9, 0.4, 0.7];
        let single = AmbiguitySpec::Polytope(PolytopeSet::singleton(&nu).unwrap());
        let wc = worstcase_expectation(&single, &h).unwrap();
        assert!((wc.value - (0.18 + 0.12 + 0.35)).abs() < 1e-9);
        let full = AmbiguitySpec::Polytope(PolytopeSet::full_simplex(support.clone()).unwrap());
        assert!((worstcase_expectation(&full, &h).unwrap().value - 0.4).abs() < 1e-9);
        let ball = AmbiguitySpec::Wasserstein(WassersteinBall::new(nu.clone(), 0.0, 2.0, GroundMetric::Frobenius).unwrap());
        assert!((worstcase_expectation(&ball, &h).unwrap().value - 0.65).abs() < 1e-9);
        // Radius 1 reaches every point from every point: worst case is min h.
        let ball = AmbiguitySpec::Wasserstein(WassersteinBall::new(nu, 1.0, 2.0, GroundMetric::Frobenius).unwrap());
        assert!((worstcase_expectation(&ball, &h).unwrap().value - 0.4).abs() < 1e-9);
    }

    #[test]
    fn empty_polytope_rejected() {
        let support = vec![m1(0.0), m1(1.0)];
        let err = PolytopeSet::new(support, vec![vec![1.0, 1.0]], vec![0.5]).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn distribution_json_supports_indices_and_matrices() {
        let universe = vec![m1(0.1), m1(0.9)];
        let d = Distribution::from_json(r#"{"weights":[0.25,0.75],"support":[1,0]}"#, Some(&universe)).unwrap();
        assert_eq!(d.support, vec![m1(0.9), m1(0.1)]);
        let d2 = Distribution::from_json(&serde_json::to_string(&d).unwrap(), None).unwrap();
        assert_eq!(d, d2);
        assert!(Distribution::from_json(r#"{"weights":[1.0],"support":[3]}"#, Some(&universe)).is_err());
        assert!(Distribution::new(vec![0.6, 0.6], universe).is_err());
    }
}
