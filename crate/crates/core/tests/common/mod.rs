//! Reference computations shared by the integration and acceptance tests.
//!
//! None of these route through the formulations under test: the SSE oracle
//! solves one LP per follower action on the dense backend, and the inspection
//! oracle scans a leader-strategy grid against sampled family members.
#![allow(dead_code)]

use drstack::ambiguity::Distribution;
use drstack::game::{self, InspectionPayoffs};
use drstack::games::rng::Stream;
use drstack::solver::{BackendKind, LinearProgram, Relation, Sense, SolveOptions};
use drstack::{FollowerUniverse, GameInstance, Matrix};

pub fn random_matrix(rng: &mut Stream, n: usize, m: usize) -> Matrix {
    Matrix::from_fn(n, m, |_, _| rng.unit())
}

/// A game with `k` random follower utilities as its finite universe.
pub fn random_game(rng: &mut Stream, n: usize, m: usize, k: usize) -> GameInstance {
    let u_l = random_matrix(rng, n, m);
    let us = (0..k).map(|_| random_matrix(rng, n, m)).collect();
    GameInstance::finite(u_l, us).unwrap()
}

pub fn random_distribution(rng: &mut Stream, support: Vec<Matrix>) -> Distribution {
    let w = rng.probability_vector(support.len());
    Distribution::new(w, support).unwrap()
}

/// Strong Stackelberg value by one LP per follower action: maximize the
/// leader payoff of `a` over strategies that make `a` a best response.
pub fn sse_by_lps(u_l: &Matrix, u_f: &Matrix) -> f64 {
    let (n, m) = (u_l.rows(), u_l.cols());
    let backend = BackendKind::Dense.backend();
    let mut best = f64::NEG_INFINITY;
    for a in 0..m {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x: Vec<_> = (0..n).map(|i| lp.add_var(format!("x{i}"), 0.0, 1.0, u_l[(i, a)])).collect();
        lp.add_constraint("simplex", x.iter().map(|&v| (v, 1.0)).collect(), Relation::Eq, 1.0);
        for b in (0..m).filter(|&b| b != a) {
            let terms = (0..n).map(|i| (x[i], u_f[(i, a)] - u_f[(i, b)])).collect();
            lp.add_constraint(format!("br{b}"), terms, Relation::Ge, 0.0);
        }
        let out = backend.solve_lp(&lp, &SolveOptions::default()).unwrap();
        if let Some(v) = out.objective {
            best = best.max(v);
        }
    }
    best
}

/// Every point of `{x ∈ Δ^n : x_i ∈ (1/steps)ℤ}`.
pub fn simplex_grid(n: usize, steps: usize) -> Vec<Vec<f64>> {
    fn rec(n: usize, left: usize, steps: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() == n - 1 {
            cur.push(left);
            out.push(cur.iter().map(|&c| c as f64 / steps as f64).collect());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(n, left - c, steps, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, steps, steps, &mut Vec::new(), &mut out);
    out
}

/// Worst case of `Σ_j ν_j h_j` over a Wasserstein ball whose candidate set
/// for nominal `j` is a finite list of `(d^t, h)` pairs:
/// `max_{λ ≥ 0} −λθ^t + Σ_j ν_j min_p (h_p + λ d_p)`.
///
/// The objective is concave and piecewise linear in `λ`, so its maximum is at
/// `λ = 0` or at a crossing of two candidate lines of the same nominal point.
pub fn dual_worst_case(nu: &[f64], budget: f64, candidates: &[Vec<(f64, f64)>]) -> f64 {
    let phi = |lam: f64| {
        -lam * budget
            + nu.iter()
                .zip(candidates)
                .map(|(w, c)| w * c.iter().map(|&(d, h)| h + lam * d).fold(f64::INFINITY, f64::min))
                .sum::<f64>()
    };
    let mut best = phi(0.0);
    for c in candidates {
        for (i, &(d1, h1)) in c.iter().enumerate() {
            for &(d2, h2) in &c[..i] {
                if d1 != d2 {
                    let lam = (h2 - h1) / (d1 - d2);
                    if lam > 0.0 && lam.is_finite() {
                        best = best.max(phi(lam));
                    }
                }
            }
        }
    }
    best
}

/// Grid and sampling estimate of the Wasserstein-robust value of an
/// inspection game with the Frobenius metric and `t = 2`.
///
/// For each nominal point the candidates are the nominal itself plus
/// `samples` family members with `α, β ~ U[0, 1]`. Per grid strategy only the
/// Pareto frontier in (transport cost, leader payoff) matters; candidates are
/// scanned in order of cost and the scan stops once the payoff reaches its
/// lower bound `min_a u_l(x, a)`.
pub struct InspectionGridOracle {
    pub value: f64,
    pub x: Vec<f64>,
}

pub fn inspection_grid_oracle(
    g: &GameInstance,
    nominal: &Distribution,
    theta: f64,
    steps: usize,
    samples: usize,
    seed: u64,
) -> InspectionGridOracle {
    let FollowerUniverse::Inspection(family) = &g.follower else {
        panic!("inspection universe expected")
    };
    let mut rng = Stream::new(seed);
    let candidates: Vec<Vec<(f64, Matrix)>> = nominal
        .support
        .iter()
        .map(|u_hat| {
            let mut list = vec![(0.0, u_hat.clone())];
            for _ in 0..samples {
                let u = family.member(InspectionPayoffs {
                    alpha: rng.unit(),
                    beta: rng.unit(),
                });
                list.push((u.frobenius_sq(u_hat), u));
            }
            list.sort_by(|a, b| a.0.total_cmp(&b.0));
            list
        })
        .collect();
    let budget = theta * theta;
    let mut best = InspectionGridOracle {
        value: f64::NEG_INFINITY,
        x: Vec::new(),
    };
    for x in simplex_grid(g.n, steps) {
        let floor = g.leader_payoffs(&x).into_iter().fold(f64::INFINITY, f64::min);
        let frontiers: Vec<Vec<(f64, f64)>> = candidates
            .iter()
            .map(|list| {
                let mut frontier = Vec::new();
                let mut lowest = f64::INFINITY;
                for (d, u) in list {
                    let (h, _) = game::strong_response(&g.u_l, u, &x, game::BR_TOL);
                    if h < lowest - 1e-15 {
                        frontier.push((*d, h));
                        lowest = h;
                        if lowest <= floor + 1e-12 {
                            break;
                        }
                    }
                }
                frontier
            })
            .collect();
        let v = dual_worst_case(&nominal.weights, budget, &frontiers);
        if v > best.value {
            best = InspectionGridOracle { value: v, x };
        }
    }
    best
}

/// Spearman rank correlation (no tie correction; inputs here are distinct).
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        for (rank, &i) in idx.iter().enumerate() {
            r[i] = rank as f64;
        }
        r
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b).powi(2)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}
