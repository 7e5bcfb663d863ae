//! Building blocks shared by the programs of the finite-set methods,
//! the baselines and the Algorithm 1 master.

use crate::matrix::Matrix;
use crate::solver::{LinearProgram, MixedIntegerProgram, Relation, Var};

pub(crate) trait Builder {
    fn var(&mut self, name: String, lower: f64, upper: f64, cost: f64) -> Var;
    fn row(&mut self, name: String, terms: Vec<(Var, f64)>, relation: Relation, rhs: f64);
}

impl Builder for LinearProgram {
    fn var(&mut self, name: String, lower: f64, upper: f64, cost: f64) -> Var {
        self.add_var(name, lower, upper, cost)
    }

    fn row(&mut self, name: String, terms: Vec<(Var, f64)>, relation: Relation, rhs: f64) {
        self.add_constraint(name, terms, relation, rhs);
    }
}

impl Builder for MixedIntegerProgram {
    fn var(&mut self, name: String, lower: f64, upper: f64, cost: f64) -> Var {
        self.add_var(name, lower, upper, cost)
    }

    fn row(&mut self, name: String, terms: Vec<(Var, f64)>, relation: Relation, rhs: f64) {
        self.add_constraint(name, terms, relation, rhs);
    }
}

/// Leader strategy variables `x ∈ Δ^n` (one simplex row).
pub(crate) fn leader_simplex<B: Builder>(p: &mut B, n: usize) -> Vec<Var> {
    let x: Vec<Var> = (0..n).map(|i| p.var(format!("x{i}"), 0.0, 1.0, 0.0)).collect();
    p.row("simplex".into(), x.iter().map(|&v| (v, 1.0)).collect(), Relation::Eq, 1.0);
    x
}

/// Terms of `u(x, a) − u(x, b)`.
pub(crate) fn payoff_gap(x: &[Var], u: &Matrix, a: usize, b: usize) -> Vec<(Var, f64)> {
    x.iter()
        .enumerate()
        .map(|(i, &v)| (v, u[(i, a)] - u[(i, b)]))
        .filter(|&(_, c)| c != 0.0)
        .collect()
}

/// Terms of `scale · u(x, a)`.
pub(crate) fn payoff(x: &[Var], u: &Matrix, a: usize, scale: f64) -> Vec<(Var, f64)> {
    x.iter()
        .enumerate()
        .map(|(i, &v)| (v, scale * u[(i, a)]))
        .filter(|&(_, c)| c != 0.0)
        .collect()
}

/// Decodes enumeration index `idx` into a mapping over `k` utilities with
/// `m` actions each (least significant digit first).
pub(crate) fn decode_mapping(mut idx: usize, m: usize, k: usize) -> Vec<usize> {
    let mut z = Vec::with_capacity(k);
    for _ in 0..k {
        z.push(idx % m);
        idx /= m;
    }
    z
}

/// Checks `m^k ≤ limit` and returns `m^k`.
pub(crate) fn mapping_count(m: usize, k: usize, limit: f64) -> crate::Result<usize> {
    let count = (m as f64).powi(k as i32);
    if count > limit {
        return Err(crate::Error::EnumerationGuard { count, limit });
    }
    Ok(count as usize)
}

/// Index of the binary set to one in a one-hot block.
pub(crate) fn selected(values: &[f64], block: &[Var]) -> usize {
    block
        .iter()
        .enumerate()
        .max_by(|a, b| values[a.1 .0].total_cmp(&values[b.1 .0]))
        .map(|(i, _)| i)
        .expect("non-empty one-hot block")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mapping_decoding_covers_all() {
        let mut seen: Vec<Vec<usize>> = (0..27).map(|i| decode_mapping(i, 3, 3)).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 27);
        assert_eq!(decode_mapping(5, 3, 2), vec![2, 1]);
        assert!(mapping_count(10, 6, 1e5).is_err());
        assert_eq!(mapping_count(10, 5, 1e5).unwrap(), 100_000);
    }
}
