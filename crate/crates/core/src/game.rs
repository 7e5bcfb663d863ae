//! Normal-form Stackelberg games, best responses and the strong tie-break.

use serde::{Deserialize, Serialize};

use crate::ambiguity::AmbiguitySpec;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Best-response tolerance for direct evaluation.
pub const BR_TOL: f64 = 1e-9;
/// Best-response tolerance when re-verifying solver output.
pub const VERIFY_TOL: f64 = 1e-7;

/// A follower payoff matrix, `n × m`, entries in `[0, 1]`.
pub type FollowerUtility = Matrix;

/// Follower payoffs of the inspection family: `alpha` on cells where the
/// two chosen subsets intersect, `beta` elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InspectionPayoffs {
    pub alpha: f64,
    pub beta: f64,
}

/// The two-parameter family of follower utilities of an inspection game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InspectionFamily {
    /// `mask[i][a]` is true when leader action `i` and follower action `a`
    /// intersect.
    pub mask: Vec<Vec<bool>>,
    pub nominals: Vec<InspectionPayoffs>,
}

impl InspectionFamily {
    pub fn member(&self, p: InspectionPayoffs) -> FollowerUtility {
        let n = self.mask.len();
        let m = self.mask.first().map_or(0, Vec::len);
        Matrix::from_fn(n, m, |i, a| if self.mask[i][a] { p.alpha } else { p.beta })
    }

    /// Number of intersecting cells.
    pub fn intersect_count(&self) -> usize {
        self.mask.iter().flatten().filter(|&&b| b).count()
    }

    pub fn cells(&self) -> usize {
        self.mask.iter().map(Vec::len).sum()
    }

    /// `Σ_i x_i [mask(i, a)]` for every follower action `a`.
    pub fn intersect_weights(&self, x: &[f64]) -> Vec<f64> {
        let m = self.mask.first().map_or(0, Vec::len);
        (0..m)
            .map(|a| {
                x.iter()
                    .zip(&self.mask)
                    .filter(|(_, row)| row[a])
                    .map(|(xi, _)| xi)
                    .sum()
            })
            .collect()
    }

    pub fn nominal_matrices(&self) -> Vec<FollowerUtility> {
        self.nominals.iter().map(|&p| self.member(p)).collect()
    }
}

/// The set of follower utilities the adversary may draw from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FollowerUniverse {
    Finite { utilities: Vec<FollowerUtility> },
    Box,
    Inspection(InspectionFamily),
}

impl FollowerUniverse {
    pub fn kind(&self) -> &'static str {
        match self {
            FollowerUniverse::Finite { .. } => "finite",
            FollowerUniverse::Box => "box",
            FollowerUniverse::Inspection(_) => "inspection",
        }
    }

    pub fn finite(&self) -> Option<&[FollowerUtility]> {
        match self {
            FollowerUniverse::Finite { utilities } => Some(utilities),
            _ => None,
        }
    }

    /// Nominal points carried by the universe itself, if any.
    pub fn nominal_points(&self) -> Option<Vec<FollowerUtility>> {
        match self {
            FollowerUniverse::Finite { utilities } => Some(utilities.clone()),
            FollowerUniverse::Inspection(f) => Some(f.nominal_matrices()),
            FollowerUniverse::Box => None,
        }
    }

    /// Whether `u` lies in the universe (up to `tol` for the inspection family).
    pub fn contains(&self, u: &FollowerUtility, tol: f64) -> bool {
        if !u.all_in_unit_interval() {
            return false;
        }
        match self {
            FollowerUniverse::Box => true,
            FollowerUniverse::Finite { utilities } => {
                utilities.iter().any(|v| v.shape() == u.shape() && v.frobenius_sq(u) <= tol * tol)
            }
            FollowerUniverse::Inspection(f) => {
                let mut alpha: Option<f64> = None;
                let mut beta: Option<f64> = None;
                for (i, row) in f.mask.iter().enumerate() {
                    for (a, &hit) in row.iter().enumerate() {
                        let slot = if hit { &mut alpha } else { &mut beta };
                        let v = u[(i, a)];
                        match *slot {
                            None => *slot = Some(v),
                            Some(s) if (s - v).abs() > tol => return false,
                            Some(_) => {}
                        }
                    }
                }
                true
            }
        }
    }
}

/// A leader mixed strategy: a probability vector over leader actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MixedStrategy(Vec<f64>);

impl MixedStrategy {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidInput("empty mixed strategy".into()));
        }
        if p.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::InvalidInput("negative or NaN probability".into()));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("probabilities sum to {sum}")));
        }
        Ok(Self(p))
    }

    /// Clamps solver noise (tiny negatives, sums off by ~1e-7) onto the simplex.
    pub fn from_solver(p: &[f64]) -> Self {
        let clamped: Vec<f64> = p.iter().map(|&v| v.max(0.0)).collect();
        let sum: f64 = clamped.iter().sum();
        if sum <= 0.0 {
            return Self::uniform(p.len());
        }
        Self(clamped.into_iter().map(|v| v / sum).collect())
    }

    pub fn pure(n: usize, i: usize) -> Self {
        let mut p = vec![0.0; n];
        p[i] = 1.0;
        Self(p)
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Follower action per follower-utility index.
pub type BestResponseMapping = Vec<usize>;

/// A leader payoff matrix together with the follower-utility universe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameInstance {
    pub n: usize,
    pub m: usize,
    pub u_l: Matrix,
    pub follower: FollowerUniverse,
}

impl GameInstance {
    pub fn new(u_l: Matrix, follower: FollowerUniverse) -> Result<Self> {
        let g = Self {
            n: u_l.rows(),
            m: u_l.cols(),
            u_l,
            follower,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn finite(u_l: Matrix, utilities: Vec<FollowerUtility>) -> Result<Self> {
        Self::new(u_l, FollowerUniverse::Finite { utilities })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::InvalidInput("games need n >= 1 and m >= 1".into()));
        }
        if self.u_l.shape() != (self.n, self.m) {
            return Err(Error::DimensionMismatch(format!(
                "leader matrix is {:?}, expected {}x{}",
                self.u_l.shape(),
                self.n,
                self.m
            )));
        }
        if !self.u_l.all_in_unit_interval() {
            return Err(Error::InvalidInput("leader payoffs must lie in [0, 1]".into()));
        }
        match &self.follower {
            FollowerUniverse::Finite { utilities } => {
                if utilities.is_empty() {
                    return Err(Error::InvalidInput("finite universe is empty".into()));
                }
                for u in utilities {
                    self.check_utility(u)?;
                }
            }
            FollowerUniverse::Box => {}
            FollowerUniverse::Inspection(f) => {
                if f.mask.len() != self.n || f.mask.iter().any(|r| r.len() != self.m) {
                    return Err(Error::DimensionMismatch("inspection mask shape".into()));
                }
                for p in &f.nominals {
                    if !(0.0..=1.0).contains(&p.alpha) || !(0.0..=1.0).contains(&p.beta) {
                        return Err(Error::InvalidInput(
                            "inspection payoffs must lie in [0, 1]".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn check_utility(&self, u: &FollowerUtility) -> Result<()> {
        if u.shape() != (self.n, self.m) {
            return Err(Error::DimensionMismatch(format!(
                "follower matrix is {:?}, expected {}x{}",
                u.shape(),
                self.n,
                self.m
            )));
        }
        if !u.all_in_unit_interval() {
            return Err(Error::InvalidInput("follower payoffs must lie in [0, 1]".into()));
        }
        Ok(())
    }

    fn check_strategy(&self, x: &MixedStrategy) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "strategy has {} entries, game has {} leader actions",
                x.len(),
                self.n
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: GameInstance = serde_json::from_str(text)?;
        g.validate()?;
        Ok(g)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `u_l(x, a)` for every follower action.
    pub fn leader_payoffs(&self, x: &[f64]) -> Vec<f64> {
        self.u_l.weighted_columns(x)
    }

    pub fn follower_expected_payoffs(&self, u_f: &FollowerUtility, x: &MixedStrategy) -> Result<Vec<f64>> {
        self.check_utility(u_f)?;
        self.check_strategy(x)?;
        Ok(u_f.weighted_columns(x.as_slice()))
    }

    pub fn best_response_set(&self, u_f: &FollowerUtility, x: &MixedStrategy, tol: f64) -> Result<Vec<usize>> {
        self.check_utility(u_f)?;
        self.check_strategy(x)?;
        Ok(best_response_set(u_f, x.as_slice(), tol))
    }

    /// `h(x, u_f)` and the follower action achieving it.
    pub fn strong_tiebreak_payoff(
        &self,
        u_f: &FollowerUtility,
        x: &MixedStrategy,
        tol: f64,
    ) -> Result<(f64, usize)> {
        self.check_utility(u_f)?;
        self.check_strategy(x)?;
        Ok(strong_response(&self.u_l, u_f, x.as_slice(), tol))
    }

    /// Worst-case expected `h` over a finitely supported ambiguity set.
    pub fn leader_worstcase_value(&self, amb: &AmbiguitySpec, x: &MixedStrategy, tol: f64) -> Result<f64> {
        self.check_strategy(x)?;
        let candidates: Vec<FollowerUtility> = match amb {
            AmbiguitySpec::Polytope(p) => p.support.clone(),
            AmbiguitySpec::Wasserstein(_) => match &self.follower {
                FollowerUniverse::Finite { utilities } => utilities.clone(),
                other => {
                    return Err(Error::UnsupportedUniverse(format!(
                        "pointwise worst case over a Wasserstein ball needs a finite universe, got {}",
                        other.kind()
                    )))
                }
            },
        };
        let values: Vec<f64> = candidates
            .iter()
            .map(|u| {
                self.check_utility(u)?;
                Ok(strong_response(&self.u_l, u, x.as_slice(), tol).0)
            })
            .collect::<Result<_>>()?;
        Ok(amb.worstcase_over(&candidates, &values)?.value)
    }
}

/// Pure follower actions within `tol` of the best expected payoff.
pub fn best_response_set(u_f: &FollowerUtility, x: &[f64], tol: f64) -> Vec<usize> {
    let payoffs = u_f.weighted_columns(x);
    let best = payoffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..payoffs.len()).filter(|&a| payoffs[a] >= best - tol).collect()
}

/// Strong tie-break: among best responses the leader's favourite, lowest
/// index among leader-payoff ties. Returns `(u_l(x, a), a)`.
pub fn strong_response(u_l: &Matrix, u_f: &FollowerUtility, x: &[f64], tol: f64) -> (f64, usize) {
    let follower = u_f.weighted_columns(x);
    let best = follower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut choice: Option<(f64, usize)> = None;
    for (a, &f) in follower.iter().enumerate() {
        if f < best - tol {
            continue;
        }
        let v = u_l.weighted_column(x, a);
        if choice.is_none_or(|(cv, _)| v > cv) {
            choice = Some((v, a));
        }
    }
    choice.expect("a pure best response always exists")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn game(u_l: Matrix, u_f: Matrix) -> GameInstance {
        GameInstance::finite(u_l, vec![u_f]).unwrap()
    }

    #[test]
    fn expected_payoffs() {
        let id = mat(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let g = game(id.clone(), id.clone());
        let x = MixedStrategy::pure(2, 0);
        assert_eq!(g.follower_expected_payoffs(&id, &x).unwrap(), vec![1.0, 0.0]);
        let x = MixedStrategy::uniform(2);
        assert_eq!(g.follower_expected_payoffs(&id, &x).unwrap(), vec![0.5, 0.5]);
        let u = mat(&[&[0.8, 0.2], &[0.4, 0.6]]);
        let x = MixedStrategy::new(vec![0.25, 0.75]).unwrap();
        let v = g.follower_expected_payoffs(&u, &x).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-15 && (v[1] - 0.5).abs() < 1e-15);
        let bad = MixedStrategy::uniform(3);
        assert!(matches!(
            g.follower_expected_payoffs(&u, &bad),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn best_responses() {
        let id = mat(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let g = game(id.clone(), id.clone());
        assert_eq!(g.best_response_set(&id, &MixedStrategy::pure(2, 0), BR_TOL).unwrap(), vec![0]);
        assert_eq!(g.best_response_set(&id, &MixedStrategy::uniform(2), BR_TOL).unwrap(), vec![0, 1]);
        let u = mat(&[&[1.0, 0.0], &[0.0, 0.9]]);
        assert_eq!(g.best_response_set(&u, &MixedStrategy::uniform(2), BR_TOL).unwrap(), vec![0]);
    }

    #[test]
    fn strong_tiebreak() {
        let x = MixedStrategy::uniform(2);
        let g = game(mat(&[&[1.0, 0.0], &[0.0, 0.4]]), mat(&[&[1.0, 0.0], &[0.0, 1.0]]));
        let u = g.follower.finite().unwrap()[0].clone();
        assert_eq!(g.strong_tiebreak_payoff(&u, &x, BR_TOL).unwrap(), (0.5, 0));

        let ones = mat(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let g = game(mat(&[&[0.2, 0.9], &[0.2, 0.9]]), ones.clone());
        let (v, a) = g.strong_tiebreak_payoff(&ones, &x, BR_TOL).unwrap();
        assert!((v - 0.9).abs() < 1e-15 && a == 1);

        let g = game(mat(&[&[0.5, 0.5], &[0.5, 0.5]]), ones.clone());
        for x in [MixedStrategy::pure(2, 1), MixedStrategy::new(vec![0.3, 0.7]).unwrap()] {
            assert_eq!(g.strong_tiebreak_payoff(&ones, &x, BR_TOL).unwrap(), (0.5, 0));
        }
    }

    #[test]
    fn rejects_bad_games() {
        assert!(GameInstance::finite(mat(&[&[1.5]]), vec![mat(&[&[0.0]])]).is_err());
        assert!(GameInstance::finite(mat(&[&[0.5]]), vec![]).is_err());
        assert!(GameInstance::finite(mat(&[&[0.5]]), vec![mat(&[&[0.0, 1.0]])]).is_err());
        assert!(MixedStrategy::new(vec![0.5, 0.6]).is_err());
        assert!(MixedStrategy::new(vec![-0.1, 1.1]).is_err());
    }

    #[test]
    fn inspection_membership() {
        let fam = InspectionFamily {
            mask: vec![vec![true, false], vec![false, true]],
            nominals: vec![InspectionPayoffs { alpha: 0.4, beta: 0.8 }],
        };
        let u = fam.member(fam.nominals[0]);
        let uni = FollowerUniverse::Inspection(fam.clone());
        assert!(uni.contains(&u, 1e-12));
        let mut v = u.clone();
        v[(0, 0)] = 0.5;
        assert!(!uni.contains(&v, 1e-12));
        assert_eq!(fam.intersect_count(), 2);
        assert_eq!(fam.intersect_weights(&[0.25, 0.75]), vec![0.25, 0.75]);
    }

    #[test]
    fn game_json_schema() {
        let g = game(mat(&[&[1.0, 0.0]]), mat(&[&[0.3, 0.7]]));
        let text = g.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["follower"]["kind"], "finite");
        assert_eq!(v["u_l"][0][1], 0.0);
        assert_eq!(GameInstance::from_json(&text).unwrap(), g);
        let boxed = r#"{"n":1,"m":2,"u_l":[[0.5,0.5]],"follower":{"kind":"box"}}"#;
        assert_eq!(GameInstance::from_json(boxed).unwrap().follower, FollowerUniverse::Box);
        let wrong = r#"{"n":2,"m":2,"u_l":[[0.5,0.5]],"follower":{"kind":"box"}}"#;
        assert!(GameInstance::from_json(wrong).is_err());
    }
}
