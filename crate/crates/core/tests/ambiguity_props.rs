mod common;

use common::*;
use drstack::ambiguity::{ground_distance, wasserstein_dual, wasserstein_primal};
use drstack::games::rng::Stream;
use drstack::{AmbiguitySpec, Distribution, GroundMetric, Matrix, WassersteinBall};
use proptest::prelude::*;

fn matrices(seed: u64, count: usize, n: usize, m: usize) -> Vec<Matrix> {
    let mut rng = Stream::new(seed);
    (0..count).map(|_| random_matrix(&mut rng, n, m)).collect()
}

/// Every permutation of `0..k` (Heap's algorithm).
fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn heap(len: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if len <= 1 {
            out.push(p.clone());
            return;
        }
        for i in 0..len {
            heap(len - 1, p, out);
            let j = if len.is_multiple_of(2) { i } else { 0 };
            p.swap(j, len - 1);
        }
    }
    let mut out = Vec::new();
    heap(k, &mut (0..k).collect(), &mut out);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn frobenius_is_a_metric(seed in 0u64..1_000_000, n in 1usize..5, m in 1usize..5) {
        let u = matrices(seed, 3, n, m);
        let d = |a: &Matrix, b: &Matrix| ground_distance(GroundMetric::Frobenius, a, b).unwrap();
        prop_assert_eq!(d(&u[0], &u[0]), 0.0);
        prop_assert!(d(&u[0], &u[1]) > 0.0);
        prop_assert_eq!(d(&u[0], &u[1]), d(&u[1], &u[0]));
        prop_assert!(d(&u[0], &u[2]) <= d(&u[0], &u[1]) + d(&u[1], &u[2]) + 1e-12);
        // Direct definition.
        let direct = u[0].as_slice().iter().zip(u[1].as_slice()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        prop_assert!((d(&u[0], &u[1]) - direct).abs() < 1e-12);
    }

    #[test]
    fn primal_and_dual_transport_agree(seed in 0u64..1_000_000, p in 1usize..5, q in 1usize..5, t in 1.0f64..3.0) {
        let mut rng = Stream::new(seed);
        let a = (0..p).map(|_| random_matrix(&mut rng, 2, 2)).collect();
        let mu = random_distribution(&mut rng, a);
        let b = (0..q).map(|_| random_matrix(&mut rng, 2, 2)).collect();
        let nu = random_distribution(&mut rng, b);
        let (w, plan) = wasserstein_primal(&mu, &nu, t, GroundMetric::Frobenius).unwrap();
        let dual = wasserstein_dual(&mu, &nu, t, GroundMetric::Frobenius).unwrap();
        prop_assert!((w.powf(t) - dual).abs() < 1e-7, "primal {} dual {dual}", w.powf(t));
        for i in 0..p {
            let row: f64 = plan.row(i).iter().sum();
            prop_assert!((row - mu.weights[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn uniform_transport_is_an_assignment(seed in 0u64..1_000_000, k in 1usize..5) {
        // Between uniform measures with k atoms each an optimal plan is a
        // permutation (Birkhoff), so brute force over permutations is exact.
        let a = matrices(seed, k, 2, 3);
        let b = matrices(seed ^ 0x5eed, k, 2, 3);
        let best = permutations(k)
            .iter()
            .map(|p| (0..k).map(|i| a[i].frobenius_sq(&b[p[i]])).sum::<f64>() / k as f64)
            .fold(f64::INFINITY, f64::min);
        let mu = Distribution::uniform(a).unwrap();
        let nu = Distribution::uniform(b).unwrap();
        let (w, _) = wasserstein_primal(&mu, &nu, 2.0, GroundMetric::Frobenius).unwrap();
        prop_assert!((w * w - best).abs() < 1e-8, "{} vs {best}", w * w);
    }

    #[test]
    fn ball_worst_case_matches_the_dual_formula(seed in 0u64..1_000_000, k in 1usize..4, c in 1usize..5, theta in 0.0f64..1.5) {
        let mut rng = Stream::new(seed);
        let nominal: Vec<Matrix> = (0..k).map(|_| random_matrix(&mut rng, 2, 2)).collect();
        let nu = random_distribution(&mut rng, nominal.clone());
        let mut candidates = nominal;
        candidates.extend((0..c).map(|_| random_matrix(&mut rng, 2, 2)));
        let values: Vec<f64> = candidates.iter().map(|_| rng.uniform(-1.0, 1.0)).collect();
        let ball = WassersteinBall::new(nu.clone(), theta, 2.0, GroundMetric::Frobenius).unwrap();
        let lp = AmbiguitySpec::Wasserstein(ball).worstcase_over(&candidates, &values).unwrap();
        let lines: Vec<Vec<(f64, f64)>> = nu
            .support
            .iter()
            .map(|u_hat| candidates.iter().zip(&values).map(|(u, &h)| (u.frobenius_sq(u_hat), h)).collect())
            .collect();
        let dual = dual_worst_case(&nu.weights, theta * theta, &lines);
        prop_assert!((lp.value - dual).abs() < 1e-7, "lp {} dual {dual}", lp.value);
    }
}

#[test]
fn point_masses_are_at_ground_distance() {
    let u = matrices(3, 2, 3, 2);
    let mu = Distribution::point_mass(u[0].clone());
    let nu = Distribution::point_mass(u[1].clone());
    for t in [1.0, 2.0, 3.5] {
        let (w, _) = wasserstein_primal(&mu, &nu, t, GroundMetric::Frobenius).unwrap();
        let d = ground_distance(GroundMetric::Frobenius, &u[0], &u[1]).unwrap();
        assert!((w - d).abs() < 1e-9, "t={t}: {w} vs {d}");
    }
}
