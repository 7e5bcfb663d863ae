use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use drstack::ambiguity::PolytopeSet;
use drstack::baselines::enumeration_lp_baseline;
use drstack::experiment::{ExperimentConfig, Method, Sweep};
use drstack::finite::solve_by_enumeration;
use drstack::games::{gen_synthetic_instance, SyntheticParams};
use drstack::wasserstein::{run_algorithm1, Algorithm1Config, FiniteOracle};
use drstack::{AmbiguitySpec, BigMConfig, ExecMode, GroundMetric, RunOptions, WassersteinBall};

const MODES: [(&str, ExecMode); 2] = [("sequential", ExecMode::Sequential), ("parallel", ExecMode::Parallel)];

fn opts(exec: ExecMode) -> RunOptions {
    RunOptions {
        exec,
        ..RunOptions::default()
    }
}

fn instance(n: usize, m: usize, k: usize) -> drstack::games::Instance {
    gen_synthetic_instance(&SyntheticParams { n, m, k, seed: 1 }).unwrap()
}

/// One LP per best-response mapping z.
fn enumeration(c: &mut Criterion) {
    let inst = instance(3, 3, 5);
    let support = inst.game.follower.finite().unwrap().to_vec();
    let amb = AmbiguitySpec::Polytope(PolytopeSet::full_simplex(support).unwrap());
    let mut group = c.benchmark_group("enumeration_over_z");
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(solve_by_enumeration(&inst.game, &amb, &opts(mode)).unwrap().value))
        });
    }
    group.finish();
}

/// One fixed-mapping LP per δ.
fn opt_lp(c: &mut Criterion) {
    let inst = instance(3, 3, 5);
    let ball = WassersteinBall::new(inst.nominal.clone(), 0.3, 2.0, GroundMetric::Frobenius).unwrap();
    let cfg = BigMConfig::default();
    let mut group = c.benchmark_group("opt_lp_over_delta");
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(enumeration_lp_baseline(&inst.game, &ball, &cfg, &opts(mode)).unwrap().value))
        });
    }
    group.finish();
}

/// Algorithm 1 with one separation per nominal point j.
fn separation(c: &mut Criterion) {
    let inst = instance(3, 3, 4);
    let ball = WassersteinBall::new(inst.nominal.clone(), 0.5, 2.0, GroundMetric::Frobenius).unwrap();
    let cfg = Algorithm1Config::default();
    let mut group = c.benchmark_group("separation_over_j");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(run_algorithm1(&inst.game, &ball, &FiniteOracle, &cfg, &opts(mode)).unwrap().value))
        });
    }
    group.finish();
}

/// Independent sweep runs on one worker versus several.
fn sweeps(c: &mut Criterion) {
    let workers = std::thread::available_parallelism().map_or(4, |n| n.get());
    let base = ExperimentConfig::from_toml(
        r#"
family = "synthetic"
method = "dr_mip_finite"
reps = 4
[params]
n = 3
m = 3
k = 3
[sweep]
var = "theta"
values = [0.1]
"#,
    )
    .unwrap();
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for (name, w) in [("sequential", 1), ("parallel", workers)] {
        let cfg = ExperimentConfig {
            method: vec![Method::DrMipFinite, Method::Bayesian],
            sweep: Sweep {
                var: "theta".into(),
                values: vec![0.0, 0.2, 0.5],
            },
            workers: w,
            ..base.clone()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(drstack::experiment::run_sweep(&cfg).unwrap().len()))
        });
    }
    group.finish();
}

criterion_group!(benches, enumeration, opt_lp, separation, sweeps);
criterion_main!(benches);
