use super::*;

fn backends() -> [&'static dyn Backend; 2] {
    [BackendKind::Microlp.backend(), BackendKind::Dense.backend()]
}

fn opts() -> SolveOptions {
    SolveOptions::default()
}

#[test]
fn lp_simple_bound() {
    for b in backends() {
        let mut p = LinearProgram::new(Sense::Maximize);
        let x = p.add_var("x", 0.0, f64::INFINITY, 1.0);
        p.add_constraint("cap", vec![(x, 1.0)], Relation::Le, 3.0);
        let out = b.solve_lp(&p, &opts()).unwrap();
        assert!(out.is_optimal(), "{}", b.name());
        assert!((out.value(x) - 3.0).abs() < 1e-7);
    }
}

#[test]
fn lp_infeasible() {
    for b in backends() {
        let mut p = LinearProgram::new(Sense::Minimize);
        let x = p.add_var("x", f64::NEG_INFINITY, f64::INFINITY, 1.0);
        p.add_constraint("lo", vec![(x, 1.0)], Relation::Ge, 5.0);
        p.add_constraint("hi", vec![(x, 1.0)], Relation::Le, 4.0);
        let out = b.solve_lp(&p, &opts()).unwrap();
        assert_eq!(out.status, SolveStatus::Infeasible, "{}", b.name());
        assert!(out.values.is_none());
    }
}

#[test]
fn lp_unbounded() {
    for b in backends() {
        let mut p = LinearProgram::new(Sense::Maximize);
        let x = p.add_var("x", 0.0, f64::INFINITY, 1.0);
        let y = p.add_var("y", 0.0, f64::INFINITY, 0.0);
        p.add_constraint("r", vec![(x, 1.0), (y, -1.0)], Relation::Le, 1.0);
        let out = b.solve_lp(&p, &opts()).unwrap();
        assert_eq!(out.status, SolveStatus::Unbounded, "{}", b.name());
    }
}

#[test]
fn lp_two_vars() {
    for b in backends() {
        let mut p = LinearProgram::new(Sense::Maximize);
        let x = p.add_var("x", 0.0, f64::INFINITY, 1.0);
        let y = p.add_var("y", 0.0, f64::INFINITY, 1.0);
        p.add_constraint("sum", vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.0);
        let out = b.solve_lp(&p, &opts()).unwrap();
        assert!((out.objective.unwrap() - 1.0).abs() < 1e-7, "{}", b.name());
    }
}

#[test]
fn lp_free_and_negative_rhs() {
    // min x + 2y, x - y = -3, y >= -1, x free -> y = -1, x = -4, obj -6
    for b in backends() {
        let mut p = LinearProgram::new(Sense::Minimize);
        let x = p.add_var("x", f64::NEG_INFINITY, f64::INFINITY, 1.0);
        let y = p.add_var("y", -1.0, 10.0, 2.0);
        p.add_constraint("e", vec![(x, 1.0), (y, -1.0)], Relation::Eq, -3.0);
        let out = b.solve_lp(&p, &opts()).unwrap();
        assert!((out.objective.unwrap() + 6.0).abs() < 1e-7, "{}", b.name());
        assert!((out.value(x) + 4.0).abs() < 1e-7);
    }
}

#[test]
fn lp_objective_offset() {
    for b in backends() {
        let mut p = LinearProgram::new(Sense::Minimize);
        let x = p.add_var("x", 1.0, 2.0, 1.0);
        p.objective_offset = 10.0;
        let out = b.solve_lp(&p, &opts()).unwrap();
        assert!((out.objective.unwrap() - 11.0).abs() < 1e-9);
        assert!((out.value(x) - 1.0).abs() < 1e-9);
    }
}

#[test]
fn milp_single_binary() {
    for b in backends() {
        let mut p = MixedIntegerProgram::new(Sense::Maximize);
        let d = p.add_binary("d", 1.0);
        let out = b.solve_milp(&p, &opts()).unwrap();
        assert_eq!(out.value(d), 1.0, "{}", b.name());
    }
}

#[test]
fn milp_big_m_switch() {
    for b in backends() {
        let mut p = MixedIntegerProgram::new(Sense::Maximize);
        let x = p.add_var("x", f64::NEG_INFINITY, 10.0, 1.0);
        let d = p.add_binary("d", 0.0);
        // x <= 10 d + 3 (1 - d)  <=>  x - 7 d <= 3
        p.add_constraint("link", vec![(x, 1.0), (d, -7.0)], Relation::Le, 3.0);
        let out = b.solve_milp(&p, &opts()).unwrap();
        assert!((out.value(x) - 10.0).abs() < 1e-7, "{}", b.name());
        assert_eq!(out.value(d), 1.0);
    }
}

#[test]
fn milp_knapsack() {
    for b in backends() {
        let mut p = MixedIntegerProgram::new(Sense::Maximize);
        let d1 = p.add_binary("d1", 2.0);
        let d2 = p.add_binary("d2", 3.0);
        p.add_constraint("one", vec![(d1, 1.0), (d2, 1.0)], Relation::Le, 1.0);
        let out = b.solve_milp(&p, &opts()).unwrap();
        assert!((out.objective.unwrap() - 3.0).abs() < 1e-9, "{}", b.name());
    }
}

#[test]
fn milp_fractional_relaxation() {
    // LP relaxation would pick d1 = d2 = d3 = 2/3.
    for b in backends() {
        let mut p = MixedIntegerProgram::new(Sense::Maximize);
        let ds: Vec<Var> = (0..3).map(|i| p.add_binary(format!("d{i}"), 1.0)).collect();
        for i in 0..3 {
            let j = (i + 1) % 3;
            p.add_constraint(format!("pair{i}"), vec![(ds[i], 1.0), (ds[j], 1.0)], Relation::Le, 1.0);
        }
        let out = b.solve_milp(&p, &opts()).unwrap();
        assert!((out.objective.unwrap() - 1.0).abs() < 1e-9, "{}", b.name());
    }
}

#[test]
fn milp_infeasible() {
    for b in backends() {
        let mut p = MixedIntegerProgram::new(Sense::Maximize);
        let d1 = p.add_binary("d1", 1.0);
        let d2 = p.add_binary("d2", 1.0);
        p.add_constraint("half", vec![(d1, 1.0), (d2, 1.0)], Relation::Eq, 1.5);
        let out = b.solve_milp(&p, &opts()).unwrap();
        assert_eq!(out.status, SolveStatus::Infeasible, "{}", b.name());
    }
}

#[test]
fn qp_examples() {
    for b in backends() {
        // (x - 1)^2 = x^2 - 2x + 1 with x >= 2
        let mut p = QuadraticProgram::new();
        let x = p.add_var("x", f64::NEG_INFINITY, f64::INFINITY, -2.0);
        p.add_quadratic(x, x, 2.0);
        p.lp.objective_offset = 1.0;
        p.add_constraint("lo", vec![(x, 1.0)], Relation::Ge, 2.0);
        let out = b.solve_qp(&p, &opts()).unwrap();
        assert!((out.value(x) - 2.0).abs() < 1e-9);
        assert!((out.objective.unwrap() - 1.0).abs() < 1e-9);
        assert!(out.kkt_residual.unwrap() <= KKT_TOL);

        let mut p = QuadraticProgram::new();
        let x = p.add_var("x", f64::NEG_INFINITY, f64::INFINITY, 0.0);
        let y = p.add_var("y", f64::NEG_INFINITY, f64::INFINITY, 0.0);
        p.add_quadratic(x, x, 2.0);
        p.add_quadratic(y, y, 2.0);
        let out = b.solve_qp(&p, &opts()).unwrap();
        assert!(out.value(x).abs() < 1e-12 && out.value(y).abs() < 1e-12);
        assert!(out.objective.unwrap().abs() < 1e-12);

        let mut p = QuadraticProgram::new();
        let x = p.add_var("x", 0.0, 1.0, -1.0);
        p.add_quadratic(x, x, 2.0);
        p.lp.objective_offset = 0.25;
        let out = b.solve_qp(&p, &opts()).unwrap();
        assert!((out.value(x) - 0.5).abs() < 1e-9);
        assert!(out.objective.unwrap().abs() < 1e-12);
    }
}

#[test]
fn qp_halfspace_projection() {
    // Project (1, 1) onto x + y <= 1: answer (0.5, 0.5).
    let mut p = QuadraticProgram::new();
    let x = p.add_var("x", f64::NEG_INFINITY, f64::INFINITY, -2.0);
    let y = p.add_var("y", f64::NEG_INFINITY, f64::INFINITY, -2.0);
    p.add_quadratic(x, x, 2.0);
    p.add_quadratic(y, y, 2.0);
    p.add_constraint("h", vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.0);
    let out = default_backend().solve_qp(&p, &opts()).unwrap();
    assert!((out.value(x) - 0.5).abs() < 1e-9 && (out.value(y) - 0.5).abs() < 1e-9);
}

#[test]
fn qp_equality_and_infeasible() {
    let mut p = QuadraticProgram::new();
    let x = p.add_var("x", 0.0, 1.0, 0.0);
    let y = p.add_var("y", 0.0, 1.0, 0.0);
    p.add_quadratic(x, x, 2.0);
    p.add_quadratic(y, y, 2.0);
    p.add_constraint("e", vec![(x, 1.0), (y, 1.0)], Relation::Eq, 1.0);
    let out = default_backend().solve_qp(&p, &opts()).unwrap();
    assert!((out.value(x) - 0.5).abs() < 1e-9);

    p.add_constraint("bad", vec![(x, 1.0), (y, 1.0)], Relation::Ge, 3.0);
    let out = default_backend().solve_qp(&p, &opts()).unwrap();
    assert_eq!(out.status, SolveStatus::Infeasible);
}

#[test]
fn qp_tied_variables_with_bounds() {
    // Tied cells share one value, so the bounds of all but one are redundant
    // once they hit the box. Optimum: clamp(mean target, 0, 1) on every cell.
    for targets in [[1.4, 1.9, 2.2, 1.6], [-0.3, -0.9, 0.1, -0.2], [0.2, 0.9, 0.4, 0.1]] {
        let mut p = QuadraticProgram::new();
        let v: Vec<_> = targets
            .iter()
            .enumerate()
            .map(|(i, &t)| p.add_var(format!("v{i}"), 0.0, 1.0, -2.0 * t))
            .collect();
        for &vi in &v {
            p.add_quadratic(vi, vi, 2.0);
        }
        for (i, &vi) in v.iter().enumerate().skip(1) {
            p.add_constraint(format!("tie{i}"), vec![(vi, 1.0), (v[0], -1.0)], Relation::Eq, 0.0);
        }
        let want = (targets.iter().sum::<f64>() / 4.0).clamp(0.0, 1.0);
        let out = default_backend().solve_qp(&p, &opts()).unwrap();
        for &vi in &v {
            assert!((out.value(vi) - want).abs() < 1e-9, "{targets:?}: {} vs {want}", out.value(vi));
        }
    }
}

#[test]
fn qp_singular_psd() {
    // min x^2 - y  s.t. y <= 2, x >= 1  -> x = 1, y = 2, obj -1
    let mut p = QuadraticProgram::new();
    let x = p.add_var("x", 1.0, f64::INFINITY, 0.0);
    let y = p.add_var("y", f64::NEG_INFINITY, 2.0, -1.0);
    p.add_quadratic(x, x, 2.0);
    let out = default_backend().solve_qp(&p, &opts()).unwrap();
    assert!((out.objective.unwrap() + 1.0).abs() < 1e-7);
    assert!((out.value(y) - 2.0).abs() < 1e-7);
}

#[test]
fn qp_rejects_nonconvex() {
    let mut p = QuadraticProgram::new();
    let x = p.add_var("x", 0.0, 1.0, 0.0);
    p.add_quadratic(x, x, -1.0);
    let err = default_backend().solve_qp(&p, &opts()).unwrap_err();
    assert!(matches!(err, SolverError::NonConvex(_)));

    let mut p = QuadraticProgram::new();
    let x = p.add_var("x", 0.0, 1.0, 0.0);
    let y = p.add_var("y", 0.0, 1.0, 0.0);
    p.add_quadratic(x, x, 1.0);
    p.add_quadratic(y, y, 1.0);
    p.add_quadratic(x, y, 2.0);
    let err = default_backend().solve_qp(&p, &opts()).unwrap_err();
    assert!(matches!(err, SolverError::NonConvex(_)));
}

#[test]
fn rejects_malformed_programs() {
    let mut p = LinearProgram::new(Sense::Minimize);
    p.add_var("x", 1.0, 0.0, 1.0);
    assert!(matches!(
        default_backend().solve_lp(&p, &opts()),
        Err(SolverError::InvalidProgram(_))
    ));
    let mut p = LinearProgram::new(Sense::Minimize);
    p.add_var("x", 0.0, 1.0, 1.0);
    p.add_constraint("r", vec![(Var(3), 1.0)], Relation::Le, 1.0);
    assert!(p.validate().is_err());
}

#[test]
fn lp_format_sections() {
    let mut p = MixedIntegerProgram::new(Sense::Maximize);
    let x = p.add_var("x", 0.0, 10.0, 1.0);
    let d = p.add_binary("d", -0.5);
    p.add_constraint("link", vec![(x, 1.0), (d, -7.0)], Relation::Le, 3.0);
    let text = write_lp_format(&p.lp, Some(&p.binary), None);
    for section in ["Maximize", "Subject To", "Bounds", "Binaries", "End"] {
        assert!(text.contains(section), "missing {section} in\n{text}");
    }
    assert!(text.contains(" link: x - 7 d <= 3"));
    assert!(text.contains(" 0 <= x <= 10"));

    let mut q = QuadraticProgram::new();
    let a = q.add_var("a", 0.0, 1.0, 0.0);
    q.add_quadratic(a, a, 2.0);
    let text = write_lp_format(&q.lp, None, Some(&q.quadratic));
    assert!(text.contains("[ 2 a ^2 ] / 2"), "{text}");
}

#[test]
fn dumping_backend_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let dump = DumpingBackend::new(default_backend(), dir.path()).unwrap();
    let mut p = LinearProgram::new(Sense::Maximize);
    let x = p.add_var("x", 0.0, 1.0, 1.0);
    p.add_constraint("c", vec![(x, 1.0)], Relation::Le, 1.0);
    dump.solve_lp(&p, &opts()).unwrap();
    let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(files.len(), 1);
}

mod props {
    use super::*;
    use proptest::prelude::*;

    fn random_milp(seed: Vec<f64>, n: usize, rows: usize) -> MixedIntegerProgram {
        let mut it = seed.into_iter().cycle();
        let mut p = MixedIntegerProgram::new(Sense::Maximize);
        let mut vars = Vec::new();
        for j in 0..n {
            let c = it.next().unwrap() * 2.0 - 1.0;
            let v = if j % 2 == 0 {
                p.add_binary(format!("d{j}"), c)
            } else {
                p.add_var(format!("x{j}"), 0.0, 1.0 + it.next().unwrap(), c)
            };
            vars.push(v);
        }
        for r in 0..rows {
            let terms = vars.iter().map(|&v| (v, it.next().unwrap() * 2.0 - 0.5)).collect();
            p.add_constraint(format!("r{r}"), terms, Relation::Le, 0.5 + it.next().unwrap());
        }
        p
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        // The dense reference and the microlp adapter agree on random small MILPs.
        #[test]
        fn backends_agree_on_milp(seed in prop::collection::vec(0.0f64..1.0, 40), n in 2usize..7, rows in 1usize..5) {
            let p = random_milp(seed, n, rows);
            let a = BackendKind::Microlp.backend().solve_milp(&p, &opts()).unwrap();
            let b = BackendKind::Dense.backend().solve_milp(&p, &opts()).unwrap();
            prop_assert_eq!(a.status, b.status);
            if a.is_optimal() {
                prop_assert!((a.objective.unwrap() - b.objective.unwrap()).abs() < 1e-7);
            }
        }

        // A hand-built feasible point is accepted and no better than the optimum.
        #[test]
        fn optimum_dominates_feasible_point(seed in prop::collection::vec(0.0f64..1.0, 40), n in 2usize..7, rows in 1usize..5) {
            let p = random_milp(seed, n, rows);
            let zero = vec![0.0; n];
            prop_assert!(p.lp.max_violation(&zero) <= FEASIBILITY_TOL);
            let out = default_backend().solve_milp(&p, &opts()).unwrap();
            prop_assert!(out.is_optimal());
            prop_assert!(out.objective.unwrap() >= p.lp.evaluate(&zero) - 1e-7);
            let again = default_backend().solve_milp(&p, &opts()).unwrap();
            prop_assert!((again.objective.unwrap() - out.objective.unwrap()).abs() < 1e-7);
        }

        // Strictly convex box QPs: both backends reach the same KKT point.
        #[test]
        fn qp_box_projection(target in prop::collection::vec(-1.0f64..2.0, 1..6)) {
            let mut p = QuadraticProgram::new();
            let vars: Vec<Var> = target.iter().enumerate()
                .map(|(i, &t)| p.add_var(format!("u{i}"), 0.0, 1.0, -2.0 * t))
                .collect();
            for &v in &vars {
                p.add_quadratic(v, v, 2.0);
            }
            let terms = vars.iter().map(|&v| (v, 1.0)).collect();
            p.add_constraint("sum", terms, Relation::Ge, 0.25);
            for b in backends() {
                let out = b.solve_qp(&p, &opts()).unwrap();
                prop_assert!(out.kkt_residual.unwrap() <= KKT_TOL);
                for (v, &t) in vars.iter().zip(&target) {
                    if t >= 0.25 {
                        prop_assert!((out.value(*v) - t.clamp(0.0, 1.0)).abs() < 1e-7);
                    }
                }
            }
        }
    }
}
