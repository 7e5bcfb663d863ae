//! Convex quadratic programming by the Goldfarb–Idnani dual active-set method.
//!
//! Strictly convex problems are solved directly. A zero quadratic term is
//! handed to the backend's LP solver. Any other positive semidefinite but
//! singular term is handled by proximal-point iterations, each of which is a
//! strictly convex subproblem.
//!
//! Problem sizes here are tiny (two variables for the inspection oracle, `n·m`
//! for the box oracle), so every step recomputes its projections from scratch
//! with dense factorizations instead of maintaining QR updates.

use nalgebra::{DMatrix, DVector};

use super::{Backend, QuadraticProgram, RawOutcome, Relation, SolveOptions, SolverError};

const ACTIVE_TOL: f64 = 1e-12;
const MAX_PROXIMAL_ROUNDS: usize = 20_000;

/// One constraint `normal · x ≥ rhs` (or `= rhs` when `equality`).
#[derive(Debug, Clone)]
struct Row {
    normal: DVector<f64>,
    rhs: f64,
    equality: bool,
}

pub(super) fn solve<B: Backend + ?Sized>(
    backend: &B,
    p: &QuadraticProgram,
    opts: &SolveOptions,
) -> Result<RawOutcome, SolverError> {
    if p.is_zero_quadratic() {
        return backend.solve_lp_raw(&p.lp, opts);
    }
    let n = p.lp.num_vars();
    let g = DMatrix::from_row_slice(n, n, &p.quadratic);
    let c = DVector::from_column_slice(&p.lp.objective);
    let rows = rows_of(p);
    if g.clone().cholesky().is_some() {
        return Ok(match goldfarb_idnani(&g, &c, &rows)? {
            GiResult::Optimal { x, multipliers } => {
                let kkt = kkt_residual(&g, &c, &rows, &x, &multipliers);
                RawOutcome::Optimal {
                    values: x.iter().copied().collect(),
                    kkt_residual: Some(kkt),
                }
            }
            GiResult::Infeasible => RawOutcome::Infeasible,
        });
    }
    check_psd(&g)?;
    proximal(&g, &c, &rows)
}

fn rows_of(p: &QuadraticProgram) -> Vec<Row> {
    let n = p.lp.num_vars();
    let mut rows = Vec::new();
    for con in &p.lp.constraints {
        let mut normal = DVector::zeros(n);
        for &(v, a) in &con.terms {
            normal[v.0] += a;
        }
        match con.relation {
            Relation::Ge => rows.push(Row { normal, rhs: con.rhs, equality: false }),
            Relation::Le => rows.push(Row { normal: -normal, rhs: -con.rhs, equality: false }),
            Relation::Eq => rows.push(Row { normal, rhs: con.rhs, equality: true }),
        }
    }
    for (i, v) in p.lp.variables.iter().enumerate() {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        if v.lower == v.upper {
            rows.push(Row { normal: e, rhs: v.lower, equality: true });
            continue;
        }
        if v.lower.is_finite() {
            rows.push(Row { normal: e.clone(), rhs: v.lower, equality: false });
        }
        if v.upper.is_finite() {
            rows.push(Row { normal: -e, rhs: -v.upper, equality: false });
        }
    }
    rows
}

fn check_psd(g: &DMatrix<f64>) -> Result<(), SolverError> {
    let eig = g.clone().symmetric_eigen();
    let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -1e-10 * (1.0 + scale) {
        return Err(SolverError::NonConvex(format!("smallest eigenvalue {min:e}")));
    }
    Ok(())
}

enum GiResult {
    Optimal {
        x: DVector<f64>,
        /// One multiplier per row, zero for inactive rows.
        multipliers: Vec<f64>,
    },
    Infeasible,
}

fn goldfarb_idnani(g: &DMatrix<f64>, c: &DVector<f64>, rows: &[Row]) -> Result<GiResult, SolverError> {
    let n = c.len();
    let ginv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| SolverError::NumericalFailure("quadratic term is singular".into()))?;
    let mut x = -(&ginv * c);
    let mut active: Vec<usize> = Vec::new();
    let mut u: Vec<f64> = Vec::new();
    let scale = 1.0 + c.amax() + rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
    let tol = 1e-11 * scale;
    let max_iter = 10 * (rows.len() + n) + 100;

    for _ in 0..max_iter {
        // Pick the most violated constraint not yet active.
        let mut pick: Option<(usize, f64, f64)> = None;
        for (i, row) in rows.iter().enumerate() {
            if active.contains(&i) {
                continue;
            }
            let s = row.normal.dot(&x) - row.rhs;
            let (viol, orient) = if row.equality {
                (s.abs(), if s > 0.0 { -1.0 } else { 1.0 })
            } else {
                (-s, 1.0)
            };
            let rel = viol / (1.0 + row.normal.amax());
            if rel > tol && pick.is_none_or(|(_, v, _)| rel > v) {
                pick = Some((i, rel, orient));
            }
        }
        let Some((p, _, orient)) = pick else {
            let mut multipliers = vec![0.0; rows.len()];
            for (&i, &ui) in active.iter().zip(&u) {
                multipliers[i] = ui;
            }
            return Ok(GiResult::Optimal { x, multipliers });
        };
        let np = &rows[p].normal * orient;
        let bp = rows[p].rhs * orient;
        let mut u_plus = 0.0;

        loop {
            let (z, r, gn_norm) = directions(&ginv, rows, &active, &np)?;
            // Largest dual step keeping inequality multipliers non-negative.
            let mut t1 = f64::INFINITY;
            let mut drop: Option<usize> = None;
            for (k, &i) in active.iter().enumerate() {
                if !rows[i].equality && r[k] > ACTIVE_TOL {
                    let ratio = u[k] / r[k];
                    if ratio < t1 {
                        t1 = ratio;
                        drop = Some(k);
                    }
                }
            }
            let s = np.dot(&x) - bp;
            let zn = z.dot(&np);
            // Relative test: a row that is nearly a combination of the active
            // set must never join it, or the active-set system turns singular.
            let t2 = if z.norm() <= 1e-9 * gn_norm || zn <= 0.0 {
                f64::INFINITY
            } else {
                -s / zn
            };
            let t = t1.min(t2);
            if t.is_infinite() {
                return Ok(GiResult::Infeasible);
            }
            if t2.is_infinite() {
                for (k, rk) in r.iter().enumerate() {
                    u[k] -= t * rk;
                }
                u_plus += t;
                let k = drop.expect("finite partial step drops a constraint");
                active.remove(k);
                u.remove(k);
                continue;
            }
            x += &z * t;
            for (k, rk) in r.iter().enumerate() {
                u[k] -= t * rk;
            }
            u_plus += t;
            if t == t2 {
                active.push(p);
                u.push(u_plus * orient);
                break;
            }
            let k = drop.expect("partial step drops a constraint");
            active.remove(k);
            u.remove(k);
        }
    }
    Err(SolverError::NumericalFailure(
        "dual active-set iteration limit reached".into(),
    ))
}

/// Primal direction `z = H n` and dual direction `r = N* n` for the current
/// active set, plus `‖G⁻¹n‖` for scale.
fn directions(
    ginv: &DMatrix<f64>,
    rows: &[Row],
    active: &[usize],
    np: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>, f64), SolverError> {
    let gn = ginv * np;
    let gn_norm = gn.norm();
    if active.is_empty() {
        return Ok((gn, DVector::zeros(0), gn_norm));
    }
    let n = np.len();
    let mut nmat = DMatrix::zeros(n, active.len());
    for (k, &i) in active.iter().enumerate() {
        nmat.set_column(k, &rows[i].normal);
    }
    let gn_mat = ginv * &nmat;
    let m = nmat.transpose() * &gn_mat;
    let r = m
        .lu()
        .solve(&(nmat.transpose() * &gn))
        .ok_or_else(|| SolverError::NumericalFailure("active constraints became dependent".into()))?;
    let z = gn - gn_mat * &r;
    Ok((z, r, gn_norm))
}

/// Max-norm KKT residual: stationarity, primal and dual feasibility,
/// complementarity. Multipliers are relative to the stored row normals.
fn kkt_residual(
    g: &DMatrix<f64>,
    c: &DVector<f64>,
    rows: &[Row],
    x: &DVector<f64>,
    multipliers: &[f64],
) -> f64 {
    let mut grad = g * x + c;
    let mut worst: f64 = 0.0;
    for (row, &u) in rows.iter().zip(multipliers) {
        grad -= &row.normal * u;
        let s = row.normal.dot(x) - row.rhs;
        if row.equality {
            worst = worst.max(s.abs());
        } else {
            worst = worst.max((-s).max(0.0));
            worst = worst.max((-u).max(0.0));
            worst = worst.max((u * s).abs());
        }
    }
    worst.max(grad.amax())
}

/// Proximal point method for singular PSD quadratic terms.
fn proximal(g: &DMatrix<f64>, c: &DVector<f64>, rows: &[Row]) -> Result<RawOutcome, SolverError> {
    let n = c.len();
    let rho = 1e-2 * (1.0 + g.amax());
    let greg = g + DMatrix::identity(n, n) * rho;
    let mut center = DVector::zeros(n);
    for _ in 0..MAX_PROXIMAL_ROUNDS {
        let shifted = c - &center * rho;
        match goldfarb_idnani(&greg, &shifted, rows)? {
            GiResult::Infeasible => return Ok(RawOutcome::Infeasible),
            GiResult::Optimal { x, multipliers } => {
                let moved = (&x - &center).amax();
                center = x;
                if moved < 1e-10 {
                    let kkt = kkt_residual(g, c, rows, &center, &multipliers);
                    return Ok(RawOutcome::Optimal {
                        values: center.iter().copied().collect(),
                        kkt_residual: Some(kkt),
                    });
                }
            }
        }
    }
    Err(SolverError::NumericalFailure(
        "proximal iterations did not converge".into(),
    ))
}
