//! Exact primal active-set solver for the box-and-trace quadratic program
//!
//! ```text
//!     minimize    c' G c - 2 q' c
//!     subject to  Σ c_j = trace
//!                 lower_j <= c_j <= upper_j
//! ```
//!
//! with `G` symmetric positive (semi)definite and at most a dozen
//! variables. The pivot order is fixed (ascending index, smallest first on
//! ties), so identical inputs produce bit-identical solutions.

use crate::error::{Error, Result};

const MULTIPLIER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bound {
    Free,
    Lower,
    Upper,
}

pub(crate) fn solve_box_trace_qp(
    g: &[Vec<f64>],
    q: &[f64],
    lower: &[f64],
    upper: &[f64],
    trace: f64,
) -> Result<Vec<f64>> {
    let n = q.len();
    assert!(n > 0 && g.len() == n && lower.len() == n && upper.len() == n);

    // Deterministic feasible start: everything at its lower bound, then
    // pour the remaining trace into variables in ascending index order.
    let mut c: Vec<f64> = lower.to_vec();
    let mut status = vec![Bound::Lower; n];
    let mut deficit = trace - lower.iter().sum::<f64>();
    if deficit < 0.0 {
        // All-lower already oversums; for the symmetric boxes used here
        // that cannot happen, but handle it by pouring from the top.
        return Err(Error::SolverStall);
    }
    for j in 0..n {
        if deficit <= 0.0 {
            break;
        }
        let room = upper[j] - lower[j];
        if deficit >= room {
            c[j] = upper[j];
            status[j] = Bound::Upper;
            deficit -= room;
        } else {
            c[j] = lower[j] + deficit;
            status[j] = Bound::Free;
            deficit = 0.0;
        }
    }
    if deficit > 1e-9 * trace.abs().max(1.0) {
        return Err(Error::SolverStall); // caller validates feasibility first
    }

    let max_iter = 100 * (n + 1) * (n + 1);
    for _ in 0..max_iter {
        let free: Vec<usize> = (0..n).filter(|&j| status[j] == Bound::Free).collect();

        if free.is_empty() {
            // Fully pinned point; optimal iff some multiplier split works.
            let grad = gradient(g, q, &c);
            let mut lam_lo = f64::NEG_INFINITY; // from lower bounds: λ >= -grad_j
            let mut lam_hi = f64::INFINITY; // from upper bounds: λ <= -grad_j
            for j in 0..n {
                match status[j] {
                    Bound::Lower => lam_lo = lam_lo.max(-grad[j]),
                    Bound::Upper => lam_hi = lam_hi.min(-grad[j]),
                    Bound::Free => unreachable!(),
                }
            }
            if lam_lo <= lam_hi + MULTIPLIER_TOL {
                return Ok(c);
            }
            let lam = 0.5 * (lam_lo + lam_hi);
            if let Some(j) = most_negative_multiplier(&grad, &status, lam) {
                status[j] = Bound::Free;
                continue;
            }
            return Ok(c);
        }

        // Equality-constrained subproblem on the free variables.
        let target = solve_free_subproblem(g, q, &c, &status, &free, trace)?;

        // Ratio test toward the subproblem optimum.
        let mut beta = 1.0f64;
        let mut blocking: Option<(usize, Bound)> = None;
        for (i, &j) in free.iter().enumerate() {
            let d = target[i] - c[j];
            if d > 0.0 && target[i] > upper[j] {
                let b = (upper[j] - c[j]) / d;
                if b < beta {
                    beta = b;
                    blocking = Some((j, Bound::Upper));
                }
            } else if d < 0.0 && target[i] < lower[j] {
                let b = (lower[j] - c[j]) / d;
                if b < beta {
                    beta = b;
                    blocking = Some((j, Bound::Lower));
                }
            }
        }

        if let Some((jb, side)) = blocking {
            for (i, &j) in free.iter().enumerate() {
                c[j] += beta * (target[i] - c[j]);
            }
            // Snap the blocking variable exactly onto its bound.
            c[jb] = match side {
                Bound::Upper => upper[jb],
                Bound::Lower => lower[jb],
                Bound::Free => unreachable!(),
            };
            status[jb] = side;
            continue;
        }

        // Full step accepted: subproblem optimum is feasible.
        for (i, &j) in free.iter().enumerate() {
            c[j] = target[i];
        }
        let grad = gradient(g, q, &c);
        let lam = -grad[free[0]];
        match most_negative_multiplier(&grad, &status, lam) {
            Some(j) => status[j] = Bound::Free,
            None => return Ok(c),
        }
    }
    Err(Error::SolverStall)
}

/// gradient of c'Gc - 2q'c, i.e. 2(Gc - q).
fn gradient(g: &[Vec<f64>], q: &[f64], c: &[f64]) -> Vec<f64> {
    let n = c.len();
    let mut grad = vec![0.0; n];
    for j in 0..n {
        let mut s = 0.0;
        for k in 0..n {
            s += g[j][k] * c[k];
        }
        grad[j] = 2.0 * (s - q[j]);
    }
    grad
}

/// Most negative KKT multiplier among pinned variables, given the trace
/// multiplier `lam`. Ties resolve to the lowest index. At an upper bound
/// the multiplier is `-(grad_j + λ)`, at a lower bound `grad_j + λ`.
fn most_negative_multiplier(grad: &[f64], status: &[Bound], lam: f64) -> Option<usize> {
    let mut worst: Option<(usize, f64)> = None;
    for j in 0..grad.len() {
        let mu = match status[j] {
            Bound::Free => continue,
            Bound::Upper => -(grad[j] + lam),
            Bound::Lower => grad[j] + lam,
        };
        if mu < -MULTIPLIER_TOL && worst.map_or(true, |(_, w)| mu < w) {
            worst = Some((j, mu));
        }
    }
    worst.map(|(j, _)| j)
}

/// Optimum of the subproblem with pinned variables frozen: solve the
/// bordered KKT system
///
/// ```text
///     [2 G_FF  1] [c_F]   [2 (q_F - G_FB c_B)]
///     [1'      0] [ λ ] = [trace - Σ c_B     ]
/// ```
fn solve_free_subproblem(
    g: &[Vec<f64>],
    q: &[f64],
    c: &[f64],
    status: &[Bound],
    free: &[usize],
    trace: f64,
) -> Result<Vec<f64>> {
    let m = free.len();
    let n = c.len();
    let mut a = vec![vec![0.0; m + 1]; m + 1];
    let mut rhs = vec![0.0; m + 1];
    for (i, &j) in free.iter().enumerate() {
        let mut b = q[j];
        for k in 0..n {
            if status[k] != Bound::Free {
                b -= g[j][k] * c[k];
            }
        }
        rhs[i] = 2.0 * b;
        for (i2, &j2) in free.iter().enumerate() {
            a[i][i2] = 2.0 * g[j][j2];
        }
        a[i][m] = 1.0;
        a[m][i] = 1.0;
    }
    let pinned_sum: f64 =
        (0..n).filter(|&k| status[k] != Bound::Free).map(|k| c[k]).sum();
    rhs[m] = trace - pinned_sum;
    solve_dense(&mut a, &mut rhs)?;
    rhs.truncate(m);
    Ok(rhs)
}

/// In-place LU solve with partial pivoting. Small systems only.
fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Result<()> {
    let n = b.len();
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < 1e-300 {
            return Err(Error::SolverStall);
        }
        if pivot != col {
            a.swap(pivot, col);
            b.swap(pivot, col);
        }
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                for k in col..n {
                    a[row][k] -= factor * a[col][k];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row][k] * b[k];
        }
        b[row] = s / a[row][row];
    }
    Ok(())
}
