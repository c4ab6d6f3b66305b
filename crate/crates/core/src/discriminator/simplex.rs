//! Dense primal simplex for `max cᵀx  s.t.  A x ≤ b, x ≥ 0` with `b > 0`.
//!
//! Slack variables give a feasible starting basis, so no phase I is needed.
//! Entering and leaving variables follow Bland's rule (lowest index), which
//! guarantees termination on degenerate problems.

use crate::error::{Error, Result};

pub const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexSolution {
    /// Values of the structural variables (slacks dropped).
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

/// Solves the LP given row-major `a` (`rows × cols`).
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<SimplexSolution> {
    let rows = a.len();
    let cols = c.len();
    if b.len() != rows || a.iter().any(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch("LP data shapes disagree".into()));
    }
    if b.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidArgument("simplex requires a strictly positive right-hand side".into()));
    }
    if c.iter().chain(a.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite LP coefficient".into()));
    }

    let width = cols + rows;
    // Tableau rows: [A | I | b].
    let mut t: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .enumerate()
        .map(|(i, (row, &bi))| {
            let mut r = Vec::with_capacity(width + 1);
            r.extend_from_slice(row);
            r.extend((0..rows).map(|j| if i == j { 1.0 } else { 0.0 }));
            r.push(bi);
            r
        })
        .collect();
    // Reduced costs c_j − c_Bᵀ B⁻¹ A_j; slack costs are zero.
    let mut reduced: Vec<f64> = c.iter().copied().chain(std::iter::repeat_n(0.0, rows)).collect();
    let mut basis: Vec<usize> = (cols..width).collect();
    let mut objective = 0.0;

    let max_iters = 50 * (width + 1) * (rows + 1);
    let mut iterations = 0;
    loop {
        let Some(enter) = reduced.iter().position(|&r| r > OPT_TOL) else {
            break;
        };
        // Ratio test; ties broken by the lowest basic variable index.
        let mut leave: Option<(usize, f64)> = None;
        for (i, row) in t.iter().enumerate() {
            let coef = row[enter];
            if coef > PIVOT_TOL {
                let ratio = row[width] / coef;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((j, best)) => {
                        if ratio < best - PIVOT_TOL || (ratio <= best + PIVOT_TOL && basis[i] < basis[j]) {
                            Some((i, ratio))
                        } else {
                            Some((j, best))
                        }
                    }
                };
            }
        }
        let Some((pivot_row, _)) = leave else {
            return Err(Error::Internal(format!("LP unbounded along column {enter}")));
        };

        let pivot = t[pivot_row][enter];
        t[pivot_row].iter_mut().for_each(|v| *v /= pivot);
        let pr = t[pivot_row].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != pivot_row {
                let f = row[enter];
                if f != 0.0 {
                    row.iter_mut().zip(&pr).for_each(|(v, p)| *v -= f * p);
                }
            }
        }
        let f = reduced[enter];
        reduced.iter_mut().zip(&pr).for_each(|(r, p)| *r -= f * p);
        objective += f * pr[width];
        basis[pivot_row] = enter;

        iterations += 1;
        if iterations > max_iters {
            return Err(Error::Numerical(format!("simplex did not converge in {max_iters} pivots")));
        }
    }

    let mut x = vec![0.0; cols];
    for (i, &var) in basis.iter().enumerate() {
        if var < cols {
            // Clip roundoff-sized negatives from the tableau.
            x[var] = t[i][width].max(0.0);
        }
    }
    Ok(SimplexSolution { x, objective, iterations })
}
