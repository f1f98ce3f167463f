//! Dense two-phase simplex for the small LPs the geometry layer needs:
//! feasibility with interior margin (Chebyshev center), linear objectives
//! over H-polytopes, and exact containment certificates.
//!
//! Solves `max cᵀx  s.t.  Ax ≤ b` with free variables (split internally as
//! `x = u − v`). Bland's rule keeps pivoting cycle-free; problems here have
//! at most a few variables and a few hundred rows.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct LpResult {
    pub status: LpStatus,
    pub x: DVector<f64>,
    pub objective: f64,
}

const EPS: f64 = 1e-9;
const MAX_ITERS: usize = 50_000;

struct Tableau {
    /// m × (n_total + 1); last column is the rhs.
    rows: DMatrix<f64>,
    basis: Vec<usize>,
    n_total: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.rows[(row, col)];
        let ncols = self.rows.ncols();
        for j in 0..ncols {
            self.rows[(row, j)] /= piv;
        }
        for i in 0..self.rows.nrows() {
            if i == row {
                continue;
            }
            let factor = self.rows[(i, col)];
            if factor == 0.0 {
                continue;
            }
            for j in 0..ncols {
                let delta = factor * self.rows[(row, j)];
                self.rows[(i, j)] -= delta;
            }
        }
        self.basis[row] = col;
    }

    /// Maximize over the allowed columns with Bland's rule. `cost[j]` is the
    /// objective coefficient of variable j.
    fn run(&mut self, cost: &[f64], allowed: &[bool]) -> LpStatus {
        let m = self.rows.nrows();
        // reduced costs for the current basis
        let mut obj = vec![0.0; self.n_total + 1];
        obj[..self.n_total].copy_from_slice(cost);
        for (i, &bv) in self.basis.iter().enumerate() {
            let cb = cost[bv];
            if cb == 0.0 {
                continue;
            }
            for j in 0..=self.n_total {
                let delta = cb * self.rows[(i, j)];
                obj[j] -= delta;
            }
        }

        for _ in 0..MAX_ITERS {
            // Bland: first allowed column with positive reduced cost
            let mut entering = None;
            for (j, &a) in allowed.iter().enumerate() {
                if a && obj[j] > EPS {
                    entering = Some(j);
                    break;
                }
            }
            let col = match entering {
                Some(c) => c,
                None => return LpStatus::Optimal,
            };
            // ratio test; ties broken by smallest basis variable (Bland)
            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.rows[(i, col)];
                if a > EPS {
                    let ratio = self.rows[(i, self.n_total)] / a;
                    match leaving {
                        None => leaving = Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - EPS
                                || (ratio < lr + EPS && self.basis[i] < self.basis[li])
                            {
                                leaving = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            let row = match leaving {
                Some((r, _)) => r,
                None => return LpStatus::Unbounded,
            };
            self.pivot(row, col);
            // update the reduced-cost row
            let factor = obj[col];
            for j in 0..=self.n_total {
                let delta = factor * self.rows[(row, j)];
                obj[j] -= delta;
            }
        }
        LpStatus::IterationLimit
    }
}

/// Maximize `cᵀx` subject to `Ax ≤ b`, `x` free.
pub fn solve_lp(c: &DVector<f64>, a: &DMatrix<f64>, b: &DVector<f64>) -> LpResult {
    let n = c.len();
    let m = a.nrows();
    debug_assert_eq!(a.ncols(), n);
    debug_assert_eq!(b.len(), m);

    if m == 0 {
        // no constraints: optimal only if c = 0
        let status = if c.iter().all(|&v| v == 0.0) {
            LpStatus::Optimal
        } else {
            LpStatus::Unbounded
        };
        return LpResult {
            status,
            x: DVector::zeros(n),
            objective: 0.0,
        };
    }

    // variables: u(n), v(n) with x = u - v, slack(m), artificial (as needed)
    let mut art_rows: Vec<usize> = Vec::new();
    for i in 0..m {
        if b[i] < 0.0 {
            art_rows.push(i);
        }
    }
    let n_art = art_rows.len();
    let n_total = 2 * n + m + n_art;

    let mut rows = DMatrix::zeros(m, n_total + 1);
    let mut basis = vec![0usize; m];
    let mut art_at = 0;
    for i in 0..m {
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            rows[(i, j)] = flip * a[(i, j)];
            rows[(i, n + j)] = -flip * a[(i, j)];
        }
        rows[(i, 2 * n + i)] = flip; // slack
        rows[(i, n_total)] = flip * b[i];
        if flip < 0.0 {
            let col = 2 * n + m + art_at;
            rows[(i, col)] = 1.0;
            basis[i] = col;
            art_at += 1;
        } else {
            basis[i] = 2 * n + i;
        }
    }

    let mut tab = Tableau {
        rows,
        basis,
        n_total,
    };

    // Phase 1: drive artificials to zero.
    if n_art > 0 {
        let mut cost = vec![0.0; n_total];
        for j in 2 * n + m..n_total {
            cost[j] = -1.0;
        }
        let allowed = vec![true; n_total];
        let status = tab.run(&cost, &allowed);
        if status == LpStatus::IterationLimit {
            return LpResult {
                status,
                x: DVector::zeros(n),
                objective: 0.0,
            };
        }
        let infeas: f64 = tab
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &bv)| bv >= 2 * n + m)
            .map(|(i, _)| tab.rows[(i, n_total)])
            .sum();
        if infeas > 1e-7 {
            return LpResult {
                status: LpStatus::Infeasible,
                x: DVector::zeros(n),
                objective: 0.0,
            };
        }
        // pivot remaining (zero-valued) artificials out where possible
        for i in 0..m {
            if tab.basis[i] >= 2 * n + m {
                if let Some(col) = (0..2 * n + m).find(|&j| tab.rows[(i, j)].abs() > EPS) {
                    tab.pivot(i, col);
                }
            }
        }
    }

    // Phase 2: real objective over u, v; artificials locked out.
    let mut cost = vec![0.0; n_total];
    for j in 0..n {
        cost[j] = c[j];
        cost[n + j] = -c[j];
    }
    let mut allowed = vec![true; n_total];
    for a in allowed.iter_mut().skip(2 * n + m) {
        *a = false;
    }
    let status = tab.run(&cost, &allowed);

    let mut x = DVector::zeros(n);
    for (i, &bv) in tab.basis.iter().enumerate() {
        let val = tab.rows[(i, n_total)];
        if bv < n {
            x[bv] += val;
        } else if bv < 2 * n {
            x[bv - n] -= val;
        }
    }
    let objective = c.dot(&x);
    LpResult {
        status,
        x,
        objective,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    #[test]
    fn simple_box_maximization() {
        // max x + y over the unit box
        let a = mat(&[
            &[1.0, 0.0],
            &[-1.0, 0.0],
            &[0.0, 1.0],
            &[0.0, -1.0],
        ]);
        let b = DVector::from_vec(vec![1.0, 0.0, 1.0, 0.0]);
        let c = DVector::from_vec(vec![1.0, 1.0]);
        let res = solve_lp(&c, &a, &b);
        assert_eq!(res.status, LpStatus::Optimal);
        assert!((res.objective - 2.0).abs() < 1e-8);
    }

    #[test]
    fn negative_rhs_feasible() {
        // x ≥ 2 disguised as -x ≤ -2, x ≤ 5; max -x → x = 2
        let a = mat(&[&[-1.0], &[1.0]]);
        let b = DVector::from_vec(vec![-2.0, 5.0]);
        let c = DVector::from_vec(vec![-1.0]);
        let res = solve_lp(&c, &a, &b);
        assert_eq!(res.status, LpStatus::Optimal);
        assert!((res.x[0] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn detects_infeasible() {
        // x ≤ 1 and x ≥ 3
        let a = mat(&[&[1.0], &[-1.0]]);
        let b = DVector::from_vec(vec![1.0, -3.0]);
        let c = DVector::from_vec(vec![1.0]);
        let res = solve_lp(&c, &a, &b);
        assert_eq!(res.status, LpStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let a = mat(&[&[-1.0, 0.0]]);
        let b = DVector::from_vec(vec![0.0]);
        let c = DVector::from_vec(vec![1.0, 0.0]);
        let res = solve_lp(&c, &a, &b);
        assert_eq!(res.status, LpStatus::Unbounded);
    }

    #[test]
    fn free_variables_take_negative_values() {
        // max -x s.t. x ≥ -4 (as -x ≤ 4), x ≤ 10
        let a = mat(&[&[-1.0], &[1.0]]);
        let b = DVector::from_vec(vec![4.0, 10.0]);
        let c = DVector::from_vec(vec![-1.0]);
        let res = solve_lp(&c, &a, &b);
        assert_eq!(res.status, LpStatus::Optimal);
        assert!((res.x[0] + 4.0).abs() < 1e-8);
    }

    #[test]
    fn chebyshev_style_lp() {
        // max r s.t. x + r ≤ 1, -x + r ≤ 1 → r = 1 at x = 0
        let a = mat(&[&[1.0, 1.0], &[-1.0, 1.0]]);
        let b = DVector::from_vec(vec![1.0, 1.0]);
        let c = DVector::from_vec(vec![0.0, 1.0]);
        let res = solve_lp(&c, &a, &b);
        assert_eq!(res.status, LpStatus::Optimal);
        assert!((res.objective - 1.0).abs() < 1e-8);
    }
}
