//! Dense two-phase simplex for small standard-form linear programs:
//!
//! ```text
//! minimise  c·x   subject to  A x = b,  x >= 0
//! ```
//!
//! Bland's rule is used throughout, which is slow on large problems but never
//! cycles. The grasp problems solved here have at most a few dozen columns.

use alloc::vec;
use alloc::vec::Vec;

const EPS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// rows x (cols + 1); last column is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.t[r][self.cols]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[row].clone();
        for (r, line) in self.t.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let f = line[col];
            if f != 0.0 {
                for (v, pv) in line.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Minimises `cost` over the columns flagged in `allowed`. Returns false if
    /// the objective is unbounded below.
    fn optimise(&mut self, cost: &[f64], allowed: &[bool]) -> bool {
        let rows = self.t.len();
        loop {
            // reduced costs: c_j - c_B B^-1 A_j, computed from the tableau
            let mut entering = None;
            for j in 0..self.cols {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut rc = cost[j];
                for r in 0..rows {
                    rc -= cost[self.basis[r]] * self.t[r][j];
                }
                if rc < -EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else {
                return true;
            };
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..rows {
                let a = self.t[r][col];
                if a > EPS {
                    let ratio = self.rhs(r) / a;
                    match leaving {
                        None => leaving = Some((r, ratio)),
                        Some((lr, best)) => {
                            if ratio < best - EPS || (ratio <= best + EPS && self.basis[r] < self.basis[lr]) {
                                leaving = Some((r, ratio));
                            }
                        }
                    }
                }
            }
            match leaving {
                Some((row, _)) => self.pivot(row, col),
                None => return false,
            }
        }
    }
}

/// Solves `min c·x, A x = b, x >= 0`. `a` is row-major with `c.len()` columns.
pub fn solve(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> LpOutcome {
    let n = c.len();
    let m = a.len();
    assert_eq!(b.len(), m, "row count mismatch");
    // Columns: n structural, then m artificials.
    let cols = n + m;
    let mut t = Vec::with_capacity(m);
    for (r, row) in a.iter().enumerate() {
        assert_eq!(row.len(), n, "column count mismatch");
        let sign = if b[r] < 0.0 { -1.0 } else { 1.0 };
        let mut line = vec![0.0; cols + 1];
        for (j, v) in row.iter().enumerate() {
            line[j] = sign * v;
        }
        line[n + r] = 1.0;
        line[cols] = sign * b[r];
        t.push(line);
    }
    let mut tab = Tableau {
        t,
        basis: (n..n + m).collect(),
        cols,
    };

    // Phase 1: drive the artificials to zero.
    let mut phase1 = vec![0.0; cols];
    for v in phase1.iter_mut().skip(n) {
        *v = 1.0;
    }
    let all = vec![true; cols];
    tab.optimise(&phase1, &all);
    let infeas: f64 = (0..m).filter(|&r| tab.basis[r] >= n).map(|r| tab.rhs(r)).sum();
    if infeas > 1e-8 {
        return LpOutcome::Infeasible;
    }
    // Pivot any zero-level artificials out of the basis where possible.
    for r in 0..m {
        if tab.basis[r] >= n {
            if let Some(j) = (0..n).find(|&j| tab.t[r][j].abs() > EPS) {
                tab.pivot(r, j);
            }
        }
    }

    // Phase 2 over structural columns only.
    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(c);
    let mut allowed = vec![false; cols];
    for v in allowed.iter_mut().take(n) {
        *v = true;
    }
    if !tab.optimise(&cost, &allowed) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for r in 0..m {
        if tab.basis[r] < n {
            x[tab.basis[r]] = tab.rhs(r);
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    LpOutcome::Optimal { x, value }
}

/// Numerical rank of a row-major matrix by Gaussian elimination.
pub fn rank(rows: &[Vec<f64>], tol: f64) -> usize {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let pivot = (rank..m.len()).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()));
        let Some(p) = pivot else { break };
        if m[p][col].abs() <= tol {
            continue;
        }
        m.swap(rank, p);
        let pivot_row = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank {
                let f = row[col] / pivot_row[col];
                for (x, &y) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= f * y;
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}
