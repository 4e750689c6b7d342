//! Textbook two-phase tableau simplex with Bland's rule, for
//! `min c x  s.t.  A x = 1, x >= 0` with 0/1 columns.

const TOL: f64 = 1e-9;

struct Tableau {
    /// `m` constraint rows followed by the cost row; last column is the rhs.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.t[i][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Runs Bland's rule on the cost row over columns `< allowed`.
    /// Returns false if unbounded.
    fn optimize(&mut self, allowed: usize) -> bool {
        let m = self.basis.len();
        loop {
            let Some(c) = (0..allowed).find(|&j| self.t[m][j] < -TOL) else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.t[i][c];
                if a > TOL {
                    let ratio = self.rhs(i) / a;
                    let better = match leave {
                        None => true,
                        Some((l, lr)) => ratio < lr - TOL || (ratio <= lr + TOL && self.basis[i] < self.basis[l]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else { return false };
            self.pivot(r, c);
        }
    }
}

/// Optimal objective, or `None` when the system is infeasible.
pub fn solve_partition_lp(rows: usize, columns: &[(f64, Vec<usize>)]) -> Option<f64> {
    let n = columns.len();
    let width = n + rows;
    let mut t = vec![vec![0.0; width + 1]; rows + 1];
    for (j, (_, support)) in columns.iter().enumerate() {
        for &i in support {
            t[i][j] = 1.0;
        }
    }
    for (i, row) in t.iter_mut().enumerate().take(rows) {
        row[n + i] = 1.0;
        row[width] = 1.0;
    }
    // Phase one cost row: minimise the artificial sum.
    for j in 0..n {
        t[rows][j] = -(0..rows).map(|i| t[i][j]).sum::<f64>();
    }
    t[rows][width] = -(rows as f64);
    let mut tab = Tableau {
        t,
        basis: (n..width).collect(),
        width,
    };
    tab.optimize(width);
    if -tab.t[rows][width] > 1e-7 {
        return None;
    }
    // Drive zero-level artificials out where a structural pivot exists.
    for i in 0..rows {
        if tab.basis[i] >= n {
            if let Some(c) = (0..n).find(|&j| tab.t[i][j].abs() > TOL) {
                tab.pivot(i, c);
            }
        }
    }
    // Phase two cost row.
    let cost = |j: usize| if j < n { columns[j].0 } else { 0.0 };
    for j in 0..=width {
        let base = if j < width { cost(j) } else { 0.0 };
        let sub: f64 = (0..rows).map(|i| cost(tab.basis[i]) * tab.t[i][j]).sum();
        tab.t[rows][j] = base - sub;
    }
    if !tab.optimize(n) {
        return None;
    }
    Some((0..rows).map(|i| cost(tab.basis[i]) * tab.rhs(i)).sum())
}
