//! Dense revised simplex for the restricted set-partitioning master
//!
//! ```text
//! min Σ c_P λ_P   s.t.  Σ_{P ∋ i} λ_P = 1  (every row i),  λ >= 0.
//! ```
//!
//! Each row also owns an artificial column fixed at zero. Artificials may
//! sit in the basis (this is what keeps the basis square when several rows
//! are identical, as happens after items are merged) but can never enter,
//! so they only ever carry value zero and contribute zero-cost duals.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const EPS_FEAS: f64 = 1e-7;
pub const EPS_DUAL: f64 = 1e-7;

/// Entering threshold on reduced costs.
const EPS_OPT: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const SINGULAR_TOL: f64 = 1e-11;
const REFACTOR_EVERY: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub cost: f64,
    /// Sorted row indices with coefficient one.
    pub support: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Var {
    Col(usize),
    Art(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Iterating,
    /// The anti-cycling guard switched pricing to Bland's rule.
    AntiCycling,
}

#[derive(Clone, Debug)]
pub struct LpResult {
    pub objective: f64,
    /// Value per column, in insertion order.
    pub primal: Vec<f64>,
    /// One free-signed dual per row.
    pub duals: Vec<f64>,
    /// Structural columns in the final basis.
    pub basic: Vec<usize>,
    pub pivots: usize,
    pub used_bland: bool,
}

#[derive(Clone, Debug)]
pub struct MasterLP {
    rows: usize,
    columns: Vec<Column>,
    index: HashMap<Vec<usize>, usize>,
    basis: Option<Vec<Var>>,
    status: LpStatus,
}

struct Factor {
    /// Row-major basis inverse.
    inv: Vec<f64>,
    n: usize,
}

impl Factor {
    fn build(master: &MasterLP, basis: &[Var]) -> Option<Factor> {
        let n = master.rows;
        // Gauss-Jordan on [B | I].
        let mut a = vec![0.0f64; n * n];
        for (pos, var) in basis.iter().enumerate() {
            match *var {
                Var::Col(q) => {
                    for &i in &master.columns[q].support {
                        a[i * n + pos] = 1.0;
                    }
                }
                Var::Art(r) => a[r * n + pos] = 1.0,
            }
        }
        let mut inv = vec![0.0; n * n];
        for i in 0..n {
            inv[i * n + i] = 1.0;
        }
        for col in 0..n {
            let piv = (col..n).max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs()))?;
            if a[piv * n + col].abs() < SINGULAR_TOL {
                return None;
            }
            if piv != col {
                for k in 0..n {
                    a.swap(piv * n + k, col * n + k);
                    inv.swap(piv * n + k, col * n + k);
                }
            }
            let p = a[col * n + col];
            for k in 0..n {
                a[col * n + k] /= p;
                inv[col * n + k] /= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r * n + col];
                if f != 0.0 {
                    for k in 0..n {
                        a[r * n + k] -= f * a[col * n + k];
                        inv[r * n + k] -= f * inv[col * n + k];
                    }
                }
            }
        }
        Some(Factor { inv, n })
    }

    /// `B⁻¹ a` for a 0/1 column given by its support.
    fn ftran(&self, support: &[usize]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|r| support.iter().map(|&i| self.inv[r * n + i]).sum())
            .collect()
    }

    /// `B⁻¹ 1`.
    fn rhs(&self) -> Vec<f64> {
        let n = self.n;
        (0..n).map(|r| self.inv[r * n..(r + 1) * n].iter().sum()).collect()
    }

    /// `c_Bᵀ B⁻¹`.
    fn btran(&self, cb: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for (r, &c) in cb.iter().enumerate() {
            if c != 0.0 {
                for (j, yj) in y.iter_mut().enumerate() {
                    *yj += c * self.inv[r * n + j];
                }
            }
        }
        y
    }

    fn pivot(&mut self, row: usize, alpha: &[f64]) {
        let n = self.n;
        let p = alpha[row];
        for k in 0..n {
            self.inv[row * n + k] /= p;
        }
        for (r, &f) in alpha.iter().enumerate() {
            if r != row && f != 0.0 {
                for k in 0..n {
                    self.inv[r * n + k] -= f * self.inv[row * n + k];
                }
            }
        }
    }
}

impl MasterLP {
    pub fn new(rows: usize) -> Self {
        MasterLP {
            rows,
            columns: Vec::new(),
            index: HashMap::new(),
            basis: None,
            status: LpStatus::Iterating,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn status(&self) -> &LpStatus {
        &self.status
    }

    pub fn find(&self, support: &[usize]) -> Option<usize> {
        self.index.get(support).copied()
    }

    /// Forgets the current basis so the next solve starts from scratch.
    pub fn reset_basis(&mut self) {
        self.basis = None;
    }

    /// Inserts columns, deduplicated by support. An existing support is only
    /// touched when the new cost is strictly lower; that counts as added.
    /// The current basis stays valid.
    pub fn add_columns(&mut self, cols: impl IntoIterator<Item = Column>) -> Result<usize> {
        let mut added = 0;
        for mut col in cols {
            col.support.sort_unstable();
            col.support.dedup();
            if col.support.is_empty() {
                return Err(Error::input("master column with empty support"));
            }
            if let Some(&bad) = col.support.iter().find(|&&i| i >= self.rows) {
                return Err(Error::input(format!("column touches row {} of {}", bad + 1, self.rows)));
            }
            if !col.cost.is_finite() {
                return Err(Error::input("non-finite column cost"));
            }
            match self.index.get(&col.support) {
                Some(&k) => {
                    if col.cost < self.columns[k].cost {
                        self.columns[k].cost = col.cost;
                        added += 1;
                    }
                }
                None => {
                    self.index.insert(col.support.clone(), self.columns.len());
                    self.columns.push(col);
                    added += 1;
                }
            }
        }
        if added > 0 {
            self.status = LpStatus::Iterating;
        }
        Ok(added)
    }

    /// Basis of disjoint columns covering every row: each row not yet
    /// covered takes the smallest-support column through it that avoids
    /// covered rows. Remaining rows of a chosen column get artificials.
    fn crash_basis(&self) -> Result<Vec<Var>> {
        let mut by_row: Vec<Vec<usize>> = vec![Vec::new(); self.rows];
        for (q, c) in self.columns.iter().enumerate() {
            for &i in &c.support {
                by_row[i].push(q);
            }
        }
        let mut covered = vec![false; self.rows];
        let mut basis = Vec::with_capacity(self.rows);
        for r in 0..self.rows {
            if covered[r] {
                continue;
            }
            let q = by_row[r]
                .iter()
                .copied()
                .filter(|&q| self.columns[q].support.iter().all(|&i| !covered[i]))
                .min_by_key(|&q| (self.columns[q].support.len(), q))
                .ok_or_else(|| {
                    Error::input(format!(
                        "no starting basis: row {} has no column disjoint from the rows already covered",
                        r + 1
                    ))
                })?;
            basis.push(Var::Col(q));
            for (k, &i) in self.columns[q].support.iter().enumerate() {
                covered[i] = true;
                if k > 0 {
                    basis.push(Var::Art(i));
                }
            }
        }
        Ok(basis)
    }

    fn var_cost(&self, v: Var) -> f64 {
        match v {
            Var::Col(q) => self.columns[q].cost,
            Var::Art(_) => 0.0,
        }
    }

    fn bland_rank(&self, v: Var) -> usize {
        match v {
            Var::Col(q) => q,
            Var::Art(r) => self.columns.len() + r,
        }
    }

    /// Solves the LP, warm-starting from the previous basis when there is one.
    pub fn solve(&mut self) -> Result<LpResult> {
        if self.rows == 0 {
            self.status = LpStatus::Optimal;
            return Ok(LpResult {
                objective: 0.0,
                primal: vec![0.0; self.columns.len()],
                duals: Vec::new(),
                basic: Vec::new(),
                pivots: 0,
                used_bland: false,
            });
        }
        let mut basis = match self.basis.take() {
            Some(b) => b,
            None => self.crash_basis()?,
        };
        let mut factor = match Factor::build(self, &basis) {
            Some(f) => f,
            None => {
                // Refactor-and-retry from a fresh crash basis.
                basis = self.crash_basis()?;
                Factor::build(self, &basis).ok_or_else(|| Error::Numerical("singular starting basis".into()))?
            }
        };
        let mut x = factor.rhs();

        let n = self.rows;
        let ncols = self.columns.len();
        let degenerate_cap = 5 * (n + ncols);
        let max_pivots = 1000 + 100 * (n + ncols);
        let mut degenerate = 0usize;
        let mut bland = false;
        let mut pivots = 0usize;
        let mut since_refactor = 0usize;
        let mut is_basic = vec![false; ncols];
        for v in &basis {
            if let Var::Col(q) = *v {
                is_basic[q] = true;
            }
        }

        loop {
            let cb: Vec<f64> = basis.iter().map(|&v| self.var_cost(v)).collect();
            let y = factor.btran(&cb);

            let mut entering: Option<(usize, f64)> = None;
            for (q, col) in self.columns.iter().enumerate() {
                if is_basic[q] {
                    continue;
                }
                let d = col.cost - col.support.iter().map(|&i| y[i]).sum::<f64>();
                if d < -EPS_OPT {
                    match entering {
                        None => entering = Some((q, d)),
                        Some((_, best)) if !bland && d < best => entering = Some((q, d)),
                        _ => {}
                    }
                    if bland {
                        break;
                    }
                }
            }

            let Some((q, _)) = entering else {
                // Confirm optimality on a fresh factorization.
                if since_refactor == 0 {
                    break;
                }
                factor = Factor::build(self, &basis).ok_or_else(|| Error::Numerical("basis became singular".into()))?;
                x = factor.rhs();
                since_refactor = 0;
                continue;
            };

            let alpha = factor.ftran(&self.columns[q].support);
            let mut leave: Option<(usize, f64)> = None;
            for (r, &a) in alpha.iter().enumerate() {
                let ratio = match basis[r] {
                    Var::Art(_) if a.abs() > PIVOT_TOL => 0.0,
                    Var::Col(_) if a > PIVOT_TOL => x[r].max(0.0) / a,
                    _ => continue,
                };
                let better = match leave {
                    None => true,
                    Some((lr, lratio)) => {
                        if ratio < lratio - 1e-12 {
                            true
                        } else if ratio <= lratio + 1e-12 {
                            if bland {
                                self.bland_rank(basis[r]) < self.bland_rank(basis[lr])
                            } else {
                                a.abs() > alpha[lr].abs()
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            let Some((r, theta)) = leave else {
                return Err(Error::Internal(
                    "master LP reported unbounded, impossible for set partitioning".into(),
                ));
            };

            for (k, xk) in x.iter_mut().enumerate() {
                *xk -= theta * alpha[k];
            }
            x[r] = theta;
            if let Var::Col(old) = basis[r] {
                is_basic[old] = false;
            }
            basis[r] = Var::Col(q);
            is_basic[q] = true;
            factor.pivot(r, &alpha);
            pivots += 1;
            since_refactor += 1;

            if theta <= 1e-12 {
                degenerate += 1;
                if degenerate > degenerate_cap && !bland {
                    bland = true;
                    self.status = LpStatus::AntiCycling;
                }
            }
            if since_refactor >= REFACTOR_EVERY {
                factor = Factor::build(self, &basis).ok_or_else(|| Error::Numerical("basis became singular".into()))?;
                x = factor.rhs();
                since_refactor = 0;
            }
            if pivots > max_pivots {
                return Err(Error::Numerical(format!("simplex exceeded {max_pivots} pivots")));
            }
        }

        let cb: Vec<f64> = basis.iter().map(|&v| self.var_cost(v)).collect();
        let duals = factor.btran(&cb);
        let mut primal = vec![0.0; ncols];
        let mut basic = Vec::new();
        for (r, v) in basis.iter().enumerate() {
            if let Var::Col(q) = *v {
                if x[r] < -EPS_FEAS {
                    return Err(Error::Numerical(format!(
                        "basic column {q} has value {} at optimum",
                        x[r]
                    )));
                }
                primal[q] = x[r].max(0.0);
                basic.push(q);
            }
        }
        basic.sort_unstable();
        let objective = primal.iter().zip(&self.columns).map(|(v, c)| v * c.cost).sum();
        self.basis = Some(basis);
        self.status = LpStatus::Optimal;
        Ok(LpResult {
            objective,
            primal,
            duals,
            basic,
            pivots,
            used_bland: bland,
        })
    }

    /// The master in LP text format, for inspection.
    pub fn dump_lp(&self) -> String {
        let mut out = String::from("Minimize\n obj:");
        for (q, c) in self.columns.iter().enumerate() {
            let _ = write!(
                out,
                " {} {} l_{}",
                if c.cost < 0.0 { '-' } else { '+' },
                c.cost.abs(),
                q + 1
            );
        }
        out.push_str("\nSubject To\n");
        for i in 0..self.rows {
            let _ = write!(out, " row_{}:", i + 1);
            for (q, c) in self.columns.iter().enumerate() {
                if c.support.binary_search(&i).is_ok() {
                    let _ = write!(out, " + l_{}", q + 1);
                }
            }
            out.push_str(" = 1\n");
        }
        out.push_str("End\n");
        out
    }
}

/// `c_P − Σ_{i ∈ P} π_i`.
pub fn reduced_cost(duals: &[f64], column: &Column) -> f64 {
    column.cost - column.support.iter().map(|&i| duals[i]).sum::<f64>()
}
