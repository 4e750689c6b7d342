//! Generalized quadratic knapsack (GQKP) pricing:
//!
//! ```text
//! max  Σ π_i z_i + Σ_{i<j} p_ij z_i z_j
//! s.t. Σ w_i z_i <= W,  z_i + z_j <= 1 for conflicting {i, j},  z binary
//! ```
//!
//! Linear and quadratic profits may have either sign, which rules out the
//! classical quadratic knapsack bounds. Three solvers are provided: the
//! multiple constructive heuristic ([`mch_solve`]), an exact best-first
//! branch and bound ([`bb_solve`]) and plain enumeration
//! ([`enumerate_solve`]) for cross-checking.

mod bb;
mod mch;

use std::fmt::Write as _;
use std::str::FromStr;

pub use bb::{
    bb_solve, bb_solve_observed, greedy_lower_bound, node_upper_bound, precompute_ratio_orders, BBNode, BbLimits,
    BbOutcome, BbStats, RatioOrders,
};
pub use mch::mch_solve;

use crate::error::{Error, Result};

/// Pruning tolerance on pricing values.
pub const EPS_PRUNE: f64 = 1e-9;

/// Largest problem [`enumerate_solve`] accepts.
pub const ENUMERATE_MAX_ITEMS: usize = 20;

/// One GQKP instance. Items heavier than the capacity are kept in the index
/// space but never offered to a solver; see [`PricingProblem::dropped`].
#[derive(Clone, Debug)]
pub struct PricingProblem {
    weights: Vec<i64>,
    capacity: i64,
    linear: Vec<f64>,
    quad: Vec<f64>,
    conflict: Vec<bool>,
    threshold: f64,
    live: Vec<usize>,
    dropped: Vec<usize>,
}

/// A pattern (sorted item indices) with its GQKP value.
#[derive(Clone, Debug, PartialEq)]
pub struct PricedPattern {
    pub items: Vec<usize>,
    pub value: f64,
}

impl PricedPattern {
    pub fn empty() -> Self {
        PricedPattern {
            items: Vec::new(),
            value: 0.0,
        }
    }
}

impl PricingProblem {
    /// `quad` is a dense row-major `n x n` matrix, symmetric with zero
    /// diagonal. `conflicts` lists forbidden unordered pairs.
    pub fn new(
        weights: Vec<i64>,
        capacity: i64,
        linear: Vec<f64>,
        quad: Vec<f64>,
        conflicts: &[(usize, usize)],
        threshold: f64,
    ) -> Result<Self> {
        let n = weights.len();
        if linear.len() != n {
            return Err(Error::input(format!("{} linear profits for {n} items", linear.len())));
        }
        if quad.len() != n * n {
            return Err(Error::input(format!(
                "quadratic matrix has {} entries, expected {}",
                quad.len(),
                n * n
            )));
        }
        if let Some(w) = weights.iter().find(|&&w| w < 1) {
            return Err(Error::input(format!("non-positive weight {w}")));
        }
        if capacity < 0 {
            return Err(Error::input(format!("negative capacity {capacity}")));
        }
        for i in 0..n {
            if quad[i * n + i] != 0.0 {
                return Err(Error::input(format!("nonzero quadratic diagonal at item {}", i + 1)));
            }
            for j in i + 1..n {
                if quad[i * n + j] != quad[j * n + i] {
                    return Err(Error::input(format!(
                        "asymmetric quadratic profit between items {} and {}",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let mut conflict = vec![false; n * n];
        for &(i, j) in conflicts {
            if i >= n || j >= n || i == j {
                return Err(Error::input(format!("invalid conflict pair ({}, {})", i + 1, j + 1)));
            }
            conflict[i * n + j] = true;
            conflict[j * n + i] = true;
        }
        let (live, dropped) = (0..n).partition(|&i| weights[i] <= capacity);
        Ok(PricingProblem {
            weights,
            capacity,
            linear,
            quad,
            conflict,
            threshold,
            live,
            dropped,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    pub fn weight(&self, i: usize) -> i64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    #[inline]
    pub fn capacity(&self) -> i64 {
        self.capacity
    }

    #[inline]
    pub fn linear(&self, i: usize) -> f64 {
        self.linear[i]
    }

    #[inline]
    pub fn quad(&self, i: usize, j: usize) -> f64 {
        self.quad[i * self.n() + j]
    }

    #[inline]
    pub fn conflicts(&self, i: usize, j: usize) -> bool {
        self.conflict[i * self.n() + j]
    }

    pub fn conflict_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.conflicts(i, j))
            .collect()
    }

    /// Column acceptance constant: a pattern is improving when its value
    /// exceeds this.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Items that fit the capacity on their own.
    pub fn live_items(&self) -> &[usize] {
        &self.live
    }

    /// Items heavier than the capacity.
    pub fn dropped(&self) -> &[usize] {
        &self.dropped
    }

    /// Checks weight, range, distinctness and conflicts.
    pub fn check_pattern(&self, items: &[usize]) -> Result<()> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut weight = 0;
        for (a, &i) in items.iter().enumerate() {
            if i >= n {
                return Err(Error::input(format!("item {} out of range", i + 1)));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::input(format!("item {} repeated", i + 1)));
            }
            weight += self.weights[i];
            if let Some(&j) = items[..a].iter().find(|&&j| self.conflicts(i, j)) {
                return Err(Error::input(format!("items {} and {} conflict", j + 1, i + 1)));
            }
        }
        if weight > self.capacity {
            return Err(Error::input(format!(
                "pattern weight {weight} exceeds capacity {}",
                self.capacity
            )));
        }
        Ok(())
    }

    pub(crate) fn value_unchecked(&self, items: &[usize]) -> f64 {
        let mut v = 0.0;
        for (a, &i) in items.iter().enumerate() {
            v += self.linear[i];
            for &j in &items[a + 1..] {
                v += self.quad(i, j);
            }
        }
        v
    }

    pub(crate) fn priced(&self, mut items: Vec<usize>) -> PricedPattern {
        items.sort_unstable();
        let value = self.value_unchecked(&items);
        PricedPattern { items, value }
    }
}

/// `Σ π_i + Σ_{i<j} p_ij` over a feasible pattern.
pub fn pattern_value(pp: &PricingProblem, items: &[usize]) -> Result<f64> {
    pp.check_pattern(items)?;
    Ok(pp.value_unchecked(items))
}

/// Exhaustive search over all feasible subsets. The empty pattern (value 0)
/// is always a candidate.
pub fn enumerate_solve(pp: &PricingProblem) -> Result<PricedPattern> {
    if pp.n() > ENUMERATE_MAX_ITEMS {
        return Err(Error::Refused(format!(
            "enumeration limited to {ENUMERATE_MAX_ITEMS} items, got {}",
            pp.n()
        )));
    }
    struct Search<'a> {
        pp: &'a PricingProblem,
        items: &'a [usize],
        chosen: Vec<usize>,
        best: Vec<usize>,
        best_value: f64,
    }
    impl Search<'_> {
        fn go(&mut self, depth: usize, weight: i64, value: f64) {
            if depth == self.items.len() {
                if value > self.best_value {
                    self.best_value = value;
                    self.best.clone_from(&self.chosen);
                }
                return;
            }
            let i = self.items[depth];
            self.go(depth + 1, weight, value);
            let w = weight + self.pp.weight(i);
            if w <= self.pp.capacity() && self.chosen.iter().all(|&j| !self.pp.conflicts(i, j)) {
                let gain = self.pp.linear(i) + self.chosen.iter().map(|&j| self.pp.quad(i, j)).sum::<f64>();
                self.chosen.push(i);
                self.go(depth + 1, w, value + gain);
                self.chosen.pop();
            }
        }
    }
    let mut s = Search {
        pp,
        items: pp.live_items(),
        chosen: Vec::new(),
        best: Vec::new(),
        best_value: 0.0,
    };
    s.go(0, 0, 0.0);
    Ok(pp.priced(s.best))
}

const MAGIC: &str = "GQKP 1";

/// Text form: `GQKP 1`, `n W threshold`, weights, `linear` + n profits,
/// `m` then `i j p` quadratic entries, `conflicts k` then `i j` pairs.
/// Indices are 1-based.
pub fn write_pricing_problem(pp: &PricingProblem) -> String {
    let n = pp.n();
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "{n} {} {}", pp.capacity(), pp.threshold());
    let w: Vec<String> = pp.weights().iter().map(|w| w.to_string()).collect();
    let _ = writeln!(out, "{}", w.join(" "));
    let l: Vec<String> = pp.linear.iter().map(|v| v.to_string()).collect();
    let _ = writeln!(out, "linear {}", l.join(" "));
    let quad: Vec<(usize, usize, f64)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, pp.quad(i, j)))
        .filter(|&(_, _, q)| q != 0.0)
        .collect();
    let _ = writeln!(out, "{}", quad.len());
    for (i, j, q) in quad {
        let _ = writeln!(out, "{} {} {}", i + 1, j + 1, q);
    }
    let conflicts = pp.conflict_pairs();
    let _ = writeln!(out, "conflicts {}", conflicts.len());
    for (i, j) in conflicts {
        let _ = writeln!(out, "{} {}", i + 1, j + 1);
    }
    out
}

fn num<T: FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::parse(line, format!("cannot parse number `{tok}`")))
}

pub fn read_pricing_problem(text: &str) -> Result<PricingProblem> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| Error::parse(0, format!("unexpected end of file, expected {what}")))
    };
    let (l, magic) = next("header")?;
    if magic.split_whitespace().collect::<Vec<_>>() != ["GQKP", "1"] {
        return Err(Error::parse(l, format!("expected header `{MAGIC}`")));
    }
    let (l, dims) = next("`n W threshold`")?;
    let t: Vec<&str> = dims.split_whitespace().collect();
    if t.len() != 3 {
        return Err(Error::parse(l, "expected `n W threshold`"));
    }
    let n: usize = num(t[0], l)?;
    let capacity: i64 = num(t[1], l)?;
    let threshold: f64 = num(t[2], l)?;
    let (l, wl) = next("weights")?;
    let weights = wl
        .split_whitespace()
        .map(|t| num::<i64>(t, l))
        .collect::<Result<Vec<_>>>()?;
    if weights.len() != n {
        return Err(Error::parse(l, format!("expected {n} weights")));
    }
    let (l, ll) = next("linear profits")?;
    let rest = ll
        .strip_prefix("linear")
        .ok_or_else(|| Error::parse(l, "expected `linear` line"))?;
    let linear = rest
        .split_whitespace()
        .map(|t| num::<f64>(t, l))
        .collect::<Result<Vec<_>>>()?;
    if linear.len() != n {
        return Err(Error::parse(l, format!("expected {n} linear profits")));
    }
    let (l, ml) = next("quadratic entry count")?;
    let m: usize = num(ml, l)?;
    let mut quad = vec![0.0; n * n];
    for _ in 0..m {
        let (l, e) = next("quadratic entry")?;
        let t: Vec<&str> = e.split_whitespace().collect();
        if t.len() != 3 {
            return Err(Error::parse(l, "expected `i j p`"));
        }
        let (i, j): (usize, usize) = (num(t[0], l)?, num(t[1], l)?);
        if i == 0 || j == 0 || i > n || j > n || i >= j {
            return Err(Error::parse(l, "entries need 1 <= i < j <= n"));
        }
        let q: f64 = num(t[2], l)?;
        quad[(i - 1) * n + (j - 1)] = q;
        quad[(j - 1) * n + (i - 1)] = q;
    }
    let (l, cl) = next("conflicts line")?;
    let k: usize = num(
        cl.strip_prefix("conflicts")
            .ok_or_else(|| Error::parse(l, "expected `conflicts k`"))?
            .trim(),
        l,
    )?;
    let mut conflicts = Vec::with_capacity(k);
    for _ in 0..k {
        let (l, e) = next("conflict pair")?;
        let t: Vec<&str> = e.split_whitespace().collect();
        if t.len() != 2 {
            return Err(Error::parse(l, "expected `i j`"));
        }
        let (i, j): (usize, usize) = (num(t[0], l)?, num(t[1], l)?);
        if i == 0 || j == 0 {
            return Err(Error::parse(l, "item numbers start at 1"));
        }
        conflicts.push((i - 1, j - 1));
    }
    PricingProblem::new(weights, capacity, linear, quad, &conflicts, threshold)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// w=(2,3), W=4, π=(5,4), p12=10.
    pub(crate) fn two_items() -> PricingProblem {
        PricingProblem::new(vec![2, 3], 4, vec![5.0, 4.0], vec![0.0, 10.0, 10.0, 0.0], &[], 0.0).unwrap()
    }

    #[test]
    fn pattern_value_examples() {
        let pp = two_items();
        assert_eq!(pattern_value(&pp, &[]).unwrap(), 0.0);
        let big = PricingProblem::new(vec![2, 3], 10, vec![5.0, 4.0], vec![0.0, 10.0, 10.0, 0.0], &[], 0.0).unwrap();
        assert_eq!(pattern_value(&big, &[0, 1]).unwrap(), 19.0);
        assert!(pattern_value(&pp, &[0, 1]).is_err());
    }

    #[test]
    fn pattern_value_rejects_conflicts() {
        let pp = PricingProblem::new(vec![1, 1], 5, vec![1.0, 1.0], vec![0.0; 4], &[(0, 1)], 0.0).unwrap();
        assert!(pattern_value(&pp, &[0, 1]).is_err());
        assert!(pattern_value(&pp, &[1]).is_ok());
    }

    #[test]
    fn heavy_items_are_dropped() {
        let pp = PricingProblem::new(vec![2, 9, 3], 4, vec![1.0; 3], vec![0.0; 9], &[], 0.0).unwrap();
        assert_eq!(pp.live_items(), &[0, 2]);
        assert_eq!(pp.dropped(), &[1]);
    }

    #[test]
    fn construction_rejects_bad_data() {
        assert!(PricingProblem::new(vec![1], 2, vec![], vec![0.0], &[], 0.0).is_err());
        assert!(PricingProblem::new(vec![1, 1], 2, vec![0.0; 2], vec![0.0, 1.0, 2.0, 0.0], &[], 0.0).is_err());
        assert!(PricingProblem::new(vec![1, 1], 2, vec![0.0; 2], vec![0.0; 4], &[(0, 0)], 0.0).is_err());
    }

    #[test]
    fn enumerate_examples() {
        let none = PricingProblem::new(vec![], 5, vec![], vec![], &[], 0.0).unwrap();
        assert_eq!(enumerate_solve(&none).unwrap(), PricedPattern::empty());

        let neg = PricingProblem::new(vec![1, 1], 5, vec![-1.0, -2.0], vec![0.0, 0.5, 0.5, 0.0], &[], 0.0).unwrap();
        assert_eq!(enumerate_solve(&neg).unwrap(), PricedPattern::empty());

        let best = enumerate_solve(&two_items()).unwrap();
        assert_eq!(best.items, vec![0]);
        assert_eq!(best.value, 5.0);
    }

    #[test]
    fn enumerate_refuses_large() {
        let n = 21;
        let pp = PricingProblem::new(vec![1; n], 5, vec![0.0; n], vec![0.0; n * n], &[], 0.0).unwrap();
        assert!(matches!(enumerate_solve(&pp), Err(Error::Refused(_))));
    }

    #[test]
    fn text_round_trip() {
        let pp = PricingProblem::new(
            vec![2, 3, 4],
            6,
            vec![1.5, -2.0, 0.25],
            vec![0.0, 3.0, -1.0, 3.0, 0.0, 0.0, -1.0, 0.0, 0.0],
            &[(1, 2)],
            7.0,
        )
        .unwrap();
        let back = read_pricing_problem(&write_pricing_problem(&pp)).unwrap();
        assert_eq!(back.weights(), pp.weights());
        assert_eq!(back.linear, pp.linear);
        assert_eq!(back.quad, pp.quad);
        assert_eq!(back.conflict_pairs(), vec![(1, 2)]);
        assert_eq!(back.threshold(), 7.0);
    }
}
