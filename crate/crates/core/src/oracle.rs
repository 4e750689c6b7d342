//! Brute-force reference solver: enumerates set partitions as restricted
//! growth strings with capacity pruning.

use crate::error::{Error, Result};
use crate::problem::{Instance, Solution};

pub const ORACLE_MAX_N: usize = 12;

/// Extra restrictions for solving a branch-and-price node exactly.
#[derive(Clone, Debug, Default)]
pub struct OracleConstraints {
    /// Pairs that must end up in different bins.
    pub conflicts: Vec<(usize, usize)>,
    /// Groups whose members must share a bin.
    pub groups: Vec<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub solution: Solution,
    pub objective: i64,
    /// Restricted growth string of the optimum (bin label per item).
    pub labels: Vec<usize>,
}

/// Depth-first walk over partitions in lexicographic order of their
/// restricted growth strings.
pub struct PartitionEnumerator<'a> {
    inst: &'a Instance,
    conflict: Vec<bool>,
    /// For each item, the earlier item it must be placed with.
    anchor: Vec<Option<usize>>,
    labels: Vec<usize>,
    block_weight: Vec<i64>,
    blocks: Vec<Vec<usize>>,
}

impl<'a> PartitionEnumerator<'a> {
    pub fn new(inst: &'a Instance, constraints: Option<&OracleConstraints>) -> Result<Self> {
        let n = inst.n();
        if n > ORACLE_MAX_N {
            return Err(Error::Refused(format!(
                "partition enumeration is limited to n <= {ORACLE_MAX_N}, got {n}"
            )));
        }
        let mut conflict = vec![false; n * n];
        let mut anchor = vec![None; n];
        if let Some(c) = constraints {
            for &(i, j) in &c.conflicts {
                if i >= n || j >= n || i == j {
                    return Err(Error::input(format!("bad conflict pair ({i}, {j})")));
                }
                conflict[i * n + j] = true;
                conflict[j * n + i] = true;
            }
            let mut seen = vec![false; n];
            for g in &c.groups {
                let Some(&first) = g.iter().min() else { continue };
                for &i in g {
                    if i >= n || seen[i] {
                        return Err(Error::input(format!("item {i} out of range or in two groups")));
                    }
                    seen[i] = true;
                    if i != first {
                        anchor[i] = Some(first);
                    }
                }
            }
        }
        Ok(PartitionEnumerator {
            inst,
            conflict,
            anchor,
            labels: vec![0; n],
            block_weight: Vec::new(),
            blocks: Vec::new(),
        })
    }

    fn admits(&self, item: usize, block: usize) -> bool {
        let n = self.inst.n();
        self.block_weight[block] + self.inst.weight(item) <= self.inst.capacity()
            && self.blocks[block].iter().all(|&j| !self.conflict[item * n + j])
    }

    /// Visits every feasible partition with its cost. `prune(depth, cost)`
    /// may cut a prefix whose first `depth` items are placed at `cost`.
    pub fn walk(&mut self, prune: &mut dyn FnMut(usize, i64) -> bool, visit: &mut dyn FnMut(&[usize], i64)) {
        self.rec(0, 0, prune, visit);
    }

    fn rec(
        &mut self,
        item: usize,
        cost: i64,
        prune: &mut dyn FnMut(usize, i64) -> bool,
        visit: &mut dyn FnMut(&[usize], i64),
    ) {
        let n = self.inst.n();
        if item == n {
            visit(&self.labels, cost);
            return;
        }
        if prune(item, cost) {
            return;
        }
        let choices: Vec<usize> = match self.anchor[item] {
            Some(a) => vec![self.labels[a]],
            None => (0..=self.blocks.len()).collect(),
        };
        for b in choices {
            if b == self.blocks.len() {
                if self.anchor[item].is_some() {
                    continue;
                }
                self.blocks.push(vec![item]);
                self.block_weight.push(self.inst.weight(item));
                self.labels[item] = b;
                self.rec(item + 1, cost + self.inst.bin_cost(), prune, visit);
                self.blocks.pop();
                self.block_weight.pop();
            } else {
                if !self.admits(item, b) {
                    continue;
                }
                let added: i64 = self.blocks[b].iter().map(|&j| self.inst.d(item, j)).sum();
                self.blocks[b].push(item);
                self.block_weight[b] += self.inst.weight(item);
                self.labels[item] = b;
                self.rec(item + 1, cost + added, prune, visit);
                self.blocks[b].pop();
                self.block_weight[b] -= self.inst.weight(item);
            }
        }
    }
}

fn labels_to_bins(labels: &[usize]) -> Vec<Vec<usize>> {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut bins = vec![Vec::new(); k];
    for (i, &b) in labels.iter().enumerate() {
        bins[b].push(i);
    }
    bins
}

/// Minimum-cost feasible partition. Among optima the lexicographically
/// smallest restricted growth string wins.
pub fn solve_exact(inst: &Instance, constraints: Option<&OracleConstraints>) -> Result<OracleResult> {
    let n = inst.n();
    let mut en = PartitionEnumerator::new(inst, constraints)?;
    // Placing item k adds at least the negative part of its links to earlier items.
    let mut rest = vec![0i64; n + 1];
    for k in (0..n).rev() {
        let neg: i64 = (0..k).map(|j| inst.d(k, j).min(0)).sum();
        rest[k] = rest[k + 1] + neg;
    }
    let mut best: Option<(i64, Vec<usize>)> = None;
    let best_cost = std::cell::Cell::new(i64::MAX);
    en.walk(
        &mut |depth, cost| cost.saturating_add(rest[depth]) >= best_cost.get(),
        &mut |labels, cost| {
            if cost < best_cost.get() {
                best_cost.set(cost);
                best = Some((cost, labels.to_vec()));
            }
        },
    );
    let (objective, labels) = best.ok_or_else(|| Error::input("no feasible partition satisfies the constraints"))?;
    let solution = Solution::from_bins(inst, labels_to_bins(&labels))?;
    debug_assert_eq!(solution.objective, objective);
    Ok(OracleResult {
        solution,
        objective,
        labels,
    })
}

/// Calls `visit` on every feasible partition (as bin labels) with its cost.
pub fn for_each_partition(
    inst: &Instance,
    constraints: Option<&OracleConstraints>,
    mut visit: impl FnMut(&[usize], i64),
) -> Result<u64> {
    let mut en = PartitionEnumerator::new(inst, constraints)?;
    let mut count = 0u64;
    en.walk(&mut |_, _| false, &mut |labels, cost| {
        count += 1;
        visit(labels, cost);
    });
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_items_attracting() {
        let inst = Instance::from_pairs(vec![1, 1], 2, 10, &[(0, 1, -3)]).unwrap();
        let r = solve_exact(&inst, None).unwrap();
        assert_eq!(r.objective, 7);
        assert_eq!(r.solution.bins.len(), 1);
    }

    #[test]
    fn two_items_repelling() {
        let inst = Instance::from_pairs(vec![1, 1], 2, 1, &[(0, 1, 5)]).unwrap();
        let r = solve_exact(&inst, None).unwrap();
        assert_eq!(r.objective, 2);
        assert_eq!(r.labels, vec![0, 1]);
    }

    #[test]
    fn bin_packing_special_case() {
        let inst = Instance::from_pairs(vec![4, 3, 3, 2, 2, 2], 6, 1, &[]).unwrap();
        assert_eq!(solve_exact(&inst, None).unwrap().objective, 3);
    }

    #[test]
    fn bell_numbers() {
        for (n, bell) in [(1, 1), (2, 2), (3, 5), (4, 15), (5, 52), (6, 203), (7, 877)] {
            let inst = Instance::from_pairs(vec![1; n], n as i64, 1, &[]).unwrap();
            assert_eq!(for_each_partition(&inst, None, |_, _| {}).unwrap(), bell);
        }
    }

    #[test]
    fn lexicographic_tie_break() {
        // Every partition costs the same, so the all-zero string wins.
        let inst = Instance::from_pairs(vec![1, 1, 1], 3, 0, &[]).unwrap();
        assert_eq!(solve_exact(&inst, None).unwrap().labels, vec![0, 0, 0]);
    }

    #[test]
    fn constraints_are_honoured() {
        let inst = Instance::from_pairs(vec![1, 1, 1], 3, 5, &[(0, 1, -4), (1, 2, 2)]).unwrap();
        assert_eq!(solve_exact(&inst, None).unwrap().objective, 3);
        let c = OracleConstraints {
            conflicts: vec![(0, 1)],
            groups: vec![],
        };
        let r = solve_exact(&inst, Some(&c)).unwrap();
        assert_ne!(r.labels[0], r.labels[1]);
        assert_eq!(r.objective, 10);
        let both = OracleConstraints {
            conflicts: vec![(0, 1)],
            groups: vec![vec![1, 2]],
        };
        let r = solve_exact(&inst, Some(&both)).unwrap();
        assert_eq!(r.labels, vec![0, 1, 1]);
        assert_eq!(r.objective, 12);
    }

    #[test]
    fn refuses_large() {
        let inst = Instance::from_pairs(vec![1; 13], 13, 1, &[]).unwrap();
        assert!(matches!(solve_exact(&inst, None), Err(Error::Refused(_))));
    }
}
