//! Exact best-first branch and bound for the GQKP.
//!
//! A node `(I, O, U)` fixes items inside and outside the knapsack. Its upper
//! bound adds to `p(I)` an exact 0-1 knapsack over the undecided items whose
//! profits `p̄_i` bound the contribution of each item: its linear profit,
//! its interaction with `I`, and half the fractional knapsack value of its
//! positive interactions with the other undecided items.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::{PricedPattern, PricingProblem, EPS_PRUNE};
use crate::error::{Error, Result};

/// Per-item partner lists sorted by `max(0, p_ij) / w_j`, non-increasing,
/// ties by smaller index. Indexed by item; dropped items get empty lists.
#[derive(Clone, Debug)]
pub struct RatioOrders(Vec<Vec<usize>>);

impl RatioOrders {
    pub fn order(&self, i: usize) -> &[usize] {
        &self.0[i]
    }
}

pub fn precompute_ratio_orders(pp: &PricingProblem) -> RatioOrders {
    let live = pp.live_items();
    let mut orders = vec![Vec::new(); pp.n()];
    for &i in live {
        let mut partners: Vec<(f64, usize)> = live
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| (pp.quad(i, j).max(0.0) / pp.weight(j) as f64, j))
            .collect();
        partners.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        orders[i] = partners.into_iter().map(|(_, j)| j).collect();
    }
    RatioOrders(orders)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BBNode {
    pub inside: Vec<usize>,
    pub outside: Vec<usize>,
    pub undecided: Vec<usize>,
    pub inside_weight: i64,
    pub inside_value: f64,
    pub ub: f64,
}

impl BBNode {
    /// `(∅, ∅, live items)` with its bound filled in.
    pub fn root(pp: &PricingProblem, orders: &RatioOrders) -> Self {
        let mut node = BBNode {
            inside: Vec::new(),
            outside: pp.dropped().to_vec(),
            undecided: pp.live_items().to_vec(),
            inside_weight: 0,
            inside_value: 0.0,
            ub: f64::INFINITY,
        };
        node.ub = node_upper_bound(pp, &node, orders);
        node
    }

    pub fn residual(&self, pp: &PricingProblem) -> i64 {
        pp.capacity() - self.inside_weight
    }

    /// Whether `j` could still join `inside`.
    fn admits(&self, pp: &PricingProblem, j: usize) -> bool {
        pp.weight(j) <= self.residual(pp) && self.inside.iter().all(|&k| !pp.conflicts(j, k))
    }

    fn with_inside(&self, pp: &PricingProblem, j: usize) -> BBNode {
        let gain = pp.linear(j) + self.inside.iter().map(|&k| pp.quad(j, k)).sum::<f64>();
        let mut inside = self.inside.clone();
        inside.push(j);
        BBNode {
            inside,
            outside: self.outside.clone(),
            undecided: self.undecided.iter().copied().filter(|&u| u != j).collect(),
            inside_weight: self.inside_weight + pp.weight(j),
            inside_value: self.inside_value + gain,
            ub: f64::INFINITY,
        }
    }

    fn with_outside(&self, j: usize) -> BBNode {
        let mut outside = self.outside.clone();
        outside.push(j);
        BBNode {
            inside: self.inside.clone(),
            outside,
            undecided: self.undecided.iter().copied().filter(|&u| u != j).collect(),
            inside_weight: self.inside_weight,
            inside_value: self.inside_value,
            ub: f64::INFINITY,
        }
    }

    /// Moves undecided items that no longer fit or that conflict with
    /// `inside` into `outside`.
    fn settle(&mut self, pp: &PricingProblem) {
        let (keep, drop): (Vec<usize>, Vec<usize>) = self.undecided.iter().partition(|&&j| self.admits(pp, j));
        self.undecided = keep;
        self.outside.extend(drop);
    }
}

/// Greedy completion of `inside`: repeatedly add the admissible undecided
/// item with the best positive gain-to-weight ratio, gains measured against
/// the current filling. Ratio ties go to the smaller index.
pub fn greedy_lower_bound(pp: &PricingProblem, node: &BBNode) -> PricedPattern {
    let mut current = node.inside.clone();
    let mut weight = node.inside_weight;
    let mut cand: Vec<(usize, f64)> = node
        .undecided
        .iter()
        .filter(|&&j| node.admits(pp, j))
        .map(|&j| {
            let g = pp.linear(j) + current.iter().map(|&k| pp.quad(j, k)).sum::<f64>();
            (j, g)
        })
        .collect();
    loop {
        let residual = pp.capacity() - weight;
        let mut best: Option<(usize, f64)> = None;
        for (pos, &(j, g)) in cand.iter().enumerate() {
            if g <= 0.0 || pp.weight(j) > residual {
                continue;
            }
            let ratio = g / pp.weight(j) as f64;
            let better = match best {
                None => true,
                Some((bp, br)) => ratio > br || (ratio == br && j < cand[bp].0),
            };
            if better {
                best = Some((pos, ratio));
            }
        }
        let Some((pos, _)) = best else { break };
        let (j, _) = cand.swap_remove(pos);
        current.push(j);
        weight += pp.weight(j);
        cand.retain(|&(k, _)| !pp.conflicts(j, k));
        for (k, g) in cand.iter_mut() {
            *g += pp.quad(*k, j);
        }
    }
    pp.priced(current)
}

/// `p(I)` plus an exact 0-1 knapsack over the admissible undecided items
/// with profits `p̄_i` (only positive ones are kept).
pub fn node_upper_bound(pp: &PricingProblem, node: &BBNode, orders: &RatioOrders) -> f64 {
    let residual = node.residual(pp);
    if residual < 0 {
        return f64::NEG_INFINITY;
    }
    let mut admissible = vec![false; pp.n()];
    let mut items = Vec::with_capacity(node.undecided.len());
    for &j in &node.undecided {
        if node.admits(pp, j) {
            admissible[j] = true;
            items.push(j);
        }
    }

    let mut outer: Vec<(usize, f64)> = Vec::with_capacity(items.len());
    for &i in &items {
        let mut room = (residual - pp.weight(i)) as f64;
        let mut frac = 0.0;
        for &j in orders.order(i) {
            if !admissible[j] || pp.conflicts(i, j) {
                continue;
            }
            let p = pp.quad(i, j);
            if p <= 0.0 {
                break;
            }
            let w = pp.weight(j) as f64;
            if w <= room {
                frac += p;
                room -= w;
            } else {
                frac += p * room / w;
                break;
            }
        }
        let with_inside: f64 = node.inside.iter().map(|&k| pp.quad(i, k)).sum();
        let bar = pp.linear(i) + with_inside + 0.5 * frac;
        if bar > 0.0 {
            outer.push((i, bar));
        }
    }

    let cap = residual as usize;
    let mut best = vec![0.0f64; cap + 1];
    for &(i, profit) in &outer {
        let w = pp.weight(i) as usize;
        for c in (w..=cap).rev() {
            let cand = best[c - w] + profit;
            if cand > best[c] {
                best[c] = cand;
            }
        }
    }
    node.inside_value + best[cap]
}

#[derive(Clone, Copy, Debug, Default)]
pub struct BbLimits {
    pub node_limit: Option<usize>,
    pub deadline: Option<Instant>,
    /// Nodes whose bound does not exceed this value are pruned as well.
    /// The returned pattern is then optimal only if its value is above it.
    pub cutoff: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BbStats {
    pub expanded: usize,
    pub created: usize,
    pub pruned: usize,
    pub incumbent_updates: usize,
}

#[derive(Clone, Debug)]
pub struct BbOutcome {
    pub best: PricedPattern,
    /// `true` when the search ran to completion, so `best` is optimal.
    pub proven: bool,
    pub stats: BbStats,
}

struct Queued {
    ub: f64,
    seq: usize,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ub.total_cmp(&other.ub).then_with(|| other.seq.cmp(&self.seq))
    }
}

pub fn bb_solve(pp: &PricingProblem, incumbent: Option<&PricedPattern>, limits: BbLimits) -> Result<BbOutcome> {
    bb_solve_observed(pp, incumbent, limits, &mut |_| {})
}

/// [`bb_solve`] calling `observer` on every expanded node, after the
/// undecided items that can no longer join have been moved out.
pub fn bb_solve_observed(
    pp: &PricingProblem,
    incumbent: Option<&PricedPattern>,
    limits: BbLimits,
    observer: &mut dyn FnMut(&BBNode),
) -> Result<BbOutcome> {
    let mut best = match incumbent {
        Some(p) => {
            pp.check_pattern(&p.items)
                .map_err(|e| Error::input(format!("initial incumbent is infeasible: {e}")))?;
            pp.priced(p.items.clone())
        }
        None => PricedPattern::empty(),
    };
    let orders = precompute_ratio_orders(pp);
    let mut stats = BbStats::default();

    let mut pool: Vec<Option<BBNode>> = Vec::new();
    let mut heap = BinaryHeap::new();
    let root = BBNode::root(pp, &orders);
    heap.push(Queued { ub: root.ub, seq: 0 });
    pool.push(Some(root));
    stats.created = 1;

    let floor = limits.cutoff.unwrap_or(f64::NEG_INFINITY);
    let mut proven = true;
    while let Some(Queued { seq, .. }) = heap.pop() {
        let mut node = pool[seq].take().expect("queued node present");
        if node.ub <= best.value.max(floor) + EPS_PRUNE {
            // Best-first: everything left is bounded by this node's value.
            stats.pruned += 1 + heap.len();
            break;
        }
        if limits.node_limit.is_some_and(|cap| stats.expanded >= cap)
            || limits.deadline.is_some_and(|d| Instant::now() >= d)
        {
            proven = false;
            break;
        }
        stats.expanded += 1;
        node.settle(pp);
        observer(&node);

        if node.undecided.is_empty() {
            if node.inside_value > best.value {
                best = pp.priced(node.inside.clone());
                stats.incumbent_updates += 1;
            }
            continue;
        }
        let lb = greedy_lower_bound(pp, &node);
        if lb.value > best.value {
            best = lb;
            stats.incumbent_updates += 1;
        }
        if node.ub <= best.value.max(floor) + EPS_PRUNE {
            stats.pruned += 1;
            continue;
        }

        // Branch on argmin_j max(ub_in, ub_out); ties by the other child's
        // bound, then by item index.
        let mut choice: Option<(usize, BBNode, BBNode)> = None;
        let key = |a: &BBNode, b: &BBNode| (a.ub.max(b.ub), a.ub.min(b.ub));
        for &j in &node.undecided {
            let mut child_in = node.with_inside(pp, j);
            child_in.ub = node_upper_bound(pp, &child_in, &orders);
            let mut child_out = node.with_outside(j);
            child_out.ub = node_upper_bound(pp, &child_out, &orders);
            let better = match &choice {
                None => true,
                Some((bj, bi, bo)) => {
                    let (m, p) = key(&child_in, &child_out);
                    let (bm, bp) = key(bi, bo);
                    m < bm || (m == bm && (p < bp || (p == bp && j < *bj)))
                }
            };
            if better {
                choice = Some((j, child_in, child_out));
            }
        }
        let (_, child_in, child_out) = choice.expect("undecided set is non-empty");
        for child in [child_in, child_out] {
            if child.ub > best.value.max(floor) + EPS_PRUNE {
                heap.push(Queued {
                    ub: child.ub,
                    seq: pool.len(),
                });
                pool.push(Some(child));
                stats.created += 1;
            } else {
                stats.pruned += 1;
            }
        }
    }
    Ok(BbOutcome { best, proven, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricing::tests::two_items;
    use crate::pricing::{enumerate_solve, pattern_value};

    fn root_of(pp: &PricingProblem) -> BBNode {
        BBNode::root(pp, &precompute_ratio_orders(pp))
    }

    #[test]
    fn greedy_two_items() {
        let pp = two_items();
        let lb = greedy_lower_bound(&pp, &root_of(&pp));
        assert_eq!(lb.items, vec![0]);
        assert_eq!(lb.value, 5.0);
    }

    #[test]
    fn greedy_keeps_inside_when_no_gain() {
        let pp = PricingProblem::new(vec![1, 1], 2, vec![-1.0, -1.0], vec![0.0; 4], &[], 0.0).unwrap();
        let lb = greedy_lower_bound(&pp, &root_of(&pp));
        assert!(lb.items.is_empty());
        assert_eq!(lb.value, 0.0);
    }

    #[test]
    fn greedy_with_nothing_undecided() {
        let pp = two_items();
        let node = BBNode {
            inside: vec![1],
            outside: vec![0],
            undecided: vec![],
            inside_weight: 3,
            inside_value: 4.0,
            ub: 4.0,
        };
        let lb = greedy_lower_bound(&pp, &node);
        assert_eq!(lb.items, vec![1]);
        assert_eq!(lb.value, 4.0);
    }

    #[test]
    fn ratio_orders_small() {
        let pp = two_items();
        let o = precompute_ratio_orders(&pp);
        assert_eq!(o.order(0), &[1]);
        assert_eq!(o.order(1), &[0]);

        let flat = PricingProblem::new(vec![1, 1, 1], 3, vec![0.0; 3], vec![0.0; 9], &[], 0.0).unwrap();
        let o = precompute_ratio_orders(&flat);
        assert_eq!(o.order(1), &[0, 2]);
    }

    #[test]
    fn upper_bound_two_items() {
        let pp = two_items();
        let ub = root_of(&pp).ub;
        assert!((ub - 25.0 / 3.0).abs() < 1e-12, "{ub}");
    }

    #[test]
    fn upper_bound_without_undecided() {
        let pp = two_items();
        let orders = precompute_ratio_orders(&pp);
        let node = BBNode {
            inside: vec![0],
            outside: vec![1],
            undecided: vec![],
            inside_weight: 2,
            inside_value: 5.0,
            ub: 0.0,
        };
        assert_eq!(node_upper_bound(&pp, &node, &orders), 5.0);
    }

    #[test]
    fn bound_with_empty_inside_and_no_quadratic_is_linear() {
        let pp = PricingProblem::new(vec![2, 2], 2, vec![3.0, 1.0], vec![0.0; 4], &[], 0.0).unwrap();
        // Only one item fits; the outer knapsack takes the best linear profit.
        assert_eq!(root_of(&pp).ub, 3.0);
    }

    #[test]
    fn single_item() {
        let pp = PricingProblem::new(vec![1], 1, vec![3.0], vec![0.0], &[], 0.0).unwrap();
        let out = bb_solve(&pp, None, BbLimits::default()).unwrap();
        assert!(out.proven);
        assert_eq!(out.best.items, vec![0]);
        assert_eq!(out.best.value, 3.0);
    }

    #[test]
    fn two_item_optimum() {
        let pp = two_items();
        let out = bb_solve(&pp, None, BbLimits::default()).unwrap();
        assert!(out.proven);
        assert_eq!(out.best.value, 5.0);
        assert_eq!(out.best.value, enumerate_solve(&pp).unwrap().value);
    }

    #[test]
    fn infeasible_incumbent_rejected() {
        let pp = two_items();
        let bad = PricedPattern {
            items: vec![0, 1],
            value: 19.0,
        };
        assert!(matches!(
            bb_solve(&pp, Some(&bad), BbLimits::default()),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn node_limit_marks_unproven() {
        let n = 12;
        let mut quad = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    quad[i * n + j] = ((i * 7 + j * 7) % 11) as f64 - 5.0;
                }
            }
        }
        let pp = PricingProblem::new(
            (1..=n as i64).collect(),
            20,
            (0..n).map(|i| (i % 5) as f64 - 1.0).collect(),
            quad,
            &[],
            0.0,
        )
        .unwrap();
        let out = bb_solve(
            &pp,
            None,
            BbLimits {
                node_limit: Some(1),
                ..BbLimits::default()
            },
        )
        .unwrap();
        assert!(!out.proven);
        assert_eq!(pattern_value(&pp, &out.best.items).unwrap(), out.best.value);
        let full = bb_solve(&pp, None, BbLimits::default()).unwrap();
        assert!(full.proven);
        assert_eq!(full.best.value, enumerate_solve(&pp).unwrap().value);
    }

    #[test]
    fn cutoff_keeps_improving_optimum() {
        let pp = two_items();
        let limits = BbLimits {
            cutoff: Some(4.0),
            ..BbLimits::default()
        };
        let out = bb_solve(&pp, None, limits).unwrap();
        assert!(out.proven);
        assert_eq!(out.best.value, 5.0);
        let limits = BbLimits {
            cutoff: Some(6.0),
            ..BbLimits::default()
        };
        assert!(bb_solve(&pp, None, limits).unwrap().best.value <= 6.0);
    }
}
