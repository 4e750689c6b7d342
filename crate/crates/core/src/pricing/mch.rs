use std::cmp::Ordering;

use super::{PricedPattern, PricingProblem};

const NIL: u32 = u32::MAX;

/// Patterns are persistent cons lists in an arena so that extending one
/// never copies its members.
struct Arena {
    nodes: Vec<(u32, u32)>,
}

impl Arena {
    fn push(&mut self, item: usize, parent: u32) -> u32 {
        self.nodes.push((item as u32, parent));
        (self.nodes.len() - 1) as u32
    }

    fn items(&self, mut node: u32) -> Vec<usize> {
        let mut out = Vec::new();
        while node != NIL {
            let (item, parent) = self.nodes[node as usize];
            out.push(item as usize);
            node = parent;
        }
        out
    }

    /// Marginal profit of adding `item` to the pattern at `node`, or `None`
    /// if the pattern holds an item in conflict with it.
    fn marginal(&self, pp: &PricingProblem, item: usize, mut node: u32) -> Option<f64> {
        let mut gain = pp.linear(item);
        while node != NIL {
            let (j, parent) = self.nodes[node as usize];
            let j = j as usize;
            if pp.conflicts(item, j) {
                return None;
            }
            gain += pp.quad(item, j);
            node = parent;
        }
        Some(gain)
    }
}

#[derive(Clone, Copy)]
struct Entry {
    value: f64,
    node: u32,
}

fn by_value_desc(a: f64, b: f64) -> Ordering {
    b.total_cmp(&a)
}

/// Item insertion order: non-increasing `(π_i + Σ_{j≠i} p_ij) / w_i`, with
/// conflicting partners left out of the sum; ties go to the smaller index.
fn insertion_order(pp: &PricingProblem) -> Vec<usize> {
    let live = pp.live_items();
    let mut keyed: Vec<(f64, usize)> = live
        .iter()
        .map(|&i| {
            let row: f64 = live
                .iter()
                .filter(|&&j| j != i && !pp.conflicts(i, j))
                .map(|&j| pp.quad(i, j))
                .sum();
            ((pp.linear(i) + row) / pp.weight(i) as f64, i)
        })
        .collect();
    keyed.sort_by(|a, b| by_value_desc(a.0, b.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().map(|(_, i)| i).collect()
}

/// Multiple constructive heuristic: the knapsack DP over (stage, exact
/// weight) with the quadratic marginal as insertion profit, keeping the `h`
/// best patterns per state.
///
/// Returns every distinct non-empty pattern held in a final state, best
/// first (ties by item list). Values are recomputed from scratch.
pub fn mch_solve(pp: &PricingProblem, h: usize) -> Vec<PricedPattern> {
    let h = h.max(1);
    let cap = pp.capacity().max(0) as usize;
    let mut arena = Arena { nodes: Vec::new() };
    let mut states: Vec<Vec<Entry>> = vec![Vec::new(); cap + 1];
    states[0].push(Entry { value: 0.0, node: NIL });

    let mut fresh: Vec<(f64, u32)> = Vec::with_capacity(h);
    let mut merged: Vec<Entry> = Vec::with_capacity(2 * h);
    for item in insertion_order(pp) {
        let w_i = pp.weight(item) as usize;
        // Descending weights read only previous-stage states at w - w_i.
        for w in (w_i..=cap).rev() {
            fresh.clear();
            for e in &states[w - w_i] {
                if let Some(gain) = arena.marginal(pp, item, e.node) {
                    fresh.push((e.value + gain, e.node));
                }
            }
            if fresh.is_empty() {
                continue;
            }
            fresh.sort_by(|a, b| by_value_desc(a.0, b.0));

            let old = &states[w];
            merged.clear();
            let (mut a, mut b) = (0, 0);
            while merged.len() < h && (a < old.len() || b < fresh.len()) {
                let take_old = match (old.get(a), fresh.get(b)) {
                    (Some(o), Some(f)) => o.value >= f.0,
                    (Some(_), None) => true,
                    _ => false,
                };
                if take_old {
                    merged.push(old[a]);
                    a += 1;
                } else {
                    let (value, parent) = fresh[b];
                    merged.push(Entry {
                        value,
                        node: arena.push(item, parent),
                    });
                    b += 1;
                }
            }
            states[w].clear();
            states[w].extend_from_slice(&merged);
        }
    }

    let mut out: Vec<PricedPattern> = states
        .iter()
        .flatten()
        .filter(|e| e.node != NIL)
        .map(|e| pp.priced(arena.items(e.node)))
        .collect();
    out.sort_by(|a, b| by_value_desc(a.value, b.value).then_with(|| a.items.cmp(&b.items)));
    out.dedup_by(|a, b| a.items == b.items);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricing::tests::two_items;

    #[test]
    fn two_item_example() {
        let out = mch_solve(&two_items(), 1);
        assert_eq!(out[0].items, vec![0]);
        assert_eq!(out[0].value, 5.0);
    }

    #[test]
    fn all_negative_profits() {
        let pp = PricingProblem::new(
            vec![1, 2, 3],
            6,
            vec![-1.0, -2.0, -0.5],
            vec![0.0, -1.0, -2.0, -1.0, 0.0, -3.0, -2.0, -3.0, 0.0],
            &[],
            0.0,
        )
        .unwrap();
        let out = mch_solve(&pp, 3);
        assert!(out.iter().all(|p| p.value < 0.0));
    }

    #[test]
    fn conflicts_are_never_combined() {
        let pp = PricingProblem::new(
            vec![1, 1, 1],
            3,
            vec![1.0, 1.0, 1.0],
            vec![0.0, 5.0, 5.0, 5.0, 0.0, 5.0, 5.0, 5.0, 0.0],
            &[(0, 2)],
            0.0,
        )
        .unwrap();
        let out = mch_solve(&pp, 4);
        assert!(!out.is_empty());
        for p in &out {
            assert!(!(p.items.contains(&0) && p.items.contains(&2)), "{:?}", p.items);
        }
    }

    #[test]
    fn outputs_are_distinct() {
        let pp = PricingProblem::new(vec![1, 2, 2, 3], 5, vec![3.0, 1.0, 1.0, 2.0], vec![0.0; 16], &[], 0.0).unwrap();
        let out = mch_solve(&pp, 5);
        let mut sets: Vec<_> = out.iter().map(|p| p.items.clone()).collect();
        sets.sort();
        sets.dedup();
        assert_eq!(sets.len(), out.len());
    }
}
