//! Constructive knapsack heuristic keeping a single pattern per (stage,
//! weight) state, written as a plain table recursion.

pub struct Gqkp<'a> {
    pub weights: &'a [i64],
    pub capacity: i64,
    pub linear: &'a [f64],
    /// Dense `n x n`.
    pub quad: &'a [f64],
    /// Dense `n x n`.
    pub conflict: &'a [bool],
}

impl Gqkp<'_> {
    fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn value(&self, items: &[usize]) -> f64 {
        let n = self.n();
        let mut v = 0.0;
        for (a, &i) in items.iter().enumerate() {
            v += self.linear[i];
            for &j in &items[..a] {
                v += self.quad[i * n + j];
            }
        }
        v
    }

    fn order(&self) -> Vec<usize> {
        let n = self.n();
        let live: Vec<usize> = (0..n).filter(|&i| self.weights[i] <= self.capacity).collect();
        let mut keyed: Vec<(f64, usize)> = live
            .iter()
            .map(|&i| {
                let mut s = self.linear[i];
                for &j in &live {
                    if j != i && !self.conflict[i * n + j] {
                        s += self.quad[i * n + j];
                    }
                }
                (s / self.weights[i] as f64, i)
            })
            .collect();
        keyed.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        keyed.into_iter().map(|(_, i)| i).collect()
    }
}

/// Every distinct non-empty pattern held by a final state, sorted by value
/// (descending) then item list, with values recomputed from scratch.
pub fn single_slot(p: &Gqkp) -> Vec<(Vec<usize>, f64)> {
    let n = p.n();
    let cap = p.capacity.max(0) as usize;
    let mut table: Vec<Option<(Vec<usize>, f64)>> = vec![None; cap + 1];
    table[0] = Some((Vec::new(), 0.0));
    for t in p.order() {
        let w = p.weights[t] as usize;
        let prev = table.clone();
        for c in w..=cap {
            let Some((pat, v)) = &prev[c - w] else { continue };
            if pat.iter().any(|&j| p.conflict[t * n + j]) {
                continue;
            }
            let cand = v + p.linear[t] + pat.iter().map(|&j| p.quad[t * n + j]).sum::<f64>();
            let replace = match &table[c] {
                None => true,
                Some((_, old)) => cand > *old,
            };
            if replace {
                let mut next = pat.clone();
                next.push(t);
                table[c] = Some((next, cand));
            }
        }
    }
    let mut out: Vec<(Vec<usize>, f64)> = table
        .into_iter()
        .flatten()
        .filter(|(pat, _)| !pat.is_empty())
        .map(|(mut pat, _)| {
            pat.sort_unstable();
            let v = p.value(&pat);
            (pat, v)
        })
        .collect();
    out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    out.dedup_by(|a, b| a.0 == b.0);
    out
}
