//! Branch-and-price: best-first search over Ryan-Foster branches, with
//! column generation at every node.
//!
//! A node keeps its master over the original items. Decisions taken on the
//! way down are recorded as a conflict graph (pairs that must be split) and
//! a partition into super-items (items that must stay together). Pricing
//! works on super-items; its patterns are expanded back before they enter
//! the master.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{Column, LpResult, MasterLP};
use crate::pricing::{bb_solve, mch_solve, BbLimits, PricedPattern, PricingProblem};
use crate::problem::{Instance, Pattern, Solution};

/// Tolerance for deciding whether a master solution is integral.
pub const EPS_INTEGRAL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct SolveParams {
    /// Slots per state in the constructive pricing heuristic.
    pub h: usize,
    /// Columns added per column-generation iteration.
    pub max_cols: usize,
    pub time_limit: Option<Duration>,
    /// Maximum number of nodes whose column generation is run.
    pub node_limit: Option<usize>,
    pub eps: f64,
    pub trace: bool,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            h: 5,
            max_cols: 10,
            time_limit: Some(Duration::from_secs(3600)),
            node_limit: None,
            eps: 1e-6,
            trace: false,
        }
    }
}

impl SolveParams {
    pub fn with_config(h: usize, max_cols: usize) -> Self {
        SolveParams {
            h,
            max_cols,
            ..SolveParams::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    TimeLimit,
    NodeLimit,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::TimeLimit => "time-limit",
            SolveStatus::NodeLimit => "node-limit",
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SolveStats {
    /// Nodes whose column generation finished.
    pub nodes: usize,
    pub nodes_created: usize,
    pub max_depth: usize,
    pub cg_iterations: usize,
    pub columns: usize,
    pub mch_calls: usize,
    pub exact_pricing_calls: usize,
    pub root_lower_bound: Option<f64>,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceEvent {
    pub iteration: usize,
    pub node: usize,
    pub lp_objective: f64,
    pub columns_added: usize,
    pub pricer: &'static str,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub best_solution: Option<Solution>,
    pub lower_bound: f64,
    pub upper_bound: i64,
    pub gap_percent: f64,
    pub stats: SolveStats,
    pub trace: Vec<TraceEvent>,
}

/// `100 (UB - LB) / |UB|`; zero when both bounds are zero and infinite for
/// any other bound pair with `UB = 0`.
pub fn gap_percent(upper: i64, lower: f64) -> f64 {
    if upper == 0 {
        if lower == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        100.0 * (upper as f64 - lower) / (upper as f64).abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchSide {
    Zero,
    One,
}

#[derive(Clone, Debug)]
pub struct BnPNode {
    pub id: usize,
    pub depth: usize,
    master: MasterLP,
    /// Original item pairs that must not share a bin.
    conflicts: Vec<(usize, usize)>,
    /// Super-items, each a sorted list of original items; ordered by first item.
    groups: Vec<Vec<usize>>,
    group_of: Vec<usize>,
    /// Internal dissimilarity sum of each super-item.
    internal: Vec<i64>,
    lower_bound: f64,
    solved: bool,
    lp: Option<LpResult>,
}

impl BnPNode {
    /// Root node: every item on its own, one singleton column each.
    pub fn root(inst: &Instance) -> Result<Self> {
        let n = inst.n();
        let mut node = BnPNode {
            id: 0,
            depth: 0,
            master: MasterLP::new(n),
            conflicts: Vec::new(),
            groups: (0..n).map(|i| vec![i]).collect(),
            group_of: (0..n).collect(),
            internal: vec![0; n],
            lower_bound: f64::NEG_INFINITY,
            solved: false,
            lp: None,
        };
        node.insert_singletons(inst)?;
        Ok(node)
    }

    pub fn master(&self) -> &MasterLP {
        &self.master
    }

    pub fn conflicts(&self) -> &[(usize, usize)] {
        &self.conflicts
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    pub fn is_solved(&self) -> bool {
        self.solved
    }

    pub fn lp(&self) -> Option<&LpResult> {
        self.lp.as_ref()
    }

    fn insert_singletons(&mut self, inst: &Instance) -> Result<()> {
        let cols = self
            .groups
            .iter()
            .zip(&self.internal)
            .map(|(g, &d)| Column {
                cost: (inst.bin_cost() + d) as f64,
                support: g.clone(),
            })
            .collect::<Vec<_>>();
        self.master.add_columns(cols)?;
        Ok(())
    }

    fn groups_conflict(&self, k: usize, l: usize) -> bool {
        self.conflicts.iter().any(|&(i, j)| {
            let (a, b) = (self.group_of[i], self.group_of[j]);
            (a == k && b == l) || (a == l && b == k)
        })
    }

    /// Whether the pair still has to be decided at this node.
    pub fn undecided(&self, i: usize, j: usize) -> bool {
        let (k, l) = (self.group_of[i], self.group_of[j]);
        k != l && !self.groups_conflict(k, l)
    }

    /// True when every column of the master solution is at 0 or 1.
    pub fn is_integral(&self) -> bool {
        self.lp.as_ref().is_some_and(|lp| {
            lp.primal
                .iter()
                .all(|&v| v.abs() <= EPS_INTEGRAL || (v - 1.0).abs() <= EPS_INTEGRAL)
        })
    }

    /// Bins used by an integral master solution.
    pub fn integral_solution(&self, inst: &Instance) -> Result<Option<Solution>> {
        if !self.is_integral() {
            return Ok(None);
        }
        let lp = self.lp.as_ref().expect("integral implies solved");
        let bins = lp
            .primal
            .iter()
            .zip(self.master.columns())
            .filter(|(v, _)| **v > 0.5)
            .map(|(_, c)| c.support.clone())
            .collect();
        Ok(Some(Solution::from_bins(inst, bins)?))
    }
}

/// Pricing problem over the node's super-items for the given row duals.
///
/// Super-item `K` has weight `Σ w_i`, linear profit `Σ π_i − D_K` and
/// pairwise profit `−Σ d_ij` over the cross pairs, so a pattern's value is
/// `Σ π − c + α` and it prices out exactly when its value exceeds `α`,
/// which is returned alongside.
pub fn build_pricing(inst: &Instance, node: &BnPNode, duals: &[f64]) -> Result<(PricingProblem, f64)> {
    let m = node.groups.len();
    let mut weights = Vec::with_capacity(m);
    let mut linear = Vec::with_capacity(m);
    for (g, &d) in node.groups.iter().zip(&node.internal) {
        let w: i64 = g.iter().map(|&i| inst.weight(i)).sum();
        if w > inst.capacity() {
            return Err(Error::Internal(format!(
                "super-item {g:?} weighs {w} > {}",
                inst.capacity()
            )));
        }
        weights.push(w);
        linear.push(g.iter().map(|&i| duals[i]).sum::<f64>() - d as f64);
    }
    let mut quad = vec![0.0; m * m];
    for k in 0..m {
        for l in k + 1..m {
            let mut cross = 0i64;
            for &i in &node.groups[k] {
                for &j in &node.groups[l] {
                    cross += inst.d(i, j);
                }
            }
            quad[k * m + l] = -(cross as f64);
            quad[l * m + k] = -(cross as f64);
        }
    }
    let mut conflicts: Vec<(usize, usize)> = node
        .conflicts
        .iter()
        .map(|&(i, j)| {
            let (a, b) = (node.group_of[i], node.group_of[j]);
            (a.min(b), a.max(b))
        })
        .collect();
    conflicts.sort_unstable();
    conflicts.dedup();
    let alpha = inst.bin_cost() as f64;
    let pp = PricingProblem::new(weights, inst.capacity(), linear, quad, &conflicts, alpha)?;
    Ok((pp, alpha))
}

/// Original-item pattern for a pattern over the node's super-items.
pub fn expand_pattern(inst: &Instance, node: &BnPNode, super_items: &[usize]) -> Result<Pattern> {
    let items: Vec<usize> = super_items
        .iter()
        .flat_map(|&k| node.groups[k].iter().copied())
        .collect();
    Pattern::new(inst, items)
}

/// Undecided pair whose co-assignment `ζ_ij = Σ_{P ∋ i,j} λ_P` is closest
/// to one half; ties go to the lexicographically smallest pair.
pub fn select_branch_pair(node: &BnPNode) -> Result<(usize, usize)> {
    let lp = node
        .lp
        .as_ref()
        .ok_or_else(|| Error::Internal("branching on an unsolved node".into()))?;
    let n = node.group_of.len();
    let mut zeta = vec![0.0; n * n];
    for (v, col) in lp.primal.iter().zip(node.master.columns()) {
        if *v <= 1e-12 {
            continue;
        }
        for (a, &i) in col.support.iter().enumerate() {
            for &j in &col.support[a + 1..] {
                zeta[i * n + j] += v;
            }
        }
    }
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..n {
        for j in i + 1..n {
            if !node.undecided(i, j) {
                continue;
            }
            let z = zeta[i * n + j];
            let dist = (z - 0.5).abs();
            if best.is_none_or(|(bd, _, _)| dist < bd - 1e-12) {
                best = Some((dist, i, j));
            }
        }
    }
    match best {
        Some((dist, i, j)) if dist < 0.5 - EPS_INTEGRAL => Ok((i, j)),
        _ => Err(Error::Internal(
            "fractional master solution without a fractional item pair".into(),
        )),
    }
}

/// Child of `node` with the pair `(i, j)` split (`Zero`) or joined (`One`).
/// The child starts unsolved with the parent's bound.
pub fn apply_branch(
    inst: &Instance,
    node: &BnPNode,
    (i, j): (usize, usize),
    side: BranchSide,
    id: usize,
) -> Result<BnPNode> {
    if !node.undecided(i, j) {
        return Err(Error::Internal(format!(
            "pair ({}, {}) is already decided",
            i + 1,
            j + 1
        )));
    }
    let (k, l) = (node.group_of[i], node.group_of[j]);
    let keep = |support: &[usize]| {
        let has_k = support.binary_search(&node.groups[k][0]).is_ok();
        let has_l = support.binary_search(&node.groups[l][0]).is_ok();
        match side {
            BranchSide::Zero => !(has_k && has_l),
            BranchSide::One => has_k == has_l,
        }
    };
    let mut child = BnPNode {
        id,
        depth: node.depth + 1,
        master: MasterLP::new(inst.n()),
        conflicts: node.conflicts.clone(),
        groups: node.groups.clone(),
        group_of: node.group_of.clone(),
        internal: node.internal.clone(),
        lower_bound: node.lower_bound,
        solved: false,
        lp: None,
    };
    match side {
        BranchSide::Zero => child.conflicts.push((i.min(j), i.max(j))),
        BranchSide::One => {
            let mut cross = 0;
            for &a in &node.groups[k] {
                for &b in &node.groups[l] {
                    cross += inst.d(a, b);
                }
            }
            let mut merged = node.groups[k].clone();
            merged.extend_from_slice(&node.groups[l]);
            merged.sort_unstable();
            let w: i64 = merged.iter().map(|&a| inst.weight(a)).sum();
            if w > inst.capacity() {
                return Err(Error::Internal(format!(
                    "merging ({}, {}) exceeds the capacity",
                    i + 1,
                    j + 1
                )));
            }
            let internal = node.internal[k] + node.internal[l] + cross;
            let mut groups = Vec::with_capacity(node.groups.len() - 1);
            let mut internals = Vec::with_capacity(node.groups.len() - 1);
            for (g, (members, &d)) in node.groups.iter().zip(&node.internal).enumerate() {
                if g == k.min(l) {
                    groups.push(merged.clone());
                    internals.push(internal);
                } else if g != k.max(l) {
                    groups.push(members.clone());
                    internals.push(d);
                }
            }
            for (g, members) in groups.iter().enumerate() {
                for &a in members {
                    child.group_of[a] = g;
                }
            }
            child.groups = groups;
            child.internal = internals;
        }
    }
    let inherited: Vec<Column> = node
        .master
        .columns()
        .iter()
        .filter(|c| keep(&c.support))
        .cloned()
        .collect();
    child.master.add_columns(inherited)?;
    child.insert_singletons(inst)?;
    Ok(child)
}

/// First-fit decreasing followed by one pass of best-improvement
/// relocations (moves into other bins or a fresh bin).
pub fn initial_incumbent(inst: &Instance) -> Result<Solution> {
    let n = inst.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(inst.weight(i)), i));
    let mut bins: Vec<Vec<usize>> = Vec::new();
    let mut load: Vec<i64> = Vec::new();
    for &i in &order {
        match (0..bins.len()).find(|&b| load[b] + inst.weight(i) <= inst.capacity()) {
            Some(b) => {
                bins[b].push(i);
                load[b] += inst.weight(i);
            }
            None => {
                bins.push(vec![i]);
                load.push(inst.weight(i));
            }
        }
    }
    let mut bin_of = vec![0; n];
    for (b, items) in bins.iter().enumerate() {
        for &i in items {
            bin_of[i] = b;
        }
    }
    let alpha = inst.bin_cost();
    for i in 0..n {
        let from = bin_of[i];
        let link = |b: usize| -> i64 { bins[b].iter().filter(|&&j| j != i).map(|&j| inst.d(i, j)).sum() };
        let leave = -link(from) - if bins[from].len() == 1 { alpha } else { 0 };
        // (delta, target); `bins.len()` stands for a fresh bin.
        let mut best: Option<(i64, usize)> = None;
        for b in 0..=bins.len() {
            if b == from {
                continue;
            }
            let enter = if b == bins.len() {
                if bins[from].len() == 1 {
                    continue;
                }
                alpha
            } else {
                if bins[b].is_empty() || load[b] + inst.weight(i) > inst.capacity() {
                    continue;
                }
                link(b)
            };
            let delta = leave + enter;
            if delta < 0 && best.is_none_or(|(bd, _)| delta < bd) {
                best = Some((delta, b));
            }
        }
        if let Some((_, b)) = best {
            bins[from].retain(|&j| j != i);
            load[from] -= inst.weight(i);
            if b == bins.len() {
                bins.push(Vec::new());
                load.push(0);
            }
            bins[b].push(i);
            load[b] += inst.weight(i);
            bin_of[i] = b;
        }
    }
    bins.retain(|b| !b.is_empty());
    Ok(Solution::from_bins(inst, bins)?.canonical())
}

enum CgOutcome {
    Converged,
    TimedOut,
}

struct Search<'a> {
    inst: &'a Instance,
    params: &'a SolveParams,
    deadline: Option<Instant>,
    stats: SolveStats,
    trace: Vec<TraceEvent>,
}

impl Search<'_> {
    fn out_of_time(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn column_generation(&mut self, node: &mut BnPNode) -> Result<CgOutcome> {
        loop {
            if self.out_of_time() {
                return Ok(CgOutcome::TimedOut);
            }
            let lp = node.master.solve()?;
            self.stats.cg_iterations += 1;
            let (pp, alpha) = build_pricing(self.inst, node, &lp.duals)?;
            let bar = alpha + self.params.eps;

            self.stats.mch_calls += 1;
            let heuristic = mch_solve(&pp, self.params.h);
            let mut found: Vec<PricedPattern> = heuristic.iter().filter(|p| p.value > bar).cloned().collect();
            let mut pricer = "mch";
            if found.is_empty() {
                pricer = "exact";
                self.stats.exact_pricing_calls += 1;
                let limits = BbLimits {
                    node_limit: None,
                    deadline: self.deadline,
                    cutoff: Some(alpha),
                };
                let out = bb_solve(&pp, heuristic.first(), limits)?;
                if out.best.value > bar {
                    found.push(out.best);
                } else if !out.proven {
                    return Ok(CgOutcome::TimedOut);
                }
            }
            if found.is_empty() {
                node.lower_bound = lp.objective;
                node.lp = Some(lp);
                node.solved = true;
                return Ok(CgOutcome::Converged);
            }
            found.truncate(self.params.max_cols.max(1));
            let cols = found
                .iter()
                .map(|p| {
                    let pat = expand_pattern(self.inst, node, &p.items)?;
                    Ok(Column {
                        cost: pat.cost() as f64,
                        support: pat.items().to_vec(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let added = node.master.add_columns(cols)?;
            if added == 0 {
                return Err(Error::Numerical(
                    "pricing returned only columns already in the master".into(),
                ));
            }
            self.stats.columns += added;
            if self.params.trace {
                self.trace.push(TraceEvent {
                    iteration: self.stats.cg_iterations,
                    node: node.id,
                    lp_objective: lp.objective,
                    columns_added: added,
                    pricer,
                });
            }
        }
    }
}

/// Runs column generation on `node` until no improving column is left.
/// Returns `false` if the time limit in `params` ran out first.
pub fn solve_node(inst: &Instance, node: &mut BnPNode, params: &SolveParams) -> Result<bool> {
    let mut search = Search {
        inst,
        params,
        deadline: params.time_limit.map(|t| Instant::now() + t),
        stats: SolveStats::default(),
        trace: Vec::new(),
    };
    Ok(matches!(search.column_generation(node)?, CgOutcome::Converged))
}

/// Bound valid without any LP: the bins needed by weight alone, plus
/// every negative dissimilarity.
pub fn trivial_lower_bound(inst: &Instance) -> f64 {
    let cap = inst.capacity().max(1);
    let bins = (inst.total_weight() + cap - 1) / cap;
    let negative: i64 = inst.nonzero_pairs().map(|(_, _, d)| d.min(0)).sum();
    (inst.bin_cost() * bins + negative) as f64
}

fn can_improve(lb: f64, upper: i64, eps: f64) -> bool {
    ((lb - eps).ceil() as i64) < upper
}

pub fn solve(inst: &Instance, params: &SolveParams) -> Result<SolveResult> {
    let start = Instant::now();
    let mut search = Search {
        inst,
        params,
        deadline: params.time_limit.map(|t| start + t),
        stats: SolveStats::default(),
        trace: Vec::new(),
    };
    let mut incumbent = initial_incumbent(inst)?;
    let mut active = vec![BnPNode::root(inst)?];
    search.stats.nodes_created = 1;
    let mut next_id = 1;
    let mut global_lb = trivial_lower_bound(inst);

    let status = 'search: loop {
        for node in active.iter_mut() {
            if node.solved {
                continue;
            }
            if params.node_limit.is_some_and(|cap| search.stats.nodes >= cap) {
                break 'search SolveStatus::NodeLimit;
            }
            match search.column_generation(node)? {
                CgOutcome::TimedOut => break 'search SolveStatus::TimeLimit,
                CgOutcome::Converged => {}
            }
            search.stats.nodes += 1;
            if node.id == 0 {
                search.stats.root_lower_bound = Some(node.lower_bound);
            }
            if let Some(sol) = node.integral_solution(inst)? {
                if sol.objective < incumbent.objective {
                    incumbent = sol.canonical();
                }
            }
        }

        let upper = incumbent.objective;
        active.retain(|nd| nd.solved && can_improve(nd.lower_bound, upper, params.eps) && !nd.is_integral());
        let Some(pos) = (0..active.len()).min_by(|&a, &b| {
            active[a]
                .lower_bound
                .total_cmp(&active[b].lower_bound)
                .then(active[a].id.cmp(&active[b].id))
        }) else {
            break 'search SolveStatus::Optimal;
        };
        global_lb = global_lb.max(active[pos].lower_bound);
        if search.out_of_time() {
            break 'search SolveStatus::TimeLimit;
        }
        if params.node_limit.is_some_and(|cap| search.stats.nodes >= cap) {
            break 'search SolveStatus::NodeLimit;
        }

        let parent = active.swap_remove(pos);
        let pair = select_branch_pair(&parent)?;
        for side in [BranchSide::Zero, BranchSide::One] {
            let child = apply_branch(inst, &parent, pair, side, next_id)?;
            next_id += 1;
            search.stats.nodes_created += 1;
            search.stats.max_depth = search.stats.max_depth.max(child.depth);
            active.push(child);
        }
        active.sort_by_key(|nd| nd.id);
    };

    let upper = incumbent.objective;
    let lower = match status {
        SolveStatus::Optimal => upper as f64,
        _ => {
            let open = active.iter().map(|nd| nd.lower_bound).fold(f64::INFINITY, f64::min);
            global_lb.max(open.min(upper as f64)).min(upper as f64)
        }
    };
    search.stats.seconds = start.elapsed().as_secs_f64();
    Ok(SolveResult {
        status,
        best_solution: Some(incumbent),
        lower_bound: lower,
        upper_bound: upper,
        gap_percent: gap_percent(upper, lower),
        stats: search.stats,
        trace: search.trace,
    })
}

/// Lower bound from column generation at the root alone.
pub fn root_lower_bound(inst: &Instance, params: &SolveParams) -> Result<Option<f64>> {
    let params = SolveParams {
        node_limit: Some(1),
        ..params.clone()
    };
    Ok(solve(inst, &params)?.stats.root_lower_bound)
}
