//! Problem data: instances, patterns (bins) and complete solutions.
//!
//! Items are 0-indexed in memory. Everything that crosses a text boundary
//! (instance files, solution files, reports) uses 1-based item numbers.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sign regime of the generated dissimilarities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignRegime {
    /// All dissimilarities non-positive.
    Minus,
    /// All dissimilarities non-negative.
    Plus,
    /// Unrestricted sign.
    Mixed,
}

impl SignRegime {
    pub const ALL: [SignRegime; 3] = [SignRegime::Minus, SignRegime::Plus, SignRegime::Mixed];

    pub fn as_str(self) -> &'static str {
        match self {
            SignRegime::Minus => "minus",
            SignRegime::Plus => "plus",
            SignRegime::Mixed => "mixed",
        }
    }
}

impl fmt::Display for SignRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SignRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "minus" | "-" | "neg" => Ok(SignRegime::Minus),
            "plus" | "+" | "pos" => Ok(SignRegime::Plus),
            "mixed" | "pm" | "+-" | "±" => Ok(SignRegime::Mixed),
            other => Err(Error::input(format!("unknown sign regime `{other}`"))),
        }
    }
}

/// Generator parameters carried along with an instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub mu: f64,
    pub delta: f64,
    pub sigma: SignRegime,
    pub seed: u64,
    pub group: u64,
    pub copy: u32,
    /// Set when the capacity rule produced a value below the heaviest item
    /// and the capacity was raised to that weight.
    pub capacity_clamped: bool,
}

/// A QBPP instance: weights, bin capacity, bin cost and the symmetric
/// pairwise dissimilarity matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    weights: Vec<i64>,
    capacity: i64,
    bin_cost: i64,
    dissim: Vec<i64>,
    meta: Option<InstanceMeta>,
}

impl Instance {
    /// Builds an instance from a dense `n x n` row-major matrix.
    pub fn new(weights: Vec<i64>, capacity: i64, bin_cost: i64, dissim: Vec<i64>) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::input("an instance needs at least one item"));
        }
        if dissim.len() != n * n {
            return Err(Error::input(format!(
                "dissimilarity matrix has {} entries, expected {}",
                dissim.len(),
                n * n
            )));
        }
        if let Some((i, &w)) = weights.iter().enumerate().find(|(_, &w)| w < 1) {
            return Err(Error::input(format!("item {} has non-positive weight {w}", i + 1)));
        }
        let max_w = weights.iter().copied().max().unwrap_or(0);
        if capacity < max_w {
            return Err(Error::input(format!(
                "capacity {capacity} is below the heaviest item weight {max_w}"
            )));
        }
        if bin_cost < 0 {
            return Err(Error::input(format!("negative bin cost {bin_cost}")));
        }
        for i in 0..n {
            if dissim[i * n + i] != 0 {
                return Err(Error::input(format!("nonzero diagonal entry for item {}", i + 1)));
            }
            for j in i + 1..n {
                if dissim[i * n + j] != dissim[j * n + i] {
                    return Err(Error::input(format!(
                        "asymmetric dissimilarity between items {} and {}",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Instance {
            weights,
            capacity,
            bin_cost,
            dissim,
            meta: None,
        })
    }

    /// Builds an instance from a list of `(i, j, d)` entries (0-indexed,
    /// unordered). Unlisted pairs get zero dissimilarity.
    pub fn from_pairs(weights: Vec<i64>, capacity: i64, bin_cost: i64, pairs: &[(usize, usize, i64)]) -> Result<Self> {
        let n = weights.len();
        let mut dissim = vec![0; n * n];
        for &(i, j, d) in pairs {
            if i >= n || j >= n || i == j {
                return Err(Error::input(format!("invalid pair ({}, {})", i + 1, j + 1)));
            }
            dissim[i * n + j] = d;
            dissim[j * n + i] = d;
        }
        Self::new(weights, capacity, bin_cost, dissim)
    }

    pub fn with_meta(mut self, meta: InstanceMeta) -> Self {
        self.meta = Some(meta);
        self
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
    pub fn bin_cost(&self) -> i64 {
        self.bin_cost
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> i64 {
        self.dissim[i * self.n() + j]
    }

    /// Row-major `n x n` dissimilarity matrix.
    pub fn dissim(&self) -> &[i64] {
        &self.dissim
    }

    pub fn meta(&self) -> Option<&InstanceMeta> {
        self.meta.as_ref()
    }

    /// Nonzero entries `(i, j, d)` with `i < j`, in row order.
    pub fn nonzero_pairs(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        let n = self.n();
        (0..n).flat_map(move |i| {
            (i + 1..n).filter_map(move |j| {
                let d = self.d(i, j);
                (d != 0).then_some((i, j, d))
            })
        })
    }

    pub fn total_weight(&self) -> i64 {
        self.weights.iter().sum()
    }

    fn check_items(&self, items: &[usize]) -> Result<()> {
        if let Some(&bad) = items.iter().find(|&&i| i >= self.n()) {
            return Err(Error::input(format!("item {} out of range 1..={}", bad + 1, self.n())));
        }
        Ok(())
    }
}

/// `α + Σ_{i<j} d_ij` over `items`. Capacity is not checked.
pub fn pattern_cost(inst: &Instance, items: &[usize]) -> Result<i64> {
    if items.is_empty() {
        return Err(Error::input("pattern cost requested for an empty item set"));
    }
    inst.check_items(items)?;
    Ok(pattern_cost_unchecked(inst, items))
}

pub(crate) fn pattern_cost_unchecked(inst: &Instance, items: &[usize]) -> i64 {
    let mut cost = inst.bin_cost();
    for (a, &i) in items.iter().enumerate() {
        for &j in &items[a + 1..] {
            cost += inst.d(i, j);
        }
    }
    cost
}

/// A non-empty set of items packed together, with cached weight and cost.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    items: Vec<usize>,
    weight: i64,
    cost: i64,
}

impl Pattern {
    /// Builds a pattern; items may come in any order but must be distinct
    /// and in range. Capacity is not enforced here, see [`Pattern::fits`].
    pub fn new(inst: &Instance, items: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut items: Vec<usize> = items.into_iter().collect();
        items.sort_unstable();
        if let Some(w) = items.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::input(format!("item {} listed twice in one bin", w[0] + 1)));
        }
        let cost = pattern_cost(inst, &items)?;
        let weight = items.iter().map(|&i| inst.weight(i)).sum();
        Ok(Pattern { items, weight, cost })
    }

    /// Like [`Pattern::new`] but also rejects patterns over capacity.
    pub fn feasible(inst: &Instance, items: impl IntoIterator<Item = usize>) -> Result<Self> {
        let p = Self::new(inst, items)?;
        if !p.fits(inst) {
            return Err(Error::input(format!(
                "pattern weight {} exceeds capacity {}",
                p.weight,
                inst.capacity()
            )));
        }
        Ok(p)
    }

    pub fn items(&self) -> &[usize] {
        &self.items
    }

    pub fn weight(&self) -> i64 {
        self.weight
    }

    pub fn cost(&self) -> i64 {
        self.cost
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.items.binary_search(&i).is_ok()
    }

    pub fn fits(&self, inst: &Instance) -> bool {
        self.weight <= inst.capacity()
    }
}

/// A packing of all items into bins, with its claimed objective.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub bins: Vec<Pattern>,
    pub objective: i64,
}

impl Solution {
    /// Builds a solution whose stored objective is the recomputed bin cost sum.
    pub fn from_bins(inst: &Instance, bins: Vec<Vec<usize>>) -> Result<Self> {
        let bins = bins
            .into_iter()
            .map(|b| Pattern::new(inst, b))
            .collect::<Result<Vec<_>>>()?;
        let objective = bins.iter().map(Pattern::cost).sum();
        Ok(Solution { bins, objective })
    }

    /// Bins sorted by smallest item, for stable output.
    pub fn canonical(mut self) -> Self {
        self.bins.sort_by_key(|b| b.items()[0]);
        self
    }

    /// Bin index of each item, `None` where an item is missing.
    pub fn assignment(&self, n: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n];
        for (b, pat) in self.bins.iter().enumerate() {
            for &i in pat.items() {
                if i < n {
                    out[i] = Some(b);
                }
            }
        }
        out
    }
}

/// Outcome of [`validate_solution`]. Item numbers are 0-indexed.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub missing: Vec<usize>,
    pub duplicated: Vec<usize>,
    pub out_of_range: Vec<usize>,
    /// `(bin index, bin weight)` for every bin above capacity.
    pub over_capacity: Vec<(usize, i64)>,
    pub recomputed_objective: i64,
    pub stored_objective: i64,
}

impl ValidationReport {
    pub fn objective_matches(&self) -> bool {
        self.recomputed_objective == self.stored_objective
    }

    pub fn is_valid(&self) -> bool {
        self.missing.is_empty()
            && self.duplicated.is_empty()
            && self.out_of_range.is_empty()
            && self.over_capacity.is_empty()
            && self.objective_matches()
    }

    /// Human-readable violation lines (1-based item numbers).
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for &i in &self.out_of_range {
            out.push(format!("item {} is out of range", i + 1));
        }
        for &i in &self.duplicated {
            out.push(format!("item {} is packed more than once", i + 1));
        }
        for &i in &self.missing {
            out.push(format!("item {} is not packed", i + 1));
        }
        for &(b, w) in &self.over_capacity {
            out.push(format!("bin {} has weight {w} above capacity", b + 1));
        }
        if !self.objective_matches() {
            out.push(format!(
                "stored objective {} differs from recomputed {}",
                self.stored_objective, self.recomputed_objective
            ));
        }
        out
    }
}

/// Checks the partition, capacity and objective of `sol`. Violations are
/// reported, never raised.
pub fn validate_solution(inst: &Instance, sol: &Solution) -> ValidationReport {
    let n = inst.n();
    let mut count = vec![0usize; n];
    let mut report = ValidationReport {
        stored_objective: sol.objective,
        ..Default::default()
    };
    for (b, bin) in sol.bins.iter().enumerate() {
        let mut weight = 0;
        for &i in bin.items() {
            if i >= n {
                report.out_of_range.push(i);
                continue;
            }
            count[i] += 1;
            weight += inst.weight(i);
        }
        if weight > inst.capacity() {
            report.over_capacity.push((b, weight));
        }
        let in_range: Vec<usize> = bin.items().iter().copied().filter(|&i| i < n).collect();
        if !in_range.is_empty() {
            report.recomputed_objective += pattern_cost_unchecked(inst, &in_range);
        }
    }
    for (i, &c) in count.iter().enumerate() {
        match c {
            0 => report.missing.push(i),
            1 => {}
            _ => report.duplicated.push(i),
        }
    }
    report
}

/// Sum of bin costs of a valid solution.
pub fn solution_cost(inst: &Instance, sol: &Solution) -> Result<i64> {
    let mut report = validate_solution(inst, sol);
    // The stored objective is not part of the cost question.
    report.stored_objective = report.recomputed_objective;
    if !report.is_valid() {
        return Err(Error::input(format!(
            "invalid solution: {}",
            report.violations().join("; ")
        )));
    }
    Ok(report.recomputed_objective)
}

const MAGIC: &str = "QBPP 1";

/// Serializes an instance in the canonical `.qbpp` text format.
pub fn write_instance(inst: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "{} {} {}", inst.n(), inst.capacity(), inst.bin_cost());
    let weights: Vec<String> = inst.weights().iter().map(|w| w.to_string()).collect();
    let _ = writeln!(out, "{}", weights.join(" "));
    let pairs: Vec<_> = inst.nonzero_pairs().collect();
    let _ = writeln!(out, "{}", pairs.len());
    for (i, j, d) in pairs {
        let _ = writeln!(out, "{} {} {}", i + 1, j + 1, d);
    }
    if let Some(m) = inst.meta() {
        let _ = writeln!(out, "# mu {}", m.mu);
        let _ = writeln!(out, "# delta {}", m.delta);
        let _ = writeln!(out, "# sigma {}", m.sigma);
        let _ = writeln!(out, "# seed {}", m.seed);
        let _ = writeln!(out, "# group {}", m.group);
        let _ = writeln!(out, "# copy {}", m.copy);
        let _ = writeln!(out, "# capacity_clamped {}", u8::from(m.capacity_clamped));
    }
    out
}

fn parse_num<T: FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::parse(line, format!("cannot parse {what} from `{tok}`")))
}

#[derive(Default)]
struct MetaFields {
    mu: Option<f64>,
    delta: Option<f64>,
    sigma: Option<SignRegime>,
    seed: Option<u64>,
    group: Option<u64>,
    copy: Option<u32>,
    clamped: Option<bool>,
}

impl MetaFields {
    fn absorb(&mut self, line_no: usize, comment: &str) -> Result<()> {
        let mut toks = comment.split_whitespace();
        let (Some(key), Some(value), None) = (toks.next(), toks.next(), toks.next()) else {
            return Ok(());
        };
        match key {
            "mu" => self.mu = Some(parse_num(value, line_no, "mu")?),
            "delta" => self.delta = Some(parse_num(value, line_no, "delta")?),
            "sigma" => {
                self.sigma = Some(
                    value
                        .parse()
                        .map_err(|_| Error::parse(line_no, format!("unknown sigma `{value}`")))?,
                )
            }
            "seed" => self.seed = Some(parse_num(value, line_no, "seed")?),
            "group" => self.group = Some(parse_num(value, line_no, "group")?),
            "copy" => self.copy = Some(parse_num(value, line_no, "copy")?),
            "capacity_clamped" => self.clamped = Some(parse_num::<u8>(value, line_no, "capacity_clamped")? != 0),
            _ => {}
        }
        Ok(())
    }

    fn finish(self) -> Option<InstanceMeta> {
        Some(InstanceMeta {
            mu: self.mu?,
            delta: self.delta?,
            sigma: self.sigma?,
            seed: self.seed?,
            group: self.group?,
            copy: self.copy.unwrap_or(0),
            capacity_clamped: self.clamped.unwrap_or(false),
        })
    }
}

/// Parses the canonical `.qbpp` text format. Errors name the offending line.
pub fn read_instance(text: &str) -> Result<Instance> {
    let mut meta = MetaFields::default();
    let mut data: Vec<(usize, &str)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            meta.absorb(line_no, comment)?;
            continue;
        }
        data.push((line_no, line));
    }
    let mut lines = data.into_iter();
    let last_line = text.lines().count().max(1);

    let (l, magic) = lines.next().ok_or_else(|| Error::parse(1, "empty instance file"))?;
    if magic.split_whitespace().collect::<Vec<_>>() != ["QBPP", "1"] {
        return Err(Error::parse(l, format!("expected header `{MAGIC}`, found `{magic}`")));
    }

    let (l, dims) = lines
        .next()
        .ok_or_else(|| Error::parse(last_line, "missing `n W alpha` line"))?;
    let toks: Vec<&str> = dims.split_whitespace().collect();
    if toks.len() != 3 {
        return Err(Error::parse(l, "expected `n W alpha`"));
    }
    let n: usize = parse_num(toks[0], l, "n")?;
    let capacity: i64 = parse_num(toks[1], l, "W")?;
    let bin_cost: i64 = parse_num(toks[2], l, "alpha")?;
    if n == 0 {
        return Err(Error::parse(l, "n must be positive"));
    }

    let (l, wline) = lines
        .next()
        .ok_or_else(|| Error::parse(last_line, "missing weights line"))?;
    let weights = wline
        .split_whitespace()
        .map(|t| parse_num::<i64>(t, l, "weight"))
        .collect::<Result<Vec<_>>>()?;
    if weights.len() != n {
        return Err(Error::parse(
            l,
            format!("expected {n} weights, found {}", weights.len()),
        ));
    }
    if let Some(w) = weights.iter().find(|&&w| w < 1) {
        return Err(Error::parse(l, format!("weight {w} is not positive")));
    }

    let (l, mline) = lines
        .next()
        .ok_or_else(|| Error::parse(last_line, "missing dissimilarity count line"))?;
    let m: usize = parse_num(mline.trim(), l, "entry count")?;

    let mut dissim = vec![0i64; n * n];
    let mut seen = vec![false; n * n];
    for k in 0..m {
        let (l, entry) = lines
            .next()
            .ok_or_else(|| Error::parse(last_line, format!("expected {m} dissimilarity entries, found {k}")))?;
        let toks: Vec<&str> = entry.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(Error::parse(l, "expected `i j d`"));
        }
        let i: usize = parse_num(toks[0], l, "item index")?;
        let j: usize = parse_num(toks[1], l, "item index")?;
        let d: i64 = parse_num(toks[2], l, "dissimilarity")?;
        if i == j {
            return Err(Error::parse(
                l,
                format!("diagonal entry ({i}, {j}) must be zero and unlisted"),
            ));
        }
        if i == 0 || j == 0 || i > n || j > n {
            return Err(Error::parse(l, format!("item index out of range 1..={n}")));
        }
        if i > j {
            return Err(Error::parse(l, format!("entry ({i}, {j}) must have i < j")));
        }
        let (i, j) = (i - 1, j - 1);
        if seen[i * n + j] {
            return Err(Error::parse(
                l,
                format!("duplicate entry for pair ({}, {})", i + 1, j + 1),
            ));
        }
        if d == 0 {
            return Err(Error::parse(l, "listed dissimilarities must be nonzero"));
        }
        seen[i * n + j] = true;
        dissim[i * n + j] = d;
        dissim[j * n + i] = d;
    }
    if let Some((l, extra)) = lines.next() {
        return Err(Error::parse(
            l,
            format!("count mismatch: unexpected data `{extra}` after {m} entries"),
        ));
    }

    let inst = Instance::new(weights, capacity, bin_cost, dissim).map_err(|e| match e {
        Error::Input(msg) => Error::parse(2, msg),
        other => other,
    })?;
    Ok(match meta.finish() {
        Some(m) => inst.with_meta(m),
        None => inst,
    })
}

/// Solution file: `objective <v>` then one line of 1-based items per bin.
pub fn write_solution(sol: &Solution) -> String {
    let mut out = format!("objective {}\n", sol.objective);
    for bin in &sol.bins {
        let items: Vec<String> = bin.items().iter().map(|i| (i + 1).to_string()).collect();
        let _ = writeln!(out, "{}", items.join(" "));
    }
    out
}

pub fn read_solution(inst: &Instance, text: &str) -> Result<Solution> {
    let mut objective = None;
    let mut bins = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("objective") {
            objective = Some(parse_num::<i64>(rest.trim(), line_no, "objective")?);
            continue;
        }
        let items = line
            .split_whitespace()
            .map(|t| {
                let i: usize = parse_num(t, line_no, "item index")?;
                if i == 0 {
                    return Err(Error::parse(line_no, "item numbers start at 1"));
                }
                Ok(i - 1)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut sorted = items.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::parse(line_no, format!("item {} repeated in one bin", w[0] + 1)));
        }
        // Out-of-range items are kept so that validation can report them.
        let weight = items.iter().filter(|&&i| i < inst.n()).map(|&i| inst.weight(i)).sum();
        let in_range: Vec<usize> = sorted.iter().copied().filter(|&i| i < inst.n()).collect();
        let cost = if in_range.is_empty() {
            0
        } else {
            pattern_cost_unchecked(inst, &in_range)
        };
        bins.push(Pattern {
            items: sorted,
            weight,
            cost,
        });
    }
    let objective = objective.ok_or_else(|| Error::parse(1, "missing `objective <value>` line"))?;
    Ok(Solution { bins, objective })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_items() -> Instance {
        Instance::from_pairs(vec![1, 1, 1], 3, 5, &[(0, 1, 3), (0, 2, -2)]).unwrap()
    }

    #[test]
    fn pattern_cost_examples() {
        let inst = Instance::from_pairs(vec![1, 1, 1, 1], 4, 7, &[]).unwrap();
        assert_eq!(pattern_cost(&inst, &[2]).unwrap(), 7);

        let inst = three_items();
        assert_eq!(pattern_cost(&inst, &[0, 1, 2]).unwrap(), 6);

        let zero = Instance::from_pairs(vec![1; 5], 5, 0, &[]).unwrap();
        assert_eq!(pattern_cost(&zero, &[0, 3, 4]).unwrap(), 0);
    }

    #[test]
    fn pattern_cost_rejects_bad_items() {
        let inst = three_items();
        assert!(matches!(pattern_cost(&inst, &[0, 3]), Err(Error::Input(_))));
        assert!(pattern_cost(&inst, &[]).is_err());
    }

    #[test]
    fn instance_invariants_enforced() {
        assert!(Instance::new(vec![], 1, 0, vec![]).is_err());
        assert!(Instance::new(vec![0], 1, 0, vec![0]).is_err());
        assert!(Instance::new(vec![30, 30], 20, 0, vec![0; 4]).is_err());
        assert!(Instance::new(vec![1, 1], 2, 0, vec![0, 1, 2, 0]).is_err());
        assert!(Instance::new(vec![1, 1], 2, 0, vec![1, 0, 0, 0]).is_err());
    }

    #[test]
    fn validation_accepts_partition() {
        let inst = Instance::from_pairs(vec![1, 1, 1], 2, 1, &[]).unwrap();
        let sol = Solution::from_bins(&inst, vec![vec![0, 1], vec![2]]).unwrap();
        let rep = validate_solution(&inst, &sol);
        assert!(rep.is_valid(), "{:?}", rep);
        assert_eq!(rep.recomputed_objective, 2);
    }

    #[test]
    fn validation_reports_duplicates_and_missing() {
        let inst = Instance::from_pairs(vec![1, 1, 1], 2, 1, &[]).unwrap();
        let sol = Solution::from_bins(&inst, vec![vec![0], vec![0, 1]]).unwrap();
        let rep = validate_solution(&inst, &sol);
        assert_eq!(rep.duplicated, vec![0]);
        assert_eq!(rep.missing, vec![2]);
        assert!(!rep.is_valid());
    }

    #[test]
    fn validation_reports_capacity() {
        let inst = Instance::from_pairs(vec![30, 30], 50, 1, &[]).unwrap();
        let sol = Solution::from_bins(&inst, vec![vec![0, 1]]).unwrap();
        let rep = validate_solution(&inst, &sol);
        assert_eq!(rep.over_capacity, vec![(0, 60)]);
        assert!(!rep.is_valid());
    }

    #[test]
    fn validation_reports_objective_mismatch() {
        let inst = Instance::from_pairs(vec![1, 1], 2, 1, &[]).unwrap();
        let mut sol = Solution::from_bins(&inst, vec![vec![0], vec![1]]).unwrap();
        sol.objective = 3;
        let rep = validate_solution(&inst, &sol);
        assert!(!rep.objective_matches());
        assert!(!rep.is_valid());
    }

    #[test]
    fn solution_cost_examples() {
        let inst = Instance::from_pairs(vec![1, 1], 2, 4, &[]).unwrap();
        let sol = Solution::from_bins(&inst, vec![vec![0], vec![1]]).unwrap();
        assert_eq!(solution_cost(&inst, &sol).unwrap(), 8);

        let inst = Instance::from_pairs(vec![1, 1], 2, 4, &[(0, 1, -9)]).unwrap();
        let sol = Solution::from_bins(&inst, vec![vec![0, 1]]).unwrap();
        assert_eq!(solution_cost(&inst, &sol).unwrap(), -5);

        let bad = Solution::from_bins(&inst, vec![vec![0]]).unwrap();
        assert!(solution_cost(&inst, &bad).is_err());
    }

    #[test]
    fn read_minimal_file() {
        let inst = read_instance("QBPP 1\n1 10 1\n5\n0\n").unwrap();
        assert_eq!(inst.n(), 1);
        assert_eq!(inst.weights(), &[5]);
        assert_eq!(inst.capacity(), 10);
        assert_eq!(inst.bin_cost(), 1);
        assert!(inst.meta().is_none());
    }

    #[test]
    fn parse_errors_name_lines() {
        let dup = "QBPP 1\n3 10 1\n1 2 3\n2\n1 2 5\n1 2 6\n";
        match read_instance(dup) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("expected parse error, got {other:?}"),
        }
        let diag = "QBPP 1\n2 10 1\n1 2\n1\n2 2 5\n";
        assert!(matches!(read_instance(diag), Err(Error::Parse { line: 5, .. })));
        let reversed = "QBPP 1\n2 10 1\n1 2\n1\n2 1 5\n";
        assert!(matches!(read_instance(reversed), Err(Error::Parse { line: 5, .. })));
        let header = "QBBP 1\n1 10 1\n5\n0\n";
        assert!(matches!(read_instance(header), Err(Error::Parse { line: 1, .. })));
        let count = "QBPP 1\n3 10 1\n1 2\n0\n";
        assert!(matches!(read_instance(count), Err(Error::Parse { line: 3, .. })));
        let short = "QBPP 1\n3 10 1\n1 2 3\n2\n1 2 5\n";
        assert!(matches!(read_instance(short), Err(Error::Parse { .. })));
        let extra = "QBPP 1\n3 10 1\n1 2 3\n1\n1 2 5\n1 3 4\n";
        assert!(matches!(read_instance(extra), Err(Error::Parse { line: 6, .. })));
    }

    #[test]
    fn meta_round_trip() {
        let inst = three_items().with_meta(InstanceMeta {
            mu: 0.6,
            delta: 0.25,
            sigma: SignRegime::Mixed,
            seed: u64::MAX,
            group: 17,
            copy: 3,
            capacity_clamped: true,
        });
        let text = write_instance(&inst);
        assert_eq!(read_instance(&text).unwrap(), inst);
    }

    #[test]
    fn solution_file_round_trip() {
        let inst = three_items();
        let sol = Solution::from_bins(&inst, vec![vec![2, 0], vec![1]]).unwrap();
        let text = write_solution(&sol);
        assert_eq!(text, "objective 8\n1 3\n2\n");
        assert_eq!(read_solution(&inst, &text).unwrap(), sol);
    }
}
