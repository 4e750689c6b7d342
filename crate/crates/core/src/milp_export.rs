//! Compact MILP formulations, emitted as LP-format text.
//!
//! Every coefficient of these models is an integer, so the IR stores `i64`
//! and [`evaluate_assignment`] computes objectives exactly.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::problem::Instance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FormulationTag {
    Qp,
    Fgw,
    FgwSb,
    Efgw,
    TwoA,
    TwoASb,
    E2a,
    R,
    Er,
}

impl FormulationTag {
    pub const ALL: [FormulationTag; 9] = [
        FormulationTag::Qp,
        FormulationTag::Fgw,
        FormulationTag::FgwSb,
        FormulationTag::Efgw,
        FormulationTag::TwoA,
        FormulationTag::TwoASb,
        FormulationTag::E2a,
        FormulationTag::R,
        FormulationTag::Er,
    ];

    /// The tags with a linear objective.
    pub const LINEAR: [FormulationTag; 8] = [
        FormulationTag::Fgw,
        FormulationTag::FgwSb,
        FormulationTag::Efgw,
        FormulationTag::TwoA,
        FormulationTag::TwoASb,
        FormulationTag::E2a,
        FormulationTag::R,
        FormulationTag::Er,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FormulationTag::Qp => "QP",
            FormulationTag::Fgw => "FGW",
            FormulationTag::FgwSb => "FGW_SB",
            FormulationTag::Efgw => "EFGW",
            FormulationTag::TwoA => "2A",
            FormulationTag::TwoASb => "2A_SB",
            FormulationTag::E2a => "E2A",
            FormulationTag::R => "R",
            FormulationTag::Er => "ER",
        }
    }

    /// Bins are identified by their smallest item (`y_k` replaced by `x_k_k`).
    pub fn symmetry_broken(self) -> bool {
        matches!(
            self,
            FormulationTag::FgwSb | FormulationTag::Efgw | FormulationTag::TwoASb | FormulationTag::E2a
        )
    }
}

impl fmt::Display for FormulationTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FormulationTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_uppercase().replace('-', "_");
        Ok(match t.as_str() {
            "QP" => FormulationTag::Qp,
            "FGW" => FormulationTag::Fgw,
            "FGW_SB" => FormulationTag::FgwSb,
            "EFGW" => FormulationTag::Efgw,
            "2A" | "TWOA" => FormulationTag::TwoA,
            "2A_SB" | "TWOA_SB" => FormulationTag::TwoASb,
            "E2A" => FormulationTag::E2a,
            "R" => FormulationTag::R,
            "ER" => FormulationTag::Er,
            _ => return Err(Error::input(format!("unknown formulation tag `{s}`"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

/// What a variable stands for, used to derive its value from an assignment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarRole {
    /// Item `i` in bin `k`.
    Assign { i: usize, k: usize },
    /// Bin `k` is used.
    Used { k: usize },
    /// Items `i < j` both in bin `k`.
    PairInBin { i: usize, j: usize, k: usize },
    /// Items `i < j` share a bin.
    Together { i: usize, j: usize },
    /// Item `j` is the smallest item of its bin.
    Representative { j: usize },
    /// Item `j` shares a bin whose smallest item is `i < j`.
    RepresentedBy { i: usize, j: usize },
}

#[derive(Clone, Debug)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    /// Lower bound is always zero.
    pub upper: Option<i64>,
    pub role: VarRole,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn as_str(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }

    fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Sense::Le => lhs <= rhs,
            Sense::Ge => lhs >= rhs,
            Sense::Eq => lhs == rhs,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub name: String,
    pub family: &'static str,
    pub terms: Vec<(usize, i64)>,
    pub sense: Sense,
    pub rhs: i64,
}

#[derive(Clone, Debug)]
pub struct ModelIR {
    tag: FormulationTag,
    variables: Vec<Variable>,
    index: HashMap<String, usize>,
    objective: Vec<(usize, i64)>,
    /// `(a, b, c)` contributes `c · v_a · v_b` to the objective.
    quadratic: Vec<(usize, usize, i64)>,
    constraints: Vec<Constraint>,
}

impl ModelIR {
    fn new(tag: FormulationTag) -> Self {
        ModelIR {
            tag,
            variables: Vec::new(),
            index: HashMap::new(),
            objective: Vec::new(),
            quadratic: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn tag(&self) -> FormulationTag {
        self.tag
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(usize, i64)] {
        &self.objective
    }

    pub fn quadratic(&self) -> &[(usize, usize, i64)] {
        &self.quadratic
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn count_family(&self, family: &str) -> usize {
        self.constraints.iter().filter(|c| c.family == family).count()
    }

    fn add_var(&mut self, name: String, kind: VarKind, upper: Option<i64>, role: VarRole) -> usize {
        let id = self.variables.len();
        let prev = self.index.insert(name.clone(), id);
        debug_assert!(prev.is_none(), "duplicate variable {name}");
        self.variables.push(Variable {
            name,
            kind,
            upper,
            role,
        });
        id
    }

    fn add_row(
        &mut self,
        family: &'static str,
        name: String,
        terms: Vec<(usize, i64)>,
        sense: Sense,
        rhs: i64,
    ) -> Result<()> {
        let mut merged: Vec<(usize, i64)> = Vec::with_capacity(terms.len());
        for (v, c) in terms {
            match merged.iter_mut().find(|(u, _)| *u == v) {
                Some(t) => t.1 += c,
                None => merged.push((v, c)),
            }
        }
        merged.retain(|&(_, c)| c != 0);
        if merged.is_empty() {
            if sense.holds(0, rhs) {
                return Ok(());
            }
            return Err(Error::Internal(format!(
                "row {name} reduces to 0 {} {rhs}",
                sense.as_str()
            )));
        }
        self.constraints.push(Constraint {
            name,
            family,
            terms: merged,
            sense,
            rhs,
        });
        Ok(())
    }
}

// 1-based names.
fn x_name(i: usize, k: usize) -> String {
    format!("x_{}_{}", i + 1, k + 1)
}

struct Vars {
    n: usize,
    /// `x[i * n + k]`
    x: Vec<usize>,
    y: Vec<usize>,
    /// Unordered-pair variables keyed by `(min, max)` (plus the bin where relevant).
    pair_bin: HashMap<(usize, usize, usize), usize>,
    together: HashMap<(usize, usize), usize>,
    rep: Vec<usize>,
    rep_by: HashMap<(usize, usize), usize>,
}

impl Vars {
    fn new(n: usize) -> Self {
        Vars {
            n,
            x: Vec::new(),
            y: Vec::new(),
            pair_bin: HashMap::new(),
            together: HashMap::new(),
            rep: Vec::new(),
            rep_by: HashMap::new(),
        }
    }

    fn x(&self, i: usize, k: usize) -> usize {
        self.x[i * self.n + k]
    }

    /// `x̃_ij^k` for `i ≠ j`; the diagonal `x̃_kk^k` is `x_k^k` itself.
    fn pair(&self, i: usize, j: usize, k: usize) -> usize {
        if i == j {
            return self.x(i, k);
        }
        self.pair_bin[&(i.min(j), i.max(j), k)]
    }

    fn z(&self, i: usize, j: usize) -> usize {
        self.together[&(i.min(j), i.max(j))]
    }
}

fn add_assignment_vars(m: &mut ModelIR, v: &mut Vars, with_y: bool) {
    let n = v.n;
    for i in 0..n {
        for k in 0..n {
            let id = m.add_var(x_name(i, k), VarKind::Binary, Some(1), VarRole::Assign { i, k });
            v.x.push(id);
        }
    }
    if with_y {
        for k in 0..n {
            let id = m.add_var(format!("y_{}", k + 1), VarKind::Binary, Some(1), VarRole::Used { k });
            v.y.push(id);
        }
    }
}

/// Partition rows, capacity rows and the bin-opening part of the objective.
/// With symmetry breaking, `x_k_k` plays the role of `y_k`.
fn add_assignment_core(inst: &Instance, m: &mut ModelIR, v: &Vars, sb: bool) -> Result<()> {
    let n = inst.n();
    for k in 0..n {
        let open = if sb { v.x(k, k) } else { v.y[k] };
        m.objective.push((open, inst.bin_cost()));
    }
    for i in 0..n {
        let terms = (0..n).map(|k| (v.x(i, k), 1)).collect();
        m.add_row("partition", format!("part_{}", i + 1), terms, Sense::Eq, 1)?;
    }
    for k in 0..n {
        let open = if sb { v.x(k, k) } else { v.y[k] };
        let mut terms: Vec<(usize, i64)> = (0..n).map(|i| (v.x(i, k), inst.weight(i))).collect();
        terms.push((open, -inst.capacity()));
        m.add_row("capacity", format!("cap_{}", k + 1), terms, Sense::Le, 0)?;
    }
    if sb {
        for k in 0..n {
            for i in 0..k {
                m.add_row(
                    "symmetry_fix",
                    format!("sbf_{}_{}", i + 1, k + 1),
                    vec![(v.x(i, k), 1)],
                    Sense::Eq,
                    0,
                )?;
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                m.add_row(
                    "symmetry_order",
                    format!("sbo_{}_{}", i + 1, j + 1),
                    vec![(v.x(j, i), 1), (v.x(i, i), -1)],
                    Sense::Le,
                    0,
                )?;
            }
        }
    }
    Ok(())
}

fn pairs(inst: &Instance) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
    let n = inst.n();
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j, inst.d(i, j))))
}

fn build_qp(inst: &Instance, m: &mut ModelIR) -> Result<()> {
    let mut v = Vars::new(inst.n());
    add_assignment_vars(m, &mut v, true);
    add_assignment_core(inst, m, &v, false)?;
    for k in 0..inst.n() {
        for (i, j, d) in pairs(inst) {
            if d != 0 {
                m.quadratic.push((v.x(i, k), v.x(j, k), d));
            }
        }
    }
    Ok(())
}

fn build_fgw(inst: &Instance, m: &mut ModelIR, sb: bool) -> Result<()> {
    let n = inst.n();
    let mut v = Vars::new(n);
    add_assignment_vars(m, &mut v, !sb);
    add_assignment_core(inst, m, &v, sb)?;
    for k in 0..n {
        for (i, j, d) in pairs(inst) {
            if d == 0 {
                continue;
            }
            let name = format!("xh_{}_{}_{}", i + 1, j + 1, k + 1);
            let h = m.add_var(name, VarKind::Continuous, None, VarRole::PairInBin { i, j, k });
            m.objective.push((h, d));
            let tag = format!("{}_{}_{}", i + 1, j + 1, k + 1);
            if d < 0 {
                m.add_row(
                    "link_upper",
                    format!("lu1_{tag}"),
                    vec![(h, 1), (v.x(i, k), -1)],
                    Sense::Le,
                    0,
                )?;
                m.add_row(
                    "link_upper",
                    format!("lu2_{tag}"),
                    vec![(h, 1), (v.x(j, k), -1)],
                    Sense::Le,
                    0,
                )?;
            } else {
                m.add_row(
                    "link_lower",
                    format!("ll_{tag}"),
                    vec![(v.x(i, k), 1), (v.x(j, k), 1), (h, -1)],
                    Sense::Le,
                    1,
                )?;
            }
        }
    }
    Ok(())
}

fn build_efgw(inst: &Instance, m: &mut ModelIR) -> Result<()> {
    let n = inst.n();
    let (w, cap) = (|i: usize| inst.weight(i), inst.capacity());
    let mut v = Vars::new(n);
    add_assignment_vars(m, &mut v, false);
    for k in 0..n {
        for (i, j, d) in pairs(inst) {
            let kind = if d == 0 { VarKind::Binary } else { VarKind::Continuous };
            let upper = (d == 0).then_some(1);
            let name = format!("xt_{}_{}_{}", i + 1, j + 1, k + 1);
            let id = m.add_var(name, kind, upper, VarRole::PairInBin { i, j, k });
            v.pair_bin.insert((i, j, k), id);
        }
    }
    add_assignment_core(inst, m, &v, true)?;
    for k in 0..n {
        for (i, j, d) in pairs(inst) {
            if d != 0 {
                m.objective.push((v.pair(i, j, k), d));
            }
        }
    }
    for j in 0..n {
        for k in 0..n {
            let tag = format!("{}_{}", j + 1, k + 1);
            let mut t1: Vec<(usize, i64)> = (0..n).filter(|&i| i != j).map(|i| (v.pair(i, j, k), w(i))).collect();
            t1.push((v.pair(k, j, k), -cap));
            t1.push((v.x(j, k), w(j)));
            m.add_row("rlt_capacity", format!("rlt1_{tag}"), t1, Sense::Le, 0)?;

            let mut t2: Vec<(usize, i64)> = Vec::new();
            for i in (0..n).filter(|&i| i != j) {
                t2.push((v.x(i, k), w(i)));
                t2.push((v.pair(i, j, k), -w(i)));
            }
            t2.push((v.x(k, k), -cap));
            t2.push((v.pair(k, j, k), cap));
            m.add_row("rlt_complement", format!("rlt2_{tag}"), t2, Sense::Le, 0)?;
        }
    }
    for k in 0..n {
        for (i, j, d) in pairs(inst) {
            let t = v.pair(i, j, k);
            let tag = format!("{}_{}_{}", i + 1, j + 1, k + 1);
            if d < 0 {
                m.add_row(
                    "link_upper",
                    format!("lu1_{tag}"),
                    vec![(t, 1), (v.x(i, k), -1)],
                    Sense::Le,
                    0,
                )?;
                m.add_row(
                    "link_upper",
                    format!("lu2_{tag}"),
                    vec![(t, 1), (v.x(j, k), -1)],
                    Sense::Le,
                    0,
                )?;
            } else if d > 0 {
                m.add_row(
                    "link_lower",
                    format!("ll_{tag}"),
                    vec![(v.x(i, k), 1), (v.x(j, k), 1), (t, -1)],
                    Sense::Le,
                    1,
                )?;
            }
        }
    }
    Ok(())
}

fn add_together_vars(inst: &Instance, m: &mut ModelIR, v: &mut Vars, keep_zero: bool, binary: bool) {
    for (i, j, d) in pairs(inst) {
        if d == 0 && !keep_zero {
            continue;
        }
        let (kind, upper) = if binary || d == 0 {
            (VarKind::Binary, Some(1))
        } else {
            (VarKind::Continuous, None)
        };
        let id = m.add_var(
            format!("z_{}_{}", i + 1, j + 1),
            kind,
            upper,
            VarRole::Together { i, j },
        );
        v.together.insert((i, j), id);
        if d != 0 {
            m.objective.push((id, d));
        }
    }
}

fn add_two_index_links(inst: &Instance, m: &mut ModelIR, v: &Vars) -> Result<()> {
    for k in 0..inst.n() {
        for (i, j, d) in pairs(inst) {
            if d == 0 {
                continue;
            }
            let z = v.z(i, j);
            let (xi, xj) = (v.x(i, k), v.x(j, k));
            let tag = format!("{}_{}_{}", i + 1, j + 1, k + 1);
            if d < 0 {
                m.add_row(
                    "link_upper",
                    format!("za_{tag}"),
                    vec![(z, 1), (xi, 1), (xj, -1)],
                    Sense::Le,
                    1,
                )?;
                m.add_row(
                    "link_upper",
                    format!("zb_{tag}"),
                    vec![(z, 1), (xi, -1), (xj, 1)],
                    Sense::Le,
                    1,
                )?;
            } else {
                m.add_row(
                    "link_lower",
                    format!("zc_{tag}"),
                    vec![(z, -1), (xi, 1), (xj, 1)],
                    Sense::Le,
                    1,
                )?;
            }
        }
    }
    Ok(())
}

fn build_two_index(inst: &Instance, m: &mut ModelIR, sb: bool) -> Result<()> {
    let mut v = Vars::new(inst.n());
    add_assignment_vars(m, &mut v, !sb);
    add_together_vars(inst, m, &mut v, false, false);
    add_assignment_core(inst, m, &v, sb)?;
    add_two_index_links(inst, m, &v)
}

fn build_e2a(inst: &Instance, m: &mut ModelIR) -> Result<()> {
    let n = inst.n();
    let (w, cap) = (|i: usize| inst.weight(i), inst.capacity());
    let mut v = Vars::new(n);
    add_assignment_vars(m, &mut v, false);
    add_together_vars(inst, m, &mut v, true, false);
    for (i, j, d) in pairs(inst) {
        for k in [i, j] {
            let kind = if d == 0 { VarKind::Binary } else { VarKind::Continuous };
            let name = format!("xt_{}_{}_{}", i + 1, j + 1, k + 1);
            let id = m.add_var(name, kind, (d == 0).then_some(1), VarRole::PairInBin { i, j, k });
            v.pair_bin.insert((i, j, k), id);
        }
    }
    add_assignment_core(inst, m, &v, true)?;
    for j in 0..n {
        let others = || (0..n).filter(move |&i| i != j);
        let mut t1: Vec<(usize, i64)> = others().map(|i| (v.z(i, j), w(i))).collect();
        t1.extend((0..n).map(|k| (v.pair(k, j, k), -cap)));
        m.add_row("aggr_capacity", format!("ag1_{}", j + 1), t1, Sense::Le, -w(j))?;

        let mut t2: Vec<(usize, i64)> = others().map(|i| (v.z(i, j), -w(i))).collect();
        for k in 0..n {
            t2.push((v.x(k, k), -cap));
            t2.push((v.pair(k, j, k), cap));
        }
        let rest: i64 = others().map(w).sum();
        m.add_row("aggr_complement", format!("ag2_{}", j + 1), t2, Sense::Le, -rest)?;
    }
    add_two_index_links(inst, m, &v)?;
    for k in 0..n {
        for j in (0..n).filter(|&j| j != k) {
            let d = inst.d(k, j);
            let t = v.pair(k, j, k);
            let tag = format!("{}_{}", k + 1, j + 1);
            if d < 0 {
                m.add_row(
                    "rlt_link_upper",
                    format!("tu_{tag}"),
                    vec![(t, 1), (v.x(k, k), -1)],
                    Sense::Le,
                    0,
                )?;
            } else if d > 0 {
                m.add_row(
                    "rlt_link_lower",
                    format!("tl_{tag}"),
                    vec![(v.x(k, k), 1), (v.x(j, k), 1), (t, -1)],
                    Sense::Le,
                    1,
                )?;
            }
        }
    }
    Ok(())
}

fn build_representative(inst: &Instance, m: &mut ModelIR, extended: bool) -> Result<()> {
    let n = inst.n();
    let mut v = Vars::new(n);
    for j in 0..n {
        let id = m.add_var(
            format!("r_{}", j + 1),
            VarKind::Binary,
            Some(1),
            VarRole::Representative { j },
        );
        v.rep.push(id);
        m.objective.push((id, inst.bin_cost()));
    }
    add_together_vars(inst, m, &mut v, true, true);
    for i in 0..n {
        let terms = (i + 1..n).map(|j| (v.z(i, j), inst.weight(j))).collect();
        m.add_row(
            "rep_capacity",
            format!("rcap_{}", i + 1),
            terms,
            Sense::Le,
            inst.capacity() - inst.weight(i),
        )?;
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (ij, ik, jk) = (v.z(i, j), v.z(i, k), v.z(j, k));
                let tag = format!("{}_{}_{}", i + 1, j + 1, k + 1);
                m.add_row(
                    "triangle",
                    format!("tri1_{tag}"),
                    vec![(ij, 1), (ik, 1), (jk, -1)],
                    Sense::Le,
                    1,
                )?;
                m.add_row(
                    "triangle",
                    format!("tri2_{tag}"),
                    vec![(ij, 1), (jk, 1), (ik, -1)],
                    Sense::Le,
                    1,
                )?;
                m.add_row(
                    "triangle",
                    format!("tri3_{tag}"),
                    vec![(ik, 1), (jk, 1), (ij, -1)],
                    Sense::Le,
                    1,
                )?;
            }
        }
    }
    for (i, j, _) in pairs(inst) {
        m.add_row(
            "rep_upper",
            format!("rle_{}_{}", i + 1, j + 1),
            vec![(v.rep[j], 1), (v.z(i, j), 1)],
            Sense::Le,
            1,
        )?;
    }
    for j in 0..n {
        let mut terms = vec![(v.rep[j], 1)];
        terms.extend((0..j).map(|i| (v.z(i, j), 1)));
        m.add_row("rep_lower", format!("rge_{}", j + 1), terms, Sense::Ge, 1)?;
    }
    if !extended {
        return Ok(());
    }
    for (i, j, _) in pairs(inst) {
        let id = m.add_var(
            format!("zh_{}_{}", i + 1, j + 1),
            VarKind::Continuous,
            Some(1),
            VarRole::RepresentedBy { i, j },
        );
        v.rep_by.insert((i, j), id);
    }
    for j in 0..n {
        let mut terms = vec![(v.rep[j], 1)];
        terms.extend((0..j).map(|i| (v.rep_by[&(i, j)], 1)));
        m.add_row("rep_sum", format!("rsum_{}", j + 1), terms, Sense::Eq, 1)?;
    }
    for (i, j, _) in pairs(inst) {
        let zh = v.rep_by[&(i, j)];
        let tag = format!("{}_{}", i + 1, j + 1);
        m.add_row(
            "rep_link",
            format!("zh1_{tag}"),
            vec![(zh, 1), (v.rep[i], -1)],
            Sense::Le,
            0,
        )?;
        m.add_row(
            "rep_link",
            format!("zh2_{tag}"),
            vec![(zh, 1), (v.z(i, j), -1)],
            Sense::Le,
            0,
        )?;
        m.add_row(
            "rep_link",
            format!("zh3_{tag}"),
            vec![(v.rep[i], 1), (v.z(i, j), 1), (zh, -1)],
            Sense::Le,
            1,
        )?;
    }
    Ok(())
}

pub fn build_model(inst: &Instance, tag: FormulationTag) -> Result<ModelIR> {
    let mut m = ModelIR::new(tag);
    match tag {
        FormulationTag::Qp => build_qp(inst, &mut m)?,
        FormulationTag::Fgw => build_fgw(inst, &mut m, false)?,
        FormulationTag::FgwSb => build_fgw(inst, &mut m, true)?,
        FormulationTag::Efgw => build_efgw(inst, &mut m)?,
        FormulationTag::TwoA => build_two_index(inst, &mut m, false)?,
        FormulationTag::TwoASb => build_two_index(inst, &mut m, true)?,
        FormulationTag::E2a => build_e2a(inst, &mut m)?,
        FormulationTag::R => build_representative(inst, &mut m, false)?,
        FormulationTag::Er => build_representative(inst, &mut m, true)?,
    }
    Ok(m)
}

/// Sort key that orders `x_2_1` before `x_10_1`.
fn name_key(name: &str) -> (String, Vec<u64>) {
    let mut parts = name.split('_');
    let head = parts.next().unwrap_or_default().to_string();
    (head, parts.map(|p| p.parse().unwrap_or(u64::MAX)).collect())
}

const WRAP_AT: usize = 200;

fn push_terms(out: &mut String, line: &mut String, terms: impl IntoIterator<Item = String>) {
    for t in terms {
        if line.len() + t.len() + 1 > WRAP_AT {
            out.push_str(line);
            out.push('\n');
            line.clear();
            line.push_str("   ");
        }
        line.push(' ');
        line.push_str(&t);
    }
}

fn term(first: bool, coef: i64, name: &str) -> String {
    let sign = if coef < 0 {
        "-"
    } else if first {
        ""
    } else {
        "+"
    };
    let mag = coef.unsigned_abs();
    let body = if mag == 1 {
        name.to_string()
    } else {
        format!("{mag} {name}")
    };
    if sign.is_empty() {
        body
    } else {
        format!("{sign} {body}")
    }
}

/// LP-format text of the model. Objective terms, bounds and the binary
/// section are ordered by variable name; rows keep insertion order.
pub fn write_lp_file(model: &ModelIR) -> Result<String> {
    if !model.quadratic.is_empty() && model.tag != FormulationTag::Qp {
        return Err(Error::Internal(format!(
            "quadratic objective terms in a {} model",
            model.tag
        )));
    }
    let vars = &model.variables;
    let mut by_name: Vec<usize> = (0..vars.len()).collect();
    by_name.sort_by_cached_key(|&v| name_key(&vars[v].name));

    let mut out = String::from("Minimize\n");
    let mut line = String::from(" obj:");
    let mut coef = vec![0i64; vars.len()];
    for &(v, c) in &model.objective {
        coef[v] += c;
    }
    let mut obj_terms: Vec<String> = Vec::new();
    for &v in &by_name {
        if coef[v] != 0 {
            obj_terms.push(term(obj_terms.is_empty(), coef[v], &vars[v].name));
        }
    }
    if obj_terms.is_empty() && model.quadratic.is_empty() {
        if let Some(&v) = by_name.first() {
            obj_terms.push(format!("0 {}", vars[v].name));
        }
    }
    push_terms(&mut out, &mut line, obj_terms);
    if !model.quadratic.is_empty() {
        let mut q: Vec<(usize, usize, i64)> = model.quadratic.clone();
        q.sort_by_cached_key(|&(a, b, _)| (name_key(&vars[a].name), name_key(&vars[b].name)));
        let mut qt = vec!["+ [".to_string()];
        for (n, &(a, b, c)) in q.iter().enumerate() {
            let prod = format!("{} * {}", vars[a].name, vars[b].name);
            qt.push(term(n == 0, 2 * c, &prod));
        }
        qt.push("] / 2".to_string());
        push_terms(&mut out, &mut line, qt);
    }
    out.push_str(&line);
    out.push_str("\nSubject To\n");
    for c in &model.constraints {
        line.clear();
        let _ = write!(line, " {}:", c.name);
        let terms = c
            .terms
            .iter()
            .enumerate()
            .map(|(n, &(v, k))| term(n == 0, k, &vars[v].name))
            .chain(std::iter::once(format!("{} {}", c.sense.as_str(), c.rhs)));
        push_terms(&mut out, &mut line, terms);
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str("Bounds\n");
    for &v in &by_name {
        let var = &vars[v];
        if let (VarKind::Continuous, Some(u)) = (var.kind, var.upper) {
            let _ = writeln!(out, " 0 <= {} <= {u}", var.name);
        }
    }
    let binaries: Vec<String> = by_name
        .iter()
        .filter(|&&v| vars[v].kind == VarKind::Binary)
        .map(|&v| vars[v].name.clone())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binary\n");
        line.clear();
        push_terms(&mut out, &mut line, binaries);
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str("End\n");
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    /// Objective of the model at the induced variable values.
    pub objective: i64,
    /// Violated rows per constraint family; empty when feasible.
    pub violations: BTreeMap<&'static str, usize>,
}

impl Evaluation {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn family_ok(&self, family: &str) -> bool {
        !self.violations.contains_key(family)
    }
}

/// Bin of each item renumbered to the smallest item it shares a bin with.
pub fn canonical_bins(assignment: &[usize]) -> Vec<usize> {
    let mut first: HashMap<usize, usize> = HashMap::new();
    assignment
        .iter()
        .enumerate()
        .map(|(i, &b)| *first.entry(b).or_insert(i))
        .collect()
}

/// Checks the model at the values induced by an item-to-bin map (0-based
/// bins below `n`). Symmetry-broken tags see the canonical renumbering.
pub fn evaluate_assignment(model: &ModelIR, assignment: &[usize]) -> Evaluation {
    let n = assignment.len();
    let bins: Vec<usize> = if model.tag.symmetry_broken() {
        canonical_bins(assignment)
    } else {
        assignment.to_vec()
    };
    let canon = canonical_bins(assignment);
    let is_rep = |j: usize| canon[j] == j;
    let mut used = vec![false; n.max(bins.iter().map(|b| b + 1).max().unwrap_or(0))];
    for &b in &bins {
        used[b] = true;
    }
    let values: Vec<i64> = model
        .variables
        .iter()
        .map(|v| {
            let on = match v.role {
                VarRole::Assign { i, k } => bins[i] == k,
                VarRole::Used { k } => used.get(k).copied().unwrap_or(false),
                VarRole::PairInBin { i, j, k } => bins[i] == k && bins[j] == k,
                VarRole::Together { i, j } => bins[i] == bins[j],
                VarRole::Representative { j } => is_rep(j),
                VarRole::RepresentedBy { i, j } => is_rep(i) && canon[j] == i,
            };
            on as i64
        })
        .collect();
    let mut violations = BTreeMap::new();
    for (v, var) in model.variables.iter().enumerate() {
        if var.upper.is_some_and(|u| values[v] > u) {
            *violations.entry("bounds").or_insert(0) += 1;
        }
    }
    for c in &model.constraints {
        let lhs: i64 = c.terms.iter().map(|&(v, k)| k * values[v]).sum();
        if !c.sense.holds(lhs, c.rhs) {
            *violations.entry(c.family).or_insert(0) += 1;
        }
    }
    let objective = model.objective.iter().map(|&(v, c)| c * values[v]).sum::<i64>()
        + model
            .quadratic
            .iter()
            .map(|&(a, b, c)| c * values[a] * values[b])
            .sum::<i64>();
    Evaluation { objective, violations }
}
