use std::path::Path;

use qbpp::bnp::{SolveResult, TraceEvent};
use qbpp::Instance;
use serde::Serialize;

/// One solver run, as printed by `solve` and tabulated by `bench`.
#[derive(Clone, Debug, Serialize)]
pub struct BenchRecord {
    pub instance: String,
    pub n: usize,
    pub mu: Option<f64>,
    pub delta: Option<f64>,
    pub sigma: Option<String>,
    pub solver: String,
    pub status: String,
    pub seconds: f64,
    pub objective: Option<i64>,
    pub bound: Option<f64>,
    /// `null` when the gap is infinite.
    pub gap_percent: Option<f64>,
    pub nodes: usize,
    pub cg_iterations: usize,
    pub columns: usize,
    pub exact_pricing_calls: usize,
    pub root_lower_bound: Option<f64>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceEvent>,
}

pub fn solver_tag(h: usize, max_cols: usize) -> String {
    format!("bp{h}x{max_cols}")
}

pub fn instance_id(path: &Path) -> String {
    path.file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default()
}

impl BenchRecord {
    pub fn from_result(id: String, inst: &Instance, solver: String, seed: u64, r: SolveResult) -> Self {
        let meta = inst.meta();
        BenchRecord {
            instance: id,
            n: inst.n(),
            mu: meta.map(|m| m.mu),
            delta: meta.map(|m| m.delta),
            sigma: meta.map(|m| m.sigma.to_string()),
            solver,
            status: r.status.as_str().to_string(),
            seconds: r.stats.seconds,
            objective: Some(r.upper_bound),
            bound: Some(r.lower_bound),
            gap_percent: r.gap_percent.is_finite().then_some(r.gap_percent),
            nodes: r.stats.nodes,
            cg_iterations: r.stats.cg_iterations,
            columns: r.stats.columns,
            exact_pricing_calls: r.stats.exact_pricing_calls,
            root_lower_bound: r.stats.root_lower_bound,
            seed,
            trace: r.trace,
        }
    }
}
