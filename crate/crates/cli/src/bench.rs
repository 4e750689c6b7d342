use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use qbpp::bnp::{gap_percent, solve, SolveParams};

use crate::commands::{load_instance, time_limit};
use crate::record::{instance_id, solver_tag, BenchRecord};
use crate::BenchArgs;

pub const HEADER: [&str; 19] = [
    "schema=1",
    "kind",
    "instance",
    "n",
    "mu",
    "delta",
    "sigma",
    "solver",
    "status",
    "seconds",
    "ub",
    "lb",
    "gap_percent",
    "mean_gap_percent",
    "nodes",
    "cg_iterations",
    "columns",
    "count",
    "optimal",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Config {
    h: usize,
    max_cols: usize,
}

fn parse_config(s: &str) -> Result<Config> {
    let (h, c) = s
        .trim()
        .split_once(['x', 'X'])
        .with_context(|| format!("configuration `{s}` is not of the form HxC"))?;
    let cfg = Config {
        h: h.parse().with_context(|| format!("bad slot count in `{s}`"))?,
        max_cols: c.parse().with_context(|| format!("bad column count in `{s}`"))?,
    };
    if cfg.h == 0 || cfg.max_cols == 0 {
        bail!("configuration `{s}` must use positive values");
    }
    Ok(cfg)
}

fn thread_count(flag: Option<usize>) -> usize {
    flag.or_else(|| std::env::var("QBPP_THREADS").ok()?.parse().ok())
        .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()))
        .unwrap_or(1)
        .max(1)
}

fn instance_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "qbpp"))
        .collect();
    files.sort();
    Ok(files)
}

enum Outcome {
    Done(BenchRecord),
    Failed {
        instance: String,
        solver: String,
        message: String,
    },
}

fn run_one(path: &Path, cfg: Config, limit: f64) -> Outcome {
    let solver = solver_tag(cfg.h, cfg.max_cols);
    let result = (|| -> Result<BenchRecord> {
        let inst = load_instance(path)?;
        let params = SolveParams {
            h: cfg.h,
            max_cols: cfg.max_cols,
            time_limit: Some(time_limit(limit)?),
            ..SolveParams::default()
        };
        let r = solve(&inst, &params)?;
        Ok(BenchRecord::from_result(instance_id(path), &inst, solver.clone(), 0, r))
    })();
    match result {
        Ok(rec) => Outcome::Done(rec),
        Err(e) => Outcome::Failed {
            instance: instance_id(path),
            solver,
            message: format!("{e:#}"),
        },
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn gap_text(g: f64) -> String {
    if g.is_infinite() {
        "inf".into()
    } else {
        g.to_string()
    }
}

#[derive(Default)]
struct Group {
    count: usize,
    optimal: usize,
    seconds: f64,
    ub: f64,
    lb: f64,
    gaps: f64,
    nodes: usize,
    cg: usize,
    columns: usize,
}

pub fn run(a: &BenchArgs) -> Result<u8> {
    let configs = a.configs.iter().map(|s| parse_config(s)).collect::<Result<Vec<_>>>()?;
    let files = instance_files(&a.dir)?;
    time_limit(a.time_limit)?;
    let jobs: Vec<(usize, usize)> = (0..files.len())
        .flat_map(|f| (0..configs.len()).map(move |c| (f, c)))
        .collect();
    let slots: Mutex<Vec<Option<Outcome>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..thread_count(a.threads).min(jobs.len().max(1)) {
            s.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(f, c)) = jobs.get(j) else { break };
                let out = run_one(&files[f], configs[c], a.time_limit);
                slots.lock().expect("result lock")[j] = Some(out);
            });
        }
    });
    let outcomes: Vec<Outcome> = slots
        .into_inner()
        .expect("result lock")
        .into_iter()
        .map(|o| o.expect("every job ran"))
        .collect();

    let sink: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(HEADER)?;
    // (n, sigma, mu, solver) -> aggregate; floats keyed by their bits.
    let mut groups: BTreeMap<(usize, String, u64, String), Group> = BTreeMap::new();
    let mut failures = 0;
    for out in &outcomes {
        match out {
            Outcome::Done(r) => {
                let gap = r.gap_percent.unwrap_or(f64::INFINITY);
                w.write_record([
                    "1".to_string(),
                    "run".into(),
                    r.instance.clone(),
                    r.n.to_string(),
                    opt(r.mu),
                    opt(r.delta),
                    opt(r.sigma.clone()),
                    r.solver.clone(),
                    r.status.clone(),
                    format!("{:.3}", r.seconds),
                    opt(r.objective),
                    opt(r.bound),
                    gap_text(gap),
                    gap_text(gap),
                    r.nodes.to_string(),
                    r.cg_iterations.to_string(),
                    r.columns.to_string(),
                    "1".into(),
                    ((r.status == "optimal") as u8).to_string(),
                ])?;
                let key = (
                    r.n,
                    r.sigma.clone().unwrap_or_default(),
                    r.mu.unwrap_or(f64::NAN).to_bits(),
                    r.solver.clone(),
                );
                let g = groups.entry(key).or_default();
                g.count += 1;
                g.optimal += (r.status == "optimal") as usize;
                g.seconds += r.seconds;
                g.ub += r.objective.unwrap_or_default() as f64;
                g.lb += r.bound.unwrap_or_default();
                g.gaps += gap;
                g.nodes += r.nodes;
                g.cg += r.cg_iterations;
                g.columns += r.columns;
            }
            Outcome::Failed {
                instance,
                solver,
                message,
            } => {
                failures += 1;
                eprintln!("{instance} [{solver}]: {message}");
                let mut row = vec![String::new(); HEADER.len()];
                row[0] = "1".into();
                row[1] = "run".into();
                row[2] = instance.clone();
                row[7] = solver.clone();
                row[8] = "error".into();
                row[17] = "1".into();
                row[18] = "0".into();
                w.write_record(&row)?;
            }
        }
    }
    for ((n, sigma, mu_bits, solver), g) in &groups {
        let k = g.count as f64;
        let (ub, lb) = (g.ub / k, g.lb / k);
        let gap = if ub == 0.0 {
            gap_percent(0, lb)
        } else {
            100.0 * (ub - lb) / ub.abs()
        };
        let mu = f64::from_bits(*mu_bits);
        w.write_record([
            "1".to_string(),
            "agg".into(),
            String::new(),
            n.to_string(),
            if mu.is_nan() { String::new() } else { mu.to_string() },
            String::new(),
            sigma.clone(),
            solver.clone(),
            String::new(),
            format!("{:.3}", g.seconds / k),
            ub.to_string(),
            lb.to_string(),
            gap_text(gap),
            gap_text(g.gaps / k),
            (g.nodes as f64 / k).to_string(),
            (g.cg as f64 / k).to_string(),
            (g.columns as f64 / k).to_string(),
            g.count.to_string(),
            g.optimal.to_string(),
        ])?;
    }
    w.flush()?;
    if failures > 0 {
        eprintln!("{failures} run(s) failed");
    }
    Ok(0)
}
