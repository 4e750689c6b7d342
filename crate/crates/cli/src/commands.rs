use std::fs;
use std::path::Path;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use qbpp::bnp::{solve as bnp_solve, SolveParams, SolveStatus};
use qbpp::generator::{
    generate_benchmark, generate_group, instance_file_name, BenchmarkPlan, GeneratorConfig, BENCHMARK_MUS,
};
use qbpp::milp_export::{build_model, write_lp_file, FormulationTag};
use qbpp::oracle::solve_exact;
use qbpp::pricing::{bb_solve, enumerate_solve, mch_solve, read_pricing_problem, BbLimits};
use qbpp::{read_instance, read_solution, validate_solution, write_instance, write_solution, Instance, SignRegime};
use serde_json::json;

use crate::record::{instance_id, solver_tag, BenchRecord};
use crate::{ExportArgs, GenerateArgs, OracleArgs, PricingArgs, SolveArgs, ValidateArgs};

pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    read_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn time_limit(seconds: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(seconds).map_err(|_| anyhow::anyhow!("invalid time limit {seconds}"))
}

pub fn generate(a: &GenerateArgs) -> Result<u8> {
    let plan = BenchmarkPlan::full(a.seed);
    if a.full {
        let plan = if a.n.is_empty() {
            plan
        } else {
            plan.with_ns(a.n.clone())
        };
        let rows = generate_benchmark(&a.out, &plan)?;
        println!("wrote {} instances and manifest.csv to {}", rows.len(), a.out.display());
        return Ok(0);
    }
    let [n] = a.n[..] else {
        bail!("give exactly one --n, or use --full");
    };
    let delta = a.delta.context("--delta is required")?;
    let sigma: SignRegime = a.sigma.as_deref().context("--sigma is required")?.parse()?;
    let mus: Vec<f64> = match (a.group, a.mu) {
        (true, _) => BENCHMARK_MUS.to_vec(),
        (false, Some(mu)) => vec![mu],
        (false, None) => bail!("give --mu or --group"),
    };
    if a.copy == 0 {
        bail!("copies are numbered from 1");
    }
    let base = GeneratorConfig::new(n, mus[0], delta, sigma, plan.config_seed(n, delta, sigma));
    fs::create_dir_all(&a.out)?;
    for (inst, &mu) in generate_group(&base, &mus, a.copy)?.iter().zip(&mus) {
        let path = a.out.join(instance_file_name(n, mu, delta, sigma, a.copy));
        fs::write(&path, write_instance(inst))?;
        println!("{}", path.display());
    }
    Ok(0)
}

pub fn solve(a: &SolveArgs) -> Result<u8> {
    let inst = load_instance(&a.instance)?;
    let params = SolveParams {
        h: a.h,
        max_cols: a.max_cols,
        time_limit: Some(time_limit(a.time_limit)?),
        node_limit: a.node_limit,
        trace: a.trace,
        ..SolveParams::default()
    };
    let result = bnp_solve(&inst, &params)?;
    let status = result.status;
    if let (Some(path), Some(sol)) = (&a.solution, &result.best_solution) {
        fs::write(path, write_solution(sol)).with_context(|| format!("writing {}", path.display()))?;
    }
    let record = BenchRecord::from_result(
        instance_id(&a.instance),
        &inst,
        solver_tag(a.h, a.max_cols),
        a.seed,
        result,
    );
    let text = serde_json::to_string_pretty(&record)?;
    if let Some(path) = &a.stats {
        fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    println!("{text}");
    Ok(if status == SolveStatus::Optimal { 0 } else { 1 })
}

pub fn export(a: &ExportArgs) -> Result<u8> {
    let inst = load_instance(&a.instance)?;
    let tags: Vec<FormulationTag> = match &a.tag {
        Some(t) => vec![t.parse()?],
        None => FormulationTag::ALL.to_vec(),
    };
    let dir = match &a.out {
        Some(d) => d.clone(),
        None => a.instance.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    fs::create_dir_all(&dir)?;
    let stem = a
        .instance
        .file_stem()
        .context("instance path has no file name")?
        .to_string_lossy()
        .into_owned();
    for tag in tags {
        let text = write_lp_file(&build_model(&inst, tag)?)?;
        let path = dir.join(format!("{stem}.{tag}.lp"));
        fs::write(&path, text)?;
        println!("{}", path.display());
    }
    Ok(0)
}

pub fn validate(a: &ValidateArgs) -> Result<u8> {
    let inst = load_instance(&a.instance)?;
    let text = fs::read_to_string(&a.solution).with_context(|| format!("reading {}", a.solution.display()))?;
    let sol = read_solution(&inst, &text)?;
    let report = validate_solution(&inst, &sol);
    if report.is_valid() {
        println!("valid: objective {}", report.recomputed_objective);
        Ok(0)
    } else {
        for v in report.violations() {
            println!("violation: {v}");
        }
        Ok(1)
    }
}

pub fn oracle(a: &OracleArgs) -> Result<u8> {
    let inst = load_instance(&a.instance)?;
    let r = solve_exact(&inst, None)?;
    if let Some(path) = &a.solution {
        fs::write(path, write_solution(&r.solution))?;
    }
    let bins: Vec<Vec<usize>> = r
        .solution
        .bins
        .iter()
        .map(|b| b.items().iter().map(|i| i + 1).collect())
        .collect();
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({ "objective": r.objective, "bins": bins }))?
    );
    Ok(0)
}

pub fn pricing(a: &PricingArgs) -> Result<u8> {
    let text = fs::read_to_string(&a.problem).with_context(|| format!("reading {}", a.problem.display()))?;
    let pp = read_pricing_problem(&text)?;
    let (method, best, proven, patterns) = if a.enumerate {
        ("enumerate", enumerate_solve(&pp)?, true, 1)
    } else if a.mch {
        let all = mch_solve(&pp, a.h);
        let best = all.first().cloned().unwrap_or_else(qbpp::pricing::PricedPattern::empty);
        ("mch", best, false, all.len())
    } else {
        let out = bb_solve(&pp, None, BbLimits::default())?;
        ("exact", out.best, out.proven, 1)
    };
    let items: Vec<usize> = best.items.iter().map(|i| i + 1).collect();
    let report = json!({
        "method": method,
        "value": best.value,
        "items": items,
        "proven": proven,
        "patterns": patterns,
        "improving": best.value > pp.threshold(),
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(0)
}
