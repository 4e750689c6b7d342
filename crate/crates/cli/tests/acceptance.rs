//! Acceptance suite: one pass/fail line per criterion.

use std::fs;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use qbpp::bnp::{root_lower_bound, solve, SolveParams, SolveStatus};
use qbpp::generator::{generate_benchmark, generate_instance, BenchmarkPlan, GeneratorConfig};
use qbpp::lp::{reduced_cost, Column, MasterLP};
use qbpp::milp_export::{build_model, evaluate_assignment, FormulationTag};
use qbpp::oracle::solve_exact;
use qbpp::pricing::{
    bb_solve, bb_solve_observed, enumerate_solve, greedy_lower_bound, mch_solve, pattern_value, BbLimits,
    PricingProblem,
};
use qbpp::{read_instance, write_instance, Instance, SignRegime};
use qbpp_testkit::ch::{single_slot, Gqkp};
use qbpp_testkit::tableau::solve_partition_lp;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Check = Result<String, String>;

fn fail(msg: impl Into<String>) -> Check {
    Err(msg.into())
}

const MUS: [f64; 3] = [0.6, 1.0, 2.0];
const DELTAS: [f64; 3] = [0.25, 0.5, 0.75];

fn criterion_1() -> Check {
    let start = Instant::now();
    let mut count = 0;
    for n in 4..=9 {
        for sigma in SignRegime::ALL {
            for mu in MUS {
                for delta in DELTAS {
                    for copy in 1..=2 {
                        let cfg = GeneratorConfig::new(n, mu, delta, sigma, 7000 + n as u64);
                        let inst = generate_instance(&cfg, copy).map_err(|e| e.to_string())?;
                        let r = solve(&inst, &SolveParams::default()).map_err(|e| e.to_string())?;
                        let exact = solve_exact(&inst, None).map_err(|e| e.to_string())?.objective;
                        if r.status != SolveStatus::Optimal || r.upper_bound != exact {
                            return fail(format!(
                                "n={n} {sigma} mu={mu} delta={delta} copy={copy}: {:?} {} vs oracle {exact}",
                                r.status, r.upper_bound
                            ));
                        }
                        count += 1;
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 120.0 {
        return fail(format!("{count} instances took {secs:.1}s"));
    }
    Ok(format!(
        "{count} instances optimal and equal to the oracle in {secs:.2}s"
    ))
}

struct Raw {
    weights: Vec<i64>,
    capacity: i64,
    linear: Vec<f64>,
    quad: Vec<f64>,
    conflicts: Vec<(usize, usize)>,
}

impl Raw {
    fn random(rng: &mut StdRng, n: usize, with_conflicts: bool) -> Raw {
        let weights: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=25)).collect();
        let total: i64 = weights.iter().sum();
        let capacity = rng.gen_range(1..=total.max(2));
        let linear = (0..n).map(|_| rng.gen_range(-50..=50) as f64).collect();
        let mut quad = vec![0.0; n * n];
        let mut conflicts = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(0.7) {
                    let q = rng.gen_range(-40..=40) as f64;
                    quad[i * n + j] = q;
                    quad[j * n + i] = q;
                }
                if with_conflicts && rng.gen_bool(0.12) {
                    conflicts.push((i, j));
                }
            }
        }
        Raw {
            weights,
            capacity,
            linear,
            quad,
            conflicts,
        }
    }

    fn problem(&self) -> PricingProblem {
        PricingProblem::new(
            self.weights.clone(),
            self.capacity,
            self.linear.clone(),
            self.quad.clone(),
            &self.conflicts,
            0.0,
        )
        .expect("valid random problem")
    }
}

fn criterion_2() -> Check {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(2);
    let (mut with, mut without) = (0, 0);
    for k in 0..600 {
        let n = rng.gen_range(1..=16);
        let conflicts = k % 2 == 0;
        let pp = Raw::random(&mut rng, n, conflicts).problem();
        let out = bb_solve(&pp, None, BbLimits::default()).map_err(|e| e.to_string())?;
        let exact = enumerate_solve(&pp).map_err(|e| e.to_string())?;
        if !out.proven || out.best.value != exact.value {
            return fail(format!("problem {k}: {} vs {}", out.best.value, exact.value));
        }
        if conflicts {
            with += 1
        } else {
            without += 1
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 60.0 {
        return fail(format!("took {secs:.1}s"));
    }
    Ok(format!(
        "{} problems ({with} with conflicts, {without} without) proven equal to enumeration in {secs:.2}s",
        with + without
    ))
}

fn completion_optimum(pp: &PricingProblem, inside: &[usize], free: &[usize]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..1 << free.len() {
        let mut items = inside.to_vec();
        items.extend(
            free.iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, &i)| i),
        );
        if let Ok(v) = pattern_value(pp, &items) {
            best = best.max(v);
        }
    }
    best
}

fn criterion_3() -> Check {
    let mut rng = StdRng::seed_from_u64(3);
    let (mut nodes, mut violations) = (0usize, 0usize);
    let mut problems = 0;
    while nodes < 1500 {
        let n = rng.gen_range(4..=13);
        let conflicts = rng.gen_bool(0.5);
        let pp = Raw::random(&mut rng, n, conflicts).problem();
        problems += 1;
        bb_solve_observed(&pp, None, BbLimits::default(), &mut |node| {
            let opt = completion_optimum(&pp, &node.inside, &node.undecided);
            let lb = greedy_lower_bound(&pp, node).value;
            nodes += 1;
            if !(lb <= opt + 1e-9 && opt <= node.ub + 1e-9) {
                violations += 1;
            }
        })
        .map_err(|e| e.to_string())?;
    }
    if violations > 0 {
        return fail(format!("{violations} of {nodes} nodes violate LB <= opt <= UB"));
    }
    Ok(format!("{nodes} nodes from {problems} problems, 0 violations"))
}

fn criterion_4() -> Check {
    let mut rng = StdRng::seed_from_u64(4);
    let mut runs = 0;
    for k in 0..400 {
        let n = rng.gen_range(0..=16);
        let raw = Raw::random(&mut rng, n, k % 3 != 0);
        let pp = raw.problem();
        let exact = enumerate_solve(&pp).map_err(|e| e.to_string())?.value;
        for h in 1..=6 {
            let pats = mch_solve(&pp, h);
            runs += 1;
            for p in &pats {
                match pattern_value(&pp, &p.items) {
                    Ok(v) if v == p.value => {}
                    Ok(v) => return fail(format!("problem {k} h={h}: stored {} recomputed {v}", p.value)),
                    Err(e) => return fail(format!("problem {k} h={h}: infeasible pattern: {e}")),
                }
            }
            if let Some(best) = pats.first() {
                if best.value > exact {
                    return fail(format!(
                        "problem {k} h={h}: heuristic {} above exact {exact}",
                        best.value
                    ));
                }
            }
        }
        let mut conflict = vec![false; n * n];
        for &(i, j) in &raw.conflicts {
            conflict[i * n + j] = true;
            conflict[j * n + i] = true;
        }
        let reference = single_slot(&Gqkp {
            weights: &raw.weights,
            capacity: raw.capacity,
            linear: &raw.linear,
            quad: &raw.quad,
            conflict: &conflict,
        });
        let got: Vec<(Vec<usize>, f64)> = mch_solve(&pp, 1).into_iter().map(|p| (p.items, p.value)).collect();
        if got != reference {
            return fail(format!(
                "problem {k}: h=1 output differs from the single-slot recursion"
            ));
        }
    }
    Ok(format!(
        "{runs} heuristic runs on 400 problems; h=1 matched the reference on 400/400"
    ))
}

fn random_columns(rng: &mut StdRng, rows: usize, total: usize) -> Vec<Column> {
    let mut cols: Vec<Column> = (0..rows)
        .map(|i| Column {
            cost: rng.gen_range(5.0..60.0),
            support: vec![i],
        })
        .collect();
    while cols.len() < total {
        let size = rng.gen_range(1..=rows);
        let mut support: Vec<usize> = (0..rows).collect();
        for k in 0..size {
            let pick = rng.gen_range(k..rows);
            support.swap(k, pick);
        }
        support.truncate(size);
        support.sort_unstable();
        cols.push(Column {
            cost: rng.gen_range(-20.0..100.0) + 10.0 * size as f64,
            support,
        });
    }
    cols
}

fn criterion_5() -> Check {
    let mut rng = StdRng::seed_from_u64(5);
    let (mut worst_gap, mut worst_rc, mut worst_warm, mut worst_ref) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let masters = 250;
    for k in 0..masters {
        let rows = rng.gen_range(1..=10);
        let total = rng.gen_range(rows..=200);
        let cols = random_columns(&mut rng, rows, total);
        let mut cold = MasterLP::new(rows);
        cold.add_columns(cols.clone()).map_err(|e| e.to_string())?;
        let r = cold.solve().map_err(|e| format!("master {k}: {e}"))?;
        worst_gap = worst_gap.max((r.objective - r.duals.iter().sum::<f64>()).abs());
        for &q in &r.basic {
            worst_rc = worst_rc.max(reduced_cost(&r.duals, &cold.columns()[q]).abs());
        }
        let plain: Vec<(f64, Vec<usize>)> = cold.columns().iter().map(|c| (c.cost, c.support.clone())).collect();
        let reference = solve_partition_lp(rows, &plain).ok_or("reference simplex found no solution")?;
        worst_ref = worst_ref.max((reference - r.objective).abs());

        let mut warm = MasterLP::new(rows);
        let split = rows + (total - rows) / 3;
        warm.add_columns(cols[..split].to_vec()).map_err(|e| e.to_string())?;
        warm.solve().map_err(|e| e.to_string())?;
        warm.add_columns(cols[split..].to_vec()).map_err(|e| e.to_string())?;
        let w = warm.solve().map_err(|e| e.to_string())?;
        worst_warm = worst_warm.max((w.objective - r.objective).abs());
    }
    let summary = format!(
        "{masters} masters: max |obj - sum(duals)| {worst_gap:.1e}, max basic |rc| {worst_rc:.1e}, \
         max warm/cold diff {worst_warm:.1e}, max diff to reference simplex {worst_ref:.1e}"
    );
    if worst_gap > 1e-7 || worst_rc > 1e-7 || worst_warm > 1e-7 || worst_ref > 1e-7 {
        return fail(summary);
    }
    Ok(summary)
}

fn assignment_cost(inst: &Instance, a: &[usize]) -> Option<i64> {
    let n = inst.n();
    let mut load = vec![0; n];
    for (i, &b) in a.iter().enumerate() {
        load[b] += inst.weight(i);
    }
    if load.iter().any(|&l| l > inst.capacity()) {
        return None;
    }
    let mut cost = load.iter().filter(|&&l| l > 0).count() as i64 * inst.bin_cost();
    for i in 0..n {
        for j in i + 1..n {
            if a[i] == a[j] {
                cost += inst.d(i, j);
            }
        }
    }
    Some(cost)
}

fn criterion_6() -> Check {
    let start = Instant::now();
    let mut instances = 0;
    let mut evaluations = 0u64;
    for k in 0..54u64 {
        let n = 3 + (k % 4) as usize;
        let sigma = SignRegime::ALL[(k % 3) as usize];
        let mu = MUS[(k / 3 % 3) as usize];
        let delta = DELTAS[(k / 9 % 3) as usize];
        let inst =
            generate_instance(&GeneratorConfig::new(n, mu, delta, sigma, 600 + k), 1).map_err(|e| e.to_string())?;
        let oracle = solve_exact(&inst, None).map_err(|e| e.to_string())?.objective;
        let models = FormulationTag::LINEAR
            .iter()
            .map(|&t| build_model(&inst, t))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        let mut best = vec![i64::MAX; models.len()];
        let mut a = vec![0usize; n];
        'all: loop {
            let direct = assignment_cost(&inst, &a);
            for (m, b) in models.iter().zip(best.iter_mut()) {
                let e = evaluate_assignment(m, &a);
                evaluations += 1;
                match direct {
                    Some(c) if e.feasible() => {
                        if e.objective != c {
                            return fail(format!(
                                "instance {k} {}: objective {} vs {c} at {a:?}",
                                m.tag(),
                                e.objective
                            ));
                        }
                        *b = (*b).min(e.objective);
                    }
                    None if !e.feasible() => {}
                    _ => {
                        return fail(format!(
                            "instance {k} {}: feasibility disagrees at {a:?}: {:?}",
                            m.tag(),
                            e.violations
                        ))
                    }
                }
            }
            let mut pos = 0;
            loop {
                if pos == n {
                    break 'all;
                }
                a[pos] += 1;
                if a[pos] < n {
                    break;
                }
                a[pos] = 0;
                pos += 1;
            }
        }
        if let Some((m, b)) = models.iter().zip(&best).find(|(_, &b)| b != oracle) {
            return fail(format!("instance {k} {}: minimum {b} vs oracle {oracle}", m.tag()));
        }
        instances += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 180.0 {
        return fail(format!("took {secs:.1}s"));
    }
    Ok(format!(
        "{instances} instances (n 3..6), {evaluations} evaluations over 8 tags, all minima equal the oracle, {secs:.2}s"
    ))
}

fn criterion_7() -> Check {
    let plan = BenchmarkPlan::full(42);
    let all = plan.instances().map_err(|e| e.to_string())?;
    for (row, inst) in &all {
        if !inst.weights().iter().all(|w| (1..=50).contains(w)) {
            return fail(format!("{}: weight outside [1, 50]", row.file));
        }
        let (lo, hi) = match row.sigma {
            SignRegime::Plus => (0, 100),
            SignRegime::Minus => (-100, 0),
            SignRegime::Mixed => (-50, 50),
        };
        if !inst.dissim().iter().all(|d| (lo..=hi).contains(d)) {
            return fail(format!("{}: dissimilarity outside the {} range", row.file, row.sigma));
        }
    }
    for chunk in all.chunks(3) {
        let (a, b) = (&chunk[0].1, &chunk[1..]);
        if b.iter()
            .any(|(_, x)| x.weights() != a.weights() || x.dissim() != a.dissim())
        {
            return fail(format!("{}: mu-group members differ in items", chunk[0].0.file));
        }
        if chunk.iter().map(|(r, _)| r.mu).collect::<Vec<_>>() != MUS {
            return fail("benchmark order does not group the three mu values");
        }
    }

    let n = 45;
    let trials = (n * (n - 1) / 2) as f64;
    let p = 0.5 * 100.0 / 101.0;
    let (mean, sd) = (trials * p, (trials * p * (1.0 - p)).sqrt());
    let mut worst = 0.0f64;
    for sigma in SignRegime::ALL {
        for seed in 0..50 {
            let inst =
                generate_instance(&GeneratorConfig::new(n, 1.0, 0.5, sigma, seed), 1).map_err(|e| e.to_string())?;
            let nz = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .filter(|&(i, j)| inst.d(i, j) != 0)
                .count() as f64;
            worst = worst.max((nz - mean).abs() / sd);
        }
    }
    if worst > 4.0 {
        return fail(format!("nonzero count {worst:.2} sd from its mean"));
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    generate_benchmark(dir.path(), &plan).map_err(|e| e.to_string())?;
    let files: Vec<_> = fs::read_dir(dir.path())
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "qbpp"))
        .collect();
    if files.len() != 675 {
        return fail(format!("benchmark wrote {} files", files.len()));
    }
    let first = fs::read_to_string(&files[0]).map_err(|e| e.to_string())?;
    let parsed = read_instance(&first).map_err(|e| e.to_string())?;
    if write_instance(&parsed) != first {
        return fail("written instance does not round-trip");
    }
    Ok(format!(
        "weights and signs in range on 675 instances, mu-groups identical, \
         nonzero counts within {worst:.2} sd (150 draws), 675 files written"
    ))
}

fn criterion_8() -> Check {
    let plan = BenchmarkPlan::full(42).with_ns(vec![15]);
    let all = plan.instances().map_err(|e| e.to_string())?;
    let limit = SolveParams {
        time_limit: Some(Duration::from_secs(60)),
        ..SolveParams::with_config(5, 10)
    };
    let mut solved = 0;
    let mut worst_secs = 0.0f64;
    let mut worst_root = 0.0f64;
    for (row, inst) in &all {
        let start = Instant::now();
        let r = solve(inst, &limit).map_err(|e| format!("{}: {e}", row.file))?;
        let secs = start.elapsed().as_secs_f64();
        worst_secs = worst_secs.max(secs);
        if r.status == SolveStatus::Optimal && secs <= 60.0 {
            solved += 1;
        }
        let a = root_lower_bound(inst, &SolveParams::with_config(1, 1)).map_err(|e| e.to_string())?;
        let b = root_lower_bound(inst, &SolveParams::with_config(5, 10)).map_err(|e| e.to_string())?;
        match (a, b) {
            (Some(a), Some(b)) => {
                worst_root = worst_root.max((a - b).abs());
                if (a - b).abs() > 1e-6 {
                    return fail(format!("{}: root bounds {a} and {b} differ", row.file));
                }
            }
            _ => return fail(format!("{}: root bound missing", row.file)),
        }
    }
    let need = (all.len() * 9).div_ceil(10);
    let summary = format!(
        "{solved}/{} optimal within 60s (slowest {worst_secs:.2}s), root bounds agree within {worst_root:.1e}",
        all.len()
    );
    if solved < need {
        return fail(summary);
    }
    Ok(summary)
}

fn criterion_9() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let plan = BenchmarkPlan::full(42);
    let pick = [
        (10, SignRegime::Mixed, 0.5),
        (25, SignRegime::Minus, 0.5),
        (25, SignRegime::Plus, 0.75),
    ];
    for (n, sigma, delta) in pick {
        let cfg = GeneratorConfig::new(n, 0.6, delta, sigma, plan.config_seed(n, delta, sigma));
        for (k, mu) in MUS.iter().enumerate() {
            let inst = generate_instance(&GeneratorConfig { mu: *mu, ..cfg.clone() }, 1).map_err(|e| e.to_string())?;
            fs::write(dir.path().join(format!("i{n}_{sigma}_{k}.qbpp")), write_instance(&inst))
                .map_err(|e| e.to_string())?;
        }
    }
    let out = dir.path().join("bench.csv");
    let status = Command::new(env!("CARGO_BIN_EXE_qbpp"))
        .args([
            "bench",
            dir.path().to_str().unwrap(),
            "--configs",
            "1x1,5x10",
            "--time-limit",
            "0.3",
            "--threads",
            "1",
        ])
        .arg("--out")
        .arg(&out)
        .status()
        .map_err(|e| e.to_string())?;
    if !status.success() {
        return fail(format!("bench exited with {status}"));
    }
    let mut rd = csv::Reader::from_path(&out).map_err(|e| e.to_string())?;
    let header = rd.headers().map_err(|e| e.to_string())?.clone();
    let col = |name: &str| header.iter().position(|h| h == name).ok_or(format!("no {name} column"));
    let (ub_c, lb_c, gap_c, kind_c) = (col("ub")?, col("lb")?, col("gap_percent")?, col("kind")?);
    let (mut rows, mut nonzero, mut infinite) = (0, 0, 0);
    for rec in rd.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        rows += 1;
        let num = |c: usize| {
            rec[c]
                .parse::<f64>()
                .map_err(|_| format!("row {rows}: bad number `{}`", &rec[c]))
        };
        let (ub, lb) = (num(ub_c)?, num(lb_c)?);
        let gap = &rec[gap_c];
        let ok = if ub == 0.0 {
            gap == "inf" || (lb == 0.0 && gap == "0")
        } else {
            let want = 100.0 * (ub - lb) / ub.abs();
            let got = num(gap_c)?;
            if got.is_infinite() {
                infinite += 1;
            } else if got != 0.0 {
                nonzero += 1;
            }
            got == want || (got - want).abs() <= 1e-9 * want.abs().max(1.0)
        };
        if !ok {
            return fail(format!("{} row {rows}: gap {gap} with ub {ub} lb {lb}", &rec[kind_c]));
        }
    }
    if rows == 0 {
        return fail("bench wrote no rows");
    }
    Ok(format!(
        "{rows} rows checked ({nonzero} with a finite positive gap, {infinite} infinite)"
    ))
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Check); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut failed = 0;
    for (k, run) in criteria {
        match run() {
            Ok(msg) => println!("criterion {k}: PASS  {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {k}: FAIL  {msg}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
