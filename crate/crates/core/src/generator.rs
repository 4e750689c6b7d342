//! Benchmark instance generator.
//!
//! Each instance is described by `(n, mu, delta, sigma)`. Weights are drawn
//! from U{1..50}; each pair gets a nonzero-candidate dissimilarity with
//! probability `delta`, drawn from U{0..100}, U{-100..0} or U{-50..50}
//! depending on the sign regime. Capacity and bin cost follow from the item
//! draw and `mu`, so instances differing only in `mu` share all item data.
//!
//! Randomness is a xoshiro256** stream seeded through SplitMix64. The stream
//! for copy `c` of a configuration with seed `s` is seeded with
//! `mix64(s ^ mix64(c + 0x9E3779B97F4A7C15))`, where `mix64` is the
//! SplitMix64 output function. Bounded integers use Lemire's multiply-shift
//! method with its exact rejection step, and Bernoulli draws compare the top
//! 53 bits of one output against `delta`. Together these make the output
//! byte-identical on every platform.

use std::fs;
use std::path::Path;

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use crate::error::{Error, Result};
use crate::problem::{write_instance, Instance, InstanceMeta, SignRegime};

pub const WEIGHT_RANGE: (i64, i64) = (1, 50);
pub const BENCHMARK_MUS: [f64; 3] = [0.6, 1.0, 2.0];
pub const BENCHMARK_DELTAS: [f64; 3] = [0.25, 0.5, 0.75];
pub const BENCHMARK_NS: [usize; 5] = [25, 30, 35, 40, 45];
pub const DEFAULT_COPIES: u32 = 5;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the item stream for `copy` under configuration seed `seed`.
pub fn stream_seed(seed: u64, copy: u32) -> u64 {
    mix64(seed ^ mix64(u64::from(copy).wrapping_add(GOLDEN)))
}

/// Portable random source used by the generator.
pub struct GenRng(Xoshiro256StarStar);

impl GenRng {
    pub fn new(seed: u64) -> Self {
        GenRng(Xoshiro256StarStar::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn uniform(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        let range = (hi - lo) as u64 + 1;
        let mut m = u128::from(self.next_u64()) * u128::from(range);
        if (m as u64) < range {
            let threshold = range.wrapping_neg() % range;
            while (m as u64) < threshold {
                m = u128::from(self.next_u64()) * u128::from(range);
            }
        }
        lo + (m >> 64) as i64
    }

    /// `true` with probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        let u = (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        u < p
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub n: usize,
    pub mu: f64,
    pub delta: f64,
    pub sigma: SignRegime,
    pub seed: u64,
    pub copies: u32,
}

impl GeneratorConfig {
    pub fn new(n: usize, mu: f64, delta: f64, sigma: SignRegime, seed: u64) -> Self {
        GeneratorConfig {
            n,
            mu,
            delta,
            sigma,
            seed,
            copies: DEFAULT_COPIES,
        }
    }

    fn check(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::input("generator needs n >= 1"));
        }
        // delta = 0 is degenerate but handy in tests.
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::input(format!("delta {} outside [0, 1]", self.delta)));
        }
        check_mu(self.mu)
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if mu.is_finite() && mu > 0.0 {
        Ok(())
    } else {
        Err(Error::input(format!("mu must be positive, got {mu}")))
    }
}

/// Draws weights and the dense dissimilarity matrix.
pub fn generate_items(n: usize, delta: f64, sigma: SignRegime, rng: &mut GenRng) -> (Vec<i64>, Vec<i64>) {
    let weights: Vec<i64> = (0..n).map(|_| rng.uniform(WEIGHT_RANGE.0, WEIGHT_RANGE.1)).collect();
    let (lo, hi) = match sigma {
        SignRegime::Plus => (0, 100),
        SignRegime::Minus => (-100, 0),
        SignRegime::Mixed => (-50, 50),
    };
    let mut dissim = vec![0i64; n * n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.bernoulli(delta) {
                let d = rng.uniform(lo, hi);
                dissim[i * n + j] = d;
                dissim[j * n + i] = d;
            }
        }
    }
    (weights, dissim)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DerivedParams {
    pub total_weight: i64,
    /// Capacity from the 20%-of-total-weight rule, before any clamping.
    pub capacity: i64,
    /// Bins needed by weight alone at that capacity.
    pub bins: i64,
    pub avg_items_per_bin: f64,
    pub avg_dissim: f64,
    pub bin_cost: i64,
}

/// Capacity and bin cost for a given item draw and `mu`.
pub fn derive_capacity_and_cost(weights: &[i64], dissim: &[i64], mu: f64) -> Result<DerivedParams> {
    if weights.is_empty() {
        return Err(Error::input("no items"));
    }
    check_mu(mu)?;
    let n = weights.len();
    let total_weight: i64 = weights.iter().sum();
    let capacity = ((total_weight as f64 / (5.0 * mu)).floor() as i64).max(1);
    let bins = (total_weight + capacity - 1) / capacity;
    let avg_items_per_bin = n as f64 / bins as f64;

    let mut pair_sum: i64 = 0;
    for i in 0..n {
        for j in i + 1..n {
            pair_sum += dissim[i * n + j];
        }
    }
    let n_pairs = (n * n.saturating_sub(1) / 2) as i64;
    let (avg_dissim, bin_cost) = if n_pairs == 0 {
        (0.0, 0)
    } else {
        // |d̄| = n|S| / (m C(n,2)), formed from exact integers before dividing.
        let abs_avg = (n as i64 * pair_sum.abs()) as f64 / (bins * n_pairs) as f64;
        let signed = if pair_sum < 0 { -abs_avg } else { abs_avg };
        (signed, (mu * abs_avg).ceil() as i64)
    };
    Ok(DerivedParams {
        total_weight,
        capacity,
        bins,
        avg_items_per_bin,
        avg_dissim,
        bin_cost,
    })
}

/// Instances sharing one item draw, one per entry of `mus`. The `mu` field
/// of `base` is ignored.
pub fn generate_group(base: &GeneratorConfig, mus: &[f64], copy: u32) -> Result<Vec<Instance>> {
    if mus.is_empty() {
        return Err(Error::input("a group needs at least one mu"));
    }
    GeneratorConfig {
        mu: mus[0],
        ..base.clone()
    }
    .check()?;
    let group = stream_seed(base.seed, copy);
    let mut rng = GenRng::new(group);
    let (weights, dissim) = generate_items(base.n, base.delta, base.sigma, &mut rng);
    let max_w = weights.iter().copied().max().unwrap_or(1);
    mus.iter()
        .map(|&mu| {
            let derived = derive_capacity_and_cost(&weights, &dissim, mu)?;
            let capacity = derived.capacity.max(max_w);
            let meta = InstanceMeta {
                mu,
                delta: base.delta,
                sigma: base.sigma,
                seed: base.seed,
                group,
                copy,
                capacity_clamped: capacity != derived.capacity,
            };
            Ok(Instance::new(weights.clone(), capacity, derived.bin_cost, dissim.clone())?.with_meta(meta))
        })
        .collect()
}

pub fn generate_instance(cfg: &GeneratorConfig, copy: u32) -> Result<Instance> {
    Ok(generate_group(cfg, &[cfg.mu], copy)?.remove(0))
}

/// The parameter cross to generate.
#[derive(Clone, Debug)]
pub struct BenchmarkPlan {
    pub ns: Vec<usize>,
    pub mus: Vec<f64>,
    pub deltas: Vec<f64>,
    pub sigmas: Vec<SignRegime>,
    pub copies: u32,
    pub master_seed: u64,
}

impl BenchmarkPlan {
    /// 5 sizes x 3 mus x 3 densities x 3 sign regimes x 5 copies.
    pub fn full(master_seed: u64) -> Self {
        BenchmarkPlan {
            ns: BENCHMARK_NS.to_vec(),
            mus: BENCHMARK_MUS.to_vec(),
            deltas: BENCHMARK_DELTAS.to_vec(),
            sigmas: SignRegime::ALL.to_vec(),
            copies: DEFAULT_COPIES,
            master_seed,
        }
    }

    pub fn with_ns(mut self, ns: Vec<usize>) -> Self {
        self.ns = ns;
        self
    }

    /// Seed of the `(n, delta, sigma)` configuration, shared by its mu-group.
    pub fn config_seed(&self, n: usize, delta: f64, sigma: SignRegime) -> u64 {
        let mut h = mix64(self.master_seed ^ GOLDEN);
        h = mix64(h ^ n as u64);
        h = mix64(h ^ delta.to_bits());
        mix64(h ^ sigma as u64)
    }

    pub fn instance_count(&self) -> usize {
        self.ns.len() * self.mus.len() * self.deltas.len() * self.sigmas.len() * self.copies as usize
    }

    /// Generates every instance in deterministic order.
    pub fn instances(&self) -> Result<Vec<(ManifestRow, Instance)>> {
        let mut out = Vec::with_capacity(self.instance_count());
        for &n in &self.ns {
            for &delta in &self.deltas {
                for &sigma in &self.sigmas {
                    let seed = self.config_seed(n, delta, sigma);
                    let base = GeneratorConfig {
                        n,
                        mu: self.mus.first().copied().unwrap_or(1.0),
                        delta,
                        sigma,
                        seed,
                        copies: self.copies,
                    };
                    for copy in 1..=self.copies {
                        let group = generate_group(&base, &self.mus, copy)?;
                        for (inst, &mu) in group.into_iter().zip(&self.mus) {
                            let row = ManifestRow {
                                file: instance_file_name(n, mu, delta, sigma, copy),
                                n,
                                mu,
                                delta,
                                sigma,
                                copy,
                                group: stream_seed(seed, copy),
                                capacity: inst.capacity(),
                                bin_cost: inst.bin_cost(),
                                seed,
                            };
                            out.push((row, inst));
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

pub fn instance_file_name(n: usize, mu: f64, delta: f64, sigma: SignRegime, copy: u32) -> String {
    format!("qbpp_n{n}_mu{mu}_d{delta}_{sigma}_{copy}.qbpp")
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifestRow {
    pub file: String,
    pub n: usize,
    pub mu: f64,
    pub delta: f64,
    pub sigma: SignRegime,
    pub copy: u32,
    pub group: u64,
    pub capacity: i64,
    pub bin_cost: i64,
    pub seed: u64,
}

pub const MANIFEST_HEADER: &str = "file,n,mu,delta,sigma,copy,group,W,alpha,seed";

pub fn manifest_csv(rows: &[ManifestRow]) -> String {
    let mut out = String::from(MANIFEST_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.file, r.n, r.mu, r.delta, r.sigma, r.copy, r.group, r.capacity, r.bin_cost, r.seed
        ));
    }
    out
}

/// Writes every instance of `plan` plus `manifest.csv` into `out_dir`.
pub fn generate_benchmark(out_dir: &Path, plan: &BenchmarkPlan) -> Result<Vec<ManifestRow>> {
    fs::create_dir_all(out_dir)?;
    let mut rows = Vec::with_capacity(plan.instance_count());
    for (row, inst) in plan.instances()? {
        fs::write(out_dir.join(&row.file), write_instance(&inst))?;
        rows.push(row);
    }
    fs::write(out_dir.join("manifest.csv"), manifest_csv(&rows))?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_stays_in_range() {
        let mut rng = GenRng::new(7);
        for _ in 0..10_000 {
            let v = rng.uniform(-50, 50);
            assert!((-50..=50).contains(&v));
        }
        for _ in 0..100 {
            assert_eq!(rng.uniform(3, 3), 3);
        }
    }

    #[test]
    fn full_density_plus_regime() {
        let mut rng = GenRng::new(1);
        let (w, d) = generate_items(12, 1.0, SignRegime::Plus, &mut rng);
        assert!(w.iter().all(|&w| (1..=50).contains(&w)));
        assert!(d.iter().all(|&d| (0..=100).contains(&d)));
    }

    #[test]
    fn zero_density_gives_zero_matrix() {
        let mut rng = GenRng::new(1);
        let (_, d) = generate_items(12, 0.0, SignRegime::Mixed, &mut rng);
        assert!(d.iter().all(|&d| d == 0));
    }

    #[test]
    fn same_seed_same_draw() {
        let a = generate_items(20, 0.5, SignRegime::Mixed, &mut GenRng::new(99));
        let b = generate_items(20, 0.5, SignRegime::Mixed, &mut GenRng::new(99));
        assert_eq!(a, b);
    }

    #[test]
    fn derived_params_two_items() {
        let p = derive_capacity_and_cost(&[10, 10], &[0, 0, 0, 0], 1.0).unwrap();
        assert_eq!(p.capacity, 4);
        assert_eq!(p.bins, 5);
        assert!((p.avg_items_per_bin - 0.4).abs() < 1e-12);
        assert_eq!(p.avg_dissim, 0.0);
        assert_eq!(p.bin_cost, 0);
    }

    #[test]
    fn derived_params_hand_computed() {
        // total 60, mu 1 -> W 12, m 5, n̄ 0.6, S = 30 - 12 = 18, C = 3
        // d̄ = 0.6 * 18 / 3 = 3.6, alpha = ceil(3.6) = 4.
        let d = vec![0, 30, -12, 30, 0, 0, -12, 0, 0];
        let p = derive_capacity_and_cost(&[20, 20, 20], &d, 1.0).unwrap();
        assert_eq!(p.capacity, 12);
        assert_eq!(p.bins, 5);
        assert!((p.avg_dissim - 3.6).abs() < 1e-12);
        assert_eq!(p.bin_cost, 4);
        let p2 = derive_capacity_and_cost(&[20, 20, 20], &d, 2.0).unwrap();
        assert_eq!(p2.capacity, 6);
    }

    #[test]
    fn single_item_has_no_pairs() {
        let p = derive_capacity_and_cost(&[7], &[0], 2.0).unwrap();
        assert_eq!(p.avg_dissim, 0.0);
        assert_eq!(p.bin_cost, 0);
        assert_eq!(p.capacity, 1);
    }

    #[test]
    fn mu_halves_capacity() {
        let w: Vec<i64> = (1..=30).collect();
        let d = vec![0; 900];
        let a = derive_capacity_and_cost(&w, &d, 1.0).unwrap().capacity;
        let b = derive_capacity_and_cost(&w, &d, 2.0).unwrap().capacity;
        assert!((a / 2 - b).abs() <= 1, "{a} vs {b}");
    }

    #[test]
    fn group_shares_items() {
        let cfg = GeneratorConfig::new(25, 1.0, 0.5, SignRegime::Mixed, 42);
        let group = generate_group(&cfg, &BENCHMARK_MUS, 2).unwrap();
        assert_eq!(group.len(), 3);
        for inst in &group[1..] {
            assert_eq!(inst.weights(), group[0].weights());
            assert_eq!(inst.dissim(), group[0].dissim());
            assert_eq!(inst.meta().unwrap().group, group[0].meta().unwrap().group);
        }
        assert!(group[0].capacity() >= group[2].capacity());
    }

    #[test]
    fn singleton_group_matches_plain_generation() {
        let cfg = GeneratorConfig::new(10, 1.0, 0.75, SignRegime::Minus, 5);
        let g = generate_group(&cfg, &[1.0], 1).unwrap();
        assert_eq!(g[0], generate_instance(&cfg, 1).unwrap());
    }

    #[test]
    fn clamping_keeps_items_packable() {
        let cfg = GeneratorConfig::new(4, 2.0, 0.5, SignRegime::Plus, 3);
        for copy in 0..50 {
            let inst = generate_instance(&cfg, copy).unwrap();
            let max_w = inst.weights().iter().copied().max().unwrap();
            assert!(inst.capacity() >= max_w);
        }
    }

    #[test]
    fn config_rejects_bad_parameters() {
        assert!(generate_instance(&GeneratorConfig::new(0, 1.0, 0.5, SignRegime::Plus, 1), 0).is_err());
        assert!(generate_instance(&GeneratorConfig::new(5, 0.0, 0.5, SignRegime::Plus, 1), 0).is_err());
        assert!(generate_instance(&GeneratorConfig::new(5, 1.0, 1.5, SignRegime::Plus, 1), 0).is_err());
        assert!(generate_group(&GeneratorConfig::new(5, 1.0, 0.5, SignRegime::Plus, 1), &[], 0).is_err());
    }

    #[test]
    fn plan_counts() {
        assert_eq!(BenchmarkPlan::full(1).instance_count(), 675);
        assert_eq!(BenchmarkPlan::full(1).with_ns(vec![25]).instance_count(), 135);
    }
}
