//! Seeded random markets.
//!
//! Coefficients are integers or halves, so every valuation is exactly
//! representable and comparisons on ties are meaningful.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::format::{FirmSpec, InstanceFile, PairSpec, ValuationSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub workers: RangeInclusive<usize>,
    pub firms: RangeInclusive<usize>,
    pub max_quota: usize,
    /// Largest `b - a` of a single pair.
    pub max_span: i64,
    /// Cap on the sum of all spans, if any.
    pub max_total_span: Option<i64>,
    /// Chance that a worker-firm combination is admissible.
    pub density: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            workers: 1..=8,
            firms: 1..=4,
            max_quota: 3,
            max_span: 12,
            max_total_span: None,
            density: 0.7,
        }
    }
}

impl GenConfig {
    /// Small enough for exhaustive enumeration.
    pub fn micro() -> Self {
        GenConfig {
            workers: 1..=3,
            firms: 1..=3,
            max_quota: 2,
            max_span: 4,
            max_total_span: Some(12),
            density: 0.7,
        }
    }
}

const HALF_STEPS: [f64; 4] = [0.5, 1.0, 1.5, 2.0];

fn num(v: f64) -> String {
    format!("{v}")
}

/// `(z - z0)` written without a double minus.
fn shifted(z0: i64) -> String {
    match z0 {
        0 => "z".into(),
        z0 if z0 > 0 => format!("(z - {z0})"),
        z0 => format!("(z + {})", -z0),
    }
}

/// Increasing on `[a, b]` with its zero crossing near `cross`. The firm side
/// uses `negate` to mirror it into a decreasing function.
fn valuation(rng: &mut ChaCha8Rng, a: i64, b: i64, cross: i64, negate: bool) -> ValuationSpec {
    let sign = if negate { -1.0 } else { 1.0 };
    match rng.random_range(0..3) {
        0 => {
            let k = *HALF_STEPS.choose(rng).unwrap();
            let c = -sign * k * cross as f64 + 0.0;
            let op = if negate { "-" } else { "+" };
            ValuationSpec::Expr(format!("{} {op} {}*z", num(c), num(k)))
        }
        1 => {
            let k = *HALF_STEPS.choose(rng).unwrap();
            let z0 = a - rng.random_range(0..3);
            let d = (cross - z0) as f64;
            let c = -sign * k * d * d + 0.0;
            let op = if negate { "-" } else { "+" };
            ValuationSpec::Expr(format!("{} {op} {}*{}^2", num(c), num(k), shifted(z0)))
        }
        _ => {
            let mut table = BTreeMap::new();
            let mut v = rng.random_range(-6..=2) as f64 + if rng.random_bool(0.5) { 0.5 } else { 0.0 };
            for z in a..=b {
                table.insert(z, sign * v);
                v += rng.random_range(1..=6) as f64 * 0.5;
            }
            if negate {
                // mirror so the largest value sits at the smallest salary
                let vals: Vec<f64> = table.values().rev().map(|x| -x).collect();
                for (slot, x) in table.values_mut().zip(vals) {
                    *slot = x;
                }
            }
            ValuationSpec::Table(table)
        }
    }
}

pub fn random_instance(seed: u64, cfg: &GenConfig) -> InstanceFile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nw = rng.random_range(cfg.workers.clone());
    let nf = rng.random_range(cfg.firms.clone());
    let workers: Vec<String> = (1..=nw).map(|i| format!("w{i}")).collect();
    let firms: Vec<FirmSpec> = (1..=nf)
        .map(|j| FirmSpec {
            id: format!("f{j}"),
            quota: rng.random_range(1..=cfg.max_quota) as i64,
        })
        .collect();
    let mut budget = cfg.max_total_span.unwrap_or(i64::MAX);
    let mut pairs = Vec::new();
    for w in &workers {
        for f in &firms {
            if !rng.random_bool(cfg.density) {
                continue;
            }
            let span = rng.random_range(0..=cfg.max_span.min(budget));
            budget -= span;
            let a = rng.random_range(-3..=3);
            let b = a + span;
            let wcross = rng.random_range(a - 2..=b + 1);
            let fcross = rng.random_range(a - 1..=b + 2);
            pairs.push(PairSpec {
                worker: w.clone(),
                firm: f.id.clone(),
                min_salary: a,
                max_salary: b,
                worker_valuation: valuation(&mut rng, a, b, wcross, false),
                firm_valuation: valuation(&mut rng, a, b, fcross, true),
            });
        }
    }
    InstanceFile { workers, firms, pairs }
}

/// Every pair at a single salary and strict preferences on both sides, with
/// unit quotas.
pub fn fixed_salary_instance(seed: u64, workers: RangeInclusive<usize>, firms: RangeInclusive<usize>) -> InstanceFile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nw = rng.random_range(workers);
    let nf = rng.random_range(firms);
    let workers: Vec<String> = (1..=nw).map(|i| format!("w{i}")).collect();
    let firm_ids: Vec<String> = (1..=nf).map(|j| format!("f{j}")).collect();
    let mut admissible = vec![vec![false; nf]; nw];
    for row in admissible.iter_mut() {
        for cell in row.iter_mut() {
            *cell = rng.random_bool(0.8);
        }
    }
    // distinct values per worker and per firm; a few negatives make some
    // pairs unacceptable
    let mut worker_vals = vec![vec![0.0; nf]; nw];
    for row in worker_vals.iter_mut() {
        let mut ranks: Vec<i64> = (0..nf as i64).collect();
        ranks.shuffle(&mut rng);
        let offset = rng.random_range(-1..=1);
        for (cell, r) in row.iter_mut().zip(ranks) {
            *cell = (r + offset) as f64;
        }
    }
    let mut firm_vals = vec![vec![0.0; nw]; nf];
    for row in firm_vals.iter_mut() {
        let mut ranks: Vec<i64> = (0..nw as i64).collect();
        ranks.shuffle(&mut rng);
        let offset = rng.random_range(-1..=1);
        for (cell, r) in row.iter_mut().zip(ranks) {
            *cell = (r + offset) as f64;
        }
    }
    let mut pairs = Vec::new();
    for i in 0..nw {
        for j in 0..nf {
            if !admissible[i][j] {
                continue;
            }
            let s = rng.random_range(0..=5);
            pairs.push(PairSpec {
                worker: workers[i].clone(),
                firm: firm_ids[j].clone(),
                min_salary: s,
                max_salary: s,
                worker_valuation: ValuationSpec::Table(BTreeMap::from([(s, worker_vals[i][j])])),
                firm_valuation: ValuationSpec::Table(BTreeMap::from([(s, firm_vals[j][i])])),
            });
        }
    }
    let firms = firm_ids.into_iter().map(|id| FirmSpec { id, quota: 1 }).collect();
    InstanceFile { workers, firms, pairs }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_instances_validate() {
        for seed in 0..300 {
            let raw = random_instance(seed, &GenConfig::default());
            raw.validate().unwrap_or_else(|e| panic!("seed {seed}: {e}"));
            let micro = random_instance(seed, &GenConfig::micro());
            let inst = micro.validate().unwrap();
            assert!(inst.total_salary_span() <= 12);
            assert!(inst.num_workers() <= 3 && inst.num_firms() <= 3);
            fixed_salary_instance(seed, 1..=6, 1..=4).validate().unwrap();
        }
    }

    #[test]
    fn deterministic() {
        let cfg = GenConfig::default();
        assert_eq!(random_instance(7, &cfg).to_json(), random_instance(7, &cfg).to_json());
        assert_ne!(random_instance(7, &cfg).to_json(), random_instance(8, &cfg).to_json());
    }
}
