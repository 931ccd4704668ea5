//! Brute force over every allocation and every salary of its matched pairs.

use thiserror::Error;

use crate::market::{MarketInstance, Outcome, PairId};

use super::Ps2Domain;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationLimits {
    pub max_workers: usize,
    pub max_firms: usize,
    pub max_total_span: i64,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        EnumerationLimits {
            max_workers: 3,
            max_firms: 3,
            max_total_span: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerationError {
    #[error("instance too large to enumerate: {0}")]
    TooLarge(String),
}

/// Matched pairs with their salaries, sorted by pair. Salaries of unmatched
/// pairs do not affect stability and are left out.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StableOutcome {
    pub hires: Vec<(PairId, i64)>,
}

impl StableOutcome {
    pub fn of(outcome: &Outcome) -> Self {
        let mut hires: Vec<_> = outcome.allocation.pairs().map(|p| (p, outcome.salaries[p])).collect();
        hires.sort();
        StableOutcome { hires }
    }
}

fn payoffs(instance: &MarketInstance, hires: &[(PairId, i64)]) -> (Vec<f64>, Vec<f64>) {
    let mut q = vec![0.0; instance.num_workers()];
    let mut count = vec![0usize; instance.num_firms()];
    let mut worst = vec![f64::INFINITY; instance.num_firms()];
    for &(p, z) in hires {
        let pair = instance.pair(p);
        q[pair.worker.0] = pair.worker_val.at(z);
        count[pair.firm.0] += 1;
        worst[pair.firm.0] = worst[pair.firm.0].min(pair.firm_val.at(z));
    }
    let r = instance
        .firm_ids()
        .map(|f| {
            if count[f.0] == instance.quota(f) {
                worst[f.0]
            } else {
                0.0
            }
        })
        .collect();
    (q, r)
}

/// Stability by linear scan of every salary of every candidate pair.
pub fn is_stable_naive(instance: &MarketInstance, hires: &[(PairId, i64)], domain: Ps2Domain) -> bool {
    for &(p, z) in hires {
        let pair = instance.pair(p);
        if pair.worker_val.at(z) < 0.0 || pair.firm_val.at(z) < 0.0 {
            return false;
        }
    }
    let (q, r) = payoffs(instance, hires);
    instance.pair_ids().all(|p| {
        if domain == Ps2Domain::Unmatched && hires.iter().any(|&(h, _)| h == p) {
            return true;
        }
        let pair = instance.pair(p);
        !pair
            .salary_range()
            .any(|t| pair.worker_val.at(t) > q[pair.worker.0] && pair.firm_val.at(t) > r[pair.firm.0])
    })
}

/// Every stable outcome of a small instance, sorted.
pub fn enumerate_stable_outcomes(
    instance: &MarketInstance,
    limits: EnumerationLimits,
    domain: Ps2Domain,
) -> Result<Vec<StableOutcome>, EnumerationError> {
    if instance.num_workers() > limits.max_workers {
        return Err(EnumerationError::TooLarge(format!(
            "{} workers",
            instance.num_workers()
        )));
    }
    if instance.num_firms() > limits.max_firms {
        return Err(EnumerationError::TooLarge(format!("{} firms", instance.num_firms())));
    }
    if instance.total_salary_span() > limits.max_total_span {
        return Err(EnumerationError::TooLarge(format!(
            "total salary span {}",
            instance.total_salary_span()
        )));
    }
    let mut found = Vec::new();
    let mut hires = Vec::new();
    let mut load = vec![0usize; instance.num_firms()];
    walk(instance, 0, &mut hires, &mut load, domain, &mut found);
    found.sort();
    Ok(found)
}

fn walk(
    instance: &MarketInstance,
    worker: usize,
    hires: &mut Vec<(PairId, i64)>,
    load: &mut [usize],
    domain: Ps2Domain,
    found: &mut Vec<StableOutcome>,
) {
    if worker == instance.num_workers() {
        if is_stable_naive(instance, hires, domain) {
            let mut h = hires.clone();
            h.sort();
            found.push(StableOutcome { hires: h });
        }
        return;
    }
    walk(instance, worker + 1, hires, load, domain, found);
    for &p in instance.pairs_of_worker(crate::market::WorkerId(worker)) {
        let pair = instance.pair(p);
        if load[pair.firm.0] == instance.quota(pair.firm) {
            continue;
        }
        load[pair.firm.0] += 1;
        for z in pair.salary_range() {
            hires.push((p, z));
            walk(instance, worker + 1, hires, load, domain, found);
            hires.pop();
        }
        load[pair.firm.0] -= 1;
    }
}
