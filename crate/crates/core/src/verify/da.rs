//! Worker-proposing deferred acceptance for markets with fixed salaries.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::market::{FirmId, JobAllocation, MarketInstance, PairId, WorkerId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DaError {
    #[error("pair ({0}, {1}) has a salary range, not a fixed salary")]
    SalaryRange(String, String),
    #[error("{0} ranks two options equally")]
    Tie(String),
}

/// Deferred acceptance with quotas, every pair at its only salary. A pair is
/// acceptable when neither side values it below zero. Preferences must be
/// strict among acceptable options.
pub fn deferred_acceptance_reference(instance: &MarketInstance) -> Result<JobAllocation, DaError> {
    for p in instance.pair_ids() {
        let pair = instance.pair(p);
        if pair.min_salary != pair.max_salary {
            let (w, f) = instance.pair_names(p);
            return Err(DaError::SalaryRange(w.into(), f.into()));
        }
    }
    let worker_value = |p: PairId| instance.worker_value(p, instance.pair(p).min_salary);
    let firm_value = |p: PairId| instance.firm_value(p, instance.pair(p).min_salary);
    let acceptable = |p: PairId| worker_value(p) >= 0.0 && firm_value(p) >= 0.0;

    // each worker's acceptable pairs, best first
    let mut lists: Vec<Vec<PairId>> = Vec::new();
    for w in instance.worker_ids() {
        let mut list: Vec<PairId> = instance
            .pairs_of_worker(w)
            .iter()
            .copied()
            .filter(|&p| acceptable(p))
            .collect();
        list.sort_by(|&x, &y| worker_value(y).partial_cmp(&worker_value(x)).unwrap());
        if list.windows(2).any(|v| worker_value(v[0]) == worker_value(v[1])) {
            return Err(DaError::Tie(instance.worker_name(w).into()));
        }
        lists.push(list);
    }
    for f in instance.firm_ids() {
        let mut values: Vec<f64> = instance
            .pairs_of_firm(f)
            .iter()
            .copied()
            .filter(|&p| acceptable(p))
            .map(firm_value)
            .collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if values.windows(2).any(|v| v[0] == v[1]) {
            return Err(DaError::Tie(instance.firm_name(f).into()));
        }
    }

    let mut next = vec![0usize; instance.num_workers()];
    let mut held: Vec<Vec<PairId>> = vec![Vec::new(); instance.num_firms()];
    let mut free: BTreeSet<WorkerId> = instance.worker_ids().collect();
    while let Some(w) = free.pop_first() {
        let Some(&p) = lists[w.0].get(next[w.0]) else {
            continue;
        };
        next[w.0] += 1;
        let f: FirmId = instance.pair(p).firm;
        held[f.0].push(p);
        if held[f.0].len() > instance.quota(f) {
            let (k, _) = held[f.0]
                .iter()
                .enumerate()
                .min_by(|a, b| firm_value(*a.1).partial_cmp(&firm_value(*b.1)).unwrap())
                .unwrap();
            let dropped = held[f.0].swap_remove(k);
            free.insert(instance.pair(dropped).worker);
        }
    }
    let pairs: Vec<PairId> = held.into_iter().flatten().collect();
    Ok(JobAllocation::from_pairs(instance, pairs).expect("deferred acceptance respects quotas"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::InstanceBuilder;

    #[test]
    fn classic_two_by_two() {
        // workers prefer A, A prefers w2
        let inst = InstanceBuilder::new()
            .worker("w1")
            .worker("w2")
            .firm("A", 1)
            .firm("B", 1)
            .pair("w1", "A", 1, 1, "3 + z", "1 - z")
            .pair("w1", "B", 1, 1, "1 + z", "2 - z")
            .pair("w2", "A", 1, 1, "3 + z", "3 - z")
            .pair("w2", "B", 1, 1, "1 + z", "1 - z")
            .build()
            .unwrap();
        let m = deferred_acceptance_reference(&inst).unwrap();
        let hired: Vec<_> = m.pairs().map(|p| inst.pair_names(p)).collect();
        assert_eq!(hired, vec![("w1", "B"), ("w2", "A")]);
    }

    #[test]
    fn cyclic_preferences_give_worker_optimum() {
        // w1: A > B, w2: B > A; A: w2 > w1, B: w1 > w2
        let inst = InstanceBuilder::new()
            .worker("w1")
            .worker("w2")
            .firm("A", 1)
            .firm("B", 1)
            .pair("w1", "A", 0, 0, "2 + z", "1 - z")
            .pair("w1", "B", 0, 0, "1 + z", "2 - z")
            .pair("w2", "A", 0, 0, "1 + z", "2 - z")
            .pair("w2", "B", 0, 0, "2 + z", "1 - z")
            .build()
            .unwrap();
        let m = deferred_acceptance_reference(&inst).unwrap();
        let hired: Vec<_> = m.pairs().map(|p| inst.pair_names(p)).collect();
        assert_eq!(hired, vec![("w1", "A"), ("w2", "B")]);
    }

    #[test]
    fn unacceptable_everywhere_stays_single() {
        let inst = InstanceBuilder::new()
            .worker("w1")
            .worker("w2")
            .firm("A", 1)
            .pair("w1", "A", 0, 0, "-1 + z", "3 - z")
            .pair("w2", "A", 0, 0, "1 + z", "1 - z")
            .build()
            .unwrap();
        let m = deferred_acceptance_reference(&inst).unwrap();
        assert_eq!(m.pair_of(WorkerId(0)), None);
        assert_eq!(m.pair_of(WorkerId(1)), Some(PairId(1)));
    }

    #[test]
    fn rejects_ranges_and_ties() {
        let ranged = InstanceBuilder::new()
            .worker("w")
            .firm("A", 1)
            .pair("w", "A", 0, 1, "z", "1 - z")
            .build()
            .unwrap();
        assert!(matches!(
            deferred_acceptance_reference(&ranged),
            Err(DaError::SalaryRange(..))
        ));
        let tied = InstanceBuilder::new()
            .worker("w")
            .firm("A", 1)
            .firm("B", 1)
            .pair("w", "A", 1, 1, "z", "1 - z")
            .pair("w", "B", 1, 1, "z", "1 - z")
            .build()
            .unwrap();
        assert!(matches!(deferred_acceptance_reference(&tied), Err(DaError::Tie(_))));
    }
}
