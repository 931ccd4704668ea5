//! Stability checks and reference oracles.
//!
//! An outcome is stable when every matched pair is acceptable to both sides
//! at its salary and no admissible pair could agree on a salary that leaves
//! both strictly better off than their current payoffs.

mod da;
mod enumerate;

use serde::Serialize;

use crate::market::{MarketInstance, Outcome, PairId};

pub use da::{deferred_acceptance_reference, DaError};
pub use enumerate::{enumerate_stable_outcomes, is_stable_naive, EnumerationError, EnumerationLimits, StableOutcome};

/// Which pairs are searched for a blocking salary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ps2Domain {
    /// Pairs not in the allocation.
    #[default]
    Unmatched,
    /// Every admissible pair, including matched ones renegotiating.
    All,
}

/// A matched pair one side does not accept at its salary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ps1Violation {
    pub worker: String,
    pub firm: String,
    pub salary: i64,
    pub worker_value: f64,
    pub firm_value: f64,
}

/// A pair and salary at which both sides strictly gain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockingCertificate {
    pub worker: String,
    pub firm: String,
    pub salary: i64,
    pub worker_value: f64,
    pub firm_value: f64,
    pub worker_payoff: f64,
    pub firm_payoff: f64,
}

pub fn check_ps1(instance: &MarketInstance, outcome: &Outcome) -> Vec<Ps1Violation> {
    outcome
        .allocation
        .pairs()
        .filter_map(|p| {
            let z = outcome.salaries[p];
            let (f, g) = (instance.worker_value(p, z), instance.firm_value(p, z));
            (f < 0.0 || g < 0.0).then(|| {
                let (w, j) = instance.pair_names(p);
                Ps1Violation {
                    worker: w.to_string(),
                    firm: j.to_string(),
                    salary: z,
                    worker_value: f,
                    firm_value: g,
                }
            })
        })
        .collect()
}

/// The lowest blocking salary of `p`, if any.
pub fn blocking_salary(instance: &MarketInstance, outcome: &Outcome, p: PairId) -> Option<i64> {
    let pair = instance.pair(p);
    let q = outcome.worker_payoffs[pair.worker.0];
    let r = outcome.firm_payoffs[pair.firm.0];
    let lo = pair.worker_val.least_arg_exceeding(q)?;
    let hi = pair.firm_val.greatest_arg_exceeding(r)?;
    (lo <= hi).then_some(lo)
}

/// Every blocking pair in `domain`, each with its lowest blocking salary.
pub fn check_ps2(instance: &MarketInstance, outcome: &Outcome, domain: Ps2Domain) -> Vec<BlockingCertificate> {
    instance
        .pair_ids()
        .filter(|&p| domain == Ps2Domain::All || !outcome.allocation.contains(instance, p))
        .filter_map(|p| {
            let z = blocking_salary(instance, outcome, p)?;
            let pair = instance.pair(p);
            let (w, j) = instance.pair_names(p);
            Some(BlockingCertificate {
                worker: w.to_string(),
                firm: j.to_string(),
                salary: z,
                worker_value: instance.worker_value(p, z),
                firm_value: instance.firm_value(p, z),
                worker_payoff: outcome.worker_payoffs[pair.worker.0],
                firm_payoff: outcome.firm_payoffs[pair.firm.0],
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub ps1: Vec<Ps1Violation>,
    pub ps2: Vec<BlockingCertificate>,
}

impl StabilityReport {
    pub fn is_stable(&self) -> bool {
        self.ps1.is_empty() && self.ps2.is_empty()
    }
}

/// The report as one JSON object.
pub fn report_json(report: &StabilityReport) -> String {
    serde_json::to_string(report).expect("report serializes")
}

pub fn check_stability(instance: &MarketInstance, outcome: &Outcome, domain: Ps2Domain) -> StabilityReport {
    StabilityReport {
        ps1: check_ps1(instance, outcome),
        ps2: check_ps2(instance, outcome, domain),
    }
}
