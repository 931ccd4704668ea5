//! Instances, allocations, salary vectors and the payoff vectors `q`, `r`.
//!
//! Workers and firms are stored in lexicographic id order and addressed by
//! dense indices ([`WorkerId`], [`FirmId`]). Admissible pairs are sorted by
//! `(worker, firm)` and addressed by [`PairId`]; this ordering is what every
//! deterministic tie-break in the crate refers to.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Index, IndexMut};

use thiserror::Error;

use crate::format::{InstanceFile, ValuationSpec};
use crate::valuation::{Direction, Domain, ValuationError, ValuationFn};

macro_rules! index_newtype {
    ($name:ident) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub usize);

        impl $name {
            pub fn index(self) -> usize {
                self.0
            }
        }
    };
}

index_newtype!(WorkerId);
index_newtype!(FirmId);
index_newtype!(PairId);

#[derive(Debug, Clone, PartialEq)]
pub struct Firm {
    pub name: String,
    pub quota: usize,
}

/// An admissible worker-firm pair with its salary bounds and valuations.
#[derive(Debug, Clone, PartialEq)]
pub struct Pair {
    pub worker: WorkerId,
    pub firm: FirmId,
    pub min_salary: i64,
    pub max_salary: i64,
    /// Worker's valuation of the job at salary `z`, increasing.
    pub worker_val: ValuationFn,
    /// Firm's valuation of the hire when paying salary `z`, decreasing.
    pub firm_val: ValuationFn,
}

impl Pair {
    pub fn salary_range(&self) -> std::ops::RangeInclusive<i64> {
        self.min_salary..=self.max_salary
    }

    pub fn contains_salary(&self, z: i64) -> bool {
        self.min_salary <= z && z <= self.max_salary
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarketInstance {
    workers: Vec<String>,
    firms: Vec<Firm>,
    pairs: Vec<Pair>,
    by_worker: Vec<Vec<PairId>>,
    by_firm: Vec<Vec<PairId>>,
    lookup: HashMap<(WorkerId, FirmId), PairId>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("duplicate worker id '{0}'")]
    DuplicateWorker(String),
    #[error("duplicate firm id '{0}'")]
    DuplicateFirm(String),
    #[error("firm '{firm}' has quota {quota}; quotas must be at least 1")]
    Quota { firm: String, quota: i64 },
    #[error("pair ({worker}, {firm}) references undeclared worker")]
    UnknownWorker { worker: String, firm: String },
    #[error("pair ({worker}, {firm}) references undeclared firm")]
    UnknownFirm { worker: String, firm: String },
    #[error("pair ({worker}, {firm}) listed more than once")]
    DuplicatePair { worker: String, firm: String },
    #[error("pair ({worker}, {firm}) has min_salary {min} > max_salary {max}")]
    Bounds {
        worker: String,
        firm: String,
        min: i64,
        max: i64,
    },
    #[error("pair ({worker}, {firm}) {side} valuation: {source}")]
    Valuation {
        worker: String,
        firm: String,
        side: &'static str,
        source: ValuationError,
    },
}

/// Every problem found while validating an instance.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ValidationErrors(pub Vec<Violation>);

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violation(s)", self.0.len())?;
        for v in &self.0 {
            write!(f, "\n  - {v}")?;
        }
        Ok(())
    }
}

/// Validates raw instance data, collecting every violation rather than
/// stopping at the first.
pub fn validate_instance(raw: &InstanceFile) -> Result<MarketInstance, ValidationErrors> {
    let mut violations = Vec::new();

    let mut workers: Vec<String> = raw.workers.clone();
    workers.sort();
    for w in workers.windows(2) {
        if w[0] == w[1] {
            violations.push(Violation::DuplicateWorker(w[0].clone()));
        }
    }
    workers.dedup();

    let mut firms: Vec<Firm> = Vec::with_capacity(raw.firms.len());
    let mut raw_firms: Vec<_> = raw.firms.iter().collect();
    raw_firms.sort_by(|a, b| a.id.cmp(&b.id));
    for f in raw_firms {
        if firms.last().is_some_and(|last: &Firm| last.name == f.id) {
            violations.push(Violation::DuplicateFirm(f.id.clone()));
            continue;
        }
        if f.quota < 1 {
            violations.push(Violation::Quota {
                firm: f.id.clone(),
                quota: f.quota,
            });
        }
        firms.push(Firm {
            name: f.id.clone(),
            quota: f.quota.max(0) as usize,
        });
    }

    let worker_ix: HashMap<&str, WorkerId> = workers
        .iter()
        .enumerate()
        .map(|(k, w)| (w.as_str(), WorkerId(k)))
        .collect();
    let firm_ix: HashMap<&str, FirmId> = firms
        .iter()
        .enumerate()
        .map(|(k, f)| (f.name.as_str(), FirmId(k)))
        .collect();

    let mut seen = BTreeSet::new();
    let mut pairs = Vec::with_capacity(raw.pairs.len());
    for p in &raw.pairs {
        let ids = || (p.worker.clone(), p.firm.clone());
        let w = worker_ix.get(p.worker.as_str()).copied();
        let f = firm_ix.get(p.firm.as_str()).copied();
        if w.is_none() {
            let (worker, firm) = ids();
            violations.push(Violation::UnknownWorker { worker, firm });
        }
        if f.is_none() {
            let (worker, firm) = ids();
            violations.push(Violation::UnknownFirm { worker, firm });
        }
        if !seen.insert((p.worker.as_str(), p.firm.as_str())) {
            let (worker, firm) = ids();
            violations.push(Violation::DuplicatePair { worker, firm });
            continue;
        }
        if p.min_salary > p.max_salary {
            let (worker, firm) = ids();
            violations.push(Violation::Bounds {
                worker,
                firm,
                min: p.min_salary,
                max: p.max_salary,
            });
            continue;
        }
        let domain = Domain::new(p.min_salary, p.max_salary);
        let worker_val = build_valuation(&p.worker_valuation, domain, Direction::Increasing);
        let firm_val = build_valuation(&p.firm_valuation, domain, Direction::Decreasing);
        let (worker_val, firm_val) = match (worker_val, firm_val) {
            (Ok(a), Ok(b)) => (a, b),
            (a, b) => {
                for (side, res) in [("worker", a.err()), ("firm", b.err())] {
                    if let Some(source) = res {
                        let (worker, firm) = ids();
                        violations.push(Violation::Valuation {
                            worker,
                            firm,
                            side,
                            source,
                        });
                    }
                }
                continue;
            }
        };
        if let (Some(worker), Some(firm)) = (w, f) {
            pairs.push(Pair {
                worker,
                firm,
                min_salary: p.min_salary,
                max_salary: p.max_salary,
                worker_val,
                firm_val,
            });
        }
    }

    if !violations.is_empty() {
        return Err(ValidationErrors(violations));
    }
    Ok(MarketInstance::assemble(workers, firms, pairs))
}

fn build_valuation(spec: &ValuationSpec, domain: Domain, direction: Direction) -> Result<ValuationFn, ValuationError> {
    match spec {
        ValuationSpec::Expr(text) => ValuationFn::parse(text, domain, direction),
        ValuationSpec::Table(table) => ValuationFn::from_table(table.clone(), domain, direction),
    }
}

impl MarketInstance {
    fn assemble(workers: Vec<String>, firms: Vec<Firm>, mut pairs: Vec<Pair>) -> Self {
        pairs.sort_by_key(|p| (p.worker, p.firm));
        let mut by_worker = vec![Vec::new(); workers.len()];
        let mut by_firm = vec![Vec::new(); firms.len()];
        let mut lookup = HashMap::with_capacity(pairs.len());
        for (k, p) in pairs.iter().enumerate() {
            by_worker[p.worker.0].push(PairId(k));
            by_firm[p.firm.0].push(PairId(k));
            lookup.insert((p.worker, p.firm), PairId(k));
        }
        MarketInstance {
            workers,
            firms,
            pairs,
            by_worker,
            by_firm,
            lookup,
        }
    }

    pub fn num_workers(&self) -> usize {
        self.workers.len()
    }

    pub fn num_firms(&self) -> usize {
        self.firms.len()
    }

    pub fn num_pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn worker_ids(&self) -> impl Iterator<Item = WorkerId> + '_ {
        (0..self.workers.len()).map(WorkerId)
    }

    pub fn firm_ids(&self) -> impl Iterator<Item = FirmId> + '_ {
        (0..self.firms.len()).map(FirmId)
    }

    pub fn pair_ids(&self) -> impl Iterator<Item = PairId> + '_ {
        (0..self.pairs.len()).map(PairId)
    }

    pub fn worker_name(&self, w: WorkerId) -> &str {
        &self.workers[w.0]
    }

    pub fn firm(&self, f: FirmId) -> &Firm {
        &self.firms[f.0]
    }

    pub fn firm_name(&self, f: FirmId) -> &str {
        &self.firms[f.0].name
    }

    pub fn quota(&self, f: FirmId) -> usize {
        self.firms[f.0].quota
    }

    pub fn pair(&self, p: PairId) -> &Pair {
        &self.pairs[p.0]
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn pairs_of_worker(&self, w: WorkerId) -> &[PairId] {
        &self.by_worker[w.0]
    }

    pub fn pairs_of_firm(&self, f: FirmId) -> &[PairId] {
        &self.by_firm[f.0]
    }

    pub fn find_pair(&self, w: WorkerId, f: FirmId) -> Option<PairId> {
        self.lookup.get(&(w, f)).copied()
    }

    pub fn worker_by_name(&self, name: &str) -> Option<WorkerId> {
        self.workers
            .binary_search_by(|w| w.as_str().cmp(name))
            .ok()
            .map(WorkerId)
    }

    pub fn firm_by_name(&self, name: &str) -> Option<FirmId> {
        self.firms
            .binary_search_by(|f| f.name.as_str().cmp(name))
            .ok()
            .map(FirmId)
    }

    /// `(worker name, firm name)` of a pair.
    pub fn pair_names(&self, p: PairId) -> (&str, &str) {
        let pair = &self.pairs[p.0];
        (self.worker_name(pair.worker), self.firm_name(pair.firm))
    }

    /// Worker's value `f_ij(z)`.
    pub fn worker_value(&self, p: PairId, z: i64) -> f64 {
        self.pairs[p.0].worker_val.at(z)
    }

    /// Firm's value of hiring at salary `z`, i.e. `f_ji(-z)`.
    pub fn firm_value(&self, p: PairId, z: i64) -> f64 {
        self.pairs[p.0].firm_val.at(z)
    }

    /// Sum over pairs of `max_salary - min_salary`.
    pub fn total_salary_span(&self) -> i64 {
        self.pairs.iter().map(|p| p.max_salary - p.min_salary).sum()
    }
}

/// Salary `p_ij` for every admissible pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SalaryVector(pub Vec<i64>);

impl SalaryVector {
    pub fn is_feasible(&self, instance: &MarketInstance) -> bool {
        self.0.len() == instance.num_pairs() && instance.pairs().iter().zip(&self.0).all(|(p, &z)| p.contains_salary(z))
    }

    pub fn minimal(instance: &MarketInstance) -> Self {
        SalaryVector(instance.pairs().iter().map(|p| p.min_salary).collect())
    }
}

impl Index<PairId> for SalaryVector {
    type Output = i64;
    fn index(&self, p: PairId) -> &i64 {
        &self.0[p.0]
    }
}

impl IndexMut<PairId> for SalaryVector {
    fn index_mut(&mut self, p: PairId) -> &mut i64 {
        &mut self.0[p.0]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AllocationError {
    #[error("worker '{0}' assigned to more than one firm")]
    WorkerTwice(String),
    #[error("firm '{firm}' hires {hired} workers but its quota is {quota}")]
    OverQuota { firm: String, hired: usize, quota: usize },
}

/// A job allocation: each worker holds at most one pair, each firm at most
/// its quota.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JobAllocation {
    by_worker: Vec<Option<PairId>>,
}

impl JobAllocation {
    pub fn empty(instance: &MarketInstance) -> Self {
        JobAllocation {
            by_worker: vec![None; instance.num_workers()],
        }
    }

    pub fn from_pairs(
        instance: &MarketInstance,
        pairs: impl IntoIterator<Item = PairId>,
    ) -> Result<Self, AllocationError> {
        let mut alloc = Self::empty(instance);
        let mut load = vec![0usize; instance.num_firms()];
        for p in pairs {
            let pair = instance.pair(p);
            if alloc.by_worker[pair.worker.0].replace(p).is_some() {
                return Err(AllocationError::WorkerTwice(
                    instance.worker_name(pair.worker).to_string(),
                ));
            }
            load[pair.firm.0] += 1;
        }
        for f in instance.firm_ids() {
            if load[f.0] > instance.quota(f) {
                return Err(AllocationError::OverQuota {
                    firm: instance.firm_name(f).to_string(),
                    hired: load[f.0],
                    quota: instance.quota(f),
                });
            }
        }
        Ok(alloc)
    }

    pub fn pair_of(&self, w: WorkerId) -> Option<PairId> {
        self.by_worker[w.0]
    }

    pub fn contains(&self, instance: &MarketInstance, p: PairId) -> bool {
        self.by_worker[instance.pair(p).worker.0] == Some(p)
    }

    /// Matched pairs in `(worker, firm)` order.
    pub fn pairs(&self) -> impl Iterator<Item = PairId> + '_ {
        self.by_worker.iter().filter_map(|p| *p)
    }

    pub fn len(&self) -> usize {
        self.pairs().count()
    }

    pub fn is_empty(&self) -> bool {
        self.by_worker.iter().all(Option::is_none)
    }

    /// `S_j` as matched pairs.
    pub fn hires<'a>(&'a self, instance: &'a MarketInstance, f: FirmId) -> impl Iterator<Item = PairId> + 'a {
        self.pairs().filter(move |p| instance.pair(*p).firm == f)
    }

    pub fn occupancy(&self, instance: &MarketInstance) -> Vec<usize> {
        let mut load = vec![0; instance.num_firms()];
        for p in self.pairs() {
            load[instance.pair(p).firm.0] += 1;
        }
        load
    }

    /// `S_j` by firm, as worker ids.
    pub fn by_firm(&self, instance: &MarketInstance) -> BTreeMap<FirmId, Vec<WorkerId>> {
        let mut out: BTreeMap<FirmId, Vec<WorkerId>> = BTreeMap::new();
        for p in self.pairs() {
            let pair = instance.pair(p);
            out.entry(pair.firm).or_default().push(pair.worker);
        }
        out
    }
}

/// `q_i = f_ij(p_ij)` for the firm hiring `i`, `0` for unmatched workers.
pub fn payoff_q(allocation: &JobAllocation, salaries: &SalaryVector, instance: &MarketInstance) -> Vec<f64> {
    instance
        .worker_ids()
        .map(|w| match allocation.pair_of(w) {
            Some(p) => instance.worker_value(p, salaries[p]),
            None => 0.0,
        })
        .collect()
}

/// `r_j = min_{i in S_j} f_ji(-p_ij)` when `|S_j| = mu(j)`, otherwise `0`.
pub fn payoff_r(allocation: &JobAllocation, salaries: &SalaryVector, instance: &MarketInstance) -> Vec<f64> {
    let occupancy = allocation.occupancy(instance);
    instance
        .firm_ids()
        .map(|f| {
            if occupancy[f.0] != instance.quota(f) {
                return 0.0;
            }
            allocation
                .hires(instance, f)
                .map(|p| instance.firm_value(p, salaries[p]))
                .reduce(f64::min)
                .unwrap_or(0.0)
        })
        .collect()
}

/// An allocation with its salaries and the payoffs they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub allocation: JobAllocation,
    pub salaries: SalaryVector,
    pub worker_payoffs: Vec<f64>,
    pub firm_payoffs: Vec<f64>,
}

impl Outcome {
    pub fn new(instance: &MarketInstance, allocation: JobAllocation, salaries: SalaryVector) -> Self {
        let worker_payoffs = payoff_q(&allocation, &salaries, instance);
        let firm_payoffs = payoff_r(&allocation, &salaries, instance);
        Outcome {
            allocation,
            salaries,
            worker_payoffs,
            firm_payoffs,
        }
    }
}
