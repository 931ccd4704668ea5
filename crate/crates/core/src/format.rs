//! JSON documents read and written by the CLI: instance files and outcome
//! files.
//!
//! Instance file:
//!
//! ```json
//! {
//!   "workers": ["w1", "w2"],
//!   "firms": [{"id": "A", "quota": 1}],
//!   "pairs": [
//!     {"worker": "w1", "firm": "A", "min_salary": 0, "max_salary": 3,
//!      "worker_valuation": "z", "firm_valuation": "3 - z"},
//!     {"worker": "w2", "firm": "A", "min_salary": 0, "max_salary": 2,
//!      "worker_valuation": {"0": -1, "1": 0.5, "2": 2},
//!      "firm_valuation": "3 - z"}
//!   ]
//! }
//! ```
//!
//! A valuation is either an expression string in `z` or a table object
//! keyed by every integer salary in `[min_salary, max_salary]`. Firm
//! valuations are functions of the salary paid and must be strictly
//! decreasing. Only listed pairs are admissible: a worker and a firm without
//! a pair entry can neither match nor block.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::market::{
    validate_instance, AllocationError, JobAllocation, MarketInstance, Outcome, SalaryVector, ValidationErrors,
};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub workers: Vec<String>,
    pub firms: Vec<FirmSpec>,
    pub pairs: Vec<PairSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirmSpec {
    pub id: String,
    pub quota: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSpec {
    pub worker: String,
    pub firm: String,
    pub min_salary: i64,
    pub max_salary: i64,
    pub worker_valuation: ValuationSpec,
    pub firm_valuation: ValuationSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Value", into = "Value")]
pub enum ValuationSpec {
    Expr(String),
    Table(BTreeMap<i64, f64>),
}

impl TryFrom<Value> for ValuationSpec {
    type Error = String;

    fn try_from(value: Value) -> Result<Self, Self::Error> {
        match value {
            Value::String(s) => Ok(ValuationSpec::Expr(s)),
            Value::Object(map) => {
                let mut table = BTreeMap::new();
                for (k, v) in map {
                    let z: i64 = k
                        .trim()
                        .parse()
                        .map_err(|_| format!("table key '{k}' is not an integer"))?;
                    let x = v
                        .as_f64()
                        .ok_or_else(|| format!("table value for {k} is not a number"))?;
                    if table.insert(z, x).is_some() {
                        return Err(format!("table key {z} repeated"));
                    }
                }
                Ok(ValuationSpec::Table(table))
            }
            other => Err(format!(
                "valuation must be an expression string or a table object, got {other}"
            )),
        }
    }
}

impl From<ValuationSpec> for Value {
    fn from(spec: ValuationSpec) -> Value {
        match spec {
            ValuationSpec::Expr(s) => Value::String(s),
            ValuationSpec::Table(t) => Value::Object(
                t.into_iter()
                    .map(|(z, v)| (z.to_string(), serde_json::json!(v)))
                    .collect(),
            ),
        }
    }
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<MarketInstance, ValidationErrors> {
        validate_instance(self)
    }
}

/// Incremental construction of instance files, mostly for tests.
#[derive(Debug, Clone, Default)]
pub struct InstanceBuilder {
    file: InstanceFile,
}

impl InstanceBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn worker(mut self, id: &str) -> Self {
        self.file.workers.push(id.to_string());
        self
    }

    pub fn firm(mut self, id: &str, quota: i64) -> Self {
        self.file.firms.push(FirmSpec {
            id: id.to_string(),
            quota,
        });
        self
    }

    pub fn pair(self, worker: &str, firm: &str, min: i64, max: i64, worker_val: &str, firm_val: &str) -> Self {
        self.pair_spec(
            worker,
            firm,
            min,
            max,
            ValuationSpec::Expr(worker_val.to_string()),
            ValuationSpec::Expr(firm_val.to_string()),
        )
    }

    pub fn pair_spec(
        mut self,
        worker: &str,
        firm: &str,
        min: i64,
        max: i64,
        worker_valuation: ValuationSpec,
        firm_valuation: ValuationSpec,
    ) -> Self {
        self.file.pairs.push(PairSpec {
            worker: worker.to_string(),
            firm: firm.to_string(),
            min_salary: min,
            max_salary: max,
            worker_valuation,
            firm_valuation,
        });
        self
    }

    pub fn file(self) -> InstanceFile {
        self.file
    }

    pub fn build(self) -> Result<MarketInstance, ValidationErrors> {
        validate_instance(&self.file)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeFile {
    pub matches: Vec<FirmMatches>,
    pub worker_payoffs: BTreeMap<String, f64>,
    pub firm_payoffs: BTreeMap<String, f64>,
    pub unmatched_workers: Vec<String>,
    pub iterations: u64,
    pub stable: bool,
    /// Full salary vector including unmatched pairs. Optional on input;
    /// missing entries default to the pair's `min_salary`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub salaries: Vec<PairSalary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirmMatches {
    pub firm: String,
    pub workers: Vec<Hire>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hire {
    pub worker: String,
    pub salary: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSalary {
    pub worker: String,
    pub firm: String,
    pub salary: i64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OutcomeFileError {
    #[error("unknown worker '{0}'")]
    UnknownWorker(String),
    #[error("unknown firm '{0}'")]
    UnknownFirm(String),
    #[error("({worker}, {firm}) is not an admissible pair")]
    NotAdmissible { worker: String, firm: String },
    #[error("salary {salary} for ({worker}, {firm}) outside [{min}, {max}]")]
    Infeasible {
        worker: String,
        firm: String,
        salary: i64,
        min: i64,
        max: i64,
    },
    #[error(transparent)]
    Allocation(#[from] AllocationError),
}

impl OutcomeFile {
    pub fn from_outcome(instance: &MarketInstance, outcome: &Outcome, iterations: u64, stable: bool) -> Self {
        let by_firm = outcome.allocation.by_firm(instance);
        let matches = instance
            .firm_ids()
            .map(|f| FirmMatches {
                firm: instance.firm_name(f).to_string(),
                workers: by_firm
                    .get(&f)
                    .into_iter()
                    .flatten()
                    .map(|&w| {
                        let p = instance.find_pair(w, f).expect("matched pair is admissible");
                        Hire {
                            worker: instance.worker_name(w).to_string(),
                            salary: outcome.salaries[p],
                        }
                    })
                    .collect(),
            })
            .collect();
        let worker_payoffs = instance
            .worker_ids()
            .map(|w| (instance.worker_name(w).to_string(), outcome.worker_payoffs[w.0]))
            .collect();
        let firm_payoffs = instance
            .firm_ids()
            .map(|f| (instance.firm_name(f).to_string(), outcome.firm_payoffs[f.0]))
            .collect();
        let unmatched_workers = instance
            .worker_ids()
            .filter(|w| outcome.allocation.pair_of(*w).is_none())
            .map(|w| instance.worker_name(w).to_string())
            .collect();
        let salaries = instance
            .pair_ids()
            .map(|p| {
                let (worker, firm) = instance.pair_names(p);
                PairSalary {
                    worker: worker.to_string(),
                    firm: firm.to_string(),
                    salary: outcome.salaries[p],
                }
            })
            .collect();
        OutcomeFile {
            matches,
            worker_payoffs,
            firm_payoffs,
            unmatched_workers,
            iterations,
            stable,
            salaries,
        }
    }

    /// Rebuilds the outcome against `instance`. Payoffs are recomputed from
    /// the allocation and salaries; the file's payoff entries are ignored.
    /// Salaries under `matches` take precedence over the `salaries` list.
    pub fn to_outcome(&self, instance: &MarketInstance) -> Result<Outcome, OutcomeFileError> {
        let mut salaries = SalaryVector::minimal(instance);
        let mut set_salary = |worker: &str, firm: &str, salary: i64| -> Result<_, OutcomeFileError> {
            let w = instance
                .worker_by_name(worker)
                .ok_or_else(|| OutcomeFileError::UnknownWorker(worker.to_string()))?;
            let f = instance
                .firm_by_name(firm)
                .ok_or_else(|| OutcomeFileError::UnknownFirm(firm.to_string()))?;
            let p = instance
                .find_pair(w, f)
                .ok_or_else(|| OutcomeFileError::NotAdmissible {
                    worker: worker.to_string(),
                    firm: firm.to_string(),
                })?;
            let pair = instance.pair(p);
            if !pair.contains_salary(salary) {
                return Err(OutcomeFileError::Infeasible {
                    worker: worker.to_string(),
                    firm: firm.to_string(),
                    salary,
                    min: pair.min_salary,
                    max: pair.max_salary,
                });
            }
            salaries[p] = salary;
            Ok(p)
        };
        for s in &self.salaries {
            set_salary(&s.worker, &s.firm, s.salary)?;
        }
        let mut matched = Vec::new();
        for m in &self.matches {
            for h in &m.workers {
                matched.push(set_salary(&h.worker, &m.firm, h.salary)?);
            }
        }
        for name in self.unmatched_workers.iter().chain(self.worker_payoffs.keys()) {
            instance
                .worker_by_name(name)
                .ok_or_else(|| OutcomeFileError::UnknownWorker(name.clone()))?;
        }
        for name in self.firm_payoffs.keys() {
            instance
                .firm_by_name(name)
                .ok_or_else(|| OutcomeFileError::UnknownFirm(name.clone()))?;
        }
        let allocation = JobAllocation::from_pairs(instance, matched)?;
        Ok(Outcome::new(instance, allocation, salaries))
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("outcome serializes");
        s.push('\n');
        s
    }
}
