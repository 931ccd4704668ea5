//! The job allocation loop.
//!
//! Every pair starts at the highest salary its firm still accepts. Each
//! round, workers propose to the firms they like best at the current
//! salaries, firms pick their hires through [`solve_assignment`], and every
//! rejected proposal has its salary cut by the smallest integer that makes
//! the firm value it at least as much as its current worst hire. Pairs whose
//! cut would leave the salary range, or that the worker no longer accepts,
//! drop out for good. The loop ends once no proposal is rejected.
//!
//! With [`SolverConfig::assert_invariants`] set, every step re-checks the
//! structural invariants and the monotonicity properties the termination
//! and stability arguments rest on, and fails with
//! [`SolverError::Invariant`] if one breaks.

pub mod audit;
pub mod trace;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::assignment::{solve_assignment, AssignmentEdge, AssignmentError, AssignmentProblem};
use crate::market::{payoff_r, JobAllocation, MarketInstance, Outcome, Pair, PairId, SalaryVector};

pub use trace::{EventKind, TraceEvent};

/// How firms matched in the previous round constrain the next matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FloorRule {
    /// A firm keeps at least as many workers as it had.
    #[default]
    Occupancy,
    /// A firm that had workers keeps at least one.
    Nonempty,
}

/// Which favourite pairs count as rejected after a matching round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RejectionRule {
    /// Every favourite pair of a worker who ended up unmatched. A worker
    /// matched to one of several equally liked firms is not rejected by the
    /// others.
    #[default]
    UnmatchedWorker,
    /// Every favourite pair not in the allocation, including the unchosen
    /// ties of a matched worker.
    EveryUnchosen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    pub assert_invariants: bool,
    pub floor_rule: FloorRule,
    pub rejection: RejectionRule,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            assert_invariants: true,
            floor_rule: FloorRule::Occupancy,
            rejection: RejectionRule::UnmatchedWorker,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invariant violated at iteration {iteration}: {message}")]
    Invariant { iteration: u64, message: String },
    #[error("matching round failed at iteration {iteration}: {source}")]
    Assignment { iteration: u64, source: AssignmentError },
    #[error("solver already terminated")]
    Terminated,
    #[error("solver has not terminated yet")]
    NotTerminated,
}

/// Every live set of the algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    /// `p`.
    pub salaries: SalaryVector,
    /// `W0`: pairs the worker rejects at their salary.
    pub worker_unacceptable: BTreeSet<PairId>,
    /// `F0`: pairs the firm rejects, plus pairs whose salary cut ran out of
    /// range.
    pub firm_unacceptable: BTreeSet<PairId>,
    /// `E~ = E \ (W0 ∪ F0)`.
    pub acceptable: BTreeSet<PairId>,
    /// `q~`: each worker's best value over acceptable pairs; `None` when the
    /// worker has none.
    pub best_value: Vec<Option<f64>>,
    /// `E~_W`: acceptable pairs attaining `q~`.
    pub favourites: BTreeSet<PairId>,
    /// `E^_W`: favourites the firm values at least at `r`.
    pub proposals: BTreeSet<PairId>,
    /// Minimum occupancy per firm for the next matching.
    pub floors: Vec<usize>,
    pub allocation: JobAllocation,
    /// `r`.
    pub firm_payoffs: Vec<f64>,
    /// `U`.
    pub rejected: BTreeSet<PairId>,
    /// Completed salary-cut steps.
    pub iteration: u64,
    /// Matching rounds performed.
    pub rounds: u64,
}

impl SolverState {
    pub fn is_terminated(&self) -> bool {
        self.rejected.is_empty()
    }
}

/// Salaries, acceptability sets and favourites before the first matching.
pub fn init_state(instance: &MarketInstance) -> SolverState {
    let salaries = SalaryVector(
        instance
            .pairs()
            .iter()
            .map(|p| p.firm_val.greatest_arg_reaching(0.0).unwrap_or(p.min_salary))
            .collect(),
    );
    let mut state = SolverState {
        worker_unacceptable: BTreeSet::new(),
        firm_unacceptable: BTreeSet::new(),
        acceptable: BTreeSet::new(),
        best_value: vec![None; instance.num_workers()],
        favourites: BTreeSet::new(),
        proposals: BTreeSet::new(),
        floors: vec![0; instance.num_firms()],
        allocation: JobAllocation::empty(instance),
        firm_payoffs: vec![0.0; instance.num_firms()],
        rejected: BTreeSet::new(),
        iteration: 0,
        rounds: 0,
        salaries,
    };
    for p in instance.pair_ids() {
        let z = state.salaries[p];
        if instance.worker_value(p, z) < 0.0 {
            state.worker_unacceptable.insert(p);
        }
        if instance.firm_value(p, z) < 0.0 {
            state.firm_unacceptable.insert(p);
        }
    }
    refresh(instance, &mut state);
    state
}

/// Recomputes `E~`, `q~`, `E~_W` and `E^_W` from `p`, `W0`, `F0` and `r`.
fn refresh(instance: &MarketInstance, state: &mut SolverState) {
    state.acceptable = instance
        .pair_ids()
        .filter(|p| !state.worker_unacceptable.contains(p) && !state.firm_unacceptable.contains(p))
        .collect();
    state.best_value = instance
        .worker_ids()
        .map(|w| {
            instance
                .pairs_of_worker(w)
                .iter()
                .filter(|p| state.acceptable.contains(p))
                .map(|&p| instance.worker_value(p, state.salaries[p]))
                .reduce(f64::max)
        })
        .collect();
    state.favourites = state
        .acceptable
        .iter()
        .copied()
        .filter(|&p| {
            let w = instance.pair(p).worker;
            state.best_value[w.0] == Some(instance.worker_value(p, state.salaries[p]))
        })
        .collect();
    state.proposals = state
        .favourites
        .iter()
        .copied()
        .filter(|&p| instance.firm_value(p, state.salaries[p]) >= state.firm_payoffs[instance.pair(p).firm.0])
        .collect();
}

/// One matching round over `E^_W`, then `U`, `r` and the floors for the
/// next round.
pub fn propose_and_match(
    instance: &MarketInstance,
    state: &mut SolverState,
    config: &SolverConfig,
    trace: &mut Vec<TraceEvent>,
) -> Result<(), SolverError> {
    let edges: Vec<PairId> = state.proposals.iter().copied().collect();
    let problem = AssignmentProblem {
        num_workers: instance.num_workers(),
        quotas: instance.firm_ids().map(|f| instance.quota(f)).collect(),
        floors: state.floors.clone(),
        edges: edges
            .iter()
            .map(|&p| {
                let pair = instance.pair(p);
                AssignmentEdge {
                    worker: pair.worker.0,
                    firm: pair.firm.0,
                    weight: instance.firm_value(p, state.salaries[p]),
                    previous: state.allocation.contains(instance, p),
                }
            })
            .collect(),
    };
    let chosen = solve_assignment(&problem).map_err(|source| SolverError::Assignment {
        iteration: state.iteration,
        source,
    })?;
    let allocation =
        JobAllocation::from_pairs(instance, chosen.iter().map(|&k| edges[k])).map_err(|e| SolverError::Invariant {
            iteration: state.iteration,
            message: format!("matching round produced an invalid allocation: {e}"),
        })?;
    state.allocation = allocation;
    state.firm_payoffs = payoff_r(&state.allocation, &state.salaries, instance);
    let occupancy = state.allocation.occupancy(instance);
    state.floors = match config.floor_rule {
        FloorRule::Occupancy => occupancy,
        FloorRule::Nonempty => occupancy.into_iter().map(|n| n.min(1)).collect(),
    };
    state.rejected = state
        .favourites
        .iter()
        .copied()
        .filter(|&p| match config.rejection {
            RejectionRule::UnmatchedWorker => state.allocation.pair_of(instance.pair(p).worker).is_none(),
            RejectionRule::EveryUnchosen => !state.allocation.contains(instance, p),
        })
        .collect();
    state.rounds += 1;

    for p in state.allocation.pairs() {
        let (w, f) = instance.pair_names(p);
        trace.push(
            TraceEvent::new(state.iteration, EventKind::Match)
                .pair(w, f)
                .new_salary(state.salaries[p])
                .r(state.firm_payoffs[instance.pair(p).firm.0]),
        );
    }
    for &p in &state.rejected {
        let (w, f) = instance.pair_names(p);
        trace.push(
            TraceEvent::new(state.iteration, EventKind::Reject)
                .pair(w, f)
                .new_salary(state.salaries[p])
                .r(state.firm_payoffs[instance.pair(p).firm.0]),
        );
    }
    Ok(())
}

/// Smallest `m >= 1` with `g(p - m) >= r`, searched over `p - m` in
/// `[a, p - 1]`; `p - a + 1` when no such salary exists.
pub fn compute_salary_cut(pair: &Pair, salary: i64, firm_payoff: f64) -> i64 {
    match pair.firm_val.greatest_arg_reaching(firm_payoff) {
        Some(z) if z >= pair.min_salary => salary - z.min(salary - 1),
        _ => salary - pair.min_salary + 1,
    }
}

/// One salary cut, as recorded for auditing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cut {
    pub pair: PairId,
    pub old: i64,
    pub m: i64,
    pub new: i64,
    pub firm_payoff: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CutReport {
    pub cuts: Vec<Cut>,
    /// `L`.
    pub out_of_range: BTreeSet<PairId>,
    /// `W~0`.
    pub worker_dropped: BTreeSet<PairId>,
}

/// Cuts the salary of every rejected pair, prunes `L` into `F0` and `W~0`
/// into `W0`, and refreshes the derived sets.
pub fn update_salaries_and_prune(
    instance: &MarketInstance,
    state: &mut SolverState,
    trace: &mut Vec<TraceEvent>,
) -> CutReport {
    let mut report = CutReport::default();
    for &p in &state.rejected {
        let pair = instance.pair(p);
        let old = state.salaries[p];
        let r = state.firm_payoffs[pair.firm.0];
        let m = compute_salary_cut(pair, old, r);
        let new = pair.min_salary.max(old - m);
        state.salaries[p] = new;
        report.cuts.push(Cut {
            pair: p,
            old,
            m,
            new,
            firm_payoff: r,
        });
        if old - m < pair.min_salary {
            report.out_of_range.insert(p);
        }
        if instance.worker_value(p, new) < 0.0 {
            report.worker_dropped.insert(p);
        }
    }
    for cut in &report.cuts {
        let (w, f) = instance.pair_names(cut.pair);
        trace.push(
            TraceEvent::new(state.iteration, EventKind::SalaryCut)
                .pair(w, f)
                .old(cut.old)
                .new_salary(cut.new)
                .m(cut.m)
                .r(cut.firm_payoff),
        );
    }
    for cut in &report.cuts {
        let (w, f) = instance.pair_names(cut.pair);
        if report.out_of_range.contains(&cut.pair) {
            trace.push(
                TraceEvent::new(state.iteration, EventKind::PruneL)
                    .pair(w, f)
                    .new_salary(cut.new)
                    .r(cut.firm_payoff),
            );
        }
        if report.worker_dropped.contains(&cut.pair) {
            trace.push(
                TraceEvent::new(state.iteration, EventKind::PruneW0)
                    .pair(w, f)
                    .new_salary(cut.new),
            );
        }
    }
    state.firm_unacceptable.extend(report.out_of_range.iter().copied());
    state.worker_unacceptable.extend(report.worker_dropped.iter().copied());
    refresh(instance, state);
    report
}

/// Final result of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub outcome: Outcome,
    pub trace: Vec<TraceEvent>,
    /// Matching rounds performed.
    pub iterations: u64,
}

/// `|E| + Σ (b - a) + 1`: no run needs more matching rounds than this.
pub fn round_bound(instance: &MarketInstance) -> u64 {
    (instance.num_pairs() as i64 + instance.total_salary_span() + 1) as u64
}

/// A solver run that can be advanced one step at a time.
#[derive(Debug, Clone)]
pub struct Solver<'a> {
    instance: &'a MarketInstance,
    config: SolverConfig,
    state: SolverState,
    trace: Vec<TraceEvent>,
}

impl<'a> Solver<'a> {
    /// Initial salaries and sets, then the first matching round.
    pub fn start(instance: &'a MarketInstance, config: SolverConfig) -> Result<Self, SolverError> {
        let state = init_state(instance);
        let mut trace = Vec::new();
        for p in instance.pair_ids() {
            let (w, f) = instance.pair_names(p);
            trace.push(
                TraceEvent::new(0, EventKind::Init)
                    .pair(w, f)
                    .new_salary(state.salaries[p]),
            );
        }
        let mut solver = Solver {
            instance,
            config,
            state,
            trace,
        };
        if config.assert_invariants {
            solver.check_state()?;
        }
        if !solver.state.favourites.is_empty() {
            propose_and_match(instance, &mut solver.state, &config, &mut solver.trace)?;
            if config.assert_invariants {
                solver.check_state()?;
            }
        }
        solver.note_termination();
        Ok(solver)
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    pub fn is_terminated(&self) -> bool {
        self.state.is_terminated()
    }

    /// One cut-prune-rematch cycle.
    pub fn step(&mut self) -> Result<(), SolverError> {
        if self.is_terminated() {
            return Err(SolverError::Terminated);
        }
        let previous = self.config.assert_invariants.then(|| self.state.clone());
        self.state.iteration += 1;
        let report = update_salaries_and_prune(self.instance, &mut self.state, &mut self.trace);
        if self.config.assert_invariants {
            // the previous allocation must still be available
            if let Some(p) = self
                .state
                .allocation
                .pairs()
                .find(|p| !self.state.proposals.contains(p))
            {
                return Err(self.violation(format!(
                    "allocated pair {:?} left the proposal set",
                    self.instance.pair_names(p)
                )));
            }
        }
        propose_and_match(self.instance, &mut self.state, &self.config, &mut self.trace)?;
        if let Some(prev) = previous {
            self.check_state()?;
            self.check_transition(&prev, &report)?;
        }
        if self.state.rounds > round_bound(self.instance) {
            return Err(self.violation(format!(
                "round {} exceeds the bound {}",
                self.state.rounds,
                round_bound(self.instance)
            )));
        }
        self.note_termination();
        Ok(())
    }

    fn note_termination(&mut self) {
        if self.is_terminated() {
            self.trace
                .push(TraceEvent::new(self.state.iteration, EventKind::Terminate));
        }
    }

    /// Runs to termination.
    pub fn run_to_end(&mut self) -> Result<(), SolverError> {
        while !self.is_terminated() {
            self.step()?;
        }
        Ok(())
    }

    pub fn finish(self) -> Result<Solution, SolverError> {
        if !self.is_terminated() {
            return Err(SolverError::NotTerminated);
        }
        let outcome = Outcome::new(self.instance, self.state.allocation, self.state.salaries);
        Ok(Solution {
            outcome,
            trace: self.trace,
            iterations: self.state.rounds,
        })
    }

    fn violation(&self, message: String) -> SolverError {
        SolverError::Invariant {
            iteration: self.state.iteration,
            message,
        }
    }

    fn check_state(&self) -> Result<(), SolverError> {
        let inst = self.instance;
        let s = &self.state;
        if !s.salaries.is_feasible(inst) {
            return Err(self.violation("salary vector left its bounds".into()));
        }
        let expected: BTreeSet<PairId> = inst
            .pair_ids()
            .filter(|p| !s.worker_unacceptable.contains(p) && !s.firm_unacceptable.contains(p))
            .collect();
        if expected != s.acceptable {
            return Err(self.violation("acceptable set differs from E minus W0 and F0".into()));
        }
        for &p in &s.acceptable {
            let z = s.salaries[p];
            if inst.worker_value(p, z) < 0.0 || inst.firm_value(p, z) < 0.0 {
                return Err(self.violation(format!(
                    "acceptable pair {:?} is not mutually acceptable",
                    inst.pair_names(p)
                )));
            }
        }
        if !s.favourites.is_subset(&s.acceptable) {
            return Err(self.violation("favourites not within the acceptable set".into()));
        }
        if !s.proposals.is_subset(&s.favourites) {
            return Err(self.violation("proposals not within favourites".into()));
        }
        if !s.rejected.is_subset(&s.favourites) {
            return Err(self.violation("rejections not within favourites".into()));
        }
        if let Some(p) = s.allocation.pairs().find(|p| !s.proposals.contains(p)) {
            return Err(self.violation(format!("allocated pair {:?} is not a proposal", inst.pair_names(p))));
        }
        Ok(())
    }

    fn check_transition(&self, prev: &SolverState, report: &CutReport) -> Result<(), SolverError> {
        let inst = self.instance;
        let s = &self.state;
        for p in inst.pair_ids() {
            if s.salaries[p] > prev.salaries[p] {
                return Err(self.violation(format!("salary of {:?} increased", inst.pair_names(p))));
            }
        }
        for cut in &report.cuts {
            let pair = inst.pair(cut.pair);
            let names = inst.pair_names(cut.pair);
            let target = cut.old - cut.m;
            if cut.m < 1 {
                return Err(self.violation(format!("non-positive cut for {names:?}")));
            }
            if target >= pair.min_salary {
                if s.salaries[cut.pair] >= cut.old {
                    return Err(self.violation(format!("salary of rejected {names:?} did not fall")));
                }
                if pair.firm_val.at(target) < cut.firm_payoff {
                    return Err(self.violation(format!("cut for {names:?} leaves the firm below r")));
                }
                if cut.m > 1 && pair.firm_val.at(target + 1) >= cut.firm_payoff {
                    return Err(self.violation(format!("cut for {names:?} is not minimal")));
                }
            } else {
                if cut.new != pair.min_salary {
                    return Err(self.violation(format!("out-of-range {names:?} not clamped to min salary")));
                }
                if pair.firm_val.at(pair.min_salary) > cut.firm_payoff {
                    return Err(self.violation(format!("out-of-range {names:?} still worth more than r at min salary")));
                }
            }
        }
        if self.config.floor_rule == FloorRule::Occupancy {
            for f in inst.firm_ids() {
                if s.firm_payoffs[f.0] < prev.firm_payoffs[f.0] {
                    return Err(self.violation(format!("firm payoff of {} decreased", inst.firm_name(f))));
                }
            }
        }
        let pruned: BTreeSet<PairId> = report.out_of_range.union(&report.worker_dropped).copied().collect();
        let expected: BTreeSet<PairId> = prev.acceptable.difference(&pruned).copied().collect();
        if expected != s.acceptable {
            return Err(self.violation("acceptable set changed other than by pruning".into()));
        }
        let total = |v: &SalaryVector| v.0.iter().sum::<i64>();
        if total(&s.salaries) >= total(&prev.salaries) && pruned.is_empty() {
            return Err(self.violation("step made no progress".into()));
        }
        Ok(())
    }
}

/// Runs the algorithm to termination.
pub fn run(instance: &MarketInstance, config: SolverConfig) -> Result<Solution, SolverError> {
    let mut solver = Solver::start(instance, config)?;
    solver.run_to_end()?;
    solver.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::InstanceBuilder;
    use crate::market::{FirmId, WorkerId};

    fn one_by_one(worker_val: &str, firm_val: &str) -> MarketInstance {
        InstanceBuilder::new()
            .worker("i")
            .firm("A", 1)
            .pair("i", "A", 0, 5, worker_val, firm_val)
            .build()
            .unwrap()
    }

    fn competition() -> MarketInstance {
        InstanceBuilder::new()
            .worker("w1")
            .worker("w2")
            .firm("A", 1)
            .pair("w1", "A", 0, 3, "z", "3 - z")
            .pair("w2", "A", 0, 3, "z", "3 - z")
            .build()
            .unwrap()
    }

    #[test]
    fn init_examples() {
        let inst = one_by_one("z - 2", "4 - z");
        let s = init_state(&inst);
        assert_eq!(s.salaries.0, vec![4]);
        assert_eq!(s.acceptable, BTreeSet::from([PairId(0)]));
        assert_eq!(s.best_value, vec![Some(2.0)]);
        assert_eq!(s.proposals, s.favourites);

        let s = init_state(&one_by_one("z - 2", "-1 - z"));
        assert_eq!(s.salaries.0, vec![0]);
        assert!(s.firm_unacceptable.contains(&PairId(0)));
        assert!(s.acceptable.is_empty());

        let s = init_state(&one_by_one("z - 9", "4 - z"));
        assert_eq!(s.salaries.0, vec![4]);
        assert!(s.worker_unacceptable.contains(&PairId(0)));
        assert_eq!(s.best_value, vec![None]);
    }

    #[test]
    fn salary_cut_examples() {
        let inst = InstanceBuilder::new()
            .worker("i")
            .firm("A", 1)
            .firm("B", 1)
            .firm("C", 1)
            .pair("i", "A", 0, 5, "z", "4 - z")
            .pair("i", "B", 0, 4, "z", "16 - z^2")
            .pair("i", "C", 0, 3, "z", "3 - z")
            .build()
            .unwrap();
        assert_eq!(compute_salary_cut(inst.pair(PairId(0)), 4, 1.0), 1);
        assert_eq!(compute_salary_cut(inst.pair(PairId(1)), 4, 12.0), 2);
        assert_eq!(compute_salary_cut(inst.pair(PairId(2)), 3, 5.0), 4);
        // already at the floor of the range
        assert_eq!(compute_salary_cut(inst.pair(PairId(0)), 0, 0.0), 1);
    }

    #[test]
    fn salary_cut_matches_linear_scan() {
        let inst = InstanceBuilder::new()
            .worker("i")
            .firm("A", 1)
            .pair("i", "A", -3, 6, "z", "20 - 0.5*(z + 4)^2")
            .build()
            .unwrap();
        let pair = inst.pair(PairId(0));
        for p in -3..=6 {
            for r in [-100.0, 0.0, 0.5, 3.0, 7.5, 12.0, 19.5, 30.0] {
                let scan = (1..=p + 3).find(|&m| pair.firm_val.at(p - m) >= r).unwrap_or(p + 3 + 1);
                assert_eq!(compute_salary_cut(pair, p, r), scan, "p={p} r={r}");
            }
        }
    }

    #[test]
    fn propose_examples() {
        let cfg = SolverConfig::default();
        let inst = InstanceBuilder::new()
            .worker("w1")
            .worker("w2")
            .firm("A", 1)
            .pair("w1", "A", 0, 3, "z", "3 - z")
            .pair("w2", "A", 0, 3, "z", "3 - z")
            .build()
            .unwrap();
        let mut s = init_state(&inst);
        propose_and_match(&inst, &mut s, &cfg, &mut Vec::new()).unwrap();
        assert_eq!(s.allocation.pairs().collect::<Vec<_>>(), vec![PairId(0)]);
        assert_eq!(s.rejected, BTreeSet::from([PairId(1)]));
        assert_eq!(s.firm_payoffs, vec![0.0]);

        let inst = InstanceBuilder::new()
            .worker("w1")
            .worker("w2")
            .firm("A", 2)
            .pair("w1", "A", 0, 3, "z", "6 - z")
            .pair("w2", "A", 0, 3, "z", "8 - z")
            .build()
            .unwrap();
        let mut s = init_state(&inst);
        propose_and_match(&inst, &mut s, &cfg, &mut Vec::new()).unwrap();
        assert_eq!(s.allocation.len(), 2);
        assert!(s.rejected.is_empty());
        assert_eq!(s.firm_payoffs, vec![3.0]);

        let inst = one_by_one("z - 9", "4 - z");
        let mut s = init_state(&inst);
        propose_and_match(&inst, &mut s, &cfg, &mut Vec::new()).unwrap();
        assert!(s.allocation.is_empty() && s.rejected.is_empty());
    }

    #[test]
    fn update_examples() {
        let inst = competition();
        let mut s = init_state(&inst);
        let cfg = SolverConfig::default();
        propose_and_match(&inst, &mut s, &cfg, &mut Vec::new()).unwrap();
        let report = update_salaries_and_prune(&inst, &mut s, &mut Vec::new());
        // w2 cut 3 -> 2, w1 untouched
        assert_eq!(s.salaries.0, vec![3, 2]);
        assert_eq!(report.cuts.len(), 1);
        assert!(report.out_of_range.is_empty());

        // clamp at the range floor
        let mut s = init_state(&inst);
        s.salaries = SalaryVector(vec![3, 3]);
        s.firm_payoffs = vec![5.0];
        s.rejected = BTreeSet::from([PairId(1)]);
        let report = update_salaries_and_prune(&inst, &mut s, &mut Vec::new());
        assert_eq!(report.cuts[0].m, 4);
        assert_eq!(s.salaries.0, vec![3, 0]);
        assert!(s.firm_unacceptable.contains(&PairId(1)));
        assert!(!s.acceptable.contains(&PairId(1)));
    }

    #[test]
    fn one_by_one_run() {
        let inst = one_by_one("z - 2", "4 - z");
        let sol = run(&inst, SolverConfig::default()).unwrap();
        assert_eq!(sol.outcome.allocation.pairs().collect::<Vec<_>>(), vec![PairId(0)]);
        assert_eq!(sol.outcome.salaries.0, vec![4]);
        assert_eq!(sol.outcome.worker_payoffs, vec![2.0]);
        assert_eq!(sol.outcome.firm_payoffs, vec![0.0]);
        assert_eq!(sol.iterations, 1);
    }

    #[test]
    fn competition_run() {
        let inst = competition();
        let sol = run(&inst, SolverConfig::default()).unwrap();
        let by_firm = sol.outcome.allocation.by_firm(&inst);
        assert_eq!(by_firm[&FirmId(0)], vec![WorkerId(1)]);
        assert_eq!(sol.outcome.salaries[PairId(1)], 0);
        assert_eq!(sol.outcome.worker_payoffs, vec![0.0, 0.0]);
        assert_eq!(sol.outcome.firm_payoffs, vec![3.0]);
    }

    #[test]
    fn nothing_acceptable() {
        let inst = one_by_one("z - 9", "-1 - z");
        let sol = run(&inst, SolverConfig::default()).unwrap();
        assert!(sol.outcome.allocation.is_empty());
        assert_eq!(sol.iterations, 0);
        assert_eq!(sol.outcome.worker_payoffs, vec![0.0]);
        assert_eq!(sol.trace.last().unwrap().kind, EventKind::Terminate);
    }

    #[test]
    fn stepping() {
        let inst = competition();
        let mut solver = Solver::start(&inst, SolverConfig::default()).unwrap();
        assert_eq!(solver.state().salaries.0, vec![3, 3]);
        solver.step().unwrap();
        assert_eq!(solver.state().salaries.0, vec![3, 2]);
        solver.step().unwrap();
        let prefix = solver.trace().to_vec();
        let full = run(&inst, SolverConfig::default()).unwrap().trace;
        assert_eq!(&full[..prefix.len()], &prefix[..]);

        let solo = one_by_one("z - 2", "4 - z");
        let mut done = Solver::start(&solo, SolverConfig::default()).unwrap();
        assert!(done.is_terminated());
        assert_eq!(done.step(), Err(SolverError::Terminated));
    }

    #[test]
    fn finish_requires_termination() {
        let inst = competition();
        let solver = Solver::start(&inst, SolverConfig::default()).unwrap();
        assert!(matches!(solver.finish(), Err(SolverError::NotTerminated)));
    }
}
