//! Replays a trace against its instance and checks the properties every run
//! must have: minimal salary cuts, clamping and pruning exactly when due,
//! non-increasing salaries, non-decreasing firm payoffs and the round bound.
//!
//! The replay recomputes everything from the valuation functions with plain
//! linear scans and does not call into the solver.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::trace::{EventKind, TraceEvent};
use super::{FloorRule, SolverConfig};
use crate::market::{MarketInstance, PairId};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("trace event {index}: {message}")]
pub struct AuditError {
    pub index: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AuditSummary {
    pub rounds: u64,
    pub cuts: usize,
    pub out_of_range: usize,
    pub worker_dropped: usize,
}

struct Replay<'a> {
    instance: &'a MarketInstance,
    salaries: Vec<i64>,
    firm_payoffs: Vec<f64>,
    matched: BTreeSet<PairId>,
    rejected: BTreeSet<PairId>,
    dead: BTreeSet<PairId>,
}

fn fail<T>(index: usize, message: impl Into<String>) -> Result<T, AuditError> {
    Err(AuditError {
        index,
        message: message.into(),
    })
}

impl Replay<'_> {
    fn pair_of(&self, index: usize, e: &TraceEvent) -> Result<PairId, AuditError> {
        let Some((w, f)) = &e.pair else {
            return fail(index, "event without a pair");
        };
        let found = self
            .instance
            .worker_by_name(w)
            .zip(self.instance.firm_by_name(f))
            .and_then(|(w, f)| self.instance.find_pair(w, f));
        match found {
            Some(p) => Ok(p),
            None => fail(index, format!("unknown pair ({w}, {f})")),
        }
    }

    fn salary_of(&self, index: usize, e: &TraceEvent) -> Result<i64, AuditError> {
        match e.new.and_then(|v| v.as_i64()) {
            Some(z) => Ok(z),
            None => fail(index, "missing integer salary"),
        }
    }
}

/// Smallest `m` in `1..=p-a` with `g(p - m) >= r`, or `p - a + 1`.
fn scan_cut(instance: &MarketInstance, p: PairId, salary: i64, r: f64) -> i64 {
    let a = instance.pair(p).min_salary;
    (1..=salary - a)
        .find(|&m| instance.firm_value(p, salary - m) >= r)
        .unwrap_or(salary - a + 1)
}

fn initial_salary(instance: &MarketInstance, p: PairId) -> i64 {
    let pair = instance.pair(p);
    pair.salary_range()
        .rev()
        .find(|&z| instance.firm_value(p, z) >= 0.0)
        .unwrap_or(pair.min_salary)
}

pub fn audit_trace(
    instance: &MarketInstance,
    events: &[TraceEvent],
    config: &SolverConfig,
) -> Result<AuditSummary, AuditError> {
    let mut summary = AuditSummary::default();
    let mut replay = Replay {
        instance,
        salaries: vec![0; instance.num_pairs()],
        firm_payoffs: vec![0.0; instance.num_firms()],
        matched: BTreeSet::new(),
        rejected: BTreeSet::new(),
        dead: BTreeSet::new(),
    };
    let mut i = 0;

    // initial salaries, one per pair in pair order
    for p in instance.pair_ids() {
        let Some(e) = events.get(i) else {
            return fail(i, "trace ends before all initial salaries");
        };
        if e.kind != EventKind::Init || e.iter != 0 || replay.pair_of(i, e)? != p {
            return fail(i, format!("expected init for {:?}", instance.pair_names(p)));
        }
        let z = replay.salary_of(i, e)?;
        if z != initial_salary(instance, p) {
            return fail(i, format!("initial salary {z} is not the highest firm-acceptable one"));
        }
        replay.salaries[p.0] = z;
        if instance.worker_value(p, z) < 0.0 || instance.firm_value(p, z) < 0.0 {
            replay.dead.insert(p);
        }
        i += 1;
    }

    let mut iteration = 0u64;
    loop {
        // cuts for the previous round's rejections
        if iteration > 0 {
            let mut cut_pairs = BTreeSet::new();
            let mut pending_l = BTreeSet::new();
            let mut pending_w0 = BTreeSet::new();
            while let Some(e) = events.get(i).filter(|e| e.kind == EventKind::SalaryCut) {
                if e.iter != iteration {
                    return fail(i, "salary cut with the wrong iteration");
                }
                let p = replay.pair_of(i, e)?;
                let pair = instance.pair(p);
                let old = replay.salaries[p.0];
                if e.old.and_then(|v| v.as_i64()) != Some(old) {
                    return fail(i, format!("old salary differs from the replayed {old}"));
                }
                let r = replay.firm_payoffs[pair.firm.0];
                if e.r != Some(r) {
                    return fail(i, "cut reports a stale firm payoff");
                }
                let m = scan_cut(instance, p, old, r);
                if e.m != Some(m) {
                    return fail(i, format!("cut {:?} is not the minimal {m}", e.m));
                }
                let new = pair.min_salary.max(old - m);
                if replay.salary_of(i, e)? != new || new > old {
                    return fail(i, format!("new salary is not {new}"));
                }
                if old - m < pair.min_salary {
                    if instance.firm_value(p, pair.min_salary) > r {
                        return fail(i, "clamped pair still beats r at its minimum salary");
                    }
                    pending_l.insert(p);
                }
                if instance.worker_value(p, new) < 0.0 {
                    pending_w0.insert(p);
                }
                replay.salaries[p.0] = new;
                cut_pairs.insert(p);
                summary.cuts += 1;
                i += 1;
            }
            if cut_pairs != replay.rejected {
                return fail(i, "cut pairs differ from the rejected proposals");
            }
            let mut seen_l = BTreeSet::new();
            let mut seen_w0 = BTreeSet::new();
            while let Some(e) = events
                .get(i)
                .filter(|e| matches!(e.kind, EventKind::PruneL | EventKind::PruneW0))
            {
                let p = replay.pair_of(i, e)?;
                if replay.salary_of(i, e)? != replay.salaries[p.0] {
                    return fail(i, "pruned salary differs from the cut salary");
                }
                let fresh = if e.kind == EventKind::PruneL {
                    seen_l.insert(p)
                } else {
                    seen_w0.insert(p)
                };
                if !fresh {
                    return fail(i, "pair pruned twice");
                }
                i += 1;
            }
            if seen_l != pending_l {
                return fail(i, "out-of-range pairs differ from the clamped cuts");
            }
            if seen_w0 != pending_w0 {
                return fail(i, "worker-dropped pairs differ from the unacceptable cuts");
            }
            summary.out_of_range += seen_l.len();
            summary.worker_dropped += seen_w0.len();
            replay.dead.extend(seen_l);
            replay.dead.extend(seen_w0);
            for p in &replay.matched {
                if cut_pairs.contains(p) {
                    return fail(i, "matched pair had its salary cut");
                }
            }
        }

        // matching round
        let round_start = i;
        let mut matched = BTreeSet::new();
        let mut reported_r: BTreeMap<usize, f64> = BTreeMap::new();
        while let Some(e) = events.get(i).filter(|e| e.kind == EventKind::Match) {
            if e.iter != iteration {
                return fail(i, "match with the wrong iteration");
            }
            let p = replay.pair_of(i, e)?;
            if replay.dead.contains(&p) {
                return fail(i, "pruned pair matched");
            }
            if replay.salary_of(i, e)? != replay.salaries[p.0] {
                return fail(i, "matched at a salary other than the current one");
            }
            let Some(r) = e.r else {
                return fail(i, "match without r");
            };
            if let Some(prev) = reported_r.insert(instance.pair(p).firm.0, r) {
                if prev != r {
                    return fail(i, "inconsistent r within a firm");
                }
            }
            matched.insert(p);
            i += 1;
        }
        let mut rejected = BTreeSet::new();
        while let Some(e) = events.get(i).filter(|e| e.kind == EventKind::Reject) {
            let p = replay.pair_of(i, e)?;
            if matched.contains(&p) || replay.dead.contains(&p) {
                return fail(i, "rejected pair is matched or pruned");
            }
            rejected.insert(p);
            i += 1;
        }
        let had_round = i > round_start || iteration > 0;
        if had_round {
            summary.rounds += 1;
        }

        // payoffs of the round
        let mut occupancy = vec![0usize; instance.num_firms()];
        let mut worst = vec![f64::INFINITY; instance.num_firms()];
        let mut seen_workers = BTreeSet::new();
        for &p in &matched {
            let pair = instance.pair(p);
            if !seen_workers.insert(pair.worker) {
                return fail(round_start, "worker matched twice");
            }
            let z = replay.salaries[p.0];
            if instance.worker_value(p, z) < 0.0 || instance.firm_value(p, z) < 0.0 {
                return fail(round_start, "matched pair is not mutually acceptable");
            }
            occupancy[pair.firm.0] += 1;
            worst[pair.firm.0] = worst[pair.firm.0].min(instance.firm_value(p, z));
        }
        let mut payoffs = vec![0.0; instance.num_firms()];
        for f in instance.firm_ids() {
            if occupancy[f.0] > instance.quota(f) {
                return fail(round_start, format!("firm {} over quota", instance.firm_name(f)));
            }
            if occupancy[f.0] == instance.quota(f) {
                payoffs[f.0] = worst[f.0];
            }
            if let Some(&r) = reported_r.get(&f.0) {
                if r != payoffs[f.0] {
                    return fail(round_start, format!("reported r of {} is wrong", instance.firm_name(f)));
                }
            }
            if config.floor_rule == FloorRule::Occupancy && payoffs[f.0] < replay.firm_payoffs[f.0] {
                return fail(round_start, format!("r of {} decreased", instance.firm_name(f)));
            }
        }
        for &p in &matched {
            let pair = instance.pair(p);
            if instance.firm_value(p, replay.salaries[p.0]) < replay.firm_payoffs[pair.firm.0] {
                return fail(round_start, "matched pair below the firm's previous r");
            }
        }
        replay.firm_payoffs = payoffs;
        replay.matched = matched;
        replay.rejected = rejected;

        if replay.rejected.is_empty() {
            match events.get(i) {
                Some(e) if e.kind == EventKind::Terminate && e.iter == iteration => {}
                _ => return fail(i, "expected termination"),
            }
            if i + 1 != events.len() {
                return fail(i + 1, "events after termination");
            }
            break;
        }
        iteration += 1;
        let bound = (instance.num_pairs() as i64 + instance.total_salary_span() + 1) as u64;
        if summary.rounds > bound {
            return fail(i, format!("more than {bound} rounds"));
        }
    }
    Ok(summary)
}
