use std::fs;
use std::path::PathBuf;

use jobmarket::format::{InstanceFile, OutcomeFile};
use jobmarket::gen::{fixed_salary_instance, random_instance, GenConfig};
use jobmarket::market::MarketInstance;
use jobmarket::solver::audit::audit_trace;
use jobmarket::solver::trace::{read_jsonl, write_jsonl};
use jobmarket::solver::{self, round_bound, FloorRule, RejectionRule, Solver, SolverConfig};
use jobmarket::verify::{
    check_ps2, check_stability, deferred_acceptance_reference, enumerate_stable_outcomes, is_stable_naive,
    EnumerationLimits, Ps2Domain, StableOutcome,
};
use proptest::prelude::*;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn load(name: &str) -> MarketInstance {
    InstanceFile::from_json(&fs::read_to_string(fixture(name)).unwrap())
        .unwrap()
        .validate()
        .unwrap()
}

#[test]
fn competition_golden_trace() {
    let inst = load("competition.json");
    let sol = solver::run(&inst, SolverConfig::default()).unwrap();
    let mut buf = Vec::new();
    write_jsonl(&mut buf, &sol.trace).unwrap();
    let golden = fs::read_to_string(fixture("competition.trace.jsonl")).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), golden);
    assert_eq!(read_jsonl(golden.as_bytes()).unwrap(), sol.trace);

    let file = OutcomeFile::from_outcome(&inst, &sol.outcome, sol.iterations, true);
    assert_eq!(file.matches[0].workers.len(), 1);
    assert_eq!(file.matches[0].workers[0].worker, "w2");
    assert_eq!(file.matches[0].workers[0].salary, 0);
    assert_eq!(file.worker_payoffs["w1"], 0.0);
    assert_eq!(file.worker_payoffs["w2"], 0.0);
    assert_eq!(file.firm_payoffs["A"], 3.0);
}

#[test]
fn tied_favourites_need_unmatched_worker_rule() {
    let inst = load("tied_favourites.json");
    let ours = solver::run(&inst, SolverConfig::default()).unwrap();
    assert!(check_stability(&inst, &ours.outcome, Ps2Domain::Unmatched).is_stable());

    let literal = SolverConfig {
        assert_invariants: false,
        rejection: RejectionRule::EveryUnchosen,
        ..SolverConfig::default()
    };
    let theirs = solver::run(&inst, literal).unwrap();
    let blocks = check_ps2(&inst, &theirs.outcome, Ps2Domain::Unmatched);
    assert_eq!(blocks.len(), 1);
    assert_eq!((blocks[0].worker.as_str(), blocks[0].firm.as_str()), ("w3", "f1"));
    // with assertions on, the clamp check catches it
    assert!(solver::run(
        &inst,
        SolverConfig {
            assert_invariants: true,
            ..literal
        }
    )
    .is_err());
}

#[test]
fn empty_market() {
    let inst = InstanceFile::from_json(r#"{"workers": [], "firms": [], "pairs": []}"#)
        .unwrap()
        .validate()
        .unwrap();
    let sol = solver::run(&inst, SolverConfig::default()).unwrap();
    assert_eq!(sol.iterations, 0);
    assert_eq!(sol.trace.len(), 1);
}

#[test]
fn stepping_matches_run() {
    for seed in 0..50 {
        let inst = random_instance(seed, &GenConfig::default()).validate().unwrap();
        let full = solver::run(&inst, SolverConfig::default()).unwrap();
        let mut s = Solver::start(&inst, SolverConfig::default()).unwrap();
        let mut steps = 0;
        while !s.is_terminated() && steps < 2 {
            s.step().unwrap();
            steps += 1;
        }
        assert_eq!(&full.trace[..s.trace().len()], s.trace());
    }
}

fn check_run(inst: &MarketInstance, cfg: SolverConfig) -> Result<(), TestCaseError> {
    let sol = solver::run(inst, cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(check_stability(inst, &sol.outcome, Ps2Domain::Unmatched).is_stable());
    prop_assert!(sol.iterations <= round_bound(inst));
    let audit = audit_trace(inst, &sol.trace, &cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(audit.rounds, sol.iterations);
    let file = OutcomeFile::from_outcome(inst, &sol.outcome, sol.iterations, true);
    let back = OutcomeFile::from_json(&file.to_json()).unwrap();
    prop_assert_eq!(&back, &file);
    prop_assert_eq!(back.to_outcome(inst).unwrap(), sol.outcome);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn runs_are_stable_audited_and_bounded(seed in any::<u64>()) {
        let inst = random_instance(seed, &GenConfig::default()).validate().unwrap();
        check_run(&inst, SolverConfig::default())?;
    }

    #[test]
    fn nonempty_floors_also_stable(seed in any::<u64>()) {
        let inst = random_instance(seed, &GenConfig::default()).validate().unwrap();
        check_run(&inst, SolverConfig { floor_rule: FloorRule::Nonempty, ..SolverConfig::default() })?;
    }

    #[test]
    fn deterministic(seed in any::<u64>()) {
        let inst = random_instance(seed, &GenConfig::default()).validate().unwrap();
        let a = solver::run(&inst, SolverConfig::default()).unwrap();
        let b = solver::run(&inst, SolverConfig { assert_invariants: false, ..SolverConfig::default() }).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn ps2_agrees_with_naive_scan(seed in any::<u64>(), pick in any::<u64>()) {
        // solver outcomes plus perturbed salaries, so both verdicts occur
        let inst = random_instance(seed, &GenConfig::default()).validate().unwrap();
        let mut outcome = solver::run(&inst, SolverConfig::default()).unwrap().outcome;
        let hires: Vec<_> = outcome.allocation.pairs().collect();
        if !hires.is_empty() {
            let p = hires[pick as usize % hires.len()];
            let pair = inst.pair(p);
            let span = pair.max_salary - pair.min_salary + 1;
            outcome.salaries[p] = pair.min_salary + (pick / 7 % span as u64) as i64;
            outcome = jobmarket::market::Outcome::new(&inst, outcome.allocation, outcome.salaries);
        }
        let hired: Vec<_> = outcome.allocation.pairs().map(|p| (p, outcome.salaries[p])).collect();
        for domain in [Ps2Domain::Unmatched, Ps2Domain::All] {
            let fast = check_stability(&inst, &outcome, domain).is_stable();
            prop_assert_eq!(fast, is_stable_naive(&inst, &hired, domain));
        }
    }

    #[test]
    fn enumeration_contains_solver_outcome(seed in any::<u64>()) {
        let inst = random_instance(seed, &GenConfig::micro()).validate().unwrap();
        let sol = solver::run(&inst, SolverConfig::default()).unwrap();
        let all = enumerate_stable_outcomes(&inst, EnumerationLimits::default(), Ps2Domain::Unmatched).unwrap();
        prop_assert!(all.contains(&StableOutcome::of(&sol.outcome)));
    }

    #[test]
    fn fixed_salaries_reduce_to_deferred_acceptance(seed in any::<u64>()) {
        let inst = fixed_salary_instance(seed, 1..=7, 1..=5).validate().unwrap();
        let sol = solver::run(&inst, SolverConfig::default()).unwrap();
        let da = deferred_acceptance_reference(&inst).unwrap();
        prop_assert_eq!(sol.outcome.allocation, da);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fixed_salaries_with_quotas_reduce_to_deferred_acceptance(seed in any::<u64>(), quotas in prop::collection::vec(1i64..=3, 5)) {
        let mut raw = fixed_salary_instance(seed, 1..=7, 1..=5);
        for (firm, q) in raw.firms.iter_mut().zip(quotas) {
            firm.quota = q;
        }
        let inst = raw.validate().unwrap();
        let sol = solver::run(&inst, SolverConfig::default()).unwrap();
        prop_assert_eq!(sol.outcome.allocation, deferred_acceptance_reference(&inst).unwrap());
    }
}
