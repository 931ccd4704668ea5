//! Degree-constrained bipartite matching with firm floors.
//!
//! Workers have capacity one, firm `j` takes between `floor[j]` and
//! `quota[j]` workers. Among allocations meeting every floor the engine
//! maximizes, in order:
//!
//! 1. the number of matched workers,
//! 2. the total edge weight,
//! 3. the number of edges flagged `previous`,
//! 4. a bonus that prefers edges earlier in `(worker, firm)` order.
//!
//! Items 3 and 4 are tie-breaks only. Item 4 gives the `k`-th edge in
//! `(worker, firm)` order a bonus of `2^(125-k)`, so the chosen set is the
//! lexicographically first one among the remaining ties; edges past index
//! 125 get no bonus and their ties fall back to the solver's fixed
//! relaxation order.
//!
//! The problem is solved as a min-cost max-flow with successive shortest
//! paths. Costs are lexicographic tuples, so the objectives never have to be
//! blended with big-M scaling. Floors are encoded by splitting each firm's
//! sink arc into a floor arc carrying a unit reward in the most significant
//! cost component and a zero-cost overflow arc.

use std::cmp::Ordering;
use std::ops::{Add, Neg, Sub};

use thiserror::Error;

const ORDER_BITS: usize = 126;

/// Weights are checked finite; `-0.0` and `0.0` must compare equal.
fn cmp_f64(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).expect("finite weights")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssignmentEdge {
    pub worker: usize,
    pub firm: usize,
    pub weight: f64,
    /// Edge belongs to the previous allocation.
    pub previous: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentProblem {
    pub num_workers: usize,
    pub quotas: Vec<usize>,
    pub floors: Vec<usize>,
    pub edges: Vec<AssignmentEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssignmentError {
    #[error("floor {floor} of firm {firm} exceeds its quota {quota}")]
    FloorAboveQuota { firm: usize, floor: usize, quota: usize },
    #[error("edge ({worker}, {firm}) listed twice")]
    DuplicateEdge { worker: usize, firm: usize },
    #[error("edge ({worker}, {firm}) references a missing worker or firm")]
    EdgeOutOfRange { worker: usize, firm: usize },
    #[error("edge ({worker}, {firm}) has non-finite weight")]
    NonFiniteWeight { worker: usize, firm: usize },
    #[error("no allocation meets every firm floor (short by {missing})")]
    InfeasibleFloors { missing: usize },
}

/// Lexicographic value of a selection; larger is better.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub floor_units: usize,
    pub cardinality: usize,
    pub weight: f64,
    pub kept: usize,
    pub order: i128,
}

impl Score {
    /// The part of the score the matching conditions constrain: floor
    /// satisfaction, then cardinality, then weight.
    pub fn primary(&self) -> (usize, usize, f64) {
        (self.floor_units, self.cardinality, self.weight)
    }

    pub fn cmp_primary(&self, other: &Score) -> Ordering {
        self.floor_units
            .cmp(&other.floor_units)
            .then(self.cardinality.cmp(&other.cardinality))
            .then(cmp_f64(self.weight, other.weight))
    }

    pub fn cmp_full(&self, other: &Score) -> Ordering {
        self.cmp_primary(other)
            .then(self.kept.cmp(&other.kept))
            .then(self.order.cmp(&other.order))
    }
}

impl AssignmentProblem {
    pub fn num_firms(&self) -> usize {
        self.quotas.len()
    }

    pub fn check(&self) -> Result<(), AssignmentError> {
        for (firm, (&floor, &quota)) in self.floors.iter().zip(&self.quotas).enumerate() {
            if floor > quota {
                return Err(AssignmentError::FloorAboveQuota { firm, floor, quota });
            }
        }
        let mut seen = std::collections::HashSet::new();
        for e in &self.edges {
            if e.worker >= self.num_workers || e.firm >= self.num_firms() {
                return Err(AssignmentError::EdgeOutOfRange {
                    worker: e.worker,
                    firm: e.firm,
                });
            }
            if !e.weight.is_finite() {
                return Err(AssignmentError::NonFiniteWeight {
                    worker: e.worker,
                    firm: e.firm,
                });
            }
            if !seen.insert((e.worker, e.firm)) {
                return Err(AssignmentError::DuplicateEdge {
                    worker: e.worker,
                    firm: e.firm,
                });
            }
        }
        Ok(())
    }

    /// Rank of every edge in `(worker, firm)` order.
    fn ranks(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.edges.len()).collect();
        idx.sort_by_key(|&k| (self.edges[k].worker, self.edges[k].firm));
        let mut rank = vec![0; self.edges.len()];
        for (r, k) in idx.into_iter().enumerate() {
            rank[k] = r;
        }
        rank
    }

    fn order_bonus(rank: usize) -> i128 {
        if rank < ORDER_BITS {
            1i128 << (ORDER_BITS - 1 - rank)
        } else {
            0
        }
    }

    /// Scores a selection of edge indices. Does not check feasibility.
    pub fn score(&self, selection: &[usize]) -> Score {
        let ranks = self.ranks();
        let mut load = vec![0usize; self.num_firms()];
        let mut weight = 0.0;
        let mut kept = 0;
        let mut order = 0i128;
        let mut sorted = selection.to_vec();
        sorted.sort_unstable();
        for &k in &sorted {
            let e = &self.edges[k];
            load[e.firm] += 1;
            weight += e.weight;
            kept += usize::from(e.previous);
            order += Self::order_bonus(ranks[k]);
        }
        let floor_units = load.iter().zip(&self.floors).map(|(&l, &f)| l.min(f)).sum();
        Score {
            floor_units,
            cardinality: selection.len(),
            weight,
            kept,
            order,
        }
    }

    /// Whether `selection` respects worker capacity one and firm quotas.
    pub fn is_allocation(&self, selection: &[usize]) -> bool {
        let mut worker_used = vec![false; self.num_workers];
        let mut load = vec![0usize; self.num_firms()];
        for &k in selection {
            let Some(e) = self.edges.get(k) else { return false };
            if std::mem::replace(&mut worker_used[e.worker], true) {
                return false;
            }
            load[e.firm] += 1;
        }
        load.iter().zip(&self.quotas).all(|(l, q)| l <= q)
    }

    pub fn floors_met(&self, selection: &[usize]) -> bool {
        let mut load = vec![0usize; self.num_firms()];
        for &k in selection {
            load[self.edges[k].firm] += 1;
        }
        load.iter().zip(&self.floors).all(|(l, f)| l >= f)
    }
}

/// Lexicographic flow cost. Smaller is better; every component is the
/// negation of the matching objective it encodes.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Cost {
    floor: i64,
    weight: f64,
    kept: i64,
    order: i128,
}

impl Cost {
    const ZERO: Cost = Cost {
        floor: 0,
        weight: 0.0,
        kept: 0,
        order: 0,
    };

    fn lex_cmp(&self, other: &Cost) -> Ordering {
        self.floor
            .cmp(&other.floor)
            .then(cmp_f64(self.weight, other.weight))
            .then(self.kept.cmp(&other.kept))
            .then(self.order.cmp(&other.order))
    }

    fn less(&self, other: &Cost) -> bool {
        self.lex_cmp(other) == Ordering::Less
    }
}

impl Add for Cost {
    type Output = Cost;
    fn add(self, o: Cost) -> Cost {
        Cost {
            floor: self.floor + o.floor,
            weight: self.weight + o.weight,
            kept: self.kept + o.kept,
            order: self.order + o.order,
        }
    }
}

impl Neg for Cost {
    type Output = Cost;
    fn neg(self) -> Cost {
        Cost {
            floor: -self.floor,
            weight: -self.weight,
            kept: -self.kept,
            order: -self.order,
        }
    }
}

impl Sub for Cost {
    type Output = Cost;
    fn sub(self, o: Cost) -> Cost {
        self + (-o)
    }
}

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: i64,
    cost: Cost,
}

/// Residual network; arcs are stored in pairs so `k ^ 1` is the reverse.
#[derive(Debug, Clone, Default)]
struct Network {
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
}

impl Network {
    fn with_nodes(n: usize) -> Self {
        Network {
            arcs: Vec::new(),
            out: vec![Vec::new(); n],
        }
    }

    fn add(&mut self, from: usize, to: usize, cap: i64, cost: Cost) -> usize {
        let k = self.arcs.len();
        self.arcs.push(Arc { to, cap, cost });
        self.arcs.push(Arc {
            to: from,
            cap: 0,
            cost: -cost,
        });
        self.out[from].push(k);
        self.out[to].push(k + 1);
        k
    }

    fn push(&mut self, arc: usize, amount: i64) {
        self.arcs[arc].cap -= amount;
        self.arcs[arc ^ 1].cap += amount;
    }

    /// Bellman-Ford from `source`. Returns, per node, the arc used to reach
    /// it on a cheapest path.
    fn shortest_paths(&self, source: usize) -> (Vec<Option<Cost>>, Vec<Option<usize>>) {
        let n = self.out.len();
        let mut dist: Vec<Option<Cost>> = vec![None; n];
        let mut via: Vec<Option<usize>> = vec![None; n];
        dist[source] = Some(Cost::ZERO);
        for _ in 0..n {
            let mut changed = false;
            for u in 0..n {
                let Some(du) = dist[u] else { continue };
                for &k in &self.out[u] {
                    let arc = &self.arcs[k];
                    if arc.cap <= 0 {
                        continue;
                    }
                    let cand = du + arc.cost;
                    if dist[arc.to].is_none_or(|d| cand.less(&d)) {
                        dist[arc.to] = Some(cand);
                        via[arc.to] = Some(k);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        (dist, via)
    }
}

struct Layout {
    source: usize,
    sink: usize,
    /// Arc index of each problem edge.
    edge_arcs: Vec<usize>,
    floor_arcs: Vec<usize>,
}

fn build_network(problem: &AssignmentProblem, selection: Option<&[usize]>) -> (Network, Layout) {
    let n = problem.num_workers;
    let m = problem.num_firms();
    let source = 0;
    let sink = n + m + 1;
    let worker_node = |w: usize| 1 + w;
    let firm_node = |f: usize| 1 + n + f;
    let mut net = Network::with_nodes(n + m + 2);
    let mut source_arcs = Vec::with_capacity(n);
    for w in 0..n {
        source_arcs.push(net.add(source, worker_node(w), 1, Cost::ZERO));
    }
    let ranks = problem.ranks();
    let mut order: Vec<usize> = (0..problem.edges.len()).collect();
    order.sort_by_key(|&k| ranks[k]);
    let mut edge_arcs = vec![0; problem.edges.len()];
    for k in order {
        let e = &problem.edges[k];
        let cost = Cost {
            floor: 0,
            weight: -e.weight,
            kept: -i64::from(e.previous),
            order: -AssignmentProblem::order_bonus(ranks[k]),
        };
        edge_arcs[k] = net.add(worker_node(e.worker), firm_node(e.firm), 1, cost);
    }
    let mut floor_arcs = Vec::with_capacity(m);
    let mut extra_arcs = Vec::with_capacity(m);
    for f in 0..m {
        let floor = problem.floors[f] as i64;
        let quota = problem.quotas[f] as i64;
        let reward = Cost {
            floor: -1,
            ..Cost::ZERO
        };
        floor_arcs.push(net.add(firm_node(f), sink, floor, reward));
        extra_arcs.push(net.add(firm_node(f), sink, quota - floor, Cost::ZERO));
    }
    if let Some(sel) = selection {
        let mut load = vec![0i64; m];
        for &k in sel {
            let e = &problem.edges[k];
            net.push(source_arcs[e.worker], 1);
            net.push(edge_arcs[k], 1);
            load[e.firm] += 1;
        }
        for f in 0..m {
            let on_floor = load[f].min(problem.floors[f] as i64);
            net.push(floor_arcs[f], on_floor);
            net.push(extra_arcs[f], load[f] - on_floor);
        }
    }
    (
        net,
        Layout {
            source,
            sink,
            edge_arcs,
            floor_arcs,
        },
    )
}

/// Solves the problem and returns the chosen edge indices in ascending
/// order.
pub fn solve_assignment(problem: &AssignmentProblem) -> Result<Vec<usize>, AssignmentError> {
    problem.check()?;
    let (mut net, layout) = build_network(problem, None);
    loop {
        let (dist, via) = net.shortest_paths(layout.source);
        if dist[layout.sink].is_none() {
            break;
        }
        let mut node = layout.sink;
        while node != layout.source {
            let k = via[node].expect("path reaches the sink");
            net.push(k, 1);
            node = net.arcs[k ^ 1].to;
        }
    }
    let floor_units: i64 = layout.floor_arcs.iter().map(|&k| net.arcs[k ^ 1].cap).sum();
    let required: usize = problem.floors.iter().sum();
    if (floor_units as usize) < required {
        return Err(AssignmentError::InfeasibleFloors {
            missing: required - floor_units as usize,
        });
    }
    let chosen = (0..problem.edges.len())
        .filter(|&k| net.arcs[layout.edge_arcs[k]].cap == 0)
        .collect();
    Ok(chosen)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssignmentViolation {
    #[error("selection is not an allocation (worker used twice, quota exceeded, or bad edge index)")]
    NotAnAllocation,
    #[error("floors not met")]
    Floors,
    #[error("cardinality {found} below the maximum {best}")]
    Cardinality { found: usize, best: usize },
    #[error("weight {found} below the best attainable {best}")]
    Weight { found: f64, best: f64 },
    #[error("an exchange cycle raises the weight")]
    ImprovingExchange,
}

/// Edge-count limit up to which weight optimality is checked by
/// enumeration.
pub const ENUMERATION_LIMIT: usize = 20;

/// Checks a selection against the matching conditions: floors met,
/// maximum cardinality, maximum weight. Weight is checked by exhaustive
/// enumeration for small problems and by the absence of an improving
/// exchange cycle otherwise.
pub fn verify_assignment_conditions(
    problem: &AssignmentProblem,
    selection: &[usize],
) -> Result<(), AssignmentViolation> {
    if !problem.is_allocation(selection) {
        return Err(AssignmentViolation::NotAnAllocation);
    }
    if !problem.floors_met(selection) {
        return Err(AssignmentViolation::Floors);
    }
    let best = max_cardinality(problem);
    if selection.len() < best {
        return Err(AssignmentViolation::Cardinality {
            found: selection.len(),
            best,
        });
    }
    if problem.edges.len() <= ENUMERATION_LIMIT {
        let found = problem.score(selection);
        if let Some(top) = enumerate_best(problem) {
            let top_score = problem.score(&top);
            if found.weight < top_score.weight {
                return Err(AssignmentViolation::Weight {
                    found: found.weight,
                    best: top_score.weight,
                });
            }
        }
        Ok(())
    } else if has_improving_cycle(problem, selection) {
        Err(AssignmentViolation::ImprovingExchange)
    } else {
        Ok(())
    }
}

/// Maximum number of workers any allocation can place, ignoring floors.
/// Plain augmenting-path search, independent of the cost machinery.
pub fn max_cardinality(problem: &AssignmentProblem) -> usize {
    let m = problem.num_firms();
    let mut adj = vec![Vec::new(); problem.num_workers];
    for e in &problem.edges {
        adj[e.worker].push(e.firm);
    }
    let mut hired: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut size = 0;
    for w in 0..problem.num_workers {
        let mut seen = vec![false; m];
        if augment(w, &adj, &problem.quotas, &mut hired, &mut seen) {
            size += 1;
        }
    }
    size
}

fn augment(w: usize, adj: &[Vec<usize>], quotas: &[usize], hired: &mut [Vec<usize>], seen: &mut [bool]) -> bool {
    for &f in &adj[w] {
        if seen[f] {
            continue;
        }
        seen[f] = true;
        if hired[f].len() < quotas[f] {
            hired[f].push(w);
            return true;
        }
        for slot in 0..hired[f].len() {
            let other = hired[f][slot];
            if augment(other, adj, quotas, hired, seen) {
                hired[f][slot] = w;
                return true;
            }
        }
    }
    false
}

/// Exhaustive search for the selection with the best full score among
/// allocations meeting every floor. `None` if no such allocation exists.
pub fn enumerate_best(problem: &AssignmentProblem) -> Option<Vec<usize>> {
    let mut by_worker = vec![Vec::new(); problem.num_workers];
    for (k, e) in problem.edges.iter().enumerate() {
        by_worker[e.worker].push(k);
    }
    let mut best: Option<(Score, Vec<usize>)> = None;
    let mut current = Vec::new();
    let mut load = vec![0usize; problem.num_firms()];
    enumerate_rec(problem, &by_worker, 0, &mut current, &mut load, &mut best);
    best.map(|(_, sel)| sel)
}

fn enumerate_rec(
    problem: &AssignmentProblem,
    by_worker: &[Vec<usize>],
    w: usize,
    current: &mut Vec<usize>,
    load: &mut [usize],
    best: &mut Option<(Score, Vec<usize>)>,
) {
    if w == by_worker.len() {
        if !problem.floors_met(current) {
            return;
        }
        let score = problem.score(current);
        if best
            .as_ref()
            .is_none_or(|(b, _)| score.cmp_full(b) == Ordering::Greater)
        {
            *best = Some((score, current.clone()));
        }
        return;
    }
    enumerate_rec(problem, by_worker, w + 1, current, load, best);
    for &k in &by_worker[w] {
        let f = problem.edges[k].firm;
        if load[f] < problem.quotas[f] {
            load[f] += 1;
            current.push(k);
            enumerate_rec(problem, by_worker, w + 1, current, load, best);
            current.pop();
            load[f] -= 1;
        }
    }
}

/// Negative-cycle test on the residual network of `selection`, using only
/// the floor and weight components of the cost.
fn has_improving_cycle(problem: &AssignmentProblem, selection: &[usize]) -> bool {
    let (mut net, _) = build_network(problem, Some(selection));
    for arc in &mut net.arcs {
        arc.cost.kept = 0;
        arc.cost.order = 0;
    }
    let n = net.out.len();
    // all-zero start finds a negative cycle anywhere
    let mut dist = vec![Cost::ZERO; n];
    for _ in 0..n {
        let mut changed = false;
        for u in 0..n {
            for &k in &net.out[u] {
                let arc = &net.arcs[k];
                if arc.cap <= 0 {
                    continue;
                }
                let cand = dist[u] + arc.cost;
                if cand.less(&dist[arc.to]) {
                    dist[arc.to] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            return false;
        }
    }
    true
}
