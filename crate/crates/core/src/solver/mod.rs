//! Branch-and-bound over the enumerated variables.
//!
//! Each node propagates unit clauses over the database and the active
//! pairs, prunes on conflict or when the True-cost fixed so far reaches the
//! incumbent, and otherwise branches on the variable chosen by Böhm's rule.
//! Once every enumerated variable is fixed, the remaining clauses are
//! solved by the hidden-Horn minimal-model routine.

mod boehm;
mod lemma;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use boehm::{boehm_scores, boehm_select, BoehmScore};
pub use lemma::{active_lemmas, Lemma, LemmaKind};

use crate::cnf::{Clause, CnfFormula, Lit, Var};
use crate::driver::CompiledClass;
use crate::forms::minimal_model;
use crate::instance::{Assignment, Fixing, FixingError};
use crate::Mode;
use boehm::BoehmTable;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    pub mode: Mode,
    pub trace: bool,
    /// Abort after expanding this many branch nodes.
    pub node_budget: Option<u64>,
}

impl SolveOptions {
    pub fn new(mode: Mode) -> SolveOptions {
        SolveOptions { mode, trace: false, node_budget: None }
    }

    pub fn traced(mut self) -> SolveOptions {
        self.trace = true;
        self
    }

    pub fn budget(mut self, nodes: u64) -> SolveOptions {
        self.node_budget = Some(nodes);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Unsat,
    /// In MINSAT mode a proven optimum; in SAT mode the first solution found.
    Optimal { values: Vec<bool>, cost: i64 },
    /// The node budget ran out.
    Aborted,
}

impl Outcome {
    pub fn cost(&self) -> Option<i64> {
        match self {
            Outcome::Optimal { cost, .. } => Some(*cost),
            _ => None,
        }
    }

    pub fn is_unsat(&self) -> bool {
        *self == Outcome::Unsat
    }
}

/// One decision on the final path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchNode {
    pub var: Var,
    pub value: bool,
    /// The opposite value was searched exhaustively and has no solution.
    pub opposite_refuted: bool,
    /// If the opposite value was searched but not refuted: every
    /// completion under it costs at least this much.
    pub opposite_evidence: Option<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TraceResult {
    Unsat,
    Solved,
    Aborted,
}

/// What the learner needs from a search: the initial fixing, the decisions
/// leading to the returned solution and what is known about each opposite
/// branch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchTrace {
    pub mode: Mode,
    pub initial_path: Fixing,
    pub final_path: Vec<SearchNode>,
    pub optimal_cost: Option<i64>,
    pub nodes_expanded: u64,
    pub result: TraceResult,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub nodes_expanded: u64,
    pub propagations: u64,
    /// Pairs switched on during the search.
    pub pair_activations: u64,
    /// Activations with an incumbent above the pair's threshold. Always 0.
    pub premature_activations: u64,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult {
    pub outcome: Outcome,
    pub stats: SolveStats,
    pub trace: Option<SearchTrace>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Fixing(#[from] FixingError),
}

/// Solves the instance of `compiled` under `fixing`.
pub fn solve(
    compiled: &CompiledClass,
    fixing: &Fixing,
    opts: &SolveOptions,
) -> Result<SolveResult, SolveError> {
    fixing.check_range(compiled.num_vars())?;
    let start = Instant::now();
    let mut search = Search::new(compiled, opts);
    let outcome = search.run(fixing);
    if let Outcome::Optimal { values, cost } = &outcome {
        let instance = compiled.instance();
        assert!(instance.formula().is_satisfied_by(values), "solver returned a non-model");
        assert_eq!(instance.cost_of(values), *cost, "solver misreported the cost");
        assert!(fixing.lits().all(|l| l.is_true_under(values[l.var().index()])));
    }
    let mut stats = search.stats.clone();
    stats.elapsed = start.elapsed();
    let trace = opts.trace.then(|| SearchTrace {
        mode: opts.mode,
        initial_path: fixing.clone(),
        final_path: search.q.iter().map(|q| q.node.clone()).collect(),
        optimal_cost: outcome.cost(),
        nodes_expanded: stats.nodes_expanded,
        result: match outcome {
            Outcome::Unsat => TraceResult::Unsat,
            Outcome::Optimal { .. } => TraceResult::Solved,
            Outcome::Aborted => TraceResult::Aborted,
        },
    });
    Ok(SolveResult { outcome, stats, trace })
}

/// Result of unit propagation over a plain formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Propagation {
    Conflict,
    /// The implied assignment and the clauses neither satisfied nor unit,
    /// with false literals removed.
    Consistent { assignment: Assignment, remaining: Vec<Clause> },
}

/// Applies `fixings` to `formula` and propagates unit clauses to fixpoint.
pub fn propagate(formula: &CnfFormula, fixings: &[Lit]) -> Propagation {
    let mut db = ClauseStore::new(formula.num_vars());
    for c in formula.clauses() {
        db.push(c.lits().to_vec(), Kind::Base, true);
    }
    let mut st = Trail::new(formula.num_vars());
    let mut ok = db.check_units(&mut st);
    for &l in fixings {
        ok = ok && st.enqueue_checked(l);
    }
    if !(ok && db.propagate(&mut st, &[], &mut 0)) {
        return Propagation::Conflict;
    }
    let remaining = db
        .clauses
        .iter()
        .filter(|c| c.n_true == 0)
        .map(|c| {
            let lits = c.lits.iter().copied().filter(|l| st.value(l.var()).is_none()).collect();
            Clause::new(lits).expect("subset of a clause")
        })
        .collect();
    let mut assignment = Assignment::unassigned(formula.num_vars());
    for (i, &v) in st.values.iter().enumerate() {
        assignment.set(Var::from_index(i), v);
    }
    Propagation::Consistent { assignment, remaining }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Base,
    Global,
    Pair,
}

struct SClause {
    lits: Vec<Lit>,
    kind: Kind,
    active: bool,
    n_true: u32,
    n_false: u32,
}

fn code(l: Lit) -> usize {
    2 * l.var().index() + usize::from(l.is_positive())
}

/// Clauses with per-clause counts of true and false literals, maintained
/// eagerly on every assignment and undo.
struct ClauseStore {
    clauses: Vec<SClause>,
    occ: Vec<Vec<u32>>,
}

impl ClauseStore {
    fn new(num_vars: usize) -> ClauseStore {
        ClauseStore { clauses: Vec::new(), occ: vec![Vec::new(); 2 * num_vars] }
    }

    fn push(&mut self, lits: Vec<Lit>, kind: Kind, active: bool) -> usize {
        let idx = self.clauses.len();
        for &l in &lits {
            self.occ[code(l)].push(idx as u32);
        }
        self.clauses.push(SClause { lits, kind, active, n_true: 0, n_false: 0 });
        idx
    }

    /// Queues the literal of every active unit clause; false on an empty
    /// active clause. Used before the first assignment.
    fn check_units(&self, st: &mut Trail) -> bool {
        let mut pending = Vec::new();
        for c in &self.clauses {
            if !c.active {
                continue;
            }
            match c.lits.as_slice() {
                [] => return false,
                [l] => pending.push(*l),
                _ => {}
            }
        }
        st.pending.extend(pending);
        true
    }

    /// Assigns `lit` and updates counts. Returns false if an active clause
    /// became empty; counts are updated in full either way.
    fn assign(&mut self, st: &mut Trail, lit: Lit) -> bool {
        st.set(lit);
        let mut ok = true;
        for &ci in &self.occ[code(lit)] {
            self.clauses[ci as usize].n_true += 1;
        }
        for &ci in &self.occ[code(!lit)] {
            let c = &mut self.clauses[ci as usize];
            c.n_false += 1;
            if !c.active || c.n_true > 0 {
                continue;
            }
            let open = c.lits.len() as u32 - c.n_false;
            if open == 0 {
                ok = false;
            } else if open == 1 {
                let unit = c.lits.iter().copied().find(|l| st.value(l.var()).is_none());
                st.pending.extend(unit);
            }
        }
        ok
    }

    fn undo_to(&mut self, st: &mut Trail, mark: usize, costs: &[i64]) {
        while st.trail.len() > mark {
            let lit = st.trail.pop().expect("above mark");
            st.values[lit.var().index()] = None;
            if lit.is_positive() {
                st.fixed_cost -= costs.get(lit.var().index()).copied().unwrap_or(0);
            }
            for &ci in &self.occ[code(lit)] {
                self.clauses[ci as usize].n_true -= 1;
            }
            for &ci in &self.occ[code(!lit)] {
                self.clauses[ci as usize].n_false -= 1;
            }
        }
    }

    /// Drains the pending queue. False on conflict, leaving the queue empty.
    fn propagate(&mut self, st: &mut Trail, costs: &[i64], propagations: &mut u64) -> bool {
        loop {
            let Some(lit) = st.pending.pop() else {
                return true;
            };
            match st.value(lit.var()) {
                Some(v) if lit.is_true_under(v) => continue,
                Some(_) => {
                    st.pending.clear();
                    return false;
                }
                None => {}
            }
            *propagations += 1;
            if lit.is_positive() {
                st.fixed_cost += costs.get(lit.var().index()).copied().unwrap_or(0);
            }
            if !self.assign(st, lit) {
                st.pending.clear();
                return false;
            }
        }
    }
}

/// Current assignment, trail and pending units.
struct Trail {
    values: Vec<Option<bool>>,
    trail: Vec<Lit>,
    pending: Vec<Lit>,
    fixed_cost: i64,
}

impl Trail {
    fn new(num_vars: usize) -> Trail {
        Trail {
            values: vec![None; num_vars],
            trail: Vec::new(),
            pending: Vec::new(),
            fixed_cost: 0,
        }
    }

    fn value(&self, v: Var) -> Option<bool> {
        self.values[v.index()]
    }

    fn set(&mut self, lit: Lit) {
        self.values[lit.var().index()] = Some(lit.is_positive());
        self.trail.push(lit);
    }

    /// Queues a literal; false if it is already false.
    fn enqueue_checked(&mut self, lit: Lit) -> bool {
        if self.value(lit.var()) == Some(!lit.is_positive()) {
            return false;
        }
        self.pending.push(lit);
        true
    }
}

#[derive(Clone, Copy, Debug)]
struct BranchInfo {
    refuted: bool,
    evidence: Option<i64>,
}

struct Frame {
    id: u64,
    var: Var,
    /// Value of the branch currently being searched.
    value: bool,
    /// Info about the first branch, once we are in the second.
    first_info: Option<BranchInfo>,
}

struct QEntry {
    id: u64,
    node: SearchNode,
}

enum Flow {
    Continue,
    Stop,
}

struct Search<'a> {
    costs: &'a [i64],
    enumerated: &'a [bool],
    flips: Vec<bool>,
    db: ClauseStore,
    st: Trail,
    mode: Mode,
    budget: Option<u64>,
    /// Pair clause indices with thresholds, highest threshold first.
    pairs: Vec<(i64, usize)>,
    next_pair: usize,
    active_pairs: Vec<usize>,
    incumbent: Option<(i64, Vec<bool>)>,
    table: BoehmTable,
    buf: Vec<Lit>,
    frames: Vec<Frame>,
    q: Vec<QEntry>,
    next_id: u64,
    solutions: u64,
    cost_events: u64,
    aborted: bool,
    stats: SolveStats,
}

impl<'a> Search<'a> {
    fn new(compiled: &'a CompiledClass, opts: &SolveOptions) -> Search<'a> {
        let n = compiled.num_vars();
        let mut db = ClauseStore::new(n);
        for c in compiled.db() {
            let kind = if c.global { Kind::Global } else { Kind::Base };
            db.push(c.literals.lits().to_vec(), kind, true);
        }
        let mut pairs = Vec::new();
        if opts.mode == Mode::Minsat {
            for p in compiled.pairs() {
                let idx = db.push(p.literals.lits().to_vec(), Kind::Pair, false);
                pairs.push((p.threshold, idx));
            }
        }
        pairs.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let max_len = db.clauses.iter().map(|c| c.lits.len()).max().unwrap_or(1);
        Search {
            costs: compiled.instance().costs(),
            enumerated: compiled.partition().enumerated_flags(),
            flips: compiled.partition().renaming().flip_table(n),
            db,
            st: Trail::new(n),
            mode: opts.mode,
            budget: opts.node_budget,
            pairs,
            next_pair: 0,
            active_pairs: Vec::new(),
            incumbent: None,
            table: BoehmTable::new(n, max_len),
            buf: Vec::new(),
            frames: Vec::new(),
            q: Vec::new(),
            next_id: 0,
            solutions: 0,
            cost_events: 0,
            aborted: false,
            stats: SolveStats::default(),
        }
    }

    fn run(&mut self, fixing: &Fixing) -> Outcome {
        let mut ok = self.db.check_units(&mut self.st);
        for l in fixing.lits() {
            ok = ok && self.st.enqueue_checked(l);
        }
        ok = ok && self.propagate();
        if ok {
            self.node();
        }
        if self.aborted {
            return Outcome::Aborted;
        }
        match self.incumbent.take() {
            Some((cost, values)) => Outcome::Optimal { values, cost },
            None => Outcome::Unsat,
        }
    }

    fn propagate(&mut self) -> bool {
        self.db.propagate(&mut self.st, self.costs, &mut self.stats.propagations)
    }

    /// Re-examines pairs activated after the current assignment was built;
    /// their counts are current but units among them were not queued.
    fn recheck_pairs(&mut self) -> bool {
        for &ci in &self.active_pairs {
            let c = &self.db.clauses[ci];
            if c.n_true > 0 {
                continue;
            }
            let open = c.lits.len() as u32 - c.n_false;
            if open == 0 {
                return false;
            }
            if open == 1 {
                let unit = c.lits.iter().copied().find(|l| self.st.value(l.var()).is_none());
                self.st.pending.extend(unit);
            }
        }
        self.propagate()
    }

    fn conflict_event(&mut self) {
        if !self.active_pairs.is_empty() {
            // Active pairs may have contributed; the refutation is not purely logical.
            self.cost_events += 1;
        }
    }

    fn over_bound(&self) -> bool {
        self.mode == Mode::Minsat
            && self.incumbent.as_ref().is_some_and(|(inc, _)| self.st.fixed_cost >= *inc)
    }

    fn node(&mut self) -> Flow {
        if !self.active_pairs.is_empty() && !self.recheck_pairs() {
            self.conflict_event();
            return Flow::Continue;
        }
        if self.over_bound() {
            self.cost_events += 1;
            return Flow::Continue;
        }
        let Some((var, first)) = self.select() else {
            return self.leaf();
        };
        if self.budget.is_some_and(|b| self.stats.nodes_expanded >= b) {
            self.aborted = true;
            return Flow::Stop;
        }
        self.stats.nodes_expanded += 1;
        let id = self.next_id;
        self.next_id += 1;
        self.frames.push(Frame { id, var, value: first, first_info: None });

        for (k, value) in [first, !first].into_iter().enumerate() {
            let depth = self.frames.len() - 1;
            self.frames[depth].value = value;
            let mark = self.st.trail.len();
            let (sol0, cost0) = (self.solutions, self.cost_events);
            self.stats.propagations += 1;
            if value {
                self.st.fixed_cost += self.costs[var.index()];
            }
            let lit = var.lit(value);
            let ok = self.db.assign(&mut self.st, lit) && self.propagate();
            let flow = if ok {
                self.node()
            } else {
                self.st.pending.clear();
                self.conflict_event();
                Flow::Continue
            };
            self.db.undo_to(&mut self.st, mark, self.costs);
            if let Flow::Stop = flow {
                self.frames.pop();
                return Flow::Stop;
            }
            let refuted = self.solutions == sol0 && self.cost_events == cost0;
            let info = BranchInfo {
                refuted,
                evidence: if refuted { None } else { self.incumbent.as_ref().map(|(c, _)| *c) },
            };
            if k == 0 {
                self.frames[depth].first_info = Some(info);
            } else if let Some(q) = self.q.get_mut(depth) {
                if q.id == id {
                    q.node.opposite_refuted = info.refuted;
                    q.node.opposite_evidence = info.evidence;
                }
            }
        }
        self.frames.pop();
        Flow::Continue
    }

    fn select(&mut self) -> Option<(Var, bool)> {
        let n = self.enumerated.len();
        if !(0..n).any(|v| self.enumerated[v] && self.st.values[v].is_none()) {
            return None;
        }
        self.table.reset();
        for c in &self.db.clauses {
            if !c.active || c.n_true > 0 {
                continue;
            }
            self.buf.clear();
            self.buf.extend(c.lits.iter().copied().filter(|l| self.st.values[l.var().index()].is_none()));
            self.table.add(&self.buf, self.enumerated);
        }
        let values = &self.st.values;
        let enumerated = self.enumerated;
        self.table.select(
            (0..n).filter(|&v| enumerated[v] && values[v].is_none()),
            self.incumbent.is_some(),
            self.costs,
        )
    }

    /// Every enumerated variable is fixed: solve the rest as Horn.
    fn leaf(&mut self) -> Flow {
        let n = self.st.values.len();
        let residual: Vec<Vec<Lit>> = self
            .db
            .clauses
            .iter()
            .filter(|c| c.kind == Kind::Base && c.n_true == 0)
            .map(|c| {
                c.lits
                    .iter()
                    .filter(|l| self.st.values[l.var().index()].is_none())
                    .map(|l| l.flipped_if(self.flips[l.var().index()]))
                    .collect()
            })
            .collect();
        debug_assert!(residual.iter().all(|c| c.iter().filter(|l| l.is_positive()).count() <= 1));
        let Some(model) = minimal_model(n, &residual) else {
            self.conflict_event();
            return Flow::Continue;
        };
        let values: Vec<bool> = (0..n)
            .map(|i| self.st.values[i].unwrap_or(model[i] ^ self.flips[i]))
            .collect();
        let cost: i64 = values.iter().zip(self.costs).filter(|(&v, _)| v).map(|(_, &c)| c).sum();
        debug_assert!(self
            .db
            .clauses
            .iter()
            .filter(|c| c.kind != Kind::Pair)
            .all(|c| c.lits.iter().any(|l| l.is_true_under(values[l.var().index()]))));

        if self.mode == Mode::Minsat && self.incumbent.as_ref().is_some_and(|(inc, _)| cost >= *inc) {
            self.cost_events += 1;
            return Flow::Continue;
        }
        self.solutions += 1;
        self.incumbent = Some((cost, values));
        self.snapshot_path();
        if self.mode == Mode::Sat {
            return Flow::Stop;
        }
        self.activate_pairs(cost);
        Flow::Continue
    }

    fn snapshot_path(&mut self) {
        self.q = self
            .frames
            .iter()
            .map(|f| QEntry {
                id: f.id,
                node: SearchNode {
                    var: f.var,
                    value: f.value,
                    opposite_refuted: f.first_info.is_some_and(|i| i.refuted),
                    opposite_evidence: f.first_info.and_then(|i| i.evidence),
                },
            })
            .collect();
    }

    fn activate_pairs(&mut self, incumbent: i64) {
        while let Some(&(threshold, ci)) = self.pairs.get(self.next_pair) {
            if threshold < incumbent {
                break;
            }
            self.next_pair += 1;
            self.db.clauses[ci].active = true;
            self.active_pairs.push(ci);
            self.stats.pair_activations += 1;
            if incumbent > threshold {
                self.stats.premature_activations += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::CnfFormula;
    use crate::instance::{MinsatInstance, RawCosts};
    use crate::oracle::{brute_force, OracleOutcome};
    use rand::{Rng, SeedableRng};

    fn class(n: usize, clauses: &[&[i64]], costs: &[i64]) -> CompiledClass {
        let f = CnfFormula::from_dimacs(n, clauses);
        CompiledClass::new(f, RawCosts { pairs: costs.iter().map(|&c| (c, 0)).collect(), scale_exp: 0 }).unwrap()
    }

    fn lits(ls: &[i64]) -> Vec<Lit> {
        ls.iter().map(|&l| Lit::from_dimacs(l).unwrap()).collect()
    }

    #[test]
    fn propagate_unit_chain() {
        let f = CnfFormula::from_dimacs(2, &[&[1], &[-1, 2]]);
        match propagate(&f, &[]) {
            Propagation::Consistent { assignment, remaining } => {
                assert_eq!(assignment.values(), &[Some(true), Some(true)]);
                assert!(remaining.is_empty());
            }
            Propagation::Conflict => panic!(),
        }
    }

    #[test]
    fn propagate_contradiction() {
        let f = CnfFormula::from_dimacs(1, &[&[1], &[-1]]);
        assert_eq!(propagate(&f, &[]), Propagation::Conflict);
    }

    #[test]
    fn propagate_from_fixing() {
        let f = CnfFormula::from_dimacs(2, &[&[1, 2]]);
        match propagate(&f, &lits(&[-1])) {
            Propagation::Consistent { assignment, .. } => assert_eq!(assignment.get(Var::new(2)), Some(true)),
            Propagation::Conflict => panic!(),
        }
        assert_eq!(propagate(&f, &lits(&[-1, -2])), Propagation::Conflict);
    }

    #[test]
    fn horn_needs_no_branching() {
        let cc = class(3, &[&[-1, 2], &[-2, 3], &[1]], &[1, 1, 1]);
        let r = solve(&cc, &Fixing::empty(), &SolveOptions::new(Mode::Minsat)).unwrap();
        assert_eq!(r.stats.nodes_expanded, 0);
        assert_eq!(r.outcome.cost(), Some(3));
    }

    #[test]
    fn unsat_two_variables() {
        let cc = class(2, &[&[1, 2], &[-1, 2], &[1, -2], &[-1, -2]], &[0, 0]);
        let r = solve(&cc, &Fixing::empty(), &SolveOptions::new(Mode::Sat).traced()).unwrap();
        assert_eq!(r.outcome, Outcome::Unsat);
        let t = r.trace.unwrap();
        assert_eq!(t.result, TraceResult::Unsat);
        assert!(t.final_path.is_empty());
        assert!(r.stats.nodes_expanded >= 1);
    }

    #[test]
    fn cheapest_of_disjunction() {
        let cc = class(2, &[&[1, 2]], &[3, 1]);
        let r = solve(&cc, &Fixing::empty(), &SolveOptions::new(Mode::Minsat)).unwrap();
        assert_eq!(r.outcome, Outcome::Optimal { values: vec![false, true], cost: 1 });
    }

    #[test]
    fn fixing_out_of_range() {
        let cc = class(2, &[&[1, 2]], &[3, 1]);
        assert!(solve(&cc, &"3=T".parse().unwrap(), &SolveOptions::new(Mode::Minsat)).is_err());
    }

    #[test]
    fn budget_aborts() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let f = crate::gen::random_ksat(30, 128, 3, &mut rng);
        let cc = CompiledClass::from_instance(&MinsatInstance::with_unit_costs(f));
        let r = solve(&cc, &Fixing::empty(), &SolveOptions::new(Mode::Minsat).budget(2)).unwrap();
        assert_eq!(r.outcome, Outcome::Aborted);
        assert_eq!(r.stats.nodes_expanded, 2);
    }

    #[test]
    fn agrees_with_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for _ in 0..200 {
            let n = rng.gen_range(1..=12);
            let m = rng.gen_range(2 * n..=5 * n);
            let k = rng.gen_range(1..=3);
            let f = crate::gen::random_ksat(n, m, k, &mut rng);
            let costs = crate::gen::random_costs(n, 0, 10, &mut rng);
            let inst = MinsatInstance::new(f, costs).unwrap();
            let cc = CompiledClass::from_instance(&inst);
            let fix = crate::driver::sample_level(n, rng.gen_range(0..=n.min(3)), 1, rng.gen()).unwrap().remove(0);
            let want = brute_force(&inst, &fix, Mode::Minsat).unwrap();
            let got = solve(&cc, &fix, &SolveOptions::new(Mode::Minsat)).unwrap().outcome;
            assert_eq!(got.cost(), want.cost());
            let sat = solve(&cc, &fix, &SolveOptions::new(Mode::Sat)).unwrap().outcome;
            assert_eq!(sat.is_unsat(), want == OracleOutcome::Unsat);
        }
    }

    #[test]
    fn refutations_are_real() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let n = 10;
            let f = crate::gen::random_ksat(n, 40, 3, &mut rng);
            let costs = crate::gen::random_costs(n, 0, 6, &mut rng);
            let inst = MinsatInstance::new(f, costs).unwrap();
            let cc = CompiledClass::from_instance(&inst);
            for mode in [Mode::Sat, Mode::Minsat] {
                let t = solve(&cc, &Fixing::empty(), &SolveOptions::new(mode).traced()).unwrap().trace.unwrap();
                for i in 0..t.final_path.len() {
                    let node = &t.final_path[i];
                    let mut pairs: Vec<_> = t.final_path[..i].iter().map(|p| (p.var, p.value)).collect();
                    pairs.push((node.var, !node.value));
                    let fix = Fixing::new(pairs).unwrap();
                    let best = brute_force(&inst, &fix, Mode::Minsat).unwrap().cost();
                    if node.opposite_refuted {
                        assert_eq!(best, None);
                    }
                    if let (Some(z), Some(best)) = (node.opposite_evidence, best) {
                        assert!(best >= z);
                    }
                }
            }
        }
    }

    #[test]
    fn pairs_do_not_change_optimum() {
        let cc0 = class(3, &[&[1, 2, 3]], &[2, 3, 4]);
        let mut cc = cc0.clone();
        crate::learner::incorporate(&mut cc, &[Lemma::pair(Clause::from_dimacs(&[1]).unwrap(), 3)], 3.0);
        let opts = SolveOptions::new(Mode::Minsat);
        let a = solve(&cc0, &Fixing::empty(), &opts).unwrap();
        let b = solve(&cc, &Fixing::empty(), &opts).unwrap();
        assert_eq!(a.outcome, b.outcome);
        assert_eq!(b.stats.premature_activations, 0);
    }

    #[test]
    fn deterministic_traces() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let f = crate::gen::random_ksat(20, 80, 3, &mut rng);
        let cc = CompiledClass::from_instance(&MinsatInstance::with_unit_costs(f));
        let opts = SolveOptions::new(Mode::Minsat).traced();
        let a = solve(&cc, &Fixing::empty(), &opts).unwrap();
        let b = solve(&cc, &Fixing::empty(), &opts).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.outcome, b.outcome);
    }
}
