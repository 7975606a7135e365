//! Lemma extraction from search traces, minimization by oracle calls, and
//! incorporation into a compiled class.

use crate::cnf::{subsumes, Clause, Lit};
use crate::driver::{CompiledClass, DbClause, Origin, PairLemma};
use crate::instance::Fixing;
use crate::solver::{solve, Lemma, LemmaKind, Outcome, SearchTrace, SolveOptions, TraceResult};
use crate::Mode;

/// Default per-call node budget of minimization oracle calls.
pub const DEFAULT_ORACLE_BUDGET: u64 = 1_000_000;

/// Longest lemma kept.
pub const DEFAULT_MAX_LEN: usize = 3;

/// A lemma before minimization. Literals are ordered by the node index
/// they came from; the initial fixing comes first and the last literal is
/// the one whose opposite was searched.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateLemma {
    pub literals: Vec<Lit>,
    pub source_indices: Vec<usize>,
    pub kind: LemmaKind,
}

impl CandidateLemma {
    pub fn clause(&self) -> Clause {
        Clause::new(self.literals.clone()).expect("path literals are over distinct variables")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MinimizeConfig {
    pub max_len: usize,
    pub node_budget: u64,
}

impl Default for MinimizeConfig {
    fn default() -> MinimizeConfig {
        MinimizeConfig { max_len: DEFAULT_MAX_LEN, node_budget: DEFAULT_ORACLE_BUDGET }
    }
}

/// Literals ruling out the path prefix up to node `i` with the last value
/// flipped, in source order.
fn path_clause(trace: &SearchTrace, i: usize) -> (Vec<Lit>, Vec<usize>) {
    let p = trace.initial_path.len();
    let mut lits: Vec<Lit> = trace.initial_path.lits().map(|l| !l).collect();
    lits.extend(trace.final_path[..i].iter().map(|n| n.var.lit(!n.value)));
    let last = &trace.final_path[i];
    lits.push(last.var.lit(last.value));
    (lits, (0..=p + i).collect())
}

fn unsat_lemma(trace: &SearchTrace) -> Vec<CandidateLemma> {
    if trace.initial_path.is_empty() {
        vec![CandidateLemma { literals: Vec::new(), source_indices: Vec::new(), kind: LemmaKind::Unconditional }]
    } else {
        Vec::new()
    }
}

/// One unconditional candidate for every node whose opposite value was
/// refuted. An unsatisfiable instance yields the empty clause when no
/// initial fixing was applied and nothing otherwise.
pub fn extract_sat_lemmas(trace: &SearchTrace) -> Vec<CandidateLemma> {
    match trace.result {
        TraceResult::Unsat => return unsat_lemma(trace),
        TraceResult::Aborted => return Vec::new(),
        TraceResult::Solved => {}
    }
    (0..trace.final_path.len())
        .filter(|&i| trace.final_path[i].opposite_refuted)
        .map(|i| {
            let (literals, source_indices) = path_clause(trace, i);
            CandidateLemma { literals, source_indices, kind: LemmaKind::Unconditional }
        })
        .collect()
}

/// Like [`extract_sat_lemmas`], plus a cost-conditional candidate for every
/// node whose opposite was closed by cost, with the evidence as threshold.
pub fn extract_cost_pairs(trace: &SearchTrace) -> Vec<CandidateLemma> {
    match trace.result {
        TraceResult::Unsat => return unsat_lemma(trace),
        TraceResult::Aborted => return Vec::new(),
        TraceResult::Solved => {}
    }
    let mut out = Vec::new();
    for (i, node) in trace.final_path.iter().enumerate() {
        let kind = if node.opposite_refuted {
            LemmaKind::Unconditional
        } else if let Some(threshold) = node.opposite_evidence {
            LemmaKind::CostConditional { threshold }
        } else {
            continue;
        };
        let (literals, source_indices) = path_clause(trace, i);
        out.push(CandidateLemma { literals, source_indices, kind });
    }
    out
}

/// Tries to drop literals in decreasing index order, never the last one.
/// `still_valid` answers whether the shortened clause is still a lemma,
/// or `None` when the oracle gave up.
fn shrink(
    cand: &CandidateLemma,
    max_len: usize,
    mut still_valid: impl FnMut(&Clause) -> Option<bool>,
) -> Option<Clause> {
    let Some((&last, rest)) = cand.literals.split_last() else {
        return Some(Clause::empty());
    };
    let mut current: Vec<Lit> = rest.to_vec();
    let mut kept = 1;
    for j in (0..rest.len()).rev() {
        let lit = rest[j];
        let trial: Vec<Lit> = current.iter().copied().filter(|&l| l != lit).chain([last]).collect();
        let trial = Clause::new(trial).expect("subset of a clause");
        if still_valid(&trial)? {
            current.retain(|&l| l != lit);
        } else {
            kept += 1;
            if kept > max_len {
                return None;
            }
        }
    }
    current.push(last);
    Some(Clause::new(current).expect("subset of a clause"))
}

fn is_global(compiled: &CompiledClass, clause: &Clause) -> bool {
    clause.vars().any(|v| !compiled.partition().is_enumerated(v))
}

/// Minimal unconditional lemma, or `None` if it is too long or an oracle
/// call ran out of budget.
pub fn minimize_sat_lemma(
    compiled: &CompiledClass,
    cand: &CandidateLemma,
    cfg: &MinimizeConfig,
) -> Option<Lemma> {
    let opts = SolveOptions::new(Mode::Sat).budget(cfg.node_budget);
    let clause = shrink(cand, cfg.max_len, |trial| {
        let r = solve(compiled, &Fixing::falsifying(trial), &opts).expect("lemma variables are in range");
        match r.outcome {
            Outcome::Unsat => Some(true),
            Outcome::Optimal { .. } => Some(false),
            Outcome::Aborted => None,
        }
    })?;
    (clause.len() <= cfg.max_len).then(|| Lemma {
        global: is_global(compiled, &clause),
        clause,
        kind: LemmaKind::Unconditional,
    })
}

/// Minimal pair for threshold `z`: a literal goes when every model
/// violating the shortened clause still costs at least `z`.
pub fn minimize_cost_pair(
    compiled: &CompiledClass,
    cand: &CandidateLemma,
    z: i64,
    cfg: &MinimizeConfig,
) -> Option<Lemma> {
    let opts = SolveOptions::new(Mode::Minsat).budget(cfg.node_budget);
    let clause = shrink(cand, cfg.max_len, |trial| {
        let r = solve(compiled, &Fixing::falsifying(trial), &opts).expect("lemma variables are in range");
        match r.outcome {
            Outcome::Unsat => Some(true),
            Outcome::Optimal { cost, .. } => Some(cost >= z),
            Outcome::Aborted => None,
        }
    })?;
    (clause.len() <= cfg.max_len).then(|| Lemma {
        global: is_global(compiled, &clause),
        clause,
        kind: LemmaKind::CostConditional { threshold: z },
    })
}

/// Minimizes a candidate of either kind.
pub fn minimize(compiled: &CompiledClass, cand: &CandidateLemma, cfg: &MinimizeConfig) -> Option<Lemma> {
    match cand.kind {
        LemmaKind::Unconditional => minimize_sat_lemma(compiled, cand, cfg),
        LemmaKind::CostConditional { threshold } => minimize_cost_pair(compiled, cand, threshold, cfg),
    }
}

/// What [`incorporate`] did.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IncorporateReport {
    pub lemmas_added: usize,
    pub pairs_added: usize,
    /// Database clauses and pairs removed as subsumed.
    pub deleted: usize,
    /// A lemma was refused because the clause count reached the cap.
    pub capped: bool,
}

/// Largest clause count allowed for a class with `original` clauses.
pub fn clause_cap(original: usize, ratio: f64) -> usize {
    (original as f64 * ratio).floor() as usize
}

/// Adds `lemmas` to the class, dropping redundant ones and deleting what
/// they subsume. Stops at the first lemma that would exceed the cap. The
/// partition is not recomputed.
pub fn incorporate(compiled: &mut CompiledClass, lemmas: &[Lemma], cap_ratio: f64) -> IncorporateReport {
    let cap = clause_cap(compiled.original_clause_count(), cap_ratio);
    let mut report = IncorporateReport::default();
    for lemma in lemmas {
        if redundant(compiled, lemma) {
            continue;
        }
        if compiled.clause_count() >= cap {
            report.capped = true;
            break;
        }
        let before = compiled.clause_count();
        match lemma.kind {
            LemmaKind::Unconditional => {
                let l = &lemma.clause;
                if lemma.global {
                    compiled.db.retain(|d| !(d.global && subsumes(l, &d.literals)));
                } else {
                    compiled.db.retain(|d| !subsumes(l, &d.literals));
                }
                compiled.pairs.retain(|p| !subsumes(l, &p.literals));
                compiled.db.push(DbClause { literals: l.clone(), origin: Origin::Lemma, global: lemma.global });
                report.lemmas_added += 1;
            }
            LemmaKind::CostConditional { threshold } => {
                let l = &lemma.clause;
                compiled.pairs.retain(|p| !(subsumes(l, &p.literals) && p.threshold <= threshold));
                compiled.pairs.push(PairLemma { literals: l.clone(), threshold });
                report.pairs_added += 1;
            }
        }
        report.deleted += before + 1 - compiled.clause_count();
    }
    report
}

/// Whether the class already has the lemma or something at least as strong.
fn redundant(compiled: &CompiledClass, lemma: &Lemma) -> bool {
    let l = &lemma.clause;
    if compiled.db.iter().any(|d| subsumes(&d.literals, l)) {
        return true;
    }
    match lemma.kind {
        LemmaKind::Unconditional => false,
        LemmaKind::CostConditional { threshold } => {
            compiled.pairs.iter().any(|p| p.threshold >= threshold && subsumes(&p.literals, l))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{CnfFormula, Var};
    use crate::instance::{MinsatInstance, RawCosts};
    use crate::oracle;
    use crate::solver::SearchNode;

    fn lit(n: i64) -> Lit {
        Lit::from_dimacs(n).unwrap()
    }

    fn node(v: u32, value: bool, refuted: bool, evidence: Option<i64>) -> SearchNode {
        SearchNode { var: Var::new(v), value, opposite_refuted: refuted, opposite_evidence: evidence }
    }

    fn trace(path: Vec<SearchNode>, initial: Fixing, result: TraceResult) -> SearchTrace {
        SearchTrace {
            mode: Mode::Sat,
            initial_path: initial,
            final_path: path,
            optimal_cost: None,
            nodes_expanded: 0,
            result,
        }
    }

    fn compiled(n: usize, clauses: &[&[i64]], costs: &[i64]) -> CompiledClass {
        let f = CnfFormula::from_dimacs(n, clauses);
        CompiledClass::new(f, RawCosts { pairs: costs.iter().map(|&c| (c, 0)).collect(), scale_exp: 0 })
            .unwrap()
    }

    #[test]
    fn sat_lemma_from_third_node() {
        let t = trace(
            vec![node(1, true, false, None), node(2, false, false, None), node(3, true, true, None)],
            Fixing::empty(),
            TraceResult::Solved,
        );
        let lemmas = extract_sat_lemmas(&t);
        assert_eq!(lemmas.len(), 1);
        assert_eq!(lemmas[0].literals, vec![lit(-1), lit(2), lit(3)]);
        assert_eq!(lemmas[0].clause(), Clause::from_dimacs(&[-1, 2, 3]).unwrap());
    }

    #[test]
    fn nothing_refuted_nothing_learned() {
        let t = trace(vec![node(1, true, false, None)], Fixing::empty(), TraceResult::Solved);
        assert!(extract_sat_lemmas(&t).is_empty());
    }

    #[test]
    fn unsat_gives_empty_clause_only_without_fixing() {
        let t = trace(vec![], Fixing::empty(), TraceResult::Unsat);
        let l = extract_sat_lemmas(&t);
        assert_eq!(l.len(), 1);
        assert!(l[0].literals.is_empty());
        let t = trace(vec![], "1=T".parse().unwrap(), TraceResult::Unsat);
        assert!(extract_sat_lemmas(&t).is_empty());
    }

    #[test]
    fn initial_path_comes_first() {
        let t = trace(vec![node(2, false, true, None)], "4=T".parse().unwrap(), TraceResult::Solved);
        let l = extract_sat_lemmas(&t);
        assert_eq!(l[0].literals, vec![lit(-4), lit(-2)]);
        assert_eq!(l[0].source_indices, vec![0, 1]);
    }

    #[test]
    fn cost_pairs_and_refutations() {
        let t = trace(
            vec![node(1, false, false, Some(4)), node(2, true, true, None), node(3, false, false, None)],
            Fixing::empty(),
            TraceResult::Solved,
        );
        let c = extract_cost_pairs(&t);
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].kind, LemmaKind::CostConditional { threshold: 4 });
        assert_eq!(c[0].literals, vec![lit(-1)]);
        assert_eq!(c[1].kind, LemmaKind::Unconditional);
        assert_eq!(c[1].literals, vec![lit(1), lit(2)]);
    }

    #[test]
    fn minimization_drops_irrelevant_literal() {
        // a = x1, b = x2, c = x3; S = {¬a ∨ ¬b}. Order: ¬b, c, then the
        // flipped ¬a last.
        let cc = compiled(3, &[&[-1, -2]], &[0, 0, 0]);
        let cand = CandidateLemma {
            literals: vec![lit(-2), lit(3), lit(-1)],
            source_indices: vec![0, 1, 2],
            kind: LemmaKind::Unconditional,
        };
        let l = minimize_sat_lemma(&cc, &cand, &MinimizeConfig::default()).unwrap();
        assert_eq!(l.clause, Clause::from_dimacs(&[-1, -2]).unwrap());
    }

    #[test]
    fn unit_lemma_unchanged() {
        let cc = compiled(2, &[&[1]], &[0, 0]);
        let cand = CandidateLemma { literals: vec![lit(1)], source_indices: vec![0], kind: LemmaKind::Unconditional };
        let l = minimize_sat_lemma(&cc, &cand, &MinimizeConfig::default()).unwrap();
        assert_eq!(l.clause, Clause::from_dimacs(&[1]).unwrap());
    }

    #[test]
    fn too_long_is_discarded() {
        // Only the full 4-clause is implied.
        let cc = compiled(4, &[&[1, 2, 3, 4]], &[0; 4]);
        let cand = CandidateLemma {
            literals: vec![lit(1), lit(2), lit(3), lit(4)],
            source_indices: vec![0, 1, 2, 3],
            kind: LemmaKind::Unconditional,
        };
        assert_eq!(minimize_sat_lemma(&cc, &cand, &MinimizeConfig::default()), None);
        let wide = MinimizeConfig { max_len: 4, ..MinimizeConfig::default() };
        assert!(minimize_sat_lemma(&cc, &cand, &wide).is_some());
    }

    #[test]
    fn pair_removal_boundary() {
        // x1 ∨ x2 with costs 3 and 5. Violating (x1) means x1 = F, x2 = T:
        // cost 5.
        let cc = compiled(2, &[&[1, 2]], &[3, 5]);
        let cand = CandidateLemma {
            literals: vec![lit(-2), lit(1)],
            source_indices: vec![0, 1],
            kind: LemmaKind::CostConditional { threshold: 5 },
        };
        let l = minimize_cost_pair(&cc, &cand, 5, &MinimizeConfig::default()).unwrap();
        assert_eq!(l.clause, Clause::from_dimacs(&[1]).unwrap());
        let l = minimize_cost_pair(&cc, &cand, 6, &MinimizeConfig::default()).unwrap();
        assert_eq!(l.clause, Clause::from_dimacs(&[-2, 1]).unwrap());
    }

    #[test]
    fn unit_lemma_subsumes() {
        let mut cc = compiled(2, &[&[1, 2]], &[0, 0]);
        let r = incorporate(&mut cc, &[Lemma::unconditional(Clause::from_dimacs(&[1]).unwrap())], 3.0);
        assert_eq!(r.lemmas_added, 1);
        assert_eq!(r.deleted, 1);
        let db: Vec<_> = cc.db().iter().map(|d| d.literals.clone()).collect();
        assert_eq!(db, vec![Clause::from_dimacs(&[1]).unwrap()]);
        // Idempotent.
        let before = cc.clone();
        let r = incorporate(&mut cc, &[Lemma::unconditional(Clause::from_dimacs(&[1]).unwrap())], 3.0);
        assert_eq!(r, IncorporateReport::default());
        assert_eq!(cc, before);
    }

    #[test]
    fn larger_threshold_wins() {
        let mut cc = compiled(3, &[&[1, 2, 3]], &[1, 1, 1]);
        let l = Clause::from_dimacs(&[-1, -2]).unwrap();
        incorporate(&mut cc, &[Lemma::pair(l.clone(), 5), Lemma::pair(l.clone(), 9)], 3.0);
        assert_eq!(cc.pairs(), &[PairLemma { literals: l.clone(), threshold: 9 }]);
        incorporate(&mut cc, &[Lemma::pair(l.clone(), 5)], 3.0);
        assert_eq!(cc.pairs().len(), 1);
        // Pairs never delete database clauses.
        assert_eq!(cc.db().len(), 1);
    }

    #[test]
    fn cap_is_respected() {
        let mut cc = compiled(3, &[&[1, 2, 3]], &[0; 3]);
        let r = incorporate(&mut cc, &[Lemma::pair(Clause::from_dimacs(&[1]).unwrap(), 1)], 1.0);
        assert!(r.capped);
        assert_eq!(cc.clause_count(), 1);
    }

    #[test]
    fn global_lemma_keeps_base_clauses() {
        let mut cc = compiled(2, &[&[1, 2]], &[0, 0]);
        let lemma = Lemma { clause: Clause::from_dimacs(&[1]).unwrap(), kind: LemmaKind::Unconditional, global: true };
        incorporate(&mut cc, &[lemma], 3.0);
        assert_eq!(cc.db().len(), 2);
        assert!(cc.covers_original());
    }

    #[test]
    fn extracted_lemmas_are_sound() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..60 {
            let n = 8;
            let f = crate::gen::random_ksat(n, rng.gen_range(16..36), 3, &mut rng);
            let costs: Vec<i64> = (0..n).map(|_| rng.gen_range(0..5)).collect();
            let inst = MinsatInstance::new(f, costs).unwrap();
            let cc = CompiledClass::from_instance(&inst);
            let r = solve(&cc, &Fixing::empty(), &SolveOptions::new(Mode::Minsat).traced()).unwrap();
            for cand in extract_cost_pairs(r.trace.as_ref().unwrap()) {
                let clause = cand.clause();
                match cand.kind {
                    LemmaKind::Unconditional => assert!(oracle::implies(&inst, &clause).unwrap()),
                    LemmaKind::CostConditional { threshold } => {
                        let m = oracle::min_cost_violating(&inst, &clause).unwrap();
                        assert!(m.is_none_or(|m| m >= threshold), "{clause} {threshold} {m:?}");
                    }
                }
                if let Some(l) = minimize(&cc, &cand, &MinimizeConfig::default()) {
                    match l.kind {
                        LemmaKind::Unconditional => assert!(oracle::implies(&inst, &l.clause).unwrap()),
                        LemmaKind::CostConditional { threshold } => {
                            let m = oracle::min_cost_violating(&inst, &l.clause).unwrap();
                            assert!(m.is_none_or(|m| m >= threshold));
                        }
                    }
                }
            }
        }
    }
}
