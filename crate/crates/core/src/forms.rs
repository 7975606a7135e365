//! Special forms that admit fast solution: restricted hidden Horn (with a
//! linear-time minimum-cost solver) and network form (detection only).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Clause, CnfFormula, Lit, Var};
use crate::instance::{Fixing, MinsatInstance};
use crate::twosat::{TLit, TwoSat};

/// Complemented variables and, for network form, complemented clauses.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Renaming {
    pub flipped: BTreeSet<Var>,
    #[serde(rename = "clauseFlipped", default, skip_serializing_if = "BTreeSet::is_empty")]
    pub clause_flipped: BTreeSet<usize>,
}

impl Renaming {
    pub fn identity() -> Renaming {
        Renaming::default()
    }

    pub fn flips(&self, var: Var) -> bool {
        self.flipped.contains(&var)
    }

    /// Flags indexed by variable, for hot loops.
    pub fn flip_table(&self, num_vars: usize) -> Vec<bool> {
        let mut t = vec![false; num_vars];
        for v in &self.flipped {
            if v.index() < num_vars {
                t[v.index()] = true;
            }
        }
        t
    }

    pub fn apply(&self, clause: &Clause) -> Clause {
        clause.rename(|v| self.flips(v))
    }
}

/// Which special forms a formula has, with witnessing renamings.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormDiagnosis {
    #[serde(rename = "hiddenHorn")]
    pub hidden_horn: Option<Renaming>,
    #[serde(rename = "networkCondition1")]
    pub network_condition1: Option<Renaming>,
    #[serde(rename = "networkCondition2")]
    pub network_condition2: Option<Renaming>,
}

pub fn diagnose(instance: &MinsatInstance) -> FormDiagnosis {
    let (network_condition1, network_condition2) = detect_network_form(instance.formula());
    FormDiagnosis {
        hidden_horn: detect_restricted_hidden_horn(instance, instance.clauses()),
        network_condition1,
        network_condition2,
    }
}

/// Finds a renaming that flips only zero-cost variables and leaves every
/// clause of `scope` with at most one positive literal.
///
/// Each pair of literals in a clause yields the 2-SAT constraint "not both
/// positive after flipping"; positive-cost variables are forced unflipped.
pub fn detect_restricted_hidden_horn(
    instance: &MinsatInstance,
    scope: &[Clause],
) -> Option<Renaming> {
    hidden_horn_flips(instance.num_vars(), instance.costs(), scope.iter()).map(|flips| Renaming {
        flipped: flips
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(i, _)| Var::from_index(i))
            .collect(),
        clause_flipped: BTreeSet::new(),
    })
}

/// Flip vector of the canonical renaming, or `None`.
pub(crate) fn hidden_horn_flips<'a>(
    num_vars: usize,
    costs: &[i64],
    scope: impl Iterator<Item = &'a Clause>,
) -> Option<Vec<bool>> {
    let mut ts = TwoSat::new(num_vars);
    let mut any_pair = false;
    for clause in scope {
        let lits = clause.lits();
        for (i, &a) in lits.iter().enumerate() {
            for &b in &lits[i + 1..] {
                // `a` is non-positive after flipping iff flip(a) == a.positive.
                ts.add_clause(
                    TLit::is(a.var().index(), a.is_positive()),
                    TLit::is(b.var().index(), b.is_positive()),
                );
                any_pair = true;
            }
        }
    }
    if !any_pair {
        return Some(vec![false; num_vars]);
    }
    for (i, &c) in costs.iter().enumerate() {
        if c > 0 {
            ts.add_unit(TLit::is(i, false));
        }
    }
    ts.solve()
}

/// Result of the fast hidden-Horn solve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HornOutcome {
    Unsat,
    Optimal { values: Vec<bool>, cost: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("clause {clause} has {positives} positive literals after renaming and fixing")]
pub struct NotHorn {
    pub clause: usize,
    pub positives: usize,
}

/// Solves MINSAT for an instance in restricted hidden Horn form under
/// `renaming` and `fixing`.
///
/// The unique minimal model of the renamed Horn formula is computed by
/// forward chaining from the all-False start, then mapped back. Every
/// cost-bearing variable is unflipped, so the minimal model minimizes cost.
pub fn solve_horn_minsat(
    instance: &MinsatInstance,
    renaming: &Renaming,
    fixing: &Fixing,
) -> Result<HornOutcome, NotHorn> {
    let n = instance.num_vars();
    let flips = renaming.flip_table(n);
    let mut fixed: Vec<Option<bool>> = vec![None; n];
    for &(v, b) in fixing.pairs() {
        fixed[v.index()] = Some(b);
    }

    let mut reduced: Vec<Vec<Lit>> = Vec::with_capacity(instance.clauses().len());
    for (ci, clause) in instance.clauses().iter().enumerate() {
        let mut lits = Vec::with_capacity(clause.len());
        let mut satisfied = false;
        for &l in clause.lits() {
            match fixed[l.var().index()] {
                Some(b) if l.is_true_under(b) => {
                    satisfied = true;
                    break;
                }
                Some(_) => {}
                None => lits.push(l.flipped_if(flips[l.var().index()])),
            }
        }
        if satisfied {
            continue;
        }
        let positives = lits.iter().filter(|l| l.is_positive()).count();
        if positives > 1 {
            return Err(NotHorn { clause: ci, positives });
        }
        reduced.push(lits);
    }

    let Some(model) = minimal_model(n, &reduced) else {
        return Ok(HornOutcome::Unsat);
    };
    let values: Vec<bool> = (0..n)
        .map(|i| fixed[i].unwrap_or(model[i] ^ flips[i]))
        .collect();
    let cost = instance.cost_of(&values);
    Ok(HornOutcome::Optimal { values, cost })
}

/// Minimal model of Horn clauses (each with at most one positive literal),
/// or `None` if unsatisfiable. Linear in the total number of literals.
pub(crate) fn minimal_model(num_vars: usize, clauses: &[Vec<Lit>]) -> Option<Vec<bool>> {
    let mut model = vec![false; num_vars];
    let mut remaining: Vec<usize> = Vec::with_capacity(clauses.len());
    let mut body_of: Vec<Vec<u32>> = vec![Vec::new(); num_vars];
    let mut queue: Vec<usize> = Vec::new();

    for (ci, lits) in clauses.iter().enumerate() {
        let body = lits.iter().filter(|l| l.is_negative()).count();
        remaining.push(body);
        for l in lits.iter().filter(|l| l.is_negative()) {
            body_of[l.var().index()].push(ci as u32);
        }
        if body == 0 {
            let h = head(lits)?;
            if !model[h] {
                model[h] = true;
                queue.push(h);
            }
        }
    }

    while let Some(v) = queue.pop() {
        for &ci in &body_of[v] {
            let ci = ci as usize;
            remaining[ci] -= 1;
            if remaining[ci] == 0 {
                let h = head(&clauses[ci])?;
                if !model[h] {
                    model[h] = true;
                    queue.push(h);
                }
            }
        }
    }
    Some(model)
}

fn head(lits: &[Lit]) -> Option<usize> {
    lits.iter().find(|l| l.is_positive()).map(|l| l.var().index())
}

/// Union-find over `{0,1}` labels with parity constraints
/// `label(a) ⊕ label(b) = p`.
struct ParityUnionFind {
    parent: Vec<usize>,
    parity: Vec<bool>,
    size: Vec<usize>,
}

impl ParityUnionFind {
    fn new(n: usize) -> ParityUnionFind {
        ParityUnionFind { parent: (0..n).collect(), parity: vec![false; n], size: vec![1; n] }
    }

    /// Root of `x` and the parity of `x` relative to it.
    fn find(&mut self, x: usize) -> (usize, bool) {
        let p = self.parent[x];
        if p == x {
            return (x, false);
        }
        let (root, pp) = self.find(p);
        self.parent[x] = root;
        self.parity[x] ^= pp;
        (root, self.parity[x])
    }

    /// Records `label(a) ⊕ label(b) = p`; false if that contradicts
    /// earlier constraints.
    fn union(&mut self, a: usize, b: usize, p: bool) -> bool {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra == rb {
            return pa ^ pb == p;
        }
        let (big, small) = if self.size[ra] >= self.size[rb] { (ra, rb) } else { (rb, ra) };
        self.parent[small] = big;
        self.parity[small] = pa ^ pb ^ p;
        self.size[big] += self.size[small];
        true
    }

    /// Labels with the fewest ones per component; ties keep the
    /// lowest-numbered member at 0.
    fn labels(&mut self) -> Vec<bool> {
        let n = self.parent.len();
        let rel: Vec<(usize, bool)> = (0..n).map(|x| self.find(x)).collect();
        let mut ones = vec![0usize; n];
        let mut first = vec![usize::MAX; n];
        for (x, &(r, p)) in rel.iter().enumerate() {
            if p {
                ones[r] += 1;
            }
            first[r] = first[r].min(x);
        }
        let root_label: Vec<bool> = (0..n)
            .map(|r| {
                let zeros = self.size[r] - ones[r];
                if ones[r] != zeros {
                    ones[r] > zeros
                } else {
                    // lowest member gets 0
                    rel.get(first[r]).map(|&(_, p)| p).unwrap_or(false)
                }
            })
            .collect();
        rel.iter().map(|&(r, p)| p ^ root_label[r]).collect()
    }
}

/// Checks both network-form conditions.
///
/// Condition 1: every clause has at most two literals, and the variable
/// flips can make each 2-clause have exactly one negative literal. Clause
/// complementation cannot change that property, so only variables flip.
///
/// Condition 2: every variable occurs in at most two clauses, and clause
/// complementation can make each twice-occurring variable occur exactly
/// once negatively. Variable flips cancel out, so only clauses flip.
pub fn detect_network_form(formula: &CnfFormula) -> (Option<Renaming>, Option<Renaming>) {
    (network_condition1(formula), network_condition2(formula))
}

fn network_condition1(formula: &CnfFormula) -> Option<Renaming> {
    let mut uf = ParityUnionFind::new(formula.num_vars());
    for c in formula.clauses() {
        match c.lits() {
            [] | [_] => {}
            [a, b] => {
                // flip(a) ⊕ flip(b) = neg(a) ⊕ neg(b) ⊕ 1
                let p = a.is_negative() ^ b.is_negative() ^ true;
                if !uf.union(a.var().index(), b.var().index(), p) {
                    return None;
                }
            }
            _ => return None,
        }
    }
    let flipped = uf
        .labels()
        .iter()
        .enumerate()
        .filter(|(_, &f)| f)
        .map(|(i, _)| Var::from_index(i))
        .collect();
    Some(Renaming { flipped, clause_flipped: BTreeSet::new() })
}

fn network_condition2(formula: &CnfFormula) -> Option<Renaming> {
    let mut occurrences: Vec<Vec<(usize, bool)>> = vec![Vec::new(); formula.num_vars()];
    for (ci, c) in formula.clauses().iter().enumerate() {
        for l in c.lits() {
            let occ = &mut occurrences[l.var().index()];
            if occ.len() == 2 {
                return None;
            }
            occ.push((ci, l.is_negative()));
        }
    }
    let mut uf = ParityUnionFind::new(formula.len());
    for occ in &occurrences {
        if let [(c1, n1), (c2, n2)] = occ.as_slice() {
            if !uf.union(*c1, *c2, n1 ^ n2 ^ true) {
                return None;
            }
        }
    }
    let clause_flipped = uf
        .labels()
        .iter()
        .enumerate()
        .filter(|(_, &f)| f)
        .map(|(i, _)| i)
        .collect();
    Some(Renaming { flipped: BTreeSet::new(), clause_flipped })
}

/// Applies a network renaming: variable flips, then clause complements.
pub fn apply_network_renaming(formula: &CnfFormula, renaming: &Renaming) -> Vec<Clause> {
    formula
        .clauses()
        .iter()
        .enumerate()
        .map(|(ci, c)| {
            let flip_clause = renaming.clause_flipped.contains(&ci);
            c.rename(|v| renaming.flips(v) ^ flip_clause)
        })
        .collect()
}
