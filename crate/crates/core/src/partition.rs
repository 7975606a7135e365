//! Splitting variables into an easy part, whose partial instance has
//! restricted hidden Horn form, and an enumerated part.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::cnf::{Clause, CnfFormula, Var};
use crate::forms::{hidden_horn_flips, Renaming};
use crate::instance::MinsatInstance;

/// The special property the easy partial instance is known to have.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum PropertyTag {
    HiddenHorn,
    None,
}

/// A split of the variables into enumerated (`X_N`) and easy (`X_E`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    enumerated: Vec<bool>,
    renaming: Renaming,
    tag: PropertyTag,
}

impl Partition {
    /// `enumerated[i]` says whether variable `i + 1` is enumerated.
    pub fn new(enumerated: Vec<bool>, renaming: Renaming, tag: PropertyTag) -> Partition {
        Partition { enumerated, renaming, tag }
    }

    /// Every variable enumerated; trivially valid.
    pub fn all_enumerated(num_vars: usize) -> Partition {
        Partition::new(vec![true; num_vars], Renaming::identity(), PropertyTag::HiddenHorn)
    }

    pub fn num_vars(&self) -> usize {
        self.enumerated.len()
    }

    pub fn is_enumerated(&self, var: Var) -> bool {
        self.enumerated[var.index()]
    }

    pub fn enumerated_flags(&self) -> &[bool] {
        &self.enumerated
    }

    pub fn enumerated(&self) -> Vec<Var> {
        self.vars_where(true)
    }

    pub fn easy(&self) -> Vec<Var> {
        self.vars_where(false)
    }

    pub fn num_enumerated(&self) -> usize {
        self.enumerated.iter().filter(|&&e| e).count()
    }

    /// Renaming under which the easy partial instance is Horn.
    pub fn renaming(&self) -> &Renaming {
        &self.renaming
    }

    pub fn tag(&self) -> PropertyTag {
        self.tag
    }

    fn vars_where(&self, enumerated: bool) -> Vec<Var> {
        self.enumerated
            .iter()
            .enumerate()
            .filter(|(_, &e)| e == enumerated)
            .map(|(i, _)| Var::from_index(i))
            .collect()
    }
}

/// Deletes from every clause the literals over variables outside `keep`.
/// Empty clauses are kept. Costs of dropped variables become 0; numbering
/// is unchanged.
pub fn partial_instance(instance: &MinsatInstance, keep: &BTreeSet<Var>) -> MinsatInstance {
    let clauses = instance
        .clauses()
        .iter()
        .map(|c| c.restrict(|v| keep.contains(&v)))
        .collect();
    let costs = instance
        .costs()
        .iter()
        .enumerate()
        .map(|(i, &c)| if keep.contains(&Var::from_index(i)) { c } else { 0 })
        .collect();
    let formula = CnfFormula::new(instance.num_vars(), clauses).expect("restriction keeps range");
    MinsatInstance::new(formula, costs).expect("costs stay nonnegative")
}

/// Partition of `instance` over its own clauses.
pub fn compute_partition(instance: &MinsatInstance) -> Partition {
    compute_partition_for(instance.num_vars(), instance.costs(), instance.clauses())
}

/// Greedy partition over an explicit clause set.
///
/// Starts with every variable easy. While the easy partial instance lacks
/// the form, the variable in the most pairs of positive literals (pairs
/// whose variables both carry positive cost count first) moves to the
/// enumerated side, ties to the lowest index. A final ascending pass moves
/// back every variable that fits, which makes the result 1-maximal.
pub fn compute_partition_for(num_vars: usize, costs: &[i64], clauses: &[Clause]) -> Partition {
    let mut enumerated = vec![false; num_vars];
    loop {
        if easy_flips(costs, clauses, &enumerated).is_some() {
            break;
        }
        let victim = most_violating(costs, clauses, &enumerated)
            .expect("a failing partial instance has a positive pair");
        enumerated[victim] = true;
    }
    for i in 0..num_vars {
        if enumerated[i] {
            enumerated[i] = false;
            if easy_flips(costs, clauses, &enumerated).is_none() {
                enumerated[i] = true;
            }
        }
    }
    let flips = easy_flips(costs, clauses, &enumerated).expect("greedy result has the form");
    Partition::new(enumerated, renaming_from(&flips), PropertyTag::HiddenHorn)
}

fn renaming_from(flips: &[bool]) -> Renaming {
    Renaming {
        flipped: flips
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(i, _)| Var::from_index(i))
            .collect(),
        clause_flipped: BTreeSet::new(),
    }
}

/// Flip vector making the easy partial instance Horn, if one exists.
fn easy_flips(costs: &[i64], clauses: &[Clause], enumerated: &[bool]) -> Option<Vec<bool>> {
    let easy = |v: Var| !enumerated[v.index()];
    let any_free = costs.iter().enumerate().any(|(i, &c)| c == 0 && !enumerated[i]);
    if !any_free {
        // Nothing may flip: a direct scan decides.
        let ok = clauses
            .iter()
            .all(|c| c.lits().iter().filter(|l| l.is_positive() && easy(l.var())).count() <= 1);
        return ok.then(|| vec![false; enumerated.len()]);
    }
    let restricted: Vec<Clause> = clauses.iter().map(|c| c.restrict(easy)).collect();
    let mut flips = hidden_horn_flips(enumerated.len(), costs, restricted.iter())?;
    // Enumerated variables never appear in the easy part.
    for (f, &e) in flips.iter_mut().zip(enumerated) {
        *f &= !e;
    }
    Some(flips)
}

fn most_violating(costs: &[i64], clauses: &[Clause], enumerated: &[bool]) -> Option<usize> {
    let mut forced = vec![0u32; enumerated.len()];
    let mut total = vec![0u32; enumerated.len()];
    let mut positives = Vec::new();
    for c in clauses {
        positives.clear();
        positives.extend(
            c.lits()
                .iter()
                .filter(|l| l.is_positive() && !enumerated[l.var().index()])
                .map(|l| l.var().index()),
        );
        for (i, &a) in positives.iter().enumerate() {
            for &b in &positives[i + 1..] {
                total[a] += 1;
                total[b] += 1;
                if costs[a] > 0 && costs[b] > 0 {
                    forced[a] += 1;
                    forced[b] += 1;
                }
            }
        }
    }
    (0..enumerated.len())
        .filter(|&i| total[i] > 0)
        // max_by_key keeps the last maximum; reverse to prefer low indices
        .rev()
        .max_by_key(|&i| (forced[i], total[i]))
}

/// Rechecks a stored partition against `clauses`: the renaming may flip
/// only easy zero-cost variables, and every clause restricted to the easy
/// variables must have at most one positive literal after renaming.
pub fn verify_partition_for(
    num_vars: usize,
    costs: &[i64],
    clauses: &[Clause],
    partition: &Partition,
) -> bool {
    if partition.num_vars() != num_vars || costs.len() != num_vars {
        return false;
    }
    let flips = partition.renaming.flip_table(num_vars);
    if partition.renaming.flipped.iter().any(|v| v.index() >= num_vars) {
        return false;
    }
    for (i, &f) in flips.iter().enumerate() {
        if f && (costs[i] != 0 || partition.enumerated[i]) {
            return false;
        }
    }
    clauses.iter().all(|c| {
        c.lits()
            .iter()
            .filter(|l| {
                !partition.enumerated[l.var().index()]
                    && l.flipped_if(flips[l.var().index()]).is_positive()
            })
            .count()
            <= 1
    })
}

pub fn verify_partition(instance: &MinsatInstance, partition: &Partition) -> bool {
    verify_partition_for(instance.num_vars(), instance.costs(), instance.clauses(), partition)
}
