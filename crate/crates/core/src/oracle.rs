//! Exhaustive reference solver.
//!
//! Shares no code with the search: no propagation, no branching rule, just
//! every assignment of the free variables checked against bitmasks.

use thiserror::Error;

use crate::cnf::{Clause, CnfFormula};
use crate::instance::{Fixing, MinsatInstance};
use crate::Mode;

/// Largest number of free variables the oracle will enumerate.
pub const MAX_FREE_VARS: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleOutcome {
    Unsat,
    /// A witness and its cost. In SAT mode the witness is the first model
    /// found, not necessarily a cheapest one.
    Optimal { values: Vec<bool>, cost: i64 },
}

impl OracleOutcome {
    pub fn cost(&self) -> Option<i64> {
        match self {
            OracleOutcome::Unsat => None,
            OracleOutcome::Optimal { cost, .. } => Some(*cost),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{0} free variables exceed the oracle limit of {MAX_FREE_VARS}")]
    TooManyVariables(usize),
    #[error("fixing mentions a variable outside the instance")]
    BadFixing,
}

pub fn brute_force(
    instance: &MinsatInstance,
    fixing: &Fixing,
    mode: Mode,
) -> Result<OracleOutcome, OracleError> {
    let n = instance.num_vars();
    let mut fixed: Vec<Option<bool>> = vec![None; n];
    for &(v, b) in fixing.pairs() {
        *fixed.get_mut(v.index()).ok_or(OracleError::BadFixing)? = Some(b);
    }
    let free: Vec<usize> = (0..n).filter(|&i| fixed[i].is_none()).collect();
    if free.len() > MAX_FREE_VARS {
        return Err(OracleError::TooManyVariables(free.len()));
    }
    let mut bit = vec![usize::MAX; n];
    for (b, &i) in free.iter().enumerate() {
        bit[i] = b;
    }

    // (positive mask, negative mask) of each clause not already satisfied.
    let mut masks: Vec<(u32, u32)> = Vec::new();
    for clause in instance.clauses() {
        let (mut pos, mut neg) = (0u32, 0u32);
        let mut satisfied = false;
        for l in clause.lits() {
            let i = l.var().index();
            match fixed[i] {
                Some(b) => satisfied |= b == l.is_positive(),
                None if l.is_positive() => pos |= 1 << bit[i],
                None => neg |= 1 << bit[i],
            }
        }
        if satisfied {
            continue;
        }
        if pos | neg == 0 {
            return Ok(OracleOutcome::Unsat);
        }
        masks.push((pos, neg));
    }

    let costs = instance.costs();
    let fixed_cost: i64 = (0..n).filter(|&i| fixed[i] == Some(true)).map(|i| costs[i]).sum();
    let free_costs: Vec<i64> = free.iter().map(|&i| costs[i]).collect();

    let mut best: Option<(u32, i64)> = None;
    for m in 0..(1u64 << free.len()) {
        let m = m as u32;
        if !masks.iter().all(|&(pos, neg)| m & pos != 0 || !m & neg != 0) {
            continue;
        }
        let cost = fixed_cost
            + free_costs
                .iter()
                .enumerate()
                .filter(|(b, _)| m >> b & 1 == 1)
                .map(|(_, &c)| c)
                .sum::<i64>();
        if best.is_none_or(|(_, c)| cost < c) {
            best = Some((m, cost));
            if mode == Mode::Sat {
                break;
            }
        }
    }

    Ok(match best {
        None => OracleOutcome::Unsat,
        Some((m, cost)) => {
            let values = (0..n).map(|i| fixed[i].unwrap_or_else(|| m >> bit[i] & 1 == 1)).collect();
            OracleOutcome::Optimal { values, cost }
        }
    })
}

/// Every model of `formula`, in binary counting order.
pub fn models(formula: &CnfFormula) -> Result<Vec<Vec<bool>>, OracleError> {
    let n = formula.num_vars();
    if n > MAX_FREE_VARS {
        return Err(OracleError::TooManyVariables(n));
    }
    Ok((0..1u64 << n)
        .map(|m| (0..n).map(|i| m >> i & 1 == 1).collect::<Vec<bool>>())
        .filter(|v| formula.is_satisfied_by(v))
        .collect())
}

/// Whether every model of `instance` satisfies `clause`.
pub fn implies(instance: &MinsatInstance, clause: &Clause) -> Result<bool, OracleError> {
    Ok(brute_force(instance, &Fixing::falsifying(clause), Mode::Sat)? == OracleOutcome::Unsat)
}

/// Cheapest model violating `clause`, or `None` if no model does.
pub fn min_cost_violating(
    instance: &MinsatInstance,
    clause: &Clause,
) -> Result<Option<i64>, OracleError> {
    Ok(brute_force(instance, &Fixing::falsifying(clause), Mode::Minsat)?.cost())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(n: usize, clauses: &[&[i64]], costs: &[i64]) -> MinsatInstance {
        MinsatInstance::new(CnfFormula::from_dimacs(n, clauses), costs.to_vec()).unwrap()
    }

    #[test]
    fn contradiction_is_unsat() {
        let i = inst(1, &[&[1], &[-1]], &[0]);
        assert_eq!(brute_force(&i, &Fixing::empty(), Mode::Minsat), Ok(OracleOutcome::Unsat));
    }

    #[test]
    fn cheapest_of_a_disjunction() {
        let i = inst(2, &[&[1, 2]], &[3, 1]);
        assert_eq!(
            brute_force(&i, &Fixing::empty(), Mode::Minsat),
            Ok(OracleOutcome::Optimal { values: vec![false, true], cost: 1 })
        );
    }

    #[test]
    fn empty_formula_costs_nothing() {
        let i = inst(2, &[], &[1, 1]);
        assert_eq!(
            brute_force(&i, &Fixing::empty(), Mode::Minsat),
            Ok(OracleOutcome::Optimal { values: vec![false, false], cost: 0 })
        );
    }

    #[test]
    fn fixing_is_respected() {
        let i = inst(2, &[&[1, 2]], &[3, 1]);
        let fix: Fixing = "2=F".parse().unwrap();
        assert_eq!(brute_force(&i, &fix, Mode::Minsat).unwrap().cost(), Some(3));
        let fix: Fixing = "1=F,2=F".parse().unwrap();
        assert_eq!(brute_force(&i, &fix, Mode::Minsat), Ok(OracleOutcome::Unsat));
    }

    #[test]
    fn guard() {
        let i = MinsatInstance::with_zero_costs(CnfFormula::new(25, vec![]).unwrap());
        assert_eq!(
            brute_force(&i, &Fixing::empty(), Mode::Sat),
            Err(OracleError::TooManyVariables(25))
        );
        let fix: Fixing = "1=T".parse().unwrap();
        assert!(brute_force(&i, &fix, Mode::Sat).is_ok());
    }

    #[test]
    fn permutation_invariance() {
        use rand::seq::SliceRandom;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.gen_range(1..9);
            let clauses: Vec<Vec<i64>> = (0..rng.gen_range(0..20))
                .map(|_| {
                    let mut vs: Vec<i64> = (1..=n as i64).collect();
                    vs.shuffle(&mut rng);
                    vs.truncate(rng.gen_range(1..=3.min(n)));
                    vs.into_iter().map(|v| if rng.gen() { v } else { -v }).collect()
                })
                .collect();
            let costs: Vec<i64> = (0..n).map(|_| rng.gen_range(0..10)).collect();
            let refs: Vec<&[i64]> = clauses.iter().map(Vec::as_slice).collect();
            let a = inst(n, &refs, &costs);

            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let permuted: Vec<Vec<i64>> = clauses
                .iter()
                .map(|c| {
                    c.iter()
                        .map(|&l| (perm[l.unsigned_abs() as usize - 1] as i64 + 1) * l.signum())
                        .collect()
                })
                .collect();
            let mut pcosts = vec![0; n];
            for i in 0..n {
                pcosts[perm[i]] = costs[i];
            }
            let refs: Vec<&[i64]> = permuted.iter().map(Vec::as_slice).collect();
            let b = inst(n, &refs, &pcosts);
            let ca = brute_force(&a, &Fixing::empty(), Mode::Minsat).unwrap().cost();
            let cb = brute_force(&b, &Fixing::empty(), Mode::Minsat).unwrap().cost();
            assert_eq!(ca, cb);
        }
    }
}
