//! Random instance generators for tests and benchmarks.

use rand::seq::index::sample;
use rand::Rng;

use crate::cnf::{Clause, CnfFormula, Var};

fn random_clause(num_vars: usize, k: usize, rng: &mut impl Rng, mut sign: impl FnMut(&mut dyn rand::RngCore, usize) -> bool) -> Clause {
    let k = k.min(num_vars);
    let lits = sample(rng, num_vars, k)
        .into_iter()
        .enumerate()
        .map(|(j, i)| Var::from_index(i).lit(sign(rng, j)))
        .collect();
    Clause::new(lits).expect("distinct variables")
}

/// `m` clauses of `k` distinct variables each, signs uniform.
pub fn random_ksat(num_vars: usize, m: usize, k: usize, rng: &mut impl Rng) -> CnfFormula {
    let clauses = (0..m).map(|_| random_clause(num_vars, k, rng, |r, _| r.gen())).collect();
    CnfFormula::new(num_vars, clauses).expect("in range")
}

/// `m` clauses of 1 to `max_len` literals with at most one positive
/// literal each.
pub fn random_horn(num_vars: usize, m: usize, max_len: usize, rng: &mut impl Rng) -> CnfFormula {
    let clauses = (0..m)
        .map(|_| {
            let k = rng.gen_range(1..=max_len.max(1));
            let positive = rng.gen_range(0..=k);
            random_clause(num_vars, k, rng, |_, j| j == positive)
        })
        .collect();
    CnfFormula::new(num_vars, clauses).expect("in range")
}

/// `m` all-positive clauses of `k` distinct variables.
pub fn random_monotone(num_vars: usize, m: usize, k: usize, rng: &mut impl Rng) -> CnfFormula {
    let clauses = (0..m).map(|_| random_clause(num_vars, k, rng, |_, _| true)).collect();
    CnfFormula::new(num_vars, clauses).expect("in range")
}

/// Integer costs drawn uniformly from `lo..=hi`.
pub fn random_costs(num_vars: usize, lo: i64, hi: i64, rng: &mut impl Rng) -> Vec<i64> {
    (0..num_vars).map(|_| rng.gen_range(lo..=hi)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn shapes() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let f = random_ksat(10, 40, 3, &mut rng);
        assert_eq!(f.len(), 40);
        assert!(f.clauses().iter().all(|c| c.len() == 3));
        let h = random_horn(10, 40, 4, &mut rng);
        assert!(h.clauses().iter().all(|c| c.positive_count() <= 1 && !c.is_empty()));
        let m = random_monotone(10, 20, 2, &mut rng);
        assert!(m.clauses().iter().all(|c| c.positive_count() == c.len()));
    }

    #[test]
    fn deterministic() {
        let a = random_ksat(20, 50, 3, &mut rand_chacha::ChaCha8Rng::seed_from_u64(1));
        let b = random_ksat(20, 50, 3, &mut rand_chacha::ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a, b);
    }
}
