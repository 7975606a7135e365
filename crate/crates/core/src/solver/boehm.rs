//! Böhm's branching rule, restricted to the enumerated variables.
//!
//! For a candidate `x`, `g_x(i)` counts occurrences of `x` in current
//! clauses of length `i` that contain at most one literal over an easy
//! variable, and `h_x(i)` does the same for `¬x`. The combined score is
//! `e_x(i) = max(g_x(i), h_x(i)) + 2·min(g_x(i), h_x(i))` and the
//! lexicographically largest `e_x`, read from the shortest length up, wins.

use std::cmp::Ordering;

use crate::cnf::{Clause, Lit, Var};

/// Occurrence vectors of one candidate, indexed by clause length
/// (`g[0]` is for length 1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoehmScore {
    pub g: Vec<u32>,
    pub h: Vec<u32>,
    pub e: Vec<u32>,
}

impl BoehmScore {
    fn from_counts(g: Vec<u32>, h: Vec<u32>) -> BoehmScore {
        let e = g.iter().zip(&h).map(|(&a, &b)| a.max(b) + 2 * a.min(b)).collect();
        BoehmScore { g, h, e }
    }

    /// The value rule: True iff the positive literal occurs more often and
    /// either no solution is known yet or True is free.
    pub fn first_value(&self, has_incumbent: bool, cost: i64) -> bool {
        let gs: u32 = self.g.iter().sum();
        let hs: u32 = self.h.iter().sum();
        gs > hs && (!has_incumbent || cost == 0)
    }
}

/// Accumulates `g` and `h` for all variables as clauses are fed in.
pub(crate) struct BoehmTable {
    width: usize,
    g: Vec<u32>,
    h: Vec<u32>,
}

impl BoehmTable {
    pub fn new(num_vars: usize, max_len: usize) -> BoehmTable {
        let width = max_len.max(1);
        BoehmTable { width, g: vec![0; num_vars * width], h: vec![0; num_vars * width] }
    }

    pub fn reset(&mut self) {
        self.g.fill(0);
        self.h.fill(0);
    }

    /// Feeds the unassigned literals of one unsatisfied clause.
    pub fn add(&mut self, lits: &[Lit], enumerated: &[bool]) {
        let len = lits.len();
        if len == 0 || len > self.width {
            return;
        }
        let easy = lits.iter().filter(|l| !enumerated[l.var().index()]).count();
        if easy > 1 {
            return;
        }
        for l in lits {
            let v = l.var().index();
            if enumerated[v] {
                let slot = v * self.width + len - 1;
                if l.is_positive() {
                    self.g[slot] += 1;
                } else {
                    self.h[slot] += 1;
                }
            }
        }
    }

    fn e_at(&self, v: usize, i: usize) -> u32 {
        let (a, b) = (self.g[v * self.width + i], self.h[v * self.width + i]);
        a.max(b) + 2 * a.min(b)
    }

    fn cmp_e(&self, a: usize, b: usize) -> Ordering {
        for i in 0..self.width {
            match self.e_at(a, i).cmp(&self.e_at(b, i)) {
                Ordering::Equal => continue,
                other => return other,
            }
        }
        Ordering::Equal
    }

    pub fn score(&self, v: usize) -> BoehmScore {
        let span = v * self.width..(v + 1) * self.width;
        BoehmScore::from_counts(self.g[span.clone()].to_vec(), self.h[span].to_vec())
    }

    /// Candidate with the lexicographically largest `e`, lowest index on
    /// ties, and its first value.
    pub fn select(
        &self,
        candidates: impl Iterator<Item = usize>,
        has_incumbent: bool,
        costs: &[i64],
    ) -> Option<(Var, bool)> {
        let mut best: Option<usize> = None;
        for v in candidates {
            match best {
                Some(b) if self.cmp_e(v, b) != Ordering::Greater => {}
                _ => best = Some(v),
            }
        }
        let v = best?;
        let (gs, hs) = (0..self.width).fold((0u32, 0u32), |(gs, hs), i| {
            (gs + self.g[v * self.width + i], hs + self.h[v * self.width + i])
        });
        let value = gs > hs && (!has_incumbent || costs[v] == 0);
        Some((Var::from_index(v), value))
    }
}

/// Scores of the unfixed enumerated variables over reduced clauses `reduced`
/// (satisfied clauses and false literals already removed).
pub fn boehm_scores(
    reduced: &[Clause],
    enumerated: &[bool],
    unfixed: &[bool],
) -> Vec<(Var, BoehmScore)> {
    let table = fill(reduced, enumerated);
    (0..enumerated.len())
        .filter(|&v| enumerated[v] && unfixed[v])
        .map(|v| (Var::from_index(v), table.score(v)))
        .collect()
}

/// Picks the next branching variable and its first value. `None` when no
/// enumerated variable is unfixed.
pub fn boehm_select(
    reduced: &[Clause],
    enumerated: &[bool],
    unfixed: &[bool],
    has_incumbent: bool,
    costs: &[i64],
) -> Option<(Var, bool)> {
    let table = fill(reduced, enumerated);
    table.select(
        (0..enumerated.len()).filter(|&v| enumerated[v] && unfixed[v]),
        has_incumbent,
        costs,
    )
}

fn fill(reduced: &[Clause], enumerated: &[bool]) -> BoehmTable {
    let max_len = reduced.iter().map(Clause::len).max().unwrap_or(1);
    let mut table = BoehmTable::new(enumerated.len(), max_len);
    for c in reduced {
        table.add(c.lits(), enumerated);
    }
    table
}
