//! 2-SAT via strongly connected components of the implication graph.

/// A literal over 2-SAT variable `var`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct TLit {
    pub var: usize,
    pub value: bool,
}

impl TLit {
    pub fn is(var: usize, value: bool) -> TLit {
        TLit { var, value }
    }

    fn node(self) -> usize {
        2 * self.var + usize::from(self.value)
    }

    fn negated_node(self) -> usize {
        2 * self.var + usize::from(!self.value)
    }
}

pub(crate) struct TwoSat {
    adj: Vec<Vec<usize>>,
}

impl TwoSat {
    pub fn new(num_vars: usize) -> TwoSat {
        TwoSat { adj: vec![Vec::new(); 2 * num_vars] }
    }

    /// Adds `a ∨ b`.
    pub fn add_clause(&mut self, a: TLit, b: TLit) {
        self.adj[a.negated_node()].push(b.node());
        self.adj[b.negated_node()].push(a.node());
    }

    /// Adds the unit clause `a`.
    pub fn add_unit(&mut self, a: TLit) {
        self.add_clause(a, a);
    }

    /// A satisfying assignment, or `None`. The assignment is the canonical
    /// one read off the component order, so equal inputs give equal output.
    pub fn solve(&self) -> Option<Vec<bool>> {
        let comp = tarjan(&self.adj);
        let n = self.adj.len() / 2;
        let mut values = Vec::with_capacity(n);
        for v in 0..n {
            let (f, t) = (comp[2 * v], comp[2 * v + 1]);
            if t == f {
                return None;
            }
            // Tarjan numbers components in reverse topological order. An
            // unconstrained variable gets False: its False node completes first.
            values.push(t < f);
        }
        Some(values)
    }
}

/// Component index of every node, numbered in order of completion.
fn tarjan(adj: &[Vec<usize>]) -> Vec<usize> {
    const UNSET: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNSET; n];
    let mut low = vec![0; n];
    let mut comp = vec![UNSET; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut call: Vec<(usize, usize)> = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;

    for root in 0..n {
        if index[root] != UNSET {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (u, ref mut edge)) = call.last_mut() {
            if let Some(&w) = adj[u].get(*edge) {
                *edge += 1;
                if index[w] == UNSET {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[u] = low[u].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[u]);
            }
            if low[u] == index[u] {
                loop {
                    let w = stack.pop().expect("component root is on the stack");
                    on_stack[w] = false;
                    comp[w] = next_comp;
                    if w == u {
                        break;
                    }
                }
                next_comp += 1;
            }
        }
    }
    comp
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(n: usize, clauses: &[(TLit, TLit)]) -> bool {
        (0..1u32 << n).any(|m| {
            let val = |l: TLit| ((m >> l.var) & 1 == 1) == l.value;
            clauses.iter().all(|&(a, b)| val(a) || val(b))
        })
    }

    #[test]
    fn agrees_with_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..400 {
            let n = rng.gen_range(1..7);
            let m = rng.gen_range(0..14);
            let clauses: Vec<_> = (0..m)
                .map(|_| {
                    let a = TLit::is(rng.gen_range(0..n), rng.gen());
                    let b = TLit::is(rng.gen_range(0..n), rng.gen());
                    (a, b)
                })
                .collect();
            let mut ts = TwoSat::new(n);
            for &(a, b) in &clauses {
                ts.add_clause(a, b);
            }
            let sol = ts.solve();
            assert_eq!(sol.is_some(), brute(n, &clauses));
            if let Some(vals) = sol {
                let val = |l: TLit| vals[l.var] == l.value;
                assert!(clauses.iter().all(|&(a, b)| val(a) || val(b)));
            }
        }
    }

    #[test]
    fn unit_forces_value() {
        let mut ts = TwoSat::new(2);
        ts.add_unit(TLit::is(0, false));
        ts.add_clause(TLit::is(0, true), TLit::is(1, true));
        assert_eq!(ts.solve(), Some(vec![false, true]));
        ts.add_unit(TLit::is(1, false));
        assert_eq!(ts.solve(), None);
    }
}
