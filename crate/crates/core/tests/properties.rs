//! Randomized properties checked against exhaustive enumeration.

use minsat::cnf::{emit_dimacs, parse_dimacs, remove_dominated, Clause, CnfFormula, Var};
use minsat::driver::{compile_both, load_artifact, save_artifact, CompiledClass, LearnConfig};
use minsat::forms::{detect_restricted_hidden_horn, solve_horn_minsat, HornOutcome, Renaming};
use minsat::gen::{random_costs, random_horn, random_ksat};
use minsat::instance::{normalize, Assignment, Fixing, MinsatInstance, RawCosts};
use minsat::oracle::{self, brute_force, OracleOutcome};
use minsat::partition::{compute_partition, verify_partition_for};
use minsat::solver::{solve, Outcome, SolveOptions};
use minsat::Mode;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn all_assignments(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u32..1 << n).map(move |bits| (0..n).map(|i| bits >> i & 1 == 1).collect())
}

fn random_fixing(n: usize, rng: &mut impl Rng) -> Fixing {
    let vars: Vec<Var> = (0..n).map(Var::from_index).collect();
    fixing_over(&vars, 0.3, rng)
}

fn fixing_over(vars: &[Var], p: f64, rng: &mut impl Rng) -> Fixing {
    let mut pairs = Vec::new();
    for &v in vars {
        if rng.gen_bool(p) {
            pairs.push((v, rng.gen_bool(0.5)));
        }
    }
    Fixing::new(pairs).unwrap()
}

fn random_raw(n: usize, rng: &mut impl Rng) -> RawCosts {
    RawCosts { pairs: (0..n).map(|_| (rng.gen_range(-5..=9), rng.gen_range(-5..=9))).collect(), scale_exp: 0 }
}

fn learned_class(seed: u64, n: usize, m: usize) -> CompiledClass {
    let mut r = rng(seed);
    let f = random_ksat(n, m, 3, &mut r);
    let costs = random_costs(n, 0, 9, &mut r);
    let mut cc = CompiledClass::from_instance(&MinsatInstance::new(f, costs).unwrap());
    compile_both(&mut cc, &LearnConfig { samples_per_level: 8, seed, ..LearnConfig::default() });
    cc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalization_preserves_costs(seed in any::<u64>(), n in 1usize..=12) {
        let mut r = rng(seed);
        let f = random_ksat(n, n, 2.min(n), &mut r);
        let raw = random_raw(n, &mut r);
        let inst = normalize(&f, &raw).unwrap();
        prop_assert!(inst.costs().iter().all(|&c| c >= 0));
        let norm = inst.norm();
        for a in all_assignments(n) {
            let b = norm.translate(&a);
            let total = inst.total_cost(&Assignment::from_total(&b)).unwrap();
            prop_assert_eq!(raw.cost_of(&a), norm.denormalize_cost(total));
            prop_assert_eq!(f.is_satisfied_by(&a), inst.formula().is_satisfied_by(&b));
        }
    }

    #[test]
    fn normalization_keeps_argmin(seed in any::<u64>(), n in 1usize..=10) {
        let mut r = rng(seed);
        let f = random_ksat(n, 2 * n, 3.min(n), &mut r);
        let raw = random_raw(n, &mut r);
        let inst = normalize(&f, &raw).unwrap();
        let models: Vec<Vec<bool>> = all_assignments(n).filter(|a| f.is_satisfied_by(a)).collect();
        let best = models.iter().map(|a| raw.cost_of(a)).min();
        let argmin: Vec<&Vec<bool>> = models.iter().filter(|a| Some(raw.cost_of(a)) == best).collect();
        let nbest = models.iter().map(|a| inst.cost_of(&inst.norm().translate(a))).min();
        let nargmin: Vec<&Vec<bool>> =
            models.iter().filter(|a| Some(inst.cost_of(&inst.norm().translate(a))) == nbest).collect();
        prop_assert_eq!(argmin, nargmin);
    }

    #[test]
    fn solver_matches_oracle_under_fixings(seed in any::<u64>(), n in 1usize..=12) {
        let mut r = rng(seed);
        let f = random_ksat(n, r.gen_range(0..=4 * n), 3.min(n), &mut r);
        let inst = MinsatInstance::new(f, random_costs(n, 0, 9, &mut r)).unwrap();
        let cc = CompiledClass::from_instance(&inst);
        let fix = random_fixing(n, &mut r);
        let expected = brute_force(&inst, &fix, Mode::Minsat).unwrap().cost();
        let got = solve(&cc, &fix, &SolveOptions::new(Mode::Minsat)).unwrap();
        prop_assert_eq!(got.outcome.cost(), expected);
        let sat = solve(&cc, &fix, &SolveOptions::new(Mode::Sat)).unwrap();
        prop_assert_eq!(sat.outcome.is_unsat(), expected.is_none());
    }

    #[test]
    fn removal_of_dominated_clauses_keeps_models(seed in any::<u64>(), n in 2usize..=14) {
        let mut r = rng(seed);
        let f = random_ksat(n, 3 * n, 3.min(n), &mut r);
        // Lemmas drawn from clauses the formula already implies.
        let before = oracle::models(&f).unwrap();
        let inst = MinsatInstance::with_zero_costs(f.clone());
        let lemmas: Vec<Clause> = f
            .clauses()
            .iter()
            .flat_map(|c| c.lits().iter().map(move |&l| c.without(l)))
            .filter(|c| oracle::implies(&inst, c).unwrap())
            .take(3)
            .collect();
        let mut reduced = remove_dominated(&f, &lemmas);
        let mut clauses = reduced.clauses().to_vec();
        clauses.extend(lemmas.iter().cloned());
        reduced = CnfFormula::new(n, clauses).unwrap();
        prop_assert_eq!(oracle::models(&reduced).unwrap(), before);
    }

    #[test]
    fn dimacs_round_trip(seed in any::<u64>(), n in 0usize..=30) {
        let mut r = rng(seed);
        let f = if n == 0 { CnfFormula::new(0, vec![]).unwrap() } else { random_ksat(n, 2 * n, 3.min(n), &mut r) };
        let text = emit_dimacs(&f);
        let back = parse_dimacs(&text).unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(emit_dimacs(&back), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn horn_solution_is_minimal_model(seed in any::<u64>(), n in 1usize..=12) {
        let mut r = rng(seed);
        let horn = random_horn(n, 2 * n, 3, &mut r);
        // Hide the Horn structure behind a random renaming.
        let flips: Vec<bool> = (0..n).map(|_| r.gen_bool(0.5)).collect();
        let hidden = CnfFormula::new(n, horn.clauses().iter().map(|c| c.rename(|v| flips[v.index()])).collect()).unwrap();
        // Only zero-cost variables may be flipped.
        let costs = random_costs(n, 0, 5, &mut r).into_iter().zip(&flips).map(|(c, &f)| if f { 0 } else { c }).collect();
        let inst = MinsatInstance::new(hidden.clone(), costs).unwrap();
        let renaming: Renaming =
            detect_restricted_hidden_horn(&inst, inst.clauses()).expect("hidden Horn by construction");
        let out = solve_horn_minsat(&inst, &renaming, &Fixing::empty()).unwrap();
        let table = renaming.flip_table(n);
        let models = oracle::models(&hidden).unwrap();
        match out {
            HornOutcome::Unsat => prop_assert!(models.is_empty()),
            HornOutcome::Optimal { values, cost } => {
                prop_assert!(hidden.is_satisfied_by(&values));
                prop_assert_eq!(Some(cost), brute_force(&inst, &Fixing::empty(), Mode::Minsat).unwrap().cost());
                let renamed = |a: &[bool]| -> Vec<bool> { a.iter().zip(&table).map(|(&v, &f)| v ^ f).collect() };
                let min = renamed(&values);
                for m in &models {
                    let rm = renamed(m);
                    prop_assert!(min.iter().zip(&rm).all(|(&a, &b)| !a || b));
                }
            }
        }
    }

    #[test]
    fn partitions_survive_fixings(seed in any::<u64>(), n in 1usize..=30) {
        let mut r = rng(seed);
        let f = random_ksat(n, 2 * n, 3.min(n), &mut r);
        let inst = MinsatInstance::new(f, random_costs(n, 0, 5, &mut r)).unwrap();
        let p = compute_partition(&inst);
        let enumerated = p.enumerated();
        let fix = fixing_over(&enumerated, 0.5, &mut r);
        let reduced: Vec<Clause> = inst
            .clauses()
            .iter()
            .filter(|c| !fix.lits().any(|l| c.contains(l)))
            .map(|c| c.restrict(|v| !fix.pairs().iter().any(|&(w, _)| w == v)))
            .collect();
        prop_assert!(verify_partition_for(n, inst.costs(), &reduced, &p));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn learning_is_transparent(seed in any::<u64>()) {
        let cc = learned_class(seed, 12, 50);
        let fresh = CompiledClass::from_instance(cc.instance());
        let mut r = rng(seed ^ 0x5eed);
        for _ in 0..10 {
            let fix = random_fixing(12, &mut r);
            for mode in [Mode::Sat, Mode::Minsat] {
                let a = solve(&cc, &fix, &SolveOptions::new(mode)).unwrap().outcome;
                let b = solve(&fresh, &fix, &SolveOptions::new(mode)).unwrap().outcome;
                prop_assert_eq!(a.is_unsat(), b.is_unsat());
                if mode == Mode::Minsat {
                    prop_assert_eq!(a.cost(), b.cost());
                }
                if let Outcome::Optimal { values, .. } = &a {
                    prop_assert!(cc.instance().formula().is_satisfied_by(values));
                }
            }
        }
    }

    #[test]
    fn learned_clauses_are_sound(seed in any::<u64>()) {
        let cc = learned_class(seed, 12, 50);
        for p in cc.pairs() {
            let c = oracle::min_cost_violating(cc.instance(), &p.literals).unwrap();
            prop_assert!(c.is_none_or(|c| c >= p.threshold));
        }
        for l in cc.lemmas().iter().filter(|l| l.threshold().is_none()) {
            prop_assert!(oracle::implies(cc.instance(), &l.clause).unwrap());
        }
    }

    #[test]
    fn artifact_round_trip(seed in any::<u64>()) {
        let cc = learned_class(seed, 10, 42);
        let text = save_artifact(&cc);
        let back = load_artifact(&text).unwrap();
        prop_assert_eq!(&back, &cc);
        prop_assert_eq!(save_artifact(&back), text);
    }
}

#[test]
fn oracle_outcome_has_cost_of_witness() {
    let mut r = rng(7);
    for _ in 0..50 {
        let f = random_ksat(8, 20, 3, &mut r);
        let inst = MinsatInstance::new(f, random_costs(8, 0, 9, &mut r)).unwrap();
        if let OracleOutcome::Optimal { values, cost } = brute_force(&inst, &Fixing::empty(), Mode::Minsat).unwrap() {
            assert_eq!(inst.cost_of(&values), cost);
        }
    }
}
