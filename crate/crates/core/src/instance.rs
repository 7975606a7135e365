//! MINSAT instances: cost files, normalization to nonnegative True-costs,
//! assignments, fixings and the variable/clause removal models.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Clause, CnfFormula, Lit, ParseError, Var};

/// Per-variable `(costTrue, costFalse)` pairs as read from a cost file,
/// scaled to integers by `10^scale_exp`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawCosts {
    pub pairs: Vec<(i64, i64)>,
    #[serde(rename = "scaleExp")]
    pub scale_exp: u32,
}

impl RawCosts {
    /// All costs `(0, 0)`.
    pub fn zero(num_vars: usize) -> RawCosts {
        RawCosts { pairs: vec![(0, 0); num_vars], scale_exp: 0 }
    }

    /// Cost 1 for True and 0 for False on every variable.
    pub fn unit(num_vars: usize) -> RawCosts {
        RawCosts { pairs: vec![(1, 0); num_vars], scale_exp: 0 }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Cost of a total assignment in the original (unnormalized) space.
    pub fn cost_of(&self, values: &[bool]) -> i64 {
        self.pairs
            .iter()
            .zip(values)
            .map(|(&(c, d), &v)| if v { c } else { d })
            .sum()
    }
}

/// A decimal literal as `mantissa * 10^-frac_digits`.
fn parse_decimal(tok: &str) -> Option<(i128, u32)> {
    let (neg, body) = match tok.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, tok.strip_prefix('+').unwrap_or(tok)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let frac = frac.trim_end_matches('0');
    let digits = format!("{int}{frac}");
    let mut mantissa: i128 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    if neg {
        mantissa = -mantissa;
    }
    Some((mantissa, frac.len() as u32))
}

/// Costs need at most this many decimal places.
pub const MAX_SCALE_EXP: u32 = 18;

/// Parses a cost file of `<var> <costTrue> <costFalse>` lines. Omitted
/// variables get `(0, 0)`. Decimals are scaled by the smallest power of ten
/// that makes every value integral.
pub fn parse_costs(text: &str, num_vars: usize) -> Result<RawCosts, ParseError> {
    let mut seen = vec![None::<usize>; num_vars];
    let mut entries = Vec::new();
    let mut scale_exp = 0u32;
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        let [v, ct, cf] = toks.as_slice() else {
            return Err(ParseError::CostLine { line });
        };
        let var: i64 = v.parse().map_err(|_| ParseError::Number { line, token: v.to_string() })?;
        if var < 1 || var as u64 > num_vars as u64 {
            return Err(ParseError::VariableOutOfRange { line, var, num_vars });
        }
        let idx = var as usize - 1;
        if seen[idx].is_some() {
            return Err(ParseError::DuplicateVariable { line, var: var as u32 });
        }
        seen[idx] = Some(line);
        let num = |t: &str| {
            parse_decimal(t).ok_or_else(|| ParseError::Number { line, token: t.to_string() })
        };
        let (c, d) = (num(ct)?, num(cf)?);
        scale_exp = scale_exp.max(c.1).max(d.1);
        entries.push((idx, c, d));
    }

    if scale_exp > MAX_SCALE_EXP {
        return Err(ParseError::Overflow);
    }
    let scale = |(m, e): (i128, u32)| -> Result<i64, ParseError> {
        let factor = 10i128.checked_pow(scale_exp - e).ok_or(ParseError::Overflow)?;
        m.checked_mul(factor)
            .and_then(|v| i64::try_from(v).ok())
            .ok_or(ParseError::Overflow)
    };
    let mut pairs = vec![(0, 0); num_vars];
    for (idx, c, d) in entries {
        pairs[idx] = (scale(c)?, scale(d)?);
    }
    Ok(RawCosts { pairs, scale_exp })
}

/// Canonical cost file text: one line per variable with a nonzero pair.
pub fn emit_costs(costs: &RawCosts) -> String {
    let mut out = String::new();
    if costs.scale_exp > 0 {
        out.push_str(&format!("c costs scaled by 10^{}\n", costs.scale_exp));
    }
    for (i, &(c, d)) in costs.pairs.iter().enumerate() {
        if (c, d) != (0, 0) {
            out.push_str(&format!(
                "{} {} {}\n",
                i + 1,
                format_scaled(c, costs.scale_exp),
                format_scaled(d, costs.scale_exp)
            ));
        }
    }
    out
}

/// Formats `value / 10^scale_exp` as an exact decimal.
pub fn format_scaled(value: i64, scale_exp: u32) -> String {
    if scale_exp == 0 {
        return value.to_string();
    }
    let factor = 10u128.pow(scale_exp);
    let sign = if value < 0 { "-" } else { "" };
    let abs = value.unsigned_abs() as u128;
    let frac = format!("{:0width$}", abs % factor, width = scale_exp as usize);
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        format!("{sign}{}", abs / factor)
    } else {
        format!("{sign}{}.{frac}", abs / factor)
    }
}

/// How an instance was normalized: which variables were complemented and
/// the constant removed from every total cost.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationRecord {
    pub flipped: Vec<bool>,
    pub offset: i64,
    #[serde(rename = "scaleExp")]
    pub scale_exp: u32,
}

impl NormalizationRecord {
    pub fn identity(num_vars: usize) -> NormalizationRecord {
        NormalizationRecord { flipped: vec![false; num_vars], offset: 0, scale_exp: 0 }
    }

    pub fn is_flipped(&self, var: Var) -> bool {
        self.flipped[var.index()]
    }

    /// Maps a total assignment between normalized and original polarity.
    /// The map is its own inverse.
    pub fn translate(&self, values: &[bool]) -> Vec<bool> {
        values.iter().zip(&self.flipped).map(|(&v, &f)| v ^ f).collect()
    }

    pub fn translate_lit(&self, lit: Lit) -> Lit {
        lit.flipped_if(self.is_flipped(lit.var()))
    }

    /// Original-space cost (still scaled by `10^scale_exp`).
    pub fn denormalize_cost(&self, normalized: i64) -> i64 {
        normalized + self.offset
    }

    /// Original-space cost as an exact decimal string.
    pub fn format_cost(&self, normalized: i64) -> String {
        format_scaled(self.denormalize_cost(normalized), self.scale_exp)
    }
}

/// A CNF formula with nonnegative True-costs; every False-cost is zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinsatInstance {
    formula: CnfFormula,
    costs: Vec<i64>,
    norm: NormalizationRecord,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("expected {expected} costs, got {got}")]
    CostCount { expected: usize, got: usize },
    #[error("cost of {0} is negative")]
    NegativeCost(Var),
    #[error("{var} is out of range for {num_vars} variables")]
    VarOutOfRange { var: Var, num_vars: usize },
    #[error("clause index {index} out of range for {len} clauses")]
    ClauseOutOfRange { index: usize, len: usize },
    #[error("assignment leaves {0} unassigned")]
    Partial(Var),
    #[error("assignment has {got} entries for {expected} variables")]
    AssignmentLength { expected: usize, got: usize },
    #[error("cost overflow")]
    Overflow,
}

impl MinsatInstance {
    /// An instance that is already in normalized form.
    pub fn new(formula: CnfFormula, costs: Vec<i64>) -> Result<MinsatInstance, InstanceError> {
        if costs.len() != formula.num_vars() {
            return Err(InstanceError::CostCount { expected: formula.num_vars(), got: costs.len() });
        }
        if let Some(i) = costs.iter().position(|&c| c < 0) {
            return Err(InstanceError::NegativeCost(Var::from_index(i)));
        }
        let norm = NormalizationRecord::identity(formula.num_vars());
        Ok(MinsatInstance { formula, costs, norm })
    }

    /// Cost 1 for True on every variable.
    pub fn with_unit_costs(formula: CnfFormula) -> MinsatInstance {
        let n = formula.num_vars();
        MinsatInstance::new(formula, vec![1; n]).expect("unit costs are valid")
    }

    pub fn with_zero_costs(formula: CnfFormula) -> MinsatInstance {
        let n = formula.num_vars();
        MinsatInstance::new(formula, vec![0; n]).expect("zero costs are valid")
    }

    pub fn formula(&self) -> &CnfFormula {
        &self.formula
    }

    pub fn clauses(&self) -> &[Clause] {
        self.formula.clauses()
    }

    pub fn num_vars(&self) -> usize {
        self.formula.num_vars()
    }

    pub fn costs(&self) -> &[i64] {
        &self.costs
    }

    pub fn cost(&self, var: Var) -> i64 {
        self.costs[var.index()]
    }

    pub fn norm(&self) -> &NormalizationRecord {
        &self.norm
    }

    /// Cost of a total assignment in normalized space.
    pub fn total_cost(&self, assignment: &Assignment) -> Result<i64, InstanceError> {
        let values = assignment.to_total()?;
        if values.len() != self.num_vars() {
            return Err(InstanceError::AssignmentLength {
                expected: self.num_vars(),
                got: values.len(),
            });
        }
        Ok(self.cost_of(&values))
    }

    pub fn cost_of(&self, values: &[bool]) -> i64 {
        self.costs.iter().zip(values).filter(|(_, &v)| v).map(|(&c, _)| c).sum()
    }

    fn check_var(&self, var: Var) -> Result<(), InstanceError> {
        if var.index() >= self.num_vars() {
            return Err(InstanceError::VarOutOfRange { var, num_vars: self.num_vars() });
        }
        Ok(())
    }

    /// Makes variable `x` removable. Fresh zero-cost variables `v`, `w_t`,
    /// `w_f` are appended (in that order); `x` is replaced by `w_t` and `¬x`
    /// by `w_f`, and the definitions `w_t ⇔ v ∧ x` and `w_f ⇔ v ∧ ¬x` are
    /// added. Fixing `v` True keeps `x`; fixing it False deletes `x`.
    pub fn model_variable_removal(&self, x: Var) -> Result<MinsatInstance, InstanceError> {
        self.check_var(x)?;
        let n = self.num_vars();
        let v = Var::from_index(n);
        let wt = Var::from_index(n + 1);
        let wf = Var::from_index(n + 2);
        let mut clauses: Vec<Clause> = self
            .clauses()
            .iter()
            .map(|c| {
                let lits = c
                    .lits()
                    .iter()
                    .map(|&l| match (l.var() == x, l.is_positive()) {
                        (true, true) => wt.pos(),
                        (true, false) => wf.pos(),
                        _ => l,
                    })
                    .collect();
                Clause::new(lits).expect("replacement cannot create tautologies")
            })
            .collect();
        let def = |lits: Vec<Lit>| Clause::new(lits).expect("definition clause");
        clauses.extend([
            def(vec![wt.neg(), v.pos()]),
            def(vec![wt.neg(), x.pos()]),
            def(vec![wt.pos(), v.neg(), x.neg()]),
            def(vec![wf.neg(), v.pos()]),
            def(vec![wf.neg(), x.neg()]),
            def(vec![wf.pos(), v.neg(), x.pos()]),
        ]);
        Ok(self.extended(clauses, 3))
    }

    /// Makes clause `index` removable by appending a fresh zero-cost
    /// variable `w` to it. `w` False keeps the clause; `w` True deletes it.
    pub fn model_clause_removal(&self, index: usize) -> Result<MinsatInstance, InstanceError> {
        let len = self.clauses().len();
        if index >= len {
            return Err(InstanceError::ClauseOutOfRange { index, len });
        }
        let w = Var::from_index(self.num_vars());
        let mut clauses = self.clauses().to_vec();
        let mut lits = clauses[index].lits().to_vec();
        lits.push(w.pos());
        clauses[index] = Clause::new(lits).expect("fresh variable");
        Ok(self.extended(clauses, 1))
    }

    fn extended(&self, clauses: Vec<Clause>, fresh: usize) -> MinsatInstance {
        let n = self.num_vars() + fresh;
        let mut costs = self.costs.clone();
        costs.resize(n, 0);
        let mut norm = self.norm.clone();
        norm.flipped.resize(n, false);
        MinsatInstance {
            formula: CnfFormula::new(n, clauses).expect("fresh variables are in range"),
            costs,
            norm,
        }
    }
}

/// Normalizes raw costs so that every False-cost is 0 and every True-cost
/// is nonnegative. Variables whose residual False-cost is positive are
/// complemented in the formula.
pub fn normalize(formula: &CnfFormula, raw: &RawCosts) -> Result<MinsatInstance, InstanceError> {
    let n = formula.num_vars();
    if raw.len() != n {
        return Err(InstanceError::CostCount { expected: n, got: raw.len() });
    }
    let mut costs = Vec::with_capacity(n);
    let mut flipped = Vec::with_capacity(n);
    let mut offset: i64 = 0;
    for &(c, d) in &raw.pairs {
        let m = c.min(d);
        offset = offset.checked_add(m).ok_or(InstanceError::Overflow)?;
        let (rc, rd) = (c - m, d - m);
        if rd > 0 {
            costs.push(rd);
            flipped.push(true);
        } else {
            costs.push(rc);
            flipped.push(false);
        }
    }
    let clauses = formula
        .clauses()
        .iter()
        .map(|c| c.rename(|v| flipped[v.index()]))
        .collect();
    Ok(MinsatInstance {
        formula: CnfFormula::new(n, clauses).expect("renaming keeps variables"),
        costs,
        norm: NormalizationRecord { flipped, offset, scale_exp: raw.scale_exp },
    })
}

/// A possibly partial assignment; `None` is unassigned.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment(Vec<Option<bool>>);

impl Assignment {
    pub fn unassigned(num_vars: usize) -> Assignment {
        Assignment(vec![None; num_vars])
    }

    pub fn from_total(values: &[bool]) -> Assignment {
        Assignment(values.iter().map(|&v| Some(v)).collect())
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.0[var.index()]
    }

    pub fn set(&mut self, var: Var, value: Option<bool>) {
        self.0[var.index()] = value;
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_total(&self) -> bool {
        self.0.iter().all(Option::is_some)
    }

    pub fn values(&self) -> &[Option<bool>] {
        &self.0
    }

    pub fn to_total(&self) -> Result<Vec<bool>, InstanceError> {
        self.0
            .iter()
            .enumerate()
            .map(|(i, v)| v.ok_or(InstanceError::Partial(Var::from_index(i))))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FixingError {
    #[error("malformed fixing {0:?}; expected `var=T` or `var=F`")]
    Malformed(String),
    #[error("{0} is fixed twice")]
    Duplicate(Var),
    #[error("{var} is out of range for {num_vars} variables")]
    OutOfRange { var: Var, num_vars: usize },
}

/// An ordered list of `(variable, value)` pairs with distinct variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fixing(Vec<(Var, bool)>);

impl Fixing {
    pub fn new(pairs: Vec<(Var, bool)>) -> Result<Fixing, FixingError> {
        let mut seen = BTreeSet::new();
        for &(v, _) in &pairs {
            if !seen.insert(v) {
                return Err(FixingError::Duplicate(v));
            }
        }
        Ok(Fixing(pairs))
    }

    pub fn empty() -> Fixing {
        Fixing(Vec::new())
    }

    pub fn pairs(&self) -> &[(Var, bool)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The literals made true by the fixing.
    pub fn lits(&self) -> impl Iterator<Item = Lit> + '_ {
        self.0.iter().map(|&(v, b)| v.lit(b))
    }

    pub fn check_range(&self, num_vars: usize) -> Result<(), FixingError> {
        match self.0.iter().find(|(v, _)| v.index() >= num_vars) {
            Some(&(var, _)) => Err(FixingError::OutOfRange { var, num_vars }),
            None => Ok(()),
        }
    }

    /// The fixing that falsifies every literal of `clause`.
    pub fn falsifying(clause: &Clause) -> Fixing {
        Fixing(clause.lits().iter().map(|l| (l.var(), !l.is_positive())).collect())
    }
}

impl FromStr for Fixing {
    type Err = FixingError;

    /// Parses `1=T,5=F`. The empty string is the empty fixing.
    fn from_str(s: &str) -> Result<Fixing, FixingError> {
        let mut pairs = Vec::new();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let bad = || FixingError::Malformed(item.to_string());
            let (v, val) = item.split_once('=').ok_or_else(bad)?;
            let n: u32 = v.trim().parse().map_err(|_| bad())?;
            if n == 0 {
                return Err(bad());
            }
            let value = match val.trim() {
                "T" | "t" | "1" | "true" => true,
                "F" | "f" | "0" | "false" => false,
                _ => return Err(bad()),
            };
            pairs.push((Var::new(n), value));
        }
        Fixing::new(pairs)
    }
}

impl fmt::Display for Fixing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, b)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}={}", v.number(), if *b { 'T' } else { 'F' })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm1(c: i64, d: i64) -> MinsatInstance {
        let f = CnfFormula::from_dimacs(1, &[&[1]]);
        normalize(&f, &RawCosts { pairs: vec![(c, d)], scale_exp: 0 }).unwrap()
    }

    #[test]
    fn cost_file_defaults_and_scaling() {
        assert_eq!(parse_costs("1 3 5", 2).unwrap().pairs, vec![(3, 5), (0, 0)]);
        let r = parse_costs("2 0.5 0", 2).unwrap();
        assert_eq!((r.pairs.clone(), r.scale_exp), (vec![(0, 0), (5, 0)], 1));
        assert_eq!(parse_costs("", 3).unwrap().pairs, vec![(0, 0); 3]);
        let r = parse_costs("c mixed\n1 1.25 -2\n2 3 0.5\n", 2).unwrap();
        assert_eq!((r.pairs, r.scale_exp), (vec![(125, -200), (300, 50)], 2));
    }

    #[test]
    fn cost_file_errors() {
        assert!(matches!(
            parse_costs("3 1 0", 2),
            Err(ParseError::VariableOutOfRange { line: 1, var: 3, .. })
        ));
        assert!(matches!(
            parse_costs("1 1 0\n1 2 0", 2),
            Err(ParseError::DuplicateVariable { line: 2, var: 1 })
        ));
        assert!(matches!(parse_costs("1 x 0", 2), Err(ParseError::Number { line: 1, .. })));
        assert!(matches!(parse_costs("1 1", 2), Err(ParseError::CostLine { line: 1 })));
        assert!(matches!(
            parse_costs("1 99999999999999999999 0", 1),
            Err(ParseError::Overflow)
        ));
    }

    #[test]
    fn emitted_costs_round_trip() {
        let r = parse_costs("1 1.25 -2\n3 0 7\n", 3).unwrap();
        assert_eq!(parse_costs(&emit_costs(&r), 3).unwrap(), r);
    }

    #[test]
    fn normalization_cases() {
        let i = norm1(3, 5);
        assert_eq!((i.costs()[0], i.norm().offset, i.norm().flipped[0]), (2, 3, true));
        assert_eq!(i.clauses()[0], Clause::from_dimacs(&[-1]).unwrap());
        let i = norm1(4, 0);
        assert_eq!((i.costs()[0], i.norm().offset, i.norm().flipped[0]), (4, 0, false));
        let i = norm1(2, 2);
        assert_eq!((i.costs()[0], i.norm().offset, i.norm().flipped[0]), (0, 2, false));
    }

    #[test]
    fn total_cost_sums_true_costs() {
        let f = CnfFormula::from_dimacs(3, &[]);
        let i = MinsatInstance::new(f, vec![1, 1, 1]).unwrap();
        assert_eq!(i.total_cost(&Assignment::from_total(&[false; 3])).unwrap(), 0);
        assert_eq!(i.total_cost(&Assignment::from_total(&[true, false, true])).unwrap(), 2);
        let mut partial = Assignment::from_total(&[true, false, true]);
        partial.set(Var::new(2), None);
        assert_eq!(i.total_cost(&partial), Err(InstanceError::Partial(Var::new(2))));
    }

    #[test]
    fn fixing_text() {
        let f: Fixing = "1=T, 5=F".parse().unwrap();
        assert_eq!(f.pairs(), &[(Var::new(1), true), (Var::new(5), false)]);
        assert_eq!(f.to_string(), "1=T,5=F");
        assert_eq!("".parse::<Fixing>().unwrap(), Fixing::empty());
        assert_eq!("1=T,1=F".parse::<Fixing>(), Err(FixingError::Duplicate(Var::new(1))));
        assert!(matches!("1=X".parse::<Fixing>(), Err(FixingError::Malformed(_))));
        assert!(matches!("0=T".parse::<Fixing>(), Err(FixingError::Malformed(_))));
        assert!(f.check_range(4).is_err());
    }

    #[test]
    fn format_scaled_decimals() {
        assert_eq!(format_scaled(125, 2), "1.25");
        assert_eq!(format_scaled(-50, 2), "-0.5");
        assert_eq!(format_scaled(300, 2), "3");
        assert_eq!(format_scaled(7, 0), "7");
    }

    #[test]
    fn variable_removal_shape() {
        let i = MinsatInstance::with_unit_costs(CnfFormula::from_dimacs(2, &[&[1, 2]]));
        let r = i.model_variable_removal(Var::new(1)).unwrap();
        assert_eq!(r.num_vars(), 5);
        assert_eq!(r.clauses().len(), 7);
        // v = 3, w_t = 4, w_f = 5
        assert_eq!(r.clauses()[0], Clause::from_dimacs(&[2, 4]).unwrap());
        assert_eq!(&r.costs()[2..], &[0, 0, 0]);
        assert!(i.model_variable_removal(Var::new(3)).is_err());
    }

    #[test]
    fn clause_removal_shape() {
        let i = MinsatInstance::with_unit_costs(CnfFormula::from_dimacs(2, &[&[1, 2]]));
        let r = i.model_clause_removal(0).unwrap();
        assert_eq!(r.clauses()[0], Clause::from_dimacs(&[1, 2, 3]).unwrap());
        assert_eq!(r.costs(), &[1, 1, 0]);
        assert!(i.model_clause_removal(1).is_err());
    }
}
