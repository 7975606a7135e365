//! Literals, clauses and CNF formulas, plus DIMACS input and output.
//!
//! Clauses are stored in canonical form: literals sorted by `(variable,
//! sign)` with duplicates removed. Tautologies cannot be constructed.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A propositional variable, numbered from 1 as in DIMACS.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Var(u32);

impl Var {
    /// Creates the variable with DIMACS number `n`.
    ///
    /// # Panics
    ///
    /// Panics if `n` is zero.
    pub fn new(n: u32) -> Var {
        assert!(n >= 1, "variables are numbered from 1");
        Var(n)
    }

    /// Variable for a zero-based index.
    pub fn from_index(i: usize) -> Var {
        Var(i as u32 + 1)
    }

    pub fn number(self) -> u32 {
        self.0
    }

    /// Zero-based position of the variable in per-variable vectors.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn pos(self) -> Lit {
        Lit { var: self, positive: true }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Lit {
        Lit { var: self, positive: false }
    }

    pub fn lit(self, positive: bool) -> Lit {
        Lit { var: self, positive }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A variable or its negation. Orders by `(variable, sign)` with the
/// negative literal first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit {
    var: Var,
    positive: bool,
}

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit { var, positive }
    }

    /// Parses a nonzero DIMACS integer.
    pub fn from_dimacs(n: i64) -> Option<Lit> {
        if n == 0 || n.unsigned_abs() > u32::MAX as u64 {
            return None;
        }
        Some(Lit { var: Var(n.unsigned_abs() as u32), positive: n > 0 })
    }

    pub fn to_dimacs(self) -> i64 {
        if self.positive {
            self.var.0 as i64
        } else {
            -(self.var.0 as i64)
        }
    }

    pub fn var(self) -> Var {
        self.var
    }

    pub fn is_positive(self) -> bool {
        self.positive
    }

    pub fn is_negative(self) -> bool {
        !self.positive
    }

    /// The literal is true when its variable takes `value`.
    pub fn is_true_under(self, value: bool) -> bool {
        self.positive == value
    }

    /// Complements the literal when `flip` is set.
    pub fn flipped_if(self, flip: bool) -> Lit {
        if flip {
            !self
        } else {
            self
        }
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit { var: self.var, positive: !self.positive }
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.var)
        } else {
            write!(f, "¬{}", self.var)
        }
    }
}

impl Serialize for Lit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i64(self.to_dimacs())
    }
}

impl<'de> Deserialize<'de> for Lit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Lit, D::Error> {
        let n = i64::deserialize(d)?;
        Lit::from_dimacs(n).ok_or_else(|| serde::de::Error::custom("literal 0 is not allowed"))
    }
}

/// Returned when a clause would contain a variable with both signs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("clause contains both {0} and its negation")]
pub struct Tautology(pub Var);

/// A disjunction of literals in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    /// Sorts and deduplicates `lits`; rejects tautologies.
    pub fn new(mut lits: Vec<Lit>) -> Result<Clause, Tautology> {
        lits.sort_unstable();
        lits.dedup();
        for w in lits.windows(2) {
            if w[0].var == w[1].var {
                return Err(Tautology(w[0].var));
            }
        }
        Ok(Clause { lits })
    }

    /// Builds a clause from DIMACS integers. Zeros are ignored.
    pub fn from_dimacs(ints: &[i64]) -> Result<Clause, Tautology> {
        Clause::new(ints.iter().filter_map(|&n| Lit::from_dimacs(n)).collect())
    }

    pub fn empty() -> Clause {
        Clause { lits: Vec::new() }
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    /// Number of literals.
    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.lits.binary_search(&lit).is_ok()
    }

    pub fn mentions(&self, var: Var) -> bool {
        self.lits.iter().any(|l| l.var == var)
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.lits.iter().map(|l| l.var)
    }

    pub fn max_var(&self) -> Option<Var> {
        self.lits.last().map(|l| l.var)
    }

    pub fn positive_count(&self) -> usize {
        self.lits.iter().filter(|l| l.positive).count()
    }

    /// Evaluates the clause under a total assignment indexed by variable.
    pub fn is_satisfied_by(&self, values: &[bool]) -> bool {
        self.lits.iter().any(|l| l.is_true_under(values[l.var.index()]))
    }

    /// Keeps only literals whose variable passes `keep`.
    pub fn restrict(&self, mut keep: impl FnMut(Var) -> bool) -> Clause {
        Clause { lits: self.lits.iter().copied().filter(|l| keep(l.var)).collect() }
    }

    /// Complements the literals of every variable selected by `flip`.
    pub fn rename(&self, mut flip: impl FnMut(Var) -> bool) -> Clause {
        let lits = self.lits.iter().map(|&l| l.flipped_if(flip(l.var))).collect();
        // Renaming preserves variables, so the order is unchanged except
        // within a variable, which occurs only once.
        Clause { lits }
    }

    /// Removes one literal, keeping canonical order.
    pub fn without(&self, lit: Lit) -> Clause {
        Clause { lits: self.lits.iter().copied().filter(|&l| l != lit).collect() }
    }
}

impl<'de> Deserialize<'de> for Clause {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Clause, D::Error> {
        let lits = Vec::<Lit>::deserialize(d)?;
        Clause::new(lits).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lits.is_empty() {
            return write!(f, "□");
        }
        for (i, l) in self.lits.iter().enumerate() {
            if i > 0 {
                write!(f, " ∨ ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// True iff every literal of `a` occurs in `b`.
pub fn subsumes(a: &Clause, b: &Clause) -> bool {
    if a.len() > b.len() {
        return false;
    }
    let mut rest = b.lits.iter();
    'outer: for la in &a.lits {
        for lb in rest.by_ref() {
            if lb == la {
                continue 'outer;
            }
            if lb > la {
                return false;
            }
        }
        return false;
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("clause {clause} mentions {var}, but the formula has {num_vars} variables")]
pub struct VarOutOfRange {
    pub clause: usize,
    pub var: Var,
    pub num_vars: usize,
}

/// A conjunction of clauses over variables `1..=num_vars`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<CnfFormula, VarOutOfRange> {
        for (i, c) in clauses.iter().enumerate() {
            if let Some(v) = c.max_var() {
                if v.index() >= num_vars {
                    return Err(VarOutOfRange { clause: i, var: v, num_vars });
                }
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    /// Convenience constructor from DIMACS integer lists.
    ///
    /// # Panics
    ///
    /// Panics on tautologies or out-of-range variables.
    pub fn from_dimacs(num_vars: usize, clauses: &[&[i64]]) -> CnfFormula {
        let clauses = clauses
            .iter()
            .map(|c| Clause::from_dimacs(c).expect("tautological clause"))
            .collect();
        CnfFormula::new(num_vars, clauses).expect("variable out of range")
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> {
        (0..self.num_vars).map(Var::from_index)
    }

    pub fn is_satisfied_by(&self, values: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.is_satisfied_by(values))
    }

    pub(crate) fn from_parts_unchecked(num_vars: usize, clauses: Vec<Clause>) -> CnfFormula {
        debug_assert!(CnfFormula::new(num_vars, clauses.clone()).is_ok());
        CnfFormula { num_vars, clauses }
    }
}

/// Deletes every clause of `formula` subsumed by one of `lemmas`, then
/// appends the lemmas that are not already present.
pub fn remove_dominated(formula: &CnfFormula, lemmas: &[Clause]) -> CnfFormula {
    let mut clauses: Vec<Clause> = formula
        .clauses
        .iter()
        .filter(|c| !lemmas.iter().any(|l| subsumes(l, c)))
        .cloned()
        .collect();
    for l in lemmas {
        if !clauses.iter().any(|c| subsumes(c, l)) {
            clauses.push(l.clone());
        }
    }
    CnfFormula::from_parts_unchecked(formula.num_vars, clauses)
}

/// Where a DIMACS or cost file failed to parse. Line numbers are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: malformed header: {reason}")]
    Header { line: usize, reason: String },
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("line {line}: invalid token {token:?}")]
    Token { line: usize, token: String },
    #[error("line {line}: literal {lit} out of range for {num_vars} variables")]
    LiteralOutOfRange { line: usize, lit: i64, num_vars: usize },
    #[error("line {line}: clause is not terminated by 0")]
    Unterminated { line: usize },
    #[error("line {line}: tautological clause ({var} occurs with both signs)")]
    Tautology { line: usize, var: Var },
    #[error("header declares {declared} clauses, found {found}")]
    ClauseCount { declared: usize, found: usize },
    #[error("line {line}: variable {var} out of range for {num_vars} variables")]
    VariableOutOfRange { line: usize, var: i64, num_vars: usize },
    #[error("line {line}: duplicate cost line for variable {var}")]
    DuplicateVariable { line: usize, var: u32 },
    #[error("line {line}: invalid number {token:?}")]
    Number { line: usize, token: String },
    #[error("line {line}: expected `<var> <costTrue> <costFalse>`")]
    CostLine { line: usize },
    #[error("cost values overflow 64-bit integers after decimal scaling")]
    Overflow,
}

/// Parses DIMACS CNF. Clauses may span lines; a `%` line ends the data.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    let mut clause_line = 0;

    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('%') {
            break;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(ParseError::Header { line, reason: "duplicate header".into() });
            }
            header = Some(parse_header(trimmed, line)?);
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(ParseError::MissingHeader);
        };
        for tok in trimmed.split_whitespace() {
            let n: i64 = tok
                .parse()
                .map_err(|_| ParseError::Token { line, token: tok.to_string() })?;
            if n == 0 {
                let clause = Clause::new(std::mem::take(&mut current))
                    .map_err(|Tautology(var)| ParseError::Tautology { line: clause_line, var })?;
                clauses.push(clause);
                continue;
            }
            if n.unsigned_abs() as usize > num_vars {
                return Err(ParseError::LiteralOutOfRange { line, lit: n, num_vars });
            }
            if current.is_empty() {
                clause_line = line;
            }
            current.push(Lit::from_dimacs(n).expect("nonzero"));
        }
    }

    let (num_vars, declared) = header.ok_or(ParseError::MissingHeader)?;
    if !current.is_empty() {
        return Err(ParseError::Unterminated { line: clause_line });
    }
    if clauses.len() != declared {
        return Err(ParseError::ClauseCount { declared, found: clauses.len() });
    }
    Ok(CnfFormula { num_vars, clauses })
}

fn parse_header(line_text: &str, line: usize) -> Result<(usize, usize), ParseError> {
    let bad = |reason: &str| ParseError::Header { line, reason: reason.to_string() };
    let toks: Vec<&str> = line_text.split_whitespace().collect();
    match toks.as_slice() {
        ["p", "cnf", v, c] => {
            let v = v.parse().map_err(|_| bad("variable count is not a number"))?;
            let c = c.parse().map_err(|_| bad("clause count is not a number"))?;
            Ok((v, c))
        }
        ["p", fmt, ..] if *fmt != "cnf" => Err(bad("only the `cnf` format is supported")),
        _ => Err(bad("expected `p cnf <vars> <clauses>`")),
    }
}

/// Canonical DIMACS text: header, then one zero-terminated clause per line.
pub fn emit_dimacs(formula: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", formula.num_vars, formula.clauses.len());
    for c in &formula.clauses {
        for l in c.lits() {
            out.push_str(&l.to_dimacs().to_string());
            out.push(' ');
        }
        out.push_str("0\n");
    }
    out
}
