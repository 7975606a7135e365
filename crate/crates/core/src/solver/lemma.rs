use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cnf::Clause;

/// Whether a lemma always holds or only prunes once a cheap enough
/// incumbent exists.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum LemmaKind {
    /// Implied by the formula.
    Unconditional,
    /// Every total assignment violating the clause costs at least
    /// `threshold`; the clause is active once the incumbent costs at most
    /// `threshold`.
    CostConditional { threshold: i64 },
}

/// A learned clause.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Lemma {
    pub clause: Clause,
    #[serde(flatten)]
    pub kind: LemmaKind,
    /// Mentions an easy-side variable; kept out of the easy partial instance.
    #[serde(default)]
    pub global: bool,
}

impl Lemma {
    pub fn unconditional(clause: Clause) -> Lemma {
        Lemma { clause, kind: LemmaKind::Unconditional, global: false }
    }

    pub fn pair(clause: Clause, threshold: i64) -> Lemma {
        Lemma { clause, kind: LemmaKind::CostConditional { threshold }, global: false }
    }

    pub fn threshold(&self) -> Option<i64> {
        match self.kind {
            LemmaKind::Unconditional => None,
            LemmaKind::CostConditional { threshold } => Some(threshold),
        }
    }

    pub fn is_unconditional(&self) -> bool {
        self.kind == LemmaKind::Unconditional
    }

    /// Whether the clause takes part in search given the incumbent cost.
    pub fn is_active(&self, incumbent: Option<i64>) -> bool {
        match self.kind {
            LemmaKind::Unconditional => true,
            LemmaKind::CostConditional { threshold } => incumbent.is_some_and(|c| c <= threshold),
        }
    }
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            LemmaKind::Unconditional => write!(f, "{}", self.clause),
            LemmaKind::CostConditional { threshold } => write!(f, "({}, {threshold})", self.clause),
        }
    }
}

/// Clauses of the lemmas that participate in search under `incumbent`.
pub fn active_lemmas(lemmas: &[Lemma], incumbent: Option<i64>) -> Vec<&Clause> {
    lemmas.iter().filter(|l| l.is_active(incumbent)).map(|l| &l.clause).collect()
}
