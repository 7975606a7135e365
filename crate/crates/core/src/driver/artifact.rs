//! JSON persistence of compiled classes and their revalidation.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::compiled::{formula_hash, CompiledClass, DbClause, LearningLog, Origin, PairLemma};
use crate::cnf::{emit_dimacs, parse_dimacs, Clause, CnfFormula, ParseError, Var};
use crate::forms::{FormDiagnosis, Renaming};
use crate::instance::{normalize, Fixing, InstanceError, RawCosts};
use crate::oracle::{self, OracleError};
use crate::partition::{Partition, PropertyTag};
use crate::solver::{solve, Outcome, SolveOptions};
use crate::Mode;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("malformed artifact: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format version {0}")]
    Version(u32),
    #[error("embedded formula: {0}")]
    Dimacs(#[from] ParseError),
    #[error("embedded costs: {0}")]
    Costs(#[from] InstanceError),
    #[error("formula hash mismatch: artifact says {stored}, content gives {actual}")]
    HashMismatch { stored: String, actual: String },
    #[error("artifact was compiled from a different formula")]
    WrongFormula,
    #[error("{0} is out of range")]
    VarOutOfRange(Var),
    #[error("partition does not cover each variable exactly once")]
    PartitionShape,
    #[error("easy partial instance lacks hidden Horn form under the stored partition")]
    PartitionInvalid,
    #[error("clause database no longer implies the original formula")]
    LostOriginal,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct CostsDoc {
    scale_exp: u32,
    pairs: Vec<(i64, i64)>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct PartitionDoc {
    easy: Vec<Var>,
    enumerated: Vec<Var>,
    flipped_vars: Vec<Var>,
    tag: PropertyTag,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct Doc {
    format_version: u32,
    formula_hash: String,
    dimacs_echo: String,
    costs: CostsDoc,
    #[serde(rename = "clauseDB")]
    clause_db: Vec<DbClause>,
    pairs: Vec<PairLemma>,
    partition: PartitionDoc,
    diagnosis: FormDiagnosis,
    log: LearningLog,
}

/// Pretty-printed JSON. Identical classes give identical bytes.
pub fn save_artifact(compiled: &CompiledClass) -> String {
    let p = compiled.partition();
    let doc = Doc {
        format_version: FORMAT_VERSION,
        formula_hash: compiled.formula_hash.clone(),
        dimacs_echo: emit_dimacs(&compiled.source),
        costs: CostsDoc { scale_exp: compiled.raw_costs.scale_exp, pairs: compiled.raw_costs.pairs.clone() },
        clause_db: compiled.db.clone(),
        pairs: compiled.pairs.clone(),
        partition: PartitionDoc {
            easy: p.easy(),
            enumerated: p.enumerated(),
            flipped_vars: p.renaming().flipped.iter().copied().collect(),
            tag: p.tag(),
        },
        diagnosis: compiled.diagnosis.clone(),
        log: compiled.log.clone(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("artifact serializes");
    s.push('\n');
    s
}

/// Parses and verifies an artifact: format, hash, variable ranges,
/// partition shape and form, and coverage of the original clauses.
pub fn load_artifact(text: &str) -> Result<CompiledClass, ArtifactError> {
    let doc: Doc = serde_json::from_str(text)?;
    if doc.format_version != FORMAT_VERSION {
        return Err(ArtifactError::Version(doc.format_version));
    }
    let source = parse_dimacs(&doc.dimacs_echo)?;
    let raw_costs = RawCosts { pairs: doc.costs.pairs, scale_exp: doc.costs.scale_exp };
    let actual = formula_hash(&source, &raw_costs);
    if actual != doc.formula_hash {
        return Err(ArtifactError::HashMismatch { stored: doc.formula_hash, actual });
    }
    let instance = normalize(&source, &raw_costs)?;
    let n = instance.num_vars();

    let in_range = |c: &Clause| match c.vars().find(|v| v.index() >= n) {
        Some(v) => Err(ArtifactError::VarOutOfRange(v)),
        None => Ok(()),
    };
    for c in &doc.clause_db {
        in_range(&c.literals)?;
    }
    for p in &doc.pairs {
        in_range(&p.literals)?;
    }

    let pd = &doc.partition;
    let mut enumerated = vec![false; n];
    let mut seen = BTreeSet::new();
    for v in pd.easy.iter().chain(&pd.enumerated).chain(&pd.flipped_vars) {
        if v.index() >= n {
            return Err(ArtifactError::VarOutOfRange(*v));
        }
    }
    for v in &pd.enumerated {
        enumerated[v.index()] = true;
    }
    for v in pd.easy.iter().chain(&pd.enumerated) {
        if !seen.insert(*v) {
            return Err(ArtifactError::PartitionShape);
        }
    }
    if seen.len() != n {
        return Err(ArtifactError::PartitionShape);
    }
    let renaming = Renaming { flipped: pd.flipped_vars.iter().copied().collect(), clause_flipped: BTreeSet::new() };
    let partition = Partition::new(enumerated, renaming, pd.tag);

    let compiled = CompiledClass {
        source,
        raw_costs,
        instance,
        diagnosis: doc.diagnosis,
        db: doc.clause_db,
        pairs: doc.pairs,
        partition,
        log: doc.log,
        formula_hash: actual,
    };
    if !compiled.verify_partition() {
        return Err(ArtifactError::PartitionInvalid);
    }
    if !compiled.covers_original() {
        return Err(ArtifactError::LostOriginal);
    }
    Ok(compiled)
}

/// Loads an artifact and checks that it was compiled from `formula` with
/// `costs`.
pub fn load_artifact_for(
    text: &str,
    formula: &CnfFormula,
    costs: &RawCosts,
) -> Result<CompiledClass, ArtifactError> {
    let compiled = load_artifact(text)?;
    if compiled.formula_hash != formula_hash(formula, costs) {
        return Err(ArtifactError::WrongFormula);
    }
    Ok(compiled)
}

/// A failed check of [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Finding {
    PartitionInvalid,
    LostOriginal,
    /// An unconditional lemma has a countermodel in the original formula.
    UnsoundLemma(Clause),
    /// A model violating the pair's clause costs less than its threshold.
    UnsoundPair { clause: Clause, threshold: i64, cost: i64 },
    /// The production solver ran out of budget on this clause.
    Undecided(Clause),
}

impl std::fmt::Display for Finding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Finding::PartitionInvalid => write!(f, "partition fails the hidden Horn check"),
            Finding::LostOriginal => write!(f, "an original clause is no longer implied"),
            Finding::UnsoundLemma(c) => write!(f, "lemma {c} is not implied by the formula"),
            Finding::UnsoundPair { clause, threshold, cost } => {
                write!(f, "pair ({clause}, {threshold}) is violated by a model of cost {cost}")
            }
            Finding::Undecided(c) => write!(f, "could not decide {c} within the node budget"),
        }
    }
}

/// Revalidates the partition and every learned clause against the original
/// instance: by brute force when `full`, otherwise with the production
/// solver on a fresh lemma-free class.
pub fn validate(
    compiled: &CompiledClass,
    full: bool,
    node_budget: u64,
) -> Result<Vec<Finding>, OracleError> {
    let mut findings = Vec::new();
    if !compiled.verify_partition() {
        findings.push(Finding::PartitionInvalid);
    }
    if !compiled.covers_original() {
        findings.push(Finding::LostOriginal);
    }
    let instance = compiled.instance();
    let fresh = CompiledClass::from_instance(instance);
    let min_violating = |clause: &Clause| -> Result<Option<Option<i64>>, OracleError> {
        if full {
            return Ok(Some(oracle::min_cost_violating(instance, clause)?));
        }
        let opts = SolveOptions::new(Mode::Minsat).budget(node_budget);
        let r = solve(&fresh, &Fixing::falsifying(clause), &opts).expect("clause in range");
        Ok(match r.outcome {
            Outcome::Unsat => Some(None),
            Outcome::Optimal { cost, .. } => Some(Some(cost)),
            Outcome::Aborted => None,
        })
    };
    for c in compiled.db.iter().filter(|c| c.origin == Origin::Lemma) {
        match min_violating(&c.literals)? {
            None => findings.push(Finding::Undecided(c.literals.clone())),
            Some(Some(_)) => findings.push(Finding::UnsoundLemma(c.literals.clone())),
            Some(None) => {}
        }
    }
    for p in &compiled.pairs {
        match min_violating(&p.literals)? {
            None => findings.push(Finding::Undecided(p.literals.clone())),
            Some(Some(cost)) if cost < p.threshold => findings.push(Finding::UnsoundPair {
                clause: p.literals.clone(),
                threshold: p.threshold,
                cost,
            }),
            Some(_) => {}
        }
    }
    Ok(findings)
}
