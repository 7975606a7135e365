use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cnf::{emit_dimacs, subsumes, Clause, CnfFormula};
use crate::forms::{diagnose, FormDiagnosis};
use crate::instance::{emit_costs, normalize, InstanceError, MinsatInstance, RawCosts};
use crate::partition::{compute_partition_for, verify_partition_for, Partition};
use crate::solver::{Lemma, LemmaKind};
use crate::Mode;

/// Where a database clause came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Origin {
    Original,
    Lemma,
}

/// An unconditional clause of the working database.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DbClause {
    pub literals: Clause,
    pub origin: Origin,
    /// Excluded from the easy partial instance; used only for propagation
    /// and branching.
    #[serde(default)]
    pub global: bool,
}

/// A cost-conditional lemma.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairLemma {
    pub literals: Clause,
    pub threshold: i64,
}

/// Why a learning run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum StopReason {
    /// The worst effort at level `i` exceeded the worst at level `i − 1`.
    VIncrease,
    /// The clause database reached its cap.
    ClauseCap,
    /// At most five enumerated variables remain.
    SmallXN,
    /// Every level up to the variable count was processed.
    LevelsExhausted,
}

/// Statistics of one level of a learning run. Effort is counted in
/// branch nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LevelRecord {
    pub level: usize,
    pub samples: usize,
    /// Largest effort among the solved samples of this level.
    pub v: u64,
    pub mean_nodes: f64,
    pub lemmas_added: usize,
    pub pairs_added: usize,
    pub clause_count: usize,
    pub enumerated: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LearningRun {
    pub mode: Mode,
    pub seed: u64,
    pub levels: Vec<LevelRecord>,
    pub stop_reason: StopReason,
    pub enumerated_before: usize,
    pub enumerated_after: usize,
}

impl LearningRun {
    pub fn lemmas_added(&self) -> usize {
        self.levels.iter().map(|l| l.lemmas_added).sum()
    }

    pub fn pairs_added(&self) -> usize {
        self.levels.iter().map(|l| l.pairs_added).sum()
    }

    /// A `VIncrease` stop implies the last level's `v` exceeds the one
    /// before it.
    pub fn invariant_holds(&self) -> bool {
        if self.stop_reason != StopReason::VIncrease {
            return true;
        }
        match self.levels.as_slice() {
            [.., prev, last] => last.v > prev.v,
            _ => false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LearningLog {
    pub runs: Vec<LearningRun>,
}

/// A class compiled for fast solution: the original instance, the working
/// clause database with learned lemmas, the cost-conditional pairs and the
/// current partition.
#[derive(Clone, Debug, PartialEq)]
pub struct CompiledClass {
    pub(crate) source: CnfFormula,
    pub(crate) raw_costs: RawCosts,
    pub(crate) instance: MinsatInstance,
    pub(crate) diagnosis: FormDiagnosis,
    pub(crate) db: Vec<DbClause>,
    pub(crate) pairs: Vec<PairLemma>,
    pub(crate) partition: Partition,
    pub(crate) log: LearningLog,
    pub(crate) formula_hash: String,
}

impl CompiledClass {
    /// Normalizes the instance and computes the initial partition.
    pub fn new(source: CnfFormula, raw_costs: RawCosts) -> Result<CompiledClass, InstanceError> {
        let instance = normalize(&source, &raw_costs)?;
        let db = instance
            .clauses()
            .iter()
            .map(|c| DbClause { literals: c.clone(), origin: Origin::Original, global: false })
            .collect();
        let formula_hash = formula_hash(&source, &raw_costs);
        let mut compiled = CompiledClass {
            diagnosis: diagnose(&instance),
            partition: Partition::all_enumerated(instance.num_vars()),
            source,
            raw_costs,
            instance,
            db,
            pairs: Vec::new(),
            log: LearningLog::default(),
            formula_hash,
        };
        compiled.repartition();
        Ok(compiled)
    }

    /// Compiles an instance that is already normalized.
    pub fn from_instance(instance: &MinsatInstance) -> CompiledClass {
        let raw = RawCosts { pairs: instance.costs().iter().map(|&c| (c, 0)).collect(), scale_exp: 0 };
        CompiledClass::new(instance.formula().clone(), raw).expect("normalized costs are valid")
    }

    pub fn instance(&self) -> &MinsatInstance {
        &self.instance
    }

    /// The formula as given, before normalization.
    pub fn source(&self) -> &CnfFormula {
        &self.source
    }

    pub fn raw_costs(&self) -> &RawCosts {
        &self.raw_costs
    }

    pub fn diagnosis(&self) -> &FormDiagnosis {
        &self.diagnosis
    }

    pub fn db(&self) -> &[DbClause] {
        &self.db
    }

    pub fn pairs(&self) -> &[PairLemma] {
        &self.pairs
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn log(&self) -> &LearningLog {
        &self.log
    }

    pub fn formula_hash(&self) -> &str {
        &self.formula_hash
    }

    pub fn num_vars(&self) -> usize {
        self.instance.num_vars()
    }

    pub fn original_clause_count(&self) -> usize {
        self.instance.clauses().len()
    }

    /// Database clauses plus pairs.
    pub fn clause_count(&self) -> usize {
        self.db.len() + self.pairs.len()
    }

    /// Clauses that define the easy partial instance: everything in the
    /// database except global lemmas.
    pub fn base_clauses(&self) -> Vec<Clause> {
        self.db.iter().filter(|c| !c.global).map(|c| c.literals.clone()).collect()
    }

    /// Every learned clause, unconditional lemmas first.
    pub fn lemmas(&self) -> Vec<Lemma> {
        let unconditional = self.db.iter().filter(|c| c.origin == Origin::Lemma).map(|c| Lemma {
            clause: c.literals.clone(),
            kind: LemmaKind::Unconditional,
            global: c.global,
        });
        let pairs = self.pairs.iter().map(|p| Lemma::pair(p.literals.clone(), p.threshold));
        unconditional.chain(pairs).collect()
    }

    /// Recomputes the partition over the base clauses.
    pub fn repartition(&mut self) {
        self.partition =
            compute_partition_for(self.num_vars(), self.instance.costs(), &self.base_clauses());
    }

    pub fn verify_partition(&self) -> bool {
        verify_partition_for(self.num_vars(), self.instance.costs(), &self.base_clauses(), &self.partition)
    }

    /// Whether every original clause is subsumed by some database clause,
    /// so that the database still implies the original formula.
    pub fn covers_original(&self) -> bool {
        self.instance
            .clauses()
            .iter()
            .all(|c| self.db.iter().any(|d| subsumes(&d.literals, c)))
    }
}

/// SHA-256 over the canonical DIMACS and cost texts.
pub fn formula_hash(source: &CnfFormula, raw: &RawCosts) -> String {
    let mut h = Sha256::new();
    h.update(emit_dimacs(source).as_bytes());
    h.update(b"\0");
    h.update(format!("scale {}\n", raw.scale_exp).as_bytes());
    h.update(emit_costs(raw).as_bytes());
    hex::encode(h.finalize())
}
