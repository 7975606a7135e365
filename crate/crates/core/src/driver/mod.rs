//! The learning compiler's outer loop and performance-curve estimation.

mod artifact;
mod compiled;

use std::io::{self, Write};
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::cnf::Var;
use crate::instance::Fixing;
use crate::learner::{
    clause_cap, extract_cost_pairs, extract_sat_lemmas, incorporate, minimize, MinimizeConfig,
    DEFAULT_MAX_LEN, DEFAULT_ORACLE_BUDGET,
};
use crate::solver::{solve, Outcome, SolveOptions};
use crate::Mode;

pub use artifact::{load_artifact, load_artifact_for, save_artifact, validate, ArtifactError, Finding, FORMAT_VERSION};
pub use compiled::*;

/// Learning stops once this few enumerated variables remain.
pub const SMALL_XN: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("level {level} exceeds the {num_vars} variables")]
pub struct LevelOutOfRange {
    pub level: usize,
    pub num_vars: usize,
}

/// `samples` fixings of `level` distinct variables each, drawn from a
/// stream determined by `seed` and `level`.
pub fn sample_level(
    num_vars: usize,
    level: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<Fixing>, LevelOutOfRange> {
    if level > num_vars {
        return Err(LevelOutOfRange { level, num_vars });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(level as u64);
    Ok((0..samples)
        .map(|_| {
            let mut vars = sample(&mut rng, num_vars, level).into_vec();
            vars.sort_unstable();
            let pairs = vars.into_iter().map(|i| (Var::from_index(i), rng.gen())).collect();
            Fixing::new(pairs).expect("sampled without replacement")
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnConfig {
    pub samples_per_level: usize,
    pub seed: u64,
    /// Budget of each sample solve and of each minimization call.
    pub node_budget: u64,
    /// Clause count allowed, as a multiple of the original count.
    pub clause_cap: f64,
    pub lemma_max_len: usize,
}

impl Default for LearnConfig {
    fn default() -> LearnConfig {
        LearnConfig {
            samples_per_level: 100,
            seed: 0,
            node_budget: DEFAULT_ORACLE_BUDGET,
            clause_cap: 3.0,
            lemma_max_len: DEFAULT_MAX_LEN,
        }
    }
}

/// The logged run and the wall-clock time it took. Time is kept out of
/// the log so that artifacts do not depend on the machine.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnSummary {
    pub run: LearningRun,
    pub elapsed: Duration,
    /// Database clauses and pairs deleted as subsumed.
    pub deleted: usize,
}

/// One learning step: samples levels 0, 1, ... and learns from each solve
/// until effort grows, the clause cap is hit or few enumerated variables
/// remain. The run is appended to the class's log.
pub fn learn(compiled: &mut CompiledClass, mode: Mode, cfg: &LearnConfig) -> LearnSummary {
    let start = Instant::now();
    let n = compiled.num_vars();
    let cap = clause_cap(compiled.original_clause_count(), cfg.clause_cap);
    let min_cfg = MinimizeConfig { max_len: cfg.lemma_max_len, node_budget: cfg.node_budget };
    let solve_opts = SolveOptions::new(mode).traced().budget(cfg.node_budget);
    let enumerated_before = compiled.partition().num_enumerated();
    let mut levels: Vec<LevelRecord> = Vec::new();
    let mut deleted = 0;

    let stop_reason = 'run: {
        if compiled.partition().num_enumerated() <= SMALL_XN {
            break 'run StopReason::SmallXN;
        }
        if compiled.clause_count() >= cap {
            break 'run StopReason::ClauseCap;
        }
        for level in 0..=n {
            let fixings = sample_level(n, level, cfg.samples_per_level, cfg.seed).expect("level ≤ n");
            let mut rec = LevelRecord {
                level,
                samples: 0,
                v: 0,
                mean_nodes: 0.0,
                lemmas_added: 0,
                pairs_added: 0,
                clause_count: compiled.clause_count(),
                enumerated: compiled.partition().num_enumerated(),
            };
            let mut total_nodes = 0u64;
            let mut stop = None;
            for fixing in &fixings {
                let r = solve(compiled, fixing, &solve_opts).expect("sampled variables are in range");
                rec.samples += 1;
                rec.v = rec.v.max(r.stats.nodes_expanded);
                total_nodes += r.stats.nodes_expanded;
                let trace = r.trace.expect("traced solve");
                let candidates = match mode {
                    Mode::Sat => extract_sat_lemmas(&trace),
                    Mode::Minsat => extract_cost_pairs(&trace),
                };
                let lemmas: Vec<_> = candidates.iter().filter_map(|c| minimize(compiled, c, &min_cfg)).collect();
                let report = incorporate(compiled, &lemmas, cfg.clause_cap);
                rec.lemmas_added += report.lemmas_added;
                rec.pairs_added += report.pairs_added;
                deleted += report.deleted;
                if report.lemmas_added + report.pairs_added > 0 {
                    compiled.repartition();
                }
                if report.capped {
                    stop = Some(StopReason::ClauseCap);
                } else if compiled.partition().num_enumerated() <= SMALL_XN {
                    stop = Some(StopReason::SmallXN);
                }
                if stop.is_some() {
                    break;
                }
            }
            rec.mean_nodes = total_nodes as f64 / rec.samples.max(1) as f64;
            rec.clause_count = compiled.clause_count();
            rec.enumerated = compiled.partition().num_enumerated();
            let v = rec.v;
            levels.push(rec);
            if let Some(reason) = stop {
                break 'run reason;
            }
            if let [.., prev, _] = levels.as_slice() {
                if v > prev.v {
                    break 'run StopReason::VIncrease;
                }
            }
        }
        StopReason::LevelsExhausted
    };

    let run = LearningRun {
        mode,
        seed: cfg.seed,
        levels,
        stop_reason,
        enumerated_before,
        enumerated_after: compiled.partition().num_enumerated(),
    };
    compiled.log.runs.push(run.clone());
    LearnSummary { run, elapsed: start.elapsed(), deleted }
}

/// Runs SAT learning and then MINSAT learning.
pub fn compile_both(compiled: &mut CompiledClass, cfg: &LearnConfig) -> Vec<LearnSummary> {
    vec![learn(compiled, Mode::Sat, cfg), learn(compiled, Mode::Minsat, cfg)]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaxLevel {
    Fixed(usize),
    /// Stop once three consecutive worst values fall below 1% of the peak.
    Auto,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveConfig {
    pub samples_per_level: usize,
    pub max_level: MaxLevel,
    pub seed: u64,
    pub mode: Mode,
    pub node_budget: Option<u64>,
}

impl Default for CurveConfig {
    fn default() -> CurveConfig {
        CurveConfig { samples_per_level: 100, max_level: MaxLevel::Auto, seed: 0, mode: Mode::Minsat, node_budget: None }
    }
}

/// Effort statistics of one level.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub level: usize,
    pub samples: usize,
    pub mean_nodes: f64,
    pub max_nodes: u64,
    pub mean_ms: f64,
    pub max_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PerformanceCurve {
    pub points: Vec<CurvePoint>,
}

pub const CSV_HEADER: &str = "level,samples,mean_nodes,max_nodes,mean_ms,max_ms";

impl PerformanceCurve {
    /// Largest `max_nodes` over all levels.
    pub fn worst(&self) -> u64 {
        self.points.iter().map(|p| p.max_nodes).max().unwrap_or(0)
    }

    /// Mean of `max_nodes` over levels `0..=up_to`.
    pub fn mean_worst(&self, up_to: usize) -> f64 {
        let pts: Vec<_> = self.points.iter().filter(|p| p.level <= up_to).collect();
        if pts.is_empty() {
            return 0.0;
        }
        pts.iter().map(|p| p.max_nodes as f64).sum::<f64>() / pts.len() as f64
    }

    /// Data rows without header.
    pub fn write_rows(&self, w: &mut impl Write) -> io::Result<()> {
        for p in &self.points {
            writeln!(
                w,
                "{},{},{:.3},{},{:.3},{:.3}",
                p.level, p.samples, p.mean_nodes, p.max_nodes, p.mean_ms, p.max_ms
            )?;
        }
        Ok(())
    }

    pub fn write_csv(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        self.write_rows(w)
    }
}

/// Solves sampled instances level by level without learning. Samples of
/// one level run in parallel; node counts do not depend on scheduling.
pub fn estimate_curve(compiled: &CompiledClass, cfg: &CurveConfig) -> PerformanceCurve {
    let n = compiled.num_vars();
    let last = match cfg.max_level {
        MaxLevel::Fixed(l) => l.min(n),
        MaxLevel::Auto => n,
    };
    let opts = SolveOptions { mode: cfg.mode, trace: false, node_budget: cfg.node_budget };
    let mut curve = PerformanceCurve::default();
    for level in 0..=last {
        let fixings = sample_level(n, level, cfg.samples_per_level, cfg.seed).expect("level ≤ n");
        let runs: Vec<(u64, f64)> = fixings
            .par_iter()
            .map(|f| {
                let r = solve(compiled, f, &opts).expect("sampled variables are in range");
                debug_assert!(r.outcome != Outcome::Aborted || cfg.node_budget.is_some());
                (r.stats.nodes_expanded, r.stats.elapsed.as_secs_f64() * 1e3)
            })
            .collect();
        let k = runs.len().max(1) as f64;
        curve.points.push(CurvePoint {
            level,
            samples: runs.len(),
            mean_nodes: runs.iter().map(|r| r.0 as f64).sum::<f64>() / k,
            max_nodes: runs.iter().map(|r| r.0).max().unwrap_or(0),
            mean_ms: runs.iter().map(|r| r.1).sum::<f64>() / k,
            max_ms: runs.iter().map(|r| r.1).fold(0.0, f64::max),
        });
        if cfg.max_level == MaxLevel::Auto && auto_done(&curve) {
            break;
        }
    }
    curve
}

fn auto_done(curve: &PerformanceCurve) -> bool {
    let worst: Vec<u64> = curve.points.iter().map(|p| p.max_nodes).collect();
    if worst.len() < 3 {
        return false;
    }
    let peak = *worst.iter().max().expect("nonempty");
    let tail = &worst[worst.len() - 3..];
    if peak == 0 {
        return true;
    }
    tail.iter().all(|&w| (w as f64) < 0.01 * peak as f64)
}
