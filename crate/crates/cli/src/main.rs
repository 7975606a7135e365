//! `minsat`: compile a CNF class with costs, solve instances of it,
//! benchmark before and after learning, and check compiled artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use minsat::cnf::{parse_dimacs, CnfFormula};
use minsat::driver::{
    compile_both, estimate_curve, learn, load_artifact, load_artifact_for, save_artifact, validate,
    CompiledClass, CurveConfig, LearnConfig, LearnSummary, MaxLevel, PerformanceCurve, CSV_HEADER,
};
use minsat::instance::{parse_costs, Fixing, RawCosts};
use minsat::oracle::MAX_FREE_VARS;
use minsat::solver::{solve, Outcome, SolveOptions};
use minsat::Mode;

const EXIT_UNSAT: u8 = 20;

#[derive(Parser)]
#[command(name = "minsat", version, about = "Compile-once MINSAT solving with learned lemmas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn lemmas for a class and write the compiled artifact.
    Compile(CompileArgs),
    /// Solve one instance of a class, from an artifact or a CNF file.
    Solve(SolveArgs),
    /// Write performance curves before and after learning as CSV.
    Bench(BenchArgs),
    /// Revalidate an artifact.
    Check(CheckArgs),
}

#[derive(Args)]
struct CostArgs {
    /// Cost file of `<var> <costTrue> <costFalse>` lines.
    #[arg(long, value_name = "FILE", conflicts_with = "unit_costs")]
    costs: Option<PathBuf>,
    /// Cost 1 for True and 0 for False on every variable.
    #[arg(long)]
    unit_costs: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum LearnMode {
    Sat,
    Minsat,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveMode {
    Sat,
    Minsat,
}

impl From<SolveMode> for Mode {
    fn from(m: SolveMode) -> Mode {
        match m {
            SolveMode::Sat => Mode::Sat,
            SolveMode::Minsat => Mode::Minsat,
        }
    }
}

#[derive(Args)]
struct CompileArgs {
    cnf: PathBuf,
    #[command(flatten)]
    costs: CostArgs,
    #[arg(long, value_enum, default_value = "both")]
    mode: LearnMode,
    /// Samples per level.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 3)]
    lemma_max_len: usize,
    /// Clause count allowed, as a multiple of the original count.
    #[arg(long, default_value_t = 3.0)]
    clause_cap: f64,
    #[arg(long, default_value_t = 1_000_000)]
    node_budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long, value_name = "FILE")]
    output: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// A compiled artifact or a DIMACS file.
    input: PathBuf,
    #[command(flatten)]
    costs: CostArgs,
    /// Initial fixing in original variables, e.g. `1=T,5=F`.
    #[arg(long, default_value = "")]
    fix: String,
    #[arg(long, value_enum, default_value = "minsat")]
    mode: SolveMode,
    #[arg(long)]
    node_budget: Option<u64>,
}

#[derive(Args)]
struct BenchArgs {
    cnf: PathBuf,
    #[command(flatten)]
    costs: CostArgs,
    /// Artifact compiled from the same CNF and costs.
    #[arg(long, value_name = "FILE")]
    artifact: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Last level, or `auto`.
    #[arg(long, default_value = "auto")]
    max_level: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "minsat")]
    mode: SolveMode,
    #[arg(long, value_name = "FILE")]
    csv: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    artifact: PathBuf,
    /// Check lemmas by exhaustive enumeration.
    #[arg(long)]
    full: bool,
    #[arg(long, default_value_t = 1_000_000)]
    node_budget: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compile(a) => cmd_compile(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Check(a) => cmd_check(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_cnf(path: &Path) -> Result<CnfFormula> {
    parse_dimacs(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn read_costs(args: &CostArgs, num_vars: usize) -> Result<RawCosts> {
    if args.unit_costs {
        return Ok(RawCosts::unit(num_vars));
    }
    match &args.costs {
        Some(path) => parse_costs(&read(path)?, num_vars).with_context(|| format!("parsing {}", path.display())),
        None => Ok(RawCosts::zero(num_vars)),
    }
}

fn load_class(cnf: &Path, costs: &CostArgs) -> Result<CompiledClass> {
    let formula = read_cnf(cnf)?;
    let raw = read_costs(costs, formula.num_vars())?;
    Ok(CompiledClass::new(formula, raw)?)
}

fn print_run(s: &LearnSummary) {
    let r = &s.run;
    println!(
        "{} learning: {} lemmas, {} pairs, {} levels, stop {:?}, enumerated {} -> {}, {:.1} ms",
        r.mode,
        r.lemmas_added(),
        r.pairs_added(),
        r.levels.len(),
        r.stop_reason,
        r.enumerated_before,
        r.enumerated_after,
        s.elapsed.as_secs_f64() * 1e3
    );
}

fn cmd_compile(a: CompileArgs) -> Result<u8> {
    let mut compiled = load_class(&a.cnf, &a.costs)?;
    if a.clause_cap < 1.0 {
        bail!("--clause-cap must be at least 1.0");
    }
    let cfg = LearnConfig {
        samples_per_level: a.samples,
        seed: a.seed,
        node_budget: a.node_budget,
        clause_cap: a.clause_cap,
        lemma_max_len: a.lemma_max_len,
    };
    let summaries = match a.mode {
        LearnMode::Sat => vec![learn(&mut compiled, Mode::Sat, &cfg)],
        LearnMode::Minsat => vec![learn(&mut compiled, Mode::Minsat, &cfg)],
        LearnMode::Both => compile_both(&mut compiled, &cfg),
    };
    for s in &summaries {
        print_run(s);
    }
    println!(
        "clauses {} -> {} ({} pairs)",
        compiled.original_clause_count(),
        compiled.clause_count(),
        compiled.pairs().len()
    );
    fs::write(&a.output, save_artifact(&compiled)).with_context(|| format!("writing {}", a.output.display()))?;
    Ok(0)
}

fn is_artifact(text: &str) -> bool {
    text.trim_start().starts_with('{')
}

fn cmd_solve(a: SolveArgs) -> Result<u8> {
    let text = read(&a.input)?;
    let compiled = if is_artifact(&text) {
        if a.costs.costs.is_some() || a.costs.unit_costs {
            bail!("costs are stored in the artifact");
        }
        load_artifact(&text).with_context(|| format!("loading {}", a.input.display()))?
    } else {
        let formula = parse_dimacs(&text).with_context(|| format!("parsing {}", a.input.display()))?;
        let raw = read_costs(&a.costs, formula.num_vars())?;
        CompiledClass::new(formula, raw)?
    };
    let fix: Fixing = a.fix.parse()?;
    fix.check_range(compiled.num_vars())?;
    let norm = compiled.instance().norm();
    let fix = Fixing::new(fix.pairs().iter().map(|&(v, b)| (v, b ^ norm.is_flipped(v))).collect())?;

    let mut opts = SolveOptions::new(a.mode.into());
    opts.node_budget = a.node_budget;
    let r = solve(&compiled, &fix, &opts)?;
    let ms = r.stats.elapsed.as_secs_f64() * 1e3;
    let code = match &r.outcome {
        Outcome::Optimal { values, cost } => {
            println!("outcome: {}", if opts.mode == Mode::Sat { "sat" } else { "optimal" });
            println!("cost: {}", norm.format_cost(*cost));
            let original = norm.translate(values);
            let lits: Vec<String> = original
                .iter()
                .enumerate()
                .map(|(i, &v)| if v { format!("{}", i + 1) } else { format!("-{}", i + 1) })
                .collect();
            println!("assignment: {}", lits.join(" "));
            0
        }
        Outcome::Unsat => {
            println!("outcome: unsat");
            EXIT_UNSAT
        }
        Outcome::Aborted => {
            println!("outcome: aborted");
            1
        }
    };
    println!("nodes: {}", r.stats.nodes_expanded);
    println!("time_ms: {ms:.3}");
    Ok(code)
}

fn parse_max_level(s: &str) -> Result<MaxLevel> {
    if s == "auto" {
        return Ok(MaxLevel::Auto);
    }
    Ok(MaxLevel::Fixed(s.parse().with_context(|| format!("--max-level {s:?}"))?))
}

fn cmd_bench(a: BenchArgs) -> Result<u8> {
    let formula = read_cnf(&a.cnf)?;
    let raw = read_costs(&a.costs, formula.num_vars())?;
    let before_class = CompiledClass::new(formula.clone(), raw.clone())?;
    let mut cfg = CurveConfig {
        samples_per_level: a.samples,
        max_level: parse_max_level(&a.max_level)?,
        seed: a.seed,
        mode: a.mode.into(),
        node_budget: None,
    };
    let before = estimate_curve(&before_class, &cfg);
    let after: Option<PerformanceCurve> = match &a.artifact {
        Some(path) => {
            let compiled = load_artifact_for(&read(path)?, &formula, &raw)
                .with_context(|| format!("loading {}", path.display()))?;
            cfg.max_level = MaxLevel::Fixed(before.points.len().saturating_sub(1));
            Some(estimate_curve(&compiled, &cfg))
        }
        None => None,
    };

    let mut out = Vec::new();
    {
        use std::io::Write;
        writeln!(out, "{CSV_HEADER}")?;
        writeln!(out, "# before")?;
        before.write_rows(&mut out)?;
        if let Some(after) = &after {
            writeln!(out, "# after")?;
            after.write_rows(&mut out)?;
            let (wb, wa) = (before.worst(), after.worst());
            let reduction = if wa == 0 { "inf".to_string() } else { format!("{:.3}", wb as f64 / wa as f64) };
            writeln!(out, "# worst_before={wb},worst_after={wa},reduction={reduction}")?;
            println!("worst before {wb} nodes, after {wa} nodes, reduction {reduction}");
        } else {
            println!("worst {} nodes over {} levels", before.worst(), before.points.len());
        }
    }
    fs::write(&a.csv, out).with_context(|| format!("writing {}", a.csv.display()))?;
    Ok(0)
}

fn cmd_check(a: CheckArgs) -> Result<u8> {
    let text = read(&a.artifact)?;
    let compiled = match load_artifact(&text) {
        Ok(c) => c,
        Err(e) => {
            println!("FAIL load: {e}");
            return Ok(1);
        }
    };
    println!("ok   hash and format");
    if a.full && compiled.num_vars() > MAX_FREE_VARS {
        bail!("--full needs at most {MAX_FREE_VARS} variables, artifact has {}", compiled.num_vars());
    }
    let findings = validate(&compiled, a.full, a.node_budget)?;
    let lemmas = compiled.lemmas().len();
    if findings.is_empty() {
        println!("ok   partition and {lemmas} learned clauses");
        return Ok(0);
    }
    for f in &findings {
        println!("FAIL {f}");
    }
    Ok(1)
}
