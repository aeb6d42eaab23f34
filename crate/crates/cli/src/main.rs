use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use macroplan::macros::caed::MacroLimits;
use macroplan::pddl::{parse_domain, parse_problem, write_domain, Domain, Problem};
use macroplan::pipeline::{
    accuracy_csv, cost_csv, cost_rows, heuristic_accuracy, mean_abs_error, parse_plan, recover_macros, solve_problem,
    train_caed, train_solep, validate_plan, EnhancedDomain, MacroFile, Setup, SolveStatus, TrainingConfig,
};
use macroplan::search::{format_plan, SearchConfig};
use macroplan::RankingParamsF64;

const EXIT_UNSOLVED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_LIMIT: u8 = 3;

#[derive(Parser)]
#[command(name = "macroplan", version, about = "Macro-operator learning and forward-search planning for typed STRIPS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn macros from training problems.
    Train(TrainArgs),
    /// Solve one problem under one of the four setups.
    Solve(SolveArgs),
    /// Check a plan against a domain and problem.
    Validate(ValidateArgs),
    /// Produce CSV reports.
    Report {
        #[command(subcommand)]
        kind: ReportKind,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Caed,
    Solep,
    Both,
}

#[derive(Args)]
struct Limits {
    /// Time limit per search, in seconds.
    #[arg(long, default_value_t = 1800)]
    time: u64,
    /// Memory limit per search, in MiB.
    #[arg(long, default_value_t = 1024)]
    mem: usize,
}

impl Limits {
    fn config(&self) -> SearchConfig {
        SearchConfig {
            time_limit: Some(Duration::from_secs(self.time)),
            memory_limit: Some(self.mem * 1024 * 1024),
            ..SearchConfig::default()
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long)]
    domain: PathBuf,
    #[arg(long, num_args = 1.., required = true)]
    problems: Vec<PathBuf>,
    #[arg(long, default_value_t = 0.001)]
    alpha: f64,
    #[arg(long, default_value_t = 10.0)]
    bonus: f64,
    #[arg(long, default_value_t = 0.01)]
    c: f64,
    /// Compiled macros kept.
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    max_length: usize,
    #[arg(long, default_value_t = 6)]
    max_preconditions: usize,
    /// Search nodes allowed for macro generation per abstract type.
    #[arg(long, default_value_t = 1_000_000)]
    node_budget: usize,
    /// Shuffles clustering seed types; declaration order when absent.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory receiving enhanced-domain.pddl and macros.txt.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Print the abstract types found.
    #[arg(long)]
    dump_components: bool,
    #[command(flatten)]
    limits: Limits,
}

#[derive(Args)]
struct SolveArgs {
    /// 1: no macros, 2: compiled macros, 3: sequence macros, 4: both.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    setup: u8,
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    problem: PathBuf,
    /// Macro file; required by setups 3 and 4.
    #[arg(long)]
    macros: Option<PathBuf>,
    /// Write the plan here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    limits: Limits,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    plan: PathBuf,
}

#[derive(Subcommand)]
enum ReportKind {
    /// Heuristic value against remaining plan length along solutions.
    Accuracy {
        #[arg(long)]
        domain: PathBuf,
        /// Enhanced domain compared against the original.
        #[arg(long)]
        enhanced: Option<PathBuf>,
        #[arg(long, num_args = 1.., required = true)]
        problems: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        limits: Limits,
    },
    /// Search time per evaluated state for each available setup.
    Cost {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        enhanced: Option<PathBuf>,
        #[arg(long)]
        macros: Option<PathBuf>,
        #[arg(long, num_args = 1.., required = true)]
        problems: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        limits: Limits,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_domain(path: &Path) -> Result<Domain> {
    parse_domain(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_problems(dom: &Domain, paths: &[PathBuf]) -> Result<Vec<Problem>> {
    paths
        .iter()
        .map(|p| parse_problem(&read(p)?, dom).with_context(|| format!("parsing {}", p.display())))
        .collect()
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn train(a: TrainArgs) -> Result<ExitCode> {
    let dom = load_domain(&a.domain)?;
    let problems = load_problems(&dom, &a.problems)?;
    let cfg = TrainingConfig {
        params: RankingParamsF64 {
            alpha: a.alpha,
            bonus: a.bonus,
            c: a.c,
        },
        k: a.k,
        limits: MacroLimits {
            max_length: a.max_length,
            max_preconditions: a.max_preconditions,
            node_budget: a.node_budget,
        },
        seed: a.seed,
        search: a.limits.config(),
    };
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let mut enhanced = EnhancedDomain::plain(dom.clone());
    if matches!(a.method, MethodArg::Caed | MethodArg::Both) {
        let t = train_caed(&dom, &problems, &cfg)?;
        for line in &t.report {
            if a.dump_components || !line.starts_with("abstract type") {
                println!("; {line}");
            }
        }
        let macros: Vec<_> = t.selected.iter().map(|(m, _)| m.clone()).collect();
        let path = a.out_dir.join("enhanced-domain.pddl");
        fs::write(&path, write_domain(&dom, &macros)?)?;
        println!("wrote {}", path.display());
        enhanced = t.enhanced;
    }
    if matches!(a.method, MethodArg::Solep | MethodArg::Both) {
        let t = train_solep(&enhanced, &problems, &cfg)?;
        for line in &t.report {
            println!("; {line}");
        }
        let path = a.out_dir.join("macros.txt");
        fs::write(&path, t.file.to_text(&enhanced.domain)?)?;
        println!("wrote {} ({} macros)", path.display(), t.file.entries.len());
    }
    Ok(ExitCode::SUCCESS)
}

fn load_macros(path: Option<&Path>, dom: &Domain) -> Result<Vec<macroplan::macros::MacroOperator>> {
    match path {
        Some(p) => {
            let f = MacroFile::parse(&read(p)?, dom).with_context(|| format!("reading macros from {}", p.display()))?;
            Ok(f.entries.into_iter().map(|e| e.macro_op).collect())
        }
        None => Ok(Vec::new()),
    }
}

fn solve(a: SolveArgs) -> Result<ExitCode> {
    let setup = Setup::from_number(a.setup).expect("range-checked by clap");
    if setup.uses_sequences() != a.macros.is_some() {
        eprintln!("error: --macros is required by setups 3 and 4 and not accepted by setups 1 and 2");
        return Ok(ExitCode::from(EXIT_USAGE));
    }
    let ed = recover_macros(load_domain(&a.domain)?);
    if setup.uses_compiled() && ed.macros.is_empty() {
        log::warn!("domain has no compiled macros");
    }
    let prob = parse_problem(&read(&a.problem)?, &ed.domain)?;
    let seqs = load_macros(a.macros.as_deref(), &ed.domain)?;
    let r = solve_problem(&ed, &prob, setup, &seqs, &a.limits.config())?;
    let s = &r.stats;
    let stats = format!(
        "; expanded {} evaluated {} length {} time {:.3}s",
        s.expanded,
        s.evaluated,
        r.plan.len(),
        s.elapsed.as_secs_f64()
    );
    match r.status {
        SolveStatus::Solved => {
            emit(a.out.as_deref(), &format_plan(&r.plan))?;
            println!("{stats}");
            Ok(ExitCode::SUCCESS)
        }
        SolveStatus::Unsolvable => {
            println!("; no plan exists");
            println!("{stats}");
            Ok(ExitCode::from(EXIT_UNSOLVED))
        }
        SolveStatus::ResourceLimit(l) => {
            println!("; stopped: {l}");
            println!("{stats}");
            Ok(ExitCode::from(EXIT_LIMIT))
        }
    }
}

fn validate(a: ValidateArgs) -> Result<ExitCode> {
    let dom = load_domain(&a.domain)?;
    let prob = parse_problem(&read(&a.problem)?, &dom)?;
    let plan = parse_plan(&read(&a.plan)?)?;
    match validate_plan(&dom, &prob, &plan) {
        Ok(()) => {
            println!("plan valid ({} steps)", plan.len());
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => {
            println!("plan invalid: {e}");
            Ok(ExitCode::from(EXIT_UNSOLVED))
        }
    }
}

fn report(kind: ReportKind) -> Result<ExitCode> {
    match kind {
        ReportKind::Accuracy {
            domain,
            enhanced,
            problems,
            out,
            limits,
        } => {
            let dom = load_domain(&domain)?;
            let mut runs = vec![(EnhancedDomain::plain(dom), Setup::Baseline)];
            if let Some(e) = enhanced {
                runs.push((recover_macros(load_domain(&e)?), Setup::Compiled));
            }
            let mut rows = Vec::new();
            for (ed, setup) in &runs {
                let probs = load_problems(&ed.domain, &problems)?;
                let mut mine = Vec::new();
                for p in &probs {
                    mine.extend(heuristic_accuracy(ed, p, *setup, &limits.config())?);
                }
                if let Some(m) = mean_abs_error(&mine) {
                    info!("{setup}: mean |h - steps| = {m:.3}");
                    eprintln!("{setup}: mean |h - steps| = {m:.3}");
                }
                rows.extend(mine);
            }
            emit(out.as_deref(), &accuracy_csv(&rows)?)?;
        }
        ReportKind::Cost {
            domain,
            enhanced,
            macros,
            problems,
            out,
            limits,
        } => {
            let plain = EnhancedDomain::plain(load_domain(&domain)?);
            let enh = enhanced.map(|e| load_domain(&e).map(recover_macros)).transpose()?;
            let mut setups = vec![Setup::Baseline];
            if enh.is_some() {
                setups.push(Setup::Compiled);
            }
            if macros.is_some() {
                setups.push(if enh.is_some() { Setup::Combined } else { Setup::Sequence });
            }
            let mut runs = Vec::new();
            for path in &problems {
                for &setup in &setups {
                    let ed = if setup.uses_compiled() { enh.as_ref().expect("enhanced domain given") } else { &plain };
                    let prob = parse_problem(&read(path)?, &ed.domain)?;
                    let seqs = load_macros(macros.as_deref(), &ed.domain)?;
                    runs.push((prob.name.clone(), setup, solve_problem(ed, &prob, setup, &seqs, &limits.config())?));
                }
            }
            emit(out.as_deref(), &cost_csv(&cost_rows(&runs))?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Train(a) => train(a),
        Command::Solve(a) => solve(a),
        Command::Validate(a) => validate(a),
        Command::Report { kind } => report(kind),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

