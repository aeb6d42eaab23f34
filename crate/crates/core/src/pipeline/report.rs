use std::collections::BTreeMap;

use super::{prepare, solve_problem, EnhancedDomain, PipelineError, Setup, SolveReport};
use crate::pddl::Problem;
use crate::search::{RelaxedPlanner, SearchConfig, State};

/// Heuristic value and true remaining distance at one state of a solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccuracyRow {
    pub problem: String,
    pub setup: Setup,
    /// Position along the plan; row 0 is the initial state.
    pub index: usize,
    pub h: Option<usize>,
    /// Remaining domain-level steps.
    pub steps: usize,
    /// Remaining primitive actions.
    pub primitive_steps: usize,
}

/// Solves `prob` and evaluates h at every state along the domain-level plan.
/// Returns no rows if the problem is not solved.
pub fn heuristic_accuracy(
    ed: &EnhancedDomain,
    prob: &Problem,
    setup: Setup,
    config: &SearchConfig,
) -> Result<Vec<AccuracyRow>, PipelineError> {
    let p = prepare(ed, prob, setup, &[])?;
    let solved = solve_problem(ed, prob, setup, &[], config)?;
    if !solved.solved() {
        return Ok(Vec::new());
    }
    let t = &p.task;
    let actions: Vec<usize> = solved
        .domain_plan
        .iter()
        .map(|pa| {
            t.actions
                .iter()
                .position(|a| a.operator == pa.name && a.args == pa.args)
                .expect("plan actions come from the same grounding")
        })
        .collect();
    let prim: Vec<usize> = actions.iter().map(|&a| t.actions[a].primitive_len()).collect();
    let mut planner = RelaxedPlanner::new(t);
    let mut s = State::new(&t.init, t.n_facts(), &t.zobrist);
    let mut rows = Vec::with_capacity(actions.len() + 1);
    for i in 0..=actions.len() {
        rows.push(AccuracyRow {
            problem: prob.name.clone(),
            setup,
            index: i,
            h: planner.compute(t, &s, &t.goal).h,
            steps: actions.len() - i,
            primitive_steps: prim[i..].iter().sum(),
        });
        if let Some(&a) = actions.get(i) {
            s = s.successor(&t.actions[a], &t.zobrist);
        }
    }
    Ok(rows)
}

/// Mean of `|h - steps|` over rows with finite h.
pub fn mean_abs_error(rows: &[AccuracyRow]) -> Option<f64> {
    let errs: Vec<f64> = rows
        .iter()
        .filter_map(|r| r.h.map(|h| (h as f64 - r.steps as f64).abs()))
        .collect();
    (!errs.is_empty()).then(|| errs.iter().sum::<f64>() / errs.len() as f64)
}

pub fn accuracy_csv(rows: &[AccuracyRow]) -> Result<String, PipelineError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["problem", "setup", "index", "h", "steps", "primitive_steps"])?;
    for r in rows {
        w.write_record([
            r.problem.clone(),
            r.setup.number().to_string(),
            r.index.to_string(),
            r.h.map_or_else(|| "inf".to_string(), |h| h.to_string()),
            r.steps.to_string(),
            r.primitive_steps.to_string(),
        ])?;
    }
    csv_string(w)
}

fn csv_string(w: csv::Writer<Vec<u8>>) -> Result<String, PipelineError> {
    let bytes = w.into_inner().map_err(|e| PipelineError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Search cost of one run relative to the baseline run on the same problem.
#[derive(Debug, Clone, PartialEq)]
pub struct CostRow {
    pub problem: String,
    pub setup: Setup,
    pub solved: bool,
    pub expanded: usize,
    pub evaluated: usize,
    pub seconds: f64,
    /// Search time per evaluated state.
    pub cost_per_node: f64,
    /// `cost_per_node` over the baseline's; `None` without a baseline run.
    pub relative_cost: Option<f64>,
    pub ground_actions: usize,
    /// Ground actions over the baseline's.
    pub instantiation_rate: Option<f64>,
}

/// Builds cost rows from `(problem, setup, report)` runs.
pub fn cost_rows(runs: &[(String, Setup, SolveReport)]) -> Vec<CostRow> {
    let per_node = |r: &SolveReport| r.stats.elapsed.as_secs_f64() / r.stats.evaluated.max(1) as f64;
    let baseline: BTreeMap<&str, &SolveReport> = runs
        .iter()
        .filter(|(_, s, _)| *s == Setup::Baseline)
        .map(|(p, _, r)| (p.as_str(), r))
        .collect();
    runs.iter()
        .map(|(p, setup, r)| {
            let base = baseline.get(p.as_str());
            let cost = per_node(r);
            CostRow {
                problem: p.clone(),
                setup: *setup,
                solved: r.solved(),
                expanded: r.stats.expanded,
                evaluated: r.stats.evaluated,
                seconds: r.stats.elapsed.as_secs_f64(),
                cost_per_node: cost,
                relative_cost: base.map(|b| {
                    if *setup == Setup::Baseline {
                        1.0
                    } else {
                        cost / per_node(b).max(f64::MIN_POSITIVE)
                    }
                }),
                ground_actions: r.ground_actions,
                instantiation_rate: base.map(|b| r.ground_actions as f64 / b.ground_actions.max(1) as f64),
            }
        })
        .collect()
}

pub fn cost_csv(rows: &[CostRow]) -> Result<String, PipelineError> {
    let opt = |x: Option<f64>| x.map_or_else(String::new, |v| format!("{v:.6}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "problem",
        "setup",
        "solved",
        "expanded",
        "evaluated",
        "seconds",
        "cost_per_node",
        "relative_cost",
        "ground_actions",
        "instantiation_rate",
    ])?;
    for r in rows {
        w.write_record([
            r.problem.clone(),
            r.setup.number().to_string(),
            r.solved.to_string(),
            r.expanded.to_string(),
            r.evaluated.to_string(),
            format!("{:.6}", r.seconds),
            format!("{:.9}", r.cost_per_node),
            opt(r.relative_cost),
            r.ground_actions.to_string(),
            opt(r.instantiation_rate),
        ])?;
    }
    csv_string(w)
}
