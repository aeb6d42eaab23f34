use std::collections::{BTreeMap, BTreeSet};

use log::{info, warn};

use super::{embed_macros, solve_problem, EnhancedDomain, MacroEntry, MacroFile, Method, PipelineError, Setup};
use crate::abstraction::{build_static_graph, component_abstraction, partition_predicates, AbstractType, ClusterOptions, SeedOrder};
use crate::macros::caed::{generate_macros, MacroLimits};
use crate::macros::solep::extract_macros;
use crate::macros::{Invariants, MacroOperator};
use crate::pddl::{flatten_types, restore_hierarchy, specialize_problem, Domain, Problem};
use crate::ranking::{RankingMode, RankingParams, WeightTable};
use crate::search::SearchConfig;

#[derive(Debug, Clone)]
pub struct TrainingConfig {
    pub params: RankingParams<f64>,
    /// Compiled macros kept after frequency ranking.
    pub k: usize,
    pub limits: MacroLimits,
    /// Shuffles the seed types of the clustering; declaration order when absent.
    pub seed: Option<u64>,
    pub search: SearchConfig,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            params: RankingParams::default(),
            k: 2,
            limits: MacroLimits::default(),
            seed: None,
            search: SearchConfig::default(),
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::Config(m.to_string()));
        if self.k == 0 {
            return bad("k must be positive");
        }
        if self.limits.max_length < 2 || self.limits.max_preconditions == 0 || self.limits.node_budget == 0 {
            return bad("macro limits must allow at least two operators and one precondition");
        }
        if !(self.params.alpha > 0.0) {
            return bad("alpha must be positive");
        }
        Ok(())
    }

    /// Settings echoed into macro file headers.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut v = vec![
            ("alpha".to_string(), self.params.alpha.to_string()),
            ("bonus".to_string(), self.params.bonus.to_string()),
            ("c".to_string(), self.params.c.to_string()),
            ("k".to_string(), self.k.to_string()),
            ("max-length".to_string(), self.limits.max_length.to_string()),
            ("max-preconditions".to_string(), self.limits.max_preconditions.to_string()),
        ];
        if let Some(s) = self.seed {
            v.push(("seed".to_string(), s.to_string()));
        }
        v
    }
}

#[derive(Debug, Clone)]
pub struct CaedTraining {
    pub enhanced: EnhancedDomain,
    pub abstract_types: Vec<AbstractType>,
    /// Candidates over the original types, compiled, in canonical order.
    pub candidates: Vec<MacroOperator>,
    /// Final frequency weight of every candidate.
    pub weights: Vec<(MacroOperator, f64)>,
    pub selected: Vec<(MacroOperator, f64)>,
    pub report: Vec<String>,
}

fn invariants_for(dom: &Domain, problems: &[Problem]) -> Invariants {
    let mut inv = Invariants::synthesize(dom);
    inv.retain_valid_in(problems, |_, a| a.clone());
    inv
}

/// Generates compiled macros from the abstract types of the training
/// problems, ranks them by use in training solutions and keeps the top `k`.
pub fn train_caed(dom: &Domain, problems: &[Problem], cfg: &TrainingConfig) -> Result<CaedTraining, PipelineError> {
    cfg.validate()?;
    if problems.is_empty() {
        return Err(PipelineError::NoTrainingProblems);
    }
    let mut out = CaedTraining {
        enhanced: EnhancedDomain::plain(dom.clone()),
        abstract_types: Vec::new(),
        candidates: Vec::new(),
        weights: Vec::new(),
        selected: Vec::new(),
        report: Vec::new(),
    };
    let flat = flatten_types(dom);
    let specialized: Vec<Problem> = problems.iter().map(|p| specialize_problem(dom, p)).collect();
    let part = partition_predicates(&flat);
    let flat_inv = invariants_for(&flat, &specialized);
    let opts = ClusterOptions {
        seeds: cfg.seed.map_or(SeedOrder::Declaration, SeedOrder::Shuffled),
        ..ClusterOptions::default()
    };
    let mut types = BTreeSet::new();
    for sp in &specialized {
        let g = build_static_graph(&flat, sp, &part);
        let d = component_abstraction(&g, &opts)?;
        types.extend(d.components.iter().map(AbstractType::of));
    }
    out.abstract_types = types.into_iter().collect();
    if out.abstract_types.is_empty() {
        out.report.push("no abstract components found; no macros, domain unchanged".into());
        return Ok(out);
    }
    for at in &out.abstract_types {
        out.report.push(format!("abstract type {at}"));
    }

    let mut flat_macros = BTreeSet::new();
    for at in &out.abstract_types {
        let gen = generate_macros(&flat, at, &part, &cfg.limits, &flat_inv);
        if gen.truncated {
            out.report.push(format!("macro generation truncated after {} nodes", gen.nodes));
        }
        flat_macros.extend(gen.macros);
    }
    let restored = restore_hierarchy(&flat_macros.into_iter().collect::<Vec<_>>(), &flat);
    let inv = invariants_for(dom, problems);
    let compiled: BTreeSet<MacroOperator> = restored
        .iter()
        .filter_map(|m| m.compile(dom, &inv).ok())
        .map(|m| m.canonical())
        .collect();
    out.candidates = compiled.into_iter().collect();
    out.report.push(format!("{} candidate macros", out.candidates.len()));
    if out.candidates.is_empty() {
        out.report.push("no macros; domain unchanged".into());
        return Ok(out);
    }

    let all = embed_macros(dom, &out.candidates)?;
    let mut table: WeightTable<f64, MacroOperator> = WeightTable::new(RankingMode::Frequency, cfg.params);
    for m in &out.candidates {
        table.insert(m.clone());
    }
    for (i, p) in problems.iter().enumerate() {
        let r = solve_problem(&all, p, Setup::Compiled, &[], &cfg.search)?;
        if !r.solved() {
            warn!("training problem {} ({}) not solved with all candidates", i, p.name);
            out.report.push(format!("problem {} unsolved with all candidates", p.name));
            continue;
        }
        let mut counts: BTreeMap<&MacroOperator, usize> = BTreeMap::new();
        for a in &r.domain_plan {
            if let Some(m) = all.macros.get(&a.name) {
                *counts.entry(m).or_default() += 1;
            }
        }
        table.frequency_update(counts);
    }
    out.weights = table.iter().map(|(m, w)| (m.clone(), w)).collect();
    out.selected = table.select_top_k(cfg.k);
    for (m, w) in &out.selected {
        out.report.push(format!("selected {} weight {w}", m.name()));
        info!("selected compiled macro {m} ({w})");
    }
    let chosen: Vec<MacroOperator> = out.selected.iter().map(|(m, _)| m.clone()).collect();
    out.enhanced = embed_macros(dom, &chosen)?;
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SolepTraining {
    pub file: MacroFile,
    /// Final gradient weight of every candidate.
    pub weights: Vec<(MacroOperator, f64)>,
    pub threshold: f64,
    pub report: Vec<String>,
}

/// Extracts sequence macros from training solutions and keeps those that
/// beat the imaginary reference macro. Compiled macros of `ed` stay in use
/// throughout, so training on an enhanced domain learns on top of them.
pub fn train_solep(ed: &EnhancedDomain, problems: &[Problem], cfg: &TrainingConfig) -> Result<SolepTraining, PipelineError> {
    cfg.validate()?;
    if problems.is_empty() {
        return Err(PipelineError::NoTrainingProblems);
    }
    let (base_setup, macro_setup) = if ed.macros.is_empty() {
        (Setup::Baseline, Setup::Sequence)
    } else {
        (Setup::Compiled, Setup::Combined)
    };
    let mut table: WeightTable<f64, MacroOperator> = WeightTable::new(RankingMode::Gradient, cfg.params);
    let mut report = Vec::new();
    for p in problems {
        let base = solve_problem(ed, p, base_setup, &[], &cfg.search)?;
        if !base.solved() {
            warn!("training problem {} skipped: no baseline solution", p.name);
            report.push(format!("problem {} skipped: unsolved", p.name));
            continue;
        }
        let n = base.stats.expanded as u64;
        let l = base.plan.len();
        if n == 0 || l == 0 {
            report.push(format!("problem {} skipped: trivial", p.name));
            continue;
        }
        let candidates = extract_macros(&base.domain_plan, &ed.domain);
        report.push(format!("problem {}: N = {n}, L = {l}, {} candidates", p.name, candidates.len()));
        for c in candidates {
            table.insert(c.macro_op.clone());
            let r = solve_problem(ed, p, macro_setup, std::slice::from_ref(&c.macro_op), &cfg.search)?;
            let n_m = r.solved().then_some(r.stats.expanded as u64);
            table.gradient_update(&c.macro_op, n, n_m, l);
        }
        table.threshold_update(l);
    }
    let entries = table
        .select_below_threshold()
        .into_iter()
        .map(|(m, w)| MacroEntry {
            method: Method::Solep,
            macro_op: m,
            weight: w,
        })
        .collect();
    Ok(SolepTraining {
        file: MacroFile {
            domain: ed.domain.name.clone(),
            config: cfg.echo(),
            entries,
        },
        weights: table.iter().map(|(m, w)| (m.clone(), w)).collect(),
        threshold: table.threshold,
        report,
    })
}
