mod common;

use std::collections::{BTreeSet, HashMap};
use std::time::Duration;

use common::*;
use macroplan::ground::{ground, GroundingOptions, Task};
use macroplan::macros::solep::extract_macros;
use macroplan::pddl::{Domain, PlanAction, Problem};
use macroplan::pipeline::validate_plan;
use macroplan::search::{
    apply_action, apply_macro, helpful_macro_instantiations, search, ApplyError, BucketOpenList, ClosedSet, ExpansionMode,
    Limit, MacroInstance, Planner, RelaxedPlanner, SearchConfig, SearchOutcome, SequenceMacro, State, Step,
};
use proptest::prelude::*;

fn task(dom: &Domain, prob: &Problem) -> Task {
    ground(dom, prob, &GroundingOptions::default()).unwrap()
}

fn init_state(t: &Task) -> State {
    State::new(&t.init, t.n_facts(), &t.zobrist)
}

fn plan_actions(t: &Task, steps: &[usize]) -> Vec<PlanAction> {
    steps.iter().map(|&a| t.actions[a].plan_action()).collect()
}

#[test]
fn chain_heuristic_is_exact() {
    let dom = domain("chain");
    for k in 1..12 {
        let t = task(&dom, &parse(&dom, &chain(k)));
        let mc = model_check(&t, 1000).unwrap();
        let mut rp = RelaxedPlanner::new(&t);
        assert_eq!(rp.compute(&t, &init_state(&t), &t.goal).h, mc.distance);
        // Every reachable state: h equals the remaining distance.
        for (i, s) in mc.states.iter().enumerate() {
            let facts: Vec<usize> = s.iter().copied().collect();
            let st = State::new(&facts, t.n_facts(), &t.zobrist);
            assert_eq!(rp.compute(&t, &st, &t.goal).h, Some(k - i));
        }
    }
}

#[test]
fn chain_hill_climbing_is_greedy() {
    let dom = domain("chain");
    let t = task(&dom, &problem(&dom, "chain/p05.pddl"));
    let r = search(&t, &[], SearchConfig::default());
    let SearchOutcome::Solved(plan) = r.outcome else { panic!("{:?}", r.outcome) };
    assert_eq!(plan.steps.len(), 5);
    assert!(!r.stats.fallback);
    assert_eq!(r.stats.expanded, 5);
}

#[test]
fn unreachable_goal_has_no_heuristic() {
    let dom = domain("chain");
    let p = parse(&dom, "(define (problem x) (:domain chain) (:objects a b - cell) (:init (token a)) (:goal (token b)))");
    let t = task(&dom, &p);
    let rp = RelaxedPlanner::new(&t).compute(&t, &init_state(&t), &t.goal);
    assert_eq!(rp.h, None);
    assert!(!rp.reachable());
    assert!(matches!(search(&t, &[], SearchConfig::default()).outcome, SearchOutcome::Unsolvable));
}

#[test]
fn helpful_actions_are_applicable_and_fewer() {
    let dom = domain("depots");
    let t = task(&dom, &problem(&dom, "depots/p02.pddl"));
    let s = init_state(&t);
    let rp = RelaxedPlanner::new(&t).compute(&t, &s, &t.goal);
    let applicable: Vec<usize> = t.actions.iter().filter(|a| s.contains_all(&a.pre)).map(|a| a.id).collect();
    assert_eq!(rp.applicable, applicable);
    assert!(!rp.helpful.is_empty());
    assert!(rp.helpful.len() < applicable.len());
    for &a in &rp.helpful {
        assert!(applicable.contains(&a));
        assert!(t.actions[a].add.iter().any(|f| rp.first_layer_goals.contains(f)));
    }
    // Relaxed-plan actions applicable in s are helpful.
    for &a in &rp.actions {
        if applicable.contains(&a) {
            assert!(rp.helpful.contains(&a));
        }
    }
}

#[test]
fn goal_state_needs_no_actions() {
    let dom = domain("chain");
    let t = task(&dom, &parse(&dom, "(define (problem x) (:domain chain) (:objects a - cell) (:init (token a)) (:goal (token a)))"));
    let rp = RelaxedPlanner::new(&t).compute(&t, &init_state(&t), &t.goal);
    assert_eq!(rp.h, Some(0));
    assert!(rp.helpful.is_empty());
    let SearchOutcome::Solved(plan) = search(&t, &[], SearchConfig::default()).outcome else { panic!() };
    assert!(plan.steps.is_empty());
}

fn satellite_macros(dom: &Domain) -> Vec<SequenceMacro> {
    let plan = vec![
        PlanAction::new("turn_to", ["s", "d1", "d0"]),
        PlanAction::new("take_image", ["s", "d1", "i", "m"]),
    ];
    extract_macros(&plan, dom).iter().map(|l| SequenceMacro::from_macro(&l.macro_op)).collect()
}

/// All pairs of relaxed-plan actions matching the macro, by enumeration.
fn brute_force_instances(t: &Task, s: &State, rp_actions: &[usize], macros: &[SequenceMacro]) -> BTreeSet<MacroInstance> {
    let mut out = BTreeSet::new();
    for (mi, m) in macros.iter().enumerate() {
        let mut partial: Vec<Vec<usize>> = vec![vec![]];
        for op in &m.operators {
            let mut next = Vec::new();
            for p in &partial {
                for &a in rp_actions.iter().filter(|&&a| &t.actions[a].operator == op) {
                    let mut q = p.clone();
                    q.push(a);
                    next.push(q);
                }
            }
            partial = next;
        }
        for acts in partial {
            let mut bind: HashMap<usize, &str> = HashMap::new();
            let mut ok = true;
            for (k, &a) in acts.iter().enumerate() {
                for (v, arg) in m.vars[k].iter().zip(&t.actions[a].args) {
                    ok &= *bind.entry(*v).or_insert(arg.as_str()) == arg.as_str();
                }
            }
            let values: BTreeSet<&str> = bind.values().copied().collect();
            ok &= values.len() == bind.len();
            let refs: Vec<_> = acts.iter().map(|&a| &t.actions[a]).collect();
            if ok && apply_macro(s, &refs, &t.zobrist).is_ok() {
                out.insert(MacroInstance { macro_index: mi, actions: acts });
            }
        }
    }
    out
}

#[test]
fn helpful_macro_instances_match_enumeration() {
    let dom = domain("satellite");
    let macros = satellite_macros(&dom);
    assert_eq!(macros.len(), 1);
    for seed in 0..5 {
        let t = task(&dom, &parse(&dom, &satellite(1, 2, 2, 4, 3, seed)));
        let mut rp = RelaxedPlanner::new(&t);
        let mc = model_check(&t, 50_000).unwrap();
        let mut nonempty = 0;
        for st in mc.states.iter().take(300) {
            let facts: Vec<usize> = st.iter().copied().collect();
            let s = State::new(&facts, t.n_facts(), &t.zobrist);
            let r = rp.compute(&t, &s, &t.goal);
            if !r.reachable() {
                continue;
            }
            let got: BTreeSet<MacroInstance> = helpful_macro_instantiations(&t, &s, &r, &macros).into_iter().collect();
            assert_eq!(got, brute_force_instances(&t, &s, &r.actions, &macros));
            nonempty += usize::from(!got.is_empty());
        }
        assert!(nonempty > 0, "seed {seed}: no state offers a turn_to--take_image instance");
    }
}

#[test]
fn macro_successors_come_first() {
    let dom = domain("satellite");
    let macros = satellite_macros(&dom);
    let t = task(&dom, &parse(&dom, &satellite(1, 2, 2, 4, 3, 3)));
    let mc = model_check(&t, 50_000).unwrap();
    let mut planner = Planner::new(&t, &macros, SearchConfig::default());
    let mut met = 0;
    for st in &mc.states {
        let facts: Vec<usize> = st.iter().copied().collect();
        let s = State::new(&facts, t.n_facts(), &t.zobrist);
        let rp = planner.evaluate(&s);
        for mode in [ExpansionMode::HillClimbing, ExpansionMode::BestFirst] {
            let succ = planner.expand(&s, &rp, mode);
            let first_prim = succ.iter().position(|(st, _)| matches!(st, Step::Action(_))).unwrap_or(succ.len());
            assert!(succ[first_prim..].iter().all(|(st, _)| matches!(st, Step::Action(_))));
            met += first_prim;
        }
    }
    assert!(met > 0, "no macro successor met");
}

#[test]
fn best_first_expands_all_applicable_actions() {
    let dom = domain("depots");
    let t = task(&dom, &problem(&dom, "depots/p02.pddl"));
    let mut planner = Planner::new(&t, &[], SearchConfig::default());
    let s = planner.initial_state();
    let rp = planner.evaluate(&s);
    assert_eq!(planner.expand(&s, &rp, ExpansionMode::BestFirst).len(), rp.applicable.len());
    assert_eq!(planner.expand(&s, &rp, ExpansionMode::HillClimbing).len(), rp.helpful.len());
}

#[test]
fn sequence_macros_leave_heuristic_untouched() {
    let dom = domain("satellite");
    let macros = satellite_macros(&dom);
    let t = task(&dom, &parse(&dom, &satellite(1, 2, 2, 4, 3, 1)));
    let mc = model_check(&t, 50_000).unwrap();
    let mut with = Planner::new(&t, &macros, SearchConfig::default());
    let mut without = Planner::new(&t, &[], SearchConfig::default());
    for st in &mc.states {
        let facts: Vec<usize> = st.iter().copied().collect();
        let s = State::new(&facts, t.n_facts(), &t.zobrist);
        assert_eq!(with.evaluate(&s).h, without.evaluate(&s).h);
    }
}

fn solvability_suite() -> Vec<(Domain, Problem)> {
    let mut v = Vec::new();
    let tok = domain("tokens");
    for s in 0..8 {
        v.push((tok.clone(), parse(&tok, &tokens(3, 3, 0.4, s))));
    }
    let dep = domain("depots");
    for s in 0..4 {
        v.push((dep.clone(), parse(&dep, &depots(1, 1, 1, 2, 2, s))));
    }
    let sat = domain("satellite");
    for s in 0..4 {
        v.push((sat.clone(), parse(&sat, &satellite(1, 2, 2, 3, 2, s))));
    }
    v
}

#[test]
fn searches_agree_with_model_checking() {
    for (dom, prob) in solvability_suite() {
        let t = task(&dom, &prob);
        let truth = model_check(&t, 100_000).unwrap().distance;
        for use_ehc in [true, false] {
            for verify_states in [true, false] {
                let cfg = SearchConfig { use_ehc, verify_states, ..SearchConfig::default() };
                let r = search(&t, &[], cfg);
                match (&r.outcome, truth) {
                    (SearchOutcome::Solved(plan), Some(d)) => {
                        let acts = plan_actions(&t, &plan.domain_actions());
                        assert!(acts.len() >= d, "{}: plan shorter than the optimum", prob.name);
                        validate_plan(&dom, &prob, &acts).unwrap();
                    }
                    (SearchOutcome::Unsolvable, None) => {}
                    (o, d) => panic!("{}: {o:?} but distance {d:?}", prob.name),
                }
            }
        }
    }
}

#[test]
fn node_limit_is_reported() {
    let dom = domain("depots");
    let t = task(&dom, &parse(&dom, &depots(1, 2, 2, 6, 5, 1)));
    let cfg = SearchConfig { node_limit: Some(3), ..SearchConfig::default() };
    let r = search(&t, &[], cfg);
    assert!(matches!(r.outcome, SearchOutcome::ResourceLimit(Limit::Nodes)), "{:?}", r.outcome);
    let cfg = SearchConfig { time_limit: Some(Duration::ZERO), ..SearchConfig::default() };
    assert!(matches!(search(&t, &[], cfg).outcome, SearchOutcome::ResourceLimit(Limit::Time)));
    let cfg = SearchConfig { memory_limit: Some(1), ..SearchConfig::default() };
    assert!(matches!(search(&t, &[], cfg).outcome, SearchOutcome::ResourceLimit(Limit::Memory)));
}

#[test]
fn search_is_deterministic() {
    let dom = domain("depots");
    let t = task(&dom, &parse(&dom, &depots(1, 2, 2, 5, 4, 2)));
    let a = search(&t, &[], SearchConfig::default());
    let b = search(&t, &[], SearchConfig::default());
    assert_eq!(a.outcome, b.outcome);
    assert_eq!((a.stats.expanded, a.stats.generated), (b.stats.expanded, b.stats.generated));
}

#[test]
fn open_list_is_fifo_within_buckets() {
    let mut q = BucketOpenList::new();
    q.push(3, "a");
    q.push(5, "b");
    q.push(3, "c");
    assert_eq!(q.pop(), Some((3, "a")));
    assert_eq!(q.pop(), Some((3, "c")));
    q.push(1, "d");
    assert_eq!(q.pop(), Some((1, "d")));
    assert_eq!(q.pop(), Some((5, "b")));
    assert_eq!(q.pop(), None);
    assert!(q.is_empty());
}

#[test]
fn closed_set_keeps_states_once() {
    let dom = domain("chain");
    let t = task(&dom, &problem(&dom, "chain/p05.pddl"));
    let s = init_state(&t);
    for mut closed in [ClosedSet::new(), ClosedSet::verifying()] {
        assert!(closed.insert(&s));
        assert!(!closed.insert(&s.clone()));
        assert!(closed.contains(&s));
        assert_eq!(closed.len(), 1);
    }
}

#[test]
fn inapplicable_actions_are_refused() {
    let dom = domain("chain");
    let t = task(&dom, &problem(&dom, "chain/p05.pddl"));
    let s = init_state(&t);
    let blocked = t.actions.iter().find(|a| !s.contains_all(&a.pre)).unwrap();
    assert!(matches!(apply_action(&s, blocked, &t.zobrist), Err(ApplyError::Inapplicable(_))));
    let first = t.actions.iter().find(|a| s.contains_all(&a.pre)).unwrap();
    let r = apply_macro(&s, &[first, first], &t.zobrist);
    assert!(matches!(r, Err(ApplyError::ChainBroken { index: 1, .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn incremental_hash_matches_recomputation(seed in 0u64..1000, walk in proptest::collection::vec(any::<prop::sample::Index>(), 1..200)) {
        let dom = domain("depots");
        let t = task(&dom, &parse(&dom, &depots(1, 1, 2, 3, 2, seed)));
        let mut s = init_state(&t);
        for pick in walk {
            let app: Vec<_> = t.actions.iter().filter(|a| s.contains_all(&a.pre)).collect();
            if app.is_empty() {
                break;
            }
            s = apply_action(&s, app[pick.index(app.len())], &t.zobrist).unwrap();
            prop_assert_eq!(s.hash(), t.zobrist.hash(s.facts()));
            let rebuilt = State::new(&s.facts().collect::<Vec<_>>(), t.n_facts(), &t.zobrist);
            prop_assert_eq!(&rebuilt, &s);
        }
    }
}
