#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use macroplan::ground::{FactId, GroundAction, Task};
use macroplan::pddl::{parse_domain, parse_problem, Domain, Problem};

pub fn fixture_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn read_fixture(rel: &str) -> String {
    std::fs::read_to_string(fixture_path(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn domain(name: &str) -> Domain {
    parse_domain(&read_fixture(&format!("{name}/domain.pddl"))).unwrap()
}

pub fn problem(dom: &Domain, rel: &str) -> Problem {
    parse_problem(&read_fixture(rel), dom).unwrap()
}

pub fn parse(dom: &Domain, text: &str) -> Problem {
    parse_problem(text, dom).unwrap_or_else(|e| panic!("{e}\n{text}"))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn objects(out: &mut String, names: &[String], ty: &str) {
    if !names.is_empty() {
        let _ = writeln!(out, "    {} - {ty}", names.join(" "));
    }
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Satellite instance: every instrument sits on a random satellite, supports
/// one or two modes and has one calibration target.
pub fn satellite(sats: usize, instruments: usize, modes: usize, dirs: usize, goals: usize, seed: u64) -> String {
    let mut r = rng(seed);
    let s = names("sat", sats);
    let i = names("inst", instruments);
    let m = names("mode", modes);
    let d = names("dir", dirs);
    let mut out = format!("(define (problem sat-{sats}-{instruments}-{modes}-{dirs}-{goals}-{seed})\n  (:domain satellite)\n  (:objects\n");
    objects(&mut out, &s, "satellite");
    objects(&mut out, &i, "instrument");
    objects(&mut out, &m, "mode");
    objects(&mut out, &d, "direction");
    out.push_str("  )\n  (:init\n");
    let mut supported = BTreeSet::new();
    for (k, inst) in i.iter().enumerate() {
        // Every satellite gets at least one instrument.
        let sat = if k < sats { &s[k] } else { s.choose(&mut r).unwrap() };
        let _ = writeln!(out, "    (on_board {inst} {sat})");
        let take = r.gen_range(1..=2.min(modes));
        let mut ms: Vec<&String> = m.choose_multiple(&mut r, take).collect();
        if k < modes {
            ms.push(&m[k]);
        }
        ms.sort();
        ms.dedup();
        for mode in ms {
            supported.insert(mode.clone());
            let _ = writeln!(out, "    (supports {inst} {mode})");
        }
        let _ = writeln!(out, "    (calibration_target {inst} {})", d.choose(&mut r).unwrap());
    }
    for sat in &s {
        let _ = writeln!(out, "    (power_avail {sat}) (pointing {sat} {})", d.choose(&mut r).unwrap());
    }
    out.push_str("  )\n  (:goal (and\n");
    let supported: Vec<String> = supported.into_iter().collect();
    let mut pairs: Vec<(String, String)> = d.iter().flat_map(|x| supported.iter().map(move |y| (x.clone(), y.clone()))).collect();
    pairs.shuffle(&mut r);
    for (dir, mode) in pairs.into_iter().take(goals) {
        let _ = writeln!(out, "    (have_image {dir} {mode})");
    }
    out.push_str("  )))\n");
    out
}

/// Depots instance: crates stacked on random pallets, goals place crates on other surfaces.
pub fn depots(depots_n: usize, dists: usize, trucks: usize, crates: usize, goals: usize, seed: u64) -> String {
    let mut r = rng(seed);
    let places: Vec<String> = names("depot", depots_n).into_iter().chain(names("distributor", dists)).collect();
    let pallets = names("pallet", places.len());
    let hoists = names("hoist", places.len());
    let c = names("crate", crates);
    let t = names("truck", trucks);
    let mut out = format!("(define (problem depots-{depots_n}-{dists}-{trucks}-{crates}-{goals}-{seed})\n  (:domain depots)\n  (:objects\n");
    objects(&mut out, &names("depot", depots_n), "depot");
    objects(&mut out, &names("distributor", dists), "distributor");
    objects(&mut out, &t, "truck");
    objects(&mut out, &pallets, "pallet");
    objects(&mut out, &c, "crate");
    objects(&mut out, &hoists, "hoist");
    out.push_str("  )\n  (:init\n");
    let mut top: Vec<String> = pallets.clone();
    for (k, p) in places.iter().enumerate() {
        let _ = writeln!(out, "    (at {} {p}) (at {} {p}) (available {})", pallets[k], hoists[k], hoists[k]);
    }
    for tr in &t {
        let _ = writeln!(out, "    (at {tr} {})", places.choose(&mut r).unwrap());
    }
    for cr in &c {
        let k = r.gen_range(0..places.len());
        let _ = writeln!(out, "    (at {cr} {}) (on {cr} {})", places[k], top[k]);
        top[k] = cr.clone();
    }
    for s in &top {
        let _ = writeln!(out, "    (clear {s})");
    }
    out.push_str("  )\n  (:goal (and\n");
    // Goal towers: each chosen crate goes onto a random pallet, stacking when pallets repeat.
    let mut goal_top: Vec<String> = pallets.clone();
    let mut chosen: Vec<&String> = c.iter().collect();
    chosen.shuffle(&mut r);
    for cr in chosen.into_iter().take(goals) {
        let k = r.gen_range(0..places.len());
        let _ = writeln!(out, "    (on {cr} {})", goal_top[k]);
        goal_top[k] = cr.clone();
    }
    out.push_str("  )))\n");
    out
}

/// Rovers instance on a ring of waypoints with chords; one camera and one store per rover.
pub fn rovers(rovers_n: usize, waypoints: usize, objectives: usize, goals: usize, seed: u64) -> String {
    let mut r = rng(seed);
    let rv = names("rover", rovers_n);
    let wp = names("wp", waypoints);
    let ob = names("obj", objectives);
    let cams = names("cam", rovers_n);
    let stores = names("store", rovers_n);
    let modes = vec!["colour".to_string(), "high_res".to_string()];
    let mut out = format!("(define (problem rovers-{rovers_n}-{waypoints}-{objectives}-{goals}-{seed})\n  (:domain rover)\n  (:objects\n");
    objects(&mut out, &rv, "rover");
    objects(&mut out, &wp, "waypoint");
    objects(&mut out, &ob, "objective");
    objects(&mut out, &cams, "camera");
    objects(&mut out, &stores, "store");
    objects(&mut out, &modes, "mode");
    out.push_str("    general - lander\n  )\n  (:init\n");
    let mut edges: BTreeSet<(usize, usize)> = (0..waypoints).map(|k| (k, (k + 1) % waypoints)).collect();
    for _ in 0..waypoints / 3 {
        let (a, b) = (r.gen_range(0..waypoints), r.gen_range(0..waypoints));
        if a != b {
            edges.insert((a, b));
        }
    }
    let _ = writeln!(out, "    (at_lander general {}) (channel_free general)", wp[0]);
    for &(a, b) in &edges {
        let _ = writeln!(out, "    (visible {} {}) (visible {} {})", wp[a], wp[b], wp[b], wp[a]);
    }
    for (k, rover) in rv.iter().enumerate() {
        let _ = writeln!(out, "    (at {rover} {}) (available {rover})", wp.choose(&mut r).unwrap());
        let _ = writeln!(out, "    (store_of {} {rover}) (empty {})", stores[k], stores[k]);
        let _ = writeln!(out, "    (on_board {} {rover}) (equipped_for_imaging {rover})", cams[k]);
        let _ = writeln!(out, "    (equipped_for_soil_analysis {rover})");
        let _ = writeln!(out, "    (supports {} colour) (supports {} high_res)", cams[k], cams[k]);
        let _ = writeln!(out, "    (calibration_target {} {})", cams[k], ob.choose(&mut r).unwrap());
        for &(a, b) in &edges {
            let _ = writeln!(out, "    (can_traverse {rover} {} {}) (can_traverse {rover} {} {})", wp[a], wp[b], wp[b], wp[a]);
        }
    }
    for o in &ob {
        for w in wp.choose_multiple(&mut r, 2) {
            let _ = writeln!(out, "    (visible_from {o} {w})");
        }
    }
    let soil: Vec<&String> = wp.choose_multiple(&mut r, goals.div_ceil(2)).collect();
    for w in &soil {
        let _ = writeln!(out, "    (at_soil_sample {w})");
    }
    out.push_str("  )\n  (:goal (and\n");
    for (k, w) in soil.iter().enumerate().take(goals / 2) {
        let _ = k;
        let _ = writeln!(out, "    (communicated_soil_data {w})");
    }
    for k in 0..goals - goals / 2 {
        let _ = writeln!(out, "    (communicated_image_data {} {})", ob[k % objectives], modes[k % 2]);
    }
    out.push_str("  )))\n");
    out
}

/// Chain of `k` cells; the shortest plan has `k` steps.
pub fn chain(k: usize) -> String {
    let cells = names("c", k + 1);
    let mut out = format!("(define (problem chain-{k})\n  (:domain chain)\n  (:objects {} - cell)\n  (:init (token c0)", cells.join(" "));
    for w in cells.windows(2) {
        let _ = write!(out, " (link {} {})", w[0], w[1]);
    }
    let _ = write!(out, ")\n  (:goal (token c{k})))\n");
    out
}

/// Token assignment: solvable iff the fits relation has a matching covering every slot.
pub fn tokens(tokens_n: usize, slots: usize, density: f64, seed: u64) -> String {
    let mut r = rng(seed);
    let t = names("t", tokens_n);
    let s = names("s", slots);
    let mut out = format!("(define (problem tokens-{tokens_n}-{slots}-{seed})\n  (:domain tokens)\n  (:objects\n");
    objects(&mut out, &t, "token");
    objects(&mut out, &s, "slot");
    out.push_str("  )\n  (:init\n");
    for tok in &t {
        let _ = write!(out, "    (free {tok})");
        for sl in &s {
            if r.gen_bool(density) {
                let _ = write!(out, " (fits {tok} {sl})");
            }
        }
        out.push('\n');
    }
    out.push_str("  )\n  (:goal (and");
    for sl in &s {
        let _ = write!(out, " (filled {sl})");
    }
    out.push_str(")))\n");
    out
}

/// Explicit-state breadth-first search over a ground task, independent of the planner.
pub struct ModelCheck {
    /// Reachable states in discovery order.
    pub states: Vec<BTreeSet<FactId>>,
    /// Shortest distance to a goal state, if any goal state is reachable.
    pub distance: Option<usize>,
}

/// Returns `None` if more than `cap` states are reachable.
pub fn model_check(task: &Task, cap: usize) -> Option<ModelCheck> {
    model_check_with(task, cap, |_| true)
}

/// Like [`model_check`], using only the actions accepted by `usable`.
pub fn model_check_with(task: &Task, cap: usize, usable: impl Fn(&GroundAction) -> bool) -> Option<ModelCheck> {
    let init: BTreeSet<FactId> = task.init.iter().copied().collect();
    let goal = |s: &BTreeSet<FactId>| !task.static_goal_violated && task.goal.iter().all(|g| s.contains(g));
    let mut index: HashMap<BTreeSet<FactId>, usize> = HashMap::new();
    let mut states = vec![init.clone()];
    let mut depth = vec![0usize];
    index.insert(init, 0);
    let mut queue = VecDeque::from([0usize]);
    let mut distance = None;
    while let Some(i) = queue.pop_front() {
        let s = states[i].clone();
        if distance.is_none() && goal(&s) {
            distance = Some(depth[i]);
        }
        for a in task.actions.iter().filter(|a| usable(a)) {
            if !a.pre.iter().all(|p| s.contains(p)) {
                continue;
            }
            let mut n = s.clone();
            for d in &a.del {
                n.remove(d);
            }
            n.extend(a.add.iter().copied());
            if !index.contains_key(&n) {
                if states.len() >= cap {
                    return None;
                }
                index.insert(n.clone(), states.len());
                states.push(n);
                depth.push(depth[i] + 1);
                queue.push_back(states.len() - 1);
            }
        }
    }
    Some(ModelCheck { states, distance })
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}
