//! Iterative-deepening forward search for plans that satisfy a constraint
//! program over their full window.

use std::collections::{BTreeSet, HashSet};

use super::action::{ActionModel, PrimitiveAction};
use super::state::WorldState;
use super::{Plan, Trajectory, DEFAULT_HORIZON};
use crate::compiler::{check, ConstraintKind, ConstraintProgram};
use crate::knowledge::formula::ConditionFormula;
use crate::knowledge::taxonomy::Taxonomy;

/// Failed `(state, disjunct flags, remaining depth)` nodes.
type Memo = HashSet<(WorldState, Vec<(bool, bool)>, usize)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub horizon: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { horizon: DEFAULT_HORIZON }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanOutcome {
    pub plan: Plan,
    pub trajectory: Trajectory,
    /// Chosen entity per witness, in program order.
    pub witnesses: Vec<(String, String)>,
}

/// Entities (sorted) eligible for each witness of `program`.
pub fn witness_candidates(program: &ConstraintProgram, entities: &[String], taxonomy: &Taxonomy) -> Vec<Vec<String>> {
    let sorted: BTreeSet<&String> = entities.iter().collect();
    program
        .witnesses
        .iter()
        .map(|w| sorted.iter().filter(|e| taxonomy.is_member(e, &w.bound)).map(|e| (*e).clone()).collect())
        .collect()
}

/// All assignments in lexicographic order of candidate positions.
fn assignments(candidates: &[Vec<String>]) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new()];
    for options in candidates {
        let mut next = Vec::with_capacity(out.len() * options.len());
        for prefix in &out {
            for o in options {
                let mut v: Vec<String> = prefix.clone();
                v.push(o.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn holds(state: &WorldState, f: &ConditionFormula) -> bool {
    f.clauses.iter().all(|c| c.iter().any(|l| state.satisfies(l)))
}

/// A ground program prepared for search.
struct Prepared<'a> {
    program: ConstraintProgram,
    throughout: Vec<&'a ConditionFormula>,
    disjunctive: Vec<(&'a ConditionFormula, &'a ConditionFormula)>,
    end: Vec<&'a ConditionFormula>,
}

/// False when a constraint can be refuted from `initial` alone: a failed
/// start condition, or an end/throughout clause over predicates no action
/// changes that is already false.
fn feasible(program: &ConstraintProgram, initial: &WorldState, model: &ActionModel) -> bool {
    let changeable = model.changeable_predicates();
    for c in &program.constraints {
        match c.kind {
            ConstraintKind::AtStart => {
                if !holds(initial, &c.formula) {
                    return false;
                }
            }
            ConstraintKind::AtEnd | ConstraintKind::Throughout => {
                let frozen_false = c.formula.clauses.iter().any(|clause| {
                    clause.iter().all(|l| !changeable.contains(l.predicate.as_str()) && !initial.satisfies(l))
                });
                if frozen_false {
                    return false;
                }
            }
            ConstraintKind::DisjunctiveThroughout => {}
        }
    }
    true
}

struct Dfs<'a, 'p> {
    model: &'a ActionModel,
    actions: &'a [PrimitiveAction],
    prepared: &'p Prepared<'p>,
    failed: Memo,
    path: Vec<usize>,
}

impl Dfs<'_, '_> {
    fn run(&mut self, state: &WorldState, flags: &[(bool, bool)], remaining: usize) -> bool {
        if remaining == 0 {
            return self.prepared.end.iter().all(|f| holds(state, f));
        }
        let key = (state.clone(), flags.to_vec(), remaining);
        if self.failed.contains(&key) {
            return false;
        }
        for (i, action) in self.actions.iter().enumerate() {
            if !self.model.applicable(state, action) {
                continue;
            }
            let next = self.model.apply(state, action).expect("checked applicable");
            if !self.prepared.throughout.iter().all(|f| holds(&next, f)) {
                continue;
            }
            let next_flags: Vec<(bool, bool)> = flags
                .iter()
                .zip(&self.prepared.disjunctive)
                .map(|(&(a, b), (fa, fb))| (a || !holds(&next, fa), b || !holds(&next, fb)))
                .collect();
            if next_flags.iter().any(|&(a, b)| a && b) {
                continue;
            }
            self.path.push(i);
            if self.run(&next, &next_flags, remaining - 1) {
                return true;
            }
            self.path.pop();
        }
        self.failed.insert(key);
        false
    }
}

/// Searches lengths `1..=horizon`; for each length, witness assignments in
/// lexicographic order, then depth-first over `actions` in the given order.
/// The first plan whose trajectory satisfies the program on `(0, n)` wins.
pub fn plan(
    initial: &WorldState,
    program: &ConstraintProgram,
    model: &ActionModel,
    actions: &[PrimitiveAction],
    candidates: &[Vec<String>],
    options: SearchOptions,
) -> Option<PlanOutcome> {
    let choices: Vec<Vec<String>> = assignments(candidates)
        .into_iter()
        .filter(|choice| feasible(&program.instantiate(choice), initial, model))
        .collect();
    let ground: Vec<ConstraintProgram> = choices.iter().map(|c| program.instantiate(c)).collect();
    let prepared: Vec<Prepared> = ground
        .iter()
        .map(|p| Prepared {
            program: p.clone(),
            throughout: p
                .constraints
                .iter()
                .filter(|c| c.kind == ConstraintKind::Throughout)
                .map(|c| &c.formula)
                .collect(),
            disjunctive: p
                .constraints
                .iter()
                .filter(|c| c.kind == ConstraintKind::DisjunctiveThroughout)
                .map(|c| (&c.formula, c.alternative.as_ref().expect("disjunctive constraint has two branches")))
                .collect(),
            end: p.end_formulas().collect(),
        })
        .collect();
    let mut memos: Vec<Memo> = vec![HashSet::new(); prepared.len()];

    for n in 1..=options.horizon {
        for (idx, prep) in prepared.iter().enumerate() {
            if !prep.throughout.iter().all(|f| holds(initial, f)) {
                continue;
            }
            let flags: Vec<(bool, bool)> =
                prep.disjunctive.iter().map(|(a, b)| (!holds(initial, a), !holds(initial, b))).collect();
            if flags.iter().any(|&(a, b)| a && b) {
                continue;
            }
            let mut dfs = Dfs { model, actions, prepared: prep, failed: std::mem::take(&mut memos[idx]), path: Vec::new() };
            let found = dfs.run(initial, &flags, n);
            memos[idx] = std::mem::take(&mut dfs.failed);
            if found {
                let mut traj = Trajectory::new(initial.clone());
                for &i in &dfs.path {
                    traj.push(model, actions[i].clone()).expect("search only follows applicable actions");
                }
                debug_assert_eq!(check(&prep.program, &traj, (0, n)), Ok(None));
                let witnesses = program.witnesses.iter().map(|w| w.role.clone()).zip(choices[idx].iter().cloned()).collect();
                return Some(PlanOutcome { plan: traj.plan(), trajectory: traj, witnesses });
            }
        }
    }
    None
}

/// Plan for a frame realized by a single primitive action. Tries the
/// `targets` in order: if one is applicable in `initial` it is the whole
/// plan; otherwise the shortest prefix (up to `horizon - 1` steps) after
/// which some target becomes applicable, followed by that target.
pub fn plan_primitive(
    initial: &WorldState,
    model: &ActionModel,
    actions: &[PrimitiveAction],
    targets: &[PrimitiveAction],
    options: SearchOptions,
) -> Option<PlanOutcome> {
    if targets.is_empty() {
        return None;
    }
    let mut failed = HashSet::new();
    for prefix_len in 0..options.horizon {
        let mut path = Vec::new();
        if let Some(target) = prefix_search(initial, model, actions, targets, prefix_len, &mut failed, &mut path) {
            let mut traj = Trajectory::new(initial.clone());
            for &i in &path {
                traj.push(model, actions[i].clone()).expect("prefix is applicable");
            }
            traj.push(model, targets[target].clone()).expect("target is applicable after prefix");
            return Some(PlanOutcome { plan: traj.plan(), trajectory: traj, witnesses: Vec::new() });
        }
    }
    None
}

fn prefix_search(
    state: &WorldState,
    model: &ActionModel,
    actions: &[PrimitiveAction],
    targets: &[PrimitiveAction],
    remaining: usize,
    failed: &mut HashSet<(WorldState, usize)>,
    path: &mut Vec<usize>,
) -> Option<usize> {
    if remaining == 0 {
        return targets.iter().position(|t| model.applicable(state, t));
    }
    if failed.contains(&(state.clone(), remaining)) {
        return None;
    }
    for (i, action) in actions.iter().enumerate() {
        if !model.applicable(state, action) {
            continue;
        }
        let next = model.apply(state, action).expect("checked applicable");
        path.push(i);
        if let Some(t) = prefix_search(&next, model, actions, targets, remaining - 1, failed, path) {
            return Some(t);
        }
        path.pop();
    }
    failed.insert((state.clone(), remaining));
    None
}
