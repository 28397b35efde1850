//! Turns an instantiated meta-task into temporal constraints over a plan
//! window, and checks those constraints against trajectories.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::knowledge::formula::{ConditionFormula, Literal, Term};
use crate::knowledge::meta_task::MetaTaskDefinition;
use crate::knowledge::taxonomy::{ClassExpr, Taxonomy};
use crate::planner::{Trajectory, WorldState};
use crate::roles::InstantiatedMetaTask;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error("task {task} does not match definition {definition}")]
    FrameMismatch { task: String, definition: String },
    #[error("{task} has {got} parameters, definition has {expected} roles")]
    ParameterCount { task: String, got: usize, expected: usize },
    #[error("role {role} of {frame_id} is unspecified and has no class bound")]
    Unbounded { frame_id: String, role: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error("window ({start}, {end}) is outside a trajectory of length {len}")]
    Window { start: usize, end: usize, len: usize },
    #[error("program still has unresolved witness {0}")]
    Unresolved(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConstraintKind {
    AtStart,
    AtEnd,
    Throughout,
    DisjunctiveThroughout,
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintKind::AtStart => "at-start",
            ConstraintKind::AtEnd => "at-end",
            ConstraintKind::Throughout => "throughout",
            ConstraintKind::DisjunctiveThroughout => "disjunctive-throughout",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalConstraint {
    pub kind: ConstraintKind,
    pub formula: ConditionFormula,
    /// Second branch, only for `DisjunctiveThroughout`.
    pub alternative: Option<ConditionFormula>,
}

impl TemporalConstraint {
    pub fn new(kind: ConstraintKind, formula: ConditionFormula) -> Self {
        TemporalConstraint { kind, formula, alternative: None }
    }

    pub fn disjunctive(a: ConditionFormula, b: ConditionFormula) -> Self {
        TemporalConstraint { kind: ConstraintKind::DisjunctiveThroughout, formula: a, alternative: Some(b) }
    }

    fn formulas(&self) -> impl Iterator<Item = &ConditionFormula> {
        std::iter::once(&self.formula).chain(self.alternative.as_ref())
    }
}

/// An unspecified role the planner must fill with an entity of `bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub role: String,
    pub bound: ClassExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintProgram {
    pub task: String,
    pub constraints: Vec<TemporalConstraint>,
    pub witnesses: Vec<Witness>,
}

/// First failed constraint found by [`check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub constraint: usize,
    pub kind: ConstraintKind,
    /// Time at which the formula failed.
    pub time: usize,
}

fn literal_holds(state: &WorldState, lit: &Literal) -> bool {
    state.satisfies(lit)
}

fn formula_holds(state: &WorldState, formula: &ConditionFormula) -> bool {
    formula.clauses.iter().all(|c| c.iter().any(|l| literal_holds(state, l)))
}

fn first_failure(traj: &Trajectory, formula: &ConditionFormula, from: usize, to: usize) -> Option<usize> {
    (from..=to).find(|&t| !formula_holds(&traj.states[t], formula))
}

impl ConstraintProgram {
    pub fn is_ground(&self) -> bool {
        self.witnesses.is_empty()
            && self
                .constraints
                .iter()
                .flat_map(TemporalConstraint::formulas)
                .all(|f| f.literals().all(|l| l.ground_args().is_some()))
    }

    /// Substitutes one entity per witness (in witness order).
    pub fn instantiate(&self, choice: &[String]) -> ConstraintProgram {
        let bindings: BTreeMap<String, String> =
            self.witnesses.iter().map(|w| w.role.clone()).zip(choice.iter().cloned()).collect();
        ConstraintProgram {
            task: self.task.clone(),
            constraints: self
                .constraints
                .iter()
                .map(|c| TemporalConstraint {
                    kind: c.kind,
                    formula: c.formula.substitute(&bindings),
                    alternative: c.alternative.as_ref().map(|a| a.substitute(&bindings)),
                })
                .collect(),
            witnesses: self.witnesses[choice.len().min(self.witnesses.len())..].to_vec(),
        }
    }

    /// Formulas that must hold at the end of the window.
    pub fn end_formulas(&self) -> impl Iterator<Item = &ConditionFormula> {
        self.constraints.iter().filter(|c| c.kind == ConstraintKind::AtEnd).map(|c| &c.formula)
    }

    /// The program rendered as ASP-style rules, one integrity constraint per
    /// violation case.
    pub fn emit_asp(&self) -> String {
        let task = asp_symbol(&self.task);
        let guards: String = self
            .witnesses
            .iter()
            .map(|w| format!(", {}({})", asp_class(&w.bound), asp_var(&w.role)))
            .collect();
        let mut out = format!("% {}\n", self.task);
        let body = |clause: &[Literal], time: &str| -> String {
            clause
                .iter()
                .map(|l| {
                    let atom = asp_atom(l);
                    if l.positive {
                        format!("not true({atom}, {time})")
                    } else {
                        format!("true({atom}, {time})")
                    }
                })
                .collect::<Vec<_>>()
                .join(", ")
        };
        let within = "T <= T2, T2 <= T1";
        for (i, c) in self.constraints.iter().enumerate() {
            match c.kind {
                ConstraintKind::AtStart | ConstraintKind::AtEnd | ConstraintKind::Throughout => {
                    let (time, extra) = match c.kind {
                        ConstraintKind::AtStart => ("T", String::new()),
                        ConstraintKind::AtEnd => ("T1", String::new()),
                        _ => ("T2", format!(", {within}")),
                    };
                    for clause in &c.formula.clauses {
                        out += &format!(
                            ":- process({task}, T, T1), {}, T < T1{extra}{guards}.\n",
                            body(clause, time)
                        );
                    }
                }
                ConstraintKind::DisjunctiveThroughout => {
                    let flags = [format!("f{i}"), format!("f{i}_star")];
                    let branches = [Some(&c.formula), c.alternative.as_ref()];
                    for (flag, branch) in flags.iter().zip(branches.into_iter().flatten()) {
                        for clause in &branch.clauses {
                            out += &format!(
                                "{flag} :- process({task}, T, T1), {}, T < T1, {within}{guards}.\n",
                                body(clause, "T2")
                            );
                        }
                    }
                    out += &format!(":- {}, {}.\n", flags[0], flags[1]);
                }
            }
        }
        out
    }
}

fn asp_symbol(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_alphanumeric() || c == '_' { c.to_ascii_lowercase() } else { '_' })
        .collect()
}

fn asp_var(role: &str) -> String {
    let mut c = role.trim_start_matches('?').chars();
    match c.next() {
        Some(first) => first.to_uppercase().chain(c).collect(),
        None => "X".into(),
    }
}

fn asp_class(expr: &ClassExpr) -> String {
    expr.0.iter().map(|c| asp_symbol(c)).collect::<Vec<_>>().join("_or_")
}

fn asp_atom(l: &Literal) -> String {
    let args: Vec<String> = l
        .args
        .iter()
        .map(|t| match t {
            Term::Var(v) => asp_var(v),
            Term::Const(c) => asp_symbol(c),
        })
        .collect();
    format!("{}({})", l.predicate, args.join(", "))
}

impl fmt::Display for ConstraintProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "program {}", self.task)?;
        for w in &self.witnesses {
            writeln!(f, "  exists {} : {}", w.role, w.bound)?;
        }
        for c in &self.constraints {
            match &c.alternative {
                Some(b) => writeln!(f, "  {} {} | {}", c.kind, c.formula, b)?,
                None => writeln!(f, "  {} {}", c.kind, c.formula)?,
            }
        }
        Ok(())
    }
}

/// Builds the constraint program for `task`. Roles that are unspecified but
/// occur in some formula become witnesses bounded by their taxonomy class.
pub fn compile_meta_task(
    task: &InstantiatedMetaTask,
    defn: &MetaTaskDefinition,
    taxonomy: &Taxonomy,
) -> Result<ConstraintProgram, CompileError> {
    if task.frame_id != defn.frame_id {
        return Err(CompileError::FrameMismatch { task: task.frame_id.clone(), definition: defn.frame_id.clone() });
    }
    if task.parameters.len() != defn.roles.len() {
        return Err(CompileError::ParameterCount {
            task: task.frame_id.clone(),
            got: task.parameters.len(),
            expected: defn.roles.len(),
        });
    }
    let mut bindings = BTreeMap::new();
    let mut unspecified = Vec::new();
    for (role, value) in defn.roles.iter().zip(&task.parameters) {
        match value {
            Some(entity) => {
                bindings.insert(role.clone(), entity.clone());
            }
            None => unspecified.push(role.clone()),
        }
    }
    let used: std::collections::BTreeSet<&str> = defn.formulas().flat_map(|f| f.vars()).collect();
    let mut witnesses = Vec::new();
    for role in unspecified.iter().filter(|r| used.contains(r.as_str())) {
        let bound = taxonomy.constraint(&defn.frame_id, role).cloned().ok_or_else(|| CompileError::Unbounded {
            frame_id: defn.frame_id.clone(),
            role: role.clone(),
        })?;
        witnesses.push(Witness { role: role.clone(), bound });
    }

    let sub = |f: &ConditionFormula| f.substitute(&bindings);
    let mut constraints = Vec::new();
    constraints.extend(defn.preconditions.iter().map(|f| TemporalConstraint::new(ConstraintKind::AtStart, sub(f))));
    constraints.extend(defn.postconditions.iter().map(|f| TemporalConstraint::new(ConstraintKind::AtEnd, sub(f))));
    constraints.extend(defn.invariants.iter().map(|f| TemporalConstraint::new(ConstraintKind::Throughout, sub(f))));
    constraints.extend(defn.disjunctive_invariants.iter().map(|(a, b)| TemporalConstraint::disjunctive(sub(a), sub(b))));
    Ok(ConstraintProgram { task: task.compact(), constraints, witnesses })
}

/// Checks a ground program on window `(start, end)` of `traj`. Returns the
/// first violation in constraint order, or `None` if every constraint holds.
pub fn check(
    program: &ConstraintProgram,
    traj: &Trajectory,
    window: (usize, usize),
) -> Result<Option<Violation>, CheckError> {
    let (start, end) = window;
    if start >= end || end > traj.len() {
        return Err(CheckError::Window { start, end, len: traj.len() });
    }
    if let Some(w) = program.witnesses.first() {
        return Err(CheckError::Unresolved(w.role.clone()));
    }
    for (i, c) in program.constraints.iter().enumerate() {
        let fail = match c.kind {
            ConstraintKind::AtStart => first_failure(traj, &c.formula, start, start),
            ConstraintKind::AtEnd => first_failure(traj, &c.formula, end, end),
            ConstraintKind::Throughout => first_failure(traj, &c.formula, start, end),
            ConstraintKind::DisjunctiveThroughout => {
                let a = first_failure(traj, &c.formula, start, end);
                let b = c.alternative.as_ref().and_then(|alt| first_failure(traj, alt, start, end));
                match (a, b) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    _ => None,
                }
            }
        };
        if let Some(time) = fail {
            return Ok(Some(Violation { constraint: i, kind: c.kind, time }));
        }
    }
    Ok(None)
}
