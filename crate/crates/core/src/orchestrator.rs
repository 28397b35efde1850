//! Task decomposition, desire resolution and per-step plan generation with
//! the world model threaded through every solved step.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::compiler::compile_meta_task;
use crate::frameid::LogLinearModel;
use crate::knowledge::KnowledgeBase;
use crate::parser::{parse_instruction, ParsedInstruction};
use crate::planner::{
    plan, plan_primitive, simulate, witness_candidates, ActionModel, Plan, PrimitiveAction, SearchOptions, WorldState,
};
use crate::roles::{definition_for, semantic_match_and_recover, Interpretation, RoleError};
use crate::text::normalize;

/// Why one task or step could not be planned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum FailureKind {
    /// No frame could be retrieved: the text does not parse, the verb is
    /// unknown, or roles could not be matched.
    Parsed,
    /// A frame was found but there is no usable meta-task for it.
    Rfn,
    /// A decomposed task has a step with no plan and no solvable equivalent.
    GlobalPlanning,
    /// The solver ran and found no plan within the horizon.
    LocalPlanning,
}

impl FailureKind {
    pub const ALL: [FailureKind; 4] =
        [FailureKind::Parsed, FailureKind::Rfn, FailureKind::GlobalPlanning, FailureKind::LocalPlanning];

    pub fn label(self) -> &'static str {
        match self {
            FailureKind::Parsed => "Parsed Failure",
            FailureKind::Rfn => "RFN Failure",
            FailureKind::GlobalPlanning => "Global Planning Failure",
            FailureKind::LocalPlanning => "Local Planning Failure",
        }
    }
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FailureRecord {
    pub task: String,
    pub kind: FailureKind,
    pub detail: String,
}

/// The fixed inputs of one solve: knowledge, frame model, action model and
/// the entities the scenario grounds actions over.
pub struct Domain<'a> {
    pub kb: &'a KnowledgeBase,
    pub model: &'a LogLinearModel,
    pub action_model: &'a ActionModel,
    pub entities: Vec<String>,
    pub options: SearchOptions,
    actions: Vec<PrimitiveAction>,
}

impl<'a> Domain<'a> {
    pub fn new(
        kb: &'a KnowledgeBase,
        model: &'a LogLinearModel,
        action_model: &'a ActionModel,
        entities: Vec<String>,
        statics: &BTreeSet<crate::planner::Atom>,
        options: SearchOptions,
    ) -> Self {
        let mut entities = entities;
        entities.sort();
        entities.dedup();
        let actions = action_model.ground(&entities, statics);
        Domain { kb, model, action_model, entities, options, actions }
    }

    pub fn actions(&self) -> &[PrimitiveAction] {
        &self.actions
    }
}

/// State shared across one top-level solve.
#[derive(Debug, Clone)]
pub struct SolveContext {
    /// Normalized task texts already entered; guards against cycles.
    pub seen: BTreeSet<String>,
    pub world: WorldState,
    pub failures: Vec<FailureRecord>,
}

impl SolveContext {
    pub fn new(initial: WorldState) -> Self {
        SolveContext { seen: BTreeSet::new(), world: initial, failures: Vec::new() }
    }

    fn fail(&mut self, task: &str, kind: FailureKind, detail: impl Into<String>) -> FailureKind {
        self.failures.push(FailureRecord { task: task.to_string(), kind, detail: detail.into() });
        kind
    }
}

/// Interprets position `k` (1-based) of a flow of step texts.
fn interpret(flow: &[ParsedInstruction], k: usize, domain: &Domain) -> Result<Interpretation, (FailureKind, String)> {
    match semantic_match_and_recover(flow, k, domain.kb, domain.model) {
        Ok(Some(i)) => Ok(i),
        Ok(None) => Err((FailureKind::Parsed, format!("no frame for verb {:?}", flow[k - 1].verb))),
        Err(RoleError::NoDefinition(frame)) => Err((FailureKind::Rfn, format!("no meta-task for frame {frame}"))),
        Err(e) => Err((FailureKind::Parsed, e.to_string())),
    }
}

/// Plans step `k` of `flow` from `world`: the single primitive action when
/// the frame is realized by one, otherwise the compiled meta-task handed to
/// the planner.
fn plan_step(flow: &[ParsedInstruction], k: usize, world: &WorldState, domain: &Domain) -> Result<Plan, (FailureKind, String)> {
    let sem = interpret(flow, k, domain)?;
    let am = domain.action_model;
    if let Some(schema) = am.schema_for_frame(&sem.frame) {
        let (_, roles) = schema.frame.as_ref().expect("schema_for_frame only returns framed schemas");
        let defn = definition_for(domain.kb, &flow[k - 1].verb, &sem.frame);
        let idx = am.schemas.iter().position(|s| s.name == schema.name).expect("schema is in its model");
        let slots: Vec<Vec<String>> = schema
            .params
            .iter()
            .enumerate()
            .map(|(i, _)| {
                let bound = roles.get(i).and_then(|role| {
                    let pos = defn?.roles.iter().position(|r| r == role)?;
                    sem.task.parameters[pos].clone()
                });
                bound.map_or_else(|| domain.entities.clone(), |e| vec![e])
            })
            .collect();
        let targets: Vec<PrimitiveAction> = product(&slots)
            .into_iter()
            .map(|args| am.instantiate(idx, &args).expect("arity matches"))
            .collect();
        return plan_primitive(world, am, &domain.actions, &targets, domain.options)
            .map(|o| o.plan)
            .ok_or_else(|| (FailureKind::LocalPlanning, format!("no {} action reachable for {}", schema.name, sem.task)));
    }
    let defn = definition_for(domain.kb, &flow[k - 1].verb, &sem.frame)
        .ok_or_else(|| (FailureKind::Rfn, format!("no meta-task for frame {}", sem.frame)))?;
    let program =
        compile_meta_task(&sem.task, defn, &domain.kb.taxonomy).map_err(|e| (FailureKind::Rfn, e.to_string()))?;
    let candidates = witness_candidates(&program, &domain.entities, &domain.kb.taxonomy);
    plan(world, &program, am, &domain.actions, &candidates, domain.options)
        .map(|o| o.plan)
        .ok_or_else(|| (FailureKind::LocalPlanning, format!("no plan for {} within {} steps", sem.task, domain.options.horizon)))
}

fn product(slots: &[Vec<String>]) -> Vec<Vec<String>> {
    slots.iter().fold(vec![Vec::new()], |acc, options| {
        acc.iter()
            .flat_map(|prefix| {
                options.iter().map(move |o| {
                    let mut v = prefix.clone();
                    v.push(o.clone());
                    v
                })
            })
            .collect()
    })
}

fn parse_flow(texts: &[String], domain: &Domain) -> Vec<Result<ParsedInstruction, String>> {
    texts.iter().map(|t| parse_instruction(t, &domain.kb.parser_config).map_err(|e| e.to_string())).collect()
}

/// Plans one low-level task on its own (a one-sentence flow).
pub fn generate_plans(task_text: &str, ctx: &mut SolveContext, domain: &Domain) -> Option<Plan> {
    generate_in_flow(&[task_text.to_string()], 1, ctx, domain).ok()
}

/// Plans step `k` of a flow of step texts, logging a failure record.
fn generate_in_flow(texts: &[String], k: usize, ctx: &mut SolveContext, domain: &Domain) -> Result<Plan, FailureKind> {
    let parsed = parse_flow(&texts[..k], domain);
    let text = &texts[k - 1];
    if let Err(e) = &parsed[k - 1] {
        return Err(ctx.fail(text, FailureKind::Parsed, e.clone()));
    }
    // earlier steps that do not parse contribute no context
    let flow: Vec<ParsedInstruction> = parsed
        .into_iter()
        .map(Result::unwrap_or_default)
        .collect();
    match plan_step(&flow, k, &ctx.world, domain) {
        Ok(p) => Ok(p),
        Err((kind, detail)) => Err(ctx.fail(text, kind, detail)),
    }
}

/// Whether two task texts denote the same frame (or synonymous frames) with
/// role entities that agree up to taxonomy class. Unspecified matches anything.
pub fn semantically_equivalent(a: &str, b: &str, domain: &Domain) -> bool {
    let interp = |t: &str| -> Option<(Interpretation, Vec<String>)> {
        let p = parse_instruction(t, &domain.kb.parser_config).ok()?;
        let verb = p.verb.clone();
        let sem = semantic_match_and_recover(&[p], 1, domain.kb, domain.model).ok()??;
        let roles = definition_for(domain.kb, &verb, &sem.frame)?.roles.clone();
        Some((sem, roles))
    };
    let (Some((sa, ra)), Some((sb, rb))) = (interp(a), interp(b)) else {
        return false;
    };
    if sa.frame != sb.frame && !domain.kb.lexicon.are_synonymous(&sa.frame, &sb.frame) {
        return false;
    }
    let tax = &domain.kb.taxonomy;
    ra.iter().zip(&sa.task.parameters).all(|(role, pa)| {
        let Some(pos) = rb.iter().position(|r| r == role) else {
            return true;
        };
        match (pa, &sb.task.parameters[pos]) {
            (Some(x), Some(y)) => x == y || (tax.is_known(x) && tax.classes_of(x) == tax.classes_of(y)),
            _ => true,
        }
    })
}

/// Tasks/Steps entries other than `task` that are semantically equivalent
/// to `step`, in file order.
fn equivalent_tasks(step: &str, domain: &Domain) -> Vec<String> {
    let mut seen = BTreeSet::new();
    domain
        .kb
        .tasks
        .iter()
        .map(|t| t.task.clone())
        .filter(|t| seen.insert(t.clone()))
        .filter(|t| semantically_equivalent(t, step, domain))
        .collect()
}

/// Decomposes `task_text` through the Tasks/Steps table, planning each step
/// in order and falling back to an equivalent task when a step fails. A
/// text with no entry is planned as a single step. On success the context
/// world has advanced by exactly the returned plan; on failure it is
/// unchanged.
pub fn solve_task(task_text: &str, ctx: &mut SolveContext, domain: &Domain) -> Option<Plan> {
    solve_task_inner(task_text, ctx, domain).ok()
}

fn solve_task_inner(task_text: &str, ctx: &mut SolveContext, domain: &Domain) -> Result<Plan, FailureKind> {
    let key = normalize(task_text);
    if !ctx.seen.insert(key.clone()) {
        return Err(ctx.fail(&key, FailureKind::GlobalPlanning, "already being solved"));
    }
    let entries = domain.kb.find_sub_tasks(&key);
    let steps: Vec<String> = match entries.first() {
        Some(steps) => steps.to_vec(),
        None => {
            let p = generate_in_flow(std::slice::from_ref(&key), 1, ctx, domain)?;
            ctx.world = simulate(domain.action_model, &ctx.world, &p).expect("planner output is applicable");
            return Ok(p);
        }
    };
    let start = ctx.world.clone();
    let mut plans = Plan::default();
    for k in 1..=steps.len() {
        match generate_in_flow(&steps, k, ctx, domain) {
            Ok(p) => {
                ctx.world = simulate(domain.action_model, &ctx.world, &p).expect("planner output is applicable");
                plans.extend(&p);
            }
            Err(_) => {
                let mut found = false;
                for alt in equivalent_tasks(&steps[k - 1], domain) {
                    if ctx.seen.contains(&alt) {
                        continue;
                    }
                    if let Ok(p) = solve_task_inner(&alt, ctx, domain) {
                        plans.extend(&p);
                        found = true;
                        break;
                    }
                }
                if !found {
                    ctx.world = start;
                    return Err(ctx.fail(&key, FailureKind::GlobalPlanning, format!("step {k} {:?} has no plan", steps[k - 1])));
                }
            }
        }
    }
    Ok(plans)
}

/// Tries each help task of the desire in file order. A help task that
/// cannot be planned directly is replaced by the first equivalent
/// Tasks/Steps entry, whose result is returned whether or not it succeeds.
pub fn solve_help(desire_text: &str, ctx: &mut SolveContext, domain: &Domain) -> Option<Plan> {
    for help in domain.kb.find_helps_for_desire(desire_text) {
        match generate_in_flow(&[help.to_string()], 1, ctx, domain) {
            Ok(p) => {
                ctx.world = simulate(domain.action_model, &ctx.world, &p).expect("planner output is applicable");
                return Some(p);
            }
            Err(_) => {
                if let Some(gs) = equivalent_tasks(help, domain).into_iter().next() {
                    return solve_task(&gs, ctx, domain);
                }
            }
        }
    }
    None
}

/// How a batch line was handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Outcome {
    /// Solved through a Tasks/Steps decomposition.
    Decomposed,
    /// Solved directly as a primitive action or a meta-task.
    MetaTask,
    Failed(FailureKind),
}

/// Solves one task line from a fresh context and classifies the outcome.
pub fn classify_task(task_text: &str, initial: &WorldState, domain: &Domain) -> (Outcome, Option<Plan>, SolveContext) {
    let mut ctx = SolveContext::new(initial.clone());
    let key = normalize(task_text);
    if !domain.kb.find_sub_tasks(&key).is_empty() {
        let plan = solve_task(&key, &mut ctx, domain);
        let outcome = if plan.is_some() { Outcome::Decomposed } else { Outcome::Failed(FailureKind::GlobalPlanning) };
        return (outcome, plan, ctx);
    }
    ctx.seen.insert(key.clone());
    match generate_in_flow(std::slice::from_ref(&key), 1, &mut ctx, domain) {
        Ok(p) => (Outcome::MetaTask, Some(p), ctx),
        Err(kind) => {
            for alt in equivalent_tasks(&key, domain) {
                let mut sub = SolveContext { seen: ctx.seen.clone(), world: initial.clone(), failures: Vec::new() };
                if let Some(p) = solve_task(&alt, &mut sub, domain) {
                    ctx.failures.extend(sub.failures);
                    ctx.world = sub.world;
                    return (Outcome::Decomposed, Some(p), ctx);
                }
            }
            (Outcome::Failed(kind), None, ctx)
        }
    }
}
