//! World states, primitive actions and bounded-horizon plan search.

pub mod action;
pub mod search;
pub mod state;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use action::{ActionModel, ActionSchema, PrimitiveAction};
pub use search::{plan, plan_primitive, witness_candidates, PlanOutcome, SearchOptions};
pub use state::{Atom, WorldState};

pub const DEFAULT_HORIZON: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("unknown action {0}")]
    UnknownAction(String),
    #[error("action {action} takes {expected} arguments")]
    Arity { action: String, expected: usize },
    #[error("{action} is not applicable{}", step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    Inapplicable { action: String, step: Option<usize> },
}

/// One timed step: action `name(args)` executed at time `time` (from 1).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStep {
    pub name: String,
    /// Every parameter value, in schema order.
    pub args: Vec<String>,
    /// Printed form of the arguments, e.g. `loc(floor)`.
    pub display_args: Vec<String>,
    pub time: usize,
}

impl fmt::Display for PlanStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}),{}", self.name, self.display_args.join(","), self.time)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
}

impl Plan {
    pub fn from_actions<'a>(actions: impl IntoIterator<Item = &'a PrimitiveAction>) -> Plan {
        let steps = actions
            .into_iter()
            .enumerate()
            .map(|(i, a)| PlanStep {
                name: a.name.clone(),
                args: a.args.clone(),
                display_args: a.display_args.clone(),
                time: i + 1,
            })
            .collect();
        Plan { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Appends `other`, shifting its times to follow this plan's last step.
    pub fn extend(&mut self, other: &Plan) {
        let offset = self.steps.len();
        self.steps.extend(other.steps.iter().enumerate().map(|(i, s)| PlanStep { time: offset + i + 1, ..s.clone() }));
    }

    pub fn actions(&self, model: &ActionModel) -> Result<Vec<PrimitiveAction>, PlanError> {
        self.steps
            .iter()
            .map(|s| {
                let args: Vec<&str> = s.args.iter().map(String::as_str).collect();
                model.action(&s.name, &args)
            })
            .collect()
    }

    /// `moveto(fridge,1), open(fridge,2)`.
    pub fn to_asp_atoms(&self) -> String {
        self.steps
            .iter()
            .map(|s| format!("{}({},{})", s.name, s.display_args.join(","), s.time))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

/// `s_0, a_1, s_1, ..., a_n, s_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub states: Vec<WorldState>,
    pub actions: Vec<PrimitiveAction>,
}

impl Trajectory {
    pub fn new(initial: WorldState) -> Self {
        Trajectory { states: vec![initial], actions: Vec::new() }
    }

    /// Number of actions.
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn last(&self) -> &WorldState {
        self.states.last().expect("a trajectory always has s_0")
    }

    pub fn push(&mut self, model: &ActionModel, action: PrimitiveAction) -> Result<(), PlanError> {
        let next = model.apply(self.last(), &action).map_err(|_| PlanError::Inapplicable {
            action: action.signature(),
            step: Some(self.actions.len() + 1),
        })?;
        self.states.push(next);
        self.actions.push(action);
        Ok(())
    }

    pub fn plan(&self) -> Plan {
        Plan::from_actions(&self.actions)
    }
}

/// Runs `plan` from `state`; the error names the first inapplicable step
/// (counting from 1).
pub fn simulate_trajectory(model: &ActionModel, state: &WorldState, plan: &Plan) -> Result<Trajectory, PlanError> {
    let mut traj = Trajectory::new(state.clone());
    for (i, step) in plan.steps.iter().enumerate() {
        let args: Vec<&str> = step.args.iter().map(String::as_str).collect();
        let action = model.action(&step.name, &args)?;
        traj.push(model, action).map_err(|_| PlanError::Inapplicable { action: step.to_string(), step: Some(i + 1) })?;
    }
    Ok(traj)
}

pub fn simulate(model: &ActionModel, state: &WorldState, plan: &Plan) -> Result<WorldState, PlanError> {
    Ok(simulate_trajectory(model, state, plan)?.last().clone())
}
