//! Line-oriented scenario files: one keyword and its value per line.
//!
//! ```text
//! name scenario-1
//! mode task
//! text clean up toys
//! action_model action_model_loc.txt
//! horizon 10
//! entity toy Holdable_Obj
//! fact at(toy,floor)
//! static location(floor)
//! expect move(loc(floor)),1
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::frameid::LogLinearModel;
use crate::knowledge::{KnowledgeBase, ACTION_MODEL_FILE};
use crate::orchestrator::{solve_help, solve_task, Domain, FailureRecord, SolveContext};
use crate::planner::{simulate_trajectory, ActionModel, Atom, Plan, SearchOptions, WorldState, DEFAULT_HORIZON};
use crate::roles::ROBOT;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("scenario line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("scenario: {0}")]
    Invalid(String),
    #[error("cannot read scenario {path}: {reason}")]
    Io { path: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Task,
    Desire,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Task => "task",
            Mode::Desire => "desire",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub name: String,
    pub mode: Mode,
    pub text: String,
    /// Action model file in the KB directory.
    pub action_model: Option<String>,
    pub horizon: usize,
    /// Entities and the taxonomy classes they are added to.
    pub entities: Vec<(String, Vec<String>)>,
    pub facts: Vec<Atom>,
    pub statics: Vec<Atom>,
    /// Expected plan lines, `name(args),t`.
    pub expect: Vec<String>,
}

impl Scenario {
    pub fn parse(src: &str) -> Result<Scenario, ScenarioError> {
        let mut name = None;
        let mut mode = Mode::Task;
        let mut text = None;
        let mut action_model = None;
        let mut horizon = DEFAULT_HORIZON;
        let mut entities = Vec::new();
        let mut facts = Vec::new();
        let mut statics = Vec::new();
        let mut expect = Vec::new();
        for (i, raw) in src.lines().enumerate() {
            let line = i + 1;
            let bad = |reason: String| ScenarioError::Malformed { line, reason };
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed.split_once(char::is_whitespace).unwrap_or((trimmed, ""));
            let value = value.trim();
            if value.is_empty() {
                return Err(bad(format!("{key} needs a value")));
            }
            let atom = || Atom::parse(value).ok_or_else(|| bad(format!("bad atom {value:?}")));
            match key {
                "name" => name = Some(value.to_string()),
                "mode" => {
                    mode = match value {
                        "task" => Mode::Task,
                        "desire" => Mode::Desire,
                        other => return Err(bad(format!("mode must be task or desire, not {other:?}"))),
                    }
                }
                "text" => text = Some(value.to_string()),
                "action_model" => action_model = Some(value.to_string()),
                "horizon" => {
                    horizon = value.parse().ok().filter(|h| *h >= 1).ok_or_else(|| bad("horizon must be a positive integer".into()))?
                }
                "entity" => {
                    let mut words = value.split_whitespace();
                    let entity = words.next().expect("value is non-empty").to_string();
                    entities.push((entity, words.map(str::to_string).collect()));
                }
                "fact" => facts.push(atom()?),
                "static" => statics.push(atom()?),
                "expect" => expect.push(value.replace(' ', "")),
                other => return Err(bad(format!("unknown keyword {other:?}"))),
            }
        }
        let scenario = Scenario {
            name: name.unwrap_or_else(|| "scenario".to_string()),
            mode,
            text: text.ok_or_else(|| ScenarioError::Invalid("missing text line".into()))?,
            action_model,
            horizon,
            entities,
            facts,
            statics,
            expect,
        };
        scenario.check_entities()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| ScenarioError::Io { path: path.display().to_string(), reason: e.to_string() })?;
        Scenario::parse(&src)
    }

    pub fn entity_names(&self) -> Vec<String> {
        self.entities.iter().map(|(e, _)| e.clone()).collect()
    }

    fn check_entities(&self) -> Result<(), ScenarioError> {
        let declared: BTreeSet<&str> = self.entities.iter().map(|(e, _)| e.as_str()).chain([ROBOT]).collect();
        for atom in self.facts.iter().chain(&self.statics) {
            if let Some(a) = atom.args.iter().find(|a| !declared.contains(a.as_str())) {
                return Err(ScenarioError::Invalid(format!("{atom} mentions undeclared entity {a}")));
            }
        }
        Ok(())
    }

    /// Checks classes against the KB and expected action names against the
    /// action model.
    pub fn validate(&self, kb: &KnowledgeBase, model: &ActionModel) -> Result<(), ScenarioError> {
        for (e, classes) in &self.entities {
            if let Some(c) = classes.iter().find(|c| !kb.taxonomy.has_class(c)) {
                return Err(ScenarioError::Invalid(format!("entity {e} has unknown class {c}")));
            }
        }
        for line in &self.expect {
            let name = line.split('(').next().unwrap_or_default();
            if model.schema(name).is_none() {
                return Err(ScenarioError::Invalid(format!("expected step {line} uses unknown action {name}")));
            }
        }
        Ok(())
    }

    /// The KB with the scenario's entity classes added.
    pub fn extend_kb(&self, kb: &KnowledgeBase) -> KnowledgeBase {
        kb.with_extra_members(self.entities.iter().flat_map(|(e, cs)| cs.iter().map(move |c| (e.as_str(), c.as_str()))))
    }

    pub fn initial_state(&self) -> WorldState {
        WorldState::new(self.facts.iter().cloned(), self.statics.iter().cloned())
    }
}

/// Outcome of solving a scenario.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub plan: Option<Plan>,
    /// `s_0 ... s_n` along the plan, when there is one.
    pub states: Vec<WorldState>,
    pub failures: Vec<FailureRecord>,
}

impl Scenario {
    /// Solves the scenario's text as a task or a desire. `horizon` overrides
    /// the scenario's own.
    pub fn solve(
        &self,
        kb: &KnowledgeBase,
        model: &LogLinearModel,
        horizon: Option<usize>,
    ) -> Result<SolveReport, ScenarioError> {
        let kb = self.extend_kb(kb);
        let file = self.action_model.as_deref().unwrap_or(ACTION_MODEL_FILE);
        let am = kb
            .action_models
            .get(file)
            .ok_or_else(|| ScenarioError::Invalid(format!("no action model {file} in the KB")))?;
        self.validate(&kb, am)?;
        let initial = self.initial_state();
        let options = SearchOptions { horizon: horizon.unwrap_or(self.horizon) };
        let domain = Domain::new(&kb, model, am, self.entity_names(), initial.statics(), options);
        let mut ctx = SolveContext::new(initial.clone());
        let plan = match self.mode {
            Mode::Task => solve_task(&self.text, &mut ctx, &domain),
            Mode::Desire => solve_help(&self.text, &mut ctx, &domain),
        };
        let states = match &plan {
            Some(p) => simulate_trajectory(am, &initial, p).expect("solved plans are applicable").states,
            None => Vec::new(),
        };
        Ok(SolveReport { plan, states, failures: ctx.failures })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_keywords() {
        let s = Scenario::parse(
            "# demo\nname demo\nmode desire\ntext have a headache\naction_model action_model_loc.txt\nhorizon 6\n\
             entity aspirin Holdable_Obj\nentity cabinet Containable_Obj\nfact at(aspirin,cabinet)\n\
             static location(cabinet)\nexpect move(loc(aspirin)),1\n",
        )
        .unwrap();
        assert_eq!(s.mode, Mode::Desire);
        assert_eq!(s.horizon, 6);
        assert_eq!(s.entity_names(), ["aspirin", "cabinet"]);
        assert_eq!(s.facts, [Atom::new("at", &["aspirin", "cabinet"])]);
        assert!(s.initial_state().holds(&Atom::new("location", &["cabinet"])));
        assert_eq!(s.expect, ["move(loc(aspirin)),1"]);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(matches!(Scenario::parse("text x\nhorizon 0\n"), Err(ScenarioError::Malformed { line: 2, .. })));
        assert!(matches!(Scenario::parse("text x\nbogus 1\n"), Err(ScenarioError::Malformed { line: 2, .. })));
        assert!(matches!(Scenario::parse("name x\n"), Err(ScenarioError::Invalid(_))));
        assert!(matches!(Scenario::parse("text x\nfact at(cup,table)\n"), Err(ScenarioError::Invalid(_))));
    }
}
