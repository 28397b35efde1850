//! Batch runs: every line of a task file solved from the same scenario
//! state, tallied by outcome.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::frameid::LogLinearModel;
use crate::knowledge::{KnowledgeBase, ACTION_MODEL_FILE};
use crate::orchestrator::{classify_task, Domain, FailureKind, Outcome};
use crate::planner::SearchOptions;
use crate::scenario::{Scenario, ScenarioError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BatchRow {
    pub task: String,
    pub outcome: Outcome,
    pub plan_length: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BatchReport {
    pub rows: Vec<BatchRow>,
}

impl BatchReport {
    pub fn count(&self, outcome: Outcome) -> usize {
        self.rows.iter().filter(|r| r.outcome == outcome).count()
    }

    /// Counts for every outcome, including zeros, in a fixed order.
    pub fn summary(&self) -> Vec<(String, usize)> {
        let mut out = vec![
            ("solved via decomposition".to_string(), self.count(Outcome::Decomposed)),
            ("solved via meta-task".to_string(), self.count(Outcome::MetaTask)),
        ];
        out.extend(FailureKind::ALL.iter().map(|k| (k.label().to_string(), self.count(Outcome::Failed(*k)))));
        out
    }

    pub fn by_outcome(&self) -> BTreeMap<Outcome, Vec<&str>> {
        let mut out: BTreeMap<Outcome, Vec<&str>> = BTreeMap::new();
        for r in &self.rows {
            out.entry(r.outcome).or_default().push(&r.task);
        }
        out
    }
}

fn outcome_label(o: Outcome) -> String {
    match o {
        Outcome::Decomposed => "solved via decomposition".into(),
        Outcome::MetaTask => "solved via meta-task".into(),
        Outcome::Failed(k) => k.label().into(),
    }
}

impl fmt::Display for BatchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.rows.iter().map(|r| r.task.len()).max().unwrap_or(4).max(4);
        writeln!(f, "{:>3}  {:<width$}  outcome", "#", "task")?;
        for (i, r) in self.rows.iter().enumerate() {
            writeln!(f, "{:>3}  {:<width$}  {}", i + 1, r.task, outcome_label(r.outcome))?;
        }
        writeln!(f)?;
        let total = self.rows.len();
        for (label, n) in self.summary() {
            let pct = if total == 0 { 0.0 } else { 100.0 * n as f64 / total as f64 };
            writeln!(f, "{label:<26} {n:>4} {pct:>6.1}%")?;
        }
        writeln!(f, "{:<26} {total:>4}", "total")
    }
}

/// Task lines of a batch file; blank lines and `#` comments are skipped.
pub fn parse_task_file(src: &str) -> Vec<String> {
    src.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(str::to_string).collect()
}

/// Solves each task independently from the scenario's initial state.
pub fn run_batch(
    tasks: &[String],
    scenario: &Scenario,
    kb: &KnowledgeBase,
    model: &LogLinearModel,
    horizon: Option<usize>,
) -> Result<BatchReport, ScenarioError> {
    let kb = scenario.extend_kb(kb);
    let file = scenario.action_model.as_deref().unwrap_or(ACTION_MODEL_FILE);
    let am = kb
        .action_models
        .get(file)
        .ok_or_else(|| ScenarioError::Invalid(format!("no action model {file} in the KB")))?;
    scenario.validate(&kb, am)?;
    let initial = scenario.initial_state();
    let options = SearchOptions { horizon: horizon.unwrap_or(scenario.horizon) };
    let domain = Domain::new(&kb, model, am, scenario.entity_names(), initial.statics(), options);
    let rows = tasks
        .iter()
        .map(|t| {
            let (outcome, plan, _) = classify_task(t, &initial, &domain);
            BatchRow { task: t.clone(), outcome, plan_length: plan.map(|p| p.len()) }
        })
        .collect();
    Ok(BatchReport { rows })
}
