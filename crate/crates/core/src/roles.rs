//! Semantic role filling: in-sentence dependency rules, then the nearest
//! compatible entity of an earlier sentence, then unspecified.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::frameid::{Inventory, LogLinearModel};
use crate::knowledge::meta_task::MetaTaskDefinition;
use crate::knowledge::KnowledgeBase;
use crate::parser::ParsedInstruction;

pub const AGENT: &str = "Agent";
pub const ROBOT: &str = "robot";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RoleError {
    #[error("role {role} of {frame_id} is bound by both {first} and {second}")]
    Ambiguous { frame_id: String, role: String, first: String, second: String },
    #[error("frame {0} has no meta-task definition")]
    NoDefinition(String),
    #[error("position {k} is outside a flow of {len} sentences")]
    Position { k: usize, len: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binding {
    /// An entity and the 1-based flow position it came from.
    Entity { name: String, source_position: usize },
    Unspecified,
}

impl Binding {
    pub fn entity(&self) -> Option<&str> {
        match self {
            Binding::Entity { name, .. } => Some(name),
            Binding::Unspecified => None,
        }
    }
}

/// Role name to binding. Roles with no entry are still missing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoleBindings(pub BTreeMap<String, Binding>);

impl RoleBindings {
    pub fn get(&self, role: &str) -> Option<&Binding> {
        self.0.get(role)
    }

    pub fn entity(&self, role: &str) -> Option<&str> {
        self.0.get(role).and_then(Binding::entity)
    }

    pub fn bind(&mut self, role: &str, name: &str, source_position: usize) {
        self.0.insert(role.to_string(), Binding::Entity { name: name.to_string(), source_position });
    }
}

/// A meta-task with one parameter per role; `None` is unspecified.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InstantiatedMetaTask {
    pub frame_id: String,
    pub parameters: Vec<Option<String>>,
}

impl InstantiatedMetaTask {
    fn parameter_words(&self) -> Vec<&str> {
        self.parameters.iter().map(|p| p.as_deref().unwrap_or("null")).collect()
    }

    /// `put-Placing(robot, beverage, null, fridge)`.
    pub fn compact(&self) -> String {
        format!("{}({})", self.frame_id, self.parameter_words().join(", "))
    }

    /// The s-expression form used in debug dumps.
    pub fn to_sexpr(&self) -> String {
        format!("(define (meta-task {}\n  (:parameters {})))", self.frame_id, self.parameter_words().join(" "))
    }
}

impl fmt::Display for InstantiatedMetaTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.compact())
    }
}

/// Binds roles from the sentence's own dependencies via the heuristic rules.
/// Pronoun dependents leave their role missing. `Agent` is `robot` unless a
/// rule or a `prep_by` dependency names someone else.
pub fn match_roles_in_sentence(
    parsed: &ParsedInstruction,
    defn: &MetaTaskDefinition,
    kb: &KnowledgeBase,
    position: usize,
) -> Result<RoleBindings, RoleError> {
    let mut found: BTreeMap<String, (String, String)> = BTreeMap::new();
    let claim = |found: &mut BTreeMap<String, (String, String)>, role: &str, dep_label: &str, entity: &str| {
        let dep = format!("{dep_label}({}, {entity})", parsed.verb);
        match found.get(role) {
            Some((first, _)) if *first != dep => Err(RoleError::Ambiguous {
                frame_id: defn.frame_id.clone(),
                role: role.to_string(),
                first: first.clone(),
                second: dep,
            }),
            _ => {
                found.insert(role.to_string(), (dep, entity.to_string()));
                Ok(())
            }
        }
    };
    for rule in kb.rules_for(&defn.frame_id) {
        if !defn.has_role(&rule.semantic_role) {
            continue;
        }
        for d in parsed.dependencies.iter().filter(|d| d.dep_type == rule.dependency_type) {
            if kb.parser_config.is_pronoun(&d.dependent_head_lemma) {
                continue;
            }
            claim(&mut found, &rule.semantic_role, &d.dep_type, &d.dependent_head_lemma)?;
        }
    }
    if defn.has_role(AGENT) && !found.contains_key(AGENT) {
        if let Some(d) = parsed.dependency("prep_by") {
            if !kb.parser_config.is_pronoun(&d.dependent_head_lemma) {
                claim(&mut found, AGENT, "prep_by", &d.dependent_head_lemma)?;
            }
        }
    }
    let mut out = RoleBindings::default();
    for (role, (_, entity)) in found {
        out.bind(&role, &entity, position);
    }
    if defn.has_role(AGENT) && out.get(AGENT).is_none() {
        out.bind(AGENT, ROBOT, position);
    }
    Ok(out)
}

/// Candidate entities of a sentence, latest token first, then by name.
pub fn sentence_entities(parsed: &ParsedInstruction, kb: &KnowledgeBase) -> Vec<String> {
    let mut ents: Vec<(usize, &str)> = parsed
        .dependencies
        .iter()
        .filter(|d| !kb.parser_config.is_pronoun(&d.dependent_head_lemma))
        .map(|d| (d.dependent, d.dependent_head_lemma.as_str()))
        .collect();
    ents.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(b.1)));
    let mut out: Vec<String> = Vec::new();
    for (_, e) in ents {
        if !out.iter().any(|o| o == e) {
            out.push(e.to_string());
        }
    }
    out
}

/// Fills each missing role with the taxonomy-compatible entity of the
/// closest earlier sentence `l < k` (1-based).
pub fn recover_from_context(
    flow: &[ParsedInstruction],
    k: usize,
    partial: &RoleBindings,
    defn: &MetaTaskDefinition,
    kb: &KnowledgeBase,
) -> Result<RoleBindings, RoleError> {
    if k == 0 || k > flow.len() {
        return Err(RoleError::Position { k, len: flow.len() });
    }
    let mut out = partial.clone();
    for role in &defn.roles {
        if out.get(role).is_some() {
            continue;
        }
        'search: for l in (1..k).rev() {
            for e in sentence_entities(&flow[l - 1], kb) {
                if kb.role_compatible(&defn.frame_id, role, &e).is_compatible() {
                    out.bind(role, &e, l);
                    break 'search;
                }
            }
        }
    }
    Ok(out)
}

/// Marks the remaining roles unspecified and orders parameters by role.
pub fn default_unspecified(partial: &RoleBindings, defn: &MetaTaskDefinition) -> InstantiatedMetaTask {
    InstantiatedMetaTask {
        frame_id: defn.frame_id.clone(),
        parameters: defn.roles.iter().map(|r| partial.entity(r).map(str::to_string)).collect(),
    }
}

/// The result of interpreting one flow position.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpretation {
    /// The identified frame name, e.g. `Placing`.
    pub frame: String,
    pub probability: f64,
    pub bindings: RoleBindings,
    pub task: InstantiatedMetaTask,
}

/// The meta-task for a frame evoked by `verb`: `verb-Frame` if defined,
/// otherwise the first definition of that frame.
pub fn definition_for<'a>(kb: &'a KnowledgeBase, verb: &str, frame: &str) -> Option<&'a MetaTaskDefinition> {
    let exact = format!("{verb}-{frame}");
    kb.meta_tasks
        .definitions
        .iter()
        .find(|d| d.frame_id == exact)
        .or_else(|| kb.meta_tasks.definitions.iter().find(|d| d.frame_name() == frame))
}

/// Frame identification, in-sentence matching, context recovery and
/// defaulting for position `k` (1-based). `Ok(None)` when no frame is found.
pub fn semantic_match_and_recover(
    flow: &[ParsedInstruction],
    k: usize,
    kb: &KnowledgeBase,
    model: &LogLinearModel,
) -> Result<Option<Interpretation>, RoleError> {
    if k == 0 || k > flow.len() {
        return Err(RoleError::Position { k, len: flow.len() });
    }
    let parsed = &flow[k - 1];
    let inv = Inventory { lexicon: &kb.lexicon, taxonomy: &kb.taxonomy };
    let Some((frame, probability)) = model.identify_frame(parsed, inv) else {
        return Ok(None);
    };
    let defn = definition_for(kb, &parsed.verb, &frame).ok_or_else(|| RoleError::NoDefinition(frame.clone()))?;
    let own = match_roles_in_sentence(parsed, defn, kb, k)?;
    let bindings = recover_from_context(flow, k, &own, defn, kb)?;
    let task = default_unspecified(&bindings, defn);
    Ok(Some(Interpretation { frame, probability, bindings, task }))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::knowledge::bundled_kb_dir;
    use crate::parser::parse_instruction;

    fn kb() -> KnowledgeBase {
        KnowledgeBase::load(&bundled_kb_dir()).unwrap()
    }

    fn flow(kb: &KnowledgeBase, lines: &[&str]) -> Vec<ParsedInstruction> {
        lines.iter().map(|l| parse_instruction(l, &kb.parser_config).unwrap()).collect()
    }

    fn defn<'a>(kb: &'a KnowledgeBase, id: &str) -> &'a MetaTaskDefinition {
        kb.find_meta_task_definition(id).unwrap()
    }

    #[test]
    fn placing_in_sentence() {
        let kb = kb();
        let f = flow(&kb, &["put beverage in the fridge"]);
        let b = match_roles_in_sentence(&f[0], defn(&kb, "put-Placing"), &kb, 1).unwrap();
        assert_eq!(b.entity("Agent"), Some("robot"));
        assert_eq!(b.entity("Theme"), Some("beverage"));
        assert_eq!(b.entity("Goal"), Some("fridge"));
        assert_eq!(b.get("Source"), None);
        let task = default_unspecified(&b, defn(&kb, "put-Placing"));
        assert_eq!(task.compact(), "put-Placing(robot, beverage, null, fridge)");
        assert_eq!(task.to_sexpr(), "(define (meta-task put-Placing\n  (:parameters robot beverage null fridge)))");
    }

    #[test]
    fn taking_only_theme() {
        let kb = kb();
        let f = flow(&kb, &["take the beer"]);
        let b = match_roles_in_sentence(&f[0], defn(&kb, "take-Taking"), &kb, 1).unwrap();
        assert_eq!(b.0.len(), 2);
        assert_eq!(b.entity("Theme"), Some("beer"));
        // no context at k = 1
        assert_eq!(recover_from_context(&f, 1, &b, defn(&kb, "take-Taking"), &kb).unwrap(), b);
    }

    #[test]
    fn context_skips_incompatible_door() {
        let kb = kb();
        let f = flow(&kb, &["go to fridge", "open the fridge door", "take the beer", "close the fridge door"]);
        let d = defn(&kb, "take-Taking");
        let own = match_roles_in_sentence(&f[2], d, &kb, 3).unwrap();
        let b = recover_from_context(&f, 3, &own, d, &kb).unwrap();
        assert_eq!(b.get("Source"), Some(&Binding::Entity { name: "fridge".into(), source_position: 1 }));
        assert_eq!(default_unspecified(&b, d).compact(), "take-Taking(robot, beer, fridge)");
    }

    #[test]
    fn nearest_sentence_wins() {
        let kb = kb();
        let f = flow(&kb, &["go to the table", "go to the shelf", "take the cup"]);
        let d = defn(&kb, "take-Taking");
        let own = match_roles_in_sentence(&f[2], d, &kb, 3).unwrap();
        let b = recover_from_context(&f, 3, &own, d, &kb).unwrap();
        assert_eq!(b.entity("Source"), Some("shelf"));
    }

    #[test]
    fn pronouns_are_missing_and_duplicates_are_ambiguous() {
        let kb = kb();
        let f = flow(&kb, &["give them an aspirin"]);
        let d = defn(&kb, "deliver-Delivery");
        let b = match_roles_in_sentence(&f[0], d, &kb, 1).unwrap();
        assert_eq!(b.entity("Theme"), Some("aspirin"));
        assert_eq!(b.get("Recipient"), None);

        let f = flow(&kb, &["take the cup out of the fridge from the shelf"]);
        let err = match_roles_in_sentence(&f[0], defn(&kb, "take-Removing"), &kb, 1).unwrap_err();
        assert!(matches!(err, RoleError::Ambiguous { ref role, .. } if role == "Source"));
    }

    #[test]
    fn wait_binds_agent_only() {
        let mut kb = kb();
        kb.meta_tasks.definitions.push(MetaTaskDefinition {
            frame_id: "wait-Waiting".into(),
            roles: vec!["Agent".into()],
            ..defn(&kb, "go-Motion").clone()
        });
        let f = flow(&kb, &["wait"]);
        let b = match_roles_in_sentence(&f[0], defn(&kb, "wait-Waiting"), &kb, 1).unwrap();
        assert_eq!(b.0.len(), 1);
        assert_eq!(b.entity("Agent"), Some("robot"));
    }

    const ENTITIES: [&str; 8] = ["fridge", "table", "shelf", "cup", "beer", "door", "person", "floor"];

    proptest! {
        #[test]
        fn recovered_roles_are_nearest_and_compatible(picks in proptest::collection::vec(0usize..ENTITIES.len(), 1..6), extra in 0usize..ENTITIES.len()) {
            let kb = kb();
            let mut lines: Vec<String> = picks.iter().map(|&i| format!("go to the {}", ENTITIES[i])).collect();
            lines.push("take the cup".into());
            let refs: Vec<&str> = lines.iter().map(String::as_str).collect();
            let f = flow(&kb, &refs);
            let k = f.len();
            let d = defn(&kb, "take-Taking");
            let own = match_roles_in_sentence(&f[k - 1], d, &kb, k).unwrap();
            let b = recover_from_context(&f, k, &own, d, &kb).unwrap();
            match b.get("Source") {
                Some(Binding::Entity { name, source_position }) => {
                    prop_assert!(*source_position < k);
                    prop_assert!(kb.role_compatible(&d.frame_id, "Source", name).is_compatible());
                    // brute force: nothing compatible strictly closer
                    for l in (*source_position + 1)..k {
                        for e in sentence_entities(&f[l - 1], &kb) {
                            prop_assert!(!kb.role_compatible(&d.frame_id, "Source", &e).is_compatible());
                        }
                    }
                }
                _ => {
                    for p in &f[..k - 1] {
                        for e in sentence_entities(p, &kb) {
                            prop_assert!(!kb.role_compatible(&d.frame_id, "Source", &e).is_compatible());
                        }
                    }
                }
            }
            // appending later sentences does not change position k
            let mut longer = f.clone();
            longer.push(parse_instruction(&format!("go to the {}", ENTITIES[extra]), &kb.parser_config).unwrap());
            prop_assert_eq!(recover_from_context(&longer, k, &own, d, &kb).unwrap(), b);
        }
    }
}
