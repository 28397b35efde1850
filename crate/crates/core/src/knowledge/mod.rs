//! The open-knowledge bundle: task decompositions, desire helps, meta-task
//! definitions, role rules, taxonomy, frame lexicon, parser configuration and
//! action models.

pub mod formula;
pub mod lexicon;
pub mod meta_task;
pub mod taxonomy;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::parser::ParserConfig;
use crate::planner::ActionModel;
use crate::text::normalize;
use lexicon::{FrameLexicon, LexicalUnit};
use meta_task::{split_frame_id, MetaTaskDefinition, MetaTaskFile};
use taxonomy::{ClassExpr, Compatibility, Taxonomy};

pub const TASKS_FILE: &str = "tasks_steps.tsv";
pub const HELP_FILE: &str = "help.tsv";
pub const META_TASKS_FILE: &str = "meta_tasks.txt";
pub const RULES_FILE: &str = "role_rules.tsv";
pub const TAXONOMY_FILE: &str = "taxonomy.tsv";
pub const LEXICON_FILE: &str = "lexicon.tsv";
pub const PARSER_CONFIG_FILE: &str = "parser_config.tsv";
pub const ACTION_MODEL_FILE: &str = "action_model.txt";
pub const SYNONYMS_FILE: &str = "frame_synonyms.tsv";

/// Required files, in load order.
pub const REQUIRED_FILES: [&str; 8] = [
    TASKS_FILE,
    HELP_FILE,
    META_TASKS_FILE,
    RULES_FILE,
    TAXONOMY_FILE,
    LEXICON_FILE,
    PARSER_CONFIG_FILE,
    ACTION_MODEL_FILE,
];

#[derive(Debug, Error)]
pub enum KbError {
    #[error("missing file {0}")]
    MissingFile(String),
    #[error("{file}:{line}: {reason}")]
    Malformed { file: String, line: usize, reason: String },
    #[error("{file}: {reason}")]
    Invalid { file: String, reason: String },
    #[error("{file}: {source}")]
    Io { file: String, source: std::io::Error },
}

fn malformed(file: &str, line: usize, reason: impl Into<String>) -> KbError {
    KbError::Malformed { file: file.to_string(), line, reason: reason.into() }
}

fn invalid(file: &str, reason: impl Into<String>) -> KbError {
    KbError::Invalid { file: file.to_string(), reason: reason.into() }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskStepsEntry {
    pub task: String,
    pub steps: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HelpEntry {
    pub desire: String,
    pub help_task: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeuristicRoleRule {
    pub frame_id: String,
    pub dependency_type: String,
    pub semantic_role: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeBase {
    pub tasks: Vec<TaskStepsEntry>,
    pub helps: Vec<HelpEntry>,
    pub meta_tasks: MetaTaskFile,
    pub rules: Vec<HeuristicRoleRule>,
    pub taxonomy: Taxonomy,
    pub lexicon: FrameLexicon,
    pub parser_config: ParserConfig,
    /// Action models by file name; `action_model.txt` is the default.
    pub action_models: BTreeMap<String, ActionModel>,
}

/// Non-comment rows of a TSV file, with 1-based line numbers.
pub(crate) fn tsv_rows(src: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    src.lines().enumerate().filter_map(|(i, line)| {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            None
        } else {
            Some((i + 1, line.split('\t').map(str::trim).collect()))
        }
    })
}

fn read(root: &Path, file: &str) -> Result<String, KbError> {
    let path = root.join(file);
    if !path.is_file() {
        return Err(KbError::MissingFile(file.to_string()));
    }
    fs::read_to_string(&path).map_err(|source| KbError::Io { file: file.to_string(), source })
}

impl KnowledgeBase {
    pub fn load(root: &Path) -> Result<KnowledgeBase, KbError> {
        let mut sources = BTreeMap::new();
        for file in REQUIRED_FILES {
            sources.insert(file, read(root, file)?);
        }
        let mut kb = KnowledgeBase {
            tasks: parse_tasks(&sources[TASKS_FILE])?,
            helps: parse_helps(&sources[HELP_FILE])?,
            meta_tasks: MetaTaskFile::parse(&sources[META_TASKS_FILE])
                .map_err(|e| malformed(META_TASKS_FILE, e.line, e.reason))?,
            rules: parse_rules(&sources[RULES_FILE])?,
            taxonomy: parse_taxonomy(&sources[TAXONOMY_FILE])?,
            lexicon: parse_lexicon(&sources[LEXICON_FILE])?,
            parser_config: ParserConfig::parse(&sources[PARSER_CONFIG_FILE])
                .map_err(|(line, reason)| malformed(PARSER_CONFIG_FILE, line, reason))?,
            action_models: BTreeMap::new(),
        };
        if root.join(SYNONYMS_FILE).is_file() {
            for (line, row) in tsv_rows(&read(root, SYNONYMS_FILE)?) {
                match row.as_slice() {
                    [a, b] if !a.is_empty() && !b.is_empty() => kb.lexicon.add_synonym(a, b),
                    _ => return Err(malformed(SYNONYMS_FILE, line, "expected frame TAB frame")),
                }
            }
        }
        let mut model_files: Vec<String> = fs::read_dir(root)
            .map_err(|source| KbError::Io { file: root.display().to_string(), source })?
            .filter_map(|e| e.ok()?.file_name().into_string().ok())
            .filter(|n| n.starts_with("action_model") && n.ends_with(".txt"))
            .collect();
        model_files.sort();
        for file in model_files {
            let model = ActionModel::parse(&read(root, &file)?).map_err(|e| malformed(&file, e.line, e.reason))?;
            kb.action_models.insert(file, model);
        }
        kb.validate()?;
        Ok(kb)
    }

    /// Cross-file checks.
    pub fn validate(&self) -> Result<(), KbError> {
        for rule in &self.rules {
            let def = self
                .meta_tasks
                .definitions
                .iter()
                .find(|d| d.frame_id == rule.frame_id)
                .ok_or_else(|| invalid(RULES_FILE, format!("rule references undefined meta-task {}", rule.frame_id)))?;
            if !def.has_role(&rule.semantic_role) {
                return Err(invalid(
                    RULES_FILE,
                    format!("role {} is not declared by {}", rule.semantic_role, rule.frame_id),
                ));
            }
            if !is_dependency_label(&rule.dependency_type) {
                return Err(invalid(RULES_FILE, format!("unknown dependency type {}", rule.dependency_type)));
            }
        }
        self.taxonomy.validate().map_err(|r| invalid(TAXONOMY_FILE, r))?;
        for (frame_id, role, _) in self.taxonomy.constraints() {
            let def = self
                .find_definition_exact(frame_id)
                .ok_or_else(|| invalid(TAXONOMY_FILE, format!("constraint references undefined meta-task {frame_id}")))?;
            if !def.has_role(role) {
                return Err(invalid(TAXONOMY_FILE, format!("role {role} is not declared by {frame_id}")));
            }
        }
        for (a, b) in self.lexicon.synonym_pairs() {
            if let Some(f) = [a, b].into_iter().find(|f| !self.lexicon.has_frame(f)) {
                return Err(invalid(SYNONYMS_FILE, format!("synonym references unknown frame {f}")));
            }
        }
        if !self.action_models.contains_key(ACTION_MODEL_FILE) {
            return Err(KbError::MissingFile(ACTION_MODEL_FILE.to_string()));
        }
        for (file, model) in &self.action_models {
            for schema in &model.schemas {
                if let Some((frame, _)) = &schema.frame {
                    if !self.lexicon.has_frame(frame) {
                        return Err(invalid(file, format!("action {} realizes unknown frame {frame}", schema.name)));
                    }
                }
            }
        }
        Ok(())
    }

    /// Writes every file `load` reads.
    pub fn write_to(&self, root: &Path) -> Result<(), KbError> {
        let write = |file: &str, body: String| {
            fs::write(root.join(file), body).map_err(|source| KbError::Io { file: file.to_string(), source })
        };
        let mut tasks = String::new();
        for t in &self.tasks {
            tasks += &format!("{}\t{}\n", t.task, t.steps.join("\t"));
        }
        write(TASKS_FILE, tasks)?;
        let helps: String = self.helps.iter().map(|h| format!("{}\t{}\n", h.desire, h.help_task)).collect();
        write(HELP_FILE, helps)?;
        write(META_TASKS_FILE, self.meta_tasks.to_string())?;
        let rules: String = self
            .rules
            .iter()
            .map(|r| format!("{}\t{}\t{}\n", r.frame_id, r.dependency_type, r.semantic_role))
            .collect();
        write(RULES_FILE, rules)?;
        write(TAXONOMY_FILE, taxonomy_tsv(&self.taxonomy))?;
        let lexicon: String =
            self.lexicon.rows().iter().map(|(lu, f)| format!("{}\t{}\t{}\n", lu.lemma, lu.pos, f)).collect();
        write(LEXICON_FILE, lexicon)?;
        let synonyms: String = self.lexicon.synonym_pairs().map(|(a, b)| format!("{a}\t{b}\n")).collect();
        if !synonyms.is_empty() {
            write(SYNONYMS_FILE, synonyms)?;
        }
        write(PARSER_CONFIG_FILE, self.parser_config.to_tsv())?;
        for (file, model) in &self.action_models {
            write(file, model.to_string())?;
        }
        Ok(())
    }

    pub fn action_model(&self) -> &ActionModel {
        &self.action_models[ACTION_MODEL_FILE]
    }

    /// Step sequences for `task_text`, in file order.
    pub fn find_sub_tasks(&self, task_text: &str) -> Vec<&[String]> {
        let key = normalize(task_text);
        self.tasks.iter().filter(|t| t.task == key).map(|t| t.steps.as_slice()).collect()
    }

    pub fn find_helps_for_desire(&self, desire_text: &str) -> Vec<&str> {
        let key = normalize(desire_text);
        self.helps.iter().filter(|h| h.desire == key).map(|h| h.help_task.as_str()).collect()
    }

    fn find_definition_exact(&self, frame_id: &str) -> Option<&MetaTaskDefinition> {
        self.meta_tasks.definitions.iter().find(|d| d.frame_id == frame_id)
    }

    /// Looks up `put-Placing` by id, or a bare frame name such as `Placing`
    /// by the frame part of the id.
    pub fn find_meta_task_definition(&self, frame_id: &str) -> Option<&MetaTaskDefinition> {
        self.find_definition_exact(frame_id).or_else(|| {
            let (_, frame) = split_frame_id(frame_id);
            self.meta_tasks.definitions.iter().find(|d| d.frame_name() == frame)
        })
    }

    pub fn role_compatible(&self, frame_id: &str, role: &str, entity: &str) -> Compatibility {
        self.taxonomy.role_compatible(frame_id, role, entity)
    }

    pub fn rules_for(&self, frame_id: &str) -> impl Iterator<Item = &HeuristicRoleRule> {
        let frame_id = frame_id.to_string();
        self.rules.iter().filter(move |r| r.frame_id == frame_id)
    }

    /// A copy whose taxonomy also knows the given `(entity, class)` pairs.
    pub fn with_extra_members<'a>(&self, members: impl IntoIterator<Item = (&'a str, &'a str)>) -> KnowledgeBase {
        let mut kb = self.clone();
        for (entity, class) in members {
            kb.taxonomy.add_member(entity, class);
        }
        kb
    }
}

pub(crate) fn is_dependency_label(label: &str) -> bool {
    label == "dobj"
        || label
            .strip_prefix("prep_")
            .is_some_and(|p| !p.is_empty() && p.split('_').all(|w| !w.is_empty() && w.chars().all(|c| c.is_ascii_lowercase())))
}

fn parse_tasks(src: &str) -> Result<Vec<TaskStepsEntry>, KbError> {
    let mut out: Vec<TaskStepsEntry> = Vec::new();
    for (line, row) in tsv_rows(src) {
        let task = normalize(row[0]);
        let steps: Vec<String> = row[1..].iter().map(|s| normalize(s)).filter(|s| !s.is_empty()).collect();
        if task.is_empty() {
            return Err(malformed(TASKS_FILE, line, "empty task"));
        }
        if steps.is_empty() {
            return Err(malformed(TASKS_FILE, line, "task has no steps"));
        }
        let entry = TaskStepsEntry { task, steps };
        if out.contains(&entry) {
            return Err(malformed(TASKS_FILE, line, "duplicate task/steps entry"));
        }
        out.push(entry);
    }
    Ok(out)
}

fn parse_helps(src: &str) -> Result<Vec<HelpEntry>, KbError> {
    tsv_rows(src)
        .map(|(line, row)| match row.as_slice() {
            [d, h] if !normalize(d).is_empty() && !normalize(h).is_empty() => {
                Ok(HelpEntry { desire: normalize(d), help_task: normalize(h) })
            }
            _ => Err(malformed(HELP_FILE, line, "expected desire TAB help_task")),
        })
        .collect()
}

fn parse_rules(src: &str) -> Result<Vec<HeuristicRoleRule>, KbError> {
    tsv_rows(src)
        .map(|(line, row)| match row.as_slice() {
            [f, d, r] if !f.is_empty() && !d.is_empty() && !r.is_empty() => Ok(HeuristicRoleRule {
                frame_id: f.to_string(),
                dependency_type: d.to_string(),
                semantic_role: r.to_string(),
            }),
            _ => Err(malformed(RULES_FILE, line, "expected frame TAB dep_type TAB role")),
        })
        .collect()
}

fn parse_taxonomy(src: &str) -> Result<Taxonomy, KbError> {
    let mut t = Taxonomy::default();
    for (line, row) in tsv_rows(src) {
        match row.as_slice() {
            ["class", c] => t.add_class(c),
            ["subclass", parent, child] => t.add_subclass(parent, child),
            ["member", entity, class] => t.add_member(entity, class),
            ["constraint", frame, role, expr] => {
                let expr = ClassExpr::parse(expr).map_err(|r| malformed(TAXONOMY_FILE, line, r))?;
                t.add_constraint(frame, role, expr);
            }
            _ => return Err(malformed(TAXONOMY_FILE, line, "expected a class, subclass, member or constraint row")),
        }
    }
    Ok(t)
}

fn taxonomy_tsv(t: &Taxonomy) -> String {
    let mut out = String::new();
    for c in &t.classes {
        out += &format!("class\t{c}\n");
    }
    for (parent, children) in &t.subclasses {
        for child in children {
            out += &format!("subclass\t{parent}\t{child}\n");
        }
    }
    for (entity, classes) in &t.members {
        for class in classes {
            out += &format!("member\t{entity}\t{class}\n");
        }
    }
    for (frame, role, expr) in t.constraints() {
        out += &format!("constraint\t{frame}\t{role}\t{expr}\n");
    }
    out
}

fn parse_lexicon(src: &str) -> Result<FrameLexicon, KbError> {
    let mut lex = FrameLexicon::default();
    let mut seen = BTreeSet::new();
    for (line, row) in tsv_rows(src) {
        match row.as_slice() {
            [lemma, pos, frame] if !lemma.is_empty() && !pos.is_empty() && !frame.is_empty() => {
                if !seen.insert((lemma.to_string(), pos.to_string(), frame.to_string())) {
                    return Err(malformed(LEXICON_FILE, line, "duplicate lexicon row"));
                }
                lex.add(LexicalUnit::new(lemma, pos), frame);
            }
            _ => return Err(malformed(LEXICON_FILE, line, "expected lemma TAB pos TAB frame")),
        }
    }
    Ok(lex)
}

/// The knowledge base shipped in `kb/` next to the crate manifest.
pub fn bundled_kb_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("kb")
}
