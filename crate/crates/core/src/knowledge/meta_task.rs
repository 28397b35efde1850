//! Meta-task definitions: a frame's semantic roles plus the conditions that
//! hold before, after and throughout any execution of it.

use std::collections::BTreeSet;
use std::fmt;

use super::formula::{ConditionFormula, Term};
use crate::sexpr::{Sexpr, SexprError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaTaskDefinition {
    /// Verb sense plus frame name, e.g. `put-Placing`.
    pub frame_id: String,
    pub roles: Vec<String>,
    pub preconditions: Vec<ConditionFormula>,
    pub postconditions: Vec<ConditionFormula>,
    pub invariants: Vec<ConditionFormula>,
    pub disjunctive_invariants: Vec<(ConditionFormula, ConditionFormula)>,
}

/// Splits `put-Placing` into `("put", "Placing")`.
pub fn split_frame_id(frame_id: &str) -> (&str, &str) {
    match frame_id.split_once('-') {
        Some((verb, frame)) if !frame.is_empty() => (verb, frame),
        _ => ("", frame_id),
    }
}

impl MetaTaskDefinition {
    /// The frame part of the id (`Placing` for `put-Placing`).
    pub fn frame_name(&self) -> &str {
        split_frame_id(&self.frame_id).1
    }

    pub fn has_role(&self, role: &str) -> bool {
        self.roles.iter().any(|r| r == role)
    }

    pub fn formulas(&self) -> impl Iterator<Item = &ConditionFormula> {
        self.preconditions
            .iter()
            .chain(&self.postconditions)
            .chain(&self.invariants)
            .chain(self.disjunctive_invariants.iter().flat_map(|(a, b)| [a, b]))
    }

    pub fn predicates(&self) -> BTreeSet<&str> {
        self.formulas().flat_map(|f| f.literals()).map(|l| l.predicate.as_str()).collect()
    }

    fn parse(form: &Sexpr, vocabulary: Option<&BTreeSet<String>>) -> Result<Self, SexprError> {
        let items = form.as_list().unwrap_or_default();
        let header = items.get(1).ok_or_else(|| form.error("missing meta-task header"))?;
        let h = header.as_list().unwrap_or_default();
        if header.head() != Some("meta-task") || h.len() != 3 {
            return Err(header.error("expected (meta-task NAME (:parameters ?R ...))"));
        }
        let frame_id = h[1].as_atom().ok_or_else(|| h[1].error("meta-task name must be a symbol"))?;
        if h[2].head() != Some(":parameters") {
            return Err(h[2].error("expected (:parameters ?R ...)"));
        }
        let mut roles = Vec::new();
        for p in &h[2].as_list().unwrap_or_default()[1..] {
            let sym = p.as_atom().ok_or_else(|| p.error("parameter must be a symbol"))?;
            let name = sym
                .strip_prefix('?')
                .filter(|n| !n.is_empty())
                .ok_or_else(|| p.error(format!("parameter {sym} must start with '?'")))?;
            if roles.iter().any(|r| r == name) {
                return Err(p.error(format!("duplicate role {name}")));
            }
            roles.push(name.to_string());
        }
        if roles.is_empty() {
            return Err(h[2].error("meta-task declares no roles"));
        }

        let classify = |sym: &str| -> Result<Term, String> {
            let bare = sym.strip_prefix('?').unwrap_or(sym);
            if roles.iter().any(|r| r == bare) {
                Ok(Term::Var(bare.to_string()))
            } else if sym.starts_with('?') {
                Err(format!("variable {sym} is not a declared role of {frame_id}"))
            } else {
                Ok(Term::Const(sym.to_string()))
            }
        };

        let mut def = MetaTaskDefinition {
            frame_id: frame_id.to_string(),
            roles: roles.clone(),
            preconditions: Vec::new(),
            postconditions: Vec::new(),
            invariants: Vec::new(),
            disjunctive_invariants: Vec::new(),
        };
        for section in &items[2..] {
            let parts = section.as_list().ok_or_else(|| section.error("expected a section"))?;
            let one = |def_section: &str| -> Result<ConditionFormula, SexprError> {
                if parts.len() != 2 {
                    return Err(section.error(format!("{def_section} takes exactly one formula")));
                }
                ConditionFormula::parse(&parts[1], &classify)
            };
            match section.head() {
                Some(":precondition") => def.preconditions.push(one(":precondition")?),
                Some(":postcondition") => def.postconditions.push(one(":postcondition")?),
                Some(":invariant") => def.invariants.push(one(":invariant")?),
                Some(":disj-invariant") => {
                    if parts.len() != 3 {
                        return Err(section.error(":disj-invariant takes exactly two formulas"));
                    }
                    def.disjunctive_invariants.push((
                        ConditionFormula::parse(&parts[1], &classify)?,
                        ConditionFormula::parse(&parts[2], &classify)?,
                    ));
                }
                Some(":steps") => {
                    return Err(section.error(":steps sections are not supported in meta-task definitions"))
                }
                other => {
                    return Err(section.error(format!("unknown section {}", other.unwrap_or("?"))))
                }
            }
        }
        if let Some(vocab) = vocabulary {
            if let Some(p) = def.predicates().into_iter().find(|p| !vocab.contains(*p)) {
                return Err(form.error(format!("predicate {p} in {frame_id} is not in the declared vocabulary")));
            }
        }
        Ok(def)
    }
}

impl fmt::Display for MetaTaskDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(define (meta-task {} (:parameters", self.frame_id)?;
        for r in &self.roles {
            write!(f, " ?{r}")?;
        }
        f.write_str("))")?;
        for p in &self.preconditions {
            write!(f, "\n  (:precondition {p})")?;
        }
        for p in &self.postconditions {
            write!(f, "\n  (:postcondition {p})")?;
        }
        for p in &self.invariants {
            write!(f, "\n  (:invariant {p})")?;
        }
        for (a, b) in &self.disjunctive_invariants {
            write!(f, "\n  (:disj-invariant {a} {b})")?;
        }
        f.write_str(")")
    }
}

/// Contents of `meta_tasks.txt`: an optional predicate vocabulary and the
/// definitions in file order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MetaTaskFile {
    pub vocabulary: Option<BTreeSet<String>>,
    pub definitions: Vec<MetaTaskDefinition>,
}

impl MetaTaskFile {
    pub fn parse(src: &str) -> Result<Self, SexprError> {
        let forms = crate::sexpr::parse_all(src)?;
        let mut file = MetaTaskFile::default();
        for form in &forms {
            if form.head() != Some("define") {
                return Err(form.error("expected (define ...)"));
            }
            let kind = form.as_list().unwrap_or_default().get(1).and_then(Sexpr::head);
            match kind {
                Some("predicates") => {
                    let names = form.as_list().unwrap_or_default()[1].as_list().unwrap_or_default()[1..]
                        .iter()
                        .map(|s| s.as_atom().map(str::to_string).ok_or_else(|| s.error("predicate must be a symbol")))
                        .collect::<Result<BTreeSet<_>, _>>()?;
                    file.vocabulary.get_or_insert_with(BTreeSet::new).extend(names);
                }
                Some("meta-task") => {
                    let def = MetaTaskDefinition::parse(form, file.vocabulary.as_ref())?;
                    if file.definitions.iter().any(|d| d.frame_id == def.frame_id) {
                        return Err(form.error(format!("duplicate meta-task {}", def.frame_id)));
                    }
                    file.definitions.push(def);
                }
                _ => return Err(form.error("expected (define (predicates ...)) or (define (meta-task ...))")),
            }
        }
        Ok(file)
    }
}

impl fmt::Display for MetaTaskFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(vocab) = &self.vocabulary {
            f.write_str("(define (predicates")?;
            for p in vocab {
                write!(f, " {p}")?;
            }
            f.write_str("))\n")?;
        }
        for d in &self.definitions {
            writeln!(f, "\n{d}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PLACING: &str = "(define (predicates at portable object))
(define (meta-task put-Placing (:parameters ?Agent ?Theme ?Source ?Goal))
  (:precondition (at Theme Source))
  (:precondition (conj (portable Theme) (object Theme)))
  (:postcondition (at Theme Goal)))";

    #[test]
    fn parses_the_placing_listing() {
        let file = MetaTaskFile::parse(PLACING).unwrap();
        let def = &file.definitions[0];
        assert_eq!(def.frame_id, "put-Placing");
        assert_eq!(def.frame_name(), "Placing");
        assert_eq!(def.roles, ["Agent", "Theme", "Source", "Goal"]);
        assert_eq!(def.preconditions[0].to_string(), "(at Theme Source)");
        assert_eq!(def.preconditions[1].clauses.len(), 2);
        assert_eq!(def.postconditions[0].to_string(), "(at Theme Goal)");
        assert_eq!(MetaTaskFile::parse(&file.to_string()).unwrap(), file);
    }

    #[test]
    fn rejects_steps_and_unknown_vocabulary() {
        let steps = "(define (meta-task a-B (:parameters ?X)) (:steps (go X)))";
        assert!(MetaTaskFile::parse(steps).unwrap_err().reason.contains(":steps"));
        let vocab = "(define (predicates at)) (define (meta-task a-B (:parameters ?X)) (:postcondition (near X)))";
        assert!(MetaTaskFile::parse(vocab).unwrap_err().reason.contains("vocabulary"));
        let undeclared = "(define (meta-task a-B (:parameters ?X)) (:postcondition (at ?Y)))";
        assert!(MetaTaskFile::parse(undeclared).is_err());
        let no_roles = "(define (meta-task a-B (:parameters)))";
        assert!(MetaTaskFile::parse(no_roles).is_err());
    }

    #[test]
    fn splits_ids() {
        assert_eq!(split_frame_id("pick_up-Pick_up"), ("pick_up", "Pick_up"));
        assert_eq!(split_frame_id("dry-Cause_to_be_dry"), ("dry", "Cause_to_be_dry"));
        assert_eq!(split_frame_id("Mass_motion"), ("", "Mass_motion"));
    }
}
