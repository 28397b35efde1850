use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::knowledge::formula::Literal;

/// A ground atom such as `near(robot,fridge)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl Atom {
    pub fn new(predicate: &str, args: &[&str]) -> Self {
        Atom {
            predicate: predicate.to_string(),
            args: args.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// The atom of a ground literal; `None` if any argument is a variable.
    pub fn from_literal(lit: &Literal) -> Option<Atom> {
        Some(Atom { predicate: lit.predicate.clone(), args: lit.ground_args()? })
    }

    /// Parses `near(robot,fridge)` or `near robot fridge`.
    pub fn parse(text: &str) -> Option<Atom> {
        let text = text.trim();
        if let Some(open) = text.find('(') {
            let inner = text[open + 1..].strip_suffix(')')?;
            let args = if inner.trim().is_empty() {
                Vec::new()
            } else {
                inner.split(',').map(|a| a.trim().to_string()).collect()
            };
            let predicate = text[..open].trim();
            (!predicate.is_empty()).then(|| Atom { predicate: predicate.to_string(), args })
        } else {
            let mut words = text.split_whitespace();
            let predicate = words.next()?;
            Some(Atom { predicate: predicate.to_string(), args: words.map(str::to_string).collect() })
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.predicate, self.args.join(","))
    }
}

/// Time-varying fluents plus the static facts they are evaluated against.
/// Equality and hashing only look at the fluents.
#[derive(Debug, Clone)]
pub struct WorldState {
    fluents: BTreeSet<Atom>,
    statics: Arc<BTreeSet<Atom>>,
}

impl WorldState {
    pub fn new(fluents: impl IntoIterator<Item = Atom>, statics: impl IntoIterator<Item = Atom>) -> Self {
        WorldState { fluents: fluents.into_iter().collect(), statics: Arc::new(statics.into_iter().collect()) }
    }

    pub fn from_fluents(fluents: impl IntoIterator<Item = Atom>) -> Self {
        Self::new(fluents, [])
    }

    pub fn fluents(&self) -> &BTreeSet<Atom> {
        &self.fluents
    }

    pub fn statics(&self) -> &BTreeSet<Atom> {
        &self.statics
    }

    pub fn holds(&self, atom: &Atom) -> bool {
        self.fluents.contains(atom) || self.statics.contains(atom)
    }

    /// Truth of a ground literal under the closed-world reading.
    pub fn satisfies(&self, lit: &Literal) -> bool {
        let atom = Atom::from_literal(lit).expect("literal must be ground");
        self.holds(&atom) == lit.positive
    }

    pub(crate) fn with_fluents(&self, fluents: BTreeSet<Atom>) -> WorldState {
        WorldState { fluents, statics: Arc::clone(&self.statics) }
    }
}

impl PartialEq for WorldState {
    fn eq(&self, other: &Self) -> bool {
        self.fluents == other.fluents
    }
}

impl Eq for WorldState {}

impl Hash for WorldState {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.fluents.hash(state);
    }
}

impl fmt::Display for WorldState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.fluents.iter().map(Atom::to_string).collect();
        write!(f, "{{{}}}", items.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atom_parsing_forms() {
        assert_eq!(Atom::parse("near(robot, fridge)"), Some(Atom::new("near", &["robot", "fridge"])));
        assert_eq!(Atom::parse("closed fridge"), Some(Atom::new("closed", &["fridge"])));
        assert_eq!(Atom::parse("flag()"), Some(Atom::new("flag", &[])));
        assert_eq!(Atom::parse("(x"), None);
        assert_eq!(Atom::new("at", &["food", "fridge"]).to_string(), "at(food,fridge)");
    }

    #[test]
    fn statics_are_visible_but_not_compared() {
        let a = WorldState::new([Atom::new("closed", &["fridge"])], [Atom::new("portable", &["toy"])]);
        let b = WorldState::from_fluents([Atom::new("closed", &["fridge"])]);
        assert!(a.holds(&Atom::new("portable", &["toy"])));
        assert_eq!(a, b);
    }
}
