use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A union of classes, printed with `⊔`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassExpr(pub Vec<String>);

impl ClassExpr {
    pub fn parse(text: &str) -> Result<ClassExpr, String> {
        let classes: Vec<String> = text
            .split(['⊔', '|'])
            .map(|s| s.trim().to_string())
            .collect();
        if classes.iter().any(String::is_empty) {
            return Err(format!("malformed class expression {text:?}"));
        }
        Ok(ClassExpr(classes))
    }
}

impl fmt::Display for ClassExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("⊔"))
    }
}

/// Outcome of a role/entity compatibility query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Compatibility {
    /// No constraint recorded for the role.
    Unconstrained,
    Member,
    NotMember,
    /// The entity has no class membership at all.
    UnknownEntity,
}

impl Compatibility {
    pub fn is_compatible(self) -> bool {
        matches!(self, Compatibility::Unconstrained | Compatibility::Member)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Taxonomy {
    pub(crate) classes: BTreeSet<String>,
    /// parent -> children
    pub(crate) subclasses: BTreeMap<String, BTreeSet<String>>,
    /// entity -> direct classes
    pub(crate) members: BTreeMap<String, BTreeSet<String>>,
    pub(crate) constraints: BTreeMap<(String, String), ClassExpr>,
}

impl Taxonomy {
    pub fn add_class(&mut self, class: &str) {
        self.classes.insert(class.to_string());
    }

    pub fn add_subclass(&mut self, parent: &str, child: &str) {
        self.subclasses.entry(parent.to_string()).or_default().insert(child.to_string());
    }

    pub fn add_member(&mut self, entity: &str, class: &str) {
        self.members.entry(entity.to_string()).or_default().insert(class.to_string());
    }

    pub fn add_constraint(&mut self, frame_id: &str, role: &str, expr: ClassExpr) {
        self.constraints.insert((frame_id.to_string(), role.to_string()), expr);
    }

    pub fn classes(&self) -> &BTreeSet<String> {
        &self.classes
    }

    pub fn has_class(&self, class: &str) -> bool {
        self.classes.contains(class)
    }

    pub fn is_known(&self, entity: &str) -> bool {
        self.members.contains_key(entity)
    }

    pub fn entities(&self) -> impl Iterator<Item = &str> {
        self.members.keys().map(String::as_str)
    }

    pub fn direct_classes(&self, entity: &str) -> BTreeSet<String> {
        self.members.get(entity).cloned().unwrap_or_default()
    }

    pub fn constraint(&self, frame_id: &str, role: &str) -> Option<&ClassExpr> {
        self.constraints.get(&(frame_id.to_string(), role.to_string()))
    }

    pub fn constraints(&self) -> impl Iterator<Item = (&str, &str, &ClassExpr)> {
        self.constraints.iter().map(|((f, r), e)| (f.as_str(), r.as_str(), e))
    }

    /// Every class the entity belongs to, directly or through superclasses.
    pub fn classes_of(&self, entity: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut frontier: Vec<String> = self.direct_classes(entity).into_iter().collect();
        while let Some(class) = frontier.pop() {
            if out.insert(class.clone()) {
                frontier.extend(self.parents_of(&class));
            }
        }
        out
    }

    fn parents_of(&self, class: &str) -> Vec<String> {
        self.subclasses
            .iter()
            .filter(|(_, children)| children.contains(class))
            .map(|(parent, _)| parent.clone())
            .collect()
    }

    /// Is `class` equal to or a (transitive) subclass of `ancestor`?
    pub fn is_subclass_of(&self, class: &str, ancestor: &str) -> bool {
        let mut seen = BTreeSet::new();
        let mut frontier = vec![class.to_string()];
        while let Some(c) = frontier.pop() {
            if c == ancestor {
                return true;
            }
            if seen.insert(c.clone()) {
                frontier.extend(self.parents_of(&c));
            }
        }
        false
    }

    pub fn is_member(&self, entity: &str, expr: &ClassExpr) -> bool {
        let classes = self.classes_of(entity);
        expr.0.iter().any(|c| classes.contains(c))
    }

    pub fn role_compatible(&self, frame_id: &str, role: &str, entity: &str) -> Compatibility {
        let Some(expr) = self.constraint(frame_id, role) else {
            return Compatibility::Unconstrained;
        };
        if !self.is_known(entity) {
            return Compatibility::UnknownEntity;
        }
        if self.is_member(entity, expr) {
            Compatibility::Member
        } else {
            Compatibility::NotMember
        }
    }

    /// Checks declared-class references and acyclicity of the class graph.
    pub fn validate(&self) -> Result<(), String> {
        for (parent, children) in &self.subclasses {
            for c in std::iter::once(parent).chain(children) {
                if !self.classes.contains(c) {
                    return Err(format!("subclass edge references undeclared class {c}"));
                }
            }
        }
        for (entity, classes) in &self.members {
            if let Some(c) = classes.iter().find(|c| !self.classes.contains(*c)) {
                return Err(format!("entity {entity} is a member of undeclared class {c}"));
            }
        }
        for ((frame, role), expr) in &self.constraints {
            if let Some(c) = expr.0.iter().find(|c| !self.classes.contains(*c)) {
                return Err(format!("constraint ({frame}, {role}) references undeclared class {c}"));
            }
        }
        self.check_acyclic()
    }

    fn check_acyclic(&self) -> Result<(), String> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Active,
            Done,
        }
        fn visit(
            tax: &Taxonomy,
            class: &str,
            marks: &mut BTreeMap<String, Mark>,
        ) -> Result<(), String> {
            match marks.get(class) {
                Some(Mark::Done) => return Ok(()),
                Some(Mark::Active) => return Err(format!("class graph has a cycle through {class}")),
                None => {}
            }
            marks.insert(class.to_string(), Mark::Active);
            if let Some(children) = tax.subclasses.get(class) {
                for child in children {
                    visit(tax, child, marks)?;
                }
            }
            marks.insert(class.to_string(), Mark::Done);
            Ok(())
        }
        let mut marks = BTreeMap::new();
        for class in &self.classes {
            visit(self, class, &mut marks)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_iv() -> Taxonomy {
        let mut t = Taxonomy::default();
        for c in ["Object", "Containable_Obj", "Holdable_Obj", "Supportable_Obj", "Door"] {
            t.add_class(c);
        }
        for c in ["Containable_Obj", "Holdable_Obj", "Supportable_Obj", "Door"] {
            t.add_subclass("Object", c);
        }
        t.add_member("fridge", "Containable_Obj");
        t.add_member("beer", "Holdable_Obj");
        t.add_member("table", "Supportable_Obj");
        t.add_member("fridge-door", "Door");
        t.add_constraint("take-Taking", "Theme", ClassExpr::parse("Holdable_Obj").unwrap());
        t.add_constraint(
            "take-Taking",
            "Source",
            ClassExpr::parse("Supportable_Obj⊔Containable_Obj").unwrap(),
        );
        t
    }

    #[test]
    fn compatibility_cases() {
        let t = table_iv();
        assert_eq!(t.role_compatible("take-Taking", "Source", "fridge"), Compatibility::Member);
        assert_eq!(t.role_compatible("take-Taking", "Source", "fridge-door"), Compatibility::NotMember);
        assert_eq!(t.role_compatible("take-Taking", "Theme", "beer"), Compatibility::Member);
        assert_eq!(t.role_compatible("take-Taking", "Theme", "unicorn"), Compatibility::UnknownEntity);
        assert_eq!(t.role_compatible("take-Taking", "Agent", "unicorn"), Compatibility::Unconstrained);
        assert!(!Compatibility::UnknownEntity.is_compatible());
    }

    #[test]
    fn superclass_membership_is_inherited() {
        let t = table_iv();
        assert!(t.classes_of("beer").contains("Object"));
        assert!(t.is_subclass_of("Holdable_Obj", "Object"));
        assert!(!t.is_subclass_of("Object", "Holdable_Obj"));
    }

    #[test]
    fn cycles_and_dangling_classes_rejected() {
        let mut t = table_iv();
        assert!(t.validate().is_ok());
        t.add_subclass("Holdable_Obj", "Object");
        assert!(t.validate().unwrap_err().contains("cycle"));

        let mut t = table_iv();
        t.add_member("x", "Nope");
        assert!(t.validate().is_err());
    }

    #[test]
    fn class_expr_accepts_ascii_union() {
        assert_eq!(ClassExpr::parse("A|B").unwrap(), ClassExpr::parse("A⊔B").unwrap());
        assert!(ClassExpr::parse("A⊔").is_err());
    }
}
