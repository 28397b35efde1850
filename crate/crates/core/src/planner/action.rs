//! Primitive action schemas, their grounding, and state transition.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::state::{Atom, WorldState};
use super::PlanError;
use crate::knowledge::formula::{parse_literal, ConditionFormula, Literal, Term};
use crate::sexpr::{parse_all, Sexpr, SexprError};

/// Printed argument of an action, e.g. `loc(?obj)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrintTerm {
    Sym(String),
    Apply(String, Vec<PrintTerm>),
}

impl PrintTerm {
    fn parse(expr: &Sexpr) -> Result<PrintTerm, SexprError> {
        match expr {
            Sexpr::Atom { text, .. } => Ok(PrintTerm::Sym(text.clone())),
            Sexpr::List { items, .. } => {
                let head = expr.head().ok_or_else(|| expr.error("print term needs a functor"))?;
                let args = items[1..].iter().map(PrintTerm::parse).collect::<Result<_, _>>()?;
                Ok(PrintTerm::Apply(head.to_string(), args))
            }
        }
    }

    fn render(&self, bindings: &BTreeMap<String, String>) -> String {
        match self {
            PrintTerm::Sym(s) => bindings.get(s).cloned().unwrap_or_else(|| s.clone()),
            PrintTerm::Apply(f, args) => {
                let inner: Vec<String> = args.iter().map(|a| a.render(bindings)).collect();
                format!("{f}({})", inner.join(","))
            }
        }
    }

    fn vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            PrintTerm::Sym(s) if s.starts_with('?') => out.push(s),
            PrintTerm::Sym(_) => {}
            PrintTerm::Apply(_, args) => args.iter().for_each(|a| a.vars(out)),
        }
    }
}

impl fmt::Display for PrintTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrintTerm::Sym(s) => f.write_str(s),
            PrintTerm::Apply(head, args) => {
                write!(f, "({head}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    /// `?obj` first; any further parameters are auxiliary and not printed
    /// unless `print` says otherwise.
    pub params: Vec<String>,
    pub print: Vec<PrintTerm>,
    pub precondition: Vec<Vec<Literal>>,
    pub effects: Vec<Literal>,
    /// Frame this action realizes directly, and the roles that fill the
    /// leading parameters (`?obj` first).
    pub frame: Option<(String, Vec<String>)>,
}

/// Declares that among fluents matching `pattern`, those agreeing on `keys`
/// (and on every constant position) are mutually exclusive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exclusion {
    pub pattern: Literal,
    pub keys: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mutex {
    pub first: Literal,
    pub second: Literal,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActionModel {
    pub schemas: Vec<ActionSchema>,
    pub exclusions: Vec<Exclusion>,
    pub mutexes: Vec<Mutex>,
}

/// A fully instantiated action.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrimitiveAction {
    pub schema: usize,
    pub name: String,
    /// All parameter values, in schema order.
    pub args: Vec<String>,
    /// Printed arguments, e.g. `["loc(floor)"]`.
    pub display_args: Vec<String>,
    pub precondition: Vec<Vec<(Atom, bool)>>,
    pub adds: Vec<Atom>,
    pub deletes: Vec<Atom>,
}

impl PrimitiveAction {
    /// The object parameter (first argument).
    pub fn object(&self) -> Option<&str> {
        self.args.first().map(String::as_str)
    }

    pub fn signature(&self) -> String {
        format!("{}({})", self.name, self.display_args.join(","))
    }
}

impl fmt::Display for PrimitiveAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.signature())
    }
}

fn match_pattern(pattern: &Literal, atom: &Atom) -> Option<BTreeMap<String, String>> {
    if pattern.predicate != atom.predicate || pattern.args.len() != atom.args.len() {
        return None;
    }
    let mut b = BTreeMap::new();
    for (t, v) in pattern.args.iter().zip(&atom.args) {
        match t {
            Term::Const(c) if c != v => return None,
            Term::Const(_) => {}
            Term::Var(x) => match b.get(x) {
                Some(prev) if prev != v => return None,
                Some(_) => {}
                None => {
                    b.insert(x.clone(), v.clone());
                }
            },
        }
    }
    Some(b)
}

impl ActionModel {
    pub fn parse(src: &str) -> Result<ActionModel, SexprError> {
        let mut model = ActionModel::default();
        for form in parse_all(src)? {
            if form.head() != Some("define") {
                return Err(form.error("expected (define ...)"));
            }
            let items = form.as_list().unwrap_or_default();
            let decl = items.get(1).ok_or_else(|| form.error("empty define"))?;
            match decl.head() {
                Some("action") => {
                    let schema = parse_schema(&form)?;
                    if model.schemas.iter().any(|s| s.name == schema.name) {
                        return Err(form.error(format!("duplicate action {}", schema.name)));
                    }
                    model.schemas.push(schema);
                }
                Some("exclusive") => {
                    let parts = decl.as_list().unwrap_or_default();
                    let pattern = parts
                        .get(1)
                        .ok_or_else(|| decl.error("exclusive needs a pattern"))
                        .and_then(|p| parse_literal(p, &pattern_term))?;
                    let mut keys = Vec::new();
                    for k in &parts[2..] {
                        let k = k.as_atom().ok_or_else(|| k.error("key must be a variable"))?;
                        if !pattern.vars().any(|v| v == k) {
                            return Err(decl.error(format!("key {k} does not occur in the pattern")));
                        }
                        keys.push(k.to_string());
                    }
                    model.exclusions.push(Exclusion { pattern, keys });
                }
                Some("mutex") => {
                    let parts = decl.as_list().unwrap_or_default();
                    if parts.len() != 3 {
                        return Err(decl.error("mutex takes two patterns"));
                    }
                    model.mutexes.push(Mutex {
                        first: parse_literal(&parts[1], &pattern_term)?,
                        second: parse_literal(&parts[2], &pattern_term)?,
                    });
                }
                _ => return Err(decl.error("expected action, exclusive or mutex")),
            }
        }
        Ok(model)
    }

    pub fn schema(&self, name: &str) -> Option<&ActionSchema> {
        self.schemas.iter().find(|s| s.name == name)
    }

    pub fn action_names(&self) -> impl Iterator<Item = &str> {
        self.schemas.iter().map(|s| s.name.as_str())
    }

    /// The schema realizing `frame` directly, if the frame is primitive.
    pub fn schema_for_frame(&self, frame: &str) -> Option<&ActionSchema> {
        self.schemas
            .iter()
            .find(|s| s.frame.as_ref().is_some_and(|(f, _)| f == frame))
    }

    /// Predicates that some action adds or deletes.
    pub fn changeable_predicates(&self) -> BTreeSet<&str> {
        self.schemas
            .iter()
            .flat_map(|s| &s.effects)
            .map(|l| l.predicate.as_str())
            .collect()
    }

    pub fn instantiate(&self, schema_index: usize, args: &[String]) -> Result<PrimitiveAction, PlanError> {
        let schema = self.schemas.get(schema_index).ok_or(PlanError::UnknownAction(schema_index.to_string()))?;
        if args.len() != schema.params.len() {
            return Err(PlanError::Arity { action: schema.name.clone(), expected: schema.params.len() });
        }
        let bindings: BTreeMap<String, String> =
            schema.params.iter().cloned().zip(args.iter().cloned()).collect();
        let ground = |l: &Literal| Atom::from_literal(&l.substitute(&bindings)).expect("schema literals use declared parameters");
        let precondition = schema
            .precondition
            .iter()
            .map(|clause| clause.iter().map(|l| (ground(l), l.positive)).collect())
            .collect();
        let (mut adds, mut deletes) = (Vec::new(), Vec::new());
        for e in &schema.effects {
            if e.positive {
                adds.push(ground(e));
            } else {
                deletes.push(ground(e));
            }
        }
        Ok(PrimitiveAction {
            schema: schema_index,
            name: schema.name.clone(),
            args: args.to_vec(),
            display_args: schema.print.iter().map(|p| p.render(&bindings)).collect(),
            precondition,
            adds,
            deletes,
        })
    }

    /// Instantiates an action by name, e.g. `("open", ["fridge"])`.
    pub fn action(&self, name: &str, args: &[&str]) -> Result<PrimitiveAction, PlanError> {
        let idx = self
            .schemas
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| PlanError::UnknownAction(name.to_string()))?;
        let args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        self.instantiate(idx, &args)
    }

    /// All ground actions over `entities`, in schema order then argument
    /// order (lexicographic). Actions whose static preconditions already fail
    /// under `statics` are dropped.
    pub fn ground(&self, entities: &[String], statics: &BTreeSet<Atom>) -> Vec<PrimitiveAction> {
        let mut sorted: Vec<String> = entities.to_vec();
        sorted.sort();
        sorted.dedup();
        let changeable = self.changeable_predicates();
        let mut out = Vec::new();
        for (idx, schema) in self.schemas.iter().enumerate() {
            let n = schema.params.len();
            if n > 0 && sorted.is_empty() {
                continue;
            }
            let mut counters = vec![0usize; n];
            loop {
                let args: Vec<String> = counters.iter().map(|&i| sorted[i].clone()).collect();
                let action = self.instantiate(idx, &args).expect("arity matches");
                let statically_dead = action.precondition.iter().any(|clause| {
                    clause.iter().all(|(atom, positive)| {
                        !changeable.contains(atom.predicate.as_str()) && statics.contains(atom) != *positive
                    })
                });
                if !statically_dead {
                    out.push(action);
                }
                // odometer increment, last position fastest
                let mut pos = n;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    counters[pos] += 1;
                    if counters[pos] < sorted.len() {
                        break;
                    }
                    counters[pos] = 0;
                    if pos == 0 {
                        pos = usize::MAX;
                        break;
                    }
                }
                if n == 0 || pos == usize::MAX {
                    break;
                }
            }
        }
        out
    }

    pub fn applicable(&self, state: &WorldState, action: &PrimitiveAction) -> bool {
        action
            .precondition
            .iter()
            .all(|clause| clause.iter().any(|(atom, positive)| state.holds(atom) == *positive))
    }

    /// Successor state: deletions, then additions, then removal of fluents
    /// excluded by an added one. Untouched fluents persist.
    pub fn apply(&self, state: &WorldState, action: &PrimitiveAction) -> Result<WorldState, PlanError> {
        if !self.applicable(state, action) {
            return Err(PlanError::Inapplicable { action: action.signature(), step: None });
        }
        let mut fluents = state.fluents().clone();
        for d in &action.deletes {
            fluents.remove(d);
        }
        for a in &action.adds {
            fluents.insert(a.clone());
        }
        for added in &action.adds {
            let doomed: Vec<Atom> = fluents
                .iter()
                .filter(|other| *other != added && self.excludes(added, other))
                .cloned()
                .collect();
            for d in doomed {
                fluents.remove(&d);
            }
        }
        Ok(state.with_fluents(fluents))
    }

    /// Does `added` force `other` out of the state?
    pub fn excludes(&self, added: &Atom, other: &Atom) -> bool {
        let exclusive = self.exclusions.iter().any(|ex| {
            match (match_pattern(&ex.pattern, added), match_pattern(&ex.pattern, other)) {
                (Some(a), Some(b)) => ex.keys.iter().all(|k| a.get(k) == b.get(k)),
                _ => false,
            }
        });
        exclusive
            || self.mutexes.iter().any(|m| {
                let pair = |p: &Literal, q: &Literal| match (match_pattern(p, added), match_pattern(q, other)) {
                    (Some(a), Some(b)) => a.iter().all(|(k, v)| b.get(k).is_none_or(|w| w == v)),
                    _ => false,
                };
                pair(&m.first, &m.second) || pair(&m.second, &m.first)
            })
    }
}

fn pattern_term(sym: &str) -> Result<Term, String> {
    if sym.starts_with('?') {
        Ok(Term::Var(sym.to_string()))
    } else {
        Ok(Term::Const(sym.to_string()))
    }
}

fn parse_schema(form: &Sexpr) -> Result<ActionSchema, SexprError> {
    let items = form.as_list().unwrap_or_default();
    let header = items[1].as_list().unwrap_or_default();
    if header.len() != 3 || items[1].head() != Some("action") {
        return Err(items[1].error("expected (action NAME (:parameters ?obj ...))"));
    }
    let name = header[1].as_atom().ok_or_else(|| header[1].error("action name must be a symbol"))?;
    if header[2].head() != Some(":parameters") {
        return Err(header[2].error("expected (:parameters ...)"));
    }
    let mut params = Vec::new();
    for p in &header[2].as_list().unwrap_or_default()[1..] {
        let sym = p.as_atom().filter(|s| s.starts_with('?') && s.len() > 1);
        let sym = sym.ok_or_else(|| p.error("parameters must be ?-variables"))?;
        params.push(sym.to_string());
    }
    let declared = |sym: &str| -> Result<Term, String> {
        if sym.starts_with('?') {
            if params.iter().any(|p| p == sym) {
                Ok(Term::Var(sym.to_string()))
            } else {
                Err(format!("undeclared parameter {sym} in action {name}"))
            }
        } else {
            Ok(Term::Const(sym.to_string()))
        }
    };
    let mut schema = ActionSchema {
        name: name.to_string(),
        params: params.clone(),
        print: params.first().map(|p| vec![PrintTerm::Sym(p.clone())]).unwrap_or_default(),
        precondition: Vec::new(),
        effects: Vec::new(),
        frame: None,
    };
    for section in &items[2..] {
        let parts = section.as_list().ok_or_else(|| section.error("expected a section"))?;
        match section.head() {
            Some(":print") => {
                schema.print = parts[1..].iter().map(PrintTerm::parse).collect::<Result<_, _>>()?;
                let mut vars = Vec::new();
                schema.print.iter().for_each(|p| p.vars(&mut vars));
                if let Some(v) = vars.iter().find(|v| !params.iter().any(|p| p == *v)) {
                    return Err(section.error(format!("undeclared parameter {v} in :print")));
                }
            }
            Some(":precondition") => {
                for f in &parts[1..] {
                    schema.precondition.extend(ConditionFormula::parse(f, &declared)?.clauses);
                }
            }
            Some(":effect") => {
                for l in &parts[1..] {
                    schema.effects.push(parse_literal(l, &declared)?);
                }
            }
            Some(":frame") => {
                let frame = parts.get(1).and_then(Sexpr::as_atom);
                let roles: Option<Vec<String>> =
                    parts.iter().skip(2).map(|r| r.as_atom().map(str::to_string)).collect();
                match (frame, roles) {
                    (Some(f), Some(r)) if !r.is_empty() && r.len() <= params.len() => {
                        schema.frame = Some((f.to_string(), r))
                    }
                    _ => return Err(section.error("expected (:frame FRAME ROLE ...) with at most one role per parameter")),
                }
            }
            other => return Err(section.error(format!("unknown section {}", other.unwrap_or("?")))),
        }
    }
    if schema.effects.is_empty() {
        return Err(form.error(format!("action {name} has no effects")));
    }
    Ok(schema)
}

impl fmt::Display for ActionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.schemas {
            write!(f, "(define (action {} (:parameters {}))", s.name, s.params.join(" "))?;
            f.write_str("\n  (:print")?;
            for p in &s.print {
                write!(f, " {p}")?;
            }
            f.write_str(")")?;
            if !s.precondition.is_empty() {
                let formula = ConditionFormula { clauses: s.precondition.clone() };
                write!(f, "\n  (:precondition {formula})")?;
            }
            f.write_str("\n  (:effect")?;
            for e in &s.effects {
                write!(f, " {e}")?;
            }
            f.write_str(")")?;
            if let Some((frame, roles)) = &s.frame {
                write!(f, "\n  (:frame {frame} {})", roles.join(" "))?;
            }
            f.write_str(")\n\n")?;
        }
        for ex in &self.exclusions {
            write!(f, "(define (exclusive {}", ex.pattern)?;
            for k in &ex.keys {
                write!(f, " {k}")?;
            }
            f.write_str("))\n")?;
        }
        for m in &self.mutexes {
            writeln!(f, "(define (mutex {} {}))", m.first, m.second)?;
        }
        Ok(())
    }
}
