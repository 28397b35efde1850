//! Conjunctive-normal-form conditions over role variables and constants.

use std::collections::BTreeMap;
use std::fmt;

use crate::sexpr::{Sexpr, SexprError};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    /// A variable, stored under the name it is printed with (`Theme`, `?obj`).
    Var(String),
    Const(String),
}

impl Term {
    pub fn substitute(&self, bindings: &BTreeMap<String, String>) -> Term {
        match self {
            Term::Var(v) => match bindings.get(v) {
                Some(value) => Term::Const(value.clone()),
                None => self.clone(),
            },
            Term::Const(_) => self.clone(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) | Term::Const(v) => f.write_str(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub predicate: String,
    pub args: Vec<Term>,
    pub positive: bool,
}

impl Literal {
    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        })
    }

    pub fn substitute(&self, bindings: &BTreeMap<String, String>) -> Literal {
        Literal {
            predicate: self.predicate.clone(),
            args: self.args.iter().map(|t| t.substitute(bindings)).collect(),
            positive: self.positive,
        }
    }

    /// Argument constants, if the literal is fully ground.
    pub fn ground_args(&self) -> Option<Vec<String>> {
        self.args
            .iter()
            .map(|t| match t {
                Term::Const(c) => Some(c.clone()),
                Term::Var(_) => None,
            })
            .collect()
    }

    fn fmt_atom(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            self.fmt_atom(f)
        } else {
            f.write_str("(not ")?;
            self.fmt_atom(f)?;
            f.write_str(")")
        }
    }
}

/// A conjunction of disjunctions of literals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConditionFormula {
    pub clauses: Vec<Vec<Literal>>,
}

impl ConditionFormula {
    pub fn new(clauses: Vec<Vec<Literal>>) -> Result<Self, String> {
        if clauses.is_empty() {
            return Err("formula has no conjuncts".into());
        }
        if clauses.iter().any(Vec::is_empty) {
            return Err("formula has an empty disjunction".into());
        }
        Ok(ConditionFormula { clauses })
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.clauses.iter().flatten()
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.literals().flat_map(Literal::vars)
    }

    pub fn substitute(&self, bindings: &BTreeMap<String, String>) -> ConditionFormula {
        ConditionFormula {
            clauses: self
                .clauses
                .iter()
                .map(|c| c.iter().map(|l| l.substitute(bindings)).collect())
                .collect(),
        }
    }

    /// Evaluates the formula given a truth function for positive atoms.
    pub fn holds(&self, mut atom_true: impl FnMut(&Literal) -> bool) -> bool {
        self.clauses
            .iter()
            .all(|clause| clause.iter().any(|lit| atom_true(lit) == lit.positive))
    }

    /// Parses `(conj ...)`, `(disj ...)`, `(not ...)` or a bare atom.
    /// `classify` turns each argument symbol into a term, rejecting bad ones.
    pub fn parse(
        expr: &Sexpr,
        classify: &dyn Fn(&str) -> Result<Term, String>,
    ) -> Result<ConditionFormula, SexprError> {
        let clauses = match expr.head() {
            Some("conj") => {
                let items = &expr.as_list().unwrap_or_default()[1..];
                let mut clauses = Vec::new();
                for item in items {
                    clauses.push(parse_clause(item, classify)?);
                }
                clauses
            }
            _ => vec![parse_clause(expr, classify)?],
        };
        ConditionFormula::new(clauses).map_err(|reason| expr.error(reason))
    }
}

impl fmt::Display for ConditionFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let write_clause = |f: &mut fmt::Formatter<'_>, clause: &[Literal]| -> fmt::Result {
            if clause.len() == 1 {
                write!(f, "{}", clause[0])
            } else {
                f.write_str("(disj")?;
                for l in clause {
                    write!(f, " {l}")?;
                }
                f.write_str(")")
            }
        };
        if self.clauses.len() == 1 {
            write_clause(f, &self.clauses[0])
        } else {
            f.write_str("(conj")?;
            for c in &self.clauses {
                f.write_str(" ")?;
                write_clause(f, c)?;
            }
            f.write_str(")")
        }
    }
}

fn parse_clause(
    expr: &Sexpr,
    classify: &dyn Fn(&str) -> Result<Term, String>,
) -> Result<Vec<Literal>, SexprError> {
    match expr.head() {
        Some("disj") => {
            let items = &expr.as_list().unwrap_or_default()[1..];
            if items.is_empty() {
                return Err(expr.error("empty disj"));
            }
            items.iter().map(|i| parse_literal(i, classify)).collect()
        }
        Some("conj") => Err(expr.error("nested conj inside a disjunction is not supported")),
        _ => Ok(vec![parse_literal(expr, classify)?]),
    }
}

pub fn parse_literal(
    expr: &Sexpr,
    classify: &dyn Fn(&str) -> Result<Term, String>,
) -> Result<Literal, SexprError> {
    let items = expr.as_list().ok_or_else(|| expr.error("expected a literal"))?;
    if expr.head() == Some("not") {
        if items.len() != 2 {
            return Err(expr.error("(not ...) takes exactly one atom"));
        }
        let mut lit = parse_literal(&items[1], classify)?;
        if !lit.positive {
            return Err(expr.error("double negation"));
        }
        lit.positive = false;
        return Ok(lit);
    }
    let predicate = expr
        .head()
        .ok_or_else(|| expr.error("literal must start with a predicate name"))?;
    if matches!(predicate, "conj" | "disj") {
        return Err(expr.error(format!("unexpected {predicate} in literal position")));
    }
    let mut args = Vec::new();
    for item in &items[1..] {
        let sym = item.as_atom().ok_or_else(|| item.error("literal arguments must be symbols"))?;
        args.push(classify(sym).map_err(|r| item.error(r))?);
    }
    Ok(Literal { predicate: canonical_predicate(predicate).to_string(), args, positive: true })
}

/// Maps accepted spellings of a predicate to the stored one. The bundled
/// action model keeps the original `beliveloction`.
pub fn canonical_predicate(name: &str) -> &str {
    match name {
        "believe_location" => "beliveloction",
        other => other,
    }
}
