//! A small s-expression reader for the meta-task and action-model files.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexpr {
    Atom { text: String, line: usize },
    List { items: Vec<Sexpr>, line: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {reason}")]
pub struct SexprError {
    pub line: usize,
    pub reason: String,
}

impl Sexpr {
    pub fn line(&self) -> usize {
        match self {
            Sexpr::Atom { line, .. } | Sexpr::List { line, .. } => *line,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexpr::Atom { text, .. } => Some(text),
            Sexpr::List { .. } => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexpr]> {
        match self {
            Sexpr::List { items, .. } => Some(items),
            Sexpr::Atom { .. } => None,
        }
    }

    /// The head symbol of a list, e.g. `define` for `(define ...)`.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|items| items.first()).and_then(Sexpr::as_atom)
    }

    pub fn error(&self, reason: impl Into<String>) -> SexprError {
        SexprError { line: self.line(), reason: reason.into() }
    }
}

impl fmt::Display for Sexpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexpr::Atom { text, .. } => f.write_str(text),
            Sexpr::List { items, .. } => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Reads every top-level form in `src`. `;` starts a comment running to end
/// of line, as does `#` in the first column.
pub fn parse_all(src: &str) -> Result<Vec<Sexpr>, SexprError> {
    let mut stack: Vec<(usize, Vec<Sexpr>)> = Vec::new();
    let mut out = Vec::new();
    for (lineno, raw) in src.lines().enumerate() {
        let line = lineno + 1;
        if raw.trim_start().starts_with('#') {
            continue;
        }
        let text = match raw.find(';') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let mut chars = text.char_indices().peekable();
        while let Some((start, c)) = chars.next() {
            match c {
                '(' => stack.push((line, Vec::new())),
                ')' => {
                    let (open_line, items) = stack
                        .pop()
                        .ok_or_else(|| SexprError { line, reason: "unbalanced ')'".into() })?;
                    let node = Sexpr::List { items, line: open_line };
                    match stack.last_mut() {
                        Some((_, parent)) => parent.push(node),
                        None => out.push(node),
                    }
                }
                c if c.is_whitespace() => {}
                _ => {
                    let mut end = start + c.len_utf8();
                    while let Some(&(i, n)) = chars.peek() {
                        if n.is_whitespace() || n == '(' || n == ')' {
                            break;
                        }
                        end = i + n.len_utf8();
                        chars.next();
                    }
                    let node = Sexpr::Atom { text: text[start..end].to_string(), line };
                    match stack.last_mut() {
                        Some((_, parent)) => parent.push(node),
                        None => out.push(node),
                    }
                }
            }
        }
    }
    if let Some((line, _)) = stack.last() {
        return Err(SexprError { line: *line, reason: "unclosed '('".into() });
    }
    Ok(out)
}
