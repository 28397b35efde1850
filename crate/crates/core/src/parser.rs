//! Shallow pattern parser for imperative instructions.
//!
//! Grammar: `[please] VERB [PARTICLE] NP* (PREP NP)*`, where each NP may
//! carry determiners. A leading `by`/`with` followed by a gerund is read as
//! the gerund's verb. Only `dobj` and `prep_*` dependencies are produced.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::knowledge::tsv_rows;
use crate::text::normalize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("empty instruction")]
    Empty,
    #[error("no verb found: instruction starts with {0:?}")]
    NoVerb(String),
    #[error("preposition {0:?} has no noun phrase")]
    DanglingPreposition(String),
    #[error("unsupported structure: {0}")]
    UnsupportedStructure(String),
}

/// Closed word lists and lemma exceptions, loaded from `parser_config.tsv`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParserConfig {
    pub particles: BTreeSet<String>,
    /// Space-separated, e.g. `out of`.
    pub prepositions: BTreeSet<String>,
    pub determiners: BTreeSet<String>,
    pub pronouns: BTreeSet<String>,
    pub conjunctions: BTreeSet<String>,
    pub noun_lemmas: BTreeMap<String, String>,
    pub verb_lemmas: BTreeMap<String, String>,
}

const BUNDLED_CONFIG: &str = include_str!("../kb/parser_config.tsv");

impl Default for ParserConfig {
    /// The configuration shipped in `kb/parser_config.tsv`.
    fn default() -> Self {
        ParserConfig::parse(BUNDLED_CONFIG).expect("bundled parser config is valid")
    }
}

impl ParserConfig {
    pub fn empty() -> Self {
        ParserConfig {
            particles: BTreeSet::new(),
            prepositions: BTreeSet::new(),
            determiners: BTreeSet::new(),
            pronouns: BTreeSet::new(),
            conjunctions: BTreeSet::new(),
            noun_lemmas: BTreeMap::new(),
            verb_lemmas: BTreeMap::new(),
        }
    }

    /// Errors carry the 1-based line number.
    pub fn parse(src: &str) -> Result<Self, (usize, String)> {
        let mut c = ParserConfig::empty();
        for (line, row) in tsv_rows(src) {
            match row.as_slice() {
                ["particle", w] => c.particles.insert(w.to_string()),
                ["preposition", p] => c.prepositions.insert(p.split_whitespace().collect::<Vec<_>>().join(" ")),
                ["determiner", w] => c.determiners.insert(w.to_string()),
                ["pronoun", w] => c.pronouns.insert(w.to_string()),
                ["conjunction", w] => c.conjunctions.insert(w.to_string()),
                ["noun_lemma", form, lemma] => c.noun_lemmas.insert(form.to_string(), lemma.to_string()).is_none(),
                ["verb_lemma", form, lemma] => c.verb_lemmas.insert(form.to_string(), lemma.to_string()).is_none(),
                _ => return Err((line, format!("unrecognized row {:?}", row.join("\t")))),
            };
        }
        Ok(c)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let sets = [
            ("particle", &self.particles),
            ("preposition", &self.prepositions),
            ("determiner", &self.determiners),
            ("pronoun", &self.pronouns),
            ("conjunction", &self.conjunctions),
        ];
        for (kind, set) in sets {
            for w in set {
                out += &format!("{kind}\t{w}\n");
            }
        }
        for (kind, map) in [("noun_lemma", &self.noun_lemmas), ("verb_lemma", &self.verb_lemmas)] {
            for (form, lemma) in map {
                out += &format!("{kind}\t{form}\t{lemma}\n");
            }
        }
        out
    }

    pub fn is_pronoun(&self, word: &str) -> bool {
        self.pronouns.contains(word)
    }

    fn is_closed_class(&self, word: &str) -> bool {
        self.determiners.contains(word)
            || self.pronouns.contains(word)
            || self.conjunctions.contains(word)
            || self.prepositions.iter().any(|p| p.split(' ').next() == Some(word))
    }

    /// Length in tokens of the longest preposition starting at `tokens[0]`.
    fn preposition_at(&self, tokens: &[String]) -> Option<usize> {
        self.prepositions
            .iter()
            .map(|p| p.split(' ').collect::<Vec<_>>())
            .filter(|words| words.len() <= tokens.len() && words.iter().zip(tokens).all(|(w, t)| w == t))
            .map(|words| words.len())
            .max()
    }

    pub fn noun_lemma(&self, word: &str) -> String {
        if let Some(l) = self.noun_lemmas.get(word) {
            return l.clone();
        }
        if self.pronouns.contains(word) || word.len() <= 3 {
            return word.to_string();
        }
        if let Some(stem) = word.strip_suffix("ies") {
            return format!("{stem}y");
        }
        if let Some(stem) = word.strip_suffix("es") {
            if ["s", "x", "z", "ch", "sh"].iter().any(|e| stem.ends_with(e)) {
                return stem.to_string();
            }
        }
        if word.ends_with('s') && !["ss", "us", "is"].iter().any(|e| word.ends_with(e)) {
            return word[..word.len() - 1].to_string();
        }
        word.to_string()
    }

    pub fn verb_lemma(&self, word: &str) -> String {
        self.verb_lemmas.get(word).cloned().unwrap_or_else(|| word.to_string())
    }

    fn gerund_lemma(&self, word: &str) -> Option<String> {
        if let Some(l) = self.verb_lemmas.get(word) {
            return Some(l.clone());
        }
        word.strip_suffix("ing").filter(|s| s.len() >= 2).map(str::to_string)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TypedDependency {
    pub dep_type: String,
    pub governor: usize,
    pub dependent: usize,
    pub dependent_head_lemma: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ParsedInstruction {
    pub raw_text: String,
    pub tokens: Vec<String>,
    /// Verb lemma, with a particle joined by `_` (`pick_up`).
    pub verb: String,
    pub verb_index: usize,
    pub dependencies: Vec<TypedDependency>,
}

impl ParsedInstruction {
    pub fn dependency(&self, dep_type: &str) -> Option<&TypedDependency> {
        self.dependencies.iter().find(|d| d.dep_type == dep_type)
    }

    pub fn dobj(&self) -> Option<&str> {
        self.dependency("dobj").map(|d| d.dependent_head_lemma.as_str())
    }

    /// `dobj(take, food)` style lines.
    pub fn dependency_strings(&self) -> Vec<String> {
        self.dependencies
            .iter()
            .map(|d| format!("{}({}, {})", d.dep_type, self.verb, d.dependent_head_lemma))
            .collect()
    }
}

impl fmt::Display for ParsedInstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "tokens: {}", self.tokens.join(" "))?;
        writeln!(f, "verb: {} ({})", self.verb, self.verb_index)?;
        for (d, s) in self.dependencies.iter().zip(self.dependency_strings()) {
            writeln!(f, "{s} [{}->{}]", d.governor, d.dependent)?;
        }
        Ok(())
    }
}

pub fn tokenize(text: &str) -> Result<Vec<String>, ParseError> {
    let tokens: Vec<String> = normalize(text).split(' ').filter(|t| !t.is_empty()).map(str::to_string).collect();
    if tokens.is_empty() {
        Err(ParseError::Empty)
    } else {
        Ok(tokens)
    }
}

/// A noun phrase as token indices, determiners already removed.
type Np = Vec<usize>;

pub fn parse_instruction(text: &str, config: &ParserConfig) -> Result<ParsedInstruction, ParseError> {
    let tokens = tokenize(text)?;
    let mut i = 0;
    if tokens[0] == "please" && tokens.len() > 1 {
        i = 1;
    }

    let (mut verb, verb_index) = if matches!(tokens[i].as_str(), "by" | "with")
        && tokens.get(i + 1).is_some_and(|t| t.ends_with("ing"))
    {
        let lemma = config.gerund_lemma(&tokens[i + 1]).ok_or_else(|| ParseError::NoVerb(tokens[i].clone()))?;
        i += 2;
        (lemma, i - 1)
    } else if config.is_closed_class(&tokens[i]) {
        return Err(ParseError::NoVerb(tokens[i].clone()));
    } else {
        i += 1;
        (config.verb_lemma(&tokens[i - 1]), i - 1)
    };

    if let Some(t) = tokens.get(i) {
        let starts_multiword_prep = config.preposition_at(&tokens[i..]).is_some_and(|n| n > 1);
        if config.particles.contains(t) && !starts_multiword_prep {
            verb = format!("{verb}_{t}");
            i += 1;
        }
    }

    if let Some(c) = tokens[i..].iter().find(|t| config.conjunctions.contains(*t)) {
        return Err(ParseError::UnsupportedStructure(format!("coordinated clauses ({c:?})")));
    }

    // leading object chunk, then (preposition, chunk) pairs
    let mut leading: Vec<usize> = Vec::new();
    let mut preps: Vec<(String, Vec<usize>)> = Vec::new();
    while i < tokens.len() {
        if let Some(n) = config.preposition_at(&tokens[i..]) {
            preps.push((tokens[i..i + n].join("_"), Vec::new()));
            i += n;
            continue;
        }
        match preps.last_mut() {
            Some((_, chunk)) => chunk.push(i),
            None => leading.push(i),
        }
        i += 1;
    }

    let mut objects = split_object_chunk(&leading, &tokens, config);
    let mut deps = Vec::new();
    let head = |np: &Np| -> String {
        let words: Vec<&str> = np.iter().map(|&k| tokens[k].as_str()).collect();
        let (last, rest) = words.split_last().expect("noun phrases are non-empty");
        let mut parts: Vec<String> = rest.iter().map(|w| w.to_string()).collect();
        parts.push(config.noun_lemma(last));
        parts.join("-")
    };
    let push = |label: String, np: &Np, deps: &mut Vec<TypedDependency>| {
        deps.push(TypedDependency {
            dep_type: label,
            governor: verb_index,
            dependent: *np.last().expect("noun phrases are non-empty"),
            dependent_head_lemma: head(np),
        });
    };
    match objects.len() {
        0 => {}
        1 => push("dobj".into(), &objects[0], &mut deps),
        2 => {
            // double object: the first is the recipient
            let direct = objects.pop().expect("two objects");
            push("prep_to".into(), &objects[0], &mut deps);
            push("dobj".into(), &direct, &mut deps);
        }
        n => return Err(ParseError::UnsupportedStructure(format!("{n} object noun phrases"))),
    }
    for (prep, chunk) in preps {
        let np: Np = chunk.into_iter().filter(|&k| !config.determiners.contains(&tokens[k])).collect();
        if np.is_empty() {
            return Err(ParseError::DanglingPreposition(prep.replace('_', " ")));
        }
        push(format!("prep_{prep}"), &np, &mut deps);
    }
    if deps.iter().filter(|d| d.dep_type == "prep_to").count() > 1 {
        return Err(ParseError::UnsupportedStructure("two recipients".into()));
    }

    Ok(ParsedInstruction { raw_text: text.to_string(), tokens, verb, verb_index, dependencies: deps })
}

/// Splits the tokens between verb and first preposition into noun phrases.
/// A determiner in mid-chunk or the end of a pronoun starts a new phrase.
fn split_object_chunk(chunk: &[usize], tokens: &[String], config: &ParserConfig) -> Vec<Np> {
    let mut out: Vec<Np> = Vec::new();
    let mut current: Np = Vec::new();
    for &k in chunk {
        let word = &tokens[k];
        if config.determiners.contains(word) {
            if !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
            continue;
        }
        current.push(k);
        if config.is_pronoun(word) {
            out.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}
