use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A lemma paired with a part of speech, e.g. `take.v`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LexicalUnit {
    pub lemma: String,
    pub pos: String,
}

impl LexicalUnit {
    pub fn new(lemma: &str, pos: &str) -> Self {
        LexicalUnit { lemma: lemma.to_string(), pos: pos.to_string() }
    }

    /// Parses `take.v`.
    pub fn parse(text: &str) -> Option<Self> {
        let (lemma, pos) = text.rsplit_once('.')?;
        (!lemma.is_empty() && !pos.is_empty()).then(|| LexicalUnit::new(lemma, pos))
    }
}

impl fmt::Display for LexicalUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.lemma, self.pos)
    }
}

/// Frames, their lexical units, and the frames each verb can evoke.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrameLexicon {
    rows: Vec<(LexicalUnit, String)>,
    by_frame: BTreeMap<String, BTreeSet<LexicalUnit>>,
    synonyms: BTreeSet<(String, String)>,
}

impl FrameLexicon {
    pub fn add(&mut self, lu: LexicalUnit, frame: &str) -> bool {
        let fresh = self.by_frame.entry(frame.to_string()).or_default().insert(lu.clone());
        if fresh {
            self.rows.push((lu, frame.to_string()));
        }
        fresh
    }

    pub fn add_synonym(&mut self, a: &str, b: &str) {
        self.synonyms.insert((a.to_string(), b.to_string()));
        self.synonyms.insert((b.to_string(), a.to_string()));
    }

    pub fn rows(&self) -> &[(LexicalUnit, String)] {
        &self.rows
    }

    pub fn synonym_pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.synonyms.iter().filter(|(a, b)| a < b).map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn frames(&self) -> impl Iterator<Item = &str> {
        self.by_frame.keys().map(String::as_str)
    }

    pub fn has_frame(&self, frame: &str) -> bool {
        self.by_frame.contains_key(frame)
    }

    /// The lexical units annotated as evoking `frame`, sorted.
    pub fn units_of(&self, frame: &str) -> Vec<&LexicalUnit> {
        self.by_frame.get(frame).map(|s| s.iter().collect()).unwrap_or_default()
    }

    /// Candidate frames for a verb lemma, sorted by name.
    pub fn candidate_frames(&self, verb: &str) -> Vec<&str> {
        self.by_frame
            .iter()
            .filter(|(_, units)| units.iter().any(|u| u.lemma == verb && u.pos == "v"))
            .map(|(f, _)| f.as_str())
            .collect()
    }

    pub fn are_synonymous(&self, a: &str, b: &str) -> bool {
        a == b || self.synonyms.contains(&(a.to_string(), b.to_string()))
    }
}
