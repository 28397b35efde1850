use std::collections::BTreeMap;

use crate::knowledge::lexicon::LexicalUnit;
use crate::knowledge::taxonomy::Taxonomy;
use crate::parser::ParsedInstruction;

/// Template names, in the order they are listed in serialized models.
pub const TEMPLATES: [&str; 6] = ["verb", "lu", "dobj", "prep", "dobjclass", "bias"];

/// Names of the binary features active for `(frame, lu, verb, x)`, sorted.
pub fn extract_features(
    frame: &str,
    lu: &LexicalUnit,
    verb: &str,
    x: &ParsedInstruction,
    taxonomy: &Taxonomy,
) -> Vec<String> {
    let mut out = vec![format!("verb={verb}|frame={frame}"), format!("lu={lu}"), format!("bias|frame={frame}")];
    for d in &x.dependencies {
        if d.dep_type == "dobj" {
            out.push(format!("dobj={}|frame={frame}", d.dependent_head_lemma));
            for class in taxonomy.classes_of(&d.dependent_head_lemma) {
                out.push(format!("dobjclass={class}|frame={frame}"));
            }
        } else {
            out.push(format!("prep={}|frame={frame}", d.dep_type.trim_start_matches("prep_")));
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Maps feature names to dense indices. Append-only while training.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeatureRegistry {
    names: Vec<String>,
    index: BTreeMap<String, usize>,
}

impl FeatureRegistry {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        i
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Sorted indices of the known names; unknown names are dropped.
    pub fn vectorize(&self, names: &[String]) -> FeatureVector {
        let mut indices: Vec<usize> = names.iter().filter_map(|n| self.lookup(n)).collect();
        indices.sort_unstable();
        FeatureVector { indices }
    }

    pub fn vectorize_growing(&mut self, names: &[String]) -> FeatureVector {
        let mut indices: Vec<usize> = names.iter().map(|n| self.intern(n)).collect();
        indices.sort_unstable();
        FeatureVector { indices }
    }
}

/// A sparse binary vector: the indices whose value is 1.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeatureVector {
    pub indices: Vec<usize>,
}

impl FeatureVector {
    pub fn dot(&self, theta: &[f64]) -> f64 {
        self.indices.iter().map(|&i| theta[i]).sum()
    }
}
