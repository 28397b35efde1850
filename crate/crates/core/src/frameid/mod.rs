//! Frame identification with a conditional log-linear model over
//! `(frame, lexical unit)` pairs.

pub mod corpus;
pub mod features;
pub mod model;
pub mod train;

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

pub use corpus::{load_corpus, parse_corpus};
pub use features::{extract_features, FeatureRegistry, FeatureVector};
pub use model::{candidate_pairs, Inventory, LogLinearModel, Scored};
pub use train::{train, Objective, TrainReport, TrainingConfig};

use crate::knowledge::lexicon::LexicalUnit;
use crate::knowledge::KnowledgeBase;
use crate::parser::ParsedInstruction;

#[derive(Debug, Error, PartialEq)]
pub enum FrameIdError {
    #[error("verb {0:?} has no candidate frames")]
    UnknownVerb(String),
    #[error("({frame}, {lu}) is not a candidate pair for this verb")]
    NotACandidate { frame: String, lu: String },
    #[error("model file line {line}: {reason}")]
    ModelFormat { line: usize, reason: String },
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("non-finite log-likelihood after pass {pass}")]
    NonFinite { pass: usize },
    #[error("gold frame {frame} is not a candidate of verb {verb:?}")]
    GoldNotCandidate { verb: String, frame: String },
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("corpus line {line}: {reason}")]
    Corpus { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedExample {
    pub sentence: ParsedInstruction,
    pub verb: String,
    pub frame: String,
    pub lu: LexicalUnit,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalCounts {
    pub tp: usize,
    pub fp: usize,
    pub t: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl EvalCounts {
    pub fn metrics(&self) -> Metrics {
        metrics(self.tp, self.fp, self.t)
    }
}

/// `P = TP/(TP+FP)`, `R = TP/T`, `F1 = 2PR/(P+R)`, each 0 when its
/// denominator is 0.
pub fn metrics(tp: usize, fp: usize, t: usize) -> Metrics {
    let ratio = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a / b };
    let precision = ratio(tp as f64, (tp + fp) as f64);
    let recall = ratio(tp as f64, t as f64);
    let f1 = ratio(2.0 * precision * recall, precision + recall);
    Metrics { precision, recall, f1 }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub counts: EvalCounts,
    /// Counts keyed by gold frame.
    pub per_frame: BTreeMap<String, EvalCounts>,
}

/// Scores `identify_frame` on a test set. An abstention counts toward `T`
/// only.
pub fn evaluate(model: &LogLinearModel, testset: &[AnnotatedExample], inv: Inventory) -> Evaluation {
    let mut counts = EvalCounts::default();
    let mut per_frame: BTreeMap<String, EvalCounts> = BTreeMap::new();
    for ex in testset {
        let slot = per_frame.entry(ex.frame.clone()).or_default();
        counts.t += 1;
        slot.t += 1;
        match model.identify_frame(&ex.sentence, inv) {
            Some((f, _)) if f == ex.frame => {
                counts.tp += 1;
                slot.tp += 1;
            }
            Some(_) => {
                counts.fp += 1;
                slot.fp += 1;
            }
            None => {}
        }
    }
    Evaluation { counts, per_frame }
}

/// Annotated corpus file kept next to the knowledge base.
pub const CORPUS_FILE: &str = "corpus.tsv";

/// Trains the default model on the corpus in `kb_dir` with `seed`.
pub fn train_default(kb: &KnowledgeBase, kb_dir: &Path, seed: u64) -> Result<LogLinearModel, FrameIdError> {
    let corpus = load_corpus(&kb_dir.join(CORPUS_FILE), &kb.parser_config, &kb.lexicon)?;
    let config = TrainingConfig { seed, ..TrainingConfig::default() };
    let (model, _) = train(&corpus, config, Inventory { lexicon: &kb.lexicon, taxonomy: &kb.taxonomy })?;
    Ok(model)
}
