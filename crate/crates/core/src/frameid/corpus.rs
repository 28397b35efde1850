//! Annotated corpus: `sentence \t verb_index \t gold_frame \t gold_lu`.

use std::path::Path;

use super::{AnnotatedExample, FrameIdError};
use crate::knowledge::lexicon::{FrameLexicon, LexicalUnit};
use crate::parser::{parse_instruction, ParserConfig};

/// Parses corpus text. Lines starting with `#` and blank lines are skipped.
/// The parsed verb must sit at the annotated index and the gold pair must be
/// in the lexicon.
pub fn parse_corpus(
    src: &str,
    parser: &ParserConfig,
    lexicon: &FrameLexicon,
) -> Result<Vec<AnnotatedExample>, FrameIdError> {
    let mut out = Vec::new();
    for (i, line) in src.lines().enumerate() {
        let n = i + 1;
        let bad = |reason: String| FrameIdError::Corpus { line: n, reason };
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        let [sentence, index, frame, lu] = cols.as_slice() else {
            return Err(bad(format!("expected 4 columns, found {}", cols.len())));
        };
        let index: usize = index.parse().map_err(|_| bad(format!("bad verb index {index:?}")))?;
        let parsed = parse_instruction(sentence, parser).map_err(|e| bad(e.to_string()))?;
        if parsed.verb_index != index {
            return Err(bad(format!("verb found at token {}, annotated at {index}", parsed.verb_index)));
        }
        let lu = LexicalUnit::parse(lu).ok_or_else(|| bad(format!("bad lexical unit {lu:?}")))?;
        if !lexicon.units_of(frame).contains(&&lu) {
            return Err(bad(format!("{lu} does not evoke {frame}")));
        }
        if !lexicon.candidate_frames(&parsed.verb).contains(frame) {
            return Err(bad(format!("{frame} is not a candidate of verb {:?}", parsed.verb)));
        }
        out.push(AnnotatedExample { verb: parsed.verb.clone(), sentence: parsed, frame: frame.to_string(), lu });
    }
    Ok(out)
}

pub fn load_corpus(
    path: &Path,
    parser: &ParserConfig,
    lexicon: &FrameLexicon,
) -> Result<Vec<AnnotatedExample>, FrameIdError> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| FrameIdError::Corpus { line: 0, reason: format!("{}: {e}", path.display()) })?;
    parse_corpus(&src, parser, lexicon)
}
