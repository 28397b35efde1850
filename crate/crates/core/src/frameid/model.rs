use std::fmt::Write as _;

use super::features::{extract_features, FeatureRegistry, FeatureVector, TEMPLATES};
use super::FrameIdError;
use crate::knowledge::lexicon::{FrameLexicon, LexicalUnit};
use crate::knowledge::taxonomy::Taxonomy;
use crate::parser::ParsedInstruction;

const MAGIC: &str = "verbplan-frameid 1";

/// The frame inventory and class hierarchy features are computed against.
#[derive(Debug, Clone, Copy)]
pub struct Inventory<'a> {
    pub lexicon: &'a FrameLexicon,
    pub taxonomy: &'a Taxonomy,
}

/// One `(frame, lu)` pair with its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub frame: String,
    pub lu: LexicalUnit,
    pub probability: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LogLinearModel {
    pub registry: FeatureRegistry,
    pub theta: Vec<f64>,
}

/// Every `(f', l')` with `f'` a candidate frame of `verb` and `l'` in
/// `L_{f'}`, ordered by frame then unit.
pub fn candidate_pairs(lexicon: &FrameLexicon, verb: &str) -> Vec<(String, LexicalUnit)> {
    lexicon
        .candidate_frames(verb)
        .into_iter()
        .flat_map(|f| lexicon.units_of(f).into_iter().map(move |l| (f.to_string(), l.clone())))
        .collect()
}

/// Softmax with the max subtracted first.
pub(crate) fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

impl LogLinearModel {
    /// A zero-weight model over the given registry.
    pub fn zeros(registry: FeatureRegistry) -> Self {
        let theta = vec![0.0; registry.len()];
        LogLinearModel { registry, theta }
    }

    pub fn features(&self, frame: &str, lu: &LexicalUnit, x: &ParsedInstruction, inv: Inventory) -> FeatureVector {
        self.registry.vectorize(&extract_features(frame, lu, &x.verb, x, inv.taxonomy))
    }

    /// `p(f, l | v, x)` for every candidate pair of the verb.
    pub fn distribution(&self, x: &ParsedInstruction, inv: Inventory) -> Result<Vec<Scored>, FrameIdError> {
        let pairs = candidate_pairs(inv.lexicon, &x.verb);
        if pairs.is_empty() {
            return Err(FrameIdError::UnknownVerb(x.verb.clone()));
        }
        let scores: Vec<f64> = pairs.iter().map(|(f, l)| self.features(f, l, x, inv).dot(&self.theta)).collect();
        Ok(pairs
            .into_iter()
            .zip(softmax(&scores))
            .map(|((frame, lu), probability)| Scored { frame, lu, probability })
            .collect())
    }

    pub fn probability(
        &self,
        frame: &str,
        lu: &LexicalUnit,
        x: &ParsedInstruction,
        inv: Inventory,
    ) -> Result<f64, FrameIdError> {
        let dist = self.distribution(x, inv)?;
        dist.iter()
            .find(|s| s.frame == frame && &s.lu == lu)
            .map(|s| s.probability)
            .ok_or_else(|| FrameIdError::NotACandidate { frame: frame.to_string(), lu: lu.to_string() })
    }

    /// Frame marginals `sum_l p(f, l)`, sorted by frame name.
    pub fn frame_marginals(&self, x: &ParsedInstruction, inv: Inventory) -> Result<Vec<(String, f64)>, FrameIdError> {
        let mut out: Vec<(String, f64)> = Vec::new();
        for s in self.distribution(x, inv)? {
            match out.last_mut() {
                Some((f, p)) if *f == s.frame => *p += s.probability,
                _ => out.push((s.frame, s.probability)),
            }
        }
        Ok(out)
    }

    /// The frame with the highest marginal; the lexicographically smallest
    /// name wins ties. `None` when the verb has no candidate frames.
    pub fn identify_frame(&self, x: &ParsedInstruction, inv: Inventory) -> Option<(String, f64)> {
        let marginals = self.frame_marginals(x, inv).ok()?;
        let mut best: Option<(String, f64)> = None;
        for (f, p) in marginals {
            if best.as_ref().is_none_or(|(_, bp)| p > *bp) {
                best = Some((f, p));
            }
        }
        best
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(out, "M\t{}", self.theta.len());
        let _ = writeln!(out, "templates\t{}", TEMPLATES.join(","));
        for (i, name) in self.registry.names().iter().enumerate() {
            let _ = writeln!(out, "feature\t{i}\t{name}");
        }
        for (i, w) in self.theta.iter().enumerate() {
            let _ = writeln!(out, "weight\t{i}\t{w:?}");
        }
        out
    }

    pub fn from_text(src: &str) -> Result<Self, FrameIdError> {
        let bad = |line: usize, reason: &str| FrameIdError::ModelFormat { line, reason: reason.to_string() };
        let mut lines = src.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, l)) if l.trim() == MAGIC => {}
            _ => return Err(bad(1, "missing header")),
        }
        let m: usize = match lines.next() {
            Some((n, l)) => l
                .strip_prefix("M\t")
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| bad(n, "expected M\t<count>"))?,
            None => return Err(bad(2, "expected M\t<count>")),
        };
        match lines.next() {
            Some((_, l)) if l.trim() == format!("templates\t{}", TEMPLATES.join(",")) => {}
            Some((n, _)) => return Err(bad(n, "template list does not match this build")),
            None => return Err(bad(3, "missing template list")),
        }
        let mut registry = FeatureRegistry::default();
        let mut theta = vec![f64::NAN; m];
        for (n, line) in lines {
            let parts: Vec<&str> = line.splitn(3, '\t').collect();
            match parts.as_slice() {
                ["feature", i, name] => {
                    let i: usize = i.parse().map_err(|_| bad(n, "bad feature index"))?;
                    if i != registry.len() || i >= m {
                        return Err(bad(n, "feature indices must be consecutive and below M"));
                    }
                    registry.intern(name);
                }
                ["weight", i, w] => {
                    let i: usize = i.parse().map_err(|_| bad(n, "bad weight index"))?;
                    let w: f64 = w.parse().map_err(|_| bad(n, "bad weight"))?;
                    if i >= m || !w.is_finite() {
                        return Err(bad(n, "weight index out of range or not finite"));
                    }
                    theta[i] = w;
                }
                [""] => {}
                _ => return Err(bad(n, "unrecognized line")),
            }
        }
        if registry.len() != m || theta.iter().any(|w| w.is_nan()) {
            return Err(bad(0, "model declares M features but does not list all of them"));
        }
        Ok(LogLinearModel { registry, theta })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_instruction, ParserConfig};

    fn lexicon(rows: &[(&str, &str)]) -> FrameLexicon {
        let mut lex = FrameLexicon::default();
        for (lu, frame) in rows {
            lex.add(LexicalUnit::parse(lu).unwrap(), frame);
        }
        lex
    }

    fn parse(text: &str) -> ParsedInstruction {
        parse_instruction(text, &ParserConfig::default()).unwrap()
    }

    #[test]
    fn zero_weights_are_uniform_over_pairs() {
        let lex = lexicon(&[("take.v", "A"), ("take.v", "B")]);
        let tax = Taxonomy::default();
        let inv = Inventory { lexicon: &lex, taxonomy: &tax };
        let model = LogLinearModel::default();
        let x = parse("take the cup");
        for s in model.distribution(&x, inv).unwrap() {
            assert_eq!(s.probability, 0.5);
        }
        let single = lexicon(&[("take.v", "A")]);
        let inv = Inventory { lexicon: &single, taxonomy: &tax };
        assert_eq!(model.probability("A", &LexicalUnit::new("take", "v"), &x, inv).unwrap(), 1.0);
    }

    #[test]
    fn lu_count_prior_at_zero_weights() {
        let lex = lexicon(&[("take.v", "A"), ("grab.v", "A"), ("take.v", "B")]);
        let tax = Taxonomy::default();
        let inv = Inventory { lexicon: &lex, taxonomy: &tax };
        let (frame, p) = LogLinearModel::default().identify_frame(&parse("take the cup"), inv).unwrap();
        assert_eq!(frame, "A");
        assert!((p - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ties_go_to_the_smaller_name_and_unknown_verbs_abstain() {
        let lex = lexicon(&[("take.v", "Zeta"), ("take.v", "Alpha")]);
        let tax = Taxonomy::default();
        let inv = Inventory { lexicon: &lex, taxonomy: &tax };
        let model = LogLinearModel::default();
        assert_eq!(model.identify_frame(&parse("take the cup"), inv).unwrap().0, "Alpha");
        assert_eq!(model.identify_frame(&parse("xyzzle the cup"), inv), None);
    }

    #[test]
    fn text_format_round_trips_exactly() {
        let mut registry = FeatureRegistry::default();
        registry.intern("bias|frame=A");
        registry.intern("lu=take.v");
        let model = LogLinearModel { registry, theta: vec![0.1 + 0.2, -1e-300] };
        let back = LogLinearModel::from_text(&model.to_text()).unwrap();
        assert_eq!(back, model);
        assert!(LogLinearModel::from_text("nonsense").is_err());
    }
}
