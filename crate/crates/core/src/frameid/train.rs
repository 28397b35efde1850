//! Batch gradient ascent on the marginal log-likelihood of the gold frames.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::features::{extract_features, FeatureRegistry};
use super::model::{candidate_pairs, softmax, Inventory, LogLinearModel};
use super::{AnnotatedExample, FrameIdError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingConfig {
    pub passes: usize,
    pub learning_rate: f64,
    pub l2_penalty: f64,
    pub seed: u64,
}

impl TrainingConfig {
    pub fn new(passes: usize, learning_rate: f64, l2_penalty: f64, seed: u64) -> Result<Self, FrameIdError> {
        let c = TrainingConfig { passes, learning_rate, l2_penalty, seed };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), FrameIdError> {
        if self.passes == 0 {
            return Err(FrameIdError::Config("passes must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(FrameIdError::Config("learning rate must be positive".into()));
        }
        if !(self.l2_penalty >= 0.0 && self.l2_penalty.is_finite()) {
            return Err(FrameIdError::Config("l2 penalty must be non-negative".into()));
        }
        Ok(())
    }
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig { passes: 50, learning_rate: 0.1, l2_penalty: 0.0, seed: 0 }
    }
}

/// Log-likelihood trace of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub initial_log_likelihood: f64,
    /// Objective after each pass.
    pub pass_log_likelihood: Vec<f64>,
    pub training_accuracy: f64,
}

impl TrainReport {
    pub fn final_log_likelihood(&self) -> f64 {
        *self.pass_log_likelihood.last().unwrap_or(&self.initial_log_likelihood)
    }
}

struct Prepared {
    /// Feature indices per candidate pair.
    pairs: Vec<Vec<usize>>,
    gold: Vec<bool>,
    /// Rank of each pair's frame among the verb's candidate frames.
    frame_of: Vec<usize>,
}

/// The training objective over a fixed corpus, with a registry built from
/// every candidate pair of every example.
pub struct Objective {
    examples: Vec<Prepared>,
    /// For each feature, the `(example, pair)` positions where it fires.
    postings: Vec<Vec<(usize, usize)>>,
    pub registry: FeatureRegistry,
    pub l2_penalty: f64,
}

impl Objective {
    pub fn new(corpus: &[AnnotatedExample], inv: Inventory, l2_penalty: f64) -> Result<Self, FrameIdError> {
        if corpus.is_empty() {
            return Err(FrameIdError::EmptyCorpus);
        }
        let mut registry = FeatureRegistry::default();
        let mut examples = Vec::with_capacity(corpus.len());
        for ex in corpus {
            let pairs = candidate_pairs(inv.lexicon, &ex.verb);
            if !pairs.iter().any(|(f, _)| *f == ex.frame) {
                return Err(FrameIdError::GoldNotCandidate { verb: ex.verb.clone(), frame: ex.frame.clone() });
            }
            let gold = pairs.iter().map(|(f, _)| *f == ex.frame).collect();
            let mut frame_of = Vec::with_capacity(pairs.len());
            for (k, (f, _)) in pairs.iter().enumerate() {
                let prev = frame_of.last().copied();
                frame_of.push(match prev {
                    Some(r) if pairs[k - 1].0 == *f => r,
                    Some(r) => r + 1,
                    None => 0,
                });
            }
            let pairs = pairs
                .iter()
                .map(|(f, l)| registry.vectorize_growing(&extract_features(f, l, &ex.verb, &ex.sentence, inv.taxonomy)).indices)
                .collect();
            examples.push(Prepared { pairs, gold, frame_of });
        }
        let mut postings = vec![Vec::new(); registry.len()];
        for (j, ex) in examples.iter().enumerate() {
            for (k, feats) in ex.pairs.iter().enumerate() {
                for &m in feats {
                    postings[m].push((j, k));
                }
            }
        }
        Ok(Objective { examples, postings, registry, l2_penalty })
    }

    pub fn dimension(&self) -> usize {
        self.registry.len()
    }

    fn scores(ex: &Prepared, theta: &[f64]) -> Vec<f64> {
        ex.pairs.iter().map(|f| f.iter().map(|&m| theta[m]).sum()).collect()
    }

    /// `sum_j log sum_{l in L_{f_j}} p(f_j, l | v_j, x_j) - (l2/2)|theta|^2`.
    pub fn value(&self, theta: &[f64]) -> f64 {
        let mut total = 0.0;
        for ex in &self.examples {
            let s = Self::scores(ex, theta);
            let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let all: f64 = s.iter().map(|v| (v - max).exp()).sum();
            let gold: f64 = s.iter().zip(&ex.gold).filter(|(_, g)| **g).map(|(v, _)| (v - max).exp()).sum();
            total += gold.ln() - all.ln();
        }
        total - 0.5 * self.l2_penalty * theta.iter().map(|w| w * w).sum::<f64>()
    }

    /// Gradient of [`Objective::value`]. Each coordinate sums only over the
    /// postings of its feature, visiting examples in `order`.
    pub fn gradient(&self, theta: &[f64], order: &[usize]) -> Vec<f64> {
        // coefficient of each pair: p(l | f_j) restricted to gold minus p(f, l)
        let coef: Vec<Vec<f64>> = self
            .examples
            .iter()
            .map(|ex| {
                let p = softmax(&Self::scores(ex, theta));
                let gold_mass: f64 = p.iter().zip(&ex.gold).filter(|(_, g)| **g).map(|(v, _)| v).sum();
                p.iter().zip(&ex.gold).map(|(&pk, &g)| if g { pk / gold_mass } else { 0.0 } - pk).collect()
            })
            .collect();
        let mut rank = vec![0usize; self.examples.len()];
        for (r, &j) in order.iter().enumerate() {
            rank[j] = r;
        }
        self.postings
            .iter()
            .enumerate()
            .map(|(m, posting)| {
                let mut visits: Vec<&(usize, usize)> = posting.iter().collect();
                visits.sort_by_key(|(j, k)| (rank[*j], *k));
                visits.iter().map(|(j, k)| coef[*j][*k]).sum::<f64>() - self.l2_penalty * theta[m]
            })
            .collect()
    }

    /// Share of examples whose predicted frame (ties to the earlier name) is gold.
    pub fn accuracy(&self, theta: &[f64]) -> f64 {
        let correct = self
            .examples
            .iter()
            .filter(|ex| {
                let p = softmax(&Self::scores(ex, theta));
                let frames = ex.frame_of.last().map_or(0, |r| r + 1);
                let mut mass = vec![0.0; frames];
                for (k, pk) in p.iter().enumerate() {
                    mass[ex.frame_of[k]] += pk;
                }
                let mut best = 0;
                for (r, m) in mass.iter().enumerate() {
                    if *m > mass[best] {
                        best = r;
                    }
                }
                ex.frame_of.iter().zip(&ex.gold).any(|(r, g)| *g && *r == best)
            })
            .count();
        correct as f64 / self.examples.len() as f64
    }
}

pub fn train(
    corpus: &[AnnotatedExample],
    config: TrainingConfig,
    inv: Inventory,
) -> Result<(LogLinearModel, TrainReport), FrameIdError> {
    config.validate()?;
    let objective = Objective::new(corpus, inv, config.l2_penalty)?;
    let mut theta = vec![0.0; objective.dimension()];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let initial = objective.value(&theta);
    let mut trace = Vec::with_capacity(config.passes);
    for pass in 0..config.passes {
        order.shuffle(&mut rng);
        let grad = objective.gradient(&theta, &order);
        for (w, g) in theta.iter_mut().zip(&grad) {
            *w += config.learning_rate * g;
        }
        let ll = objective.value(&theta);
        if !ll.is_finite() || theta.iter().any(|w| !w.is_finite()) {
            return Err(FrameIdError::NonFinite { pass: pass + 1 });
        }
        trace.push(ll);
    }
    let accuracy = objective.accuracy(&theta);
    let model = LogLinearModel { registry: objective.registry, theta };
    Ok((model, TrainReport { initial_log_likelihood: initial, pass_log_likelihood: trace, training_accuracy: accuracy }))
}
