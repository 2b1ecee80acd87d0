//! Variable-order Markov prediction (PPM, escape method C with exclusion) and
//! the within-corpus repetition measure built on it.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::Hash;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::seeding::derive_seed_from_str;
use crate::viewpoints::{extract_viewpoint, Symbol, ViewpointKind};

pub const DEFAULT_MAX_ORDER: usize = 5;

#[derive(Debug, Clone)]
pub struct PpmModel<T> {
    max_order: usize,
    alphabet: Vec<T>,
    index: HashMap<T, usize>,
    /// context (as alphabet indices, oldest first) -> next-symbol counts
    contexts: HashMap<Vec<usize>, BTreeMap<usize, u64>>,
}

impl<T: Ord + Hash + Clone + std::fmt::Debug> PpmModel<T> {
    /// An untrained model over `alphabet`; it predicts uniformly.
    pub fn new(max_order: usize, alphabet: &[T]) -> Result<Self> {
        let alphabet: Vec<T> = alphabet
            .iter()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if alphabet.is_empty() {
            return Err(Error::param("PPM alphabet is empty"));
        }
        let index = alphabet
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Ok(PpmModel {
            max_order,
            alphabet,
            index,
            contexts: HashMap::new(),
        })
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn alphabet(&self) -> &[T] {
        &self.alphabet
    }

    fn encode(&self, seq: &[T]) -> Result<Vec<usize>> {
        seq.iter()
            .map(|s| {
                self.index
                    .get(s)
                    .copied()
                    .ok_or_else(|| Error::UnknownSymbol(format!("{s:?}")))
            })
            .collect()
    }

    /// Adds every n-gram up to the maximum order from one sequence.
    pub fn train_sequence(&mut self, seq: &[T]) -> Result<()> {
        let coded = self.encode(seq)?;
        for i in 0..coded.len() {
            for k in 0..=self.max_order.min(i) {
                let ctx = coded[i - k..i].to_vec();
                *self
                    .contexts
                    .entry(ctx)
                    .or_default()
                    .entry(coded[i])
                    .or_insert(0) += 1;
            }
        }
        Ok(())
    }

    /// Raw counts following `context` (exact length match), keyed by symbol.
    pub fn counts(&self, context: &[T]) -> Option<BTreeMap<T, u64>> {
        let ctx = self.encode(context).ok()?;
        self.contexts.get(&ctx).map(|t| {
            t.iter()
                .map(|(&s, &c)| (self.alphabet[s].clone(), c))
                .collect()
        })
    }

    fn distribution_coded(&self, ctx: &[usize]) -> Vec<f64> {
        let a = self.alphabet.len();
        let mut probs = vec![0.0; a];
        let mut excluded = vec![false; a];
        let mut remaining = a;
        let mut mass = 1.0;
        let top = self.max_order.min(ctx.len());
        for k in (0..=top).rev() {
            let Some(table) = self.contexts.get(&ctx[ctx.len() - k..]) else {
                continue;
            };
            let (mut n, mut e) = (0u64, 0usize);
            for (&s, &c) in table {
                if !excluded[s] {
                    n += c;
                    e += 1;
                }
            }
            if n == 0 {
                continue;
            }
            // every remaining symbol is seen here: nothing left to escape to
            let denom = if e == remaining {
                n as f64
            } else {
                (n + e as u64) as f64
            };
            for (&s, &c) in table {
                if !excluded[s] {
                    probs[s] += mass * c as f64 / denom;
                    excluded[s] = true;
                }
            }
            remaining -= e;
            mass *= if remaining == 0 {
                0.0
            } else {
                e as f64 / denom
            };
            if remaining == 0 {
                break;
            }
        }
        if remaining > 0 && mass > 0.0 {
            let share = mass / remaining as f64;
            for (p, ex) in probs.iter_mut().zip(&excluded) {
                if !ex {
                    *p += share;
                }
            }
        }
        probs
    }

    /// Predictive distribution over `alphabet()` after `context`.
    pub fn predictive_distribution(&self, context: &[T]) -> Result<Vec<f64>> {
        Ok(self.distribution_coded(&self.encode(context)?))
    }

    pub fn probability(&self, context: &[T], symbol: &T) -> Result<f64> {
        let s = *self
            .index
            .get(symbol)
            .ok_or_else(|| Error::UnknownSymbol(format!("{symbol:?}")))?;
        Ok(self.predictive_distribution(context)?[s])
    }
}

/// Trains a model on all `sequences`.
pub fn train_ppm<T: Ord + Hash + Clone + std::fmt::Debug, S: AsRef<[T]>>(
    sequences: &[S],
    max_order: usize,
    alphabet: &[T],
) -> Result<PpmModel<T>> {
    let mut model = PpmModel::new(max_order, alphabet)?;
    for s in sequences {
        model.train_sequence(s.as_ref())?;
    }
    Ok(model)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcResult {
    pub per_symbol_bits: Vec<f64>,
    pub mean_bits: f64,
}

/// Information content `-log2 P(x_i | preceding symbols)` of each symbol.
pub fn information_content<T: Ord + Hash + Clone + std::fmt::Debug>(
    model: &PpmModel<T>,
    seq: &[T],
) -> Result<IcResult> {
    if seq.is_empty() {
        return Err(Error::Length(
            "information content of an empty sequence".into(),
        ));
    }
    let coded = model.encode(seq)?;
    let per_symbol_bits: Vec<f64> = (0..coded.len())
        .map(|i| {
            let lo = i.saturating_sub(model.max_order);
            let p = model.distribution_coded(&coded[lo..i])[coded[i]];
            -p.log2()
        })
        .collect();
    let mean_bits = per_symbol_bits.iter().sum::<f64>() / per_symbol_bits.len() as f64;
    Ok(IcResult {
        per_symbol_bits,
        mean_bits,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpmRepetitionParams {
    pub n_train: usize,
    pub truncate: usize,
    pub n_shuffle_reps: usize,
    pub max_order: usize,
}

impl Default for PpmRepetitionParams {
    fn default() -> Self {
        PpmRepetitionParams {
            n_train: 10,
            truncate: 50,
            n_shuffle_reps: 10,
            max_order: DEFAULT_MAX_ORDER,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WithinCorpusRepetition {
    pub mean_ic: f64,
    pub mean_ic_shuffled: f64,
    /// `mean_ic_shuffled - mean_ic`.
    pub repetition_bits: f64,
    pub n_targets: usize,
}

/// Per-target IC from real vs within-melody-shuffled training melodies.
fn target_ic(
    target: &[Symbol],
    pool: &[&Vec<Symbol>],
    alphabet: &[Symbol],
    params: &PpmRepetitionParams,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64)> {
    let picks = index::sample(rng, pool.len(), params.n_train);
    let training: Vec<&Vec<Symbol>> = picks.iter().map(|i| pool[i]).collect();
    let model = train_ppm(&training, params.max_order, alphabet)?;
    let ic = information_content(&model, target)?.mean_bits;

    let mut ic_r = 0.0;
    for _ in 0..params.n_shuffle_reps {
        let shuffled: Vec<Vec<Symbol>> = training
            .iter()
            .map(|s| {
                let mut v = (*s).clone();
                v.shuffle(rng);
                v
            })
            .collect();
        let model = train_ppm(&shuffled, params.max_order, alphabet)?;
        ic_r += information_content(&model, target)?.mean_bits;
    }
    if params.n_shuffle_reps > 0 {
        ic_r /= params.n_shuffle_reps as f64;
    }
    Ok((ic, ic_r))
}

/// Within-corpus repetition: how much better a PPM model trained on other
/// melodies of the corpus predicts each melody than one trained on the same
/// melodies with their symbols shuffled.
///
/// Every target draws its training set from a stream seeded by `seed` and
/// the target's id, so results do not depend on melody order or thread count.
pub fn within_corpus_repetition(
    corpus: &Corpus,
    kind: ViewpointKind,
    params: &PpmRepetitionParams,
    seed: u64,
) -> Result<WithinCorpusRepetition> {
    if params.n_train == 0 {
        return Err(Error::param("n_train must be positive"));
    }
    if params.truncate == 0 {
        return Err(Error::param("truncate must be positive"));
    }
    let mut seqs: Vec<(String, Vec<Symbol>)> = Vec::new();
    for m in corpus.melodies() {
        let Ok(vp) = extract_viewpoint(m, kind) else {
            continue;
        };
        let mut s = vp.symbols;
        s.truncate(params.truncate);
        if !s.is_empty() {
            seqs.push((m.id().to_string(), s));
        }
    }
    seqs.sort_by(|a, b| a.0.cmp(&b.0));
    if seqs.len() < params.n_train + 1 {
        return Err(Error::TooFewMelodies {
            corpus: corpus.id().to_string(),
            needed: params.n_train + 1,
            found: seqs.len(),
        });
    }
    let alphabet: Vec<Symbol> = seqs
        .iter()
        .flat_map(|(_, s)| s.iter().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let results: Vec<(f64, f64)> = (0..seqs.len())
        .into_par_iter()
        .map(|t| {
            let (id, target) = &seqs[t];
            let pool: Vec<&Vec<Symbol>> = seqs
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != t)
                .map(|(_, (_, s))| s)
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed_from_str(seed, id));
            target_ic(target, &pool, &alphabet, params, &mut rng)
        })
        .collect::<Result<_>>()?;

    let n = results.len() as f64;
    let mean_ic = results.iter().map(|r| r.0).sum::<f64>() / n;
    let mean_ic_shuffled = results.iter().map(|r| r.1).sum::<f64>() / n;
    Ok(WithinCorpusRepetition {
        mean_ic,
        mean_ic_shuffled,
        repetition_bits: mean_ic_shuffled - mean_ic,
        n_targets: results.len(),
    })
}
