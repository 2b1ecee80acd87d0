use std::collections::{BTreeMap, BTreeSet};

use rand::distr::Distribution as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{draw_admissible, weighted_index, SEQUENCE_TRIES};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::info::{distribution_of, entropy_from_counts, Distribution};
use crate::repetition::{remove_repetition, DEFAULT_L_MIN};
use crate::seeding::derive_seed;
use crate::stats::{delta_on_grid, Grid, Kde};
use crate::viewpoints::{chroma_of, extract_viewpoint, ViewpointKind};

/// Upper end of the entropy axis, in bits.
pub const H_MAX: f64 = 5.0;
pub const DEFAULT_H_BIN: f64 = 0.005;
pub const DEFAULT_ALPHA: f64 = 0.999;
/// Scale sizes with fewer simulated samples get no likelihood.
pub const MIN_RELIABLE_SAMPLES: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleSimParams {
    /// Signed semitone intervals.
    pub intervals: Distribution<i64>,
    /// Number of intervals drawn per sequence.
    pub lengths: Distribution<usize>,
    /// Range widths in octaves, cycled over sequence indices.
    pub o_values: Vec<f64>,
    pub n_sequences: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleSimResult {
    /// Chroma entropies grouped by chroma alphabet size, in sequence order.
    pub per_a: BTreeMap<usize, Vec<f64>>,
    pub n_sequences: usize,
    pub o_values: Vec<f64>,
}

impl ScaleSimResult {
    /// Fraction of sequences with scale size `a` whose entropy is below
    /// `threshold`.
    pub fn prob_below(&self, a: usize, threshold: f64) -> Option<f64> {
        let s = self.per_a.get(&a)?;
        Some(s.iter().filter(|&&h| h < threshold).count() as f64 / s.len() as f64)
    }
}

fn simulate_one(
    params: &ScaleSimParams,
    intervals: &rand::distr::weighted::WeightedIndex<f64>,
    lengths: &rand::distr::weighted::WeightedIndex<f64>,
    seed: u64,
    i: usize,
) -> Result<(usize, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
    let o = params.o_values[i % params.o_values.len()];
    let hw = (6.0 * o).floor() as i64;
    let steps = params.intervals.alphabet();
    let len = params.lengths.alphabet()[lengths.sample(&mut rng)];
    'retry: for _ in 0..SEQUENCE_TRIES {
        let mut counts = [0u64; 12];
        let mut p = 0i64;
        counts[0] = 1;
        for _ in 0..len {
            let Some(k) = draw_admissible(intervals, &mut rng, |k| (p + steps[k]).abs() <= hw)
            else {
                continue 'retry;
            };
            p += steps[k];
            counts[chroma_of(p) as usize] += 1;
        }
        let used: Vec<u64> = counts.into_iter().filter(|&c| c > 0).collect();
        return Ok((used.len(), entropy_from_counts(&used)));
    }
    Err(Error::Infeasible(format!(
        "no interval sequence of length {len} stays within ±{hw} semitones"
    )))
}

/// Draws interval sequences starting at pitch 0 inside a window of `12·O`
/// semitones and records the chroma alphabet size and entropy of each.
///
/// Sequence `i` uses a stream derived from `(seed, i)`, so results do not
/// depend on the thread count.
pub fn simulate_scale_entropy(params: &ScaleSimParams, seed: u64) -> Result<ScaleSimResult> {
    if params.o_values.is_empty()
        || params
            .o_values
            .iter()
            .any(|o| !(o.is_finite() && *o >= 0.0))
    {
        return Err(Error::param(
            "O values must be a nonempty list of nonnegative numbers",
        ));
    }
    let intervals = weighted_index(params.intervals.probs())?;
    let lengths = weighted_index(params.lengths.probs())?;
    let samples: Vec<(usize, f64)> = (0..params.n_sequences)
        .into_par_iter()
        .map(|i| simulate_one(params, &intervals, &lengths, seed, i))
        .collect::<Result<_>>()?;
    let mut per_a: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (a, h) in samples {
        per_a.entry(a).or_default().push(h);
    }
    Ok(ScaleSimResult {
        per_a,
        n_sequences: params.n_sequences,
        o_values: params.o_values.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthSource {
    /// Length after repetition removal of the chroma sequence.
    NonRepeated,
    Raw,
}

/// Empirical distribution of chroma-sequence lengths.
pub fn length_distribution(
    corpora: &[Corpus],
    source: LengthSource,
) -> Result<Distribution<usize>> {
    let mut lengths = Vec::new();
    for m in corpora.iter().flat_map(Corpus::melodies) {
        let chroma = extract_viewpoint(m, ViewpointKind::Chroma)?.symbols;
        lengths.push(match source {
            LengthSource::Raw => chroma.len(),
            LengthSource::NonRepeated => remove_repetition(&chroma, DEFAULT_L_MIN)?.l_nr,
        });
    }
    distribution_of(&lengths)
}

/// Pooled distribution of melodic intervals.
pub fn interval_distribution(corpora: &[Corpus]) -> Result<Distribution<i64>> {
    let mut all = Vec::new();
    for m in corpora.iter().flat_map(Corpus::melodies) {
        let p = m.pitches();
        all.extend(p.windows(2).map(|w| w[1] - w[0]));
    }
    distribution_of(&all)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleLikelihood {
    pub n_samples: usize,
    /// `None` when fewer than [`MIN_RELIABLE_SAMPLES`] were simulated.
    pub log_likelihood: Option<f64>,
}

/// KDE on the grid, or a point mass when the samples have no spread.
fn density(samples: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    let distinct: BTreeSet<u64> = samples.iter().map(|h| h.to_bits()).collect();
    if distinct.len() < 2 {
        return Ok(delta_on_grid(samples[0], grid));
    }
    Ok(Kde::silverman(samples)?.on_grid(grid))
}

/// Mixes the empirical density with a uniform prior over `[0, H_MAX]`.
pub fn smoothed_empirical_density(
    empirical_h: &[f64],
    alpha: f64,
    grid: &Grid,
) -> Result<Vec<f64>> {
    let p = density(empirical_h, grid)?;
    Ok(p.into_iter()
        .map(|v| alpha * v + (1.0 - alpha) / H_MAX)
        .collect())
}

/// Per-melody log-likelihood, in bits, that sequences with each scale size
/// produced the empirical entropy distribution.
pub fn scale_loglikelihood(
    sim: &ScaleSimResult,
    empirical_h: &[f64],
    alpha: f64,
    bin_width: f64,
) -> Result<BTreeMap<usize, ScaleLikelihood>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::param(format!(
            "alpha must be in (0, 1], got {alpha}"
        )));
    }
    if empirical_h.is_empty() {
        return Err(Error::param("empirical entropy list is empty"));
    }
    let grid = Grid::new(0.0, H_MAX, bin_width)?;
    let p_prime = smoothed_empirical_density(empirical_h, alpha, &grid)?;
    let log_p: Vec<f64> = p_prime.iter().map(|v| v.log2()).collect();
    let mut out = BTreeMap::new();
    for (&a, samples) in &sim.per_a {
        let log_likelihood = if samples.len() < MIN_RELIABLE_SAMPLES {
            None
        } else {
            let q = density(samples, &grid)?;
            Some(
                q.iter()
                    .zip(&log_p)
                    .map(|(q, lp)| if *q > 0.0 { q * lp } else { 0.0 })
                    .sum::<f64>()
                    * grid.step,
            )
        };
        out.insert(
            a,
            ScaleLikelihood {
                n_samples: samples.len(),
                log_likelihood,
            },
        );
    }
    Ok(out)
}
