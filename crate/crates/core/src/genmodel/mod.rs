//! Generative sequence models: random pitch and rhythm sequence families,
//! grid-search fitting against empirical entropy ratios, and the scale-size
//! likelihood pipeline.

mod fit;
mod pitch;
mod rhythm;
mod scale;

pub use fit::{
    entropy_ratio_histogram, fit_pitch_model, fit_rhythm_model, pitch_objective, pitch_targets,
    rhythm_objective, rhythm_targets, FitResult, PitchGrid, PitchTarget, RhythmGrid, RhythmTarget,
    DEFAULT_H_IOI_BIN, DEFAULT_N_PER_SETTING, DEFAULT_RATIO_BIN, RATIO_MAX,
};
pub use pitch::{
    generate_pitch_sequence, generate_pitch_sequences, parse_pitch_model, PitchFamily,
    PitchModelSpec, PitchSample, DEFAULT_RANGE_UNIT,
};
pub use rhythm::{
    exponents_to_f64, first_primes, generate_rhythm_sequence, generate_rhythm_sequences,
    metrical_strength, parse_rhythm_model, PrimeExponents, RhythmDist, RhythmModelSpec,
    RhythmSample, ValueSet,
};
pub use scale::{
    interval_distribution, length_distribution, scale_loglikelihood, simulate_scale_entropy,
    smoothed_empirical_density, LengthSource, ScaleLikelihood, ScaleSimParams, ScaleSimResult,
    DEFAULT_ALPHA, DEFAULT_H_BIN, H_MAX, MIN_RELIABLE_SAMPLES,
};

use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::info::powerlaw_probs;

/// Rejection attempts for a single letter before the whole sequence is
/// redrawn.
pub const LOCAL_TRIES: usize = 100;
/// Whole-sequence redraws before generation reports infeasibility.
pub const SEQUENCE_TRIES: usize = 100;

/// How probability mass is spread over an ordered alphabet of letters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LetterDist {
    /// Model suffix `1`.
    Uniform,
    /// Model suffix `2`: power-law weights assigned to letters at random.
    PowerlawRandom,
    /// Model suffix `3`: power-law weights decaying away from the middle.
    PowerlawCentral,
}

impl LetterDist {
    pub const ALL: [LetterDist; 3] = [
        LetterDist::Uniform,
        LetterDist::PowerlawRandom,
        LetterDist::PowerlawCentral,
    ];

    pub fn code(self) -> u8 {
        match self {
            LetterDist::Uniform => 1,
            LetterDist::PowerlawRandom => 2,
            LetterDist::PowerlawCentral => 3,
        }
    }

    pub fn from_code(c: u8) -> Result<Self> {
        match c {
            1 => Ok(LetterDist::Uniform),
            2 => Ok(LetterDist::PowerlawRandom),
            3 => Ok(LetterDist::PowerlawCentral),
            _ => Err(Error::param(format!("unknown distribution code {c}"))),
        }
    }
}

impl fmt::Display for LetterDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

impl FromStr for LetterDist {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.parse::<u8>()
            .map_err(|_| Error::param(format!("unknown distribution `{s}`")))
            .and_then(LetterDist::from_code)
    }
}

/// Weights over `k` ordered letters.
pub(crate) fn letter_weights<R: Rng + ?Sized>(
    k: usize,
    dist: LetterDist,
    exponent: f64,
    rng: &mut R,
) -> Vec<f64> {
    match dist {
        LetterDist::Uniform => vec![1.0; k],
        LetterDist::PowerlawRandom => {
            let mut w = powerlaw_probs(k, exponent);
            w.shuffle(rng);
            w
        }
        LetterDist::PowerlawCentral => {
            let c = (k as f64 - 1.0) / 2.0;
            (0..k)
                .map(|i| (1.0 + (i as f64 - c).abs()).powf(-exponent))
                .collect()
        }
    }
}

pub(crate) fn weighted_index(weights: &[f64]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(weights).map_err(|e| Error::param(format!("invalid letter weights: {e}")))
}

/// Draws letters until `admissible` accepts one, at most [`LOCAL_TRIES`]
/// times.
pub(crate) fn draw_admissible<R: Rng + ?Sized>(
    dist: &WeightedIndex<f64>,
    rng: &mut R,
    mut admissible: impl FnMut(usize) -> bool,
) -> Option<usize> {
    (0..LOCAL_TRIES)
        .map(|_| dist.sample(rng))
        .find(|&i| admissible(i))
}

fn check_exponent(exponent: f64) -> Result<()> {
    if exponent.is_finite() && exponent >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!(
            "exponent must be finite and >= 0, got {exponent}"
        )))
    }
}
