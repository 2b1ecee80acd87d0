use std::fmt;
use std::str::FromStr;

use rand::distr::Distribution as _;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{
    check_exponent, draw_admissible, letter_weights, weighted_index, LetterDist, SEQUENCE_TRIES,
};
use crate::error::{Error, Result};
use crate::seeding::derive_seed;
use crate::viewpoints::{chroma_of, differences, scale_degrees};

/// Semitones of pitch half-range per unit of `O` for these models.
pub const DEFAULT_RANGE_UNIT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PitchFamily {
    /// Pitches drawn from a fixed random scale.
    S,
    /// Unconstrained semitone intervals in `[-A, A]`.
    I,
    /// Intervals in scale steps `[-A, A]` over a fixed scale containing 0.
    IS,
}

impl PitchFamily {
    pub const ALL: [PitchFamily; 3] = [PitchFamily::S, PitchFamily::I, PitchFamily::IS];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchModelSpec {
    pub family: PitchFamily,
    pub dist: LetterDist,
    pub alphabet: usize,
    pub length: usize,
    /// Pitch-range parameter `O`.
    pub range: f64,
    pub exponent: f64,
    /// Pitches stay within `±floor(range_unit * range)` semitones of 0.
    pub range_unit: f64,
}

impl PitchModelSpec {
    pub fn new(
        family: PitchFamily,
        dist: LetterDist,
        alphabet: usize,
        length: usize,
        range: f64,
        exponent: f64,
    ) -> Self {
        PitchModelSpec {
            family,
            dist,
            alphabet,
            length,
            range,
            exponent,
            range_unit: DEFAULT_RANGE_UNIT,
        }
    }

    /// All nine family × distribution combinations.
    pub fn models() -> Vec<(PitchFamily, LetterDist)> {
        PitchFamily::ALL
            .iter()
            .flat_map(|&f| LetterDist::ALL.iter().map(move |&d| (f, d)))
            .collect()
    }

    pub fn name(&self) -> String {
        model_name(self.family, self.dist)
    }

    pub fn half_width(&self) -> i64 {
        (self.range_unit * self.range).floor() as i64
    }

    pub fn validate(&self) -> Result<()> {
        check_exponent(self.exponent)?;
        if self.length < 1 {
            return Err(Error::param("pitch model length must be at least 1"));
        }
        if !(self.range.is_finite() && self.range >= 0.0 && self.range_unit > 0.0) {
            return Err(Error::param(format!("invalid pitch range {}", self.range)));
        }
        let max_a = if self.family == PitchFamily::I {
            usize::MAX
        } else {
            12
        };
        if !(1..=max_a).contains(&self.alphabet) {
            return Err(Error::param(format!(
                "alphabet size {} invalid for family {:?}",
                self.alphabet, self.family
            )));
        }
        Ok(())
    }
}

pub(crate) fn model_name(family: PitchFamily, dist: LetterDist) -> String {
    format!("{family:?}{}", dist.code())
}

impl fmt::Display for PitchFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Parses a model name such as `IS3` into family and distribution.
impl FromStr for PitchFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "S" => Ok(PitchFamily::S),
            "I" => Ok(PitchFamily::I),
            "IS" => Ok(PitchFamily::IS),
            _ => Err(Error::param(format!("unknown pitch model family `{s}`"))),
        }
    }
}

pub fn parse_pitch_model(name: &str) -> Result<(PitchFamily, LetterDist)> {
    let split = name.len().saturating_sub(1);
    if !name.is_char_boundary(split) || name.is_empty() {
        return Err(Error::param(format!("unknown pitch model `{name}`")));
    }
    Ok((name[..split].parse()?, name[split..].parse()?))
}

/// One generated sequence with its derived viewpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PitchSample {
    pub pitch: Vec<i64>,
    pub chroma: Vec<i64>,
    pub mint: Vec<i64>,
    pub sdeg: Vec<i64>,
    pub sint: Vec<i64>,
}

impl PitchSample {
    pub fn from_pitches(pitch: Vec<i64>) -> Self {
        let chroma: Vec<i64> = pitch.iter().map(|&p| chroma_of(p)).collect();
        let sdeg = scale_degrees(&chroma);
        PitchSample {
            mint: differences(&pitch),
            sint: differences(&sdeg),
            chroma,
            sdeg,
            pitch,
        }
    }
}

/// Random scale of `a` chromas; `with_tonic` forces chroma 0 in.
fn random_scale<R: Rng + ?Sized>(a: usize, with_tonic: bool, rng: &mut R) -> Vec<i64> {
    let mut scale: Vec<i64> = if with_tonic {
        let mut s: Vec<i64> = index::sample(rng, 11, a - 1)
            .into_iter()
            .map(|i| i as i64 + 1)
            .collect();
        s.push(0);
        s
    } else {
        index::sample(rng, 12, a)
            .into_iter()
            .map(|i| i as i64)
            .collect()
    };
    scale.sort_unstable();
    scale
}

fn in_range_scale_pitches(scale: &[i64], hw: i64) -> Vec<i64> {
    (-hw..=hw)
        .filter(|p| scale.contains(&chroma_of(*p)))
        .collect()
}

fn try_sequence<R: Rng + ?Sized>(spec: &PitchModelSpec, rng: &mut R) -> Result<Option<Vec<i64>>> {
    let hw = spec.half_width();
    let a = spec.alphabet;
    match spec.family {
        PitchFamily::S => {
            let letters = in_range_scale_pitches(&random_scale(a, false, rng), hw);
            if letters.is_empty() {
                return Ok(None);
            }
            let dist = weighted_index(&letter_weights(
                letters.len(),
                spec.dist,
                spec.exponent,
                rng,
            ))?;
            Ok(Some(
                (0..spec.length)
                    .map(|_| letters[dist.sample(rng)])
                    .collect(),
            ))
        }
        PitchFamily::I => {
            let span = a as i64;
            let dist = weighted_index(&letter_weights(2 * a + 1, spec.dist, spec.exponent, rng))?;
            let mut pitch = vec![0i64];
            let mut p = 0i64;
            for _ in 0..spec.length {
                let Some(i) = draw_admissible(&dist, rng, |i| (p + i as i64 - span).abs() <= hw)
                else {
                    return Ok(None);
                };
                p += i as i64 - span;
                pitch.push(p);
            }
            Ok(Some(pitch))
        }
        PitchFamily::IS => {
            let positions = in_range_scale_pitches(&random_scale(a, true, rng), hw);
            let span = a as i64;
            let n_pos = positions.len() as i64;
            let dist = weighted_index(&letter_weights(2 * a + 1, spec.dist, spec.exponent, rng))?;
            let mut at = positions
                .binary_search(&0)
                .expect("0 is in the scale and in range") as i64;
            let mut pitch = vec![0i64];
            for _ in 0..spec.length {
                let Some(i) =
                    draw_admissible(&dist, rng, |i| (0..n_pos).contains(&(at + i as i64 - span)))
                else {
                    return Ok(None);
                };
                at += i as i64 - span;
                pitch.push(positions[at as usize]);
            }
            Ok(Some(pitch))
        }
    }
}

/// One sequence: `length` pitches for family S, `length` intervals from a
/// start pitch of 0 for families I and IS.
pub fn generate_pitch_sequence<R: Rng + ?Sized>(
    spec: &PitchModelSpec,
    rng: &mut R,
) -> Result<PitchSample> {
    spec.validate()?;
    for _ in 0..SEQUENCE_TRIES {
        if let Some(p) = try_sequence(spec, rng)? {
            return Ok(PitchSample::from_pitches(p));
        }
    }
    Err(Error::Infeasible(format!(
        "{} with A={} O={} found no legal sequence in {SEQUENCE_TRIES} attempts",
        spec.name(),
        spec.alphabet,
        spec.range
    )))
}

/// `n` sequences; sequence `i` uses a stream derived from `(seed, i)`.
pub fn generate_pitch_sequences(
    spec: &PitchModelSpec,
    n: usize,
    seed: u64,
) -> Result<Vec<PitchSample>> {
    spec.validate()?;
    (0..n)
        .into_par_iter()
        .map(|i| {
            generate_pitch_sequence(
                spec,
                &mut ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64)),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::sequence_entropy;

    #[test]
    fn s1_with_one_letter_is_constant() {
        let spec = PitchModelSpec::new(PitchFamily::S, LetterDist::Uniform, 1, 30, 3.0, 1.0);
        for s in generate_pitch_sequences(&spec, 50, 1).unwrap() {
            assert_eq!(sequence_entropy(&s.chroma), 0.0);
        }
    }

    #[test]
    fn s_family_stays_on_scale() {
        let spec = PitchModelSpec::new(PitchFamily::S, LetterDist::PowerlawRandom, 5, 40, 3.0, 1.0);
        for s in generate_pitch_sequences(&spec, 100, 2).unwrap() {
            let distinct: std::collections::BTreeSet<_> = s.chroma.iter().collect();
            assert!(distinct.len() <= 5);
            assert!(s.pitch.iter().all(|p| p.abs() <= 6));
        }
    }

    #[test]
    fn i3_prefers_small_steps() {
        let spec =
            PitchModelSpec::new(PitchFamily::I, LetterDist::PowerlawCentral, 6, 30, 3.0, 4.0);
        let mut mags: Vec<i64> = generate_pitch_sequences(&spec, 2000, 3)
            .unwrap()
            .iter()
            .flat_map(|s| s.mint.iter().map(|i| i.abs()))
            .collect();
        mags.sort_unstable();
        assert!(mags[mags.len() / 2] <= 2);
    }

    #[test]
    fn is_family_lands_on_scale() {
        let spec = PitchModelSpec::new(PitchFamily::IS, LetterDist::Uniform, 7, 40, 3.0, 1.0);
        for s in generate_pitch_sequences(&spec, 100, 4).unwrap() {
            assert_eq!(s.pitch[0], 0);
            assert_eq!(s.pitch.len(), 41);
            let distinct: std::collections::BTreeSet<_> = s.chroma.iter().collect();
            assert!(distinct.len() <= 7);
        }
    }

    #[test]
    fn deterministic_by_seed() {
        let spec =
            PitchModelSpec::new(PitchFamily::IS, LetterDist::PowerlawRandom, 7, 20, 2.0, 1.5);
        assert_eq!(
            generate_pitch_sequences(&spec, 20, 9).unwrap(),
            generate_pitch_sequences(&spec, 20, 9).unwrap()
        );
    }

    #[test]
    fn model_names() {
        let names: Vec<String> = PitchModelSpec::models()
            .iter()
            .map(|&(f, d)| model_name(f, d))
            .collect();
        assert_eq!(
            names,
            ["S1", "S2", "S3", "I1", "I2", "I3", "IS1", "IS2", "IS3"]
        );
        assert_eq!(
            parse_pitch_model("IS3").unwrap(),
            (PitchFamily::IS, LetterDist::PowerlawCentral)
        );
        assert!(parse_pitch_model("X1").is_err());
    }
}
