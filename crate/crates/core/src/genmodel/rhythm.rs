use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Zero};
use rand::distr::Distribution as _;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{check_exponent, letter_weights, weighted_index, LetterDist};
use crate::error::{Error, Result};
use crate::info::sequence_entropy;
use crate::seeding::derive_seed;

/// Rhythm values are products of primes; a value is stored as its exponent
/// vector over the value set's primes, which keeps arbitrarily long ratio
/// chains exact.
pub type PrimeExponents = Vec<i32>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValueSet {
    SimpleIoi,
    ComplexIoi,
    SimpleRatio,
    ComplexRatio,
}

impl ValueSet {
    pub const ALL: [ValueSet; 4] = [
        ValueSet::SimpleIoi,
        ValueSet::ComplexIoi,
        ValueSet::SimpleRatio,
        ValueSet::ComplexRatio,
    ];

    pub fn code(self) -> &'static str {
        match self {
            ValueSet::SimpleIoi => "SI",
            ValueSet::ComplexIoi => "CI",
            ValueSet::SimpleRatio => "SR",
            ValueSet::ComplexRatio => "CR",
        }
    }

    pub fn is_ratio(self) -> bool {
        matches!(self, ValueSet::SimpleRatio | ValueSet::ComplexRatio)
    }

    pub fn is_simple(self) -> bool {
        matches!(self, ValueSet::SimpleIoi | ValueSet::SimpleRatio)
    }

    /// Primes spanned by a value set of size `a`.
    pub fn primes(self, a: usize) -> Vec<u64> {
        if self.is_simple() {
            vec![2]
        } else {
            first_primes(a.saturating_sub(1))
        }
    }

    /// The `a` values in ascending numeric order. Simple sets are
    /// `2^(i-k)` with `k = floor((a-1)/2)`; complex sets are 1 plus
    /// alternating primes and prime reciprocals.
    pub fn values(self, a: usize) -> Vec<PrimeExponents> {
        let mut vals: Vec<PrimeExponents> = if self.is_simple() {
            let k = ((a as i32) - 1) / 2;
            (0..a as i32).map(|i| vec![i - k]).collect()
        } else {
            let np = a.saturating_sub(1);
            let mut v = vec![vec![0; np]];
            for j in 0..np {
                let mut e = vec![0; np];
                e[j] = if j % 2 == 0 { 1 } else { -1 };
                v.push(e);
            }
            v
        };
        let primes = self.primes(a);
        vals.sort_by(|x, y| log_value(x, &primes).total_cmp(&log_value(y, &primes)));
        vals
    }
}

fn log_value(e: &[i32], primes: &[u64]) -> f64 {
    e.iter()
        .zip(primes)
        .map(|(&k, &p)| k as f64 * (p as f64).ln())
        .sum()
}

/// First `n` primes, by trial division.
pub fn first_primes(n: usize) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::with_capacity(n);
    let mut c = 2u64;
    while out.len() < n {
        if out.iter().take_while(|&&p| p * p <= c).all(|&p| !c.is_multiple_of(p)) {
            out.push(c);
        }
        c += 1;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RhythmDist {
    Letters(LetterDist),
    /// Model suffix `4`: weight `b^n` by the metrical position of the next
    /// onset in 4/4.
    Metrical,
}

impl RhythmDist {
    pub const ALL: [RhythmDist; 4] = [
        RhythmDist::Letters(LetterDist::Uniform),
        RhythmDist::Letters(LetterDist::PowerlawRandom),
        RhythmDist::Letters(LetterDist::PowerlawCentral),
        RhythmDist::Metrical,
    ];

    pub fn code(self) -> u8 {
        match self {
            RhythmDist::Letters(d) => d.code(),
            RhythmDist::Metrical => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhythmModelSpec {
    pub value_set: ValueSet,
    pub dist: RhythmDist,
    pub alphabet: usize,
    pub length: usize,
    pub exponent: f64,
}

impl RhythmModelSpec {
    pub fn models() -> Vec<(ValueSet, RhythmDist)> {
        ValueSet::ALL
            .iter()
            .flat_map(|&v| RhythmDist::ALL.iter().map(move |&d| (v, d)))
            .collect()
    }

    pub fn name(&self) -> String {
        format!("{}{}", self.value_set.code(), self.dist.code())
    }

    pub fn validate(&self) -> Result<()> {
        check_exponent(self.exponent)?;
        if self.alphabet < 1 {
            return Err(Error::param("rhythm alphabet must have at least 1 value"));
        }
        if self.length < 2 {
            return Err(Error::param("rhythm sequences need length >= 2"));
        }
        Ok(())
    }
}

impl fmt::Display for RhythmModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for RhythmDist {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "4" => Ok(RhythmDist::Metrical),
            _ => Ok(RhythmDist::Letters(s.parse()?)),
        }
    }
}

/// Parses a model name such as `SI4`.
pub fn parse_rhythm_model(name: &str) -> Result<(ValueSet, RhythmDist)> {
    let bad = || Error::param(format!("unknown rhythm model `{name}`"));
    if name.len() != 3 || !name.is_ascii() {
        return Err(bad());
    }
    let vs = ValueSet::ALL
        .into_iter()
        .find(|v| v.code() == &name[..2])
        .ok_or_else(bad)?;
    Ok((vs, name[2..].parse().map_err(|_| bad())?))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RhythmSample {
    pub ioi: Vec<PrimeExponents>,
    pub ioi_ratio: Vec<PrimeExponents>,
}

impl RhythmSample {
    pub fn h_ioi(&self) -> f64 {
        sequence_entropy(&self.ioi)
    }

    pub fn h_ioi_ratio(&self) -> f64 {
        sequence_entropy(&self.ioi_ratio)
    }
}

type Onset = Option<Ratio<i128>>;

fn to_rational(e: &[i32], primes: &[u64]) -> Option<Ratio<i128>> {
    let mut num: i128 = 1;
    let mut den: i128 = 1;
    for (&k, &p) in e.iter().zip(primes) {
        let f = (p as i128).checked_pow(k.unsigned_abs())?;
        if k >= 0 {
            num = num.checked_mul(f)?;
        } else {
            den = den.checked_mul(f)?;
        }
    }
    Some(Ratio::new(num, den))
}

fn add_exps(a: &[i32], b: &[i32]) -> PrimeExponents {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Onset advanced by `ioi`, reduced mod 4; `None` once exact tracking
/// overflows.
fn advance(t: &Onset, ioi: &Option<Ratio<i128>>) -> Onset {
    let next = t.as_ref()?.checked_add(ioi.as_ref()?)?;
    let four = Ratio::from_integer(4);
    let q = next.checked_div(&four)?.floor();
    next.checked_sub(&q.checked_mul(&four)?)
}

/// Metrical weight of an onset in 4/4 with unit beats: 4 on the downbeat,
/// 3 on beat three, 2 on beats two and four, 1 off the beat grid.
pub fn metrical_strength(onset: Option<Ratio<i128>>) -> u32 {
    match onset {
        Some(t) if t.is_integer() => match t.to_integer().rem_euclid(4) {
            0 => 4,
            2 => 3,
            _ => 2,
        },
        _ => 1,
    }
}

/// One sequence of `length` letters. IOI families draw IOIs directly; ratio
/// families draw IOI ratios and rebuild IOIs from an initial IOI of 1.
pub fn generate_rhythm_sequence<R: Rng + ?Sized>(
    spec: &RhythmModelSpec,
    rng: &mut R,
) -> Result<RhythmSample> {
    spec.validate()?;
    let a = spec.alphabet;
    let primes = spec.value_set.primes(a);
    let values = spec.value_set.values(a);
    let rationals: Vec<Option<Ratio<i128>>> =
        values.iter().map(|v| to_rational(v, &primes)).collect();
    let fixed = match spec.dist {
        RhythmDist::Letters(d) => Some(weighted_index(&letter_weights(a, d, spec.exponent, rng))?),
        RhythmDist::Metrical => None,
    };
    let ratio_mode = spec.value_set.is_ratio();
    let one = vec![0; primes.len()];
    let mut ioi: Vec<PrimeExponents> = Vec::with_capacity(spec.length + 1);
    let mut t: Onset = Some(Ratio::zero());
    if ratio_mode {
        ioi.push(one.clone());
        t = Some(Ratio::one());
    }
    for _ in 0..spec.length {
        // IOI that each letter would produce next
        let candidates: Vec<(PrimeExponents, Option<Ratio<i128>>)> = if ratio_mode {
            let prev = ioi.last().expect("initial IOI");
            values
                .iter()
                .map(|v| {
                    let e = add_exps(prev, v);
                    let r = to_rational(&e, &primes);
                    (e, r)
                })
                .collect()
        } else {
            values
                .iter()
                .cloned()
                .zip(rationals.iter().cloned())
                .collect()
        };
        let pick = match &fixed {
            Some(d) => d.sample(rng),
            None => {
                let w: Vec<f64> = candidates
                    .iter()
                    .map(|(_, r)| f64::from(metrical_strength(advance(&t, r))).powf(spec.exponent))
                    .collect();
                weighted_index(&w)?.sample(rng)
            }
        };
        let (e, r) = candidates.into_iter().nth(pick).expect("index in range");
        t = advance(&t, &r);
        ioi.push(e);
    }
    let ioi_ratio = ioi
        .windows(2)
        .map(|w| w[1].iter().zip(&w[0]).map(|(x, y)| x - y).collect())
        .collect();
    Ok(RhythmSample { ioi, ioi_ratio })
}

/// `n` sequences; sequence `i` uses a stream derived from `(seed, i)`.
pub fn generate_rhythm_sequences(
    spec: &RhythmModelSpec,
    n: usize,
    seed: u64,
) -> Result<Vec<RhythmSample>> {
    spec.validate()?;
    (0..n)
        .into_par_iter()
        .map(|i| {
            generate_rhythm_sequence(
                spec,
                &mut ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64)),
            )
        })
        .collect()
}

/// Numeric value of an exponent vector.
pub fn exponents_to_f64(e: &[i32], primes: &[u64]) -> f64 {
    log_value(e, primes).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn simple_set_values() {
        let vals = ValueSet::SimpleIoi.values(3);
        assert_eq!(vals, vec![vec![-1], vec![0], vec![1]]);
        let spec = RhythmModelSpec {
            value_set: ValueSet::SimpleIoi,
            dist: RhythmDist::Letters(LetterDist::Uniform),
            alphabet: 3,
            length: 40,
            exponent: 1.0,
        };
        for s in generate_rhythm_sequences(&spec, 50, 0).unwrap() {
            assert_eq!(s.ioi.len(), 40);
            assert!(s.ioi_ratio.iter().all(|r| r[0].abs() <= 2));
        }
    }

    #[test]
    fn complex_ratios_unique() {
        let primes = ValueSet::ComplexIoi.primes(3);
        let vals = ValueSet::ComplexIoi.values(3);
        let mut ratios = BTreeSet::new();
        let mut n = 0;
        for x in &vals {
            for y in &vals {
                if x != y {
                    n += 1;
                }
                let r: Vec<i32> = x.iter().zip(y).map(|(a, b)| a - b).collect();
                ratios.insert(r);
            }
        }
        assert_eq!(n, 6);
        assert_eq!(ratios.len(), 7);
        let nums: Vec<f64> = vals.iter().map(|v| exponents_to_f64(v, &primes)).collect();
        assert!(nums.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn prime_table_extends() {
        assert_eq!(first_primes(8), vec![2, 3, 5, 7, 11, 13, 17, 19]);
        assert_eq!(ValueSet::ComplexIoi.values(40).len(), 40);
    }

    #[test]
    fn metrical_positions() {
        let r = |n, d| Some(Ratio::new(n, d));
        assert_eq!(metrical_strength(r(0, 1)), 4);
        assert_eq!(metrical_strength(r(8, 1)), 4);
        assert_eq!(metrical_strength(r(2, 1)), 3);
        assert_eq!(metrical_strength(r(1, 1)), 2);
        assert_eq!(metrical_strength(r(3, 1)), 2);
        assert_eq!(metrical_strength(r(1, 2)), 1);
        assert_eq!(metrical_strength(None), 1);
    }

    #[test]
    fn metrical_bias_keeps_onsets_on_beats() {
        let spec = RhythmModelSpec {
            value_set: ValueSet::SimpleIoi,
            dist: RhythmDist::Metrical,
            alphabet: 3,
            length: 30,
            exponent: 6.0,
        };
        let samples = generate_rhythm_sequences(&spec, 100, 5).unwrap();
        let halves = samples
            .iter()
            .flat_map(|s| &s.ioi)
            .filter(|e| e[0] < 0)
            .count();
        assert!(halves < 100, "{halves} half-beat IOIs");
    }

    #[test]
    fn ratio_family_rebuilds_iois() {
        let spec = RhythmModelSpec {
            value_set: ValueSet::ComplexRatio,
            dist: RhythmDist::Metrical,
            alphabet: 20,
            length: 50,
            exponent: 1.0,
        };
        let s = generate_rhythm_sequences(&spec, 10, 6).unwrap();
        for x in s {
            assert_eq!(x.ioi.len(), 51);
            assert!(x.ioi[0].iter().all(|&k| k == 0));
            assert_eq!(x.ioi_ratio.len(), 50);
        }
    }

    #[test]
    fn names_round_trip() {
        let names: Vec<String> = RhythmModelSpec::models()
            .iter()
            .map(|&(v, d)| format!("{}{}", v.code(), d.code()))
            .collect();
        assert_eq!(names.len(), 16);
        for n in names {
            let (v, d) = parse_rhythm_model(&n).unwrap();
            assert_eq!(format!("{}{}", v.code(), d.code()), n);
        }
    }
}
