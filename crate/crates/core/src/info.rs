//! Unigram information measures over symbol sequences.
//!
//! All logarithms are base 2. Entropies are plug-in (maximum likelihood)
//! estimates without bias correction.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Tolerance on the sum of probabilities.
pub const PROB_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<T> {
    alphabet: Vec<T>,
    probs: Vec<f64>,
    counts: Option<Vec<u64>>,
}

impl<T> Distribution<T> {
    pub fn from_probs(alphabet: Vec<T>, probs: Vec<f64>) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(Error::param("distribution needs at least one symbol"));
        }
        if alphabet.len() != probs.len() {
            return Err(Error::param(format!(
                "{} symbols but {} probabilities",
                alphabet.len(),
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::param(format!("invalid probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::param(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Distribution {
            alphabet,
            probs,
            counts: None,
        })
    }

    /// Normalizes nonnegative weights into a distribution.
    pub fn from_weights(alphabet: Vec<T>, weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::param("weights must have a positive finite sum"));
        }
        Distribution::from_probs(alphabet, weights.iter().map(|w| w / total).collect())
    }

    pub fn from_counts(alphabet: Vec<T>, counts: Vec<u64>) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::param("counts sum to zero"));
        }
        let probs = counts.iter().map(|&c| c as f64 / total as f64).collect();
        let mut d = Distribution::from_probs(alphabet, probs)?;
        d.counts = Some(counts);
        Ok(d)
    }

    pub fn alphabet(&self) -> &[T] {
        &self.alphabet
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn counts(&self) -> Option<&[u64]> {
        self.counts.as_deref()
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.len()
    }

    /// Cumulative sums of the probabilities sorted ascending.
    pub fn lorenz(&self) -> Vec<f64> {
        lorenz_curve(&self.probs)
    }
}

pub fn lorenz_curve(probs: &[f64]) -> Vec<f64> {
    let mut sorted = probs.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect()
}

/// Empirical relative frequencies, alphabet sorted ascending.
pub fn distribution_of<T: Ord + Clone>(symbols: &[T]) -> Result<Distribution<T>> {
    if symbols.is_empty() {
        return Err(Error::Length("distribution of an empty sequence".into()));
    }
    let counts = symbol_counts(symbols);
    let (alphabet, counts): (Vec<T>, Vec<u64>) =
        counts.into_iter().map(|(k, v)| (k.clone(), v)).unzip();
    Distribution::from_counts(alphabet, counts)
}

pub fn symbol_counts<T: Ord>(symbols: &[T]) -> BTreeMap<&T, u64> {
    let mut counts = BTreeMap::new();
    for s in symbols {
        *counts.entry(s).or_insert(0u64) += 1;
    }
    counts
}

pub fn entropy_of_probs(probs: &[f64]) -> f64 {
    let h: f64 = probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    h.max(0.0)
}

/// Entropy of the empirical distribution with the given counts; zero counts
/// are ignored.
pub fn entropy_from_counts(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    let s: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let c = c as f64;
            c * c.log2()
        })
        .sum();
    (n.log2() - s / n).max(0.0)
}

pub fn entropy<T>(d: &Distribution<T>) -> f64 {
    entropy_of_probs(&d.probs)
}

/// Plug-in entropy of a symbol sequence; 0 for an empty sequence.
pub fn sequence_entropy<T: Ord>(symbols: &[T]) -> f64 {
    let counts: Vec<u64> = symbol_counts(symbols).into_values().collect();
    entropy_from_counts(&counts)
}

pub fn alphabet_size<T: Ord>(symbols: &[T]) -> usize {
    symbol_counts(symbols).len()
}

/// Gini coefficient from the Lorenz curve of the probabilities.
pub fn gini_of_probs(probs: &[f64]) -> f64 {
    let a = probs.len() as f64;
    if probs.len() <= 1 {
        return 0.0;
    }
    let area: f64 = lorenz_curve(probs).iter().sum();
    let g = 1.0 - 2.0 * area / a + 1.0 / a;
    g.max(0.0)
}

pub fn gini<T>(d: &Distribution<T>) -> f64 {
    gini_of_probs(&d.probs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoSummary {
    pub entropy_bits: f64,
    pub alphabet_size: usize,
    pub gini: f64,
}

pub fn summarize<T: Ord + Clone>(symbols: &[T]) -> Result<InfoSummary> {
    let d = distribution_of(symbols)?;
    Ok(InfoSummary {
        entropy_bits: entropy(&d),
        alphabet_size: d.alphabet_size(),
        gini: gini(&d),
    })
}

/// Plug-in mutual information `H(P) + H(R) - H(P,R)` of two aligned
/// sequences.
pub fn mutual_information<P: Ord, R: Ord>(p: &[P], r: &[R]) -> Result<f64> {
    if p.len() != r.len() {
        return Err(Error::Length(format!(
            "mutual information needs equal lengths, got {} and {}",
            p.len(),
            r.len()
        )));
    }
    let joint: Vec<(&P, &R)> = p.iter().zip(r).collect();
    let mi = sequence_entropy(p) + sequence_entropy(r) - sequence_entropy(&joint);
    Ok(mi.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiExcess {
    /// Mutual information of the aligned sequences.
    pub mi: f64,
    /// Mean mutual information after shuffling the second sequence.
    pub mi_random: f64,
    /// `mi - mi_random`.
    pub mi_excess: f64,
}

pub const DEFAULT_MI_SHUFFLES: usize = 10;

/// Mutual information in excess of its mean under random permutations of
/// `r`.
pub fn mutual_information_excess<P: Ord, R: Ord + Clone, G: Rng + ?Sized>(
    p: &[P],
    r: &[R],
    n_shuffles: usize,
    rng: &mut G,
) -> Result<MiExcess> {
    let mi = mutual_information(p, r)?;
    let mut mi_random = 0.0;
    if n_shuffles > 0 {
        let mut shuffled = r.to_vec();
        for _ in 0..n_shuffles {
            shuffled.shuffle(rng);
            mi_random += mutual_information(p, &shuffled)?;
        }
        mi_random /= n_shuffles as f64;
    }
    Ok(MiExcess {
        mi,
        mi_random,
        mi_excess: mi - mi_random,
    })
}

/// Smallest entropy reachable by a length-`len` sequence using exactly
/// `alphabet` distinct symbols: one symbol fills all the slack and every other
/// symbol appears once.
pub fn entropy_lower_bound(alphabet: usize, len: usize) -> Result<f64> {
    if alphabet == 0 || alphabet > len {
        return Err(Error::param(format!(
            "entropy lower bound needs 1 <= A <= L, got A={alphabet}, L={len}"
        )));
    }
    let mut counts = vec![1u64; alphabet];
    counts[0] = (len - alphabet + 1) as u64;
    Ok(entropy_from_counts(&counts))
}

/// `p_i ∝ i^(-exponent)` for `i = 1..=alphabet`.
pub fn powerlaw_probs(alphabet: usize, exponent: f64) -> Vec<f64> {
    let w: Vec<f64> = (1..=alphabet).map(|i| (i as f64).powf(-exponent)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Entropy and Gini coefficient of a power-law distributed alphabet.
pub fn powerlaw_entropy_gini(alphabet: usize, exponent: f64) -> Result<(f64, f64)> {
    if alphabet == 0 {
        return Err(Error::param("power law needs A >= 1"));
    }
    let p = powerlaw_probs(alphabet, exponent);
    Ok((entropy_of_probs(&p), gini_of_probs(&p)))
}

/// Largest Gini coefficient any distribution over `alphabet` symbols can
/// approach (exclusive bound).
pub fn max_gini(alphabet: usize) -> f64 {
    (alphabet as f64 - 1.0) / alphabet as f64
}

pub const POWERLAW_GINI_TOL: f64 = 1e-8;

/// Entropy of the power-law distribution over `alphabet` symbols whose Gini
/// coefficient equals `target_gini`.
pub fn solve_powerlaw_entropy(alphabet: usize, target_gini: f64) -> Result<f64> {
    if alphabet == 0 {
        return Err(Error::param("power law needs A >= 1"));
    }
    let gmax = max_gini(alphabet);
    if !(0.0..gmax).contains(&target_gini) && !(alphabet == 1 && target_gini == 0.0) {
        return Err(Error::param(format!(
            "Gini {target_gini} is outside the achievable range [0, {gmax}) for A={alphabet}"
        )));
    }
    if alphabet == 1 || target_gini == 0.0 {
        return Ok((alphabet as f64).log2());
    }
    let g_at = |e: f64| gini_of_probs(&powerlaw_probs(alphabet, e));
    let mut lo = 0.0;
    let mut hi = 1.0;
    while g_at(hi) < target_gini {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::param(format!(
                "Gini {target_gini} is numerically unreachable for A={alphabet}"
            )));
        }
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let g = g_at(mid);
        if (g - target_gini).abs() <= POWERLAW_GINI_TOL {
            break;
        }
        if g < target_gini {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(entropy_of_probs(&powerlaw_probs(alphabet, mid)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundFamily {
    /// Pitch climbs by a fixed interval: H(MInt) = 0.
    ConstantClimb,
    /// Semitone up, semitone down, repeated.
    ChromaticAlternation,
    /// Returns to a home pitch between ever-larger excursions.
    StopStartWave,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioBound {
    pub family: BoundFamily,
    pub pitches: Vec<i64>,
    pub h_pitch: f64,
    pub h_chroma: f64,
    pub h_mint: f64,
    /// `H(Pitch) / H(MInt)`; `None` when `H(MInt) = 0` (unbounded).
    pub pitch_ratio: Option<f64>,
    /// `H(Chroma) / H(MInt)`; `None` when `H(MInt) = 0`.
    pub chroma_ratio: Option<f64>,
}

/// Builds each extreme family at length `len` and measures its entropies.
pub fn entropy_ratio_bounds(len: usize) -> Result<Vec<RatioBound>> {
    if len < 3 {
        return Err(Error::param("entropy ratio bounds need L >= 3"));
    }
    let climb: Vec<i64> = (0..len as i64).collect();
    let chromatic: Vec<i64> = (0..len as i64).map(|i| i % 2).collect();
    let wave: Vec<i64> = (0..len as i64)
        .map(|i| if i % 2 == 0 { 0 } else { (i + 1) / 2 })
        .collect();
    let families = [
        (BoundFamily::ConstantClimb, climb),
        (BoundFamily::ChromaticAlternation, chromatic),
        (BoundFamily::StopStartWave, wave),
    ];
    Ok(families
        .into_iter()
        .map(|(family, pitches)| {
            let chroma: Vec<i64> = pitches.iter().map(|p| p.rem_euclid(12)).collect();
            let mint = crate::viewpoints::differences(&pitches);
            let h_pitch = sequence_entropy(&pitches);
            let h_chroma = sequence_entropy(&chroma);
            let h_mint = sequence_entropy(&mint);
            let ratio = |h: f64| (h_mint > 0.0).then(|| h / h_mint);
            RatioBound {
                family,
                h_pitch,
                h_chroma,
                h_mint,
                pitch_ratio: ratio(h_pitch),
                chroma_ratio: ratio(h_chroma),
                pitches,
            }
        })
        .collect())
}
