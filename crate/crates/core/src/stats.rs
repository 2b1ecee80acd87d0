//! Statistical helpers: kernel density estimation, Jensen-Shannon divergence,
//! correlation tests, multiple-comparison control, corpus-level null models
//! and n-gram similarity.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use rand::seq::index;
use rand::Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::corpus::{Corpus, CorpusType};
use crate::error::{Error, Result};
use crate::info::{entropy_of_probs, mutual_information, sequence_entropy};
use crate::viewpoints::{
    chroma_of, estimate_tonic, extract_viewpoint, Symbol, TonicMethod, ViewpointKind,
    ViewpointSequence,
};

// ---------------------------------------------------------------------------
// Descriptive helpers

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population variance.
pub fn variance(xs: &[f64]) -> f64 {
    // shifted by the first value: exact zero for constant data
    let k = xs[0];
    let n = xs.len() as f64;
    let (s, s2) = xs.iter().fold((0.0, 0.0), |(s, s2), x| {
        (s + (x - k), s2 + (x - k) * (x - k))
    });
    ((s2 - s * s / n) / n).max(0.0)
}

/// Linearly interpolated quantile of already sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

// ---------------------------------------------------------------------------
// Kernel density estimation

/// Evenly spaced bins on `[lo, hi]`; densities are evaluated at bin centres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(hi > lo && step > 0.0 && step <= hi - lo) {
            return Err(Error::param(format!(
                "invalid grid [{lo}, {hi}] step {step}"
            )));
        }
        Ok(Grid { lo, hi, step })
    }

    pub fn n_bins(&self) -> usize {
        ((self.hi - self.lo) / self.step).round() as usize
    }

    pub fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.step
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_bins()).map(|i| self.center(i)).collect()
    }

    /// Bin containing `x`; values outside the grid clamp to the end bins.
    pub fn bin_of(&self, x: f64) -> usize {
        let i = ((x - self.lo) / self.step).floor();
        if i < 0.0 || x.is_nan() {
            0
        } else {
            (i as usize).min(self.n_bins() - 1)
        }
    }

    pub fn histogram(&self, samples: &[f64]) -> Vec<f64> {
        let mut h = vec![0.0; self.n_bins()];
        for &x in samples {
            h[self.bin_of(x)] += 1.0;
        }
        h
    }
}

/// Silverman's rule: `0.9 * min(sd, IQR / 1.34) * n^(-1/5)`; when the IQR is
/// zero the standard deviation is used alone.
pub fn silverman_bandwidth(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::Degenerate("KDE needs at least 2 samples".into()));
    }
    let n = samples.len() as f64;
    let m = mean(samples);
    let sd = (samples.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    if !(sd > 0.0) {
        return Err(Error::Degenerate(
            "samples have zero spread; treat the density as a point mass".into(),
        ));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Ok(0.9 * spread * n.powf(-0.2))
}

fn gaussian(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * PI).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kde {
    samples: Vec<f64>,
    bandwidth: f64,
}

impl Kde {
    /// Gaussian KDE with Silverman bandwidth.
    pub fn silverman(samples: &[f64]) -> Result<Self> {
        Ok(Kde {
            bandwidth: silverman_bandwidth(samples)?,
            samples: samples.to_vec(),
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn density(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        self.samples
            .iter()
            .map(|s| gaussian((x - s) / h))
            .sum::<f64>()
            / (self.samples.len() as f64 * h)
    }

    /// Density at the grid centres, with samples clamped into the grid and
    /// the result renormalized so that `sum(f) * step == 1`.
    ///
    /// Large sample sets are binned first (sample positions snap to bin
    /// centres).
    pub fn on_grid(&self, grid: &Grid) -> Vec<f64> {
        let nb = grid.n_bins();
        let h = self.bandwidth;
        let mut f = vec![0.0; nb];
        if self.samples.len() <= nb {
            for (j, fj) in f.iter_mut().enumerate() {
                let c = grid.center(j);
                *fj = self
                    .samples
                    .iter()
                    .map(|&s| gaussian((c - s.clamp(grid.lo, grid.hi)) / h))
                    .sum();
            }
        } else {
            let counts = grid.histogram(&self.samples);
            // kernel weight as a function of bin offset
            let kernel: Vec<f64> = (0..nb)
                .map(|d| gaussian(d as f64 * grid.step / h))
                .collect();
            for (i, &c) in counts.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                for (j, fj) in f.iter_mut().enumerate() {
                    *fj += c * kernel[i.abs_diff(j)];
                }
            }
        }
        normalize_density(&mut f, grid.step);
        f
    }
}

/// Point mass in the bin holding `x`, as a density on the grid.
pub fn delta_on_grid(x: f64, grid: &Grid) -> Vec<f64> {
    let mut f = vec![0.0; grid.n_bins()];
    f[grid.bin_of(x)] = 1.0 / grid.step;
    f
}

fn normalize_density(f: &mut [f64], step: f64) {
    let total: f64 = f.iter().sum::<f64>() * step;
    if total > 0.0 {
        for v in f.iter_mut() {
            *v /= total;
        }
    }
}

/// Silverman KDE of `samples` on `grid`.
pub fn kde_silverman(samples: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    Ok(Kde::silverman(samples)?.on_grid(grid))
}

// ---------------------------------------------------------------------------
// Divergence and correlation

/// Jensen-Shannon divergence in bits between two histograms on the same
/// bins. Inputs are normalized first.
pub fn jsd(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::param(format!(
            "histograms have {} and {} bins",
            p.len(),
            q.len()
        )));
    }
    let norm = |h: &[f64]| -> Result<Vec<f64>> {
        let s: f64 = h.iter().sum();
        if !(s > 0.0) || h.iter().any(|x| *x < 0.0) {
            return Err(Error::param(
                "histogram must be nonnegative with positive mass",
            ));
        }
        Ok(h.iter().map(|x| x / s).collect())
    };
    let p = norm(p)?;
    let q = norm(q)?;
    let m: Vec<f64> = p.iter().zip(&q).map(|(a, b)| 0.5 * (a + b)).collect();
    let d = entropy_of_probs(&m) - 0.5 * (entropy_of_probs(&p) + entropy_of_probs(&q));
    Ok(d.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub r: f64,
    /// Two-sided p-value from Student's t with n-2 degrees of freedom.
    pub p: f64,
    pub n: usize,
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    if x.len() != y.len() {
        return Err(Error::Length(format!(
            "pearson needs equal lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::Length("pearson needs at least 3 points".into()));
    }
    let mx = mean(x);
    let my = mean(y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if !(sxx > 0.0 && syy > 0.0) {
        return Err(Error::Degenerate("pearson on a constant series".into()));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df is positive");
        (2.0 * dist.sf(t.abs())).min(1.0)
    };
    Ok(Correlation { r, p, n })
}

/// Step-up Benjamini-Hochberg; flags are in input order.
pub fn benjamini_hochberg(pvals: &[f64], q: f64) -> Result<Vec<bool>> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::param(format!("FDR level must be in (0,1), got {q}")));
    }
    if let Some(p) = pvals.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::param(format!("p-value {p} outside [0,1]")));
    }
    let m = pvals.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pvals[a].total_cmp(&pvals[b]));
    let k = order
        .iter()
        .enumerate()
        .filter(|&(rank, &i)| pvals[i] <= (rank + 1) as f64 * q / m as f64)
        .map(|(rank, _)| rank + 1)
        .max()
        .unwrap_or(0);
    let mut reject = vec![false; m];
    for &i in &order[..k] {
        reject[i] = true;
    }
    Ok(reject)
}

pub fn bonferroni(pvals: &[f64], alpha: f64) -> Vec<bool> {
    let m = pvals.len() as f64;
    pvals.iter().map(|&p| p <= alpha / m).collect()
}

// ---------------------------------------------------------------------------
// Corpus-level summaries

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusMeans {
    pub corpus_id: String,
    pub corpus_type: CorpusType,
    pub region: String,
    pub h_chroma: f64,
    pub h_duration: f64,
    /// Mean mutual information between chroma and duration.
    pub i_chroma_duration: f64,
}

impl CorpusMeans {
    /// Mean joint entropy via `H(C) + H(D) - I(C,D)`.
    pub fn h_joint(&self) -> f64 {
        self.h_chroma + self.h_duration - self.i_chroma_duration
    }
}

/// Per-corpus mean chroma entropy, duration entropy and their mutual
/// information.
pub fn corpus_means(corpus: &Corpus) -> Result<CorpusMeans> {
    let mut hc = Vec::new();
    let mut hd = Vec::new();
    let mut mi = Vec::new();
    for m in corpus.melodies() {
        let c = extract_viewpoint(m, ViewpointKind::Chroma)?.symbols;
        let d = extract_viewpoint(m, ViewpointKind::Duration)?.symbols;
        hc.push(sequence_entropy(&c));
        hd.push(sequence_entropy(&d));
        mi.push(mutual_information(&c, &d)?);
    }
    let meta = corpus.meta();
    Ok(CorpusMeans {
        corpus_id: meta.corpus_id.clone(),
        corpus_type: meta.corpus_type,
        region: meta.region.clone(),
        h_chroma: mean(&hc),
        h_duration: mean(&hd),
        i_chroma_duration: mean(&mi),
    })
}

pub const MEANS_CSV_HEADER: [&str; 6] = [
    "corpus_id",
    "type",
    "region",
    "H_chroma",
    "H_duration",
    "I_chroma_duration",
];

/// Reads corpus means from CSV with [`MEANS_CSV_HEADER`] columns.
pub fn read_means_csv(text: &str) -> Result<Vec<CorpusMeans>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| Error::Schema(e.to_string()))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("missing column `{name}`")))
    };
    let idx: Vec<usize> = MEANS_CSV_HEADER
        .iter()
        .map(|n| col(n))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Schema(e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            rec[idx[i]].trim().parse().map_err(|_| Error::Parse {
                line: line + 2,
                column: idx[i] + 1,
                message: format!("`{}` is not a number", &rec[idx[i]]),
            })
        };
        out.push(CorpusMeans {
            corpus_id: rec[idx[0]].to_string(),
            corpus_type: rec[idx[1]].parse()?,
            region: rec[idx[2]].to_string(),
            h_chroma: num(3)?,
            h_duration: num(4)?,
            i_chroma_duration: num(5)?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointEntropyNull {
    pub samples: Vec<f64>,
    pub null_variance: f64,
    pub empirical_variance: f64,
    /// `null_variance / empirical_variance`; 1 when the empirical variance is
    /// zero (see `degenerate`).
    pub ratio: f64,
    pub degenerate: bool,
}

/// Joint entropy when the chroma entropy, duration entropy and mutual
/// information of different corpora are recombined at random.
pub fn joint_entropy_null<G: Rng + ?Sized>(
    means: &[CorpusMeans],
    n_samples: usize,
    rng: &mut G,
) -> Result<JointEntropyNull> {
    if means.len() < 2 {
        return Err(Error::param("joint entropy null needs at least 2 corpora"));
    }
    if n_samples == 0 {
        return Err(Error::param("joint entropy null needs at least 1 sample"));
    }
    let k = means.len();
    let samples: Vec<f64> = (0..n_samples)
        .map(|_| {
            let c = &means[rng.random_range(0..k)];
            let d = &means[rng.random_range(0..k)];
            let i = &means[rng.random_range(0..k)];
            c.h_chroma + d.h_duration - i.i_chroma_duration
        })
        .collect();
    let empirical: Vec<f64> = means.iter().map(CorpusMeans::h_joint).collect();
    let null_variance = variance(&samples);
    let empirical_variance = variance(&empirical);
    let degenerate = !(empirical_variance > 1e-15);
    let ratio = if degenerate {
        1.0
    } else {
        null_variance / empirical_variance
    };
    Ok(JointEntropyNull {
        samples,
        null_variance,
        empirical_variance,
        ratio,
        degenerate,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionCorrelation {
    pub mean_r: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: Vec<f64>,
}

pub const DEFAULT_RESAMPLES: usize = 1000;

/// Correlation of mean chroma and duration entropy over resamples that keep
/// at most `max_per_region` corpora from each region.
pub fn region_balanced_correlation<G: Rng + ?Sized>(
    means: &[CorpusMeans],
    max_per_region: usize,
    n_resamples: usize,
    rng: &mut G,
) -> Result<RegionCorrelation> {
    if max_per_region < 1 {
        return Err(Error::param("max_per_region must be at least 1"));
    }
    if n_resamples == 0 {
        return Err(Error::param("n_resamples must be positive"));
    }
    let mut by_region: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, m) in means.iter().enumerate() {
        by_region.entry(m.region.as_str()).or_default().push(i);
    }
    if by_region.len() < 2 {
        return Err(Error::param(
            "region-balanced correlation needs at least 2 regions",
        ));
    }
    let mut samples = Vec::with_capacity(n_resamples);
    for _ in 0..n_resamples {
        let mut chosen = Vec::new();
        for members in by_region.values() {
            if members.len() <= max_per_region {
                chosen.extend_from_slice(members);
            } else {
                let mut picks: Vec<usize> = index::sample(rng, members.len(), max_per_region)
                    .into_iter()
                    .map(|i| members[i])
                    .collect();
                picks.sort_unstable();
                chosen.extend(picks);
            }
        }
        let x: Vec<f64> = chosen.iter().map(|&i| means[i].h_chroma).collect();
        let y: Vec<f64> = chosen.iter().map(|&i| means[i].h_duration).collect();
        samples.push(pearson(&x, &y)?.r);
    }
    let mut sorted = samples.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(RegionCorrelation {
        mean_r: mean(&samples),
        ci_low: quantile_sorted(&sorted, 0.025),
        ci_high: quantile_sorted(&sorted, 0.975),
        samples,
    })
}

// ---------------------------------------------------------------------------
// Pitch-rhythm covariance profiles

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PitchProfile {
    /// Chroma relative to the final-note tonic.
    ChromaTransposed,
    /// Absolute melodic interval leading into each note.
    MIntAbs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhythmProfile {
    Ioi,
    Duration,
}

/// Mean rhythm value co-occurring with each pitch symbol, minus the
/// corpus-wide mean over the same pairs.
pub fn rhythm_deviation_profile(
    corpus: &Corpus,
    pitch: PitchProfile,
    rhythm: RhythmProfile,
) -> Result<BTreeMap<i64, f64>> {
    let mut pairs: Vec<(i64, f64)> = Vec::new();
    for m in corpus.melodies() {
        let pitches = m.pitches();
        let rhythm_vals: Vec<f64> = match rhythm {
            RhythmProfile::Duration => m.notes().map(|e| rational_to_f64(e.duration)).collect(),
            RhythmProfile::Ioi => {
                let on: Vec<f64> = m.notes().map(|e| rational_to_f64(e.onset)).collect();
                on.windows(2).map(|w| w[1] - w[0]).collect()
            }
        };
        match pitch {
            PitchProfile::ChromaTransposed => {
                let tonic = i64::from(estimate_tonic(m, TonicMethod::Final)?);
                for (p, r) in pitches.iter().zip(&rhythm_vals) {
                    pairs.push((chroma_of(p - tonic), *r));
                }
            }
            PitchProfile::MIntAbs => {
                // interval i leads into note i + 1
                for (i, w) in pitches.windows(2).enumerate() {
                    if let Some(r) = rhythm_vals.get(i + 1) {
                        pairs.push(((w[1] - w[0]).abs(), *r));
                    }
                }
            }
        }
    }
    if pairs.is_empty() {
        return Err(Error::Length("no pitch/rhythm pairs in corpus".into()));
    }
    let overall = pairs.iter().map(|p| p.1).sum::<f64>() / pairs.len() as f64;
    let mut acc: BTreeMap<i64, (f64, usize)> = BTreeMap::new();
    for (s, r) in pairs {
        let e = acc.entry(s).or_insert((0.0, 0));
        e.0 += r;
        e.1 += 1;
    }
    Ok(acc
        .into_iter()
        .map(|(s, (sum, n))| (s, sum / n as f64 - overall))
        .collect())
}

fn rational_to_f64(r: num_rational::Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

// ---------------------------------------------------------------------------
// N-gram similarity

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityReport {
    /// Corpus melodies containing the query n-gram.
    pub n_matches: usize,
    /// Expected matches with per-window probability `A^(-2n)`.
    pub expected_paper: f64,
    /// Expected matches with per-window probability `A^(-n)`.
    pub expected_fixed_query: f64,
    /// `n_matches / expected_paper`.
    pub enrichment: f64,
    pub alphabet_size: usize,
}

pub fn contains_ngram(haystack: &[Symbol], needle: &[Symbol]) -> bool {
    needle.is_empty() || haystack.windows(needle.len()).any(|w| w == needle)
}

/// Counts corpus melodies containing the first `n` symbols of `query` and
/// compares with the count expected by chance.
pub fn ngram_similarity(
    query: &ViewpointSequence,
    corpus: &Corpus,
    n: usize,
    kind: ViewpointKind,
) -> Result<SimilarityReport> {
    if n < 2 {
        return Err(Error::param("n-gram similarity needs n >= 2"));
    }
    if query.kind != kind {
        return Err(Error::param(format!(
            "query is a {} sequence, corpus viewpoint is {kind}",
            query.kind
        )));
    }
    if query.len() < n {
        return Err(Error::Length(format!(
            "query has {} symbols, need at least {n}",
            query.len()
        )));
    }
    let needle = &query.symbols[..n];
    let a = needle.iter().collect::<BTreeSet<_>>().len();
    let p_two_seq = (a as f64).powi(-2 * n as i32);
    let p_fixed = (a as f64).powi(-(n as i32));
    let mut n_matches = 0;
    let mut windows = 0usize;
    for m in corpus.melodies() {
        let Ok(seq) = extract_viewpoint(m, kind) else {
            continue;
        };
        windows += (seq.len() + 1).saturating_sub(n);
        if contains_ngram(&seq.symbols, needle) {
            n_matches += 1;
        }
    }
    let expected_paper = p_two_seq * windows as f64;
    let expected_fixed_query = p_fixed * windows as f64;
    let enrichment = if expected_paper > 0.0 {
        n_matches as f64 / expected_paper
    } else {
        f64::NAN
    };
    Ok(SimilarityReport {
        n_matches,
        expected_paper,
        expected_fixed_query,
        enrichment,
        alphabet_size: a,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn jsd_examples() {
        assert_eq!(jsd(&[0.2, 0.8], &[0.2, 0.8]).unwrap(), 0.0);
        assert!((jsd(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        let h34 = -(0.75f64 * 0.75f64.log2() + 0.25 * 0.25f64.log2());
        assert!((jsd(&[1.0, 0.0], &[0.5, 0.5]).unwrap() - (h34 - 0.5)).abs() < 1e-12);
        assert!(jsd(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn pearson_perfect() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        assert!((pearson(&x, &y).unwrap().r - 1.0).abs() < 1e-12);
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &y).unwrap().r + 1.0).abs() < 1e-12);
        assert!(pearson(&x, &[1.0; 4]).is_err());
    }

    #[test]
    fn bh_examples() {
        assert_eq!(
            benjamini_hochberg(&[0.01, 0.02, 0.04], 0.05).unwrap(),
            vec![true; 3]
        );
        assert_eq!(
            benjamini_hochberg(&[1.0, 1.0], 0.05).unwrap(),
            vec![false; 2]
        );
        assert_eq!(benjamini_hochberg(&[0.04], 0.05).unwrap(), vec![true]);
        // step-up: 0.03 passes at rank 2 even though it fails rank 1's bar
        assert_eq!(
            benjamini_hochberg(&[0.9, 0.03, 0.02], 0.05).unwrap(),
            vec![false, true, true]
        );
        assert!(benjamini_hochberg(&[0.5], 1.0).is_err());
    }

    #[test]
    fn silverman_rejects_constant() {
        assert!(matches!(
            silverman_bandwidth(&[1.0, 1.0, 1.0]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn kde_two_points_symmetric() {
        let grid = Grid::new(-2.0, 3.0, 0.005).unwrap();
        let f = kde_silverman(&[0.0, 1.0], &grid).unwrap();
        let m: f64 = grid
            .centers()
            .iter()
            .zip(&f)
            .map(|(x, y)| x * y * grid.step)
            .sum();
        assert!((m - 0.5).abs() < 1e-9);
        let total: f64 = f.iter().sum::<f64>() * grid.step;
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn kde_far_samples_clamp() {
        let grid = Grid::new(0.0, 5.0, 0.005).unwrap();
        let f = kde_silverman(&[100.0, 101.0], &grid).unwrap();
        let last = *f.last().unwrap();
        assert!(last > 0.0);
        assert!(f[0] < last);
    }

    #[test]
    fn joint_null_identical_corpora() {
        let m = CorpusMeans {
            corpus_id: "a".into(),
            corpus_type: CorpusType::Folk,
            region: "r".into(),
            h_chroma: 2.0,
            h_duration: 1.0,
            i_chroma_duration: 0.2,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let res = joint_entropy_null(&[m.clone(), m], 100, &mut rng).unwrap();
        assert_eq!(res.null_variance, 0.0);
        assert!(res.degenerate);
        assert_eq!(res.ratio, 1.0);
    }

    #[test]
    fn means_csv_round_trip() {
        let text = "corpus_id,type,region,H_chroma,H_duration,I_chroma_duration\nkind,Child,Europe,2.13,1.0,0.31\n";
        let m = read_means_csv(text).unwrap();
        assert_eq!(m[0].corpus_type, CorpusType::Child);
        assert!((m[0].h_joint() - 2.82).abs() < 1e-12);
        assert!(read_means_csv("a,b\n1,2\n").is_err());
    }
}
