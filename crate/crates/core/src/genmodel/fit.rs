use std::collections::BTreeMap;

use super::pitch::{generate_pitch_sequences, PitchFamily, PitchModelSpec, PitchSample};
use super::rhythm::{generate_rhythm_sequences, RhythmDist, RhythmModelSpec, ValueSet};
use super::LetterDist;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::info::sequence_entropy;
use crate::seeding::derive_seed;
use crate::stats::jsd;
use crate::viewpoints::{extract_viewpoint, ViewpointKind};

pub const DEFAULT_RATIO_BIN: f64 = 0.02;
/// Entropy ratios are histogrammed on `[0, RATIO_MAX]`; larger values fall in
/// the last bin.
pub const RATIO_MAX: f64 = 4.0;
pub const DEFAULT_H_IOI_BIN: f64 = 0.25;
pub const DEFAULT_N_PER_SETTING: usize = 100;

/// Entropy ratios of one melody relative to its chroma entropy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchTarget {
    pub mint_ratio: f64,
    pub sint_ratio: f64,
}

impl PitchTarget {
    /// `None` when the chroma entropy is zero.
    pub fn from_entropies(h_chroma: f64, h_mint: f64, h_sint: f64) -> Option<Self> {
        (h_chroma > 0.0).then(|| PitchTarget {
            mint_ratio: h_mint / h_chroma,
            sint_ratio: h_sint / h_chroma,
        })
    }

    fn from_sample(s: &PitchSample) -> Option<Self> {
        Self::from_entropies(
            sequence_entropy(&s.chroma),
            sequence_entropy(&s.mint),
            sequence_entropy(&s.sint),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhythmTarget {
    pub h_ioi: f64,
    pub h_ioi_ratio: f64,
}

impl RhythmTarget {
    fn ratio(&self) -> Option<f64> {
        (self.h_ioi > 0.0).then(|| self.h_ioi_ratio / self.h_ioi)
    }
}

/// Pitch targets for every melody with nonzero chroma entropy.
pub fn pitch_targets(corpora: &[Corpus]) -> Result<Vec<PitchTarget>> {
    let mut out = Vec::new();
    for m in corpora.iter().flat_map(Corpus::melodies) {
        let h = |k| extract_viewpoint(m, k).map(|s| sequence_entropy(&s.symbols));
        if let Some(t) = PitchTarget::from_entropies(
            h(ViewpointKind::Chroma)?,
            h(ViewpointKind::MInt)?,
            h(ViewpointKind::SInt)?,
        ) {
            out.push(t);
        }
    }
    Ok(out)
}

/// Rhythm targets for every melody whose IOI ratios are defined.
pub fn rhythm_targets(corpora: &[Corpus]) -> Vec<RhythmTarget> {
    corpora
        .iter()
        .flat_map(Corpus::melodies)
        .filter_map(|m| {
            let ioi = extract_viewpoint(m, ViewpointKind::Ioi).ok()?;
            let ratio = extract_viewpoint(m, ViewpointKind::IoiRatio).ok()?;
            Some(RhythmTarget {
                h_ioi: sequence_entropy(&ioi.symbols),
                h_ioi_ratio: sequence_entropy(&ratio.symbols),
            })
        })
        .collect()
}

/// Counts of `values` in bins of width `bin` on `[0, RATIO_MAX]`.
pub fn entropy_ratio_histogram(values: &[f64], bin: f64) -> Vec<f64> {
    let nb = (RATIO_MAX / bin).ceil() as usize;
    let mut h = vec![0.0; nb];
    for &v in values {
        h[((v / bin).floor().max(0.0) as usize).min(nb - 1)] += 1.0;
    }
    h
}

fn check_bin(bin: f64) -> Result<()> {
    if bin > 0.0 && bin <= RATIO_MAX {
        Ok(())
    } else {
        Err(Error::param(format!(
            "histogram bin width {bin} outside (0, {RATIO_MAX}]"
        )))
    }
}

/// JSD between histograms, or the maximum of 1 bit when the model side is
/// empty.
fn jsd_or_max(emp: &[f64], model: &[f64]) -> Result<f64> {
    if model.iter().sum::<f64>() > 0.0 {
        jsd(emp, model)
    } else {
        Ok(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PitchGrid {
    pub alphabet: Vec<usize>,
    pub length: Vec<usize>,
    pub range: Vec<f64>,
    /// Ignored for uniform models.
    pub exponent: Vec<f64>,
    pub ratio_bin: f64,
}

impl Default for PitchGrid {
    fn default() -> Self {
        PitchGrid {
            alphabet: (3..=12).collect(),
            length: (15..=50).step_by(5).collect(),
            range: vec![1.0, 2.0, 3.0],
            exponent: vec![0.5, 1.0, 2.0, 4.0],
            ratio_bin: DEFAULT_RATIO_BIN,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhythmGrid {
    /// Alphabet sizes pooled into each evaluation.
    pub alphabet: Vec<usize>,
    pub length: Vec<usize>,
    /// Ignored for uniform models.
    pub exponent: Vec<f64>,
    pub ratio_bin: f64,
    pub h_ioi_bin: f64,
}

impl Default for RhythmGrid {
    fn default() -> Self {
        RhythmGrid {
            alphabet: (2..=20).collect(),
            length: (15..=50).step_by(5).collect(),
            exponent: vec![0.5, 1.0, 2.0, 4.0],
            ratio_bin: DEFAULT_RATIO_BIN,
            h_ioi_bin: DEFAULT_H_IOI_BIN,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<P> {
    pub best: P,
    pub score: f64,
    /// Every grid point in evaluation order with its score.
    pub evaluated: Vec<(P, f64)>,
}

fn nonempty<T>(xs: &[T], what: &str) -> Result<()> {
    if xs.is_empty() {
        Err(Error::param(format!("{what} is empty")))
    } else {
        Ok(())
    }
}

fn exponents_for(uniform: bool, grid: &[f64]) -> &[f64] {
    if uniform {
        &grid[..1]
    } else {
        grid
    }
}

/// Picks the first grid point with the lowest score.
fn pick_best<P: Clone>(evaluated: Vec<(P, f64)>) -> FitResult<P> {
    let mut best = 0;
    for (i, (_, s)) in evaluated.iter().enumerate() {
        if *s < evaluated[best].1 {
            best = i;
        }
    }
    FitResult {
        best: evaluated[best].0.clone(),
        score: evaluated[best].1,
        evaluated,
    }
}

/// Score of one pitch model setting: JSD of the MInt/Chroma entropy-ratio
/// histograms plus JSD of the SInt/Chroma ones.
pub fn pitch_objective(samples: &[PitchSample], targets: &[PitchTarget], bin: f64) -> Result<f64> {
    let model: Vec<PitchTarget> = samples
        .iter()
        .filter_map(PitchTarget::from_sample)
        .collect();
    let hist = |ts: &[PitchTarget], f: fn(&PitchTarget) -> f64| {
        entropy_ratio_histogram(&ts.iter().map(f).collect::<Vec<_>>(), bin)
    };
    let mint = |t: &PitchTarget| t.mint_ratio;
    let sint = |t: &PitchTarget| t.sint_ratio;
    Ok(jsd_or_max(&hist(targets, mint), &hist(&model, mint))?
        + jsd_or_max(&hist(targets, sint), &hist(&model, sint))?)
}

/// Grid search over `(A, L, O, exponent)` in that nesting order.
pub fn fit_pitch_model(
    family: PitchFamily,
    dist: LetterDist,
    targets: &[PitchTarget],
    grid: &PitchGrid,
    n_per_setting: usize,
    seed: u64,
) -> Result<FitResult<PitchModelSpec>> {
    nonempty(targets, "pitch target list")?;
    nonempty(&grid.alphabet, "alphabet grid")?;
    nonempty(&grid.length, "length grid")?;
    nonempty(&grid.range, "range grid")?;
    nonempty(&grid.exponent, "exponent grid")?;
    check_bin(grid.ratio_bin)?;
    if n_per_setting == 0 {
        return Err(Error::param("n_per_setting must be positive"));
    }
    let mut evaluated = Vec::new();
    for &a in &grid.alphabet {
        for &l in &grid.length {
            for &o in &grid.range {
                for &n in exponents_for(dist == LetterDist::Uniform, &grid.exponent) {
                    let spec = PitchModelSpec::new(family, dist, a, l, o, n);
                    let point_seed = derive_seed(seed, evaluated.len() as u64);
                    let samples = generate_pitch_sequences(&spec, n_per_setting, point_seed)?;
                    let score = pitch_objective(&samples, targets, grid.ratio_bin)?;
                    evaluated.push((spec, score));
                }
            }
        }
    }
    Ok(pick_best(evaluated))
}

/// Expected JSD between empirical and model distributions of
/// `H(IOI-ratio)/H(IOI)` conditioned on binned `H(IOI)`, weighted by the
/// empirical mass of each `H(IOI)` bin. Bins the model never reaches score 1.
pub fn rhythm_objective(
    model: &[RhythmTarget],
    targets: &[RhythmTarget],
    ratio_bin: f64,
    h_bin: f64,
) -> Result<f64> {
    let group = |ts: &[RhythmTarget]| {
        let mut g: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
        for t in ts {
            if let Some(r) = t.ratio() {
                g.entry((t.h_ioi / h_bin).floor() as i64)
                    .or_default()
                    .push(r);
            }
        }
        g
    };
    let emp = group(targets);
    let total: usize = emp.values().map(Vec::len).sum();
    if total == 0 {
        return Err(Error::param("no rhythm target has nonzero IOI entropy"));
    }
    let modl = group(model);
    let mut score = 0.0;
    for (bin, rs) in &emp {
        let w = rs.len() as f64 / total as f64;
        let d = match modl.get(bin) {
            Some(ms) => jsd(
                &entropy_ratio_histogram(rs, ratio_bin),
                &entropy_ratio_histogram(ms, ratio_bin),
            )?,
            None => 1.0,
        };
        score += w * d;
    }
    Ok(score)
}

/// Best `(L, exponent)` for one rhythm model; `alphabet` in the result holds
/// the largest pooled alphabet size.
pub fn fit_rhythm_model(
    value_set: ValueSet,
    dist: RhythmDist,
    targets: &[RhythmTarget],
    grid: &RhythmGrid,
    n_per_setting: usize,
    seed: u64,
) -> Result<FitResult<RhythmModelSpec>> {
    nonempty(targets, "rhythm target list")?;
    nonempty(&grid.alphabet, "alphabet grid")?;
    nonempty(&grid.length, "length grid")?;
    nonempty(&grid.exponent, "exponent grid")?;
    check_bin(grid.ratio_bin)?;
    if !(grid.h_ioi_bin > 0.0) {
        return Err(Error::param("H(IOI) bin width must be positive"));
    }
    if n_per_setting == 0 {
        return Err(Error::param("n_per_setting must be positive"));
    }
    let max_a = *grid.alphabet.iter().max().expect("nonempty");
    let mut evaluated = Vec::new();
    for &l in &grid.length {
        for &n in exponents_for(
            dist == RhythmDist::Letters(LetterDist::Uniform),
            &grid.exponent,
        ) {
            let point_seed = derive_seed(seed, evaluated.len() as u64);
            let mut model = Vec::new();
            for (k, &a) in grid.alphabet.iter().enumerate() {
                let spec = RhythmModelSpec {
                    value_set,
                    dist,
                    alphabet: a,
                    length: l,
                    exponent: n,
                };
                for s in generate_rhythm_sequences(
                    &spec,
                    n_per_setting,
                    derive_seed(point_seed, k as u64),
                )? {
                    model.push(RhythmTarget {
                        h_ioi: s.h_ioi(),
                        h_ioi_ratio: s.h_ioi_ratio(),
                    });
                }
            }
            let score = rhythm_objective(&model, targets, grid.ratio_bin, grid.h_ioi_bin)?;
            let spec = RhythmModelSpec {
                value_set,
                dist,
                alphabet: max_a,
                length: l,
                exponent: n,
            };
            evaluated.push((spec, score));
        }
    }
    Ok(pick_best(evaluated))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_clamps() {
        let h = entropy_ratio_histogram(&[-1.0, 0.0, 0.019, 0.02, 10.0], 0.02);
        assert_eq!(h.len(), 200);
        assert_eq!(h[0], 3.0);
        assert_eq!(h[1], 1.0);
        assert_eq!(h[199], 1.0);
    }

    #[test]
    fn identical_targets_score_zero() {
        let spec = PitchModelSpec::new(
            PitchFamily::IS,
            LetterDist::PowerlawCentral,
            7,
            30,
            3.0,
            2.0,
        );
        let samples = generate_pitch_sequences(&spec, 200, 1).unwrap();
        let targets: Vec<PitchTarget> = samples
            .iter()
            .filter_map(PitchTarget::from_sample)
            .collect();
        assert_eq!(
            pitch_objective(&samples, &targets, DEFAULT_RATIO_BIN).unwrap(),
            0.0
        );
    }

    #[test]
    fn generating_family_scores_lowest() {
        let truth = PitchModelSpec::new(
            PitchFamily::IS,
            LetterDist::PowerlawCentral,
            7,
            30,
            3.0,
            2.0,
        );
        let targets: Vec<PitchTarget> = generate_pitch_sequences(&truth, 400, 11)
            .unwrap()
            .iter()
            .filter_map(PitchTarget::from_sample)
            .collect();
        let grid = PitchGrid {
            alphabet: vec![7],
            length: vec![30],
            range: vec![3.0],
            exponent: vec![2.0],
            ratio_bin: 0.05,
        };
        let scores: Vec<(String, f64)> = PitchModelSpec::models()
            .into_iter()
            .map(|(f, d)| {
                let fit = fit_pitch_model(f, d, &targets, &grid, 400, 3).unwrap();
                (fit.best.name(), fit.score)
            })
            .collect();
        let best = scores.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        assert_eq!(best.0, "IS3", "{scores:?}");
    }

    #[test]
    fn empty_targets_rejected() {
        let grid = PitchGrid::default();
        assert!(fit_pitch_model(PitchFamily::S, LetterDist::Uniform, &[], &grid, 10, 0).is_err());
        assert!(fit_rhythm_model(
            ValueSet::SimpleIoi,
            RhythmDist::Metrical,
            &[],
            &RhythmGrid::default(),
            10,
            0
        )
        .is_err());
    }

    #[test]
    fn rhythm_objective_self_match() {
        let t = vec![
            RhythmTarget {
                h_ioi: 1.0,
                h_ioi_ratio: 1.2,
            },
            RhythmTarget {
                h_ioi: 1.5,
                h_ioi_ratio: 1.5,
            },
        ];
        assert_eq!(rhythm_objective(&t, &t, 0.02, 0.25).unwrap(), 0.0);
        assert_eq!(rhythm_objective(&[], &t, 0.02, 0.25).unwrap(), 1.0);
    }
}
