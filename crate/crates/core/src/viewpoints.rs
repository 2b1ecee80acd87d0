//! Melodic viewpoints: symbol sequences derived from a melody's pitches and
//! timing.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::Zero;

use crate::corpus::Melody;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViewpointKind {
    Pitch,
    Chroma,
    ScaleDegree,
    MInt,
    SInt,
    Contour,
    Duration,
    Ioi,
    IoiRatio,
    DurationRatio,
    JointChromaDuration,
    JointMIntDuration,
}

impl ViewpointKind {
    pub const ALL: [ViewpointKind; 12] = [
        ViewpointKind::Pitch,
        ViewpointKind::Chroma,
        ViewpointKind::ScaleDegree,
        ViewpointKind::MInt,
        ViewpointKind::SInt,
        ViewpointKind::Contour,
        ViewpointKind::Duration,
        ViewpointKind::Ioi,
        ViewpointKind::IoiRatio,
        ViewpointKind::DurationRatio,
        ViewpointKind::JointChromaDuration,
        ViewpointKind::JointMIntDuration,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ViewpointKind::Pitch => "pitch",
            ViewpointKind::Chroma => "chroma",
            ViewpointKind::ScaleDegree => "sdeg",
            ViewpointKind::MInt => "mint",
            ViewpointKind::SInt => "sint",
            ViewpointKind::Contour => "contour",
            ViewpointKind::Duration => "duration",
            ViewpointKind::Ioi => "ioi",
            ViewpointKind::IoiRatio => "ioi-ratio",
            ViewpointKind::DurationRatio => "duration-ratio",
            ViewpointKind::JointChromaDuration => "chroma-duration",
            ViewpointKind::JointMIntDuration => "mint-duration",
        }
    }

    pub fn is_pitch(self) -> bool {
        matches!(
            self,
            ViewpointKind::Pitch
                | ViewpointKind::Chroma
                | ViewpointKind::ScaleDegree
                | ViewpointKind::MInt
                | ViewpointKind::SInt
                | ViewpointKind::Contour
        )
    }

    pub fn is_rhythm(self) -> bool {
        matches!(
            self,
            ViewpointKind::Duration
                | ViewpointKind::Ioi
                | ViewpointKind::IoiRatio
                | ViewpointKind::DurationRatio
        )
    }
}

impl fmt::Display for ViewpointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ViewpointKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        let kind = match norm.as_str() {
            "pitch" => ViewpointKind::Pitch,
            "chroma" => ViewpointKind::Chroma,
            "sdeg" | "s-deg" | "scale-degree" | "scaledegree" => ViewpointKind::ScaleDegree,
            "mint" | "m-int" => ViewpointKind::MInt,
            "sint" | "s-int" => ViewpointKind::SInt,
            "contour" => ViewpointKind::Contour,
            "duration" | "dur" => ViewpointKind::Duration,
            "ioi" => ViewpointKind::Ioi,
            "ioi-ratio" | "ioiratio" => ViewpointKind::IoiRatio,
            "duration-ratio" | "durationratio" | "dur-ratio" => ViewpointKind::DurationRatio,
            "chroma-duration" | "chroma:duration" => ViewpointKind::JointChromaDuration,
            "mint-duration" | "mint:duration" => ViewpointKind::JointMIntDuration,
            _ => return Err(Error::param(format!("unknown viewpoint `{s}`"))),
        };
        Ok(kind)
    }
}

/// One letter of a viewpoint alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Int(i64),
    Ratio(Rational64),
    Pair(i64, Rational64),
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Int(i) => write!(f, "{i}"),
            Symbol::Ratio(r) => write!(f, "{r}"),
            Symbol::Pair(i, r) => write!(f, "{i}:{r}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewpointSequence {
    pub kind: ViewpointKind,
    pub symbols: Vec<Symbol>,
}

impl ViewpointSequence {
    pub fn new(kind: ViewpointKind, symbols: Vec<Symbol>) -> Self {
        ViewpointSequence { kind, symbols }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Integer payloads; `None` if any symbol is not an integer.
    pub fn ints(&self) -> Option<Vec<i64>> {
        self.symbols
            .iter()
            .map(|s| match s {
                Symbol::Int(i) => Some(*i),
                _ => None,
            })
            .collect()
    }
}

pub fn chroma_of(pitch: i64) -> i64 {
    pitch.rem_euclid(12)
}

/// Rank of each chroma among the distinct chromas of the sequence.
pub fn scale_degrees(chromas: &[i64]) -> Vec<i64> {
    let distinct: Vec<i64> = chromas
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    chromas
        .iter()
        .map(|c| distinct.binary_search(c).expect("chroma present") as i64)
        .collect()
}

pub fn differences(xs: &[i64]) -> Vec<i64> {
    xs.windows(2).map(|w| w[1] - w[0]).collect()
}

fn ratios(xs: &[Rational64], what: &str) -> Result<Vec<Rational64>> {
    xs.windows(2)
        .map(|w| {
            if w[0].is_zero() {
                Err(Error::Degenerate(format!(
                    "zero {what} makes the ratio undefined (simultaneous onsets)"
                )))
            } else {
                Ok(w[1] / w[0])
            }
        })
        .collect()
}

fn durations(m: &Melody) -> Vec<Rational64> {
    m.notes().map(|e| e.duration).collect()
}

fn iois(m: &Melody) -> Result<Vec<Rational64>> {
    let onsets: Vec<Rational64> = m.notes().map(|e| e.onset).collect();
    if onsets.len() < 2 {
        return Err(Error::Length(format!(
            "IOI needs at least 2 onsets, melody `{}` has {}",
            m.id(),
            onsets.len()
        )));
    }
    Ok(onsets.windows(2).map(|w| w[1] - w[0]).collect())
}

fn ints(v: Vec<i64>) -> Vec<Symbol> {
    v.into_iter().map(Symbol::Int).collect()
}

fn rats(v: Vec<Rational64>) -> Vec<Symbol> {
    v.into_iter().map(Symbol::Ratio).collect()
}

/// Derives one viewpoint sequence. Pitch-based kinds and `Duration` skip
/// rests; `Ioi` is measured between successive note onsets, so a rest is
/// absorbed into the preceding interval.
pub fn extract_viewpoint(melody: &Melody, kind: ViewpointKind) -> Result<ViewpointSequence> {
    let pitches = melody.pitches();
    let chroma = || pitches.iter().map(|&p| chroma_of(p)).collect::<Vec<_>>();
    let symbols = match kind {
        ViewpointKind::Pitch => ints(pitches.clone()),
        ViewpointKind::Chroma => ints(chroma()),
        ViewpointKind::ScaleDegree => ints(scale_degrees(&chroma())),
        ViewpointKind::MInt => ints(differences(&pitches)),
        ViewpointKind::SInt => ints(differences(&scale_degrees(&chroma()))),
        ViewpointKind::Contour => {
            ints(differences(&pitches).into_iter().map(i64::signum).collect())
        }
        ViewpointKind::Duration => rats(durations(melody)),
        ViewpointKind::Ioi => rats(iois(melody)?),
        ViewpointKind::IoiRatio => rats(ratios(&iois(melody)?, "IOI")?),
        ViewpointKind::DurationRatio => rats(ratios(&durations(melody), "duration")?),
        ViewpointKind::JointChromaDuration => chroma()
            .into_iter()
            .zip(durations(melody))
            .map(|(c, d)| Symbol::Pair(c, d))
            .collect(),
        ViewpointKind::JointMIntDuration => differences(&pitches)
            .into_iter()
            .zip(durations(melody))
            .map(|(i, d)| Symbol::Pair(i, d))
            .collect(),
    };
    Ok(ViewpointSequence::new(kind, symbols))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TonicMethod {
    Final,
    First,
    Modal,
}

impl FromStr for TonicMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "final" => Ok(TonicMethod::Final),
            "first" => Ok(TonicMethod::First),
            "modal" => Ok(TonicMethod::Modal),
            _ => Err(Error::param(format!("unknown tonic method `{s}`"))),
        }
    }
}

pub fn estimate_tonic(melody: &Melody, method: TonicMethod) -> Result<u8> {
    let chromas: Vec<i64> = melody.pitches().into_iter().map(chroma_of).collect();
    let (Some(&first), Some(&last)) = (chromas.first(), chromas.last()) else {
        return Err(Error::Validation {
            melody: melody.id().to_string(),
            message: "cannot estimate the tonic of an all-rest melody".into(),
        });
    };
    let tonic = match method {
        TonicMethod::Final => last,
        TonicMethod::First => first,
        TonicMethod::Modal => {
            let mut counts = [0usize; 12];
            for &c in &chromas {
                counts[c as usize] += 1;
            }
            let max = *counts.iter().max().expect("twelve classes");
            if counts[last as usize] == max {
                last
            } else {
                counts.iter().position(|&n| n == max).expect("max exists") as i64
            }
        }
    };
    Ok(tonic as u8)
}

/// Fraction of key-annotated melodies whose estimated tonic matches the
/// annotation; `None` when no melody is annotated.
pub fn tonic_accuracy<'a>(
    melodies: impl IntoIterator<Item = &'a Melody>,
    method: TonicMethod,
) -> Option<f64> {
    let mut total = 0usize;
    let mut hits = 0usize;
    for m in melodies {
        if let Some(k) = m.key() {
            total += 1;
            if estimate_tonic(m, method).ok() == Some(k) {
                hits += 1;
            }
        }
    }
    (total > 0).then(|| hits as f64 / total as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OctaveRecovery {
    pub predicted: Vec<i64>,
    pub accuracy: Option<f64>,
}

/// The interval in [-6, +5] congruent to `to - from` modulo 12.
pub fn nearest_interval(from: i64, to: i64) -> i64 {
    (to - from + 6).rem_euclid(12) - 6
}

/// Predicts melodic intervals from a chroma sequence by assuming the smaller
/// of the two candidate motions.
pub fn recover_octaves(
    chroma: &ViewpointSequence,
    truth: Option<&[i64]>,
) -> Result<OctaveRecovery> {
    if chroma.kind != ViewpointKind::Chroma {
        return Err(Error::param(format!(
            "octave recovery needs a chroma sequence, got {}",
            chroma.kind
        )));
    }
    let cs = chroma
        .ints()
        .ok_or_else(|| Error::param("chroma sequence holds non-integer symbols"))?;
    if cs.len() < 2 {
        return Err(Error::Length(
            "octave recovery needs at least 2 notes".into(),
        ));
    }
    let predicted: Vec<i64> = cs
        .windows(2)
        .map(|w| nearest_interval(w[0], w[1]))
        .collect();
    let accuracy = match truth {
        None => None,
        Some(t) => {
            if t.len() != predicted.len() {
                return Err(Error::Length(format!(
                    "truth has {} intervals, prediction has {}",
                    t.len(),
                    predicted.len()
                )));
            }
            let hits = predicted.iter().zip(t).filter(|(p, t)| p == t).count();
            Some(hits as f64 / predicted.len() as f64)
        }
    };
    Ok(OctaveRecovery {
        predicted,
        accuracy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::NoteEvent;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    fn melody(pitches: &[i32]) -> Melody {
        Melody::from_pitches("m", pitches, r(1, 1)).unwrap()
    }

    fn get(m: &Melody, k: ViewpointKind) -> Vec<Symbol> {
        extract_viewpoint(m, k).unwrap().symbols
    }

    #[test]
    fn mint_and_chroma() {
        let m = melody(&[60, 62, 59]);
        assert_eq!(get(&m, ViewpointKind::MInt), ints(vec![2, -3]));
        assert_eq!(get(&melody(&[69]), ViewpointKind::Chroma), ints(vec![9]));
    }

    #[test]
    fn scale_degree_and_sint() {
        let m = melody(&[60, 64, 62, 67]);
        assert_eq!(get(&m, ViewpointKind::ScaleDegree), ints(vec![0, 2, 1, 3]));
        assert_eq!(get(&m, ViewpointKind::SInt), ints(vec![2, -1, 2]));
    }

    #[test]
    fn contour_keeps_repeats() {
        let m = melody(&[60, 60, 62, 59]);
        assert_eq!(get(&m, ViewpointKind::Contour), ints(vec![0, 1, -1]));
    }

    #[test]
    fn ioi_ratio() {
        let m = Melody::from_notes(
            "m",
            &[(60, r(1, 1)), (62, r(2, 1)), (64, r(1, 1)), (65, r(1, 1))],
        )
        .unwrap();
        assert_eq!(
            get(&m, ViewpointKind::Ioi),
            rats(vec![r(1, 1), r(2, 1), r(1, 1)])
        );
        assert_eq!(
            get(&m, ViewpointKind::IoiRatio),
            rats(vec![r(2, 1), r(1, 2)])
        );
        assert_eq!(
            get(&m, ViewpointKind::DurationRatio),
            rats(vec![r(2, 1), r(1, 2), r(1, 1)])
        );
    }

    #[test]
    fn rests_skipped_by_duration_absorbed_by_ioi() {
        let ev = vec![
            NoteEvent::note(60, r(0, 1), r(1, 1)),
            NoteEvent::rest(r(1, 1), r(1, 1)),
            NoteEvent::note(62, r(2, 1), r(1, 2)),
        ];
        let m = Melody::new("m", ev, None).unwrap();
        assert_eq!(
            get(&m, ViewpointKind::Duration),
            rats(vec![r(1, 1), r(1, 2)])
        );
        assert_eq!(get(&m, ViewpointKind::Ioi), rats(vec![r(2, 1)]));
        assert_eq!(get(&m, ViewpointKind::MInt), ints(vec![2]));
    }

    #[test]
    fn joint_truncates_to_shorter() {
        let m = melody(&[60, 62, 59]);
        let j = get(&m, ViewpointKind::JointMIntDuration);
        assert_eq!(j, vec![Symbol::Pair(2, r(1, 1)), Symbol::Pair(-3, r(1, 1))]);
        assert_eq!(get(&m, ViewpointKind::JointChromaDuration).len(), 3);
    }

    #[test]
    fn ioi_needs_two_onsets() {
        let m = melody(&[60]);
        assert!(matches!(
            extract_viewpoint(&m, ViewpointKind::Ioi),
            Err(Error::Length(_))
        ));
    }

    #[test]
    fn zero_ioi_ratio_is_degenerate() {
        let ev = vec![
            NoteEvent::note(60, r(0, 1), r(1, 1)),
            NoteEvent::note(64, r(0, 1), r(1, 1)),
            NoteEvent::note(67, r(1, 1), r(1, 1)),
        ];
        let m = Melody::new("m", ev, None).unwrap();
        assert!(matches!(
            extract_viewpoint(&m, ViewpointKind::IoiRatio),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn tonic_methods() {
        assert_eq!(
            estimate_tonic(&melody(&[62, 64, 60]), TonicMethod::Final).unwrap(),
            0
        );
        assert_eq!(
            estimate_tonic(&melody(&[62, 64, 60]), TonicMethod::First).unwrap(),
            2
        );
        assert_eq!(
            estimate_tonic(&melody(&[60, 60, 62]), TonicMethod::Modal).unwrap(),
            0
        );
        // tie between 2 and 4 favours the final note
        assert_eq!(
            estimate_tonic(&melody(&[62, 64, 64, 62]), TonicMethod::Modal).unwrap(),
            2
        );
        // tie without the final note falls back to the lowest class
        assert_eq!(
            estimate_tonic(&melody(&[64, 62, 64, 62, 67]), TonicMethod::Modal).unwrap(),
            2
        );
    }

    #[test]
    fn octave_recovery_example() {
        let seq = ViewpointSequence::new(ViewpointKind::Chroma, ints(vec![2, 10]));
        let rec = recover_octaves(&seq, None).unwrap();
        assert_eq!(rec.predicted, vec![-4]);
        assert_eq!(rec.accuracy, None);
    }

    #[test]
    fn tritone_maps_down() {
        assert_eq!(nearest_interval(0, 6), -6);
        assert_eq!(nearest_interval(6, 0), -6);
    }

    #[test]
    fn octave_recovery_accuracy() {
        let m = melody(&[60, 67, 62, 74]);
        let chroma = extract_viewpoint(&m, ViewpointKind::Chroma).unwrap();
        let truth = extract_viewpoint(&m, ViewpointKind::MInt)
            .unwrap()
            .ints()
            .unwrap();
        let rec = recover_octaves(&chroma, Some(&truth)).unwrap();
        // +7 -> -5 (wrong), -5 -> -5, +12 -> 0 (wrong)
        assert_eq!(rec.predicted, vec![-5, -5, 0]);
        assert!((rec.accuracy.unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn recover_rejects_other_kinds() {
        let seq = ViewpointSequence::new(ViewpointKind::Pitch, ints(vec![1, 2]));
        assert!(recover_octaves(&seq, None).is_err());
    }

    #[test]
    fn viewpoint_names_round_trip() {
        for k in ViewpointKind::ALL {
            assert_eq!(k.name().parse::<ViewpointKind>().unwrap(), k);
        }
    }
}
