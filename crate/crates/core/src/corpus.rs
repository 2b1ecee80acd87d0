//! Melody and corpus types, the canonical JSON corpus format, and a small
//! monophonic kern reader.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{Signed, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A single note or rest. Times are exact rationals in quarter notes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NoteEvent {
    /// MIDI pitch (69 = A4); `None` marks a rest.
    pub pitch: Option<i32>,
    pub onset: Rational64,
    pub duration: Rational64,
}

impl NoteEvent {
    pub fn note(pitch: i32, onset: Rational64, duration: Rational64) -> Self {
        NoteEvent {
            pitch: Some(pitch),
            onset,
            duration,
        }
    }

    pub fn rest(onset: Rational64, duration: Rational64) -> Self {
        NoteEvent {
            pitch: None,
            onset,
            duration,
        }
    }

    pub fn is_rest(&self) -> bool {
        self.pitch.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Melody {
    id: String,
    events: Vec<NoteEvent>,
    key: Option<u8>,
}

impl Melody {
    /// Builds a melody, rejecting non-positive durations, decreasing onsets,
    /// out-of-range key annotations and all-rest event lists.
    pub fn new(id: impl Into<String>, events: Vec<NoteEvent>, key: Option<u8>) -> Result<Self> {
        let id = id.into();
        let invalid = |message: String| Error::Validation {
            melody: id.clone(),
            message,
        };
        for (i, ev) in events.iter().enumerate() {
            if ev.duration <= Rational64::zero() {
                return Err(invalid(format!(
                    "event {i} has non-positive duration {}",
                    ev.duration
                )));
            }
            if ev.onset.is_negative() {
                return Err(invalid(format!(
                    "event {i} has negative onset {}",
                    ev.onset
                )));
            }
            if i > 0 && ev.onset < events[i - 1].onset {
                return Err(invalid(format!(
                    "event {i} onset {} precedes previous onset {}",
                    ev.onset,
                    events[i - 1].onset
                )));
            }
        }
        if events.iter().all(NoteEvent::is_rest) {
            return Err(invalid("melody has no pitched notes".into()));
        }
        if let Some(k) = key {
            if k >= 12 {
                return Err(invalid(format!("key annotation {k} is not a chroma class")));
            }
        }
        Ok(Melody { id, events, key })
    }

    /// Consecutive notes with the given pitches and a shared duration.
    pub fn from_pitches(
        id: impl Into<String>,
        pitches: &[i32],
        duration: Rational64,
    ) -> Result<Self> {
        let events = pitches
            .iter()
            .enumerate()
            .map(|(i, &p)| NoteEvent::note(p, duration * i as i64, duration))
            .collect();
        Melody::new(id, events, None)
    }

    /// Consecutive notes with per-note durations.
    pub fn from_notes(id: impl Into<String>, notes: &[(i32, Rational64)]) -> Result<Self> {
        let mut onset = Rational64::zero();
        let mut events = Vec::with_capacity(notes.len());
        for &(p, d) in notes {
            events.push(NoteEvent::note(p, onset, d));
            onset += d;
        }
        Melody::new(id, events, None)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn events(&self) -> &[NoteEvent] {
        &self.events
    }

    pub fn key(&self) -> Option<u8> {
        self.key
    }

    /// Pitched events only, in order.
    pub fn notes(&self) -> impl Iterator<Item = &NoteEvent> + '_ {
        self.events.iter().filter(|e| !e.is_rest())
    }

    pub fn pitches(&self) -> Vec<i64> {
        self.notes()
            .filter_map(|e| e.pitch)
            .map(i64::from)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CorpusType {
    Folk,
    Art,
    Child,
    Teaching,
}

impl fmt::Display for CorpusType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CorpusType::Folk => "Folk",
            CorpusType::Art => "Art",
            CorpusType::Child => "Child",
            CorpusType::Teaching => "Teaching",
        };
        f.write_str(s)
    }
}

impl FromStr for CorpusType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Folk" => Ok(CorpusType::Folk),
            "Art" => Ok(CorpusType::Art),
            "Child" => Ok(CorpusType::Child),
            "Teaching" => Ok(CorpusType::Teaching),
            other => Err(Error::param(format!("unknown corpus type `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusMeta {
    pub corpus_id: String,
    pub corpus_type: CorpusType,
    pub region: String,
    pub composer_birth_year: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    meta: CorpusMeta,
    melodies: Vec<Melody>,
}

impl Corpus {
    pub fn new(meta: CorpusMeta, melodies: Vec<Melody>) -> Result<Self> {
        if melodies.is_empty() {
            return Err(Error::Validation {
                melody: meta.corpus_id.clone(),
                message: "corpus has no melodies".into(),
            });
        }
        let mut seen = HashSet::new();
        for m in &melodies {
            if !seen.insert(m.id.as_str()) {
                return Err(Error::Validation {
                    melody: m.id.clone(),
                    message: format!("duplicate melody id in corpus `{}`", meta.corpus_id),
                });
            }
        }
        Ok(Corpus { meta, melodies })
    }

    pub fn meta(&self) -> &CorpusMeta {
        &self.meta
    }

    pub fn id(&self) -> &str {
        &self.meta.corpus_id
    }

    pub fn melodies(&self) -> &[Melody] {
        &self.melodies
    }
}

// ---------------------------------------------------------------------------
// Canonical JSON format

/// Rational written as `"p/q"` (or `"p"`), parsed exactly.
#[derive(Debug, Clone, Copy)]
struct RationalStr(Rational64);

impl Serialize for RationalStr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", self.0.numer(), self.0.denom()))
    }
}

impl<'de> Deserialize<'de> for RationalStr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s)
            .map(RationalStr)
            .map_err(de::Error::custom)
    }
}

pub fn parse_rational(s: &str) -> std::result::Result<Rational64, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: i64 = num
        .parse()
        .map_err(|_| format!("invalid rational numerator in `{s}`"))?;
    let den: i64 = den
        .parse()
        .map_err(|_| format!("invalid rational denominator in `{s}`"))?;
    if den == 0 {
        return Err(format!("zero denominator in `{s}`"));
    }
    Ok(Rational64::new(num, den))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNote {
    pitch: Option<i32>,
    onset: RationalStr,
    duration: RationalStr,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMelody {
    id: String,
    key: Option<u8>,
    notes: Vec<RawNote>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCorpus {
    corpus_id: String,
    #[serde(rename = "type")]
    corpus_type: CorpusType,
    region: String,
    composer_birth_year: Option<i32>,
    melodies: Vec<RawMelody>,
}

/// Parses a corpus in the canonical JSON format.
pub fn parse_canonical(text: &str) -> Result<Corpus> {
    let raw: RawCorpus = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let meta = CorpusMeta {
        corpus_id: raw.corpus_id,
        corpus_type: raw.corpus_type,
        region: raw.region,
        composer_birth_year: raw.composer_birth_year,
    };
    let melodies = raw
        .melodies
        .into_iter()
        .map(|m| {
            let events = m
                .notes
                .into_iter()
                .map(|n| NoteEvent {
                    pitch: n.pitch,
                    onset: n.onset.0,
                    duration: n.duration.0,
                })
                .collect();
            Melody::new(m.id, events, m.key)
        })
        .collect::<Result<Vec<_>>>()?;
    Corpus::new(meta, melodies)
}

/// Serializes a corpus to the canonical JSON format.
pub fn to_canonical(corpus: &Corpus) -> String {
    let raw = RawCorpus {
        corpus_id: corpus.meta.corpus_id.clone(),
        corpus_type: corpus.meta.corpus_type,
        region: corpus.meta.region.clone(),
        composer_birth_year: corpus.meta.composer_birth_year,
        melodies: corpus
            .melodies
            .iter()
            .map(|m| RawMelody {
                id: m.id.clone(),
                key: m.key,
                notes: m
                    .events
                    .iter()
                    .map(|e| RawNote {
                        pitch: e.pitch,
                        onset: RationalStr(e.onset),
                        duration: RationalStr(e.duration),
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("corpus serialization cannot fail")
}

// ---------------------------------------------------------------------------
// Kern subset

#[derive(Debug, PartialEq, Eq, Clone, Copy)]
enum Tie {
    None,
    Start,
    Continue,
    End,
}

struct KernToken {
    pitch: Option<i32>,
    duration: Rational64,
    tie: Tie,
}

fn unsupported(token: &str, message: impl Into<String>) -> Error {
    Error::UnsupportedKern {
        token: token.to_string(),
        message: message.into(),
    }
}

fn parse_kern_token(tok: &str) -> Result<KernToken> {
    let chars: Vec<char> = tok.chars().collect();
    let mut i = 0;
    let mut tie = Tie::None;
    if chars.first() == Some(&'[') {
        tie = Tie::Start;
        i += 1;
    }

    let digits_start = i;
    while i < chars.len() && chars[i].is_ascii_digit() {
        i += 1;
    }
    if i == digits_start {
        return Err(unsupported(tok, "missing duration"));
    }
    let recip: i64 = chars[digits_start..i]
        .iter()
        .collect::<String>()
        .parse()
        .map_err(|_| unsupported(tok, "duration out of range"))?;
    // 0 is the breve
    let base = if recip == 0 {
        Rational64::from_integer(8)
    } else {
        Rational64::new(4, recip)
    };
    let mut duration = base;
    let mut add = base;
    while i < chars.len() && chars[i] == '.' {
        add /= 2;
        duration += add;
        i += 1;
    }

    let pitch = match chars.get(i) {
        Some('r') => {
            i += 1;
            while i < chars.len() && chars[i] == 'r' {
                i += 1;
            }
            None
        }
        Some(&c) if "abcdefgABCDEFG".contains(c) => {
            let mut n = 0;
            while i < chars.len() && chars[i] == c {
                n += 1;
                i += 1;
            }
            if i < chars.len() && "abcdefgABCDEFG".contains(chars[i]) {
                return Err(unsupported(tok, "chords are not supported"));
            }
            let step = match c.to_ascii_lowercase() {
                'c' => 0,
                'd' => 2,
                'e' => 4,
                'f' => 5,
                'g' => 7,
                'a' => 9,
                'b' => 11,
                _ => unreachable!(),
            };
            // c = C4 (60), cc = C5, C = C3, CC = C2
            let octave_base = if c.is_ascii_lowercase() {
                60 + 12 * (n - 1)
            } else {
                48 - 12 * (n - 1)
            };
            let mut pitch = octave_base + step;
            while i < chars.len() && matches!(chars[i], '#' | '-' | 'n') {
                match chars[i] {
                    '#' => pitch += 1,
                    '-' => pitch -= 1,
                    _ => {}
                }
                i += 1;
            }
            Some(pitch)
        }
        _ => return Err(unsupported(tok, "expected a pitch or rest")),
    };

    match chars.get(i) {
        None => {}
        Some(']') if tie == Tie::None => {
            tie = Tie::End;
            i += 1;
        }
        Some('_') if tie == Tie::None => {
            tie = Tie::Continue;
            i += 1;
        }
        _ => {}
    }
    if i != chars.len() {
        return Err(unsupported(
            tok,
            format!("unexpected `{}`", chars[i..].iter().collect::<String>()),
        ));
    }
    Ok(KernToken {
        pitch,
        duration,
        tie,
    })
}

/// Parses a single-spine monophonic kern fragment into a melody.
///
/// Supports durations (with dots), pitch letters with octave repetition and
/// accidentals, rests, ties, barlines, `*` interpretation records and `!`
/// comments. Everything else is rejected.
pub fn parse_kern_subset(id: &str, text: &str) -> Result<Melody> {
    let mut events: Vec<NoteEvent> = Vec::new();
    let mut onset = Rational64::zero();
    let mut open_tie: Option<usize> = None;

    for line in text.lines() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('!') {
            continue;
        }
        if line.contains('\t') {
            return Err(unsupported(line, "multiple spines are not supported"));
        }
        for tok in line.split_whitespace() {
            if tok.starts_with('=') {
                continue;
            }
            if tok.starts_with('*') {
                if matches!(tok, "*^" | "*v" | "*+" | "*x") {
                    return Err(unsupported(tok, "spine manipulation is not supported"));
                }
                continue;
            }
            let t = parse_kern_token(tok)?;
            match (t.tie, open_tie) {
                (Tie::Continue | Tie::End, Some(idx)) => {
                    if events[idx].pitch != t.pitch {
                        return Err(unsupported(tok, "tie joins different pitches"));
                    }
                    events[idx].duration += t.duration;
                    if t.tie == Tie::End {
                        open_tie = None;
                    }
                }
                (Tie::Continue | Tie::End, None) => {
                    return Err(unsupported(tok, "tie continuation without a tie start"));
                }
                (Tie::Start, Some(_)) => {
                    return Err(unsupported(tok, "nested tie start"));
                }
                (Tie::Start | Tie::None, None) => {
                    if t.tie == Tie::Start {
                        open_tie = Some(events.len());
                    }
                    events.push(NoteEvent {
                        pitch: t.pitch,
                        onset,
                        duration: t.duration,
                    });
                }
                (Tie::None, Some(_)) => {
                    return Err(unsupported(tok, "unterminated tie"));
                }
            }
            onset += t.duration;
        }
    }
    if open_tie.is_some() {
        return Err(unsupported("[", "unterminated tie at end of input"));
    }
    Melody::new(id, events, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    const ONE_MELODY: &str = r#"{
        "corpus_id": "test", "type": "Folk", "region": "Europe", "composer_birth_year": null,
        "melodies": [ { "id": "m1", "key": null, "notes": [
            { "pitch": 60, "onset": "0/4", "duration": "1/4" },
            { "pitch": 60, "onset": "1/4", "duration": "1/4" },
            { "pitch": 60, "onset": "2/4", "duration": "1/4" } ] } ] }"#;

    #[test]
    fn parses_one_melody() {
        let c = parse_canonical(ONE_MELODY).unwrap();
        assert_eq!(c.melodies().len(), 1);
        assert_eq!(c.melodies()[0].events().len(), 3);
        assert_eq!(c.melodies()[0].events()[2].onset, r(1, 2));
        assert_eq!(c.meta().corpus_type, CorpusType::Folk);
    }

    #[test]
    fn null_pitch_is_rest() {
        let text = ONE_MELODY.replacen(
            "\"pitch\": 60, \"onset\": \"1/4\"",
            "\"pitch\": null, \"onset\": \"1/4\"",
            1,
        );
        let c = parse_canonical(&text).unwrap();
        assert!(c.melodies()[0].events()[1].is_rest());
    }

    #[test]
    fn zero_duration_rejected() {
        let text = ONE_MELODY.replacen("\"duration\": \"1/4\"", "\"duration\": \"0/4\"", 1);
        match parse_canonical(&text) {
            Err(Error::Validation { melody, .. }) => assert_eq!(melody, "m1"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn negative_duration_names_melody() {
        let text = ONE_MELODY.replacen("\"duration\": \"1/4\"", "\"duration\": \"-1/4\"", 1);
        let err = parse_canonical(&text).unwrap_err();
        assert!(matches!(err, Error::Validation { ref melody, .. } if melody == "m1"));
    }

    #[test]
    fn malformed_syntax_reports_position() {
        let err = parse_canonical("{\n  \"corpus_id\": ,\n}").unwrap_err();
        match err {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_rational_reports_position() {
        let text = ONE_MELODY.replacen("\"1/4\"", "\"1/x\"", 1);
        assert!(matches!(parse_canonical(&text), Err(Error::Parse { .. })));
    }

    #[test]
    fn decreasing_onsets_rejected() {
        let text = ONE_MELODY.replacen("\"onset\": \"2/4\"", "\"onset\": \"0/4\"", 1);
        assert!(matches!(
            parse_canonical(&text),
            Err(Error::Validation { .. })
        ));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let m = Melody::from_pitches("a", &[60], r(1, 1)).unwrap();
        let meta = CorpusMeta {
            corpus_id: "c".into(),
            corpus_type: CorpusType::Art,
            region: "x".into(),
            composer_birth_year: Some(1850),
        };
        assert!(Corpus::new(meta, vec![m.clone(), m]).is_err());
    }

    #[test]
    fn all_rest_melody_rejected() {
        let ev = vec![NoteEvent::rest(r(0, 1), r(1, 1))];
        assert!(Melody::new("x", ev, None).is_err());
    }

    #[test]
    fn kern_basic() {
        let m = parse_kern_subset("k", "4c 4d 4e").unwrap();
        assert_eq!(m.pitches(), vec![60, 62, 64]);
        assert!(m.events().iter().all(|e| e.duration == r(1, 1)));
    }

    #[test]
    fn kern_dotted_and_rest() {
        let m = parse_kern_subset("k", "8.a 2.r 4c").unwrap();
        assert_eq!(m.events()[0].pitch, Some(69));
        assert_eq!(m.events()[0].duration, r(3, 4));
        assert!(m.events()[1].is_rest());
        assert_eq!(m.events()[1].duration, r(3, 1));
        assert_eq!(m.events()[2].onset, r(15, 4));
    }

    #[test]
    fn kern_octaves_and_accidentals() {
        let m = parse_kern_subset("k", "4cc 4C 4CC 4f# 4b- 4en").unwrap();
        assert_eq!(m.pitches(), vec![72, 48, 36, 66, 70, 64]);
    }

    #[test]
    fn kern_tie_merges() {
        let m = parse_kern_subset("k", "[4c 4c]").unwrap();
        assert_eq!(m.events().len(), 1);
        assert_eq!(m.events()[0].duration, r(2, 1));
        let m = parse_kern_subset("k", "[4c 4c_ 8c] 4d").unwrap();
        assert_eq!(m.events()[0].duration, r(5, 2));
        assert_eq!(m.events()[1].onset, r(5, 2));
    }

    #[test]
    fn kern_headers_barlines_comments() {
        let text = "**kern\n*M4/4\n!! comment\n=1\n4c\n4d\n=2\n2e\n*-\n";
        let m = parse_kern_subset("k", text).unwrap();
        assert_eq!(m.pitches(), vec![60, 62, 64]);
    }

    #[test]
    fn kern_unsupported_constructs() {
        for bad in ["4ce", "4c\t4e", "4cL", "4c;", "*^", "[4c 4d]", "4c]", "q"] {
            assert!(
                matches!(
                    parse_kern_subset("k", bad),
                    Err(Error::UnsupportedKern { .. })
                ),
                "{bad} should be rejected"
            );
        }
    }
}
