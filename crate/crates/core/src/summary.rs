//! Per-corpus averages of the main information measures.

use crate::corpus::Corpus;
use crate::error::Result;
use crate::info::sequence_entropy;
use crate::repetition::total_information;
use crate::table::Record;
use crate::viewpoints::{extract_viewpoint, ViewpointKind};

pub const SUMMARY_COLUMNS: [&str; 7] = [
    "name",
    "H_chroma",
    "H_dur",
    "H_chroma_dur",
    "length",
    "length_nr",
    "total_info",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRecord {
    pub name: String,
    pub h_chroma: f64,
    pub h_dur: f64,
    pub h_chroma_dur: f64,
    pub length: f64,
    /// Mean non-repeated length of the joint chroma/duration sequence.
    pub length_nr: f64,
    pub total_info: f64,
}

impl SummaryRecord {
    pub fn to_record(&self) -> Record {
        Record::new()
            .with("name", self.name.as_str())
            .with("H_chroma", self.h_chroma)
            .with("H_dur", self.h_dur)
            .with("H_chroma_dur", self.h_chroma_dur)
            .with("length", self.length)
            .with("length_nr", self.length_nr)
            .with("total_info", self.total_info)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedMelody {
    pub corpus: String,
    pub melody: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Summary {
    /// One row per corpus with at least one usable melody, sorted by id.
    pub records: Vec<SummaryRecord>,
    pub skipped: Vec<SkippedMelody>,
}

struct MelodyStats {
    h_chroma: f64,
    h_dur: f64,
    h_joint: f64,
    length: usize,
    l_nr: usize,
    total: f64,
}

fn melody_stats(m: &crate::corpus::Melody) -> Result<MelodyStats> {
    let h = |k| extract_viewpoint(m, k).map(|s| sequence_entropy(&s.symbols));
    let t = total_information(m)?;
    Ok(MelodyStats {
        h_chroma: h(ViewpointKind::Chroma)?,
        h_dur: h(ViewpointKind::Duration)?,
        h_joint: t.h_joint,
        length: t.length,
        l_nr: t.l_nr,
        total: t.total,
    })
}

pub fn run_summary(corpora: &[Corpus]) -> Summary {
    let mut sorted: Vec<&Corpus> = corpora.iter().collect();
    sorted.sort_by(|a, b| a.id().cmp(b.id()));
    let mut out = Summary::default();
    for c in sorted {
        let mut rows = Vec::new();
        for m in c.melodies() {
            match melody_stats(m) {
                Ok(s) => rows.push(s),
                Err(e) => out.skipped.push(SkippedMelody {
                    corpus: c.id().to_string(),
                    melody: m.id().to_string(),
                    reason: e.to_string(),
                }),
            }
        }
        if rows.is_empty() {
            continue;
        }
        let n = rows.len() as f64;
        let avg = |f: fn(&MelodyStats) -> f64| rows.iter().map(f).sum::<f64>() / n;
        out.records.push(SummaryRecord {
            name: c.id().to_string(),
            h_chroma: avg(|s| s.h_chroma),
            h_dur: avg(|s| s.h_dur),
            h_chroma_dur: avg(|s| s.h_joint),
            length: avg(|s| s.length as f64),
            length_nr: avg(|s| s.l_nr as f64),
            total_info: avg(|s| s.total),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CorpusMeta, CorpusType, Melody};
    use num_rational::Rational64;

    fn corpus(id: &str, melodies: Vec<Melody>) -> Corpus {
        let meta = CorpusMeta {
            corpus_id: id.into(),
            corpus_type: CorpusType::Folk,
            region: "x".into(),
            composer_birth_year: None,
        };
        Corpus::new(meta, melodies).unwrap()
    }

    #[test]
    fn one_note_melody() {
        let m = Melody::from_pitches("m", &[60], Rational64::new(1, 1)).unwrap();
        let s = run_summary(&[corpus("solo", vec![m])]);
        let r = &s.records[0];
        assert_eq!((r.h_chroma, r.h_dur, r.h_chroma_dur), (0.0, 0.0, 0.0));
        assert_eq!((r.length, r.length_nr, r.total_info), (1.0, 1.0, 0.0));
        assert!(s.skipped.is_empty());
    }

    #[test]
    fn rows_sorted_by_id() {
        let m = || Melody::from_pitches("m", &[60, 62], Rational64::new(1, 1)).unwrap();
        let s = run_summary(&[corpus("b", vec![m()]), corpus("a", vec![m()])]);
        let names: Vec<&str> = s.records.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, ["a", "b"]);
    }
}
