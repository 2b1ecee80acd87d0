//! Recursive removal of repeated substrings and the measures built on it.
//!
//! Each round finds every substring of length at least `l_min` (and at most
//! half the original length) that occurs two or more times without overlap
//! across the current pieces, picks the one maximising occurrences × length,
//! cuts all its occurrences out of the pieces and keeps a single copy of it as
//! a new piece. Rounds repeat until nothing repeats.

use std::collections::HashMap;
use std::hash::Hash;

use crate::corpus::Melody;
use crate::error::{Error, Result};
use crate::info::sequence_entropy;
use crate::viewpoints::{extract_viewpoint, ViewpointKind};

pub const DEFAULT_L_MIN: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepetitionResult<T> {
    pub pieces: Vec<Vec<T>>,
    /// Combined length of the final pieces.
    pub l_nr: usize,
    /// Selected matches in removal order, with their non-overlapping counts.
    pub removed: Vec<(Vec<T>, usize)>,
}

/// Non-overlapping occurrence counts of every length-`len` substring across
/// `pieces`, counted leftmost-first within each piece. The flag reports
/// whether any substring of that length occurs twice at all.
fn counts_at_length<'a, T: Hash + Eq>(
    pieces: &'a [Vec<T>],
    len: usize,
) -> (HashMap<&'a [T], usize>, bool) {
    // (count, piece index, end of last counted occurrence)
    let mut table: HashMap<&[T], (usize, usize, usize)> = HashMap::new();
    let mut any_repeat = false;
    for (pi, piece) in pieces.iter().enumerate() {
        if piece.len() < len {
            continue;
        }
        for start in 0..=piece.len() - len {
            let key = &piece[start..start + len];
            match table.get_mut(key) {
                None => {
                    table.insert(key, (1, pi, start + len));
                }
                Some(entry) => {
                    any_repeat = true;
                    if entry.1 != pi || start >= entry.2 {
                        entry.0 += 1;
                        entry.1 = pi;
                        entry.2 = start + len;
                    }
                }
            }
        }
    }
    let counts = table.into_iter().map(|(k, (c, _, _))| (k, c)).collect();
    (counts, any_repeat)
}

/// Every distinct substring with length in `l_min..=max_len` that occurs at
/// least twice without overlap, with its count.
pub fn repeated_substrings<T: Hash + Eq + Ord + Clone>(
    pieces: &[Vec<T>],
    l_min: usize,
    max_len: usize,
) -> Vec<(Vec<T>, usize)> {
    let mut out = Vec::new();
    for len in l_min.max(1)..=max_len {
        let (counts, any_repeat) = counts_at_length(pieces, len);
        if !any_repeat {
            break;
        }
        let mut found: Vec<(Vec<T>, usize)> = counts
            .into_iter()
            .filter(|&(_, c)| c >= 2)
            .map(|(k, c)| (k.to_vec(), c))
            .collect();
        found.sort();
        out.extend(found);
    }
    out
}

/// Mean length of the distinct repeated substrings of `seq` (lengths
/// `l_min..=|seq|/2`); `None` when nothing repeats.
pub fn mean_repeated_length<T: Hash + Eq + Ord + Clone>(seq: &[T], l_min: usize) -> Option<f64> {
    let found = repeated_substrings(&[seq.to_vec()], l_min, seq.len() / 2);
    if found.is_empty() {
        return None;
    }
    Some(found.iter().map(|(s, _)| s.len() as f64).sum::<f64>() / found.len() as f64)
}

struct Candidate<T> {
    score: usize,
    len: usize,
    key: Vec<T>,
    count: usize,
}

fn best_match<T: Hash + Eq + Ord + Clone>(
    pieces: &[Vec<T>],
    l_min: usize,
    max_len: usize,
) -> Option<Candidate<T>> {
    let mut best: Option<Candidate<T>> = None;
    for len in l_min..=max_len {
        let (counts, any_repeat) = counts_at_length(pieces, len);
        if !any_repeat {
            break;
        }
        for (key, count) in counts {
            if count < 2 {
                continue;
            }
            let score = count * len;
            // higher score, then longer, then lexicographically smaller
            let better = match &best {
                None => true,
                Some(b) => {
                    (score, len) > (b.score, b.len)
                        || ((score, len) == (b.score, b.len) && key < b.key.as_slice())
                }
            };
            if better {
                best = Some(Candidate {
                    score,
                    len,
                    key: key.to_vec(),
                    count,
                });
            }
        }
    }
    best
}

/// Cuts every leftmost non-overlapping occurrence of `m` out of `pieces`,
/// keeping the nonempty fragments in order.
fn divide_by_match<T: PartialEq + Clone>(pieces: &[Vec<T>], m: &[T]) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    for piece in pieces {
        let mut start = 0;
        let mut i = 0;
        while i + m.len() <= piece.len() {
            if &piece[i..i + m.len()] == m {
                if i > start {
                    out.push(piece[start..i].to_vec());
                }
                i += m.len();
                start = i;
            } else {
                i += 1;
            }
        }
        if start < piece.len() {
            out.push(piece[start..].to_vec());
        }
    }
    out
}

pub fn remove_repetition<T: Hash + Eq + Ord + Clone>(
    seq: &[T],
    l_min: usize,
) -> Result<RepetitionResult<T>> {
    if l_min < 2 {
        return Err(Error::param(format!(
            "l_min must be at least 2, got {l_min}"
        )));
    }
    if seq.is_empty() {
        return Err(Error::Length(
            "repetition removal of an empty sequence".into(),
        ));
    }
    let max_len = seq.len() / 2;
    let mut pieces = vec![seq.to_vec()];
    let mut removed = Vec::new();
    while let Some(best) = best_match(&pieces, l_min, max_len) {
        let mut next = divide_by_match(&pieces, &best.key);
        next.push(best.key.clone());
        pieces = next;
        removed.push((best.key, best.count));
    }
    let l_nr = pieces.iter().map(Vec::len).sum();
    Ok(RepetitionResult {
        pieces,
        l_nr,
        removed,
    })
}

/// `1 - L_NR / L`.
pub fn repetition_fraction<T: Hash + Eq + Ord + Clone>(seq: &[T], l_min: usize) -> Result<f64> {
    let res = remove_repetition(seq, l_min)?;
    Ok(1.0 - res.l_nr as f64 / seq.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TotalInfo {
    /// Unigram entropy of the joint chroma/duration sequence.
    pub h_joint: f64,
    /// Non-repeated length of the same sequence.
    pub l_nr: usize,
    /// `h_joint * l_nr`, in bits.
    pub total: f64,
    pub length: usize,
}

pub fn total_information(melody: &Melody) -> Result<TotalInfo> {
    let joint = extract_viewpoint(melody, ViewpointKind::JointChromaDuration)?;
    let h_joint = sequence_entropy(&joint.symbols);
    let rep = remove_repetition(&joint.symbols, DEFAULT_L_MIN)?;
    Ok(TotalInfo {
        h_joint,
        l_nr: rep.l_nr,
        total: h_joint * rep.l_nr as f64,
        length: joint.len(),
    })
}
