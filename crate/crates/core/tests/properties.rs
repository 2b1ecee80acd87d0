use std::collections::BTreeSet;

use melic_core::genmodel::{generate_pitch_sequences, LetterDist, PitchFamily, PitchModelSpec};
use melic_core::info::{
    distribution_of, entropy_lower_bound, gini, max_gini, mutual_information, sequence_entropy,
    Distribution,
};
use melic_core::ppm::train_ppm;
use melic_core::repetition::{remove_repetition, DEFAULT_L_MIN};
use melic_core::stats::{
    benjamini_hochberg, bonferroni, contains_ngram, joint_entropy_null, jsd, ngram_similarity,
    pearson, variance, CorpusMeans, Grid, Kde,
};
use melic_core::viewpoints::recover_octaves;
use melic_core::{
    extract_viewpoint, parse_canonical, to_canonical, Corpus, CorpusMeta, CorpusType, Melody,
    Rational64, Symbol, ViewpointKind,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn durations() -> impl Strategy<Value = Rational64> {
    prop_oneof![
        Just(Rational64::new(1, 4)),
        Just(Rational64::new(1, 2)),
        Just(Rational64::new(1, 1)),
        Just(Rational64::new(3, 2)),
        Just(Rational64::new(2, 1)),
        Just(Rational64::new(1, 3)),
    ]
}

fn melody(max_len: usize) -> impl Strategy<Value = Melody> {
    prop::collection::vec((40i32..90, durations()), 2..max_len)
        .prop_map(|notes| Melody::from_notes("m", &notes).unwrap())
}

fn corpus_of(melodies: Vec<Melody>) -> Corpus {
    let melodies = melodies
        .into_iter()
        .enumerate()
        .map(|(i, m)| Melody::new(format!("m{i:03}"), m.events().to_vec(), m.key()).unwrap())
        .collect();
    let meta = CorpusMeta {
        corpus_id: "prop".into(),
        corpus_type: CorpusType::Teaching,
        region: "anywhere".into(),
        composer_birth_year: Some(1900),
    };
    Corpus::new(meta, melodies).unwrap()
}

fn ints(m: &Melody, kind: ViewpointKind) -> Vec<i64> {
    extract_viewpoint(m, kind).unwrap().ints().unwrap()
}

fn pairwise_gini(p: &[f64]) -> f64 {
    let mut s = 0.0;
    for x in p {
        for y in p {
            s += (x - y).abs();
        }
    }
    s / (2.0 * p.len() as f64)
}

fn count_nonoverlap<T: PartialEq>(piece: &[T], m: &[T]) -> usize {
    let (mut i, mut c) = (0, 0);
    while i + m.len() <= piece.len() {
        if piece[i..i + m.len()] == *m {
            c += 1;
            i += m.len();
        } else {
            i += 1;
        }
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 128,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn canonical_round_trip(ms in prop::collection::vec(melody(30), 1..5)) {
        let c = corpus_of(ms);
        let back = parse_canonical(&to_canonical(&c)).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(to_canonical(&back), to_canonical(&c));
    }

    #[test]
    fn chroma_and_mint_agree_with_pitch(m in melody(60)) {
        let pitch = ints(&m, ViewpointKind::Pitch);
        let chroma = ints(&m, ViewpointKind::Chroma);
        let mint = ints(&m, ViewpointKind::MInt);
        for (p, c) in pitch.iter().zip(&chroma) {
            prop_assert_eq!(p.rem_euclid(12), *c);
        }
        prop_assert_eq!(pitch[0] + mint.iter().sum::<i64>(), *pitch.last().unwrap());
        let sdeg = ints(&m, ViewpointKind::ScaleDegree);
        prop_assert!((sequence_entropy(&sdeg) - sequence_entropy(&chroma)).abs() < 1e-12);
    }

    #[test]
    fn octave_recovery_exact_for_small_steps(
        start in 40i64..80,
        steps in prop::collection::vec(-5i64..=5, 1..80),
    ) {
        let mut p = start;
        let mut pitches = vec![p as i32];
        for s in &steps {
            p += s;
            pitches.push(p as i32);
        }
        let m = Melody::from_pitches("m", &pitches, Rational64::new(1, 1)).unwrap();
        let chroma = extract_viewpoint(&m, ViewpointKind::Chroma).unwrap();
        let rec = recover_octaves(&chroma, Some(&steps)).unwrap();
        prop_assert_eq!(rec.predicted, steps);
        prop_assert_eq!(rec.accuracy, Some(1.0));
    }

    #[test]
    fn octave_recovery_errs_by_an_octave(a in 0i64..12, step in 6i64..=11, up in any::<bool>()) {
        let step = if up { step } else { -step };
        let m = Melody::from_pitches("m", &[60 + a as i32, (60 + a + step) as i32], Rational64::new(1, 1)).unwrap();
        let rec = recover_octaves(&extract_viewpoint(&m, ViewpointKind::Chroma).unwrap(), None).unwrap();
        // the tie at a tritone is resolved downward, so only +6 is wrong there
        if step == -6 {
            prop_assert_eq!(rec.predicted[0], step);
        } else {
            prop_assert_eq!((rec.predicted[0] - step).abs(), 12);
        }
    }

    #[test]
    fn gini_matches_pairwise_form(w in prop::collection::vec(0.0f64..10.0, 1..50)) {
        prop_assume!(w.iter().sum::<f64>() > 1e-6);
        let a = w.len();
        let d = Distribution::from_weights((0..a).collect(), &w).unwrap();
        let g = gini(&d);
        prop_assert!((g - pairwise_gini(d.probs())).abs() < 1e-9);
        prop_assert!(g >= -1e-12 && g <= max_gini(a) + 1e-12);
    }

    #[test]
    fn entropy_respects_lower_bound(s in prop::collection::vec(0u8..6, 1..40)) {
        let a = distribution_of(&s).unwrap().alphabet_size();
        let h = sequence_entropy(&s);
        prop_assert!(h >= entropy_lower_bound(a, s.len()).unwrap() - 1e-12);
        prop_assert!(h <= (a as f64).log2() + 1e-12);
    }

    #[test]
    fn repetition_leaves_no_repeats(s in prop::collection::vec(0u8..3, 1..30)) {
        let res = remove_repetition(&s, DEFAULT_L_MIN).unwrap();
        prop_assert!(res.l_nr <= s.len());
        prop_assert_eq!(res.l_nr, res.pieces.iter().map(Vec::len).sum::<usize>());
        prop_assert!(res.pieces.iter().all(|p| !p.is_empty()));
        let max_len = s.len() / 2;
        for l in 2..=max_len {
            for p in &res.pieces {
                for w in p.windows(l) {
                    let total: usize = res.pieces.iter().map(|q| count_nonoverlap(q, w)).sum();
                    prop_assert!(total < 2, "{:?} repeats in {:?}", w, res.pieces);
                }
            }
        }
        // each removal keeps one copy of a motif that occurred `count` times
        let removed: usize = res.removed.iter().map(|(m, c)| (c - 1) * m.len()).sum();
        prop_assert!(res.removed.iter().all(|(_, c)| *c >= 2));
        prop_assert_eq!(res.l_nr + removed, s.len());
    }

    #[test]
    fn ppm_distribution_sums_to_one(
        train in prop::collection::vec(prop::collection::vec(0u8..5, 0..30), 1..4),
        ctx in prop::collection::vec(0u8..5, 0..8),
        order in 0usize..6,
    ) {
        let alphabet: Vec<u8> = (0..5).collect();
        let model = train_ppm(&train, order, &alphabet).unwrap();
        let ctx = &ctx[ctx.len().saturating_sub(order)..];
        let d = model.predictive_distribution(ctx).unwrap();
        prop_assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(d.iter().all(|&p| p > 0.0));
    }

    #[test]
    fn mutual_information_symmetric_and_bounded(
        pairs in prop::collection::vec((0u8..4, 0u8..6), 1..60),
    ) {
        let (p, r): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        let i_pr = mutual_information(&p, &r).unwrap();
        let i_rp = mutual_information(&r, &p).unwrap();
        prop_assert!((i_pr - i_rp).abs() < 1e-12);
        prop_assert!(i_pr >= -1e-12);
        prop_assert!(i_pr <= sequence_entropy(&p).min(sequence_entropy(&r)) + 1e-12);
    }

    #[test]
    fn bh_contains_bonferroni(p in prop::collection::vec(0.0f64..=1.0, 1..40), q in 0.001f64..0.5) {
        let bh = benjamini_hochberg(&p, q).unwrap();
        let bonf = bonferroni(&p, q);
        for (b, f) in bh.iter().zip(&bonf) {
            prop_assert!(!f || *b);
        }
    }

    #[test]
    fn jsd_symmetric_and_bounded(
        pq in prop::collection::vec((0.0f64..5.0, 0.0f64..5.0), 1..30),
    ) {
        let (p, q): (Vec<f64>, Vec<f64>) = pq.into_iter().unzip();
        prop_assume!(p.iter().sum::<f64>() > 1e-6 && q.iter().sum::<f64>() > 1e-6);
        let a = jsd(&p, &q).unwrap();
        prop_assert!((a - jsd(&q, &p).unwrap()).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(jsd(&p, &p).unwrap().abs() < 1e-12);
    }

    #[test]
    fn pearson_of_affine_map_is_sign(
        x in prop::collection::vec(-100.0f64..100.0, 3..40),
        a in prop_oneof![-50.0f64..-0.01, 0.01f64..50.0],
        b in -100.0f64..100.0,
    ) {
        prop_assume!(variance(&x) > 1e-6);
        let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let c = pearson(&x, &y).unwrap();
        prop_assert!((c.r - a.signum()).abs() < 1e-9);
    }

    #[test]
    fn ngram_matches_naive_scan(
        seqs in prop::collection::vec(prop::collection::vec(-2i32..=2, 1..25), 1..12),
        query in prop::collection::vec(-2i32..=2, 3..8),
        n in 2usize..4,
    ) {
        let to_melody = |steps: &[i32]| {
            let mut p = 60;
            let mut pitches = vec![p];
            for s in steps {
                p += s;
                pitches.push(p);
            }
            Melody::from_pitches("m", &pitches, Rational64::new(1, 1)).unwrap()
        };
        let c = corpus_of(seqs.iter().map(|s| to_melody(s)).collect());
        let q = extract_viewpoint(&to_melody(&query), ViewpointKind::MInt).unwrap();
        let rep = ngram_similarity(&q, &c, n, ViewpointKind::MInt).unwrap();
        let needle: Vec<i64> = query[..n].iter().map(|&v| i64::from(v)).collect();
        let naive = seqs
            .iter()
            .filter(|s| {
                let h: Vec<i64> = s.iter().map(|&v| i64::from(v)).collect();
                (0..h.len()).any(|i| h.len() - i >= n && h[i..i + n] == needle[..])
            })
            .count();
        prop_assert_eq!(rep.n_matches, naive);
        let sym: Vec<Symbol> = needle.iter().map(|&v| Symbol::Int(v)).collect();
        prop_assert!(contains_ngram(&q.symbols, &sym));
        let a = needle.iter().collect::<BTreeSet<_>>().len();
        prop_assert_eq!(rep.alphabet_size, a);
    }

    #[test]
    fn kde_integrates_to_one(xs in prop::collection::vec(0.2f64..4.8, 2..300)) {
        prop_assume!(variance(&xs) > 1e-6);
        let grid = Grid::new(0.0, 5.0, 0.005).unwrap();
        let f = Kde::silverman(&xs).unwrap().on_grid(&grid);
        prop_assert!((f.iter().sum::<f64>() * grid.step - 1.0).abs() < 1e-6);
        prop_assert!(f.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn generated_pitches_stay_in_range(
        family in prop_oneof![Just(PitchFamily::S), Just(PitchFamily::I), Just(PitchFamily::IS)],
        dist in prop_oneof![Just(LetterDist::Uniform), Just(LetterDist::PowerlawRandom), Just(LetterDist::PowerlawCentral)],
        a in 3usize..=12,
        o in 1u32..=3,
        seed in any::<u64>(),
    ) {
        let spec = PitchModelSpec::new(family, dist, a, 20, f64::from(o), 1.0);
        for s in generate_pitch_sequences(&spec, 10, seed).unwrap() {
            prop_assert!(s.pitch.iter().all(|p| p.abs() <= spec.half_width()));
            // for family I, A bounds the step size rather than the scale
            if family != PitchFamily::I {
                prop_assert!(s.chroma.iter().collect::<BTreeSet<_>>().len() <= a);
            } else {
                prop_assert!(s.mint.iter().all(|i| i.unsigned_abs() as usize <= a));
            }
        }
    }
}

fn means(h_c: f64, h_d: f64, i: f64, k: usize) -> CorpusMeans {
    CorpusMeans {
        corpus_id: format!("c{k}"),
        corpus_type: CorpusType::Folk,
        region: "r".into(),
        h_chroma: h_c,
        h_duration: h_d,
        i_chroma_duration: i,
    }
}

#[test]
fn joint_null_variance_is_additive() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let pool: Vec<CorpusMeans> = (0..40)
        .map(|k| {
            means(
                rng.random_range(1.0..4.0),
                rng.random_range(0.5..2.5),
                rng.random_range(0.0..0.6),
                k,
            )
        })
        .collect();
    let col = |f: fn(&CorpusMeans) -> f64| variance(&pool.iter().map(f).collect::<Vec<_>>());
    let expected = col(|m| m.h_chroma) + col(|m| m.h_duration) + col(|m| m.i_chroma_duration);
    let null = joint_entropy_null(&pool, 200_000, &mut rng).unwrap();
    assert!(
        (null.null_variance / expected - 1.0).abs() < 0.02,
        "{} vs {expected}",
        null.null_variance
    );
}

#[test]
fn anticorrelated_pools_widen_under_the_null() {
    let pool: Vec<CorpusMeans> = (0..20)
        .map(|k| {
            let x = k as f64 / 10.0;
            means(1.0 + x, 3.0 - x, 0.2, k)
        })
        .collect();
    let null = joint_entropy_null(&pool, 20_000, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    assert!(null.empirical_variance < 1e-12);
    assert!(null.degenerate);
    let tilted: Vec<CorpusMeans> = (0..20)
        .map(|k| {
            let x = k as f64 / 10.0;
            means(1.0 + x, 3.0 - 0.8 * x, 0.2, k)
        })
        .collect();
    let null = joint_entropy_null(&tilted, 20_000, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    assert!(null.null_variance > null.empirical_variance);
    assert!(null.ratio > 1.0);
}
