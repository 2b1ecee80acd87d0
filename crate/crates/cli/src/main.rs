use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use melic_core::genmodel::{
    fit_pitch_model, fit_rhythm_model, interval_distribution, length_distribution,
    parse_pitch_model, parse_rhythm_model, pitch_targets, rhythm_targets, scale_loglikelihood,
    simulate_scale_entropy, LengthSource, PitchGrid, RhythmDist, RhythmGrid, ScaleSimParams,
    ValueSet, DEFAULT_ALPHA, DEFAULT_H_BIN, DEFAULT_N_PER_SETTING, DEFAULT_RATIO_BIN,
};
use melic_core::info::{
    distribution_of, gini, mutual_information_excess, sequence_entropy, DEFAULT_MI_SHUFFLES,
};
use melic_core::ppm::{within_corpus_repetition, PpmRepetitionParams};
use melic_core::repetition::{remove_repetition, total_information, DEFAULT_L_MIN};
use melic_core::seeding::derive_seed_from_str;
use melic_core::stats::{
    corpus_means, joint_entropy_null, ngram_similarity, read_means_csv,
    region_balanced_correlation, DEFAULT_RESAMPLES, MEANS_CSV_HEADER,
};
use melic_core::summary::SUMMARY_COLUMNS;
use melic_core::{
    extract_viewpoint, parse_canonical, run_summary, write_table, Corpus, CorpusType, Distribution,
    Melody, Record, TableFormat, ViewpointKind,
};

#[derive(Parser)]
#[command(
    name = "melic",
    version,
    about = "Information-theoretic analysis of melody corpora"
)]
struct Cli {
    /// Worker threads; output does not depend on this value.
    #[arg(long, global = true, env = "MELIC_THREADS")]
    threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write the table here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Inputs {
    /// Canonical corpus files, or directories of them.
    #[arg(required = true)]
    corpora: Vec<PathBuf>,
}

#[derive(Args)]
struct ViewpointArg {
    #[arg(long, default_value = "chroma")]
    viewpoint: ViewpointKind,
}

#[derive(Subcommand)]
enum Command {
    /// Print viewpoint sequences.
    Viewpoints {
        #[command(flatten)]
        vp: ViewpointArg,
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Unigram entropy per melody.
    Entropy {
        #[command(flatten)]
        vp: ViewpointArg,
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Gini coefficient per melody.
    Gini {
        #[command(flatten)]
        vp: ViewpointArg,
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Mutual information between a pitch and a rhythm viewpoint, with a
    /// shuffle baseline.
    Mi {
        #[arg(long, default_value = "chroma")]
        pitch_viewpoint: ViewpointKind,
        #[arg(long, default_value = "duration")]
        rhythm_viewpoint: ViewpointKind,
        #[arg(long, default_value_t = DEFAULT_MI_SHUFFLES)]
        shuffles: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Length after recursive removal of repeated substrings.
    Repetition {
        #[command(flatten)]
        vp: ViewpointArg,
        #[arg(long, default_value_t = DEFAULT_L_MIN)]
        lmin: usize,
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Joint chroma/duration entropy times non-repeated length.
    Totalinfo {
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Information gained from other melodies of the same corpus.
    PpmRepetition {
        #[command(flatten)]
        vp: ViewpointArg,
        #[arg(long, default_value_t = PpmRepetitionParams::default().n_train)]
        n_train: usize,
        #[arg(long, default_value_t = PpmRepetitionParams::default().truncate)]
        truncate: usize,
        #[arg(long, default_value_t = PpmRepetitionParams::default().n_shuffle_reps)]
        shuffles: usize,
        #[arg(long, default_value_t = PpmRepetitionParams::default().max_order)]
        order: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Generative models.
    Genmodel {
        #[command(subcommand)]
        model: GenCommand,
    },
    /// Corpus melodies containing the opening n-gram of a query melody.
    Similarity {
        /// Canonical corpus file holding the query melody.
        #[arg(long)]
        query: PathBuf,
        /// Query melody id; defaults to the first melody in the file.
        #[arg(long)]
        query_id: Option<String>,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value = "mint")]
        viewpoint: ViewpointKind,
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Joint-entropy null model from per-corpus means.
    NullJoint {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        /// Restrict to corpora of this type.
        #[arg(long)]
        corpus_type: Option<CorpusType>,
        means: PathBuf,
    },
    /// Chroma/duration entropy correlation with at most N corpora per region.
    SubsampleCorr {
        #[arg(long, default_value_t = 5)]
        max_per_region: usize,
        #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
        resamples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        corpus_type: Option<CorpusType>,
        means: PathBuf,
    },
    /// Per-corpus means of entropy, length and total information.
    Summary {
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Per-corpus mean chroma entropy, duration entropy and mutual
    /// information, in the format read by `null-joint`.
    Means {
        #[command(flatten)]
        inputs: Inputs,
    },
}

#[derive(Subcommand)]
enum GenCommand {
    /// Scale-size likelihood from random interval sequences.
    Scale {
        /// CSV `symbol,probability` of signed intervals; derived from the
        /// corpora when omitted.
        #[arg(long)]
        intervals: Option<PathBuf>,
        /// CSV `symbol,probability` of sequence lengths; derived from the
        /// corpora when omitted.
        #[arg(long)]
        lengths: Option<PathBuf>,
        /// Use raw melody lengths instead of non-repeated lengths.
        #[arg(long)]
        raw_lengths: bool,
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 1.5, 2.0])]
        o_values: Vec<f64>,
        #[arg(long, default_value_t = 2.8)]
        threshold: f64,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_H_BIN)]
        bin_width: f64,
        #[arg(long)]
        seed: u64,
        /// Corpora supplying empirical chroma entropies (and defaults for
        /// the distributions).
        corpora: Vec<PathBuf>,
    },
    /// Fit pitch models to corpus entropy ratios.
    Pitch {
        /// Model name such as IS3; all nine when omitted.
        #[arg(long)]
        model: Option<String>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 3.0])]
        ranges: Vec<f64>,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Fit rhythm models to corpus entropy ratios.
    Rhythm {
        /// Model name such as SI4; all sixteen when omitted.
        #[arg(long)]
        model: Option<String>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 0.25)]
        h_ioi_bin: f64,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        inputs: Inputs,
    },
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, value_delimiter = ',')]
    alphabets: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', default_values_t = [15, 20, 25, 30, 35, 40, 45, 50])]
    lengths: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0, 4.0])]
    exponents: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_N_PER_SETTING)]
    n_per_setting: usize,
    #[arg(long, default_value_t = DEFAULT_RATIO_BIN)]
    ratio_bin: f64,
}

struct Table {
    schema: Vec<&'static str>,
    records: Vec<Record>,
}

impl Table {
    fn new(schema: &[&'static str]) -> Self {
        Table {
            schema: schema.to_vec(),
            records: Vec::new(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker threads")?;
    }
    let table = execute(cli.command)?;
    let format = match cli.format {
        Format::Csv => TableFormat::Csv,
        Format::Json => TableFormat::Json,
    };
    let bytes = write_table(&table.schema, &table.records, format)?;
    match cli.out {
        Some(path) => {
            fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?
        }
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(())
}

fn load_corpora(paths: &[PathBuf]) -> Result<Vec<Corpus>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut inner: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("reading directory {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "json"))
                .collect();
            inner.sort();
            files.extend(inner);
        } else {
            files.push(p.clone());
        }
    }
    files
        .iter()
        .map(|f| {
            let text = fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?;
            parse_canonical(&text).with_context(|| format!("parsing {}", f.display()))
        })
        .collect()
}

/// Melodies of every corpus in input order, tagged with the corpus id.
fn melodies(corpora: &[Corpus]) -> Vec<(&str, &Melody)> {
    corpora
        .iter()
        .flat_map(|c| c.melodies().iter().map(move |m| (c.id(), m)))
        .collect()
}

/// Runs `f` on every melody in parallel; failures become warnings.
fn per_melody<F>(corpora: &[Corpus], f: F) -> Vec<Record>
where
    F: Fn(&str, &Melody) -> melic_core::Result<Record> + Sync,
{
    let all = melodies(corpora);
    let results: Vec<_> = all.par_iter().map(|(c, m)| f(c, m)).collect();
    let mut out = Vec::new();
    let mut skipped = 0;
    for ((c, m), r) in all.iter().zip(results) {
        match r {
            Ok(rec) => out.push(rec),
            Err(e) => {
                skipped += 1;
                eprintln!("warning: skipping melody `{}` in `{c}`: {e}", m.id());
            }
        }
    }
    if skipped > 0 {
        eprintln!("warning: {skipped} melodies skipped");
    }
    out
}

fn melody_record(corpus: &str, m: &Melody) -> Record {
    Record::new()
        .with("corpus_id", corpus)
        .with("melody_id", m.id())
}

fn read_distribution<T: std::str::FromStr + Ord + Clone>(path: &Path) -> Result<Distribution<T>> {
    let mut rdr =
        csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut symbols = Vec::new();
    let mut probs = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            bail!("{}: line {} must have two fields", path.display(), i + 2);
        }
        let s: T = rec[0].trim().parse().map_err(|_| {
            anyhow::anyhow!(
                "{}: line {}: bad symbol `{}`",
                path.display(),
                i + 2,
                &rec[0]
            )
        })?;
        let p: f64 = rec[1]
            .trim()
            .parse()
            .with_context(|| format!("{}: line {}: bad probability", path.display(), i + 2))?;
        symbols.push(s);
        probs.push(p);
    }
    Ok(Distribution::from_weights(symbols, &probs)?)
}

fn read_means(
    path: &Path,
    filter: Option<CorpusType>,
) -> Result<Vec<melic_core::stats::CorpusMeans>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut means = read_means_csv(&text)?;
    if let Some(t) = filter {
        means.retain(|m| m.corpus_type == t);
    }
    Ok(means)
}

fn execute(cmd: Command) -> Result<Table> {
    match cmd {
        Command::Viewpoints { vp, inputs } => {
            let corpora = load_corpora(&inputs.corpora)?;
            let mut t = Table::new(&["corpus_id", "melody_id", "viewpoint", "length", "sequence"]);
            t.records = per_melody(&corpora, |c, m| {
                let s = extract_viewpoint(m, vp.viewpoint)?;
                let text: Vec<String> = s.symbols.iter().map(ToString::to_string).collect();
                Ok(melody_record(c, m)
                    .with("viewpoint", vp.viewpoint.name())
                    .with("length", s.len())
                    .with("sequence", text.join(" ")))
            });
            Ok(t)
        }
        Command::Entropy { vp, inputs } => {
            let corpora = load_corpora(&inputs.corpora)?;
            let mut t = Table::new(&[
                "corpus_id",
                "melody_id",
                "viewpoint",
                "length",
                "alphabet_size",
                "entropy",
            ]);
            t.records = per_melody(&corpora, |c, m| {
                let s = extract_viewpoint(m, vp.viewpoint)?;
                let d = distribution_of(&s.symbols)?;
                Ok(melody_record(c, m)
                    .with("viewpoint", vp.viewpoint.name())
                    .with("length", s.len())
                    .with("alphabet_size", d.alphabet_size())
                    .with("entropy", sequence_entropy(&s.symbols)))
            });
            Ok(t)
        }
        Command::Gini { vp, inputs } => {
            let corpora = load_corpora(&inputs.corpora)?;
            let mut t = Table::new(&[
                "corpus_id",
                "melody_id",
                "viewpoint",
                "alphabet_size",
                "gini",
            ]);
            t.records = per_melody(&corpora, |c, m| {
                let s = extract_viewpoint(m, vp.viewpoint)?;
                let d = distribution_of(&s.symbols)?;
                Ok(melody_record(c, m)
                    .with("viewpoint", vp.viewpoint.name())
                    .with("alphabet_size", d.alphabet_size())
                    .with("gini", gini(&d)))
            });
            Ok(t)
        }
        Command::Mi {
            pitch_viewpoint,
            rhythm_viewpoint,
            shuffles,
            seed,
            inputs,
        } => {
            let corpora = load_corpora(&inputs.corpora)?;
            let mut t = Table::new(&["corpus_id", "melody_id", "mi", "mi_random", "mi_excess"]);
            t.records = per_melody(&corpora, |c, m| {
                let p = extract_viewpoint(m, pitch_viewpoint)?.symbols;
                let r = extract_viewpoint(m, rhythm_viewpoint)?.symbols;
                let n = p.len().min(r.len());
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed_from_str(
                    seed,
                    &format!("{c}\u{1f}{}", m.id()),
                ));
                let x = mutual_information_excess(&p[..n], &r[..n], shuffles, &mut rng)?;
                Ok(melody_record(c, m)
                    .with("mi", x.mi)
                    .with("mi_random", x.mi_random)
                    .with("mi_excess", x.mi_excess))
            });
            Ok(t)
        }
        Command::Repetition { vp, lmin, inputs } => {
            let corpora = load_corpora(&inputs.corpora)?;
            let mut t = Table::new(&[
                "corpus_id",
                "melody_id",
                "viewpoint",
                "length",
                "length_nr",
                "repetition",
            ]);
            t.records = per_melody(&corpora, |c, m| {
                let s = extract_viewpoint(m, vp.viewpoint)?;
                let r = remove_repetition(&s.symbols, lmin)?;
                Ok(melody_record(c, m)
                    .with("viewpoint", vp.viewpoint.name())
                    .with("length", s.len())
                    .with("length_nr", r.l_nr)
                    .with("repetition", 1.0 - r.l_nr as f64 / s.len() as f64))
            });
            Ok(t)
        }
        Command::Totalinfo { inputs } => {
            let corpora = load_corpora(&inputs.corpora)?;
            let mut t = Table::new(&[
                "corpus_id",
                "melody_id",
                "H_chroma_dur",
                "length",
                "length_nr",
                "total_info",
            ]);
            t.records = per_melody(&corpora, |c, m| {
                let x = total_information(m)?;
                Ok(melody_record(c, m)
                    .with("H_chroma_dur", x.h_joint)
                    .with("length", x.length)
                    .with("length_nr", x.l_nr)
                    .with("total_info", x.total))
            });
            Ok(t)
        }
        Command::PpmRepetition {
            vp,
            n_train,
            truncate,
            shuffles,
            order,
            seed,
            inputs,
        } => {
            let corpora = load_corpora(&inputs.corpora)?;
            let params = PpmRepetitionParams {
                n_train,
                truncate,
                n_shuffle_reps: shuffles,
                max_order: order,
            };
            let mut t = Table::new(&[
                "corpus_id",
                "viewpoint",
                "n_targets",
                "mean_ic",
                "mean_ic_shuffled",
                "repetition_bits",
            ]);
            for c in &corpora {
                match within_corpus_repetition(
                    c,
                    vp.viewpoint,
                    &params,
                    derive_seed_from_str(seed, c.id()),
                ) {
                    Ok(r) => t.records.push(
                        Record::new()
                            .with("corpus_id", c.id())
                            .with("viewpoint", vp.viewpoint.name())
                            .with("n_targets", r.n_targets)
                            .with("mean_ic", r.mean_ic)
                            .with("mean_ic_shuffled", r.mean_ic_shuffled)
                            .with("repetition_bits", r.repetition_bits),
                    ),
                    Err(e) => eprintln!("warning: skipping corpus `{}`: {e}", c.id()),
                }
            }
            Ok(t)
        }
        Command::Genmodel { model } => genmodel(model),
        Command::Similarity {
            query,
            query_id,
            n,
            viewpoint,
            inputs,
        } => {
            let text = fs::read_to_string(&query)
                .with_context(|| format!("reading {}", query.display()))?;
            let qc =
                parse_canonical(&text).with_context(|| format!("parsing {}", query.display()))?;
            let qm = match &query_id {
                Some(id) => qc
                    .melodies()
                    .iter()
                    .find(|m| m.id() == id)
                    .with_context(|| format!("no melody `{id}` in {}", query.display()))?,
                None => &qc.melodies()[0],
            };
            let q = extract_viewpoint(qm, viewpoint)?;
            let corpora = load_corpora(&inputs.corpora)?;
            let mut t = Table::new(&[
                "corpus_id",
                "n_matches",
                "expected_paper",
                "expected_fixed_query",
                "enrichment",
                "alphabet_size",
            ]);
            for c in &corpora {
                let r = ngram_similarity(&q, c, n, viewpoint)?;
                t.records.push(
                    Record::new()
                        .with("corpus_id", c.id())
                        .with("n_matches", r.n_matches)
                        .with("expected_paper", r.expected_paper)
                        .with("expected_fixed_query", r.expected_fixed_query)
                        .with("enrichment", r.enrichment)
                        .with("alphabet_size", r.alphabet_size),
                );
            }
            Ok(t)
        }
        Command::NullJoint {
            samples,
            seed,
            corpus_type,
            means,
        } => {
            let means = read_means(&means, corpus_type)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = joint_entropy_null(&means, samples, &mut rng)?;
            let mut t = Table::new(&[
                "n_corpora",
                "null_variance",
                "empirical_variance",
                "ratio",
                "degenerate",
            ]);
            t.records.push(
                Record::new()
                    .with("n_corpora", means.len())
                    .with("null_variance", r.null_variance)
                    .with("empirical_variance", r.empirical_variance)
                    .with("ratio", r.ratio)
                    .with("degenerate", r.degenerate),
            );
            Ok(t)
        }
        Command::SubsampleCorr {
            max_per_region,
            resamples,
            seed,
            corpus_type,
            means,
        } => {
            let means = read_means(&means, corpus_type)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = region_balanced_correlation(&means, max_per_region, resamples, &mut rng)?;
            let mut t = Table::new(&["n_corpora", "mean_r", "ci_low", "ci_high", "resamples"]);
            t.records.push(
                Record::new()
                    .with("n_corpora", means.len())
                    .with("mean_r", r.mean_r)
                    .with("ci_low", r.ci_low)
                    .with("ci_high", r.ci_high)
                    .with("resamples", resamples),
            );
            Ok(t)
        }
        Command::Summary { inputs } => {
            let corpora = load_corpora(&inputs.corpora)?;
            let s = run_summary(&corpora);
            for k in &s.skipped {
                eprintln!(
                    "warning: skipping melody `{}` in `{}`: {}",
                    k.melody, k.corpus, k.reason
                );
            }
            if !s.skipped.is_empty() {
                eprintln!("warning: {} melodies skipped", s.skipped.len());
            }
            let mut t = Table::new(&SUMMARY_COLUMNS);
            t.records = s.records.iter().map(|r| r.to_record()).collect();
            Ok(t)
        }
        Command::Means { inputs } => {
            let corpora = load_corpora(&inputs.corpora)?;
            let mut t = Table::new(&MEANS_CSV_HEADER);
            let results: Vec<_> = corpora.par_iter().map(corpus_means).collect();
            for r in results {
                let m = r?;
                t.records.push(
                    Record::new()
                        .with("corpus_id", m.corpus_id.as_str())
                        .with("type", m.corpus_type.to_string())
                        .with("region", m.region.as_str())
                        .with("H_chroma", m.h_chroma)
                        .with("H_duration", m.h_duration)
                        .with("I_chroma_duration", m.i_chroma_duration),
                );
            }
            Ok(t)
        }
    }
}

fn genmodel(cmd: GenCommand) -> Result<Table> {
    match cmd {
        GenCommand::Scale {
            intervals,
            lengths,
            raw_lengths,
            n,
            o_values,
            threshold,
            alpha,
            bin_width,
            seed,
            corpora,
        } => {
            let corpora = load_corpora(&corpora)?;
            let need_corpus = |what: &str| -> Result<()> {
                if corpora.is_empty() {
                    bail!("--{what} is required when no corpora are given");
                }
                Ok(())
            };
            let intervals = match intervals {
                Some(p) => read_distribution::<i64>(&p)?,
                None => {
                    need_corpus("intervals")?;
                    interval_distribution(&corpora)?
                }
            };
            let lengths = match lengths {
                Some(p) => read_distribution::<usize>(&p)?,
                None => {
                    need_corpus("lengths")?;
                    let source = if raw_lengths {
                        LengthSource::Raw
                    } else {
                        LengthSource::NonRepeated
                    };
                    length_distribution(&corpora, source)?
                }
            };
            let params = ScaleSimParams {
                intervals,
                lengths,
                o_values,
                n_sequences: n,
            };
            let sim = simulate_scale_entropy(&params, seed)?;
            let empirical: Vec<f64> = corpora
                .iter()
                .flat_map(Corpus::melodies)
                .map(|m| {
                    extract_viewpoint(m, ViewpointKind::Chroma)
                        .map(|s| sequence_entropy(&s.symbols))
                })
                .collect::<melic_core::Result<_>>()?;
            let ll = if empirical.is_empty() {
                None
            } else {
                Some(scale_loglikelihood(&sim, &empirical, alpha, bin_width)?)
            };
            let mut t = Table::new(&["A", "n_samples", "p_below", "log_likelihood"]);
            for (&a, samples) in &sim.per_a {
                t.records.push(
                    Record::new()
                        .with("A", a)
                        .with("n_samples", samples.len())
                        .with("p_below", sim.prob_below(a, threshold))
                        .with(
                            "log_likelihood",
                            ll.as_ref().and_then(|l| l[&a].log_likelihood),
                        ),
                );
            }
            Ok(t)
        }
        GenCommand::Pitch {
            model,
            grid,
            ranges,
            seed,
            inputs,
        } => {
            let corpora = load_corpora(&inputs.corpora)?;
            let targets = pitch_targets(&corpora)?;
            let models: Vec<_> = match model {
                Some(name) => vec![parse_pitch_model(&name)?],
                None => melic_core::genmodel::PitchModelSpec::models(),
            };
            let pg = PitchGrid {
                alphabet: grid.alphabets.unwrap_or_else(|| (3..=12).collect()),
                length: grid.lengths,
                range: ranges,
                exponent: grid.exponents,
                ratio_bin: grid.ratio_bin,
            };
            let mut t = Table::new(&["model", "A", "L", "O", "exponent", "score"]);
            for (family, dist) in models {
                let model_seed = derive_seed_from_str(seed, &format!("{family:?}{}", dist.code()));
                let fit =
                    fit_pitch_model(family, dist, &targets, &pg, grid.n_per_setting, model_seed)?;
                let b = fit.best;
                t.records.push(
                    Record::new()
                        .with("model", b.name())
                        .with("A", b.alphabet)
                        .with("L", b.length)
                        .with("O", b.range)
                        .with("exponent", exponent_cell(b.exponent, dist.code()))
                        .with("score", fit.score),
                );
            }
            Ok(t)
        }
        GenCommand::Rhythm {
            model,
            grid,
            h_ioi_bin,
            seed,
            inputs,
        } => {
            let corpora = load_corpora(&inputs.corpora)?;
            let targets = rhythm_targets(&corpora);
            let models: Vec<(ValueSet, RhythmDist)> = match model {
                Some(name) => vec![parse_rhythm_model(&name)?],
                None => melic_core::genmodel::RhythmModelSpec::models(),
            };
            let rg = RhythmGrid {
                alphabet: grid.alphabets.unwrap_or_else(|| (2..=20).collect()),
                length: grid.lengths,
                exponent: grid.exponents,
                ratio_bin: grid.ratio_bin,
                h_ioi_bin,
            };
            let mut t = Table::new(&["model", "L", "exponent", "score"]);
            for (vs, dist) in models {
                let model_seed =
                    derive_seed_from_str(seed, &format!("{}{}", vs.code(), dist.code()));
                let fit =
                    fit_rhythm_model(vs, dist, &targets, &rg, grid.n_per_setting, model_seed)?;
                let b = fit.best;
                t.records.push(
                    Record::new()
                        .with("model", b.name())
                        .with("L", b.length)
                        .with("exponent", exponent_cell(b.exponent, dist.code()))
                        .with("score", fit.score),
                );
            }
            Ok(t)
        }
    }
}

/// Exponent column; empty for uniform models, where it has no effect.
fn exponent_cell(exponent: f64, dist_code: u8) -> Option<f64> {
    (dist_code != 1).then_some(exponent)
}
