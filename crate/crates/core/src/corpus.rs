//! Synthetic corpora and seeded transcript corruption.
//!
//! An [`Utterance`] pairs the words actually spoken (`true_words`, which the
//! synthetic audio is rendered from) with the transcript used as the training
//! target (`target_words`). Corruption only ever touches `target_words`.
//!
//! Corpora are stored as JSON lines, one utterance per line:
//! `{"id": ..., "true_words": [...], "target_words": [...]}`.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub id: String,
    pub true_words: Vec<String>,
    pub target_words: Vec<String>,
}

impl Utterance {
    pub fn clean(id: impl Into<String>, words: Vec<String>) -> Self {
        Utterance {
            id: id.into(),
            target_words: words.clone(),
            true_words: words,
        }
    }

    fn with_target(&self, target_words: Vec<String>) -> Self {
        Utterance {
            id: self.id.clone(),
            true_words: self.true_words.clone(),
            target_words,
        }
    }
}

const WORDS: [&str; 48] = [
    "apple", "river", "stone", "cloud", "green", "quick", "table", "music", "light", "north",
    "paper", "horse", "glass", "seven", "bread", "smile", "plant", "house", "water", "dream",
    "storm", "tiger", "lemon", "chair", "ocean", "pilot", "sugar", "metal", "candle", "forest",
    "silver", "garden", "winter", "rocket", "butter", "castle", "mirror", "pencil", "violet",
    "dragon", "island", "planet", "jungle", "market", "saddle", "tunnel", "walnut", "zebra",
];

/// Word list of `size` distinct words.
pub fn default_vocabulary(size: usize) -> Vec<String> {
    if size <= WORDS.len() {
        WORDS[..size].iter().map(|w| w.to_string()).collect()
    } else {
        (0..size).map(|i| format!("w{i:04}")).collect()
    }
}

/// Sorted distinct words of all `true_words` and `target_words`.
pub fn corpus_vocabulary(corpus: &[Utterance]) -> Vec<String> {
    let set: BTreeSet<&String> = corpus
        .iter()
        .flat_map(|u| u.true_words.iter().chain(&u.target_words))
        .collect();
    set.into_iter().cloned().collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenConfig {
    pub vocab_size: usize,
    pub utterances: usize,
    pub min_words: usize,
    pub max_words: usize,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            vocab_size: 20,
            utterances: 2000,
            min_words: 5,
            max_words: 12,
            seed: 1,
        }
    }
}

/// Clean corpus with uniformly drawn lengths and words.
///
/// Adjacent words are always distinct: a transducer with an order-1
/// prediction network cannot tell "w w" from "w" on the frames of the second
/// word, and this corpus is meant to isolate transcript noise.
pub fn generate_corpus(config: &GenConfig) -> Result<Vec<Utterance>> {
    if config.vocab_size < 2 {
        return Err(Error::InvalidConfig("vocabulary needs at least two words".into()));
    }
    if config.min_words > config.max_words {
        return Err(Error::InvalidConfig(format!(
            "min words {} exceeds max words {}",
            config.min_words, config.max_words
        )));
    }
    let vocab = default_vocabulary(config.vocab_size);
    Ok((0..config.utterances)
        .map(|i| {
            let id = format!("utt-{i:06}");
            let mut rng = stream(config.seed, "gen", &id);
            let len = rng.random_range(config.min_words..=config.max_words);
            let mut words: Vec<String> = Vec::with_capacity(len);
            for _ in 0..len {
                let w = loop {
                    let w = vocab.choose(&mut rng).expect("nonempty vocabulary");
                    if words.last() != Some(w) {
                        break w;
                    }
                };
                words.push(w.clone());
            }
            Utterance::clean(id, words)
        })
        .collect())
}

/// Each target word removed independently with probability `p`.
pub fn corrupt_deletions(utt: &Utterance, p: f64, rng: &mut impl Rng) -> Utterance {
    let kept = utt
        .target_words
        .iter()
        .filter(|_| !rng.random_bool(p))
        .cloned()
        .collect();
    utt.with_target(kept)
}

/// Each target word replaced with probability `p` by a uniform vocabulary draw.
pub fn corrupt_substitutions(
    utt: &Utterance,
    p: f64,
    vocab: &[String],
    rng: &mut impl Rng,
) -> Result<Utterance> {
    if vocab.is_empty() {
        return Err(Error::InvalidConfig("substitution vocabulary is empty".into()));
    }
    let words = utt
        .target_words
        .iter()
        .map(|w| {
            if rng.random_bool(p) {
                vocab.choose(rng).expect("nonempty").clone()
            } else {
                w.clone()
            }
        })
        .collect();
    Ok(utt.with_target(words))
}

/// One coin per gap (before, between and after words); at most one inserted
/// word per gap.
pub fn corrupt_insertions(
    utt: &Utterance,
    p: f64,
    vocab: &[String],
    rng: &mut impl Rng,
) -> Result<Utterance> {
    if vocab.is_empty() {
        return Err(Error::InvalidConfig("insertion vocabulary is empty".into()));
    }
    let mut out = Vec::with_capacity(utt.target_words.len() * 2 + 1);
    let gap = |out: &mut Vec<String>, rng: &mut _| {
        if Rng::random_bool(rng, p) {
            out.push(vocab.choose(rng).expect("nonempty").clone());
        }
    };
    gap(&mut out, rng);
    for w in &utt.target_words {
        out.push(w.clone());
        gap(&mut out, rng);
    }
    Ok(utt.with_target(out))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorruptionKind {
    Del,
    Sub,
    Ins,
    Mixed,
}

impl CorruptionKind {
    pub fn name(self) -> &'static str {
        match self {
            CorruptionKind::Del => "del",
            CorruptionKind::Sub => "sub",
            CorruptionKind::Ins => "ins",
            CorruptionKind::Mixed => "mixed",
        }
    }
}

impl fmt::Display for CorruptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorruptionKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        [
            CorruptionKind::Del,
            CorruptionKind::Sub,
            CorruptionKind::Ins,
            CorruptionKind::Mixed,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| format!("unknown corruption kind {s:?} (expected del, sub, ins or mixed)"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    pub kind: CorruptionKind,
    /// Per-word probability for `del`, `sub` and `ins`.
    pub p: f64,
    /// Probability that an utterance is corrupted at all (`mixed` only).
    pub utterance_fraction: f64,
    /// Per-word probability of each stage of `mixed`.
    pub per_type_p: f64,
    pub seed: u64,
}

impl CorruptionSpec {
    pub fn single(kind: CorruptionKind, p: f64, seed: u64) -> Self {
        CorruptionSpec {
            kind,
            p,
            utterance_fraction: 1.0,
            per_type_p: 0.0,
            seed,
        }
    }

    pub fn mixed(utterance_fraction: f64, per_type_p: f64, seed: u64) -> Self {
        CorruptionSpec {
            kind: CorruptionKind::Mixed,
            p: 0.0,
            utterance_fraction,
            per_type_p,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("p", self.p),
            ("utterance_fraction", self.utterance_fraction),
            ("per_type_p", self.per_type_p),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!("{name} = {v} is not a probability")));
            }
        }
        Ok(())
    }
}

/// Per-stage probabilities of mixed corruption.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixedRates {
    pub del: f64,
    pub sub: f64,
    pub ins: f64,
}

impl MixedRates {
    pub fn uniform(p: f64) -> Self {
        MixedRates { del: p, sub: p, ins: p }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorruptionOutcome {
    pub corpus: Vec<Utterance>,
    /// Whether each utterance was selected for corruption.
    pub selected: Vec<bool>,
}

/// Applies `spec` to every utterance.
///
/// Each utterance and stage draws from its own stream keyed by
/// `(spec.seed, stage, id)`, so results do not depend on corpus order.
pub fn corrupt_corpus(
    corpus: &[Utterance],
    spec: &CorruptionSpec,
    vocab: &[String],
) -> Result<CorruptionOutcome> {
    spec.validate()?;
    match spec.kind {
        CorruptionKind::Mixed => corrupt_mixed_with(
            corpus,
            spec.utterance_fraction,
            MixedRates::uniform(spec.per_type_p),
            spec.seed,
            vocab,
        ),
        kind => {
            let out = corpus
                .iter()
                .map(|u| apply_stage(u, kind, spec.p, spec.seed, vocab))
                .collect::<Result<_>>()?;
            Ok(CorruptionOutcome {
                corpus: out,
                selected: vec![true; corpus.len()],
            })
        }
    }
}

fn apply_stage(
    utt: &Utterance,
    kind: CorruptionKind,
    p: f64,
    seed: u64,
    vocab: &[String],
) -> Result<Utterance> {
    let mut rng = stream(seed, kind.name(), &utt.id);
    match kind {
        CorruptionKind::Del => Ok(corrupt_deletions(utt, p, &mut rng)),
        CorruptionKind::Sub => corrupt_substitutions(utt, p, vocab, &mut rng),
        CorruptionKind::Ins => corrupt_insertions(utt, p, vocab, &mut rng),
        CorruptionKind::Mixed => unreachable!("mixed is not a single stage"),
    }
}

/// Mixed corruption as in the `mixed` [`CorruptionSpec`], with per-stage rates.
///
/// Selected utterances pass through deletions, then substitutions, then
/// insertions. Unselected utterances are returned unchanged.
pub fn corrupt_mixed_with(
    corpus: &[Utterance],
    utterance_fraction: f64,
    rates: MixedRates,
    seed: u64,
    vocab: &[String],
) -> Result<CorruptionOutcome> {
    let mut out = Vec::with_capacity(corpus.len());
    let mut selected = Vec::with_capacity(corpus.len());
    for utt in corpus {
        let pick = stream(seed, "select", &utt.id).random_bool(utterance_fraction);
        selected.push(pick);
        if !pick {
            out.push(utt.clone());
            continue;
        }
        let u = apply_stage(utt, CorruptionKind::Del, rates.del, seed, vocab)?;
        let u = apply_stage(&u, CorruptionKind::Sub, rates.sub, seed, vocab)?;
        let u = apply_stage(&u, CorruptionKind::Ins, rates.ins, seed, vocab)?;
        out.push(u);
    }
    Ok(CorruptionOutcome {
        corpus: out,
        selected,
    })
}

pub fn write_corpus(path: &Path, corpus: &[Utterance]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for utt in corpus {
        serde_json::to_writer(&mut w, utt)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_corpus(path: &Path) -> Result<Vec<Utterance>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let utt = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: format!("line {}: {e}", i + 1),
        })?;
        out.push(utt);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn big_corpus(words: usize, per_utt: usize) -> Vec<Utterance> {
        let vocab = default_vocabulary(1000);
        (0..words / per_utt)
            .map(|i| {
                let w = (0..per_utt).map(|j| vocab[(i * 7 + j * 13) % 1000].clone()).collect();
                Utterance::clean(format!("u{i}"), w)
            })
            .collect()
    }

    fn sample() -> Utterance {
        Utterance::clean("x", vec!["a".into(), "b".into(), "c".into()])
    }

    #[test]
    fn zero_probability_is_identity() {
        let u = sample();
        let v = vec!["z".to_string()];
        let mut rng = stream(0, "t", "x");
        assert_eq!(corrupt_deletions(&u, 0.0, &mut rng), u);
        assert_eq!(corrupt_substitutions(&u, 0.0, &v, &mut rng).unwrap(), u);
        assert_eq!(corrupt_insertions(&u, 0.0, &v, &mut rng).unwrap(), u);
    }

    #[test]
    fn full_deletion_empties_target_only() {
        let u = sample();
        let out = corrupt_deletions(&u, 1.0, &mut stream(0, "t", "x"));
        assert!(out.target_words.is_empty());
        assert_eq!(out.true_words, u.true_words);
    }

    #[test]
    fn lengths_follow_operation() {
        let v = default_vocabulary(5);
        for s in 0..50 {
            let mut rng = stream(s, "t", "x");
            let u = sample();
            assert_eq!(corrupt_substitutions(&u, 0.5, &v, &mut rng).unwrap().target_words.len(), 3);
            assert!(corrupt_insertions(&u, 0.5, &v, &mut rng).unwrap().target_words.len() >= 3);
        }
    }

    #[test]
    fn deletion_rate_on_large_corpus() {
        let corpus = big_corpus(100_000, 10);
        let out = corrupt_corpus(&corpus, &CorruptionSpec::single(CorruptionKind::Del, 0.2, 9), &[])
            .unwrap();
        let kept: usize = out.corpus.iter().map(|u| u.target_words.len()).sum();
        let frac = 1.0 - kept as f64 / 100_000.0;
        assert!((frac - 0.2).abs() < 0.01, "{frac}");
    }

    #[test]
    fn substitution_rate_on_large_corpus() {
        let corpus = big_corpus(100_000, 10);
        let vocab = default_vocabulary(1000);
        let out = corrupt_corpus(&corpus, &CorruptionSpec::single(CorruptionKind::Sub, 0.2, 9), &vocab)
            .unwrap();
        let changed: usize = out
            .corpus
            .iter()
            .map(|u| u.true_words.iter().zip(&u.target_words).filter(|(a, b)| a != b).count())
            .sum();
        let frac = changed as f64 / 100_000.0;
        // a draw of the original word (1 in 1000) is invisible
        assert!((frac - 0.2).abs() < 0.01, "{frac}");
    }

    #[test]
    fn insertion_rate_on_large_corpus() {
        let corpus = big_corpus(100_000, 10);
        let vocab = default_vocabulary(1000);
        let out = corrupt_corpus(&corpus, &CorruptionSpec::single(CorruptionKind::Ins, 0.2, 9), &vocab)
            .unwrap();
        let total: usize = out.corpus.iter().map(|u| u.target_words.len()).sum();
        let ratio = (total - 100_000) as f64 / 100_000.0;
        // 11 gaps per 10 words
        assert!((ratio - 0.2 * 1.1).abs() < 0.01, "{ratio}");
    }

    #[test]
    fn mixed_selects_half_of_utterances() {
        let corpus = big_corpus(100_000, 10);
        let vocab = default_vocabulary(1000);
        let out = corrupt_corpus(&corpus, &CorruptionSpec::mixed(0.5, 0.15, 4), &vocab).unwrap();
        let frac = out.selected.iter().filter(|&&s| s).count() as f64 / out.selected.len() as f64;
        assert!((frac - 0.5).abs() < 0.02, "{frac}");
        for ((before, after), &sel) in corpus.iter().zip(&out.corpus).zip(&out.selected) {
            assert_eq!(before.true_words, after.true_words);
            if !sel {
                assert_eq!(before, after);
            }
        }
    }

    #[test]
    fn mixed_with_zero_fraction_is_identity() {
        let corpus = big_corpus(1000, 10);
        let out = corrupt_corpus(&corpus, &CorruptionSpec::mixed(0.0, 0.5, 4), &default_vocabulary(9))
            .unwrap();
        assert_eq!(out.corpus, corpus);
    }

    #[test]
    fn mixed_reduces_to_single_stage() {
        let corpus = big_corpus(2000, 10);
        let vocab = default_vocabulary(30);
        for (kind, rates) in [
            (CorruptionKind::Del, MixedRates { del: 0.3, sub: 0.0, ins: 0.0 }),
            (CorruptionKind::Sub, MixedRates { del: 0.0, sub: 0.3, ins: 0.0 }),
            (CorruptionKind::Ins, MixedRates { del: 0.0, sub: 0.0, ins: 0.3 }),
        ] {
            let mixed = corrupt_mixed_with(&corpus, 1.0, rates, 5, &vocab).unwrap();
            let single = corrupt_corpus(&corpus, &CorruptionSpec::single(kind, 0.3, 5), &vocab).unwrap();
            assert_eq!(mixed.corpus, single.corpus, "{kind}");
        }
    }

    #[test]
    fn generation_respects_bounds_and_is_deterministic() {
        let cfg = GenConfig {
            utterances: 300,
            ..Default::default()
        };
        let a = generate_corpus(&cfg).unwrap();
        assert_eq!(a, generate_corpus(&cfg).unwrap());
        for u in &a {
            assert!((5..=12).contains(&u.true_words.len()));
            assert_eq!(u.true_words, u.target_words);
            assert!(u.true_words.windows(2).all(|w| w[0] != w[1]));
        }
        assert_eq!(corpus_vocabulary(&a).len(), 20);
    }

    #[test]
    fn corpus_file_round_trip_and_field_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        let corpus = vec![sample()];
        write_corpus(&path, &corpus).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "{\"id\":\"x\",\"true_words\":[\"a\",\"b\",\"c\"],\"target_words\":[\"a\",\"b\",\"c\"]}\n"
        );
        assert_eq!(read_corpus(&path).unwrap(), corpus);
    }
}
