use std::path::Path;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Utterance;
use crate::decode::{greedy_decode, DecoderBudget};
use crate::error::{Error, Result};
use crate::lattice::TargetSequence;
use crate::loss::{loss_and_grad, schedule_step, LossConfig, PenaltySchedule};
use crate::metrics::{align, wer, EditCounts};
use crate::rng::stream;
use crate::toy::model::{ModelDims, ToyModelParams};
use crate::toy::synth::Synthesizer;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub hidden_dim: usize,
    pub loss: LossConfig,
    /// Drives the skip-token penalty of `bypass` and `trt`, starting at
    /// `schedule.initial_weight`.
    pub schedule: PenaltySchedule,
    /// Evaluate on the dev set every this many epochs (and after the last).
    pub eval_every: usize,
    /// Rescale the batch gradient to at most this norm.
    pub clip_norm: Option<f64>,
    pub decoder: DecoderBudget,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 50,
            learning_rate: 0.05,
            momentum: 0.9,
            batch_size: 16,
            hidden_dim: 32,
            loss: LossConfig::default(),
            schedule: PenaltySchedule::default(),
            eval_every: 1,
            clip_norm: None,
            decoder: DecoderBudget::default(),
            seed: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 || self.eval_every == 0 || self.hidden_dim == 0 {
            return Err(Error::InvalidConfig(
                "batch size, eval interval and hidden size must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!("learning rate {}", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidConfig(format!("momentum {}", self.momentum)));
        }
        if let Some(c) = self.clip_norm {
            if !(c > 0.0) {
                return Err(Error::InvalidConfig(format!("clip norm {c}")));
            }
        }
        if self.loss.kind.has_skip_token() {
            self.schedule.validate()?;
        }
        Ok(())
    }
}

/// One line of the metrics history.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_wer: Option<f64>,
    pub sub: Option<usize>,
    pub ins: Option<usize>,
    pub del: Option<usize>,
    /// Skip-token penalty in effect during the epoch (skip-token kinds only).
    pub current_penalty: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub history: Vec<HistoryRow>,
    pub final_params: ToyModelParams,
    /// Parameters at the evaluation with the lowest dev WER (final if no dev set).
    pub best_params: ToyModelParams,
    pub best_epoch: usize,
    pub best_dev_wer: Option<f64>,
}

/// Train / dev / test as the first 80%, next 10% and last 10% of the corpus.
pub fn split_corpus(corpus: &[Utterance]) -> (&[Utterance], &[Utterance], &[Utterance]) {
    let n = corpus.len();
    let train_end = n * 8 / 10;
    let dev_end = n * 9 / 10;
    (
        &corpus[..train_end],
        &corpus[train_end..dev_end],
        &corpus[dev_end..],
    )
}

struct Example {
    id: String,
    frames: Array2<f64>,
    target: TargetSequence,
}

fn prepare(corpus: &[Utterance], synth: &Synthesizer) -> Result<Vec<Example>> {
    let vocab = synth.spec().vocab.len();
    corpus
        .iter()
        .map(|utt| {
            let frames = synth.frames(utt)?;
            if frames.nrows() == 0 {
                return Err(Error::InvalidConfig(format!(
                    "utterance {} has no frames to train on",
                    utt.id
                )));
            }
            let ids = synth.spec().token_ids(&utt.target_words)?;
            Ok(Example {
                id: utt.id.clone(),
                frames,
                target: TargetSequence::new(ids, vocab)?,
            })
        })
        .collect()
}

fn example_grad(
    params: &ToyModelParams,
    ex: &Example,
    loss: &LossConfig,
    penalty: f64,
) -> Result<(f64, ToyModelParams)> {
    let cache = params.forward(ex.frames.view(), ex.target.units())?;
    let lr = loss_and_grad(cache.joint(), &ex.target, loss, penalty)
        .map_err(|e| match e {
            Error::NoPath => Error::NonFiniteLoss(ex.id.clone()),
            other => other,
        })?;
    if !lr.loss.is_finite() {
        return Err(Error::NonFiniteLoss(ex.id.clone()));
    }
    Ok((lr.loss, params.backward(&cache, &lr.grad)?))
}

/// Loss and parameter gradient of one utterance; used by gradient checks.
pub fn utterance_loss_and_grad(
    params: &ToyModelParams,
    utt: &Utterance,
    synth: &Synthesizer,
    loss: &LossConfig,
    penalty: f64,
) -> Result<(f64, ToyModelParams)> {
    let ex = prepare(std::slice::from_ref(utt), synth)?.remove(0);
    example_grad(params, &ex, loss, penalty)
}

/// Greedy-decodes every utterance and scores it against `true_words`.
pub fn evaluate(
    params: &ToyModelParams,
    corpus: &[Utterance],
    synth: &Synthesizer,
    budget: DecoderBudget,
) -> Result<EditCounts> {
    let counts = corpus
        .par_iter()
        .map(|utt| {
            let hyp = decode_words(params, utt, synth, budget)?;
            Ok(align(&utt.true_words, &hyp))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(counts.into_iter().sum())
}

pub fn decode_words(
    params: &ToyModelParams,
    utt: &Utterance,
    synth: &Synthesizer,
    budget: DecoderBudget,
) -> Result<Vec<String>> {
    let frames = synth.frames(utt)?;
    let enc = params.encode(frames.view());
    let rows: Vec<_> = enc.rows().into_iter().map(|r| r.to_owned()).collect();
    let hyp = greedy_decode(&rows, params, budget);
    Ok(hyp
        .tokens
        .iter()
        .map(|&t| synth.spec().vocab[t as usize].clone())
        .collect())
}

/// SGD with momentum on the mean per-utterance loss of each batch.
///
/// Per-utterance gradients are computed in parallel and summed in batch order,
/// so results do not depend on the number of threads.
pub fn train(
    train_set: &[Utterance],
    dev_set: &[Utterance],
    synth: &Synthesizer,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::InvalidConfig("training set is empty".into()));
    }
    let examples = prepare(train_set, synth)?;
    let dims = ModelDims {
        feature_dim: synth.spec().feature_dim,
        hidden_dim: config.hidden_dim,
        vocab_size: synth.spec().vocab.len(),
    };
    let mut params = ToyModelParams::init(dims, config.seed);
    let mut velocity = ToyModelParams::zeros(dims);
    let uses_penalty = config.loss.kind.has_skip_token();
    let mut penalty = if uses_penalty {
        config.schedule.initial_weight
    } else {
        config.loss.skip_token_penalty
    };

    let mut history = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, ToyModelParams)> = None;
    let mut order: Vec<usize> = (0..examples.len()).collect();

    for epoch in 1..=config.epochs {
        order.sort_unstable();
        order.shuffle(&mut stream(config.seed, "shuffle", &epoch.to_string()));
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let results = batch
                .par_iter()
                .map(|&i| example_grad(&params, &examples[i], &config.loss, penalty))
                .collect::<Result<Vec<_>>>()?;
            let mut grad = ToyModelParams::zeros(dims);
            for (loss, g) in &results {
                epoch_loss += loss;
                grad.scaled_add(1.0, g);
            }
            grad.scale(1.0 / batch.len() as f64);
            if let Some(max) = config.clip_norm {
                let n = grad.norm();
                if n > max {
                    grad.scale(max / n);
                }
            }
            velocity.scale(config.momentum);
            velocity.scaled_add(1.0, &grad);
            params.scaled_add(-config.learning_rate, &velocity);
            if !params.all_finite() {
                return Err(Error::NonFiniteLoss(format!(
                    "parameters diverged in epoch {epoch} (batch starting with {})",
                    examples[batch[0]].id
                )));
            }
        }

        let mut row = HistoryRow {
            epoch,
            train_loss: epoch_loss / examples.len() as f64,
            dev_wer: None,
            sub: None,
            ins: None,
            del: None,
            current_penalty: uses_penalty.then_some(penalty),
        };
        let eval_now = epoch % config.eval_every == 0 || epoch == config.epochs;
        if eval_now && !dev_set.is_empty() {
            let counts = evaluate(&params, dev_set, synth, config.decoder)?;
            let w = wer(&counts)?;
            row.dev_wer = Some(w);
            row.sub = Some(counts.sub);
            row.ins = Some(counts.ins);
            row.del = Some(counts.del);
            if best.as_ref().is_none_or(|(b, _, _)| w < *b) {
                best = Some((w, epoch, params.clone()));
            }
        }
        history.push(row);
        if uses_penalty {
            penalty = schedule_step(penalty, &config.schedule, epoch);
        }
    }

    let (best_dev_wer, best_epoch, best_params) = match best {
        Some((w, e, p)) => (Some(w), e, p),
        None => (None, config.epochs, params.clone()),
    };
    Ok(TrainOutcome {
        history,
        final_params: params,
        best_params,
        best_epoch,
        best_dev_wer,
    })
}

pub fn write_history(path: &Path, history: &[HistoryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in history {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_history(path: &Path) -> Result<Vec<HistoryRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LossKind;
    use crate::toy::synth::SynthesisSpec;

    fn words(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    fn small_synth() -> Synthesizer {
        Synthesizer::new(SynthesisSpec::new(words("a b c d e"), 2)).unwrap()
    }

    #[test]
    fn overfits_single_utterance() {
        let synth = small_synth();
        let utt = Utterance::clean("only", words("c a e b"));
        let config = TrainConfig {
            epochs: 150,
            batch_size: 1,
            ..Default::default()
        };
        let out = train(std::slice::from_ref(&utt), &[], &synth, &config).unwrap();
        let last = out.history.last().unwrap();
        assert!(last.train_loss < 0.1, "loss {}", last.train_loss);
        let hyp = decode_words(&out.final_params, &utt, &synth, DecoderBudget::default()).unwrap();
        assert_eq!(hyp, utt.target_words);
    }

    #[test]
    fn one_epoch_gives_one_row() {
        let synth = small_synth();
        let corpus: Vec<_> = (0..10)
            .map(|i| Utterance::clean(format!("u{i}"), words("a b c")))
            .collect();
        let config = TrainConfig {
            epochs: 1,
            loss: LossConfig::new(LossKind::Trt),
            ..Default::default()
        };
        let out = train(&corpus[..8], &corpus[8..], &synth, &config).unwrap();
        assert_eq!(out.history.len(), 1);
        assert_eq!(out.history[0].current_penalty, Some(-20.0));
        assert!(out.history[0].dev_wer.is_some());
    }

    #[test]
    fn split_proportions() {
        let corpus: Vec<_> = (0..20).map(|i| Utterance::clean(i.to_string(), vec![])).collect();
        let (a, b, c) = split_corpus(&corpus);
        assert_eq!((a.len(), b.len(), c.len()), (16, 2, 2));
    }

    #[test]
    fn history_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        let rows = vec![
            HistoryRow {
                epoch: 1,
                train_loss: 3.5,
                dev_wer: None,
                sub: None,
                ins: None,
                del: None,
                current_penalty: Some(-20.0),
            },
            HistoryRow {
                epoch: 2,
                train_loss: 2.0,
                dev_wer: Some(0.25),
                sub: Some(1),
                ins: Some(0),
                del: Some(3),
                current_penalty: None,
            },
        ];
        write_history(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("epoch,train_loss,dev_wer,sub,ins,del,current_penalty\n"));
        assert_eq!(read_history(&path).unwrap(), rows);
    }
}
