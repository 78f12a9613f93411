//! Trains the toy transducer on a clean synthetic corpus and decodes a few
//! held-out utterances.

use robust_transducer::corpus::{corpus_vocabulary, generate_corpus, GenConfig};
use robust_transducer::lattice::LossKind;
use robust_transducer::loss::LossConfig;
use robust_transducer::metrics::wer;
use robust_transducer::toy::{decode_words, evaluate, split_corpus, train, SynthesisSpec, Synthesizer, TrainConfig};

fn main() -> robust_transducer::Result<()> {
    let corpus = generate_corpus(&GenConfig::default())?;
    let (train_set, dev_set, test_set) = split_corpus(&corpus);
    let synth = Synthesizer::new(SynthesisSpec::new(corpus_vocabulary(&corpus), 1))?;
    let config = TrainConfig {
        epochs: 15,
        loss: LossConfig::new(LossKind::Rnnt),
        ..TrainConfig::default()
    };
    let outcome = train(train_set, dev_set, &synth, &config)?;
    for row in &outcome.history {
        println!(
            "epoch {:>2}  loss {:>8.4}  dev WER {:>6.2}%",
            row.epoch,
            row.train_loss,
            100.0 * row.dev_wer.unwrap_or(f64::NAN)
        );
    }
    let counts = evaluate(&outcome.best_params, test_set, &synth, config.decoder)?;
    println!("best epoch {}, test WER {:.2}%", outcome.best_epoch, 100.0 * wer(&counts)?);
    for utt in &test_set[..3] {
        let hyp = decode_words(&outcome.best_params, utt, &synth, config.decoder)?;
        println!("  ref: {}\n  hyp: {}", utt.true_words.join(" "), hyp.join(" "));
    }
    Ok(())
}
