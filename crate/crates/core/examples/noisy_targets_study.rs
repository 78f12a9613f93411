//! RNN-T against Star-Transducer on transcripts with half the words deleted,
//! reported as WER, WERD and WERDR. Takes under a minute in release mode.
//!
//! cargo run --release --example noisy_targets_study

use robust_transducer::corpus::{
    corpus_vocabulary, corrupt_corpus, generate_corpus, CorruptionKind, CorruptionSpec, GenConfig,
};
use robust_transducer::lattice::LossKind;
use robust_transducer::loss::LossConfig;
use robust_transducer::metrics::{wer, werd, werdr};
use robust_transducer::toy::{evaluate, split_corpus, train, SynthesisSpec, Synthesizer, TrainConfig};

fn main() -> robust_transducer::Result<()> {
    let clean = generate_corpus(&GenConfig::default())?;
    let vocab = corpus_vocabulary(&clean);
    let deleted = corrupt_corpus(&clean, &CorruptionSpec::single(CorruptionKind::Del, 0.5, 1), &vocab)?.corpus;
    let synth = Synthesizer::new(SynthesisSpec::new(vocab, 1))?;

    let test_wer = |corpus, loss: LossConfig| -> robust_transducer::Result<f64> {
        let (train_set, dev_set, test_set) = split_corpus(corpus);
        let config = TrainConfig {
            epochs: 30,
            loss,
            ..TrainConfig::default()
        };
        let outcome = train(train_set, dev_set, &synth, &config)?;
        Ok(100.0 * wer(&evaluate(&outcome.best_params, test_set, &synth, config.decoder)?)?)
    };
    let rnnt = LossConfig::new(LossKind::Rnnt);
    let star = LossConfig {
        skip_frame_weight: -0.75,
        ..LossConfig::new(LossKind::Star)
    };

    let base = test_wer(&clean, rnnt)?;
    let noisy_rnnt = test_wer(&deleted, rnnt)?;
    let noisy_star = test_wer(&deleted, star)?;
    println!("clean rnnt     test WER {base:>6.2}%");
    println!("50% del rnnt   test WER {noisy_rnnt:>6.2}%  WERD {:>6.2}", werd(noisy_rnnt, base));
    println!("50% del star   test WER {noisy_star:>6.2}%  WERD {:>6.2}", werd(noisy_star, base));
    match werdr(werd(noisy_rnnt, base), werd(noisy_star, base)) {
        Ok(r) => println!("WERDR {:.1}%", 100.0 * r),
        Err(e) => println!("WERDR undefined: {e}"),
    }
    Ok(())
}
