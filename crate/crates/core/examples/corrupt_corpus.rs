//! Generates a small clean corpus and applies each corruption type to it.

use robust_transducer::corpus::{
    corpus_vocabulary, corrupt_corpus, generate_corpus, CorruptionKind, CorruptionSpec, GenConfig,
};

fn main() -> robust_transducer::Result<()> {
    let corpus = generate_corpus(&GenConfig {
        vocab_size: 12,
        utterances: 200,
        ..GenConfig::default()
    })?;
    let vocab = corpus_vocabulary(&corpus);
    let words: usize = corpus.iter().map(|u| u.true_words.len()).sum();
    println!("clean: {} utterances, {words} words", corpus.len());
    println!("  {}", corpus[0].true_words.join(" "));

    let specs = [
        CorruptionSpec::single(CorruptionKind::Del, 0.3, 7),
        CorruptionSpec::single(CorruptionKind::Sub, 0.3, 7),
        CorruptionSpec::single(CorruptionKind::Ins, 0.3, 7),
        CorruptionSpec::mixed(0.5, 0.15, 7),
    ];
    for spec in specs {
        let out = corrupt_corpus(&corpus, &spec, &vocab)?;
        let target: usize = out.corpus.iter().map(|u| u.target_words.len()).sum();
        let selected = out.selected.iter().filter(|&&s| s).count();
        println!("{:<5} {selected:>3} utterances touched, {target} target words", spec.kind.name());
        println!("  {}", out.corpus[0].target_words.join(" "));
    }
    Ok(())
}
