//! A desk-scale transducer trained with the loss family.
//!
//! Features are synthesized from the words actually spoken: each word owns a
//! fixed block of `frames_per_word` random vectors, and every frame gets a
//! little Gaussian noise. Because the audio always matches `true_words`, any
//! corruption of `target_words` is pure label noise.

pub mod checkpoint;
pub mod model;
pub mod synth;
pub mod train;

pub use checkpoint::Checkpoint;
pub use model::{backward_params, forward_joint, ModelDims, ToyModelParams};
pub use synth::{SynthesisSpec, Synthesizer};
pub use train::{
    decode_words, evaluate, split_corpus, train, utterance_loss_and_grad, HistoryRow, TrainConfig,
    TrainOutcome,
};
