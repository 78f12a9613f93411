//! RNN-Transducer losses for training on noisy transcripts.
//!
//! The alignment lattice of a transducer is an acyclic weighted automaton
//! whose arcs read entries of the joint network output. This crate builds
//! those lattices for four losses:
//!
//! - **RNN-T**: the standard full-sum transducer loss.
//! - **Star-Transducer**: adds skip-frame arcs next to every blank arc, so
//!   frames whose words are missing from the transcript can be passed over.
//! - **Bypass-Transducer**: adds skip-token arcs next to every label arc, so
//!   transcript words that are not in the audio can be skipped.
//! - **Target-Robust-Transducer**: both arc families.
//!
//! Around the losses sit the pieces needed to study them end to end: greedy
//! decoding, word error rate metrics, seeded transcript corruption, and a
//! small transducer model with hand-written gradients that trains on
//! synthetic features.
//!
//! ```
//! use robust_transducer::lattice::{LossKind, TargetSequence};
//! use robust_transducer::loss::{loss_and_grad, JointLogProbs, LossConfig};
//!
//! let target = TargetSequence::new(vec![1, 0], 3).unwrap();
//! // uniform distribution over 3 tokens + blank, T = 4 frames
//! let joint = JointLogProbs::new(ndarray::Array3::from_elem((4, 3, 4), -(4f64).ln())).unwrap();
//! let star = LossConfig { skip_frame_weight: -0.5, ..LossConfig::new(LossKind::Star) };
//! let rnnt = loss_and_grad(&joint, &target, &LossConfig::new(LossKind::Rnnt), 0.0).unwrap();
//! let relaxed = loss_and_grad(&joint, &target, &star, 0.0).unwrap();
//! assert!(relaxed.loss < rnnt.loss);
//! ```

pub mod commands;
pub mod corpus;
pub mod decode;
pub mod error;
pub mod fsa;
pub mod lattice;
pub mod loss;
pub mod metrics;
pub mod rng;
pub mod serde_log;
pub mod toy;
pub mod verify;

pub use error::{Error, Result};
