//! Frame-synchronous greedy decoding for transducer models.

use serde::{Deserialize, Serialize};

/// A transducer split into its prediction network state and joint network.
///
/// Token ids are `0..vocab_size()`; id `vocab_size()` is blank, which also
/// serves as the start-of-sequence input of the prediction network.
pub trait TransducerModel {
    /// One encoder output vector.
    type Encoded;
    /// Prediction network state after some emitted prefix.
    type State;

    fn vocab_size(&self) -> usize;

    /// State after feeding the start symbol.
    fn start_state(&self) -> Self::State;

    /// State after feeding the emitted `token`.
    fn advance(&self, state: &Self::State, token: u32) -> Self::State;

    /// Joint scores over `vocab_size() + 1` outputs (any monotone scale).
    fn joint_scores(&self, frame: &Self::Encoded, state: &Self::State) -> Vec<f64>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoderBudget {
    pub max_symbols_per_frame: usize,
}

impl Default for DecoderBudget {
    fn default() -> Self {
        DecoderBudget {
            max_symbols_per_frame: 10,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Hypothesis {
    pub tokens: Vec<u32>,
    /// Frames on which the per-frame symbol cap cut decoding short.
    pub cap_hits: usize,
}

/// Emits the argmax symbol until blank for every frame in turn.
///
/// Ties go to the lowest index. Blank is never fed to the prediction network.
pub fn greedy_decode<M: TransducerModel>(
    frames: &[M::Encoded],
    model: &M,
    budget: DecoderBudget,
) -> Hypothesis {
    let blank = model.vocab_size();
    let cap = budget.max_symbols_per_frame.max(1);
    let mut state = model.start_state();
    let mut hyp = Hypothesis::default();
    for frame in frames {
        let mut emitted = 0;
        loop {
            let scores = model.joint_scores(frame, &state);
            let best = argmax(&scores);
            if best == blank {
                break;
            }
            hyp.tokens.push(best as u32);
            state = model.advance(&state, best as u32);
            emitted += 1;
            if emitted == cap {
                hyp.cap_hits += 1;
                break;
            }
        }
    }
    hyp
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Scripted model: at each frame, the output after `k` emitted tokens is
    /// `script[frame][k - emitted_before_frame]`, blank once the script runs out.
    struct Scripted {
        vocab: usize,
        script: Vec<Vec<u32>>,
    }

    impl TransducerModel for Scripted {
        type Encoded = usize;
        type State = Vec<u32>;

        fn vocab_size(&self) -> usize {
            self.vocab
        }

        fn start_state(&self) -> Vec<u32> {
            Vec::new()
        }

        fn advance(&self, state: &Vec<u32>, token: u32) -> Vec<u32> {
            let mut s = state.clone();
            s.push(token);
            s
        }

        fn joint_scores(&self, frame: &usize, state: &Vec<u32>) -> Vec<f64> {
            let before: usize = self.script[..*frame].iter().map(Vec::len).sum();
            let mut scores = vec![0.0; self.vocab + 1];
            match self.script[*frame].get(state.len() - before) {
                Some(&tok) => scores[tok as usize] = 1.0,
                None => scores[self.vocab] = 1.0,
            }
            scores
        }
    }

    struct AlwaysBlank;

    impl TransducerModel for AlwaysBlank {
        type Encoded = ();
        type State = ();
        fn vocab_size(&self) -> usize {
            3
        }
        fn start_state(&self) {}
        fn advance(&self, _: &(), _: u32) {}
        fn joint_scores(&self, _: &(), _: &()) -> Vec<f64> {
            vec![0.1, 0.2, 0.3, 0.9]
        }
    }

    struct NeverBlank;

    impl TransducerModel for NeverBlank {
        type Encoded = ();
        type State = ();
        fn vocab_size(&self) -> usize {
            2
        }
        fn start_state(&self) {}
        fn advance(&self, _: &(), _: u32) {}
        fn joint_scores(&self, _: &(), _: &()) -> Vec<f64> {
            vec![1.0, 1.0, 0.0]
        }
    }

    #[test]
    fn blank_first_gives_empty_hypothesis() {
        let h = greedy_decode(&[(), (), ()], &AlwaysBlank, DecoderBudget::default());
        assert!(h.tokens.is_empty());
    }

    #[test]
    fn no_frames_gives_empty_hypothesis() {
        let h = greedy_decode(&[], &AlwaysBlank, DecoderBudget::default());
        assert_eq!(h, Hypothesis::default());
    }

    #[test]
    fn forced_cat_alignment() {
        // C <b> | A T <b>   with C=2, A=0, T=19
        let model = Scripted {
            vocab: 26,
            script: vec![vec![2], vec![0, 19]],
        };
        let h = greedy_decode(&[0, 1], &model, DecoderBudget::default());
        assert_eq!(h.tokens, vec![2, 0, 19]);
        assert_eq!(h.cap_hits, 0);
    }

    #[test]
    fn cap_bounds_output_and_ties_pick_lowest() {
        let budget = DecoderBudget {
            max_symbols_per_frame: 3,
        };
        let h = greedy_decode(&[(), ()], &NeverBlank, budget);
        assert_eq!(h.tokens, vec![0; 6]);
        assert_eq!(h.cap_hits, 2);
    }
}
