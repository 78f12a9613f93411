//! Greedy decoding with a hand-written model: a table lookup that spells a
//! fixed word one token per frame.

use robust_transducer::decode::{greedy_decode, DecoderBudget, TransducerModel};

/// Emits `script[frame]` once per frame, then blank.
struct Speller {
    script: Vec<u32>,
    vocab: usize,
}

impl TransducerModel for Speller {
    type State = usize;
    type Encoded = usize;

    fn vocab_size(&self) -> usize {
        self.vocab
    }

    fn start_state(&self) -> usize {
        0
    }

    fn advance(&self, emitted: &usize, _token: u32) -> usize {
        emitted + 1
    }

    fn joint_scores(&self, frame: &usize, emitted: &usize) -> Vec<f64> {
        let mut scores = vec![0.0; self.vocab + 1];
        if *emitted == *frame {
            scores[self.script[*frame] as usize] = 1.0;
        } else {
            scores[self.vocab] = 1.0;
        }
        scores
    }
}

fn main() {
    let letters = ["c", "a", "t"];
    let model = Speller {
        script: vec![0, 1, 2],
        vocab: letters.len(),
    };
    let frames: Vec<usize> = (0..3).collect();
    let hyp = greedy_decode(&frames, &model, DecoderBudget::default());
    let word: String = hyp.tokens.iter().map(|&t| letters[t as usize]).collect();
    println!("decoded {word:?} ({} frames hit the symbol cap)", hyp.cap_hits);
}
