use ndarray::{s, Array2, Array3};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::corpus::Utterance;
use crate::error::{Error, Result};
use crate::rng::stream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisSpec {
    /// Word list; a word's token id is its index.
    pub vocab: Vec<String>,
    pub frames_per_word: usize,
    pub feature_dim: usize,
    pub noise_std: f64,
    pub seed: u64,
}

impl SynthesisSpec {
    pub fn new(vocab: Vec<String>, seed: u64) -> Self {
        SynthesisSpec {
            vocab,
            frames_per_word: 4,
            feature_dim: 16,
            noise_std: 0.1,
            seed,
        }
    }

    pub fn token_id(&self, word: &str) -> Result<u32> {
        self.vocab
            .iter()
            .position(|w| w == word)
            .map(|i| i as u32)
            .ok_or_else(|| Error::UnknownWord(word.to_string()))
    }

    pub fn token_ids<S: AsRef<str>>(&self, words: &[S]) -> Result<Vec<u32>> {
        words.iter().map(|w| self.token_id(w.as_ref())).collect()
    }
}

/// Per-word frame blocks and the noise generator for one spec.
#[derive(Clone, Debug)]
pub struct Synthesizer {
    spec: SynthesisSpec,
    /// `W x k x d`, standard normal.
    codebook: Array3<f64>,
}

impl Synthesizer {
    pub fn new(spec: SynthesisSpec) -> Result<Self> {
        if spec.vocab.is_empty() || spec.frames_per_word == 0 || spec.feature_dim == 0 {
            return Err(Error::InvalidConfig(
                "synthesis needs a vocabulary, frames per word and a feature dimension".into(),
            ));
        }
        if !(spec.noise_std >= 0.0 && spec.noise_std.is_finite()) {
            return Err(Error::InvalidConfig(format!("noise std {}", spec.noise_std)));
        }
        let mut rng = stream(spec.seed, "codebook", "");
        let shape = (spec.vocab.len(), spec.frames_per_word, spec.feature_dim);
        let codebook = Array3::from_shape_simple_fn(shape, || StandardNormal.sample(&mut rng));
        Ok(Synthesizer { spec, codebook })
    }

    pub fn spec(&self) -> &SynthesisSpec {
        &self.spec
    }

    pub fn codebook(&self) -> &Array3<f64> {
        &self.codebook
    }

    /// `T x d` features for the words actually spoken, `T = k * len(true_words)`.
    pub fn frames(&self, utt: &Utterance) -> Result<Array2<f64>> {
        let ids = self.spec.token_ids(&utt.true_words)?;
        let k = self.spec.frames_per_word;
        let mut out = Array2::zeros((ids.len() * k, self.spec.feature_dim));
        for (i, &id) in ids.iter().enumerate() {
            out.slice_mut(s![i * k..(i + 1) * k, ..])
                .assign(&self.codebook.slice(s![id as usize, .., ..]));
        }
        if self.spec.noise_std > 0.0 {
            let mut rng = stream(self.spec.seed, "noise", &utt.id);
            let sd = self.spec.noise_std;
            out.mapv_inplace(|x| {
                let n: f64 = StandardNormal.sample(&mut rng);
                x + sd * n
            });
        }
        Ok(out)
    }
}
