//! Word-level Levenshtein alignment and error-rate metrics.
//!
//! - WER: `(sub + ins + del) / reference words`, pooled over a corpus.
//! - WERD: WER of a system trained on modified data minus the WER of the
//!   baseline trained on the original data.
//! - WERDR: the share of the baseline's degradation a proposed loss recovers,
//!   `(WERD_baseline - WERD_proposed) / WERD_baseline`.

use std::iter::Sum;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditCounts {
    pub sub: usize,
    pub ins: usize,
    pub del: usize,
    /// Number of reference words.
    pub reference_len: usize,
}

impl EditCounts {
    pub fn errors(&self) -> usize {
        self.sub + self.ins + self.del
    }
}

impl Add for EditCounts {
    type Output = EditCounts;

    fn add(self, rhs: EditCounts) -> EditCounts {
        EditCounts {
            sub: self.sub + rhs.sub,
            ins: self.ins + rhs.ins,
            del: self.del + rhs.del,
            reference_len: self.reference_len + rhs.reference_len,
        }
    }
}

impl AddAssign for EditCounts {
    fn add_assign(&mut self, rhs: EditCounts) {
        *self = *self + rhs;
    }
}

impl Sum for EditCounts {
    fn sum<I: Iterator<Item = EditCounts>>(iter: I) -> Self {
        iter.fold(EditCounts::default(), Add::add)
    }
}

/// Minimal edit counts under unit costs.
///
/// The backtrace prefers the diagonal (match or substitution), then
/// insertion, then deletion, so counts are deterministic among optimal scripts.
pub fn align<S: AsRef<str>>(reference: &[S], hypothesis: &[S]) -> EditCounts {
    let n = reference.len();
    let m = hypothesis.len();
    let width = m + 1;
    let mut dp = vec![0usize; (n + 1) * width];
    for i in 0..=n {
        dp[i * width] = i;
    }
    for j in 0..=m {
        dp[j] = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let cost = usize::from(reference[i - 1].as_ref() != hypothesis[j - 1].as_ref());
            dp[i * width + j] = (dp[(i - 1) * width + j - 1] + cost)
                .min(dp[i * width + j - 1] + 1)
                .min(dp[(i - 1) * width + j] + 1);
        }
    }

    let mut counts = EditCounts {
        reference_len: n,
        ..Default::default()
    };
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = dp[i * width + j];
        if i > 0 && j > 0 {
            let cost = usize::from(reference[i - 1].as_ref() != hypothesis[j - 1].as_ref());
            if here == dp[(i - 1) * width + j - 1] + cost {
                counts.sub += cost;
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if j > 0 && here == dp[i * width + j - 1] + 1 {
            counts.ins += 1;
            j -= 1;
        } else {
            counts.del += 1;
            i -= 1;
        }
    }
    counts
}

/// Pooled word error rate.
pub fn wer(counts: &EditCounts) -> Result<f64> {
    if counts.reference_len == 0 {
        return Err(Error::EmptyReference);
    }
    Ok(counts.errors() as f64 / counts.reference_len as f64)
}

/// Degradation of `wer_modified` relative to `wer_original` (same units as inputs).
pub fn werd(wer_modified: f64, wer_original: f64) -> f64 {
    wer_modified - wer_original
}

/// Fraction of the baseline degradation recovered by the proposed system.
pub fn werdr(werd_baseline: f64, werd_proposed: f64) -> Result<f64> {
    if werd_baseline == 0.0 {
        return Err(Error::DivisionByZero);
    }
    Ok((werd_baseline - werd_proposed) / werd_baseline)
}

/// Whitespace tokenization; no case folding or punctuation handling.
pub fn words(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}
