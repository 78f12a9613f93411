//! Unit schemas, temporal schemas and direct alignment grids for the four
//! transducer losses.
//!
//! The grid for frames `T` and target length `U` has states `(t, u)` with id
//! `t * (U + 1) + u` and one final state with id `T * (U + 1)`. Composing the
//! unit schema with the temporal schema and trimming the result gives the same
//! graph up to state numbering.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsa::{Arc, ArcLabel, Symbol, Wfsa};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    /// Plain RNN-Transducer.
    Rnnt,
    /// Star-Transducer: skip-frame arcs parallel to blank arcs.
    Star,
    /// Bypass-Transducer: skip-token arcs parallel to label arcs.
    Bypass,
    /// Target-Robust-Transducer: both arc families.
    Trt,
}

impl LossKind {
    pub const ALL: [LossKind; 4] = [LossKind::Rnnt, LossKind::Star, LossKind::Bypass, LossKind::Trt];

    pub fn has_skip_frame(self) -> bool {
        matches!(self, LossKind::Star | LossKind::Trt)
    }

    pub fn has_skip_token(self) -> bool {
        matches!(self, LossKind::Bypass | LossKind::Trt)
    }

    pub fn name(self) -> &'static str {
        match self {
            LossKind::Rnnt => "rnnt",
            LossKind::Star => "star",
            LossKind::Bypass => "bypass",
            LossKind::Trt => "trt",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        LossKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown loss kind {s:?} (expected rnnt, star, bypass or trt)"))
    }
}

/// Target units, each a base-vocabulary token id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetSequence {
    units: Vec<u32>,
    vocab_size: usize,
}

impl TargetSequence {
    pub fn new(units: Vec<u32>, vocab_size: usize) -> Result<Self> {
        if let Some((position, &unit)) = units
            .iter()
            .enumerate()
            .find(|(_, &u)| u as usize >= vocab_size)
        {
            return Err(Error::InvalidTarget {
                unit,
                position,
                vocab_size,
            });
        }
        Ok(TargetSequence { units, vocab_size })
    }

    pub fn units(&self) -> &[u32] {
        &self.units
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatticeShape {
    pub frames: usize,
    pub units: usize,
    pub vocab_size: usize,
}

impl LatticeShape {
    pub fn grid_state(&self, t: usize, u: usize) -> usize {
        t * (self.units + 1) + u
    }

    pub fn final_state(&self) -> usize {
        self.frames * (self.units + 1)
    }

    pub fn num_states(&self) -> usize {
        self.frames * (self.units + 1) + 1
    }
}

/// Linear automaton over target positions `0..=U` plus a final state.
pub fn build_unit_schema(target: &TargetSequence, kind: LossKind) -> Wfsa {
    let u_len = target.len();
    let final_state = u_len + 1;
    let mut arcs = Vec::new();
    for u in 0..=u_len {
        let lab = |s| ArcLabel::new(s, Some(u), None);
        arcs.push(Arc::new(u, u, lab(Symbol::Blank), 0.0));
        if kind.has_skip_frame() {
            arcs.push(Arc::new(u, u, lab(Symbol::SkipFrame), 0.0));
        }
        if u < u_len {
            arcs.push(Arc::new(u, u + 1, lab(Symbol::Token(target.units()[u])), 0.0));
            if kind.has_skip_token() {
                arcs.push(Arc::new(u, u + 1, lab(Symbol::SkipToken), 0.0));
            }
        }
    }
    arcs.push(Arc::new(
        u_len,
        final_state,
        ArcLabel::new(Symbol::Blank, Some(u_len), None),
        0.0,
    ));
    Wfsa::new(u_len + 2, final_state, arcs).expect("unit schema is well formed")
}

/// Linear automaton over frames `0..=T`; state `T` is final.
pub fn build_temporal_schema(frames: usize, vocab_size: usize, kind: LossKind) -> Result<Wfsa> {
    if frames == 0 {
        return Err(Error::ShapeMismatch("temporal schema needs at least one frame".into()));
    }
    let mut arcs = Vec::new();
    for t in 0..frames {
        let lab = |s| ArcLabel::new(s, None, Some(t));
        for v in 0..vocab_size as u32 {
            arcs.push(Arc::new(t, t, lab(Symbol::Token(v)), 0.0));
        }
        if kind.has_skip_token() {
            arcs.push(Arc::new(t, t, lab(Symbol::SkipToken), 0.0));
        }
        arcs.push(Arc::new(t, t + 1, lab(Symbol::Blank), 0.0));
        if kind.has_skip_frame() {
            arcs.push(Arc::new(t, t + 1, lab(Symbol::SkipFrame), 0.0));
        }
    }
    Ok(Wfsa::new(frames + 1, frames, arcs).expect("temporal schema is well formed"))
}

/// The trimmed alignment lattice, built directly. All weights are zero.
pub fn build_grid(target: &TargetSequence, frames: usize, kind: LossKind) -> Result<Wfsa> {
    if frames == 0 {
        return Err(Error::ShapeMismatch("grid needs at least one frame".into()));
    }
    let shape = LatticeShape {
        frames,
        units: target.len(),
        vocab_size: target.vocab_size(),
    };
    let u_len = target.len();
    let mut arcs = Vec::with_capacity(frames * (u_len + 1) * 4);
    for t in 0..frames {
        for u in 0..=u_len {
            let here = shape.grid_state(t, u);
            if t + 1 < frames {
                let next = shape.grid_state(t + 1, u);
                arcs.push(Arc::new(here, next, ArcLabel::at(Symbol::Blank, u, t), 0.0));
                if kind.has_skip_frame() {
                    arcs.push(Arc::new(here, next, ArcLabel::at(Symbol::SkipFrame, u, t), 0.0));
                }
            }
            if u < u_len {
                let next = shape.grid_state(t, u + 1);
                let token = Symbol::Token(target.units()[u]);
                arcs.push(Arc::new(here, next, ArcLabel::at(token, u, t), 0.0));
                if kind.has_skip_token() {
                    arcs.push(Arc::new(here, next, ArcLabel::at(Symbol::SkipToken, u, t), 0.0));
                }
            }
        }
    }
    // terminal transition consumes the last frame as a true blank
    arcs.push(Arc::new(
        shape.grid_state(frames - 1, u_len),
        shape.final_state(),
        ArcLabel::at(Symbol::Blank, u_len, frames - 1),
        0.0,
    ));
    Wfsa::new(shape.num_states(), shape.final_state(), arcs)
}

/// `connect(compose(unit schema, temporal schema))`.
pub fn build_composed(target: &TargetSequence, frames: usize, kind: LossKind) -> Result<Wfsa> {
    let unit = build_unit_schema(target, kind);
    let temporal = build_temporal_schema(frames, target.vocab_size(), kind)?;
    Ok(crate::fsa::connect(&crate::fsa::compose(&unit, &temporal)))
}
