//! Acyclic weighted automata over the log semiring.
//!
//! Every lattice used by the losses is a [`Wfsa`]: one start state (id 0),
//! one final state without outgoing arcs, and arcs labeled with a
//! `(unit, unit_position, frame)` tuple. Schemas used for composition may
//! contain self-loops; scoring requires an acyclic graph.

mod dot;
mod ops;
mod score;

use std::fmt;

use crate::error::{Error, Result};

pub use dot::to_dot;
pub use ops::{canonical_form, compose, connect, CanonicalForm};
pub use score::{
    arc_posteriors, backward_log_score, enumerate_paths, forward_log_score, topo_order,
    ForwardBackward, Path, PosteriorMap,
};

/// Finite stand-in for `-inf` used inside log-sum-exp accumulation.
pub const NEG_INF_SENTINEL: f64 = -1e30;
/// Scores at or below this are reported as `-inf`.
pub const NEG_INF_THRESHOLD: f64 = -1e29;

pub type StateId = usize;

/// Extended-vocabulary symbol carried by an arc.
///
/// The derived ordering matches the numeric ids (`Token(0..V)`, then
/// `BLANK = V`, `SKIP_FRAME = V + 1`, `SKIP_TOKEN = V + 2`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Token(u32),
    Blank,
    SkipFrame,
    SkipToken,
}

impl Symbol {
    /// Numeric id in an extended vocabulary of `vocab_size` base tokens.
    pub fn id(self, vocab_size: usize) -> usize {
        match self {
            Symbol::Token(t) => t as usize,
            Symbol::Blank => vocab_size,
            Symbol::SkipFrame => vocab_size + 1,
            Symbol::SkipToken => vocab_size + 2,
        }
    }

    pub fn from_id(id: usize, vocab_size: usize) -> Option<Symbol> {
        match id.checked_sub(vocab_size) {
            None => Some(Symbol::Token(id as u32)),
            Some(0) => Some(Symbol::Blank),
            Some(1) => Some(Symbol::SkipFrame),
            Some(2) => Some(Symbol::SkipToken),
            Some(_) => None,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Token(t) => write!(f, "{t}"),
            Symbol::Blank => f.write_str("<b>"),
            Symbol::SkipFrame => f.write_str("<sf>"),
            Symbol::SkipToken => f.write_str("<st>"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArcLabel {
    pub unit: Symbol,
    /// Index into the target sequence, `None` where not applicable.
    pub unit_position: Option<usize>,
    /// Encoder frame index, `None` where not applicable.
    pub frame: Option<usize>,
}

impl ArcLabel {
    pub fn new(unit: Symbol, unit_position: Option<usize>, frame: Option<usize>) -> Self {
        ArcLabel {
            unit,
            unit_position,
            frame,
        }
    }

    /// Label for a lattice arc, where both indices are known.
    pub fn at(unit: Symbol, unit_position: usize, frame: usize) -> Self {
        ArcLabel::new(unit, Some(unit_position), Some(frame))
    }
}

impl fmt::Display for ArcLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<usize>| v.map_or_else(|| "-".to_string(), |v| v.to_string());
        write!(
            f,
            "({},{}):{}",
            self.unit,
            opt(self.unit_position),
            opt(self.frame)
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc {
    pub src: StateId,
    pub dst: StateId,
    pub label: ArcLabel,
    /// Log-domain weight.
    pub weight: f64,
}

impl Arc {
    pub fn new(src: StateId, dst: StateId, label: ArcLabel, weight: f64) -> Self {
        Arc {
            src,
            dst,
            label,
            weight,
        }
    }
}

/// Weighted automaton with start state 0 and a single final state.
///
/// Arcs are kept sorted by `(src, dst, label)` so iteration order, DOT
/// output and tie-breaks are deterministic. The value is immutable once
/// built; [`Wfsa::with_weights`] produces a reweighted copy.
#[derive(Clone, Debug, PartialEq)]
pub struct Wfsa {
    num_states: usize,
    final_state: StateId,
    arcs: Vec<Arc>,
    /// `arcs[offsets[s]..offsets[s + 1]]` leave state `s`.
    offsets: Vec<usize>,
}

impl Wfsa {
    pub const START: StateId = 0;

    pub fn new(num_states: usize, final_state: StateId, mut arcs: Vec<Arc>) -> Result<Self> {
        if num_states == 0 || final_state >= num_states {
            return Err(Error::InvalidGraph(format!(
                "final state {final_state} out of range for {num_states} states"
            )));
        }
        for arc in &arcs {
            if arc.src >= num_states || arc.dst >= num_states {
                return Err(Error::InvalidGraph(format!(
                    "arc {}->{} out of range for {num_states} states",
                    arc.src, arc.dst
                )));
            }
            if arc.src == final_state {
                return Err(Error::InvalidGraph(format!(
                    "final state {final_state} has an outgoing arc"
                )));
            }
        }
        arcs.sort_by(|a, b| {
            (a.src, a.dst, a.label)
                .cmp(&(b.src, b.dst, b.label))
                .then(a.weight.total_cmp(&b.weight))
        });
        let mut offsets = vec![0; num_states + 1];
        for arc in &arcs {
            offsets[arc.src + 1] += 1;
        }
        for s in 0..num_states {
            offsets[s + 1] += offsets[s];
        }
        Ok(Wfsa {
            num_states,
            final_state,
            arcs,
            offsets,
        })
    }

    /// Two states, no arcs: the result of trimming a graph with no accepted path.
    pub fn empty() -> Self {
        Wfsa {
            num_states: 2,
            final_state: 1,
            arcs: Vec::new(),
            offsets: vec![0, 0, 0],
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn start(&self) -> StateId {
        Self::START
    }

    pub fn final_state(&self) -> StateId {
        self.final_state
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    /// Outgoing arcs of `state`, paired with their global arc index.
    pub fn arcs_from(&self, state: StateId) -> impl Iterator<Item = (usize, &Arc)> {
        let range = self.offsets[state]..self.offsets[state + 1];
        range.clone().zip(&self.arcs[range])
    }

    pub fn out_degree(&self, state: StateId) -> usize {
        self.offsets[state + 1] - self.offsets[state]
    }

    /// Copy of the graph with arc weights replaced, in arc-index order.
    pub fn with_weights(&self, weights: &[f64]) -> Result<Wfsa> {
        if weights.len() != self.arcs.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} weights for {} arcs",
                weights.len(),
                self.arcs.len()
            )));
        }
        let mut out = self.clone();
        for (arc, &w) in out.arcs.iter_mut().zip(weights) {
            arc.weight = w;
        }
        Ok(out)
    }

    /// Copy without the arcs for which `drop` returns true.
    pub fn without_arcs(&self, mut drop: impl FnMut(&Arc) -> bool) -> Wfsa {
        let arcs = self.arcs.iter().filter(|a| !drop(a)).copied().collect();
        Wfsa::new(self.num_states, self.final_state, arcs).expect("subset of a valid graph")
    }
}

/// `log(exp(a) + exp(b))`, stable for the finite sentinel.
#[inline]
pub fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo <= NEG_INF_SENTINEL && hi <= NEG_INF_SENTINEL {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

pub fn logsumexp(values: impl IntoIterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.into_iter().map(clamp_neg_inf).collect();
    let max = values.iter().copied().fold(NEG_INF_SENTINEL, f64::max);
    if max <= NEG_INF_SENTINEL {
        return NEG_INF_SENTINEL;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Maps `-inf` (and anything below the sentinel) onto the sentinel. NaN passes through.
#[inline]
pub fn clamp_neg_inf(x: f64) -> f64 {
    if x < NEG_INF_SENTINEL {
        NEG_INF_SENTINEL
    } else {
        x
    }
}

/// Maps sentinel-range scores back to `-inf` for reporting.
#[inline]
pub fn report_score(x: f64) -> f64 {
    if x <= NEG_INF_THRESHOLD {
        f64::NEG_INFINITY
    } else {
        x
    }
}
