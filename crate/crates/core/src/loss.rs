//! Lattice weighting, loss values and gradients with respect to the joint
//! network's log-probabilities.
//!
//! Blank and label arcs read one joint entry each. Skip-frame arcs carry the
//! constant `skip_frame_weight`. Skip-token arcs carry the current penalty
//! plus a value derived from the joint row at their `(t, u)` cell, selected
//! by [`SkipTokenMode`].

use std::fmt;
use std::str::FromStr;

use ndarray::{s, Array3, ArrayView1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsa::{logsumexp, ForwardBackward, Symbol, Wfsa};
use crate::lattice::{build_grid, LossKind, TargetSequence};

/// Tolerance on `logsumexp(row)` for the normalized-rows check.
pub const ROW_NORM_TOLERANCE: f64 = 1e-3;

/// Log-probabilities of shape `T x (U + 1) x (V + 1)`; index `V` is blank.
#[derive(Clone, Debug, PartialEq)]
pub struct JointLogProbs {
    values: Array3<f64>,
}

impl JointLogProbs {
    pub fn new(values: Array3<f64>) -> Result<Self> {
        let (t, u1, v1) = values.dim();
        if t == 0 || u1 == 0 || v1 < 2 {
            return Err(Error::ShapeMismatch(format!(
                "joint must be at least 1 x 1 x 2, got {t} x {u1} x {v1}"
            )));
        }
        Ok(JointLogProbs { values })
    }

    pub fn zeros(frames: usize, units: usize, vocab_size: usize) -> Self {
        JointLogProbs {
            values: Array3::zeros((frames, units + 1, vocab_size + 1)),
        }
    }

    pub fn frames(&self) -> usize {
        self.values.dim().0
    }

    /// Target length `U` (the array holds `U + 1` positions).
    pub fn units(&self) -> usize {
        self.values.dim().1 - 1
    }

    /// Base vocabulary size `V`, excluding blank.
    pub fn vocab_size(&self) -> usize {
        self.values.dim().2 - 1
    }

    pub fn blank(&self) -> usize {
        self.vocab_size()
    }

    pub fn values(&self) -> &Array3<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array3<f64> {
        &mut self.values
    }

    pub fn into_values(self) -> Array3<f64> {
        self.values
    }

    pub fn row(&self, t: usize, u: usize) -> ArrayView1<'_, f64> {
        self.values.slice(s![t, u, ..])
    }

    pub fn check_normalized(&self, tolerance: f64) -> Result<()> {
        for t in 0..self.frames() {
            for u in 0..=self.units() {
                let lse = logsumexp(self.row(t, u).iter().copied());
                if (lse.abs() > tolerance) || lse.is_nan() {
                    return Err(Error::UnnormalizedRow { t, u, lse });
                }
            }
        }
        Ok(())
    }
}

/// How the joint row contributes to a skip-token arc weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SkipTokenMode {
    /// Penalty only.
    Constant,
    /// Arithmetic mean of the non-blank log-probabilities.
    Mean,
    /// Largest non-blank log-probability.
    Max,
    /// Largest log-probability excluding blank and the target unit.
    Maxexcl,
    /// Log of the total probability excluding blank and the target unit.
    Sumexcl,
}

impl SkipTokenMode {
    pub const ALL: [SkipTokenMode; 5] = [
        SkipTokenMode::Constant,
        SkipTokenMode::Mean,
        SkipTokenMode::Max,
        SkipTokenMode::Maxexcl,
        SkipTokenMode::Sumexcl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SkipTokenMode::Constant => "constant",
            SkipTokenMode::Mean => "mean",
            SkipTokenMode::Max => "max",
            SkipTokenMode::Maxexcl => "maxexcl",
            SkipTokenMode::Sumexcl => "sumexcl",
        }
    }
}

impl fmt::Display for SkipTokenMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SkipTokenMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        SkipTokenMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                format!("unknown skip-token mode {s:?} (expected constant, mean, max, maxexcl or sumexcl)")
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub kind: LossKind,
    /// Constant log weight of skip-frame arcs; may be `-inf`.
    #[serde(with = "crate::serde_log")]
    pub skip_frame_weight: f64,
    /// Skip-token penalty used when no schedule drives it; may be `-inf`.
    #[serde(with = "crate::serde_log")]
    pub skip_token_penalty: f64,
    pub skip_token_mode: SkipTokenMode,
    /// Reject joint rows whose logsumexp is off zero by more than [`ROW_NORM_TOLERANCE`].
    pub check_normalized: bool,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            kind: LossKind::Rnnt,
            skip_frame_weight: 0.0,
            skip_token_penalty: -20.0,
            skip_token_mode: SkipTokenMode::Sumexcl,
            check_normalized: true,
        }
    }
}

impl LossConfig {
    pub fn new(kind: LossKind) -> Self {
        LossConfig {
            kind,
            ..Default::default()
        }
    }
}

/// Per-epoch decay of the skip-token penalty toward `max_weight`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltySchedule {
    #[serde(with = "crate::serde_log")]
    pub initial_weight: f64,
    pub decay: f64,
    #[serde(with = "crate::serde_log")]
    pub max_weight: f64,
    /// First completed epoch (1-based) after which the decay is applied.
    pub start_epoch: usize,
}

impl Default for PenaltySchedule {
    fn default() -> Self {
        PenaltySchedule {
            initial_weight: -20.0,
            decay: 0.9,
            max_weight: -6.0,
            start_epoch: 3,
        }
    }
}

impl PenaltySchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_weight <= self.max_weight && self.max_weight <= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "schedule needs initial_weight <= max_weight <= 0, got {} and {}",
                self.initial_weight, self.max_weight
            )));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "schedule decay must be in (0, 1], got {}",
                self.decay
            )));
        }
        Ok(())
    }

    /// Penalty after each of the first `epochs` completed epochs.
    pub fn trajectory(&self, epochs: usize) -> Vec<f64> {
        let mut w = self.initial_weight;
        (1..=epochs)
            .map(|e| {
                w = schedule_step(w, self, e);
                w
            })
            .collect()
    }
}

/// `min(max_weight, weight * decay)` once `completed_epoch >= start_epoch`.
pub fn schedule_step(weight: f64, schedule: &PenaltySchedule, completed_epoch: usize) -> f64 {
    if completed_epoch < schedule.start_epoch {
        weight
    } else {
        schedule.max_weight.min(weight * schedule.decay)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LossResult {
    /// Negative log of the total lattice score.
    pub loss: f64,
    /// Derivative of `loss` with respect to every joint entry.
    pub grad: Array3<f64>,
}

/// Skip-token contribution of one joint row (length `V + 1`, blank last).
pub fn mode_value(row: ArrayView1<'_, f64>, target_unit: u32, mode: SkipTokenMode) -> Result<f64> {
    let mut scratch = Vec::new();
    mode_value_with_grad(row, target_unit as usize, mode, &mut scratch)
}

/// Evaluates the mode and appends `(index, d value / d row[index])` pairs.
fn mode_value_with_grad(
    row: ArrayView1<'_, f64>,
    target: usize,
    mode: SkipTokenMode,
    grad: &mut Vec<(usize, f64)>,
) -> Result<f64> {
    let vocab = row.len() - 1;
    let excluded = |v: usize| v == target;
    match mode {
        SkipTokenMode::Constant => Ok(0.0),
        SkipTokenMode::Mean => {
            let scale = 1.0 / vocab as f64;
            grad.extend((0..vocab).map(|v| (v, scale)));
            Ok((0..vocab).map(|v| row[v]).sum::<f64>() * scale)
        }
        SkipTokenMode::Max | SkipTokenMode::Maxexcl => {
            let exclude_target = mode == SkipTokenMode::Maxexcl;
            // strict comparison keeps the lowest index on ties
            let best = (0..vocab)
                .filter(|&v| !(exclude_target && excluded(v)))
                .fold(None::<usize>, |best, v| match best {
                    Some(b) if row[b] >= row[v] => Some(b),
                    _ => Some(v),
                })
                .ok_or(Error::DegenerateVocabulary(mode.name()))?;
            grad.push((best, 1.0));
            Ok(row[best])
        }
        SkipTokenMode::Sumexcl => {
            let idx: Vec<usize> = (0..vocab).filter(|&v| !excluded(v)).collect();
            if idx.is_empty() {
                return Err(Error::DegenerateVocabulary(mode.name()));
            }
            let max = idx.iter().map(|&v| row[v]).fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = idx.iter().map(|&v| (row[v] - max).exp()).sum();
            let lse = max + sum.ln();
            grad.extend(idx.iter().map(|&v| (v, (row[v] - lse).exp())));
            Ok(lse)
        }
    }
}

/// Arc weights plus, for each arc, the joint entries it reads and their partials.
struct Population {
    weights: Vec<f64>,
    reads: Vec<(usize, usize, usize, f64)>,
    /// `reads[read_offsets[a]..read_offsets[a + 1]]` belong to arc `a`.
    read_offsets: Vec<usize>,
}

fn populate(
    lattice: &Wfsa,
    joint: &JointLogProbs,
    target: &TargetSequence,
    config: &LossConfig,
    current_penalty: f64,
) -> Result<Population> {
    if joint.units() != target.len() {
        return Err(Error::ShapeMismatch(format!(
            "joint has {} unit positions, target has {} units",
            joint.units() + 1,
            target.len()
        )));
    }
    if joint.vocab_size() != target.vocab_size() {
        return Err(Error::ShapeMismatch(format!(
            "joint vocabulary {} does not match target vocabulary {}",
            joint.vocab_size(),
            target.vocab_size()
        )));
    }
    let blank = joint.blank();
    let mut weights = Vec::with_capacity(lattice.num_arcs());
    let mut reads = Vec::with_capacity(lattice.num_arcs());
    let mut read_offsets = Vec::with_capacity(lattice.num_arcs() + 1);
    let mut mode_grad = Vec::new();
    read_offsets.push(0);
    for arc in lattice.arcs() {
        let (u, t) = match (arc.label.unit_position, arc.label.frame) {
            (Some(u), Some(t)) if t < joint.frames() && u <= joint.units() => (u, t),
            _ => {
                return Err(Error::ShapeMismatch(format!(
                    "arc label {} outside the {} x {} joint",
                    arc.label,
                    joint.frames(),
                    joint.units() + 1
                )))
            }
        };
        let w = match arc.label.unit {
            Symbol::Blank => {
                reads.push((t, u, blank, 1.0));
                joint.values[[t, u, blank]]
            }
            Symbol::Token(v) => {
                let v = v as usize;
                if v >= blank {
                    return Err(Error::ShapeMismatch(format!("token {v} outside vocabulary")));
                }
                reads.push((t, u, v, 1.0));
                joint.values[[t, u, v]]
            }
            Symbol::SkipFrame => config.skip_frame_weight,
            Symbol::SkipToken => {
                let unit = *target.units().get(u).ok_or_else(|| {
                    Error::ShapeMismatch(format!("skip-token arc at final position {u}"))
                })?;
                mode_grad.clear();
                let value = mode_value_with_grad(
                    joint.row(t, u),
                    unit as usize,
                    config.skip_token_mode,
                    &mut mode_grad,
                )?;
                reads.extend(mode_grad.iter().map(|&(v, d)| (t, u, v, d)));
                current_penalty + value
            }
        };
        weights.push(w);
        read_offsets.push(reads.len());
    }
    Ok(Population {
        weights,
        reads,
        read_offsets,
    })
}

/// Copy of `lattice` with weights taken from the joint output.
pub fn populate_weights(
    lattice: &Wfsa,
    joint: &JointLogProbs,
    target: &TargetSequence,
    config: &LossConfig,
    current_penalty: f64,
) -> Result<Wfsa> {
    let pop = populate(lattice, joint, target, config, current_penalty)?;
    lattice.with_weights(&pop.weights)
}

/// Loss and gradient for one utterance using the direct grid.
pub fn loss_and_grad(
    joint: &JointLogProbs,
    target: &TargetSequence,
    config: &LossConfig,
    current_penalty: f64,
) -> Result<LossResult> {
    let lattice = build_grid(target, joint.frames(), config.kind)?;
    loss_and_grad_on(&lattice, joint, target, config, current_penalty)
}

/// Loss and gradient on a caller-supplied lattice, such as a composed one.
pub fn loss_and_grad_on(
    lattice: &Wfsa,
    joint: &JointLogProbs,
    target: &TargetSequence,
    config: &LossConfig,
    current_penalty: f64,
) -> Result<LossResult> {
    if config.check_normalized {
        joint.check_normalized(ROW_NORM_TOLERANCE)?;
    }
    let pop = populate(lattice, joint, target, config, current_penalty)?;
    let weighted = lattice.with_weights(&pop.weights)?;
    let fb = ForwardBackward::compute(&weighted)?;
    let posteriors = fb.posteriors(&weighted)?;
    let mut grad = Array3::zeros(joint.values.dim());
    for (a, &post) in posteriors.as_slice().iter().enumerate() {
        if post == 0.0 {
            continue;
        }
        for &(t, u, v, d) in &pop.reads[pop.read_offsets[a]..pop.read_offsets[a + 1]] {
            grad[[t, u, v]] -= post * d;
        }
    }
    Ok(LossResult {
        loss: -fb.total(),
        grad,
    })
}

/// One padded batch entry: only `[..frames, ..=units, ..]` of `joint` is used.
#[derive(Clone, Copy, Debug)]
pub struct BatchItem<'a> {
    pub joint: &'a JointLogProbs,
    pub target: &'a TargetSequence,
    pub frames: usize,
    pub units: usize,
}

#[derive(Clone, Debug)]
pub struct BatchLoss {
    /// Per-item results with gradients shaped like the padded joints.
    pub items: Vec<LossResult>,
    pub mean_loss: f64,
}

/// Scores every item on its valid region; padded entries get zero gradient.
pub fn batch_loss(
    batch: &[BatchItem<'_>],
    config: &LossConfig,
    current_penalty: f64,
) -> Result<BatchLoss> {
    let items = batch
        .par_iter()
        .map(|item| {
            let (t_max, u1_max, _) = item.joint.values.dim();
            if item.frames == 0 || item.frames > t_max || item.units + 1 > u1_max {
                return Err(Error::ShapeMismatch(format!(
                    "valid region {} x {} exceeds padded joint {} x {}",
                    item.frames,
                    item.units + 1,
                    t_max,
                    u1_max
                )));
            }
            if item.units != item.target.len() {
                return Err(Error::ShapeMismatch(format!(
                    "valid length {} but target has {} units",
                    item.units,
                    item.target.len()
                )));
            }
            let region = s![..item.frames, ..=item.units, ..];
            let valid = JointLogProbs::new(item.joint.values.slice(region).to_owned())?;
            let single = loss_and_grad(&valid, item.target, config, current_penalty)?;
            let mut grad = Array3::zeros(item.joint.values.dim());
            grad.slice_mut(region).assign(&single.grad);
            Ok(LossResult {
                loss: single.loss,
                grad,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mean_loss = if items.is_empty() {
        0.0
    } else {
        items.iter().map(|r| r.loss).sum::<f64>() / items.len() as f64
    };
    Ok(BatchLoss { items, mean_loss })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1};

    fn uniform(frames: usize, units: usize, vocab: usize) -> JointLogProbs {
        let v = -((vocab + 1) as f64).ln();
        JointLogProbs::new(Array3::from_elem((frames, units + 1, vocab + 1), v)).unwrap()
    }

    #[test]
    fn mode_values_on_uniform_row() {
        let row = Array1::from_elem(5, 0.2f64.ln());
        let r = row.view();
        assert!((mode_value(r, 1, SkipTokenMode::Sumexcl).unwrap() - 0.6f64.ln()).abs() < 1e-12);
        assert!((mode_value(r, 1, SkipTokenMode::Mean).unwrap() - 0.2f64.ln()).abs() < 1e-12);
        assert!((mode_value(r, 1, SkipTokenMode::Max).unwrap() - 0.2f64.ln()).abs() < 1e-12);
        assert!((mode_value(r, 1, SkipTokenMode::Maxexcl).unwrap() - 0.2f64.ln()).abs() < 1e-12);
        assert_eq!(mode_value(r, 1, SkipTokenMode::Constant).unwrap(), 0.0);
    }

    #[test]
    fn sumexcl_is_residual_mass_when_target_dominates() {
        // target 0 carries almost everything; blank is last
        let p: [f64; 4] = [1.0 - 4e-6, 1e-6, 2e-6, 1e-6];
        let row: Array1<f64> = p.iter().map(|x| x.ln()).collect();
        let v = mode_value(row.view(), 0, SkipTokenMode::Sumexcl).unwrap();
        assert!((v - 3e-6f64.ln()).abs() < 1e-9);
        assert!(v < -12.0);
        // max ignores the exclusion and picks the target
        assert!((mode_value(row.view(), 0, SkipTokenMode::Max).unwrap() - p[0].ln()).abs() < 1e-12);
        assert!((mode_value(row.view(), 0, SkipTokenMode::Maxexcl).unwrap() - 2e-6f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn exclusion_modes_need_two_labels() {
        let row = array![0.5f64.ln(), 0.5f64.ln()];
        for mode in [SkipTokenMode::Maxexcl, SkipTokenMode::Sumexcl] {
            assert!(matches!(
                mode_value(row.view(), 0, mode),
                Err(Error::DegenerateVocabulary(_))
            ));
        }
        assert!(mode_value(row.view(), 0, SkipTokenMode::Max).is_ok());
    }

    #[test]
    fn max_ties_break_to_lowest_index() {
        let row = array![-1.0, -0.5, -0.5, -3.0];
        let mut g = Vec::new();
        mode_value_with_grad(row.view(), 5, SkipTokenMode::Max, &mut g).unwrap();
        assert_eq!(g, vec![(1, 1.0)]);
        g.clear();
        mode_value_with_grad(row.view(), 1, SkipTokenMode::Maxexcl, &mut g).unwrap();
        assert_eq!(g, vec![(2, 1.0)]);
    }

    #[test]
    fn single_frame_empty_target() {
        let mut joint = uniform(1, 0, 3);
        joint.values_mut()[[0, 0, 3]] = -0.7;
        let cfg = LossConfig {
            check_normalized: false,
            ..LossConfig::new(LossKind::Rnnt)
        };
        let tgt = TargetSequence::new(vec![], 3).unwrap();
        let lattice = build_grid(&tgt, 1, LossKind::Rnnt).unwrap();
        let w = populate_weights(&lattice, &joint, &tgt, &cfg, 0.0).unwrap();
        assert_eq!(w.arcs()[0].weight, -0.7);

        let r = loss_and_grad(&joint, &tgt, &cfg, 0.0).unwrap();
        assert!((r.loss - 0.7).abs() < 1e-15);
        let nonzero: Vec<_> = r.grad.indexed_iter().filter(|(_, &g)| g != 0.0).collect();
        assert_eq!(nonzero, vec![((0, 0, 3), &-1.0)]);
    }

    #[test]
    fn constant_mode_skip_token_weight_is_penalty() {
        let joint = uniform(3, 2, 4);
        let tgt = TargetSequence::new(vec![1, 2], 4).unwrap();
        let cfg = LossConfig {
            skip_token_mode: SkipTokenMode::Constant,
            ..LossConfig::new(LossKind::Bypass)
        };
        let lattice = build_grid(&tgt, 3, LossKind::Bypass).unwrap();
        let w = populate_weights(&lattice, &joint, &tgt, &cfg, -0.5).unwrap();
        let st: Vec<f64> = w
            .arcs()
            .iter()
            .filter(|a| a.label.unit == Symbol::SkipToken)
            .map(|a| a.weight)
            .collect();
        assert_eq!(st.len(), 6);
        assert!(st.iter().all(|&x| x == -0.5));
    }

    #[test]
    fn star_with_neg_inf_skip_equals_rnnt() {
        let joint = uniform(3, 2, 3);
        let tgt = TargetSequence::new(vec![0, 2], 3).unwrap();
        let rnnt = loss_and_grad(&joint, &tgt, &LossConfig::new(LossKind::Rnnt), 0.0).unwrap();
        let star_cfg = LossConfig {
            skip_frame_weight: f64::NEG_INFINITY,
            ..LossConfig::new(LossKind::Star)
        };
        let star = loss_and_grad(&joint, &tgt, &star_cfg, 0.0).unwrap();
        assert!((rnnt.loss - star.loss).abs() < 1e-12);
        assert!(rnnt.grad.iter().zip(star.grad.iter()).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn unnormalized_rows_rejected_unless_disabled() {
        let joint = JointLogProbs::new(Array3::zeros((2, 1, 3))).unwrap();
        let tgt = TargetSequence::new(vec![], 2).unwrap();
        let cfg = LossConfig::new(LossKind::Rnnt);
        assert!(matches!(
            loss_and_grad(&joint, &tgt, &cfg, 0.0),
            Err(Error::UnnormalizedRow { t: 0, u: 0, .. })
        ));
        let cfg = LossConfig {
            check_normalized: false,
            ..cfg
        };
        assert!(loss_and_grad(&joint, &tgt, &cfg, 0.0).is_ok());
    }

    #[test]
    fn shape_mismatch_reported() {
        let joint = uniform(2, 1, 3);
        let tgt = TargetSequence::new(vec![0, 1], 3).unwrap();
        assert!(matches!(
            loss_and_grad(&joint, &tgt, &LossConfig::new(LossKind::Rnnt), 0.0),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn schedule_examples() {
        let s = PenaltySchedule::default();
        assert_eq!(schedule_step(-20.0, &s, 3), -18.0);
        assert_eq!(schedule_step(-6.5, &s, 7), -6.0);
        assert_eq!(schedule_step(-20.0, &s, 1), -20.0);
        assert!(s.validate().is_ok());
        assert!(PenaltySchedule { decay: 1.0, ..s }.validate().is_ok());
        assert!(PenaltySchedule { decay: 1.1, ..s }.validate().is_err());
        assert!(PenaltySchedule { decay: 0.0, ..s }.validate().is_err());
    }

    #[test]
    fn batch_of_one_matches_single() {
        let joint = uniform(3, 1, 2);
        let tgt = TargetSequence::new(vec![1], 2).unwrap();
        let cfg = LossConfig::new(LossKind::Trt);
        let single = loss_and_grad(&joint, &tgt, &cfg, -3.0).unwrap();
        let batch = batch_loss(
            &[BatchItem {
                joint: &joint,
                target: &tgt,
                frames: 3,
                units: 1,
            }],
            &cfg,
            -3.0,
        )
        .unwrap();
        assert_eq!(batch.items[0], single);
        assert_eq!(batch.mean_loss, single.loss);
    }

    #[test]
    fn padded_entries_get_zero_gradient() {
        let joint = uniform(4, 3, 2);
        let tgt = TargetSequence::new(vec![1], 2).unwrap();
        let cfg = LossConfig::new(LossKind::Rnnt);
        let batch = batch_loss(
            &[BatchItem {
                joint: &joint,
                target: &tgt,
                frames: 2,
                units: 1,
            }],
            &cfg,
            0.0,
        )
        .unwrap();
        let g = &batch.items[0].grad;
        assert!(g.slice(s![2.., .., ..]).iter().all(|&x| x == 0.0));
        assert!(g.slice(s![.., 2.., ..]).iter().all(|&x| x == 0.0));
        assert!(g.slice(s![..2, ..2, ..]).iter().any(|&x| x != 0.0));
    }

    #[test]
    fn mode_names_parse() {
        for m in SkipTokenMode::ALL {
            assert_eq!(m.name().parse::<SkipTokenMode>().unwrap(), m);
        }
    }
}
