//! Self-checks of the loss family that run in a few seconds.
//!
//! - oracle: the dynamic program on the direct grid against brute-force path
//!   enumeration on the composed lattice.
//! - gradient: analytic joint gradients against central finite differences.
//! - degeneration: skip arcs weighted `-inf` reproduce the smaller losses.
//! - toy-gradient: toy-model parameter gradients through the loss against
//!   central finite differences.

use ndarray::Array3;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::corpus::Utterance;
use crate::error::{Error, Result};
use crate::fsa::logsumexp;
use crate::fsa::enumerate_paths;
use crate::lattice::{build_composed, LossKind, TargetSequence};
use crate::loss::{loss_and_grad, populate_weights, JointLogProbs, LossConfig, SkipTokenMode};
use crate::rng::{stream, StreamRng};
use crate::toy::model::{ModelDims, ToyModelParams};
use crate::toy::synth::{SynthesisSpec, Synthesizer};
use crate::toy::train::utterance_loss_and_grad;

pub const ORACLE_TOLERANCE: f64 = 1e-8;
pub const GRADIENT_TOLERANCE: f64 = 1e-4;
pub const DEGENERATION_TOLERANCE: f64 = 1e-8;
pub const TOY_GRADIENT_TOLERANCE: f64 = 1e-3;
pub const FD_STEP: f64 = 1e-5;
/// Relative errors are taken against `max(|analytic|, |numeric|, FLOOR)`.
pub const RELATIVE_FLOOR: f64 = 1e-3;
/// Rows whose competing maxima are closer than this are redrawn.
pub const MIN_MAX_GAP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    /// Instances of the oracle suite; the gradient suite runs a fifth as many
    /// and each degeneration identity a tenth.
    pub trials: usize,
    pub max_t: usize,
    pub max_u: usize,
    pub max_v: usize,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            trials: 1000,
            max_t: 4,
            max_u: 3,
            max_v: 3,
            seed: 1,
        }
    }
}

/// Fault injection used to prove that the suites can fail.
#[doc(hidden)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CheckHooks {
    pub flip_gradient_sign: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub instances: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub worst_case: String,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.max_deviation < self.tolerance
    }

    fn new(name: &str, tolerance: f64) -> Self {
        SuiteReport {
            name: name.to_string(),
            instances: 0,
            max_deviation: 0.0,
            tolerance,
            worst_case: String::new(),
        }
    }

    fn record(&mut self, deviation: f64, case: impl FnOnce() -> String) {
        // NaN counts as a failure
        if !(deviation <= self.max_deviation) {
            self.max_deviation = if deviation.is_nan() { f64::INFINITY } else { deviation };
            self.worst_case = case();
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub suites: Vec<SuiteReport>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteReport::passed)
    }
}

/// One random loss evaluation problem.
#[derive(Clone, Debug)]
pub struct Instance {
    pub joint: JointLogProbs,
    pub target: TargetSequence,
    pub config: LossConfig,
    pub penalty: f64,
}

impl Instance {
    fn describe(&self) -> String {
        format!(
            "{} mode={} T={} U={} V={} sf={:.3} st={:.3}",
            self.config.kind,
            self.config.skip_token_mode,
            self.joint.frames(),
            self.target.len(),
            self.target.vocab_size(),
            self.config.skip_frame_weight,
            self.penalty
        )
    }
}

fn random_joint(rng: &mut StreamRng, frames: usize, units: usize, vocab: usize) -> JointLogProbs {
    let scale = rng.random_range(0.5..3.0);
    let mut values = Array3::from_shape_simple_fn((frames, units + 1, vocab + 1), || {
        let z: f64 = StandardNormal.sample(rng);
        scale * z
    });
    for mut row in values.lanes_mut(ndarray::Axis(2)) {
        let lse = logsumexp(row.iter().copied());
        row -= lse;
    }
    JointLogProbs::new(values).expect("finite values")
}

/// Smallest gap between the winning and runner-up candidates of the max
/// modes over the rows a skip-token arc can read.
fn max_mode_gap(joint: &JointLogProbs, target: &TargetSequence, mode: SkipTokenMode) -> f64 {
    if !matches!(mode, SkipTokenMode::Max | SkipTokenMode::Maxexcl) {
        return f64::INFINITY;
    }
    let mut gap = f64::INFINITY;
    for t in 0..joint.frames() {
        for (u, &unit) in target.units().iter().enumerate() {
            let row = joint.row(t, u);
            let mut vals: Vec<f64> = (0..joint.vocab_size())
                .filter(|&v| !(mode == SkipTokenMode::Maxexcl && v == unit as usize))
                .map(|v| row[v])
                .collect();
            if vals.len() < 2 {
                continue;
            }
            vals.sort_by(|a, b| b.total_cmp(a));
            gap = gap.min(vals[0] - vals[1]);
        }
    }
    gap
}

/// Draws an instance of the given kind and mode within the size bounds.
pub fn random_instance(
    rng: &mut StreamRng,
    kind: LossKind,
    mode: SkipTokenMode,
    bounds: &CheckConfig,
) -> Instance {
    let frames = rng.random_range(1..=bounds.max_t.max(1));
    let units = rng.random_range(0..=bounds.max_u);
    let excl = matches!(mode, SkipTokenMode::Maxexcl | SkipTokenMode::Sumexcl);
    let min_v = if excl && kind.has_skip_token() && bounds.max_v >= 2 { 2 } else { 1 };
    let vocab = rng.random_range(min_v..=bounds.max_v.max(1));
    // with a single token the excluding modes have nothing left to read
    let mode = if excl && vocab < 2 { SkipTokenMode::Mean } else { mode };
    let units_vec = (0..units).map(|_| rng.random_range(0..vocab as u32)).collect();
    let target = TargetSequence::new(units_vec, vocab).expect("tokens drawn in range");
    let mut config = LossConfig::new(kind);
    config.skip_token_mode = mode;
    config.skip_frame_weight = rng.random_range(-2.0..0.5);
    config.check_normalized = false;
    let penalty = rng.random_range(-4.0..0.0);
    config.skip_token_penalty = penalty;
    loop {
        let joint = random_joint(rng, frames, units, vocab);
        if max_mode_gap(&joint, &target, mode) >= MIN_MAX_GAP {
            return Instance {
                joint,
                target,
                config,
                penalty,
            };
        }
    }
}

fn combos() -> Vec<(LossKind, SkipTokenMode)> {
    LossKind::ALL
        .iter()
        .flat_map(|&k| SkipTokenMode::ALL.iter().map(move |&m| (k, m)))
        .collect()
}

/// `-log` of the summed weight of every enumerated path of the composed lattice.
pub fn brute_force_loss(inst: &Instance) -> Result<f64> {
    let lattice = build_composed(&inst.target, inst.joint.frames(), inst.config.kind)?;
    let populated = populate_weights(&lattice, &inst.joint, &inst.target, &inst.config, inst.penalty)?;
    let paths = enumerate_paths(&populated, 1_000_000)?;
    if paths.is_empty() {
        return Err(Error::NoPath);
    }
    Ok(-logsumexp(paths.iter().map(|p| p.weight)))
}

fn oracle_suite(config: &CheckConfig) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("oracle", ORACLE_TOLERANCE);
    let combos = combos();
    for i in 0..config.trials {
        let (kind, mode) = combos[i % combos.len()];
        let mut rng = stream(config.seed, "check-oracle", &i.to_string());
        let inst = random_instance(&mut rng, kind, mode, config);
        let dp = loss_and_grad(&inst.joint, &inst.target, &inst.config, inst.penalty)?.loss;
        let bf = brute_force_loss(&inst)?;
        report.instances += 1;
        report.record((dp - bf).abs(), || format!("{} dp={dp} brute={bf}", inst.describe()));
    }
    Ok(report)
}

/// Central differences of the loss with respect to every joint entry.
pub fn numeric_joint_gradient(inst: &Instance, step: f64) -> Result<Array3<f64>> {
    let mut joint = inst.joint.clone();
    let mut out = Array3::zeros(joint.values().dim());
    let idx: Vec<_> = out.indexed_iter().map(|(i, _)| i).collect();
    for (t, u, v) in idx {
        let orig = joint.values()[[t, u, v]];
        joint.values_mut()[[t, u, v]] = orig + step;
        let plus = loss_and_grad(&joint, &inst.target, &inst.config, inst.penalty)?.loss;
        joint.values_mut()[[t, u, v]] = orig - step;
        let minus = loss_and_grad(&joint, &inst.target, &inst.config, inst.penalty)?.loss;
        joint.values_mut()[[t, u, v]] = orig;
        out[[t, u, v]] = (plus - minus) / (2.0 * step);
    }
    Ok(out)
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_FLOOR)
}

fn gradient_suite(config: &CheckConfig, hooks: &CheckHooks) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("gradient", GRADIENT_TOLERANCE);
    let combos = combos();
    for i in 0..(config.trials / 5).max(1) {
        let (kind, mode) = combos[i % combos.len()];
        let mut rng = stream(config.seed, "check-gradient", &i.to_string());
        let inst = random_instance(&mut rng, kind, mode, config);
        let mut analytic = loss_and_grad(&inst.joint, &inst.target, &inst.config, inst.penalty)?.grad;
        if hooks.flip_gradient_sign {
            analytic.mapv_inplace(|g| -g);
        }
        let numeric = numeric_joint_gradient(&inst, FD_STEP)?;
        for ((idx, &a), &n) in analytic.indexed_iter().zip(numeric.iter()) {
            report.record(relative_error(a, n), || {
                format!("{} entry {idx:?} analytic={a} numeric={n}", inst.describe())
            });
        }
        report.instances += 1;
    }
    Ok(report)
}

/// A loss with some skip weights forced to `-inf` and the loss it must equal.
#[derive(Clone, Copy, Debug)]
pub struct Degeneration {
    pub name: &'static str,
    pub full: LossKind,
    pub reduced: LossKind,
    /// Skip-frame weight forced on the full loss.
    pub skip_frame: Option<f64>,
    /// Skip-token penalty forced on the full loss.
    pub skip_token: Option<f64>,
}

const NEG_INF: Option<f64> = Some(f64::NEG_INFINITY);

pub const DEGENERATIONS: [Degeneration; 5] = [
    Degeneration {
        name: "star(sf=-inf) = rnnt",
        full: LossKind::Star,
        reduced: LossKind::Rnnt,
        skip_frame: NEG_INF,
        skip_token: None,
    },
    Degeneration {
        name: "bypass(st=-inf) = rnnt",
        full: LossKind::Bypass,
        reduced: LossKind::Rnnt,
        skip_frame: None,
        skip_token: NEG_INF,
    },
    Degeneration {
        name: "trt(-inf,-inf) = rnnt",
        full: LossKind::Trt,
        reduced: LossKind::Rnnt,
        skip_frame: NEG_INF,
        skip_token: NEG_INF,
    },
    Degeneration {
        name: "trt(sf=-inf) = bypass",
        full: LossKind::Trt,
        reduced: LossKind::Bypass,
        skip_frame: NEG_INF,
        skip_token: None,
    },
    Degeneration {
        name: "trt(st=-inf) = star",
        full: LossKind::Trt,
        reduced: LossKind::Star,
        skip_frame: None,
        skip_token: NEG_INF,
    },
];

fn degeneration_suite(config: &CheckConfig) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("degeneration", DEGENERATION_TOLERANCE);
    let per_identity = (config.trials / 10).max(1);
    for (j, identity) in DEGENERATIONS.iter().enumerate() {
        for i in 0..per_identity {
            let mut rng = stream(config.seed, "check-degeneration", &format!("{j}/{i}"));
            let mode = *SkipTokenMode::ALL.choose(&mut rng).expect("nonempty");
            let inst = random_instance(&mut rng, identity.full, mode, config);
            let dev = degeneration_deviation(&inst, identity)?;
            report.instances += 1;
            report.record(dev, || format!("{}: {}", identity.name, inst.describe()));
        }
    }
    Ok(report)
}

/// Largest difference in loss or gradient between the `-inf` weighted loss
/// and the loss it should reduce to.
pub fn degeneration_deviation(inst: &Instance, identity: &Degeneration) -> Result<f64> {
    let mut full_cfg = inst.config;
    full_cfg.kind = identity.full;
    if let Some(w) = identity.skip_frame {
        full_cfg.skip_frame_weight = w;
    }
    let full_penalty = identity.skip_token.unwrap_or(inst.penalty);
    let mut reduced_cfg = inst.config;
    reduced_cfg.kind = identity.reduced;
    let a = loss_and_grad(&inst.joint, &inst.target, &full_cfg, full_penalty)?;
    let b = loss_and_grad(&inst.joint, &inst.target, &reduced_cfg, inst.penalty)?;
    let grad_dev = a
        .grad
        .iter()
        .zip(b.grad.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    Ok((a.loss - b.loss).abs().max(grad_dev))
}

/// Central-difference check of toy-model parameter gradients through each
/// loss kind and skip-token mode on a tiny model; samples up to
/// `max_params` parameters per combination.
pub fn toy_gradient_suite(seed: u64, max_params: usize) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("toy-gradient", TOY_GRADIENT_TOLERANCE);
    let vocab: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
    let synth = Synthesizer::new(SynthesisSpec {
        frames_per_word: 2,
        feature_dim: 4,
        noise_std: 0.3,
        ..SynthesisSpec::new(vocab.clone(), seed)
    })?;
    let dims = ModelDims {
        feature_dim: 4,
        hidden_dim: 5,
        vocab_size: 3,
    };
    let utt = Utterance {
        id: "grad".into(),
        true_words: vec!["b".into(), "a".into(), "c".into()],
        target_words: vec!["b".into(), "c".into()],
    };
    for (c, (kind, mode)) in combos().into_iter().enumerate() {
        // larger weights keep pre-activations away from the rectifier kink
        let mut params = ToyModelParams::init(dims, seed.wrapping_add(c as u64));
        params.scale(5.0);
        params.enc_b.fill(0.05);
        let mut loss = LossConfig::new(kind);
        loss.skip_token_mode = mode;
        loss.skip_frame_weight = -0.7;
        let penalty = -1.5;
        let (_, grad) = utterance_loss_and_grad(&params, &utt, &synth, &loss, penalty)?;
        let flat = params.to_flat();
        let analytic = grad.to_flat();
        let mut rng = stream(seed, "check-toy", &c.to_string());
        let mut indices: Vec<usize> = (0..flat.len()).collect();
        indices.shuffle(&mut rng);
        indices.truncate(max_params);
        for i in indices {
            let eval = |x: f64| -> Result<f64> {
                let mut p = flat.clone();
                p[i] = x;
                let p = ToyModelParams::from_flat(dims, &p)?;
                Ok(utterance_loss_and_grad(&p, &utt, &synth, &loss, penalty)?.0)
            };
            let numeric = (eval(flat[i] + FD_STEP)? - eval(flat[i] - FD_STEP)?) / (2.0 * FD_STEP);
            report.record(relative_error(analytic[i], numeric), || {
                format!("{kind} mode={mode} parameter {i} analytic={} numeric={numeric}", analytic[i])
            });
        }
        report.instances += 1;
    }
    Ok(report)
}

/// Runs every suite.
pub fn run_checks(config: &CheckConfig, hooks: &CheckHooks) -> Result<CheckReport> {
    if config.max_t == 0 || config.max_v == 0 {
        return Err(Error::InvalidConfig("max-t and max-v must be at least 1".into()));
    }
    Ok(CheckReport {
        suites: vec![
            oracle_suite(config)?,
            gradient_suite(config, hooks)?,
            degeneration_suite(config)?,
            toy_gradient_suite(config.seed, 40)?,
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CheckConfig {
        CheckConfig {
            trials: 60,
            ..Default::default()
        }
    }

    #[test]
    fn suites_pass() {
        let report = run_checks(&small(), &CheckHooks::default()).unwrap();
        for s in &report.suites {
            assert!(s.passed(), "{s:?}");
            assert!(s.instances > 0);
        }
    }

    #[test]
    fn trivial_lattices() {
        let cfg = CheckConfig {
            trials: 20,
            max_t: 1,
            max_u: 0,
            ..Default::default()
        };
        assert!(run_checks(&cfg, &CheckHooks::default()).unwrap().passed());
    }

    #[test]
    fn flipped_gradient_is_caught() {
        let hooks = CheckHooks {
            flip_gradient_sign: true,
        };
        let report = run_checks(&small(), &hooks).unwrap();
        assert!(!report.passed());
        assert!(!report.suites[1].passed());
    }
}
