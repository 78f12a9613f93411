use ndarray::{Array1, Array2, Array3, ArrayView2, Axis, Zip};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::decode::TransducerModel;
use crate::error::{Error, Result};
use crate::loss::JointLogProbs;
use crate::rng::stream;

/// Sizes of a toy transducer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    /// Input feature dimension `d`.
    pub feature_dim: usize,
    /// Hidden width `h`.
    pub hidden_dim: usize,
    /// Number of words `W`; blank is output `W`.
    pub vocab_size: usize,
}

/// Affine + ReLU encoder, stateless (previous-token) predictor and a joint
/// that projects `ReLU(e_t + p_u)` to `W + 1` logits.
///
/// The same struct holds parameter gradients and optimizer velocities.
#[derive(Clone, Debug, PartialEq)]
pub struct ToyModelParams {
    /// `h x d`
    pub enc_w: Array2<f64>,
    pub enc_b: Array1<f64>,
    /// `(W + 1) x h`; row `W` is the start-of-sequence embedding.
    pub embed: Array2<f64>,
    /// `(W + 1) x h`
    pub proj_w: Array2<f64>,
    pub proj_b: Array1<f64>,
}

impl ToyModelParams {
    pub fn zeros(dims: ModelDims) -> Self {
        let ModelDims {
            feature_dim: d,
            hidden_dim: h,
            vocab_size: w,
        } = dims;
        ToyModelParams {
            enc_w: Array2::zeros((h, d)),
            enc_b: Array1::zeros(h),
            embed: Array2::zeros((w + 1, h)),
            proj_w: Array2::zeros((w + 1, h)),
            proj_b: Array1::zeros(w + 1),
        }
    }

    /// Weights from a seeded normal with std 0.1, biases zero.
    pub fn init(dims: ModelDims, seed: u64) -> Self {
        let mut p = Self::zeros(dims);
        let normal = Normal::new(0.0, 0.1).expect("valid std");
        let mut rng = stream(seed, "init", "");
        for w in [&mut p.enc_w, &mut p.embed, &mut p.proj_w] {
            w.mapv_inplace(|_| normal.sample(&mut rng));
        }
        p
    }

    pub fn dims(&self) -> ModelDims {
        ModelDims {
            feature_dim: self.enc_w.ncols(),
            hidden_dim: self.enc_w.nrows(),
            vocab_size: self.proj_w.nrows() - 1,
        }
    }

    pub fn num_params(&self) -> usize {
        self.enc_w.len() + self.enc_b.len() + self.embed.len() + self.proj_w.len() + self.proj_b.len()
    }

    /// All values in a fixed order: encoder weight, encoder bias, embeddings,
    /// projection weight, projection bias (row-major).
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        out.extend(self.enc_w.iter());
        out.extend(self.enc_b.iter());
        out.extend(self.embed.iter());
        out.extend(self.proj_w.iter());
        out.extend(self.proj_b.iter());
        out
    }

    pub fn from_flat(dims: ModelDims, values: &[f64]) -> Result<Self> {
        let mut p = Self::zeros(dims);
        if values.len() != p.num_params() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a model with {} parameters",
                values.len(),
                p.num_params()
            )));
        }
        let mut it = values.iter().copied();
        for x in p
            .enc_w
            .iter_mut()
            .chain(p.enc_b.iter_mut())
            .chain(p.embed.iter_mut())
            .chain(p.proj_w.iter_mut())
            .chain(p.proj_b.iter_mut())
        {
            *x = it.next().expect("length checked");
        }
        Ok(p)
    }

    pub fn all_finite(&self) -> bool {
        self.to_flat().iter().all(|x| x.is_finite())
    }

    /// `self += alpha * other`
    pub fn scaled_add(&mut self, alpha: f64, other: &ToyModelParams) {
        self.enc_w.scaled_add(alpha, &other.enc_w);
        self.enc_b.scaled_add(alpha, &other.enc_b);
        self.embed.scaled_add(alpha, &other.embed);
        self.proj_w.scaled_add(alpha, &other.proj_w);
        self.proj_b.scaled_add(alpha, &other.proj_b);
    }

    pub fn scale(&mut self, alpha: f64) {
        for a in [&mut self.enc_w, &mut self.embed, &mut self.proj_w] {
            *a *= alpha;
        }
        self.enc_b *= alpha;
        self.proj_b *= alpha;
    }

    pub fn norm(&self) -> f64 {
        self.to_flat().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Encoder outputs `ReLU(x W^T + b)`, one row per frame.
    pub fn encode(&self, frames: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut e = frames.dot(&self.enc_w.t()) + &self.enc_b;
        e.mapv_inplace(relu);
        e
    }

    fn prev_tokens(&self, target: &[u32]) -> Vec<usize> {
        let start = self.dims().vocab_size;
        std::iter::once(start)
            .chain(target.iter().map(|&t| t as usize))
            .collect()
    }

    /// Log-probabilities `T x (U + 1) x (W + 1)` plus what the backward pass needs.
    pub fn forward(&self, frames: ArrayView2<'_, f64>, target: &[u32]) -> Result<ForwardCache> {
        let dims = self.dims();
        if frames.ncols() != dims.feature_dim {
            return Err(Error::ShapeMismatch(format!(
                "frames have {} features, model expects {}",
                frames.ncols(),
                dims.feature_dim
            )));
        }
        if let Some(&bad) = target.iter().find(|&&t| t as usize >= dims.vocab_size) {
            return Err(Error::ShapeMismatch(format!("target token {bad} outside vocabulary")));
        }
        let t_len = frames.nrows();
        let u1 = target.len() + 1;
        let h = dims.hidden_dim;
        let out = dims.vocab_size + 1;

        let enc_pre = frames.dot(&self.enc_w.t()) + &self.enc_b;
        let enc = enc_pre.mapv(relu);
        let prev = self.prev_tokens(target);

        let mut pre = Array2::zeros((t_len * u1, h));
        for t in 0..t_len {
            for (u, &p) in prev.iter().enumerate() {
                let mut row = pre.row_mut(t * u1 + u);
                row.assign(&enc.row(t));
                row += &self.embed.row(p);
            }
        }
        let hidden = pre.mapv(relu);
        let mut logp = hidden.dot(&self.proj_w.t()) + &self.proj_b;
        for mut row in logp.rows_mut() {
            let m = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            let lse = m + row.iter().map(|&x| (x - m).exp()).sum::<f64>().ln();
            row -= lse;
        }
        let joint = JointLogProbs::new(
            logp.into_shape_with_order((t_len, u1, out))
                .expect("contiguous"),
        )?;
        Ok(ForwardCache {
            frames: frames.to_owned(),
            enc_pre,
            prev,
            pre,
            hidden,
            joint,
        })
    }

    /// Parameter gradients given the derivative of a scalar with respect to
    /// every joint log-probability.
    pub fn backward(&self, cache: &ForwardCache, joint_grad: &Array3<f64>) -> Result<ToyModelParams> {
        let (t_len, u1, out) = cache.joint.values().dim();
        if joint_grad.dim() != (t_len, u1, out) {
            return Err(Error::ShapeMismatch(format!(
                "joint gradient {:?} does not match joint {:?}",
                joint_grad.dim(),
                (t_len, u1, out)
            )));
        }
        let rows = t_len * u1;
        let g = joint_grad
            .view()
            .into_shape_with_order((rows, out))
            .expect("contiguous");
        let logp = cache
            .joint
            .values()
            .view()
            .into_shape_with_order((rows, out))
            .expect("contiguous");

        // through log-softmax
        let mut dlogit = g.to_owned();
        for (mut d, lp) in dlogit.rows_mut().into_iter().zip(logp.rows()) {
            let s = d.sum();
            if s != 0.0 {
                Zip::from(&mut d).and(&lp).for_each(|d, &l| *d -= l.exp() * s);
            }
        }

        let mut grad = ToyModelParams::zeros(self.dims());
        grad.proj_w = dlogit.t().dot(&cache.hidden);
        grad.proj_b = dlogit.sum_axis(Axis(0));

        let mut dpre = dlogit.dot(&self.proj_w);
        Zip::from(&mut dpre)
            .and(&cache.pre)
            .for_each(|d, &p| *d = if p > 0.0 { *d } else { 0.0 });

        let h = self.dims().hidden_dim;
        let mut denc = Array2::<f64>::zeros((t_len, h));
        for t in 0..t_len {
            for u in 0..u1 {
                let row = dpre.row(t * u1 + u);
                let mut de = denc.row_mut(t);
                de += &row;
                let mut dp = grad.embed.row_mut(cache.prev[u]);
                dp += &row;
            }
        }
        Zip::from(&mut denc)
            .and(&cache.enc_pre)
            .for_each(|d, &p| *d = if p > 0.0 { *d } else { 0.0 });
        grad.enc_w = denc.t().dot(&cache.frames);
        grad.enc_b = denc.sum_axis(Axis(0));
        Ok(grad)
    }
}

fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Intermediate values of one forward pass.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    frames: Array2<f64>,
    enc_pre: Array2<f64>,
    prev: Vec<usize>,
    /// `(T * (U + 1)) x h`, before the joint rectifier.
    pre: Array2<f64>,
    hidden: Array2<f64>,
    joint: JointLogProbs,
}

impl ForwardCache {
    pub fn joint(&self) -> &JointLogProbs {
        &self.joint
    }
}

/// Joint log-probabilities for `frames` and `target`.
pub fn forward_joint(
    params: &ToyModelParams,
    frames: ArrayView2<'_, f64>,
    target: &[u32],
) -> Result<JointLogProbs> {
    Ok(params.forward(frames, target)?.joint)
}

/// Parameter gradients for `joint_grad`, recomputing the forward pass.
pub fn backward_params(
    params: &ToyModelParams,
    frames: ArrayView2<'_, f64>,
    target: &[u32],
    joint_grad: &Array3<f64>,
) -> Result<ToyModelParams> {
    let cache = params.forward(frames, target)?;
    params.backward(&cache, joint_grad)
}

impl TransducerModel for ToyModelParams {
    type Encoded = Array1<f64>;
    type State = usize;

    fn vocab_size(&self) -> usize {
        self.dims().vocab_size
    }

    fn start_state(&self) -> usize {
        self.dims().vocab_size
    }

    fn advance(&self, _state: &usize, token: u32) -> usize {
        token as usize
    }

    fn joint_scores(&self, frame: &Array1<f64>, state: &usize) -> Vec<f64> {
        let z = (frame + &self.embed.row(*state)).mapv(relu);
        (self.proj_w.dot(&z) + &self.proj_b).to_vec()
    }
}
