use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{Batch, IMAGE_SIDE};
use super::net::{LayerKind, ReferenceNet};
use super::NetError;
use crate::tensor::{default_hvp_step, hutchinson_diagonal, hvp, Tensor, TensorError};

pub const DEFAULT_HUTCHINSON_PROBES: usize = 8;

/// The statistic inputs a proxy can read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StatKind {
    /// Weights.
    W,
    /// Task-loss gradient w.r.t. the weights.
    G,
    /// Layer activations on the calibration batch.
    A,
    /// Hessian diagonal estimate.
    H,
    /// Synaptic-flow gradient.
    V,
}

impl StatKind {
    pub const ALL: [StatKind; 5] = [StatKind::W, StatKind::G, StatKind::A, StatKind::H, StatKind::V];

    pub fn name(self) -> &'static str {
        match self {
            StatKind::W => "W",
            StatKind::G => "G",
            StatKind::A => "A",
            StatKind::H => "H",
            StatKind::V => "V",
        }
    }
}

impl fmt::Display for StatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerMeta {
    pub index: usize,
    pub kind: LayerKind,
    pub fan_in: usize,
    pub numel: usize,
    pub macs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerStats {
    pub w: Tensor,
    pub g: Tensor,
    pub a: Tensor,
    pub h: Tensor,
    pub v: Tensor,
    /// Task-loss gradient w.r.t. `a`, kept for Fisher-style proxies.
    pub activation_grad: Tensor,
    pub meta: LayerMeta,
}

impl LayerStats {
    pub fn get(&self, kind: StatKind) -> &Tensor {
        match kind {
            StatKind::W => &self.w,
            StatKind::G => &self.g,
            StatKind::A => &self.a,
            StatKind::H => &self.h,
            StatKind::V => &self.v,
        }
    }
}

/// Hessian-vector products of a loss restricted to one layer's weights.
pub trait LayerHessian {
    fn num_layers(&self) -> usize;
    fn layer_param(&self, layer: usize) -> &Tensor;
    fn layer_hvp(&self, layer: usize, v: &Tensor) -> Result<Tensor, TensorError>;
}

/// Cross-entropy on a fixed batch, differentiated by finite differences of
/// the backward pass.
pub struct NetHessian<'a> {
    pub net: &'a ReferenceNet,
    pub batch: &'a Batch,
}

impl LayerHessian for NetHessian<'_> {
    fn num_layers(&self) -> usize {
        self.net.num_layers()
    }

    fn layer_param(&self, layer: usize) -> &Tensor {
        &self.net.layers[layer].weight
    }

    fn layer_hvp(&self, layer: usize, v: &Tensor) -> Result<Tensor, TensorError> {
        let theta = self.layer_param(layer);
        let grad = |th: &Tensor| {
            let (_, mut gw, _) = self.net.loss_and_grads(self.batch, Some((layer, th)))?;
            Ok(gw.swap_remove(layer))
        };
        hvp(grad, theta, v, default_hvp_step(theta))
    }
}

/// Gradient of the synaptic-flow objective `sum(f_{|theta|}(1))` w.r.t. the
/// absolute weights.
fn synflow_grads(net: &ReferenceNet) -> Result<Vec<Tensor>, TensorError> {
    let mut abs = net.clone();
    for layer in &mut abs.layers {
        layer.weight = layer.weight.map(f64::abs);
        layer.bias = layer.bias.map(f64::abs);
    }
    let ones = Tensor::full(&[1, 1, IMAGE_SIDE, IMAGE_SIDE], 1.0);
    let mut pass = abs.forward(&ones, None, None)?;
    let r = pass.tape.sum(pass.logits);
    let grads = pass.tape.backward(r)?;
    Ok(pass.weights.iter().map(|&w| grads.get_or_zeros(w, pass.tape.value(w))).collect())
}

/// Per-layer statistics on `calib`. Hutchinson probes for layer `i` are
/// drawn from a stream seeded by `(seed, i)`, so results do not depend on
/// extraction order.
pub fn extract_stats(net: &ReferenceNet, calib: &Batch, seed: u64, probes: usize) -> Result<Vec<LayerStats>, NetError> {
    if probes == 0 {
        return Err(NetError::InvalidConfig("at least one Hutchinson probe is required".into()));
    }
    let mut pass = net.forward(&calib.inputs, None, None)?;
    let loss = pass.tape.cross_entropy(pass.logits, &calib.labels)?;
    let grads = pass.tape.backward(loss)?;
    let virtual_grads = synflow_grads(net)?;
    let oracle = NetHessian { net, batch: calib };

    let mut out = Vec::with_capacity(net.num_layers());
    for (i, layer) in net.layers.iter().enumerate() {
        let w = layer.weight.clone();
        let g = grads.get_or_zeros(pass.weights[i], &w);
        let a = pass.tape.value(pass.activations[i]).clone();
        let activation_grad = grads.get_or_zeros(pass.activations[i], &a);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((i as u64 + 1) << 32));
        let h = hutchinson_diagonal(|v| oracle.layer_hvp(i, v), w.shape(), probes, &mut rng)?;
        let v = virtual_grads[i].clone();
        let meta =
            LayerMeta { index: i, kind: layer.kind, fan_in: layer.fan_in(), numel: layer.numel(), macs: layer.macs() };
        let stats = LayerStats { w, g, a, h, v, activation_grad, meta };
        for kind in StatKind::ALL {
            if !stats.get(kind).all_finite() {
                return Err(NetError::NonFiniteStat { layer: i, kind });
            }
        }
        out.push(stats);
    }
    Ok(out)
}
