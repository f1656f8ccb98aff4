use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{Batch, IMAGE_SIDE};
use super::NetError;
use crate::quant::QuantScheme;
use crate::tensor::{Tape, Tensor, TensorError, Var};

/// Registered desk-scale architectures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arch {
    /// Four linear layers on flattened inputs.
    #[serde(rename = "mlp-s")]
    MlpS,
    /// Four 3x3 convolutions and two linear layers.
    #[serde(rename = "cnn-s")]
    CnnS,
}

impl Arch {
    pub fn name(self) -> &'static str {
        match self {
            Arch::MlpS => "mlp-s",
            Arch::CnnS => "cnn-s",
        }
    }

    /// Quantizable layers in the network.
    pub fn num_layers(self) -> usize {
        match self {
            Arch::MlpS => 4,
            Arch::CnnS => 6,
        }
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Arch {
    type Err = NetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mlp-s" => Ok(Arch::MlpS),
            "cnn-s" => Ok(Arch::CnnS),
            other => Err(NetError::UnknownArch(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    Linear,
    Conv3x3,
}

/// What follows a layer's affine map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Post {
    Relu,
    ReluAvgPool2,
    ReluGlobalPool,
    /// Classifier head: raw logits.
    None,
}

/// One quantizable layer. Only `weight` is quantized; biases stay in full
/// precision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantLayer {
    pub kind: LayerKind,
    pub weight: Tensor,
    pub bias: Tensor,
    pub post: Post,
    /// Spatial positions the layer is applied at per sample.
    pub positions: usize,
}

impl QuantLayer {
    pub fn fan_in(&self) -> usize {
        let s = self.weight.shape();
        s[1..].iter().product()
    }

    pub fn numel(&self) -> usize {
        self.weight.numel()
    }

    /// Multiply-accumulates per input sample.
    pub fn macs(&self) -> usize {
        self.weight.numel() * self.positions
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceNet {
    pub arch: Arch,
    pub seed: u64,
    pub n_classes: usize,
    pub layers: Vec<QuantLayer>,
}

/// Tape handles for one forward pass.
pub struct ForwardPass {
    pub tape: Tape,
    pub weights: Vec<Var>,
    pub biases: Vec<Var>,
    /// Per-layer output after the nonlinearity, before pooling.
    pub activations: Vec<Var>,
    pub logits: Var,
}

fn uniform_tensor(shape: &[usize], bound: f64, rng: &mut ChaCha8Rng) -> Tensor {
    let n: usize = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.gen_range(-bound..bound)).collect()).expect("sized")
}

pub fn build_net(arch: Arch, n_classes: usize, seed: u64) -> Result<ReferenceNet, NetError> {
    if n_classes < 2 {
        return Err(NetError::InvalidConfig(format!("need at least 2 classes, got {n_classes}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6e65_745f_696e_6974);
    let side = IMAGE_SIDE;
    let plan: Vec<(LayerKind, Vec<usize>, Post, usize)> = match arch {
        Arch::MlpS => vec![
            (LayerKind::Linear, vec![16, side * side], Post::Relu, 1),
            (LayerKind::Linear, vec![16, 16], Post::Relu, 1),
            (LayerKind::Linear, vec![16, 16], Post::Relu, 1),
            (LayerKind::Linear, vec![n_classes, 16], Post::None, 1),
        ],
        Arch::CnnS => vec![
            (LayerKind::Conv3x3, vec![4, 1, 3, 3], Post::Relu, side * side),
            (LayerKind::Conv3x3, vec![8, 4, 3, 3], Post::ReluAvgPool2, side * side),
            (LayerKind::Conv3x3, vec![8, 8, 3, 3], Post::Relu, side * side / 4),
            (LayerKind::Conv3x3, vec![16, 8, 3, 3], Post::ReluGlobalPool, side * side / 4),
            (LayerKind::Linear, vec![16, 16], Post::Relu, 1),
            (LayerKind::Linear, vec![n_classes, 16], Post::None, 1),
        ],
    };
    let layers = plan
        .into_iter()
        .map(|(kind, shape, post, positions)| {
            let fan_in: usize = shape[1..].iter().product();
            let bound = (6.0 / fan_in as f64).sqrt();
            let weight = uniform_tensor(&shape, bound, &mut rng);
            let bias = Tensor::zeros(&[shape[0]]);
            QuantLayer { kind, weight, bias, post, positions }
        })
        .collect();
    Ok(ReferenceNet { arch, seed, n_classes, layers })
}

impl ReferenceNet {
    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn layer_numels(&self) -> Vec<usize> {
        self.layers.iter().map(QuantLayer::numel).collect()
    }

    /// Records a forward pass of `inputs` on a fresh tape. `act_quant`, when
    /// given, fake-quantizes each layer's input with a straight-through
    /// gradient; `weight_override` substitutes one layer's weight.
    pub fn forward(
        &self,
        inputs: &Tensor,
        act_quant: Option<&[QuantScheme]>,
        weight_override: Option<(usize, &Tensor)>,
    ) -> Result<ForwardPass, TensorError> {
        let mut tape = Tape::new();
        let mut weights = Vec::with_capacity(self.layers.len());
        let mut biases = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let w = match weight_override {
                Some((j, t)) if j == i => t.clone(),
                _ => layer.weight.clone(),
            };
            weights.push(tape.leaf(w));
            biases.push(tape.leaf(layer.bias.clone()));
        }
        let mut x = tape.leaf(inputs.clone());
        let mut activations = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            if layer.kind == LayerKind::Linear && tape.value(x).shape().len() != 2 {
                x = tape.flatten(x);
            }
            if let Some(schemes) = act_quant {
                let q = schemes[i].fake_quantize(tape.value(x));
                x = tape.straight_through(x, q)?;
            }
            let y = match layer.kind {
                LayerKind::Linear => tape.linear(x, weights[i], Some(biases[i]))?,
                LayerKind::Conv3x3 => tape.conv2d(x, weights[i], Some(biases[i]))?,
            };
            x = match layer.post {
                Post::None => y,
                _ => tape.relu(y),
            };
            activations.push(x);
            x = match layer.post {
                Post::ReluAvgPool2 => tape.avg_pool2(x)?,
                Post::ReluGlobalPool => tape.global_avg_pool(x)?,
                _ => x,
            };
        }
        Ok(ForwardPass { tape, weights, biases, activations, logits: x })
    }

    /// Inputs seen by every quantizable layer on `inputs`, in float.
    pub fn layer_inputs(&self, inputs: &Tensor) -> Result<Vec<Tensor>, TensorError> {
        let pass = self.forward(inputs, None, None)?;
        let mut out = Vec::with_capacity(self.layers.len());
        out.push(inputs.clone());
        for (i, layer) in self.layers.iter().enumerate().take(self.layers.len() - 1) {
            let a = pass.tape.value(pass.activations[i]);
            let next = match layer.post {
                Post::ReluAvgPool2 | Post::ReluGlobalPool => {
                    let mut t = Tape::new();
                    let v = t.leaf(a.clone());
                    let p = if layer.post == Post::ReluAvgPool2 { t.avg_pool2(v)? } else { t.global_avg_pool(v)? };
                    t.value(p).clone()
                }
                _ => a.clone(),
            };
            out.push(next);
        }
        Ok(out)
    }

    /// Top-1 predictions, evaluated in chunks.
    pub fn predict(&self, inputs: &Tensor, act_quant: Option<&[QuantScheme]>) -> Result<Vec<usize>, TensorError> {
        const CHUNK: usize = 256;
        let n = inputs.shape()[0];
        let per = inputs.numel() / n;
        let mut preds = Vec::with_capacity(n);
        let mut start = 0;
        while start < n {
            let end = (start + CHUNK).min(n);
            let mut shape = inputs.shape().to_vec();
            shape[0] = end - start;
            let chunk = Tensor::new(shape, inputs.data()[start * per..end * per].to_vec())?;
            let pass = self.forward(&chunk, act_quant, None)?;
            let logits = pass.tape.value(pass.logits);
            let k = logits.shape()[1];
            preds.extend(logits.data().chunks(k).map(argmax));
            start = end;
        }
        Ok(preds)
    }

    pub fn accuracy(&self, batch: &Batch, act_quant: Option<&[QuantScheme]>) -> Result<f64, TensorError> {
        let preds = self.predict(&batch.inputs, act_quant)?;
        Ok(accuracy_of(&preds, &batch.labels))
    }

    /// Mean cross-entropy and its gradient w.r.t. every weight and bias.
    pub fn loss_and_grads(
        &self,
        batch: &Batch,
        weight_override: Option<(usize, &Tensor)>,
    ) -> Result<(f64, Vec<Tensor>, Vec<Tensor>), TensorError> {
        let mut pass = self.forward(&batch.inputs, None, weight_override)?;
        let loss = pass.tape.cross_entropy(pass.logits, &batch.labels)?;
        let grads = pass.tape.backward(loss)?;
        let gw = pass.weights.iter().map(|&w| grads.get_or_zeros(w, pass.tape.value(w))).collect();
        let gb = pass.biases.iter().map(|&b| grads.get_or_zeros(b, pass.tape.value(b))).collect();
        Ok((pass.tape.value(loss).data()[0], gw, gb))
    }
}

/// Index of the largest value; the first wins ties.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

pub fn accuracy_of(preds: &[usize], labels: &[usize]) -> f64 {
    let hits = preds.iter().zip(labels).filter(|(p, l)| p == l).count();
    hits as f64 / labels.len() as f64
}
