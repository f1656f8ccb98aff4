//! Post-training quantization simulation, size/BOPs accounting, and
//! proxy-driven bit allocation.

mod assign;
mod scheme;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netzoo::{Batch, ReferenceNet};
use crate::tensor::TensorError;

pub use assign::{assign_bits, AssignOptions, Assignment, ConfigScorer, LinearScorer, EXHAUSTIVE_LIMIT};
pub use scheme::{calibrate, min_max_scheme, quantize_dequantize, QuantScheme, GRID_POINTS, MIN_SCALE};

pub const DEFAULT_ACTIVATION_BITS: u8 = 8;
pub const DEFAULT_PALETTE: [u8; 3] = [2, 3, 4];

#[derive(Debug, Error, PartialEq)]
pub enum QuantError {
    #[error("bit config has {got} layers, network has {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("unsupported bit-width {0} (expected 2..=8 or 32)")]
    UnsupportedBits(u8),
    #[error("no configuration fits the {budget_mb} MB budget (smallest is {min_mb} MB)")]
    Infeasible { budget_mb: f64, min_mb: f64 },
    #[error("invalid palette: {0}")]
    InvalidPalette(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

pub fn check_bits(bits: u8) -> Result<(), QuantError> {
    if (2..=8).contains(&bits) || bits == 32 {
        Ok(())
    } else {
        Err(QuantError::UnsupportedBits(bits))
    }
}

/// Weight bit-width per quantizable layer plus the shared activation width.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitConfig {
    pub weight_bits: Vec<u8>,
    pub activation_bits: u8,
}

impl BitConfig {
    pub fn new(weight_bits: Vec<u8>, activation_bits: u8) -> Self {
        BitConfig { weight_bits, activation_bits }
    }

    pub fn uniform(layers: usize, bits: u8, activation_bits: u8) -> Self {
        BitConfig { weight_bits: vec![bits; layers], activation_bits }
    }

    pub fn len(&self) -> usize {
        self.weight_bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weight_bits.is_empty()
    }

    pub fn validate(&self, layers: usize) -> Result<(), QuantError> {
        if self.weight_bits.len() != layers {
            return Err(QuantError::LengthMismatch { expected: layers, got: self.weight_bits.len() });
        }
        self.weight_bits.iter().try_for_each(|&b| check_bits(b))?;
        check_bits(self.activation_bits)
    }
}

/// `sum_i numel_i * b_i / 8 / 1e6`.
pub fn size_mb(numels: &[usize], weight_bits: &[u8]) -> f64 {
    numels.iter().zip(weight_bits).map(|(&n, &b)| n as f64 * b as f64).sum::<f64>() / 8.0 / 1e6
}

pub fn model_size_mb(net: &ReferenceNet, cfg: &BitConfig) -> Result<f64, QuantError> {
    cfg.validate(net.num_layers())?;
    Ok(size_mb(&net.layer_numels(), &cfg.weight_bits))
}

/// Giga bit-operations per input sample: `sum_i MACs_i * b_w,i * b_a / 1e9`.
pub fn compute_bops(net: &ReferenceNet, cfg: &BitConfig) -> Result<f64, QuantError> {
    cfg.validate(net.num_layers())?;
    let total: f64 = net
        .layers
        .iter()
        .zip(&cfg.weight_bits)
        .map(|(l, &b)| l.macs() as f64 * b as f64 * cfg.activation_bits as f64)
        .sum();
    Ok(total / 1e9)
}

/// Fake-quantized network: quantized weights plus one input quantizer per
/// layer.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantizedNet {
    pub net: ReferenceNet,
    pub act_schemes: Vec<QuantScheme>,
    pub weight_schemes: Vec<QuantScheme>,
}

impl QuantizedNet {
    pub fn accuracy(&self, batch: &Batch) -> Result<f64, QuantError> {
        Ok(self.net.accuracy(batch, Some(&self.act_schemes))?)
    }
}

/// Input quantizers for every layer, calibrated on the float network's
/// layer inputs over `calib`.
pub fn calibrate_activations(net: &ReferenceNet, calib: &Batch, bits: u8) -> Result<Vec<QuantScheme>, QuantError> {
    check_bits(bits)?;
    if bits >= 32 {
        return Ok(vec![QuantScheme::IDENTITY; net.num_layers()]);
    }
    Ok(net.layer_inputs(&calib.inputs)?.iter().map(|x| calibrate(x, bits)).collect())
}

/// Applies `cfg` with activation quantizers calibrated on `calib`.
pub fn apply_bit_config(net: &ReferenceNet, cfg: &BitConfig, calib: &Batch) -> Result<QuantizedNet, QuantError> {
    cfg.validate(net.num_layers())?;
    let act = calibrate_activations(net, calib, cfg.activation_bits)?;
    apply_with_activations(net, cfg, act)
}

/// Like [`apply_bit_config`] with precomputed activation quantizers.
pub fn apply_with_activations(
    net: &ReferenceNet,
    cfg: &BitConfig,
    act_schemes: Vec<QuantScheme>,
) -> Result<QuantizedNet, QuantError> {
    cfg.validate(net.num_layers())?;
    if act_schemes.len() != net.num_layers() {
        return Err(QuantError::LengthMismatch { expected: net.num_layers(), got: act_schemes.len() });
    }
    let mut q = net.clone();
    let mut weight_schemes = Vec::with_capacity(net.num_layers());
    for (layer, &bits) in q.layers.iter_mut().zip(&cfg.weight_bits) {
        let s = calibrate(&layer.weight, bits);
        layer.weight = s.fake_quantize(&layer.weight);
        weight_schemes.push(s);
    }
    Ok(QuantizedNet { net: q, act_schemes, weight_schemes })
}

pub fn evaluate_accuracy(qnet: &QuantizedNet, eval: &Batch) -> Result<f64, QuantError> {
    if eval.is_empty() {
        return Err(QuantError::Tensor(TensorError::InvalidArgument("evaluation split is empty".into())));
    }
    qnet.accuracy(eval)
}
