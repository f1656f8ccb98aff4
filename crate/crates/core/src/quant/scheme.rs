use serde::{Deserialize, Serialize};

use crate::tensor::Tensor;

/// Scale floor for constant tensors.
pub const MIN_SCALE: f64 = 1e-8;
/// Number of scale candidates searched by [`calibrate`].
pub const GRID_POINTS: usize = 101;

/// Per-tensor asymmetric uniform quantizer. `bits == 32` is the identity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantScheme {
    pub bits: u8,
    pub scale: f64,
    pub zero_point: f64,
}

impl QuantScheme {
    pub const IDENTITY: QuantScheme = QuantScheme { bits: 32, scale: 1.0, zero_point: 0.0 };

    pub fn levels(&self) -> f64 {
        ((1u64 << self.bits.min(63)) - 1) as f64
    }

    pub fn is_identity(&self) -> bool {
        self.bits >= 32
    }

    /// Quantize then dequantize one value; ties round to even.
    pub fn qdq(&self, x: f64) -> f64 {
        if self.is_identity() {
            return x;
        }
        let q = ((x - self.zero_point) / self.scale).round_ties_even().clamp(0.0, self.levels());
        q * self.scale + self.zero_point
    }

    pub fn fake_quantize(&self, t: &Tensor) -> Tensor {
        if self.is_identity() {
            return t.clone();
        }
        t.map(|x| self.qdq(x))
    }

    /// Interval of values that are not clipped.
    pub fn clip_range(&self) -> (f64, f64) {
        (self.zero_point, self.zero_point + self.levels() * self.scale)
    }

    pub fn sq_error(&self, t: &Tensor) -> f64 {
        t.data().iter().map(|&x| (x - self.qdq(x)).powi(2)).sum()
    }
}

pub fn quantize_dequantize(t: &Tensor, scheme: &QuantScheme) -> Tensor {
    scheme.fake_quantize(t)
}

/// Min-max scheme: the clip range is exactly `[min, max]`.
pub fn min_max_scheme(t: &Tensor, bits: u8) -> QuantScheme {
    grid_scheme(t.min(), t.max(), bits, 1.0)
}

fn grid_scheme(lo: f64, hi: f64, bits: u8, factor: f64) -> QuantScheme {
    let range = hi - lo;
    if range <= 0.0 {
        return QuantScheme { bits, scale: MIN_SCALE, zero_point: lo };
    }
    let levels = ((1u64 << bits) - 1) as f64;
    QuantScheme { bits, scale: factor * range / levels, zero_point: lo + (1.0 - factor) * range / 2.0 }
}

/// MSE-optimal scheme over clip ranges `f * (max - min)`, `f` stepping by
/// 0.01 from 0.2 to 1.2 and centred on the data range. `f = 1` is min-max.
pub fn calibrate(t: &Tensor, bits: u8) -> QuantScheme {
    if bits >= 32 {
        return QuantScheme::IDENTITY;
    }
    let (lo, hi) = (t.min(), t.max());
    if hi <= lo {
        return grid_scheme(lo, hi, bits, 1.0);
    }
    let mut best = grid_scheme(lo, hi, bits, 1.0);
    let mut best_err = f64::INFINITY;
    for k in 0..GRID_POINTS {
        let cand = grid_scheme(lo, hi, bits, (20 + k) as f64 / 100.0);
        let err = cand.sq_error(t);
        if err < best_err {
            best = cand;
            best_err = err;
        }
    }
    best
}
