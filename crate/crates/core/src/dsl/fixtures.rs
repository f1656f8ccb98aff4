//! Random layer statistics for tests, oracles and benchmarks.

use rand::Rng;

use crate::netzoo::{LayerKind, LayerMeta, LayerStats};
use crate::tensor::Tensor;

fn uniform<R: Rng + ?Sized>(rng: &mut R, shape: &[usize], lo: f64, hi: f64) -> Tensor {
    let n: usize = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.gen_range(lo..hi)).collect()).expect("sized")
}

/// A linear-layer-shaped bundle: `W, G, H, V` are `[out, in]`, `A` is
/// `[batch, out]`. `V` is strictly positive, as synaptic-flow gradients are.
pub fn random_stats<R: Rng + ?Sized>(rng: &mut R, index: usize) -> LayerStats {
    let out = rng.gen_range(2..6);
    let fan_in = rng.gen_range(2..8);
    let batch = 8;
    let w = uniform(rng, &[out, fan_in], -1.0, 1.0);
    let g = uniform(rng, &[out, fan_in], -0.1, 0.1);
    let h = uniform(rng, &[out, fan_in], -0.5, 2.0);
    let v = uniform(rng, &[out, fan_in], 0.01, 3.0);
    let a = uniform(rng, &[batch, out], 0.0, 2.0);
    let activation_grad = uniform(rng, &[batch, out], -0.2, 0.2);
    let meta = LayerMeta { index, kind: LayerKind::Linear, fan_in, numel: out * fan_in, macs: out * fan_in };
    LayerStats { w, g, a, h, v, activation_grad, meta }
}

/// `n` independent layers.
pub fn random_stack<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<LayerStats> {
    (0..n).map(|i| random_stats(rng, i)).collect()
}
