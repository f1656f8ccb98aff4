use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::NetError;
use crate::tensor::Tensor;

/// Side length of the square single-channel inputs.
pub const IMAGE_SIDE: usize = 8;
pub const DEFAULT_CALIB_SIZE: usize = 64;

const RING_RADIUS: f64 = 2.0;
const CLUSTER_STD: f64 = 0.3;
const PIXEL_NOISE: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Calib,
    Eval,
}

/// A labelled batch of `[N, 1, 8, 8]` images.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub inputs: Tensor,
    pub labels: Vec<usize>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Rows `idx` of this batch, in the given order.
    pub fn select(&self, idx: &[usize]) -> Batch {
        let per = self.inputs.numel() / self.labels.len();
        let mut data = Vec::with_capacity(idx.len() * per);
        for &i in idx {
            data.extend_from_slice(&self.inputs.data()[i * per..(i + 1) * per]);
        }
        let mut shape = self.inputs.shape().to_vec();
        shape[0] = idx.len();
        Batch {
            inputs: Tensor::new(shape, data).expect("row slicing preserves shape"),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Class-balanced synthetic images. Each class owns two opposite clusters
/// on a ring in a 2-d latent plane, so no class is linearly separable from
/// the rest; latents are rendered onto two fixed smooth basis images plus
/// pixel noise.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticDataset {
    pub seed: u64,
    pub n_classes: usize,
    samples: Batch,
    train: Vec<usize>,
    calib: Vec<usize>,
    eval: Vec<usize>,
}

impl SyntheticDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn all(&self) -> &Batch {
        &self.samples
    }

    pub fn indices(&self, split: Split) -> &[usize] {
        match split {
            Split::Train => &self.train,
            Split::Calib => &self.calib,
            Split::Eval => &self.eval,
        }
    }

    pub fn batch(&self, split: Split) -> Batch {
        self.samples.select(self.indices(split))
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &l in &self.samples.labels {
            counts[l] += 1;
        }
        counts
    }
}

fn basis() -> [Vec<f64>; 2] {
    let s = IMAGE_SIDE as f64;
    let mut b1 = Vec::with_capacity(IMAGE_SIDE * IMAGE_SIDE);
    let mut b2 = Vec::with_capacity(IMAGE_SIDE * IMAGE_SIDE);
    for i in 0..IMAGE_SIDE {
        for j in 0..IMAGE_SIDE {
            let (y, x) = ((i as f64 + 0.5) / s, (j as f64 + 0.5) / s);
            b1.push((PI * x).cos() * (0.5 + 0.5 * (PI * y).sin()));
            b2.push((PI * y).cos() * (0.5 + 0.5 * (PI * x).sin()));
        }
    }
    [b1, b2]
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

pub fn make_dataset(seed: u64, n_classes: usize, n_per_class: usize) -> Result<SyntheticDataset, NetError> {
    make_dataset_with_calib(seed, n_classes, n_per_class, DEFAULT_CALIB_SIZE)
}

/// Half of every class goes to the training split and half to evaluation;
/// the calibration split is a class-balanced subset of training samples.
pub fn make_dataset_with_calib(
    seed: u64,
    n_classes: usize,
    n_per_class: usize,
    calib_size: usize,
) -> Result<SyntheticDataset, NetError> {
    if n_classes < 2 {
        return Err(NetError::InvalidConfig(format!("need at least 2 classes, got {n_classes}")));
    }
    if n_per_class < 2 {
        return Err(NetError::InvalidConfig(format!("need at least 2 samples per class, got {n_per_class}")));
    }
    let train_per_class = n_per_class / 2;
    if calib_size == 0 || calib_size > train_per_class * n_classes {
        return Err(NetError::InvalidConfig(format!("calibration size {calib_size} out of range")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [b1, b2] = basis();
    let pixels = IMAGE_SIDE * IMAGE_SIDE;
    let n = n_classes * n_per_class;

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    let mut data = vec![0.0; n * pixels];
    let mut labels = vec![0; n];
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for class in 0..n_classes {
        for k in 0..n_per_class {
            let slot = order[class * n_per_class + k];
            let cluster = class + (k % 2) * n_classes;
            let angle = 2.0 * PI * cluster as f64 / (2 * n_classes) as f64;
            let z1 = RING_RADIUS * angle.cos() + CLUSTER_STD * gaussian(&mut rng);
            let z2 = RING_RADIUS * angle.sin() + CLUSTER_STD * gaussian(&mut rng);
            let img = &mut data[slot * pixels..(slot + 1) * pixels];
            for p in 0..pixels {
                img[p] = z1 * b1[p] + z2 * b2[p] + PIXEL_NOISE * gaussian(&mut rng);
            }
            labels[slot] = class;
            by_class[class].push(slot);
        }
    }

    let mut train = Vec::new();
    let mut eval = Vec::new();
    let mut calib = Vec::new();
    for (class, members) in by_class.iter_mut().enumerate() {
        members.sort_unstable();
        let (tr, ev) = members.split_at(train_per_class);
        train.extend_from_slice(tr);
        eval.extend_from_slice(ev);
        let quota = calib_size / n_classes + usize::from(class < calib_size % n_classes);
        calib.extend_from_slice(&tr[..quota]);
    }
    train.sort_unstable();
    eval.sort_unstable();
    calib.sort_unstable();

    let inputs = Tensor::new(vec![n, 1, IMAGE_SIDE, IMAGE_SIDE], data).expect("sized above");
    Ok(SyntheticDataset { seed, n_classes, samples: Batch { inputs, labels }, train, calib, eval })
}
