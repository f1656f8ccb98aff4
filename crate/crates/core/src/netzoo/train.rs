use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{Split, SyntheticDataset};
use super::net::ReferenceNet;
use super::NetError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { epochs: 30, lr: 0.01, momentum: 0.9, batch_size: 32, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub final_loss: f64,
    pub eval_accuracy: f64,
}

/// Mini-batch SGD with heavy-ball momentum on the training split.
pub fn train(net: &mut ReferenceNet, data: &SyntheticDataset, cfg: &TrainConfig) -> Result<TrainReport, NetError> {
    if cfg.epochs == 0 {
        return Err(NetError::InvalidConfig("epochs must be at least 1".into()));
    }
    if cfg.batch_size == 0 || cfg.lr.is_nan() || cfg.lr <= 0.0 {
        return Err(NetError::InvalidConfig(format!(
            "batch size {} and learning rate {} must be positive",
            cfg.batch_size, cfg.lr
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let train_batch = data.batch(Split::Train);
    let mut order: Vec<usize> = (0..train_batch.len()).collect();
    let mut vel_w: Vec<Vec<f64>> = net.layers.iter().map(|l| vec![0.0; l.weight.numel()]).collect();
    let mut vel_b: Vec<Vec<f64>> = net.layers.iter().map(|l| vec![0.0; l.bias.numel()]).collect();
    let mut final_loss = f64::NAN;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut seen = 0;
        for chunk in order.chunks(cfg.batch_size) {
            let mb = train_batch.select(chunk);
            let (loss, gw, gb) = net.loss_and_grads(&mb, None)?;
            if !loss.is_finite() {
                return Err(NetError::Diverged { epoch, loss });
            }
            total += loss * chunk.len() as f64;
            seen += chunk.len();
            for (i, layer) in net.layers.iter_mut().enumerate() {
                step(layer.weight.data_mut(), &mut vel_w[i], gw[i].data(), cfg);
                step(layer.bias.data_mut(), &mut vel_b[i], gb[i].data(), cfg);
            }
        }
        final_loss = total / seen as f64;
        if !final_loss.is_finite() {
            return Err(NetError::Diverged { epoch, loss: final_loss });
        }
        log::debug!("epoch {epoch}: loss {final_loss:.5}");
    }
    let eval_accuracy = net.accuracy(&data.batch(Split::Eval), None)?;
    Ok(TrainReport { final_loss, eval_accuracy })
}

fn step(param: &mut [f64], vel: &mut [f64], grad: &[f64], cfg: &TrainConfig) {
    for ((p, v), g) in param.iter_mut().zip(vel.iter_mut()).zip(grad) {
        *v = cfg.momentum * *v + g;
        *p -= cfg.lr * *v;
    }
}
