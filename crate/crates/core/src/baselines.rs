//! Handcrafted proxies scored natively, including those the genome language
//! cannot express.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netzoo::{LayerHessian, LayerStats};
use crate::quant::calibrate;
use crate::tensor::{power_iteration, Tensor, TensorError, EPSILON};

pub const POWER_ITERATIONS: usize = 20;
pub const POWER_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error("unknown baseline `{0}`")]
    Unknown(String),
    #[error("baseline `{0}` needs a Hessian oracle")]
    MissingHessian(BaselineId),
    #[error("baseline `{id}` needs at least {needed} layers")]
    TooFewLayers { id: BaselineId, needed: usize },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineId {
    Bparams,
    Hawq,
    HawqV2,
    Ompq,
    Qe,
    Snip,
    Synflow,
    Plain,
    Fisher,
    Emq,
}

impl BaselineId {
    pub const ALL: [BaselineId; 10] = [
        BaselineId::Bparams,
        BaselineId::Hawq,
        BaselineId::HawqV2,
        BaselineId::Ompq,
        BaselineId::Qe,
        BaselineId::Snip,
        BaselineId::Synflow,
        BaselineId::Plain,
        BaselineId::Fisher,
        BaselineId::Emq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineId::Bparams => "bparams",
            BaselineId::Hawq => "hawq",
            BaselineId::HawqV2 => "hawq_v2",
            BaselineId::Ompq => "ompq",
            BaselineId::Qe => "qe",
            BaselineId::Snip => "snip",
            BaselineId::Synflow => "synflow",
            BaselineId::Plain => "plain",
            BaselineId::Fisher => "fisher",
            BaselineId::Emq => "emq",
        }
    }

    pub fn needs_hessian(self) -> bool {
        self == BaselineId::Hawq
    }
}

impl fmt::Display for BaselineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineId {
    type Err = BaselineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BaselineId::ALL.into_iter().find(|b| b.name() == s).ok_or_else(|| BaselineError::Unknown(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaselineScores {
    pub layer_scores: Vec<f64>,
    /// Layers where power iteration ran out of iterations.
    pub unconverged: Vec<usize>,
}

fn mean_of(it: impl Iterator<Item = f64>, n: usize) -> f64 {
    it.sum::<f64>() / n as f64
}

pub fn snip(s: &LayerStats) -> f64 {
    mean_of(s.g.data().iter().zip(s.w.data()).map(|(g, w)| (g * w).abs()), s.w.numel())
}

pub fn plain(s: &LayerStats) -> f64 {
    mean_of(s.g.data().iter().zip(s.w.data()).map(|(g, w)| g * w), s.w.numel())
}

pub fn synflow(s: &LayerStats) -> f64 {
    mean_of(s.v.data().iter().zip(s.w.data()).map(|(v, w)| v * w.abs()), s.w.numel())
}

/// Per-sample `sum_e (dL/dz_e * z_e)^2`, averaged over the batch.
pub fn fisher(s: &LayerStats) -> f64 {
    let n = s.a.shape().first().copied().unwrap_or(1).max(1);
    let per = s.a.numel() / n;
    let total: f64 =
        s.a.data()
            .chunks(per)
            .zip(s.activation_grad.data().chunks(per))
            .map(|(z, g)| z.iter().zip(g).map(|(z, g)| (z * g).powi(2)).sum::<f64>())
            .sum();
    total / n as f64
}

/// Mean Hessian-diagonal estimate, i.e. trace over parameter count.
pub fn hawq_v2(s: &LayerStats) -> f64 {
    s.h.mean()
}

/// `mean(log|V|) * sqrt(sum|W| / (numel + eps))`.
pub fn emq(s: &LayerStats) -> f64 {
    let log_v = mean_of(s.v.data().iter().map(|v| v.abs().ln()), s.v.numel());
    let l1 = s.w.data().iter().map(|w| w.abs()).sum::<f64>() / (s.w.numel() as f64 + EPSILON);
    log_v * l1.sqrt()
}

/// `log(C_l * sigma^2) + log(sigma_act^2)` with `sigma^2 = scale^2 / 12` of
/// the layer's 8-bit weight quantizer and `C_l` its fan-in.
pub fn qe(s: &LayerStats) -> f64 {
    let scheme = calibrate(&s.w, 8);
    let noise = scheme.scale * scheme.scale / 12.0;
    (s.meta.fan_in as f64 * noise).ln() + s.a.variance().ln()
}

fn gram(a: &Tensor) -> Vec<f64> {
    let n = a.shape().first().copied().unwrap_or(1).max(1);
    let per = a.numel() / n;
    let rows: Vec<&[f64]> = a.data().chunks(per).collect();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v: f64 = rows[i].iter().zip(rows[j]).map(|(x, y)| x * y).sum();
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

/// Normalized Frobenius inner product of the activation Gram matrices.
pub fn orthogonality(a: &Tensor, b: &Tensor) -> f64 {
    let (ka, kb) = (gram(a), gram(b));
    if ka.len() != kb.len() {
        return f64::NAN;
    }
    let dot: f64 = ka.iter().zip(&kb).map(|(x, y)| x * y).sum();
    let na = ka.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = kb.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn ompq(stats: &[LayerStats]) -> Result<Vec<f64>, BaselineError> {
    if stats.len() < 2 {
        return Err(BaselineError::TooFewLayers { id: BaselineId::Ompq, needed: 2 });
    }
    let last = stats.len() - 1;
    Ok((0..stats.len())
        .map(|i| {
            let j = if i < last { i + 1 } else { i - 1 };
            1.0 - orthogonality(&stats[i].a, &stats[j].a)
        })
        .collect())
}

/// Layer scores for a baseline. `hessian` is consulted only by `hawq`,
/// whose power iterations are seeded from `seed` and the layer index.
pub fn baseline_layer_scores(
    id: BaselineId,
    stats: &[LayerStats],
    hessian: Option<&dyn LayerHessian>,
    seed: u64,
) -> Result<BaselineScores, BaselineError> {
    let simple = |f: fn(&LayerStats) -> f64| stats.iter().map(f).collect::<Vec<f64>>();
    let mut unconverged = Vec::new();
    let layer_scores = match id {
        BaselineId::Bparams => stats.iter().map(|s| s.w.numel() as f64).collect(),
        BaselineId::HawqV2 => simple(hawq_v2),
        BaselineId::Qe => simple(qe),
        BaselineId::Snip => simple(snip),
        BaselineId::Synflow => simple(synflow),
        BaselineId::Plain => simple(plain),
        BaselineId::Fisher => simple(fisher),
        BaselineId::Emq => simple(emq),
        BaselineId::Ompq => ompq(stats)?,
        BaselineId::Hawq => {
            let oracle = hessian.ok_or(BaselineError::MissingHessian(id))?;
            let mut out = Vec::with_capacity(stats.len());
            for i in 0..stats.len() {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((i as u64 + 1) << 40));
                let shape = oracle.layer_param(i).shape().to_vec();
                let r =
                    power_iteration(|v| oracle.layer_hvp(i, v), &shape, POWER_ITERATIONS, POWER_TOLERANCE, &mut rng)?;
                if !r.converged {
                    unconverged.push(i);
                }
                out.push(r.eigenvalue);
            }
            out
        }
    };
    Ok(BaselineScores { layer_scores, unconverged })
}
