use serde::{Deserialize, Serialize};

use super::genome::ProxyGenome;
use crate::netzoo::LayerStats;
use crate::tensor::{BinaryOp, Tensor, UnaryOp};

/// Why a genome failed to produce a usable score.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Invalid {
    /// A binary op received operands of incompatible shapes.
    Incompatible,
    /// Some intermediate or final value was NaN or infinite.
    NonFinite,
    /// The graph did not reduce to a single value.
    NotScalar,
}

pub type Score = Result<f64, Invalid>;

fn unary(op: UnaryOp, t: Tensor) -> Result<Tensor, Invalid> {
    if op == UnaryOp::NoOp {
        return Ok(t);
    }
    let out = op.apply(&t);
    if out.all_finite() {
        Ok(out)
    } else {
        Err(Invalid::NonFinite)
    }
}

fn binary(op: BinaryOp, a: &Tensor, b: &Tensor) -> Result<Tensor, Invalid> {
    let out = op.apply(a, b).ok_or(Invalid::Incompatible)?;
    if out.all_finite() {
        Ok(out)
    } else {
        Err(Invalid::NonFinite)
    }
}

fn chain(ops: &[UnaryOp], t: &Tensor) -> Result<Tensor, Invalid> {
    ops.iter().try_fold(t.clone(), |acc, &op| unary(op, acc))
}

fn scalar(t: &Tensor) -> Score {
    if t.numel() != 1 {
        return Err(Invalid::NotScalar);
    }
    Ok(t.data()[0])
}

/// Runs the genome on one layer's statistics.
pub fn evaluate_layer(genome: &ProxyGenome, stats: &LayerStats) -> Score {
    match genome {
        ProxyGenome::Sequential { input, ops, aggregate } => {
            let t = chain(ops, stats.get(*input))?;
            scalar(&unary(*aggregate, t)?)
        }
        ProxyGenome::Branched { inputs, branch_a, branch_b, binary: op, aggregate } => {
            let a = chain(branch_a, stats.get(inputs[0]))?;
            let b = chain(branch_b, stats.get(inputs[1]))?;
            scalar(&unary(*aggregate, binary(*op, &a, &b)?)?)
        }
        ProxyGenome::Dag { inputs, nodes } => {
            let mut values: Vec<Tensor> = vec![stats.get(inputs[0]).clone(), stats.get(inputs[1]).clone()];
            let mut total = 0.0;
            let mut count = 0usize;
            for node in nodes {
                let mut acc = values[0].clone();
                for v in &values[1..] {
                    acc = binary(node.binary, &acc, v)?;
                }
                let out = unary(node.unary, acc)?;
                total += out.sum();
                count += out.numel();
                values.push(out);
            }
            let mean = total / count as f64;
            if mean.is_finite() {
                Ok(mean)
            } else {
                Err(Invalid::NonFinite)
            }
        }
    }
}

/// Per-layer scores; the first invalid layer invalidates the whole set.
pub fn layer_scores(genome: &ProxyGenome, stats: &[LayerStats]) -> Result<Vec<f64>, Invalid> {
    stats.iter().map(|s| evaluate_layer(genome, s)).collect()
}

/// `sum_i b_i * s_i`.
pub fn config_score(layer_scores: &[f64], weight_bits: &[u8]) -> f64 {
    layer_scores.iter().zip(weight_bits).map(|(s, &b)| b as f64 * s).sum()
}

pub fn score_config(genome: &ProxyGenome, stats: &[LayerStats], weight_bits: &[u8]) -> Score {
    let s = layer_scores(genome, stats)?;
    let v = config_score(&s, weight_bits);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Invalid::NonFinite)
    }
}
