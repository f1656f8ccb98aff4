use serde::{Deserialize, Serialize};

use super::Tensor;

/// Denominator guard shared by every normalising primitive.
pub const EPSILON: f64 = 1e-9;

/// The unary primitives of the proxy language. Discriminants are the stable
/// op ids (`UOP00`..`UOP23`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnaryOp {
    NoOp = 0,
    #[serde(rename = "element_wise_abs")]
    Abs,
    #[serde(rename = "element_wise_tanh")]
    Tanh,
    #[serde(rename = "element_wise_pow")]
    Pow,
    #[serde(rename = "element_wise_exp")]
    Exp,
    #[serde(rename = "element_wise_log")]
    Log,
    #[serde(rename = "element_wise_relu")]
    Relu,
    #[serde(rename = "element_wise_leaky_relu")]
    LeakyRelu,
    #[serde(rename = "element_wise_swish")]
    Swish,
    #[serde(rename = "element_wise_mish")]
    Mish,
    #[serde(rename = "element_wise_invert")]
    Invert,
    #[serde(rename = "element_wise_normalized_sum")]
    NormalizedSum,
    Normalize,
    Sigmoid,
    Logsoftmax,
    Softmax,
    #[serde(rename = "element_wise_sqrt")]
    Sqrt,
    #[serde(rename = "element_wise_revert")]
    Revert,
    FrobeniusNorm,
    #[serde(rename = "element_wise_abslog")]
    Abslog,
    L1Norm,
    MinMaxNormalize,
    ToMeanScalar,
    ToStdScalar,
}

impl UnaryOp {
    pub const ALL: [UnaryOp; 24] = [
        UnaryOp::NoOp,
        UnaryOp::Abs,
        UnaryOp::Tanh,
        UnaryOp::Pow,
        UnaryOp::Exp,
        UnaryOp::Log,
        UnaryOp::Relu,
        UnaryOp::LeakyRelu,
        UnaryOp::Swish,
        UnaryOp::Mish,
        UnaryOp::Invert,
        UnaryOp::NormalizedSum,
        UnaryOp::Normalize,
        UnaryOp::Sigmoid,
        UnaryOp::Logsoftmax,
        UnaryOp::Softmax,
        UnaryOp::Sqrt,
        UnaryOp::Revert,
        UnaryOp::FrobeniusNorm,
        UnaryOp::Abslog,
        UnaryOp::L1Norm,
        UnaryOp::MinMaxNormalize,
        UnaryOp::ToMeanScalar,
        UnaryOp::ToStdScalar,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::NoOp => "no_op",
            UnaryOp::Abs => "element_wise_abs",
            UnaryOp::Tanh => "element_wise_tanh",
            UnaryOp::Pow => "element_wise_pow",
            UnaryOp::Exp => "element_wise_exp",
            UnaryOp::Log => "element_wise_log",
            UnaryOp::Relu => "element_wise_relu",
            UnaryOp::LeakyRelu => "element_wise_leaky_relu",
            UnaryOp::Swish => "element_wise_swish",
            UnaryOp::Mish => "element_wise_mish",
            UnaryOp::Invert => "element_wise_invert",
            UnaryOp::NormalizedSum => "element_wise_normalized_sum",
            UnaryOp::Normalize => "normalize",
            UnaryOp::Sigmoid => "sigmoid",
            UnaryOp::Logsoftmax => "logsoftmax",
            UnaryOp::Softmax => "softmax",
            UnaryOp::Sqrt => "element_wise_sqrt",
            UnaryOp::Revert => "element_wise_revert",
            UnaryOp::FrobeniusNorm => "frobenius_norm",
            UnaryOp::Abslog => "element_wise_abslog",
            UnaryOp::L1Norm => "l1_norm",
            UnaryOp::MinMaxNormalize => "min_max_normalize",
            UnaryOp::ToMeanScalar => "to_mean_scalar",
            UnaryOp::ToStdScalar => "to_std_scalar",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|op| op.name() == name)
    }

    /// Ops that always reduce their input to a scalar.
    pub fn is_aggregating(self) -> bool {
        matches!(
            self,
            UnaryOp::ToMeanScalar
                | UnaryOp::ToStdScalar
                | UnaryOp::FrobeniusNorm
                | UnaryOp::L1Norm
                | UnaryOp::NormalizedSum
        )
    }

    /// Applies the primitive. Domain violations yield non-finite values
    /// rather than errors.
    pub fn apply(self, t: &Tensor) -> Tensor {
        let n = t.numel() as f64;
        match self {
            UnaryOp::NoOp => t.clone(),
            UnaryOp::Abs => t.map(f64::abs),
            UnaryOp::Tanh => t.map(f64::tanh),
            UnaryOp::Pow => t.map(|x| x * x),
            UnaryOp::Exp => t.map(f64::exp),
            UnaryOp::Log => t.map(f64::ln),
            UnaryOp::Relu => t.map(|x| x.max(0.0)),
            UnaryOp::LeakyRelu => t.map(|x| x.max(0.1 * x)),
            UnaryOp::Swish => t.map(|x| x * sigmoid(x)),
            UnaryOp::Mish => t.map(|x| x * x.exp().ln_1p().tanh()),
            UnaryOp::Invert => t.map(|x| 1.0 / x),
            UnaryOp::NormalizedSum => Tensor::scalar(t.sum() / (n + EPSILON)),
            UnaryOp::Normalize => {
                let (m, s) = (t.mean(), t.variance().sqrt());
                t.map(|x| (x - m) / s)
            }
            UnaryOp::Sigmoid => t.map(sigmoid),
            UnaryOp::Logsoftmax => {
                let lse = log_sum_exp(t.data());
                t.map(|x| x - lse)
            }
            UnaryOp::Softmax => {
                let lse = log_sum_exp(t.data());
                t.map(|x| (x - lse).exp())
            }
            UnaryOp::Sqrt => t.map(f64::sqrt),
            UnaryOp::Revert => t.map(|x| -x),
            UnaryOp::FrobeniusNorm => Tensor::scalar(t.data().iter().map(|x| x * x).sum::<f64>().sqrt()),
            UnaryOp::Abslog => t.map(|x| x.ln().abs()),
            UnaryOp::L1Norm => Tensor::scalar(t.data().iter().map(|x| x.abs()).sum::<f64>() / (n + EPSILON)),
            UnaryOp::MinMaxNormalize => {
                let (lo, hi) = (t.min(), t.max());
                t.map(|x| (x - lo) / (hi - lo))
            }
            UnaryOp::ToMeanScalar => Tensor::scalar(t.mean()),
            UnaryOp::ToStdScalar => Tensor::scalar(t.variance().sqrt()),
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Binary primitives (`BOP01`..`BOP04`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BinaryOp {
    #[serde(rename = "element_wise_sum")]
    Sum = 1,
    #[serde(rename = "element_wise_difference")]
    Difference,
    #[serde(rename = "element_wise_product")]
    Product,
    #[serde(rename = "matrix_multiplication")]
    MatMul,
}

impl BinaryOp {
    pub const ALL: [BinaryOp; 4] = [BinaryOp::Sum, BinaryOp::Difference, BinaryOp::Product, BinaryOp::MatMul];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            BinaryOp::Sum => "element_wise_sum",
            BinaryOp::Difference => "element_wise_difference",
            BinaryOp::Product => "element_wise_product",
            BinaryOp::MatMul => "matrix_multiplication",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|op| op.name() == name)
    }

    pub fn is_commutative(self) -> bool {
        matches!(self, BinaryOp::Sum | BinaryOp::Product)
    }

    /// Applies the op, or `None` when the operands are dimensionally
    /// incompatible.
    ///
    /// Elementwise ops work on flattened operands of equal length; a
    /// one-element operand broadcasts. Matrix multiplication views each
    /// operand as `[shape[0], rest]`; two vectors of equal length give
    /// their inner product.
    pub fn apply(self, a: &Tensor, b: &Tensor) -> Option<Tensor> {
        let f: fn(f64, f64) -> f64 = match self {
            BinaryOp::Sum => |x, y| x + y,
            BinaryOp::Difference => |x, y| x - y,
            BinaryOp::Product => |x, y| x * y,
            BinaryOp::MatMul => return matmul(a, b),
        };
        if a.numel() == b.numel() {
            let data = a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect();
            Some(Tensor { shape: a.shape().to_vec(), data })
        } else if b.is_scalar() {
            let y = b.data()[0];
            Some(a.map(|x| f(x, y)))
        } else if a.is_scalar() {
            let x = a.data()[0];
            Some(b.map(|y| f(x, y)))
        } else {
            None
        }
    }
}

fn as_matrix(t: &Tensor) -> (usize, usize) {
    match t.shape().len() {
        0 => (1, 1),
        1 => (1, t.numel()),
        _ => (t.shape()[0], t.numel() / t.shape()[0]),
    }
}

fn matmul(a: &Tensor, b: &Tensor) -> Option<Tensor> {
    if a.shape().len() <= 1 && b.shape().len() <= 1 {
        return (a.numel() == b.numel() && !a.shape().is_empty()).then(|| Tensor::scalar(a.dot(b)));
    }
    if a.shape().is_empty() || b.shape().is_empty() {
        return None;
    }
    let (m, k) = as_matrix(a);
    let (k2, n) = if b.shape().len() == 1 { (b.numel(), 1) } else { as_matrix(b) };
    if k != k2 {
        return None;
    }
    let (ad, bd) = (a.data(), b.data());
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        for p in 0..k {
            let av = ad[i * k + p];
            for j in 0..n {
                out[i * n + j] += av * bd[p * n + j];
            }
        }
    }
    let shape = if b.shape().len() == 1 { vec![m] } else { vec![m, n] };
    Some(Tensor { shape, data: out })
}
