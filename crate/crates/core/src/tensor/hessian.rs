//! Second-order estimators built on finite-difference Hessian-vector products.

use rand::Rng;

use super::{Tensor, TensorError};

/// Finite-difference step for [`hvp`]: `1e-3 * ||theta||_inf`, or `1e-3`
/// when `theta` is identically zero.
pub fn default_hvp_step(theta: &Tensor) -> f64 {
    let m = theta.max_abs();
    if m > 0.0 {
        1e-3 * m
    } else {
        1e-3
    }
}

/// Central-difference Hessian-vector product
/// `(g(theta + step v) - g(theta - step v)) / (2 step)`.
pub fn hvp<F>(mut grad: F, theta: &Tensor, v: &Tensor, step: f64) -> Result<Tensor, TensorError>
where
    F: FnMut(&Tensor) -> Result<Tensor, TensorError>,
{
    if v.shape() != theta.shape() {
        return Err(TensorError::ShapeMismatch {
            node: "hvp",
            detail: format!("direction {:?} vs parameter {:?}", v.shape(), theta.shape()),
        });
    }
    if step.is_nan() || step <= 0.0 {
        return Err(TensorError::InvalidArgument(format!("hvp step must be positive, got {step}")));
    }
    let plus = grad(&theta.axpy(step, v)?)?;
    let minus = grad(&theta.axpy(-step, v)?)?;
    if !plus.all_finite() || !minus.all_finite() {
        return Err(TensorError::NonFiniteGradient);
    }
    plus.zip_map(&minus, |a, b| (a - b) / (2.0 * step))
}

fn rademacher<R: Rng + ?Sized>(shape: &[usize], rng: &mut R) -> Tensor {
    let n: usize = shape.iter().product();
    let data = (0..n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
    Tensor::new(shape.to_vec(), data).expect("shape and length agree")
}

/// Hutchinson estimate of the Hessian diagonal: the mean over `probes`
/// Rademacher vectors `v` of `v * (H v)`. Its sum estimates the trace.
pub fn hutchinson_diagonal<F, R>(
    mut hvp_fn: F,
    shape: &[usize],
    probes: usize,
    rng: &mut R,
) -> Result<Tensor, TensorError>
where
    F: FnMut(&Tensor) -> Result<Tensor, TensorError>,
    R: Rng + ?Sized,
{
    if probes == 0 {
        return Err(TensorError::InvalidArgument("at least one Hutchinson probe is required".into()));
    }
    let n: usize = shape.iter().product();
    let mut acc = vec![0.0; n];
    for _ in 0..probes {
        let v = rademacher(shape, rng);
        let hv = hvp_fn(&v)?;
        for ((a, x), y) in acc.iter_mut().zip(v.data()).zip(hv.data()) {
            *a += x * y;
        }
    }
    let k = probes as f64;
    Tensor::new(shape.to_vec(), acc.into_iter().map(|a| a / k).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerIteration {
    pub eigenvalue: f64,
    pub iterations: usize,
    /// False when the iteration budget ran out before the relative change
    /// fell below tolerance; the last iterate is still returned.
    pub converged: bool,
}

/// Dominant eigenvalue by power iteration with Rayleigh-quotient estimates.
pub fn power_iteration<F, R>(
    mut hvp_fn: F,
    shape: &[usize],
    max_iter: usize,
    tol: f64,
    rng: &mut R,
) -> Result<PowerIteration, TensorError>
where
    F: FnMut(&Tensor) -> Result<Tensor, TensorError>,
    R: Rng + ?Sized,
{
    let mut v = rademacher(shape, rng);
    normalize(&mut v);
    let mut eigenvalue = f64::NAN;
    for it in 1..=max_iter {
        let hv = hvp_fn(&v)?;
        let next = v.dot(&hv);
        let mut w = hv;
        let norm = w.dot(&w).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Ok(PowerIteration { eigenvalue: next, iterations: it, converged: norm == 0.0 });
        }
        w.data_mut().iter_mut().for_each(|x| *x /= norm);
        v = w;
        let done = eigenvalue.is_finite() && (next - eigenvalue).abs() <= tol * next.abs().max(f64::MIN_POSITIVE);
        eigenvalue = next;
        if done {
            return Ok(PowerIteration { eigenvalue, iterations: it, converged: true });
        }
    }
    log::warn!("power iteration did not converge in {max_iter} iterations");
    Ok(PowerIteration { eigenvalue, iterations: max_iter, converged: false })
}

fn normalize(v: &mut Tensor) {
    let n = v.dot(v).sqrt();
    v.data_mut().iter_mut().for_each(|x| *x /= n);
}
