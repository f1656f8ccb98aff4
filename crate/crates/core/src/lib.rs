//! Evolving training-free proxies for mixed-precision quantization.
//!
//! The crate builds a small quantization benchmark from reference networks,
//! represents candidate proxies as computation graphs over per-layer
//! statistics, and searches them with an evolutionary algorithm whose
//! fitness is rank correlation with quantized accuracy.

pub mod baselines;
pub mod bench;
pub mod desk;
pub mod dsl;
pub mod exec;
pub mod netzoo;
pub mod quant;
pub mod search;
pub mod tensor;

pub use exec::Exec;
