use std::cmp::Ordering;
use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_bits, size_mb, QuantError};

/// Configurations are enumerated exhaustively up to this many.
pub const EXHAUSTIVE_LIMIT: usize = 10_000;

/// Scores a whole weight bit-width vector.
pub trait ConfigScorer {
    fn score(&self, weight_bits: &[u8]) -> f64;
}

/// `sum_i b_i * s_i` over fixed per-layer scores.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearScorer {
    pub layer_scores: Vec<f64>,
}

impl ConfigScorer for LinearScorer {
    fn score(&self, weight_bits: &[u8]) -> f64 {
        self.layer_scores.iter().zip(weight_bits).map(|(s, &b)| b as f64 * s).sum()
    }
}

impl<F: Fn(&[u8]) -> f64> ConfigScorer for F {
    fn score(&self, weight_bits: &[u8]) -> f64 {
        self(weight_bits)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssignOptions {
    pub palette: Vec<u8>,
    pub budget_mb: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// Keep the first and last layer at 8 bits.
    pub pin_first_last: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub weight_bits: Vec<u8>,
    pub score: f64,
    pub model_size_mb: f64,
    /// Distinct feasible configurations that were scored.
    pub candidates: usize,
}

fn candidate_cmp(a: &Assignment, b: &Assignment) -> Ordering {
    // Better first: higher score, then smaller size, then lexicographically smaller.
    b.score
        .total_cmp(&a.score)
        .then(a.model_size_mb.total_cmp(&b.model_size_mb))
        .then(a.weight_bits.cmp(&b.weight_bits))
}

fn free_layers(n_layers: usize, pin: bool) -> Vec<usize> {
    (0..n_layers).filter(|&i| !(pin && (i == 0 || i + 1 == n_layers))).collect()
}

/// Highest-scoring configuration within the size budget. Spaces of at most
/// [`EXHAUSTIVE_LIMIT`] configurations are enumerated; larger spaces are
/// searched over `n_samples` distinct feasible random configurations.
pub fn assign_bits<S: ConfigScorer + ?Sized>(
    scorer: &S,
    numels: &[usize],
    opts: &AssignOptions,
) -> Result<Assignment, QuantError> {
    let mut palette = opts.palette.clone();
    palette.sort_unstable();
    palette.dedup();
    if palette.is_empty() {
        return Err(QuantError::InvalidPalette("palette is empty".into()));
    }
    palette.iter().try_for_each(|&b| check_bits(b))?;
    let n = numels.len();
    if n == 0 {
        return Err(QuantError::InvalidPalette("network has no quantizable layers".into()));
    }
    let free = free_layers(n, opts.pin_first_last);
    let mut base = vec![palette[0]; n];
    if opts.pin_first_last {
        base[0] = 8;
        base[n - 1] = 8;
    }
    let min_mb = size_mb(numels, &base);
    if min_mb > opts.budget_mb {
        return Err(QuantError::Infeasible { budget_mb: opts.budget_mb, min_mb });
    }

    let space = (palette.len() as f64).powi(free.len() as i32);
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let mut best: Option<Assignment> = None;
    let mut consider = |bits: Vec<u8>, seen: &mut HashSet<Vec<u8>>| {
        let size = size_mb(numels, &bits);
        if size > opts.budget_mb || !seen.insert(bits.clone()) {
            return;
        }
        let cand = Assignment { score: scorer.score(&bits), model_size_mb: size, weight_bits: bits, candidates: 0 };
        if best.as_ref().is_none_or(|b| candidate_cmp(&cand, b) == Ordering::Less) {
            best = Some(cand);
        }
    };

    if space <= EXHAUSTIVE_LIMIT as f64 {
        let total = space as usize;
        for code in 0..total {
            let mut bits = base.clone();
            let mut c = code;
            for &i in free.iter().rev() {
                bits[i] = palette[c % palette.len()];
                c /= palette.len();
            }
            consider(bits, &mut seen);
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let max_draws = opts.n_samples.saturating_mul(100).max(1000);
        let mut draws = 0;
        while seen.len() < opts.n_samples && draws < max_draws {
            draws += 1;
            let mut bits = base.clone();
            for &i in &free {
                bits[i] = *palette.choose(&mut rng).expect("non-empty");
            }
            consider(bits, &mut seen);
        }
        // The all-minimum configuration is always feasible.
        consider(base.clone(), &mut seen);
    }
    let mut out = best.ok_or(QuantError::Infeasible { budget_mb: opts.budget_mb, min_mb })?;
    out.candidates = seen.len();
    Ok(out)
}
