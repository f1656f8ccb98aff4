use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{kendall, pearson, spearman_at_topk};
use super::SearchError;
use crate::bench::Benchmark;
use crate::dsl::config_score;

pub const DEFAULT_TOPK_FRACTIONS: [f64; 3] = [0.2, 0.5, 1.0];

/// A fixed set of benchmark configurations with ground-truth accuracies,
/// against which proxies are ranked.
#[derive(Clone, Debug, PartialEq)]
pub struct FitnessContext {
    pub configs: Vec<Vec<u8>>,
    pub accuracies: Vec<f64>,
    pub fractions: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub rho_at: Vec<f64>,
    pub kendall: f64,
    pub pearson: f64,
}

impl FitnessContext {
    pub fn from_positions(bench: &Benchmark, positions: &[usize], fractions: &[f64]) -> FitnessContext {
        FitnessContext {
            configs: positions.iter().map(|&p| bench.entries[p].bit_cfg.clone()).collect(),
            accuracies: bench.accuracies(positions),
            fractions: fractions.to_vec(),
        }
    }

    /// `n` configurations drawn without replacement from `positions`.
    pub fn sample<R: Rng + ?Sized>(
        bench: &Benchmark,
        positions: &[usize],
        n: usize,
        fractions: &[f64],
        rng: &mut R,
    ) -> Result<FitnessContext, SearchError> {
        if n > positions.len() || n < 2 {
            return Err(SearchError::Config(format!(
                "cannot sample {n} fitness configs from a split of {}",
                positions.len()
            )));
        }
        let mut picked: Vec<usize> = sample(rng, positions.len(), n).into_iter().map(|i| positions[i]).collect();
        picked.sort_unstable();
        Ok(FitnessContext::from_positions(bench, &picked, fractions))
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn estimates(&self, layer_scores: &[f64]) -> Vec<f64> {
        self.configs.iter().map(|c| config_score(layer_scores, c)).collect()
    }

    /// Mean of Spearman@top-k over the configured fractions; `-inf` when
    /// any estimate is non-finite.
    pub fn fitness(&self, layer_scores: &[f64]) -> f64 {
        let est = self.estimates(layer_scores);
        self.fitness_of_estimates(&est)
    }

    pub fn fitness_of_estimates(&self, est: &[f64]) -> f64 {
        if est.iter().any(|v| !v.is_finite()) {
            return f64::NEG_INFINITY;
        }
        let mut total = 0.0;
        for &t in &self.fractions {
            match spearman_at_topk(&self.accuracies, est, t) {
                Ok(c) => total += c.value,
                Err(_) => return f64::NEG_INFINITY,
            }
        }
        total / self.fractions.len() as f64
    }

    pub fn report(&self, est: &[f64]) -> Result<RankReport, SearchError> {
        let rho_at = self
            .fractions
            .iter()
            .map(|&t| spearman_at_topk(&self.accuracies, est, t).map(|c| c.value))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RankReport {
            rho_at,
            kendall: kendall(&self.accuracies, est)?.value,
            pearson: pearson(&self.accuracies, est)?.value,
        })
    }
}
