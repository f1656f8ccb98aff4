//! The desk-scale pipeline: dataset, trained reference network, and
//! calibration statistics, all derived from an architecture and one seed.

use serde::{Deserialize, Serialize};

use crate::netzoo::{
    build_net, extract_stats, make_dataset_with_calib, train, Arch, Batch, LayerStats, NetError, ReferenceNet, Split,
    SyntheticDataset, TrainConfig, DEFAULT_CALIB_SIZE, DEFAULT_HUTCHINSON_PROBES,
};
use crate::quant::{calibrate_activations, QuantError, QuantScheme, DEFAULT_ACTIVATION_BITS};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeskConfig {
    pub arch: Arch,
    pub seed: u64,
    pub n_classes: usize,
    pub n_per_class: usize,
    pub calib_size: usize,
    pub probes: usize,
    pub activation_bits: u8,
    pub train: TrainConfig,
}

/// Independent streams derived from the network seed.
fn derive(seed: u64, stream: u64) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(stream.wrapping_mul(0xbf58_476d_1ce4_e5b9))
}

impl DeskConfig {
    pub fn new(arch: Arch, seed: u64) -> Self {
        DeskConfig {
            arch,
            seed,
            n_classes: 4,
            n_per_class: 512,
            calib_size: DEFAULT_CALIB_SIZE,
            probes: DEFAULT_HUTCHINSON_PROBES,
            activation_bits: DEFAULT_ACTIVATION_BITS,
            train: TrainConfig { seed: derive(seed, 2), ..TrainConfig::default() },
        }
    }

    pub fn dataset_seed(&self) -> u64 {
        derive(self.seed, 1)
    }

    pub fn stats_seed(&self) -> u64 {
        derive(self.seed, 3)
    }
}

#[derive(Clone, Debug)]
pub struct Desk {
    pub config: DeskConfig,
    pub dataset: SyntheticDataset,
    pub net: ReferenceNet,
    pub float_accuracy: f64,
    pub calib: Batch,
    pub eval: Batch,
    pub stats: Vec<LayerStats>,
    /// Activation quantizers at `config.activation_bits`.
    pub act_schemes: Vec<QuantScheme>,
}

#[derive(Debug, thiserror::Error)]
pub enum DeskError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Quant(#[from] QuantError),
}

impl Desk {
    pub fn build(config: DeskConfig) -> Result<Desk, DeskError> {
        let dataset =
            make_dataset_with_calib(config.dataset_seed(), config.n_classes, config.n_per_class, config.calib_size)?;
        let mut net = build_net(config.arch, config.n_classes, config.seed)?;
        let report = train(&mut net, &dataset, &config.train)?;
        let calib = dataset.batch(Split::Calib);
        let eval = dataset.batch(Split::Eval);
        let stats = extract_stats(&net, &calib, config.stats_seed(), config.probes)?;
        let act_schemes = calibrate_activations(&net, &calib, config.activation_bits)?;
        log::info!("desk {} seed {}: float accuracy {:.4}", config.arch, config.seed, report.eval_accuracy);
        Ok(Desk { config, dataset, net, float_accuracy: report.eval_accuracy, calib, eval, stats, act_schemes })
    }

    pub fn default_for(arch: Arch, seed: u64) -> Result<Desk, DeskError> {
        Desk::build(DeskConfig::new(arch, seed))
    }
}
