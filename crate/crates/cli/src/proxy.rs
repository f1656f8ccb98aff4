use std::path::Path;

use emq_core::baselines::{baseline_layer_scores, BaselineId};
use emq_core::desk::Desk;
use emq_core::dsl::{layer_scores, ProxyGenome};
use emq_core::netzoo::NetHessian;

use crate::manifest::read_file;
use crate::CliError;

/// The searched proxy as distributed with the tool.
pub const SHIPPED_EMQ_JSON: &str = include_str!("../assets/emq.json");

#[derive(Clone, Debug, PartialEq)]
pub enum ProxySource {
    Genome { name: String, genome: ProxyGenome },
    Baseline(BaselineId),
}

pub fn load_genome(path: &Path) -> Result<ProxyGenome, CliError> {
    let text = read_file(path)?;
    ProxyGenome::from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

impl ProxySource {
    pub fn from_file(path: &Path) -> Result<ProxySource, CliError> {
        let genome = load_genome(path)?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "genome".into());
        Ok(ProxySource::Genome { name, genome })
    }

    pub fn name(&self) -> String {
        match self {
            ProxySource::Genome { name, .. } => name.clone(),
            ProxySource::Baseline(id) => id.name().to_string(),
        }
    }

    /// Per-layer scores on the desk's statistics.
    pub fn layer_scores(&self, desk: &Desk, seed: u64) -> Result<Vec<f64>, CliError> {
        match self {
            ProxySource::Genome { name, genome } => layer_scores(genome, &desk.stats)
                .map_err(|why| CliError::Input(format!("proxy `{name}` does not produce valid scores: {why:?}"))),
            ProxySource::Baseline(id) => {
                let oracle = NetHessian { net: &desk.net, batch: &desk.calib };
                let r = baseline_layer_scores(*id, &desk.stats, Some(&oracle), seed)?;
                if !r.unconverged.is_empty() {
                    log::warn!("{id}: power iteration unconverged on layers {:?}", r.unconverged);
                }
                if let Some(i) = r.layer_scores.iter().position(|s| !s.is_finite()) {
                    return Err(CliError::Input(format!("baseline `{id}` gives a non-finite score on layer {i}")));
                }
                Ok(r.layer_scores)
            }
        }
    }
}
