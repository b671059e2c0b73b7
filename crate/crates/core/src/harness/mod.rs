//! Experiment orchestration behind the `qexplore` CLI.

mod corpus;
mod probe;
mod run;
mod stats;

pub use corpus::{
    app_seed, cmd_gen, fold_of, load_corpus, split_folds, verify_manifest, CorpusApp, Manifest,
    ManifestEntry, MANIFEST_FILE,
};
pub use probe::{cmd_probe, probe_rows, probe_texts, ProbeRow, ProbeTable, PROBE_FCR_MAX};
pub use run::{
    cmd_baseline, cmd_test, cmd_train, crossval, write_curves_csv, write_traces, BatchReport,
    CrossvalReport, EpisodeRun, FoldReport, TrainReport, CSV_HEADER,
};
pub use stats::{cmd_stats, expected_action_stats, ExpectedActionStats};

use std::path::PathBuf;

use crate::agent::AgentConfig;
use crate::features::{EmbeddingProvider, FeatureConfig, FeatureExtractor, FeatureMask};
use crate::nn::Architecture;
use crate::Result;

/// Settings shared by every harness command.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub agent: AgentConfig,
    pub features: FeatureConfig,
    pub mask: FeatureMask,
    /// Word-vector table; `None` uses hashed embeddings.
    pub embedding: Option<PathBuf>,
    pub master_seed: u64,
    pub repeats: usize,
    /// Keep updating one model across test apps instead of reloading it.
    pub carry_model: bool,
    /// Passes over the training apps.
    pub epochs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            agent: AgentConfig::default(),
            features: FeatureConfig::default(),
            mask: FeatureMask::default(),
            embedding: None,
            master_seed: 0,
            repeats: 3,
            carry_model: false,
            epochs: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.agent.validate()?;
        self.features.validate()?;
        if self.repeats == 0 {
            return Err(crate::Error::usage("repeats must be at least 1"));
        }
        if self.epochs == 0 {
            return Err(crate::Error::usage("epochs must be at least 1"));
        }
        Ok(())
    }

    pub fn architecture(&self) -> Architecture {
        Architecture::for_features(self.features)
    }

    pub fn extractor(&self) -> Result<FeatureExtractor> {
        let provider = match &self.embedding {
            Some(path) => EmbeddingProvider::from_table_file(path, self.features.embedding_dim)?,
            None => EmbeddingProvider::hashed(self.features.embedding_dim),
        };
        FeatureExtractor::new(self.features, provider, self.mask)
    }
}
