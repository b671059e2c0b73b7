//! Shared fixtures for the criterion benches.

use qexplore_core::features::TextMatrix;
use qexplore_core::rng::seeded;
use qexplore_core::{FeatureBundle, FeatureConfig, TrainingSample};
use rand::Rng;

/// Deterministic bundles with dense text and small counts.
pub fn bundles(cfg: &FeatureConfig, count: usize, seed: u64) -> Vec<FeatureBundle> {
    let mut rng = seeded(seed);
    (0..count)
        .map(|_| {
            let mut txc = TextMatrix::zeros(cfg.embedding_dim, cfg.max_words);
            for v in &mut txc.data {
                *v = rng.random_range(-1.0..1.0);
            }
            FeatureBundle {
                fcr: rng.random_range(0..8),
                fcd: (0..cfg.generations)
                    .map(|_| (0..cfg.buckets).map(|_| rng.random_range(0..5)).collect())
                    .collect(),
                txc,
            }
        })
        .collect()
}

/// A replay-sized batch: the current sample plus four history samples.
pub fn batch(cfg: &FeatureConfig, seed: u64) -> Vec<TrainingSample> {
    bundles(cfg, 5, seed)
        .into_iter()
        .enumerate()
        .map(|(i, bundle)| TrainingSample {
            bundle,
            target_q: i as f64 - 2.0,
        })
        .collect()
}
