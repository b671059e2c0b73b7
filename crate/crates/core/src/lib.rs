//! Deep-Q-network guided GUI exploration.
//!
//! The crate is organized bottom-up:
//!
//! - [`efg`]: the compacted event flow graph with vertex merging.
//! - [`features`]: FCR / FCD / TXC feature extraction and word embeddings.
//! - [`nn`]: a from-scratch Q-network with backpropagation, Adam and checkpoints.
//! - [`agent`]: action selection, rewards, Q targets, replay memory and the
//!   per-iteration exploration loop.
//! - [`sim`]: a deterministic synthetic app environment and corpus generator.
//! - [`harness`]: corpus generation, training, testing, baselines, probes and
//!   trace statistics used by the `qexplore` CLI.

pub mod agent;
pub mod efg;
mod error;
pub mod features;
pub mod harness;
pub mod nn;
pub mod rng;
pub mod sim;

pub use agent::{AgentConfig, IterationTrace, Model};
pub use efg::{EventKind, EventRecord, ExplorationGraph, PageSnapshot};
pub use error::{Error, Result};
pub use features::{EmbeddingProvider, FeatureBundle, FeatureConfig, FeatureMask};
pub use nn::{AdamState, Architecture, QNetwork, TrainingSample};
pub use sim::{AppSpec, GenParams, RawEvent, RawPage, SimApp, StepOutcome};
