//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use qexplore_core::efg::EventId;
use qexplore_core::features::{EmbeddingProvider, FeatureExtractor};
use qexplore_core::{EventKind, ExplorationGraph, FeatureConfig, FeatureMask, RawEvent, RawPage};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn extractor() -> FeatureExtractor {
    let cfg = FeatureConfig::default();
    FeatureExtractor::new(
        cfg,
        EmbeddingProvider::hashed(cfg.embedding_dim),
        FeatureMask::default(),
    )
    .unwrap()
}

/// `r + gamma * max(qs)`, written out with an explicit loop.
pub fn oracle_target(r: f64, qs: &[f64], gamma: f64) -> f64 {
    if qs.is_empty() {
        return r;
    }
    let mut m = qs[0];
    for &q in &qs[1..] {
        if q > m {
            m = q;
        }
    }
    r + gamma * m
}

/// Identity used for merging, recomputed from scratch: activity, kind, text,
/// how many equal (text, kind) events precede it on the page, and the
/// position when the text is empty.
type MergeKey = (String, EventKind, String, usize, Option<usize>);

fn merge_keys(page: &RawPage) -> Vec<MergeKey> {
    page.events
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let before = page.events[..i]
                .iter()
                .filter(|o| o.text == e.text && o.kind == e.kind)
                .count();
            let ord = if e.text.is_empty() { Some(i) } else { None };
            (page.activity.clone(), e.kind, e.text.clone(), before, ord)
        })
        .collect()
}

pub fn random_page(rng: &mut ChaCha8Rng) -> RawPage {
    const ACTIVITIES: [&str; 3] = ["Main", "Edit", "List"];
    const TEXTS: [&str; 6] = ["ok", "cancel", "", "save note", "Status bar shortcut", "ok"];
    const KINDS: [EventKind; 4] = [
        EventKind::Click,
        EventKind::Scroll,
        EventKind::Edit,
        EventKind::Back,
    ];
    let n = rng.random_range(1..=6);
    RawPage {
        activity: ACTIVITIES.choose(rng).unwrap().to_string(),
        events: (0..n)
            .map(|_| RawEvent::new(*TEXTS.choose(rng).unwrap(), *KINDS.choose(rng).unwrap()))
            .collect(),
    }
}

/// Drives random observe/execute operations on a graph while keeping an
/// independent count per merge key.
pub struct GraphFuzzer {
    pub graph: ExplorationGraph,
    pool: Vec<RawPage>,
    keys: Vec<MergeKey>,
    counts: HashMap<MergeKey, u64>,
}

impl GraphFuzzer {
    pub fn new(rng: &mut ChaCha8Rng, pool_size: usize) -> Self {
        GraphFuzzer {
            graph: ExplorationGraph::default(),
            pool: (0..pool_size).map(|_| random_page(rng)).collect(),
            keys: Vec::new(),
            counts: HashMap::new(),
        }
    }

    pub fn step(&mut self, rng: &mut ChaCha8Rng) {
        let n = self.graph.vertex_count();
        if n == 0 || rng.random_bool(0.4) {
            let page = self.pool.choose(rng).unwrap().clone();
            let executed = (n > 0 && rng.random_bool(0.7)).then(|| EventId(rng.random_range(0..n)));
            let before = self.graph.vertex_count();
            let snap = self.graph.update_graph(executed, &page).unwrap();
            if self.graph.vertex_count() > before {
                let keys = merge_keys(&page);
                assert_eq!(snap.events.len(), keys.len());
                for (rec, key) in snap.events.iter().zip(keys) {
                    assert_eq!(rec.event_id.0, self.keys.len());
                    self.keys.push(key);
                }
            }
        } else {
            let e = EventId(rng.random_range(0..n));
            self.graph.record_execution(e).unwrap();
            *self.counts.entry(self.keys[e.0].clone()).or_insert(0) += 1;
        }
    }

    /// Every vertex's FCR equals the independent count of its merge key, and
    /// vertices share a class exactly when they share a key.
    pub fn check(&self) -> Result<(), String> {
        let mut class_of_key: HashMap<&MergeKey, _> = HashMap::new();
        for (i, key) in self.keys.iter().enumerate() {
            let e = EventId(i);
            let fcr = self.graph.fcr(e).unwrap();
            let want = self.counts.get(key).copied().unwrap_or(0);
            if fcr != want {
                return Err(format!("vertex {i} has fcr {fcr}, oracle {want}"));
            }
            let class = self.graph.class_of(e).unwrap();
            if let Some(&c) = class_of_key.get(key) {
                if c != class {
                    return Err(format!("vertex {i} split from its merge key"));
                }
            } else {
                class_of_key.insert(key, class);
            }
            for &m in self.graph.class_members(class) {
                if self.graph.fcr(m).unwrap() != fcr {
                    return Err(format!("class of vertex {i} has unequal fcr"));
                }
            }
        }
        if class_of_key.len() != self.graph.class_count() {
            return Err("distinct keys and classes disagree".into());
        }
        Ok(())
    }
}
