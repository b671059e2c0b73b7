//! Feature extraction: FCR (own execution count), FCD (execution-count
//! histograms over child generations) and TXC (word-embedding matrix of the
//! event label).

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::efg::{EventId, ExplorationGraph};
use crate::rng;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Child generations encoded by FCD (K).
    pub generations: usize,
    /// Histogram length per generation (V); counts >= V-1 share the top bucket.
    pub buckets: usize,
    /// Embedding dimension (L).
    pub embedding_dim: usize,
    /// Words kept from an event label (N).
    pub max_words: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            generations: 3,
            buckets: 10,
            embedding_dim: 16,
            max_words: 6,
        }
    }
}

impl FeatureConfig {
    /// The full-size configuration (L = 400).
    pub fn full_scale() -> Self {
        FeatureConfig {
            embedding_dim: 400,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.generations == 0 || self.embedding_dim == 0 || self.max_words == 0 {
            return Err(Error::usage("feature dimensions must be positive"));
        }
        if self.buckets < 2 {
            return Err(Error::usage("FCD histogram needs at least 2 buckets"));
        }
        Ok(())
    }
}

/// Switches individual features off (zeroed) for ablation runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMask {
    pub fcr: bool,
    pub fcd: bool,
    pub txc: bool,
}

impl Default for FeatureMask {
    fn default() -> Self {
        FeatureMask {
            fcr: true,
            fcd: true,
            txc: true,
        }
    }
}

impl FeatureMask {
    pub fn disable(&mut self, feature: &str) -> Result<()> {
        match feature {
            "fcr" => self.fcr = false,
            "fcd" => self.fcd = false,
            "txc" => self.txc = false,
            other => return Err(Error::usage(format!("unknown feature {other:?}"))),
        }
        Ok(())
    }
}

/// `rows` embedding components by `cols` word positions, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TextMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl TextMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        TextMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn set_column(&mut self, col: usize, values: &[f64]) {
        debug_assert_eq!(values.len(), self.rows);
        for (r, v) in values.iter().enumerate() {
            self.data[r * self.cols + col] = *v;
        }
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }
}

/// State-action encoding of one candidate event.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureBundle {
    pub fcr: u64,
    /// `generations` histograms of length `buckets`.
    pub fcd: Vec<Vec<u64>>,
    pub txc: TextMatrix,
}

impl FeatureBundle {
    pub fn zeros(cfg: &FeatureConfig) -> Self {
        FeatureBundle {
            fcr: 0,
            fcd: vec![vec![0; cfg.buckets]; cfg.generations],
            txc: TextMatrix::zeros(cfg.embedding_dim, cfg.max_words),
        }
    }

    pub fn check_shape(&self, cfg: &FeatureConfig) -> Result<()> {
        if self.fcd.len() != cfg.generations || self.fcd.iter().any(|v| v.len() != cfg.buckets) {
            return Err(Error::shape(format!(
                "fcd must be {}x{}",
                cfg.generations, cfg.buckets
            )));
        }
        if self.txc.rows != cfg.embedding_dim
            || self.txc.cols != cfg.max_words
            || self.txc.data.len() != cfg.embedding_dim * cfg.max_words
        {
            return Err(Error::shape(format!(
                "txc must be {}x{}, got {}x{}",
                cfg.embedding_dim, cfg.max_words, self.txc.rows, self.txc.cols
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingSource {
    DeterministicHash,
    TableFile,
}

/// Maps normalized words to L-dimensional vectors.
#[derive(Clone, Debug)]
pub struct EmbeddingProvider {
    dim: usize,
    table: HashMap<String, Vec<f64>>,
    source: EmbeddingSource,
}

impl EmbeddingProvider {
    pub fn hashed(dim: usize) -> Self {
        EmbeddingProvider {
            dim,
            table: HashMap::new(),
            source: EmbeddingSource::DeterministicHash,
        }
    }

    /// Loads `word v1 .. vL` records. A leading `#dim L` line, when present,
    /// must agree with `dim`.
    pub fn from_table_file(path: &Path, dim: usize) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_table(&text, dim).map_err(|reason| Error::EmbeddingTable {
            path: PathBuf::from(path),
            reason,
        })
    }

    fn parse_table(text: &str, dim: usize) -> std::result::Result<Self, String> {
        let mut table = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("#dim") {
                let declared: usize = rest
                    .trim()
                    .parse()
                    .map_err(|_| format!("line {}: bad #dim header", i + 1))?;
                if declared != dim {
                    return Err(format!("declared dimension {declared}, expected {dim}"));
                }
                continue;
            }
            let mut parts = line.split_whitespace();
            let word = parts.next().expect("non-empty line");
            let values: Vec<f64> = parts
                .map(|p| p.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| format!("line {}: {e}", i + 1))?;
            if values.len() != dim {
                return Err(format!(
                    "line {}: {} components, expected {dim}",
                    i + 1,
                    values.len()
                ));
            }
            table.insert(normalize_word(word), values);
        }
        Ok(EmbeddingProvider {
            dim,
            table,
            source: EmbeddingSource::TableFile,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source(&self) -> EmbeddingSource {
        self.source
    }

    /// Embeds a normalized word. Table misses fall back to the hash source.
    pub fn embed(&self, word: &str) -> Vec<f64> {
        if let Some(v) = self.table.get(word) {
            return v.clone();
        }
        let mut rng = rng::seeded(rng::stable_hash(word.as_bytes()));
        (0..self.dim)
            .map(|_| rng.random_range(-1.0..=1.0))
            .collect()
    }
}

fn normalize_word(word: &str) -> String {
    word.trim_matches(|c: char| c.is_ascii_punctuation())
        .to_lowercase()
}

/// Lowercases, splits on whitespace, strips leading/trailing punctuation and
/// drops tokens that end up empty.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(normalize_word)
        .filter(|w| !w.is_empty())
        .collect()
}

pub fn fcr_feature(graph: &ExplorationGraph, event: EventId) -> Result<u64> {
    graph.fcr(event)
}

pub fn fcd_feature(
    graph: &ExplorationGraph,
    event: EventId,
    cfg: &FeatureConfig,
) -> Result<Vec<Vec<u64>>> {
    let generations = graph.generations(event, cfg.generations)?;
    let top = cfg.buckets - 1;
    Ok(generations
        .iter()
        .map(|classes| {
            let mut hist = vec![0u64; cfg.buckets];
            for &c in classes {
                let count = graph.class_fcr(c).min(top as u64) as usize;
                hist[count] += 1;
            }
            hist
        })
        .collect())
}

pub fn txc_feature(provider: &EmbeddingProvider, text: &str, cfg: &FeatureConfig) -> TextMatrix {
    let mut m = TextMatrix::zeros(cfg.embedding_dim, cfg.max_words);
    for (col, word) in tokenize(text).iter().take(cfg.max_words).enumerate() {
        let v = provider.embed(word);
        m.set_column(col, &v[..cfg.embedding_dim.min(v.len())]);
    }
    m
}

/// Builds feature bundles for graph vertices, caching text matrices by label.
#[derive(Clone, Debug)]
pub struct FeatureExtractor {
    cfg: FeatureConfig,
    provider: EmbeddingProvider,
    mask: FeatureMask,
    txc_cache: HashMap<String, TextMatrix>,
}

impl FeatureExtractor {
    pub fn new(cfg: FeatureConfig, provider: EmbeddingProvider, mask: FeatureMask) -> Result<Self> {
        cfg.validate()?;
        if provider.dim() != cfg.embedding_dim {
            return Err(Error::shape(format!(
                "embedding provider has dimension {}, features expect {}",
                provider.dim(),
                cfg.embedding_dim
            )));
        }
        Ok(FeatureExtractor {
            cfg,
            provider,
            mask,
            txc_cache: HashMap::new(),
        })
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.cfg
    }

    pub fn mask(&self) -> FeatureMask {
        self.mask
    }

    pub fn bundle(&mut self, graph: &ExplorationGraph, event: EventId) -> Result<FeatureBundle> {
        let record = graph
            .vertex(event)
            .ok_or_else(|| Error::usage(format!("unknown event {event}")))?;
        let fcr = if self.mask.fcr {
            fcr_feature(graph, event)?
        } else {
            0
        };
        let fcd = if self.mask.fcd {
            fcd_feature(graph, event, &self.cfg)?
        } else {
            vec![vec![0; self.cfg.buckets]; self.cfg.generations]
        };
        let txc = if self.mask.txc {
            match self.txc_cache.get(&record.text) {
                Some(m) => m.clone(),
                None => {
                    let m = txc_feature(&self.provider, &record.text, &self.cfg);
                    self.txc_cache.insert(record.text.clone(), m.clone());
                    m
                }
            }
        } else {
            TextMatrix::zeros(self.cfg.embedding_dim, self.cfg.max_words)
        };
        Ok(FeatureBundle { fcr, fcd, txc })
    }

    /// Bundle for an arbitrary label with hand-set counts (used by probes).
    pub fn synthetic_bundle(
        &self,
        text: &str,
        fcr: u64,
        fcd: Vec<Vec<u64>>,
    ) -> Result<FeatureBundle> {
        let b = FeatureBundle {
            fcr,
            fcd,
            txc: txc_feature(&self.provider, text, &self.cfg),
        };
        b.check_shape(&self.cfg)?;
        Ok(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::efg::{EventKind, RawEvent, RawPage};

    fn cfg() -> FeatureConfig {
        FeatureConfig::default()
    }

    #[test]
    fn tokenization_normalizes_words() {
        assert_eq!(
            tokenize("  Status bar, Shortcut! "),
            vec!["status", "bar", "shortcut"]
        );
        assert_eq!(tokenize("..."), Vec::<String>::new());
        assert_eq!(tokenize("don't"), vec!["don't"]);
    }

    #[test]
    fn hash_embedding_is_deterministic_and_bounded() {
        let p = EmbeddingProvider::hashed(16);
        let ok = p.embed("ok");
        assert_eq!(ok, p.embed("ok"));
        assert_eq!(ok.len(), 16);
        assert!(ok.iter().all(|v| (-1.0..=1.0).contains(v)));
        assert_ne!(ok, p.embed("cancel"));
    }

    #[test]
    fn table_lookup_and_fallback() {
        let p = EmbeddingProvider::parse_table("#dim 2\nok 0.1 0.2\n", 2).unwrap();
        assert_eq!(p.embed("ok"), vec![0.1, 0.2]);
        assert_eq!(
            p.embed("cancel"),
            EmbeddingProvider::hashed(2).embed("cancel")
        );
        assert_eq!(p.source(), EmbeddingSource::TableFile);
    }

    #[test]
    fn table_arity_and_header_are_validated() {
        assert!(EmbeddingProvider::parse_table("ok 0.1\n", 2).is_err());
        assert!(EmbeddingProvider::parse_table("#dim 3\nok 0.1 0.2\n", 2).is_err());
        assert!(EmbeddingProvider::parse_table("ok 0.1 zz\n", 2).is_err());
        let missing = EmbeddingProvider::from_table_file(Path::new("/nonexistent/table.txt"), 2);
        assert!(matches!(missing, Err(Error::Io { .. })));
    }

    #[test]
    fn txc_pads_and_truncates() {
        let p = EmbeddingProvider::hashed(16);
        let c = cfg();
        let empty = txc_feature(&p, "", &c);
        assert!(empty.data.iter().all(|&v| v == 0.0));

        let m = txc_feature(&p, "status bar shortcut", &c);
        assert_eq!(m.column(0), p.embed("status"));
        assert_eq!(m.column(2), p.embed("shortcut"));
        for col in 3..6 {
            assert!(m.column(col).iter().all(|&v| v == 0.0));
        }

        let long = txc_feature(&p, "one two three four five six seven eight", &c);
        for col in 0..6 {
            assert!(long.column(col).iter().any(|&v| v != 0.0));
        }
        assert_eq!(long.column(5), p.embed("six"));
    }

    fn star_graph(children: &[u64]) -> (ExplorationGraph, EventId) {
        // One parent event whose child page has `children.len()` events with
        // the given execution counts.
        let mut g = ExplorationGraph::default();
        let home = g
            .update_graph(
                None,
                &RawPage {
                    activity: "H".into(),
                    events: vec![RawEvent::new("go", EventKind::Click)],
                },
            )
            .unwrap();
        let e = home.events[0].event_id;
        let child = g
            .update_graph(
                Some(e),
                &RawPage {
                    activity: "C".into(),
                    events: (0..children.len())
                        .map(|i| RawEvent::new(format!("w{i}"), EventKind::Click))
                        .collect(),
                },
            )
            .unwrap();
        for (ev, &n) in child.events.iter().zip(children) {
            for _ in 0..n {
                g.record_execution(ev.event_id).unwrap();
            }
        }
        (g, e)
    }

    #[test]
    fn fcd_worked_example() {
        let mut counts = vec![0u64; 12];
        counts.extend([2u64; 8]);
        let (g, e) = star_graph(&counts);
        let fcd = fcd_feature(&g, e, &cfg()).unwrap();
        assert_eq!(fcd[0], vec![12, 0, 8, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(fcd[1], vec![0; 10]);
    }

    #[test]
    fn fcd_clamps_to_top_bucket() {
        let (g, e) = star_graph(&[15]);
        // Brute-force histogram with explicit clamping.
        let mut expected = vec![0u64; 10];
        expected[std::cmp::min(15, 9)] += 1;
        assert_eq!(fcd_feature(&g, e, &cfg()).unwrap()[0], expected);
        assert_eq!(expected, vec![0, 0, 0, 0, 0, 0, 0, 0, 0, 1]);
    }

    #[test]
    fn unexplored_event_has_zero_fcd() {
        let (g, e) = star_graph(&[1, 2]);
        let child_event = g.snapshot(crate::efg::PageId(1)).unwrap().events[0].event_id;
        let fcd = fcd_feature(&g, child_event, &cfg()).unwrap();
        assert!(fcd.iter().all(|v| v.iter().all(|&c| c == 0)));
        assert_eq!(fcd_feature(&g, e, &cfg()).unwrap()[0][1], 1);
    }

    #[test]
    fn fcr_counts_without_clamp() {
        let (mut g, e) = star_graph(&[0]);
        assert_eq!(fcr_feature(&g, e).unwrap(), 0);
        for _ in 0..12 {
            g.record_execution(e).unwrap();
        }
        assert_eq!(fcr_feature(&g, e).unwrap(), 12);
    }

    #[test]
    fn mask_zeroes_disabled_features() {
        let (mut g, e) = star_graph(&[0, 3]);
        g.record_execution(e).unwrap();
        let mut mask = FeatureMask::default();
        mask.disable("fcr").unwrap();
        mask.disable("txc").unwrap();
        assert!(mask.clone().disable("image").is_err());
        let mut x = FeatureExtractor::new(cfg(), EmbeddingProvider::hashed(16), mask).unwrap();
        let b = x.bundle(&g, e).unwrap();
        assert_eq!(b.fcr, 0);
        assert!(b.txc.data.iter().all(|&v| v == 0.0));
        assert_eq!(b.fcd[0][0], 1);
        b.check_shape(&cfg()).unwrap();
    }

    #[test]
    fn extractor_rejects_dimension_mismatch() {
        assert!(
            FeatureExtractor::new(cfg(), EmbeddingProvider::hashed(8), FeatureMask::default())
                .is_err()
        );
    }
}
