use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use super::corpus::CorpusApp;
use crate::agent::Model;
use crate::features::FeatureExtractor;
use crate::{Error, Result};

/// Probe columns are FCR = 0..=PROBE_FCR_MAX.
pub const PROBE_FCR_MAX: u64 = 5;

/// One FCD pattern: `(a#b)` per generation sets bucket 0 to `a` and bucket 1
/// to `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeRow {
    pub label: String,
    pub pattern: Vec<(u64, u64)>,
}

impl ProbeRow {
    fn new(pattern: [(u64, u64); 3]) -> Self {
        let label = pattern
            .iter()
            .map(|(a, b)| format!("({a}#{b})"))
            .collect::<Vec<_>>()
            .join(";");
        ProbeRow {
            label,
            pattern: pattern.to_vec(),
        }
    }

    fn fcd(&self, generations: usize, buckets: usize) -> Vec<Vec<u64>> {
        (0..generations)
            .map(|g| {
                let mut h = vec![0; buckets];
                if let Some(&(a, b)) = self.pattern.get(g) {
                    h[0] = a;
                    h[1] = b;
                }
                h
            })
            .collect()
    }
}

/// The probe grid rows: one generation at a time skewed towards unexecuted
/// (`6#1`) or once-executed (`1#6`) children, a balanced row and an empty
/// one.
pub fn probe_rows() -> Vec<ProbeRow> {
    let b = (1, 1);
    [
        [(6, 1), b, b],
        [(1, 6), b, b],
        [b, (6, 1), b],
        [b, (1, 6), b],
        [b, b, (6, 1)],
        [b, b, (1, 6)],
        [b, b, b],
        [(0, 0), (0, 0), (0, 0)],
    ]
    .into_iter()
    .map(ProbeRow::new)
    .collect()
}

/// Distinct event labels on the home pages of `apps`, sorted.
pub fn probe_texts(apps: &[CorpusApp]) -> Vec<String> {
    let mut texts = BTreeSet::new();
    for spec in apps.iter().filter_map(|a| a.spec.as_ref().ok()) {
        for e in &spec.pages[spec.home].events {
            texts.insert(e.text.clone());
        }
    }
    if texts.is_empty() {
        texts.insert(String::new());
    }
    texts.into_iter().collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeTable {
    pub rows: Vec<ProbeRow>,
    /// `q[row][fcr]`, averaged over the probe texts.
    pub q: Vec<Vec<f64>>,
}

impl ProbeTable {
    pub fn cell(&self, row: usize, fcr: u64) -> f64 {
        self.q[row][fcr as usize]
    }

    pub fn render(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.label.len())
            .max()
            .unwrap_or(3)
            .max(3);
        let mut s = format!("{:<width$}", "FCD");
        for f in 0..=PROBE_FCR_MAX {
            write!(s, " | FCR={f:<4}").unwrap();
        }
        s.push('\n');
        for (row, qs) in self.rows.iter().zip(&self.q) {
            write!(s, "{:<width$}", row.label).unwrap();
            for q in qs {
                write!(s, " | {q:>8.2}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(path)?;
        w.write_record(["fcd", "fcr", "q"])?;
        for (row, qs) in self.rows.iter().zip(&self.q) {
            for (f, q) in qs.iter().enumerate() {
                w.write_record([row.label.clone(), f.to_string(), q.to_string()])?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Q-value of every (FCD pattern, FCR) cell, averaged over `texts`.
pub fn cmd_probe(
    model: &Model,
    extractor: &FeatureExtractor,
    texts: &[String],
) -> Result<ProbeTable> {
    let cfg = *extractor.config();
    if model.net.architecture().features != cfg {
        return Err(Error::shape(format!(
            "model expects features {:?}, probe built {:?}",
            model.net.architecture().features,
            cfg
        )));
    }
    if texts.is_empty() {
        return Err(Error::usage("probe needs at least one text"));
    }
    let rows = probe_rows();
    let mut q = Vec::with_capacity(rows.len());
    for row in &rows {
        let fcd = row.fcd(cfg.generations, cfg.buckets);
        let mut line = Vec::new();
        for fcr in 0..=PROBE_FCR_MAX {
            let mut sum = 0.0;
            for t in texts {
                let b = extractor.synthetic_bundle(t, fcr, fcd.clone())?;
                sum += model.net.forward(&b)?;
            }
            line.push(sum / texts.len() as f64);
        }
        q.push(line);
    }
    Ok(ProbeTable { rows, q })
}
