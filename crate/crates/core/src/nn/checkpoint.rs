//! Checkpoint files.
//!
//! Layout: the magic `QXP1` and a newline, `key=value` header lines with the
//! architecture and optimizer hyperparameters, a blank line, then
//! little-endian f64 parameters (network layout order), the Adam first and
//! second moments in the same order, and the Adam step counter as a
//! little-endian u64.

use std::fs;
use std::path::Path;

use super::{AdamState, Architecture, QNetwork};
use crate::features::FeatureConfig;
use crate::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"QXP1";
const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub net: QNetwork,
    pub adam: AdamState,
}

fn header(net: &QNetwork, adam: &AdamState) -> String {
    let a = net.architecture();
    let widths: Vec<String> = a.widths.iter().map(|w| w.to_string()).collect();
    let mut h = String::new();
    let mut kv = |k: &str, v: String| {
        h.push_str(k);
        h.push('=');
        h.push_str(&v);
        h.push('\n');
    };
    kv("format", FORMAT_VERSION.to_string());
    kv("embedding_dim", a.features.embedding_dim.to_string());
    kv("max_words", a.features.max_words.to_string());
    kv("generations", a.features.generations.to_string());
    kv("buckets", a.features.buckets.to_string());
    kv("filters", a.filters.to_string());
    kv("widths", widths.join(","));
    kv("fcr_hidden", a.fcr_hidden.to_string());
    kv("fcd_hidden", a.fcd_hidden.to_string());
    kv("hidden1", a.hidden1.to_string());
    kv("hidden2", a.hidden2.to_string());
    kv("concat", "txc,fcr,fcd".into());
    kv("count_input", "ln1p".into());
    kv("activation", "relu".into());
    kv("params", net.param_count().to_string());
    kv("adam_lr", format!("{:?}", adam.lr));
    kv("adam_beta1", format!("{:?}", adam.beta1));
    kv("adam_beta2", format!("{:?}", adam.beta2));
    kv("adam_epsilon", format!("{:?}", adam.epsilon));
    h
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.net.param_count();
        let mut out = Vec::with_capacity(64 + 24 * n);
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.push(b'\n');
        out.extend_from_slice(header(&self.net, &self.adam).as_bytes());
        out.push(b'\n');
        for block in [self.net.params(), &self.adam.m, &self.adam.v] {
            for v in block {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out.extend_from_slice(&self.adam.step.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Checkpoint(m.to_string());
        let rest = bytes
            .strip_prefix(CHECKPOINT_MAGIC.as_slice())
            .and_then(|r| r.strip_prefix(b"\n"))
            .ok_or_else(|| bad("missing QXP1 magic"))?;
        let end = rest
            .windows(2)
            .position(|w| w == b"\n\n")
            .ok_or_else(|| bad("unterminated header"))?;
        let text = std::str::from_utf8(&rest[..end + 1]).map_err(|_| bad("header is not UTF-8"))?;
        let body = &rest[end + 2..];

        let mut fields = std::collections::HashMap::new();
        for line in text.lines() {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(&format!("bad header line {line:?}")))?;
            fields.insert(k, v);
        }
        let get = |k: &str| -> Result<&str> {
            fields
                .get(k)
                .copied()
                .ok_or_else(|| Error::Checkpoint(format!("missing header field {k}")))
        };
        let num = |k: &str| -> Result<usize> {
            get(k)?
                .parse()
                .map_err(|_| Error::Checkpoint(format!("bad value for {k}")))
        };
        let float = |k: &str| -> Result<f64> {
            get(k)?
                .parse()
                .map_err(|_| Error::Checkpoint(format!("bad value for {k}")))
        };

        if num("format")? != FORMAT_VERSION as usize {
            return Err(bad("unsupported format version"));
        }
        if get("concat")? != "txc,fcr,fcd"
            || get("count_input")? != "ln1p"
            || get("activation")? != "relu"
        {
            return Err(bad("unsupported network variant"));
        }
        let widths = get("widths")?
            .split(',')
            .map(|w| w.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad("bad widths"))?;
        let arch = Architecture {
            features: FeatureConfig {
                generations: num("generations")?,
                buckets: num("buckets")?,
                embedding_dim: num("embedding_dim")?,
                max_words: num("max_words")?,
            },
            filters: num("filters")?,
            widths,
            fcr_hidden: num("fcr_hidden")?,
            fcd_hidden: num("fcd_hidden")?,
            hidden1: num("hidden1")?,
            hidden2: num("hidden2")?,
        };
        arch.validate()
            .map_err(|e| Error::Checkpoint(format!("invalid architecture: {e}")))?;
        let n = num("params")?;
        if n != arch.param_count() {
            return Err(bad("parameter count does not match architecture"));
        }
        let expected = 3 * n * 8 + 8;
        if body.len() != expected {
            return Err(Error::Checkpoint(format!(
                "payload is {} bytes, expected {expected}",
                body.len()
            )));
        }
        let floats: Vec<f64> = body[..3 * n * 8]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        let step = u64::from_le_bytes(body[3 * n * 8..].try_into().expect("8-byte step"));

        let mut adam = AdamState::with_learning_rate(n, float("adam_lr")?);
        adam.beta1 = float("adam_beta1")?;
        adam.beta2 = float("adam_beta2")?;
        adam.epsilon = float("adam_epsilon")?;
        adam.m = floats[n..2 * n].to_vec();
        adam.v = floats[2 * n..].to_vec();
        adam.step = step;
        let net = QNetwork::from_params(arch, floats[..n].to_vec())?;
        Ok(Checkpoint { net, adam })
    }
}

pub fn save_model(net: &QNetwork, adam: &AdamState, path: &Path) -> Result<()> {
    if adam.len() != net.param_count() {
        return Err(Error::shape("optimizer state does not match network"));
    }
    let bytes = Checkpoint {
        net: net.clone(),
        adam: adam.clone(),
    }
    .to_bytes();
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<(QNetwork, AdamState)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let c = Checkpoint::from_bytes(&bytes)?;
    Ok((c.net, c.adam))
}

/// Loads a checkpoint and insists on a specific architecture.
pub fn load_model_expecting(path: &Path, arch: &Architecture) -> Result<(QNetwork, AdamState)> {
    let (net, adam) = load_model(path)?;
    if net.architecture() != arch {
        return Err(Error::ArchitectureMismatch {
            expected: format!("{arch:?}"),
            found: format!("{:?}", net.architecture()),
        });
    }
    Ok((net, adam))
}
