use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::rng::derive_seed;
use crate::sim::{generate_app, AppSpec, GenParams};
use crate::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub seed: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub master_seed: u64,
    pub params: GenParams,
    pub apps: Vec<ManifestEntry>,
}

/// Seed of the `index`-th corpus app. The low bit alternates with the index
/// so that splitting by seed parity gives two equal folds.
pub fn app_seed(master: u64, index: usize) -> u64 {
    (derive_seed(master, "app", index as u64) & !1) | (index as u64 & 1)
}

/// Fold 1 holds even seeds, fold 2 odd ones.
pub fn fold_of(seed: u64) -> usize {
    if seed.is_multiple_of(2) {
        1
    } else {
        2
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `count` generated apps and a manifest into `out_dir`.
pub fn cmd_gen(
    params: &GenParams,
    count: usize,
    master_seed: u64,
    out_dir: &Path,
) -> Result<Manifest> {
    params.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut apps = Vec::with_capacity(count);
    for i in 0..count {
        let seed = app_seed(master_seed, i);
        let spec = generate_app(&GenParams {
            seed,
            ..params.clone()
        })?;
        let text = spec.to_json();
        let file = format!("app_{i:03}.json");
        let path = out_dir.join(&file);
        fs::write(&path, &text).map_err(|e| Error::io(&path, e))?;
        apps.push(ManifestEntry {
            file,
            seed,
            sha256: sha256_hex(text.as_bytes()),
        });
    }
    let manifest = Manifest {
        master_seed,
        params: GenParams {
            seed: master_seed,
            ..params.clone()
        },
        apps,
    };
    let path = out_dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

/// Checks every manifest entry against the file on disk and against a fresh
/// regeneration from its seed. Returns the names of mismatching apps.
pub fn verify_manifest(dir: &Path) -> Result<Vec<String>> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    let mut bad = Vec::new();
    for entry in &manifest.apps {
        let file = dir.join(&entry.file);
        let on_disk = fs::read(&file).map_err(|e| Error::io(&file, e))?;
        let regenerated = generate_app(&GenParams {
            seed: entry.seed,
            ..manifest.params.clone()
        })?
        .to_json();
        if sha256_hex(&on_disk) != entry.sha256
            || sha256_hex(regenerated.as_bytes()) != entry.sha256
        {
            bad.push(entry.file.clone());
        }
    }
    Ok(bad)
}

#[derive(Debug)]
pub struct CorpusApp {
    pub name: String,
    pub path: PathBuf,
    pub spec: Result<AppSpec>,
}

impl CorpusApp {
    pub fn seed(&self) -> Option<u64> {
        self.spec.as_ref().ok().and_then(|s| s.seed)
    }
}

/// Loads every `*.json` app in `dir` (the manifest excepted), sorted by file
/// name. A file that fails to parse is kept with its error so callers can
/// report it per app.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusApp>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_app = path.extension().is_some_and(|x| x == "json")
            && path.file_name().is_some_and(|n| n != MANIFEST_FILE);
        if is_app {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths
        .into_iter()
        .map(|path| CorpusApp {
            name: path.file_stem().unwrap().to_string_lossy().into_owned(),
            spec: AppSpec::load(&path),
            path,
        })
        .collect())
}

/// Splits apps by seed parity into (fold 1, fold 2). Apps without a seed are
/// split by position.
pub fn split_folds(apps: Vec<CorpusApp>) -> (Vec<CorpusApp>, Vec<CorpusApp>) {
    let mut one = Vec::new();
    let mut two = Vec::new();
    for (i, app) in apps.into_iter().enumerate() {
        let fold = app.seed().map(fold_of).unwrap_or(1 + i % 2);
        if fold == 1 {
            one.push(app);
        } else {
            two.push(app);
        }
    }
    (one, two)
}
