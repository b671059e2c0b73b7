use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::corpus::{split_folds, CorpusApp};
use super::ExperimentConfig;
use crate::agent::{run_episode, Driver, EpisodeReport, Model, TraceRecord};
use crate::rng::derive_seed;
use crate::sim::{AppSpec, SimApp};
use crate::{Error, Result};

pub const CSV_HEADER: [&str; 5] = ["app", "repeat", "iteration", "coverage", "unique_crashes"];

/// One episode on one app, reduced to what reports need.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeRun {
    pub app: String,
    pub repeat: usize,
    pub initial_coverage: f64,
    pub coverage: Vec<f64>,
    pub unique_crashes: Vec<usize>,
    pub crashes: Vec<String>,
    pub records: Vec<TraceRecord>,
}

impl EpisodeRun {
    fn new(app: &str, repeat: usize, report: EpisodeReport) -> Self {
        EpisodeRun {
            app: app.to_string(),
            repeat,
            initial_coverage: report.initial_coverage,
            unique_crashes: report.traces.iter().map(|t| t.unique_crashes).collect(),
            records: report.traces.iter().map(TraceRecord::from).collect(),
            coverage: report.coverage,
            crashes: report.crashes,
        }
    }

    pub fn final_coverage(&self) -> f64 {
        self.coverage
            .last()
            .copied()
            .unwrap_or(self.initial_coverage)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BatchReport {
    /// Ordered by app, then repeat.
    pub runs: Vec<EpisodeRun>,
    /// Apps that could not be run, with the reason.
    pub failures: Vec<(String, String)>,
}

impl BatchReport {
    /// Mean final coverage over repeats, per app, in run order.
    pub fn per_app_final_coverage(&self) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64, usize)> = Vec::new();
        for r in &self.runs {
            match out.last_mut() {
                Some((app, sum, n)) if *app == r.app => {
                    *sum += r.final_coverage();
                    *n += 1;
                }
                _ => out.push((r.app.clone(), r.final_coverage(), 1)),
            }
        }
        out.into_iter().map(|(a, s, n)| (a, s / n as f64)).collect()
    }

    pub fn mean_final_coverage(&self) -> f64 {
        let per_app = self.per_app_final_coverage();
        if per_app.is_empty() {
            return 0.0;
        }
        per_app.iter().map(|(_, c)| c).sum::<f64>() / per_app.len() as f64
    }

    pub fn records(&self) -> impl Iterator<Item = &TraceRecord> {
        self.runs.iter().flat_map(|r| r.records.iter())
    }
}

fn episode_seed(cfg: &ExperimentConfig, tag: &str, app: &str, index: usize) -> u64 {
    derive_seed(cfg.master_seed, &format!("{tag}/{app}"), index as u64)
}

fn spec_of(app: &CorpusApp) -> std::result::Result<&AppSpec, String> {
    app.spec.as_ref().map_err(|e| e.to_string())
}

#[derive(Debug)]
pub struct TrainReport {
    pub model: Model,
    pub runs: Vec<EpisodeRun>,
}

fn train_model(
    model: &mut Model,
    apps: &[CorpusApp],
    cfg: &ExperimentConfig,
) -> Result<Vec<EpisodeRun>> {
    cfg.validate()?;
    if model.net.architecture() != &cfg.architecture() {
        return Err(Error::ArchitectureMismatch {
            expected: format!("{:?}", cfg.architecture()),
            found: format!("{:?}", model.net.architecture()),
        });
    }
    let valid: Vec<(&str, &AppSpec)> = apps
        .iter()
        .filter_map(|a| a.spec.as_ref().ok().map(|s| (a.name.as_str(), s)))
        .collect();
    if let Some(bad) = apps.iter().find(|a| a.spec.is_err()) {
        return Err(Error::usage(format!(
            "training app {} failed to load: {}",
            bad.name,
            spec_of(bad).unwrap_err()
        )));
    }
    if valid.is_empty() {
        return Err(Error::usage("training corpus is empty"));
    }
    let mut runs = Vec::new();
    for epoch in 0..cfg.epochs {
        for (name, spec) in &valid {
            let mut app = SimApp::new((*spec).clone())?;
            let seed = episode_seed(cfg, "train", name, epoch);
            let report = run_episode(
                &mut Driver::Dqn(model),
                &mut app,
                &cfg.agent,
                cfg.extractor()?,
                seed,
            )?;
            runs.push(EpisodeRun::new(name, epoch, report));
        }
    }
    Ok(runs)
}

/// Trains sequentially over `apps`, resuming from `model_path` when it
/// exists, and writes the checkpoint back.
pub fn cmd_train(
    apps: &[CorpusApp],
    model_path: &Path,
    cfg: &ExperimentConfig,
) -> Result<TrainReport> {
    let mut model = if model_path.exists() {
        Model::load_expecting(model_path, &cfg.architecture())?
    } else {
        Model::new(cfg.architecture(), derive_seed(cfg.master_seed, "model", 0))?
    };
    let runs = train_model(&mut model, apps, cfg)?;
    model.save(model_path)?;
    Ok(TrainReport { model, runs })
}

fn run_batch(
    apps: &[CorpusApp],
    model: Option<&Model>,
    cfg: &ExperimentConfig,
) -> Result<BatchReport> {
    cfg.validate()?;
    let extractor = cfg.extractor()?;
    let tag = if model.is_some() { "test" } else { "baseline" };
    let mut report = BatchReport::default();
    let mut jobs = Vec::new();
    for app in apps {
        match spec_of(app) {
            Ok(spec) => jobs.extend((0..cfg.repeats).map(|r| (app.name.as_str(), spec, r))),
            Err(e) => report.failures.push((app.name.clone(), e)),
        }
    }

    let one = |name: &str,
               spec: &AppSpec,
               repeat: usize,
               model: Option<&mut Model>|
     -> Result<EpisodeRun> {
        let mut app = SimApp::new(spec.clone())?;
        let mut driver = match model {
            Some(m) => Driver::Dqn(m),
            None => Driver::Random,
        };
        let seed = episode_seed(cfg, tag, name, repeat);
        let r = run_episode(&mut driver, &mut app, &cfg.agent, extractor.clone(), seed)?;
        Ok(EpisodeRun::new(name, repeat, r))
    };

    let mut results: Vec<(usize, String, Result<EpisodeRun>)> = match model {
        Some(m) if cfg.carry_model => {
            let mut out = Vec::new();
            for repeat in 0..cfg.repeats {
                let mut carried = m.clone();
                for (i, &(name, spec, r)) in jobs.iter().enumerate().filter(|(_, j)| j.2 == repeat)
                {
                    out.push((i, name.to_string(), one(name, spec, r, Some(&mut carried))));
                }
            }
            out
        }
        _ => jobs
            .par_iter()
            .enumerate()
            .map(|(i, &(name, spec, repeat))| {
                let mut fresh = model.cloned();
                (i, name.to_string(), one(name, spec, repeat, fresh.as_mut()))
            })
            .collect(),
    };
    results.sort_by_key(|(i, _, _)| *i);
    for (_, name, r) in results {
        match r {
            Ok(run) => report.runs.push(run),
            Err(e) => {
                if !report.failures.iter().any(|(n, _)| *n == name) {
                    report.failures.push((name, e.to_string()));
                }
            }
        }
    }
    Ok(report)
}

/// Runs the trained model on every app and repeat. Each episode starts from
/// its own copy of `model` unless `carry_model` is set.
pub fn cmd_test(apps: &[CorpusApp], model: &Model, cfg: &ExperimentConfig) -> Result<BatchReport> {
    if model.net.architecture() != &cfg.architecture() {
        return Err(Error::ArchitectureMismatch {
            expected: format!("{:?}", cfg.architecture()),
            found: format!("{:?}", model.net.architecture()),
        });
    }
    run_batch(apps, Some(model), cfg)
}

/// Same loop as [`cmd_test`] with uniform random actions.
pub fn cmd_baseline(apps: &[CorpusApp], cfg: &ExperimentConfig) -> Result<BatchReport> {
    run_batch(apps, None, cfg)
}

pub fn write_curves_csv(path: &Path, runs: &[EpisodeRun]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for run in runs {
        for (i, (cov, crashes)) in run.coverage.iter().zip(&run.unique_crashes).enumerate() {
            w.write_record([
                run.app.clone(),
                run.repeat.to_string(),
                i.to_string(),
                cov.to_string(),
                crashes.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One JSONL trace log per run: `<app>_r<repeat>.jsonl`.
pub fn write_traces(dir: &Path, runs: &[EpisodeRun]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for run in runs {
        let path = dir.join(format!("{}_r{}.jsonl", run.app, run.repeat));
        write_records(&path, &run.records)?;
    }
    Ok(())
}

fn write_records(path: &Path, records: &[TraceRecord]) -> Result<()> {
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r)?);
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug)]
pub struct FoldReport {
    /// The fold the model was trained on (1 = even seeds).
    pub fold: usize,
    pub train_apps: Vec<String>,
    pub test_apps: Vec<String>,
    pub model: Model,
    pub train: Vec<EpisodeRun>,
    pub test: BatchReport,
    pub baseline: BatchReport,
}

#[derive(Debug)]
pub struct CrossvalReport {
    pub folds: Vec<FoldReport>,
}

impl CrossvalReport {
    /// Per-app (agent, random) mean final coverage over both test folds.
    pub fn paired_final_coverage(&self) -> Vec<(String, f64, f64)> {
        let mut out = Vec::new();
        for f in &self.folds {
            let base = f.baseline.per_app_final_coverage();
            for (app, agent) in f.test.per_app_final_coverage() {
                if let Some((_, random)) = base.iter().find(|(a, _)| *a == app) {
                    out.push((app, agent, *random));
                }
            }
        }
        out
    }
}

/// Two-fold protocol: train on one seed-parity half, test and run the
/// random baseline on the other, then swap. The two folds run in parallel.
pub fn crossval(apps: Vec<CorpusApp>, cfg: &ExperimentConfig) -> Result<CrossvalReport> {
    let (one, two) = split_folds(apps);
    let folds = [(1usize, &one, &two), (2, &two, &one)]
        .into_par_iter()
        .map(|(fold, train, test)| {
            let seed = derive_seed(cfg.master_seed, "model", fold as u64);
            let mut model = Model::new(cfg.architecture(), seed)?;
            let train_runs = train_model(&mut model, train, cfg)?;
            let test_report = cmd_test(test, &model, cfg)?;
            let baseline = cmd_baseline(test, cfg)?;
            Ok(FoldReport {
                fold,
                train_apps: train.iter().map(|a| a.name.clone()).collect(),
                test_apps: test.iter().map(|a| a.name.clone()).collect(),
                model,
                train: train_runs,
                test: test_report,
                baseline,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CrossvalReport { folds })
}
