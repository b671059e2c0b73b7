use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use qexplore_core::harness::{
    cmd_baseline, cmd_gen, cmd_probe, cmd_stats, cmd_test, cmd_train, crossval,
    expected_action_stats, load_corpus, probe_texts, verify_manifest, write_curves_csv,
    write_traces, BatchReport, CorpusApp, ExperimentConfig,
};
use qexplore_core::{GenParams, Model};

#[derive(Parser)]
#[command(
    name = "qexplore",
    version,
    about = "Q-learning GUI exploration on synthetic apps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded corpus of synthetic apps plus a manifest.
    Gen(GenArgs),
    /// Train a model over a corpus, resuming from an existing checkpoint.
    Train(TrainArgs),
    /// Explore each app from a trained checkpoint.
    Test(TestArgs),
    /// Explore each app with the uniform-random policy.
    Baseline(BaselineArgs),
    /// Tabulate Q values over a grid of synthetic feature bundles.
    Probe(ProbeArgs),
    /// Expected-action statistics from trace logs.
    Stats(StatsArgs),
    /// Two-fold train/test/baseline protocol over one corpus.
    Crossval(CrossvalArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    pages: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    crashes: Option<usize>,
    /// Probability that a widget label matches what the widget does.
    #[arg(long)]
    vocab_weight: Option<f64>,
    /// Only check that the files in --out match their manifest.
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct RunArgs {
    /// Master seed for models and episodes.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iterations per episode.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Word-vector table (`word v1 v2 ...` per line); hashed vectors otherwise.
    #[arg(long)]
    embedding: Option<PathBuf>,
    /// Zero out one feature family (repeatable): fcr, fcd or txc.
    #[arg(long = "disable-feature", value_name = "FEATURE")]
    disable_feature: Vec<String>,
    #[arg(long)]
    repeats: Option<usize>,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig {
            master_seed: self.seed,
            embedding: self.embedding.clone(),
            ..ExperimentConfig::default()
        };
        if let Some(v) = self.steps {
            cfg.agent.step_limit = v;
        }
        if let Some(v) = self.epsilon {
            cfg.agent.epsilon = v;
        }
        if let Some(v) = self.gamma {
            cfg.agent.gamma = v;
        }
        if let Some(v) = self.repeats {
            cfg.repeats = v;
        }
        for f in &self.disable_feature {
            cfg.mask.disable(f)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Directory for the training coverage curves.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Passes over the training apps.
    #[arg(long, default_value_t = 1)]
    epochs: usize,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct TestArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Keep updating one model across apps instead of reloading it per app.
    #[arg(long)]
    carry_model: bool,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct ProbeArgs {
    #[arg(long)]
    model: PathBuf,
    /// Corpus whose home-page labels supply the probe texts.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct StatsArgs {
    /// Trace logs, or directories of `.jsonl` logs.
    #[arg(required = true)]
    logs: Vec<PathBuf>,
}

#[derive(Args)]
struct CrossvalArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    epochs: usize,
    #[command(flatten)]
    run: RunArgs,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Train(a) => train(a),
        Command::Test(a) => test(a),
        Command::Baseline(a) => baseline(a),
        Command::Probe(a) => probe(a),
        Command::Stats(a) => stats(a),
        Command::Crossval(a) => cross(a),
    }
}

fn gen(a: GenArgs) -> Result<ExitCode> {
    if a.verify {
        let bad = verify_manifest(&a.out)?;
        if bad.is_empty() {
            println!("manifest ok");
            return Ok(ExitCode::SUCCESS);
        }
        for f in &bad {
            eprintln!("checksum mismatch: {f}");
        }
        return Ok(ExitCode::FAILURE);
    }
    let mut params = GenParams::default();
    if let Some(v) = a.pages {
        params.page_count = v;
    }
    if let Some(v) = a.depth {
        params.depth = v;
    }
    if let Some(v) = a.crashes {
        params.crash_count = v;
    }
    if let Some(v) = a.vocab_weight {
        params.functional_vocab_weight = v;
    }
    let manifest = cmd_gen(&params, a.count, a.seed, &a.out)?;
    println!("wrote {} apps to {}", manifest.apps.len(), a.out.display());
    Ok(ExitCode::SUCCESS)
}

fn corpus(dir: &Path) -> Result<Vec<CorpusApp>> {
    load_corpus(dir).with_context(|| format!("loading corpus {}", dir.display()))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// Writes curves and traces; reports per-app failures and turns them into a
/// nonzero exit once everything else is on disk.
fn emit(report: &BatchReport, out: &Path, name: &str) -> Result<ExitCode> {
    create_dir(out)?;
    write_curves_csv(&out.join(format!("{name}.csv")), &report.runs)?;
    write_traces(&out.join(format!("{name}_traces")), &report.runs)?;
    for (app, final_cov) in report.per_app_final_coverage() {
        println!("{app}\t{final_cov:.4}");
    }
    println!("mean final coverage\t{:.4}", report.mean_final_coverage());
    for (app, err) in &report.failures {
        eprintln!("app {app} failed: {err}");
    }
    Ok(if report.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn train(a: TrainArgs) -> Result<ExitCode> {
    let cfg = ExperimentConfig {
        epochs: a.epochs,
        ..a.run.config()?
    };
    let apps = corpus(&a.corpus)?;
    let report = cmd_train(&apps, &a.model, &cfg)?;
    if let Some(out) = &a.out {
        create_dir(out)?;
        write_curves_csv(&out.join("train.csv"), &report.runs)?;
    }
    println!(
        "trained on {} episodes, {} optimizer steps, checkpoint {}",
        report.runs.len(),
        report.model.adam.step_count(),
        a.model.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn test(a: TestArgs) -> Result<ExitCode> {
    let cfg = ExperimentConfig {
        carry_model: a.carry_model,
        ..a.run.config()?
    };
    let model = Model::load_expecting(&a.model, &cfg.architecture())?;
    let apps = corpus(&a.corpus)?;
    let report = cmd_test(&apps, &model, &cfg)?;
    emit(&report, &a.out, "test")
}

fn baseline(a: BaselineArgs) -> Result<ExitCode> {
    let cfg = a.run.config()?;
    let apps = corpus(&a.corpus)?;
    let report = cmd_baseline(&apps, &cfg)?;
    emit(&report, &a.out, "baseline")
}

fn probe(a: ProbeArgs) -> Result<ExitCode> {
    let cfg = a.run.config()?;
    let model = Model::load_expecting(&a.model, &cfg.architecture())?;
    let texts = match &a.corpus {
        Some(dir) => probe_texts(&corpus(dir)?),
        None => vec![String::new()],
    };
    let table = cmd_probe(&model, &cfg.extractor()?, &texts)?;
    print!("{}", table.render());
    if let Some(out) = &a.out {
        create_dir(out)?;
        table.write_csv(&out.join("probe.csv"))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn trace_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("reading {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "jsonl"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        bail!("no trace logs found");
    }
    Ok(files)
}

fn stats(a: StatsArgs) -> Result<ExitCode> {
    let s = cmd_stats(&trace_files(&a.logs)?)?;
    println!("mixed pages\t{}", s.mixed_pages);
    println!("chose unexecuted\t{:.4}", s.rate());
    println!(
        "random expectation\t{:.4} (sigma {:.4})",
        s.random_expectation, s.random_sigma
    );
    Ok(ExitCode::SUCCESS)
}

fn cross(a: CrossvalArgs) -> Result<ExitCode> {
    let cfg = ExperimentConfig {
        epochs: a.epochs,
        ..a.run.config()?
    };
    let report = crossval(corpus(&a.corpus)?, &cfg)?;
    let mut code = ExitCode::SUCCESS;
    for fold in &report.folds {
        let dir = a.out.join(format!("fold{}", fold.fold));
        create_dir(&dir)?;
        fold.model.save(&dir.join("model.qxp"))?;
        write_curves_csv(&dir.join("train.csv"), &fold.train)?;
        for (name, batch) in [("test", &fold.test), ("baseline", &fold.baseline)] {
            write_curves_csv(&dir.join(format!("{name}.csv")), &batch.runs)?;
            write_traces(&dir.join(format!("{name}_traces")), &batch.runs)?;
            for (app, err) in &batch.failures {
                eprintln!("fold {} {name} app {app} failed: {err}", fold.fold);
                code = ExitCode::FAILURE;
            }
        }
        let agent = expected_action_stats(fold.test.records());
        let random = expected_action_stats(fold.baseline.records());
        println!(
            "fold {}: expected actions agent {:.3}, random {:.3} (analytic {:.3})",
            fold.fold,
            agent.rate(),
            random.rate(),
            agent.random_expectation
        );
    }

    let pairs = report.paired_final_coverage();
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(a.out.join("summary.csv"))?;
    w.write_record(["app", "agent", "random"])?;
    for (app, agent, random) in &pairs {
        w.write_record([app.clone(), agent.to_string(), random.to_string()])?;
    }
    w.flush()?;
    if !pairs.is_empty() {
        let n = pairs.len() as f64;
        let agent = pairs.iter().map(|p| p.1).sum::<f64>() / n;
        let random = pairs.iter().map(|p| p.2).sum::<f64>() / n;
        let wins = pairs.iter().filter(|p| p.1 > p.2).count();
        println!(
            "mean final coverage: agent {agent:.4}, random {random:.4}, uplift {:+.1}%, wins {wins}/{}",
            100.0 * (agent / random - 1.0),
            pairs.len()
        );
    }
    Ok(code)
}
