//! The exploration agent: action selection, rewards, Q targets, replay
//! memory and the per-iteration loop that ties graph, features, network and
//! app together.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::efg::{EventId, ExplorationGraph, PageId, PageSnapshot};
use crate::features::{FeatureBundle, FeatureExtractor};
use crate::nn::{AdamState, Architecture, QNetwork, TrainingSample};
use crate::rng::{seeded, Rng};
use crate::sim::{random_input, SimApp, SystemKind};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub gamma: f64,
    pub epsilon: f64,
    /// Iterations of purely random actions at the start of each episode.
    pub warmup: usize,
    pub reward_pos: f64,
    pub reward_neg: f64,
    /// History samples added to each training batch.
    pub history_batch: usize,
    /// A system event is sent when `t % system_event_period == 0`.
    pub system_event_period: usize,
    pub step_limit: usize,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            gamma: 0.6,
            epsilon: 0.2,
            warmup: 20,
            reward_pos: 5.0,
            reward_neg: -2.0,
            history_batch: 4,
            system_event_period: 10,
            step_limit: 2000,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::usage(format!("gamma {} outside [0, 1]", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::usage(format!(
                "epsilon {} outside [0, 1]",
                self.epsilon
            )));
        }
        if self.system_event_period == 0 {
            return Err(Error::usage("system_event_period must be positive"));
        }
        if !self.reward_pos.is_finite() || !self.reward_neg.is_finite() {
            return Err(Error::usage("rewards must be finite"));
        }
        Ok(())
    }
}

/// `r + gamma * max(next_qs)`, with an empty maximum taken as zero.
pub fn q_target(r: f64, next_qs: &[f64], gamma: f64) -> f64 {
    let max = next_qs.iter().copied().reduce(f64::max).unwrap_or(0.0);
    r + gamma * max
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.is_none_or(|b| v > values[b]) {
            best = Some(i);
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ActionChoice {
    pub index: usize,
    pub was_random: bool,
}

/// Epsilon-greedy selection over `n` candidates. `q_values` is only called
/// when the greedy branch is taken, so the random stream consumed is the
/// same whatever the network computes.
pub fn select_action_with(
    n: usize,
    iteration: usize,
    cfg: &AgentConfig,
    rng: &mut Rng,
    q_values: impl FnOnce() -> Result<Vec<f64>>,
) -> Result<ActionChoice> {
    if n == 0 {
        return Err(Error::usage("no candidate events"));
    }
    let random = |rng: &mut Rng| ActionChoice {
        index: rng.random_range(0..n),
        was_random: true,
    };
    if iteration < cfg.warmup {
        return Ok(random(rng));
    }
    let u: f64 = rng.random();
    if u < cfg.epsilon {
        return Ok(random(rng));
    }
    let qs = q_values()?;
    if qs.len() != n {
        return Err(Error::shape(format!(
            "{} q-values for {n} candidates",
            qs.len()
        )));
    }
    Ok(ActionChoice {
        index: argmax(&qs).expect("non-empty"),
        was_random: false,
    })
}

pub fn select_action(
    q_values: &[f64],
    iteration: usize,
    cfg: &AgentConfig,
    rng: &mut Rng,
) -> Result<ActionChoice> {
    select_action_with(
        q_values.len(),
        iteration,
        cfg,
        rng,
        || Ok(q_values.to_vec()),
    )
}

/// Crash messages seen so far in an episode, matched exactly.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CrashLedger {
    seen: HashSet<String>,
    order: Vec<String>,
}

impl CrashLedger {
    /// Records `message`; true when it had not been seen before.
    pub fn observe(&mut self, message: &str) -> bool {
        if self.seen.contains(message) {
            return false;
        }
        self.seen.insert(message.to_string());
        self.order.push(message.to_string());
        true
    }

    pub fn contains(&self, message: &str) -> bool {
        self.seen.contains(message)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Unique messages in discovery order.
    pub fn messages(&self) -> &[String] {
        &self.order
    }
}

/// `reward_pos` when coverage grew or the crash is new, else `reward_neg`.
/// A new crash message is added to the ledger either way.
pub fn reward(
    coverage_increased: bool,
    crash_message: Option<&str>,
    ledger: &mut CrashLedger,
    cfg: &AgentConfig,
) -> f64 {
    let novel_crash = crash_message.is_some_and(|m| ledger.observe(m));
    if coverage_increased || novel_crash {
        cfg.reward_pos
    } else {
        cfg.reward_neg
    }
}

/// Training samples with targets frozen at insertion.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReplayMemory {
    samples: Vec<TrainingSample>,
}

impl ReplayMemory {
    pub fn new() -> Self {
        ReplayMemory::default()
    }

    pub fn push(&mut self, sample: TrainingSample) {
        self.samples.push(sample);
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[TrainingSample] {
        &self.samples
    }
}

/// The current sample followed by up to `n` distinct history samples drawn
/// uniformly from `memory`.
pub fn sample_batch(
    memory: &ReplayMemory,
    current: TrainingSample,
    n: usize,
    rng: &mut Rng,
) -> Vec<TrainingSample> {
    let k = n.min(memory.len());
    let mut batch = Vec::with_capacity(k + 1);
    batch.push(current);
    for i in rand::seq::index::sample(rng, memory.len(), k) {
        batch.push(memory.samples[i].clone());
    }
    batch
}

/// Network plus optimizer state: everything that persists across apps.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub net: QNetwork,
    pub adam: AdamState,
}

impl Model {
    pub fn new(arch: Architecture, seed: u64) -> Result<Self> {
        let net = QNetwork::new(arch, seed)?;
        let adam = AdamState::new(net.param_count());
        Ok(Model { net, adam })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (net, adam) = crate::nn::load_model(path)?;
        Ok(Model { net, adam })
    }

    pub fn load_expecting(path: &Path, arch: &Architecture) -> Result<Self> {
        let (net, adam) = crate::nn::load_model_expecting(path, arch)?;
        Ok(Model { net, adam })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::nn::save_model(&self.net, &self.adam, path)
    }

    pub fn q_values(&self, bundles: &[FeatureBundle]) -> Result<Vec<f64>> {
        bundles.iter().map(|b| self.net.forward(b)).collect()
    }
}

/// Everything observed in one iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub iteration: usize,
    pub system_event: Option<SystemKind>,
    pub system_crash: Option<String>,
    pub page_id: PageId,
    pub event_id: EventId,
    pub event_index: usize,
    pub was_random: bool,
    pub reward: f64,
    pub coverage: f64,
    pub crash: Option<String>,
    pub unique_crashes: usize,
    pub n_events: usize,
    /// Events on the page whose merge class had never been executed.
    pub n_unexecuted: usize,
    pub chosen_fcr: u64,
    /// Q-value of every candidate on the page before the action; empty for
    /// the random driver.
    pub q_values: Vec<f64>,
    /// Q-values of the resulting page's candidates, before this iteration's
    /// training step.
    pub next_qs: Vec<f64>,
    pub target_q: Option<f64>,
    pub loss: Option<f64>,
}

/// One line of a trace log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub page_id: usize,
    pub event_id: usize,
    pub was_random: bool,
    pub reward: f64,
    pub coverage: f64,
    pub crash: Option<String>,
    pub n_events: usize,
    pub n_unexecuted: usize,
    pub chosen_fcr: u64,
}

impl From<&IterationTrace> for TraceRecord {
    fn from(t: &IterationTrace) -> Self {
        TraceRecord {
            iteration: t.iteration,
            page_id: t.page_id.0,
            event_id: t.event_id.0,
            was_random: t.was_random,
            reward: t.reward,
            coverage: t.coverage,
            crash: t.crash.clone(),
            n_events: t.n_events,
            n_unexecuted: t.n_unexecuted,
            chosen_fcr: t.chosen_fcr,
        }
    }
}

pub fn write_trace_log(path: &Path, traces: &[IterationTrace]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for t in traces {
        serde_json::to_writer(&mut w, &TraceRecord::from(t))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_trace_log(path: &Path) -> Result<Vec<TraceRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| Error::TraceLog {
            path: path.to_path_buf(),
            line: i + 1,
            reason: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

/// Who picks the actions.
pub enum Driver<'a> {
    /// Epsilon-greedy over the network's Q-values, training every iteration.
    Dqn(&'a mut Model),
    /// Uniform random actions; no network, no training.
    Random,
}

/// Per-episode state: graph, replay memory, crash ledger and random stream.
/// Only the model outlives an episode.
pub struct Explorer {
    cfg: AgentConfig,
    extractor: FeatureExtractor,
    graph: ExplorationGraph,
    memory: ReplayMemory,
    ledger: CrashLedger,
    rng: Rng,
    current: PageSnapshot,
    t: usize,
}

impl Explorer {
    /// Launches `app` and observes its first page.
    pub fn start(
        app: &mut SimApp,
        cfg: AgentConfig,
        extractor: FeatureExtractor,
        seed: u64,
    ) -> Result<Self> {
        cfg.validate()?;
        let mut graph = ExplorationGraph::new(extractor.config().generations);
        let first = app.launch();
        let current = graph.update_graph(None, &first)?;
        Ok(Explorer {
            cfg,
            extractor,
            graph,
            memory: ReplayMemory::new(),
            ledger: CrashLedger::default(),
            rng: seeded(seed),
            current,
            t: 0,
        })
    }

    pub fn graph(&self) -> &ExplorationGraph {
        &self.graph
    }

    pub fn memory(&self) -> &ReplayMemory {
        &self.memory
    }

    pub fn ledger(&self) -> &CrashLedger {
        &self.ledger
    }

    pub fn current_page(&self) -> &PageSnapshot {
        &self.current
    }

    pub fn iteration(&self) -> usize {
        self.t
    }

    fn bundles(&mut self, page: &PageSnapshot) -> Result<Vec<FeatureBundle>> {
        page.events
            .iter()
            .map(|e| self.extractor.bundle(&self.graph, e.event_id))
            .collect()
    }

    /// One iteration: optional system event, action, reward, graph update
    /// and (for the DQN driver) one training step.
    pub fn step(&mut self, driver: &mut Driver<'_>, app: &mut SimApp) -> Result<IterationTrace> {
        let t = self.t;
        let mut system_event = None;
        let mut system_crash = None;
        if t.is_multiple_of(self.cfg.system_event_period) {
            let so = app.system_event(&mut self.rng)?;
            system_event = Some(so.kind);
            if let Some(msg) = so.outcome.crash_message {
                self.ledger.observe(&msg);
                self.current = self.graph.update_graph(None, &so.outcome.page)?;
                system_crash = Some(msg);
            }
        }

        let page = self.current.clone();
        let bundles = self.bundles(&page)?;
        let n = page.events.len();
        let q_values = match driver {
            Driver::Dqn(model) => model.q_values(&bundles)?,
            Driver::Random => Vec::new(),
        };
        let choice = match driver {
            Driver::Dqn(_) => {
                select_action_with(n, t, &self.cfg, &mut self.rng, || Ok(q_values.clone()))?
            }
            Driver::Random => ActionChoice {
                index: self.rng.random_range(0..n),
                was_random: true,
            },
        };
        let chosen = &page.events[choice.index];
        let event_id = chosen.event_id;
        let input = chosen
            .kind
            .accepts_input()
            .then(|| random_input(&mut self.rng));
        let chosen_fcr = self.graph.fcr(event_id)?;
        let n_unexecuted = page
            .events
            .iter()
            .map(|e| self.graph.fcr(e.event_id))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|&c| c == 0)
            .count();

        let outcome = app.execute(choice.index, input.as_deref())?;
        let r = reward(
            outcome.coverage_increased,
            outcome.crash_message.as_deref(),
            &mut self.ledger,
            &self.cfg,
        );
        let next = self.graph.update_graph(Some(event_id), &outcome.page)?;
        self.graph.record_execution(event_id)?;

        let (mut next_qs, mut target_q, mut loss) = (Vec::new(), None, None);
        if let Driver::Dqn(model) = driver {
            // Features of the chosen event as they were when it was chosen.
            let current = bundles[choice.index].clone();
            let next_bundles = self.bundles(&next)?;
            next_qs = model.q_values(&next_bundles)?;
            let target = q_target(r, &next_qs, self.cfg.gamma);
            let sample = TrainingSample {
                bundle: current,
                target_q: target,
            };
            let batch = sample_batch(
                &self.memory,
                sample.clone(),
                self.cfg.history_batch,
                &mut self.rng,
            );
            let Model { net, adam } = &mut **model;
            loss = Some(net.train_batch(adam, &batch)?);
            self.memory.push(sample);
            target_q = Some(target);
        }

        self.current = next;
        self.t += 1;
        Ok(IterationTrace {
            iteration: t,
            system_event,
            system_crash,
            page_id: page.page_id,
            event_id,
            event_index: choice.index,
            was_random: choice.was_random,
            reward: r,
            coverage: outcome.coverage,
            crash: outcome.crash_message,
            unique_crashes: self.ledger.len(),
            n_events: n,
            n_unexecuted,
            chosen_fcr,
            q_values,
            next_qs,
            target_q,
            loss,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeReport {
    /// Coverage after each iteration.
    pub coverage: Vec<f64>,
    /// Unique crash messages in discovery order.
    pub crashes: Vec<String>,
    pub traces: Vec<IterationTrace>,
    /// Coverage right after launch, before any iteration.
    pub initial_coverage: f64,
}

impl EpisodeReport {
    pub fn final_coverage(&self) -> f64 {
        self.coverage
            .last()
            .copied()
            .unwrap_or(self.initial_coverage)
    }
}

/// Runs a fresh episode of `cfg.step_limit` iterations on `app`.
pub fn run_episode(
    driver: &mut Driver<'_>,
    app: &mut SimApp,
    cfg: &AgentConfig,
    extractor: FeatureExtractor,
    seed: u64,
) -> Result<EpisodeReport> {
    let mut explorer = Explorer::start(app, cfg.clone(), extractor, seed)?;
    let initial_coverage = app.coverage();
    let mut traces = Vec::with_capacity(cfg.step_limit);
    for _ in 0..cfg.step_limit {
        traces.push(explorer.step(driver, app)?);
    }
    Ok(EpisodeReport {
        coverage: traces.iter().map(|t| t.coverage).collect(),
        crashes: explorer.ledger.messages().to_vec(),
        traces,
        initial_coverage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{EmbeddingProvider, FeatureConfig, FeatureMask};
    use crate::sim::fixtures;
    use std::cell::Cell;

    fn extractor() -> FeatureExtractor {
        let cfg = FeatureConfig::default();
        FeatureExtractor::new(
            cfg,
            EmbeddingProvider::hashed(cfg.embedding_dim),
            FeatureMask::default(),
        )
        .unwrap()
    }

    fn model(seed: u64) -> Model {
        Model::new(Architecture::default(), seed).unwrap()
    }

    fn sample(target: f64) -> TrainingSample {
        TrainingSample {
            bundle: FeatureBundle::zeros(&FeatureConfig::default()),
            target_q: target,
        }
    }

    #[test]
    fn q_target_examples() {
        assert!((q_target(5.0, &[1.0, 3.0, 2.0], 0.6) - 6.8).abs() < 1e-12);
        assert_eq!(q_target(-2.0, &[], 0.6), -2.0);
        assert_eq!(q_target(5.0, &[100.0, -3.0], 0.0), 5.0);
    }

    #[test]
    fn greedy_ties_go_low() {
        let cfg = AgentConfig {
            epsilon: 0.0,
            ..AgentConfig::default()
        };
        let mut rng = seeded(0);
        let c = select_action(&[0.1, 0.9, 0.9], 20, &cfg, &mut rng).unwrap();
        assert_eq!(
            c,
            ActionChoice {
                index: 1,
                was_random: false
            }
        );
        assert!(select_action(&[], 20, &cfg, &mut rng).is_err());
    }

    #[test]
    fn full_exploration_never_reads_q_values() {
        let cfg = AgentConfig {
            epsilon: 1.0,
            ..AgentConfig::default()
        };
        let mut rng = seeded(1);
        let calls = Cell::new(0);
        for t in 0..500 {
            let c = select_action_with(4, t, &cfg, &mut rng, || {
                calls.set(calls.get() + 1);
                Ok(vec![0.0; 4])
            })
            .unwrap();
            assert!(c.was_random);
        }
        assert_eq!(calls.get(), 0);
    }

    #[test]
    fn reward_table() {
        let cfg = AgentConfig::default();
        let mut ledger = CrashLedger::default();
        assert_eq!(reward(true, None, &mut ledger, &cfg), 5.0);
        assert_eq!(reward(false, None, &mut ledger, &cfg), -2.0);
        assert_eq!(
            reward(false, Some("NullPointer at X"), &mut ledger, &cfg),
            5.0
        );
        assert!(ledger.contains("NullPointer at X"));
        assert_eq!(
            reward(false, Some("NullPointer at X"), &mut ledger, &cfg),
            -2.0
        );
        assert_eq!(
            reward(true, Some("NullPointer at X"), &mut ledger, &cfg),
            5.0
        );
        assert_eq!(reward(true, Some("other"), &mut ledger, &cfg), 5.0);
        assert_eq!(ledger.messages(), ["NullPointer at X", "other"]);
    }

    #[test]
    fn batch_sizes() {
        let mut rng = seeded(2);
        let mut mem = ReplayMemory::new();
        assert_eq!(
            sample_batch(&mem, sample(9.0), 4, &mut rng),
            vec![sample(9.0)]
        );
        mem.push(sample(1.0));
        mem.push(sample(2.0));
        assert_eq!(sample_batch(&mem, sample(9.0), 4, &mut rng).len(), 3);
        let mut big = ReplayMemory::new();
        for i in 0..100 {
            big.push(sample(i as f64));
        }
        for _ in 0..1000 {
            let b = sample_batch(&big, sample(-1.0), 4, &mut rng);
            assert_eq!(b.len(), 5);
            assert_eq!(b[0].target_q, -1.0);
            let mut ts: Vec<i64> = b[1..].iter().map(|s| s.target_q as i64).collect();
            ts.sort();
            ts.dedup();
            assert_eq!(ts.len(), 4);
        }
    }

    #[test]
    fn first_iteration_trains_on_one_sample() {
        let mut app = SimApp::new(fixtures::three_page()).unwrap();
        let mut m = model(3);
        let mut ex = Explorer::start(&mut app, AgentConfig::default(), extractor(), 9).unwrap();
        let trace = ex.step(&mut Driver::Dqn(&mut m), &mut app).unwrap();
        assert!(trace.was_random);
        assert!(trace.system_event.is_some());
        assert_eq!(ex.memory().len(), 1);
        assert_eq!(m.adam.step_count(), 1);
        assert_eq!(trace.q_values.len(), trace.n_events);
    }

    #[test]
    fn system_events_follow_period() {
        let mut app = SimApp::new(fixtures::three_page()).unwrap();
        let cfg = AgentConfig {
            step_limit: 35,
            ..AgentConfig::default()
        };
        let r = run_episode(&mut Driver::Random, &mut app, &cfg, extractor(), 4).unwrap();
        for t in &r.traces {
            assert_eq!(t.system_event.is_some(), t.iteration % 10 == 0);
        }
    }

    #[test]
    fn zero_steps_leaves_model_unchanged() {
        let mut app = SimApp::new(fixtures::motivating()).unwrap();
        let mut m = model(5);
        let before = m.clone();
        let cfg = AgentConfig {
            step_limit: 0,
            ..AgentConfig::default()
        };
        let r = run_episode(&mut Driver::Dqn(&mut m), &mut app, &cfg, extractor(), 1).unwrap();
        assert!(r.coverage.is_empty());
        assert_eq!(m, before);
    }

    #[test]
    fn episodes_are_reproducible_and_isolated() {
        let cfg = AgentConfig {
            step_limit: 120,
            ..AgentConfig::default()
        };
        let run = || {
            let mut app = SimApp::new(fixtures::crash_app()).unwrap();
            let mut m = model(11);
            let a = run_episode(&mut Driver::Dqn(&mut m), &mut app, &cfg, extractor(), 6).unwrap();
            let b = run_episode(&mut Driver::Dqn(&mut m), &mut app, &cfg, extractor(), 6).unwrap();
            (a, b, m)
        };
        let (a1, b1, m1) = run();
        let (a2, b2, m2) = run();
        assert_eq!(a1, a2);
        assert_eq!(b1, b2);
        assert_eq!(m1, m2);
        // A second episode starts from a fresh graph: its first page is new again.
        assert_eq!(b1.traces[0].page_id, PageId(0));
        assert!(a1.coverage.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn warmup_ignores_network() {
        let cfg = AgentConfig {
            step_limit: 20,
            ..AgentConfig::default()
        };
        let actions = |seed| {
            let mut app = SimApp::new(fixtures::three_page()).unwrap();
            let mut m = model(seed);
            let r = run_episode(&mut Driver::Dqn(&mut m), &mut app, &cfg, extractor(), 8).unwrap();
            r.traces
                .iter()
                .map(|t| (t.page_id, t.event_index))
                .collect::<Vec<_>>()
        };
        assert_eq!(actions(1), actions(2));
    }

    #[test]
    fn trace_log_round_trip() {
        let mut app = SimApp::new(fixtures::three_page()).unwrap();
        let cfg = AgentConfig {
            step_limit: 15,
            ..AgentConfig::default()
        };
        let r = run_episode(&mut Driver::Random, &mut app, &cfg, extractor(), 4).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.jsonl");
        write_trace_log(&path, &r.traces).unwrap();
        let back = read_trace_log(&path).unwrap();
        assert_eq!(back.len(), 15);
        assert_eq!(back[3], TraceRecord::from(&r.traces[3]));

        std::fs::write(&path, "{\"iteration\":0}\nnot json\n").unwrap();
        match read_trace_log(&path) {
            Err(Error::TraceLog { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected trace log error, got {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        assert!(AgentConfig {
            gamma: 1.5,
            ..AgentConfig::default()
        }
        .validate()
        .is_err());
        assert!(AgentConfig {
            epsilon: -0.1,
            ..AgentConfig::default()
        }
        .validate()
        .is_err());
        assert!(AgentConfig {
            system_event_period: 0,
            ..AgentConfig::default()
        }
        .validate()
        .is_err());
        assert!(AgentConfig::default().validate().is_ok());
    }
}
