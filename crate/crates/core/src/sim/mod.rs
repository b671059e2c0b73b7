//! Deterministic app simulator: pages, transitions, line coverage, crashes
//! and system events.

pub mod fixtures;
mod generate;
mod spec;

pub use generate::{generate_app, GenParams, DISMISSIVE_WORDS, FUNCTIONAL_WORDS, NEUTRAL_WORDS};
pub use spec::{AppSpec, CoverDef, CrashDef, InputClass, PageDef, SystemKind, TransitionDef};

pub use crate::efg::{RawEvent, RawPage};

use std::collections::HashMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::efg::EventKind;
use crate::rng::Rng;
use crate::{Error, Result};

/// What one execution did to the app.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub page: RawPage,
    pub coverage_increased: bool,
    pub coverage: f64,
    pub crash_message: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemEventOutcome {
    pub kind: SystemKind,
    pub outcome: StepOutcome,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Trigger {
    Event(usize),
    System(SystemKind),
}

#[derive(Clone, Debug, Default)]
struct Tables {
    transitions: HashMap<(usize, usize), Vec<(InputClass, usize)>>,
    cover: HashMap<(usize, Trigger), Vec<usize>>,
    crashes: HashMap<(usize, Trigger), Vec<(InputClass, String)>>,
}

impl Tables {
    fn build(spec: &AppSpec) -> Self {
        let mut t = Tables::default();
        for tr in &spec.transitions {
            t.transitions
                .entry((tr.page, tr.event))
                .or_default()
                .push((tr.input_class, tr.to));
        }
        let trigger = |event: Option<usize>, system: Option<SystemKind>| match (event, system) {
            (Some(e), _) => Trigger::Event(e),
            (None, Some(s)) => Trigger::System(s),
            (None, None) => unreachable!("validated spec"),
        };
        for c in &spec.cover {
            t.cover
                .entry((c.page, trigger(c.event, c.system)))
                .or_default()
                .extend(c.lines.iter().copied());
        }
        for c in &spec.crashes {
            t.crashes
                .entry((c.page, trigger(c.event, c.system)))
                .or_default()
                .push((c.input_class.unwrap_or_default(), c.message.clone()));
        }
        t
    }
}

/// A running app: the spec plus navigation and coverage state.
#[derive(Clone, Debug)]
pub struct SimApp {
    spec: AppSpec,
    tables: Tables,
    page: usize,
    stack: Vec<usize>,
    covered: Vec<bool>,
    covered_count: usize,
    launched: bool,
}

impl SimApp {
    pub fn new(spec: AppSpec) -> Result<Self> {
        spec.validate()?;
        Ok(SimApp {
            tables: Tables::build(&spec),
            page: spec.home,
            stack: Vec::new(),
            covered: vec![false; spec.total_lines],
            covered_count: 0,
            launched: false,
            spec,
        })
    }

    pub fn spec(&self) -> &AppSpec {
        &self.spec
    }

    pub fn current_page_index(&self) -> usize {
        self.page
    }

    pub fn back_stack(&self) -> &[usize] {
        &self.stack
    }

    pub fn coverage(&self) -> f64 {
        self.covered_count as f64 / self.spec.total_lines as f64
    }

    pub fn covered_lines(&self) -> usize {
        self.covered_count
    }

    pub fn raw_page(&self, index: usize) -> RawPage {
        let p = &self.spec.pages[index];
        RawPage {
            activity: p.activity.clone(),
            events: p.events.clone(),
        }
    }

    pub fn current_page(&self) -> RawPage {
        self.raw_page(self.page)
    }

    fn cover(&mut self, lines: &[usize]) -> bool {
        let mut grew = false;
        for &l in lines {
            if !self.covered[l] {
                self.covered[l] = true;
                self.covered_count += 1;
                grew = true;
            }
        }
        grew
    }

    /// Starts a new episode: home page, empty stack, fresh coverage.
    pub fn launch(&mut self) -> RawPage {
        self.covered.iter_mut().for_each(|c| *c = false);
        self.covered_count = 0;
        self.launched = true;
        self.relaunch();
        self.current_page()
    }

    fn relaunch(&mut self) {
        self.page = self.spec.home;
        self.stack.clear();
        let lines = self.spec.launch_lines.clone();
        self.cover(&lines);
    }

    fn run_trigger(&mut self, trigger: Trigger, input: Option<&str>) -> (bool, Option<String>) {
        let lines = self
            .tables
            .cover
            .get(&(self.page, trigger))
            .cloned()
            .unwrap_or_default();
        let grew = self.cover(&lines);
        let crash = self
            .tables
            .crashes
            .get(&(self.page, trigger))
            .and_then(|entries| {
                entries
                    .iter()
                    .find(|(class, _)| class.matches(input))
                    .map(|(_, m)| m.clone())
            });
        (grew, crash)
    }

    fn outcome(&self, coverage_increased: bool, crash_message: Option<String>) -> StepOutcome {
        StepOutcome {
            page: self.current_page(),
            coverage_increased,
            coverage: self.coverage(),
            crash_message,
        }
    }

    fn navigate(&mut self, to: usize) {
        if to == self.page {
            return;
        }
        if self.stack.last() == Some(&to) {
            self.stack.pop();
        } else {
            self.stack.push(self.page);
        }
        self.page = to;
    }

    /// Executes the `event`-th event of the current page.
    pub fn execute(&mut self, event: usize, input: Option<&str>) -> Result<StepOutcome> {
        if !self.launched {
            return Err(Error::usage("app not launched"));
        }
        let kind = self.spec.pages[self.page]
            .events
            .get(event)
            .map(|e| e.kind)
            .ok_or_else(|| {
                Error::usage(format!(
                    "event {event} is not on current page {}",
                    self.page
                ))
            })?;
        if kind.accepts_input() != input.is_some() {
            return Err(Error::usage(format!(
                "{kind} event {} take a text input",
                if kind.accepts_input() {
                    "must"
                } else {
                    "does not"
                }
            )));
        }

        let (grew, crash) = self.run_trigger(Trigger::Event(event), input);
        if crash.is_some() {
            self.relaunch();
            return Ok(self.outcome(grew, crash));
        }
        match kind {
            EventKind::Back => {
                self.page = self.stack.pop().unwrap_or(self.spec.home);
            }
            EventKind::Restart => {
                self.relaunch();
            }
            _ => {
                let target = self
                    .tables
                    .transitions
                    .get(&(self.page, event))
                    .and_then(|ts| ts.iter().find(|(class, _)| class.matches(input)))
                    .map(|&(_, to)| to);
                if let Some(to) = target {
                    self.navigate(to);
                }
            }
        }
        Ok(self.outcome(grew, None))
    }

    /// Fires a uniformly chosen system event at the current page.
    pub fn system_event(&mut self, rng: &mut Rng) -> Result<SystemEventOutcome> {
        let kind = SystemKind::ALL[rng.random_range(0..SystemKind::ALL.len())];
        self.system_event_of(kind)
    }

    pub fn system_event_of(&mut self, kind: SystemKind) -> Result<SystemEventOutcome> {
        if !self.launched {
            return Err(Error::usage("app not launched"));
        }
        let (grew, crash) = self.run_trigger(Trigger::System(kind), None);
        if crash.is_some() {
            self.relaunch();
        }
        Ok(SystemEventOutcome {
            kind,
            outcome: self.outcome(grew, crash),
        })
    }
}

const INPUT_ALPHABET: &[u8] =
    b"0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";

/// Random text for editable widgets: 1 to 12 characters drawn from digits,
/// letters and ASCII punctuation.
pub fn random_input(rng: &mut Rng) -> String {
    let len = rng.random_range(1..=12);
    (0..len)
        .map(|_| INPUT_ALPHABET[rng.random_range(0..INPUT_ALPHABET.len())] as char)
        .collect()
}
