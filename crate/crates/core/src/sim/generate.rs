//! Seeded app generator.
//!
//! Pages form a tree of the requested depth. Forward widgets open child
//! pages and cover the most code; dismissive widgets return to the parent;
//! the remaining widgets stay on the page. With probability
//! `functional_vocab_weight` a widget's label is drawn from the vocabulary
//! matching its role, otherwise from the pooled vocabulary.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::spec::{
    AppSpec, CoverDef, CrashDef, InputClass, PageDef, SystemKind, TransitionDef, APP_FORMAT_VERSION,
};
use crate::efg::{EventKind, RawEvent};
use crate::rng::{seeded, Rng};
use crate::{Error, Result};

pub const FUNCTIONAL_WORDS: [&str; 6] = ["ok", "save", "next", "open", "add", "delete"];
pub const DISMISSIVE_WORDS: [&str; 3] = ["cancel", "close", "exit"];
pub const NEUTRAL_WORDS: [&str; 6] = ["help", "about", "share", "refresh", "info", "rate"];

const NOUNS: [&str; 8] = [
    "note", "item", "file", "photo", "contact", "task", "settings", "account",
];
const FIELD_WORDS: [&str; 5] = ["name", "title", "search", "email", "amount"];
const SCREENS: [&str; 10] = [
    "Note", "List", "Detail", "Edit", "Settings", "Account", "Photo", "Search", "Share", "Task",
];
const EXCEPTIONS: [&str; 4] = [
    "java.lang.NullPointerException",
    "java.lang.IllegalStateException",
    "java.lang.IndexOutOfBoundsException",
    "java.lang.NumberFormatException",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub page_count: usize,
    /// Inclusive range of GUI widgets per page, excluding restart/back/menu.
    pub events_per_page: (usize, usize),
    /// Length of the longest page chain from home.
    pub depth: usize,
    pub crash_count: usize,
    pub functional_vocab_weight: f64,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            page_count: 30,
            events_per_page: (3, 7),
            depth: 8,
            crash_count: 2,
            functional_vocab_weight: 0.9,
            seed: 0,
        }
    }
}

impl GenParams {
    pub fn with_seed(seed: u64) -> Self {
        GenParams {
            seed,
            ..GenParams::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.events_per_page;
        if self.page_count == 0 {
            return Err(Error::usage("page_count must be positive"));
        }
        if self.depth >= self.page_count {
            return Err(Error::usage(format!(
                "depth {} needs at least {} pages, got {}",
                self.depth,
                self.depth + 1,
                self.page_count
            )));
        }
        if lo == 0 || lo > hi {
            return Err(Error::usage(format!(
                "invalid events_per_page range {lo}..={hi}"
            )));
        }
        if !(0.0..=1.0).contains(&self.functional_vocab_weight) {
            return Err(Error::usage("functional_vocab_weight must lie in [0, 1]"));
        }
        if self.crash_count > 0 && self.depth == 0 {
            return Err(Error::usage("crashes need a page below home"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Role {
    Forward(usize),
    Dismiss,
    Local,
    Field,
    Scroll,
}

fn pooled_word(rng: &mut Rng) -> String {
    let n = FUNCTIONAL_WORDS.len() + DISMISSIVE_WORDS.len() + NEUTRAL_WORDS.len();
    let i = rng.random_range(0..n);
    let w = FUNCTIONAL_WORDS
        .iter()
        .chain(DISMISSIVE_WORDS.iter())
        .chain(NEUTRAL_WORDS.iter())
        .nth(i)
        .unwrap();
    with_noun(w, rng)
}

fn with_noun(word: &str, rng: &mut Rng) -> String {
    if rng.random_bool(0.5) {
        format!("{word} {}", NOUNS.choose(rng).unwrap())
    } else {
        word.to_string()
    }
}

fn label(role: Role, weight: f64, rng: &mut Rng) -> String {
    let matching = rng.random_bool(weight);
    match role {
        Role::Forward(_) if matching => with_noun(FUNCTIONAL_WORDS.choose(rng).unwrap(), rng),
        Role::Dismiss if matching => DISMISSIVE_WORDS.choose(rng).unwrap().to_string(),
        Role::Local if matching => NEUTRAL_WORDS.choose(rng).unwrap().to_string(),
        Role::Forward(_) | Role::Dismiss | Role::Local => pooled_word(rng),
        Role::Field => FIELD_WORDS.choose(rng).unwrap().to_string(),
        Role::Scroll => String::new(),
    }
}

struct Lines(usize);

impl Lines {
    fn take(&mut self, n: usize) -> Vec<usize> {
        let v = (self.0..self.0 + n).collect();
        self.0 += n;
        v
    }
}

/// Builds a random app from `params`. The same params always give the same
/// app.
pub fn generate_app(params: &GenParams) -> Result<AppSpec> {
    params.validate()?;
    let mut rng = seeded(params.seed);
    let n = params.page_count;

    // Levels: a guaranteed chain 0..=depth, the rest scattered below home.
    let mut level = vec![0usize; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    for i in 1..=params.depth {
        level[i] = i;
        parent[i] = Some(i - 1);
    }
    for i in params.depth + 1..n {
        level[i] = rng.random_range(1..=params.depth);
        let candidates: Vec<usize> = (0..i).filter(|&p| level[p] + 1 == level[i]).collect();
        parent[i] = Some(*candidates.choose(&mut rng).unwrap());
    }

    let mut activity = vec![String::new(); n];
    activity[0] = "MainActivity".to_string();
    let mut next_activity = 0usize;
    for i in 1..n {
        let p = parent[i].unwrap();
        activity[i] = if rng.random_bool(0.3) {
            activity[p].clone()
        } else {
            next_activity += 1;
            format!(
                "{}Activity{next_activity}",
                SCREENS.choose(&mut rng).unwrap()
            )
        };
    }

    let mut lines = Lines(0);
    let launch_lines = lines.take(3);
    // Handler lines shared by all pages of one activity.
    let mut shared: std::collections::BTreeMap<String, [Vec<usize>; 4]> = Default::default();
    for a in &activity {
        if !shared.contains_key(a) {
            let h = [lines.take(1), lines.take(1), lines.take(1), lines.take(1)];
            shared.insert(a.clone(), h);
        }
    }

    let mut pages = Vec::with_capacity(n);
    let mut transitions = Vec::new();
    let mut cover = Vec::new();
    let (lo, hi) = params.events_per_page;
    for i in 0..n {
        let children: Vec<usize> = (0..n).filter(|&c| parent[c] == Some(i)).collect();
        let mut roles: Vec<Role> = children.iter().map(|&c| Role::Forward(c)).collect();
        if i != 0 && rng.random_bool(0.7) {
            roles.push(Role::Dismiss);
        }
        let target = rng.random_range(lo..=hi);
        while roles.len() < target {
            let r = rng.random::<f64>();
            roles.push(if r < 0.65 {
                Role::Local
            } else if r < 0.85 {
                Role::Field
            } else {
                Role::Scroll
            });
        }
        roles.shuffle(&mut rng);

        let [restart_l, back_l, menu_l, rotate_l] = shared[&activity[i]].clone();
        let mut events = vec![
            RawEvent::new("restart", EventKind::Restart),
            RawEvent::new("back", EventKind::Back),
            RawEvent::new("menu", EventKind::Menu),
        ];
        for (e, l) in [restart_l, back_l, menu_l].into_iter().enumerate() {
            cover.push(CoverDef {
                page: i,
                event: Some(e),
                system: None,
                lines: l,
            });
        }
        cover.push(CoverDef {
            page: i,
            event: None,
            system: Some(SystemKind::Rotate),
            lines: rotate_l,
        });

        for role in roles {
            let idx = events.len();
            let text = label(role, params.functional_vocab_weight, &mut rng);
            let (kind, n_lines) = match role {
                Role::Forward(_) => (EventKind::Click, rng.random_range(3..=6)),
                Role::Dismiss => (EventKind::Click, 1),
                Role::Local => {
                    let kind = if rng.random_bool(0.15) {
                        EventKind::LongClick
                    } else {
                        EventKind::Click
                    };
                    (kind, rng.random_range(1..=2))
                }
                Role::Field => (EventKind::Edit, 1),
                Role::Scroll => (EventKind::Scroll, 1),
            };
            events.push(RawEvent::new(text, kind));
            cover.push(CoverDef {
                page: i,
                event: Some(idx),
                system: None,
                lines: lines.take(n_lines),
            });
            let to = match role {
                Role::Forward(c) => Some(c),
                Role::Dismiss => parent[i],
                _ => None,
            };
            if let Some(to) = to {
                transitions.push(TransitionDef {
                    page: i,
                    event: idx,
                    input_class: InputClass::Any,
                    to,
                });
            }
        }
        pages.push(PageDef {
            activity: activity[i].clone(),
            events,
        });
    }

    // Crashes on the deeper half of the tree.
    let min_level = params.depth.div_ceil(2).max(1);
    let deep: Vec<usize> = (0..n).filter(|&p| level[p] >= min_level).collect();
    let mut crashes = Vec::new();
    for k in 0..params.crash_count {
        let page = *deep.choose(&mut rng).unwrap();
        let exc = EXCEPTIONS.choose(&mut rng).unwrap();
        let act = &activity[page];
        let widgets: Vec<usize> = (3..pages[page].events.len()).collect();
        if widgets.is_empty() || rng.random_bool(0.25) {
            crashes.push(CrashDef {
                page,
                event: None,
                system: Some(SystemKind::Rotate),
                input_class: None,
                message: format!("{exc} at {act}.onConfigurationChanged (crash {k})"),
            });
            continue;
        }
        let event = *widgets.choose(&mut rng).unwrap();
        let input_class =
            (pages[page].events[event].kind == EventKind::Edit).then_some(InputClass::Punct);
        crashes.push(CrashDef {
            page,
            event: Some(event),
            system: None,
            input_class,
            message: format!("{exc} at {act}.onEvent{event} (crash {k})"),
        });
    }

    let spec = AppSpec {
        qxp_app: APP_FORMAT_VERSION,
        seed: Some(params.seed),
        home: 0,
        total_lines: lines.0,
        launch_lines,
        pages,
        transitions,
        cover,
        crashes,
    };
    spec.validate()?;
    Ok(spec)
}
