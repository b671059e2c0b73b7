//! Compacted event flow graph.
//!
//! Vertices are GUI events. Executing an event adds edges from it to every
//! event of the page it produced. Events with the same text, kind and
//! activity on different pages are merged into one class that shares its
//! execution count and its outgoing edges (the "Similar" links).

use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default number of child generations tracked for FCD.
pub const DEFAULT_GENERATIONS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Click,
    LongClick,
    Edit,
    Scroll,
    Back,
    Menu,
    Restart,
    System,
}

impl EventKind {
    pub const ALL: [EventKind; 8] = [
        EventKind::Click,
        EventKind::LongClick,
        EventKind::Edit,
        EventKind::Scroll,
        EventKind::Back,
        EventKind::Menu,
        EventKind::Restart,
        EventKind::System,
    ];

    /// Only editable widgets take a text input when executed.
    pub fn accepts_input(self) -> bool {
        self == EventKind::Edit
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Click => "click",
            EventKind::LongClick => "long_click",
            EventKind::Edit => "edit",
            EventKind::Scroll => "scroll",
            EventKind::Back => "back",
            EventKind::Menu => "menu",
            EventKind::Restart => "restart",
            EventKind::System => "system",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PageId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassId(pub usize);

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for PageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// One widget as reported by the app driver.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RawEvent {
    pub text: String,
    pub kind: EventKind,
}

impl RawEvent {
    pub fn new(text: impl Into<String>, kind: EventKind) -> Self {
        RawEvent {
            text: text.into(),
            kind,
        }
    }
}

/// A page as reported by the app driver, before the graph assigns ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RawPage {
    pub activity: String,
    pub events: Vec<RawEvent>,
}

/// An executable GUI event: the unit of action.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub event_id: EventId,
    pub page_id: PageId,
    pub text: String,
    pub kind: EventKind,
    pub activity: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PageSnapshot {
    pub page_id: PageId,
    pub activity: String,
    /// Same order as the observed raw page.
    pub events: Vec<EventRecord>,
}

#[derive(Clone, Debug)]
struct Vertex {
    record: EventRecord,
    class: ClassId,
}

#[derive(Clone, Debug, Default)]
struct MergeClass {
    members: Vec<EventId>,
    fcr: u64,
    next_pages: BTreeSet<PageId>,
}

#[derive(Clone, Debug)]
struct Page {
    activity: String,
    events: Vec<EventId>,
    /// Distinct classes of `events`, sorted.
    classes: Vec<ClassId>,
}

/// Key under which vertices of different pages are merged. `occurrence`
/// separates repeated (text, kind) pairs on one page; empty-text widgets are
/// further pinned to their ordinal position.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct MergeKey {
    activity: String,
    kind: EventKind,
    text: String,
    occurrence: usize,
    ordinal: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct ExplorationGraph {
    vertices: Vec<Vertex>,
    pages: Vec<Page>,
    classes: Vec<MergeClass>,
    page_index: HashMap<RawPage, PageId>,
    merge_index: HashMap<MergeKey, ClassId>,
    max_generation: usize,
}

impl Default for ExplorationGraph {
    fn default() -> Self {
        ExplorationGraph::new(DEFAULT_GENERATIONS)
    }
}

impl ExplorationGraph {
    /// Creates an empty graph answering generation queries up to `max_generation`.
    pub fn new(max_generation: usize) -> Self {
        ExplorationGraph {
            vertices: Vec::new(),
            pages: Vec::new(),
            classes: Vec::new(),
            page_index: HashMap::new(),
            merge_index: HashMap::new(),
            max_generation: max_generation.max(1),
        }
    }

    pub fn max_generation(&self) -> usize {
        self.max_generation
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn page_count(&self) -> usize {
        self.pages.len()
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// Number of vertex-to-vertex edges. Edges live on merge classes, so every
    /// member of a class carries the class's outgoing edges.
    pub fn edge_count(&self) -> usize {
        self.classes
            .iter()
            .map(|c| {
                let fanout: usize = c
                    .next_pages
                    .iter()
                    .map(|p| self.pages[p.0].events.len())
                    .sum();
                fanout * c.members.len()
            })
            .sum()
    }

    /// Integrates an observed page, adding edges from `executed` to its events.
    pub fn update_graph(
        &mut self,
        executed: Option<EventId>,
        observed: &RawPage,
    ) -> Result<PageSnapshot> {
        if observed.events.is_empty() {
            return Err(Error::usage(format!(
                "observed page of activity {:?} has no events",
                observed.activity
            )));
        }
        let executed_class = executed.map(|e| self.class_of(e)).transpose()?;

        let page_id = match self.page_index.get(observed) {
            Some(&id) => id,
            None => self.insert_page(observed),
        };
        if let Some(class) = executed_class {
            self.classes[class.0].next_pages.insert(page_id);
        }
        Ok(self.snapshot(page_id).expect("page just inserted or found"))
    }

    fn insert_page(&mut self, observed: &RawPage) -> PageId {
        let page_id = PageId(self.pages.len());
        let mut occurrences: HashMap<(&str, EventKind), usize> = HashMap::new();
        let mut events = Vec::with_capacity(observed.events.len());

        for (ordinal, raw) in observed.events.iter().enumerate() {
            let occurrence = {
                let n = occurrences
                    .entry((raw.text.as_str(), raw.kind))
                    .or_insert(0);
                *n += 1;
                *n - 1
            };
            let key = MergeKey {
                activity: observed.activity.clone(),
                kind: raw.kind,
                text: raw.text.clone(),
                occurrence,
                ordinal: raw.text.is_empty().then_some(ordinal),
            };
            let class = *self.merge_index.entry(key).or_insert_with(|| {
                self.classes.push(MergeClass::default());
                ClassId(self.classes.len() - 1)
            });
            let event_id = EventId(self.vertices.len());
            self.classes[class.0].members.push(event_id);
            self.vertices.push(Vertex {
                record: EventRecord {
                    event_id,
                    page_id,
                    text: raw.text.clone(),
                    kind: raw.kind,
                    activity: observed.activity.clone(),
                },
                class,
            });
            events.push(event_id);
        }

        let mut classes: Vec<ClassId> = events.iter().map(|e| self.vertices[e.0].class).collect();
        classes.sort_unstable();
        classes.dedup();
        self.pages.push(Page {
            activity: observed.activity.clone(),
            events,
            classes,
        });
        self.page_index.insert(observed.clone(), page_id);
        page_id
    }

    /// Adds one execution to the merge class of `event`.
    pub fn record_execution(&mut self, event: EventId) -> Result<()> {
        let class = self.class_of(event)?;
        self.classes[class.0].fcr += 1;
        Ok(())
    }

    pub fn fcr(&self, event: EventId) -> Result<u64> {
        Ok(self.classes[self.class_of(event)?.0].fcr)
    }

    pub fn class_of(&self, event: EventId) -> Result<ClassId> {
        self.vertices
            .get(event.0)
            .map(|v| v.class)
            .ok_or_else(|| Error::usage(format!("unknown event {event}")))
    }

    pub fn class_fcr(&self, class: ClassId) -> u64 {
        self.classes[class.0].fcr
    }

    pub fn class_members(&self, class: ClassId) -> &[EventId] {
        &self.classes[class.0].members
    }

    pub fn vertex(&self, event: EventId) -> Option<&EventRecord> {
        self.vertices.get(event.0).map(|v| &v.record)
    }

    pub fn snapshot(&self, page: PageId) -> Option<PageSnapshot> {
        let p = self.pages.get(page.0)?;
        Some(PageSnapshot {
            page_id: page,
            activity: p.activity.clone(),
            events: p
                .events
                .iter()
                .map(|e| self.vertices[e.0].record.clone())
                .collect(),
        })
    }

    /// Pages reached so far by executing any member of `event`'s class.
    pub fn next_pages(&self, event: EventId) -> Result<&BTreeSet<PageId>> {
        Ok(&self.classes[self.class_of(event)?.0].next_pages)
    }

    /// Merge classes at generation `m` below `event` (1-based).
    pub fn children_generation(&self, event: EventId, m: usize) -> Result<BTreeSet<ClassId>> {
        if m == 0 || m > self.max_generation {
            return Err(Error::usage(format!(
                "generation {m} outside 1..={}",
                self.max_generation
            )));
        }
        Ok(self.generations(event, m)?.pop().unwrap_or_default())
    }

    /// Generations 1..=`depth` below `event` in one breadth-first pass.
    ///
    /// Generation 1 holds the classes on the pages produced by `event`'s class;
    /// generation m holds the classes on pages produced by generation m-1.
    /// Each class is counted once per generation.
    pub fn generations(&self, event: EventId, depth: usize) -> Result<Vec<BTreeSet<ClassId>>> {
        let start = self.class_of(event)?;
        let mut out = Vec::with_capacity(depth);
        let mut frontier: BTreeSet<ClassId> = BTreeSet::from([start]);
        for _ in 0..depth {
            let mut pages: BTreeSet<PageId> = BTreeSet::new();
            for c in &frontier {
                pages.extend(self.classes[c.0].next_pages.iter().copied());
            }
            let next: BTreeSet<ClassId> = pages
                .iter()
                .flat_map(|p| self.pages[p.0].classes.iter().copied())
                .collect();
            out.push(next.clone());
            frontier = next;
        }
        Ok(out)
    }

    /// Deterministic text rendering, one vertex per line:
    /// `page  event  kind  text  fcr  similar  next`, tab-separated.
    pub fn debug_dump(&self) -> String {
        let mut out = String::from("# page\tevent\tkind\ttext\tfcr\tsimilar\tnext\n");
        for v in &self.vertices {
            let class = &self.classes[v.class.0];
            let similar: Vec<String> = class
                .members
                .iter()
                .filter(|&&m| m != v.record.event_id)
                .map(|m| format!("{}-{}", self.vertices[m.0].record.page_id, m))
                .collect();
            let next: Vec<String> = class.next_pages.iter().map(|p| p.to_string()).collect();
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{:?}\t{}\t{}\t{}",
                v.record.page_id,
                v.record.event_id,
                v.record.kind,
                v.record.text,
                class.fcr,
                if similar.is_empty() {
                    "-".into()
                } else {
                    similar.join(",")
                },
                if next.is_empty() {
                    "-".into()
                } else {
                    next.join(",")
                },
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn page(activity: &str, events: &[(&str, EventKind)]) -> RawPage {
        RawPage {
            activity: activity.into(),
            events: events.iter().map(|(t, k)| RawEvent::new(*t, *k)).collect(),
        }
    }

    fn motivating() -> RawPage {
        page(
            "MinLength",
            &[
                ("restart", EventKind::Restart),
                ("back", EventKind::Back),
                ("menu", EventKind::Menu),
                ("OK", EventKind::Click),
                ("Cancel", EventKind::Click),
            ],
        )
    }

    #[test]
    fn first_launch_creates_unexecuted_vertices() {
        let mut g = ExplorationGraph::default();
        let snap = g.update_graph(None, &motivating()).unwrap();
        assert_eq!(snap.events.len(), 5);
        assert_eq!(g.vertex_count(), 5);
        assert_eq!(g.edge_count(), 0);
        for e in &snap.events {
            assert_eq!(g.fcr(e.event_id).unwrap(), 0);
        }
    }

    #[test]
    fn empty_page_is_rejected() {
        let mut g = ExplorationGraph::default();
        let err = g.update_graph(None, &page("A", &[])).unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
    }

    #[test]
    fn same_text_same_activity_merges_across_pages() {
        let mut g = ExplorationGraph::default();
        let p3 = g
            .update_graph(
                None,
                &page(
                    "Settings",
                    &[
                        ("Status bar shortcut", EventKind::Click),
                        ("Flashlight", EventKind::Click),
                    ],
                ),
            )
            .unwrap();
        let p4 = g
            .update_graph(
                Some(p3.events[1].event_id),
                &page(
                    "Settings",
                    &[
                        ("Status bar shortcut", EventKind::Click),
                        ("Full brightness", EventKind::Click),
                    ],
                ),
            )
            .unwrap();
        let a = p3.events[0].event_id;
        let b = p4.events[0].event_id;
        assert_eq!(g.class_of(a).unwrap(), g.class_of(b).unwrap());
        assert_ne!(
            g.class_of(p3.events[1].event_id).unwrap(),
            g.class_of(p4.events[1].event_id).unwrap()
        );
        g.record_execution(b).unwrap();
        assert_eq!(g.fcr(a).unwrap(), 1);
        assert_eq!(g.fcr(b).unwrap(), 1);
        let dump = g.debug_dump();
        assert!(dump.contains(&format!("\"Status bar shortcut\"\t1\t{}-{}", p4.page_id, b)));
    }

    #[test]
    fn different_activity_or_kind_never_merges() {
        let mut g = ExplorationGraph::default();
        let a = g
            .update_graph(None, &page("A", &[("save", EventKind::Click)]))
            .unwrap();
        let b = g
            .update_graph(None, &page("B", &[("save", EventKind::Click)]))
            .unwrap();
        let c = g
            .update_graph(None, &page("A", &[("save", EventKind::LongClick)]))
            .unwrap();
        let ca = g.class_of(a.events[0].event_id).unwrap();
        assert_ne!(ca, g.class_of(b.events[0].event_id).unwrap());
        assert_ne!(ca, g.class_of(c.events[0].event_id).unwrap());
    }

    #[test]
    fn duplicate_text_on_one_page_stays_distinct() {
        let mut g = ExplorationGraph::default();
        let p = g
            .update_graph(
                None,
                &page("A", &[("add", EventKind::Click), ("add", EventKind::Click)]),
            )
            .unwrap();
        assert_ne!(
            g.class_of(p.events[0].event_id).unwrap(),
            g.class_of(p.events[1].event_id).unwrap()
        );
        // A later page with one "add" joins the first occurrence's class only.
        let q = g
            .update_graph(
                None,
                &page("A", &[("add", EventKind::Click), ("x", EventKind::Click)]),
            )
            .unwrap();
        assert_eq!(
            g.class_of(q.events[0].event_id).unwrap(),
            g.class_of(p.events[0].event_id).unwrap()
        );
    }

    #[test]
    fn empty_text_merges_only_at_same_ordinal() {
        let mut g = ExplorationGraph::default();
        let p = g
            .update_graph(
                None,
                &page("A", &[("", EventKind::Click), ("go", EventKind::Click)]),
            )
            .unwrap();
        let q = g
            .update_graph(
                None,
                &page("A", &[("go", EventKind::Click), ("", EventKind::Click)]),
            )
            .unwrap();
        let r = g
            .update_graph(
                None,
                &page("A", &[("", EventKind::Click), ("stop", EventKind::Click)]),
            )
            .unwrap();
        let icon = g.class_of(p.events[0].event_id).unwrap();
        assert_ne!(icon, g.class_of(q.events[1].event_id).unwrap());
        assert_eq!(icon, g.class_of(r.events[0].event_id).unwrap());
    }

    #[test]
    fn reobserving_a_page_is_idempotent() {
        let mut g = ExplorationGraph::default();
        let home = g.update_graph(None, &motivating()).unwrap();
        let scroll = home.events[3].event_id;
        let again = g.update_graph(Some(scroll), &motivating()).unwrap();
        assert_eq!(again.page_id, home.page_id);
        let (v, e) = (g.vertex_count(), g.edge_count());
        let third = g.update_graph(Some(scroll), &motivating()).unwrap();
        assert_eq!(third.page_id, home.page_id);
        assert_eq!((v, e), (g.vertex_count(), g.edge_count()));
    }

    #[test]
    fn record_execution_counts_and_rejects_unknown() {
        let mut g = ExplorationGraph::default();
        let p = g.update_graph(None, &motivating()).unwrap();
        let e = p.events[0].event_id;
        for _ in 0..7 {
            g.record_execution(e).unwrap();
        }
        assert_eq!(g.fcr(e).unwrap(), 7);
        for other in &p.events[1..] {
            assert_eq!(g.fcr(other.event_id).unwrap(), 0);
        }
        assert!(matches!(
            g.record_execution(EventId(99)),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn generation_bounds_are_checked() {
        let mut g = ExplorationGraph::default();
        let p = g.update_graph(None, &motivating()).unwrap();
        let e = p.events[3].event_id;
        assert!(g.children_generation(e, 0).is_err());
        assert!(g.children_generation(e, 4).is_err());
        assert!(g.children_generation(e, 1).unwrap().is_empty());
    }

    #[test]
    fn diamond_counts_each_class_once() {
        let mut g = ExplorationGraph::default();
        let home = g
            .update_graph(None, &page("H", &[("go", EventKind::Click)]))
            .unwrap();
        let e = home.events[0].event_id;
        let p = g
            .update_graph(
                Some(e),
                &page(
                    "P",
                    &[("left", EventKind::Click), ("right", EventKind::Click)],
                ),
            )
            .unwrap();
        let r = page(
            "R",
            &[
                ("a", EventKind::Click),
                ("b", EventKind::Click),
                ("c", EventKind::Click),
                ("d", EventKind::Click),
            ],
        );
        g.update_graph(Some(p.events[0].event_id), &r).unwrap();
        g.update_graph(Some(p.events[1].event_id), &r).unwrap();
        assert_eq!(g.children_generation(e, 1).unwrap().len(), 2);
        assert_eq!(g.children_generation(e, 2).unwrap().len(), 4);
        assert!(g.children_generation(e, 3).unwrap().is_empty());
    }
}
