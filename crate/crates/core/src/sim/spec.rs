//! The versioned JSON app format (`"qxp_app": 1`).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::efg::RawEvent;
use crate::{Error, Result};

pub const APP_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Rotate,
    Volume,
    Call,
}

impl SystemKind {
    pub const ALL: [SystemKind; 3] = [SystemKind::Rotate, SystemKind::Volume, SystemKind::Call];
}

/// Predicate over the text typed into an editable widget.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputClass {
    /// Matches everything, including "no input".
    #[default]
    Any,
    /// Non-empty, ASCII digits only.
    Numeric,
    /// Non-empty, ASCII letters only.
    Alpha,
    /// Contains at least one ASCII punctuation character.
    Punct,
}

impl InputClass {
    pub fn matches(self, input: Option<&str>) -> bool {
        match (self, input) {
            (InputClass::Any, _) => true,
            (_, None) => false,
            (InputClass::Numeric, Some(s)) => {
                !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
            }
            (InputClass::Alpha, Some(s)) => {
                !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphabetic())
            }
            (InputClass::Punct, Some(s)) => s.bytes().any(|b| b.is_ascii_punctuation()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageDef {
    pub activity: String,
    pub events: Vec<RawEvent>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionDef {
    pub page: usize,
    pub event: usize,
    #[serde(default)]
    pub input_class: InputClass,
    pub to: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverDef {
    pub page: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemKind>,
    pub lines: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrashDef {
    pub page: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_class: Option<InputClass>,
    pub message: String,
}

/// A complete synthetic app.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppSpec {
    pub qxp_app: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub home: usize,
    pub total_lines: usize,
    /// Lines executed by launching the app.
    #[serde(default)]
    pub launch_lines: Vec<usize>,
    pub pages: Vec<PageDef>,
    #[serde(default)]
    pub transitions: Vec<TransitionDef>,
    #[serde(default)]
    pub cover: Vec<CoverDef>,
    #[serde(default)]
    pub crashes: Vec<CrashDef>,
}

impl AppSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: AppSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        AppSpec::from_json(&text).map_err(|e| match e {
            Error::Json(j) => Error::AppSpec(format!("{}: {j}", path.display())),
            Error::AppSpec(m) => Error::AppSpec(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("app spec serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::AppSpec(m));
        if self.qxp_app != APP_FORMAT_VERSION {
            return bad(format!("unsupported qxp_app version {}", self.qxp_app));
        }
        if self.pages.is_empty() {
            return bad("app has no pages".into());
        }
        if self.home >= self.pages.len() {
            return bad(format!("home page {} out of range", self.home));
        }
        if self.total_lines == 0 {
            return bad("total_lines must be positive".into());
        }
        for (i, p) in self.pages.iter().enumerate() {
            if p.events.is_empty() {
                return bad(format!("page {i} has no events"));
            }
        }
        let event_ok = |page: usize, event: usize| {
            self.pages.get(page).is_some_and(|p| event < p.events.len())
        };
        for t in &self.transitions {
            if !event_ok(t.page, t.event) || t.to >= self.pages.len() {
                return bad(format!(
                    "transition {t:?} references a missing page or event"
                ));
            }
        }
        let line_ok = |l: &usize| *l < self.total_lines;
        if !self.launch_lines.iter().all(line_ok) {
            return bad("launch line out of range".into());
        }
        for c in &self.cover {
            match (c.event, c.system) {
                (Some(e), None) if event_ok(c.page, e) => {}
                (None, Some(_)) if c.page < self.pages.len() => {}
                _ => {
                    return bad(format!(
                        "cover entry {c:?} needs exactly one valid event or system"
                    ))
                }
            }
            if !c.lines.iter().all(line_ok) {
                return bad(format!(
                    "cover entry for page {} has a line out of range",
                    c.page
                ));
            }
        }
        for c in &self.crashes {
            match (c.event, c.system) {
                (Some(e), None) if event_ok(c.page, e) => {}
                (None, Some(_)) if c.page < self.pages.len() => {}
                _ => {
                    return bad(format!(
                        "crash entry {c:?} needs exactly one valid event or system"
                    ))
                }
            }
        }
        Ok(())
    }

    pub fn event_count(&self) -> usize {
        self.pages.iter().map(|p| p.events.len()).sum()
    }
}
