//! Hand-written apps shipped with the crate, used by tests and examples.

use super::AppSpec;

fn parse(name: &str, text: &str) -> AppSpec {
    AppSpec::from_json(text).unwrap_or_else(|e| panic!("fixture {name} is invalid: {e}"))
}

/// A confirmation dialog with restart, back, menu, OK and Cancel.
pub fn motivating() -> AppSpec {
    parse("motivating", include_str!("../../fixtures/motivating.json"))
}

/// One page whose scroll event changes nothing.
pub fn scroll_loop() -> AppSpec {
    parse(
        "scroll_loop",
        include_str!("../../fixtures/scroll_loop.json"),
    )
}

/// Two pages with a click crash, an input crash and a rotate crash.
pub fn crash_app() -> AppSpec {
    parse("crash", include_str!("../../fixtures/crash.json"))
}

/// A three-page chain: home, list, detail.
pub fn three_page() -> AppSpec {
    parse("three_page", include_str!("../../fixtures/three_page.json"))
}

/// Name and constructor of a bundled fixture.
pub type Fixture = (&'static str, fn() -> AppSpec);

pub const ALL: [Fixture; 4] = [
    ("motivating", motivating),
    ("scroll_loop", scroll_loop),
    ("crash", crash_app),
    ("three_page", three_page),
];
