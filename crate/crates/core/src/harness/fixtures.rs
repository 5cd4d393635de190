//! Scenes bundled with the crate.

use serde::Deserialize;

pub const DINING_SET: &str = include_str!("../../fixtures/dining-set.scene.json");
pub const BOOKSTORE_ROWS: &str = include_str!("../../fixtures/bookstore-rows.scene.json");
pub const STAR_UNIT: &str = include_str!("../../fixtures/star-unit.scene.json");
pub const CONFLICT: &str = include_str!("../../fixtures/conflict.scene.json");
pub const MIXED_10: &str = include_str!("../../fixtures/mixed-10.scene.json");

/// `(name, scene text)` for every bundled scene.
pub const ALL: &[(&str, &str)] = &[
    ("dining-set", DINING_SET),
    ("bookstore-rows", BOOKSTORE_ROWS),
    ("star-unit", STAR_UNIT),
    ("conflict", CONFLICT),
    ("mixed-10", MIXED_10),
];

/// Outcomes recorded from solving and validating each bundled scene.
pub const EXPECTED: &[(&str, &str)] = &[
    (
        "dining-set",
        include_str!("../../fixtures/dining-set.expected.json"),
    ),
    (
        "bookstore-rows",
        include_str!("../../fixtures/bookstore-rows.expected.json"),
    ),
    (
        "star-unit",
        include_str!("../../fixtures/star-unit.expected.json"),
    ),
    (
        "conflict",
        include_str!("../../fixtures/conflict.expected.json"),
    ),
    (
        "mixed-10",
        include_str!("../../fixtures/mixed-10.expected.json"),
    ),
];

#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct ExpectedOutcome {
    pub scene: String,
    pub seed: u64,
    pub cr_percent: f64,
    pub or_percent: f64,
    /// Largest relation penalty after solving, to three significant digits.
    pub max_relation_penalty: f64,
    pub penalty_bound: f64,
    pub initial_conflicts: usize,
    pub revision_converged_at: usize,
}

pub fn expected(name: &str) -> Option<ExpectedOutcome> {
    EXPECTED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| serde_json::from_str(t).expect("expected-outcome file parses"))
}

pub fn by_name(name: &str) -> Option<&'static str> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
