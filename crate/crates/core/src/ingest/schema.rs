//! Trace schema configuration, read from JSON.
//!
//! ```json
//! {
//!   "name": "example",
//!   "delimiter": ",",
//!   "has_header": true,
//!   "layout": { "kind": "interval", "start": "start", "end": "end" },
//!   "demands": [ { "column": "cpu", "scale": "3" }, { "column": 2 } ],
//!   "capacity": ["40", "90"],
//!   "flavor": { "template": "{0}U{1}G" },
//!   "flavor_rules": [ { "flavors": ["2U4G"], "multipliers": ["1/3", "1"] } ],
//!   "time": { "mode": "rank" },
//!   "missing_end": "horizon",
//!   "max_errors": 100
//! }
//! ```
//!
//! Columns are given by header name or by 0-based index. Numbers that may
//! be fractional (scales, capacities, multipliers, time factors) are
//! strings holding a decimal or `p/q` fraction so they stay exact.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Column {
    Index(usize),
    Name(String),
}

impl std::fmt::Display for Column {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Column::Index(i) => write!(f, "#{i}"),
            Column::Name(n) => f.write_str(n),
        }
    }
}

/// How request lifetimes are laid out in the rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Layout {
    /// One row per request with start and end columns. An empty end cell
    /// counts as missing.
    Interval { start: Column, end: Column },
    /// One row per create or delete event, paired by the id column.
    /// Demands are read from the create row.
    Events {
        id: Column,
        time: Column,
        event: Column,
        create: String,
        delete: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandColumn {
    pub column: Column,
    /// Fixed-point factor applied to raw values; demands are rounded up.
    #[serde(default = "one")]
    pub scale: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlavorSource {
    /// Flavor name read from a column.
    Column(Column),
    /// Flavor name built from raw demand values, `{i}` standing for
    /// dimension `i`.
    Template(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlavorRule {
    pub flavors: Vec<String>,
    /// One multiplier per dimension, applied before rounding.
    pub multipliers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum TimeMode {
    /// Rank of the raw value among all distinct start/end values.
    Rank,
    /// `raw * factor + shift`, which must come out as a non-negative integer.
    Scale {
        #[serde(default = "one")]
        factor: String,
        #[serde(default = "zero")]
        shift: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissingEnd {
    Drop,
    /// Requests without an end run until the largest time in the trace.
    Horizon,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceSchema {
    #[serde(default)]
    pub name: String,
    #[serde(default = "comma")]
    pub delimiter: char,
    #[serde(default = "yes")]
    pub has_header: bool,
    pub layout: Layout,
    pub demands: Vec<DemandColumn>,
    /// Bin capacity in raw units, scaled like the demands.
    pub capacity: Vec<String>,
    #[serde(default)]
    pub flavor: Option<FlavorSource>,
    #[serde(default)]
    pub flavor_rules: Vec<FlavorRule>,
    #[serde(default = "rank")]
    pub time: TimeMode,
    #[serde(default = "drop")]
    pub missing_end: MissingEnd,
    #[serde(default = "hundred")]
    pub max_errors: usize,
}

fn one() -> String {
    "1".into()
}
fn zero() -> String {
    "0".into()
}
fn comma() -> char {
    ','
}
fn yes() -> bool {
    true
}
fn rank() -> TimeMode {
    TimeMode::Rank
}
fn drop() -> MissingEnd {
    MissingEnd::Drop
}
fn hundred() -> usize {
    100
}

const PRESETS: [(&str, &str); 2] = [
    ("huawei", include_str!("../../presets/huawei.json")),
    ("azure", include_str!("../../presets/azure.json")),
];

impl TraceSchema {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("schema serializes");
        s.push('\n');
        s
    }

    pub fn preset(name: &str) -> Option<Self> {
        PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, text)| Self::from_json(text).expect("shipped preset parses"))
    }

    pub fn preset_names() -> impl Iterator<Item = &'static str> {
        PRESETS.iter().map(|(n, _)| *n)
    }

    pub fn dimension(&self) -> usize {
        self.demands.len()
    }
}
