use super::Scenario;
use crate::error::{Error, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// A swept parameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Int(u64),
    Num(f64),
    Text(String),
}

impl Param {
    fn rank(&self) -> (u8, f64) {
        match self {
            Param::Int(i) => (0, *i as f64),
            Param::Num(x) => (0, *x),
            Param::Text(_) => (1, 0.0),
        }
    }

    /// Numbers before text, numbers by value, text lexically.
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        let (ra, va) = self.rank();
        let (rb, vb) = other.rank();
        ra.cmp(&rb).then(va.total_cmp(&vb)).then_with(|| match (self, other) {
            (Param::Text(a), Param::Text(b)) => a.cmp(b),
            _ => Ordering::Equal,
        })
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Param::Int(i) => Some(*i as f64),
            Param::Num(x) => Some(*x),
            Param::Text(_) => None,
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Int(i) => write!(f, "{i}"),
            Param::Num(x) => write!(f, "{x:?}"),
            Param::Text(s) => f.write_str(s),
        }
    }
}

impl From<usize> for Param {
    fn from(v: usize) -> Self {
        Param::Int(v as u64)
    }
}

impl From<f64> for Param {
    fn from(v: f64) -> Self {
        Param::Num(v)
    }
}

impl From<&str> for Param {
    fn from(v: &str) -> Self {
        Param::Text(v.to_string())
    }
}

pub type Params = BTreeMap<String, Param>;

/// Lexicographic order over `(name, value)` pairs.
pub fn cmp_params(a: &Params, b: &Params) -> Ordering {
    let mut ia = a.iter();
    let mut ib = b.iter();
    loop {
        match (ia.next(), ib.next()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some((ka, va)), Some((kb, vb))) => {
                let o = ka.cmp(kb).then_with(|| va.total_cmp(vb));
                if o != Ordering::Equal {
                    return o;
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub code_version: String,
}

impl Provenance {
    pub fn new(config_hash: String) -> Self {
        Self { config_hash, code_version: env!("CARGO_PKG_VERSION").to_string() }
    }
}

/// Outcome of one (parameters, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: Scenario,
    pub params: Params,
    pub seed: u64,
    /// Test-window MSE; `+inf` for a failed run (written as `"inf"`).
    #[serde(serialize_with = "ser_sentinel", deserialize_with = "de_sentinel")]
    pub mse: f64,
    /// Closed-loop horizon in Lyapunov times.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    pub diverged: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metrics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Seconds spent on the task that produced this record.
    pub wall_time: f64,
    pub provenance: Provenance,
}

fn ser_sentinel<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str("inf")
    }
}

fn de_sentinel<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(x) => Ok(x),
        Raw::Text(t) if t == "inf" => Ok(f64::INFINITY),
        Raw::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got \"{t}\""))),
    }
}

impl RunRecord {
    /// A failed run: `+inf` sentinel and the error message.
    pub fn failed(scenario: Scenario, params: Params, seed: u64, err: &Error, provenance: Provenance) -> Self {
        Self {
            scenario,
            params,
            seed,
            mse: f64::INFINITY,
            horizon: None,
            diverged: true,
            metrics: BTreeMap::new(),
            error: Some(err.to_string()),
            wall_time: 0.0,
            provenance,
        }
    }

    /// Canonical order: parameters, then seed.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.scenario
            .cmp(&other.scenario)
            .then_with(|| cmp_params(&self.params, &other.params))
            .then(self.seed.cmp(&other.seed))
    }

    /// Identity used when resuming.
    pub fn key(&self) -> String {
        run_key(self.scenario, &self.params, self.seed, &self.provenance.config_hash)
    }
}

pub(crate) fn run_key(scenario: Scenario, params: &Params, seed: u64, hash: &str) -> String {
    format!("{scenario}|{}|{seed}|{hash}", serde_json::to_string(params).expect("params serialize"))
}

/// One JSON document per line.
pub fn records_to_ndjson(records: &[RunRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Parse NDJSON; blank lines are skipped. With `tolerate_torn_tail` a
/// malformed final line (an interrupted write) is dropped.
pub fn records_from_ndjson(text: &str, tolerate_torn_tail: bool) -> Result<Vec<RunRecord>> {
    let lines: Vec<(usize, &str)> = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).collect();
    let mut out = Vec::with_capacity(lines.len());
    for (pos, (i, line)) in lines.iter().enumerate() {
        match serde_json::from_str::<RunRecord>(line) {
            Ok(r) => out.push(r),
            Err(_) if tolerate_torn_tail && pos + 1 == lines.len() && !text.ends_with('\n') => {}
            Err(e) => return Err(Error::Parse { line: i + 1, msg: e.to_string() }),
        }
    }
    Ok(out)
}
