//! Run configuration: typed sections read from a TOML file, with dotted-key
//! overrides layered on top of the defaults.

use crate::error::CliError;
use qrc_core::dynamics::{MackeyGlassConfig, NarmaConfig};
use qrc_core::experiments::{Scenario, SweepSpec};
use qrc_core::qsim::{NoiseConfig, DEFAULT_TRAJECTORIES};
use qrc_core::reservoir::CrcConfig;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use toml::{Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataModel {
    L63,
    L8,
    Narma2,
    MackeyGlass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dynamics {
    /// `l63`, `l8`, `narma2` or `mackey_glass`.
    pub model: DataModel,
    pub sigma: f64,
    pub r: f64,
    /// Cell aspect ratio; `2 sqrt 2` gives `b = 8/3`.
    pub aspect: f64,
    pub dt: f64,
    /// Recorded steps; the file has `steps + 1` rows.
    pub steps: usize,
    pub transient: usize,
    pub seed: u64,
    pub printed_coefficients: bool,
    pub narma: NarmaConfig,
    /// Its `dt` is replaced by `dynamics.dt`.
    pub mackey_glass: MackeyGlassConfig,
}

impl Default for Dynamics {
    fn default() -> Self {
        Self {
            model: DataModel::L63,
            sigma: 10.0,
            r: 28.0,
            aspect: 2.0 * 2f64.sqrt(),
            dt: 0.02,
            steps: 4000,
            transient: 5000,
            seed: 7,
            printed_coefficients: false,
            narma: NarmaConfig::default(),
            mackey_glass: MackeyGlassConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Qrcm,
    Crcm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Qrcm {
    pub n: usize,
    pub eps: f64,
    /// 0 uses exact probabilities.
    pub shots: u64,
    pub reduced: bool,
    pub input_scale: f64,
    /// 0 keeps the register in one block.
    pub block_size: usize,
    pub trajectories: usize,
    /// Empty draws the angles from `model.seed`.
    pub beta: Vec<f64>,
    /// Empty draws the reduced-circuit feedback indices from `model.seed`.
    pub selected_indices: Vec<usize>,
    pub noise: NoiseConfig,
}

impl Default for Qrcm {
    fn default() -> Self {
        Self {
            n: 7,
            eps: 0.05,
            shots: 0,
            reduced: false,
            input_scale: 2.0 * PI,
            block_size: 0,
            trajectories: DEFAULT_TRAJECTORIES,
            beta: Vec::new(),
            selected_indices: Vec::new(),
            noise: NoiseConfig::noiseless(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crcm {
    pub n_res: usize,
    pub eps: f64,
    pub density: f64,
    pub spectral_radius: f64,
}

impl Default for Crcm {
    fn default() -> Self {
        let c = CrcConfig::new(512, 1, 0);
        Self { n_res: c.n_res, eps: c.eps, density: c.density, spectral_radius: c.spectral_radius }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub kind: ModelKind,
    pub seed: u64,
    pub qrcm: Qrcm,
    pub crcm: Crcm,
}

impl Default for Model {
    fn default() -> Self {
        Self { kind: ModelKind::Qrcm, seed: 1, qrcm: Qrcm::default(), crcm: Crcm::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Training {
    /// Input columns; empty means all.
    pub inputs: Vec<String>,
    /// Output columns; empty means all.
    pub outputs: Vec<String>,
    pub washout: usize,
    pub gamma: f64,
    /// Leading rows of the data file used for training; 0 means all.
    pub rows: usize,
}

impl Default for Training {
    fn default() -> Self {
        Self { inputs: Vec::new(), outputs: Vec::new(), washout: 50, gamma: 1e-8, rows: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predict {
    /// Predicted rows; 0 means as many as the comparison data has.
    pub steps: usize,
    /// Rows of the comparison data skipped before row 0 of the prediction.
    pub skip_rows: usize,
    /// Largest Lyapunov exponent for the horizon; 0 reports model time.
    pub lyapunov: f64,
    /// Normalized-error threshold of the horizon.
    pub threshold: f64,
}

impl Default for Predict {
    fn default() -> Self {
        Self { steps: 0, skip_rows: 0, lyapunov: 0.0, threshold: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lyapunov {
    /// Total steps, transient included.
    pub steps: usize,
    pub transient: usize,
    pub renorm_interval: usize,
    pub perturbation: f64,
}

impl Default for Lyapunov {
    fn default() -> Self {
        let d = qrc_core::dynamics::LyapunovConfig::default();
        Self {
            steps: d.total_steps,
            transient: d.transient_steps,
            renorm_interval: d.renorm_interval,
            perturbation: d.perturbation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Opcount {
    /// Inclusive qubit range, `lo..hi`.
    pub n: String,
    pub xi: f64,
}

impl Default for Opcount {
    fn default() -> Self {
        Self { n: "1..32".into(), xi: 3.0 }
    }
}

/// The fixed sections. `[sweep]` is resolved separately because its
/// defaults depend on the scenario.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct Sections {
    dynamics: Dynamics,
    model: Model,
    training: Training,
    predict: Predict,
    lyapunov: Lyapunov,
    opcount: Opcount,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dynamics: Dynamics,
    pub model: Model,
    pub training: Training,
    pub predict: Predict,
    pub lyapunov: Lyapunov,
    pub opcount: Opcount,
    pub sweep: SweepSpec,
}

/// A scenario name as accepted by `sweep`: one of the experiment scenarios
/// or the operation-count scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepTarget {
    Experiment(Scenario),
    Opcount,
}

impl std::str::FromStr for SweepTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "opcount" {
            return Ok(SweepTarget::Opcount);
        }
        s.parse::<Scenario>().map(SweepTarget::Experiment).map_err(|_| {
            let names: Vec<&str> = Scenario::ALL.iter().map(|s| s.name()).chain(["opcount"]).collect();
            format!("unknown scenario '{s}'; valid names: {}", names.join(", "))
        })
    }
}

fn to_table<T: Serialize>(v: &T) -> Table {
    Table::try_from(v).expect("configuration sections serialize to a table")
}

/// Overlay `top` onto `base`, recursing into tables.
fn merge(base: &mut Table, top: &Table) {
    for (k, v) in top {
        match (base.get_mut(k), v) {
            (Some(Value::Table(b)), Value::Table(t)) => merge(b, t),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}

/// First key present in `given` but absent from `known`, as a dotted path.
fn unknown_key(given: &Table, known: &Table, prefix: &str) -> Option<String> {
    for (k, v) in given {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match (known.get(k), v) {
            (None, _) => return Some(path),
            (Some(Value::Table(kt)), Value::Table(gt)) => {
                if let Some(p) = unknown_key(gt, kt, &path) {
                    return Some(p);
                }
            }
            _ => {}
        }
    }
    None
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parse `key.path=value`; the value is read as TOML, falling back to a
/// bare string.
pub fn parse_override(s: &str) -> Result<(String, Value), CliError> {
    let (k, v) = s.split_once('=').ok_or_else(|| usage(format!("override '{s}' is not of the form key=value")))?;
    let k = k.trim();
    if k.is_empty() || k.split('.').any(str::is_empty) {
        return Err(usage(format!("override '{s}' has an empty key")));
    }
    let v = v.trim();
    let value = format!("x = {v}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("x"))
        .unwrap_or_else(|| Value::String(v.to_string()));
    Ok((k.to_string(), value))
}

fn set_path(table: &mut Table, key: &str, value: Value) -> Result<(), CliError> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().expect("non-empty key");
    let mut cur = table;
    let mut walked = String::new();
    for p in parts {
        walked = if walked.is_empty() { p.to_string() } else { format!("{walked}.{p}") };
        let entry = cur.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = match entry {
            Value::Table(t) => t,
            _ => return Err(usage(format!("config key '{walked}' is a value, not a section"))),
        };
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

/// Layered configuration source: file contents plus ordered overrides.
#[derive(Debug, Clone, Default)]
pub struct Layers {
    file: Table,
    overrides: Vec<(String, Value)>,
}

impl Layers {
    pub fn from_text(text: &str, origin: &str) -> Result<Self, CliError> {
        let file = text.parse::<Table>().map_err(|e| usage(format!("{origin}: {e}")))?;
        Ok(Self { file, overrides: Vec::new() })
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.overrides.push((key.to_string(), value));
    }

    pub fn set_if<T: Into<Value>>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.set(key, v.into());
        }
    }

    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut given = self.file.clone();
        for (k, v) in &self.overrides {
            set_path(&mut given, k, v.clone())?;
        }
        let sweep_given = match given.remove("sweep") {
            None => Table::new(),
            Some(Value::Table(t)) => t,
            Some(_) => return Err(usage("'sweep' must be a section")),
        };

        let mut merged = to_table(&Sections::default());
        if let Some(k) = unknown_key(&given, &merged, "") {
            return Err(usage(format!("unknown config key '{k}'")));
        }
        merge(&mut merged, &given);
        let sections: Sections = Value::Table(merged).try_into().map_err(|e| usage(format!("config: {e}")))?;

        let scenario = match sweep_given.get("scenario") {
            None => Scenario::ClosedLoopL63,
            Some(Value::String(s)) => s.parse::<Scenario>().map_err(|e| usage(e.to_string()))?,
            Some(v) => return Err(usage(format!("sweep.scenario must be a string, got {v}"))),
        };
        let mut sweep = to_table(&SweepSpec::defaults(scenario));
        if let Some(k) = unknown_key(&sweep_given, &sweep, "sweep") {
            return Err(usage(format!("unknown config key '{k}'")));
        }
        merge(&mut sweep, &sweep_given);
        let sweep: SweepSpec = Value::Table(sweep).try_into().map_err(|e| usage(format!("config [sweep]: {e}")))?;

        let cfg = RunConfig {
            dynamics: sections.dynamics,
            model: sections.model,
            training: sections.training,
            predict: sections.predict,
            lyapunov: sections.lyapunov,
            opcount: sections.opcount,
            sweep,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn defaults(scenario: Scenario) -> Self {
        let s = Sections::default();
        Self {
            dynamics: s.dynamics,
            model: s.model,
            training: s.training,
            predict: s.predict,
            lyapunov: s.lyapunov,
            opcount: s.opcount,
            sweep: SweepSpec::defaults(scenario),
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let d = &self.dynamics;
        if !(d.dt > 0.0 && d.dt.is_finite()) {
            return Err(usage(format!("dynamics.dt = {} must be positive", d.dt)));
        }
        if !(self.training.gamma >= 0.0 && self.training.gamma.is_finite()) {
            return Err(usage(format!("training.gamma = {} must be non-negative", self.training.gamma)));
        }
        if !(self.predict.lyapunov >= 0.0) || !(self.predict.threshold > 0.0) {
            return Err(usage("predict.lyapunov must be >= 0 and predict.threshold > 0"));
        }
        parse_range(&self.opcount.n)?;
        self.sweep.validate().map_err(|e| usage(format!("sweep: {e}")))?;
        Ok(())
    }

    /// The whole configuration as TOML.
    pub fn to_toml(&self) -> String {
        let mut t = to_table(&Sections {
            dynamics: self.dynamics.clone(),
            model: self.model.clone(),
            training: self.training.clone(),
            predict: self.predict.clone(),
            lyapunov: self.lyapunov.clone(),
            opcount: self.opcount.clone(),
        });
        t.insert("sweep".into(), Value::Table(to_table(&self.sweep)));
        toml::to_string(&t).expect("configuration serializes")
    }
}

/// Every key with its default, one `path = value` per line.
pub fn key_listing() -> String {
    fn walk(t: &Table, prefix: &str, out: &mut Vec<String>) {
        for (k, v) in t {
            let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            match v {
                Value::Table(inner) => walk(inner, &path, out),
                other => out.push(format!("  {path} = {other}")),
            }
        }
    }
    let cfg: Table = RunConfig::defaults(Scenario::ClosedLoopL63).to_toml().parse().expect("dump parses");
    let mut lines = Vec::new();
    walk(&cfg, "", &mut lines);
    lines.join("\n")
}

/// `lo..hi` or `lo..=hi`, both inclusive.
pub fn parse_range(s: &str) -> Result<std::ops::RangeInclusive<u32>, CliError> {
    let bad = || usage(format!("range '{s}' is not of the form lo..hi"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let hi = hi.strip_prefix('=').unwrap_or(hi);
    let (lo, hi): (u32, u32) = (lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?);
    if lo == 0 || lo > hi {
        return Err(usage(format!("range '{s}' must satisfy 1 <= lo <= hi")));
    }
    Ok(lo..=hi)
}
