use super::{collect_trace, ridge_fit, CrcConfig, Crcm, Normalization, OutputWeights, QrcConfig, QrcState, Reservoir};
use crate::dynamics::TimeSeries;
use crate::error::{config, contract, Error, Result};
use crate::qsim::ProbVector;
use serde::{Deserialize, Serialize};

/// Version tag written into every model file.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Qrcm(QrcConfig),
    Crcm(CrcConfig),
}

/// Reservoir state saved with a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedState {
    pub values: Vec<f64>,
    #[serde(default)]
    pub step: u64,
}

/// A trained reservoir: configuration, readout and the state reached at the
/// end of the training series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub model: ModelSpec,
    pub input_columns: Vec<String>,
    pub output_columns: Vec<String>,
    pub dt: f64,
    pub washout: usize,
    /// Rows of the training series, all of which were fed.
    pub train_rows: usize,
    pub readout: OutputWeights,
    /// Mean squared training residual.
    pub train_mse: f64,
    pub last_state: SavedState,
}

/// Either reservoir, ready to step.
pub enum Built {
    Q(QrcConfig),
    C(Box<Crcm>),
}

impl ModelSpec {
    pub fn build(&self) -> Result<Built> {
        Ok(match self {
            ModelSpec::Qrcm(c) => {
                c.validate()?;
                Built::Q(c.clone())
            }
            ModelSpec::Crcm(c) => Built::C(Box::new(Crcm::new(c.clone())?)),
        })
    }
}

fn labels_to_indices(series: &TimeSeries, names: &[String]) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|n| series.column_index(n).ok_or_else(|| config(format!("column '{n}' not found in data"))))
        .collect()
}

/// Fit a readout on `series`. For the quantum reservoir the input
/// normalization is taken from the series when the config has none.
pub fn train(
    mut spec: ModelSpec,
    series: &TimeSeries,
    input_columns: &[String],
    output_columns: &[String],
    washout: usize,
    gamma: f64,
) -> Result<TrainedModel> {
    if !(gamma >= 0.0) {
        return Err(config(format!("regularization gamma = {gamma} must be non-negative")));
    }
    let inputs = labels_to_indices(series, input_columns)?;
    let outputs = labels_to_indices(series, output_columns)?;
    if let ModelSpec::Qrcm(c) = &mut spec {
        if c.normalization.is_none() {
            c.normalization = Some(Normalization::fit(series, &inputs)?);
        }
    }
    let (readout, train_mse, last_state) = match spec.build()? {
        Built::Q(m) => fit(&m, series, washout, &inputs, &outputs, gamma, |s: &QrcState| SavedState {
            values: s.p.as_slice().to_vec(),
            step: s.step,
        })?,
        Built::C(m) => {
            if m.cfg.n_in != inputs.len() {
                return Err(config(format!("CRCM expects {} inputs, {} columns given", m.cfg.n_in, inputs.len())));
            }
            fit(m.as_ref(), series, washout, &inputs, &outputs, gamma, |s: &Vec<f64>| SavedState {
                values: s.clone(),
                step: 0,
            })?
        }
    };
    Ok(TrainedModel {
        format_version: MODEL_FORMAT_VERSION,
        model: spec,
        input_columns: input_columns.to_vec(),
        output_columns: output_columns.to_vec(),
        dt: series.dt(),
        washout,
        train_rows: series.rows(),
        readout,
        train_mse,
        last_state,
    })
}

fn fit<M: Reservoir>(
    m: &M,
    series: &TimeSeries,
    washout: usize,
    inputs: &[usize],
    outputs: &[usize],
    gamma: f64,
    save: impl Fn(&M::State) -> SavedState,
) -> Result<(OutputWeights, f64, SavedState)> {
    let run = collect_trace(m, series, washout, inputs, outputs)?;
    let w = ridge_fit(&run.trace, gamma)?;
    let resid = (w.matrix() * &run.trace.states - &run.trace.targets).norm_squared() / run.trace.len() as f64;
    Ok((w, resid, save(&run.last_state)))
}

impl TrainedModel {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
        match v.get("format_version").and_then(|x| x.as_u64()) {
            Some(ver) if ver == u64::from(MODEL_FORMAT_VERSION) => {}
            Some(ver) => return Err(config(format!("unsupported model format version {ver}"))),
            None => return Err(config("model file has no format_version")),
        }
        let m: TrainedModel = serde_json::from_value(v).map_err(|e| Error::Parse { line: 0, msg: e.to_string() })?;
        m.readout.validate()?;
        Ok(m)
    }

    pub fn is_closed_loop(&self) -> bool {
        self.input_columns == self.output_columns
    }

    fn qrc_state(&self, n: usize) -> Result<QrcState> {
        let p = ProbVector::new(self.last_state.values.clone()).map_err(|e| contract(format!("saved state: {e}")))?;
        if p.len() != 1 << n {
            return Err(contract("saved state does not match the qubit count"));
        }
        Ok(QrcState { p, step: self.last_state.step })
    }

    /// Autonomous continuation from the saved state.
    pub fn predict(&self, steps: usize) -> Result<TimeSeries> {
        if !self.is_closed_loop() {
            return Err(config("closed-loop prediction needs a model whose inputs are its outputs"));
        }
        let labels = self.output_columns.clone();
        match self.model.build()? {
            Built::Q(m) => {
                let s = self.qrc_state(m.n)?;
                super::closed_loop_predict(&m, &self.readout, &s, steps, self.dt, labels)
            }
            Built::C(m) => {
                super::closed_loop_predict(m.as_ref(), &self.readout, &self.last_state.values, steps, self.dt, labels)
            }
        }
    }

    /// One-step reconstruction from the saved state, driven by the input
    /// columns of `inputs` (row 0 is the first row after training).
    pub fn reconstruct(&self, inputs: &TimeSeries, steps: usize) -> Result<TimeSeries> {
        let cols = labels_to_indices(inputs, &self.input_columns)?;
        let inputs = inputs.select_columns(&cols)?;
        let labels = self.output_columns.clone();
        match self.model.build()? {
            Built::Q(m) => {
                let s = self.qrc_state(m.n)?;
                super::open_loop_reconstruct(&m, &self.readout, &s, &inputs, steps, labels)
            }
            Built::C(m) => {
                super::open_loop_reconstruct(m.as_ref(), &self.readout, &self.last_state.values, &inputs, steps, labels)
            }
        }
    }
}
