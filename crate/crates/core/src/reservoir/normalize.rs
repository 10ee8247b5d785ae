use crate::dynamics::TimeSeries;
use crate::error::{contract, Error, Result};
use serde::{Deserialize, Serialize};

/// Per-input `(min, max)` ranges used to map raw values onto `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Normalization {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() {
            return Err(contract("min and max have different lengths"));
        }
        for (column, (lo, hi)) in min.iter().zip(&max).enumerate() {
            if !(hi > lo) {
                return Err(Error::DegenerateRange { column, value: *lo });
            }
        }
        Ok(Self { min, max })
    }

    /// Extremes of the given columns over all rows of `series`.
    pub fn fit(series: &TimeSeries, columns: &[usize]) -> Result<Self> {
        let ranges = series.column_ranges();
        let mut min = Vec::with_capacity(columns.len());
        let mut max = Vec::with_capacity(columns.len());
        for &c in columns {
            let (lo, hi) = *ranges.get(c).ok_or_else(|| contract(format!("column {c} out of range")))?;
            min.push(lo);
            max.push(hi);
        }
        Self::new(min, max)
    }

    pub fn len(&self) -> usize {
        self.min.len()
    }

    pub fn is_empty(&self) -> bool {
        self.min.is_empty()
    }
}

/// `(x - min) / (max - min)` per component, clamped to `[0, 1]`.
pub fn normalize_inputs(x: &[f64], norm: &Normalization) -> Result<Vec<f64>> {
    if x.len() != norm.len() {
        return Err(contract(format!("input has {} components, normalization has {}", x.len(), norm.len())));
    }
    let mut out = Vec::with_capacity(x.len());
    for (column, ((v, lo), hi)) in x.iter().zip(&norm.min).zip(&norm.max).enumerate() {
        let width = hi - lo;
        if !(width > 0.0) {
            return Err(Error::DegenerateRange { column, value: *lo });
        }
        out.push(((v - lo) / width).clamp(0.0, 1.0));
    }
    Ok(out)
}
