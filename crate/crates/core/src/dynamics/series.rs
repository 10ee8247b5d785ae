use crate::error::{contract, Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Uniformly sampled multivariate series, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    dt: f64,
    tau0: f64,
    labels: Vec<String>,
    data: Vec<f64>,
}

impl TimeSeries {
    pub fn new(dt: f64, labels: Vec<String>) -> Result<Self> {
        Self::with_start(dt, 0.0, labels)
    }

    pub fn with_start(dt: f64, tau0: f64, labels: Vec<String>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(contract(format!("time step must be positive, got {dt}")));
        }
        if labels.is_empty() {
            return Err(contract("time series needs at least one column"));
        }
        Ok(Self { dt, tau0, labels, data: Vec::new() })
    }

    pub fn from_rows(dt: f64, labels: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let mut ts = Self::new(dt, labels)?;
        for r in rows {
            ts.push(r)?;
        }
        Ok(ts)
    }

    pub fn push(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.cols() {
            return Err(contract(format!("row of length {} pushed to series with {} columns", row.len(), self.cols())));
        }
        self.data.extend_from_slice(row);
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    pub fn tau(&self, row: usize) -> f64 {
        self.tau0 + row as f64 * self.dt
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn cols(&self) -> usize {
        self.labels.len()
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols())
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.iter_rows().map(|r| r[j]).collect()
    }

    pub fn column_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Rows `start..end` as a new series (time origin shifted accordingly).
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start > end || end > self.rows() {
            return Err(contract(format!("slice {start}..{end} out of range for {} rows", self.rows())));
        }
        let c = self.cols();
        Ok(Self {
            dt: self.dt,
            tau0: self.tau(start),
            labels: self.labels.clone(),
            data: self.data[start * c..end * c].to_vec(),
        })
    }

    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&bad) = cols.iter().find(|&&j| j >= self.cols()) {
            return Err(contract(format!("column {bad} out of range for {} columns", self.cols())));
        }
        if cols.is_empty() {
            return Err(contract("column selection is empty"));
        }
        let mut data = Vec::with_capacity(self.rows() * cols.len());
        for r in self.iter_rows() {
            data.extend(cols.iter().map(|&j| r[j]));
        }
        Ok(Self { dt: self.dt, tau0: self.tau0, labels: cols.iter().map(|&j| self.labels[j].clone()).collect(), data })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Per-column `(min, max)`.
    pub fn column_ranges(&self) -> Vec<(f64, f64)> {
        (0..self.cols())
            .map(|j| {
                self.iter_rows().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r[j]), hi.max(r[j])))
            })
            .collect()
    }

    /// CSV with a `tau` column first, values at 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.data.len() * 24);
        out.push_str("tau");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (i, r) in self.iter_rows().enumerate() {
            let _ = write!(out, "{:.16e}", self.tau(i));
            for v in r {
                let _ = write!(out, ",{v:.16e}");
            }
            out.push('\n');
        }
        out
    }

    /// Parse CSV written by [`TimeSeries::to_csv`]. The time step is taken
    /// from the first two `tau` entries (or `default_dt` for a single row).
    pub fn from_csv(text: &str, default_dt: f64) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.first() != Some(&"tau") || cols.len() < 2 {
            return Err(Error::Parse {
                line: 1,
                msg: "header must start with `tau` and name at least one column".into(),
            });
        }
        let labels: Vec<String> = cols[1..].iter().map(|s| s.to_string()).collect();
        let mut taus = Vec::new();
        let mut data = Vec::new();
        for (idx, line) in lines {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != cols.len() {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected {} fields, found {}", cols.len(), fields.len()),
                });
            }
            let mut parsed = Vec::with_capacity(fields.len());
            for f in &fields {
                let v: f64 =
                    f.parse().map_err(|_| Error::Parse { line: idx + 1, msg: format!("invalid number `{f}`") })?;
                parsed.push(v);
            }
            taus.push(parsed[0]);
            data.extend_from_slice(&parsed[1..]);
        }
        let dt = if taus.len() >= 2 { taus[1] - taus[0] } else { default_dt };
        let tau0 = taus.first().copied().unwrap_or(0.0);
        let mut ts = Self::with_start(dt, tau0, labels)?;
        ts.data = data;
        Ok(ts)
    }
}
