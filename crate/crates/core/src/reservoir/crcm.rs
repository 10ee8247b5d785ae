use super::Reservoir;
use crate::error::{config, contract, Result};
use crate::rng;
use nalgebra::DMatrix;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

const WIN_STREAM: u64 = 0x77696e;
const WR_STREAM: u64 = 0x7772;

/// Echo-state network hyperparameters. The weights are a deterministic
/// function of these fields, see [`Crcm::new`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrcConfig {
    pub n_res: usize,
    pub n_in: usize,
    pub eps: f64,
    /// Fraction of nonzero reservoir entries.
    pub density: f64,
    pub spectral_radius: f64,
    pub seed: u64,
}

impl CrcConfig {
    pub fn new(n_res: usize, n_in: usize, seed: u64) -> Self {
        Self { n_res, n_in, eps: 0.12, density: 0.2, spectral_radius: 1.01, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_res == 0 || self.n_in == 0 {
            return Err(config("reservoir and input dimensions must be positive"));
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(config(format!("leaking rate {} must lie in (0, 1]", self.eps)));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(config(format!("density {} must lie in (0, 1]", self.density)));
        }
        if !(self.spectral_radius >= 0.0 && self.spectral_radius.is_finite()) {
            return Err(config(format!("spectral radius {} is invalid", self.spectral_radius)));
        }
        Ok(())
    }
}

/// Row-compressed sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_start: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
}

impl SparseMatrix {
    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut row_start = vec![0];
        let (mut col, mut val) = (Vec::new(), Vec::new());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != 0.0 {
                    col.push(j);
                    val.push(v);
                }
            }
            row_start.push(col.len());
        }
        Self { rows: m.nrows(), cols: m.ncols(), row_start, col, val }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for k in self.row_start[i]..self.row_start[i + 1] {
                m[(i, self.col[k])] = self.val[k];
            }
        }
        m
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    /// `out += self * x`.
    pub fn mul_add(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_start[i]..self.row_start[i + 1] {
                acc += self.val[k] * x[self.col[k]];
            }
            *o += acc;
        }
    }
}

/// Echo-state network with generated weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Crcm {
    pub cfg: CrcConfig,
    pub w_in: DMatrix<f64>,
    pub w_r: SparseMatrix,
}

impl Crcm {
    /// `W_in` uniform on `[-1, 1]`; `W_r` with `round(D N^2)` nonzeros at
    /// uniformly chosen positions, uniform on `[-1, 1]`, rescaled to the
    /// requested spectral radius.
    pub fn new(cfg: CrcConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.n_res;
        let mut r = rng::stream(cfg.seed, WIN_STREAM);
        let w_in = DMatrix::from_fn(n, cfg.n_in, |_, _| r.random_range(-1.0..=1.0));

        let mut r = rng::stream(cfg.seed, WR_STREAM);
        let nnz = ((cfg.density * (n * n) as f64).round() as usize).max(1);
        let mut positions = rand::seq::index::sample(&mut r, n * n, nnz).into_vec();
        positions.sort_unstable();
        let mut w = DMatrix::zeros(n, n);
        for pos in positions {
            w[(pos / n, pos % n)] = r.random_range(-1.0..=1.0);
        }
        let rho = spectral_radius(&w);
        if rho > 0.0 {
            w *= cfg.spectral_radius / rho;
        } else if cfg.spectral_radius > 0.0 {
            return Err(config("reservoir matrix is nilpotent; cannot rescale its spectral radius"));
        }
        Ok(Self { cfg, w_in, w_r: SparseMatrix::from_dense(&w) })
    }

    /// Explicit weights, for tests and degenerate configurations.
    pub fn from_weights(cfg: CrcConfig, w_in: DMatrix<f64>, w_r: DMatrix<f64>) -> Result<Self> {
        if w_in.shape() != (cfg.n_res, cfg.n_in) || w_r.shape() != (cfg.n_res, cfg.n_res) {
            return Err(contract("weight shapes do not match the configuration"));
        }
        Ok(Self { cfg, w_in, w_r: SparseMatrix::from_dense(&w_r) })
    }
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `psi <- (1 - eps) psi + eps tanh(W_in x + W_r psi)`.
pub fn crcm_step(psi: &[f64], x_in: &[f64], net: &Crcm) -> Result<Vec<f64>> {
    let n = net.cfg.n_res;
    if psi.len() != n || x_in.len() != net.cfg.n_in {
        return Err(contract(format!(
            "expected state of {n} and input of {}, got {} and {}",
            net.cfg.n_in,
            psi.len(),
            x_in.len()
        )));
    }
    let mut act = vec![0.0; n];
    for (i, a) in act.iter_mut().enumerate() {
        *a = (0..x_in.len()).map(|j| net.w_in[(i, j)] * x_in[j]).sum();
    }
    net.w_r.mul_add(psi, &mut act);
    let eps = net.cfg.eps;
    Ok(psi.iter().zip(act).map(|(p, a)| (1.0 - eps) * p + eps * a.tanh()).collect())
}

impl Reservoir for Crcm {
    type State = Vec<f64>;

    fn initial_state(&self) -> Result<Vec<f64>> {
        Ok(vec![0.0; self.cfg.n_res])
    }

    fn step(&self, state: &Vec<f64>, x: &[f64]) -> Result<Vec<f64>> {
        crcm_step(state, x, self)
    }

    fn features<'a>(&self, state: &'a Vec<f64>) -> &'a [f64] {
        state
    }

    fn feature_dim(&self) -> usize {
        self.cfg.n_res
    }
}
