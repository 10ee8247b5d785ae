use super::{ConvectionParams, ModeState};
use crate::error::{contract, Error, Result};
use std::f64::consts::SQRT_2;
use std::fmt::Write as _;

/// Physical fields on a uniform `nx x nz` grid over `[0, Gamma] x [0, 1]`.
///
/// Grids are stored row-major with `z` as the slow index:
/// `field[j * nx + i]` is the value at `(x_i, z_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot {
    pub nx: usize,
    pub nz: usize,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    /// Stream function.
    pub zeta: Vec<f64>,
    /// Temperature deviation from the linear profile.
    pub theta: Vec<f64>,
    /// `1 - z + theta`.
    pub temp_total: Vec<f64>,
    pub ux: Vec<f64>,
    pub uz: Vec<f64>,
    /// Vorticity `-lap(zeta)`.
    pub vorticity: Vec<f64>,
    pub c_zeta: f64,
    pub c_theta: f64,
    pub params: ConvectionParams,
    pub amplitudes: ModeState,
}

/// Analytic evaluation of the eight-mode expansion at a single point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ModalField {
    a: [f64; 4],
    b: [f64; 4],
    alpha: f64,
    beta: f64,
    c_zeta: f64,
    c_theta: f64,
}

/// Values and analytic derivatives at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct PointValues {
    pub zeta: f64,
    pub theta: f64,
    pub ux: f64,
    pub uz: f64,
    pub dux_dx: f64,
    pub duz_dz: f64,
    pub lap_zeta: f64,
}

impl ModalField {
    pub(crate) fn new(state: &ModeState, params: &ConvectionParams) -> Result<Self> {
        let (a, b) = match (state.a.len(), state.bm.len()) {
            (4, 4) => {
                ([state.a[0], state.a[1], state.a[2], state.a[3]], [state.bm[0], state.bm[1], state.bm[2], state.bm[3]])
            }
            (1, 2) => ([state.a[0], 0.0, 0.0, 0.0], [state.bm[0], state.bm[1], 0.0, 0.0]),
            (n, m) => {
                return Err(contract(format!(
                    "field reconstruction needs N = M = 4 or the L63 layout, got N = {n}, M = {m}"
                )))
            }
        };
        let (alpha, beta) = (params.alpha, params.beta);
        let k2 = params.k2();
        Ok(Self {
            a,
            b,
            alpha,
            beta,
            c_zeta: SQRT_2 * k2 / (alpha * beta),
            c_theta: k2.powi(3) / (alpha * alpha * beta * params.rayleigh),
        })
    }

    pub(crate) fn at(&self, x: f64, z: f64) -> PointValues {
        let (al, be) = (self.alpha, self.beta);
        let (sx, cx) = (al * x).sin_cos();
        let (s1, c1) = (be * z).sin_cos();
        let (s2, c2) = (2.0 * be * z).sin_cos();
        let (s3, c3) = (3.0 * be * z).sin_cos();
        let s4 = (4.0 * be * z).sin();
        let [a1, a2, a3, a4] = self.a;
        let [b1, b2, b3, b4] = self.b;
        let cz = self.c_zeta;

        let zeta = cz * (a1 * sx * s1 + a2 * s1 + a3 * cx * s2 + a4 * s3);
        let theta = self.c_theta * (SQRT_2 * b1 * cx * s1 + b2 * s2 + b3 * sx * s2 + b4 * s4);
        let dzeta_dz = cz * (a1 * be * sx * c1 + a2 * be * c1 + 2.0 * be * a3 * cx * c2 + 3.0 * be * a4 * c3);
        let dzeta_dx = cz * (a1 * al * cx * s1 - a3 * al * sx * s2);
        // mixed partials, computed independently for each velocity component
        let dux_dx = -cz * (a1 * al * be * cx * c1 - 2.0 * al * be * a3 * sx * c2);
        let duz_dz = cz * (a1 * al * be * cx * c1 - 2.0 * al * be * a3 * sx * c2);
        let lap_zeta = -cz
            * ((al * al + be * be) * a1 * sx * s1
                + be * be * a2 * s1
                + (al * al + 4.0 * be * be) * a3 * cx * s2
                + 9.0 * be * be * a4 * s3);
        PointValues { zeta, theta, ux: -dzeta_dz, uz: dzeta_dx, dux_dx, duz_dz, lap_zeta }
    }
}

/// Evaluate the mode expansions on a uniform grid.
pub fn reconstruct_fields(state: &ModeState, params: &ConvectionParams, nx: usize, nz: usize) -> Result<FieldSnapshot> {
    if nx < 2 || nz < 2 {
        return Err(Error::InvalidGrid { nx, nz });
    }
    let modal = ModalField::new(state, params)?;
    let xs: Vec<f64> = (0..nx).map(|i| params.gamma_aspect * i as f64 / (nx - 1) as f64).collect();
    let zs: Vec<f64> = (0..nz).map(|j| j as f64 / (nz - 1) as f64).collect();
    let cap = nx * nz;
    let mut snap = FieldSnapshot {
        nx,
        nz,
        x: xs.clone(),
        z: zs.clone(),
        zeta: Vec::with_capacity(cap),
        theta: Vec::with_capacity(cap),
        temp_total: Vec::with_capacity(cap),
        ux: Vec::with_capacity(cap),
        uz: Vec::with_capacity(cap),
        vorticity: Vec::with_capacity(cap),
        c_zeta: modal.c_zeta,
        c_theta: modal.c_theta,
        params: *params,
        amplitudes: state.clone(),
    };
    for &z in &zs {
        for &x in &xs {
            let v = modal.at(x, z);
            snap.zeta.push(v.zeta);
            snap.theta.push(v.theta);
            snap.temp_total.push(1.0 - z + v.theta);
            snap.ux.push(v.ux);
            snap.uz.push(v.uz);
            snap.vorticity.push(-v.lap_zeta);
        }
    }
    Ok(snap)
}

/// Domain-averaged energy and vorticity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldDiagnostics {
    /// `E = kinetic + potential`.
    pub energy: f64,
    /// `(1/2A) int |grad zeta|^2 dA`.
    pub kinetic: f64,
    /// `-(1/2A) int z theta dA`.
    pub potential: f64,
    /// `Omega = (1/A) int omega dA`.
    pub vorticity: f64,
}

/// Trapezoidal quadrature of the energy and mean vorticity of a snapshot.
pub fn energy_vorticity(snap: &FieldSnapshot) -> FieldDiagnostics {
    let (nx, nz) = (snap.nx, snap.nz);
    let wx = trapezoid_weights(&snap.x);
    let wz = trapezoid_weights(&snap.z);
    let area = snap.params.gamma_aspect;
    let mut kin = 0.0;
    let mut pot = 0.0;
    let mut vort = 0.0;
    for j in 0..nz {
        for i in 0..nx {
            let k = j * nx + i;
            let w = wx[i] * wz[j];
            kin += w * (snap.ux[k] * snap.ux[k] + snap.uz[k] * snap.uz[k]);
            pot += w * snap.z[j] * snap.theta[k];
            vort += w * snap.vorticity[k];
        }
    }
    let kinetic = kin / (2.0 * area);
    let potential = -pot / (2.0 * area);
    FieldDiagnostics { energy: kinetic + potential, kinetic, potential, vorticity: vort / area }
}

fn trapezoid_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let h = nodes[i + 1] - nodes[i];
        w[i] += h / 2.0;
        w[i + 1] += h / 2.0;
    }
    w
}

impl FieldSnapshot {
    /// One field as a CSV grid: header `z\x,x_0,...`, one row per `z`.
    pub fn grid_csv(&self, field: &[f64]) -> String {
        let mut out = String::from("z\\x");
        for x in &self.x {
            let _ = write!(out, ",{x:.16e}");
        }
        out.push('\n');
        for (j, z) in self.z.iter().enumerate() {
            let _ = write!(out, "{z:.16e}");
            for v in &field[j * self.nx..(j + 1) * self.nx] {
                let _ = write!(out, ",{v:.16e}");
            }
            out.push('\n');
        }
        out
    }

    /// `(name, grid)` pairs for every stored field.
    pub fn named_fields(&self) -> [(&'static str, &[f64]); 6] {
        [
            ("zeta", &self.zeta),
            ("theta", &self.theta),
            ("temperature", &self.temp_total),
            ("ux", &self.ux),
            ("uz", &self.uz),
            ("vorticity", &self.vorticity),
        ]
    }
}
