use super::{mode_labels, ConvectionParams, ModeState};
use crate::error::{contract, Result};
use std::f64::consts::SQRT_2;

/// Autonomous right-hand side `dx/dtau = f(x)`.
pub trait VectorField: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64], dx: &mut [f64]);
    fn labels(&self) -> Vec<String> {
        (1..=self.dim()).map(|i| format!("x{i}")).collect()
    }
}

/// Adapter turning a closure into a [`VectorField`].
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64]) + Sync> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64], &mut [f64]) + Sync> VectorField for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[f64], dx: &mut [f64]) {
        (self.f)(x, dx)
    }
}

/// The three-mode model, state `(A_1, B_1, B_2)`.
#[derive(Debug, Clone, Copy)]
pub struct Lorenz63 {
    pub params: ConvectionParams,
}

impl Lorenz63 {
    pub fn new(params: ConvectionParams) -> Self {
        Self { params }
    }
}

impl VectorField for Lorenz63 {
    fn dim(&self) -> usize {
        3
    }

    fn eval(&self, x: &[f64], dx: &mut [f64]) {
        let ConvectionParams { sigma, r, b, .. } = self.params;
        let (a1, b1, b2) = (x[0], x[1], x[2]);
        dx[0] = sigma * (b1 - a1);
        dx[1] = -b1 + r * a1 + a1 * b2;
        dx[2] = -b * b2 - a1 * b1;
    }

    fn labels(&self) -> Vec<String> {
        mode_labels(1, 2)
    }
}

/// The eight-mode model with shear, state `(A_1..A_4, B_1..B_4)`.
///
/// The default coefficients come from a direct Galerkin projection of the
/// two-dimensional Boussinesq equations onto the eight modes used by
/// [`reconstruct_fields`](super::reconstruct_fields). They reduce exactly to
/// [`Lorenz63`] on the `A_2 = A_3 = A_4 = B_3 = B_4 = 0` subspace and conserve
/// kinetic energy and temperature variance triad by triad.
///
/// [`Lorenz8::as_printed`] keeps an alternative coefficient set that differs
/// in six nonlinear/coupling terms; with it the shear modes decay and every
/// trajectory collapses onto the three-mode subspace at `r = 28`.
#[derive(Debug, Clone, Copy)]
pub struct Lorenz8 {
    pub params: ConvectionParams,
    c: Coefficients,
}

/// Signed coefficient of every term that is not a plain damping or
/// `sigma (B_1 - A_1)`.
#[derive(Debug, Clone, Copy)]
struct Coefficients {
    a1_a2a3: f64,
    a1_a3a4: f64,
    a2_a1a3: f64,
    a3_lin: f64,
    a3_b3: f64,
    a3_a1a2: f64,
    a3_a1a4: f64,
    a4_a1a3: f64,
    b1_a2b3: f64,
    b1_a4b3: f64,
    b3_lin: f64,
    b3_a3: f64,
    b3_a2b1: f64,
    b3_a2b3: f64,
    b3_a4b1: f64,
    b3_a3b4: f64,
    b4_a3b3: f64,
}

impl Coefficients {
    fn projected(p: &ConvectionParams) -> Self {
        let a2 = p.alpha * p.alpha;
        let b2 = p.beta * p.beta;
        let k2 = a2 + b2;
        let k2_4 = a2 + 4.0 * b2;
        Self {
            a1_a2a3: -(3.0 * b2 + a2) / (SQRT_2 * k2),
            a1_a3a4: (3.0 * a2 - 15.0 * b2) / (SQRT_2 * k2),
            a2_a1a3: 3.0 / (2.0 * SQRT_2),
            a3_lin: k2_4 / k2,
            a3_b3: -k2 / (SQRT_2 * k2_4),
            a3_a1a2: a2 / (SQRT_2 * k2_4),
            a3_a1a4: (24.0 * b2 - 3.0 * a2) / (SQRT_2 * k2_4),
            a4_a1a3: -1.0 / (2.0 * SQRT_2),
            b1_a2b3: 0.5,
            b1_a4b3: -1.5,
            b3_lin: k2_4 / k2,
            b3_a3: -SQRT_2,
            b3_a2b1: -1.0,
            b3_a2b3: 0.0,
            b3_a4b1: 3.0,
            b3_a3b4: -2.0 * SQRT_2,
            b4_a3b3: SQRT_2,
        }
    }

    fn printed(p: &ConvectionParams) -> Self {
        let a2 = p.alpha * p.alpha;
        let b2 = p.beta * p.beta;
        let k2 = a2 + b2;
        Self {
            a2_a1a3: -3.0 / (2.0 * SQRT_2),
            a3_a1a2: a2 / (SQRT_2 * k2),
            b1_a4b3: 1.5,
            b3_a3: SQRT_2,
            b3_a2b1: 0.0,
            b3_a2b3: -1.0,
            b4_a3b3: 3.0 * SQRT_2 / 4.0,
            ..Self::projected(p)
        }
    }
}

impl Lorenz8 {
    pub fn new(params: ConvectionParams) -> Self {
        Self { params, c: Coefficients::projected(&params) }
    }

    /// Alternative coefficient set, kept for comparison (see type docs).
    pub fn as_printed(params: ConvectionParams) -> Self {
        Self { params, c: Coefficients::printed(&params) }
    }
}

impl VectorField for Lorenz8 {
    fn dim(&self) -> usize {
        8
    }

    fn eval(&self, x: &[f64], dx: &mut [f64]) {
        let ConvectionParams { sigma, r, b, .. } = self.params;
        let c = &self.c;
        let [a1, a2, a3, a4, b1, b2, b3, b4] = [x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]];

        dx[0] = sigma * (b1 - a1) + c.a1_a2a3 * a2 * a3 + c.a1_a3a4 * a3 * a4;
        dx[1] = -sigma * b / 4.0 * a2 + c.a2_a1a3 * a1 * a3;
        dx[2] = -sigma * c.a3_lin * a3 + sigma * c.a3_b3 * b3 + c.a3_a1a2 * a1 * a2 + c.a3_a1a4 * a1 * a4;
        dx[3] = -9.0 * sigma * b / 4.0 * a4 + c.a4_a1a3 * a1 * a3;
        dx[4] = -b1 + r * a1 + a1 * b2 + c.b1_a2b3 * a2 * b3 + c.b1_a4b3 * a4 * b3;
        dx[5] = -b * b2 - a1 * b1;
        dx[6] = -c.b3_lin * b3
            + c.b3_a3 * r * a3
            + c.b3_a2b1 * a2 * b1
            + c.b3_a2b3 * a2 * b3
            + c.b3_a4b1 * a4 * b1
            + c.b3_a3b4 * a3 * b4;
        dx[7] = -4.0 * b * b4 + c.b4_a3b3 * a3 * b3;
    }

    fn labels(&self) -> Vec<String> {
        mode_labels(4, 4)
    }
}

fn eval_state(field: &dyn VectorField, state: &ModeState, n: usize, m: usize) -> Result<ModeState> {
    if state.a.len() != n || state.bm.len() != m {
        return Err(contract(format!("expected N = {n}, M = {m}, got N = {}, M = {}", state.a.len(), state.bm.len())));
    }
    let x = state.to_flat();
    let mut dx = vec![0.0; x.len()];
    field.eval(&x, &mut dx);
    let mut d = ModeState::from_flat(n, &dx)?;
    d.tau = state.tau;
    Ok(d)
}

/// Time derivative of an eight-mode state.
pub fn lorenz8_rhs(state: &ModeState, params: &ConvectionParams) -> Result<ModeState> {
    eval_state(&Lorenz8::new(*params), state, 4, 4)
}

/// Time derivative of a three-mode state.
pub fn lorenz63_rhs(state: &ModeState, params: &ConvectionParams) -> Result<ModeState> {
    eval_state(&Lorenz63::new(*params), state, 1, 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn origin_is_fixed_point() {
        let p = ConvectionParams::classic();
        let d = lorenz8_rhs(&ModeState::zeros(4, 4), &p).unwrap();
        assert!(d.to_flat().iter().all(|&v| v == 0.0));
        let d = lorenz63_rhs(&ModeState::zeros(1, 2), &p).unwrap();
        assert!(d.to_flat().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let p = ConvectionParams::classic();
        assert!(lorenz8_rhs(&ModeState::zeros(1, 2), &p).is_err());
        assert!(lorenz63_rhs(&ModeState::zeros(4, 4), &p).is_err());
    }

    #[test]
    fn nonzero_fixed_points_of_l63() {
        let p = ConvectionParams::classic();
        let s = 72f64.sqrt();
        for sign in [1.0, -1.0] {
            let st = ModeState::new(vec![sign * s], vec![sign * s, -27.0]);
            let d = lorenz63_rhs(&st, &p).unwrap();
            assert!(d.to_flat().iter().all(|v| v.abs() < 1e-10), "{d:?}");
        }
    }

    // Every term written out by hand with alpha^2 = pi^2/2, beta^2 = pi^2:
    // alpha^2 + beta^2 = 3 pi^2 / 2 and alpha^2 + 4 beta^2 = 9 pi^2 / 2, so the
    // pi^2 factors cancel in every fraction.
    #[test]
    fn all_ones_hand_evaluation() {
        let p = ConvectionParams::classic();
        assert!((p.alpha * p.alpha - PI * PI / 2.0).abs() < 1e-12);
        let st = ModeState::new(vec![1.0; 4], vec![1.0; 4]);
        let d = lorenz8_rhs(&st, &p).unwrap().to_flat();
        let s2 = 2f64.sqrt();
        let (sigma, r, b) = (10.0, 28.0, 8.0 / 3.0);
        // (3 + 1/2) / (3/2) = 7/3 ; (3/2 - 15) / (3/2) = -9
        let da1 = sigma * 0.0 - (7.0 / 3.0) / s2 + (-9.0) / s2;
        let da2 = -sigma * b / 4.0 + 3.0 / (2.0 * s2);
        // (9/2)/(3/2) = 3 ; (3/2)/(9/2) = 1/3 ; (1/2)/(9/2) = 1/9 ; (24 - 3/2)/(9/2) = 5
        let da3 = -sigma * 3.0 - sigma * (1.0 / 3.0) / s2 + (1.0 / 9.0) / s2 + 5.0 / s2;
        let da4 = -9.0 * sigma * b / 4.0 - 1.0 / (2.0 * s2);
        let db1 = -1.0 + r + 1.0 + 0.5 - 1.5;
        let db2 = -b - 1.0;
        let db3 = -3.0 - 1.0 - s2 * r + 3.0 - 2.0 * s2;
        let db4 = -4.0 * b + s2;
        let expected = [da1, da2, da3, da4, db1, db2, db3, db4];
        for (i, (got, want)) in d.iter().zip(expected).enumerate() {
            assert!((got - want).abs() < 1e-12, "component {i}: {got} vs {want}");
        }
    }

    // Quadratic invariants: with damping and forcing removed, each triad of
    // the nonlinear terms must leave sum(w_i A_i^2) and sum(v_k B_k^2)
    // unchanged, where w_i = k_i^2 <phi_i^2> and v_k = <psi_k^2>.
    #[test]
    fn nonlinear_terms_conserve_energy_and_variance() {
        let p = ConvectionParams::classic();
        let (a2, b2) = (p.alpha * p.alpha, p.beta * p.beta);
        let w = [(a2 + b2) / 4.0, b2 / 2.0, (a2 + 4.0 * b2) / 4.0, 9.0 * b2 / 2.0];
        let v = [0.5, 0.5, 0.25, 0.5];
        let nonlinear = |f: &Lorenz8, x: &[f64]| {
            let mut with = [0.0; 8];
            f.eval(x, &mut with);
            // subtract the linear part, obtained by scaling the state
            let small: Vec<f64> = x.iter().map(|v| v * 1e-6).collect();
            let mut lin = [0.0; 8];
            f.eval(&small, &mut lin);
            let mut out = [0.0; 8];
            for i in 0..8 {
                out[i] = with[i] - lin[i] * 1e6;
            }
            out
        };
        let x = [0.7, -1.3, 0.4, 2.1, -0.6, 1.7, 0.9, -1.1];
        let ok = Lorenz8::new(p);
        let n = nonlinear(&ok, &x);
        let de: f64 = (0..4).map(|i| w[i] * x[i] * n[i]).sum();
        let dv: f64 = (0..4).map(|k| v[k] * x[4 + k] * n[4 + k]).sum::<f64>() - v[0] * x[4] * 0.0;
        // the A1 B2 / A1 B1 pair is part of the conserved set as well
        assert!(de.abs() < 1e-4, "energy drift {de}");
        assert!(dv.abs() < 1e-4, "variance drift {dv}");
        let printed = Lorenz8::as_printed(p);
        let n = nonlinear(&printed, &x);
        let de: f64 = (0..4).map(|i| w[i] * x[i] * n[i]).sum();
        assert!(de.abs() > 1e-2);
    }

    #[test]
    fn printed_coefficients_collapse_to_l63() {
        let p = ConvectionParams::classic();
        let x0 = [0.3, -0.2, 0.5, 0.1, -0.4, 0.2, 0.6, -0.1];
        let shear_max = |f: &dyn VectorField| {
            let ts = crate::dynamics::rk4_integrate(f, &x0, 0.02, 10_000).unwrap();
            let last = ts.row(ts.rows() - 1).to_vec();
            [1, 2, 3, 6, 7].iter().map(|&i| last[i].abs()).fold(0.0, f64::max)
        };
        assert!(shear_max(&Lorenz8::as_printed(p)) < 1e-6);
        assert!(shear_max(&Lorenz8::new(p)) > 1e-2);
    }

    #[test]
    fn l63_subspace_is_invariant() {
        let p = ConvectionParams::classic();
        let st = ModeState::new(vec![1.3, 0.0, 0.0, 0.0], vec![-2.0, 5.0, 0.0, 0.0]);
        let d = lorenz8_rhs(&st, &p).unwrap();
        assert_eq!(&d.a[1..], &[0.0, 0.0, 0.0]);
        assert_eq!(&d.bm[2..], &[0.0, 0.0]);
        let l = lorenz63_rhs(&ModeState::new(vec![1.3], vec![-2.0, 5.0]), &p).unwrap();
        assert_eq!(d.a[0], l.a[0]);
        assert_eq!(d.bm[..2], l.bm[..]);
    }
}
