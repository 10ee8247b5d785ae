use proptest::prelude::*;
use qrc_core::dynamics::{
    generate_trajectory, lorenz63_rhs, lorenz8_rhs, mackey_glass_series, narma2_series, rk4_integrate,
    ConvectionParams, Lorenz63, MackeyGlassConfig, ModeState, ModelKind, NarmaConfig,
};
use qrc_core::qsim::{
    build_blocked_gates, exact_probabilities, run_blocked_circuit, run_circuit, sample_shots, BlockPartition, Circuit,
    Gate, PureState,
};

fn circuit_strategy(max_n: usize, max_gates: usize) -> impl Strategy<Value = Circuit> {
    (1..=max_n).prop_flat_map(move |n| {
        let gate = (0..n, 0..n, -10.0..10.0f64, any::<bool>()).prop_map(move |(a, b, angle, is_ry)| {
            if is_ry || n == 1 {
                Gate::Ry { qubit: a, angle }
            } else {
                let target = if a == b { (a + 1) % n } else { b };
                Gate::Cnot { control: a, target }
            }
        });
        prop::collection::vec(gate, 0..=max_gates).prop_map(move |g| Circuit::from_gates(n, g).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn l8_restricted_to_l63_subspace(a1 in -30.0..30.0f64, b1 in -30.0..30.0f64, b2 in -10.0..60.0f64) {
        let p = ConvectionParams::classic();
        let d8 = lorenz8_rhs(&ModeState::new(vec![a1, 0.0, 0.0, 0.0], vec![b1, b2, 0.0, 0.0]), &p).unwrap();
        let d3 = lorenz63_rhs(&ModeState::new(vec![a1], vec![b1, b2]), &p).unwrap();
        prop_assert!((d8.a[0] - d3.a[0]).abs() < 1e-14);
        prop_assert!((d8.bm[0] - d3.bm[0]).abs() < 1e-14);
        prop_assert!((d8.bm[1] - d3.bm[1]).abs() < 1e-14);
        for v in [d8.a[1], d8.a[2], d8.a[3], d8.bm[2], d8.bm[3]] {
            prop_assert!(v.abs() < 1e-14);
        }
    }

    #[test]
    fn circuits_preserve_norm(c in circuit_strategy(8, 200)) {
        let s = run_circuit(&c).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        let total: f64 = exact_probabilities(&s).as_slice().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn blocked_circuit_equals_tensor_product_of_blocks(
        n in 2usize..=7,
        angles in prop::collection::vec(-7.0..7.0f64, 0..40),
    ) {
        for p in 1..n {
            let bp = BlockPartition::new(n, p).unwrap();
            let got = run_blocked_circuit(&bp, &angles).unwrap();
            // the same gates on the full register
            let full = Circuit::from_gates(n, build_blocked_gates(&bp, &angles)).unwrap();
            let want = exact_probabilities(&run_circuit(&full).unwrap());
            for (x, y) in got.as_slice().iter().zip(want.as_slice()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
            prop_assert!((got.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn cnot_is_an_involution(c in circuit_strategy(6, 40), ctl in 0usize..6, tgt in 0usize..6) {
        let n = c.n();
        prop_assume!(n >= 2);
        let (ctl, tgt) = (ctl % n, tgt % n);
        prop_assume!(ctl != tgt);
        let s = run_circuit(&c).unwrap();
        let mut t = s.clone();
        t.apply_cnot(ctl, tgt).unwrap();
        t.apply_cnot(ctl, tgt).unwrap();
        for (a, b) in t.amps().iter().zip(s.amps()) {
            prop_assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn ry_angles_add(c in circuit_strategy(5, 30), q in 0usize..5, a in -7.0..7.0f64, b in -7.0..7.0f64) {
        let q = q % c.n();
        let s = run_circuit(&c).unwrap();
        let mut two = s.clone();
        two.apply_ry(q, a).unwrap();
        two.apply_ry(q, b).unwrap();
        let mut one = s;
        one.apply_ry(q, a + b).unwrap();
        for (x, y) in two.amps().iter().zip(one.amps()) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn shot_sampling_is_reproducible(c in circuit_strategy(5, 30), shots in 1u64..100_000, seed in any::<u64>()) {
        let s = run_circuit(&c).unwrap();
        prop_assert_eq!(sample_shots(&s, shots, seed).unwrap(), sample_shots(&s, shots, seed).unwrap());
    }
}

#[test]
fn rk4_order_on_l63() {
    let f = Lorenz63::new(ConvectionParams::classic());
    let x0 = [1.0, 2.0, 20.0];
    let end = |h: f64| {
        let steps = (1.0 / h).round() as usize;
        rk4_integrate(&f, &x0, h, steps).unwrap().row(steps).to_vec()
    };
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let (h1, h2, h3) = (end(0.02), end(0.01), end(0.005));
    let order = (dist(&h1, &h2) / dist(&h2, &h3)).log2();
    assert!(order >= 3.9, "empirical order {order}");
}

#[test]
fn generated_series_are_bit_identical_on_rerun() {
    let p = ConvectionParams::classic();
    for model in [ModelKind::L63, ModelKind::L8] {
        let a = generate_trajectory(model, p, 0.02, 500, 100, 42).unwrap();
        let b = generate_trajectory(model, p, 0.02, 500, 100, 42).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
    }
    let cfg = MackeyGlassConfig::default();
    assert_eq!(mackey_glass_series(&cfg, 300).unwrap(), mackey_glass_series(&cfg, 300).unwrap());
    assert_eq!(
        narma2_series(&NarmaConfig::default(), 300).unwrap(),
        narma2_series(&NarmaConfig::default(), 300).unwrap()
    );
}

// Gate cost should double with each added qubit.
#[test]
fn gate_cost_scales_with_register_size() {
    use std::time::Instant;
    fn best_time(n: usize) -> f64 {
        let mut s = PureState::zero(n).unwrap();
        let mut best = f64::INFINITY;
        for rep in 0..9 {
            let t = Instant::now();
            for q in 0..4 {
                s.apply_ry(q, 0.1 * (rep + 1) as f64).unwrap();
                s.apply_cnot(q, q + 1).unwrap();
            }
            best = best.min(t.elapsed().as_secs_f64());
        }
        std::hint::black_box(s.amps()[0]);
        best
    }
    let ratio = best_time(19) / best_time(18);
    assert!((1.8..=2.3).contains(&ratio), "time ratio n=19 / n=18 = {ratio}");
}
