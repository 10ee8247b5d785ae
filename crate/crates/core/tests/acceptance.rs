//! Acceptance checks, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so every line is printed. Criteria
//! listed in `KNOWN_FAILURES` are reported but do not fail the run; any
//! other FAIL does, and so does a known failure that starts passing.
//! Set `QRC_ACCEPT_STRICT=1` to fail on every FAIL line, and
//! `QRC_ACCEPT_ONLY=<id>` to run a single criterion.

use nalgebra::DMatrix;
use qrc_core::dynamics::{
    largest_lyapunov, lorenz63_rhs, lorenz8_rhs, ConvectionParams, Lorenz63, Lorenz8, LyapunovConfig, ModeState,
};
use qrc_core::experiments::*;
use qrc_core::qsim::{exact_probabilities, run_blocked_circuit, run_circuit, BlockPartition, Circuit, Gate};
use qrc_core::reservoir::{collect_trace, ridge_fit, Normalization, QrcConfig, ReservoirTrace};
use qrc_core::rng;
use rand::Rng;
use std::time::{Duration, Instant};

const KNOWN_FAILURES: &[u32] = &[1, 6, 7, 8, 10];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

type Check = (u32, &'static str, u64, fn() -> Outcome);

fn main() {
    let strict = std::env::var("QRC_ACCEPT_STRICT").is_ok_and(|v| v == "1");
    let only: Option<u32> = std::env::var("QRC_ACCEPT_ONLY").ok().and_then(|v| v.parse().ok());
    let checks: [Check; 11] = [
        (1, "lyapunov exponents", 10, lyapunov),
        (2, "L63 reduction", 1, l63_reduction),
        (3, "simulator properties", 30, simulator),
        (4, "ridge oracle", 5, ridge_oracle),
        (5, "open-loop reconstruction", 600, open_loop),
        (6, "CRCM regularization curve", 120, crcm_curve),
        (7, "closed-loop horizon", 600, closed_loop),
        (8, "p-block monotonicity", 600, pblocks),
        (9, "leak-rate benchmarks", 120, leak_rate),
        (10, "noise ordering", 600, noise_ordering),
        (11, "operation-count crossover", 1, opcount),
    ];
    let mut bad = Vec::new();
    for (id, name, budget, f) in checks.into_iter().filter(|c| only.is_none_or(|o| o == c.0)) {
        let t = Instant::now();
        let mut o = f();
        let took = t.elapsed();
        if took > Duration::from_secs(budget) {
            o.pass = false;
            o.detail.push_str(&format!("; over the {budget} s budget"));
        }
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        let known = KNOWN_FAILURES.contains(&id);
        let tag = match (o.pass, known) {
            (false, true) => " (known)",
            (true, true) => " (expected to fail)",
            _ => "",
        };
        println!("{verdict} [{id:>2}] {name}{tag}: {} ({:.1} s)", o.detail, took.as_secs_f64());
        if o.pass == known || (strict && !o.pass) {
            bad.push(id);
        }
    }
    if !bad.is_empty() {
        eprintln!("unexpected acceptance results for criteria {bad:?}");
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------- dynamics

fn lyapunov() -> Outcome {
    let cfg = LyapunovConfig::default();
    let p = ConvectionParams::classic();
    let l63 = largest_lyapunov(&Lorenz63::new(p), &[1.0, 1.0, 20.0], &cfg).unwrap().lambda1;
    let x0 = [1.0, 0.3, -0.2, 0.1, 1.0, 20.0, 0.2, -0.1];
    let l8 = largest_lyapunov(&Lorenz8::new(p), &x0, &cfg).unwrap().lambda1;
    let ok63 = (l63 - 0.9056).abs() <= 0.02;
    let ok8 = (l8 - 0.825).abs() <= 0.03;
    outcome(ok63 && ok8, format!("L63 {l63:.4} (0.9056 +- 0.02), L8 {l8:.4} (0.825 +- 0.03)"))
}

fn l63_reduction() -> Outcome {
    let p = ConvectionParams::classic();
    let mut r = rng::stream(11, 0);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (a1, b1, b2) = (r.random_range(-25.0..25.0), r.random_range(-25.0..25.0), r.random_range(0.0..50.0));
        let d8 = lorenz8_rhs(&ModeState::new(vec![a1, 0.0, 0.0, 0.0], vec![b1, b2, 0.0, 0.0]), &p).unwrap();
        let d3 = lorenz63_rhs(&ModeState::new(vec![a1], vec![b1, b2]), &p).unwrap();
        let full = [d3.a[0], 0.0, 0.0, 0.0, d3.bm[0], d3.bm[1], 0.0, 0.0];
        for (x, y) in d8.to_flat().iter().zip(full) {
            worst = worst.max((x - y).abs());
        }
    }
    let c = 72f64.sqrt();
    let mut fixed = 0.0f64;
    for s in [1.0, -1.0] {
        let d = lorenz63_rhs(&ModeState::new(vec![s * c], vec![s * c, -27.0]), &p).unwrap();
        fixed = fixed.max(d.to_flat().iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }
    outcome(
        worst <= 1e-14 && fixed < 1e-10,
        format!("max subspace mismatch {worst:.1e}, fixed-point residual {fixed:.1e}"),
    )
}

// ---------------------------------------------------------------- simulator

fn random_circuit(n: usize, gates: usize, r: &mut rng::Rng) -> Circuit {
    let mut c = Circuit::new(n).unwrap();
    for _ in 0..gates {
        let a = r.random_range(0..n);
        if n == 1 || r.random_bool(0.5) {
            c.push(Gate::Ry { qubit: a, angle: r.random_range(-10.0..10.0) }).unwrap();
        } else {
            let t = (a + r.random_range(1..n)) % n;
            c.push(Gate::Cnot { control: a, target: t }).unwrap();
        }
    }
    c
}

/// Real amplitudes, qubit 0 most significant.
fn oracle_ry(amps: &mut [f64], n: usize, q: usize, angle: f64) {
    let (s, c) = (angle / 2.0).sin_cos();
    let bit = 1 << (n - 1 - q);
    for i in 0..amps.len() {
        if i & bit == 0 {
            let (a0, a1) = (amps[i], amps[i | bit]);
            amps[i] = c * a0 - s * a1;
            amps[i | bit] = s * a0 + c * a1;
        }
    }
}

fn oracle_cnot(amps: &mut [f64], n: usize, ctl: usize, tgt: usize) {
    let (cb, tb) = (1 << (n - 1 - ctl), 1 << (n - 1 - tgt));
    for i in 0..amps.len() {
        if i & cb != 0 && i & tb == 0 {
            amps.swap(i, i | tb);
        }
    }
}

/// Probabilities of one block of `size` qubits fed the angles whose global
/// cursor position falls inside `start..start + size`.
fn oracle_block(n: usize, start: usize, size: usize, angles: &[f64]) -> Vec<f64> {
    let mut amps = vec![0.0; 1 << size];
    amps[0] = 1.0;
    for (i, &a) in angles.iter().enumerate() {
        let q = i % n;
        if q < start || q >= start + size {
            continue;
        }
        let local = q - start;
        oracle_ry(&mut amps, size, local, a);
        if size > 1 {
            let t = if local == size - 1 { local - 1 } else { local + 1 };
            oracle_cnot(&mut amps, size, local, t);
        }
    }
    amps.iter().map(|a| a * a).collect()
}

fn kron(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

fn simulator() -> Outcome {
    let mut r = rng::stream(12, 0);
    let mut drift = 0.0f64;
    let mut involution = 0.0f64;
    let mut additivity = 0.0f64;
    for trial in 0..50 {
        let n = 1 + trial % 8;
        let c = random_circuit(n, 200, &mut r);
        let s = run_circuit(&c).unwrap();
        drift = drift.max((s.norm_sqr() - 1.0).abs());
        if n >= 2 {
            let (ctl, tgt) = (trial % n, (trial + 1) % n);
            let mut t = s.clone();
            t.apply_cnot(ctl, tgt).unwrap();
            t.apply_cnot(ctl, tgt).unwrap();
            involution = involution.max(t.amps().iter().zip(s.amps()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
        }
        let (q, a, b) = (trial % n, r.random_range(-7.0..7.0), r.random_range(-7.0..7.0));
        let mut two = s.clone();
        two.apply_ry(q, a).unwrap();
        two.apply_ry(q, b).unwrap();
        let mut one = s;
        one.apply_ry(q, a + b).unwrap();
        additivity = additivity.max(two.amps().iter().zip(one.amps()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max));
    }

    let mut blocked = 0.0f64;
    let mut cases = 0;
    for n in 1..=6 {
        for p in 1..=n {
            let bp = BlockPartition::new(n, p).unwrap();
            for _ in 0..10 {
                let len = r.random_range(0..3 * n + 4);
                let angles: Vec<f64> = (0..len).map(|_| r.random_range(-7.0..7.0)).collect();
                let got = run_blocked_circuit(&bp, &angles).unwrap();
                let mut want = vec![1.0];
                for start in (0..n).step_by(p) {
                    want = kron(&want, &oracle_block(n, start, p.min(n - start), &angles));
                }
                blocked = blocked.max(got.as_slice().iter().zip(&want).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
                cases += 1;
            }
        }
    }
    // the oracle also agrees with a plain full-register run when p = n
    let mut full = 0.0f64;
    for n in 1..=6 {
        let angles: Vec<f64> = (0..2 * n + 3).map(|_| r.random_range(-7.0..7.0)).collect();
        let mut amps = vec![0.0; 1 << n];
        amps[0] = 1.0;
        for (i, &a) in angles.iter().enumerate() {
            let q = i % n;
            oracle_ry(&mut amps, n, q, a);
            if n > 1 {
                oracle_cnot(&mut amps, n, q, if q == n - 1 { q - 1 } else { q + 1 });
            }
        }
        let got = exact_probabilities(&run_circuit(&Circuit::from_gates(n, block_gates(n, &angles)).unwrap()).unwrap());
        full = full.max(got.as_slice().iter().zip(&amps).map(|(x, a)| (x - a * a).abs()).fold(0.0, f64::max));
    }
    let pass = drift < 1e-10 && involution < 1e-12 && additivity < 1e-12 && blocked < 1e-12 && full < 1e-12;
    outcome(
        pass,
        format!(
            "norm drift {drift:.1e}, CNOT^2 {involution:.1e}, RY additivity {additivity:.1e}, \
             blocked vs tensor oracle {blocked:.1e} over {cases} cases, full register {full:.1e}"
        ),
    )
}

fn block_gates(n: usize, angles: &[f64]) -> Vec<Gate> {
    qrc_core::qsim::build_block(n, angles, 0).unwrap().0
}

// ---------------------------------------------------------------- ridge

fn ridge_oracle() -> Outcome {
    let mut r = rng::stream(13, 0);
    let states = DMatrix::from_fn(8, 50, |_, _| r.random_range(-1.0..1.0));
    let targets = DMatrix::from_fn(3, 50, |_, _| r.random_range(-2.0..2.0));
    let trace = ReservoirTrace::new(states.clone(), targets.clone()).unwrap();
    let mut worst = 0.0f64;
    for gamma in [0.01, 0.1, 1.0] {
        let closed = ridge_fit(&trace, gamma).unwrap().matrix();
        // conjugate gradients on the cost, driven by gradient evaluations only
        let grad = |w: &DMatrix<f64>| (w * &states - &targets) * states.transpose() * 2.0 + w * (2.0 * gamma);
        let mut w = DMatrix::zeros(3, 8);
        let mut g = grad(&w);
        let mut d = -&g;
        for _ in 0..200 {
            if g.norm() < 1e-14 {
                break;
            }
            let hd = grad(&(&w + &d)) - &g;
            let alpha = -g.dot(&d) / d.dot(&hd);
            w += &d * alpha;
            let g_new = grad(&w);
            d = -&g_new + d * (g_new.norm_squared() / g.norm_squared());
            g = g_new;
        }
        worst = worst.max((&w - &closed).norm() / closed.norm());
    }
    outcome(worst <= 1e-6, format!("max relative difference {worst:.1e} over gamma in {{0.01, 0.1, 1}}"))
}

// ---------------------------------------------------------------- sweeps

fn cell<'a>(table: &'a [AggregateStats], want: &[(&str, Param)]) -> &'a AggregateStats {
    table
        .iter()
        .find(|a| want.iter().all(|(k, v)| a.key.get(*k) == Some(v)))
        .unwrap_or_else(|| panic!("no cell {want:?}"))
}

fn horizons(records: &[RunRecord], want: &[(&str, Param)]) -> Vec<f64> {
    records
        .iter()
        .filter(|r| want.iter().all(|(k, v)| r.params.get(*k) == Some(v)))
        .map(|r| r.horizon.unwrap_or(0.0))
        .collect()
}

fn open_loop() -> Outcome {
    let mut s = SweepSpec::defaults(Scenario::OpenLoopL8);
    s.grid.qubits = vec![7];
    s.grid.eps = vec![0.05];
    s.seeds = 10;
    let table = summarize(&s, &run_sweep(&s, &[], &|_| {}).unwrap());
    let best = table.iter().min_by(|a, b| a.median.total_cmp(&b.median)).unwrap();
    let target = 1.36e-3;
    let pass = best.median <= 3.0 * target && best.median >= target / 3.0;
    outcome(
        pass,
        format!("minimal median MSE {:.3e} at gamma {} (target 1.36e-3 within x3)", best.median, best.key["gamma"]),
    )
}

fn crcm_curve() -> Outcome {
    let mut s = SweepSpec::defaults(Scenario::CrcmRegularization);
    s.grid.n_res = vec![512];
    s.grid.qubits = Vec::new();
    s.seeds = 10;
    let out = sweep_crcm_regularization(&s).unwrap();
    let best = out.table.iter().min_by(|a, b| a.median.total_cmp(&b.median)).unwrap();
    let g = best.key["gamma"].as_f64().unwrap();
    let low = cell(&out.table, &[("gamma", Param::Num(1e-10))]).median;
    let at = (0.1..=10.0).contains(&g);
    let value = best.median <= 3.0 * 2.8e-3 && best.median >= 2.8e-3 / 3.0;
    outcome(
        at && value && low > best.median,
        format!(
            "minimum {:.3e} at gamma {g:e} (want gamma in [0.1, 10], value 2.8e-3 within x3); gamma 1e-10 gives {low:.3e}",
            best.median
        ),
    )
}

fn closed_loop() -> Outcome {
    let mut s = SweepSpec::defaults(Scenario::ClosedLoopL63);
    s.grid.qubits = vec![7];
    s.grid.eps = vec![0.025, 0.05, 1.0];
    s.seeds = 10;
    let recs = run_sweep(&s, &[], &|_| {}).unwrap();
    let best = |eps: f64| horizons(&recs, &[("eps", Param::Num(eps))]).into_iter().fold(0.0, f64::max);
    let med = |eps: f64| median(&horizons(&recs, &[("eps", Param::Num(eps))]));
    let (b1, b2) = (best(0.025), best(0.05));
    let scaled = b1 >= 1.0 && b2 >= 1.0;
    let (m05, m1) = (med(0.05), med(1.0));
    let memory = m05 > m1;

    let mut big = s.clone();
    big.grid.qubits = vec![9];
    big.grid.eps = vec![0.05];
    let recs9 = run_sweep(&big, &[], &|_| {}).unwrap();
    let m9 = median(&horizons(&recs9, &[]));
    let large = (m9 - 1.5).abs() <= 0.5;
    outcome(
        scaled && memory && large,
        format!(
            "n=7 best-of-10 horizon {b1:.2} (eps 0.025), {b2:.2} (eps 0.05), need >= 1; \
             median eps 0.05 {m05:.2} vs eps 1 {m1:.2}; n=9 median {m9:.2}, need 1.5 +- 0.5"
        ),
    )
}

fn pblocks() -> Outcome {
    let mut s = SweepSpec::defaults(Scenario::PblockL8);
    s.grid.qubits = vec![4, 6];
    s.grid.block_sizes = vec![2, 4, 6];
    s.seeds = 20;
    let out = sweep_pblocks(&s).unwrap();
    let med = |n: usize, p: usize| cell(&out.table, &[("n", Param::Int(n as u64)), ("p", Param::Int(p as u64))]).median;
    let mut detail = Vec::new();
    let mut monotone = true;
    for n in [4, 6] {
        let (m2, mn) = (med(n, 2), med(n, n));
        monotone &= mn < m2;
        detail.push(format!("n={n}: p=2 {m2:.4}, p=n {mn:.4}"));
    }

    // p = n against the unpartitioned circuit, over a whole training run
    let data = &prepare_data(&s).unwrap()[0];
    let mut worst = 0.0f64;
    for n in [4, 6] {
        let mut plain = QrcConfig::reduced(n, 0.2, s.base_seed);
        plain.normalization = Some(Normalization::fit(&data.train, &data.inputs).unwrap());
        let mut blocked = plain.clone();
        blocked.block_size = Some(n);
        let a = collect_trace(&plain, &data.train, s.washout, &data.inputs, &data.outputs).unwrap();
        let b = collect_trace(&blocked, &data.train, s.washout, &data.inputs, &data.outputs).unwrap();
        worst = worst.max((&a.trace.states - &b.trace.states).amax());
    }
    outcome(
        monotone && worst <= 1e-12,
        format!("median MSE {}; p=n vs unpartitioned max feature difference {worst:.1e}", detail.join(", ")),
    )
}

fn leak_rate() -> Outcome {
    let mut s = SweepSpec::defaults(Scenario::BenchmarkLeakrate);
    s.seeds = 10;
    let out = benchmark_leakrate(&s).unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for b in ["narma2", "mackey_glass"] {
        let m = |eps: f64| cell(&out.table, &[("benchmark", Param::Text(b.into())), ("eps", Param::Num(eps))]).median;
        let (leaky, plain) = (m(0.2), m(1.0));
        pass &= leaky < plain;
        detail.push(format!("{b}: eps 0.2 {leaky:.3e} vs eps 1 {plain:.3e}"));
    }
    outcome(pass, detail.join(", "))
}

fn noise_ordering() -> Outcome {
    let mut s = SweepSpec::defaults(Scenario::ReducedNoisyL8);
    s.grid.qubits = vec![7];
    s.seeds = 10;
    let out = run_reduced_noisy(&s).unwrap();
    let m = |env: &str| cell(&out.table, &[("env", Param::Text(env.into()))]).median;
    let (e, sm, nz) = (m("exact"), m("sampled"), m("noisy"));
    outcome(e <= sm && sm <= nz, format!("median MSE exact {e:.6}, sampled {sm:.6}, noisy {nz:.6}"))
}

fn opcount() -> Outcome {
    let scan = opcount_scan(1..=32, 3.0).unwrap();
    let first = crossover(&scan);
    outcome(first == Some(16), format!("first n with quantum count below classical: {first:?}"))
}
