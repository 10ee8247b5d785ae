use super::aggregate::{aggregate, AggregateStats};
use super::record::{run_key, Param, Params, Provenance, RunRecord};
use super::{Scenario, SweepSpec};
use crate::dynamics::{
    mackey_glass_series, narma2_series, trajectory_from, ConvectionParams, Lorenz63, Lorenz8, MackeyGlassConfig,
    NarmaConfig, TimeSeries, VectorField,
};
use crate::error::{config, Error, Result};
use crate::par;
use crate::reservoir::{
    closed_loop_predict, collect_trace, default_shots, horizon_lyapunov, mse, ridge_fit, CrcConfig, Crcm,
    Normalization, QrcConfig, Reservoir,
};
use nalgebra::DMatrix;
use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

/// Training and test windows of one data source.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub train: TimeSeries,
    pub test: TimeSeries,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

/// Measurement setting of the reduced circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Env {
    Exact,
    Sampled,
    Noisy,
}

impl Env {
    pub const ALL: [Env; 3] = [Env::Exact, Env::Sampled, Env::Noisy];

    pub fn name(self) -> &'static str {
        match self {
            Env::Exact => "exact",
            Env::Sampled => "sampled",
            Env::Noisy => "noisy",
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Job {
    Full { n: usize, eps: f64 },
    Reduced { n: usize, eps: f64, block: Option<usize>, env: Env },
    Crcm { n_res: usize },
}

#[derive(Debug, Clone)]
struct Task {
    params: Params,
    seed: u64,
    job: Job,
    data: usize,
}

fn columns(series: &TimeSeries, names: &[String]) -> Result<Vec<usize>> {
    if names.is_empty() {
        return Ok((0..series.cols()).collect());
    }
    names
        .iter()
        .map(|n| series.column_index(n).ok_or_else(|| config(format!("column '{n}' not in the generated data"))))
        .collect()
}

fn split(data: &TimeSeries, spec: &SweepSpec, inputs: &[String], outputs: &[String]) -> Result<Dataset> {
    let end = spec.train_steps + spec.test_steps;
    if data.rows() < end {
        return Err(config(format!("data has {} rows, {end} needed", data.rows())));
    }
    let mut train = data.slice(0, spec.train_steps)?;
    let mut test = data.slice(spec.train_steps, end)?;
    if spec.scale_data {
        let all: Vec<usize> = (0..train.cols()).collect();
        let norm = Normalization::fit(&train, &all)?;
        let scale = |ts: &TimeSeries| -> Result<TimeSeries> {
            let rows: Vec<Vec<f64>> = ts
                .iter_rows()
                .map(|r| r.iter().enumerate().map(|(j, v)| (v - norm.min[j]) / (norm.max[j] - norm.min[j])).collect())
                .collect();
            TimeSeries::from_rows(ts.dt(), ts.labels().to_vec(), &rows)
        };
        train = scale(&train)?;
        test = scale(&test)?;
    }
    Ok(Dataset { inputs: columns(&train, inputs)?, outputs: columns(&train, outputs)?, train, test })
}

fn drop_rows(ts: TimeSeries, skip: usize) -> Result<TimeSeries> {
    ts.slice(skip, ts.rows())
}

/// Generate and window the data every run of the sweep shares. Benchmark
/// sweeps return NARMA-2 first, then Mackey-Glass.
pub fn prepare_data(spec: &SweepSpec) -> Result<Vec<Dataset>> {
    let rows = spec.train_steps + spec.test_steps;
    let params = ConvectionParams::classic();
    match spec.scenario {
        Scenario::ClosedLoopL63 => {
            let field = Lorenz63::new(params);
            let data = trajectory_from(&field, spec.dt, rows - 1, spec.transient, spec.data_seed)?;
            Ok(vec![split(&data, spec, &spec.inputs, &spec.inputs)?])
        }
        Scenario::BenchmarkLeakrate => {
            let (u, y) = narma2_series(&NarmaConfig::default(), spec.transient + rows)?;
            let narma: Vec<Vec<f64>> = u.iter().zip(&y).map(|(a, b)| vec![*a, *b]).collect();
            let narma = TimeSeries::from_rows(1.0, vec!["u".into(), "y".into()], &narma)?;
            let narma = split(&drop_rows(narma, spec.transient)?, spec, &["u".into()], &["y".into()])?;
            let mg_cfg = MackeyGlassConfig { dt: spec.dt, ..MackeyGlassConfig::default() };
            let mg = drop_rows(mackey_glass_series(&mg_cfg, spec.transient + rows - 1)?, spec.transient)?;
            let mg = split(&mg, spec, &["x".into()], &["x".into()])?;
            Ok(vec![narma, mg])
        }
        _ => {
            let field: Box<dyn VectorField> = if spec.printed_coefficients {
                Box::new(Lorenz8::as_printed(params))
            } else {
                Box::new(Lorenz8::new(params))
            };
            let data = trajectory_from(field.as_ref(), spec.dt, rows - 1, spec.transient, spec.data_seed)?;
            Ok(vec![split(&data, spec, &spec.inputs, &[])?])
        }
    }
}

fn params(pairs: &[(&str, Param)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

const BENCHMARKS: [(&str, usize); 2] = [("narma2", 4), ("mackey_glass", 5)];

/// Grid cells that cannot be built (block larger than the register).
pub fn impossible_cells(spec: &SweepSpec) -> Vec<Params> {
    if spec.scenario != Scenario::PblockL8 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for &n in &spec.grid.qubits {
        for &p in spec.grid.block_sizes.iter().filter(|&&p| p > n) {
            for &eps in &spec.grid.eps {
                for &g in &spec.grid.gamma {
                    out.push(params(&[("n", n.into()), ("p", p.into()), ("eps", eps.into()), ("gamma", g.into())]));
                }
            }
        }
    }
    out
}

fn plan(spec: &SweepSpec) -> Vec<Task> {
    let g = &spec.grid;
    let mut cells: Vec<(Params, Job, usize)> = Vec::new();
    match spec.scenario {
        Scenario::ClosedLoopL63 | Scenario::OpenLoopL8 => {
            for &eps in &g.eps {
                for &n in &g.qubits {
                    cells.push((params(&[("eps", eps.into()), ("n", n.into())]), Job::Full { n, eps }, 0));
                }
            }
        }
        Scenario::CrcmRegularization => {
            for &n_res in &g.n_res {
                cells.push((params(&[("model", "crcm".into()), ("n_res", n_res.into())]), Job::Crcm { n_res }, 0));
            }
            for &eps in &g.eps {
                for &n in &g.qubits {
                    let p = params(&[("model", "qrcm".into()), ("n", n.into()), ("eps", eps.into())]);
                    cells.push((p, Job::Full { n, eps }, 0));
                }
            }
        }
        Scenario::PblockL8 => {
            for &eps in &g.eps {
                for &n in &g.qubits {
                    for &p in g.block_sizes.iter().filter(|&&p| p <= n) {
                        let job = Job::Reduced { n, eps, block: Some(p), env: Env::Exact };
                        cells.push((params(&[("n", n.into()), ("p", p.into()), ("eps", eps.into())]), job, 0));
                    }
                }
            }
        }
        Scenario::ReducedNoisyL8 => {
            for &eps in &g.eps {
                for &n in &g.qubits {
                    for env in Env::ALL {
                        let p = params(&[("n", n.into()), ("eps", eps.into()), ("env", env.name().into())]);
                        cells.push((p, Job::Reduced { n, eps, block: None, env }, 0));
                    }
                }
            }
        }
        Scenario::BenchmarkLeakrate => {
            for (data, (name, n)) in BENCHMARKS.iter().enumerate() {
                for &eps in &g.eps {
                    let p = params(&[("benchmark", (*name).into()), ("n", (*n).into()), ("eps", eps.into())]);
                    cells.push((p, Job::Full { n: *n, eps }, data));
                }
            }
        }
    }
    let mut tasks = Vec::with_capacity(cells.len() * spec.seeds);
    for (p, job, data) in cells {
        for i in 0..spec.seeds {
            tasks.push(Task { params: p.clone(), seed: spec.seed(i), job, data });
        }
    }
    tasks
}

fn with_gamma(p: &Params, gamma: f64) -> Params {
    let mut p = p.clone();
    p.insert("gamma".into(), gamma.into());
    p
}

fn is_fatal(e: &Error) -> bool {
    matches!(e, Error::Config(_) | Error::Contract(_) | Error::Io(_) | Error::Parse { .. })
}

/// Per-gamma result of a run.
struct Fit {
    mse: f64,
    horizon: Option<f64>,
    metrics: BTreeMap<String, f64>,
    pred: Option<DMatrix<f64>>,
}

fn output_matrix(ds: &Dataset) -> DMatrix<f64> {
    DMatrix::from_fn(ds.outputs.len(), ds.test.rows(), |i, t| ds.test.row(t)[ds.outputs[i]])
}

/// Features of the states that read out test rows `0..T`: the state left by
/// training, then after feeding each test input in turn.
fn test_features<M: Reservoir>(m: &M, start: &M::State, ds: &Dataset) -> Result<DMatrix<f64>> {
    let steps = ds.test.rows();
    let mut f = DMatrix::zeros(m.feature_dim(), steps);
    let mut state = start.clone();
    let mut x = vec![0.0; ds.inputs.len()];
    for t in 0..steps {
        f.column_mut(t).copy_from_slice(m.features(&state));
        if t + 1 < steps {
            let row = ds.test.row(t);
            for (xi, &c) in x.iter_mut().zip(&ds.inputs) {
                *xi = row[c];
            }
            state = m.step(&state, &x)?;
        }
    }
    Ok(f)
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

fn open_loop_metrics(pred: &DMatrix<f64>, truth: &DMatrix<f64>) -> (f64, BTreeMap<String, f64>) {
    let err = pred - truth;
    let t = truth.ncols() as f64;
    let mse = err.norm_squared() / t;
    let mean_err = err.column_iter().map(|c| c.norm()).sum::<f64>() / t;
    let mean_truth = truth.column_iter().map(|c| c.norm()).sum::<f64>() / t;
    let corr_min = (0..truth.nrows())
        .map(|i| {
            let p: Vec<f64> = pred.row(i).iter().copied().collect();
            let q: Vec<f64> = truth.row(i).iter().copied().collect();
            pearson(&p, &q)
        })
        .filter(|c| !c.is_nan())
        .fold(f64::INFINITY, f64::min);
    let mut metrics = BTreeMap::new();
    metrics.insert("rel_err".to_string(), mean_err / mean_truth);
    if corr_min.is_finite() {
        metrics.insert("corr_min".to_string(), corr_min);
    }
    (mse, metrics)
}

fn open_loop<M: Reservoir>(
    m: &M,
    ds: &Dataset,
    washout: usize,
    gammas: &[f64],
    keep: bool,
) -> Result<Vec<Result<Fit>>> {
    let run = collect_trace(m, &ds.train, washout, &ds.inputs, &ds.outputs)?;
    let feats = test_features(m, &run.last_state, ds)?;
    let truth = output_matrix(ds);
    Ok(gammas
        .iter()
        .map(|&g| {
            let w = ridge_fit(&run.trace, g)?;
            let pred = w.matrix() * &feats;
            let (mse, metrics) = open_loop_metrics(&pred, &truth);
            Ok(Fit { mse, horizon: None, metrics, pred: keep.then_some(pred) })
        })
        .collect())
}

fn closed_loop<M: Reservoir>(m: &M, ds: &Dataset, spec: &SweepSpec) -> Result<Vec<Result<Fit>>> {
    let run = collect_trace(m, &ds.train, spec.washout, &ds.inputs, &ds.outputs)?;
    let target = ds.test.select_columns(&ds.outputs)?;
    let labels = target.labels().to_vec();
    Ok(spec
        .grid
        .gamma
        .iter()
        .map(|&g| {
            let w = ridge_fit(&run.trace, g)?;
            let pred = closed_loop_predict(m, &w, &run.last_state, ds.test.rows(), ds.test.dt(), labels.clone())?;
            let horizon = horizon_lyapunov(&pred, &target, spec.horizon_threshold, spec.lyapunov)?;
            Ok(Fit { mse: mse(&pred, &target)?, horizon: Some(horizon), metrics: BTreeMap::new(), pred: None })
        })
        .collect())
}

fn qrc_config(spec: &SweepSpec, job: Job, seed: u64, ds: &Dataset) -> Result<Option<QrcConfig>> {
    let mut cfg = match job {
        Job::Full { n, eps } => QrcConfig::new(n, eps, seed),
        Job::Reduced { n, eps, block, env } => {
            let mut c = QrcConfig::reduced(n, eps, seed);
            c.block_size = block;
            if env != Env::Exact {
                c.shots = if spec.shots == 0 { default_shots(n) } else { spec.shots };
                c.trajectories = spec.trajectories;
            }
            if env == Env::Noisy {
                c.noise = spec.noise;
            }
            c
        }
        Job::Crcm { .. } => return Ok(None),
    };
    cfg.normalization = Some(Normalization::fit(&ds.train, &ds.inputs)?);
    cfg.validate()?;
    Ok(Some(cfg))
}

fn fits(spec: &SweepSpec, ds: &Dataset, job: Job, seed: u64, gammas: &[f64], keep: bool) -> Result<Vec<Result<Fit>>> {
    let closed = spec.scenario == Scenario::ClosedLoopL63;
    match qrc_config(spec, job, seed, ds)? {
        Some(cfg) if closed => closed_loop(&cfg, ds, spec),
        Some(cfg) => open_loop(&cfg, ds, spec.washout, gammas, keep),
        None => {
            let Job::Crcm { n_res } = job else { unreachable!("only reservoir jobs without a quantum config") };
            let m = Crcm::new(CrcConfig::new(n_res, ds.inputs.len(), seed))?;
            open_loop(&m, ds, spec.washout, gammas, keep)
        }
    }
}

fn eval(spec: &SweepSpec, data: &[Dataset], task: &Task, prov: &Provenance) -> Result<Vec<RunRecord>> {
    let start = Instant::now();
    let gammas = &spec.grid.gamma;
    let results = match fits(spec, &data[task.data], task.job, task.seed, gammas, false) {
        Ok(r) => r,
        Err(e) if !is_fatal(&e) => gammas.iter().map(|_| Err(e.clone())).collect(),
        Err(e) => return Err(e),
    };
    let wall_time = start.elapsed().as_secs_f64();
    let mut out = Vec::with_capacity(results.len());
    for (&g, res) in gammas.iter().zip(results) {
        let p = with_gamma(&task.params, g);
        let rec = match res {
            Ok(f) => RunRecord {
                scenario: spec.scenario,
                params: p,
                seed: task.seed,
                mse: f.mse,
                horizon: f.horizon,
                diverged: !f.mse.is_finite(),
                metrics: f.metrics,
                error: None,
                wall_time,
                provenance: prov.clone(),
            },
            Err(e) if is_fatal(&e) => return Err(e),
            Err(e) => RunRecord { wall_time, ..RunRecord::failed(spec.scenario, p, task.seed, &e, prov.clone()) },
        };
        out.push(rec);
    }
    Ok(out)
}

/// Run every (parameters, seed) pair of `spec` that `previous` does not
/// already hold, passing each finished task's records to `sink`. Returns the
/// complete record set of the sweep in canonical order.
pub fn run_sweep(
    spec: &SweepSpec,
    previous: &[RunRecord],
    sink: &(dyn Fn(&[RunRecord]) + Sync),
) -> Result<Vec<RunRecord>> {
    spec.validate()?;
    let hash = spec.config_hash();
    let prov = Provenance::new(hash.clone());
    let data = prepare_data(spec)?;
    let done: HashMap<String, &RunRecord> = previous
        .iter()
        .filter(|r| r.scenario == spec.scenario && r.provenance.config_hash == hash)
        .map(|r| (r.key(), r))
        .collect();
    let mut records = Vec::new();
    let mut todo = Vec::new();
    for task in plan(spec) {
        let keys: Vec<String> = spec
            .grid
            .gamma
            .iter()
            .map(|&g| run_key(spec.scenario, &with_gamma(&task.params, g), task.seed, &hash))
            .collect();
        if keys.iter().all(|k| done.contains_key(k)) {
            records.extend(keys.iter().map(|k| done[k].clone()));
        } else {
            todo.push(task);
        }
    }
    let fresh = par::map(&todo, |t| {
        let r = eval(spec, &data, t, &prov);
        if let Ok(rs) = &r {
            sink(rs);
        }
        r
    });
    for r in fresh {
        records.extend(r?);
    }
    records.sort_by(|a, b| a.canonical_cmp(b));
    Ok(records)
}

/// Aggregate table of a sweep, grouped by every parameter; impossible
/// p-block cells appear with zero runs.
pub fn summarize(spec: &SweepSpec, records: &[RunRecord]) -> Vec<AggregateStats> {
    let mut table = aggregate(records, None);
    table.extend(impossible_cells(spec).into_iter().map(|k| AggregateStats::empty(spec.scenario, k, "impossible")));
    table.sort_by(|a, b| a.scenario.cmp(&b.scenario).then_with(|| super::record::cmp_params(&a.key, &b.key)));
    table
}

/// Records and aggregate table of a finished sweep.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub records: Vec<RunRecord>,
    pub table: Vec<AggregateStats>,
}

fn run_checked(spec: &SweepSpec, expected: Scenario) -> Result<SweepOutcome> {
    if spec.scenario != expected {
        return Err(config(format!("this sweep needs scenario {expected}, got {}", spec.scenario)));
    }
    let records = run_sweep(spec, &[], &|_| {})?;
    Ok(SweepOutcome { table: summarize(spec, &records), records })
}

/// Closed-loop L63 MSE and horizon over the (eps, n) grid.
pub fn sweep_eps_qubits(spec: &SweepSpec) -> Result<SweepOutcome> {
    run_checked(spec, Scenario::ClosedLoopL63)
}

/// Open-loop L8 MSE of classical reservoirs over (gamma, size), plus the
/// quantum reference runs.
pub fn sweep_crcm_regularization(spec: &SweepSpec) -> Result<SweepOutcome> {
    run_checked(spec, Scenario::CrcmRegularization)
}

/// Reduced-circuit MSE over (n, p).
pub fn sweep_pblocks(spec: &SweepSpec) -> Result<SweepOutcome> {
    run_checked(spec, Scenario::PblockL8)
}

/// Reduced circuit with exact, sampled and noisy measurements.
pub fn run_reduced_noisy(spec: &SweepSpec) -> Result<SweepOutcome> {
    run_checked(spec, Scenario::ReducedNoisyL8)
}

/// NARMA-2 and Mackey-Glass one-step prediction for each leaking rate.
pub fn benchmark_leakrate(spec: &SweepSpec) -> Result<SweepOutcome> {
    run_checked(spec, Scenario::BenchmarkLeakrate)
}

/// Aligned test-window series of the reduced scenario for one seed: the
/// ground truth followed by the reconstruction in each environment, using
/// the first grid value of n, eps and gamma.
pub fn reduced_noisy_series(spec: &SweepSpec, seed: u64) -> Result<Vec<(String, TimeSeries)>> {
    if spec.scenario != Scenario::ReducedNoisyL8 {
        return Err(config("series output is available for reduced_noisy_l8 only"));
    }
    spec.validate()?;
    let data = prepare_data(spec)?;
    let ds = &data[0];
    let truth = ds.test.select_columns(&ds.outputs)?;
    let (n, eps, g) = (spec.grid.qubits[0], spec.grid.eps[0], spec.grid.gamma[0]);
    let mut out = vec![("truth".to_string(), truth.clone())];
    for env in Env::ALL {
        let job = Job::Reduced { n, eps, block: None, env };
        let fit = fits(spec, ds, job, seed, &[g], true)?.pop().expect("one gamma")?;
        let pred = fit.pred.expect("predictions kept");
        let rows: Vec<Vec<f64>> = pred.column_iter().map(|c| c.iter().copied().collect()).collect();
        out.push((env.name().to_string(), TimeSeries::from_rows(truth.dt(), truth.labels().to_vec(), &rows)?));
    }
    Ok(out)
}
