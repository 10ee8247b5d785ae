use crate::config::{parse_range, DataModel, ModelKind, RunConfig, SweepTarget};
use crate::error::CliError;
use crate::io::{read, sidecar, write_atomic};
use qrc_core::dynamics::{
    largest_lyapunov, mackey_glass_series, narma2_series, trajectory_from, ConvectionParams, Lorenz63, Lorenz8,
    LyapunovConfig, MackeyGlassConfig, TimeSeries, VectorField,
};
use qrc_core::experiments::{
    aggregates_to_csv, crossover, opcount_scan, records_from_ndjson, records_to_ndjson, reduced_noisy_series,
    run_sweep, summarize, AggregateStats, RunRecord, Scenario,
};
use qrc_core::reservoir::{horizon_steps, mse, train, CrcConfig, ModelSpec, QrcConfig, TrainedModel};
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn input<T>(path: &Path, r: qrc_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Input { path: path.to_path_buf(), source })
}

fn params_of(cfg: &RunConfig) -> Result<ConvectionParams, CliError> {
    let d = &cfg.dynamics;
    Ok(ConvectionParams::new(d.sigma, d.r, d.aspect)?)
}

fn field_of(cfg: &RunConfig) -> Result<Box<dyn VectorField>, CliError> {
    let p = params_of(cfg)?;
    Ok(match cfg.dynamics.model {
        DataModel::L63 => Box::new(Lorenz63::new(p)),
        DataModel::L8 if cfg.dynamics.printed_coefficients => Box::new(Lorenz8::as_printed(p)),
        DataModel::L8 => Box::new(Lorenz8::new(p)),
        other => return Err(usage(format!("{other:?} is not a convection model; use l63 or l8"))),
    })
}

fn mg_config(cfg: &RunConfig) -> MackeyGlassConfig {
    MackeyGlassConfig { dt: cfg.dynamics.dt, ..cfg.dynamics.mackey_glass }
}

/// The series `generate` writes, `steps + 1` rows after the transient.
pub fn generate_series(cfg: &RunConfig) -> Result<TimeSeries, CliError> {
    let d = &cfg.dynamics;
    let skip = |ts: TimeSeries| ts.slice(d.transient, ts.rows());
    Ok(match d.model {
        DataModel::L63 | DataModel::L8 => trajectory_from(field_of(cfg)?.as_ref(), d.dt, d.steps, d.transient, d.seed)?,
        DataModel::Narma2 => {
            let (u, y) = narma2_series(&d.narma, d.transient + d.steps + 1)?;
            let rows: Vec<Vec<f64>> = u.iter().zip(&y).map(|(a, b)| vec![*a, *b]).collect();
            skip(TimeSeries::from_rows(1.0, vec!["u".into(), "y".into()], &rows)?)?
        }
        DataModel::MackeyGlass => skip(mackey_glass_series(&mg_config(cfg), d.transient + d.steps)?)?,
    })
}

pub fn generate(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let ts = generate_series(cfg)?;
    let d = &cfg.dynamics;
    let model_params = match d.model {
        DataModel::L63 | DataModel::L8 => serde_json::to_value(params_of(cfg)?),
        DataModel::Narma2 => serde_json::to_value(d.narma),
        DataModel::MackeyGlass => serde_json::to_value(mg_config(cfg)),
    }
    .expect("parameters serialize");
    let meta = json!({
        "model": d.model,
        "params": model_params,
        "printed_coefficients": d.printed_coefficients,
        "dt": ts.dt(),
        "steps": d.steps,
        "rows": ts.rows(),
        "transient": d.transient,
        "seed": d.seed,
        "columns": ts.labels(),
        "code_version": env!("CARGO_PKG_VERSION"),
    });
    write_atomic(out, &ts.to_csv())?;
    let meta_path = sidecar(out);
    write_atomic(&meta_path, &(serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n"))?;
    println!("wrote {} ({} rows, {} columns) and {}", out.display(), ts.rows(), ts.cols() + 1, meta_path.display());
    Ok(())
}

fn load_series(path: &Path, default_dt: f64) -> Result<TimeSeries, CliError> {
    let text = read(path)?;
    input(path, TimeSeries::from_csv(&text, default_dt))
}

fn columns_or_all(names: &[String], ts: &TimeSeries) -> Vec<String> {
    if names.is_empty() {
        ts.labels().to_vec()
    } else {
        names.to_vec()
    }
}

fn model_spec(cfg: &RunConfig, n_in: usize) -> Result<ModelSpec, CliError> {
    let m = &cfg.model;
    Ok(match m.kind {
        ModelKind::Qrcm => {
            let q = &m.qrcm;
            let mut c =
                if q.reduced { QrcConfig::reduced(q.n, q.eps, m.seed) } else { QrcConfig::new(q.n, q.eps, m.seed) };
            c.shots = q.shots;
            c.input_scale = q.input_scale;
            c.block_size = (q.block_size > 0).then_some(q.block_size);
            c.trajectories = q.trajectories;
            c.noise = q.noise;
            if !q.beta.is_empty() {
                c.beta = q.beta.clone();
            }
            if !q.selected_indices.is_empty() {
                c.selected_indices = q.selected_indices.clone();
            }
            c.validate()?;
            ModelSpec::Qrcm(c)
        }
        ModelKind::Crcm => {
            let k = &m.crcm;
            let c = CrcConfig {
                n_res: k.n_res,
                n_in,
                eps: k.eps,
                density: k.density,
                spectral_radius: k.spectral_radius,
                seed: m.seed,
            };
            c.validate()?;
            ModelSpec::Crcm(c)
        }
    })
}

pub fn train_cmd(cfg: &RunConfig, data: &Path, out: &Path) -> Result<(), CliError> {
    let t = &cfg.training;
    let mut series = load_series(data, cfg.dynamics.dt)?;
    if t.rows > 0 {
        if t.rows > series.rows() {
            return Err(usage(format!("training.rows = {} but {} has {} rows", t.rows, data.display(), series.rows())));
        }
        series = series.slice(0, t.rows)?;
    }
    let inputs = columns_or_all(&t.inputs, &series);
    let outputs = columns_or_all(&t.outputs, &series);
    let spec = model_spec(cfg, inputs.len())?;
    let model = train(spec, &series, &inputs, &outputs, t.washout, t.gamma)?;
    write_atomic(out, &(model.to_json() + "\n"))?;
    let mode = if model.is_closed_loop() { "closed loop" } else { "open loop" };
    println!("training MSE {:e} ({mode}, {} rows, gamma {:e})", model.train_mse, series.rows(), t.gamma);
    println!("wrote {}", out.display());
    Ok(())
}

fn load_model(path: &Path) -> Result<TrainedModel, CliError> {
    let text = read(path)?;
    input(path, TrainedModel::from_json(&text))
}

/// Comparison rows `skip..skip + steps` of `data`, or `None` without data.
fn truth(cfg: &RunConfig, data: Option<&Path>, model: &TrainedModel) -> Result<(usize, Option<TimeSeries>), CliError> {
    let p = &cfg.predict;
    let Some(path) = data else {
        if p.steps == 0 {
            return Err(usage("set predict.steps (--steps) or give --data to compare against"));
        }
        return Ok((p.steps, None));
    };
    let series = load_series(path, model.dt)?;
    if p.skip_rows >= series.rows() {
        return Err(usage(format!("skip_rows = {} but {} has {} rows", p.skip_rows, path.display(), series.rows())));
    }
    let steps = if p.steps == 0 { series.rows() - p.skip_rows } else { p.steps };
    if p.skip_rows + steps > series.rows() {
        return Err(usage(format!("{} has {} rows, {} needed", path.display(), series.rows(), p.skip_rows + steps)));
    }
    Ok((steps, Some(series.slice(p.skip_rows, p.skip_rows + steps)?)))
}

fn output_part(model: &TrainedModel, series: &TimeSeries) -> Option<TimeSeries> {
    let idx: Option<Vec<usize>> = model.output_columns.iter().map(|c| series.column_index(c)).collect();
    series.select_columns(&idx?).ok()
}

pub fn predict_cmd(cfg: &RunConfig, model_path: &Path, data: Option<&Path>, out: &Path) -> Result<(), CliError> {
    let model = load_model(model_path)?;
    if !model.is_closed_loop() {
        return Err(usage(format!(
            "{} is an open-loop model (inputs {:?}, outputs {:?}); closed-loop prediction needs inputs equal to outputs, use reconstruct",
            model_path.display(),
            model.input_columns,
            model.output_columns
        )));
    }
    let (steps, target) = truth(cfg, data, &model)?;
    let pred = model.predict(steps)?;
    write_atomic(out, &pred.to_csv())?;
    println!("wrote {} ({steps} steps)", out.display());
    if let Some(target) = target.as_ref().and_then(|t| output_part(&model, t)) {
        let e = mse(&pred, &target)?;
        let k = horizon_steps(&pred, &target, cfg.predict.threshold)?;
        println!("MSE {e:e}");
        let lam = cfg.predict.lyapunov;
        let time = k as f64 * model.dt;
        if lam > 0.0 {
            println!("horizon {k} steps = {:.6} Lyapunov times (lambda1 = {lam})", time * lam);
        } else {
            println!("horizon {k} steps = {time:.6} model time units");
        }
    }
    Ok(())
}

pub fn reconstruct_cmd(cfg: &RunConfig, model_path: &Path, data: &Path, out: &Path) -> Result<(), CliError> {
    let model = load_model(model_path)?;
    let (steps, inputs) = truth(cfg, Some(data), &model)?;
    let inputs = inputs.expect("data given");
    let rec = model.reconstruct(&inputs, steps)?;
    write_atomic(out, &rec.to_csv())?;
    println!("wrote {} ({steps} steps)", out.display());
    if let Some(target) = output_part(&model, &inputs) {
        println!("MSE {:e}", mse(&rec, &target)?);
    }
    Ok(())
}

pub fn lyapunov_cmd(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let field = field_of(cfg)?;
    let d = &cfg.dynamics;
    let l = &cfg.lyapunov;
    let x0 = trajectory_from(field.as_ref(), d.dt, 1, 0, d.seed)?.row(0).to_vec();
    let lc = LyapunovConfig {
        dt: d.dt,
        transient_steps: l.transient,
        total_steps: l.steps,
        renorm_interval: l.renorm_interval,
        perturbation: l.perturbation,
    };
    let r = largest_lyapunov(field.as_ref(), &x0, &lc)?;
    println!("lambda1 = {}", r.lambda1);
    if let Some(out) = out {
        let v = json!({ "model": d.model, "lambda1": r.lambda1, "config": lc, "seed": d.seed });
        write_atomic(out, &(serde_json::to_string_pretty(&v).expect("serializes") + "\n"))?;
    }
    Ok(())
}

pub struct SweepArgs<'a> {
    pub target: SweepTarget,
    pub out_dir: &'a Path,
    pub resume: bool,
    pub series: bool,
}

fn file_in(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

pub fn sweep_cmd(cfg: &RunConfig, args: &SweepArgs) -> Result<(), CliError> {
    match args.target {
        SweepTarget::Opcount => opcount_cmd(cfg, args.out_dir),
        SweepTarget::Experiment(s) => experiment(cfg, s, args),
    }
}

fn opcount_cmd(cfg: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let range = parse_range(&cfg.opcount.n)?;
    let scan = opcount_scan(range, cfg.opcount.xi)?;
    let mut csv = String::from("n,xi,n_res_classical,quantum_cost,classical_cost,quantum_cheaper,n_form_holds\n");
    for r in &scan {
        csv.push_str(&format!(
            "{},{:?},{:?},{:?},{:?},{},{}\n",
            r.n, r.xi, r.n_res_classical, r.quantum_cost, r.classical_cost, r.quantum_cheaper, r.n_form_holds
        ));
    }
    let path = file_in(dir, "opcount.csv");
    write_atomic(&path, &csv)?;
    match crossover(&scan) {
        Some(n) => println!("crossover at n = {n} (xi = {})", cfg.opcount.xi),
        None => println!("no crossover in {} (xi = {})", cfg.opcount.n, cfg.opcount.xi),
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn experiment(cfg: &RunConfig, scenario: Scenario, args: &SweepArgs) -> Result<(), CliError> {
    let spec = &cfg.sweep;
    debug_assert_eq!(spec.scenario, scenario);
    let dir = args.out_dir;
    let name = scenario.name();
    let records_path = file_in(dir, &format!("{name}.ndjson"));
    let previous = if args.resume && records_path.exists() {
        let text = read(&records_path)?;
        input(&records_path, records_from_ndjson(&text, true))?
    } else {
        Vec::new()
    };
    // start the stream from the parsed records so a torn last line is dropped
    write_atomic(&records_path, &records_to_ndjson(&previous))?;
    write_atomic(&file_in(dir, &format!("{name}.toml")), &cfg.to_toml())?;
    let file = std::fs::OpenOptions::new()
        .append(true)
        .open(&records_path)
        .map_err(|source| CliError::File { path: records_path.clone(), source })?;
    let stream = Mutex::new((file, None::<std::io::Error>));
    let sink = |rs: &[RunRecord]| {
        let mut g = stream.lock().expect("sink lock");
        if g.1.is_none() {
            let text = records_to_ndjson(rs);
            if let Err(e) = g.0.write_all(text.as_bytes()).and_then(|_| g.0.flush()) {
                g.1 = Some(e);
            }
        }
    };
    let reused = previous.iter().filter(|r| r.provenance.config_hash == spec.config_hash()).count();
    if args.resume {
        println!("resuming: {reused} of {} stored records match this configuration", previous.len());
    }
    let records = run_sweep(spec, &previous, &sink)?;
    if let Some(source) = stream.into_inner().expect("sink lock").1 {
        return Err(CliError::File { path: records_path, source });
    }
    write_atomic(&records_path, &records_to_ndjson(&records))?;
    let table = summarize(spec, &records);
    let csv_path = file_in(dir, &format!("{name}.csv"));
    write_atomic(&csv_path, &aggregates_to_csv(&table))?;
    print_table(&table);
    if args.series {
        if scenario != Scenario::ReducedNoisyL8 {
            return Err(usage("--series is available for reduced_noisy_l8 only"));
        }
        for (label, ts) in reduced_noisy_series(spec, spec.seed(0))? {
            write_atomic(&file_in(dir, &format!("{name}.series.{label}.csv")), &ts.to_csv())?;
        }
    }
    println!("wrote {} ({} records) and {}", records_path.display(), records.len(), csv_path.display());
    Ok(())
}

fn print_table(table: &[AggregateStats]) {
    let keys: Vec<String> =
        table.iter().map(|a| a.key.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")).collect();
    let width = keys.iter().map(String::len).max().unwrap_or(0).max(6);
    println!(
        "{:width$}  {:>4}  {:>8}  {:>12}  {:>12}  {:>8}",
        "params", "runs", "diverged", "median_mse", "mean_mse", "horizon"
    );
    for (a, k) in table.iter().zip(&keys) {
        let h = a.horizon_median.map(|h| format!("{h:.3}")).unwrap_or_default();
        let note = a.note.as_deref().map(|n| format!("  {n}")).unwrap_or_default();
        println!("{k:width$}  {:>4}  {:>8}  {:>12.4e}  {:>12.4e}  {h:>8}{note}", a.runs, a.diverged, a.median, a.mean);
    }
}
