//! `qrc`: data generation, training, prediction and sweeps for quantum and
//! classical reservoir computing on Lorenz-type convection models.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod io;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use config::{parse_override, DataModel, Layers, ModelKind, SweepTarget};
use error::CliError;
use std::path::PathBuf;
use toml::Value;

#[derive(Parser, Debug)]
#[command(name = "qrc", version, about = "Quantum and classical reservoir computing for convection models")]
struct Cli {
    /// TOML configuration file; keys not given keep their defaults.
    #[arg(long, short, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override one configuration key, e.g. `--set model.qrcm.eps=0.1`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,

    /// Worker threads for parallel work; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate a model and write its trajectory CSV plus a metadata sidecar.
    Generate(GenerateArgs),
    /// Fit a reservoir readout on a data file and write the model JSON.
    Train(TrainArgs),
    /// Closed-loop prediction from a trained model.
    Predict(PredictArgs),
    /// Open-loop reconstruction of the outputs from the input columns.
    Reconstruct(ReconstructArgs),
    /// Run a parameter sweep (or the operation-count scan `opcount`).
    Sweep(SweepArgs),
    /// Largest Lyapunov exponent of l63 or l8.
    Lyapunov(LyapunovArgs),
    /// Print the effective configuration as TOML.
    Config(ConfigArgs),
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct GenerateArgs {
    /// l63, l8, narma2 or mackey_glass.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    transient: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV; the sidecar goes next to it as `<stem>.meta.json`.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct TrainArgs {
    /// Training data CSV.
    #[arg(long)]
    data: PathBuf,
    /// Model JSON to write.
    #[arg(long, short)]
    out: PathBuf,
    /// qrcm or crcm.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    washout: Option<usize>,
    /// Comma-separated input columns.
    #[arg(long, value_delimiter = ',')]
    inputs: Option<Vec<String>>,
    /// Comma-separated output columns.
    #[arg(long, value_delimiter = ',')]
    outputs: Option<Vec<String>>,
    /// Qubits of the quantum reservoir.
    #[arg(long)]
    n: Option<usize>,
    /// Leaking rate of the selected reservoir.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct PredictArgs {
    /// Trained model JSON.
    #[arg(long)]
    model: PathBuf,
    /// Data to compare against; row 0 follows the training data.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    skip_rows: Option<usize>,
    /// Report the horizon in Lyapunov times with this exponent.
    #[arg(long)]
    lyapunov: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    #[arg(long)]
    model: PathBuf,
    /// Data holding the input columns; row 0 follows the training data.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    skip_rows: Option<usize>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct SweepArgs {
    /// Scenario name; defaults to `sweep.scenario`.
    #[arg(long)]
    scenario: Option<String>,
    /// Seeds per grid cell.
    #[arg(long)]
    seeds: Option<usize>,
    /// Reuse matching records already in the output directory.
    #[arg(long)]
    resume: bool,
    /// Output directory.
    #[arg(long, short, default_value = "results")]
    out: PathBuf,
    /// Qubit range of the opcount scan, e.g. `1..32`.
    #[arg(long)]
    n: Option<String>,
    /// Gate-count factor of the opcount scan.
    #[arg(long)]
    xi: Option<f64>,
    /// Also write the aligned test-window series (reduced_noisy_l8).
    #[arg(long)]
    series: bool,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct LyapunovArgs {
    /// l63 or l8.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Optional JSON result file.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConfigArgs {
    /// Scenario whose sweep defaults fill `[sweep]`.
    #[arg(long)]
    scenario: Option<String>,
    /// Write to a file instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn uint(v: Option<usize>) -> Option<Value> {
    v.map(|x| Value::Integer(x as i64))
}

fn seed(v: Option<u64>) -> Option<Value> {
    v.map(|x| Value::Integer(x as i64))
}

fn text(v: Option<&String>) -> Option<Value> {
    v.map(|s| Value::String(s.clone()))
}

fn layers(cli: &Cli) -> Result<Layers, CliError> {
    let mut l = match &cli.config {
        Some(p) => Layers::from_text(&io::read(p)?, &p.display().to_string())?,
        None => Layers::default(),
    };
    for s in &cli.sets {
        let (k, v) = parse_override(s)?;
        l.set(&k, v);
    }
    if let Ok(s) = std::env::var("QRC_SEED") {
        let v: u64 = s.trim().parse().map_err(|_| CliError::Usage(format!("QRC_SEED='{s}' is not a seed")))?;
        for key in ["dynamics.seed", "model.seed", "sweep.base_seed"] {
            l.set(key, Value::Integer(v as i64));
        }
    }
    Ok(l)
}

fn scenario_override(l: &mut Layers, name: Option<&String>) -> Result<Option<SweepTarget>, CliError> {
    let Some(name) = name else { return Ok(None) };
    let t: SweepTarget = name.parse().map_err(CliError::Usage)?;
    if let SweepTarget::Experiment(s) = t {
        l.set("sweep.scenario", Value::String(s.name().into()));
    }
    Ok(Some(t))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut l = layers(&cli)?;
    match &cli.command {
        Command::Generate(a) => {
            l.set_if("dynamics.model", text(a.model.as_ref()));
            l.set_if("dynamics.steps", uint(a.steps));
            l.set_if("dynamics.dt", a.dt);
            l.set_if("dynamics.transient", uint(a.transient));
            l.set_if("dynamics.seed", seed(a.seed));
            commands::generate(&l.resolve()?, &a.out)
        }
        Command::Train(a) => {
            l.set_if("model.kind", text(a.kind.as_ref()));
            l.set_if("training.gamma", a.gamma);
            l.set_if("training.washout", uint(a.washout));
            l.set_if("training.inputs", a.inputs.clone());
            l.set_if("training.outputs", a.outputs.clone());
            l.set_if("model.qrcm.n", uint(a.n));
            l.set_if("model.seed", seed(a.seed));
            if let Some(eps) = a.eps {
                // the leaking rate of whichever reservoir is trained
                let kind = l.resolve()?.model.kind;
                l.set(if kind == ModelKind::Crcm { "model.crcm.eps" } else { "model.qrcm.eps" }, Value::Float(eps));
            }
            commands::train_cmd(&l.resolve()?, &a.data, &a.out)
        }
        Command::Predict(a) => {
            l.set_if("predict.steps", uint(a.steps));
            l.set_if("predict.skip_rows", uint(a.skip_rows));
            l.set_if("predict.lyapunov", a.lyapunov);
            l.set_if("predict.threshold", a.threshold);
            commands::predict_cmd(&l.resolve()?, &a.model, a.data.as_deref(), &a.out)
        }
        Command::Reconstruct(a) => {
            l.set_if("predict.steps", uint(a.steps));
            l.set_if("predict.skip_rows", uint(a.skip_rows));
            commands::reconstruct_cmd(&l.resolve()?, &a.model, &a.data, &a.out)
        }
        Command::Sweep(a) => {
            let named = scenario_override(&mut l, a.scenario.as_ref())?;
            l.set_if("sweep.seeds", uint(a.seeds));
            l.set_if("opcount.n", a.n.clone());
            l.set_if("opcount.xi", a.xi);
            let cfg = l.resolve()?;
            let target = named.unwrap_or(SweepTarget::Experiment(cfg.sweep.scenario));
            let args = commands::SweepArgs { target, out_dir: &a.out, resume: a.resume, series: a.series };
            commands::sweep_cmd(&cfg, &args)
        }
        Command::Lyapunov(a) => {
            l.set_if("dynamics.model", text(a.model.as_ref()));
            l.set_if("dynamics.dt", a.dt);
            l.set_if("lyapunov.steps", uint(a.steps));
            l.set_if("dynamics.seed", seed(a.seed));
            let cfg = l.resolve()?;
            if !matches!(cfg.dynamics.model, DataModel::L63 | DataModel::L8) {
                return Err(CliError::Usage("lyapunov needs dynamics.model = l63 or l8".into()));
            }
            commands::lyapunov_cmd(&cfg, a.out.as_deref())
        }
        Command::Config(a) => {
            if let Some(SweepTarget::Opcount) = scenario_override(&mut l, a.scenario.as_ref())? {
                return Err(CliError::Usage("opcount has no sweep defaults; use an experiment scenario".into()));
            }
            let dump = l.resolve()?.to_toml();
            match &a.out {
                Some(p) => io::write_atomic(p, &dump),
                None => {
                    print!("{dump}");
                    Ok(())
                }
            }
        }
    }
}

fn main() {
    let help = format!(
        "Configuration keys and defaults (the [sweep] values shown are those of closed_loop_l63; \
         each scenario has its own, see `qrc config --scenario <name>`):\n{}\n\n\
         Precedence: defaults < --config file < --set < QRC_SEED < command flags.\n\
         QRC_SEED sets dynamics.seed, model.seed and sweep.base_seed.\n\
         Exit codes: 0 success, 2 usage or validation error, 1 runtime error.",
        config::key_listing()
    );
    let matches = Cli::command().after_help(help).get_matches();
    let cli = Cli::from_arg_matches(&matches).unwrap_or_else(|e| e.exit());
    let jobs = cli.jobs;
    let result = qrc_core::par::with_workers(jobs, || run(cli));
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
