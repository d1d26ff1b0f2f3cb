mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use grc::experiment::{run_ipc, run_lambda_sweep, run_spectral, run_task_experiment, ExperimentConfig};
use output::{Cell, Header, Writer};
use svg::Series;

/// Steps of the held-out window shown in the task plot.
const PLOT_STEPS: usize = 50;

#[derive(Parser)]
#[command(name = "grc", version, about = "Reservoir computing with Gaussian states of oscillator networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral radius of the reservoir block over a grid of interaction times.
    Spectral(Common),
    /// Train and evaluate a readout on a benchmark task.
    Task(Common),
    /// Information processing capacity of one or more reservoirs.
    Ipc(Common),
    /// Capacity buckets of the convex coherent encoding over lambda.
    LambdaSweep(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; falls back to GRC_THREADS, then to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Also write SVG charts.
    #[arg(long)]
    plot: bool,
}

type Res<T> = Result<T, String>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn set_threads(flag: Option<usize>) -> Res<()> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("GRC_THREADS") {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| format!("GRC_THREADS: not a thread count: {v:?}"))?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err("thread count must be positive".into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn load(common: &Common, command: &'static str) -> Res<(ExperimentConfig, Writer)> {
    let bytes = std::fs::read(&common.config).map_err(|e| format!("{}: {e}", common.config.display()))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| format!("{}: {e}", common.config.display()))?;
    let mut cfg = ExperimentConfig::from_json(text).map_err(|e| format!("{}: {e}", common.config.display()))?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let header = Header {
        command,
        config: serde_json::to_string(&cfg).map_err(|e| e.to_string())?,
        input_hash: output::blob_hash(&bytes),
    };
    let writer = Writer::new(&common.out, header).map_err(|e| format!("{}: {e}", common.out.display()))?;
    Ok((cfg, writer))
}

fn run(command: Command) -> Res<()> {
    match command {
        Command::Spectral(c) => spectral(&c),
        Command::Task(c) => task(&c),
        Command::Ipc(c) => ipc(&c),
        Command::LambdaSweep(c) => lambda_sweep(&c),
    }
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn spectral(c: &Common) -> Res<()> {
    set_threads(c.threads)?;
    let (cfg, w) = load(c, "spectral")?;
    let rows = run_spectral(&cfg).map_err(|e| e.to_string())?;
    let table: Vec<Vec<Cell>> = rows.iter().map(|r| vec![Cell::Num(r.dt), Cell::Num(r.rho)]).collect();
    let mut paths = vec![w.csv("spectral.csv", &["dt", "rho"], &table)?];

    let finite: Vec<_> = rows.iter().filter(|r| r.rho.is_finite()).collect();
    let min = finite.iter().min_by(|a, b| a.rho.total_cmp(&b.rho));
    let summary = serde_json::json!({
        "points": rows.len(),
        "min_rho": min.map(|r| r.rho),
        "argmin_dt": min.map(|r| r.dt),
        "stable_points": finite.iter().filter(|r| r.rho < 1.0).count(),
    });
    paths.push(w.json("spectral.json", &summary)?);
    if c.plot {
        let series = Series { name: "rho(A)", points: rows.iter().map(|r| (r.dt, r.rho)).collect() };
        paths.push(w.svg("spectral.svg", &svg::line_chart("Spectral radius", "dt", "rho(A)", &[series]))?);
    }
    report(&paths);
    Ok(())
}

fn task(c: &Common) -> Res<()> {
    set_threads(c.threads)?;
    let (cfg, w) = load(c, "task")?;
    let out = run_task_experiment(&cfg).map_err(|e| e.to_string())?;
    let r = &out.result;
    let table: Vec<Vec<Cell>> = r
        .targets
        .iter()
        .zip(&r.predictions)
        .enumerate()
        .map(|(i, (t, p))| vec![Cell::Int(r.test_start + i), Cell::Num(*t), Cell::Num(*p)])
        .collect();
    let mut paths = vec![w.csv("task.csv", &["step", "target", "output"], &table)?];
    let summary = serde_json::json!({
        "dt": out.dt,
        "spectral_radius": out.spectral_radius,
        "nmse": r.nmse,
        "train_nmse": r.train_nmse,
        "accuracy": r.accuracy,
        "test_start": r.test_start,
        "test_steps": r.targets.len(),
    });
    paths.push(w.json("task.json", &summary)?);
    if c.plot {
        let pts = |v: &[f64]| v.iter().take(PLOT_STEPS).enumerate().map(|(i, y)| ((r.test_start + i) as f64, *y)).collect();
        let series = [Series { name: "target", points: pts(&r.targets) }, Series { name: "output", points: pts(&r.predictions) }];
        let title = format!("Held-out window, NMSE {:.3e}", r.nmse);
        paths.push(w.svg("task.svg", &svg::line_chart(&title, "step", "value", &series))?);
    }
    report(&paths);
    Ok(())
}

const BUCKETS: [&str; 3] = ["linear (d<=1)", "nonlinear (d=2,3)", "nonlinear (d>=4)"];

fn ipc(c: &Common) -> Res<()> {
    set_threads(c.threads)?;
    let (cfg, w) = load(c, "ipc")?;
    let outcomes = run_ipc(&cfg).map_err(|e| e.to_string())?;

    let mut entries = Vec::new();
    for o in &outcomes {
        for e in &o.report.entries {
            entries.push(vec![
                Cell::Text(o.label.clone()),
                Cell::Text(e.function.to_string()),
                Cell::Int(e.degree),
                Cell::Num(e.capacity),
            ]);
        }
    }
    let totals: Vec<Vec<Cell>> = outcomes
        .iter()
        .map(|o| {
            let r = &o.report;
            vec![
                Cell::Text(o.label.clone()),
                Cell::Num(r.total),
                Cell::Num(r.linear),
                Cell::Num(r.low_nonlinear),
                Cell::Num(r.high_nonlinear),
                Cell::Int(r.bound),
                Cell::Num(r.threshold),
                Cell::Int(r.evaluated),
            ]
        })
        .collect();
    let mut paths = vec![
        w.csv("ipc_entries.csv", &["label", "function", "degree", "capacity"], &entries)?,
        w.csv(
            "ipc.csv",
            &["label", "total", "linear", "low_nonlinear", "high_nonlinear", "bound", "threshold", "evaluated"],
            &totals,
        )?,
        w.json("ipc.json", &outcomes)?,
    ];
    if c.plot {
        let cats: Vec<String> = outcomes.iter().map(|o| o.label.clone()).collect();
        let vals: Vec<Vec<f64>> =
            outcomes.iter().map(|o| vec![o.report.linear, o.report.low_nonlinear, o.report.high_nonlinear]).collect();
        paths.push(w.svg("ipc.svg", &svg::stacked_bars("Information processing capacity", "capacity", &cats, &BUCKETS, &vals))?);
    }
    report(&paths);
    Ok(())
}

fn lambda_sweep(c: &Common) -> Res<()> {
    set_threads(c.threads)?;
    let (cfg, w) = load(c, "lambda-sweep")?;
    let points = run_lambda_sweep(&cfg).map_err(|e| e.to_string())?;
    let columns = [
        "lambda",
        "replications",
        "total_mean",
        "total_std",
        "linear_mean",
        "linear_std",
        "low_nonlinear_mean",
        "low_nonlinear_std",
        "high_nonlinear_mean",
        "high_nonlinear_std",
        "linear_fraction_mean",
        "linear_fraction_std",
        "low_fraction_mean",
        "low_fraction_std",
        "high_fraction_mean",
        "high_fraction_std",
    ];
    let table: Vec<Vec<Cell>> = points
        .iter()
        .map(|p| {
            let mut row = vec![Cell::Num(p.lambda), Cell::Int(p.replications)];
            for (m, s) in [
                p.total,
                p.linear,
                p.low_nonlinear,
                p.high_nonlinear,
                p.linear_fraction,
                p.low_fraction,
                p.high_fraction,
            ] {
                row.push(Cell::Num(m));
                row.push(Cell::Num(s));
            }
            row
        })
        .collect();
    let mut paths = vec![w.csv("lambda_sweep.csv", &columns, &table)?, w.json("lambda_sweep.json", &points)?];
    if c.plot {
        let cats: Vec<String> = points.iter().map(|p| format!("{}", p.lambda)).collect();
        let vals: Vec<Vec<f64>> =
            points.iter().map(|p| vec![p.linear_fraction.0, p.low_fraction.0, p.high_fraction.0]).collect();
        let chart = svg::stacked_bars("Capacity fractions over lambda", "fraction of total", &cats, &BUCKETS, &vals);
        paths.push(w.svg("lambda_sweep.svg", &chart)?);
    }
    report(&paths);
    Ok(())
}
