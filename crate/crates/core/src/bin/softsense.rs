use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use softsense::dataset::{Dataset, Preprocessing, YColumn};
use softsense::harness::{
    sweep_delay, sweep_window_size, ModelKind, ModelSpec, SweepCell, UpdateMode, UpdatePolicy,
    DELAY_GRID, WINDOW_GRID,
};
use softsense::report::{self, SummaryTable};
use softsense::simulator::{self, Regime, SimConfig};

#[derive(Parser)]
#[command(
    name = "softsense",
    version,
    about = "Small-window soft sensor experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic process dataset as CSV.
    Simulate(SimulateArgs),
    /// RMSEP against moving-window size.
    SweepWindow(SweepArgs),
    /// RMSEP against update delay.
    SweepDelay(SweepArgs),
    /// One-step-ahead RMSEP per model.
    OneStep(SweepArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value = "monotonic")]
    regime: RegimeArg,
    /// Number of samples; defaults to 318 (monotonic) or 2394 (drifting).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    variables: Option<usize>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "softsense-out")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Monotonic,
    Drifting,
}

impl From<RegimeArg> for Regime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::Monotonic => Regime::Monotonic,
            RegimeArg::Drifting => Regime::Drifting,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Preset {
    /// Benchmark file; property lagged 8 samples, first 4.0% validation.
    Debutanizer,
    /// Benchmark file; duplicate readings jittered by 1e-6, first 4.6% validation.
    Sru,
    /// Simulated monotonic process, first 14.1% validation.
    Monotonic,
    /// Simulated drifting process.
    Drifting,
}

impl Preset {
    fn preprocessing(self) -> Preprocessing {
        match self {
            Preset::Debutanizer => Preprocessing::DEBUTANIZER,
            Preset::Sru => Preprocessing::SRU,
            Preset::Monotonic => Preprocessing::MONOTONIC,
            Preset::Drifting => Preprocessing::default(),
        }
    }

    fn lambda(self) -> f64 {
        match self {
            Preset::Debutanizer => 0.01,
            Preset::Sru | Preset::Drifting => 0.05,
            Preset::Monotonic => 0.10,
        }
    }

    fn regime(self) -> Option<Regime> {
        match self {
            Preset::Monotonic => Some(Regime::Monotonic),
            Preset::Drifting => Some(Regime::Drifting),
            _ => None,
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    /// CSV file with a header row.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Preprocessing preset; `monotonic` and `drifting` generate data instead of reading it.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Property column name or 0-based index.
    #[arg(long, default_value = "y")]
    y_col: String,
    /// Shift the property back this many samples against the sensors.
    #[arg(long)]
    y_lag: Option<usize>,
    /// Nudge repeated property readings apart by this amount.
    #[arg(long)]
    jitter: Option<f64>,
    /// Score only samples after this leading fraction of the series.
    #[arg(long)]
    validation_fraction: Option<f64>,
    /// Comma list of mmw, pls, rpls, rf, rfpls.
    #[arg(long, default_value = "mmw,pls,rpls,rf,rfpls")]
    models: String,
    /// Window sizes, e.g. `2..10,15,20,25`.
    #[arg(long)]
    windows: Option<String>,
    /// Delays, e.g. `1..9`.
    #[arg(long)]
    delays: Option<String>,
    #[arg(long, value_enum, default_value = "continuous")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "softsense-out")]
    out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    trees: usize,
    /// Forgetting factor for recursive PLS; defaults to the preset's or 0.05.
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Continuous,
    Delayed,
}

impl From<ModeArg> for UpdateMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Continuous => UpdateMode::Continuous,
            ModeArg::Delayed => UpdateMode::Delayed,
        }
    }
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<softsense::Error> for Failure {
    fn from(e: softsense::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::SweepWindow(a) => sweep(a, SummaryTable::Window, "sweep-window"),
        Command::SweepDelay(a) => sweep(a, SummaryTable::Delay, "sweep-delay"),
        Command::OneStep(a) => sweep(a, SummaryTable::OneStep, "one-step"),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn simulate(a: SimulateArgs) -> CliResult<()> {
    let mut cfg = SimConfig::for_regime(a.regime.into(), a.seed);
    cfg.n_samples = a.n.unwrap_or(cfg.n_samples);
    cfg.n_variables = a.variables.unwrap_or(cfg.n_variables);
    cfg.noise_sd = a.noise.unwrap_or(cfg.noise_sd);
    let data = simulator::generate(&cfg)?;
    std::fs::create_dir_all(&a.out)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", a.out.display())))?;
    let path = a.out.join(format!("{}.csv", data.name));
    data.write_csv(&path)?;
    println!("{}\t{} rows", path.display(), data.n_samples());
    Ok(())
}

/// Parses `2..10,15,20` into `[2, 3, ..., 10, 15, 20]`; ranges are inclusive.
fn parse_list(flag: &str, s: &str) -> CliResult<Vec<usize>> {
    let bad = |part: &str| {
        Failure::Usage(format!(
            "--{flag}: cannot read {part:?} as a count or A..B range"
        ))
    };
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once("..") {
            Some((lo, hi)) => {
                let lo: usize = lo.trim().parse().map_err(|_| bad(part))?;
                let hi: usize = hi
                    .trim()
                    .trim_start_matches('=')
                    .parse()
                    .map_err(|_| bad(part))?;
                if lo > hi {
                    return Err(bad(part));
                }
                out.extend(lo..=hi);
            }
            None => out.push(part.parse().map_err(|_| bad(part))?),
        }
    }
    if out.is_empty() {
        return Err(Failure::Usage(format!("--{flag} is empty")));
    }
    Ok(out)
}

fn parse_models(s: &str) -> CliResult<Vec<ModelKind>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            ModelKind::parse(p).ok_or_else(|| {
                let valid: Vec<&str> = ModelKind::ALL.iter().map(|k| k.name()).collect();
                Failure::Usage(format!(
                    "unknown model {p:?}; valid models are {{{}}}",
                    valid.join(", ")
                ))
            })
        })
        .collect()
}

fn y_column(s: &str) -> YColumn {
    match s.parse::<usize>() {
        Ok(i) => YColumn::Index(i),
        Err(_) => YColumn::Name(s.to_string()),
    }
}

#[derive(Serialize)]
struct DataEcho {
    source: String,
    preset: Option<Preset>,
    y_col: String,
    preprocessing: Preprocessing,
    n_samples: usize,
    n_variables: usize,
    eval_start: usize,
}

fn load(a: &SweepArgs) -> CliResult<(Dataset, DataEcho)> {
    let (data, source) =
        match (&a.data, a.preset.and_then(Preset::regime)) {
            (Some(_), Some(_)) => {
                return Err(Failure::Usage(
                    "--data cannot be combined with a simulated preset".into(),
                ))
            }
            (Some(path), None) => (
                Dataset::load_csv(path, y_column(&a.y_col))?,
                path.display().to_string(),
            ),
            (None, Some(regime)) => {
                let d = simulator::generate(&SimConfig::for_regime(regime, a.seed))?;
                let source = format!("simulated:{}", regime.name());
                (d, source)
            }
            (None, None) => return Err(Failure::Usage(
                "give a data file with --data or a simulated preset (--preset monotonic|drifting)"
                    .into(),
            )),
        };
    let base = a.preset.map(Preset::preprocessing).unwrap_or_default();
    let prep = Preprocessing {
        y_lag: a.y_lag.unwrap_or(base.y_lag),
        jitter: a.jitter.or(base.jitter),
        validation_fraction: a.validation_fraction.or(base.validation_fraction),
    };
    let (data, eval_start) = prep.apply(&data)?;
    let echo = DataEcho {
        source,
        preset: a.preset,
        y_col: a.y_col.clone(),
        preprocessing: prep,
        n_samples: data.n_samples(),
        n_variables: data.n_variables(),
        eval_start,
    };
    Ok((data, echo))
}

fn sweep(a: SweepArgs, table: SummaryTable, name: &str) -> CliResult<()> {
    let kinds = parse_models(&a.models)?;
    let windows = match &a.windows {
        Some(s) => parse_list("windows", s)?,
        None if table == SummaryTable::Window => WINDOW_GRID.to_vec(),
        None => vec![4],
    };
    let delays = match &a.delays {
        Some(s) => parse_list("delays", s)?,
        None if table == SummaryTable::Delay => DELAY_GRID.to_vec(),
        None => vec![1],
    };
    if table != SummaryTable::Window && windows.len() != 1 {
        return Err(Failure::Usage(format!("{name} takes a single window size")));
    }
    if table != SummaryTable::Delay && delays.len() != 1 {
        return Err(Failure::Usage(format!("{name} takes a single delay")));
    }
    if delays.contains(&0) || windows.iter().any(|&w| w < 2) {
        return Err(Failure::Usage(
            "windows must be at least 2 and delays at least 1".into(),
        ));
    }
    let mode: UpdateMode = if table == SummaryTable::OneStep {
        UpdateMode::Continuous
    } else {
        a.mode.into()
    };

    let (data, echo) = load(&a)?;
    let lambda = a
        .lambda
        .or(a.preset.map(Preset::lambda))
        .unwrap_or(ModelSpec::new(ModelKind::Rpls, 2).lambda);
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Failure::Usage(format!(
            "--lambda must lie in [0, 1], got {lambda}"
        )));
    }
    let max_window = *windows.iter().max().expect("non-empty");
    let max_delay = *delays.iter().max().expect("non-empty");
    let needed = (max_window + max_delay).max(echo.eval_start + 1);
    if data.n_samples() < needed {
        return Err(Failure::Runtime(format!(
            "dataset has {} samples but window {max_window} with delay {max_delay} needs at least {needed}",
            data.n_samples()
        )));
    }

    let specs: Vec<ModelSpec> = kinds
        .iter()
        .map(|&k| {
            ModelSpec::new(k, windows[0])
                .with_lambda(lambda)
                .with_trees(a.trees)
                .with_seed(a.seed)
        })
        .collect();
    let cells: Vec<SweepCell> = match table {
        SummaryTable::Delay => sweep_delay(&data, &specs, &delays, mode, echo.eval_start),
        _ => {
            let policy = UpdatePolicy {
                mode,
                delay: delays[0],
            };
            sweep_window_size(&data, &specs, &windows, policy, echo.eval_start)
        }
    };

    std::fs::create_dir_all(&a.out)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", a.out.display())))?;
    report::write_sweep(&a.out, &data.name, table, &cells)?;
    let config = json!({
        "command": name,
        "version": env!("CARGO_PKG_VERSION"),
        "data": echo,
        "models": specs,
        "windows": windows,
        "delays": delays,
        "mode": mode,
        "seed": a.seed,
        "trees": a.trees,
        "lambda": lambda,
    });
    report::write_json(&a.out.join("config.json"), &config)?;
    print_table(&a.out, table, &cells);
    Ok(())
}

fn print_table(out: &Path, table: SummaryTable, cells: &[SweepCell]) {
    for cell in cells {
        let key = match table {
            SummaryTable::Window => format!(" w={}", cell.spec.window),
            SummaryTable::Delay => format!(" d={}", cell.policy.delay),
            SummaryTable::OneStep => String::new(),
        };
        match &cell.outcome {
            Ok(r) => println!(
                "{:<6}{key:<6} rmsep {:.6}  n {}  flagged {}",
                cell.spec.kind, r.rmsep, r.n_predictions, r.n_flagged
            ),
            Err(e) => println!("{:<6}{key:<6} failed: {e}", cell.spec.kind),
        }
    }
    println!("wrote {}", out.display());
}
