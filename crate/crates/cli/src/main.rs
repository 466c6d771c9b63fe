//! `tjump`: trajectory simulations and analytic rate checks for a two-state
//! atom in a thermal radiation field.
//!
//! Simulation subcommands write CSV files; `rates` and `consistency` print
//! JSON to stdout; `ensemble` prints the merged summary JSON. Exit codes:
//! 0 success, 1 runtime failure, 2 usage or configuration error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thermal_jumps::config::{get_f64, get_u64, parse_config};
use thermal_jumps::csvio;
use thermal_jumps::driven::simulate_driven;
use thermal_jumps::einstein::{simulate_einstein, AtomState};
use thermal_jumps::ensemble::{ensemble_run, Model, RunConfig};
use thermal_jumps::error::Error as CoreError;
use thermal_jumps::mode::simulate_single_mode;
use thermal_jumps::physics::{PhysicalParams, SelectedMode};
use thermal_jumps::rates::{
    anomalous_jump_probability, bose_einstein_pmf, lowest_order_probability, mode_sum_check,
    photon_jump_rates, ModeSumQuadrature,
};

#[derive(Parser)]
#[command(
    name = "tjump",
    version,
    about = "Thermal quantum-jump trajectories of a two-state atom",
    after_help = "Rates are in units of the spontaneous rate A, time in 1/A. \
                  A flat `key = value` config file can preset any flag; flags \
                  override the file."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the bare thermal jump process; writes events.csv
    Einstein(SimArgs),
    /// Simulate the resonantly driven atom; writes series.csv and events.csv
    Driven(SimArgs),
    /// Simulate the atom entangled with one reservoir mode; writes
    /// series.csv and events.csv
    Mode(SimArgs),
    /// Print the analytic photon-number jump rates at a given count as JSON
    Rates(RatesArgs),
    /// Integrate the per-mode rates over all detunings and compare against
    /// the Einstein rates; prints JSON
    Consistency(ConsistencyArgs),
    /// Run a seeded parallel ensemble and print the merged summary JSON
    Ensemble(SimArgs),
}

#[derive(Args, Clone)]
struct SimArgs {
    /// Flat key = value config file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model for `ensemble` (einstein, driven, mode)
    #[arg(long)]
    model: Option<String>,
    /// Spontaneous rate A
    #[arg(long)]
    a: Option<f64>,
    /// Mean thermal photon number at the transition frequency
    #[arg(long)]
    nbar: Option<f64>,
    /// Coherent drive amplitude (driven model)
    #[arg(long)]
    drive: Option<f64>,
    /// Mode coupling magnitude |kappa| (mode model)
    #[arg(long)]
    kappa: Option<f64>,
    /// Mode detuning from the atomic transition (mode model)
    #[arg(long)]
    detuning: Option<f64>,
    /// Simulated time per trajectory
    #[arg(long)]
    tmax: Option<f64>,
    /// Output sampling interval
    #[arg(long = "dt-out")]
    dt_out: Option<f64>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Number of trajectories (ensemble)
    #[arg(long)]
    traj: Option<u64>,
    /// Initial atom state for the einstein model (ground or excited)
    #[arg(long)]
    initial: Option<String>,
    /// Output directory for CSV/JSON files
    #[arg(long)]
    out: Option<PathBuf>,
    /// Maximum estimated event count before the run refuses to start
    #[arg(long)]
    budget: Option<f64>,
}

#[derive(Args)]
struct RatesArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    nbar: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    detuning: Option<f64>,
    /// Photon count N of the selected mode
    #[arg(long)]
    n: Option<u64>,
}

#[derive(Args)]
struct ConsistencyArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    nbar: Option<f64>,
    /// Integration window in Lorentzian half-widths
    #[arg(long)]
    window: Option<f64>,
    /// Total quadrature node count
    #[arg(long)]
    nodes: Option<u64>,
}

enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Config(_) | CoreError::InvalidParameter(_) | CoreError::BudgetExceeded { .. } => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn load_config(path: &Option<PathBuf>) -> CliResult<BTreeMap<String, String>> {
    match path {
        None => Ok(BTreeMap::new()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", p.display()))
            })?;
            Ok(parse_config(&text)?)
        }
    }
}

/// Flag value if given, else config-file value, else the default.
fn resolve<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn resolve_run_config(args: &SimArgs, subcommand_model: Option<Model>) -> CliResult<RunConfig> {
    let file = load_config(&args.config)?;
    let defaults = RunConfig::default();

    let file_model = file
        .get("model")
        .map(|s| s.parse::<Model>())
        .transpose()?;
    let flag_model = args
        .model
        .as_deref()
        .map(|s| s.parse::<Model>())
        .transpose()?;
    let model = match subcommand_model {
        Some(m) => {
            for (origin, other) in [("--model", flag_model), ("config", file_model)] {
                if let Some(o) = other {
                    if o != m {
                        return Err(CliError::Usage(format!(
                            "{origin} sets model {o:?}, conflicting with the subcommand"
                        )));
                    }
                }
            }
            m
        }
        None => flag_model.or(file_model).ok_or_else(|| {
            CliError::Usage("ensemble needs --model (or model = ... in the config)".into())
        })?,
    };

    let initial = resolve(
        args.initial.clone(),
        file.get("initial").cloned(),
        "ground".to_string(),
    );
    let initial_excited = match initial.as_str() {
        "ground" => false,
        "excited" => true,
        other => {
            return Err(CliError::Usage(format!(
                "initial must be ground or excited, got '{other}'"
            )))
        }
    };

    let out_dir = args
        .out
        .clone()
        .map(|p| p.display().to_string())
        .or_else(|| file.get("out").cloned());

    let config = RunConfig {
        model,
        a_coeff: resolve(args.a, get_f64(&file, "a")?, defaults.a_coeff),
        nbar: resolve(args.nbar, get_f64(&file, "nbar")?, defaults.nbar),
        drive: resolve(args.drive, get_f64(&file, "drive")?, defaults.drive),
        kappa: resolve(args.kappa, get_f64(&file, "kappa")?, defaults.kappa),
        detuning: resolve(args.detuning, get_f64(&file, "detuning")?, defaults.detuning),
        t_max: resolve(args.tmax, get_f64(&file, "tmax")?, defaults.t_max),
        dt_out: resolve(args.dt_out, get_f64(&file, "dt_out")?, defaults.dt_out),
        n_traj: resolve(args.traj, get_u64(&file, "traj")?, defaults.n_traj),
        seed: resolve(args.seed, get_u64(&file, "seed")?, defaults.seed),
        initial_excited,
        out_dir,
        budget_events: resolve(args.budget, get_f64(&file, "budget")?, defaults.budget_events),
    };
    config.validate()?;
    if config.estimated_events()? > config.budget_events {
        return Err(CoreError::BudgetExceeded {
            estimated: config.estimated_events()?,
            budget: config.budget_events,
        }
        .into());
    }
    Ok(config)
}

fn out_dir(config: &RunConfig) -> CliResult<PathBuf> {
    let dir = PathBuf::from(config.out_dir.clone().unwrap_or_else(|| ".".into()));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run_einstein(args: &SimArgs) -> CliResult<()> {
    let config = resolve_run_config(args, Some(Model::Einstein))?;
    let params = config.physical_params()?;
    let initial = if config.initial_excited { AtomState::Excited } else { AtomState::Ground };
    let record = simulate_einstein(&params, initial, config.t_max, config.seed)?;
    let dir = out_dir(&config)?;
    write_file(&dir, "events.csv", &csvio::events_to_csv(&record.events))
}

fn run_driven(args: &SimArgs) -> CliResult<()> {
    let config = resolve_run_config(args, Some(Model::Driven))?;
    let params = config.physical_params()?;
    let run = simulate_driven(&params, config.t_max, config.dt_out, config.seed)?;
    let dir = out_dir(&config)?;
    write_file(&dir, "series.csv", &csvio::driven_series_to_csv(&run.series))?;
    write_file(&dir, "events.csv", &csvio::events_to_csv(&run.record.events))
}

fn run_mode(args: &SimArgs) -> CliResult<()> {
    let config = resolve_run_config(args, Some(Model::Mode))?;
    let params = config.physical_params()?;
    let mode = config.selected_mode()?;
    let run = simulate_single_mode(&params, &mode, config.t_max, config.dt_out, config.seed, None)?;
    let dir = out_dir(&config)?;
    write_file(&dir, "series.csv", &csvio::mode_series_to_csv(&run.series))?;
    write_file(&dir, "events.csv", &csvio::mode_events_to_csv(&run.events))
}

fn run_ensemble(args: &SimArgs) -> CliResult<()> {
    let config = resolve_run_config(args, None)?;
    let summary = ensemble_run(&config)?;
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    if config.out_dir.is_some() {
        let dir = out_dir(&config)?;
        write_file(&dir, "summary.json", &json)?;
    }
    println!("{json}");
    Ok(())
}

fn run_rates(args: &RatesArgs) -> CliResult<()> {
    let file = load_config(&args.config)?;
    let a = resolve(args.a, get_f64(&file, "a")?, 1.0);
    let nbar = resolve(args.nbar, get_f64(&file, "nbar")?, 1.0);
    let kappa = resolve(args.kappa, get_f64(&file, "kappa")?, 0.01);
    let detuning = resolve(args.detuning, get_f64(&file, "detuning")?, 0.0);
    let n = resolve(args.n, get_u64(&file, "n")?, 1);

    let params = PhysicalParams::new(a, nbar, 0.0)?;
    let mode = SelectedMode::new(kappa, detuning, 0.0)?;
    let rates = photon_jump_rates(&params, &mode, n)?;
    let (p_g, p_e) = params.equilibrium()?;

    let up_prep_exact = anomalous_jump_probability(&params, &mode, n, AtomState::Excited)?;
    let up_prep_lowest = lowest_order_probability(&params, &mode, n, AtomState::Excited);
    let (down_prep_exact, down_prep_lowest) = if n >= 1 {
        (
            Some(anomalous_jump_probability(&params, &mode, n - 1, AtomState::Ground)?),
            Some(lowest_order_probability(&params, &mode, n - 1, AtomState::Ground)),
        )
    } else {
        (None, None)
    };

    let json = serde_json::json!({
        "a": a,
        "nbar": nbar,
        "kappa": kappa,
        "detuning": detuning,
        "n": n,
        "gamma_up": rates.gamma_up,
        "gamma_down": rates.gamma_down,
        "p_ground_eq": p_g,
        "p_excited_eq": p_e,
        "pmf_bose_einstein": bose_einstein_pmf(nbar, n),
        "prob_up_after_up_exact": up_prep_exact,
        "prob_up_after_up_lowest_order": up_prep_lowest,
        "prob_down_after_down_exact": down_prep_exact,
        "prob_down_after_down_lowest_order": down_prep_lowest,
    });
    println!("{}", serde_json::to_string_pretty(&json).map_err(|e| CliError::Runtime(e.to_string()))?);
    Ok(())
}

fn run_consistency(args: &ConsistencyArgs) -> CliResult<()> {
    let file = load_config(&args.config)?;
    let a = resolve(args.a, get_f64(&file, "a")?, 1.0);
    let nbar = resolve(args.nbar, get_f64(&file, "nbar")?, 1.0);
    let window = resolve(args.window, get_f64(&file, "window")?, 200.0);
    let nodes = resolve(args.nodes, get_u64(&file, "nodes")?, 4096);

    let params = PhysicalParams::new(a, nbar, 0.0)?;
    let (p_g, p_e) = params.equilibrium()?;
    let result = mode_sum_check(
        &params,
        ModeSumQuadrature { half_width_multiplier: window, node_count: nodes as usize },
    )?;
    let json = serde_json::json!({
        "a": a,
        "nbar": nbar,
        "window_half_widths": window,
        "nodes": nodes,
        "sum_up": result.sum_up,
        "sum_down": result.sum_down,
        "target_up": params.gamma_down() * p_e,
        "target_down": params.gamma_up() * p_g,
        "rel_err_up": result.rel_err_up,
        "rel_err_down": result.rel_err_down,
    });
    println!("{}", serde_json::to_string_pretty(&json).map_err(|e| CliError::Runtime(e.to_string()))?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Einstein(args) => run_einstein(args),
        Command::Driven(args) => run_driven(args),
        Command::Mode(args) => run_mode(args),
        Command::Rates(args) => run_rates(args),
        Command::Consistency(args) => run_consistency(args),
        Command::Ensemble(args) => run_ensemble(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
