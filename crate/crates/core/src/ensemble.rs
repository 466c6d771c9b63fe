//! Deterministic ensemble running.
//!
//! Trajectory `k` of an ensemble runs on the seed derived from the master
//! seed and `k`, so the ensemble is reproducible bit-for-bit at any degree of
//! parallelism: per-trajectory partial results are collected in index order
//! and merged sequentially, which fixes the floating-point summation order
//! regardless of scheduling.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::einstein::{simulate_einstein_with, AtomState, JumpKind};
use crate::error::{Error, Result};
use crate::mode::run_single_mode_with;
use crate::physics::{PhysicalParams, SelectedMode};
use crate::rates::{bose_einstein_pmf, photon_jump_rates};
use crate::rng::{derive_seed, rng_from_seed};
use crate::stats::{n_resolved_from_counts, EmpiricalRate, NResolvedRate, SampleStats};

/// Which stochastic model an ensemble runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Einstein,
    Driven,
    Mode,
}

impl std::str::FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "einstein" => Ok(Model::Einstein),
            "driven" => Ok(Model::Driven),
            "mode" => Ok(Model::Mode),
            other => Err(Error::Config(format!(
                "unknown model '{other}' (expected einstein, driven, or mode)"
            ))),
        }
    }
}

/// Full description of a run: model, physical parameters, horizons, seeding,
/// and the event-budget guard.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub model: Model,
    pub a_coeff: f64,
    pub nbar: f64,
    pub drive: f64,
    pub kappa: f64,
    pub detuning: f64,
    pub t_max: f64,
    pub dt_out: f64,
    pub n_traj: u64,
    pub seed: u64,
    pub initial_excited: bool,
    pub out_dir: Option<String>,
    pub budget_events: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: Model::Einstein,
            a_coeff: 1.0,
            nbar: 1.0,
            drive: 0.0,
            kappa: 0.01,
            detuning: 0.0,
            t_max: 1000.0,
            dt_out: 0.5,
            n_traj: 1,
            seed: 42,
            initial_excited: false,
            out_dir: None,
            budget_events: 1e9,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("a", self.a_coeff, self.a_coeff.is_finite() && self.a_coeff > 0.0),
            ("nbar", self.nbar, self.nbar.is_finite() && self.nbar >= 0.0),
            ("drive", self.drive, self.drive.is_finite() && self.drive >= 0.0),
            ("kappa", self.kappa, self.kappa.is_finite() && self.kappa >= 0.0),
            ("detuning", self.detuning, self.detuning.is_finite()),
            ("tmax", self.t_max, self.t_max.is_finite() && self.t_max > 0.0),
            ("dt_out", self.dt_out, self.dt_out.is_finite() && self.dt_out > 0.0),
            (
                "budget",
                self.budget_events,
                self.budget_events.is_finite() && self.budget_events > 0.0,
            ),
        ];
        for (name, value, ok) in checks {
            if !ok {
                return Err(Error::Config(format!("{name} = {value} is out of range")));
            }
        }
        if self.n_traj < 1 {
            return Err(Error::Config("traj must be >= 1".into()));
        }
        if self.model != Model::Einstein && self.dt_out > self.t_max {
            return Err(Error::Config(format!(
                "dt_out = {} exceeds tmax = {}",
                self.dt_out, self.t_max
            )));
        }
        Ok(())
    }

    pub fn physical_params(&self) -> Result<PhysicalParams> {
        PhysicalParams::new(self.a_coeff, self.nbar, self.drive)
    }

    pub fn selected_mode(&self) -> Result<SelectedMode> {
        SelectedMode::new(self.kappa, self.detuning, 0.0)
    }

    /// Expected number of atom jumps over the whole ensemble, from the
    /// equilibrium jump flux.
    pub fn estimated_events(&self) -> Result<f64> {
        let params = self.physical_params()?;
        let (p_g, p_e) = params.equilibrium()?;
        let flux = params.gamma_down() * p_e + params.gamma_up() * p_g;
        Ok(self.n_traj as f64 * self.t_max * flux)
    }
}

/// Merged ensemble statistics with the analytic comparison block.
///
/// Photon-count fields are `null` for models without a tracked mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub seed: u64,
    pub config_echo: RunConfig,
    pub total_time: f64,
    pub n_events: u64,
    pub pe_time_avg: f64,
    pub residence_down_mean: Option<f64>,
    pub residence_down_se: Option<f64>,
    pub residence_down_count: u64,
    pub residence_up_mean: Option<f64>,
    pub residence_up_se: Option<f64>,
    pub residence_up_count: u64,
    pub histogram: Option<BTreeMap<i64, f64>>,
    pub tv_distance: Option<f64>,
    pub gamma_up_emp: Option<f64>,
    pub gamma_up_se: Option<f64>,
    pub gamma_down_emp: Option<f64>,
    pub gamma_down_se: Option<f64>,
    pub gamma_up_analytic: Option<f64>,
    pub gamma_down_analytic: Option<f64>,
    pub gamma_up_rel_dev: Option<f64>,
    pub gamma_down_rel_dev: Option<f64>,
    pub low_statistics: Option<bool>,
    pub n_resolved: Option<Vec<NResolvedRate>>,
}

#[derive(Debug, Clone, Default)]
struct ResidenceAcc {
    down_sum: f64,
    down_sq: f64,
    down_n: u64,
    up_sum: f64,
    up_sq: f64,
    up_n: u64,
}

impl ResidenceAcc {
    fn push(&mut self, kind: JumpKind, dt: f64) {
        match kind {
            JumpKind::Down => {
                self.down_sum += dt;
                self.down_sq += dt * dt;
                self.down_n += 1;
            }
            JumpKind::Up => {
                self.up_sum += dt;
                self.up_sq += dt * dt;
                self.up_n += 1;
            }
        }
    }

    fn merge(&mut self, other: &ResidenceAcc) {
        self.down_sum += other.down_sum;
        self.down_sq += other.down_sq;
        self.down_n += other.down_n;
        self.up_sum += other.up_sum;
        self.up_sq += other.up_sq;
        self.up_n += other.up_n;
    }
}

#[derive(Debug, Clone, Default)]
struct Partial {
    time: f64,
    pe_integral: f64,
    pe_span: f64,
    n_events: u64,
    residences: ResidenceAcc,
    occupancy: Vec<(i64, f64)>,
    up_at: BTreeMap<i64, u64>,
    down_at: BTreeMap<i64, u64>,
}

fn run_einstein_trajectory(config: &RunConfig, params: &PhysicalParams, seed: u64) -> Partial {
    let initial = if config.initial_excited { AtomState::Excited } else { AtomState::Ground };
    let mut rng = rng_from_seed(seed);
    let record = simulate_einstein_with(params, initial, config.t_max, &mut rng);
    let mut partial = Partial {
        time: config.t_max,
        pe_integral: record.time_excited(config.t_max),
        pe_span: config.t_max,
        n_events: record.events.len() as u64,
        ..Partial::default()
    };
    let mut prev = 0.0;
    for e in &record.events {
        partial.residences.push(e.kind, e.time - prev);
        prev = e.time;
    }
    partial
}

fn run_driven_trajectory(
    config: &RunConfig,
    params: &PhysicalParams,
    seed: u64,
) -> Result<Partial> {
    let mut rng = rng_from_seed(seed);
    let mut partial = Partial { time: config.t_max, ..Partial::default() };
    let mut prev_point: Option<(f64, f64)> = None;
    let mut prev_event_t = 0.0;
    crate::driven::run_driven_with(
        params,
        config.t_max,
        config.dt_out,
        &mut rng,
        |p| {
            if let Some((t0, pe0)) = prev_point {
                partial.pe_integral += (p.t - t0) * 0.5 * (pe0 + p.pe);
                partial.pe_span += p.t - t0;
            }
            prev_point = Some((p.t, p.pe));
        },
        |e, _| {
            partial.n_events += 1;
            partial.residences.push(e.kind, e.time - prev_event_t);
            prev_event_t = e.time;
        },
    )?;
    Ok(partial)
}

fn run_mode_trajectory(
    config: &RunConfig,
    params: &PhysicalParams,
    mode: &SelectedMode,
    seed: u64,
) -> Result<Partial> {
    let mut rng = rng_from_seed(seed);
    let mut partial = Partial { time: config.t_max, ..Partial::default() };
    let mut prev_point: Option<(f64, f64)> = None;
    let mut prev_event_t = 0.0;
    let mut occupancy: BTreeMap<i64, f64> = BTreeMap::new();
    let mut last_n: Option<i64> = None;
    let initial = run_single_mode_with(
        params,
        mode,
        config.t_max,
        config.dt_out,
        &mut rng,
        None,
        |p| {
            if let Some((t0, pe0)) = prev_point {
                partial.pe_integral += (p.t - t0) * 0.5 * (pe0 + p.pe);
                partial.pe_span += p.t - t0;
            }
            prev_point = Some((p.t, p.pe));
        },
        |e| {
            partial.n_events += 1;
            partial.residences.push(e.kind, e.time - prev_event_t);
            *occupancy.entry(e.n_before).or_insert(0.0) += e.time - prev_event_t;
            prev_event_t = e.time;
            last_n = Some(e.n_after);
            if e.anomalous {
                match e.kind {
                    JumpKind::Up => *partial.up_at.entry(e.n_before).or_insert(0) += 1,
                    JumpKind::Down => *partial.down_at.entry(e.n_before).or_insert(0) += 1,
                }
            }
        },
    )?;
    let final_n = last_n
        .or_else(|| initial.integer_field_count())
        .expect("initial state is a product state");
    *occupancy.entry(final_n).or_insert(0.0) += config.t_max - prev_event_t;
    partial.occupancy = occupancy.into_iter().collect();
    Ok(partial)
}

/// Runs an ensemble and merges the per-trajectory statistics.
///
/// Refuses to start if the estimated event count exceeds the configured
/// budget. Any trajectory failure aborts the ensemble with the failing
/// index and seed attached.
pub fn ensemble_run(config: &RunConfig) -> Result<EnsembleSummary> {
    config.validate()?;
    let params = config.physical_params()?;
    let estimated = config.estimated_events()?;
    if estimated > config.budget_events {
        return Err(Error::BudgetExceeded { estimated, budget: config.budget_events });
    }
    let mode = config.selected_mode()?;

    let partials: Vec<Result<Partial>> = (0..config.n_traj)
        .into_par_iter()
        .map(|k| {
            let seed = derive_seed(config.seed, k);
            match config.model {
                Model::Einstein => Ok(run_einstein_trajectory(config, &params, seed)),
                Model::Driven => run_driven_trajectory(config, &params, seed),
                Model::Mode => run_mode_trajectory(config, &params, &mode, seed),
            }
            .map_err(|e| Error::TrajectoryFailure {
                index: k,
                seed,
                source: Box::new(e),
            })
        })
        .collect();

    let mut merged = Partial::default();
    let mut up_at: BTreeMap<i64, u64> = BTreeMap::new();
    let mut down_at: BTreeMap<i64, u64> = BTreeMap::new();
    let mut time_at: BTreeMap<i64, f64> = BTreeMap::new();
    for partial in partials {
        let partial = partial?;
        merged.time += partial.time;
        merged.pe_integral += partial.pe_integral;
        merged.pe_span += partial.pe_span;
        merged.n_events += partial.n_events;
        merged.residences.merge(&partial.residences);
        for (n, t) in &partial.occupancy {
            *time_at.entry(*n).or_insert(0.0) += t;
        }
        for (n, c) in &partial.up_at {
            *up_at.entry(*n).or_insert(0) += c;
        }
        for (n, c) in &partial.down_at {
            *down_at.entry(*n).or_insert(0) += c;
        }
    }

    let res_down = SampleStats::from_sums(
        merged.residences.down_sum,
        merged.residences.down_sq,
        merged.residences.down_n,
    );
    let res_up =
        SampleStats::from_sums(merged.residences.up_sum, merged.residences.up_sq, merged.residences.up_n);

    let mut summary = EnsembleSummary {
        seed: config.seed,
        config_echo: config.clone(),
        total_time: merged.time,
        n_events: merged.n_events,
        pe_time_avg: if merged.pe_span > 0.0 { merged.pe_integral / merged.pe_span } else { 0.0 },
        residence_down_mean: res_down.map(|s| s.mean),
        residence_down_se: res_down.map(|s| s.std_err),
        residence_down_count: merged.residences.down_n,
        residence_up_mean: res_up.map(|s| s.mean),
        residence_up_se: res_up.map(|s| s.std_err),
        residence_up_count: merged.residences.up_n,
        histogram: None,
        tv_distance: None,
        gamma_up_emp: None,
        gamma_up_se: None,
        gamma_down_emp: None,
        gamma_down_se: None,
        gamma_up_analytic: None,
        gamma_down_analytic: None,
        gamma_up_rel_dev: None,
        gamma_down_rel_dev: None,
        low_statistics: None,
        n_resolved: None,
    };

    if config.model == Model::Mode {
        let tv = {
            let merged_occ: Vec<(i64, f64)> = time_at.iter().map(|(&n, &t)| (n, t)).collect();
            crate::stats::photon_histogram(&[merged_occ], config.nbar)?
        };
        let up_total: u64 = up_at.values().sum();
        let down_total: u64 = down_at.values().sum();
        let up_rate = EmpiricalRate::from_counts(up_total, merged.time);
        let down_rate = EmpiricalRate::from_counts(down_total, merged.time);
        let (gamma_up_analytic, gamma_down_analytic) = thermal_average_rates(&params, &mode)?;
        summary.histogram = Some(tv.occupation);
        summary.tv_distance = Some(tv.tv_distance);
        summary.gamma_up_emp = Some(up_rate.rate);
        summary.gamma_up_se = Some(up_rate.std_err);
        summary.gamma_down_emp = Some(down_rate.rate);
        summary.gamma_down_se = Some(down_rate.std_err);
        summary.gamma_up_analytic = Some(gamma_up_analytic);
        summary.gamma_down_analytic = Some(gamma_down_analytic);
        let rel_dev = |emp: f64, analytic: f64| {
            if analytic > 0.0 {
                Some((emp - analytic) / analytic)
            } else {
                None
            }
        };
        summary.gamma_up_rel_dev = rel_dev(up_rate.rate, gamma_up_analytic);
        summary.gamma_down_rel_dev = rel_dev(down_rate.rate, gamma_down_analytic);
        summary.low_statistics = Some(up_rate.low_statistics || down_rate.low_statistics);
        summary.n_resolved = Some(n_resolved_from_counts(&time_at, &up_at, &down_at, &params, &mode)?);
    }
    Ok(summary)
}

/// Thermal averages of the photon-number jump rates over the Bose-Einstein
/// distribution; the long-run aggregate rates an equilibrated trajectory
/// should show.
fn thermal_average_rates(params: &PhysicalParams, mode: &SelectedMode) -> Result<(f64, f64)> {
    let mut up = 0.0;
    let mut down = 0.0;
    for n in 0..10_000u64 {
        let p = bose_einstein_pmf(params.nbar(), n);
        if p < 1e-16 && n > 0 {
            break;
        }
        let rates = photon_jump_rates(params, mode, n)?;
        up += p * rates.gamma_up;
        down += p * rates.gamma_down;
    }
    Ok((up, down))
}
