//! Thermal jumps plus a resonant classical drive.
//!
//! Between jumps the conditional state evolves in the frame rotating at the
//! transition frequency, where the drive coupling is time independent; jumps
//! project the atom onto a stationary state and the evolution restarts from
//! there. Reported observables are rotating-frame quantities (the optical
//! carrier is removed).

use num_complex::Complex64;
use rand::Rng;

use crate::einstein::{AtomState, JumpEvent, JumpKind, JumpRecord};
use crate::engine::{
    closed_form_propagator, sample_jump_time, select_jump_type, ConditionalState2, Generator2,
    JumpOutcome,
};
use crate::error::{Error, Result};
use crate::physics::PhysicalParams;
use crate::rng::rng_from_seed;

/// Sampled observables of the normalized conditional state: excited
/// population and the rotating-frame coherence `<g|psi><psi|e> / ||psi||^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrivenTrajectoryPoint {
    pub t: f64,
    pub pe: f64,
    pub coh_re: f64,
    pub coh_im: f64,
}

/// One driven-atom trajectory: the output series, the observables right
/// after each jump, and the jump record.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivenRun {
    pub series: Vec<DrivenTrajectoryPoint>,
    pub post_jump: Vec<DrivenTrajectoryPoint>,
    pub record: JumpRecord,
}

/// Rotating-frame generator for the driven atom:
/// `d amp_e/dt = -(gamma_down/2) amp_e - drive * amp_g`,
/// `d amp_g/dt = -(gamma_up/2) amp_g + drive * amp_e`.
pub fn driven_generator(params: &PhysicalParams) -> Generator2 {
    Generator2::new(
        Complex64::new(-0.5 * params.gamma_down(), 0.0),
        Complex64::new(-0.5 * params.gamma_up(), 0.0),
        Complex64::new(-params.drive(), 0.0),
        Complex64::new(params.drive(), 0.0),
    )
    .expect("driven generator entries are finite with non-positive diagonals")
}

/// Projective jump on the atomic state: `Down` keeps the upper amplitude's
/// phase and moves all weight to the lower component, `Up` the reverse.
pub fn apply_atom_jump(state: &ConditionalState2, kind: JumpKind) -> Result<ConditionalState2> {
    match kind {
        JumpKind::Down => {
            let amp = state.amp_upper;
            let norm = amp.norm();
            if norm == 0.0 {
                return Err(Error::ZeroAmplitudeProjection(
                    "down-jump requires a nonzero excited amplitude",
                ));
            }
            Ok(ConditionalState2::new(Complex64::new(0.0, 0.0), amp / norm))
        }
        JumpKind::Up => {
            let amp = state.amp_lower;
            let norm = amp.norm();
            if norm == 0.0 {
                return Err(Error::ZeroAmplitudeProjection(
                    "up-jump requires a nonzero ground amplitude",
                ));
            }
            Ok(ConditionalState2::new(amp / norm, Complex64::new(0.0, 0.0)))
        }
    }
}

fn observe(t: f64, state: &ConditionalState2) -> DrivenTrajectoryPoint {
    let norm_sq = state.norm_sq();
    let coh = state.amp_lower * state.amp_upper.conj() / norm_sq;
    DrivenTrajectoryPoint {
        t,
        pe: state.amp_upper.norm_sqr() / norm_sq,
        coh_re: coh.re,
        coh_im: coh.im,
    }
}

/// Simulates one driven-atom trajectory from the ground state.
///
/// Observables are sampled on the output grid `0, dt_out, 2 dt_out, ...`
/// using the exactly propagated state of the current no-jump segment, so no
/// step-size error accumulates. Deterministic in `(params, t_max, dt_out,
/// seed)`.
pub fn simulate_driven(
    params: &PhysicalParams,
    t_max: f64,
    dt_out: f64,
    seed: u64,
) -> Result<DrivenRun> {
    let mut series = Vec::new();
    let mut post_jump = Vec::new();
    let mut events = Vec::new();
    let mut rng = rng_from_seed(seed);
    run_driven_with(
        params,
        t_max,
        dt_out,
        &mut rng,
        |p| series.push(p),
        |e, p| {
            events.push(e);
            post_jump.push(p);
        },
    )?;
    Ok(DrivenRun { series, post_jump, record: JumpRecord { initial: AtomState::Ground, events } })
}

/// Streaming driver shared by the single-run API and ensemble aggregation.
pub(crate) fn run_driven_with<R, FP, FE>(
    params: &PhysicalParams,
    t_max: f64,
    dt_out: f64,
    rng: &mut R,
    mut on_point: FP,
    mut on_event: FE,
) -> Result<()>
where
    R: Rng,
    FP: FnMut(DrivenTrajectoryPoint),
    FE: FnMut(JumpEvent, DrivenTrajectoryPoint),
{
    if !t_max.is_finite() || t_max <= 0.0 {
        return Err(Error::InvalidParameter(format!("t_max must be finite and > 0, got {t_max}")));
    }
    if !dt_out.is_finite() || dt_out <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "dt_out must be finite and > 0, got {dt_out}"
        )));
    }
    let gen = driven_generator(params);
    let mut state = ConditionalState2::basis_lower();
    let mut t_cur = 0.0_f64;
    let mut next_out: u64 = 1;
    on_point(observe(0.0, &state));

    while t_cur < t_max {
        let remaining = t_max - t_cur;
        let (tau, jumped) = match sample_jump_time(&state, &gen, rng, remaining)? {
            JumpOutcome::JumpAt(tau) => (tau, true),
            JumpOutcome::NoJumpBy(r) => (r, false),
        };
        let t_seg_end = t_cur + tau;

        while (next_out as f64) * dt_out <= t_seg_end && (next_out as f64) * dt_out <= t_max {
            let t_grid = next_out as f64 * dt_out;
            let psi = closed_form_propagator(&gen, (t_grid - t_cur).max(0.0))?.apply(&state);
            on_point(observe(t_grid, &psi));
            next_out += 1;
        }

        if jumped {
            let psi = closed_form_propagator(&gen, tau)?.apply(&state);
            debug_assert!(psi.norm_sq() > 0.0 && psi.norm_sq() <= 1.0 + 1e-9);
            let kind = select_jump_type(&psi, params.gamma_down(), params.gamma_up(), rng)?;
            state = apply_atom_jump(&psi, kind)?;
            on_event(JumpEvent { time: t_seg_end, kind }, observe(t_seg_end, &state));
        }
        t_cur = t_seg_end;
    }
    Ok(())
}
