//! A two-state atom entangled with one selected reservoir mode.
//!
//! Between jumps the joint conditional state lives in a single two-dimensional
//! manifold spanned by `|e>|n>` and `|g>|n+1>`: the coherent evolution
//! conserves the shared quanta `n + 1`, so the dynamics are exact and O(1)
//! per step with no Fock-space truncation. Jumps collapse the state to a
//! product state, moving it one manifold down (emission) or up (absorption).
//! Two consecutive jumps of the same kind change the mode's integer photon
//! count by one; alternating jumps leave it unchanged.

use num_complex::Complex64;
use rand::Rng;

use crate::einstein::JumpKind;
use crate::engine::{
    closed_form_propagator, sample_jump_time, select_jump_type, ConditionalState2, Generator2,
    JumpOutcome,
};
use crate::error::{Error, Result};
use crate::physics::{PhysicalParams, SelectedMode};
use crate::rng::{rng_from_seed, sample_unit_open};

/// What prepared the current manifold state: the last jump, or the initial
/// condition standing in for one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpOrigin {
    Up,
    Down,
    /// Initialized with the atom excited; classified like a preceding up-jump.
    InitialE,
    /// Initialized with the atom in the ground state; classified like a
    /// preceding down-jump.
    InitialG,
}

impl JumpOrigin {
    fn as_kind(self) -> JumpKind {
        match self {
            JumpOrigin::Up | JumpOrigin::InitialE => JumpKind::Up,
            JumpOrigin::Down | JumpOrigin::InitialG => JumpKind::Down,
        }
    }
}

/// Entangled atom+mode conditional state within one manifold.
///
/// `n_index` labels the manifold (shared quanta = `n_index + 1`); `amp_e`
/// multiplies `|e>|n_index>` and `amp_g` multiplies `|g>|n_index + 1>`. The
/// floor manifold `n_index = -1` contains only `|g>|0>`, so `amp_e` is
/// identically zero there and the coupling `sqrt(n_index + 1)` vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldState {
    n_index: i64,
    amp_e: Complex64,
    amp_g: Complex64,
    last_jump: JumpOrigin,
}

impl ManifoldState {
    pub fn new(
        n_index: i64,
        amp_e: Complex64,
        amp_g: Complex64,
        last_jump: JumpOrigin,
    ) -> Result<Self> {
        if n_index < -1 {
            return Err(Error::InvalidParameter(format!("n_index must be >= -1, got {n_index}")));
        }
        if n_index == -1 && amp_e.norm_sqr() != 0.0 {
            return Err(Error::InvalidParameter(
                "the floor manifold has no excited component".into(),
            ));
        }
        let norm_sq = amp_e.norm_sqr() + amp_g.norm_sqr();
        if !norm_sq.is_finite() || norm_sq <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "state norm must be finite and positive, got {norm_sq}"
            )));
        }
        Ok(Self { n_index, amp_e, amp_g, last_jump })
    }

    /// Product state `|e>|n_field>` (atom excited, `n_field` photons).
    pub fn initial_excited(n_field: u64) -> Self {
        Self {
            n_index: n_field as i64,
            amp_e: Complex64::new(1.0, 0.0),
            amp_g: Complex64::new(0.0, 0.0),
            last_jump: JumpOrigin::InitialE,
        }
    }

    /// Product state `|g>|n_field>`; `n_field = 0` is the floor manifold.
    pub fn initial_ground(n_field: u64) -> Self {
        Self {
            n_index: n_field as i64 - 1,
            amp_e: Complex64::new(0.0, 0.0),
            amp_g: Complex64::new(1.0, 0.0),
            last_jump: JumpOrigin::InitialG,
        }
    }

    pub fn n_index(&self) -> i64 {
        self.n_index
    }

    pub fn amp_e(&self) -> Complex64 {
        self.amp_e
    }

    pub fn amp_g(&self) -> Complex64 {
        self.amp_g
    }

    pub fn last_jump(&self) -> JumpOrigin {
        self.last_jump
    }

    pub fn norm_sq(&self) -> f64 {
        self.amp_e.norm_sqr() + self.amp_g.norm_sqr()
    }

    /// Integer photon count of a product state (`None` while entangled).
    pub fn integer_field_count(&self) -> Option<i64> {
        let has_e = self.amp_e.norm_sqr() > 0.0;
        let has_g = self.amp_g.norm_sqr() > 0.0;
        match (has_e, has_g) {
            (true, false) => Some(self.n_index),
            (false, true) => Some(self.n_index + 1),
            _ => None,
        }
    }

    fn as_conditional(&self) -> ConditionalState2 {
        ConditionalState2::new(self.amp_e, self.amp_g)
    }

    fn with_amplitudes(&self, amp_e: Complex64, amp_g: Complex64) -> Self {
        Self { amp_e, amp_g, ..*self }
    }
}

/// Series sample: conditional photon-number expectation of the mode and the
/// excited population of the atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeTrajectoryPoint {
    pub t: f64,
    pub n_expect: f64,
    pub pe: f64,
}

/// A jump event with the integer mode photon count before and after, and the
/// anomalous flag (same kind as the preceding jump). Anomalous events change
/// the count by exactly one; alternating events leave it unchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifiedJumpEvent {
    pub time: f64,
    pub kind: JumpKind,
    pub n_before: i64,
    pub n_after: i64,
    pub anomalous: bool,
}

/// One single-mode trajectory: output series, classified events, and the
/// sampled (or injected) initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleModeRun {
    pub series: Vec<ModeTrajectoryPoint>,
    pub events: Vec<ClassifiedJumpEvent>,
    pub initial: ManifoldState,
    pub t_max: f64,
}

impl SingleModeRun {
    /// Time spent at each integer photon count, derived from the record: the
    /// count is constant between jumps and changes only at anomalous events.
    pub fn field_occupancy(&self) -> Vec<(i64, f64)> {
        let mut occ: std::collections::BTreeMap<i64, f64> = std::collections::BTreeMap::new();
        let mut prev_t = 0.0;
        let mut prev_n = self
            .initial
            .integer_field_count()
            .expect("initial states are product states");
        for e in &self.events {
            *occ.entry(prev_n).or_insert(0.0) += e.time - prev_t;
            prev_t = e.time;
            prev_n = e.n_after;
        }
        *occ.entry(prev_n).or_insert(0.0) += self.t_max - prev_t;
        occ.into_iter().collect()
    }
}

/// Generator of the manifold evolution:
/// `a = -(gamma_down - i detuning)/2`, `b = -(gamma_up + i detuning)/2`,
/// coupling `-i |kappa| sqrt(n_index + 1)` on both off-diagonals. The floor
/// manifold (`n_index = -1`) decouples exactly.
pub fn manifold_generator(
    params: &PhysicalParams,
    mode: &SelectedMode,
    n_index: i64,
) -> Generator2 {
    debug_assert!(n_index >= -1);
    let coupling = mode.coupling_mag() * ((n_index + 1) as f64).max(0.0).sqrt();
    Generator2::new(
        Complex64::new(-0.5 * params.gamma_down(), 0.5 * mode.detuning()),
        Complex64::new(-0.5 * params.gamma_up(), -0.5 * mode.detuning()),
        Complex64::new(0.0, -coupling),
        Complex64::new(0.0, -coupling),
    )
    .expect("manifold generator entries are finite with non-positive diagonals")
}

/// Draws a thermal-equilibrium initial state: the atom from its stationary
/// occupations and the mode photon count from the Bose-Einstein distribution
/// with mean `nbar`.
pub fn sample_initial_state<R: Rng>(params: &PhysicalParams, rng: &mut R) -> ManifoldState {
    let (_, p_excited) = params
        .equilibrium()
        .unwrap_or((1.0, 0.0));
    let excited = rng.gen::<f64>() < p_excited;
    let n_field = sample_bose_einstein(params.nbar(), rng);
    if excited {
        ManifoldState::initial_excited(n_field)
    } else {
        ManifoldState::initial_ground(n_field)
    }
}

/// Geometric (Bose-Einstein) photon-number draw with mean `nbar`.
fn sample_bose_einstein<R: Rng>(nbar: f64, rng: &mut R) -> u64 {
    if nbar <= 0.0 {
        return 0;
    }
    let ratio = nbar / (nbar + 1.0);
    let u = sample_unit_open(rng);
    let n = (u.ln() / ratio.ln()).floor();
    if n.is_finite() && n >= 0.0 {
        n as u64
    } else {
        0
    }
}

/// Projective jump on the entangled state.
///
/// `Down` projects onto `|e>|n>` and flips the atom: the new state is
/// `|g>|n>` in manifold `n - 1` and the mode count equals the old `n_index`.
/// `Up` projects onto `|g>|n+1>` and flips: the new state is `|e>|n+1>` in
/// manifold `n + 1`. The projected amplitude's phase is kept.
pub fn apply_mode_jump(state: &ManifoldState, kind: JumpKind) -> Result<ManifoldState> {
    match kind {
        JumpKind::Down => {
            let amp = state.amp_e;
            let norm = amp.norm();
            if norm == 0.0 {
                return Err(Error::ZeroAmplitudeProjection(
                    "down-jump requires a nonzero excited amplitude",
                ));
            }
            Ok(ManifoldState {
                n_index: state.n_index - 1,
                amp_e: Complex64::new(0.0, 0.0),
                amp_g: amp / norm,
                last_jump: JumpOrigin::Down,
            })
        }
        JumpKind::Up => {
            let amp = state.amp_g;
            let norm = amp.norm();
            if norm == 0.0 {
                return Err(Error::ZeroAmplitudeProjection(
                    "up-jump requires a nonzero ground amplitude",
                ));
            }
            Ok(ManifoldState {
                n_index: state.n_index + 1,
                amp_e: amp / norm,
                amp_g: Complex64::new(0.0, 0.0),
                last_jump: JumpOrigin::Up,
            })
        }
    }
}

/// Conditional photon-number expectation
/// `(n |amp_e|^2 + (n+1) |amp_g|^2) / (|amp_e|^2 + |amp_g|^2)`;
/// zero on the floor manifold.
pub fn photon_expectation(state: &ManifoldState) -> Result<f64> {
    let norm_sq = state.norm_sq();
    if norm_sq <= 0.0 || !norm_sq.is_finite() {
        return Err(Error::ZeroAmplitudeProjection("photon expectation of a zero-norm state"));
    }
    let n = state.n_index as f64;
    Ok((n * state.amp_e.norm_sqr() + (n + 1.0) * state.amp_g.norm_sqr()) / norm_sq)
}

fn observe(t: f64, state: &ManifoldState) -> ModeTrajectoryPoint {
    let norm_sq = state.norm_sq();
    let n = state.n_index as f64;
    ModeTrajectoryPoint {
        t,
        n_expect: (n * state.amp_e.norm_sqr() + (n + 1.0) * state.amp_g.norm_sqr()) / norm_sq,
        pe: state.amp_e.norm_sqr() / norm_sq,
    }
}

/// Simulates one atom+mode trajectory.
///
/// With `initial = None` the starting state is drawn from thermal
/// equilibrium. The loop rebuilds the manifold generator after every jump
/// (the coupling depends on the shared quanta), samples the next jump from
/// the survival curve, classifies it against the preceding jump kind, and
/// samples observables on the output grid. Deterministic in the seed.
pub fn simulate_single_mode(
    params: &PhysicalParams,
    mode: &SelectedMode,
    t_max: f64,
    dt_out: f64,
    seed: u64,
    initial: Option<ManifoldState>,
) -> Result<SingleModeRun> {
    let mut rng = rng_from_seed(seed);
    let mut series = Vec::new();
    let mut events = Vec::new();
    let initial_state = run_single_mode_with(
        params,
        mode,
        t_max,
        dt_out,
        &mut rng,
        initial,
        |p| series.push(p),
        |e| events.push(e),
    )?;
    Ok(SingleModeRun { series, events, initial: initial_state, t_max })
}

/// Streaming driver shared by the single-run API and ensemble aggregation.
/// Returns the initial state actually used.
#[allow(clippy::too_many_arguments)]
pub(crate) fn run_single_mode_with<R, FP, FE>(
    params: &PhysicalParams,
    mode: &SelectedMode,
    t_max: f64,
    dt_out: f64,
    rng: &mut R,
    initial: Option<ManifoldState>,
    mut on_point: FP,
    mut on_event: FE,
) -> Result<ManifoldState>
where
    R: Rng,
    FP: FnMut(ModeTrajectoryPoint),
    FE: FnMut(ClassifiedJumpEvent),
{
    if !t_max.is_finite() || t_max <= 0.0 {
        return Err(Error::InvalidParameter(format!("t_max must be finite and > 0, got {t_max}")));
    }
    if !dt_out.is_finite() || dt_out <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "dt_out must be finite and > 0, got {dt_out}"
        )));
    }
    let initial_state = match initial {
        Some(s) => s,
        None => sample_initial_state(params, rng),
    };
    if initial_state.integer_field_count().is_none() {
        return Err(Error::InvalidParameter(
            "initial state must be a product state".into(),
        ));
    }

    let mut state = initial_state;
    let mut t_cur = 0.0_f64;
    let mut next_out: u64 = 1;
    on_point(observe(0.0, &state));

    while t_cur < t_max {
        let gen = manifold_generator(params, mode, state.n_index());
        let cond = state.as_conditional();
        let remaining = t_max - t_cur;
        let (tau, jumped) = match sample_jump_time(&cond, &gen, rng, remaining)? {
            JumpOutcome::JumpAt(tau) => (tau, true),
            JumpOutcome::NoJumpBy(r) => (r, false),
        };
        let t_seg_end = t_cur + tau;

        while (next_out as f64) * dt_out <= t_seg_end && (next_out as f64) * dt_out <= t_max {
            let t_grid = next_out as f64 * dt_out;
            let psi = closed_form_propagator(&gen, (t_grid - t_cur).max(0.0))?.apply(&cond);
            on_point(observe(t_grid, &state.with_amplitudes(psi.amp_upper, psi.amp_lower)));
            next_out += 1;
        }

        if jumped {
            let psi = closed_form_propagator(&gen, tau)?.apply(&cond);
            debug_assert!(psi.norm_sq() > 0.0 && psi.norm_sq() <= 1.0 + 1e-9);
            let kind = select_jump_type(&psi, params.gamma_down(), params.gamma_up(), rng)?;
            let n_before = state
                .integer_field_count()
                .expect("post-jump and initial states are product states");
            let anomalous = kind == state.last_jump().as_kind();
            let evolved = state.with_amplitudes(psi.amp_upper, psi.amp_lower);
            state = apply_mode_jump(&evolved, kind)?;
            let n_after = state
                .integer_field_count()
                .expect("jumps always produce product states");
            on_event(ClassifiedJumpEvent { time: t_seg_end, kind, n_before, n_after, anomalous });
        }
        t_cur = t_seg_end;
    }
    Ok(initial_state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn params_nbar1() -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn generator_coupling_scales_with_shared_quanta() {
        let params = params_nbar1();
        let mode = SelectedMode::new(0.01, 0.0, 0.0).unwrap();
        let g = manifold_generator(&params, &mode, -1);
        assert_eq!(g.coupling_upper(), c(0.0, 0.0));
        let g = manifold_generator(&params, &mode, 0);
        assert!((g.coupling_upper() - c(0.0, -0.01)).norm() < 1e-18);

        let strong = SelectedMode::new(10.0, 0.0, 0.0).unwrap();
        let g = manifold_generator(&params, &strong, 3);
        assert!((g.coupling_upper() - c(0.0, -20.0)).norm() < 1e-12);
        // detuning enters the diagonals with opposite signs
        let detuned = SelectedMode::new(1.0, 2.0, 0.0).unwrap();
        let g = manifold_generator(&params, &detuned, 0);
        assert_eq!(g.decay_upper(), c(-1.0, 1.0));
        assert_eq!(g.decay_lower(), c(-0.5, -1.0));
    }

    #[test]
    fn mode_jump_bookkeeping() {
        // alternating down keeps the integer count
        let s = ManifoldState::initial_excited(1);
        assert_eq!(s.integer_field_count(), Some(1));
        let after = apply_mode_jump(&s, JumpKind::Down).unwrap();
        assert_eq!(after.n_index(), 0);
        assert_eq!(after.integer_field_count(), Some(1));
        assert_eq!(after.last_jump(), JumpOrigin::Down);

        // anomalous up-up raises the count by one
        let s = ManifoldState::new(1, c(0.0, 0.0), c(1.0, 0.0), JumpOrigin::Up).unwrap();
        let after = apply_mode_jump(&s, JumpKind::Up).unwrap();
        assert_eq!(after.n_index(), 2);
        assert_eq!(after.integer_field_count(), Some(2));

        // anomalous down-down lowers it by one, possibly to the floor
        let s = ManifoldState::new(0, c(1.0, 0.0), c(0.0, 0.0), JumpOrigin::Down).unwrap();
        let after = apply_mode_jump(&s, JumpKind::Down).unwrap();
        assert_eq!(after.n_index(), -1);
        assert_eq!(after.integer_field_count(), Some(0));

        // the floor manifold cannot emit
        let floor = ManifoldState::initial_ground(0);
        assert!(matches!(
            apply_mode_jump(&floor, JumpKind::Down),
            Err(Error::ZeroAmplitudeProjection(_))
        ));
    }

    #[test]
    fn jump_phase_is_preserved() {
        let s = ManifoldState::new(2, c(0.6, 0.8), c(0.0, 0.0), JumpOrigin::Up).unwrap();
        let after = apply_mode_jump(&s, JumpKind::Down).unwrap();
        assert!((after.amp_g() - c(0.6, 0.8)).norm() < 1e-15);
    }

    #[test]
    fn photon_expectation_examples() {
        let s = ManifoldState::new(2, c(1.0, 0.0), c(0.0, 0.0), JumpOrigin::InitialE).unwrap();
        assert_eq!(photon_expectation(&s).unwrap(), 2.0);

        let x = std::f64::consts::FRAC_1_SQRT_2;
        let s = ManifoldState::new(2, c(x, 0.0), c(0.0, x), JumpOrigin::InitialE).unwrap();
        assert!((photon_expectation(&s).unwrap() - 2.5).abs() < 1e-15);

        let floor = ManifoldState::initial_ground(0);
        assert_eq!(photon_expectation(&floor).unwrap(), 0.0);
    }

    #[test]
    fn floor_manifold_state_invariants() {
        assert!(ManifoldState::new(-1, c(0.1, 0.0), c(1.0, 0.0), JumpOrigin::InitialG).is_err());
        assert!(ManifoldState::new(-2, c(0.0, 0.0), c(1.0, 0.0), JumpOrigin::InitialG).is_err());
        assert!(ManifoldState::new(0, c(0.0, 0.0), c(0.0, 0.0), JumpOrigin::InitialG).is_err());
        assert_eq!(ManifoldState::initial_ground(0).n_index(), -1);
    }

    #[test]
    fn vacuum_initial_state_is_floor() {
        let params = PhysicalParams::new(1.0, 0.0, 0.0).unwrap();
        let mut rng = rng_from_seed(5);
        for _ in 0..50 {
            let s = sample_initial_state(&params, &mut rng);
            assert_eq!(s.n_index(), -1);
            assert_eq!(s.integer_field_count(), Some(0));
            assert_eq!(s.last_jump(), JumpOrigin::InitialG);
        }
    }

    #[test]
    fn decoupled_mode_alternates_and_keeps_count() {
        let params = params_nbar1();
        let mode = SelectedMode::new(0.0, 0.0, 0.0).unwrap();
        let initial = ManifoldState::initial_excited(2);
        let run =
            simulate_single_mode(&params, &mode, 400.0, 0.5, 11, Some(initial)).unwrap();
        assert!(!run.events.is_empty());
        for e in &run.events {
            assert!(!e.anomalous);
            assert_eq!(e.n_before, 2);
            assert_eq!(e.n_after, 2);
        }
        for p in &run.series {
            assert!((p.n_expect - 2.0).abs() < 1e-12);
        }
        // kinds strictly alternate, first is Down (initially excited)
        let mut expect = JumpKind::Down;
        for e in &run.events {
            assert_eq!(e.kind, expect);
            expect = match expect {
                JumpKind::Down => JumpKind::Up,
                JumpKind::Up => JumpKind::Down,
            };
        }
    }

    #[test]
    fn event_classification_matches_count_change() {
        let params = params_nbar1();
        let mode = SelectedMode::new(1.0, 0.0, 0.0).unwrap();
        let run = simulate_single_mode(&params, &mode, 500.0, 1.0, 23, None).unwrap();
        assert!(!run.events.is_empty());
        let mut prev_kind =
            run.initial.last_jump().as_kind();
        for e in &run.events {
            assert_eq!(e.anomalous, e.kind == prev_kind);
            let dn = e.n_after - e.n_before;
            if e.anomalous {
                match e.kind {
                    JumpKind::Up => assert_eq!(dn, 1),
                    JumpKind::Down => assert_eq!(dn, -1),
                }
            } else {
                assert_eq!(dn, 0);
            }
            assert!(e.n_after >= 0);
            prev_kind = e.kind;
        }
    }

    #[test]
    fn occupancy_sums_to_total_time() {
        let params = params_nbar1();
        let mode = SelectedMode::new(0.5, 0.0, 0.0).unwrap();
        let run = simulate_single_mode(&params, &mode, 300.0, 1.0, 9, None).unwrap();
        let occ = run.field_occupancy();
        let total: f64 = occ.iter().map(|(_, t)| t).sum();
        assert!((total - 300.0).abs() < 1e-9);
        assert!(occ.iter().all(|&(n, t)| n >= 0 && t >= 0.0));
    }

    #[test]
    fn rabi_oscillation_with_zero_damping() {
        // gamma = 0: |amp_e(t)|^2 = cos^2(kappa sqrt(n+1) t) from amp_e = 1
        let params = PhysicalParams::undamped(0.0).unwrap();
        let mode = SelectedMode::new(0.7, 0.0, 0.0).unwrap();
        for n_index in [0_i64, 3] {
            let gen = manifold_generator(&params, &mode, n_index);
            let omega = 0.7 * ((n_index + 1) as f64).sqrt();
            let state = ConditionalState2::basis_upper();
            for k in 0..100 {
                let t = 0.05 * k as f64;
                let psi = closed_form_propagator(&gen, t).unwrap().apply(&state);
                let expected = (omega * t).cos().powi(2);
                assert!(
                    (psi.amp_upper.norm_sqr() - expected).abs() < 1e-9,
                    "n={n_index} t={t}"
                );
            }
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let params = params_nbar1();
        let mode = SelectedMode::new(0.1, 0.0, 0.0).unwrap();
        let a = simulate_single_mode(&params, &mode, 200.0, 0.5, 31, None).unwrap();
        let b = simulate_single_mode(&params, &mode, 200.0, 0.5, 31, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn weak_coupling_expectation_is_piecewise_near_constant() {
        // kappa far below the decay rates: N(t) hugs an integer between the
        // rare one-photon steps
        let params = params_nbar1();
        let mode = SelectedMode::new(0.01, 0.0, 0.0).unwrap();
        let run = simulate_single_mode(&params, &mode, 5000.0, 1.0, 12, None).unwrap();
        let near_integer = run
            .series
            .iter()
            .filter(|p| (p.n_expect - p.n_expect.round()).abs() < 1e-2)
            .count();
        assert!(
            near_integer as f64 > 0.99 * run.series.len() as f64,
            "{near_integer} of {}",
            run.series.len()
        );
        let anomalous = run.events.iter().filter(|e| e.anomalous).count();
        assert!(
            (anomalous as f64) < 0.01 * run.events.len() as f64,
            "{anomalous} anomalous of {}",
            run.events.len()
        );
    }
}
