//! The pure Einstein jump process: a two-state atom exchanging photons with
//! a thermal reservoir, with exponentially distributed waiting times in each
//! state. The canonical output is the jump record (ordered jump types and
//! times); occupancy and residence statistics are derived from it on demand.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::physics::PhysicalParams;
use crate::rng::{rng_from_seed, sample_exponential};

/// Atomic stationary state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AtomState {
    Ground,
    Excited,
}

impl AtomState {
    fn flipped(self) -> Self {
        match self {
            AtomState::Ground => AtomState::Excited,
            AtomState::Excited => AtomState::Ground,
        }
    }
}

/// Jump direction: `Up` excites the atom (photon absorbed), `Down` de-excites
/// it (photon emitted).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JumpKind {
    Up,
    Down,
}

impl JumpKind {
    pub fn as_str(self) -> &'static str {
        match self {
            JumpKind::Up => "up",
            JumpKind::Down => "down",
        }
    }
}

/// One jump: when it happened and which way the atom went.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    pub kind: JumpKind,
}

/// Ordered record of jumps together with the initial atomic state.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpRecord {
    pub initial: AtomState,
    pub events: Vec<JumpEvent>,
}

impl JumpRecord {
    /// Checks times are finite, non-negative, and strictly increasing.
    pub fn validate(&self) -> Result<()> {
        let mut prev = 0.0;
        for (i, e) in self.events.iter().enumerate() {
            if !e.time.is_finite() || e.time < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "event {i} has invalid time {}",
                    e.time
                )));
            }
            if i > 0 && e.time <= prev {
                return Err(Error::InvalidParameter(format!(
                    "event times not strictly increasing at index {i}"
                )));
            }
            prev = e.time;
        }
        Ok(())
    }

    /// True when jump kinds strictly alternate and the first kind matches the
    /// initial state (an excited atom can only go down first). This holds for
    /// every Einstein-process record.
    pub fn kinds_alternate(&self) -> bool {
        let mut state = self.initial;
        for e in &self.events {
            let expected = match state {
                AtomState::Excited => JumpKind::Down,
                AtomState::Ground => JumpKind::Up,
            };
            if e.kind != expected {
                return false;
            }
            state = state.flipped();
        }
        true
    }

    /// Atomic state immediately after the last event (or the initial state).
    pub fn final_state(&self) -> AtomState {
        match self.events.last() {
            Some(e) => match e.kind {
                JumpKind::Up => AtomState::Excited,
                JumpKind::Down => AtomState::Ground,
            },
            None => self.initial,
        }
    }

    /// Time spent in the excited state up to `t_max`, derived from the record.
    pub fn time_excited(&self, t_max: f64) -> f64 {
        let mut total = 0.0;
        let mut state = self.initial;
        let mut prev = 0.0;
        for e in &self.events {
            let t = e.time.min(t_max);
            if state == AtomState::Excited {
                total += (t - prev).max(0.0);
            }
            prev = e.time;
            state = state.flipped();
        }
        if state == AtomState::Excited && t_max > prev {
            total += t_max - prev;
        }
        total
    }

    /// Completed residence intervals, keyed by the jump kind that ended them:
    /// intervals ending in a down-jump were spent excited, intervals ending in
    /// an up-jump were spent in the ground state. The final truncated interval
    /// is not counted.
    pub fn residence_times(&self) -> ResidenceTimes {
        let mut excited = Vec::new();
        let mut ground = Vec::new();
        let mut prev = 0.0;
        for e in &self.events {
            match e.kind {
                JumpKind::Down => excited.push(e.time - prev),
                JumpKind::Up => ground.push(e.time - prev),
            }
            prev = e.time;
        }
        ResidenceTimes { excited, ground }
    }
}

/// Completed residence intervals grouped by the state they were spent in.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidenceTimes {
    pub excited: Vec<f64>,
    pub ground: Vec<f64>,
}

/// Simulates the Einstein stochastic process up to `t_max`.
///
/// Waiting times are exponential with rate `gamma_down` in the excited state
/// and `gamma_up` in the ground state. A vanishing rate halts the process in
/// that state (for example the ground state at zero temperature); this is a
/// legal record, not an error. Identical inputs produce identical records.
pub fn simulate_einstein(
    params: &PhysicalParams,
    initial: AtomState,
    t_max: f64,
    seed: u64,
) -> Result<JumpRecord> {
    if !t_max.is_finite() || t_max <= 0.0 {
        return Err(Error::InvalidParameter(format!("t_max must be finite and > 0, got {t_max}")));
    }
    let mut rng = rng_from_seed(seed);
    Ok(simulate_einstein_with(params, initial, t_max, &mut rng))
}

pub(crate) fn simulate_einstein_with<R: Rng>(
    params: &PhysicalParams,
    initial: AtomState,
    t_max: f64,
    rng: &mut R,
) -> JumpRecord {
    let mut events = Vec::new();
    let mut state = initial;
    let mut t = 0.0;
    loop {
        let rate = match state {
            AtomState::Excited => params.gamma_down(),
            AtomState::Ground => params.gamma_up(),
        };
        if rate <= 0.0 {
            break;
        }
        t += sample_exponential(rng, rate);
        if t > t_max {
            break;
        }
        let kind = match state {
            AtomState::Excited => JumpKind::Down,
            AtomState::Ground => JumpKind::Up,
        };
        events.push(JumpEvent { time: t, kind });
        state = state.flipped();
    }
    JumpRecord { initial, events }
}
