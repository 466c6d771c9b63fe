//! Monte-Carlo wavefunction core for a two-amplitude conditional state.
//!
//! Between jumps the unnormalized state evolves as `d psi/dt = M psi` with a
//! constant 2x2 complex generator; the squared norm of the state is the
//! no-jump survival probability. The propagator `exp(M t)` is evaluated in
//! closed form from the eigen-decomposition, jump times are sampled by
//! inverting the survival curve against a uniform draw, and the jump type is
//! chosen from the rate-weighted populations at the jump instant.

use num_complex::Complex64;
use rand::Rng;

use crate::einstein::JumpKind;
use crate::error::{Error, Result};
use crate::rng::sample_unit_open;

/// Unnormalized two-component conditional state.
///
/// `amp_upper` multiplies the "excited-like" basis vector, `amp_lower` the
/// "ground-like" one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalState2 {
    pub amp_upper: Complex64,
    pub amp_lower: Complex64,
}

impl ConditionalState2 {
    pub fn new(amp_upper: Complex64, amp_lower: Complex64) -> Self {
        Self { amp_upper, amp_lower }
    }

    /// Basis state with all weight on the upper component.
    pub fn basis_upper() -> Self {
        Self::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    /// Basis state with all weight on the lower component.
    pub fn basis_lower() -> Self {
        Self::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    }

    pub fn norm_sq(&self) -> f64 {
        self.amp_upper.norm_sqr() + self.amp_lower.norm_sqr()
    }

    /// Normalized copy; errors on a zero-norm state.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sq().sqrt();
        if n <= 0.0 || !n.is_finite() {
            return Err(Error::ZeroAmplitudeProjection("cannot normalize a zero-norm state"));
        }
        Ok(Self::new(self.amp_upper / n, self.amp_lower / n))
    }

    /// Population of the upper component of the normalized state.
    pub fn population_upper(&self) -> f64 {
        self.amp_upper.norm_sqr() / self.norm_sq()
    }
}

/// Constant generator of the between-jump evolution,
/// `M = [[a, c], [c', b]]` acting on `(amp_upper, amp_lower)`.
///
/// `a` and `b` carry the half decay rates and detuning phases; `c` and `c'`
/// couple the two amplitudes (drive or mode coupling).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Generator2 {
    decay_upper: Complex64,
    decay_lower: Complex64,
    coupling_upper: Complex64,
    coupling_lower: Complex64,
}

impl Generator2 {
    pub fn new(
        decay_upper: Complex64,
        decay_lower: Complex64,
        coupling_upper: Complex64,
        coupling_lower: Complex64,
    ) -> Result<Self> {
        for (name, z) in [
            ("decay_upper", decay_upper),
            ("decay_lower", decay_lower),
            ("coupling_upper", coupling_upper),
            ("coupling_lower", coupling_lower),
        ] {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {z}")));
            }
        }
        if decay_upper.re > 0.0 || decay_lower.re > 0.0 {
            return Err(Error::InvalidParameter(
                "diagonal generator entries must have non-positive real part".into(),
            ));
        }
        Ok(Self { decay_upper, decay_lower, coupling_upper, coupling_lower })
    }

    pub fn decay_upper(&self) -> Complex64 {
        self.decay_upper
    }

    pub fn decay_lower(&self) -> Complex64 {
        self.decay_lower
    }

    pub fn coupling_upper(&self) -> Complex64 {
        self.coupling_upper
    }

    pub fn coupling_lower(&self) -> Complex64 {
        self.coupling_lower
    }

    /// `M psi`.
    pub fn apply(&self, state: &ConditionalState2) -> ConditionalState2 {
        ConditionalState2::new(
            self.decay_upper * state.amp_upper + self.coupling_upper * state.amp_lower,
            self.coupling_lower * state.amp_upper + self.decay_lower * state.amp_lower,
        )
    }

    /// Largest entry magnitude; used to pick bracketing scales.
    fn scale(&self) -> f64 {
        self.decay_upper
            .norm()
            .max(self.decay_lower.norm())
            .max(self.coupling_upper.norm())
            .max(self.coupling_lower.norm())
    }
}

/// 2x2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m00: Complex64,
    pub m01: Complex64,
    pub m10: Complex64,
    pub m11: Complex64,
}

impl Mat2 {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self { m00: one, m01: zero, m10: zero, m11: one }
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        Mat2 {
            m00: self.m00 * rhs.m00 + self.m01 * rhs.m10,
            m01: self.m00 * rhs.m01 + self.m01 * rhs.m11,
            m10: self.m10 * rhs.m00 + self.m11 * rhs.m10,
            m11: self.m10 * rhs.m01 + self.m11 * rhs.m11,
        }
    }

    pub fn apply(&self, state: &ConditionalState2) -> ConditionalState2 {
        ConditionalState2::new(
            self.m00 * state.amp_upper + self.m01 * state.amp_lower,
            self.m10 * state.amp_upper + self.m11 * state.amp_lower,
        )
    }
}

/// Scalar pieces of `exp(M t) = ch * I + shs * (M - mu I)` with
/// `mu = (a+b)/2` and `s = sqrt(((a-b)/2)^2 + c c')`.
///
/// The exponential prefactor is folded into both scalars so entries never
/// overflow for decaying generators. Near the eigenvalue degeneracy `s -> 0`
/// the hyperbolic terms are evaluated by series to avoid the catastrophic
/// cancellation in `exp((mu+s)t) - exp((mu-s)t)`.
fn propagator_scalars(mu: Complex64, s: Complex64, t: f64) -> (Complex64, Complex64) {
    let z = s * t;
    if z.norm() < 1e-3 {
        let z2 = z * z;
        let cosh = 1.0 + z2 * (0.5 + z2 * (1.0 / 24.0));
        let sinhc = 1.0 + z2 * (1.0 / 6.0 + z2 * (1.0 / 120.0));
        let e_mu = (mu * t).exp();
        (e_mu * cosh, e_mu * t * sinhc)
    } else {
        let ep = ((mu + s) * t).exp();
        let em = ((mu - s) * t).exp();
        ((ep + em) * 0.5, (ep - em) * 0.5 / s)
    }
}

fn split_generator(gen: &Generator2) -> (Complex64, Complex64, Complex64) {
    let mu = (gen.decay_upper() + gen.decay_lower()) * 0.5;
    let delta = (gen.decay_upper() - gen.decay_lower()) * 0.5;
    let s = (delta * delta + gen.coupling_upper() * gen.coupling_lower()).sqrt();
    (mu, delta, s)
}

/// Closed-form propagator `exp(M t)` for the 2x2 generator.
pub fn closed_form_propagator(gen: &Generator2, t: f64) -> Result<Mat2> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter(format!("time must be finite and >= 0, got {t}")));
    }
    let (mu, delta, s) = split_generator(gen);
    let (ch, shs) = propagator_scalars(mu, s, t);
    Ok(Mat2 {
        m00: ch + shs * delta,
        m01: shs * gen.coupling_upper(),
        m10: shs * gen.coupling_lower(),
        m11: ch - shs * delta,
    })
}

/// Squared norm of the propagated state: the probability that no jump has
/// occurred by time `t`, given a normalized state at `t = 0`.
pub fn survival_probability(state: &ConditionalState2, gen: &Generator2, t: f64) -> Result<f64> {
    Ok(closed_form_propagator(gen, t)?.apply(state).norm_sq())
}

/// Outcome of waiting-time sampling over a finite horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpOutcome {
    /// A jump occurs at this time (measured from the start of the interval).
    JumpAt(f64),
    /// The survival probability stayed above the draw for the whole horizon.
    NoJumpBy(f64),
}

/// Precomputed quantities for repeated propagation of one state under one
/// generator: `psi(t) = ch(t) psi0 + shs(t) w` with `w = (M - mu I) psi0`.
struct SegmentEvolution<'a> {
    gen: &'a Generator2,
    state0: ConditionalState2,
    w: ConditionalState2,
    mu: Complex64,
    s: Complex64,
}

impl<'a> SegmentEvolution<'a> {
    fn new(gen: &'a Generator2, state0: ConditionalState2) -> Self {
        let (mu, delta, s) = split_generator(gen);
        let w = ConditionalState2::new(
            delta * state0.amp_upper + gen.coupling_upper() * state0.amp_lower,
            gen.coupling_lower() * state0.amp_upper - delta * state0.amp_lower,
        );
        Self { gen, state0, w, mu, s }
    }

    fn state_at(&self, t: f64) -> ConditionalState2 {
        let (ch, shs) = propagator_scalars(self.mu, self.s, t);
        ConditionalState2::new(
            ch * self.state0.amp_upper + shs * self.w.amp_upper,
            ch * self.state0.amp_lower + shs * self.w.amp_lower,
        )
    }

    fn survival(&self, t: f64) -> f64 {
        self.state_at(t).norm_sq()
    }

    /// d/dt of the squared norm: `2 Re <psi | M psi>`.
    fn survival_derivative(&self, t: f64) -> f64 {
        let psi = self.state_at(t);
        let mpsi = self.gen.apply(&psi);
        2.0 * (psi.amp_upper.conj() * mpsi.amp_upper + psi.amp_lower.conj() * mpsi.amp_lower).re
    }
}

/// Draws the next jump time on `[0, t_max]` by inverting the survival curve.
///
/// A uniform draw `u` on (0, 1) either exceeds the survival at the horizon
/// (no jump) or fixes the jump instant as the unique root of
/// `||exp(M t) psi0||^2 = u`, located by bracketed bisection and polished
/// with Newton steps to an absolute survival residual below 1e-12.
pub fn sample_jump_time<R: Rng>(
    state: &ConditionalState2,
    gen: &Generator2,
    rng: &mut R,
    t_max: f64,
) -> Result<JumpOutcome> {
    if !t_max.is_finite() || t_max <= 0.0 {
        return Err(Error::InvalidParameter(format!("t_max must be finite and > 0, got {t_max}")));
    }
    let u = sample_unit_open(rng);
    let seg = SegmentEvolution::new(gen, *state);
    if seg.survival(t_max) > u {
        return Ok(JumpOutcome::NoJumpBy(t_max));
    }

    // Bracket the crossing, starting from the generator's own time scale.
    let scale = gen.scale();
    let mut lo = 0.0;
    let mut hi = if scale > 0.0 { (1.0 / scale).min(t_max) } else { t_max };
    while seg.survival(hi) > u {
        lo = hi;
        if hi >= t_max {
            break;
        }
        hi = (2.0 * hi).min(t_max);
    }

    // Bisection brings the bracket down far enough for Newton to finish.
    for _ in 0..80 {
        if hi - lo <= 1e-12 * hi.max(1e-300) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if seg.survival(mid) > u {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let mut t = 0.5 * (lo + hi);
    let mut residual = seg.survival(t) - u;
    for _ in 0..12 {
        if residual.abs() < 1e-12 {
            break;
        }
        let slope = seg.survival_derivative(t);
        let step = if slope != 0.0 { residual / slope } else { 0.0 };
        let candidate = t - step;
        t = if step != 0.0 && candidate > lo && candidate < hi {
            candidate
        } else {
            0.5 * (lo + hi)
        };
        residual = seg.survival(t) - u;
        if residual > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
    }
    if residual.abs() >= 1e-12 {
        return Err(Error::RootFindFailure { t_lo: lo, t_hi: hi, residual });
    }
    Ok(JumpOutcome::JumpAt(t))
}

/// Chooses the jump channel from the rate-weighted populations at the jump
/// instant. Only the ratio of the weights matters, so unnormalized
/// post-propagation amplitudes are acceptable.
pub fn select_jump_type<R: Rng>(
    state: &ConditionalState2,
    gamma_down: f64,
    gamma_up: f64,
    rng: &mut R,
) -> Result<JumpKind> {
    let w_down = gamma_down * state.amp_upper.norm_sqr();
    let w_up = gamma_up * state.amp_lower.norm_sqr();
    let total = w_down + w_up;
    if total <= 0.0 || !total.is_finite() {
        return Err(Error::NoJumpChannel);
    }
    let r: f64 = rng.gen();
    if r * total < w_down {
        Ok(JumpKind::Down)
    } else {
        Ok(JumpKind::Up)
    }
}
