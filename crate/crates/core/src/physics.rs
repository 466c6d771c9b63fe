//! Physical parameters and the closed-form Einstein/Planck relations.
//!
//! Rates are expressed in units of the spontaneous emission rate `A` and time
//! in units of `1/A`; the Planck-law context uses natural units
//! (`hbar = c = eps0 = k_B = 1`) unless SI constants are requested explicitly.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Atom/reservoir rate parameters.
///
/// Holds the spontaneous rate `A`, the mean thermal photon number at the
/// transition frequency, the thermal jump rates, and an optional coherent
/// drive amplitude. The jump rates are derived on construction and always
/// satisfy `gamma_down = A*(nbar + 1)`, `gamma_up = A*nbar`, hence
/// `gamma_down - gamma_up = A` exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    a_coeff: f64,
    nbar: f64,
    gamma_down: f64,
    gamma_up: f64,
    drive: f64,
}

impl PhysicalParams {
    /// Thermal atom parameters with a strictly positive spontaneous rate.
    pub fn new(a_coeff: f64, nbar: f64, drive: f64) -> Result<Self> {
        if !a_coeff.is_finite() || a_coeff <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "a_coeff must be finite and > 0, got {a_coeff}"
            )));
        }
        Self::build(a_coeff, nbar, drive)
    }

    /// The undamped limit: no reservoir coupling, coherent drive only.
    ///
    /// Both jump rates vanish, so the conditional evolution is norm-preserving
    /// and no jumps ever occur.
    pub fn undamped(drive: f64) -> Result<Self> {
        Self::build(0.0, 0.0, drive)
    }

    fn build(a_coeff: f64, nbar: f64, drive: f64) -> Result<Self> {
        if !nbar.is_finite() || nbar < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "nbar must be finite and >= 0, got {nbar}"
            )));
        }
        if !drive.is_finite() || drive < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "drive must be finite and >= 0, got {drive}"
            )));
        }
        let (gamma_down, gamma_up) = if a_coeff > 0.0 {
            einstein_rates(a_coeff, nbar)?
        } else {
            (0.0, 0.0)
        };
        Ok(Self { a_coeff, nbar, gamma_down, gamma_up, drive })
    }

    pub fn a_coeff(&self) -> f64 {
        self.a_coeff
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    pub fn gamma_down(&self) -> f64 {
        self.gamma_down
    }

    pub fn gamma_up(&self) -> f64 {
        self.gamma_up
    }

    pub fn drive(&self) -> f64 {
        self.drive
    }

    /// Equilibrium occupations `(p_ground, p_excited)`.
    pub fn equilibrium(&self) -> Result<(f64, f64)> {
        equilibrium_populations(self.gamma_down, self.gamma_up)
    }
}

/// One selected reservoir mode: coupling magnitude, detuning from the atomic
/// transition, and coupling phase.
///
/// The phase is carried for completeness only; a gauge transformation absorbs
/// it, so the dynamics depend on `coupling_mag` and `detuning` alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectedMode {
    coupling_mag: f64,
    detuning: f64,
    phase: f64,
}

impl SelectedMode {
    pub fn new(coupling_mag: f64, detuning: f64, phase: f64) -> Result<Self> {
        if !coupling_mag.is_finite() || coupling_mag < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "coupling_mag must be finite and >= 0, got {coupling_mag}"
            )));
        }
        if !detuning.is_finite() {
            return Err(Error::InvalidParameter(format!("detuning must be finite, got {detuning}")));
        }
        if !phase.is_finite() {
            return Err(Error::InvalidParameter(format!("phase must be finite, got {phase}")));
        }
        Ok(Self { coupling_mag, detuning, phase })
    }

    pub fn coupling_mag(&self) -> f64 {
        self.coupling_mag
    }

    pub fn detuning(&self) -> f64 {
        self.detuning
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }
}

/// Unit system for [`PlanckContext`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitSystem {
    /// hbar = c = eps0 = k_B = 1.
    Natural,
    /// SI values of hbar, c, eps0, k_B.
    Si,
}

/// Context for the Planck-law quantities: transition frequency, temperature,
/// quantization volume, and dipole matrix element magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanckContext {
    omega0: f64,
    temperature: f64,
    volume: f64,
    dipole_mag: f64,
    units: UnitSystem,
}

impl PlanckContext {
    pub fn new(
        omega0: f64,
        temperature: f64,
        volume: f64,
        dipole_mag: f64,
        units: UnitSystem,
    ) -> Result<Self> {
        for (name, v) in [("omega0", omega0), ("temperature", temperature), ("volume", volume)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        // A vanishing dipole is allowed: it is the zero-coupling limit A = 0.
        if !dipole_mag.is_finite() || dipole_mag < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "dipole_mag must be finite and >= 0, got {dipole_mag}"
            )));
        }
        Ok(Self { omega0, temperature, volume, dipole_mag, units })
    }

    /// Natural-units context.
    pub fn natural(omega0: f64, temperature: f64, volume: f64, dipole_mag: f64) -> Result<Self> {
        Self::new(omega0, temperature, volume, dipole_mag, UnitSystem::Natural)
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn dipole_mag(&self) -> f64 {
        self.dipole_mag
    }

    pub fn hbar(&self) -> f64 {
        match self.units {
            UnitSystem::Natural => 1.0,
            UnitSystem::Si => 1.054_571_817e-34,
        }
    }

    pub fn light_speed(&self) -> f64 {
        match self.units {
            UnitSystem::Natural => 1.0,
            UnitSystem::Si => 299_792_458.0,
        }
    }

    pub fn eps0(&self) -> f64 {
        match self.units {
            UnitSystem::Natural => 1.0,
            UnitSystem::Si => 8.854_187_812_8e-12,
        }
    }

    pub fn boltzmann(&self) -> f64 {
        match self.units {
            UnitSystem::Natural => 1.0,
            UnitSystem::Si => 1.380_649e-23,
        }
    }

    /// Mean thermal photon number per mode at the transition frequency.
    pub fn nbar(&self) -> f64 {
        occupancy_from_ratio(self.hbar() * self.omega0 / (self.boltzmann() * self.temperature))
    }
}

fn occupancy_from_ratio(x: f64) -> f64 {
    // x = hbar*omega / (k_B T); exp overflow saturates cleanly to 0 occupancy.
    1.0 / (x.exp() - 1.0)
}

/// Mean thermal photon number `1/(exp(hbar*omega0/k_B T) - 1)` in natural
/// units; the `T = 0` limit is taken explicitly and returns 0.
pub fn mean_photon_number(omega0: f64, temperature: f64) -> Result<f64> {
    if !omega0.is_finite() || omega0 <= 0.0 {
        return Err(Error::InvalidParameter(format!("omega0 must be finite and > 0, got {omega0}")));
    }
    if !temperature.is_finite() || temperature < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "temperature must be finite and >= 0, got {temperature}"
        )));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(occupancy_from_ratio(omega0 / temperature))
}

/// Thermal jump rates `(gamma_down, gamma_up) = (A(nbar+1), A*nbar)`.
pub fn einstein_rates(a_coeff: f64, nbar: f64) -> Result<(f64, f64)> {
    if !a_coeff.is_finite() || a_coeff <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "a_coeff must be finite and > 0, got {a_coeff}"
        )));
    }
    if !nbar.is_finite() || nbar < 0.0 {
        return Err(Error::InvalidParameter(format!("nbar must be finite and >= 0, got {nbar}")));
    }
    Ok((a_coeff * (nbar + 1.0), a_coeff * nbar))
}

/// Stationary occupations `(p_ground, p_excited)` of the two-state rate
/// equations. The ratio identity `p_excited/p_ground = gamma_up/gamma_down`
/// holds exactly.
pub fn equilibrium_populations(gamma_down: f64, gamma_up: f64) -> Result<(f64, f64)> {
    if !gamma_down.is_finite() || gamma_down <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "gamma_down must be finite and > 0, got {gamma_down}"
        )));
    }
    if !gamma_up.is_finite() || gamma_up < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "gamma_up must be finite and >= 0, got {gamma_up}"
        )));
    }
    let total = gamma_down + gamma_up;
    Ok((gamma_down / total, gamma_up / total))
}

/// Planck quantities at the transition frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanckQuantities {
    /// Total mode density in the quantization volume, `omega0^2 V / (pi^2 c^3)`.
    pub mode_density: f64,
    /// Thermal energy density `nbar * hbar*omega0 * mode_density / V`.
    pub energy_density: f64,
    /// Ratio of stimulated to spontaneous coefficients, `pi^2 c^3 / (hbar omega0^3)`.
    pub b_over_a: f64,
}

/// Evaluates the Planck-law mode density, energy density, and `B/A` ratio.
pub fn planck_quantities(ctx: &PlanckContext) -> PlanckQuantities {
    let (omega0, c, hbar) = (ctx.omega0(), ctx.light_speed(), ctx.hbar());
    let mode_density = omega0 * omega0 * ctx.volume() / (PI * PI * c * c * c);
    let energy_density = ctx.nbar() * hbar * omega0 * mode_density / ctx.volume();
    let b_over_a = PI * PI * c * c * c / (hbar * omega0 * omega0 * omega0);
    PlanckQuantities { mode_density, energy_density, b_over_a }
}

/// Closed-form spontaneous emission rate
/// `A = omega0^3 |d|^2 / (3 pi eps0 hbar c^3)`.
pub fn spontaneous_rate_closed_form(ctx: &PlanckContext) -> f64 {
    let (omega0, c, hbar, eps0, d) =
        (ctx.omega0(), ctx.light_speed(), ctx.hbar(), ctx.eps0(), ctx.dipole_mag());
    omega0 * omega0 * omega0 * d * d / (3.0 * PI * eps0 * hbar * c * c * c)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
///
/// Newton iteration on the Legendre recurrence; plenty for the small orders
/// used by the solid-angle quadrature.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_legendre needs n >= 1");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Initial guess (Abramowitz & Stegun 25.4.30 zeros approximation).
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            if n == 1 {
                p1 = x;
            }
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(x), p0 = P_{n-1}(x)
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Solid-angle integral of the polarization sum `sum_pol |e_pol . d|^2` for a
/// fixed dipole vector, by product quadrature: Gauss-Legendre in cos(theta)
/// and a uniform periodic rule in azimuth, with the two orthogonal transverse
/// polarization vectors constructed explicitly for every direction.
///
/// The exact value is `(8 pi / 3) |d|^2` for any dipole vector.
pub fn polarization_sum_integral(dipole: [f64; 3], order: usize) -> f64 {
    assert!(order >= 2, "quadrature order must be >= 2");
    let (nodes, weights) = gauss_legendre(order);
    let n_phi = 2 * order;
    let dphi = 2.0 * PI / n_phi as f64;
    let mut total = 0.0;
    for (&u, &wu) in nodes.iter().zip(&weights) {
        // u = cos(theta)
        let sin_t = (1.0 - u * u).max(0.0).sqrt();
        for j in 0..n_phi {
            let phi = dphi * j as f64;
            let (sin_p, cos_p) = phi.sin_cos();
            // e1 = theta_hat, e2 = phi_hat; both orthogonal to the direction.
            let e1 = [u * cos_p, u * sin_p, -sin_t];
            let e2 = [-sin_p, cos_p, 0.0];
            let d1 = e1[0] * dipole[0] + e1[1] * dipole[1] + e1[2] * dipole[2];
            let d2 = e2[0] * dipole[0] + e2[1] * dipole[1] + e2[2] * dipole[2];
            total += wu * dphi * (d1 * d1 + d2 * d2);
        }
    }
    total
}

/// Spontaneous rate from the golden rule by numerical solid-angle quadrature.
///
/// Integrates the per-direction, per-polarization mode density
/// `omega0^2 V / (8 pi^3 c^3)` against `2 pi |kappa|^2` with
/// `|kappa|^2 = omega0 |e_pol . d|^2 / (2 hbar eps0 V)`; the quantization
/// volume cancels identically and is never multiplied in. Convergence is
/// checked by comparing against the next-higher order; failure reports the
/// achieved error estimate.
pub fn golden_rule_a(ctx: &PlanckContext, quadrature_order: usize) -> Result<f64> {
    if quadrature_order < 2 {
        return Err(Error::InvalidParameter(format!(
            "quadrature_order must be >= 2, got {quadrature_order}"
        )));
    }
    let (omega0, c, hbar, eps0) = (ctx.omega0(), ctx.light_speed(), ctx.hbar(), ctx.eps0());
    let dipole = [0.0, 0.0, ctx.dipole_mag()];
    let prefactor = omega0 * omega0 * omega0 / (8.0 * PI * PI * hbar * eps0 * c * c * c);
    let value = prefactor * polarization_sum_integral(dipole, quadrature_order);
    let refined = prefactor * polarization_sum_integral(dipole, quadrature_order + 1);
    let scale = refined.abs().max(value.abs()).max(f64::MIN_POSITIVE);
    let estimate = (refined - value).abs() / scale;
    const TOLERANCE: f64 = 1e-10;
    if estimate > TOLERANCE {
        return Err(Error::QuadratureNotConverged { estimate, tolerance: TOLERANCE });
    }
    Ok(value)
}
