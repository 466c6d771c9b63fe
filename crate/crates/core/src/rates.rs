//! Closed-form rate results for the atom+mode model.
//!
//! The time-integrated populations and coherences of the conditional state
//! satisfy a 4x4 linear system obtained by Laplace-transforming the
//! between-jump equations of motion at s = 0; its solution gives the exact
//! probability that a jump record breaks its alternating pattern. The
//! lowest-order coupling expansion of that probability is a Lorentzian in the
//! detuning, and multiplying by the equilibrium preparation flux gives
//! unconditional photon-number jump rates for the mode. Detailed balance over
//! those rates produces the Bose-Einstein distribution, and integrating them
//! over all detunings with the golden-rule weight recovers the Einstein rates
//! of the atom. These closed forms are the oracles the stochastic output is
//! judged against.

use serde::Serialize;

use crate::einstein::AtomState;
use crate::error::{Error, Result};
use crate::physics::{gauss_legendre, PhysicalParams, SelectedMode};

/// Time-integrated populations (`w_e`, `w_g`) and coherence components
/// (`u_int` real, `v_int` imaginary) of the conditional state, integrated
/// from a jump to infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateSolution {
    pub w_e: f64,
    pub w_g: f64,
    pub u_int: f64,
    pub v_int: f64,
    /// Max-norm residual of the linear system, relative to its scale.
    pub residual: f64,
}

/// Unconditional photon-number jump rates of the selected mode at integer
/// photon count `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhotonJumpRates {
    pub gamma_up: f64,
    pub gamma_down: f64,
}

/// Normalized Lorentzian of half-width `(gamma_down + gamma_up)/2` evaluated
/// at the detuning.
fn lorentzian(params: &PhysicalParams, detuning: f64) -> f64 {
    let hw = 0.5 * (params.gamma_down() + params.gamma_up());
    (hw / std::f64::consts::PI) / (hw * hw + detuning * detuning)
}

/// Gaussian elimination with partial pivoting for a 4x4 real system.
fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Result<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < 1e-300 {
            return Err(Error::SingularSystem(format!("zero pivot in column {col}")));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let pivot_row = a[col];
        for row in (col + 1)..4 {
            let f = a[row][col] / pivot_row[col];
            if f == 0.0 {
                continue;
            }
            for (x, p) in a[row].iter_mut().zip(&pivot_row).skip(col) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let mut s = b[row];
        for k in (row + 1)..4 {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Ok(x)
}

fn wuv_system(
    params: &PhysicalParams,
    mode: &SelectedMode,
    n_index: u64,
    initial: AtomState,
) -> ([[f64; 4]; 4], [f64; 4]) {
    let k = mode.coupling_mag() * ((n_index + 1) as f64).sqrt();
    let hw = 0.5 * (params.gamma_down() + params.gamma_up());
    let dw = mode.detuning();
    // unknowns ordered (w_e, w_g, u_int, v_int)
    let a = [
        [params.gamma_down(), 0.0, 0.0, 2.0 * k],
        [0.0, params.gamma_up(), 0.0, -2.0 * k],
        [k, -k, dw, -hw],
        [0.0, 0.0, hw, dw],
    ];
    let b = match initial {
        AtomState::Excited => [1.0, 0.0, 0.0, 0.0],
        AtomState::Ground => [0.0, 1.0, 0.0, 0.0],
    };
    (a, b)
}

/// Exact integrated populations and coherences for a state prepared with the
/// atom in `initial` and `n_index` shared quanta minus one, from the direct
/// solution of the integrated equations of motion. The residual of the
/// solve must come out below 1e-12 relative; anything larger is reported as
/// a singular system.
pub fn solve_wuv(
    params: &PhysicalParams,
    mode: &SelectedMode,
    n_index: u64,
    initial: AtomState,
) -> Result<RateSolution> {
    if params.gamma_down() <= 0.0 {
        return Err(Error::InvalidParameter("gamma_down must be > 0".into()));
    }
    let (a, b) = wuv_system(params, mode, n_index, initial);
    let x = solve4(a, b)?;
    // residual relative to the system scale
    let mut resid: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..4 {
        let mut r = -b[i];
        let mut row = 0.0_f64;
        for j in 0..4 {
            r += a[i][j] * x[j];
            row = row.max(a[i][j].abs() * x[j].abs());
        }
        resid = resid.max(r.abs());
        scale = scale.max(row.max(b[i].abs()));
    }
    let residual = resid / scale.max(f64::MIN_POSITIVE);
    if residual > 1e-12 {
        return Err(Error::SingularSystem(format!(
            "solution residual {residual:.3e} exceeds 1e-12"
        )));
    }
    Ok(RateSolution { w_e: x[0], w_g: x[1], u_int: x[2], v_int: x[3], residual })
}

/// Probability of the anomalous (pattern-breaking) jump after a preparation
/// `initial`, exact to all orders: `gamma_up * w_g` for an excited
/// preparation, `gamma_down * w_e` for a ground one.
pub fn anomalous_jump_probability(
    params: &PhysicalParams,
    mode: &SelectedMode,
    n_index: u64,
    initial: AtomState,
) -> Result<f64> {
    let sol = solve_wuv(params, mode, n_index, initial)?;
    Ok(match initial {
        AtomState::Excited => params.gamma_up() * sol.w_g,
        AtomState::Ground => params.gamma_down() * sol.w_e,
    })
}

/// Lowest-order (in the coupling) closed form of the anomalous jump
/// probability: a normalized Lorentzian in the detuning times
/// `2 pi |kappa|^2 (n_index + 1)` divided by the decay rate of the prepared
/// amplitude.
pub fn lowest_order_probability(
    params: &PhysicalParams,
    mode: &SelectedMode,
    n_index: u64,
    initial: AtomState,
) -> f64 {
    let k2 = mode.coupling_mag() * mode.coupling_mag();
    let shared = (n_index + 1) as f64;
    let gamma = match initial {
        AtomState::Excited => params.gamma_down(),
        AtomState::Ground => params.gamma_up(),
    };
    lorentzian(params, mode.detuning()) * 2.0 * std::f64::consts::PI * k2 * shared / gamma
}

/// Unconditional photon-number jump rates at integer mode photon count `N`:
/// the per-preparation probabilities multiplied by the equilibrium
/// preparation flux, with the count substitutions `n -> N` (absorption into
/// the mode) and `n + 1 -> N` (emission out of it).
pub fn photon_jump_rates(
    params: &PhysicalParams,
    mode: &SelectedMode,
    n_photons: u64,
) -> Result<PhotonJumpRates> {
    let (p_g, p_e) = params.equilibrium()?;
    let k2 = mode.coupling_mag() * mode.coupling_mag();
    let pref = lorentzian(params, mode.detuning()) * 2.0 * std::f64::consts::PI * k2;
    Ok(PhotonJumpRates {
        gamma_up: pref * (n_photons + 1) as f64 * p_e,
        gamma_down: pref * n_photons as f64 * p_g,
    })
}

/// Bose-Einstein probability of finding `n` photons in a mode with mean
/// occupation `nbar`: `p_n = (nbar/(nbar+1))^n / (nbar+1)`.
pub fn bose_einstein_pmf(nbar: f64, n: u64) -> f64 {
    assert!(nbar >= 0.0 && nbar.is_finite(), "nbar must be finite and >= 0");
    if nbar == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let ratio = nbar / (nbar + 1.0);
    ratio.powi(n as i32) / (nbar + 1.0)
}

/// Stationary photon-number distribution of the mode obtained by detailed
/// balance over the photon-number jump rates, normalized on `0..=n_max`.
///
/// The coupling strength and detuning cancel in the detailed-balance ratio,
/// so the result depends only on `nbar` and equals the Bose-Einstein
/// distribution.
pub fn stationary_from_rates(
    params: &PhysicalParams,
    mode: &SelectedMode,
    n_max: usize,
) -> Result<Vec<f64>> {
    if mode.coupling_mag() <= 0.0 {
        return Err(Error::InvalidParameter(
            "stationary distribution needs a nonzero mode coupling".into(),
        ));
    }
    let mut p = Vec::with_capacity(n_max + 1);
    p.push(1.0_f64);
    for n in 0..n_max {
        let up = photon_jump_rates(params, mode, n as u64)?.gamma_up;
        let down = photon_jump_rates(params, mode, n as u64 + 1)?.gamma_down;
        if down <= 0.0 || down.is_nan() {
            return Err(Error::SingularSystem("vanishing downward rate".into()));
        }
        let ratio = up / down;
        if ratio >= 1.0 {
            return Err(Error::InvalidParameter(
                "non-normalizable stationary distribution (upward rate >= downward)".into(),
            ));
        }
        let last = *p.last().expect("nonempty");
        p.push(last * ratio);
    }
    let total: f64 = p.iter().sum();
    for v in &mut p {
        *v /= total;
    }
    Ok(p)
}

/// Quadrature controls for [`mode_sum_check`]: a symmetric detuning window in
/// units of the Lorentzian half-width, and the total node count of the
/// composite Gauss-Legendre rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeSumQuadrature {
    pub half_width_multiplier: f64,
    pub node_count: usize,
}

impl Default for ModeSumQuadrature {
    fn default() -> Self {
        Self { half_width_multiplier: 200.0, node_count: 4096 }
    }
}

/// Result of the mode-sum consistency integral: the summed mode jump rates
/// and their relative errors against the Einstein-rate targets
/// `gamma_down * p_e` (mode gain) and `gamma_up * p_g` (mode loss).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeSumResult {
    pub sum_up: f64,
    pub sum_down: f64,
    pub rel_err_up: f64,
    pub rel_err_down: f64,
}

/// Integrates the photon-number jump rates over all mode detunings, with the
/// mode count replaced by its thermal mean and the angular/polarization sum
/// folded into a constant golden-rule weight normalized so the full
/// Lorentzian integral carries total weight `A`.
///
/// The quadrature covers `|detuning| <= half_width_multiplier` half-widths
/// and adds the leading `1/window` Lorentzian tail analytically, so the
/// residual error falls off with the cube of the window. A window that is
/// too small shows up directly in the returned relative errors.
pub fn mode_sum_check(
    params: &PhysicalParams,
    quadrature: ModeSumQuadrature,
) -> Result<ModeSumResult> {
    let w = quadrature.half_width_multiplier;
    if !w.is_finite() || w < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "half_width_multiplier must be >= 1, got {w}"
        )));
    }
    if quadrature.node_count < 32 {
        return Err(Error::InvalidParameter(format!(
            "node_count must be >= 32, got {}",
            quadrature.node_count
        )));
    }
    let (p_g, p_e) = params.equilibrium()?;
    let nbar = params.nbar();
    let a = params.a_coeff();
    let hw = 0.5 * (params.gamma_down() + params.gamma_up());

    // weight(detuning) integrates to 1 over the full line; the mode sum is
    // then A * (nbar + 1) * p_e for gain and A * nbar * p_g for loss.
    let half_window = w * hw;
    let panels = (quadrature.node_count / 16).max(1);
    let (nodes, weights) = gauss_legendre(16);
    let panel_width = 2.0 * half_window / panels as f64;
    let mut integral = 0.0;
    for p in 0..panels {
        let lo = -half_window + p as f64 * panel_width;
        let center = lo + 0.5 * panel_width;
        let half = 0.5 * panel_width;
        for (&x, &wt) in nodes.iter().zip(&weights) {
            let detuning = center + half * x;
            integral += wt * half * (hw / std::f64::consts::PI) / (hw * hw + detuning * detuning);
        }
    }
    // leading Lorentzian tail beyond the window, one term per side
    let tail = 2.0 / (std::f64::consts::PI * w);
    let line_weight = integral + tail;

    let sum_up = a * (nbar + 1.0) * p_e * line_weight;
    let sum_down = a * nbar * p_g * line_weight;
    let target_up = params.gamma_down() * p_e;
    let target_down = params.gamma_up() * p_g;
    let rel = |sum: f64, target: f64| {
        if target == 0.0 {
            sum.abs()
        } else {
            (sum - target).abs() / target.abs()
        }
    };
    Ok(ModeSumResult {
        sum_up,
        sum_down,
        rel_err_up: rel(sum_up, target_up),
        rel_err_down: rel(sum_down, target_down),
    })
}
