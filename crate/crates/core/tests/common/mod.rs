//! Shared oracle machinery for the integration tests: fixed-step RK4
//! integration of the between-jump equations of motion, time-domain
//! quadrature of the integrated populations/coherences, and basic
//! goodness-of-fit statistics. Everything here is independent of the
//! closed-form implementation paths it is used to check.

#![allow(dead_code)]

use num_complex::Complex64;

/// RK4 integration of `dy/dt = M y` for a constant complex 2x2 matrix.
pub fn ode_propagate_c2(
    m: [[Complex64; 2]; 2],
    y0: [Complex64; 2],
    t_end: f64,
    steps: usize,
) -> [Complex64; 2] {
    let h = t_end / steps as f64;
    let f = |y: [Complex64; 2]| {
        [m[0][0] * y[0] + m[0][1] * y[1], m[1][0] * y[0] + m[1][1] * y[1]]
    };
    let mut y = y0;
    for _ in 0..steps {
        let k1 = f(y);
        let k2 = f([y[0] + k1[0] * (0.5 * h), y[1] + k1[1] * (0.5 * h)]);
        let k3 = f([y[0] + k2[0] * (0.5 * h), y[1] + k2[1] * (0.5 * h)]);
        let k4 = f([y[0] + k3[0] * h, y[1] + k3[1] * h]);
        y = [
            y[0] + (k1[0] + k2[0] * 2.0 + k3[0] * 2.0 + k4[0]) * (h / 6.0),
            y[1] + (k1[1] + k2[1] * 2.0 + k3[1] * 2.0 + k4[1]) * (h / 6.0),
        ];
    }
    y
}

/// Time-domain oracle for the integrated conditional-state moments.
#[derive(Debug, Clone, Copy)]
pub struct WuvOracle {
    pub w_e: f64,
    pub w_g: f64,
    pub u_int: f64,
    pub v_int: f64,
}

/// Integrates the real moment equations
/// `d|ce|^2/dt = -gd |ce|^2 - 2k Im`,
/// `d|cg|^2/dt = -gu |cg|^2 + 2k Im`,
/// `dRe/dt = -hw Re - dw Im`,
/// `dIm/dt = -hw Im + dw Re + k(|ce|^2 - |cg|^2)`
/// with RK4 from the chosen preparation, and accumulates the four time
/// integrals by the trapezoid rule to a horizon of 50 decay times, with an
/// exponential tail estimate added for each monotone component.
pub fn wuv_time_domain(gd: f64, gu: f64, k: f64, dw: f64, initial_excited: bool) -> WuvOracle {
    let hw = 0.5 * (gd + gu);
    let deriv = |x: [f64; 4]| {
        [
            -gd * x[0] - 2.0 * k * x[3],
            -gu * x[1] + 2.0 * k * x[3],
            -hw * x[2] - dw * x[3],
            -hw * x[3] + dw * x[2] + k * (x[0] - x[1]),
        ]
    };
    let slowest = if gu > 0.0 { gd.min(gu) } else { gd };
    let t_end = 50.0 / slowest;
    let h = 2.5e-4;
    let steps = (t_end / h).ceil() as usize;
    let mut x = if initial_excited { [1.0, 0.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0, 0.0] };
    let mut integral = [0.0; 4];
    let mut prev = x;
    for _ in 0..steps {
        let k1 = deriv(x);
        let k2 = deriv(step(x, k1, 0.5 * h));
        let k3 = deriv(step(x, k2, 0.5 * h));
        let k4 = deriv(step(x, k3, h));
        for i in 0..4 {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            integral[i] += 0.5 * h * (prev[i] + x[i]);
        }
        prev = x;
    }
    // exponential tail per component where a decay rate is measurable
    let before = x;
    let d = deriv(x);
    for i in 0..4 {
        if before[i] != 0.0 && d[i] != 0.0 {
            let rate = -d[i] / before[i];
            if rate > 0.0 {
                integral[i] += before[i] / rate;
            }
        }
    }
    WuvOracle { w_e: integral[0], w_g: integral[1], u_int: integral[2], v_int: integral[3] }
}

fn step(x: [f64; 4], k: [f64; 4], h: f64) -> [f64; 4] {
    [x[0] + h * k[0], x[1] + h * k[1], x[2] + h * k[2], x[3] + h * k[3]]
}

/// Two-sided Kolmogorov-Smirnov statistic of a sample against a CDF.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs()).max((f - (i as f64 + 1.0) / n).abs());
    }
    d
}

/// Pearson chi-square statistic for observed counts against expected counts.
pub fn chi_square_stat(observed: &[u64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            let diff = o as f64 - e;
            diff * diff / e
        })
        .sum()
}

/// Brute-force solid-angle quadrature of the transverse polarization sum for
/// a fixed dipole vector: midpoint rule in the polar angle (with the sine
/// weight) times a uniform azimuthal grid, polarization vectors constructed
/// explicitly. Converges to `(8 pi / 3) |d|^2`.
pub fn sphere_polarization_brute(dipole: [f64; 3], n_theta: usize, n_phi: usize) -> f64 {
    let pi = std::f64::consts::PI;
    let dtheta = pi / n_theta as f64;
    let dphi = 2.0 * pi / n_phi as f64;
    let mut total = 0.0;
    for i in 0..n_theta {
        let theta = (i as f64 + 0.5) * dtheta;
        let (sin_t, cos_t) = theta.sin_cos();
        for j in 0..n_phi {
            let phi = (j as f64 + 0.5) * dphi;
            let (sin_p, cos_p) = phi.sin_cos();
            let e1 = [cos_t * cos_p, cos_t * sin_p, -sin_t];
            let e2 = [-sin_p, cos_p, 0.0];
            let d1 = e1[0] * dipole[0] + e1[1] * dipole[1] + e1[2] * dipole[2];
            let d2 = e2[0] * dipole[0] + e2[1] * dipole[1] + e2[2] * dipole[2];
            total += sin_t * dtheta * dphi * (d1 * d1 + d2 * d2);
        }
    }
    total
}
