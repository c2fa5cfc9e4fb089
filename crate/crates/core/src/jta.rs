//! Time-domain pair amplitude with pump-induced nonlinear phase, dispersion neglected.
//!
//! A pair detected at `(t_s, t_i)` was created at the single position `z_c` and
//! time `t_c` fixed by the differential walk-off, so
//! `JTA = i√(γₛγᵢ)/|β₁ₛ−β₁ᵢ| · e^{iΘ} · E(t_c)²` inside `0 < z_c < L`.

use num_complex::Complex64;

use crate::amplitude::{Axis, JointAmplitude};
use crate::error::{Error, Result};
use crate::fiber::FiberParams;
use crate::grid::{Domain, TemporalGrid};
use crate::par::Execution;
use crate::pump::{PumpEnvelope, COVERAGE_THRESHOLD};

/// Running trapezoid integral of the pump intensity, `∫_{t_0}^{t}|E|²dt'` in W·s.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpIntensityAccumulator {
    grid: TemporalGrid,
    intensity: Vec<f64>,
    cumulative: Vec<f64>,
}

impl PumpIntensityAccumulator {
    pub fn new(pump: &PumpEnvelope) -> Self {
        let grid = *pump.grid();
        let dt = grid.dt();
        let intensity: Vec<f64> = pump.samples().iter().map(|z| z.norm_sqr()).collect();
        let mut cumulative = Vec::with_capacity(intensity.len());
        let mut acc = 0.0;
        cumulative.push(acc);
        for w in intensity.windows(2) {
            acc += 0.5 * (w[0] + w[1]) * dt;
            cumulative.push(acc);
        }
        Self {
            grid,
            intensity,
            cumulative,
        }
    }

    pub fn grid(&self) -> &TemporalGrid {
        &self.grid
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn total(&self) -> f64 {
        *self.cumulative.last().unwrap_or(&0.0)
    }

    /// Cumulative integral at `t`, clamped to the grid ends.
    ///
    /// Inside a bin the intensity is interpolated linearly, which keeps the
    /// result consistent with the trapezoid values at the samples.
    pub fn at(&self, t: f64) -> f64 {
        let n = self.cumulative.len();
        let x = self.grid.position(t);
        if x <= 0.0 {
            return 0.0;
        }
        if x >= (n - 1) as f64 {
            return self.total();
        }
        let j = x.floor() as usize;
        let f = x - j as f64;
        let (a, b) = (self.intensity[j], self.intensity[j + 1]);
        self.cumulative[j] + self.grid.dt() * f * (a + 0.5 * (b - a) * f)
    }

    /// `∫_a^b |E|²dt`, signed.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.at(b) - self.at(a)
    }
}

/// Walk-off below which the group-velocity-matched limit formulas are used,
/// `1e-3 · max(|β₁ₛ|, |β₁ᵢ|, τ/L)`.
pub fn walkoff_epsilon(p: &FiberParams, pump_time_scale: f64) -> f64 {
    1e-3 * p
        .beta1_s
        .abs()
        .max(p.beta1_i.abs())
        .max(pump_time_scale / p.length)
}

/// Creation position `z_c` and time `t_c` of a pair detected at `(t_s, t_i)`.
pub fn creation_coords(t_s: f64, t_i: f64, p: &FiberParams, epsilon: f64) -> Result<(f64, f64)> {
    let d = p.beta1_s - p.beta1_i;
    if d.abs() <= epsilon {
        return Err(Error::DegenerateWalkoff {
            difference: d,
            threshold: epsilon,
        });
    }
    let z_c = p.length - (t_s - t_i) / d;
    let t_c = (p.beta1_s * t_i - p.beta1_i * t_s) / d;
    Ok((z_c, t_c))
}

/// Nonlinear phase `Θ` picked up by a pair created at `(z_c, t_c)`: pump SPM up
/// to `z_c`, then XPM on each photon while it walks through the pump.
#[allow(clippy::too_many_arguments)]
pub fn nonlinear_phase_theta(
    t_s: f64,
    t_i: f64,
    z_c: f64,
    t_c: f64,
    pump: &PumpEnvelope,
    acc: &PumpIntensityAccumulator,
    p: &FiberParams,
    epsilon: f64,
) -> Result<f64> {
    if !(0.0..=p.length).contains(&z_c) {
        return Err(Error::OutOfDomain(format!(
            "creation point z_c = {z_c:.6e} m lies outside [0, {}] m",
            p.length
        )));
    }
    let walk = |gamma: f64, beta1: f64, t_m: f64| {
        if gamma == 0.0 {
            0.0
        } else if beta1.abs() < epsilon {
            2.0 * gamma * (p.length - z_c) * pump.sample_at(t_m).norm_sqr()
        } else {
            2.0 * gamma / beta1 * acc.integral(t_c, t_m)
        }
    };
    Ok(2.0 * p.gamma_p * z_c * pump.sample_at(t_c).norm_sqr()
        + walk(p.gamma_s, p.beta1_s, t_s)
        + walk(p.gamma_i, p.beta1_i, t_i))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JtaOptions {
    /// Include `e^{iΘ}`; off gives the low-power (linear) limit.
    pub nonlinear_phase: bool,
    pub execution: Execution,
}

impl Default for JtaOptions {
    fn default() -> Self {
        Self {
            nonlinear_phase: true,
            execution: Execution::default(),
        }
    }
}

pub fn build_jta(
    pump: &PumpEnvelope,
    p: &FiberParams,
    s_grid: &TemporalGrid,
    i_grid: &TemporalGrid,
) -> Result<JointAmplitude> {
    build_jta_with(pump, p, s_grid, i_grid, &JtaOptions::default())
}

/// Fills the JTA on the given grids and rejects supports clipped by the grid edge.
pub fn build_jta_with(
    pump: &PumpEnvelope,
    p: &FiberParams,
    s_grid: &TemporalGrid,
    i_grid: &TemporalGrid,
    opts: &JtaOptions,
) -> Result<JointAmplitude> {
    let epsilon = walkoff_epsilon(p, pump.time_scale());
    let d = p.beta1_s - p.beta1_i;
    if d.abs() <= epsilon {
        return Err(Error::DegenerateWalkoff {
            difference: d,
            threshold: epsilon,
        });
    }
    let acc = PumpIntensityAccumulator::new(pump);
    let prefactor = Complex64::new(0.0, (p.gamma_s * p.gamma_i).sqrt() / d.abs());
    let ts = s_grid.times();
    let ti = i_grid.times();
    let jta = JointAmplitude::from_fn(
        opts.execution,
        Axis::Time(*s_grid),
        Axis::Time(*i_grid),
        s_grid.dt() * i_grid.dt(),
        |j, k| {
            let z_c = p.length - (ts[j] - ti[k]) / d;
            if !(z_c > 0.0 && z_c < p.length) {
                return Complex64::new(0.0, 0.0);
            }
            let t_c = (p.beta1_s * ti[k] - p.beta1_i * ts[j]) / d;
            let e = pump.sample_at(t_c);
            let amp = prefactor * e * e;
            if opts.nonlinear_phase && amp.norm_sqr() > 0.0 {
                let theta = nonlinear_phase_theta(ts[j], ti[k], z_c, t_c, pump, &acc, p, epsilon)
                    .unwrap_or(0.0);
                amp * Complex64::from_polar(1.0, theta)
            } else {
                amp
            }
        },
    )?;
    check_edges(&jta)?;
    Ok(jta)
}

/// Errors if the boundary carries more than the coverage threshold of the peak intensity.
fn check_edges(ja: &JointAmplitude) -> Result<()> {
    let (rows, cols) = (ja.rows(), ja.cols());
    let peak = ja.data().iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(());
    }
    let mut edge: f64 = 0.0;
    for k in 0..cols {
        edge = edge.max(ja.get(0, k).norm_sqr()).max(ja.get(rows - 1, k).norm_sqr());
    }
    for j in 0..rows {
        edge = edge.max(ja.get(j, 0).norm_sqr()).max(ja.get(j, cols - 1).norm_sqr());
    }
    if edge > COVERAGE_THRESHOLD * peak {
        return Err(Error::Coverage(format!(
            "JTA support reaches the grid edge ({:.2e} of peak intensity)",
            edge / peak
        )));
    }
    Ok(())
}

/// `R = Σ|JTA|² dt_s dt_i`.
pub fn generation_rate(jta: &JointAmplitude) -> Result<f64> {
    jta.require_domain(Domain::Time)?;
    Ok(jta.norm_sqr() * jta.signal_axis().step() * jta.idler_axis().step())
}

/// Closed-form rate `γₛγᵢL/|β₁ₛ−β₁ᵢ| · ∫|E|⁴dt` from the pump samples.
pub fn analytic_rate(pump: &PumpEnvelope, p: &FiberParams) -> f64 {
    p.gamma_s * p.gamma_i * p.length / p.differential_walkoff() * pump.intensity_squared_integral()
}

/// Peak power giving `target_rate` pairs per pulse on these grids.
///
/// `R ∝ P₀²` exactly, so one reference evaluation at the pump's own peak
/// power is inverted directly.
pub fn power_for_rate(
    pump: &PumpEnvelope,
    p: &FiberParams,
    s_grid: &TemporalGrid,
    i_grid: &TemporalGrid,
    target_rate: f64,
) -> Result<f64> {
    if !(target_rate.is_finite() && target_rate >= 0.0) {
        return Err(Error::Config(format!(
            "target rate must be non-negative, got {target_rate}"
        )));
    }
    let opts = JtaOptions {
        nonlinear_phase: false,
        ..JtaOptions::default()
    };
    let reference = generation_rate(&build_jta_with(pump, p, s_grid, i_grid, &opts)?)?;
    if reference <= 0.0 {
        return Err(Error::Numerical("pump generates no pairs on this grid".into()));
    }
    Ok(pump.peak_power() * (target_rate / reference).sqrt())
}

/// Signal and idler grids of `n_points` each that hold the full JTA support
/// with `margin` of clearance on every side.
///
/// The photons trail the creation time by `β₁ₘ(L−z_c)`, so axis `m` spans
/// `[min(0, β₁ₘL), max(0, β₁ₘL)]` beyond the pump's own extent.
pub fn support_grids(
    p: &FiberParams,
    pump_center: f64,
    margin: f64,
    n_points: usize,
) -> Result<(TemporalGrid, TemporalGrid)> {
    let axis = |beta1: f64| {
        let lo = pump_center + (beta1 * p.length).min(0.0) - margin;
        let hi = pump_center + (beta1 * p.length).max(0.0) + margin;
        let dt = (hi - lo) / (n_points.max(2) - 1) as f64;
        TemporalGrid::new(n_points, dt, lo + (n_points / 2) as f64 * dt)
    };
    Ok((axis(p.beta1_s)?, axis(p.beta1_i)?))
}

/// Default clearance: the pump's half extent plus one more time scale.
pub fn default_margin(pump: &PumpEnvelope) -> f64 {
    pump.half_extent() + pump.time_scale()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::conjugate_wavelength;
    use crate::pump::gaussian_pump;
    use approx::assert_relative_eq;

    const TAU: f64 = 100e-15;

    fn fiber(beta1_s: f64, beta1_i: f64) -> FiberParams {
        FiberParams {
            length: 0.1,
            beta1_s,
            beta1_i,
            beta2_p: 0.0,
            beta2_s: 0.0,
            beta2_i: 0.0,
            gamma_p: 0.1,
            gamma_s: 0.04,
            gamma_i: 0.03,
            lambda_p0: 726e-9,
            lambda_s0: 626e-9,
            lambda_i0: conjugate_wavelength(726e-9, 626e-9),
        }
    }

    fn pump(peak: f64) -> PumpEnvelope {
        gaussian_pump(TemporalGrid::centered(4096, 2.5e-15).unwrap(), TAU, peak).unwrap()
    }

    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                    + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(m), f(b));
        step(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
    }

    #[test]
    fn accumulator_is_monotone_and_totals_energy() {
        let e = pump(2.0);
        let acc = PumpIntensityAccumulator::new(&e);
        assert_eq!(acc.cumulative()[0], 0.0);
        assert!(acc.cumulative().windows(2).all(|w| w[1] >= w[0]));
        assert_relative_eq!(acc.total(), e.energy(), max_relative = 1e-10);
        assert_relative_eq!(acc.integral(-1.0, 1.0), acc.total());
    }

    #[test]
    fn creation_coords_special_cases() {
        let p = fiber(1e-11, 0.0);
        let (z, _) = creation_coords(3e-13, 3e-13, &p, 1e-15).unwrap();
        assert_eq!(z, p.length);
        let (_, tc) = creation_coords(5e-13, -2e-13, &p, 1e-15).unwrap();
        assert_eq!(tc, -2e-13);
        let q = fiber(1e-11, -1e-11);
        let (ts, ti) = (4e-13, -1e-13);
        let (z, tc) = creation_coords(ts, ti, &q, 1e-15).unwrap();
        assert_relative_eq!(tc, 0.5 * (ts + ti), max_relative = 1e-14);
        assert_relative_eq!(z, q.length - (ts - ti) / 2e-11, max_relative = 1e-14);
        assert!(matches!(
            creation_coords(0.0, 0.0, &fiber(1e-11, 1e-11), 1e-14),
            Err(Error::DegenerateWalkoff { .. })
        ));
    }

    #[test]
    fn theta_vanishes_without_nonlinearity_and_rejects_outside_points() {
        let mut p = fiber(1e-11, -0.5e-11);
        p.gamma_p = 0.0;
        p.gamma_s = 0.0;
        p.gamma_i = 0.0;
        let e = pump(5.0);
        let acc = PumpIntensityAccumulator::new(&e);
        assert_eq!(nonlinear_phase_theta(1e-13, 0.0, 0.05, 0.0, &e, &acc, &p, 1e-15).unwrap(), 0.0);
        assert!(matches!(
            nonlinear_phase_theta(0.0, 0.0, 0.2, 0.0, &e, &acc, &p, 1e-15),
            Err(Error::OutOfDomain(_))
        ));
    }

    #[test]
    fn theta_matched_idler_uses_limit_formula() {
        let p = fiber(1e-11, 0.0);
        let e = pump(3.0);
        let acc = PumpIntensityAccumulator::new(&e);
        let eps = walkoff_epsilon(&p, TAU);
        let (ts, ti) = (4e-13, 5e-14);
        let (z_c, t_c) = creation_coords(ts, ti, &p, eps).unwrap();
        let theta = nonlinear_phase_theta(ts, ti, z_c, t_c, &e, &acc, &p, eps).unwrap();
        let mut no_idler = p;
        no_idler.gamma_i = 0.0;
        let rest = nonlinear_phase_theta(ts, ti, z_c, t_c, &e, &acc, &no_idler, eps).unwrap();
        let limit = 2.0 * p.gamma_i * (p.length - z_c) * e.sample_at(ti).norm_sqr();
        assert_relative_eq!(theta - rest, limit, max_relative = 1e-12);
    }

    #[test]
    fn theta_walkoff_term_matches_quadrature() {
        let p = fiber(1e-11, 0.0);
        let peak = 3.0;
        let e = pump(peak);
        let acc = PumpIntensityAccumulator::new(&e);
        let eps = walkoff_epsilon(&p, TAU);
        let mut only_s = p;
        only_s.gamma_p = 0.0;
        only_s.gamma_i = 0.0;
        let intensity = |t: f64| peak * (-t * t / (TAU * TAU)).exp();
        for &(ts, ti) in &[(3e-13, 0.0), (1.2e-13, -5e-14), (8e-13, 1e-13)] {
            let (z_c, t_c) = creation_coords(ts, ti, &p, eps).unwrap();
            let theta = nonlinear_phase_theta(ts, ti, z_c, t_c, &e, &acc, &only_s, eps).unwrap();
            let oracle = 2.0 * p.gamma_s / p.beta1_s * adaptive_simpson(&intensity, t_c, ts, 1e-22);
            assert_relative_eq!(theta, oracle, max_relative = 1e-3);
        }
    }

    fn grids(p: &FiberParams, n: usize) -> (TemporalGrid, TemporalGrid) {
        support_grids(p, 0.0, 5.0 * TAU, n).unwrap()
    }

    #[test]
    fn support_gate_is_hard() {
        let p = fiber(1e-11, 0.0);
        let (sg, ig) = grids(&p, 128);
        let jta = build_jta(&pump(1.0), &p, &sg, &ig).unwrap();
        let eps = walkoff_epsilon(&p, TAU);
        let mut inside = 0;
        for j in 0..sg.n_points() {
            for k in 0..ig.n_points() {
                let (z, _) = creation_coords(sg.time(j), ig.time(k), &p, eps).unwrap();
                if !(z > 0.0 && z < p.length) {
                    assert_eq!(jta.get(j, k), Complex64::new(0.0, 0.0));
                } else if jta.get(j, k).norm() > 0.0 {
                    inside += 1;
                }
            }
        }
        assert!(inside > 100);
    }

    #[test]
    fn rate_matches_gaussian_closed_form() {
        for (bs, bi) in [(1e-11, 0.0), (0.5e-11, -0.5e-11), (1.4e-11, 0.3e-11)] {
            let p = fiber(bs, bi);
            let peak = 2.5;
            let (sg, ig) = grids(&p, 512);
            let r = generation_rate(&build_jta(&pump(peak), &p, &sg, &ig).unwrap()).unwrap();
            let closed = p.gamma_s * p.gamma_i * p.length / (bs - bi).abs()
                * peak
                * peak
                * TAU
                * (std::f64::consts::PI / 2.0).sqrt();
            assert_relative_eq!(r, closed, max_relative = 5e-3);
            assert_relative_eq!(analytic_rate(&pump(peak), &p), closed, max_relative = 1e-6);
        }
    }

    #[test]
    fn doubling_power_quadruples_rate() {
        let p = fiber(1e-11, 0.0);
        let (sg, ig) = grids(&p, 128);
        let r1 = generation_rate(&build_jta(&pump(1.0), &p, &sg, &ig).unwrap()).unwrap();
        let r2 = generation_rate(&build_jta(&pump(2.0), &p, &sg, &ig).unwrap()).unwrap();
        assert_relative_eq!(r2, 4.0 * r1, max_relative = 1e-6);
    }

    #[test]
    fn power_for_rate_round_trips() {
        let p = fiber(1e-11, -0.2e-11);
        let (sg, ig) = grids(&p, 128);
        let unit = pump(1.0);
        let p0 = power_for_rate(&unit, &p, &sg, &ig, 0.1).unwrap();
        let r = generation_rate(&build_jta(&unit.with_peak_power(p0).unwrap(), &p, &sg, &ig).unwrap()).unwrap();
        assert_relative_eq!(r, 0.1, max_relative = 1e-6);
        let p4 = power_for_rate(&unit, &p, &sg, &ig, 0.4).unwrap();
        assert_relative_eq!(p4, 2.0 * p0, max_relative = 1e-12);
        assert_eq!(power_for_rate(&unit, &p, &sg, &ig, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn clipped_support_is_coverage_error() {
        let p = fiber(1e-11, 0.0);
        let (sg, ig) = support_grids(&p, 0.0, TAU, 128).unwrap();
        assert!(matches!(build_jta(&pump(1.0), &p, &sg, &ig), Err(Error::Coverage(_))));
    }

    #[test]
    fn degenerate_walkoff_is_rejected() {
        let p = fiber(1e-11, 1e-11);
        let (sg, ig) = grids(&p, 64);
        assert!(matches!(
            build_jta(&pump(1.0), &p, &sg, &ig),
            Err(Error::DegenerateWalkoff { .. })
        ));
    }

    #[test]
    fn rate_requires_time_domain() {
        let p = fiber(1e-11, 0.0);
        let (sg, ig) = grids(&p, 64);
        let jsa = crate::amplitude::transform_2d(&build_jta(&pump(1.0), &p, &sg, &ig).unwrap()).unwrap();
        assert!(matches!(generation_rate(&jsa), Err(Error::DomainTag { .. })));
    }
}
