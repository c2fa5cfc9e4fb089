//! Frequency-domain joint spectral amplitude as energy matching × phase matching.
//!
//! `JSA(Δω_s, Δω_i) = F(Δω_s + Δω_i) · G(Δβ)` where `F` is the self-convolution
//! of the pump spectrum and `G = e^{iΔβL/2} sinc(ΔβL/2)`.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::amplitude::{Axis, JointAmplitude};
use crate::error::{Error, Result};
use crate::fiber::FiberParams;
use crate::grid::{dual_grid, SpectralGrid};
use crate::par::{self, Execution};
use crate::pump::PumpEnvelope;

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Direct self-convolution of a sampled pump spectrum evaluated at the sum detuning.
///
/// `F(S) = Σ_k E(ω_k)·E(S − ω_k)·dω`, with `E` linearly interpolated between
/// samples and zero outside the grid. Costs O(n) per call.
pub fn pump_function_f(spectrum: &[Complex64], grid: &SpectralGrid, sum_detuning: f64) -> Result<Complex64> {
    let n = grid.n_points();
    if spectrum.len() != n {
        return Err(Error::Dimension(format!(
            "spectrum has {} samples for a {n}-point grid",
            spectrum.len()
        )));
    }
    let (m, f) = sum_position(grid, sum_detuning)?;
    let conv_at = |idx: usize| -> Complex64 {
        // Σ_k E_k E_{idx-k} over valid k
        let lo = idx.saturating_sub(n - 1);
        let hi = idx.min(n - 1);
        (lo..=hi).map(|k| spectrum[k] * spectrum[idx - k]).sum()
    };
    let mut acc = conv_at(m) * (1.0 - f);
    if f > 0.0 {
        acc += conv_at(m + 1) * f;
    }
    Ok(acc * grid.d_omega())
}

/// Integer/fractional index of a sum detuning on the self-convolution lattice.
fn sum_position(grid: &SpectralGrid, sum_detuning: f64) -> Result<(usize, f64)> {
    let n = grid.n_points();
    let c = (n / 2) as f64;
    let u = (sum_detuning - 2.0 * grid.omega_center()) / grid.d_omega() + 2.0 * c;
    let top = (2 * n - 2) as f64;
    // absorb rounding at the lattice ends
    let u = if u < 0.0 && u > -1e-9 {
        0.0
    } else if u > top && u < top + 1e-9 {
        top
    } else {
        u
    };
    if !(u >= 0.0 && u <= top) {
        return Err(Error::Range(format!(
            "sum detuning {sum_detuning:.4e} rad/s outside [{:.4e}, {:.4e}]",
            2.0 * grid.first(),
            2.0 * grid.last()
        )));
    }
    let m = (u.floor() as usize).min(2 * n - 2);
    let f = u - m as f64;
    Ok((m, f))
}

/// Tabulated pump self-convolution, computed once by FFT and evaluated by
/// linear interpolation (identical to [`pump_function_f`] up to rounding).
#[derive(Debug, Clone)]
pub struct PumpFunction {
    grid: SpectralGrid,
    conv: Vec<Complex64>,
}

impl PumpFunction {
    pub fn new(spectrum: &[Complex64], grid: SpectralGrid) -> Result<Self> {
        let n = grid.n_points();
        if spectrum.len() != n {
            return Err(Error::Dimension(format!(
                "spectrum has {} samples for a {n}-point grid",
                spectrum.len()
            )));
        }
        let len = (2 * n - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(len);
        let inv = planner.plan_fft_inverse(len);
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        buf[..n].copy_from_slice(spectrum);
        fwd.process(&mut buf);
        buf.iter_mut().for_each(|z| *z = *z * *z);
        inv.process(&mut buf);
        let scale = grid.d_omega() / len as f64;
        let conv = buf[..2 * n - 1].iter().map(|z| z * scale).collect();
        Ok(Self { grid, conv })
    }

    pub fn from_pump(pump: &PumpEnvelope) -> Result<Self> {
        Self::new(&pump.spectrum(), dual_grid(pump.grid()))
    }

    pub fn eval(&self, sum_detuning: f64) -> Result<Complex64> {
        let (m, f) = sum_position(&self.grid, sum_detuning)?;
        let mut v = self.conv[m] * (1.0 - f);
        if f > 0.0 {
            v += self.conv[m + 1] * f;
        }
        Ok(v)
    }
}

/// Phase mismatch `Δβ` (1/m) around the phase-matched carriers.
///
/// Linear part `−β₁ₛΔω_s − β₁ᵢΔω_i` (relative β₁); with `include_beta2` adds
/// `β₂ₚΔω_p² − (β₂ₛ/2)Δω_s² − (β₂ᵢ/2)Δω_i²`, `Δω_p = (Δω_s+Δω_i)/2`; the CW
/// nonlinear shift is `−2γₚP`.
pub fn phase_mismatch(
    d_omega_s: f64,
    d_omega_i: f64,
    p: &FiberParams,
    include_beta2: bool,
    cw_power: f64,
) -> f64 {
    let mut db = -d_omega_s * p.beta1_s - d_omega_i * p.beta1_i;
    if include_beta2 {
        let wp = 0.5 * (d_omega_s + d_omega_i);
        db += p.beta2_p * wp * wp - 0.5 * p.beta2_s * d_omega_s * d_omega_s
            - 0.5 * p.beta2_i * d_omega_i * d_omega_i;
    }
    db - 2.0 * p.gamma_p * cw_power
}

/// `G = e^{iΔβL/2}·sinc(ΔβL/2)`.
pub fn phasematch_g(delta_beta: f64, length: f64) -> Complex64 {
    let x = 0.5 * delta_beta * length;
    Complex64::from_polar(sinc(x), x)
}

fn frequency_axes(s_grid: &SpectralGrid, i_grid: &SpectralGrid) -> (Axis, Axis) {
    (Axis::Frequency(*s_grid), Axis::Frequency(*i_grid))
}

/// Sum detunings of a (signal, idler) grid pair share a lattice when the steps agree.
fn shared_sum_lattice(s: &SpectralGrid, i: &SpectralGrid) -> Option<Vec<f64>> {
    if s.d_omega() != i.d_omega() {
        return None;
    }
    let base = s.first() + i.first();
    Some(
        (0..s.n_points() + i.n_points() - 1)
            .map(|m| base + m as f64 * s.d_omega())
            .collect(),
    )
}

/// Unnormalised `F×G` joint spectral amplitude.
pub fn build_jsa_analytic(
    pump: &PumpEnvelope,
    p: &FiberParams,
    s_grid: &SpectralGrid,
    i_grid: &SpectralGrid,
    include_beta2: bool,
    cw_power: f64,
    exec: Execution,
) -> Result<JointAmplitude> {
    let pf = PumpFunction::from_pump(pump)?;
    let ws = s_grid.omegas();
    let wi = i_grid.omegas();
    let (sa, ia) = frequency_axes(s_grid, i_grid);
    let measure = s_grid.d_omega() * i_grid.d_omega();
    match shared_sum_lattice(s_grid, i_grid) {
        Some(sums) => {
            let f: Vec<Complex64> = sums.iter().map(|&s| pf.eval(s)).collect::<Result<_>>()?;
            JointAmplitude::from_fn(exec, sa, ia, measure, |j, k| {
                let db = phase_mismatch(ws[j], wi[k], p, include_beta2, cw_power);
                f[j + k] * phasematch_g(db, p.length)
            })
        }
        None => {
            // corners are validated before the fill
            for s in [ws[0] + wi[0], ws[ws.len() - 1] + wi[wi.len() - 1]] {
                pf.eval(s)?;
            }
            JointAmplitude::from_fn(exec, sa, ia, measure, |j, k| {
                let db = phase_mismatch(ws[j], wi[k], p, include_beta2, cw_power);
                pf.eval(ws[j] + wi[k]).unwrap_or_default() * phasematch_g(db, p.length)
            })
        }
    }
}

/// JSA with the pump dispersing along the fibre (no nonlinear phase).
///
/// The fibre is cut into `slices` slabs. In each slab the pump's energy-matching
/// function is frozen at the slab centre and the walk-off/dispersion phase of
/// the pair is integrated exactly:
///
/// `JSA = (1/L) Σ_m F_{z_m}(Δω_s+Δω_i) e^{-i a z_m} h sinc(a h/2)`,
/// `a = β₁ₛΔω_s + (β₂ₛ/2)Δω_s² + β₁ᵢΔω_i + (β₂ᵢ/2)Δω_i²`.
///
/// With `β₂ₚ = 0` this equals [`build_jsa_analytic`] with `include_beta2`
/// (pump term then vanishes) for any slice count; the overall
/// `e^{i a L}` factor, a product of one-axis phases, is dropped.
pub fn build_jsa_dispersed_pump(
    pump: &PumpEnvelope,
    p: &FiberParams,
    s_grid: &SpectralGrid,
    i_grid: &SpectralGrid,
    slices: usize,
    exec: Execution,
) -> Result<JointAmplitude> {
    if slices == 0 {
        return Err(Error::Config("need at least one fibre slice".into()));
    }
    let sums = shared_sum_lattice(s_grid, i_grid).ok_or_else(|| {
        Error::Dimension("dispersed-pump JSA needs equal signal and idler frequency steps".into())
    })?;
    let pump_grid = dual_grid(pump.grid());
    let spectrum0 = pump.spectrum();
    let wp = pump_grid.omegas();
    let h = p.length / slices as f64;
    let ks: Vec<f64> = s_grid
        .omegas()
        .iter()
        .map(|&w| p.beta1_s * w + 0.5 * p.beta2_s * w * w)
        .collect();
    let ki: Vec<f64> = i_grid
        .omegas()
        .iter()
        .map(|&w| p.beta1_i * w + 0.5 * p.beta2_i * w * w)
        .collect();

    let zs: Vec<f64> = (0..slices).map(|m| (m as f64 + 0.5) * h).collect();
    let f_tables: Vec<Vec<Complex64>> = par::map(exec, &zs, |&z| {
        let spec: Vec<Complex64> = spectrum0
            .iter()
            .zip(&wp)
            .map(|(e, &w)| e * Complex64::from_polar(1.0, 0.5 * p.beta2_p * w * w * z))
            .collect();
        let pf = PumpFunction::new(&spec, pump_grid)?;
        sums.iter().map(|&s| pf.eval(s)).collect::<Result<Vec<_>>>()
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let phase_s: Vec<Vec<Complex64>> = zs
        .iter()
        .map(|&z| ks.iter().map(|&k| Complex64::from_polar(1.0, -k * z)).collect())
        .collect();
    let phase_i: Vec<Vec<Complex64>> = zs
        .iter()
        .map(|&z| ki.iter().map(|&k| Complex64::from_polar(1.0, -k * z)).collect())
        .collect();

    let (sa, ia) = frequency_axes(s_grid, i_grid);
    let measure = s_grid.d_omega() * i_grid.d_omega();
    let mut out = JointAmplitude::zeros(sa, ia, measure)?;
    let cols = out.cols();
    let weight = h / p.length;
    par::for_each_row(exec, out.data_mut(), cols, |j, row| {
        for m in 0..slices {
            let fm = &f_tables[m][j..j + cols];
            let a = phase_s[m][j] * weight;
            for ((z, f), b) in row.iter_mut().zip(fm).zip(&phase_i[m]) {
                *z += f * b * a;
            }
        }
        for (z, &k) in row.iter_mut().zip(&ki) {
            *z *= sinc(0.5 * (ks[j] + k) * h);
        }
    });
    Ok(out)
}
