//! Fibre parameters in the pump's moving frame, and the shipped presets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dispersion and nonlinearity of a fibre around an exactly phase-matched
/// (pump, signal, idler) triple.
///
/// `beta1_s` and `beta1_i` are inverse group velocities relative to the pump
/// (`β₁ₘ − β₁ₚ`), so a positive value means the photon lags the pump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberParams {
    pub length: f64,
    pub beta1_s: f64,
    pub beta1_i: f64,
    pub beta2_p: f64,
    pub beta2_s: f64,
    pub beta2_i: f64,
    pub gamma_p: f64,
    pub gamma_s: f64,
    pub gamma_i: f64,
    pub lambda_p0: f64,
    pub lambda_s0: f64,
    pub lambda_i0: f64,
}

/// Relative tolerance on `2/λp − 1/λs − 1/λi = 0`.
pub const ENERGY_CONSERVATION_TOLERANCE: f64 = 1e-6;

impl FiberParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.length,
            self.beta1_s,
            self.beta1_i,
            self.beta2_p,
            self.beta2_s,
            self.beta2_i,
            self.gamma_p,
            self.gamma_s,
            self.gamma_i,
            self.lambda_p0,
            self.lambda_s0,
            self.lambda_i0,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(Error::Config("fibre parameters must be finite".into()));
        }
        if self.length <= 0.0 {
            return Err(Error::Config(format!("fibre length must be positive, got {}", self.length)));
        }
        if self.gamma_p <= 0.0 || self.gamma_s < 0.0 || self.gamma_i < 0.0 {
            return Err(Error::Config(
                "need gamma_p > 0 and non-negative gamma_s, gamma_i".into(),
            ));
        }
        if self.lambda_p0 <= 0.0 || self.lambda_s0 <= 0.0 || self.lambda_i0 <= 0.0 {
            return Err(Error::Config("central wavelengths must be positive".into()));
        }
        let mismatch = 2.0 / self.lambda_p0 - 1.0 / self.lambda_s0 - 1.0 / self.lambda_i0;
        if mismatch.abs() > ENERGY_CONSERVATION_TOLERANCE * 2.0 / self.lambda_p0 {
            return Err(Error::Config(format!(
                "wavelengths violate energy conservation: 2/λp − 1/λs − 1/λi = {mismatch:.3e} m⁻¹"
            )));
        }
        Ok(())
    }

    /// Largest relative walk-off, `max(|β₁ₛ|, |β₁ᵢ|)`.
    pub fn max_walkoff(&self) -> f64 {
        self.beta1_s.abs().max(self.beta1_i.abs())
    }

    /// `|β₁ₛ − β₁ᵢ|`, the signal–idler walk-off rate.
    pub fn differential_walkoff(&self) -> f64 {
        (self.beta1_s - self.beta1_i).abs()
    }

    /// Phase-matching bandwidth `2π/(max|β₁|·L)` in rad/s.
    pub fn phase_matching_bandwidth(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.max_walkoff() * self.length)
    }

    pub fn with_length(mut self, length: f64) -> Self {
        self.length = length;
        self
    }

    /// Copy with all group-velocity dispersions set to zero.
    pub fn without_dispersion(mut self) -> Self {
        self.beta2_p = 0.0;
        self.beta2_s = 0.0;
        self.beta2_i = 0.0;
        self
    }

    /// Copy with every β₂ multiplied by `factor`.
    pub fn scale_dispersion(mut self, factor: f64) -> Self {
        self.beta2_p *= factor;
        self.beta2_s *= factor;
        self.beta2_i *= factor;
        self
    }
}

/// Idler wavelength fixed by energy conservation, `1/λi = 2/λp − 1/λs`.
pub fn conjugate_wavelength(lambda_p0: f64, lambda_s0: f64) -> f64 {
    1.0 / (2.0 / lambda_p0 - 1.0 / lambda_s0)
}

/// Builder for birefringent phase matching: signal and idler are polarised
/// orthogonally to the pump, so their nonlinear coefficients are
/// `γₘ = γₚ·(ωₘ/ωₚ)/3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Birefringent {
    pub length: f64,
    pub beta1_s: f64,
    pub beta1_i: f64,
    pub beta2_p: f64,
    pub beta2_s: f64,
    pub beta2_i: f64,
    pub gamma_p: f64,
    pub lambda_p0: f64,
    pub lambda_s0: f64,
}

impl Birefringent {
    pub fn build(&self) -> Result<FiberParams> {
        let lambda_i0 = conjugate_wavelength(self.lambda_p0, self.lambda_s0);
        if !(lambda_i0.is_finite() && lambda_i0 > 0.0) {
            return Err(Error::Config(format!(
                "no positive idler wavelength for λp = {:e}, λs = {:e}",
                self.lambda_p0, self.lambda_s0
            )));
        }
        let p = FiberParams {
            length: self.length,
            beta1_s: self.beta1_s,
            beta1_i: self.beta1_i,
            beta2_p: self.beta2_p,
            beta2_s: self.beta2_s,
            beta2_i: self.beta2_i,
            gamma_p: self.gamma_p,
            gamma_s: self.gamma_p * (self.lambda_p0 / self.lambda_s0) / 3.0,
            gamma_i: self.gamma_p * (self.lambda_p0 / lambda_i0) / 3.0,
            lambda_p0: self.lambda_p0,
            lambda_s0: self.lambda_s0,
            lambda_i0,
        };
        p.validate()?;
        Ok(p)
    }
}

/// Placeholder pump nonlinearity for the presets, W⁻¹m⁻¹.
///
/// Only the generation rate R is controlled in every study, and the pump
/// power is solved from R, so purities do not depend on this value.
pub const PRESET_GAMMA_P: f64 = 0.1;

/// Bumped whenever a preset's numbers change.
pub const PRESET_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberPreset {
    pub name: &'static str,
    pub version: u32,
    pub description: &'static str,
    pub params: FiberParams,
}

pub fn presets() -> Vec<FiberPreset> {
    vec![fiber_a_726(), fiber_b_1064()]
}

pub fn preset(name: &str) -> Result<FiberPreset> {
    presets()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| {
            let known: Vec<_> = presets().iter().map(|p| p.name).collect();
            Error::Config(format!("unknown preset {name:?}; known: {}", known.join(", ")))
        })
}

/// Birefringent PCF pumped at 726 nm, idler (864 nm) group-velocity matched,
/// signal at 626 nm walking off. Normal dispersion at the pump.
pub fn fiber_a_726() -> FiberPreset {
    let params = Birefringent {
        length: 0.5,
        beta1_s: 1.14e-11,
        beta1_i: 0.0,
        beta2_p: 2.1e-26,
        beta2_s: 3.6e-26,
        beta2_i: -1.3e-26,
        gamma_p: PRESET_GAMMA_P,
        lambda_p0: 726e-9,
        lambda_s0: 626e-9,
    }
    .build()
    .expect("fiberA-726 preset is consistent");
    FiberPreset {
        name: "fiberA-726",
        version: PRESET_VERSION,
        description: "726 nm pump, 626 nm signal, 864 nm idler (idler GV-matched); placeholder gamma_p",
        params,
    }
}

/// Birefringent PCF pumped at 1064 nm in anomalous dispersion, signal
/// (810 nm) group-velocity matched, idler at 1550 nm walking off.
pub fn fiber_b_1064() -> FiberPreset {
    let params = Birefringent {
        length: 0.5,
        beta1_s: 0.0,
        beta1_i: 1.2e-11,
        beta2_p: -8.7e-27,
        beta2_s: 1.0e-26,
        beta2_i: -6.4e-26,
        gamma_p: PRESET_GAMMA_P,
        lambda_p0: 1064e-9,
        lambda_s0: 810e-9,
    }
    .build()
    .expect("fiberB-1064 preset is consistent");
    FiberPreset {
        name: "fiberB-1064",
        version: PRESET_VERSION,
        description: "1064 nm pump, 810 nm signal (GV-matched), 1550 nm idler; placeholder gamma_p",
        params,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn presets_validate_and_keep_nominal_wavelengths() {
        let a = fiber_a_726().params;
        assert_relative_eq!(a.lambda_i0, 864e-9, max_relative = 1e-4);
        let b = fiber_b_1064().params;
        assert_relative_eq!(b.lambda_i0, 1550e-9, max_relative = 1e-4);
        for p in presets() {
            p.params.validate().unwrap();
        }
    }

    #[test]
    fn cross_polarised_gamma_rule() {
        let a = fiber_a_726().params;
        let wp = 1.0 / a.lambda_p0;
        assert_relative_eq!(a.gamma_s, a.gamma_p * (1.0 / a.lambda_s0) / wp / 3.0, max_relative = 1e-14);
        assert_relative_eq!(a.gamma_i, a.gamma_p * (1.0 / a.lambda_i0) / wp / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn rejects_energy_violation_and_bad_length() {
        let mut p = fiber_a_726().params;
        p.lambda_i0 = 864e-9;
        assert!(matches!(p.validate(), Err(Error::Config(_))));
        let mut q = fiber_a_726().params;
        q.length = 0.0;
        assert!(q.validate().is_err());
        let mut r = fiber_a_726().params;
        r.gamma_p = 0.0;
        assert!(r.validate().is_err());
    }

    #[test]
    fn unknown_preset() {
        assert!(preset("nope").is_err());
        assert_eq!(preset("fiberB-1064").unwrap().params.beta1_i, 1.2e-11);
    }
}
