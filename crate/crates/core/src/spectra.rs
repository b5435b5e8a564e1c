//! Background excitation spectrum and spectral integration.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PdsError, Result};
use crate::quadrature::{integrate_vec, QuadratureOptions};

/// Frequency-shifted Pierson–Moskowitz spectrum of the base displacement `h`.
///
/// `S(ω) = q ω'^-5 exp(-ω'^-4)` with `ω' = ω - shift`, and zero for `ω' <= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackgroundSpectrum {
    pub q: f64,
    #[serde(default = "default_shift")]
    pub shift: f64,
}

fn default_shift() -> f64 {
    1.0
}

/// Frequency at which the unshifted form `u^-5 exp(-u^-4)` peaks.
pub const PM_PEAK_OFFSET: f64 = 0.945_741_609_003_176_3; // (4/5)^(1/4)

impl BackgroundSpectrum {
    pub fn new(q: f64, shift: f64) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(PdsError::InvalidModel(format!("spectrum magnitude q must be positive, got {q}")));
        }
        if !(shift >= 0.0 && shift.is_finite()) {
            return Err(PdsError::InvalidModel(format!("spectrum shift must be >= 0, got {shift}")));
        }
        Ok(Self { q, shift })
    }

    pub fn density(&self, omega: f64) -> f64 {
        let u = omega - self.shift;
        if u <= 0.0 {
            return 0.0;
        }
        let u4 = (u * u) * (u * u);
        // exp underflows long before u^-5 overflows, so no special-casing is needed
        // beyond the guard below for tiny u.
        if u4 < 1e-3 {
            return 0.0;
        }
        self.q / (u4 * u) * (-1.0 / u4).exp()
    }

    pub fn peak_frequency(&self) -> f64 {
        self.shift + PM_PEAK_OFFSET
    }

    pub fn peak_density(&self) -> f64 {
        self.density(self.peak_frequency())
    }

    /// Default integration window `[shift + 1e-3, shift + 20]`.
    pub fn default_grid(&self) -> FrequencyGrid {
        FrequencyGrid::new(self.shift + 1e-3, self.shift + 20.0, 1e-8).expect("default window is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub omega_min: f64,
    pub omega_max: f64,
    /// Relative error bound of the quadrature.
    pub tolerance: f64,
    /// Boundary densities must be below `support_tol * peak`.
    #[serde(default = "default_support_tol")]
    pub support_tol: f64,
    #[serde(default = "default_max_intervals")]
    pub max_intervals: usize,
}

fn default_support_tol() -> f64 {
    1e-6
}

fn default_max_intervals() -> usize {
    4000
}

impl FrequencyGrid {
    pub fn new(omega_min: f64, omega_max: f64, tolerance: f64) -> Result<Self> {
        if !(omega_min > 0.0 && omega_max > omega_min && tolerance > 0.0) {
            return Err(PdsError::InvalidModel(format!(
                "frequency grid needs 0 < omega_min < omega_max and tolerance > 0 (got {omega_min}, {omega_max}, {tolerance})"
            )));
        }
        Ok(Self {
            omega_min,
            omega_max,
            tolerance,
            support_tol: default_support_tol(),
            max_intervals: default_max_intervals(),
        })
    }

    pub fn quadrature(&self) -> QuadratureOptions {
        QuadratureOptions { rel_tol: self.tolerance, abs_tol: 0.0, max_intervals: self.max_intervals }
    }

    /// Initial breakpoints: a few points clustered around the spectral peak.
    pub fn breakpoints(&self, spec: &BackgroundSpectrum) -> Vec<f64> {
        let p = spec.peak_frequency();
        [spec.shift + 0.3, spec.shift + 0.6, p, p + 0.5, p + 1.5, p + 4.0]
            .into_iter()
            .filter(|&w| w > self.omega_min && w < self.omega_max)
            .collect()
    }

    pub fn check_support(&self, spec: &BackgroundSpectrum) -> Result<()> {
        let limit = self.support_tol * spec.peak_density();
        let boundary = spec.density(self.omega_min).max(spec.density(self.omega_max));
        if boundary > limit {
            return Err(PdsError::SupportNotBracketed { boundary, limit });
        }
        Ok(())
    }
}

/// Variances of the base motion: displacement, velocity and acceleration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseMoments {
    pub displacement: f64,
    pub velocity: f64,
    pub acceleration: f64,
}

impl BaseMoments {
    pub fn sigma_h(&self) -> f64 {
        self.displacement.sqrt()
    }

    pub fn sigma_h_dot(&self) -> f64 {
        self.velocity.sqrt()
    }
}

/// Displacement, velocity (`ω² S`) and acceleration (`ω⁴ S`) variances of the base.
pub fn moment_integrals(spec: &BackgroundSpectrum, grid: &FrequencyGrid) -> Result<BaseMoments> {
    grid.check_support(spec)?;
    let v = integrate_vec(
        |w| {
            let s = spec.density(w);
            let w2 = w * w;
            [s, w2 * s, w2 * w2 * s]
        },
        grid.omega_min,
        grid.omega_max,
        &grid.breakpoints(spec),
        &grid.quadrature(),
    )?;
    Ok(BaseMoments { displacement: v[0], velocity: v[1], acceleration: v[2] })
}

/// Integrates the real part of a (cross-)spectral density over the grid window.
pub fn integrate_cross_spectrum<F>(f: F, grid: &FrequencyGrid) -> Result<f64>
where
    F: Fn(f64) -> Complex64,
{
    integrate_vec(|w| [f(w).re], grid.omega_min, grid.omega_max, &[], &grid.quadrature()).map(|v| v[0])
}
