//! Total-probability synthesis of the background Gaussian and the rare-event
//! density, in relative or absolute coordinates.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{PdsError, Result};
use crate::histogram::Histogram;
use crate::rare::RareEventProfile;
use crate::statlin::LinearizationSolution;
use crate::systems::Quantity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// Motion relative to the hull.
    Relative,
    /// Relative motion plus the base motion of the same derivative order.
    Absolute,
}

pub const GRID_POINTS: usize = 2001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponsePdf {
    pub quantity: Quantity,
    pub frame: Frame,
    /// Symmetric grid of cell centres.
    pub values: Vec<f64>,
    /// Cell-averaged mixture density.
    pub density: Vec<f64>,
    /// `(1 − P_r)` times the Gaussian cell averages.
    pub background: Vec<f64>,
    /// `P_r` times the rare density.
    pub rare: Vec<f64>,
    pub probability: f64,
    /// Background standard deviation in this frame.
    pub sigma: f64,
    /// Rare-event density before weighting (absent when `P_r = 0`).
    pub rare_density: Option<Histogram>,
}

/// Background standard deviation of `q` in the requested frame.
pub fn background_sigma(lin: &LinearizationSolution, q: Quantity, frame: Frame) -> Result<f64> {
    let var = match frame {
        Frame::Relative => lin.variance(q),
        Frame::Absolute => lin.absolute_variance(q),
    }
    .ok_or_else(|| PdsError::InvalidModel(format!("quantity {q} is not part of the model")))?;
    if !(var > 0.0) {
        return Err(PdsError::NegativeVariance(var));
    }
    Ok(var.sqrt())
}

/// Absolute-frame background law `N(0, σ_z² + σ_h² + 2σ_zh)`; returns its standard deviation.
pub fn absolute_background(lin: &LinearizationSolution, q: Quantity) -> Result<f64> {
    background_sigma(lin, q, Frame::Absolute)
}

/// Mixture of `N(0, σ²)` with weight `1 − P_r` and the rare density with weight `P_r`.
pub fn synthesize_parts(
    quantity: Quantity,
    frame: Frame,
    sigma: f64,
    rare: Option<&RareEventProfile>,
) -> Result<ResponsePdf> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(PdsError::NegativeVariance(sigma * sigma));
    }
    let p = rare.map(|r| r.probability).unwrap_or(0.0);
    if !(0.0..1.0).contains(&p) {
        return Err(PdsError::PrOutOfRange(p));
    }
    let support = rare.map(|r| r.density.hi.max(-r.density.lo)).unwrap_or(0.0);
    let extent = (8.0 * sigma).max(1.1 * support);
    let h = 2.0 * extent / (GRID_POINTS - 1) as f64;
    let values: Vec<f64> = (0..GRID_POINTS).map(|i| -extent + i as f64 * h).collect();
    let normal = Normal::new(0.0, sigma).expect("positive sigma");
    let background: Vec<f64> = values
        .iter()
        .map(|&x| (1.0 - p) * (normal.cdf(x + 0.5 * h) - normal.cdf(x - 0.5 * h)) / h)
        .collect();
    let rare_cells = match rare {
        Some(r) => {
            let mut cells = Histogram::zeros(-extent - 0.5 * h, extent + 0.5 * h, GRID_POINTS);
            r.density.rebin_into(&mut cells, p);
            if (cells.mass() - p * r.density.mass()).abs() > 1e-9 {
                return Err(PdsError::GridMismatch(format!("rare support of {quantity} does not fit the output grid")));
            }
            cells.density
        }
        None => vec![0.0; GRID_POINTS],
    };
    let density = background.iter().zip(&rare_cells).map(|(a, b)| a + b).collect();
    Ok(ResponsePdf {
        quantity,
        frame,
        values,
        density,
        background,
        rare: rare_cells,
        probability: p,
        sigma,
        rare_density: rare.map(|r| r.density.clone()),
    })
}

/// Full response PDF of `quantity`. The rare component is frame independent.
pub fn synthesize(
    lin: &LinearizationSolution,
    rare: Option<&RareEventProfile>,
    quantity: Quantity,
    frame: Frame,
) -> Result<ResponsePdf> {
    if let Some(r) = rare {
        if r.quantity != quantity {
            return Err(PdsError::GridMismatch(format!("rare profile of {} used for {quantity}", r.quantity)));
        }
    }
    synthesize_parts(quantity, frame, background_sigma(lin, quantity, frame)?, rare)
}

fn double_factorial_odd(k: u32) -> f64 {
    (1..k).step_by(2).map(f64::from).product()
}

impl ResponsePdf {
    pub fn cell_width(&self) -> f64 {
        self.values[1] - self.values[0]
    }

    pub fn log10_density(&self) -> Vec<f64> {
        self.density.iter().map(|d| d.log10()).collect()
    }

    /// Grid mass of the density.
    pub fn mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.cell_width()
    }

    /// `∫ r^k p(r) dr`: Gaussian part in closed form, rare part exactly per bin.
    pub fn moment(&self, order: u32) -> f64 {
        let gauss = if order % 2 == 1 { 0.0 } else { self.sigma.powi(order as i32) * double_factorial_odd(order) };
        let rare = self.rare_density.as_ref().map(|h| h.moment(order as i32)).unwrap_or(0.0);
        (1.0 - self.probability) * gauss + self.probability * rare
    }

    /// Midpoint-rule moment over the output grid.
    pub fn grid_moment(&self, order: u32) -> f64 {
        let h = self.cell_width();
        self.values.iter().zip(&self.density).map(|(x, d)| x.powi(order as i32) * d).sum::<f64>() * h
    }

    /// `P(|z| > x)` from the component laws.
    pub fn exceedance(&self, x: f64) -> f64 {
        let normal = Normal::new(0.0, self.sigma).expect("positive sigma");
        let gauss = 2.0 * normal.sf(x.max(0.0));
        let rare = self.rare_density.as_ref().map(|h| h.tail_mass(x.max(0.0))).unwrap_or(0.0);
        (1.0 - self.probability) * gauss + self.probability * rare
    }

    /// Probability of `[a, b]` from the component laws.
    pub fn interval_mass(&self, a: f64, b: f64) -> f64 {
        let normal = Normal::new(0.0, self.sigma).expect("positive sigma");
        let gauss = normal.cdf(b) - normal.cdf(a);
        let rare = self.rare_density.as_ref().map(|h| h.interval_mass(a, b)).unwrap_or(0.0);
        (1.0 - self.probability) * gauss + self.probability * rare
    }

    /// Amplitude exceeded with probability `p` (two-sided).
    pub fn exceedance_level(&self, p: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, *self.values.last().unwrap());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.exceedance(mid) > p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}
