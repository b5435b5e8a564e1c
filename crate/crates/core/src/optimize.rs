//! Attachment design by grid search on fourth-moment suppression measures.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PdsError, Result};
use crate::montecarlo::ForcingModel;
use crate::pipeline::{estimate, PdsOptions};
use crate::statlin::solve_fixed_point_with;
use crate::synthesis::Frame;
use crate::systems::{Attachment, Dof, PiecewiseSpring, Quantity, SpringLaw, SystemModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize, spacing: Spacing) -> Result<Self> {
        let a = Self { min, max, count, spacing };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.count >= 2
            && self.max > self.min
            && self.min >= 0.0
            && self.max.is_finite()
            && (self.spacing == Spacing::Linear || self.min > 0.0);
        if ok {
            Ok(())
        } else {
            Err(PdsError::InvalidModel(format!("invalid design axis {self:?}")))
        }
    }

    /// Ascending node values.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let s = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.min + s * (self.max - self.min),
                    Spacing::Log => (self.min.ln() + s * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Linear spring: search over `(λ_a, k_a)`.
    Tmd,
    /// Pure cubic spring: search over `(λ_a, c_a)`.
    CubicNes,
}

/// Objective quantity and order; measured on the absolute-frame PDF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub quantity: Quantity,
    #[serde(default = "default_order")]
    pub order: u32,
}

fn default_order() -> u32 {
    4
}

impl Objective {
    pub fn fourth_moment(quantity: Quantity) -> Self {
        Self { quantity, order: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignGrid {
    /// First axis (attachment damping, or `α₁` for the piecewise search).
    pub first: Axis,
    /// Second axis (stiffness, cubic coefficient, or `α₋₁`).
    pub second: Axis,
    pub objective: Objective,
}

impl DesignGrid {
    /// 41 x 41 log grid over `λ_a ∈ [1e-3, 1]` and `k_a` or `c_a ∈ [1e-3, 10]`.
    pub fn default_attachment(objective: Objective) -> Self {
        Self {
            first: Axis { min: 1e-3, max: 1.0, count: 41, spacing: Spacing::Log },
            second: Axis { min: 1e-3, max: 10.0, count: 41, spacing: Spacing::Log },
            objective,
        }
    }

    /// 51 x 51 linear grid over `(α₁, α₋₁) ∈ [0, 5]²`.
    pub fn default_piecewise(objective: Objective) -> Self {
        Self {
            first: Axis { min: 0.0, max: 5.0, count: 51, spacing: Spacing::Linear },
            second: Axis { min: 0.0, max: 5.0, count: 51, spacing: Spacing::Linear },
            objective,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    /// `surface[i][j]` at `(first[i], second[j])`; `None` marks a failed cell.
    pub surface: Vec<Vec<Option<f64>>>,
    /// Objective of the reference design (no attachment, or the optimal TMD).
    pub baseline: f64,
    pub argmin: (usize, usize),
    /// Minimum objective over the baseline.
    pub ratio: f64,
    pub best: Attachment,
}

impl OptimizationResult {
    pub fn best_value(&self) -> f64 {
        self.surface[self.argmin.0][self.argmin.1].unwrap()
    }

    pub fn best_params(&self) -> (f64, f64) {
        (self.first[self.argmin.0], self.second[self.argmin.1])
    }

    /// Ratio of every evaluated cell to the baseline.
    pub fn ratio_at(&self, i: usize, j: usize) -> Option<f64> {
        self.surface[i][j].map(|v| v / self.baseline)
    }
}

/// `∫ ẑ^k p_ẑ(r) dr` of the absolute-frame PDS density of the objective quantity.
pub fn objective(model: &SystemModel, forcing: &ForcingModel, obj: &Objective, opts: &PdsOptions) -> Result<f64> {
    let est = estimate(model, forcing, &[obj.quantity], opts)?;
    Ok(est.pdf(obj.quantity, Frame::Absolute)?.moment(obj.order))
}

fn attachment_for(family: Family, mass: f64, damping: f64, stiffness: f64) -> Attachment {
    match family {
        Family::Tmd => Attachment::tmd(mass, damping, stiffness),
        Family::CubicNes => Attachment::cubic_nes(mass, damping, stiffness),
    }
}

/// Evaluates `make(first, second)` on every cell and picks the smallest value,
/// ties going to the smaller first then second parameter.
fn search<F>(base: &SystemModel, forcing: &ForcingModel, grid: &DesignGrid, opts: &PdsOptions, baseline: f64, make: F) -> Result<OptimizationResult>
where
    F: Fn(f64, f64) -> Result<Attachment> + Sync,
{
    grid.first.validate()?;
    grid.second.validate()?;
    let first = grid.first.values();
    let second = grid.second.values();
    let cells: Vec<(usize, usize)> = (0..first.len()).flat_map(|i| (0..second.len()).map(move |j| (i, j))).collect();
    let values: Vec<Option<f64>> = cells
        .par_iter()
        .map(|&(i, j)| {
            let att = make(first[i], second[j]).ok()?;
            objective(&base.with_attachment(Some(att)), forcing, &grid.objective, opts).ok().filter(|v| v.is_finite())
        })
        .collect();
    let mut surface = vec![vec![None; second.len()]; first.len()];
    let mut best: Option<((usize, usize), f64)> = None;
    for (&(i, j), v) in cells.iter().zip(values) {
        surface[i][j] = v;
        if let Some(v) = v {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some(((i, j), v));
            }
        }
    }
    let ((i, j), v) = best.ok_or(PdsError::AllCellsFailed)?;
    Ok(OptimizationResult {
        best: make(first[i], second[j])?,
        first,
        second,
        surface,
        baseline,
        argmin: (i, j),
        ratio: v / baseline,
    })
}

/// Objective of `base` without any attachment.
pub fn baseline_objective(base: &SystemModel, forcing: &ForcingModel, obj: &Objective, opts: &PdsOptions) -> Result<f64> {
    objective(&base.with_attachment(None), forcing, obj, opts)
}

/// Grid search over attachment damping and stiffness; the ratio is `γ`.
pub fn grid_search(
    base: &SystemModel,
    forcing: &ForcingModel,
    grid: &DesignGrid,
    family: Family,
    attachment_mass: f64,
    opts: &PdsOptions,
) -> Result<OptimizationResult> {
    let baseline = baseline_objective(base, forcing, &grid.objective, opts)?;
    search(base, forcing, grid, opts, baseline, |l, k| Ok(attachment_for(family, attachment_mass, l, k)))
}

/// One 2x zoom of both axes around the optimum of a previous search.
pub fn refine(
    base: &SystemModel,
    forcing: &ForcingModel,
    previous: &OptimizationResult,
    grid: &DesignGrid,
    family: Family,
    attachment_mass: f64,
    opts: &PdsOptions,
) -> Result<OptimizationResult> {
    let zoom = |axis: &Axis, values: &[f64], k: usize| -> Axis {
        let lo = values[k.saturating_sub(1)];
        let hi = values[(k + 1).min(values.len() - 1)];
        Axis { min: lo, max: hi, count: axis.count, spacing: axis.spacing }
    };
    let g = DesignGrid {
        first: zoom(&grid.first, &previous.first, previous.argmin.0),
        second: zoom(&grid.second, &previous.second, previous.argmin.1),
        objective: grid.objective,
    };
    search(base, forcing, &g, opts, previous.baseline, |l, k| Ok(attachment_for(family, attachment_mass, l, k)))
}

/// Standard deviation of the attachment stroke under the given (linear) attachment.
pub fn stroke_sigma(model: &SystemModel, forcing: &ForcingModel, opts: &PdsOptions) -> Result<f64> {
    let grid = opts.grid.unwrap_or_else(|| forcing.spectrum.default_grid());
    let lin = solve_fixed_point_with(model, &forcing.spectrum, &grid, &opts.fixed_point)?;
    let var = lin.moments.stroke_var();
    if !(var > 0.0) {
        return Err(PdsError::NegativeVariance(var));
    }
    Ok(var.sqrt())
}

/// Piecewise-spring reference: optimal TMD and the spring parameters derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseReference {
    pub tmd: Attachment,
    pub k_o: f64,
    pub sigma_zeta: f64,
}

impl PiecewiseReference {
    pub fn from_tmd(base: &SystemModel, forcing: &ForcingModel, tmd: Attachment, opts: &PdsOptions) -> Result<Self> {
        let SpringLaw::Linear { k } = tmd.spring else {
            return Err(PdsError::InvalidModel("piecewise reference needs a linear (TMD) attachment".into()));
        };
        let sigma_zeta = stroke_sigma(&base.with_attachment(Some(tmd)), forcing, opts)?;
        Ok(Self { tmd, k_o: k, sigma_zeta })
    }

    pub fn spring(&self, alpha_pos: f64, alpha_neg: f64) -> Result<PiecewiseSpring> {
        PiecewiseSpring::new(self.k_o, alpha_pos, alpha_neg, self.sigma_zeta)
    }

    pub fn attachment(&self, alpha_pos: f64, alpha_neg: f64) -> Result<Attachment> {
        Ok(Attachment { mass: self.tmd.mass, damping: self.tmd.damping, spring: SpringLaw::Piecewise(self.spring(alpha_pos, alpha_neg)?) })
    }
}

/// Search over the outer slopes `(α₁, α₋₁)`; the ratio is `γ′` against the optimal TMD.
pub fn design_piecewise(
    base: &SystemModel,
    forcing: &ForcingModel,
    reference: &PiecewiseReference,
    grid: &DesignGrid,
    opts: &PdsOptions,
) -> Result<OptimizationResult> {
    let baseline = objective(&base.with_attachment(Some(reference.tmd)), forcing, &grid.objective, opts)?;
    search(base, forcing, grid, opts, baseline, |a1, a2| reference.attachment(a1, a2))
}

/// Default objective DOF: the seat.
pub fn seat_displacement() -> Objective {
    Objective::fourth_moment(Quantity::displacement(Dof::Seat))
}

pub fn seat_velocity() -> Objective {
    Objective::fourth_moment(Quantity::velocity(Dof::Seat))
}
