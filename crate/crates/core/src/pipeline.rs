//! End-to-end probabilistic decomposition-synthesis estimate.

use serde::{Deserialize, Serialize};

use crate::error::{PdsError, Result};
use crate::montecarlo::ForcingModel;
use crate::rare::{
    eta_from, effective_measures_grid, rare_profiles_effective, rare_profiles_simulated, EffectiveMeasures,
    EtaDistribution, RareEventProfile, RareOptions,
};
use crate::spectra::FrequencyGrid;
use crate::statlin::{solve_fixed_point_with, FixedPointOptions, LinearizationSolution};
use crate::synthesis::{synthesize, Frame, ResponsePdf};
use crate::systems::{Quantity, SystemModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RareMethod {
    /// Direct impulse simulations of the full system.
    #[default]
    Simulated,
    /// Equivalent linear system from effective stiffness and damping.
    Effective,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PdsOptions {
    /// Spectral window; `None` uses the spectrum's default window.
    pub grid: Option<FrequencyGrid>,
    pub rare: RareOptions,
    pub method: RareMethod,
    pub fixed_point: FixedPointOptions,
}

#[derive(Debug, Clone)]
pub struct PdsEstimate {
    pub model: SystemModel,
    pub forcing: ForcingModel,
    pub lin: LinearizationSolution,
    pub eta: EtaDistribution,
    pub profiles: Vec<RareEventProfile>,
    pub measures: Option<EffectiveMeasures>,
}

/// Background linearization, η law and rare profiles for `quantities`.
pub fn estimate(
    model: &SystemModel,
    forcing: &ForcingModel,
    quantities: &[Quantity],
    opts: &PdsOptions,
) -> Result<PdsEstimate> {
    model.validate()?;
    forcing.validate()?;
    let grid = opts.grid.unwrap_or_else(|| forcing.spectrum.default_grid());
    let lin = solve_fixed_point_with(model, &forcing.spectrum, &grid, &opts.fixed_point)?;
    let eta = eta_from(forcing, &lin)?;
    let (profiles, measures) = match opts.method {
        RareMethod::Simulated => (rare_profiles_simulated(model, forcing, &eta, quantities, &opts.rare)?, None),
        RareMethod::Effective => {
            let m = effective_measures_grid(model, &eta, forcing.pattern, &opts.rare)?;
            (rare_profiles_effective(model, forcing, &eta, &m, quantities, &opts.rare)?, Some(m))
        }
    };
    Ok(PdsEstimate { model: *model, forcing: *forcing, lin, eta, profiles, measures })
}

impl PdsEstimate {
    pub fn profile(&self, q: Quantity) -> Option<&RareEventProfile> {
        self.profiles.iter().find(|p| p.quantity == q)
    }

    pub fn pdf(&self, q: Quantity, frame: Frame) -> Result<ResponsePdf> {
        let rare = self
            .profile(q)
            .ok_or_else(|| PdsError::InvalidModel(format!("no rare profile computed for {q}")))?;
        synthesize(&self.lin, Some(rare), q, frame)
    }
}
