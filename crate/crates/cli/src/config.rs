//! Run configuration. TOML or JSON; unknown keys are rejected at every level.

use std::path::Path;

use pds_core::montecarlo::MonteCarloOptions;
use pds_core::optimize::{Axis, DesignGrid, Family, Objective, Spacing};
use pds_core::rare::RareOptions;
use pds_core::systems::PiecewiseSpring;
use pds_core::{
    Attachment, BackgroundSpectrum, ForcingModel, Frame, FrequencyGrid, ImpulsePattern, Oscillator, PdsOptions,
    Quantity, RareMethod, SpringLaw, SystemModel,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub system: SystemConfig,
    pub forcing: ForcingConfig,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub pds: PdsConfig,
    #[serde(default)]
    pub montecarlo: McConfig,
    #[serde(default)]
    pub optimize: Option<OptimizeConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    Seat,
    DeckSeat,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorConfig {
    pub mass: f64,
    pub damping: f64,
    pub stiffness: f64,
}

impl From<OscillatorConfig> for Oscillator {
    fn from(o: OscillatorConfig) -> Self {
        Oscillator::new(o.mass, o.damping, o.stiffness)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpringConfig {
    Linear { k: f64 },
    Cubic {
        #[serde(default)]
        k: f64,
        c: f64,
    },
    /// Knee half-width given directly (`delta`) or as `4 sigma_zeta`.
    Piecewise {
        k_o: f64,
        alpha_pos: f64,
        alpha_neg: f64,
        #[serde(default)]
        delta: Option<f64>,
        #[serde(default)]
        sigma_zeta: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttachmentConfig {
    pub mass: f64,
    pub damping: f64,
    pub spring: SpringConfig,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub topology: TopologyKind,
    pub seat: OscillatorConfig,
    #[serde(default)]
    pub deck: Option<OscillatorConfig>,
    #[serde(default)]
    pub attachment: Option<AttachmentConfig>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingConfig {
    pub q: f64,
    #[serde(default = "one")]
    pub shift: f64,
    pub t_alpha: f64,
    /// Impulse mean; exclusive with `beta`.
    #[serde(default)]
    pub mu_alpha: Option<f64>,
    /// Impulse mean in units of the background velocity standard deviation.
    #[serde(default)]
    pub beta: Option<f64>,
    pub sigma_alpha: f64,
    #[serde(default)]
    pub pattern: ImpulsePattern,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub omega_min: f64,
    pub omega_max: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_tolerance() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdsConfig {
    #[serde(default)]
    pub method: RareMethod,
    /// Defaults to every quantity of the model.
    #[serde(default)]
    pub quantities: Option<Vec<Quantity>>,
    #[serde(default = "both_frames")]
    pub frames: Vec<Frame>,
    #[serde(default)]
    pub eta_nodes: Option<usize>,
    #[serde(default)]
    pub eta_span: Option<f64>,
    #[serde(default)]
    pub rho_c: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub cap: Option<f64>,
    #[serde(default)]
    pub effective_nodes: Option<usize>,
}

fn both_frames() -> Vec<Frame> {
    vec![Frame::Relative, Frame::Absolute]
}

impl Default for PdsConfig {
    fn default() -> Self {
        Self {
            method: RareMethod::default(),
            quantities: None,
            frames: both_frames(),
            eta_nodes: None,
            eta_span: None,
            rho_c: None,
            dt: None,
            cap: None,
            effective_nodes: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    #[serde(default = "default_impulses")]
    pub impulses: usize,
    #[serde(default)]
    pub duration: Option<f64>,
    #[serde(default)]
    pub trim: Option<f64>,
    #[serde(default = "default_sample_dt")]
    pub sample_dt: f64,
    /// Histogram bin width in background standard deviations.
    #[serde(default = "default_bin_fraction")]
    pub bin_fraction: f64,
    #[serde(default = "default_min_count")]
    pub min_count: u64,
    /// Largest accepted log10 density discrepancy.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_realizations() -> usize {
    10
}
fn default_impulses() -> usize {
    100
}
fn default_sample_dt() -> f64 {
    0.05
}
fn default_bin_fraction() -> f64 {
    0.25
}
fn default_min_count() -> u64 {
    50
}
fn default_threshold() -> f64 {
    0.5
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            realizations: default_realizations(),
            impulses: default_impulses(),
            duration: None,
            trim: None,
            sample_dt: default_sample_dt(),
            bin_fraction: default_bin_fraction(),
            min_count: default_min_count(),
            threshold: default_threshold(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignFamily {
    Tmd,
    CubicNes,
    /// Asymmetric piecewise spring around a reference TMD.
    Piecewise,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceTmd {
    pub damping: f64,
    pub k: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    pub family: DesignFamily,
    #[serde(default = "default_attachment_mass")]
    pub attachment_mass: f64,
    #[serde(default = "seat_x")]
    pub objective: Quantity,
    #[serde(default = "default_order")]
    pub order: u32,
    #[serde(default)]
    pub first: Option<AxisConfig>,
    #[serde(default)]
    pub second: Option<AxisConfig>,
    #[serde(default)]
    pub refine: bool,
    /// Piecewise only: reference TMD. Without it a TMD search runs first.
    #[serde(default)]
    pub reference: Option<ReferenceTmd>,
}

fn default_attachment_mass() -> f64 {
    0.05
}
fn seat_x() -> Quantity {
    Quantity::displacement(pds_core::Dof::Seat)
}
fn default_order() -> u32 {
    4
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Option<Spacing>,
}

impl Config {
    /// Parses TOML, or JSON when the file ends in `.json`.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")))
    }

    pub fn parse(text: &str, json: bool) -> Result<Self, CliError> {
        let cfg: Config = if json {
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?
        };
        Ok(cfg)
    }

    pub fn model(&self) -> Result<SystemModel, CliError> {
        let s = &self.system;
        let attachment = s.attachment.map(|a| a.build()).transpose()?;
        let model = match (s.topology, s.deck) {
            (TopologyKind::Seat, None) => SystemModel::seat(s.seat.into(), attachment)?,
            (TopologyKind::DeckSeat, Some(deck)) => SystemModel::deck_seat(deck.into(), s.seat.into(), attachment)?,
            (TopologyKind::Seat, Some(_)) => return Err(CliError::Config("a seat system takes no [system.deck]".into())),
            (TopologyKind::DeckSeat, None) => return Err(CliError::Config("a deck_seat system needs [system.deck]".into())),
        };
        Ok(model)
    }

    pub fn frequency_grid(&self) -> Result<FrequencyGrid, CliError> {
        let spectrum = self.spectrum()?;
        Ok(match self.grid {
            Some(g) => FrequencyGrid::new(g.omega_min, g.omega_max, g.tolerance)?,
            None => spectrum.default_grid(),
        })
    }

    pub fn spectrum(&self) -> Result<BackgroundSpectrum, CliError> {
        Ok(BackgroundSpectrum::new(self.forcing.q, self.forcing.shift)?)
    }

    pub fn forcing(&self) -> Result<ForcingModel, CliError> {
        let f = &self.forcing;
        let spectrum = self.spectrum()?;
        match (f.mu_alpha, f.beta) {
            (Some(mu), None) => Ok(ForcingModel::new(spectrum, f.t_alpha, mu, f.sigma_alpha, f.pattern)?),
            (None, Some(beta)) => Ok(ForcingModel::from_severity(
                spectrum,
                &self.frequency_grid()?,
                f.t_alpha,
                beta,
                f.sigma_alpha,
                f.pattern,
            )?),
            _ => Err(CliError::Config("[forcing] needs exactly one of mu_alpha and beta".into())),
        }
    }

    pub fn pds_options(&self) -> Result<PdsOptions, CliError> {
        self.pds_options_from(RareOptions::default())
    }

    /// Like [`Config::pds_options`], with unset `[pds]` keys taken from `d`.
    pub fn pds_options_from(&self, d: RareOptions) -> Result<PdsOptions, CliError> {
        let p = &self.pds;
        let rare = RareOptions {
            eta_nodes: p.eta_nodes.unwrap_or(d.eta_nodes),
            eta_span: p.eta_span.unwrap_or(d.eta_span),
            rho_c: p.rho_c.unwrap_or(d.rho_c),
            dt: p.dt.unwrap_or(d.dt),
            cap: p.cap.or(d.cap),
            effective_nodes: p.effective_nodes.unwrap_or(d.effective_nodes),
            ..d
        };
        if rare.eta_nodes == 0 || !(rare.rho_c > 0.0 && rare.rho_c < 1.0) || !(rare.dt > 0.0) || !(rare.eta_span > 0.0) {
            return Err(CliError::Config("[pds] needs eta_nodes > 0, eta_span > 0, 0 < rho_c < 1 and dt > 0".into()));
        }
        Ok(PdsOptions { grid: Some(self.frequency_grid()?), rare, method: p.method, ..PdsOptions::default() })
    }

    pub fn quantities(&self, model: &SystemModel) -> Result<Vec<Quantity>, CliError> {
        let all = model.quantities();
        match &self.pds.quantities {
            None => Ok(all),
            Some(qs) => {
                if let Some(bad) = qs.iter().find(|q| !all.contains(q)) {
                    return Err(CliError::Config(format!("quantity {bad} is not part of this system")));
                }
                Ok(qs.clone())
            }
        }
    }

    pub fn mc_options(&self, seed: u64) -> MonteCarloOptions {
        let m = &self.montecarlo;
        MonteCarloOptions {
            realizations: m.realizations,
            impulses: m.impulses,
            duration: m.duration,
            trim: m.trim,
            sample_dt: m.sample_dt,
            seed,
            ..MonteCarloOptions::default()
        }
    }
}

impl AttachmentConfig {
    fn build(&self) -> Result<Attachment, CliError> {
        let spring = match self.spring {
            SpringConfig::Linear { k } => SpringLaw::Linear { k },
            SpringConfig::Cubic { k, c } => SpringLaw::Cubic { k, c },
            SpringConfig::Piecewise { k_o, alpha_pos, alpha_neg, delta, sigma_zeta } => {
                SpringLaw::Piecewise(match (delta, sigma_zeta) {
                    (Some(d), None) => PiecewiseSpring::with_delta(k_o, alpha_pos, alpha_neg, d)?,
                    (None, Some(s)) => PiecewiseSpring::new(k_o, alpha_pos, alpha_neg, s)?,
                    _ => return Err(CliError::Config("piecewise spring needs exactly one of delta and sigma_zeta".into())),
                })
            }
        };
        Ok(Attachment { mass: self.mass, damping: self.damping, spring })
    }
}

impl OptimizeConfig {
    pub fn objective(&self) -> Objective {
        Objective { quantity: self.objective, order: self.order }
    }

    pub fn family(&self) -> Option<Family> {
        match self.family {
            DesignFamily::Tmd => Some(Family::Tmd),
            DesignFamily::CubicNes => Some(Family::CubicNes),
            DesignFamily::Piecewise => None,
        }
    }

    /// Default axes for the family, overridden field by field.
    pub fn design_grid(&self) -> Result<DesignGrid, CliError> {
        let mut g = match self.family {
            DesignFamily::Piecewise => DesignGrid::default_piecewise(self.objective()),
            _ => DesignGrid::default_attachment(self.objective()),
        };
        let apply = |axis: &mut Axis, c: &Option<AxisConfig>| -> Result<(), CliError> {
            if let Some(c) = c {
                *axis = Axis::new(c.min, c.max, c.count, c.spacing.unwrap_or(axis.spacing))?;
            }
            Ok(())
        };
        apply(&mut g.first, &self.first)?;
        apply(&mut g.second, &self.second)?;
        Ok(g)
    }
}
