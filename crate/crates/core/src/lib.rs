//! Probability density functions of heavy-tailed vibration responses of
//! suspended seats and decks under wave slamming, via the
//! probabilistic-decomposition synthesis.

pub mod error;
pub mod histogram;
pub mod interp;
pub mod montecarlo;
pub mod ode;
pub mod optimize;
pub mod pipeline;
pub mod quadrature;
pub mod rare;
pub mod spectra;
pub mod statlin;
pub mod synthesis;
pub mod systems;

pub use error::{ErrorClass, PdsError, Result};
pub use montecarlo::ForcingModel;
pub use pipeline::{estimate, PdsEstimate, PdsOptions, RareMethod};
pub use spectra::{BackgroundSpectrum, FrequencyGrid};
pub use synthesis::{Frame, ResponsePdf};
pub use systems::{Attachment, Dof, ImpulsePattern, Oscillator, Quantity, SpringLaw, SystemModel};
