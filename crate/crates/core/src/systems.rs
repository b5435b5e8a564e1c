//! Suspended-seat (2DOF) and suspended deck-seat (3DOF) models in coordinates
//! relative to the base motion.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{PdsError, Result};

/// Largest state dimension (three masses, position and velocity each).
pub const MAX_STATE: usize = 6;

pub type StateVec = [f64; MAX_STATE];

/// Continuous, asymmetric piecewise-linear restoring force.
///
/// Slope `k_o` on `|z| <= delta`, `alpha_pos` beyond `+delta` and `alpha_neg`
/// beyond `-delta`. The offsets are implied by continuity and never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseSpring {
    pub k_o: f64,
    pub alpha_pos: f64,
    pub alpha_neg: f64,
    pub delta: f64,
}

impl PiecewiseSpring {
    /// Builds the spring with knee half-width `4 sigma_zeta`.
    pub fn new(k_o: f64, alpha_pos: f64, alpha_neg: f64, sigma_zeta: f64) -> Result<Self> {
        Self::with_delta(k_o, alpha_pos, alpha_neg, 4.0 * sigma_zeta)
    }

    pub fn with_delta(k_o: f64, alpha_pos: f64, alpha_neg: f64, delta: f64) -> Result<Self> {
        if !(k_o >= 0.0 && alpha_pos >= 0.0 && alpha_neg >= 0.0 && delta > 0.0) {
            return Err(PdsError::InvalidModel(format!(
                "piecewise spring needs k_o, alpha >= 0 and delta > 0 (got {k_o}, {alpha_pos}, {alpha_neg}, {delta})"
            )));
        }
        Ok(Self { k_o, alpha_pos, alpha_neg, delta })
    }

    /// Offset of the positive branch, `4 (k_o - alpha_1) sigma_zeta`.
    pub fn beta_pos(&self) -> f64 {
        (self.k_o - self.alpha_pos) * self.delta
    }

    /// Offset of the negative branch, `-4 (k_o - alpha_-1) sigma_zeta`.
    pub fn beta_neg(&self) -> f64 {
        -(self.k_o - self.alpha_neg) * self.delta
    }

    pub fn force(&self, z: f64) -> f64 {
        if z >= self.delta {
            self.alpha_pos * z + self.beta_pos()
        } else if z <= -self.delta {
            self.alpha_neg * z + self.beta_neg()
        } else {
            self.k_o * z
        }
    }

    pub fn potential(&self, z: f64) -> f64 {
        let d = self.delta;
        let inner = 0.5 * self.k_o * d * d;
        if z.abs() <= d {
            return 0.5 * self.k_o * z * z;
        }
        let alpha = if z > 0.0 { self.alpha_pos } else { self.alpha_neg };
        let w = z.abs() - d;
        inner + self.k_o * d * w + 0.5 * alpha * w * w
    }

    fn inverse_potential(&self, energy: f64, alpha: f64) -> Option<f64> {
        if self.k_o <= 0.0 {
            return None;
        }
        let d = self.delta;
        let inner = 0.5 * self.k_o * d * d;
        if energy <= inner {
            return Some((2.0 * energy / self.k_o).sqrt());
        }
        let rest = energy - inner;
        let b = self.k_o * d;
        let w = if alpha > 0.0 { (-b + (b * b + 2.0 * alpha * rest).sqrt()) / alpha } else { rest / b };
        Some(d + w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpringLaw {
    Linear { k: f64 },
    Cubic { k: f64, c: f64 },
    Piecewise(PiecewiseSpring),
}

impl SpringLaw {
    pub fn force(&self, z: f64) -> f64 {
        match *self {
            SpringLaw::Linear { k } => k * z,
            SpringLaw::Cubic { k, c } => k * z + c * z * z * z,
            SpringLaw::Piecewise(ref p) => p.force(z),
        }
    }

    pub fn potential(&self, z: f64) -> f64 {
        match *self {
            SpringLaw::Linear { k } => 0.5 * k * z * z,
            SpringLaw::Cubic { k, c } => 0.5 * k * z * z + 0.25 * c * z.powi(4),
            SpringLaw::Piecewise(ref p) => p.potential(z),
        }
    }

    /// Largest `|z|` compatible with `potential(z) <= energy`, if the potential is coercive.
    pub fn displacement_bound(&self, energy: f64) -> Option<f64> {
        let energy = energy.max(0.0);
        match *self {
            SpringLaw::Linear { k } => (k > 0.0).then(|| (2.0 * energy / k).sqrt()),
            SpringLaw::Cubic { k, c } => {
                if c > 0.0 {
                    let s = (-0.5 * k + (0.25 * k * k + c * energy).sqrt()) / (0.5 * c);
                    Some(s.max(0.0).sqrt())
                } else if k > 0.0 {
                    Some((2.0 * energy / k).sqrt())
                } else {
                    None
                }
            }
            SpringLaw::Piecewise(ref p) => {
                let a = p.inverse_potential(energy, p.alpha_pos)?;
                let b = p.inverse_potential(energy, p.alpha_neg)?;
                Some(a.max(b))
            }
        }
    }

    /// Linear stiffness and cubic coefficient seen by the Gaussian closure.
    ///
    /// The piecewise law only departs from `k_o` outside the background band.
    pub fn closure_coefficients(&self) -> (f64, f64) {
        match *self {
            SpringLaw::Linear { k } => (k, 0.0),
            SpringLaw::Cubic { k, c } => (k, c),
            SpringLaw::Piecewise(ref p) => (p.k_o, 0.0),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match *self {
            SpringLaw::Piecewise(ref p) => p.alpha_pos == p.alpha_neg,
            _ => true,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            SpringLaw::Linear { k } => k >= 0.0,
            SpringLaw::Cubic { k, c } => k >= 0.0 && c >= 0.0,
            SpringLaw::Piecewise(ref p) => p.k_o >= 0.0 && p.alpha_pos >= 0.0 && p.alpha_neg >= 0.0 && p.delta > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(PdsError::InvalidModel(format!("spring coefficients must be non-negative: {self:?}")))
        }
    }
}

/// Mass grounded to its host through a linear spring and dashpot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Oscillator {
    pub mass: f64,
    pub damping: f64,
    pub stiffness: f64,
}

impl Oscillator {
    pub fn new(mass: f64, damping: f64, stiffness: f64) -> Self {
        Self { mass, damping, stiffness }
    }

    pub fn natural_frequency(&self) -> f64 {
        (self.stiffness / self.mass).sqrt()
    }

    pub fn damping_ratio(&self) -> f64 {
        self.damping / (2.0 * (self.stiffness * self.mass).sqrt())
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.mass > 0.0 && self.damping >= 0.0 && self.stiffness > 0.0) {
            return Err(PdsError::InvalidModel(format!(
                "{name} needs mass > 0, damping >= 0, stiffness > 0: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Small absorber coupled to the primary DOF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Attachment {
    pub mass: f64,
    pub damping: f64,
    pub spring: SpringLaw,
}

impl Attachment {
    pub fn tmd(mass: f64, damping: f64, k: f64) -> Self {
        Self { mass, damping, spring: SpringLaw::Linear { k } }
    }

    pub fn cubic_nes(mass: f64, damping: f64, c: f64) -> Self {
        Self { mass, damping, spring: SpringLaw::Cubic { k: 0.0, c } }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "topology", rename_all = "snake_case")]
pub enum Topology {
    /// Seat on the hull: `(x, ẋ)`.
    Seat { seat: Oscillator },
    /// Deck on the hull and seat on the deck: `(y, ẏ, x, ẋ)`.
    DeckSeat { deck: Oscillator, seat: Oscillator },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dof {
    Deck,
    Seat,
    Attachment,
}

impl Dof {
    pub fn symbol(&self) -> &'static str {
        match self {
            Dof::Deck => "y",
            Dof::Seat => "x",
            Dof::Attachment => "v",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Derivative {
    Displacement,
    Velocity,
    Acceleration,
}

/// One response quantity, named `x`, `x_dot`, `x_ddot`, `y`, ... on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quantity {
    pub dof: Dof,
    pub derivative: Derivative,
}

impl Quantity {
    pub const fn new(dof: Dof, derivative: Derivative) -> Self {
        Self { dof, derivative }
    }

    pub const fn displacement(dof: Dof) -> Self {
        Self::new(dof, Derivative::Displacement)
    }

    pub const fn velocity(dof: Dof) -> Self {
        Self::new(dof, Derivative::Velocity)
    }

    pub const fn acceleration(dof: Dof) -> Self {
        Self::new(dof, Derivative::Acceleration)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let suffix = match self.derivative {
            Derivative::Displacement => "",
            Derivative::Velocity => "_dot",
            Derivative::Acceleration => "_ddot",
        };
        write!(f, "{}{}", self.dof.symbol(), suffix)
    }
}

impl FromStr for Quantity {
    type Err = PdsError;

    fn from_str(s: &str) -> Result<Self> {
        let (head, derivative) = if let Some(h) = s.strip_suffix("_ddot") {
            (h, Derivative::Acceleration)
        } else if let Some(h) = s.strip_suffix("_dot") {
            (h, Derivative::Velocity)
        } else {
            (s, Derivative::Displacement)
        };
        let dof = match head {
            "y" => Dof::Deck,
            "x" => Dof::Seat,
            "v" => Dof::Attachment,
            _ => return Err(PdsError::InvalidModel(format!("unknown quantity '{s}'"))),
        };
        Ok(Quantity { dof, derivative })
    }
}

impl Serialize for Quantity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Quantity {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which relative velocities an impulse changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImpulsePattern {
    /// Only the primary (hull-attached) DOF velocity jumps.
    #[default]
    PrimaryOnly,
    /// Every relative velocity jumps.
    AllDofs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemModel {
    #[serde(flatten)]
    pub topology: Topology,
    #[serde(default)]
    pub attachment: Option<Attachment>,
}

impl SystemModel {
    pub fn seat(seat: Oscillator, attachment: Option<Attachment>) -> Result<Self> {
        let m = Self { topology: Topology::Seat { seat }, attachment };
        m.validate()?;
        Ok(m)
    }

    pub fn deck_seat(deck: Oscillator, seat: Oscillator, attachment: Option<Attachment>) -> Result<Self> {
        let m = Self { topology: Topology::DeckSeat { deck, seat }, attachment };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self.topology {
            Topology::Seat { seat } => seat.validate("seat")?,
            Topology::DeckSeat { deck, seat } => {
                deck.validate("deck")?;
                seat.validate("seat")?;
            }
        }
        if let Some(a) = &self.attachment {
            if !(a.mass > 0.0 && a.damping >= 0.0) {
                return Err(PdsError::InvalidModel(format!("attachment needs mass > 0 and damping >= 0: {a:?}")));
            }
            a.spring.validate()?;
        }
        Ok(())
    }

    pub fn with_attachment(&self, attachment: Option<Attachment>) -> Self {
        Self { topology: self.topology, attachment }
    }

    /// DOFs in state order.
    pub fn dofs(&self) -> Vec<Dof> {
        let mut d = match self.topology {
            Topology::Seat { .. } => vec![Dof::Seat],
            Topology::DeckSeat { .. } => vec![Dof::Deck, Dof::Seat],
        };
        if self.attachment.is_some() {
            d.push(Dof::Attachment);
        }
        d
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs().len()
    }

    pub fn dim(&self) -> usize {
        2 * self.n_dofs()
    }

    pub fn dof_index(&self, dof: Dof) -> Option<usize> {
        self.dofs().iter().position(|&d| d == dof)
    }

    /// The hull-attached DOF that carries the attachment and receives impulses.
    pub fn primary_dof(&self) -> Dof {
        match self.topology {
            Topology::Seat { .. } => Dof::Seat,
            Topology::DeckSeat { .. } => Dof::Deck,
        }
    }

    pub fn primary(&self) -> Oscillator {
        match self.topology {
            Topology::Seat { seat } => seat,
            Topology::DeckSeat { deck, .. } => deck,
        }
    }

    pub fn mass(&self, dof: Dof) -> Option<f64> {
        match (dof, self.topology) {
            (Dof::Seat, Topology::Seat { seat }) | (Dof::Seat, Topology::DeckSeat { seat, .. }) => Some(seat.mass),
            (Dof::Deck, Topology::DeckSeat { deck, .. }) => Some(deck.mass),
            (Dof::Attachment, _) => self.attachment.map(|a| a.mass),
            _ => None,
        }
    }

    pub fn masses(&self) -> Vec<f64> {
        self.dofs().iter().map(|&d| self.mass(d).unwrap()).collect()
    }

    pub fn quantities(&self) -> Vec<Quantity> {
        let mut q = Vec::new();
        for d in self.dofs() {
            for k in [Derivative::Displacement, Derivative::Velocity, Derivative::Acceleration] {
                q.push(Quantity::new(d, k));
            }
        }
        q
    }

    /// Period of the primary oscillator in isolation.
    pub fn primary_period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.primary().natural_frequency()
    }

    /// Internal (non-inertial) forces acting on each DOF, in state order.
    fn internal_forces(&self, y: &StateVec) -> [f64; 3] {
        let mut f = [0.0; 3];
        match self.topology {
            Topology::Seat { seat } => {
                let (x, xd) = (y[0], y[1]);
                f[0] = seat.damping * xd + seat.stiffness * x;
                if let Some(a) = &self.attachment {
                    let (z, zd) = (x - y[2], xd - y[3]);
                    let c = a.damping * zd + a.spring.force(z);
                    f[0] += c;
                    f[1] = -c;
                }
            }
            Topology::DeckSeat { deck, seat } => {
                let (yy, yd, x, xd) = (y[0], y[1], y[2], y[3]);
                let s = seat.damping * (yd - xd) + seat.stiffness * (yy - x);
                f[0] = deck.damping * yd + deck.stiffness * yy + s;
                f[1] = -s;
                if let Some(a) = &self.attachment {
                    let (z, zd) = (yy - y[4], yd - y[5]);
                    let c = a.damping * zd + a.spring.force(z);
                    f[0] += c;
                    f[2] = -c;
                }
            }
        }
        f
    }

    /// Accelerations of every DOF (state order) under base acceleration `base_accel`.
    pub fn accelerations(&self, y: &StateVec, base_accel: f64) -> [f64; 3] {
        let f = self.internal_forces(y);
        let mut acc = [0.0; 3];
        for (i, m) in self.masses().into_iter().enumerate() {
            acc[i] = -f[i] / m - base_accel;
        }
        acc
    }

    /// Time derivative of the state. Every equation carries `-m * base_accel`.
    pub fn rhs(&self, y: &StateVec, base_accel: f64) -> StateVec {
        let acc = self.accelerations(y, base_accel);
        let mut dy = [0.0; MAX_STATE];
        for i in 0..self.n_dofs() {
            dy[2 * i] = y[2 * i + 1];
            dy[2 * i + 1] = acc[i];
        }
        dy
    }

    pub fn apply_impulse(&self, y: &StateVec, n: f64, pattern: ImpulsePattern) -> StateVec {
        let mut out = *y;
        match pattern {
            ImpulsePattern::PrimaryOnly => {
                let i = self.dof_index(self.primary_dof()).unwrap();
                out[2 * i + 1] += n;
            }
            ImpulsePattern::AllDofs => {
                for i in 0..self.n_dofs() {
                    out[2 * i + 1] += n;
                }
            }
        }
        out
    }

    /// Kinetic plus potential energy of the relative motion.
    pub fn energy(&self, y: &StateVec) -> f64 {
        let mut e = 0.0;
        for (i, m) in self.masses().into_iter().enumerate() {
            e += 0.5 * m * y[2 * i + 1] * y[2 * i + 1];
        }
        match self.topology {
            Topology::Seat { seat } => {
                e += 0.5 * seat.stiffness * y[0] * y[0];
                if let Some(a) = &self.attachment {
                    e += a.spring.potential(y[0] - y[2]);
                }
            }
            Topology::DeckSeat { deck, seat } => {
                e += 0.5 * deck.stiffness * y[0] * y[0];
                e += 0.5 * seat.stiffness * (y[0] - y[2]).powi(2);
                if let Some(a) = &self.attachment {
                    e += a.spring.potential(y[0] - y[4]);
                }
            }
        }
        e
    }

    /// Upper bound on `|q|` over all states with energy at most `energy`.
    ///
    /// `None` when the attachment spring cannot confine its stroke.
    pub fn amplitude_bound(&self, q: Quantity, energy: f64) -> Option<f64> {
        let e = energy.max(0.0);
        let prim = self.primary();
        let prim_disp = (2.0 * e / prim.stiffness).sqrt();
        let stroke = |_: ()| -> Option<f64> { self.attachment.map(|a| a.spring.displacement_bound(e)).unwrap_or(Some(0.0)) };
        let vel = |d: Dof| (2.0 * e / self.mass(d).unwrap()).sqrt();
        match q.derivative {
            Derivative::Displacement => match (q.dof, self.topology) {
                (Dof::Seat, Topology::Seat { .. }) | (Dof::Deck, _) => Some(prim_disp),
                (Dof::Seat, Topology::DeckSeat { seat, .. }) => Some(prim_disp + (2.0 * e / seat.stiffness).sqrt()),
                (Dof::Attachment, _) => stroke(()).map(|s| prim_disp + s),
            },
            Derivative::Velocity => Some(vel(q.dof)),
            Derivative::Acceleration => {
                let att_force = |host: Dof| -> Option<f64> {
                    let a = self.attachment?;
                    let s = a.spring.displacement_bound(e)?;
                    let f = a.spring.force(s).abs().max(a.spring.force(-s).abs());
                    Some(f + a.damping * (vel(host) + vel(Dof::Attachment)))
                };
                let m = self.mass(q.dof)?;
                let force = match (q.dof, self.topology) {
                    (Dof::Seat, Topology::Seat { seat }) => {
                        let att = if self.attachment.is_some() { att_force(Dof::Seat)? } else { 0.0 };
                        seat.damping * vel(Dof::Seat) + seat.stiffness * prim_disp + att
                    }
                    (Dof::Deck, Topology::DeckSeat { deck, seat }) => {
                        let att = if self.attachment.is_some() { att_force(Dof::Deck)? } else { 0.0 };
                        deck.damping * vel(Dof::Deck)
                            + deck.stiffness * prim_disp
                            + seat.damping * (vel(Dof::Deck) + vel(Dof::Seat))
                            + (2.0 * e * seat.stiffness).sqrt()
                            + att
                    }
                    (Dof::Seat, Topology::DeckSeat { seat, .. }) => {
                        seat.damping * (vel(Dof::Deck) + vel(Dof::Seat)) + (2.0 * e * seat.stiffness).sqrt()
                    }
                    (Dof::Attachment, _) => att_force(self.primary_dof())?,
                    _ => return None,
                };
                Some(force / m)
            }
        }
    }

    /// Reads a quantity off a state; accelerations are evaluated with zero base forcing.
    pub fn observe(&self, y: &StateVec, q: Quantity) -> Option<f64> {
        let i = self.dof_index(q.dof)?;
        Some(match q.derivative {
            Derivative::Displacement => y[2 * i],
            Derivative::Velocity => y[2 * i + 1],
            Derivative::Acceleration => self.accelerations(y, 0.0)[i],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn seat_nes() -> SystemModel {
        SystemModel::seat(Oscillator::new(1.0, 0.01, 1.0), Some(Attachment::cubic_nes(0.05, 0.021, 3.461))).unwrap()
    }

    fn deck_nes() -> SystemModel {
        SystemModel::deck_seat(
            Oscillator::new(1.0, 0.01, 1.0),
            Oscillator::new(0.05, 0.1, 1.0),
            Some(Attachment::cubic_nes(0.05, 0.035, 5.860)),
        )
        .unwrap()
    }

    #[test]
    fn cubic_force_example() {
        let s = SpringLaw::Cubic { k: 0.0, c: 3.461 };
        assert!((s.force(0.1) - 3.461e-3).abs() < 1e-15);
        assert_eq!(s.force(0.0), 0.0);
        assert_eq!(SpringLaw::Linear { k: 2.0 }.force(0.0), 0.0);
    }

    #[test]
    fn piecewise_is_continuous_at_knees() {
        let p = PiecewiseSpring::new(0.036, 0.035, 0.634, 0.01).unwrap();
        let d = p.delta;
        assert!((d - 0.04).abs() < 1e-15);
        let eps = 1e-12;
        assert!((p.force(d - eps) - p.k_o * d).abs() < 1e-12);
        assert!((p.force(d + eps) - p.k_o * d).abs() < 1e-12);
        assert!((p.force(-d - eps) + p.k_o * d).abs() < 1e-12);
        assert!((p.beta_pos() - 4.0 * (p.k_o - p.alpha_pos) * 0.01).abs() < 1e-15);
        assert!((p.beta_neg() + 4.0 * (p.k_o - p.alpha_neg) * 0.01).abs() < 1e-15);
        assert_eq!(p.force(0.0), 0.0);
        assert!((p.force(0.5 * d) - 0.5 * p.k_o * d).abs() < 1e-15);
    }

    #[test]
    fn piecewise_potential_inverse() {
        let p = PiecewiseSpring::with_delta(1.0, 0.0, 3.0, 0.2).unwrap();
        let s = SpringLaw::Piecewise(p);
        for e in [0.001, 0.02, 0.5, 4.0] {
            let z = s.displacement_bound(e).unwrap();
            let vmin = s.potential(z).min(s.potential(-z));
            assert!((vmin - e).abs() < 1e-10, "e={e} z={z}");
        }
    }

    #[test]
    fn seat_rhs_hand_example() {
        let model = seat_nes();
        let y = [0.01, 0.0, 0.0, 0.0, 0.0, 0.0];
        let dy = model.rhs(&y, 0.0);
        let ca = 3.461;
        assert!((dy[1] + (0.01 + ca * 1e-6)).abs() < 1e-15);
        assert!((dy[1] + 0.01000346).abs() < 1e-8);
        assert!((dy[3] - ca * 1e-6 / 0.05).abs() < 1e-15);
        assert_eq!(model.rhs(&[0.0; 6], 0.0), [0.0; 6]);
    }

    #[test]
    fn base_acceleration_enters_every_equation() {
        let model = deck_nes();
        let dy = model.rhs(&[0.0; 6], 2.0);
        assert_eq!([dy[1], dy[3], dy[5]], [-2.0, -2.0, -2.0]);
    }

    #[test]
    fn impulse_patterns() {
        let model = seat_nes();
        let rest = [0.0; 6];
        assert_eq!(model.apply_impulse(&rest, 0.0, ImpulsePattern::AllDofs), rest);
        assert_eq!(model.apply_impulse(&rest, 0.1, ImpulsePattern::PrimaryOnly)[..4], [0.0, 0.1, 0.0, 0.0]);
        assert_eq!(model.apply_impulse(&rest, 0.1, ImpulsePattern::AllDofs)[..4], [0.0, 0.1, 0.0, 0.1]);
        let deck = deck_nes();
        assert_eq!(deck.apply_impulse(&rest, 0.1, ImpulsePattern::PrimaryOnly), [0.0, 0.1, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn quantity_names_round_trip() {
        for q in deck_nes().quantities() {
            let s = q.to_string();
            assert_eq!(s.parse::<Quantity>().unwrap(), q);
        }
        assert!("w_dot".parse::<Quantity>().is_err());
    }

    #[test]
    fn rejects_bad_models() {
        assert!(SystemModel::seat(Oscillator::new(0.0, 0.01, 1.0), None).is_err());
        assert!(SystemModel::seat(Oscillator::new(1.0, 0.01, 1.0), Some(Attachment::cubic_nes(0.05, -1.0, 1.0))).is_err());
    }

    #[test]
    fn amplitude_bounds_hold_on_states() {
        let model = deck_nes();
        let y = [0.02, -0.05, 0.01, 0.03, -0.04, 0.07];
        let e = model.energy(&y);
        for q in model.quantities() {
            let b = model.amplitude_bound(q, e).unwrap();
            assert!(model.observe(&y, q).unwrap().abs() <= b * (1.0 + 1e-12), "{q}");
        }
    }
}
