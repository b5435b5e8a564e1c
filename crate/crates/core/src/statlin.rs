//! Gaussian-closure statistical linearization of the background response.
//!
//! The cubic attachment term `c z³` is replaced by `κ z` with
//! `κ = c (3σ_p² − 6σ_pa + 3σ_a²)`, where `p` is the host DOF and `a` the
//! attachment. The variances are the fixed point of the resulting spectral
//! relations.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PdsError, Result};
use crate::quadrature::integrate_vec;
use crate::spectra::{moment_integrals, BackgroundSpectrum, BaseMoments, FrequencyGrid};
use crate::systems::{Derivative, Dof, Quantity, SystemModel, Topology};

const J: Complex64 = Complex64::new(0.0, 1.0);
const SINGULAR: f64 = 1e-14;

/// Second-order moments entering the closure: host variance, host–attachment
/// covariance and attachment variance.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClosureMoments {
    pub host_var: f64,
    pub cross: f64,
    pub attachment_var: f64,
}

impl ClosureMoments {
    pub fn new(host_var: f64, cross: f64, attachment_var: f64) -> Self {
        Self { host_var, cross, attachment_var }
    }

    /// Variance of the attachment stroke `z = host − attachment`.
    pub fn stroke_var(&self) -> f64 {
        self.host_var - 2.0 * self.cross + self.attachment_var
    }

    /// Equivalent stiffness increment `c (3σ_p² − 6σ_pa + 3σ_a²)`.
    pub fn kappa(&self, cubic: f64) -> f64 {
        cubic * 3.0 * self.stroke_var()
    }

    pub fn is_feasible(&self) -> bool {
        self.host_var >= 0.0
            && self.attachment_var >= 0.0
            && self.cross * self.cross <= self.host_var * self.attachment_var * (1.0 + 1e-12) + 1e-300
    }

    fn as_array(&self) -> [f64; 3] {
        [self.host_var, self.cross, self.attachment_var]
    }

    fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

/// Background statistics of one DOF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DofStatistics {
    pub dof: Dof,
    /// Relative displacement, velocity and acceleration variances.
    pub variance: [f64; 3],
    /// Covariances with the base `h`, `ḣ`, `ḧ` at the same derivative order.
    pub base_covariance: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearizationSolution {
    /// DOF carrying the attachment and receiving impulses.
    pub primary: Dof,
    pub moments: ClosureMoments,
    /// Equivalent stiffness increment actually used.
    pub kappa: f64,
    pub base: BaseMoments,
    pub dofs: Vec<DofStatistics>,
    pub iterations: usize,
    /// Relative fixed-point residual `|F(m) − m| / |m|`.
    pub residual: f64,
}

fn level(d: Derivative) -> usize {
    match d {
        Derivative::Displacement => 0,
        Derivative::Velocity => 1,
        Derivative::Acceleration => 2,
    }
}

impl LinearizationSolution {
    pub fn dof(&self, dof: Dof) -> Option<&DofStatistics> {
        self.dofs.iter().find(|d| d.dof == dof)
    }

    /// Variance of a relative quantity.
    pub fn variance(&self, q: Quantity) -> Option<f64> {
        self.dof(q.dof).map(|d| d.variance[level(q.derivative)])
    }

    /// Standard deviation of a relative quantity.
    pub fn sigma(&self, q: Quantity) -> Option<f64> {
        self.variance(q).map(f64::sqrt)
    }

    pub fn base_variance(&self, d: Derivative) -> f64 {
        match d {
            Derivative::Displacement => self.base.displacement,
            Derivative::Velocity => self.base.velocity,
            Derivative::Acceleration => self.base.acceleration,
        }
    }

    /// Covariance of a relative quantity with the matching base derivative.
    pub fn base_covariance(&self, q: Quantity) -> Option<f64> {
        self.dof(q.dof).map(|d| d.base_covariance[level(q.derivative)])
    }

    /// Variance of the absolute quantity `z + h` (same derivative order).
    pub fn absolute_variance(&self, q: Quantity) -> Option<f64> {
        let var = self.variance(q)?;
        Some(var + self.base_variance(q.derivative) + 2.0 * self.base_covariance(q)?)
    }
}

/// Attachment coefficients seen by the closure: damping, linear stiffness, cubic coefficient, mass.
fn attachment_coefficients(model: &SystemModel) -> Option<(f64, f64, f64, f64)> {
    model.attachment.map(|a| {
        let (k, c) = a.spring.closure_coefficients();
        (a.damping, k, c, a.mass)
    })
}

/// Complex solve of an `n x n` system (n <= 3) by Gaussian elimination with pivoting.
fn solve_complex(mut a: [[Complex64; 3]; 3], mut b: [Complex64; 3], n: usize) -> Option<[Complex64; 3]> {
    let scale = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).fold(0.0_f64, |m, (i, j)| m.max(a[i][j].norm()));
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))?;
        if a[piv][col].norm() <= SINGULAR * scale.max(1.0) {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                let v = a[col][c];
                a[r][c] -= f * v;
            }
            let v = b[col];
            b[r] -= f * v;
        }
    }
    let mut x = [Complex64::new(0.0, 0.0); 3];
    for r in (0..n).rev() {
        let mut s = b[r];
        for c in r + 1..n {
            s -= a[r][c] * x[c];
        }
        x[r] = s / a[r][r];
    }
    Some(x)
}

/// Transfer functions from base displacement `H` to every relative DOF
/// displacement (state order) for the linearized system with increment `kappa`.
pub fn frequency_response(model: &SystemModel, omega: f64, kappa: f64) -> Result<[Complex64; 3]> {
    let n = model.n_dofs();
    let jw = J * omega;
    let w2 = omega * omega;
    let mut z = [[Complex64::new(0.0, 0.0); 3]; 3];
    let masses = model.masses();
    let att = attachment_coefficients(model).map(|(l, k, _, _)| (l, k + kappa));
    match model.topology {
        Topology::Seat { seat } => {
            z[0][0] = seat.damping * jw + seat.stiffness;
            if let Some((l, k)) = att {
                let c = l * jw + k;
                z[0][0] += c;
                z[0][1] = -c;
                z[1][0] = -c;
                z[1][1] = c;
            }
        }
        Topology::DeckSeat { deck, seat } => {
            let s = seat.damping * jw + seat.stiffness;
            z[0][0] = deck.damping * jw + deck.stiffness + s;
            z[0][1] = -s;
            z[1][0] = -s;
            z[1][1] = s;
            if let Some((l, k)) = att {
                let c = l * jw + k;
                z[0][0] += c;
                z[0][2] = -c;
                z[2][0] = -c;
                z[2][2] = c;
            }
        }
    }
    let mut rhs = [Complex64::new(0.0, 0.0); 3];
    for (i, m) in masses.iter().enumerate() {
        z[i][i] -= m * w2;
        rhs[i] = Complex64::new(m * w2, 0.0);
    }
    solve_complex(z, rhs, n).ok_or(PdsError::SingularTransfer { omega })
}

fn require_attachment(model: &SystemModel) -> Result<(f64, f64, f64, f64)> {
    attachment_coefficients(model)
        .ok_or_else(|| PdsError::InvalidModel("closure operators need an attachment".into()))
}

/// Operators `(𝒜, ℬ, 𝒞)` of the suspended-seat closure.
pub fn transfer_operators_2dof(
    model: &SystemModel,
    omega: f64,
    moments: &ClosureMoments,
) -> Result<(Complex64, Complex64, Complex64)> {
    let Topology::Seat { seat } = model.topology else {
        return Err(PdsError::InvalidModel("2DOF operators need the seat topology".into()));
    };
    let (la, ka, ca, ma) = require_attachment(model)?;
    let kap = moments.kappa(ca);
    let jw = J * omega;
    let w2 = omega * omega;
    let a = -seat.mass * w2 + (seat.damping + la) * jw + seat.stiffness + ka + kap;
    let b = la * jw + ka + kap;
    let c = -ma * w2 + la * jw + ka + kap;
    Ok((a, b, c))
}

/// Auto- and cross-spectra of the linearized suspended-seat response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeatSpectra {
    pub sxx: f64,
    pub svv: f64,
    pub sxv: Complex64,
    pub sxh: Complex64,
    pub svh: Complex64,
}

fn check(z: Complex64, omega: f64) -> Result<Complex64> {
    if z.norm() < SINGULAR || !z.is_finite() {
        Err(PdsError::SingularTransfer { omega })
    } else {
        Ok(z)
    }
}

pub fn response_spectra_2dof(
    model: &SystemModel,
    spectrum: &BackgroundSpectrum,
    omega: f64,
    moments: &ClosureMoments,
) -> Result<SeatSpectra> {
    let s = spectrum.density(omega);
    let ms = model.mass(Dof::Seat).unwrap();
    let ma = model.mass(Dof::Attachment).unwrap_or(0.0);
    // Numerator and denominator factors of X(ω) and V(ω), evaluated at ±ω.
    let parts = |w: f64| -> Result<(Complex64, Complex64, Complex64, Complex64)> {
        let (a, b, c) = transfer_operators_2dof(model, w, moments)?;
        let c = check(c, w)?;
        let b = check(b, w)?;
        let nx = ms + ma * b / c;
        let dx = check(a - b * b / c, w)?;
        let nv = ms + ma * a / b;
        let dv = check(a * c / b - b, w)?;
        Ok((nx, dx, nv, dv))
    };
    let (nx, dx, nv, dv) = parts(omega)?;
    let (nxm, dxm, nvm, dvm) = parts(-omega)?;
    let w2 = omega * omega;
    let w4 = w2 * w2;
    Ok(SeatSpectra {
        sxx: (nx * nxm * w4 / (dx * dxm)).re * s,
        svv: (nv * nvm * w4 / (dv * dvm)).re * s,
        sxv: nx * nvm * w4 / (dx * dvm) * s,
        sxh: nx * w2 / dx * s,
        svh: nv * w2 / dv * s,
    })
}

/// Operators `(𝒜, ℬ, 𝒞, 𝒟, ℰ)` of the deck-seat closure.
pub fn transfer_operators_3dof(
    model: &SystemModel,
    omega: f64,
    moments: &ClosureMoments,
) -> Result<[Complex64; 5]> {
    let Topology::DeckSeat { deck, seat } = model.topology else {
        return Err(PdsError::InvalidModel("3DOF operators need the deck-seat topology".into()));
    };
    let (la, ka, ca, ma) = require_attachment(model)?;
    let kap = moments.kappa(ca);
    let jw = J * omega;
    let w2 = omega * omega;
    let a = -deck.mass * w2 + (deck.damping + seat.damping + la) * jw + deck.stiffness + seat.stiffness + ka + kap;
    let b = la * jw + ka + kap;
    let c = -ma * w2 + la * jw + ka + kap;
    let d = seat.damping * jw + seat.stiffness;
    // ℰ carries the seat damping: it is the seat row of the dynamic stiffness.
    let e = -seat.mass * w2 + seat.damping * jw + seat.stiffness;
    Ok([a, b, c, d, e])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeckSeatSpectra {
    pub syy: f64,
    pub sxx: f64,
    pub svv: f64,
    pub syv: Complex64,
    pub syh: Complex64,
    pub sxh: Complex64,
    pub svh: Complex64,
}

pub fn response_spectra_3dof(
    model: &SystemModel,
    spectrum: &BackgroundSpectrum,
    omega: f64,
    moments: &ClosureMoments,
) -> Result<DeckSeatSpectra> {
    let s = spectrum.density(omega);
    let mh = model.mass(Dof::Deck).unwrap();
    let ms = model.mass(Dof::Seat).unwrap();
    let ma = model.mass(Dof::Attachment).unwrap();
    // (numerator, denominator) pairs of Y, X and V at ±ω.
    let parts = |w: f64| -> Result<[(Complex64, Complex64); 3]> {
        let [a, b, c, d, e] = transfer_operators_3dof(model, w, moments)?;
        let (b, c, d, e) = (check(b, w)?, check(c, w)?, check(d, w)?, check(e, w)?);
        let y = (mh + ma * b / c + ms * d / e, check(a - d * d / e - b * b / c, w)?);
        // The attachment term enters X with a positive sign (eliminate V, then Y).
        let x = (
            mh + ms * a / d - ms * b * b / (c * d) + ma * b / c,
            check(a * e / d - d - b * b * e / (d * c), w)?,
        );
        let v = (
            mh + ma * a / b + ms * d / e - ma * d * d / (e * b),
            check(a * c / b - d * d * c / (b * e) - b, w)?,
        );
        Ok([y, x, v])
    };
    let p = parts(omega)?;
    let m = parts(-omega)?;
    let w2 = omega * omega;
    let w4 = w2 * w2;
    let auto = |i: usize| (p[i].0 * m[i].0 * w4 / (p[i].1 * m[i].1)).re * s;
    Ok(DeckSeatSpectra {
        syy: auto(0),
        sxx: auto(1),
        svv: auto(2),
        syv: p[0].0 * m[2].0 * w4 / (p[0].1 * m[2].1) * s,
        syh: p[0].0 * w2 / p[0].1 * s,
        sxh: p[1].0 * w2 / p[1].1 * s,
        svh: p[2].0 * w2 / p[2].1 * s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    pub damping: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Smallest relaxation factor tried before giving up on a feasible step.
    pub min_damping: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self { damping: 0.5, max_iterations: 200, tolerance: 1e-8, min_damping: 1.0 / 1024.0 }
    }
}

struct Closure<'a> {
    model: &'a SystemModel,
    spectrum: &'a BackgroundSpectrum,
    grid: &'a FrequencyGrid,
    host: usize,
    att: Option<usize>,
    cubic: f64,
}

impl Closure<'_> {
    /// Integrated closure moments for a given stiffness increment.
    fn map(&self, kappa: f64) -> Result<ClosureMoments> {
        let err = std::cell::Cell::new(None);
        let v = integrate_vec(
            |w| {
                let s = self.spectrum.density(w);
                if s == 0.0 {
                    return [0.0; 3];
                }
                match frequency_response(self.model, w, kappa) {
                    Ok(h) => {
                        let hp = h[self.host];
                        match self.att {
                            Some(a) => {
                                let ha = h[a];
                                [hp.norm_sqr() * s, (hp * ha.conj()).re * s, ha.norm_sqr() * s]
                            }
                            None => [hp.norm_sqr() * s, 0.0, 0.0],
                        }
                    }
                    Err(e) => {
                        err.set(Some(e));
                        [0.0; 3]
                    }
                }
            },
            self.grid.omega_min,
            self.grid.omega_max,
            &self.grid.breakpoints(self.spectrum),
            &self.grid.quadrature(),
        )?;
        if let Some(e) = err.take() {
            return Err(e);
        }
        Ok(ClosureMoments::from_array(v))
    }
}

fn rel_diff(a: &ClosureMoments, b: &ClosureMoments) -> f64 {
    let (x, y) = (a.as_array(), b.as_array());
    let num: f64 = x.iter().zip(y.iter()).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    let den: f64 = x.iter().map(|p| p * p).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Solves the closure fixed point and populates every background statistic.
pub fn solve_fixed_point(
    model: &SystemModel,
    spectrum: &BackgroundSpectrum,
    grid: &FrequencyGrid,
) -> Result<LinearizationSolution> {
    solve_fixed_point_with(model, spectrum, grid, &FixedPointOptions::default())
}

pub fn solve_fixed_point_with(
    model: &SystemModel,
    spectrum: &BackgroundSpectrum,
    grid: &FrequencyGrid,
    opts: &FixedPointOptions,
) -> Result<LinearizationSolution> {
    model.validate()?;
    grid.check_support(spectrum)?;
    let host_dof = model.primary_dof();
    let closure = Closure {
        model,
        spectrum,
        grid,
        host: model.dof_index(host_dof).unwrap(),
        att: model.dof_index(Dof::Attachment),
        cubic: attachment_coefficients(model).map(|(_, _, c, _)| c).unwrap_or(0.0),
    };

    // Linear (κ = 0) solution is the starting iterate.
    let mut m = closure.map(0.0)?;
    let mut iterations = 0;
    let mut residual;
    loop {
        let f = closure.map(m.kappa(closure.cubic))?;
        residual = rel_diff(&f, &m);
        if residual < opts.tolerance {
            break;
        }
        if iterations >= opts.max_iterations {
            return Err(PdsError::FixedPointNonConverged { iterations, residual });
        }
        let mut theta = opts.damping;
        let next = loop {
            let cand = ClosureMoments::from_array({
                let (a, b) = (m.as_array(), f.as_array());
                [a[0] + theta * (b[0] - a[0]), a[1] + theta * (b[1] - a[1]), a[2] + theta * (b[2] - a[2])]
            });
            if cand.is_feasible() {
                break cand;
            }
            theta *= 0.5;
            if theta < opts.min_damping {
                return Err(PdsError::NegativeVariance(cand.host_var.min(cand.attachment_var)));
            }
        };
        m = next;
        iterations += 1;
    }

    let kappa = m.kappa(closure.cubic);
    let dofs = model.dofs();
    let n = dofs.len();
    let err = std::cell::Cell::new(None);
    // Per DOF: |X|² S, ω²|X|² S, ω⁴|X|² S, Re X S, ω² Re X S, ω⁴ Re X S.
    let v: [f64; 18] = integrate_vec(
        |w| {
            let s = spectrum.density(w);
            let mut out = [0.0; 18];
            if s == 0.0 {
                return out;
            }
            match frequency_response(model, w, kappa) {
                Ok(h) => {
                    let w2 = w * w;
                    for i in 0..n {
                        let a = h[i].norm_sqr() * s;
                        let c = h[i].re * s;
                        out[6 * i..6 * i + 6].copy_from_slice(&[a, w2 * a, w2 * w2 * a, c, w2 * c, w2 * w2 * c]);
                    }
                }
                Err(e) => err.set(Some(e)),
            }
            out
        },
        grid.omega_min,
        grid.omega_max,
        &grid.breakpoints(spectrum),
        &grid.quadrature(),
    )?;
    if let Some(e) = err.take() {
        return Err(e);
    }
    let stats = dofs
        .iter()
        .enumerate()
        .map(|(i, &dof)| {
            let s = &v[6 * i..6 * i + 6];
            DofStatistics { dof, variance: [s[0], s[1], s[2]], base_covariance: [s[3], s[4], s[5]] }
        })
        .collect::<Vec<_>>();
    for st in &stats {
        if let Some(bad) = st.variance.iter().find(|x| **x < 0.0) {
            return Err(PdsError::NegativeVariance(*bad));
        }
    }
    let base = moment_integrals(spectrum, grid)?;
    Ok(LinearizationSolution { primary: host_dof, moments: m, kappa, base, dofs: stats, iterations, residual })
}

/// Recomputes `F(m)` at the stored moments and returns `|F(m) − m| / |m|`.
pub fn fixed_point_residual(
    model: &SystemModel,
    spectrum: &BackgroundSpectrum,
    grid: &FrequencyGrid,
    sol: &LinearizationSolution,
) -> Result<f64> {
    let closure = Closure {
        model,
        spectrum,
        grid,
        host: model.dof_index(model.primary_dof()).unwrap(),
        att: model.dof_index(Dof::Attachment),
        cubic: attachment_coefficients(model).map(|(_, _, c, _)| c).unwrap_or(0.0),
    };
    let f = closure.map(sol.moments.kappa(closure.cubic))?;
    Ok(rel_diff(&f, &sol.moments))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{Attachment, Oscillator};

    fn seat(att: Option<Attachment>) -> SystemModel {
        SystemModel::seat(Oscillator::new(1.0, 0.01, 1.0), att).unwrap()
    }

    fn deck(att: Option<Attachment>) -> SystemModel {
        SystemModel::deck_seat(Oscillator::new(1.0, 0.01, 1.0), Oscillator::new(0.05, 0.1, 1.0), att).unwrap()
    }

    fn spec() -> BackgroundSpectrum {
        BackgroundSpectrum::new(1.582e-4, 1.0).unwrap()
    }

    #[test]
    fn static_limit_of_operators() {
        let m = seat(Some(Attachment::tmd(0.05, 0.02, 0.04)));
        let (a, b, c) = transfer_operators_2dof(&m, 0.0, &ClosureMoments::new(1.0, 0.0, 1.0)).unwrap();
        assert!((a - Complex64::new(1.04, 0.0)).norm() < 1e-15);
        assert!((b - Complex64::new(0.04, 0.0)).norm() < 1e-15);
        assert!((c - Complex64::new(0.04, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn cubic_operator_example() {
        let m = seat(Some(Attachment::cubic_nes(0.05, 0.021, 3.461)));
        let (a, _, _) = transfer_operators_2dof(&m, 0.0, &ClosureMoments::new(1.0, 0.0, 1.0)).unwrap();
        assert!((a.re - (1.0 + 6.0 * 3.461)).abs() < 1e-12);
        assert!((a.re - 21.766).abs() < 1e-12);
    }

    #[test]
    fn operators_are_conjugate_symmetric() {
        let m = deck(Some(Attachment::cubic_nes(0.05, 0.035, 5.86)));
        let mo = ClosureMoments::new(6e-5, 5e-5, 4e-5);
        let p = transfer_operators_3dof(&m, 1.7, &mo).unwrap();
        let q = transfer_operators_3dof(&m, -1.7, &mo).unwrap();
        for i in 0..5 {
            assert!((p[i] - q[i].conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn linear_operators_ignore_moments() {
        let m = seat(Some(Attachment::tmd(0.05, 0.02, 0.04)));
        let a = transfer_operators_2dof(&m, 1.3, &ClosureMoments::new(1.0, 0.2, 3.0)).unwrap();
        let b = transfer_operators_2dof(&m, 1.3, &ClosureMoments::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn seat_operator_spectra_match_direct_solve() {
        let m = seat(Some(Attachment::cubic_nes(0.05, 0.021, 3.461)));
        let mo = ClosureMoments::new(6.7e-5, 5.2e-5, 4.1e-5);
        let kap = mo.kappa(3.461);
        let s = spec();
        for &w in &[1.2, 1.9, 2.5, 7.0] {
            let sp = response_spectra_2dof(&m, &s, w, &mo).unwrap();
            let h = frequency_response(&m, w, kap).unwrap();
            let d = s.density(w);
            assert!((sp.sxx - h[0].norm_sqr() * d).abs() <= 1e-12 * sp.sxx);
            assert!((sp.svv - h[1].norm_sqr() * d).abs() <= 1e-12 * sp.svv);
            assert!((sp.sxv - h[0] * h[1].conj() * d).norm() <= 1e-12 * sp.sxx);
            assert!((sp.sxh - h[0] * d).norm() <= 1e-12 * d);
            assert!((sp.svh - h[1] * d).norm() <= 1e-12 * d);
        }
    }

    #[test]
    fn deck_operator_spectra_match_direct_solve() {
        let m = deck(Some(Attachment::cubic_nes(0.05, 0.035, 5.86)));
        let mo = ClosureMoments::new(6.4e-5, 5.2e-5, 4.3e-5);
        let kap = mo.kappa(5.86);
        let s = spec();
        for &w in &[1.3, 2.0, 4.5] {
            let sp = response_spectra_3dof(&m, &s, w, &mo).unwrap();
            let h = frequency_response(&m, w, kap).unwrap();
            let d = s.density(w);
            assert!((sp.syy - h[0].norm_sqr() * d).abs() <= 1e-10 * sp.syy, "syy at {w}");
            assert!((sp.sxx - h[1].norm_sqr() * d).abs() <= 1e-10 * sp.sxx, "sxx at {w}");
            assert!((sp.svv - h[2].norm_sqr() * d).abs() <= 1e-10 * sp.svv, "svv at {w}");
            assert!((sp.syv - h[0] * h[2].conj() * d).norm() <= 1e-10 * sp.syy);
            assert!((sp.sxh - h[1] * d).norm() <= 1e-10 * d);
        }
    }

    #[test]
    fn sdof_limit_matches_closed_form() {
        let m = seat(None);
        let s = spec();
        for &w in &[1.1, 2.0, 3.0] {
            let h = frequency_response(&m, w, 0.0).unwrap();
            let closed = w.powi(4) / ((1.0 - w * w).powi(2) + (0.01 * w).powi(2));
            assert!((h[0].norm_sqr() - closed).abs() < 1e-12 * closed);
            let _ = s;
        }
    }

    #[test]
    fn zero_spectrum_gives_zero_spectra() {
        let m = seat(Some(Attachment::cubic_nes(0.05, 0.021, 3.461)));
        let mut s = spec();
        s.shift = 50.0;
        let sp = response_spectra_2dof(&m, &s, 3.0, &ClosureMoments::default()).unwrap();
        assert_eq!(sp.sxx, 0.0);
        assert_eq!(sp.svv, 0.0);
    }

    #[test]
    fn linear_attachment_converges_immediately() {
        let m = seat(Some(Attachment::tmd(0.05, 0.018, 0.036)));
        let s = spec();
        let sol = solve_fixed_point(&m, &s, &s.default_grid()).unwrap();
        assert_eq!(sol.iterations, 0);
        assert_eq!(sol.kappa, 0.0);
    }

    #[test]
    fn seat_nes_eta_scale() {
        let m = seat(Some(Attachment::cubic_nes(0.05, 0.021, 3.461)));
        let s = spec();
        let g = s.default_grid();
        let sol = solve_fixed_point(&m, &s, &g).unwrap();
        assert!(sol.residual < 1e-8);
        assert!(fixed_point_residual(&m, &s, &g, &sol).unwrap() < 1e-8);
        let sxd = sol.sigma(Quantity::velocity(Dof::Seat)).unwrap();
        assert!((sxd - 0.0178).abs() / 0.0178 < 0.03, "{sxd}");
        assert!(sol.moments.is_feasible());
    }

    #[test]
    fn singular_system_is_reported() {
        // Undamped SDOF evaluated exactly at resonance.
        let m = SystemModel::seat(Oscillator::new(1.0, 0.0, 4.0), None).unwrap();
        assert!(matches!(frequency_response(&m, 2.0, 0.0), Err(PdsError::SingularTransfer { .. })));
    }
}
