//! Conditionally rare response: impulse-magnitude law, rare-event durations and
//! probabilities, and conditional densities from impulse simulations or from
//! an equivalent linear system built on effective stiffness and damping.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, Normal};

use crate::error::{PdsError, Result};
use crate::histogram::Histogram;
use crate::interp::Pchip;
use crate::montecarlo::ForcingModel;
use crate::ode::{integrate, Control, OdeOptions, UniformSampler};
use crate::statlin::LinearizationSolution;
use crate::systems::{Derivative, ImpulsePattern, Quantity, SystemModel, MAX_STATE};

/// Law of the post-impact velocity `η = ẋ_b + α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaDistribution {
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaNode {
    pub n: f64,
    pub weight: f64,
}

impl EtaDistribution {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !(mean.is_finite() && variance >= 0.0 && variance.is_finite()) {
            return Err(PdsError::InvalidModel(format!("invalid eta law: mean {mean}, variance {variance}")));
        }
        Ok(Self { mean, variance })
    }

    pub fn sigma(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Equally spaced nodes over `mean ± span·σ` with trapezoid-Gaussian weights summing to 1.
    pub fn nodes(&self, count: usize, span: f64) -> Vec<EtaNode> {
        let s = self.sigma();
        if s == 0.0 || count < 2 {
            return vec![EtaNode { n: self.mean, weight: 1.0 }];
        }
        let normal = Normal::new(self.mean, s).expect("positive sigma");
        let lo = self.mean - span * s;
        let h = 2.0 * span * s / (count - 1) as f64;
        let mut nodes: Vec<EtaNode> = (0..count)
            .map(|i| {
                let n = lo + i as f64 * h;
                let trap = if i == 0 || i == count - 1 { 0.5 } else { 1.0 };
                EtaNode { n, weight: trap * normal.pdf(n) }
            })
            .collect();
        let total: f64 = nodes.iter().map(|e| e.weight).sum();
        nodes.iter_mut().for_each(|e| e.weight /= total);
        nodes
    }
}

/// `η ~ N(μ_α, σ_ż² + σ_α²)` with `ż` the primary background velocity.
pub fn eta_from(forcing: &ForcingModel, lin: &LinearizationSolution) -> Result<EtaDistribution> {
    let var_b = lin.variance(Quantity::velocity(lin.primary)).unwrap_or(0.0);
    EtaDistribution::new(forcing.mu_alpha, var_b + forcing.sigma_alpha * forcing.sigma_alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RareOptions {
    pub eta_nodes: usize,
    /// Half-width of the η grid in standard deviations.
    pub eta_span: f64,
    /// Decay fraction `ρ_c` defining the end of a rare event.
    pub rho_c: f64,
    /// Output step of the sampled impulse responses.
    pub dt: f64,
    pub impulse_bins: usize,
    pub bins: usize,
    /// Simulation horizon; `None` means 200 primary periods.
    pub cap: Option<f64>,
    /// Impulse magnitudes at which effective measures are computed.
    pub effective_nodes: usize,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for RareOptions {
    fn default() -> Self {
        Self {
            eta_nodes: 101,
            eta_span: 4.0,
            rho_c: 0.1,
            dt: 0.05,
            impulse_bins: 201,
            bins: 401,
            cap: None,
            effective_nodes: 21,
            rtol: 1e-8,
            atol: 1e-12,
        }
    }
}

impl RareOptions {
    /// Cheaper settings for design sweeps: 21 η nodes and `rtol = 1e-6`.
    /// Objective values move by about 1e-4 relative against the defaults.
    pub fn screening() -> Self {
        Self { eta_nodes: 21, rtol: 1e-6, atol: 1e-10, ..Self::default() }
    }

    fn cap_for(&self, model: &SystemModel) -> f64 {
        self.cap.unwrap_or(200.0 * model.primary_period())
    }

    fn ode(&self) -> OdeOptions {
        OdeOptions { rtol: self.rtol, atol: self.atol, ..OdeOptions::default() }
    }
}

/// Sampled free response after one impulse.
#[derive(Debug, Clone)]
pub struct ImpulseResponse {
    pub n: f64,
    pub dt: f64,
    pub quantities: Vec<Quantity>,
    /// One sampled series per quantity, starting at `t = 0⁺`.
    pub series: Vec<Vec<f64>>,
    /// Simulation ran to the cap instead of meeting the decay bound.
    pub capped: bool,
    pub cap: f64,
}

/// Last time `|series|` exceeds `rho·max|series|` on a grid of step `dt`.
pub fn rare_duration(series: &[f64], dt: f64, rho: f64) -> f64 {
    last_exceedance(series, rho).map(|i| i as f64 * dt).unwrap_or(0.0)
}

fn last_exceedance(series: &[f64], rho: f64) -> Option<usize> {
    let max = series.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return None;
    }
    series.iter().rposition(|v| v.abs() > rho * max)
}

/// Integrates the unforced response to impulse `n` until every tracked quantity
/// is provably below `ρ_c` of its running maximum, or until the cap.
pub fn simulate_impulse(
    model: &SystemModel,
    n: f64,
    pattern: ImpulsePattern,
    quantities: &[Quantity],
    opts: &RareOptions,
) -> Result<ImpulseResponse> {
    model.validate()?;
    if let Some(q) = quantities.iter().find(|q| model.dof_index(q.dof).is_none()) {
        return Err(PdsError::InvalidModel(format!("quantity {q} is not part of the model")));
    }
    let cap = opts.cap_for(model);
    let y0 = model.apply_impulse(&[0.0; MAX_STATE], n, pattern);
    let mut series = vec![Vec::with_capacity((cap / opts.dt) as usize / 4); quantities.len()];
    let mut max = vec![0.0_f64; quantities.len()];
    let mut sampler = UniformSampler::new(0.0, opts.dt);
    let mut stopped = false;
    integrate(|_, y| model.rhs(y, 0.0), model.dim(), 0.0, y0, cap, &opts.ode(), |step| {
        sampler.feed(step, |t, y| {
            for (k, q) in quantities.iter().enumerate() {
                let v = model.observe(y, *q).unwrap();
                // The impulse instant carries the forcing delta, not the response.
                if !(t == 0.0 && q.derivative == Derivative::Acceleration) {
                    max[k] = max[k].max(v.abs());
                }
                series[k].push(v);
            }
        });
        let e = model.energy(&step.y1);
        let decayed = quantities.iter().zip(&max).all(|(q, &m)| {
            m > 0.0 && model.amplitude_bound(*q, e).is_some_and(|b| b < opts.rho_c * m)
        });
        if decayed {
            stopped = true;
            Control::Stop
        } else {
            Control::Continue
        }
    })?;
    Ok(ImpulseResponse { n, dt: opts.dt, quantities: quantities.to_vec(), series, capped: !stopped, cap })
}

/// Duration and conditional histogram of one quantity for one impulse.
#[derive(Debug, Clone)]
struct NodeSummary {
    tau: f64,
    /// `None` encodes a response that never leaves zero.
    hist: Option<Histogram>,
}

fn summarize(series: &[f64], dt: f64, q: Quantity, opts: &RareOptions, guard: Option<(f64, f64)>) -> Result<NodeSummary> {
    let start = usize::from(q.derivative == Derivative::Acceleration).min(series.len());
    let body = &series[start..];
    let Some(last) = last_exceedance(body, opts.rho_c) else {
        return Ok(NodeSummary { tau: 0.0, hist: None });
    };
    let tau = (last + start) as f64 * dt;
    if let Some((cap, period)) = guard {
        if tau > cap - period {
            return Err(PdsError::NoDecay { cap });
        }
    }
    let window = &body[..=last];
    let ext = window.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let hist = Histogram::from_samples(window.iter().copied(), -ext, ext, opts.impulse_bins);
    Ok(NodeSummary { tau, hist: Some(hist) })
}

/// Conditional rare-event density, duration and probability for one quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RareEventProfile {
    pub quantity: Quantity,
    pub density: Histogram,
    /// η-weighted mean duration `τ̄_e`.
    pub mean_duration: f64,
    /// `P_r = ν_α τ̄_e`.
    pub probability: f64,
    /// `(n, τ_e(n))` per η node.
    pub durations: Vec<(f64, f64)>,
}

fn assemble(
    quantity: Quantity,
    nodes: &[EtaNode],
    summaries: &[NodeSummary],
    forcing: &ForcingModel,
    bins: usize,
) -> Result<RareEventProfile> {
    let support = summaries.iter().filter_map(|s| s.hist.as_ref()).fold(0.0_f64, |m, h| m.max(h.hi));
    if support <= 0.0 {
        return Err(PdsError::InvalidModel(format!("rare response of {quantity} is identically zero")));
    }
    let mut density = Histogram::zeros(-support, support, bins);
    let mut mean_duration = 0.0;
    for (node, s) in nodes.iter().zip(summaries) {
        mean_duration += node.weight * s.tau;
        match &s.hist {
            Some(h) => h.rebin_into(&mut density, node.weight),
            None => {
                let i = density.index(0.0).unwrap();
                let w = density.width();
                density.density[i] += node.weight / w;
            }
        }
    }
    let probability = forcing.nu_alpha() * mean_duration;
    if !(probability < 1.0) {
        return Err(PdsError::PrOutOfRange(probability));
    }
    Ok(RareEventProfile {
        quantity,
        density,
        mean_duration,
        probability,
        durations: nodes.iter().zip(summaries).map(|(e, s)| (e.n, s.tau)).collect(),
    })
}

fn collect_profiles(
    quantities: &[Quantity],
    nodes: &[EtaNode],
    per_node: Vec<Result<Vec<NodeSummary>>>,
    forcing: &ForcingModel,
    bins: usize,
) -> Result<Vec<RareEventProfile>> {
    let per_node = per_node.into_iter().collect::<Result<Vec<_>>>()?;
    quantities
        .iter()
        .enumerate()
        .map(|(k, q)| {
            let s: Vec<NodeSummary> = per_node.iter().map(|v| v[k].clone()).collect();
            assemble(*q, nodes, &s, forcing, bins)
        })
        .collect()
}

/// Rare profiles of several quantities sharing one set of impulse simulations.
pub fn rare_profiles_simulated(
    model: &SystemModel,
    forcing: &ForcingModel,
    eta: &EtaDistribution,
    quantities: &[Quantity],
    opts: &RareOptions,
) -> Result<Vec<RareEventProfile>> {
    let nodes = eta.nodes(opts.eta_nodes, opts.eta_span);
    let period = model.primary_period();
    let per_node: Vec<Result<Vec<NodeSummary>>> = nodes
        .par_iter()
        .map(|node| {
            let r = simulate_impulse(model, node.n, forcing.pattern, quantities, opts)?;
            let guard = r.capped.then_some((r.cap, period));
            quantities.iter().zip(&r.series).map(|(q, s)| summarize(s, r.dt, *q, opts, guard)).collect()
        })
        .collect();
    collect_profiles(quantities, &nodes, per_node, forcing, opts.bins)
}

pub fn rare_pdf_simulated(
    model: &SystemModel,
    forcing: &ForcingModel,
    eta: &EtaDistribution,
    quantity: Quantity,
    opts: &RareOptions,
) -> Result<RareEventProfile> {
    Ok(rare_profiles_simulated(model, forcing, eta, &[quantity], opts)?.remove(0))
}

/// Displacement, velocity and acceleration of `ẍ + 2ζω ẋ + ω² x = 0` with `x(0) = 0, ẋ(0) = n`.
pub fn sdof_impulse_response(omega_n: f64, zeta: f64, n: f64, t: f64) -> [f64; 3] {
    let a = zeta * omega_n;
    let (x, v) = if (zeta - 1.0).abs() < 1e-9 {
        let e = (-a * t).exp();
        (n * t * e, n * e * (1.0 - a * t))
    } else if zeta < 1.0 {
        let wd = omega_n * (1.0 - zeta * zeta).sqrt();
        let e = (-a * t).exp();
        let (s, c) = (wd * t).sin_cos();
        (n / wd * e * s, n * e * (c - a / wd * s))
    } else {
        let wo = omega_n * (zeta * zeta - 1.0).sqrt();
        let (r1, r2) = (-a + wo, -a - wo);
        let (e1, e2) = ((r1 * t).exp(), (r2 * t).exp());
        let f = n / (2.0 * wo);
        (f * (e1 - e2), f * (r1 * e1 - r2 * e2))
    };
    [x, v, -2.0 * a * v - omega_n * omega_n * x]
}

/// Weighted-average effective stiffness and damping at one impulse magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectivePoint {
    pub n: f64,
    pub k_bar: f64,
    pub lambda_bar: f64,
    /// Integration horizon `τ_e(n)` of the primary displacement.
    pub horizon: f64,
}

/// Time-resolved effective stiffness and damping on the sample grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveTrace {
    pub t: Vec<f64>,
    pub k_eff: Vec<f64>,
    pub lambda_eff: Vec<f64>,
}

/// Effective measures on an impulse grid, for a primary DOF of mass `mass`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveMeasures {
    pub mass: f64,
    pub points: Vec<EffectivePoint>,
}

impl EffectiveMeasures {
    /// Linear interpolation of `(k̄, λ̄)` in `n`, held constant beyond the ends.
    pub fn interpolate(&self, n: f64) -> (f64, f64) {
        let p = &self.points;
        if n <= p[0].n {
            return (p[0].k_bar, p[0].lambda_bar);
        }
        let last = p[p.len() - 1];
        if n >= last.n {
            return (last.k_bar, last.lambda_bar);
        }
        let i = p.partition_point(|e| e.n <= n) - 1;
        let s = (n - p[i].n) / (p[i + 1].n - p[i].n);
        (p[i].k_bar + s * (p[i + 1].k_bar - p[i].k_bar), p[i].lambda_bar + s * (p[i + 1].lambda_bar - p[i].lambda_bar))
    }

    /// `(ω_n, ζ)` of the equivalent system `m ẍ + λ̄ ẋ + k̄ x = 0`.
    pub fn equivalent(&self, n: f64) -> (f64, f64) {
        let (k, l) = self.interpolate(n);
        ((k / self.mass).sqrt(), l / (2.0 * (k * self.mass).sqrt()))
    }
}

/// Peak envelope of `s²` by 3-point local maxima and monotone cubic interpolation.
fn envelope(series: &[f64], dt: f64, with_origin: bool) -> (Pchip, usize) {
    let sq: Vec<f64> = series.iter().map(|v| v * v).collect();
    let mut x = Vec::new();
    let mut y = Vec::new();
    if with_origin && !sq.is_empty() {
        x.push(0.0);
        y.push(sq[0]);
    }
    let mut peaks = 0;
    for i in 1..sq.len().saturating_sub(1) {
        if sq[i] > sq[i - 1] && sq[i] >= sq[i + 1] {
            x.push(i as f64 * dt);
            y.push(sq[i]);
            peaks += 1;
        }
    }
    if x.is_empty() {
        x.push(0.0);
        y.push(0.0);
    }
    (Pchip::new(x, y), peaks)
}

fn trapezoid_on_grid<F: Fn(f64) -> f64>(f: F, dt: f64, last: usize) -> f64 {
    if last == 0 {
        return 0.0;
    }
    let mut s = 0.5 * (f(0.0) + f(last as f64 * dt));
    for i in 1..last {
        s += f(i as f64 * dt);
    }
    s * dt
}

/// Effective stiffness and damping of the primary DOF after impulse `n`.
pub fn effective_measures(
    model: &SystemModel,
    n: f64,
    pattern: ImpulsePattern,
    opts: &RareOptions,
) -> Result<(EffectivePoint, EffectiveTrace)> {
    if n == 0.0 {
        return Err(PdsError::InvalidModel("effective measures need a nonzero impulse".into()));
    }
    let dof = model.primary_dof();
    let m = model.mass(dof).unwrap();
    let qs = [Quantity::displacement(dof), Quantity::velocity(dof)];
    let r = simulate_impulse(model, n, pattern, &qs, opts)?;
    let (xs, vs) = (&r.series[0], &r.series[1]);
    let last = last_exceedance(xs, opts.rho_c).unwrap_or(0);
    if r.capped && last as f64 * r.dt > r.cap - model.primary_period() {
        return Err(PdsError::NoDecay { cap: r.cap });
    }
    let horizon = last as f64 * r.dt;
    let (ex, px) = envelope(&xs[..=last], r.dt, false);
    let (ev, pv) = envelope(&vs[..=last], r.dt, true);
    let peaks = px.min(pv);
    if peaks < 4 {
        return Err(PdsError::NotOscillatory { peaks });
    }
    let ix = trapezoid_on_grid(|t| ex.eval(t), r.dt, last);
    let iv = trapezoid_on_grid(|t| ev.eval(t), r.dt, last);
    let k_bar = m * iv / ix;
    let lambda_bar = m * (ev.eval(0.0) - ev.eval(horizon)) / iv;
    let t: Vec<f64> = (0..=last).map(|i| i as f64 * r.dt).collect();
    let k_eff = t.iter().map(|&s| m * ev.eval(s) / ex.eval(s)).collect();
    let lambda_eff = t.iter().map(|&s| -m * ev.derivative(s) / ev.eval(s)).collect();
    Ok((EffectivePoint { n, k_bar, lambda_bar, horizon }, EffectiveTrace { t, k_eff, lambda_eff }))
}

/// Effective measures on `opts.effective_nodes` impulses spanning the η grid.
pub fn effective_measures_grid(
    model: &SystemModel,
    eta: &EtaDistribution,
    pattern: ImpulsePattern,
    opts: &RareOptions,
) -> Result<EffectiveMeasures> {
    let span = opts.eta_span * eta.sigma();
    let count = if span == 0.0 { 1 } else { opts.effective_nodes.max(2) };
    let ns: Vec<f64> = (0..count)
        .map(|i| if count == 1 { eta.mean } else { eta.mean - span + 2.0 * span * i as f64 / (count - 1) as f64 })
        .collect();
    let points = ns
        .par_iter()
        .map(|&n| effective_measures(model, n, pattern, opts).map(|(p, _)| p))
        .collect::<Result<Vec<_>>>()?;
    Ok(EffectiveMeasures { mass: model.mass(model.primary_dof()).unwrap(), points })
}

/// Rare profiles of primary-DOF quantities from the equivalent linear system.
pub fn rare_profiles_effective(
    model: &SystemModel,
    forcing: &ForcingModel,
    eta: &EtaDistribution,
    measures: &EffectiveMeasures,
    quantities: &[Quantity],
    opts: &RareOptions,
) -> Result<Vec<RareEventProfile>> {
    let dof = model.primary_dof();
    if let Some(q) = quantities.iter().find(|q| q.dof != dof) {
        return Err(PdsError::InvalidModel(format!("effective measures only describe the primary DOF, not {q}")));
    }
    let nodes = eta.nodes(opts.eta_nodes, opts.eta_span);
    let cap = opts.cap_for(model);
    let period = model.primary_period();
    let per_node: Vec<Result<Vec<NodeSummary>>> = nodes
        .par_iter()
        .map(|node| {
            let (w, z) = measures.equivalent(node.n);
            let series = equivalent_series(w, z, node.n, quantities, cap, opts);
            let guard = series.1.then_some((cap, period));
            quantities.iter().zip(&series.0).map(|(q, s)| summarize(s, opts.dt, *q, opts, guard)).collect()
        })
        .collect();
    collect_profiles(quantities, &nodes, per_node, forcing, opts.bins)
}

/// Samples the closed-form equivalent response until its energy bound decays.
fn equivalent_series(
    omega_n: f64,
    zeta: f64,
    n: f64,
    quantities: &[Quantity],
    cap: f64,
    opts: &RareOptions,
) -> (Vec<Vec<f64>>, bool) {
    let a = zeta * omega_n;
    let mut out = vec![Vec::new(); quantities.len()];
    let mut max = vec![0.0_f64; quantities.len()];
    let steps = (cap / opts.dt) as usize;
    for i in 0..=steps {
        let t = i as f64 * opts.dt;
        let r = sdof_impulse_response(omega_n, zeta, n, t);
        for (k, q) in quantities.iter().enumerate() {
            let v = match q.derivative {
                Derivative::Displacement => r[0],
                Derivative::Velocity => r[1],
                Derivative::Acceleration => r[2],
            };
            if !(i == 0 && q.derivative == Derivative::Acceleration) {
                max[k] = max[k].max(v.abs());
            }
            out[k].push(v);
        }
        let amp = (r[1] * r[1] + omega_n * omega_n * r[0] * r[0]).sqrt();
        let decayed = quantities.iter().zip(&max).all(|(q, &m)| {
            let bound = match q.derivative {
                Derivative::Displacement => amp / omega_n,
                Derivative::Velocity => amp,
                Derivative::Acceleration => (2.0 * a + omega_n) * amp,
            };
            m > 0.0 && bound < opts.rho_c * m
        });
        if decayed {
            return (out, false);
        }
    }
    (out, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::BackgroundSpectrum;
    use crate::systems::{Attachment, Dof, Oscillator};

    fn sdof() -> SystemModel {
        SystemModel::seat(Oscillator::new(1.0, 0.01, 1.0), None).unwrap()
    }

    fn forcing() -> ForcingModel {
        ForcingModel::new(BackgroundSpectrum::new(1.582e-4, 1.0).unwrap(), 5000.0, 0.1, 0.0141, ImpulsePattern::PrimaryOnly)
            .unwrap()
    }

    #[test]
    fn exponential_duration() {
        let dt = 1e-4;
        let s: Vec<f64> = (0..100_000).map(|i| (-(i as f64) * dt).exp()).collect();
        assert!((rare_duration(&s, dt, 0.1) - 10f64.ln()).abs() < 2e-4);
        assert_eq!(rare_duration(&[0.0; 10], dt, 0.1), 0.0);
    }

    #[test]
    fn eta_nodes_are_normalized() {
        let e = EtaDistribution::new(0.1, 0.0227f64.powi(2)).unwrap();
        let nodes = e.nodes(101, 4.0);
        assert_eq!(nodes.len(), 101);
        assert!((nodes.iter().map(|n| n.weight).sum::<f64>() - 1.0).abs() < 1e-12);
        let mean: f64 = nodes.iter().map(|n| n.n * n.weight).sum();
        assert!((mean - 0.1).abs() < 1e-12);
        let d = EtaDistribution::new(0.1, 0.0).unwrap().nodes(101, 4.0);
        assert_eq!(d, vec![EtaNode { n: 0.1, weight: 1.0 }]);
    }

    #[test]
    fn eta_from_table_values() {
        let f = forcing();
        let var_b: f64 = 0.0178 * 0.0178;
        let e = EtaDistribution::new(f.mu_alpha, var_b + f.sigma_alpha.powi(2)).unwrap();
        assert!((e.sigma() - 0.0227).abs() / 0.0227 < 0.01);
    }

    #[test]
    fn linear_sdof_duration_matches_envelope() {
        let r = simulate_impulse(&sdof(), 1.0, ImpulsePattern::PrimaryOnly, &[Quantity::displacement(Dof::Seat)], &RareOptions::default())
            .unwrap();
        let tau = rare_duration(&r.series[0], r.dt, 0.1);
        let expected = 10f64.ln() / 0.005;
        assert!((tau - expected).abs() < 2.0 * std::f64::consts::PI, "{tau} vs {expected}");
        assert!(!r.capped);
    }

    #[test]
    fn closed_form_matches_simulation() {
        let opts = RareOptions::default();
        let r = simulate_impulse(&sdof(), 0.1, ImpulsePattern::PrimaryOnly, &sdof().quantities(), &opts).unwrap();
        let z = 0.01 / 2.0;
        for i in (0..r.series[0].len()).step_by(97) {
            let c = sdof_impulse_response(1.0, z, 0.1, i as f64 * opts.dt);
            for k in 0..3 {
                assert!((r.series[k][i] - c[k]).abs() < 1e-8, "k={k} i={i}");
            }
        }
    }

    #[test]
    fn overdamped_branch_satisfies_ode() {
        let (w, z, n) = (1.3, 2.5, 0.2);
        for &t in &[0.0, 0.4, 3.0] {
            let h = 1e-5;
            let r = sdof_impulse_response(w, z, n, t);
            let rp = sdof_impulse_response(w, z, n, t + h);
            assert!(((rp[0] - r[0]) / h - r[1]).abs() < 1e-4);
            assert!((r[2] + 2.0 * z * w * r[1] + w * w * r[0]).abs() < 1e-12);
        }
        assert!((sdof_impulse_response(w, z, n, 0.0)[1] - n).abs() < 1e-15);
        let c = sdof_impulse_response(1.0, 1.0, n, 0.0);
        assert_eq!((c[0], c[1]), (0.0, n));
    }

    #[test]
    fn linear_effective_measures_recover_coefficients() {
        let (p, trace) = effective_measures(&sdof(), 0.1, ImpulsePattern::PrimaryOnly, &RareOptions::default()).unwrap();
        assert!((p.k_bar - 1.0).abs() < 0.02, "{}", p.k_bar);
        assert!((p.lambda_bar - 0.01).abs() < 0.02 * 0.01, "{}", p.lambda_bar);
        assert!((trace.k_eff[trace.k_eff.len() / 2] - 1.0).abs() < 0.05);
    }

    #[test]
    fn overdamped_system_is_not_oscillatory() {
        let m = SystemModel::seat(Oscillator::new(1.0, 3.0, 1.0), None).unwrap();
        let r = effective_measures(&m, 0.1, ImpulsePattern::PrimaryOnly, &RareOptions::default());
        assert!(matches!(r, Err(PdsError::NotOscillatory { .. })));
    }

    #[test]
    fn large_probability_is_rejected() {
        let mut f = forcing();
        f.t_alpha = 50.0;
        let e = EtaDistribution::new(0.1, 1e-4).unwrap();
        let opts = RareOptions { eta_nodes: 5, ..RareOptions::default() };
        let r = rare_pdf_simulated(&sdof(), &f, &e, Quantity::displacement(Dof::Seat), &opts);
        assert!(matches!(r, Err(PdsError::PrOutOfRange(_))));
    }

    #[test]
    fn cap_without_decay_is_reported() {
        let m = SystemModel::seat(Oscillator::new(1.0, 0.0, 1.0), None).unwrap();
        let e = EtaDistribution::new(0.1, 0.0).unwrap();
        let opts = RareOptions { cap: Some(50.0), ..RareOptions::default() };
        let r = rare_pdf_simulated(&m, &forcing(), &e, Quantity::displacement(Dof::Seat), &opts);
        assert!(matches!(r, Err(PdsError::NoDecay { .. })));
    }

    #[test]
    fn nes_profile_is_normalized() {
        let m = SystemModel::seat(Oscillator::new(1.0, 0.01, 1.0), Some(Attachment::cubic_nes(0.05, 0.021, 3.461))).unwrap();
        let e = EtaDistribution::new(0.1, 0.0227f64.powi(2)).unwrap();
        let opts = RareOptions { eta_nodes: 9, ..RareOptions::default() };
        let ps = rare_profiles_simulated(&m, &forcing(), &e, &m.quantities(), &opts).unwrap();
        for p in &ps {
            assert!((p.density.mass() - 1.0).abs() < 1e-9, "{}", p.quantity);
            assert!(p.probability > 0.0 && p.probability < 1.0);
            assert!(p.density.density.iter().all(|d| *d >= 0.0));
        }
    }
}
