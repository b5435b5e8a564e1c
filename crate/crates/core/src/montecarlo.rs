//! Direct Monte-Carlo reference: synthesized background plus impulse train,
//! segmented integration and pooled histograms.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp, Normal};
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{PdsError, Result};
use crate::ode::{integrate, Control, OdeOptions, UniformSampler};
use crate::spectra::{moment_integrals, BackgroundSpectrum, FrequencyGrid};
use crate::statlin::LinearizationSolution;
use crate::synthesis::{background_sigma, Frame, ResponsePdf};
use crate::systems::{Derivative, ImpulsePattern, Quantity, SystemModel, MAX_STATE};

/// Background spectrum plus the Poisson train of rare impulses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForcingModel {
    pub spectrum: BackgroundSpectrum,
    /// Mean inter-arrival time `T_α = 1/ν_α`.
    pub t_alpha: f64,
    pub mu_alpha: f64,
    pub sigma_alpha: f64,
    #[serde(default)]
    pub pattern: ImpulsePattern,
}

impl ForcingModel {
    pub fn new(
        spectrum: BackgroundSpectrum,
        t_alpha: f64,
        mu_alpha: f64,
        sigma_alpha: f64,
        pattern: ImpulsePattern,
    ) -> Result<Self> {
        let f = Self { spectrum, t_alpha, mu_alpha, sigma_alpha, pattern };
        f.validate()?;
        Ok(f)
    }

    /// Impulse mean set to `beta` background velocity standard deviations.
    pub fn from_severity(
        spectrum: BackgroundSpectrum,
        grid: &FrequencyGrid,
        t_alpha: f64,
        beta: f64,
        sigma_alpha: f64,
        pattern: ImpulsePattern,
    ) -> Result<Self> {
        if !(beta > 1.0) {
            return Err(PdsError::InvalidModel(format!("severity ratio beta must exceed 1, got {beta}")));
        }
        let m = moment_integrals(&spectrum, grid)?;
        Self::new(spectrum, t_alpha, beta * m.sigma_h_dot(), sigma_alpha, pattern)
    }

    pub fn validate(&self) -> Result<()> {
        BackgroundSpectrum::new(self.spectrum.q, self.spectrum.shift)?;
        if !(self.t_alpha > 0.0 && self.t_alpha.is_finite()) {
            return Err(PdsError::InvalidModel(format!("t_alpha must be positive, got {}", self.t_alpha)));
        }
        if !(self.sigma_alpha >= 0.0 && self.sigma_alpha.is_finite() && self.mu_alpha.is_finite()) {
            return Err(PdsError::InvalidModel(format!(
                "impulse statistics need finite mu_alpha and sigma_alpha >= 0 (got {}, {})",
                self.mu_alpha, self.sigma_alpha
            )));
        }
        Ok(())
    }

    pub fn nu_alpha(&self) -> f64 {
        1.0 / self.t_alpha
    }
}

/// One random-phase realization of the base motion.
///
/// `h(t) = Re[e^{iω₀t} E(t)]` where the envelope `E` holds the `bins` harmonics
/// `c_k = A_k e^{iφ_k}` at offsets `kΔω`. `E` is periodic in `2π/Δω`; it is tabulated
/// by one inverse FFT per derivative order and evaluated by cubic Hermite
/// interpolation using its exact derivative.
#[derive(Debug, Clone)]
pub struct BackgroundSeries {
    omega0: f64,
    period: f64,
    step: f64,
    /// `[h, ḣ, ḧ]` envelopes and their time derivatives on the FFT grid.
    env: [Vec<Complex64>; 3],
    denv: [Vec<Complex64>; 3],
}

impl BackgroundSeries {
    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn sample_step(&self) -> f64 {
        self.step
    }

    #[inline]
    fn eval(&self, t: f64, order: usize) -> f64 {
        let n = self.env[order].len();
        let tau = t.rem_euclid(self.period) / self.step;
        let j = (tau as usize).min(n - 1);
        let s = tau - j as f64;
        let k = (j + 1) % n;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let (e, d) = (&self.env[order], &self.denv[order]);
        let v = e[j] * h00 + d[j] * (h10 * self.step) + e[k] * h01 + d[k] * (h11 * self.step);
        (Complex64::cis(self.omega0 * t) * v).re
    }

    pub fn displacement(&self, t: f64) -> f64 {
        self.eval(t, 0)
    }

    pub fn velocity(&self, t: f64) -> f64 {
        self.eval(t, 1)
    }

    pub fn acceleration(&self, t: f64) -> f64 {
        self.eval(t, 2)
    }

    /// Value of the given derivative order of `h` at `t`.
    pub fn value(&self, t: f64, derivative: Derivative) -> f64 {
        match derivative {
            Derivative::Displacement => self.displacement(t),
            Derivative::Velocity => self.velocity(t),
            Derivative::Acceleration => self.acceleration(t),
        }
    }

    /// `h` on `t0 + k dt` for `k < count`.
    pub fn sample(&self, t0: f64, dt: f64, count: usize) -> Vec<f64> {
        (0..count).map(|k| self.displacement(t0 + k as f64 * dt)).collect()
    }
}

/// Random-phase synthesis of `h` over `bins` equal frequency cells of `grid`.
///
/// Amplitudes are `√(2 S(ω_k) Δω)` at the cell centres. The tabulation step is the
/// largest power-of-two division of the envelope period not exceeding `2π / (10 ω_max)`.
pub fn generate_background<R: Rng + ?Sized>(
    spectrum: &BackgroundSpectrum,
    grid: &FrequencyGrid,
    bins: usize,
    rng: &mut R,
) -> Result<BackgroundSeries> {
    if bins == 0 || !(grid.omega_max > grid.omega_min) {
        return Err(PdsError::InvalidModel("background synthesis needs bins > 0 and a non-empty window".into()));
    }
    let d_omega = (grid.omega_max - grid.omega_min) / bins as f64;
    let omega0 = grid.omega_min + 0.5 * d_omega;
    let period = 2.0 * std::f64::consts::PI / d_omega;
    let max_step = 2.0 * std::f64::consts::PI / (10.0 * grid.omega_max);
    let mut n = (2 * bins).next_power_of_two();
    while period / n as f64 > max_step {
        n *= 2;
    }
    let coeffs: Vec<Complex64> = (0..bins)
        .map(|k| {
            let w = omega0 + k as f64 * d_omega;
            let a = (2.0 * spectrum.density(w) * d_omega).sqrt();
            Complex64::from_polar(a, rng.random_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let fft = FftPlanner::new().plan_fft_inverse(n);
    let table = |factor: &dyn Fn(usize) -> Complex64| {
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (k, c) in coeffs.iter().enumerate() {
            buf[k] = c * factor(k);
        }
        fft.process(&mut buf);
        buf
    };
    let i = Complex64::i();
    let omega = |k: usize| omega0 + k as f64 * d_omega;
    let order = |o: usize, k: usize| (i * omega(k)).powu(o as u32);
    let mut env: [Vec<Complex64>; 3] = Default::default();
    let mut denv: [Vec<Complex64>; 3] = Default::default();
    for o in 0..3 {
        env[o] = table(&|k| order(o, k));
        denv[o] = table(&|k| order(o, k) * i * (k as f64 * d_omega));
    }
    Ok(BackgroundSeries { omega0, period, step: period / n as f64, env, denv })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Impulse {
    pub time: f64,
    /// Velocity jump `n` applied at `time`.
    pub magnitude: f64,
}

/// Poisson impulse times on `(t0, t0 + length]` with Gaussian magnitudes.
///
/// With `count = Some(n)` whole trains are redrawn until exactly `n` events fall in the window.
pub fn generate_impulse_train<R: Rng + ?Sized>(
    forcing: &ForcingModel,
    t0: f64,
    length: f64,
    count: Option<usize>,
    rng: &mut R,
) -> Result<Vec<Impulse>> {
    let gap = Exp::new(forcing.nu_alpha()).map_err(|e| PdsError::InvalidModel(e.to_string()))?;
    let size = Normal::new(forcing.mu_alpha, forcing.sigma_alpha).map_err(|e| PdsError::InvalidModel(e.to_string()))?;
    const MAX_DRAWS: usize = 100_000;
    for _ in 0..MAX_DRAWS {
        let mut times = Vec::new();
        let mut t = gap.sample(rng);
        while t <= length {
            times.push(t0 + t);
            t += gap.sample(rng);
        }
        if count.is_none_or(|n| n == times.len()) {
            return Ok(times.into_iter().map(|time| Impulse { time, magnitude: size.sample(rng) }).collect());
        }
    }
    Err(PdsError::InvalidModel(format!(
        "could not draw {count:?} impulses in a window of {length} with mean spacing {}",
        forcing.t_alpha
    )))
}

/// One histogram target of the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McTarget {
    pub quantity: Quantity,
    pub frame: Frame,
    pub bin_width: f64,
}

/// Targets for `quantities` in both frames, binned at `fraction` of the background σ.
pub fn targets_from_linearization(
    lin: &LinearizationSolution,
    quantities: &[Quantity],
    frames: &[Frame],
    fraction: f64,
) -> Result<Vec<McTarget>> {
    let mut out = Vec::new();
    for &quantity in quantities {
        for &frame in frames {
            let bin_width = fraction * background_sigma(lin, quantity, frame)?;
            out.push(McTarget { quantity, frame, bin_width });
        }
    }
    Ok(out)
}

/// Fixed-width histogram with integer counts and running raw moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McHistogram {
    pub quantity: Quantity,
    pub frame: Frame,
    pub bin_width: f64,
    /// Bin `i` covers `[i w, (i + 1) w)`.
    pub counts: BTreeMap<i64, u64>,
    pub total: u64,
    /// `Σ r^k` for `k = 1..=4`.
    pub power_sums: [f64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    pub density: f64,
}

impl McHistogram {
    fn empty(t: &McTarget) -> Self {
        Self {
            quantity: t.quantity,
            frame: t.frame,
            bin_width: t.bin_width,
            counts: BTreeMap::new(),
            total: 0,
            power_sums: [0.0; 4],
        }
    }

    fn merge(&mut self, other: &McHistogram) {
        for (k, c) in &other.counts {
            *self.counts.entry(*k).or_insert(0) += c;
        }
        self.total += other.total;
        for k in 0..4 {
            self.power_sums[k] += other.power_sums[k];
        }
    }

    pub fn bins(&self) -> Vec<McBin> {
        let norm = 1.0 / (self.total as f64 * self.bin_width);
        self.counts
            .iter()
            .map(|(&i, &count)| McBin {
                lo: i as f64 * self.bin_width,
                hi: (i + 1) as f64 * self.bin_width,
                count,
                density: count as f64 * norm,
            })
            .collect()
    }

    /// Raw moment `E[r^k]`, `1 <= k <= 4`.
    pub fn raw_moment(&self, k: usize) -> f64 {
        self.power_sums[k - 1] / self.total as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.raw_moment(1);
        self.raw_moment(2) - m * m
    }

    /// Central fourth moment over variance squared.
    pub fn kurtosis(&self) -> f64 {
        let (m1, m2, m3, m4) = (self.raw_moment(1), self.raw_moment(2), self.raw_moment(3), self.raw_moment(4));
        let c4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1.powi(4);
        c4 / self.variance().powi(2)
    }
}

/// Dense accumulator that grows to cover whichever bins are hit.
#[derive(Debug, Clone, Default)]
struct Counter {
    offset: i64,
    counts: Vec<u64>,
    sums: [f64; 4],
    total: u64,
}

impl Counter {
    #[inline]
    fn add(&mut self, bin: i64, r: f64) {
        if self.counts.is_empty() {
            self.offset = bin;
            self.counts.push(0);
        }
        if bin < self.offset {
            let grow = (self.offset - bin) as usize;
            self.counts.splice(0..0, std::iter::repeat_n(0, grow));
            self.offset = bin;
        }
        let i = (bin - self.offset) as usize;
        if i >= self.counts.len() {
            self.counts.resize(i + 1, 0);
        }
        self.counts[i] += 1;
        self.total += 1;
        let r2 = r * r;
        self.sums[0] += r;
        self.sums[1] += r2;
        self.sums[2] += r2 * r;
        self.sums[3] += r2 * r2;
    }

    fn into_histogram(self, t: &McTarget) -> McHistogram {
        let mut h = McHistogram::empty(t);
        for (i, &c) in self.counts.iter().enumerate() {
            if c > 0 {
                h.counts.insert(self.offset + i as i64, c);
            }
        }
        h.total = self.total;
        h.power_sums = self.sums;
        h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloOptions {
    pub realizations: usize,
    /// Impulses per realization, conditioned exactly; zero disables impulses.
    pub impulses: usize,
    /// Recorded length; `None` means `impulses * T_α`.
    pub duration: Option<f64>,
    /// Discarded start-up interval; `None` means `5 / min(ζ ω)` over the host oscillators.
    pub trim: Option<f64>,
    pub sample_dt: f64,
    pub background_bins: usize,
    pub rtol: f64,
    pub atol: f64,
    pub seed: u64,
}

impl Default for MonteCarloOptions {
    fn default() -> Self {
        Self {
            realizations: 10,
            impulses: 100,
            duration: None,
            trim: None,
            sample_dt: 0.05,
            background_bins: 2000,
            rtol: 1e-7,
            atol: 1e-10,
            seed: 0,
        }
    }
}

impl MonteCarloOptions {
    fn record_length(&self, forcing: &ForcingModel) -> Result<f64> {
        let len = self.duration.unwrap_or(self.impulses as f64 * forcing.t_alpha);
        if !(len > 0.0 && len.is_finite()) || self.realizations == 0 || !(self.sample_dt > 0.0) {
            return Err(PdsError::InvalidModel(
                "Monte-Carlo runs need realizations > 0, sample_dt > 0 and a positive record length".into(),
            ));
        }
        Ok(len)
    }
}

/// Default start-up trim for `model`.
pub fn transient_trim(model: &SystemModel) -> f64 {
    use crate::systems::Topology;
    let decay = |o: &crate::systems::Oscillator| o.damping_ratio() * o.natural_frequency();
    let slowest = match model.topology {
        Topology::Seat { seat } => decay(&seat),
        Topology::DeckSeat { deck, seat } => decay(&deck).min(decay(&seat)),
    };
    5.0 / slowest
}

/// Independent generators for realization `r`: phases on stream `2r`, impulses on `2r + 1`.
pub fn realization_rngs(seed: u64, r: usize) -> (ChaCha20Rng, ChaCha20Rng) {
    let mut a = ChaCha20Rng::seed_from_u64(seed);
    a.set_stream(2 * r as u64);
    let mut b = ChaCha20Rng::seed_from_u64(seed);
    b.set_stream(2 * r as u64 + 1);
    (a, b)
}

/// Integrates one realization, feeding every post-trim sample into histograms for `targets`.
pub fn simulate_realization(
    model: &SystemModel,
    forcing: &ForcingModel,
    grid: &FrequencyGrid,
    targets: &[McTarget],
    opts: &MonteCarloOptions,
    index: usize,
) -> Result<Vec<McHistogram>> {
    model.validate()?;
    let length = opts.record_length(forcing)?;
    let trim = opts.trim.unwrap_or_else(|| transient_trim(model));
    let (mut phase_rng, mut impulse_rng) = realization_rngs(opts.seed, index);
    let background = generate_background(&forcing.spectrum, grid, opts.background_bins, &mut phase_rng)?;
    let impulses = if opts.impulses == 0 {
        Vec::new()
    } else {
        generate_impulse_train(forcing, trim, length, Some(opts.impulses), &mut impulse_rng)?
    };
    let t_end = trim + length;
    let dim = model.dim();
    let ode = OdeOptions { rtol: opts.rtol, atol: opts.atol, h_max: 1.0, max_steps: usize::MAX };
    let rhs = |t: f64, y: &[f64; MAX_STATE]| model.rhs(y, background.acceleration(t));
    let want_abs = targets.iter().any(|t| t.frame == Frame::Absolute);
    let mut counters = vec![Counter::default(); targets.len()];
    let first = (trim / opts.sample_dt).ceil() as u64;
    let mut sampler = UniformSampler::new(first as f64 * opts.sample_dt, opts.sample_dt);
    let mut y = [0.0; MAX_STATE];
    let mut t = 0.0;
    let mut sink = |ts: f64, ys: &[f64; MAX_STATE]| {
        let base_acc = background.acceleration(ts);
        let acc = model.accelerations(ys, base_acc);
        let base = if want_abs { [background.displacement(ts), background.velocity(ts), base_acc] } else { [0.0; 3] };
        for (c, tgt) in counters.iter_mut().zip(targets) {
            let i = model.dof_index(tgt.quantity.dof).expect("target DOF checked above");
            let (rel, order) = match tgt.quantity.derivative {
                Derivative::Displacement => (ys[2 * i], 0),
                Derivative::Velocity => (ys[2 * i + 1], 1),
                Derivative::Acceleration => (acc[i], 2),
            };
            let r = match tgt.frame {
                Frame::Relative => rel,
                Frame::Absolute => rel + base[order],
            };
            c.add((r / tgt.bin_width).floor() as i64, r);
        }
    };
    for tgt in targets {
        if model.dof_index(tgt.quantity.dof).is_none() || !(tgt.bin_width > 0.0) {
            return Err(PdsError::InvalidModel(format!("invalid Monte-Carlo target {tgt:?}")));
        }
    }
    let stops = impulses.iter().map(|i| Some(*i)).chain(std::iter::once(None));
    for imp in stops {
        let seg_end = imp.map(|i| i.time).unwrap_or(t_end);
        let (t1, y1) = integrate(rhs, dim, t, y, seg_end, &ode, |step| {
            if step.t1 >= sampler.time_of(0) {
                sampler.feed(step, &mut sink);
            }
            Control::Continue
        })?;
        t = t1;
        y = y1;
        if let Some(i) = imp {
            y = model.apply_impulse(&y, i.magnitude, forcing.pattern);
        }
    }
    Ok(counters.into_iter().zip(targets).map(|(c, t)| c.into_histogram(t)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloResult {
    pub histograms: Vec<McHistogram>,
    pub realizations: usize,
    pub record_length: f64,
    pub trim: f64,
    pub seed: u64,
}

impl MonteCarloResult {
    pub fn histogram(&self, q: Quantity, frame: Frame) -> Option<&McHistogram> {
        self.histograms.iter().find(|h| h.quantity == q && h.frame == frame)
    }
}

/// Pools `opts.realizations` independent realizations. The merge runs in
/// realization order, so the result does not depend on the thread count.
pub fn ensemble_pdf(
    model: &SystemModel,
    forcing: &ForcingModel,
    grid: &FrequencyGrid,
    targets: &[McTarget],
    opts: &MonteCarloOptions,
) -> Result<MonteCarloResult> {
    forcing.validate()?;
    let record_length = opts.record_length(forcing)?;
    let runs: Vec<Result<Vec<McHistogram>>> = (0..opts.realizations)
        .into_par_iter()
        .map(|r| simulate_realization(model, forcing, grid, targets, opts, r))
        .collect();
    let mut pooled: Vec<McHistogram> = targets.iter().map(McHistogram::empty).collect();
    for run in runs {
        for (acc, h) in pooled.iter_mut().zip(run?) {
            acc.merge(&h);
        }
    }
    Ok(MonteCarloResult {
        histograms: pooled,
        realizations: opts.realizations,
        record_length,
        trim: opts.trim.unwrap_or_else(|| transient_trim(model)),
        seed: opts.seed,
    })
}

/// Log-density agreement between a Monte-Carlo histogram and an estimated PDF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogComparison {
    /// Largest `|log10 p_mc − log10 p_est|` over the compared bins.
    pub max_abs: f64,
    pub mean_abs: f64,
    pub bins: usize,
    /// Centre of the worst bin.
    pub worst_at: f64,
}

/// Compares bin densities over the bins holding at least `min_count` samples
/// and optionally lying at `|r| >= min_abs`. The estimate is averaged over each bin.
pub fn compare_log10(mc: &McHistogram, pdf: &ResponsePdf, min_count: u64, min_abs: f64) -> LogComparison {
    let mut out = LogComparison { max_abs: 0.0, mean_abs: 0.0, bins: 0, worst_at: f64::NAN };
    for b in mc.bins() {
        let centre = 0.5 * (b.lo + b.hi);
        if b.count < min_count || centre.abs() < min_abs {
            continue;
        }
        let est = pdf.interval_mass(b.lo, b.hi) / (b.hi - b.lo);
        let d = if est > 0.0 { (b.density.log10() - est.log10()).abs() } else { f64::INFINITY };
        out.bins += 1;
        out.mean_abs += d;
        if d > out.max_abs || out.worst_at.is_nan() {
            out.max_abs = out.max_abs.max(d);
            out.worst_at = centre;
        }
    }
    if out.bins > 0 {
        out.mean_abs /= out.bins as f64;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statlin::solve_fixed_point;
    use rand::Rng;
    use crate::systems::{Dof, Oscillator};
    use proptest::prelude::*;

    fn spectrum() -> BackgroundSpectrum {
        BackgroundSpectrum::new(1.582e-4, 1.0).unwrap()
    }

    fn forcing() -> ForcingModel {
        ForcingModel::new(spectrum(), 5000.0, 0.1, 0.0141, ImpulsePattern::PrimaryOnly).unwrap()
    }

    #[test]
    fn background_variance_matches_spectrum() {
        let s = spectrum();
        let grid = s.default_grid();
        let m = moment_integrals(&s, &grid).unwrap();
        let series = generate_background(&s, &grid, 2000, &mut ChaCha20Rng::seed_from_u64(3)).unwrap();
        assert!(series.sample_step() <= 2.0 * std::f64::consts::PI / (10.0 * grid.omega_max));
        let n = 200_000;
        let xs = series.sample(0.0, 0.05, n);
        let var = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
        assert!((var / m.displacement - 1.0).abs() < 0.05, "{var} vs {}", m.displacement);
    }

    #[test]
    fn interpolation_matches_direct_sum() {
        let s = spectrum();
        let grid = s.default_grid();
        let bins = 200;
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let series = generate_background(&s, &grid, bins, &mut rng).unwrap();
        // Replay the phase draws to evaluate the cosine sum directly.
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let dw = (grid.omega_max - grid.omega_min) / bins as f64;
        let terms: Vec<(f64, f64, f64)> = (0..bins)
            .map(|k| {
                let w = grid.omega_min + (k as f64 + 0.5) * dw;
                (w, (2.0 * s.density(w) * dw).sqrt(), rng.random_range(0.0..std::f64::consts::TAU))
            })
            .collect();
        let scale = terms.iter().map(|(w, a, _)| a * w * w).sum::<f64>();
        for t in [0.0, 1.234, 77.7, 1000.1, 12345.6] {
            let direct_h: f64 = terms.iter().map(|(w, a, p)| a * (w * t + p).cos()).sum();
            let direct_a: f64 = terms.iter().map(|(w, a, p)| -a * w * w * (w * t + p).cos()).sum();
            assert!((series.displacement(t) - direct_h).abs() < 1e-5 * scale);
            assert!((series.acceleration(t) - direct_a).abs() < 1e-3 * scale);
        }
    }

    #[test]
    fn zero_magnitude_spectrum_gives_zero_series() {
        let s = BackgroundSpectrum { q: 0.0, shift: 1.0 };
        let series = generate_background(&s, &spectrum().default_grid(), 500, &mut ChaCha20Rng::seed_from_u64(1)).unwrap();
        assert!(series.sample(0.0, 0.3, 1000).iter().all(|x| *x == 0.0));
    }

    #[test]
    fn conditioned_train_has_exact_count() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let train = generate_impulse_train(&forcing(), 100.0, 500_000.0, Some(100), &mut rng).unwrap();
        assert_eq!(train.len(), 100);
        assert!(train.windows(2).all(|w| w[0].time < w[1].time));
        assert!(train.iter().all(|i| i.time > 100.0 && i.time <= 500_100.0));
        let mean = train.iter().map(|i| i.magnitude).sum::<f64>() / 100.0;
        assert!((mean - 0.1).abs() < 5.0 * 0.0141 / 10.0);
    }

    fn damped_seat() -> SystemModel {
        SystemModel::seat(Oscillator::new(1.0, 0.2, 1.0), None).unwrap()
    }

    fn linear_opts(seed: u64) -> MonteCarloOptions {
        MonteCarloOptions { realizations: 2, impulses: 0, duration: Some(20_000.0), seed, ..Default::default() }
    }

    fn seat_targets(width: f64) -> Vec<McTarget> {
        vec![
            McTarget { quantity: Quantity::displacement(Dof::Seat), frame: Frame::Relative, bin_width: width },
            McTarget { quantity: Quantity::displacement(Dof::Seat), frame: Frame::Absolute, bin_width: width },
        ]
    }

    #[test]
    fn linear_background_matches_linearization() {
        let model = damped_seat();
        let f = forcing();
        let grid = f.spectrum.default_grid();
        let lin = solve_fixed_point(&model, &f.spectrum, &grid).unwrap();
        let res = ensemble_pdf(&model, &f, &grid, &seat_targets(1e-3), &linear_opts(9)).unwrap();
        for frame in [Frame::Relative, Frame::Absolute] {
            let h = res.histogram(Quantity::displacement(Dof::Seat), frame).unwrap();
            let expect = background_sigma(&lin, h.quantity, frame).unwrap().powi(2);
            assert!((h.variance() / expect - 1.0).abs() < 0.05, "{frame:?}: {} vs {expect}", h.variance());
            assert!((h.kurtosis() - 3.0).abs() < 0.3, "kurtosis {}", h.kurtosis());
        }
    }

    #[test]
    fn ensemble_is_reproducible_and_seed_sensitive() {
        let model = damped_seat();
        let f = forcing();
        let grid = f.spectrum.default_grid();
        let opts = MonteCarloOptions { duration: Some(2_000.0), ..linear_opts(4) };
        let a = ensemble_pdf(&model, &f, &grid, &seat_targets(1e-3), &opts).unwrap();
        let b = ensemble_pdf(&model, &f, &grid, &seat_targets(1e-3), &opts).unwrap();
        assert_eq!(a, b);
        let c = ensemble_pdf(&model, &f, &grid, &seat_targets(1e-3), &MonteCarloOptions { seed: 5, ..opts }).unwrap();
        assert_ne!(a.histograms[0].counts, c.histograms[0].counts);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn background_scales_with_sqrt_q(q in 1e-6f64..1e-2, seed in any::<u64>()) {
            let base = spectrum();
            let scaled = BackgroundSpectrum::new(q, 1.0).unwrap();
            let grid = base.default_grid();
            let a = generate_background(&base, &grid, 300, &mut ChaCha20Rng::seed_from_u64(seed)).unwrap();
            let b = generate_background(&scaled, &grid, 300, &mut ChaCha20Rng::seed_from_u64(seed)).unwrap();
            let ratio = (q / base.q).sqrt();
            for t in [0.5, 17.0, 400.25] {
                let (x, y) = (a.velocity(t), b.velocity(t));
                prop_assert!((y - ratio * x).abs() <= 1e-9 * (ratio * x.abs()).max(1e-12));
            }
        }
    }
}
