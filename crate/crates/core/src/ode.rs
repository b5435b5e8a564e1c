//! Dormand–Prince 5(4) integrator with dense output.
//!
//! Sized for the small fixed-capacity states used throughout the crate; only the
//! first `dim` entries of a [`StateVec`] take part in error control.

use crate::error::{PdsError, Result};
use crate::systems::{StateVec, MAX_STATE};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-12, h_max: f64::INFINITY, max_steps: 10_000_000 }
    }
}

/// Continuous extension over one accepted step.
#[derive(Debug, Clone)]
pub struct Step {
    pub t0: f64,
    pub t1: f64,
    pub y1: StateVec,
    dim: usize,
    r: [StateVec; 5],
}

impl Step {
    pub fn eval(&self, t: f64) -> StateVec {
        let h = self.t1 - self.t0;
        let th = if h > 0.0 { (t - self.t0) / h } else { 1.0 };
        let th1 = 1.0 - th;
        let mut y = [0.0; MAX_STATE];
        for i in 0..self.dim {
            let r = |k: usize| self.r[k][i];
            y[i] = r(0) + th * (r(1) + th1 * (r(2) + th * (r(3) + th1 * r(4))));
        }
        y
    }
}

/// What the step observer wants the integrator to do next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[inline]
fn axpy(dim: usize, y: &StateVec, h: f64, terms: &[(f64, &StateVec)]) -> StateVec {
    let mut out = *y;
    for i in 0..dim {
        let mut s = 0.0;
        for (c, k) in terms {
            s += c * k[i];
        }
        out[i] += h * s;
    }
    out
}

/// Integrates `dy/dt = f(t, y)` from `t0` to `t_end`, calling `observe` after every
/// accepted step. Returns the final time and state (earlier if the observer stops).
pub fn integrate<F, O>(
    f: F,
    dim: usize,
    t0: f64,
    y0: StateVec,
    t_end: f64,
    opts: &OdeOptions,
    mut observe: O,
) -> Result<(f64, StateVec)>
where
    F: Fn(f64, &StateVec) -> StateVec,
    O: FnMut(&Step) -> Control,
{
    if t_end <= t0 {
        return Ok((t0, y0));
    }
    let weight = |a: &StateVec, b: &StateVec, i: usize| opts.atol + opts.rtol * a[i].abs().max(b[i].abs());
    let norm = |v: &StateVec, a: &StateVec, b: &StateVec| -> f64 {
        let mut s = 0.0;
        for i in 0..dim {
            let e = v[i] / weight(a, b, i);
            s += e * e;
        }
        (s / dim as f64).sqrt()
    };

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);

    // Initial step from the local scale of y and y'.
    let d0 = norm(&y, &y, &y);
    let d1 = norm(&k1, &y, &y);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(opts.h_max).min(t_end - t0);
    {
        let y1 = axpy(dim, &y, h, &[(1.0, &k1)]);
        let k2 = f(t + h, &y1);
        let mut diff = [0.0; MAX_STATE];
        for i in 0..dim {
            diff[i] = (k2[i] - k1[i]) / h;
        }
        let d2 = norm(&diff, &y, &y);
        let dm = d1.max(d2);
        let h1 = if dm <= 1e-15 { (h * 1e-3).max(1e-6) } else { (0.01 / dm).powf(0.2) };
        h = (100.0 * h).min(h1).min(opts.h_max).min(t_end - t0);
    }

    let mut steps = 0usize;
    let mut last_rejected = false;
    loop {
        if steps >= opts.max_steps {
            return Err(PdsError::IntegratorFailure { t, reason: format!("exceeded {} steps", opts.max_steps) });
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(PdsError::IntegratorFailure { t, reason: format!("step size underflow (h = {h:e})") });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        let k2 = f(t + C2 * h, &axpy(dim, &y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &axpy(dim, &y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &axpy(dim, &y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(t + C5 * h, &axpy(dim, &y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(t + h, &axpy(dim, &y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y_new = axpy(dim, &y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t + h, &y_new);
        steps += 1;

        let mut err_v = [0.0; MAX_STATE];
        for i in 0..dim {
            err_v[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err = norm(&err_v, &y, &y_new);
        if !err.is_finite() {
            h *= 0.1;
            last_rejected = true;
            continue;
        }
        if err <= 1.0 {
            let mut r = [[0.0; MAX_STATE]; 5];
            for i in 0..dim {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                r[0][i] = y[i];
                r[1][i] = ydiff;
                r[2][i] = bspl;
                r[3][i] = ydiff - h * k7[i] - bspl;
                r[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let t_new = if last { t_end } else { t + h };
            let step = Step { t0: t, t1: t_new, y1: y_new, dim, r };
            t = t_new;
            y = y_new;
            k1 = k7;
            if observe(&step) == Control::Stop || last {
                return Ok((t, y));
            }
            let mut fac = 0.9 * err.max(1e-10).powf(-0.2);
            fac = fac.clamp(0.2, 5.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            h = (h * fac).min(opts.h_max);
            last_rejected = false;
        } else {
            let fac = (0.9 * err.powf(-0.2)).max(0.2);
            h *= fac;
            last_rejected = true;
        }
    }
}

/// Emits dense-output samples on the uniform grid `t_start + k * dt` (`k >= 0`).
#[derive(Debug, Clone)]
pub struct UniformSampler {
    pub dt: f64,
    t_start: f64,
    next: u64,
}

impl UniformSampler {
    pub fn new(t_start: f64, dt: f64) -> Self {
        Self { dt, t_start, next: 0 }
    }

    pub fn time_of(&self, k: u64) -> f64 {
        self.t_start + k as f64 * self.dt
    }

    /// Calls `sink(t, y)` for every grid time covered by `step`.
    pub fn feed<S: FnMut(f64, &StateVec)>(&mut self, step: &Step, mut sink: S) {
        loop {
            let t = self.time_of(self.next);
            if t > step.t1 {
                break;
            }
            if t >= step.t0 {
                let y = if t == step.t1 { step.y1 } else { step.eval(t) };
                sink(t, &y);
            }
            self.next += 1;
        }
    }
}
