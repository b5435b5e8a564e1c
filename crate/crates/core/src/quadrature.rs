//! Globally adaptive Gauss–Kronrod (7/15) quadrature for vector-valued integrands.
//!
//! Several spectra are always needed over the same frequency window, so the
//! integrator refines one shared partition for all components.

use crate::error::{PdsError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];

// Gauss weights for the odd-indexed Kronrod nodes (x = XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Error bound relative to the largest component of the integral.
    pub rel_tol: f64,
    /// Absolute floor on the error bound.
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-8, abs_tol: 0.0, max_intervals: 4000 }
    }
}

#[derive(Debug, Clone)]
struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
}

impl<const N: usize> Panel<N> {
    fn worst(&self) -> f64 {
        self.error.iter().fold(0.0_f64, |m, e| m.max(*e))
    }
}

fn gk15<const N: usize, F>(f: &F, a: f64, b: f64) -> Panel<N>
where
    F: Fn(f64) -> [f64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = [0.0; N];
    let mut gauss = [0.0; N];
    for k in 0..N {
        kronrod[k] = WGK[7] * fc[k];
        gauss[k] = WG[3] * fc[k];
    }
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for k in 0..N {
            let s = f1[k] + f2[k];
            kronrod[k] += wk * s;
            if j % 2 == 1 {
                gauss[k] += WG[j / 2] * s;
            }
        }
    }
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for k in 0..N {
        value[k] = kronrod[k] * half;
        error[k] = ((kronrod[k] - gauss[k]) * half).abs();
    }
    Panel { a, b, value, error }
}

/// Integrates every component of `f` over `[a, b]`, starting from the given
/// interior breakpoints.
pub fn integrate_vec<const N: usize, F>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    opts: &QuadratureOptions,
) -> Result<[f64; N]>
where
    F: Fn(f64) -> [f64; N],
{
    if !(b > a) {
        return Ok([0.0; N]);
    }
    let mut cuts = vec![a];
    cuts.extend(breakpoints.iter().copied().filter(|&p| p > a && p < b));
    cuts.push(b);
    let mut panels: Vec<Panel<N>> = cuts.windows(2).map(|w| gk15(&f, w[0], w[1])).collect();

    loop {
        let mut total = [0.0; N];
        let mut err = [0.0; N];
        for p in &panels {
            for k in 0..N {
                total[k] += p.value[k];
                err[k] += p.error[k];
            }
        }
        let scale = total.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let bound = opts.abs_tol.max(opts.rel_tol * scale);
        let worst_total = err.iter().fold(0.0_f64, |m, e| m.max(*e));
        if worst_total <= bound || scale == 0.0 && worst_total == 0.0 {
            return Ok(total);
        }
        if panels.len() >= opts.max_intervals {
            return Err(PdsError::NonConverged { intervals: panels.len(), error: worst_total });
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.worst() > acc.1 { (i, p.worst()) } else { acc });
        let p = panels.swap_remove(idx);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            return Err(PdsError::NonConverged { intervals: panels.len(), error: worst_total });
        }
        panels.push(gk15(&f, p.a, mid));
        panels.push(gk15(&f, mid, p.b));
    }
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<F>(f: F, a: f64, b: f64, opts: &QuadratureOptions) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate_vec(|x| [f(x)], a, b, &[], opts).map(|v| v[0])
}

/// Composite trapezoid rule on a uniform grid of `n` points.
pub fn trapezoid<F>(f: F, a: f64, b: f64, n: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    assert!(n >= 2);
    let h = (b - a) / (n - 1) as f64;
    let mut s = 0.5 * (f(a) + f(b));
    for i in 1..n - 1 {
        s += f(a + i as f64 * h);
    }
    s * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, &QuadratureOptions::default()).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-13);
    }

    #[test]
    fn peaked_integrand_converges() {
        // Lorentzian with width 1e-3: integral over [-1, 1] is 2 atan(1000) / 1e-3 * 1e-3.
        let w = 1e-3;
        let v = integrate(|x| w / (x * x + w * w), -1.0, 1.0, &QuadratureOptions::default()).unwrap();
        let exact = 2.0 * (1.0 / w).atan();
        assert!((v - exact).abs() / exact < 1e-9);
    }

    #[test]
    fn vector_components_share_partition() {
        let v = integrate_vec(|x| [x.sin(), x.cos(), 0.0], 0.0, std::f64::consts::PI, &[1.0], &QuadratureOptions::default())
            .unwrap();
        assert!((v[0] - 2.0).abs() < 1e-12);
        assert!(v[1].abs() < 1e-12);
        assert_eq!(v[2], 0.0);
    }

    #[test]
    fn budget_exhaustion_reports_non_converged() {
        let opts = QuadratureOptions { rel_tol: 1e-15, abs_tol: 0.0, max_intervals: 3 };
        let r = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, &opts);
        assert!(matches!(r, Err(PdsError::NonConverged { .. })));
    }
}
