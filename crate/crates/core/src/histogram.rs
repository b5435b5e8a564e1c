//! Uniform-bin densities and mass-conserving rebinning.

use serde::{Deserialize, Serialize};

/// Piecewise-constant density on `bins` equal cells spanning `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn zeros(lo: f64, hi: f64, bins: usize) -> Self {
        assert!(hi > lo && bins > 0);
        Self { lo, hi, density: vec![0.0; bins] }
    }

    pub fn bins(&self) -> usize {
        self.density.len()
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins() as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.width()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.bins()).map(|i| self.center(i)).collect()
    }

    pub fn mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.width()
    }

    /// Bin index of `x`, clamping the upper edge into the last bin.
    pub fn index(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo && x <= self.hi) {
            return None;
        }
        let i = ((x - self.lo) / self.width()) as usize;
        Some(i.min(self.bins() - 1))
    }

    /// Normalized histogram of `samples` on `bins` cells spanning `[lo, hi]`.
    pub fn from_samples<I: IntoIterator<Item = f64>>(samples: I, lo: f64, hi: f64, bins: usize) -> Self {
        let mut h = Self::zeros(lo, hi, bins);
        let mut n = 0usize;
        for x in samples {
            if let Some(i) = h.index(x) {
                h.density[i] += 1.0;
                n += 1;
            }
        }
        if n > 0 {
            let scale = 1.0 / (n as f64 * h.width());
            h.density.iter_mut().for_each(|d| *d *= scale);
        }
        h
    }

    /// Adds `weight * self` onto `target` by overlap, treating each cell as uniform.
    pub fn rebin_into(&self, target: &mut Histogram, weight: f64) {
        let w_src = self.width();
        let w_dst = target.width();
        for (i, &d) in self.density.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let a = self.lo + i as f64 * w_src;
            let b = a + w_src;
            let first = (((a - target.lo) / w_dst).floor().max(0.0)) as usize;
            let mut j = first;
            while j < target.bins() {
                let c = target.lo + j as f64 * w_dst;
                let e = c + w_dst;
                if c >= b {
                    break;
                }
                let overlap = b.min(e) - a.max(c);
                if overlap > 0.0 {
                    target.density[j] += weight * d * overlap / w_dst;
                }
                j += 1;
            }
        }
    }

    /// Density at `x` (zero outside the support).
    pub fn value(&self, x: f64) -> f64 {
        self.index(x).map(|i| self.density[i]).unwrap_or(0.0)
    }

    /// Exact `∫ r^k p(r) dr` for the piecewise-constant density.
    pub fn moment(&self, k: i32) -> f64 {
        let w = self.width();
        let kp = k + 1;
        self.density
            .iter()
            .enumerate()
            .filter(|(_, d)| **d != 0.0)
            .map(|(i, d)| {
                let a = self.lo + i as f64 * w;
                let b = a + w;
                d * (b.powi(kp) - a.powi(kp)) / kp as f64
            })
            .sum()
    }

    /// Mass inside `[a, b]`.
    pub fn interval_mass(&self, a: f64, b: f64) -> f64 {
        let w = self.width();
        let first = (((a - self.lo) / w).floor().max(0.0)) as usize;
        let mut m = 0.0;
        for i in first..self.bins() {
            let c = self.lo + i as f64 * w;
            if c >= b {
                break;
            }
            m += self.density[i] * (b.min(c + w) - a.max(c)).max(0.0);
        }
        m
    }

    /// Mass of `{ |r| > x }`.
    pub fn tail_mass(&self, x: f64) -> f64 {
        let w = self.width();
        let mut m = 0.0;
        for (i, d) in self.density.iter().enumerate() {
            let a = self.lo + i as f64 * w;
            let b = a + w;
            let hi_part = (b - a.max(x)).max(0.0);
            let lo_part = (b.min(-x) - a).max(0.0);
            m += d * (hi_part + lo_part).min(w);
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_are_normalized() {
        let h = Histogram::from_samples([0.1, 0.2, 0.2, 0.9, 1.0], 0.0, 1.0, 10);
        assert!((h.mass() - 1.0).abs() < 1e-12);
        assert_eq!(h.density[9], 2.0 / (5.0 * 0.1));
    }

    #[test]
    fn rebin_conserves_mass() {
        let h = Histogram::from_samples((0..1000).map(|i| (i as f64 * 0.37).sin()), -1.0, 1.0, 201);
        let mut t = Histogram::zeros(-1.7, 1.7, 401);
        h.rebin_into(&mut t, 0.25);
        assert!((t.mass() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn uniform_moments() {
        let h = Histogram { lo: -1.0, hi: 1.0, density: vec![0.5; 7] };
        assert!((h.moment(0) - 1.0).abs() < 1e-14);
        assert!(h.moment(1).abs() < 1e-14);
        assert!((h.moment(2) - 1.0 / 3.0).abs() < 1e-14);
        assert!((h.moment(4) - 0.2).abs() < 1e-14);
        assert!((h.tail_mass(0.5) - 0.5).abs() < 1e-14);
    }
}
