//! Shape-preserving (monotone) cubic Hermite interpolation.

/// PCHIP interpolant through strictly increasing nodes, held constant outside them.
#[derive(Debug, Clone)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

fn end_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

impl Pchip {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert!(x.len() == y.len() && !x.is_empty());
        assert!(x.windows(2).all(|w| w[1] > w[0]), "nodes must be strictly increasing");
        let n = x.len();
        let mut d = vec![0.0; n];
        if n == 2 {
            let m = (y[1] - y[0]) / (x[1] - x[0]);
            d = vec![m, m];
        } else if n > 2 {
            let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
            let m: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
            for k in 1..n - 1 {
                if m[k - 1] * m[k] > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / m[k - 1] + w2 / m[k]);
                }
            }
            d[0] = end_slope(h[0], h[1], m[0], m[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
        }
        Self { x, y, d }
    }

    fn locate(&self, t: f64) -> Option<usize> {
        let n = self.x.len();
        if n < 2 || t < self.x[0] || t > self.x[n - 1] {
            return None;
        }
        Some(self.x.partition_point(|&v| v <= t).saturating_sub(1).min(n - 2))
    }

    pub fn eval(&self, t: f64) -> f64 {
        let Some(k) = self.locate(t) else {
            return if t < self.x[0] { self.y[0] } else { *self.y.last().unwrap() };
        };
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[k] + h10 * h * self.d[k] + h01 * self.y[k + 1] + h11 * h * self.d[k + 1]
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let Some(k) = self.locate(t) else {
            return 0.0;
        };
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let s2 = s * s;
        let dh00 = (6.0 * s2 - 6.0 * s) / h;
        let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
        let dh01 = (-6.0 * s2 + 6.0 * s) / h;
        let dh11 = 3.0 * s2 - 2.0 * s;
        dh00 * self.y[k] + dh10 * self.d[k] + dh01 * self.y[k + 1] + dh11 * self.d[k + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_nodes_and_lines() {
        let p = Pchip::new(vec![0.0, 1.0, 3.0, 4.0], vec![1.0, 3.0, 7.0, 9.0]);
        for (x, y) in [(0.0, 1.0), (1.0, 3.0), (3.0, 7.0), (2.0, 5.0), (3.5, 8.0)] {
            assert!((p.eval(x) - y).abs() < 1e-12);
        }
        assert!((p.derivative(2.0) - 2.0).abs() < 1e-12);
        assert_eq!(p.eval(-1.0), 1.0);
        assert_eq!(p.eval(10.0), 9.0);
    }

    proptest! {
        #[test]
        fn monotone_data_gives_monotone_interpolant(steps in prop::collection::vec(0.01f64..2.0, 3..12),
                                                     rises in prop::collection::vec(0.0f64..3.0, 12)) {
            let mut x = vec![0.0];
            let mut y = vec![0.0];
            for (i, h) in steps.iter().enumerate() {
                x.push(x[i] + h);
                y.push(y[i] + rises[i]);
            }
            let p = Pchip::new(x.clone(), y);
            let mut prev = f64::NEG_INFINITY;
            for k in 0..=400 {
                let t = x[0] + (x[x.len() - 1] - x[0]) * k as f64 / 400.0;
                let v = p.eval(t);
                prop_assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
    }
}
