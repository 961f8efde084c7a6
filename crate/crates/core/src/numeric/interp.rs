//! Monotone piecewise-cubic Hermite interpolation.

use crate::error::{Error, Result};

/// Shape-preserving cubic interpolant through `(x_i, y_i)` with strictly
/// increasing `x`. Slopes use the Fritsch-Butland harmonic mean, so monotone
/// data gives a monotone interpolant.
#[derive(Debug, Clone)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(Error::Param("interpolation needs at least two matching points".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Param("interpolation abscissae must be strictly increasing".into()));
        }
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for i in 1..n - 1 {
                let (a, b) = (delta[i - 1], delta[i]);
                if a * b > 0.0 {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    d[i] = (w1 + w2) / (w1 / a + w2 / b);
                }
            }
            d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Self { x, y, d })
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.x.last().unwrap()
    }

    /// Evaluates the interpolant; arguments outside the table are clamped.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let t = t.clamp(self.x[0], self.x[n - 1]);
        let i = match self.x.partition_point(|&xi| xi <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s).powi(2);
        let h10 = s * (1.0 - s).powi(2);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }
}

// Three-point one-sided slope, limited to keep monotonicity.
fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_nodes_and_lines() {
        let p = Pchip::new(vec![0.0, 1.0, 3.0, 4.0], vec![1.0, 3.0, 7.0, 9.0]).unwrap();
        for (x, y) in [(0.0, 1.0), (1.0, 3.0), (3.0, 7.0), (4.0, 9.0), (2.0, 5.0), (0.5, 2.0)] {
            assert!((p.eval(x) - y).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_unsorted() {
        assert!(Pchip::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
    }

    proptest! {
        #[test]
        fn monotone_data_gives_monotone_interpolant(
            steps in proptest::collection::vec((0.01f64..1.0, 0.0f64..2.0), 3..12),
        ) {
            let mut x = vec![0.0];
            let mut y = vec![0.0];
            for (dx, dy) in &steps {
                x.push(x.last().unwrap() + dx);
                y.push(y.last().unwrap() + dy);
            }
            let p = Pchip::new(x.clone(), y).unwrap();
            let mut prev = f64::NEG_INFINITY;
            let n = 400;
            for k in 0..=n {
                let t = x[0] + (x[x.len() - 1] - x[0]) * k as f64 / n as f64;
                let v = p.eval(t);
                prop_assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
    }
}
