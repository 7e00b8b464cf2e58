//! Monotone cubic Hermite interpolation (Fritsch–Carlson).
//!
//! The node derivatives are chosen so the interpolant never overshoots the
//! data, which keeps an everywhere-positive drag table positive between
//! nodes. The first derivative of the interpolant is evaluated analytically;
//! the lift-to-drag ratio derivative feeds the equilibrium classification, so
//! it has to come from the interpolant itself rather than finite differences
//! of it.

/// C¹ piecewise-cubic interpolant with shape-preserving node derivatives.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    derivs: Vec<f64>,
}

impl MonotoneCubic {
    /// Fits the interpolant. `xs` must be strictly increasing with at least
    /// two entries; callers validate that.
    pub fn fit(xs: &[f64], ys: &[f64]) -> Self {
        assert_eq!(xs.len(), ys.len());
        assert!(xs.len() >= 2);
        let n = xs.len();
        let h: Vec<f64> = (0..n - 1).map(|i| xs[i + 1] - xs[i]).collect();
        let secants: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();

        let mut derivs = vec![0.0; n];
        for i in 1..n - 1 {
            let (s0, s1) = (secants[i - 1], secants[i]);
            if s0 * s1 <= 0.0 {
                derivs[i] = 0.0;
            } else {
                // Weighted harmonic mean of the neighboring secants.
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                derivs[i] = (w1 + w2) / (w1 / s0 + w2 / s1);
            }
        }
        derivs[0] = if n == 2 {
            secants[0]
        } else {
            edge_derivative(h[0], h[1], secants[0], secants[1])
        };
        derivs[n - 1] = if n == 2 {
            secants[0]
        } else {
            edge_derivative(h[n - 2], h[n - 3], secants[n - 2], secants[n - 3])
        };

        Self {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            derivs,
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    #[cfg_attr(not(test), allow(dead_code))]
    pub fn value(&self, x: f64) -> f64 {
        self.value_and_derivative(x).0
    }

    /// Evaluates the interpolant and its first derivative. Queries are
    /// clamped to the fitted domain.
    pub fn value_and_derivative(&self, x: f64) -> (f64, f64) {
        let (lo, hi) = self.domain();
        let x = x.clamp(lo, hi);
        let i = self.segment_index(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.derivs[i] * h, self.derivs[i + 1] * h);

        let t2 = t * t;
        let t3 = t2 * t;
        let value = y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + m0 * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + m1 * (t3 - t2);
        let deriv = (y0 * (6.0 * t2 - 6.0 * t)
            + m0 * (3.0 * t2 - 4.0 * t + 1.0)
            + y1 * (6.0 * t - 6.0 * t2)
            + m1 * (3.0 * t2 - 2.0 * t))
            / h;
        (value, deriv)
    }

    fn segment_index(&self, x: f64) -> usize {
        match self.xs.partition_point(|&node| node <= x) {
            0 => 0,
            p => (p - 1).min(self.xs.len() - 2),
        }
    }
}

/// Three-point endpoint derivative, clipped so the end segment stays
/// shape-preserving.
fn edge_derivative(h0: f64, h1: f64, s0: f64, s1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if d == 0.0 || d * s0 < 0.0 {
        0.0
    } else if s0 * s1 < 0.0 && d.abs() > 3.0 * s0.abs() {
        3.0 * s0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_nodes_exactly() {
        let xs = [0.0, 0.5, 1.5, 2.0, 3.0];
        let ys = [1.0, 0.2, 0.7, 0.7, -1.0];
        let f = MonotoneCubic::fit(&xs, &ys);
        for (&x, &y) in xs.iter().zip(ys.iter()) {
            assert!((f.value(x) - y).abs() < 1e-14);
        }
    }

    #[test]
    fn preserves_monotone_data() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.tanh()).collect();
        let f = MonotoneCubic::fit(&xs, &ys);
        let mut prev = f.value(0.0);
        let mut x = 0.0;
        while x < 5.7 {
            x += 0.01;
            let y = f.value(x);
            assert!(y >= prev - 1e-12, "interpolant lost monotonicity at {x}");
            prev = y;
        }
    }

    #[test]
    fn no_overshoot_on_positive_data() {
        // Sharp corner in positive data: the interpolant must stay positive.
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = [1.0, 0.05, 0.05, 1.0, 2.0];
        let f = MonotoneCubic::fit(&xs, &ys);
        let mut x = 0.0;
        while x <= 4.0 {
            assert!(f.value(x) > 0.0, "overshoot below zero at {x}");
            x += 0.005;
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let xs: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (2.0 * x).sin() + 0.3 * x).collect();
        let f = MonotoneCubic::fit(&xs, &ys);
        let eps = 1e-6;
        let mut x: f64 = 0.0513;
        while x < 3.85 {
            // The interpolant is only C¹ at the nodes (multiples of 0.1);
            // keep the finite-difference stencil inside one segment.
            let frac = (x / 0.1).fract();
            let node_offset = frac.min(1.0 - frac) * 0.1;
            if node_offset > 2.0 * eps {
                let (_, d) = f.value_and_derivative(x);
                let fd = (f.value(x + eps) - f.value(x - eps)) / (2.0 * eps);
                assert!((d - fd).abs() < 1e-7, "derivative mismatch at {x}: {d} vs {fd}");
            }
            x += 0.129;
        }
    }
}
