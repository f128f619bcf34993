//! Piecewise quintic Hermite interpolation from values and first/second derivatives.

/// Quintic Hermite interpolant on an increasing node set.
///
/// Exact for polynomials up to degree five; the interpolation error is
/// `O(h^6)` for smooth data.
#[derive(Debug, Clone)]
pub struct QuinticHermite<'a> {
    x: &'a [f64],
    y: &'a [f64],
    dy: &'a [f64],
    d2y: Vec<f64>,
}

impl<'a> QuinticHermite<'a> {
    pub fn new(x: &'a [f64], y: &'a [f64], dy: &'a [f64], d2y: Vec<f64>) -> Self {
        assert!(x.len() >= 2, "need at least two nodes");
        assert!(x.len() == y.len() && y.len() == dy.len() && dy.len() == d2y.len());
        Self { x, y, dy, d2y }
    }

    fn locate(&self, t: f64) -> usize {
        let n = self.x.len();
        if t <= self.x[0] {
            return 0;
        }
        if t >= self.x[n - 1] {
            return n - 2;
        }
        // partition_point gives the first node strictly greater than t
        let j = self.x.partition_point(|&xi| xi <= t);
        (j - 1).min(n - 2)
    }

    /// Value and first derivative at `t` (clamped to the node range).
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let s = ((t - self.x[i]) / h).clamp(0.0, 1.0);
        let (s2, s3) = (s * s, s * s * s);
        let (s4, s5) = (s3 * s, s3 * s2);

        let h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
        let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
        let h2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
        let h3 = 0.5 * s3 - s4 + 0.5 * s5;
        let h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
        let h5 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;

        let g0 = -30.0 * s2 + 60.0 * s3 - 30.0 * s4;
        let g1 = 1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4;
        let g2 = s - 4.5 * s2 + 6.0 * s3 - 2.5 * s4;
        let g3 = 1.5 * s2 - 4.0 * s3 + 2.5 * s4;
        let g4 = -12.0 * s2 + 28.0 * s3 - 15.0 * s4;
        let g5 = 30.0 * s2 - 60.0 * s3 + 30.0 * s4;

        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (d0, d1) = (self.dy[i] * h, self.dy[i + 1] * h);
        let (c0, c1) = (self.d2y[i] * h * h, self.d2y[i + 1] * h * h);

        let val = y0 * h0 + d0 * h1 + c0 * h2 + c1 * h3 + d1 * h4 + y1 * h5;
        let der = (y0 * g0 + d0 * g1 + c0 * g2 + c1 * g3 + d1 * g4 + y1 * g5) / h;
        (val, der)
    }
}

/// Linear interpolation on an increasing grid, clamped at the ends.
pub fn linear(x: &[f64], y: &[f64], t: f64) -> f64 {
    let n = x.len();
    if t <= x[0] {
        return y[0];
    }
    if t >= x[n - 1] {
        return y[n - 1];
    }
    let j = x.partition_point(|&xi| xi <= t).min(n - 1);
    let i = j - 1;
    let w = (t - x[i]) / (x[j] - x[i]);
    y[i] * (1.0 - w) + y[j] * w
}
