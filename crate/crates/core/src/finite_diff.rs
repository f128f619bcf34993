//! Finite-difference first derivatives on uniform grids.
//!
//! Weights come from Fornberg's recursion, so the same code yields centered
//! stencils in the interior and shifted stencils near the ends.

/// Fornberg weights for the `m`-th derivative at `x0` from nodes `xs`.
pub fn fornberg_weights(x0: f64, xs: &[f64], m: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// First derivative of uniformly sampled `y` using `order + 1`-point stencils
/// (`order` even). Interior points use centered stencils; points within
/// `order / 2` of an end use the nearest full-width shifted stencil.
pub fn first_derivative(y: &[f64], h: f64, order: usize) -> Vec<f64> {
    assert!(order >= 2 && order % 2 == 0, "order must be even and >= 2");
    let n = y.len();
    let width = order + 1;
    assert!(n >= width, "grid too short for the stencil");
    let half = order / 2;
    // weights depend only on the position of the evaluation point in the stencil
    let table: Vec<Vec<f64>> = (0..width)
        .map(|pos| {
            let xs: Vec<f64> = (0..width).map(|k| k as f64).collect();
            fornberg_weights(pos as f64, &xs, 1)
        })
        .collect();
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(half).min(n - width);
            let w = &table[i - start];
            w.iter()
                .zip(&y[start..start + width])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / h
        })
        .collect()
}
