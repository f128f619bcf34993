//! Symmetric block-tridiagonal matrices with 2×2 blocks.
//!
//! Every discretized operator in this crate (radial sectors, weighted
//! half-line forms, Dirichlet windows) is a second-order operator acting on
//! two-component functions of one variable, so it assembles into this shape.
//! Negative-eigenvalue counts come from the inertia of a block LDLᵀ
//! factorization (Sylvester's law), never from computed eigenvalues.

use crate::error::{Error, Result};
use nalgebra::{Matrix2, Vector2};

pub type Mat2 = Matrix2<f64>;
pub type Vec2 = Vector2<f64>;

/// Symmetric block-tridiagonal matrix; `off[i]` is the block in row `i`,
/// column `i + 1` (its transpose sits below the diagonal).
#[derive(Debug, Clone)]
pub struct BlockTridiag {
    pub diag: Vec<Mat2>,
    pub off: Vec<Mat2>,
}

/// Counts of negative, zero and positive eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

fn sym(m: Mat2) -> Mat2 {
    let o = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    Mat2::new(m[(0, 0)], o, o, m[(1, 1)])
}

fn block_inertia(d: &Mat2) -> (usize, usize, usize) {
    let det = d[(0, 0)] * d[(1, 1)] - d[(0, 1)] * d[(1, 0)];
    let tr = d[(0, 0)] + d[(1, 1)];
    if det < 0.0 {
        (1, 0, 1)
    } else if det > 0.0 {
        if tr > 0.0 {
            (0, 0, 2)
        } else {
            (2, 0, 0)
        }
    } else if tr > 0.0 {
        (0, 1, 1)
    } else if tr < 0.0 {
        (1, 1, 0)
    } else {
        (0, 2, 0)
    }
}

impl BlockTridiag {
    pub fn zeros(n: usize) -> Self {
        Self {
            diag: vec![Mat2::zeros(); n],
            off: vec![Mat2::zeros(); n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `self - sigma * mass`.
    pub fn shifted(&self, sigma: f64, mass: &BlockTridiag) -> BlockTridiag {
        BlockTridiag {
            diag: self.diag.iter().zip(&mass.diag).map(|(a, m)| a - m * sigma).collect(),
            off: self.off.iter().zip(&mass.off).map(|(a, m)| a - m * sigma).collect(),
        }
    }

    pub fn matvec(&self, x: &[Vec2]) -> Vec<Vec2> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i + 1 < n {
                    y += self.off[i] * x[i + 1];
                }
                if i > 0 {
                    y += self.off[i - 1].transpose() * x[i - 1];
                }
                y
            })
            .collect()
    }

    /// `xᵀ A y`.
    pub fn form(&self, x: &[Vec2], y: &[Vec2]) -> f64 {
        self.matvec(y).iter().zip(x).map(|(a, b)| a.dot(b)).sum()
    }

    /// Pivot blocks of the block LDLᵀ factorization.
    fn pivots(&self) -> Result<Vec<Mat2>> {
        let n = self.len();
        let mut piv: Vec<Mat2> = Vec::with_capacity(n);
        for i in 0..n {
            let mut d = self.diag[i];
            if i > 0 {
                let prev = &piv[i - 1];
                let inv = invert(prev).ok_or(Error::SingularPivot { index: i - 1 })?;
                let b = &self.off[i - 1];
                d -= b.transpose() * inv * b;
            }
            let d = sym(d);
            if !d.iter().all(|x| x.is_finite()) {
                return Err(Error::SingularPivot { index: i });
            }
            piv.push(d);
        }
        if let Some(last) = piv.last() {
            if last.determinant() == 0.0 {
                return Err(Error::SingularPivot { index: n - 1 });
            }
        }
        Ok(piv)
    }

    /// Inertia via block LDLᵀ; an exactly singular pivot block is an error.
    pub fn inertia(&self) -> Result<Inertia> {
        let piv = self.pivots()?;
        let mut out = Inertia {
            negative: 0,
            zero: 0,
            positive: 0,
        };
        for (i, d) in piv.iter().enumerate() {
            let (n, z, p) = block_inertia(d);
            if z > 0 {
                return Err(Error::SingularPivot { index: i });
            }
            out.negative += n;
            out.zero += z;
            out.positive += p;
        }
        Ok(out)
    }

    /// Solves `A x = b` by block elimination.
    pub fn solve(&self, b: &[Vec2]) -> Result<Vec<Vec2>> {
        let n = self.len();
        let piv = self.pivots()?;
        let inv: Vec<Mat2> = piv
            .iter()
            .enumerate()
            .map(|(i, d)| invert(d).ok_or(Error::SingularPivot { index: i }))
            .collect::<Result<_>>()?;
        let mut y = b.to_vec();
        for i in 1..n {
            let corr = self.off[i - 1].transpose() * (inv[i - 1] * y[i - 1]);
            y[i] -= corr;
        }
        let mut x = vec![Vec2::zeros(); n];
        for i in (0..n).rev() {
            let mut r = y[i];
            if i + 1 < n {
                r -= self.off[i] * x[i + 1];
            }
            x[i] = inv[i] * r;
        }
        Ok(x)
    }
}

fn invert(m: &Mat2) -> Option<Mat2> {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some(Mat2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / det)
}

/// Number of generalized eigenvalues of `(a, mass)` strictly below `sigma`.
///
/// `mass` must be symmetric positive definite. Exact zero pivots are retried
/// with `sigma` nudged by a relative `1e-12`.
pub fn count_below(a: &BlockTridiag, mass: &BlockTridiag, sigma: f64) -> Result<usize> {
    match a.shifted(sigma, mass).inertia() {
        Ok(i) => Ok(i.negative),
        Err(Error::SingularPivot { .. }) => {
            let nudge = 1e-12 * sigma.abs().max(1e-300);
            Ok(a.shifted(sigma - nudge, mass).inertia()?.negative)
        }
        Err(e) => Err(e),
    }
}

/// Smallest generalized eigenpair, found by inertia bisection followed by
/// shifted inverse iteration. The eigenvector is normalized so that
/// `xᵀ M x = 1`.
pub fn smallest_eigenpair(a: &BlockTridiag, mass: &BlockTridiag) -> Result<(f64, Vec<Vec2>)> {
    let n = a.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    let mut lo = -1.0;
    let mut guard = 0;
    while count_below(a, mass, lo)? > 0 {
        lo *= 4.0;
        guard += 1;
        if guard > 400 {
            return Err(Error::NoConverge("no lower spectral bound".into()));
        }
    }
    let mut hi = 1.0f64.max(lo.abs());
    guard = 0;
    while count_below(a, mass, hi)? == 0 {
        hi = hi * 4.0 + 1.0;
        guard += 1;
        if guard > 400 {
            return Err(Error::NoConverge("no upper spectral bound".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(a, mass, mid)? == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()).max(1e-300) {
            break;
        }
    }

    // inverse iteration just below the eigenvalue
    let scale = hi.abs().max(lo.abs()).max(1e-300);
    let shift = lo - 1e-9 * scale;
    let shifted = a.shifted(shift, mass);
    let mut x: Vec<Vec2> = (0..n)
        .map(|i| {
            let s = (i as f64 + 1.0) / (n as f64 + 1.0);
            Vec2::new((std::f64::consts::PI * s).sin(), 0.5 * (std::f64::consts::PI * s).sin())
        })
        .collect();
    let mut lambda = 0.5 * (lo + hi);
    for _ in 0..6 {
        let rhs = mass.matvec(&x);
        let mut y = shifted.solve(&rhs)?;
        let norm = mass.form(&y, &y).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NoConverge("inverse iteration lost the eigenvector".into()));
        }
        for v in y.iter_mut() {
            *v /= norm;
        }
        x = y;
        lambda = a.form(&x, &x);
    }
    Ok((lambda, x))
}

/// Relative residual `‖A x − λ M x‖ / (‖A x‖ + |λ| ‖M x‖)` in the max norm.
pub fn eigen_residual(a: &BlockTridiag, mass: &BlockTridiag, lambda: f64, x: &[Vec2]) -> f64 {
    let ax = a.matvec(x);
    let mx = mass.matvec(x);
    let num = ax
        .iter()
        .zip(&mx)
        .map(|(p, q)| (p - q * lambda).amax())
        .fold(0.0, f64::max);
    let den = ax.iter().map(|p| p.amax()).fold(0.0, f64::max)
        + lambda.abs() * mx.iter().map(|q| q.amax()).fold(0.0, f64::max);
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dirichlet Laplacian on n interior nodes of (0, 1), both components.
    fn laplacian(n: usize) -> (BlockTridiag, BlockTridiag) {
        let h = 1.0 / (n + 1) as f64;
        let mut a = BlockTridiag::zeros(n);
        let mut m = BlockTridiag::zeros(n);
        for i in 0..n {
            a.diag[i] = Mat2::identity() * (2.0 / h);
            m.diag[i] = Mat2::identity() * h;
            if i + 1 < n {
                a.off[i] = Mat2::identity() * (-1.0 / h);
            }
        }
        (a, m)
    }

    #[test]
    fn counts_match_discrete_dirichlet_spectrum() {
        let n = 99;
        let h = 1.0 / (n + 1) as f64;
        let (a, m) = laplacian(n);
        // discrete eigenvalues (4/h^2) sin^2(k pi h / 2), each doubled
        for sigma in [5.0, 50.0, 200.0] {
            let expected = (1..=n)
                .filter(|&k| {
                    let s = (k as f64 * std::f64::consts::PI * h / 2.0).sin();
                    4.0 / (h * h) * s * s < sigma
                })
                .count()
                * 2;
            assert_eq!(count_below(&a, &m, sigma).unwrap(), expected, "sigma {sigma}");
        }
    }

    #[test]
    fn smallest_pair_of_laplacian() {
        let (a, m) = laplacian(199);
        let (lam, x) = smallest_eigenpair(&a, &m).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((lam - pi2).abs() < 1e-3 * pi2);
        assert!(eigen_residual(&a, &m, lam, &x) < 1e-10);
        assert!((m.form(&x, &x) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coupled_blocks_inertia() {
        // [[0,1],[1,0]] has one negative eigenvalue
        let a = BlockTridiag {
            diag: vec![Mat2::new(0.0, 1.0, 1.0, 0.0)],
            off: vec![],
        };
        let inertia = a.inertia().unwrap();
        assert_eq!(inertia.negative, 1);
        assert_eq!(inertia.positive, 1);
    }

    #[test]
    fn exactly_singular_pivot_is_reported() {
        let a = BlockTridiag {
            diag: vec![Mat2::new(1.0, 0.0, 0.0, 0.0)],
            off: vec![],
        };
        assert!(matches!(a.inertia(), Err(Error::SingularPivot { index: 0 })));
    }

    #[test]
    fn solve_round_trip() {
        let (a, _) = laplacian(20);
        let b: Vec<Vec2> = (0..20).map(|i| Vec2::new(i as f64, 1.0 - i as f64)).collect();
        let x = a.solve(&b).unwrap();
        let r = a.matvec(&x);
        for (p, q) in r.iter().zip(&b) {
            assert!((p - q).amax() < 1e-10);
        }
    }
}
