//! Morse index of radial solutions through the spherical-harmonic splitting
//! of the linearized operator.
//!
//! Sector `ell` of the linearization is the radial problem
//! `-w'' - (N-1)w'/r + lambda_ell w / r^2 - V(r) w = mu w` on `(0, 1)` with
//! `w(1) = 0` and `V = r^alpha D²F(u, v) - diag(mu1, mu2)`. Each degree `ell`
//! contributes its negative count times the dimension of the degree-`ell`
//! spherical harmonics.

use crate::error::{Error, Result};
use crate::interp::linear;
use crate::linalg::{count_below, BlockTridiag, Mat2};
use crate::radial::RadialProfile;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Eigenvalues within this distance of zero are flagged, not counted.
pub const ZERO_BAND: f64 = 1e-10;
pub const DEFAULT_MESH: usize = 1000;

/// `ell (ell + N - 2)`, the eigenvalue of the Laplace–Beltrami operator on
/// degree-`ell` harmonics.
pub fn lambda_ell(ell: usize, n: usize) -> f64 {
    (ell * (ell + n - 2)) as f64
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Dimension of the space of degree-`ell` spherical harmonics on `S^{N-1}`.
pub fn sh_multiplicity(ell: usize, n: usize) -> u64 {
    let top = binomial(ell + n - 1, n - 1);
    let lower = if ell >= 2 { binomial(ell + n - 3, n - 1) } else { 0 };
    (top - lower) as u64
}

/// One angular sector of the linearized problem.
#[derive(Debug, Clone)]
pub struct SturmLiouvilleSpec {
    pub n: usize,
    pub ell: usize,
    pub lambda_ell: f64,
    /// Sample radii of the potential, covering `[0, 1]`.
    pub grid: Vec<f64>,
    pub potential: Vec<Mat2>,
}

impl SturmLiouvilleSpec {
    /// Sector with a potential given as a function of `r`, sampled on `grid`.
    pub fn from_fn(n: usize, ell: usize, grid: Vec<f64>, v: impl Fn(f64) -> Mat2) -> Self {
        let potential = grid.iter().map(|&r| v(r)).collect();
        Self {
            n,
            ell,
            lambda_ell: lambda_ell(ell, n),
            grid,
            potential,
        }
    }

    fn potential_at(&self, r: f64) -> Mat2 {
        let comp = |a: usize, b: usize| {
            let ys: Vec<f64> = self.potential.iter().map(|m| m[(a, b)]).collect();
            linear(&self.grid, &ys, r)
        };
        let off = comp(0, 1);
        Mat2::new(comp(0, 0), off, off, comp(1, 1))
    }
}

/// Potential `r^alpha D²F(u, v) - diag(mu1, mu2)` at every profile node.
pub fn sector_potential(profile: &RadialProfile) -> Vec<Mat2> {
    let pr = &profile.params;
    profile
        .grid
        .iter()
        .zip(profile.u.iter().zip(&profile.v))
        .map(|(&r, (&u, &v))| {
            let w = if pr.alpha == 0.0 { 1.0 } else { r.powf(pr.alpha) };
            pr.f.hess(u, v) * w - Mat2::new(pr.mu1, 0.0, 0.0, pr.mu2)
        })
        .collect()
}

pub fn build_sector(profile: &RadialProfile, ell: usize) -> SturmLiouvilleSpec {
    SturmLiouvilleSpec {
        n: profile.params.n,
        ell,
        lambda_ell: lambda_ell(ell, profile.params.n),
        grid: profile.grid.clone(),
        potential: sector_potential(profile),
    }
}

/// `∫ r^k dr` over `[a, b]`, with the logarithm at `k = -1`.
fn power_integral(k: i32, a: f64, b: f64) -> f64 {
    if k == -1 {
        (b / a).ln()
    } else {
        let e = k + 1;
        (b.powi(e) - a.powi(e)) / e as f64
    }
}

/// Finite-volume discretization of a sector on `r_i = i / mesh`.
///
/// Returns the stiffness and (diagonal) mass matrices. Node 0 is an unknown
/// only for `ell = 0`; node `mesh` carries the Dirichlet condition.
pub fn assemble_sector(spec: &SturmLiouvilleSpec, mesh: usize) -> (BlockTridiag, BlockTridiag) {
    let n = spec.n as i32;
    let h = 1.0 / mesh as f64;
    let first = if spec.ell == 0 { 0 } else { 1 };
    let count = mesh - first;
    let mut a = BlockTridiag::zeros(count);
    let mut b = BlockTridiag::zeros(count);
    let flux = |i: usize| ((i as f64 + 0.5) * h).powi(n - 1) / h;
    for k in 0..count {
        let i = k + first;
        let r = i as f64 * h;
        let lo = if i == 0 { 0.0 } else { r - 0.5 * h };
        let hi = r + 0.5 * h;
        let mass = power_integral(n - 1, lo, hi);
        let centrifugal = if spec.lambda_ell == 0.0 {
            0.0
        } else {
            spec.lambda_ell * power_integral(n - 3, lo, hi)
        };
        let left = if i == 0 { 0.0 } else { flux(i - 1) };
        let stiff = left + flux(i) + centrifugal;
        a.diag[k] = Mat2::identity() * stiff - spec.potential_at(r) * mass;
        b.diag[k] = Mat2::identity() * mass;
        if k + 1 < count {
            a.off[k] = Mat2::identity() * -flux(i);
        }
    }
    (a, b)
}

/// Negative count of one sector together with the number of eigenvalues
/// flagged inside the zero band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorCount {
    pub ell: usize,
    pub multiplicity: u64,
    pub negatives: usize,
    pub near_zero: usize,
}

/// Number of eigenvalues below `-ZERO_BAND`, plus the number within the band.
pub fn count_with_band(spec: &SturmLiouvilleSpec, mesh: usize) -> Result<(usize, usize)> {
    if mesh < 200 {
        return Err(Error::InvalidInput(format!("mesh must be >= 200, got {mesh}")));
    }
    let (a, b) = assemble_sector(spec, mesh);
    let below = count_below(&a, &b, -ZERO_BAND)?;
    let upto = count_below(&a, &b, ZERO_BAND)?;
    Ok((below, upto - below))
}

pub fn count_negative_eigenvalues(spec: &SturmLiouvilleSpec, mesh: usize) -> Result<usize> {
    Ok(count_with_band(spec, mesh)?.0)
}

/// `sup_r λ_max(r² V(r))`, clipped below at zero.
pub fn sector_nonneg_certificate(profile: &RadialProfile) -> f64 {
    profile
        .grid
        .iter()
        .zip(sector_potential(profile))
        .map(|(&r, v)| {
            let m = v * (r * r);
            let tr = m[(0, 0)] + m[(1, 1)];
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
            0.5 * tr + disc
        })
        .fold(0.0, f64::max)
}

/// Per-sector counts and the assembled Morse index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseReport {
    pub per_ell: Vec<SectorCount>,
    pub ell_max: usize,
    pub certificate: f64,
    pub total: u64,
    pub mesh: usize,
}

impl MorseReport {
    pub fn negatives(&self) -> Vec<usize> {
        self.per_ell.iter().map(|s| s.negatives).collect()
    }

    pub fn near_zero(&self) -> usize {
        self.per_ell.iter().map(|s| s.near_zero).sum()
    }
}

/// Smallest `ell` whose sector is certified nonnegative.
pub fn truncation_degree(n: usize, certificate: f64) -> Result<usize> {
    let cap = (10.0 * (1.0 + certificate)).ceil() as usize;
    let mut ell = 0;
    while lambda_ell(ell, n) < certificate {
        ell += 1;
        if ell > cap {
            return Err(Error::NoConverge(format!(
                "sector truncation exceeded the safety cap {cap}"
            )));
        }
    }
    Ok(ell)
}

/// Morse index: sectors `0..ell_max` are counted by inertia, `ell_max` is
/// certified by the potential bound and reported with zero negatives.
pub fn morse_index(profile: &RadialProfile, mesh: usize) -> Result<MorseReport> {
    let n = profile.params.n;
    let certificate = sector_nonneg_certificate(profile);
    let ell_max = truncation_degree(n, certificate)?;
    let potential = sector_potential(profile);
    let mut per_ell: Vec<SectorCount> = (0..ell_max)
        .into_par_iter()
        .map(|ell| {
            let spec = SturmLiouvilleSpec {
                n,
                ell,
                lambda_ell: lambda_ell(ell, n),
                grid: profile.grid.clone(),
                potential: potential.clone(),
            };
            let (negatives, near_zero) = count_with_band(&spec, mesh)?;
            Ok(SectorCount {
                ell,
                multiplicity: sh_multiplicity(ell, n),
                negatives,
                near_zero,
            })
        })
        .collect::<Result<_>>()?;
    per_ell.push(SectorCount {
        ell: ell_max,
        multiplicity: sh_multiplicity(ell_max, n),
        negatives: 0,
        near_zero: 0,
    });
    let total = per_ell.iter().map(|s| s.multiplicity * s.negatives as u64).sum();
    Ok(MorseReport {
        per_ell,
        ell_max,
        certificate,
        total,
        mesh,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{integrate_radial_ivp, shoot_positive, ProblemParams, DEFAULT_TOL};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Dimension of harmonic homogeneous polynomials of degree `ell` in `n`
    /// variables: the kernel of the Laplacian from degree `ell` to `ell - 2`.
    fn harmonic_dimension(ell: usize, n: usize) -> usize {
        fn monomials(deg: usize, n: usize) -> Vec<Vec<usize>> {
            if n == 1 {
                return vec![vec![deg]];
            }
            (0..=deg)
                .flat_map(|k| {
                    monomials(deg - k, n - 1).into_iter().map(move |mut m| {
                        m.insert(0, k);
                        m
                    })
                })
                .collect()
        }
        let src = monomials(ell, n);
        if ell < 2 {
            return src.len();
        }
        let dst = monomials(ell - 2, n);
        let mut mat = vec![vec![0.0f64; src.len()]; dst.len()];
        for (j, m) in src.iter().enumerate() {
            for var in 0..n {
                if m[var] >= 2 {
                    let mut t = m.clone();
                    t[var] -= 2;
                    let row = dst.iter().position(|d| *d == t).unwrap();
                    mat[row][j] += (m[var] * (m[var] - 1)) as f64;
                }
            }
        }
        // rank by Gaussian elimination
        let mut rank = 0;
        let cols = src.len();
        for c in 0..cols {
            let piv = (rank..mat.len()).find(|&r| mat[r][c].abs() > 1e-9);
            if let Some(p) = piv {
                mat.swap(rank, p);
                for r in 0..mat.len() {
                    if r != rank {
                        let f = mat[r][c] / mat[rank][c];
                        for k in 0..cols {
                            mat[r][k] -= f * mat[rank][k];
                        }
                    }
                }
                rank += 1;
            }
        }
        src.len() - rank
    }

    /// Sign changes on (0, 1) of the regular zero-energy solution of the
    /// scalar sector equation, integrated by RK4.
    fn oscillation_count(n: usize, ell: usize, v: &dyn Fn(f64) -> f64) -> (usize, f64) {
        let lam = lambda_ell(ell, n);
        let nn = n as f64;
        let r0: f64 = 1e-4;
        let f = |r: f64, y: [f64; 2]| [y[1], -(nn - 1.0) / r * y[1] + (lam / (r * r) - v(r)) * y[0]];
        let mut y = [r0.powi(ell as i32), ell as f64 * r0.powi(ell as i32 - 1)];
        if ell == 0 {
            y = [1.0, 0.0];
        }
        let steps = 40_000;
        let h = (1.0 - r0) / steps as f64;
        let mut r = r0;
        let mut changes = 0;
        let mut peak = y[0].abs();
        for _ in 0..steps {
            let k1 = f(r, y);
            let k2 = f(r + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
            let k3 = f(r + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
            let k4 = f(r + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
            let next = [
                y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            ];
            if next[0] * y[0] < 0.0 && r + h < 1.0 - 1e-12 {
                changes += 1;
            }
            y = next;
            r += h;
            peak = peak.max(y[0].abs());
        }
        (changes, y[0].abs() / peak)
    }

    fn constant_scalar(n: usize, ell: usize, c: f64) -> SturmLiouvilleSpec {
        SturmLiouvilleSpec::from_fn(n, ell, crate::radial::uniform_grid(200), |_| Mat2::new(c, 0.0, 0.0, 0.0))
    }

    /// Zeros of the spherical Bessel function j_1 by bisection on its closed form.
    fn j1_zeros(limit: f64) -> Vec<f64> {
        let j1 = |x: f64| x.sin() / (x * x) - x.cos() / x;
        let mut out = vec![];
        let mut x = 0.5;
        while x < limit {
            let (a, b) = (x, x + 0.01);
            if j1(a) * j1(b) < 0.0 {
                let (mut lo, mut hi) = (a, b);
                for _ in 0..100 {
                    let m = 0.5 * (lo + hi);
                    if j1(lo) * j1(m) <= 0.0 {
                        hi = m;
                    } else {
                        lo = m;
                    }
                }
                out.push(0.5 * (lo + hi));
            }
            x = b;
        }
        out
    }

    #[test]
    fn lambda_values() {
        assert_eq!(lambda_ell(0, 5), 0.0);
        assert_eq!(lambda_ell(1, 3), 2.0);
        assert_eq!(lambda_ell(3, 3), 12.0);
        assert_eq!(lambda_ell(2, 2), 4.0);
    }

    #[test]
    fn multiplicities_match_harmonic_polynomial_oracle() {
        assert_eq!(sh_multiplicity(0, 4), 1);
        assert_eq!(sh_multiplicity(1, 3), 3);
        assert_eq!(sh_multiplicity(3, 2), 2);
        for n in 2..=5 {
            for ell in 0..=6 {
                assert_eq!(sh_multiplicity(ell, n) as usize, harmonic_dimension(ell, n), "ell {ell}, N {n}");
            }
        }
    }

    #[test]
    fn constant_potential_anchors() {
        assert_eq!(count_negative_eigenvalues(&constant_scalar(3, 0, 0.0), 400).unwrap(), 0);
        assert_eq!(count_negative_eigenvalues(&constant_scalar(3, 0, 50.0), 1000).unwrap(), 2);
        let zeros = j1_zeros(12.0);
        assert!((zeros[0] - 4.493_409).abs() < 1e-5);
        let expected = zeros.iter().filter(|z| z.powi(2) < 50.0).count();
        assert_eq!(expected, 1);
        assert_eq!(count_negative_eigenvalues(&constant_scalar(3, 1, 50.0), 1000).unwrap(), expected);
    }

    #[test]
    fn inertia_counts_match_oscillation_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 20 {
            let n = rng.gen_range(2..=4);
            let ell = rng.gen_range(0..=3);
            let c0: f64 = rng.gen_range(0.0..120.0);
            let c1: f64 = rng.gen_range(-40.0..40.0);
            let k: f64 = rng.gen_range(1.0..8.0);
            let v = move |r: f64| c0 + c1 * (k * r).cos();
            let (osc, end) = oscillation_count(n, ell, &v);
            if end < 1e-3 {
                continue; // near an eigenvalue crossing
            }
            let spec = SturmLiouvilleSpec::from_fn(n, ell, crate::radial::uniform_grid(2000), |r| {
                Mat2::new(v(r), 0.0, 0.0, 0.0)
            });
            assert_eq!(count_negative_eigenvalues(&spec, 2000).unwrap(), osc, "N {n} ell {ell} c0 {c0} c1 {c1} k {k}");
            checked += 1;
        }
    }

    #[test]
    fn counts_are_monotone_in_ell_and_potential() {
        let base = |ell: usize, shift: f64| {
            let spec = SturmLiouvilleSpec::from_fn(3, ell, crate::radial::uniform_grid(400), |r| {
                Mat2::new(80.0 * (1.0 - r) + shift, 5.0, 5.0, 30.0 + shift)
            });
            count_negative_eigenvalues(&spec, 600).unwrap()
        };
        for ell in 0..5 {
            assert!(base(ell + 1, 0.0) <= base(ell, 0.0));
            assert!(base(ell, 10.0) >= base(ell, 0.0));
        }
    }

    #[test]
    fn zero_profile_has_index_zero() {
        let params = ProblemParams::scalar(3, 0.0, 0.0, 4.0).unwrap();
        let prof = integrate_radial_ivp(&params, (0.0, 0.0), 200).unwrap();
        let spec = build_sector(&prof, 0);
        assert!(spec.potential.iter().all(|m| *m == Mat2::zeros()));
        assert_eq!(sector_nonneg_certificate(&prof), 0.0);
        let rep = morse_index(&prof, 400).unwrap();
        assert_eq!(rep.total, 0);
    }

    #[test]
    fn ground_state_index_one_and_certificate() {
        let params = ProblemParams::scalar(3, 0.0, 0.0, 4.0).unwrap();
        let prof = shoot_positive(&params, DEFAULT_TOL).unwrap();
        let spec = build_sector(&prof, 0);
        let last = spec.potential.last().unwrap();
        assert!(last.amax() < 1e-18);
        let expect: f64 = prof
            .grid
            .iter()
            .zip(&prof.u)
            .map(|(r, u)| r * r * 3.0 * u * u)
            .fold(0.0, f64::max);
        assert!((sector_nonneg_certificate(&prof) - expect).abs() < 1e-12 * expect);
        let rep = morse_index(&prof, 1000).unwrap();
        assert_eq!(rep.total, 1);
        let cert_spec = build_sector(&prof, rep.ell_max);
        assert_eq!(count_negative_eigenvalues(&cert_spec, 1000).unwrap(), 0);
        assert_eq!(morse_index(&prof, 2000).unwrap().total, 1);
    }

    #[test]
    fn embedded_scalar_decouples() {
        // v-block is the Laplacian shifted by mu2 >= 0, hence contributes nothing
        let n = 3;
        let grid = crate::radial::uniform_grid(400);
        let coupled = SturmLiouvilleSpec::from_fn(n, 0, grid.clone(), |r| Mat2::new(60.0 * (1.0 - r * r), 0.0, 0.0, -2.0));
        let scalar = SturmLiouvilleSpec::from_fn(n, 0, grid, |r| Mat2::new(60.0 * (1.0 - r * r), 0.0, 0.0, -1e6));
        assert_eq!(
            count_negative_eigenvalues(&coupled, 800).unwrap(),
            count_negative_eigenvalues(&scalar, 800).unwrap()
        );
    }

    #[test]
    fn mesh_below_minimum_is_rejected() {
        assert!(count_negative_eigenvalues(&constant_scalar(3, 0, 1.0), 100).is_err());
    }
}
