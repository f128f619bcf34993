//! Autonomous limit system `-u'' = s dF/du(u, v)`, `-v'' = s dF/dv(u, v)`
//! and the constructive tools around its Liouville property: conserved
//! energy, lower mass windows, instability witnesses on far-out windows,
//! the logarithmic cutoff sequence and the doubling lemma.

use crate::error::{Error, Result};
use crate::interp::QuinticHermite;
use crate::linalg::{eigen_residual, smallest_eigenpair, BlockTridiag, Mat2, Vec2};
use crate::nonlinearity::Nonlinearity;
use crate::ode::{integrate_on_grid, Dopri5};
use crate::quadrature::{gauss, GAUSS5};
use serde::{Deserialize, Serialize};

pub const LIMIT_RTOL: f64 = 1e-13;
pub const LIMIT_ATOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interval {
    /// Trajectory on the whole line, stored from a chosen origin.
    FullLine,
    /// Trajectory on `(0, inf)` with `u(0) = v(0) = 0`.
    HalfLine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitTrajectory {
    pub f: Nonlinearity,
    pub interval: Interval,
    pub scale: f64,
    pub tgrid: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub du: Vec<f64>,
    pub dv: Vec<f64>,
}

impl LimitTrajectory {
    pub fn len(&self) -> usize {
        self.tgrid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tgrid.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.tgrid.last().unwrap_or(&0.0)
    }

    pub fn is_trivial(&self) -> bool {
        self.u.iter().chain(&self.v).chain(&self.du).chain(&self.dv).all(|&x| x == 0.0)
    }

    /// Quintic Hermite interpolation of `(u, v, u', v')`.
    pub fn sampler(&self) -> TrajectorySampler<'_> {
        let (d2u, d2v): (Vec<f64>, Vec<f64>) = self
            .u
            .iter()
            .zip(&self.v)
            .map(|(&u, &v)| {
                let (gu, gv) = self.f.grad(u, v);
                (-self.scale * gu, -self.scale * gv)
            })
            .unzip();
        TrajectorySampler {
            u: QuinticHermite::new(&self.tgrid, &self.u, &self.du, d2u),
            v: QuinticHermite::new(&self.tgrid, &self.v, &self.dv, d2v),
        }
    }
}

pub struct TrajectorySampler<'a> {
    u: QuinticHermite<'a>,
    v: QuinticHermite<'a>,
}

impl TrajectorySampler<'_> {
    pub fn at(&self, t: f64) -> [f64; 4] {
        let (u, du) = self.u.eval(t);
        let (v, dv) = self.v.eval(t);
        [u, v, du, dv]
    }
}

/// Integrates the limit system on a uniform grid of `[0, horizon]`.
pub fn integrate_limit_system(
    f: &Nonlinearity,
    scale: f64,
    interval: Interval,
    init: [f64; 4],
    horizon: f64,
    steps: usize,
) -> Result<LimitTrajectory> {
    if steps < 1000 {
        return Err(Error::InvalidInput(format!("steps must be >= 1000, got {steps}")));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidInput(format!("horizon must be positive, got {horizon}")));
    }
    if interval == Interval::HalfLine && (init[0] != 0.0 || init[1] != 0.0) {
        return Err(Error::InvalidInput("half-line trajectories start at u = v = 0".into()));
    }
    let tgrid: Vec<f64> = (0..=steps).map(|j| horizon * j as f64 / steps as f64).collect();
    let rhs = |_t: f64, y: &[f64; 4]| {
        let (gu, gv) = f.grad(y[0], y[1]);
        [y[2], y[3], -scale * gu, -scale * gv]
    };
    let guard = |_t: f64, y: &[f64; 4]| y[0].abs() + y[1].abs() <= 1e12 && y.iter().all(|x| x.is_finite());
    let mut solver = Dopri5::new(LIMIT_RTOL, LIMIT_ATOL);
    let states = integrate_on_grid(&mut solver, &rhs, &tgrid, init, guard)?.map_err(|(at, y)| {
        Error::OverflowBlowUp {
            at,
            magnitude: y[0].abs() + y[1].abs(),
        }
    })?;
    let pick = |k: usize| states.iter().map(|y| y[k]).collect::<Vec<_>>();
    Ok(LimitTrajectory {
        f: *f,
        interval,
        scale,
        u: pick(0),
        v: pick(1),
        du: pick(2),
        dv: pick(3),
        tgrid,
    })
}

/// `E = ½(u'² + v'²) + s F(u, v)` along the trajectory.
pub fn energy_of(traj: &LimitTrajectory) -> Vec<f64> {
    (0..traj.len())
        .map(|i| {
            0.5 * (traj.du[i] * traj.du[i] + traj.dv[i] * traj.dv[i]) + traj.scale * traj.f.eval(traj.u[i], traj.v[i])
        })
        .collect()
}

/// Simple root of `g` on `[a, b]` by bisection (`g(a)`, `g(b)` of opposite sign).
fn bisect(mut a: f64, mut b: f64, g: impl Fn(f64) -> f64) -> f64 {
    let mut ga = g(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if (gm > 0.0) == (ga > 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Composite Gauss–Legendre over `[a, b]` split into `pieces`.
pub fn composite_gauss(a: f64, b: f64, pieces: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| gauss(&GAUSS5, a + i as f64 * h, a + (i + 1) as f64 * h, &f))
        .sum()
}

/// Window centers at local maxima of `|u|^p + |v|^p` (at least 1 apart, with
/// the whole window inside the trajectory) and the mass of each window.
pub fn lower_mass_window(traj: &LimitTrajectory, eps: f64) -> Result<Vec<(f64, f64)>> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput("window half-width must be positive".into()));
    }
    if traj.is_trivial() {
        return Ok(vec![]);
    }
    let p = traj.f.p();
    let s = traj.sampler();
    let density = |t: f64| {
        let y = s.at(t);
        y[0].abs().powf(p) + y[1].abs().powf(p)
    };
    // derivative of the density, from the interpolated state
    let slope = |t: f64| {
        let y = s.at(t);
        let a = if y[0] == 0.0 { 0.0 } else { y[0].abs().powf(p - 2.0) * y[0] };
        let b = if y[1] == 0.0 { 0.0 } else { y[1].abs().powf(p - 2.0) * y[1] };
        p * (a * y[2] + b * y[3])
    };
    let t = &traj.tgrid;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for i in 1..t.len() - 1 {
        let (g0, g1) = (slope(t[i - 1]), slope(t[i]));
        if g0 > 0.0 && g1 <= 0.0 {
            let center = if g1 == 0.0 { t[i] } else { bisect(t[i - 1], t[i], slope) };
            if center - eps < 0.0 || center + eps > traj.horizon() {
                continue;
            }
            if let Some(&(last, _)) = out.last() {
                if center - last < 1.0 {
                    continue;
                }
            }
            let pieces = ((2.0 * eps / (t[1] - t[0])).ceil() as usize).max(8);
            let mass = composite_gauss(center - eps, center + eps, pieces, density);
            out.push((center, mass));
        }
    }
    Ok(out)
}

/// Minimizer of `q(phi) = ∫|phi'|² - s <D²F(u, v) phi, phi>` over Dirichlet
/// pairs on a window, with unit `L²` norm.
#[derive(Debug, Clone)]
pub struct Witness {
    pub window: (f64, f64),
    pub q_min: f64,
    /// Mesh nodes including both ends; `phi` holds the interior values.
    pub nodes: Vec<f64>,
    pub phi: Vec<Vec2>,
    /// `q(phi)` and `∫|phi|²` by direct quadrature of the piecewise linear
    /// witness.
    pub q_direct: f64,
    pub norm_direct: f64,
    pub residual: f64,
}

impl Witness {
    pub fn is_certified(&self) -> bool {
        self.q_min < 0.0 && self.q_direct < 0.0
    }
}

fn window_matrices(
    traj: &LimitTrajectory,
    sampler: &TrajectorySampler<'_>,
    a: f64,
    b: f64,
    mesh: usize,
) -> (BlockTridiag, BlockTridiag, Vec<f64>) {
    let dt = (b - a) / mesh as f64;
    let nodes: Vec<f64> = (0..=mesh).map(|j| a + j as f64 * dt).collect();
    let count = mesh - 1;
    let mut k = BlockTridiag::zeros(count);
    let mut m = BlockTridiag::zeros(count);
    let hess = |t: f64| {
        let y = sampler.at(t);
        traj.f.hess(y[0], y[1]) * traj.scale
    };
    for e in 0..mesh {
        let (t0, t1) = (nodes[e], nodes[e + 1]);
        let left = |t: f64| (t1 - t) / dt;
        let right = |t: f64| (t - t0) / dt;
        let block = |fa: &dyn Fn(f64) -> f64, fb: &dyn Fn(f64) -> f64| {
            let mid = 0.5 * (t0 + t1);
            let half = 0.5 * dt;
            GAUSS5.iter().fold(Mat2::zeros(), |acc, &(x, w)| {
                let t = mid + half * x;
                acc + hess(t) * (w * half * fa(t) * fb(t))
            })
        };
        let pairs: [(usize, &dyn Fn(f64) -> f64); 2] = [(0, &left), (1, &right)];
        for &(ia, fa) in &pairs {
            for &(ib, fb) in &pairs {
                let sign = if ia == ib { 1.0 } else { -1.0 };
                let mass = gauss(&GAUSS5, t0, t1, |t| fa(t) * fb(t));
                let entry = Mat2::identity() * (sign / dt) - block(fa, fb);
                let node_a = e + ia;
                let node_b = e + ib;
                // interior unknowns are nodes 1..mesh-1
                if node_a == 0 || node_b == 0 || node_a == mesh || node_b == mesh {
                    continue;
                }
                let (ra, rb) = (node_a - 1, node_b - 1);
                if ra == rb {
                    k.diag[ra] += entry;
                    m.diag[ra] += Mat2::identity() * mass;
                } else if rb == ra + 1 {
                    k.off[ra] += entry;
                    m.off[ra] += Mat2::identity() * mass;
                }
            }
        }
    }
    (k, m, nodes)
}

/// Direct quadrature of `q` and `∫|phi|²` for a piecewise linear pair with
/// zero end values.
pub fn window_form(traj: &LimitTrajectory, nodes: &[f64], phi: &[Vec2]) -> (f64, f64) {
    let sampler = traj.sampler();
    let mut q = 0.0;
    let mut norm = 0.0;
    let last = nodes.len() - 1;
    let value = |j: usize| if j == 0 || j == last { Vec2::zeros() } else { phi[j - 1] };
    for e in 0..last {
        let (t0, t1) = (nodes[e], nodes[e + 1]);
        let (h0, h1) = (value(e), value(e + 1));
        let slope = (h1 - h0) / (t1 - t0);
        let at = |t: f64| h0 + (h1 - h0) * ((t - t0) / (t1 - t0));
        q += gauss(&GAUSS5, t0, t1, |t| {
            let y = sampler.at(t);
            let x = at(t);
            slope.norm_squared() - traj.scale * x.dot(&(traj.f.hess(y[0], y[1]) * x))
        });
        norm += gauss(&GAUSS5, t0, t1, |t| at(t).norm_squared());
    }
    (q, norm)
}

/// Smallest Dirichlet eigenvalue of `-d²/dt² - s D²F(u, v)` on the window;
/// a negative value together with its eigenfunction is an instability witness.
pub fn instability_witness(traj: &LimitTrajectory, window: (f64, f64), mesh: usize) -> Result<Witness> {
    let (a, b) = window;
    if !(a >= 0.0 && b <= traj.horizon() + 1e-12 && a < b) {
        return Err(Error::InvalidInput(format!(
            "window [{a}, {b}] must lie inside [0, {}]",
            traj.horizon()
        )));
    }
    if mesh < 10 {
        return Err(Error::InvalidInput("window mesh must be at least 10".into()));
    }
    let sampler = traj.sampler();
    let (k, m, nodes) = window_matrices(traj, &sampler, a, b, mesh);
    let (q_min, phi) = smallest_eigenpair(&k, &m)?;
    let residual = eigen_residual(&k, &m, q_min, &phi);
    let (q_direct, norm_direct) = window_form(traj, &nodes, &phi);
    Ok(Witness {
        window,
        q_min,
        nodes,
        phi,
        q_direct,
        norm_direct,
        residual,
    })
}

/// Test pair `psi (u, v)` built from the trajectory itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    /// `q(psi u, psi v)` by quadrature.
    pub q_value: f64,
    /// `∫ psi'²(u² + v²) - s p (p-2) ∫ psi² F`, equal to `q_value` on solutions.
    pub identity_value: f64,
    /// `∫ psi'²(u² + v²) - s p (p-2) c_F ∫ psi²(|u|^p + |v|^p) >= identity_value`.
    pub bound: f64,
}

impl ChainReport {
    pub fn holds(&self, tol: f64) -> bool {
        let scale = 1.0 + self.q_value.abs();
        (self.q_value - self.identity_value).abs() <= tol * scale && self.identity_value <= self.bound + tol * scale
    }
}

/// Secondary check along the test-function chain `phi = psi (u, v)` with
/// `psi` the plateau bump stretched over the window.
pub fn proof_chain_check(traj: &LimitTrajectory, window: (f64, f64), pieces: usize) -> Result<ChainReport> {
    let (a, b) = window;
    if !(a >= 0.0 && b <= traj.horizon() + 1e-12 && a < b) {
        return Err(Error::InvalidInput("window outside the trajectory".into()));
    }
    let p = traj.f.p();
    let s = traj.sampler();
    let c = 0.5 * (a + b);
    let w = 0.25 * (b - a);
    // plateau on the middle half of the window
    let psi = |t: f64| plateau_bump((t - c) / w);
    let dpsi = |t: f64| plateau_bump_derivative((t - c) / w) / w;
    let sc = traj.scale;
    let q_value = composite_gauss(a, b, pieces, |t| {
        let y = s.at(t);
        let phi = Vec2::new(psi(t) * y[0], psi(t) * y[1]);
        let dphi = Vec2::new(dpsi(t) * y[0] + psi(t) * y[2], dpsi(t) * y[1] + psi(t) * y[3]);
        dphi.norm_squared() - sc * phi.dot(&(traj.f.hess(y[0], y[1]) * phi))
    });
    let grad_part = composite_gauss(a, b, pieces, |t| {
        let y = s.at(t);
        dpsi(t).powi(2) * (y[0] * y[0] + y[1] * y[1])
    });
    let f_part = composite_gauss(a, b, pieces, |t| {
        let y = s.at(t);
        psi(t).powi(2) * traj.f.eval(y[0], y[1])
    });
    let lp_part = composite_gauss(a, b, pieces, |t| {
        let y = s.at(t);
        psi(t).powi(2) * (y[0].abs().powf(p) + y[1].abs().powf(p))
    });
    Ok(ChainReport {
        q_value,
        identity_value: grad_part - sc * p * (p - 2.0) * f_part,
        bound: grad_part - sc * p * (p - 2.0) * traj.f.c_f() * lp_part,
    })
}

fn smooth_step_parts(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else {
        (-1.0 / y).exp()
    }
}

/// Smooth step: 0 for `y <= 0`, 1 for `y >= 1`.
fn smooth_step(y: f64) -> f64 {
    let a = smooth_step_parts(y);
    let b = smooth_step_parts(1.0 - y);
    a / (a + b)
}

fn smooth_step_derivative(y: f64) -> f64 {
    if y <= 0.0 || y >= 1.0 {
        return 0.0;
    }
    let a = smooth_step_parts(y);
    let b = smooth_step_parts(1.0 - y);
    let da = a / (y * y);
    let db = b / ((1.0 - y) * (1.0 - y));
    (da * b + a * db) / ((a + b) * (a + b))
}

/// `C^inf` bump equal to 1 on `[-1, 1]` and 0 outside `[-2, 2]`.
pub fn plateau_bump(x: f64) -> f64 {
    smooth_step(2.0 - x.abs())
}

pub fn plateau_bump_derivative(x: f64) -> f64 {
    -x.signum() * smooth_step_derivative(2.0 - x.abs())
}

/// `sup |phi'|` of the plateau bump (attained at `|x| = 3/2`).
pub fn plateau_bump_derivative_sup() -> f64 {
    smooth_step_derivative(0.5)
}

/// `psi_n = phi(ln t / n) u(t)` on the sample grid (`t = 0` maps to 0).
pub fn cutoff_sequence(t: &[f64], u: &[f64], n: usize) -> Result<Vec<f64>> {
    if t.len() != u.len() || t.len() < 2 {
        return Err(Error::InvalidInput("grid and samples must have equal length >= 2".into()));
    }
    if n == 0 {
        return Err(Error::InvalidInput("cutoff index must be positive".into()));
    }
    if t[0] < 0.0 || t.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("grid must be increasing in [0, inf)".into()));
    }
    Ok(t.iter()
        .zip(u)
        .map(|(&ti, &ui)| if ti == 0.0 { 0.0 } else { plateau_bump(ti.ln() / n as f64) * ui })
        .collect())
}

/// `∫ [(u - psi)']²` for piecewise linear interpolants on the grid.
pub fn cutoff_energy(t: &[f64], u: &[f64], psi: &[f64]) -> f64 {
    (0..t.len() - 1)
        .map(|i| {
            let d = (u[i + 1] - psi[i + 1]) - (u[i] - psi[i]);
            d * d / (t[i + 1] - t[i])
        })
        .sum()
}

/// `∫ [u']²` for the piecewise linear interpolant.
pub fn dirichlet_energy(t: &[f64], u: &[f64]) -> f64 {
    cutoff_energy(t, u, &vec![0.0; u.len()])
}

/// Doubling point on a sampled one-dimensional grid: starting from
/// `s_star`, jump to the largest violator of `M <= 2 M(t_n)` inside the
/// ball of radius `M(s_star)/M(t_n)` until none remains.
pub fn doubling_point(grid: &[f64], m: &[f64], s_star: usize) -> Result<usize> {
    if grid.len() != m.len() || grid.is_empty() || s_star >= grid.len() {
        return Err(Error::InvalidInput("grid, values and start index are inconsistent".into()));
    }
    if m.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidInput("M must be positive and finite".into()));
    }
    let m_s = m[s_star];
    let max_m = m.iter().cloned().fold(0.0, f64::max);
    let limit = (max_m / m_s).log2().max(0.0).ceil() as usize + 2;
    let mut current = s_star;
    for _ in 0..=limit {
        let radius = m_s / m[current];
        let centre = grid[current];
        let threshold = 2.0 * m[current];
        let violator = (0..grid.len())
            .filter(|&j| (grid[j] - centre).abs() <= radius && m[j] > threshold)
            .max_by(|&a, &b| m[a].total_cmp(&m[b]).then(b.cmp(&a)));
        match violator {
            Some(j) => current = j,
            None => return Ok(current),
        }
    }
    Err(Error::NonTermination { limit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn quartic() -> Nonlinearity {
        Nonlinearity::pure_power(4.0, 1.0, 1.0).unwrap()
    }

    fn periodic(horizon: f64, steps: usize) -> LimitTrajectory {
        integrate_limit_system(&quartic(), 1.0, Interval::HalfLine, [0.0, 0.0, 1.0, 0.0], horizon, steps).unwrap()
    }

    #[test]
    fn zero_initial_data() {
        let tr = integrate_limit_system(&quartic(), 1.0, Interval::HalfLine, [0.0; 4], 10.0, 1000).unwrap();
        assert!(tr.is_trivial());
        assert!(energy_of(&tr).iter().all(|&e| e == 0.0));
        assert!(lower_mass_window(&tr, 1.0).unwrap().is_empty());
        let w = instability_witness(&tr, (2.0, 5.0), 200).unwrap();
        assert!(w.q_min > 0.0);
    }

    #[test]
    fn half_line_requires_zero_start() {
        let r = integrate_limit_system(&quartic(), 1.0, Interval::HalfLine, [1.0, 0.0, 0.0, 0.0], 10.0, 1000);
        assert!(r.is_err());
    }

    #[test]
    fn energy_is_conserved() {
        for p in [3.0, 4.0, 6.0] {
            let f = Nonlinearity::pure_power(p, 1.0, 2.0).unwrap();
            let tr = integrate_limit_system(&f, 1.0, Interval::FullLine, [0.3, -0.2, 1.0, 0.5], 50.0, 5000).unwrap();
            let e = energy_of(&tr);
            let drift = e.iter().map(|x| (x - e[0]).abs()).fold(0.0, f64::max);
            assert!(drift <= 1e-8 * (1.0 + e[0]), "p {p}: drift {drift:e}");
            assert!(e[0] > 0.0);
        }
        let tr = periodic(50.0, 5000);
        assert!((energy_of(&tr)[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn turning_points_sit_on_the_energy_level() {
        let tr = periodic(50.0, 5000);
        let s = tr.sampler();
        let level = 2f64.powf(0.25);
        let mut seen = 0;
        for i in 1..tr.len() {
            if tr.du[i - 1] > 0.0 && tr.du[i] <= 0.0 || tr.du[i - 1] < 0.0 && tr.du[i] >= 0.0 {
                let t = bisect(tr.tgrid[i - 1], tr.tgrid[i], |t| s.at(t)[2]);
                assert!((s.at(t)[0].abs() - level).abs() < 1e-8);
                seen += 1;
            }
        }
        assert!(seen > 10);
    }

    #[test]
    fn periodic_windows_have_equal_mass() {
        let tr = periodic(60.0, 6000);
        let zeros: Vec<f64> = (1..tr.len()).filter(|&i| tr.u[i - 1] * tr.u[i] < 0.0).map(|i| tr.tgrid[i]).collect();
        let period = 2.0 * (zeros[2] - zeros[1]);
        let windows = lower_mass_window(&tr, period / 4.0).unwrap();
        assert!(windows.len() >= 10);
        let first = windows[0].1;
        assert!(first > 0.0);
        for &(_, m) in &windows {
            assert!((m - first).abs() <= 1e-8 * first, "{m} vs {first}");
        }
    }

    #[test]
    fn witnesses_on_far_windows() {
        let tr = periodic(130.0, 13_000);
        for r in [0.0, 25.0, 50.0, 100.0] {
            let w = instability_witness(&tr, (r, r + 20.0), 2000).unwrap();
            assert!(w.is_certified(), "R = {r}: {}", w.q_min);
            assert!((w.q_direct - w.q_min * w.norm_direct).abs() <= 1e-8 * w.q_min.abs());
        }
        let narrow = instability_witness(&tr, (50.0, 50.1), 200).unwrap();
        assert!(narrow.q_min > 900.0);
    }

    #[test]
    fn witness_is_monotone_in_window() {
        let tr = periodic(60.0, 6000);
        let mut last = f64::INFINITY;
        for len in [0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
            let q = instability_witness(&tr, (20.0, 20.0 + len), 1600).unwrap().q_min;
            assert!(q <= last + 1e-9);
            last = q;
        }
    }

    #[test]
    fn proof_chain_identity_holds() {
        let tr = periodic(60.0, 6000);
        let rep = proof_chain_check(&tr, (10.0, 40.0), 3000).unwrap();
        assert!(rep.holds(1e-8), "{rep:?}");
        assert!(rep.q_value < 0.0);
    }

    #[test]
    fn bump_shape() {
        assert_eq!(plateau_bump(0.0), 1.0);
        assert_eq!(plateau_bump(1.0), 1.0);
        assert_eq!(plateau_bump(-2.0), 0.0);
        assert_eq!(plateau_bump(2.5), 0.0);
        let sup = (0..200_001)
            .map(|k| plateau_bump_derivative(-2.0 + 4.0 * k as f64 / 200_000.0).abs())
            .fold(0.0, f64::max);
        assert!((sup - plateau_bump_derivative_sup()).abs() < 1e-9);
        assert!((plateau_bump_derivative_sup() - 2.0).abs() < 1e-12);
        let h = 1e-6;
        for x in [-1.7, -1.2, 1.3, 1.9] {
            let fd = (plateau_bump(x + h) - plateau_bump(x - h)) / (2.0 * h);
            assert!((fd - plateau_bump_derivative(x)).abs() < 1e-6);
        }
    }

    fn log_grid() -> Vec<f64> {
        let mut t = vec![0.0];
        let (lo, hi) = ((1e-9f64).ln(), 17.0);
        let k = 40_000;
        t.extend((0..=k).map(|j| (lo + (hi - lo) * j as f64 / k as f64).exp()));
        t.push(1.0);
        t.sort_by(|a, b| a.total_cmp(b));
        t.dedup();
        t
    }

    #[test]
    fn cutoff_energies_decrease_and_obey_bound() {
        let t = log_grid();
        let u: Vec<f64> = t.iter().map(|&x| x.min(1.0)).collect();
        let c_u = dirichlet_energy(&t, &u);
        assert!((c_u - 1.0).abs() < 1e-12);
        for (ti, ui) in t.iter().zip(&u) {
            assert!(ui * ui <= ti * c_u + 1e-15);
        }
        let sup = plateau_bump_derivative_sup();
        let mut last = f64::INFINITY;
        for n in 1..=8 {
            let psi = cutoff_sequence(&t, &u, n).unwrap();
            let e = cutoff_energy(&t, &u, &psi);
            assert!(e <= last + 1e-12);
            assert!(e <= 16.0 * c_u * sup * sup / n as f64);
            last = e;
        }
        let zero = cutoff_sequence(&t, &vec![0.0; t.len()], 3).unwrap();
        assert!(zero.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn doubling_examples() {
        let grid: Vec<f64> = (0..=1000).map(|i| i as f64 / 100.0).collect();
        assert_eq!(doubling_point(&grid, &vec![1.0; grid.len()], 0).unwrap(), 0);
        let m: Vec<f64> = grid.iter().map(|t| 1.0 + t).collect();
        assert_eq!(doubling_point(&grid, &m, 0).unwrap(), 0);
    }

    #[test]
    fn doubling_properties_on_random_functions() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.gen_range(50..400);
            let grid: Vec<f64> = (0..n).map(|i| i as f64 * rng.gen_range(0.005..0.05)).collect();
            let m: Vec<f64> = (0..n).map(|_| (rng.gen_range(-3.0..6.0f64)).exp()).collect();
            let s = rng.gen_range(0..n);
            let t = doubling_point(&grid, &m, s).unwrap();
            assert!(m[t] >= m[s]);
            assert!((grid[t] - grid[s]).abs() <= 2.0 + 1e-12);
            let radius = m[s] / m[t];
            for j in 0..n {
                if (grid[j] - grid[t]).abs() < radius {
                    assert!(m[j] <= 2.0 * m[t]);
                }
            }
        }
    }
}
