//! Radial solutions on the unit ball by shooting from the origin.
//!
//! The radial problem is
//! `-u'' - (N-1)u'/r + mu1 u = r^alpha dF/du(u, v)` (and likewise for `v`)
//! with `u'(0) = v'(0) = 0` and `u(1) = v(1) = 0`.

use crate::error::{Error, Result};
use crate::finite_diff::first_derivative;
use crate::nonlinearity::Nonlinearity;
use crate::ode::{integrate_on_grid, Dopri5};
use crate::quadrature::simpson;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Radius at which the series start hands over to the integrator.
pub const START_RADIUS: f64 = 1e-6;
/// Integrator tolerances for the radial initial value problem.
pub const IVP_RTOL: f64 = 1e-12;
pub const IVP_ATOL: f64 = 1e-12;
/// Magnitude of `|u| + |v|` treated as blow-up.
pub const BLOW_UP: f64 = 1e12;
pub const DEFAULT_GRID: usize = 4000;
pub const DEFAULT_TOL: f64 = 1e-10;

/// Data of one radial problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    #[serde(rename = "N")]
    pub n: usize,
    pub alpha: f64,
    #[serde(default)]
    pub mu1: f64,
    #[serde(default)]
    pub mu2: f64,
    pub f: Nonlinearity,
    /// Scalar equation embedded as `(u, 0)`.
    #[serde(default)]
    pub scalar: bool,
}

impl ProblemParams {
    pub fn new(n: usize, alpha: f64, mu1: f64, mu2: f64, f: Nonlinearity, scalar: bool) -> Result<Self> {
        let p = Self {
            n,
            alpha,
            mu1,
            mu2,
            f,
            scalar,
        };
        p.validate()?;
        Ok(p)
    }

    /// Scalar Hénon problem `-Δu + mu u = |x|^alpha |u|^{p-2} u`.
    pub fn scalar(n: usize, alpha: f64, mu: f64, p: f64) -> Result<Self> {
        Self::new(n, alpha, mu, mu, Nonlinearity::pure_power(p, 1.0, 1.0)?, true)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidInput(format!("dimension must be at least 2, got {}", self.n)));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidInput(format!("alpha must be finite and >= 0, got {}", self.alpha)));
        }
        if !(self.mu1 >= 0.0 && self.mu2 >= 0.0) {
            return Err(Error::InvalidInput("mu1, mu2 must be >= 0".into()));
        }
        Ok(())
    }

    pub fn p(&self) -> f64 {
        self.f.p()
    }

    /// Critical Sobolev exponent (`inf` for `N = 2`).
    pub fn critical_exponent(&self) -> f64 {
        if self.n == 2 {
            f64::INFINITY
        } else {
            2.0 * self.n as f64 / (self.n as f64 - 2.0)
        }
    }

    /// True when the diagonal `u = v` is invariant under the flow.
    pub fn is_symmetric_system(&self) -> bool {
        self.f.is_symmetric() && self.mu1 == self.mu2
    }

    fn weight(&self, r: f64) -> f64 {
        if self.alpha == 0.0 {
            1.0
        } else {
            r.powf(self.alpha)
        }
    }

    /// Second radial derivatives from the equation.
    pub fn second_derivative(&self, r: f64, u: f64, v: f64, du: f64, dv: f64) -> (f64, f64) {
        let (gu, gv) = self.f.grad(u, v);
        if r == 0.0 {
            let n = self.n as f64;
            let forced = if self.alpha == 0.0 { 1.0 } else { 0.0 };
            return ((self.mu1 * u - forced * gu) / n, (self.mu2 * v - forced * gv) / n);
        }
        let w = self.weight(r);
        let c = (self.n as f64 - 1.0) / r;
        (
            -c * du + self.mu1 * u - w * gu,
            -c * dv + self.mu2 * v - w * gv,
        )
    }

    fn rhs(&self, r: f64, y: &[f64; 4]) -> [f64; 4] {
        let (a, b) = self.second_derivative(r, y[0], y[1], y[2], y[3]);
        [y[2], y[3], a, b]
    }
}

/// Which radial solution to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    Positive,
    Nodal(usize),
}

impl Branch {
    pub fn nodes(&self) -> usize {
        match *self {
            Branch::Positive => 0,
            Branch::Nodal(k) => k,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::Positive => write!(f, "positive"),
            Branch::Nodal(k) => write!(f, "nodal({k})"),
        }
    }
}

impl FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "positive" {
            return Ok(Branch::Positive);
        }
        let inner = s
            .strip_prefix("nodal(")
            .and_then(|rest| rest.strip_suffix(')'))
            .ok_or_else(|| Error::InvalidInput(format!("unknown branch `{s}`")))?;
        let k: usize = inner
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad node count in `{s}`")))?;
        Ok(if k == 0 { Branch::Positive } else { Branch::Nodal(k) })
    }
}

impl Serialize for Branch {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Branch {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A radial function pair sampled on the uniform grid `r_i = i / M`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub params: ProblemParams,
    pub grid: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub du: Vec<f64>,
    pub dv: Vec<f64>,
    pub amplitude: (f64, f64),
}

impl RadialProfile {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    pub fn is_trivial(&self) -> bool {
        self.u.iter().chain(&self.v).all(|&x| x == 0.0)
    }

    /// Number of sign changes of `u` strictly inside `(0, 1)`.
    pub fn interior_zeros(&self) -> usize {
        sign_changes(&self.u[..self.u.len() - 1])
    }

    /// Second derivatives at every node, taken from the equation.
    pub fn second_derivatives(&self) -> (Vec<f64>, Vec<f64>) {
        (0..self.len())
            .map(|i| {
                self.params
                    .second_derivative(self.grid[i], self.u[i], self.v[i], self.du[i], self.dv[i])
            })
            .unzip()
    }

    /// Profile multiplied by `t` (values and derivatives).
    pub fn scaled(&self, t: f64) -> RadialProfile {
        let s = |x: &Vec<f64>| x.iter().map(|a| a * t).collect::<Vec<_>>();
        RadialProfile {
            params: self.params,
            grid: self.grid.clone(),
            u: s(&self.u),
            v: s(&self.v),
            du: s(&self.du),
            dv: s(&self.dv),
            amplitude: (self.amplitude.0 * t, self.amplitude.1 * t),
        }
    }
}

fn sign_changes(x: &[f64]) -> usize {
    let mut last = 0.0f64;
    let mut count = 0;
    for &a in x {
        if a != 0.0 {
            if last != 0.0 && (a > 0.0) != (last > 0.0) {
                count += 1;
            }
            last = a;
        }
    }
    count
}

/// Uniform grid `r_i = i / M` on `[0, 1]`.
pub fn uniform_grid(m: usize) -> Vec<f64> {
    (0..=m).map(|i| i as f64 / m as f64).collect()
}

/// Series expansion of the regular solution near the origin, returning
/// `(u, v, u', v')` at radius `r`.
pub fn series_start(params: &ProblemParams, d: (f64, f64), r: f64) -> [f64; 4] {
    let n = params.n as f64;
    let a = params.alpha;
    let (gu, gv) = params.f.grad(d.0, d.1);
    let c = (a + 2.0) * (a + n);
    let ra = r.powf(a + 2.0);
    let rda = (a + 2.0) * r.powf(a + 1.0);
    let (qu, qv) = (params.mu1 * d.0 / (2.0 * n), params.mu2 * d.1 / (2.0 * n));
    [
        d.0 + qu * r * r - gu / c * ra,
        d.1 + qv * r * r - gv / c * ra,
        2.0 * qu * r - gu / c * rda,
        2.0 * qv * r - gv / c * rda,
    ]
}

/// Integrates the regular initial value problem with `u(0) = d.0`,
/// `v(0) = d.1` onto the uniform grid with `grid_size` intervals. No
/// condition is imposed at `r = 1`.
pub fn integrate_radial_ivp(params: &ProblemParams, d: (f64, f64), grid_size: usize) -> Result<RadialProfile> {
    integrate_from(params, d, grid_size, START_RADIUS)
}

/// Same as [`integrate_radial_ivp`] with an explicit hand-over radius.
pub fn integrate_from(params: &ProblemParams, d: (f64, f64), grid_size: usize, start: f64) -> Result<RadialProfile> {
    params.validate()?;
    if grid_size < 100 {
        return Err(Error::InvalidInput(format!("grid_size must be >= 100, got {grid_size}")));
    }
    let grid = uniform_grid(grid_size);
    if start <= 0.0 || start >= grid[1] {
        return Err(Error::InvalidInput("start radius must lie in (0, r_1)".into()));
    }
    let m = grid_size + 1;
    let mut u = vec![0.0; m];
    let mut v = vec![0.0; m];
    let mut du = vec![0.0; m];
    let mut dv = vec![0.0; m];
    if d == (0.0, 0.0) {
        return Ok(RadialProfile {
            params: *params,
            grid,
            u,
            v,
            du,
            dv,
            amplitude: d,
        });
    }
    if d.0.abs() + d.1.abs() > BLOW_UP {
        return Err(Error::OverflowBlowUp {
            at: 0.0,
            magnitude: d.0.abs() + d.1.abs(),
        });
    }
    u[0] = d.0;
    v[0] = d.1;
    let rhs = |r: f64, y: &[f64; 4]| params.rhs(r, y);
    let guard = |_r: f64, y: &[f64; 4]| y[0].abs() + y[1].abs() <= BLOW_UP && y.iter().all(|x| x.is_finite());
    let mut solver = Dopri5::new(IVP_RTOL, IVP_ATOL);
    let mut nodes = Vec::with_capacity(m);
    nodes.push(start);
    nodes.extend_from_slice(&grid[1..]);
    let states = integrate_on_grid(&mut solver, &rhs, &nodes, series_start(params, d, start), guard)?;
    let states = states.map_err(|(at, y)| Error::OverflowBlowUp {
        at,
        magnitude: y[0].abs() + y[1].abs(),
    })?;
    for (i, y) in states.iter().enumerate().skip(1) {
        u[i] = y[0];
        v[i] = y[1];
        du[i] = y[2];
        dv[i] = y[3];
    }
    Ok(RadialProfile {
        params: *params,
        grid,
        u,
        v,
        du,
        dv,
        amplitude: d,
    })
}

/// Shooting direction in amplitude space.
fn direction(params: &ProblemParams) -> Result<(f64, f64)> {
    if params.scalar {
        Ok((1.0, 0.0))
    } else if params.is_symmetric_system() {
        Ok((1.0, 1.0))
    } else {
        Err(Error::InvalidInput(
            "amplitude shooting needs a scalar problem or a symmetric system".into(),
        ))
    }
}

/// Zero count of the shot with amplitude `s` along `dir`; blow-up counts as
/// arbitrarily many zeros.
fn shot(params: &ProblemParams, dir: (f64, f64), s: f64, grid: usize) -> Result<(usize, Option<RadialProfile>)> {
    match integrate_radial_ivp(params, (s * dir.0, s * dir.1), grid) {
        Ok(p) => Ok((sign_changes(&p.u), Some(p))),
        // a huge amplitude oscillates too fast to resolve; it is above any branch
        Err(Error::OverflowBlowUp { .. } | Error::Ode(_)) => Ok((usize::MAX, None)),
        Err(e) => Err(e),
    }
}

/// Positive radial solution (`u > 0` on `[0, 1)`).
pub fn shoot_positive(params: &ProblemParams, tol: f64) -> Result<RadialProfile> {
    shoot_on_grid(params, 0, DEFAULT_GRID, tol)
}

/// Radial solution with exactly `nodes` interior zeros.
pub fn shoot_nodal(params: &ProblemParams, nodes: usize, tol: f64) -> Result<RadialProfile> {
    shoot_on_grid(params, nodes, DEFAULT_GRID, tol)
}

pub fn shoot_branch(params: &ProblemParams, branch: Branch, grid: usize, tol: f64) -> Result<RadialProfile> {
    shoot_on_grid(params, branch.nodes(), grid, tol)
}

/// Shooting on amplitude along the scalar or diagonal direction.
///
/// The zero count `Z(d)` of `u` on `(0, 1]` is non-decreasing in the
/// amplitude; the solution with `k` nodes sits at the jump from `k` to
/// `k + 1`. Bisection on `Z` isolates the jump, then an Illinois iteration on
/// `u(1; d)` polishes it.
pub fn shoot_on_grid(params: &ProblemParams, nodes: usize, grid: usize, tol: f64) -> Result<RadialProfile> {
    params.validate()?;
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tol must be positive".into()));
    }
    let dir = match direction(params) {
        Ok(d) => d,
        Err(_) if nodes == 0 => return newton_system(params, grid, tol),
        Err(e) => return Err(e),
    };
    let above = |z: usize| z > nodes;

    let mut lo;
    let mut hi;
    let mut s = 1.0;
    let (z, _) = shot(params, dir, s, grid)?;
    if above(z) {
        hi = s;
        loop {
            s *= 0.5;
            if s < tol {
                return Err(Error::NoBracket(format!(
                    "zero count stays above {nodes} down to amplitude {tol:e}"
                )));
            }
            if !above(shot(params, dir, s, grid)?.0) {
                lo = s;
                break;
            }
            hi = s;
        }
    } else {
        lo = s;
        loop {
            s *= 2.0;
            if s > 1e8 {
                return Err(Error::NoBracket(format!(
                    "zero count stays at most {nodes} up to amplitude 1e8"
                )));
            }
            if above(shot(params, dir, s, grid)?.0) {
                hi = s;
                break;
            }
            lo = s;
        }
    }

    while hi - lo > 1e-3 * (1.0 + lo) {
        let mid = 0.5 * (lo + hi);
        if above(shot(params, dir, mid, grid)?.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    // g keeps a fixed sign on each side of the root
    let sign = if nodes % 2 == 0 { 1.0 } else { -1.0 };
    let g = |s: f64| -> Result<(f64, Option<RadialProfile>)> {
        let (z, prof) = shot(params, dir, s, grid)?;
        match prof {
            Some(p) if z <= nodes + 1 => Ok((sign * p.u[p.len() - 1], Some(p))),
            _ => Ok((-1.0, None)),
        }
    };
    let (mut glo, mut plo) = g(lo)?;
    let (mut ghi, mut phi) = g(hi)?;
    if !(glo >= 0.0 && ghi <= 0.0) {
        return Err(Error::NoBracket(format!(
            "boundary value does not change sign on [{lo}, {hi}]"
        )));
    }
    let mut side = 0i8;
    for _ in 0..200 {
        if glo.abs() <= tol * 1e-2 || ghi.abs() <= tol * 1e-2 || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let mut c = (lo * ghi - hi * glo) / (ghi - glo);
        if !(c > lo && c < hi) {
            c = 0.5 * (lo + hi);
        }
        let (gc, pc) = g(c)?;
        if gc >= 0.0 {
            lo = c;
            glo = gc;
            plo = pc;
            if side == 1 {
                ghi *= 0.5;
            }
            side = 1;
        } else {
            hi = c;
            ghi = gc;
            phi = pc;
            if side == -1 {
                glo *= 0.5;
            }
            side = -1;
        }
    }
    // the halved g values are only search weights; compare true boundary values
    let pick = |p: &Option<RadialProfile>| p.as_ref().map(|p| p.u[p.len() - 1].abs()).unwrap_or(f64::INFINITY);
    let best = if pick(&plo) <= pick(&phi) { plo } else { phi };
    let best = best.ok_or_else(|| Error::NoConverge("no admissible shot in the final bracket".into()))?;
    if best.u[best.len() - 1].abs() > tol {
        return Err(Error::NoConverge(format!(
            "boundary value {:.3e} above tolerance {tol:e}",
            best.u[best.len() - 1]
        )));
    }
    if best.interior_zeros() != nodes {
        return Err(Error::NoConverge(format!(
            "found {} interior zeros instead of {nodes}",
            best.interior_zeros()
        )));
    }
    Ok(best)
}

/// Best-effort Newton iteration on `d -> (u(1; d), v(1; d))` for systems
/// without diagonal symmetry, started from the diagonal shot of `u + v`.
fn newton_system(params: &ProblemParams, grid: usize, tol: f64) -> Result<RadialProfile> {
    let sym = ProblemParams {
        scalar: false,
        ..*params
    };
    // diagonal starting guess: first sign change of u(1) + v(1) along (s, s)
    let bc = |d: (f64, f64)| -> Result<Option<(f64, f64, RadialProfile)>> {
        match integrate_radial_ivp(&sym, d, grid) {
            Ok(p) => {
                let k = p.len() - 1;
                Ok(Some((p.u[k], p.v[k], p)))
            }
            Err(Error::OverflowBlowUp { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let mut s = 1.0;
    let mut s_lo = 0.0;
    loop {
        match bc((s, s))? {
            Some((a, b, p)) if a + b > 0.0 && sign_changes(&p.u) == 0 && sign_changes(&p.v) == 0 => {
                s_lo = s;
                s *= 2.0;
                if s > 1e8 {
                    return Err(Error::NoBracket("diagonal start not found".into()));
                }
            }
            _ => break,
        }
    }
    let mut s_hi = s;
    if s_lo == 0.0 {
        s_hi = 1.0;
        s_lo = 0.5;
        while s_lo > tol {
            match bc((s_lo, s_lo))? {
                Some((a, b, _)) if a + b > 0.0 => break,
                _ => {
                    s_hi = s_lo;
                    s_lo *= 0.5;
                }
            }
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (s_lo + s_hi);
        match bc((mid, mid))? {
            Some((a, b, _)) if a + b > 0.0 => s_lo = mid,
            _ => s_hi = mid,
        }
    }
    let mut d = (s_lo, s_lo);
    for _ in 0..50 {
        let (a, b, prof) = bc(d)?.ok_or(Error::OverflowBlowUp { at: 1.0, magnitude: f64::INFINITY })?;
        if a.abs().max(b.abs()) <= tol {
            if sign_changes(&prof.u[..prof.len() - 1]) == 0 && sign_changes(&prof.v[..prof.len() - 1]) == 0 {
                return Ok(prof);
            }
            return Err(Error::NoConverge("Newton converged to a sign-changing solution".into()));
        }
        let h1 = 1e-6 * (1.0 + d.0.abs());
        let h2 = 1e-6 * (1.0 + d.1.abs());
        let (a1, b1, _) = bc((d.0 + h1, d.1))?.ok_or(Error::NoConverge("blow-up in Jacobian".into()))?;
        let (a2, b2, _) = bc((d.0, d.1 + h2))?.ok_or(Error::NoConverge("blow-up in Jacobian".into()))?;
        let j = [[(a1 - a) / h1, (a2 - a) / h2], [(b1 - b) / h1, (b2 - b) / h2]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            return Err(Error::NoConverge("singular Jacobian".into()));
        }
        let step = ((j[1][1] * a - j[0][1] * b) / det, (-j[1][0] * a + j[0][0] * b) / det);
        let norm0 = a.abs().max(b.abs());
        let mut lambda = 1.0;
        loop {
            let trial = (d.0 - lambda * step.0, d.1 - lambda * step.1);
            if trial.0 > 0.0 && trial.1 > 0.0 {
                if let Some((ta, tb, _)) = bc(trial)? {
                    if ta.abs().max(tb.abs()) < norm0 || lambda < 1e-3 {
                        d = trial;
                        break;
                    }
                }
            }
            lambda *= 0.5;
            if lambda < 1e-4 {
                return Err(Error::NoConverge("Newton line search failed".into()));
            }
        }
    }
    Err(Error::NoConverge("Newton iteration limit reached".into()))
}

/// Max-norm defect of the first-order radial system over interior nodes,
/// using sixth-order difference stencils.
pub fn residual(profile: &RadialProfile) -> f64 {
    residual_with_order(profile, 6)
}

/// [`residual`] with difference stencils of the given even order.
pub fn residual_with_order(profile: &RadialProfile, order: usize) -> f64 {
    if profile.is_trivial() {
        return 0.0;
    }
    let h = profile.step();
    let pr = &profile.params;
    let d_u = first_derivative(&profile.u, h, order);
    let d_v = first_derivative(&profile.v, h, order);
    let d_du = first_derivative(&profile.du, h, order);
    let d_dv = first_derivative(&profile.dv, h, order);
    let mut worst = 0.0f64;
    for i in 1..profile.len() - 1 {
        let r = profile.grid[i];
        let (uu, vv, uu1, vv1) = (profile.u[i], profile.v[i], profile.du[i], profile.dv[i]);
        let (a, b) = pr.second_derivative(r, uu, vv, uu1, vv1);
        worst = worst
            .max((d_u[i] - uu1).abs())
            .max((d_v[i] - vv1).abs())
            .max((d_du[i] - a).abs())
            .max((d_dv[i] - b).abs());
    }
    worst
}

/// Surface area of the unit sphere in `R^N`.
pub fn sphere_area(n: usize) -> f64 {
    // 2 pi^{N/2} / Gamma(N/2)
    let half = n as f64 / 2.0;
    let mut gamma = if n % 2 == 0 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut x = if n % 2 == 0 { 1.0 } else { 0.5 };
    while x < half {
        gamma *= x;
        x += 1.0;
    }
    2.0 * std::f64::consts::PI.powf(half) / gamma
}

/// Quadratic part `Q` and nonlinear part `P = ∫|x|^alpha pF` of the action.
pub fn action_parts(profile: &RadialProfile) -> (f64, f64) {
    let pr = &profile.params;
    let n1 = pr.n as i32 - 1;
    let p = pr.p();
    let m = profile.len();
    let mut q = Vec::with_capacity(m);
    let mut w = Vec::with_capacity(m);
    for i in 0..m {
        let r = profile.grid[i];
        let vol = r.powi(n1);
        let (u, v) = (profile.u[i], profile.v[i]);
        let (du, dv) = (profile.du[i], profile.dv[i]);
        q.push((du * du + pr.mu1 * u * u + dv * dv + pr.mu2 * v * v) * vol);
        let weight = if r == 0.0 && pr.alpha > 0.0 { 0.0 } else { pr.weight(r) };
        w.push(weight * p * pr.f.eval(u, v) * vol);
    }
    let h = profile.step();
    let omega = sphere_area(pr.n);
    (omega * simpson(&q, h), omega * simpson(&w, h))
}

/// Value of the action `½Q - P/p`.
pub fn action_energy(profile: &RadialProfile) -> f64 {
    let (q, big_p) = action_parts(profile);
    0.5 * q - big_p / profile.params.p()
}

/// Scales a nonzero profile onto its Nehari manifold; returns the scaled
/// profile and the factor `t = (Q/P)^{1/(p-2)}`.
pub fn nehari_project(profile: &RadialProfile) -> Result<(RadialProfile, f64)> {
    let (q, big_p) = action_parts(profile);
    if !(big_p > 0.0) {
        return Err(Error::DegenerateInput(format!(
            "nonlinear part of the action is {big_p:e}; profile is zero or corrupted"
        )));
    }
    let t = (q / big_p).powf(1.0 / (profile.params.p() - 2.0));
    Ok((profile.scaled(t), t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ground(n: usize, alpha: f64) -> ProblemParams {
        ProblemParams::scalar(n, alpha, 0.0, 4.0).unwrap()
    }

    /// Classical fixed-step RK4 on the same initial value problem.
    fn rk4_boundary_value(params: &ProblemParams, d: f64, steps: usize) -> f64 {
        let h = (1.0 - START_RADIUS) / steps as f64;
        let mut y = series_start(params, (d, 0.0), START_RADIUS);
        let mut r = START_RADIUS;
        let f = |r: f64, y: &[f64; 4]| params.rhs(r, y);
        for _ in 0..steps {
            let k1 = f(r, &y);
            let add = |y: &[f64; 4], k: &[f64; 4], s: f64| [y[0] + s * k[0], y[1] + s * k[1], y[2] + s * k[2], y[3] + s * k[3]];
            let k2 = f(r + h / 2.0, &add(&y, &k1, h / 2.0));
            let k3 = f(r + h / 2.0, &add(&y, &k2, h / 2.0));
            let k4 = f(r + h, &add(&y, &k3, h));
            for j in 0..4 {
                y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
            r += h;
        }
        y[0]
    }

    #[test]
    fn zero_data_gives_zero_profile() {
        let p = integrate_radial_ivp(&ground(3, 0.0), (0.0, 0.0), 200).unwrap();
        assert!(p.is_trivial());
        assert_eq!(residual(&p), 0.0);
        assert_eq!(action_energy(&p), 0.0);
        assert!(matches!(nehari_project(&p), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn small_amplitude_stays_positive() {
        let params = ground(3, 0.0);
        let p = integrate_radial_ivp(&params, (0.1, 0.0), 400).unwrap();
        let end = p.u[p.len() - 1];
        assert!(end > 0.0);
        let oracle = rk4_boundary_value(&params, 0.1, 4000);
        assert!((end - oracle).abs() < 1e-10, "{end} vs {oracle}");
    }

    #[test]
    fn series_start_matches_integration_from_half_radius() {
        for (n, alpha, mu) in [(3, 0.0, 0.0), (2, 2.0, 1.0), (3, 1.5, 0.5)] {
            let params = ProblemParams::scalar(n, alpha, mu, 4.0).unwrap();
            let d = (1.7, 0.0);
            let e = START_RADIUS;
            let target = 2.0 * e;
            let mut solver = Dopri5::new(1e-13, 1e-15);
            let f = |r: f64, y: &[f64; 4]| params.rhs(r, y);
            let y = match solver.advance(&f, e / 2.0, series_start(&params, d, e / 2.0), target, &mut |_, _| true).unwrap() {
                crate::ode::Advance::Reached(y) => y,
                _ => unreachable!(),
            };
            let s = series_start(&params, d, target);
            assert!((y[0] - s[0]).abs() < 1e-9 && (y[2] - s[2]).abs() < 1e-9);
        }
    }

    #[test]
    fn blow_up_is_reported() {
        let params = ground(3, 0.0);
        let r = integrate_radial_ivp(&params, (2e12, 0.0), 100);
        assert!(matches!(r, Err(Error::OverflowBlowUp { .. })), "{r:?}");
    }

    #[test]
    fn positive_ground_state_n3() {
        let params = ground(3, 0.0);
        let p = shoot_positive(&params, DEFAULT_TOL).unwrap();
        assert_eq!(p.interior_zeros(), 0);
        assert!(p.u[..p.len() - 1].iter().all(|&x| x > 0.0));
        assert!(residual(&p) <= 1e-8, "residual {}", residual(&p));
        let (_, t) = nehari_project(&p).unwrap();
        assert!((t - 1.0).abs() < 1e-8, "t = {t}");
        let (q, big_p) = action_parts(&p);
        assert!((q - big_p).abs() < 1e-6 * q);
        let e = action_energy(&p);
        assert!((e - 0.25 * big_p).abs() < 1e-6 * e);
    }

    #[test]
    fn positive_weighted_planar() {
        let p = shoot_positive(&ground(2, 4.0), DEFAULT_TOL).unwrap();
        assert!(residual(&p) <= 1e-8);
        assert_eq!(p.interior_zeros(), 0);
    }

    #[test]
    fn nodal_solution_has_exact_node_count() {
        let params = ground(2, 2.0);
        let p1 = shoot_nodal(&params, 1, DEFAULT_TOL).unwrap();
        assert_eq!(p1.interior_zeros(), 1);
        assert!(residual(&p1) <= 1e-8);
        let fine = integrate_radial_ivp(&params, p1.amplitude, 4 * DEFAULT_GRID).unwrap();
        assert_eq!(fine.interior_zeros(), 1);
        let p0 = shoot_positive(&params, DEFAULT_TOL).unwrap();
        assert!(p1.amplitude.0 > p0.amplitude.0);
    }

    #[test]
    fn residual_detects_local_corruption() {
        let mut p = shoot_positive(&ground(3, 0.0), DEFAULT_TOL).unwrap();
        p.u[1234] += 1e-3;
        assert!(residual(&p) >= 1e-2);
    }

    #[test]
    fn residual_is_second_order_with_second_order_stencils() {
        let params = ground(3, 0.0);
        let d = 4.0;
        let errs: Vec<f64> = [100usize, 200, 400, 800]
            .iter()
            .map(|&m| residual_with_order(&integrate_radial_ivp(&params, (d, 0.0), m).unwrap(), 2))
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 1.8, "measured order {order}, errors {errs:?}");
        }
    }

    #[test]
    fn nehari_scaling_is_homogeneous() {
        let params = ground(3, 1.0);
        let p = integrate_radial_ivp(&params, (2.0, 0.0), 400).unwrap();
        let (_, t) = nehari_project(&p).unwrap();
        let (_, t2) = nehari_project(&p.scaled(2.0)).unwrap();
        assert!((t2 - t / 2.0).abs() < 1e-10 * t);
        let (projected, _) = nehari_project(&p).unwrap();
        let (q, big_p) = action_parts(&projected);
        assert!((q - big_p).abs() < 1e-8 * q);
    }

    #[test]
    fn energy_converges_under_refinement() {
        let params = ground(3, 0.0);
        let p = shoot_positive(&params, DEFAULT_TOL).unwrap();
        let fine = integrate_radial_ivp(&params, p.amplitude, 2 * DEFAULT_GRID).unwrap();
        let (e1, e2) = (action_energy(&p), action_energy(&fine));
        assert!((e1 - e2).abs() <= 1e-7 * e1.abs(), "{e1} vs {e2}");
    }

    #[test]
    fn symmetric_system_matches_scalar_on_diagonal() {
        let f = Nonlinearity::quartic_coupled(1.0, 1.0, 1.0).unwrap();
        let sys = ProblemParams::new(3, 0.0, 0.0, 0.0, f, false).unwrap();
        let p = shoot_positive(&sys, DEFAULT_TOL).unwrap();
        assert!((p.amplitude.0 - p.amplitude.1).abs() < 1e-14);
        // on the diagonal the system is the scalar equation with coefficient a1 + b = 2
        let s = shoot_positive(&ground(3, 0.0), DEFAULT_TOL).unwrap();
        assert!((p.amplitude.0 * 2f64.sqrt() - s.amplitude.0).abs() < 1e-8 * s.amplitude.0);
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 2.0 * std::f64::consts::PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-13);
    }

    #[test]
    fn branch_round_trip() {
        for b in [Branch::Positive, Branch::Nodal(1), Branch::Nodal(3)] {
            assert_eq!(b.to_string().parse::<Branch>().unwrap(), b);
        }
        assert_eq!("nodal(0)".parse::<Branch>().unwrap(), Branch::Positive);
        assert!("bogus".parse::<Branch>().is_err());
    }
}
