//! Half-line picture of radial solutions.
//!
//! With `beta = N/(N+alpha)`, `gamma = (N-2) beta` and `r = e^{-beta t}`,
//! the function `u(t) = beta^{2/(p-2)} ũ(e^{-beta t})` solves
//! `-(e^{-gamma t} u')' + beta² mu e^{-beta N t} u = e^{-N t} dF/du(u, v)`
//! on `(0, inf)` with `u(0) = 0`. This module transforms profiles, checks the
//! transformed equation, evaluates the Pohozaev-type inequality and the
//! sector quadratic forms, and solves the weighted half-line eigenproblem.

use crate::error::{Error, Result};
use crate::finite_diff::first_derivative;
use crate::interp::{linear, QuinticHermite};
use crate::linalg::{eigen_residual, smallest_eigenpair, BlockTridiag, Mat2, Vec2};
use crate::nonlinearity::Nonlinearity;
use crate::quadrature::{gauss, simpson, GAUSS5};
use crate::radial::RadialProfile;
use serde::{Deserialize, Serialize};

/// Horizon multiplier: the default truncation is `T = HORIZON / beta`.
pub const HORIZON: f64 = 30.0;

pub fn beta_of(n: usize, alpha: f64) -> f64 {
    n as f64 / (n as f64 + alpha)
}

pub fn default_horizon(n: usize, alpha: f64) -> f64 {
    HORIZON / beta_of(n, alpha)
}

/// A transformed solution sampled on a uniform grid of `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedProfile {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub n: usize,
    pub mu1: f64,
    pub mu2: f64,
    pub f: Nonlinearity,
    pub horizon: f64,
    pub tgrid: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub du: Vec<f64>,
    pub dv: Vec<f64>,
}

impl TransformedProfile {
    pub fn p(&self) -> f64 {
        self.f.p()
    }

    /// Coefficients `beta² mu_i` of the zero-order terms.
    pub fn nu(&self) -> (f64, f64) {
        let b2 = self.beta * self.beta;
        (b2 * self.mu1, b2 * self.mu2)
    }

    /// Decay rate `beta N` of the zero-order weight.
    pub fn rho(&self) -> f64 {
        self.beta * self.n as f64
    }

    pub fn len(&self) -> usize {
        self.tgrid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tgrid.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.tgrid[1] - self.tgrid[0]
    }

    pub fn is_trivial(&self) -> bool {
        self.u.iter().chain(&self.v).all(|&x| x == 0.0)
    }

    /// Second derivatives from the transformed equation.
    pub fn second_derivative(&self, t: f64, u: f64, v: f64, du: f64, dv: f64) -> (f64, f64) {
        let (nu1, nu2) = self.nu();
        let (gu, gv) = self.f.grad(u, v);
        let zero = ((self.gamma - self.rho()) * t).exp();
        let force = ((self.gamma - self.n as f64) * t).exp();
        (
            self.gamma * du + nu1 * zero * u - force * gu,
            self.gamma * dv + nu2 * zero * v - force * gv,
        )
    }

    fn second_derivatives(&self) -> (Vec<f64>, Vec<f64>) {
        (0..self.len())
            .map(|i| self.second_derivative(self.tgrid[i], self.u[i], self.v[i], self.du[i], self.dv[i]))
            .unzip()
    }

    /// Interpolated state `(u, v, u', v')` at any `t` in `[0, T]`.
    pub fn sampler(&self) -> StateSampler<'_> {
        let (d2u, d2v) = self.second_derivatives();
        StateSampler {
            u: QuinticHermite::new(&self.tgrid, &self.u, &self.du, d2u),
            v: QuinticHermite::new(&self.tgrid, &self.v, &self.dv, d2v),
        }
    }

    /// `(u, v)` multiplied by `s`; used only for quadrature sanity checks.
    pub fn scaled(&self, s: f64) -> TransformedProfile {
        let m = |x: &Vec<f64>| x.iter().map(|a| a * s).collect();
        TransformedProfile {
            u: m(&self.u),
            v: m(&self.v),
            du: m(&self.du),
            dv: m(&self.dv),
            ..self.clone()
        }
    }

    /// Potential `U_k = e^{-Nt} D²F(u, v) - beta² e^{-beta N t} diag(mu1, mu2)`.
    pub fn potential(&self, t: f64, u: f64, v: f64) -> Mat2 {
        let (nu1, nu2) = self.nu();
        let z = (-self.rho() * t).exp();
        self.f.hess(u, v) * (-(self.n as f64) * t).exp() - Mat2::new(nu1 * z, 0.0, 0.0, nu2 * z)
    }
}

/// Quintic Hermite interpolation of both components.
pub struct StateSampler<'a> {
    u: QuinticHermite<'a>,
    v: QuinticHermite<'a>,
}

impl StateSampler<'_> {
    pub fn at(&self, t: f64) -> [f64; 4] {
        let (u, du) = self.u.eval(t);
        let (v, dv) = self.v.eval(t);
        [u, v, du, dv]
    }
}

/// Transform onto a uniform `t`-grid with as many intervals as the profile.
pub fn transform_profile(profile: &RadialProfile, horizon: f64) -> Result<TransformedProfile> {
    transform_profile_on(profile, horizon, profile.len() - 1)
}

/// Transform onto a uniform `t`-grid of `[0, horizon]` with `m` intervals.
/// Values between profile nodes come from quintic Hermite interpolation in
/// `r`, with second derivatives taken from the radial equation.
pub fn transform_profile_on(profile: &RadialProfile, horizon: f64, m: usize) -> Result<TransformedProfile> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidInput(format!("horizon must be positive, got {horizon}")));
    }
    if m < 10 {
        return Err(Error::InvalidInput("transform needs at least 10 intervals".into()));
    }
    let pr = &profile.params;
    let beta = beta_of(pr.n, pr.alpha);
    let gamma = (pr.n as f64 - 2.0) * beta;
    let scale = beta.powf(2.0 / (pr.p() - 2.0));
    let (d2u, d2v) = profile.second_derivatives();
    let iu = QuinticHermite::new(&profile.grid, &profile.u, &profile.du, d2u);
    let iv = QuinticHermite::new(&profile.grid, &profile.v, &profile.dv, d2v);
    let tgrid: Vec<f64> = (0..=m).map(|j| horizon * j as f64 / m as f64).collect();
    let mut u = Vec::with_capacity(m + 1);
    let mut v = Vec::with_capacity(m + 1);
    let mut du = Vec::with_capacity(m + 1);
    let mut dv = Vec::with_capacity(m + 1);
    for &t in &tgrid {
        let r = (-beta * t).exp();
        let (a, da) = iu.eval(r);
        let (b, db) = iv.eval(r);
        u.push(scale * a);
        v.push(scale * b);
        du.push(-beta * r * scale * da);
        dv.push(-beta * r * scale * db);
    }
    Ok(TransformedProfile {
        alpha: pr.alpha,
        beta,
        gamma,
        n: pr.n,
        mu1: pr.mu1,
        mu2: pr.mu2,
        f: pr.f,
        horizon,
        tgrid,
        u,
        v,
        du,
        dv,
    })
}

/// Radial values `(ũ(r), ṽ(r))` recovered from a transformed profile, for
/// `e^{-beta T} <= r <= 1`.
pub fn inverse_transform(tp: &TransformedProfile, sampler: &StateSampler<'_>, r: f64) -> (f64, f64) {
    let t = -r.ln() / tp.beta;
    let s = tp.beta.powf(-2.0 / (tp.p() - 2.0));
    let y = sampler.at(t);
    (s * y[0], s * y[1])
}

/// Max-norm defect over interior nodes of the first-order form of the
/// transformed system, using eighth-order difference stencils (the
/// one-sided stencils next to `t = 0` dominate the defect at lower order).
pub fn transformed_residual(tp: &TransformedProfile) -> f64 {
    if tp.is_trivial() {
        return 0.0;
    }
    let h = tp.step();
    let d_u = first_derivative(&tp.u, h, 8);
    let d_v = first_derivative(&tp.v, h, 8);
    let d_du = first_derivative(&tp.du, h, 8);
    let d_dv = first_derivative(&tp.dv, h, 8);
    let mut worst = 0.0f64;
    for i in 1..tp.len() - 1 {
        let (a, b) = tp.second_derivative(tp.tgrid[i], tp.u[i], tp.v[i], tp.du[i], tp.dv[i]);
        worst = worst
            .max((d_u[i] - tp.du[i]).abs())
            .max((d_v[i] - tp.dv[i]).abs())
            .max((d_du[i] - a).abs())
            .max((d_dv[i] - b).abs());
    }
    worst
}

/// Both sides of the Pohozaev-type inequality
/// `u'(0)² + v'(0)² >= 2(N+gamma)/p ∫ [(e^{-gamma t} u)']² + [(e^{-gamma t} v)']²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PohozaevReport {
    pub lhs: f64,
    pub rhs: f64,
    /// Envelope estimate of the right-hand side beyond the horizon.
    pub tail_band: f64,
    /// Right-hand side recomputed through the energy identity
    /// `∫ e^{-gamma t}[p e^{-Nt} F - e^{-rho t}(nu1 u² + nu2 v²)]`.
    pub rhs_identity: f64,
    pub slack: f64,
    /// Whether `gamma <= N/(3p)`, the regime of the lower bound.
    pub lower_bound_applies: bool,
}

/// Tail of `∫_T^inf g` estimated from the exponential envelope of the last
/// tenth of the samples.
fn tail_estimate(t: &[f64], g: &[f64]) -> f64 {
    let n = t.len();
    let last = g[n - 1].abs();
    if last == 0.0 {
        return 0.0;
    }
    let k = n - 1 - (n - 1) / 10;
    let earlier = g[k].abs();
    let span = t[n - 1] - t[k];
    let rate = if earlier > last && span > 0.0 {
        (earlier / last).ln() / span
    } else {
        0.0
    };
    if rate > 0.0 {
        last / rate
    } else {
        f64::INFINITY
    }
}

pub fn pohozaev_check(tp: &TransformedProfile) -> Result<PohozaevReport> {
    let p = tp.p();
    let n = tp.n as f64;
    let (nu1, nu2) = tp.nu();
    // the zero-order rate only matters when the zero-order term is present
    let rho = if nu1 == 0.0 && nu2 == 0.0 { 0.0 } else { tp.rho() };
    let needed = p * rho / 2.0 + (p - 2.0) * tp.gamma / 2.0;
    if n < needed {
        return Err(Error::HypothesisViolated(format!(
            "N = {n} is below p rho/2 + (p-2) gamma/2 = {needed}"
        )));
    }
    let lower_bound_applies = tp.gamma <= n / (3.0 * p);
    if tp.is_trivial() {
        return Ok(PohozaevReport {
            lhs: 0.0,
            rhs: 0.0,
            tail_band: 0.0,
            rhs_identity: 0.0,
            slack: 0.0,
            lower_bound_applies,
        });
    }
    let g = tp.gamma;
    let mut w = Vec::with_capacity(tp.len());
    let mut ident = Vec::with_capacity(tp.len());
    for i in 0..tp.len() {
        let t = tp.tgrid[i];
        let e = (-g * t).exp();
        let (a, b) = (e * (tp.du[i] - g * tp.u[i]), e * (tp.dv[i] - g * tp.v[i]));
        w.push(a * a + b * b);
        let (u, v) = (tp.u[i], tp.v[i]);
        ident.push(
            e * (p * (-n * t).exp() * tp.f.eval(u, v) - (-tp.rho() * t).exp() * (nu1 * u * u + nu2 * v * v)),
        );
    }
    let h = tp.step();
    let factor = 2.0 * (n + g) / p;
    let lhs = tp.du[0] * tp.du[0] + tp.dv[0] * tp.dv[0];
    let rhs = factor * simpson(&w, h);
    let tail_band = factor * tail_estimate(&tp.tgrid, &w);
    let rhs_identity = factor * simpson(&ident, h);
    Ok(PohozaevReport {
        lhs,
        rhs,
        tail_band,
        rhs_identity,
        slack: lhs - rhs,
        lower_bound_applies,
    })
}

/// `max_{t >= 0} t e^{-2Nt/(3p)} = 3p/(2Ne)`.
pub fn c_np(n: usize, p: f64) -> f64 {
    3.0 * p / (2.0 * n as f64 * std::f64::consts::E)
}

/// Lower bound for `u'(0)² + v'(0)²` on nontrivial transformed solutions
/// when `gamma <= N/(3p)`.
pub fn pohozaev_lower_bound(f: &Nonlinearity, n: usize, p: f64) -> f64 {
    let nf = n as f64;
    let base = nf / (3.0 * p * f.big_c_f() * c_np(n, p).powf(p / 2.0));
    2.0 * nf / p * base.powf(2.0 / (p - 2.0))
}

/// Test pair sampled uniformly on `[a, b]`, vanishing at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct TestPair {
    pub a: f64,
    pub b: f64,
    pub values: Vec<Vec2>,
}

impl TestPair {
    pub fn from_fn(a: f64, b: f64, m: usize, f: impl Fn(f64) -> Vec2) -> Self {
        let values = (0..=m)
            .map(|j| {
                if j == 0 || j == m {
                    Vec2::zeros()
                } else {
                    f(a + (b - a) * j as f64 / m as f64)
                }
            })
            .collect();
        Self { a, b, values }
    }

    pub fn grid(&self) -> Vec<f64> {
        let m = self.values.len() - 1;
        (0..=m).map(|j| self.a + (self.b - self.a) * j as f64 / m as f64).collect()
    }

    pub fn step(&self) -> f64 {
        (self.b - self.a) / (self.values.len() - 1) as f64
    }

    pub fn derivative(&self) -> Vec<Vec2> {
        let h = self.step();
        let c0: Vec<f64> = self.values.iter().map(|x| x[0]).collect();
        let c1: Vec<f64> = self.values.iter().map(|x| x[1]).collect();
        let d0 = first_derivative(&c0, h, 6);
        let d1 = first_derivative(&c1, h, 6);
        d0.into_iter().zip(d1).map(|(a, b)| Vec2::new(a, b)).collect()
    }
}

/// `Q_k(phi) = ∫ e^{-gamma t}|phi'|² + lambda beta² e^{-gamma t}|phi|² - <U_k phi, phi>`.
pub fn eval_qk(tp: &TransformedProfile, lambda: f64, phi: &TestPair) -> Result<f64> {
    if phi.a < 0.0 || phi.b > tp.horizon || phi.a >= phi.b {
        return Err(Error::InvalidInput(format!(
            "test support [{}, {}] must lie in [0, {}]",
            phi.a, phi.b, tp.horizon
        )));
    }
    if phi.values.len() < 7 {
        return Err(Error::InvalidInput("test pair needs at least 7 samples".into()));
    }
    let sampler = tp.sampler();
    let dphi = phi.derivative();
    let b2 = tp.beta * tp.beta;
    let integrand: Vec<f64> = phi
        .grid()
        .iter()
        .zip(phi.values.iter().zip(&dphi))
        .map(|(&t, (x, dx))| {
            let e = (-tp.gamma * t).exp();
            let y = sampler.at(t);
            let u = tp.potential(t, y[0], y[1]);
            e * dx.norm_squared() + lambda * b2 * e * x.norm_squared() - x.dot(&(u * x))
        })
        .collect();
    Ok(simpson(&integrand, phi.step()))
}

/// Matrix potential sampled on a grid, linearly interpolated in between.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPotential {
    pub grid: Vec<f64>,
    pub values: Vec<Mat2>,
}

impl SampledPotential {
    pub fn from_fn(grid: Vec<f64>, f: impl Fn(f64) -> Mat2) -> Self {
        let values = grid.iter().map(|&t| f(t)).collect();
        Self { grid, values }
    }

    pub fn at(&self, t: f64) -> Mat2 {
        let comp = |a: usize, b: usize| {
            let ys: Vec<f64> = self.values.iter().map(|m| m[(a, b)]).collect();
            linear(&self.grid, &ys, t)
        };
        let off = comp(0, 1);
        Mat2::new(comp(0, 0), off, off, comp(1, 1))
    }

    fn horizon(&self) -> f64 {
        *self.grid.last().unwrap_or(&0.0)
    }
}

/// Data of the weighted form
/// `Q(h) = ∫ e^{-gamma t}|h'|² + lambda e^{-gamma t}|h|² - e^{-delta t}<U h, h>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedForm<'a> {
    pub potential: &'a SampledPotential,
    pub gamma: f64,
    pub delta: f64,
    pub lambda: f64,
}

/// Instantiation matching a transformed profile: `U = e^{beta N t} U_k`,
/// `delta = beta N`, and the angular coefficient `lambda_ell beta²`.
pub fn weighted_potential(tp: &TransformedProfile) -> SampledPotential {
    let rho = tp.rho();
    let values = (0..tp.len())
        .map(|i| {
            let t = tp.tgrid[i];
            tp.potential(t, tp.u[i], tp.v[i]) * (rho * t).exp()
        })
        .collect();
    SampledPotential {
        grid: tp.tgrid.clone(),
        values,
    }
}

impl WeightedForm<'_> {
    /// P1 Galerkin matrices on `mesh` equal elements of `[0, T]`; unknowns
    /// are nodes `1..=mesh` (`h(0) = 0`, natural condition at `T`).
    pub fn assemble(&self, mesh: usize) -> (BlockTridiag, BlockTridiag, Vec<f64>) {
        let t_end = self.potential.horizon();
        let dt = t_end / mesh as f64;
        let nodes: Vec<f64> = (0..=mesh).map(|j| j as f64 * dt).collect();
        let mut a = BlockTridiag::zeros(mesh);
        let mut b = BlockTridiag::zeros(mesh);
        for e in 0..mesh {
            let (t0, t1) = (nodes[e], nodes[e + 1]);
            let stiff = weight_integral(self.gamma, t0, t1) / (dt * dt);
            let mut k = [[Mat2::zeros(); 2]; 2];
            let mut m = [[Mat2::zeros(); 2]; 2];
            for (ia, sa) in [(0usize, 0.0f64), (1, 1.0)] {
                for (ib, sb) in [(0usize, 0.0f64), (1, 1.0)] {
                    let basis = |t: f64, s: f64| if s == 0.0 { (t1 - t) / dt } else { (t - t0) / dt };
                    let sign = if ia == ib { 1.0 } else { -1.0 };
                    let lam = gauss(&GAUSS5, t0, t1, |t| (-self.gamma * t).exp() * basis(t, sa) * basis(t, sb));
                    let pot = gauss_mat(t0, t1, |t| {
                        self.potential.at(t) * ((-self.delta * t).exp() * basis(t, sa) * basis(t, sb))
                    });
                    let mass = gauss(&GAUSS5, t0, t1, |t| (-self.delta * t).exp() * basis(t, sa) * basis(t, sb));
                    k[ia][ib] = Mat2::identity() * (sign * stiff + self.lambda * lam) - pot;
                    m[ia][ib] = Mat2::identity() * mass;
                }
            }
            // element nodes e, e+1 map to unknowns e-1, e
            if e > 0 {
                a.diag[e - 1] += k[0][0];
                b.diag[e - 1] += m[0][0];
                a.off[e - 1] += k[0][1];
                b.off[e - 1] += m[0][1];
            }
            a.diag[e] += k[1][1];
            b.diag[e] += m[1][1];
        }
        (a, b, nodes)
    }

    /// Direct quadrature of `Q` and of `∫ e^{-delta t}|h|²` on the piecewise
    /// linear function with nodal values `h` (`h(0) = 0` prepended).
    pub fn evaluate(&self, nodes: &[f64], h: &[Vec2]) -> (f64, f64) {
        let mut q = 0.0;
        let mut norm = 0.0;
        for e in 0..nodes.len() - 1 {
            let (t0, t1) = (nodes[e], nodes[e + 1]);
            let h0 = if e == 0 { Vec2::zeros() } else { h[e - 1] };
            let h1 = h[e];
            let slope = (h1 - h0) / (t1 - t0);
            let at = |t: f64| h0 + (h1 - h0) * ((t - t0) / (t1 - t0));
            q += gauss(&GAUSS5, t0, t1, |t| {
                let x = at(t);
                let eg = (-self.gamma * t).exp();
                eg * slope.norm_squared() + self.lambda * eg * x.norm_squared()
                    - (-self.delta * t).exp() * x.dot(&(self.potential.at(t) * x))
            });
            norm += gauss(&GAUSS5, t0, t1, |t| (-self.delta * t).exp() * at(t).norm_squared());
        }
        (q, norm)
    }
}

fn weight_integral(gamma: f64, t0: f64, t1: f64) -> f64 {
    if gamma == 0.0 {
        t1 - t0
    } else {
        ((-gamma * t0).exp() - (-gamma * t1).exp()) / gamma
    }
}

fn gauss_mat(a: f64, b: f64, f: impl Fn(f64) -> Mat2) -> Mat2 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    GAUSS5
        .iter()
        .fold(Mat2::zeros(), |acc, &(x, w)| acc + f(mid + half * x) * w)
        * half
}

/// Minimizer of the weighted form under `∫ e^{-delta t}|h|² = 1`.
#[derive(Debug, Clone)]
pub struct WeightedEigen {
    pub mu_min: f64,
    pub nodes: Vec<f64>,
    /// Values at `nodes[1..]`; `h(0) = 0`.
    pub h: Vec<Vec2>,
    /// Relative residual of the discrete generalized eigen-equation.
    pub residual: f64,
    /// `‖h‖_*² = ∫ e^{-gamma t}|h'|²`.
    pub norm_star: f64,
}

pub fn weighted_eigen_min(
    potential: &SampledPotential,
    gamma: f64,
    delta: f64,
    lambda: f64,
    mesh: usize,
) -> Result<WeightedEigen> {
    if !(delta > gamma && gamma > 0.0) {
        return Err(Error::HypothesisViolated(format!(
            "need delta > gamma > 0, got delta = {delta}, gamma = {gamma}"
        )));
    }
    if mesh < 10 || potential.grid.len() < 2 {
        return Err(Error::InvalidInput("mesh and potential grid are too small".into()));
    }
    let form = WeightedForm {
        potential,
        gamma,
        delta,
        lambda,
    };
    let (a, b, nodes) = form.assemble(mesh);
    let (mu_min, h) = smallest_eigenpair(&a, &b)?;
    let residual = eigen_residual(&a, &b, mu_min, &h);
    let stiff_only = WeightedForm {
        potential: &SampledPotential {
            grid: potential.grid.clone(),
            values: vec![Mat2::zeros(); potential.grid.len()],
        },
        gamma,
        delta,
        lambda: 0.0,
    };
    let (norm_star, _) = stiff_only.evaluate(&nodes, &h);
    let t_end = *nodes.last().unwrap();
    let bound = 2.0 / gamma.sqrt() * norm_star.sqrt() * (0.5 * gamma * t_end).exp();
    let end = h.last().map(|x| x.norm()).unwrap_or(0.0);
    if end > 1.1 * bound {
        return Err(Error::MeshTooCoarse(format!(
            "|h(T)| = {end:e} exceeds the weighted-space bound {bound:e}"
        )));
    }
    Ok(WeightedEigen {
        mu_min,
        nodes,
        h,
        residual,
        norm_star,
    })
}
