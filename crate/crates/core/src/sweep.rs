//! Batch pipeline behind the command-line tool: solve, verify, alpha sweeps
//! and Liouville window scans. Every runner writes its files and returns
//! whether all checks passed.

use crate::error::{Error, Result};
use crate::halfline::{
    beta_of, default_horizon, eval_qk, weighted_potential, pohozaev_check, pohozaev_lower_bound, transform_profile_on,
    transformed_residual, weighted_eigen_min, PohozaevReport, TestPair, TransformedProfile,
};
use crate::linalg::Vec2;
use crate::liouville::{energy_of, instability_witness, integrate_limit_system, Interval};
use crate::nonlinearity::Nonlinearity;
use crate::radial::{action_energy, residual, shoot_branch, Branch, ProblemParams, RadialProfile};
use crate::report::{write_columns, write_json, write_profile, Constants, ProfileHeader, Settings};
use crate::spectral::{lambda_ell, morse_index, MorseReport, SectorCount};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

/// Largest accepted defect of a stored or computed solution.
pub const CERT_RESIDUAL: f64 = 1e-6;
/// Largest accepted violation of a sign condition on a quadratic form.
pub const FORM_SLACK: f64 = 1e-8;
pub const PROBE_COUNT: usize = 100;
const PROBE_SEED: u64 = 20;

fn default_branch() -> Branch {
    Branch::Positive
}

fn default_branches() -> Vec<Branch> {
    vec![Branch::Positive]
}

/// Parameters file of `solve`: the problem plus the branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveParams {
    #[serde(flatten)]
    pub problem: ProblemParams,
    #[serde(default = "default_branch")]
    pub branch: Branch,
}

/// Parameters file of `sweep`: a problem without `alpha`, the alphas and
/// the branches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default)]
    pub mu1: f64,
    #[serde(default)]
    pub mu2: f64,
    pub f: Nonlinearity,
    #[serde(default)]
    pub scalar: bool,
    pub alphas: Vec<f64>,
    #[serde(default = "default_branches")]
    pub branches: Vec<Branch>,
}

impl SweepParams {
    pub fn problem(&self, alpha: f64) -> Result<ProblemParams> {
        ProblemParams::new(self.n, alpha, self.mu1, self.mu2, self.f, self.scalar)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() {
            return Err(Error::InvalidInput("alphas must not be empty".into()));
        }
        if self.branches.is_empty() {
            return Err(Error::InvalidInput("branches must not be empty".into()));
        }
        for &a in &self.alphas {
            self.problem(a)?;
        }
        Ok(())
    }
}

fn default_scale() -> f64 {
    1.0
}

fn default_direction() -> [f64; 2] {
    [1.0, 0.0]
}

fn default_starts() -> Vec<f64> {
    vec![0.0, 25.0, 50.0, 100.0]
}

fn default_length() -> f64 {
    20.0
}

/// Parameters file of `liouville`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleParams {
    pub f: Nonlinearity,
    pub energy: f64,
    #[serde(default = "default_scale")]
    pub scale: f64,
    /// Direction of `(u'(0), v'(0))`.
    #[serde(default = "default_direction")]
    pub direction: [f64; 2],
    #[serde(default = "default_starts")]
    pub window_starts: Vec<f64>,
    #[serde(default = "default_length")]
    pub window_length: f64,
}

impl LiouvilleParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.energy >= 0.0 && self.energy.is_finite()) {
            return Err(Error::InvalidInput(format!("energy must be >= 0, got {}", self.energy)));
        }
        if !(self.scale > 0.0) {
            return Err(Error::InvalidInput("scale must be positive".into()));
        }
        if self.direction[0] == 0.0 && self.direction[1] == 0.0 {
            return Err(Error::InvalidInput("direction must be nonzero".into()));
        }
        if self.window_starts.is_empty() || self.window_starts.iter().any(|&a| a < 0.0) {
            return Err(Error::InvalidInput("window starts must be nonempty and nonnegative".into()));
        }
        if !(self.window_length > 0.0) {
            return Err(Error::InvalidInput("window length must be positive".into()));
        }
        Ok(())
    }
}

pub fn load_params<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    crate::report::read_json(path)
}

fn horizon_for(settings: &Settings, n: usize, alpha: f64) -> f64 {
    settings.horizon.unwrap_or_else(|| default_horizon(n, alpha))
}

/// Half-line samples keeping the step of the `alpha = 0` transform.
pub fn halfline_samples(settings: &Settings, n: usize, alpha: f64) -> usize {
    (settings.grid as f64 / beta_of(n, alpha)).ceil() as usize
}

fn transform_for(profile: &RadialProfile, settings: &Settings) -> Result<TransformedProfile> {
    let (n, alpha) = (profile.params.n, profile.params.alpha);
    transform_profile_on(profile, horizon_for(settings, n, alpha), halfline_samples(settings, n, alpha))
}

fn solve_profile(params: &ProblemParams, branch: Branch, settings: &Settings) -> Result<RadialProfile> {
    shoot_branch(params, branch, settings.grid, settings.tol)
}

fn header_for(profile: &RadialProfile, branch: Branch, settings: &Settings) -> ProfileHeader {
    ProfileHeader {
        params: profile.params,
        branch,
        amplitude: profile.amplitude,
        residual: residual(profile),
        energy: action_energy(profile),
        interior_zeros: profile.interior_zeros(),
        settings: *settings,
        constants: Constants::default(),
    }
}

/// Solves one branch and writes `profile.{json,csv}` into `out`.
pub fn run_solve(params: &SolveParams, settings: &Settings, out: &Path) -> Result<bool> {
    params.problem.validate()?;
    let profile = solve_profile(&params.problem, params.branch, settings)?;
    let header = header_for(&profile, params.branch, settings);
    write_profile(out, "profile", &profile, &header)?;
    Ok(header.residual <= CERT_RESIDUAL)
}

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            passed: value <= threshold,
        }
    }

    fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            passed: value >= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub trivial: bool,
    pub params: ProblemParams,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub horizon: Option<f64>,
    pub radial_residual: Option<f64>,
    pub transformed_residual: Option<f64>,
    pub pohozaev: Option<PohozaevReport>,
    /// Why the Pohozaev estimates were not evaluated, if they were not.
    pub pohozaev_skipped: Option<String>,
    pub lower_bound: Option<f64>,
    pub stable_ell: Option<usize>,
    pub qk_probe_min: Option<f64>,
    pub weighted_mu_min: Option<f64>,
    pub weighted_skipped: Option<String>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub settings: Settings,
    pub constants: Constants,
}

/// Minimum of `Q_k` over seeded random bumps supported in `[0, 30]`.
pub fn qk_probe_min(tp: &TransformedProfile, lambda: f64, count: usize, seed: u64) -> Result<f64> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let reach = tp.horizon.min(30.0);
    let mut best = f64::INFINITY;
    for _ in 0..count {
        let len: f64 = rng.gen_range(0.05 * reach..0.65 * reach);
        let a: f64 = rng.gen_range(0.0..reach - len);
        let (c0, c1): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let k: f64 = rng.gen_range(0.0..3.0);
        let phi = TestPair::from_fn(a, a + len, 600, |t| {
            let s = ((t - a) / len * std::f64::consts::PI).sin();
            Vec2::new(c0 * s * s, c1 * s * s * (k * t).cos())
        });
        best = best.min(eval_qk(tp, lambda, &phi)?);
    }
    Ok(best)
}

fn pohozaev_checks(rep: &PohozaevReport, bound: Option<f64>, checks: &mut Vec<Check>) {
    let band = rep.tail_band + 1e-6 * (1.0 + rep.lhs);
    checks.push(Check::at_least("pohozaev_slack", rep.slack, -band));
    if let Some(c) = bound {
        checks.push(Check::at_least("pohozaev_lower_bound", rep.lhs, c - 1e-6 * (1.0 + c)));
    }
}

/// Runs the half-line diagnostics on a stored profile.
pub fn verify_profile(profile: &RadialProfile, settings: &Settings) -> Result<VerifyReport> {
    let params = profile.params;
    let mut report = VerifyReport {
        trivial: profile.is_trivial(),
        params,
        beta: None,
        gamma: None,
        horizon: None,
        radial_residual: None,
        transformed_residual: None,
        pohozaev: None,
        pohozaev_skipped: None,
        lower_bound: None,
        stable_ell: None,
        qk_probe_min: None,
        weighted_mu_min: None,
        weighted_skipped: None,
        checks: vec![],
        passed: true,
        settings: *settings,
        constants: Constants::default(),
    };
    if report.trivial {
        return Ok(report);
    }
    let horizon = horizon_for(settings, params.n, params.alpha);
    let tp = transform_for(profile, settings)?;
    report.beta = Some(tp.beta);
    report.gamma = Some(tp.gamma);
    report.horizon = Some(horizon);

    let rr = residual(profile);
    report.radial_residual = Some(rr);
    report.checks.push(Check::at_most("radial_residual", rr, CERT_RESIDUAL));
    let tr = transformed_residual(&tp);
    report.transformed_residual = Some(tr);
    report.checks.push(Check::at_most("transformed_residual", tr, CERT_RESIDUAL));

    match pohozaev_check(&tp) {
        Ok(rep) => {
            if rep.lower_bound_applies {
                report.lower_bound = Some(pohozaev_lower_bound(&params.f, params.n, params.p()));
            }
            pohozaev_checks(&rep, report.lower_bound, &mut report.checks);
            report.pohozaev = Some(rep);
        }
        Err(Error::HypothesisViolated(why)) => report.pohozaev_skipped = Some(why),
        Err(e) => return Err(e),
    }

    let morse = morse_index(profile, settings.mesh)?;
    let stable = morse
        .per_ell
        .iter()
        .find(|s| s.negatives == 0)
        .map(|s| s.ell)
        .unwrap_or(morse.ell_max);
    report.stable_ell = Some(stable);
    let lam = lambda_ell(stable, params.n);
    let q = qk_probe_min(&tp, lam, PROBE_COUNT, PROBE_SEED)?;
    report.qk_probe_min = Some(q);
    report.checks.push(Check::at_least("qk_probe_min", q, -FORM_SLACK));

    let pot = weighted_potential(&tp);
    match weighted_eigen_min(&pot, tp.gamma, tp.rho(), lam * tp.beta * tp.beta, 3 * settings.mesh) {
        Ok(w) => {
            report.weighted_mu_min = Some(w.mu_min);
            report.checks.push(Check::at_least("weighted_mu_min", w.mu_min, -FORM_SLACK));
        }
        Err(e @ (Error::HypothesisViolated(_) | Error::MeshTooCoarse(_))) => {
            report.weighted_skipped = Some(e.to_string());
        }
        Err(e) => return Err(e),
    }
    report.passed = report.checks.iter().all(|c| c.passed);
    Ok(report)
}

/// Verifies `profile_json` and writes `verification.json` into `out`.
pub fn run_verify(profile_json: &Path, settings: &Settings, out: &Path) -> Result<bool> {
    let (_, profile) = crate::report::read_profile(profile_json)?;
    let report = verify_profile(&profile, settings)?;
    fs::create_dir_all(out)?;
    write_json(&out.join("verification.json"), &report)?;
    Ok(report.passed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Certified,
    Failed,
    /// The index changed under mesh doubling.
    Unstable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub branch: Branch,
    pub status: RowStatus,
    pub reason: Option<String>,
    pub amplitude: Option<f64>,
    pub energy: Option<f64>,
    pub per_ell: Vec<SectorCount>,
    pub ell_max: Option<usize>,
    pub total_morse_index: Option<u64>,
    pub total_at_double_mesh: Option<u64>,
    pub residual: Option<f64>,
    pub pohozaev_slack: Option<f64>,
    pub transformed_residual: Option<f64>,
}

impl SweepRow {
    fn failed(alpha: f64, branch: Branch, reason: String) -> Self {
        Self {
            alpha,
            branch,
            status: RowStatus::Failed,
            reason: Some(reason),
            amplitude: None,
            energy: None,
            per_ell: vec![],
            ell_max: None,
            total_morse_index: None,
            total_at_double_mesh: None,
            residual: None,
            pohozaev_slack: None,
            transformed_residual: None,
        }
    }
}

/// Solves and certifies one `(alpha, branch)` point.
pub fn sweep_row(base: &SweepParams, alpha: f64, branch: Branch, settings: &Settings) -> SweepRow {
    match certify_row(base, alpha, branch, settings) {
        Ok(row) => row,
        Err(e) => SweepRow::failed(alpha, branch, e.to_string()),
    }
}

fn certify_row(base: &SweepParams, alpha: f64, branch: Branch, settings: &Settings) -> Result<SweepRow> {
    let params = base.problem(alpha)?;
    let profile = solve_profile(&params, branch, settings)?;
    let res = residual(&profile);
    let (coarse, fine): (Result<MorseReport>, Result<MorseReport>) = rayon::join(
        || morse_index(&profile, settings.mesh),
        || morse_index(&profile, 2 * settings.mesh),
    );
    let (coarse, fine) = (coarse?, fine?);
    let tp = transform_for(&profile, settings)?;
    let tres = transformed_residual(&tp);
    let pohozaev = match pohozaev_check(&tp) {
        Ok(rep) => Some(rep),
        Err(Error::HypothesisViolated(_)) => None,
        Err(e) => return Err(e),
    };

    let mut reasons = vec![];
    if res > CERT_RESIDUAL {
        reasons.push(format!("radial residual {res:.3e} above {CERT_RESIDUAL:e}"));
    }
    if tres > CERT_RESIDUAL {
        reasons.push(format!("transformed residual {tres:.3e} above {CERT_RESIDUAL:e}"));
    }
    if let Some(rep) = &pohozaev {
        let mut checks = vec![];
        pohozaev_checks(rep, None, &mut checks);
        if !checks.iter().all(|c| c.passed) {
            reasons.push(format!("Pohozaev slack {:.3e} below the quadrature band", rep.slack));
        }
    }
    let unstable = coarse.total != fine.total;
    if unstable {
        reasons.push(format!(
            "index {} at mesh {} but {} at mesh {}",
            coarse.total,
            coarse.mesh,
            fine.total,
            fine.mesh
        ));
    }
    let status = if !reasons.is_empty() && !unstable || reasons.len() > 1 {
        RowStatus::Failed
    } else if unstable {
        RowStatus::Unstable
    } else {
        RowStatus::Certified
    };
    Ok(SweepRow {
        alpha,
        branch,
        status,
        reason: (!reasons.is_empty()).then(|| reasons.join("; ")),
        amplitude: Some(profile.amplitude.0),
        energy: Some(action_energy(&profile)),
        ell_max: Some(coarse.ell_max),
        total_morse_index: Some(coarse.total),
        total_at_double_mesh: Some(fine.total),
        per_ell: coarse.per_ell,
        residual: Some(res),
        pohozaev_slack: pohozaev.map(|r| r.slack),
        transformed_residual: Some(tres),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSummary {
    pub branch: Branch,
    /// Smallest certified alpha whose total index exceeds one.
    pub alpha_bar: Option<f64>,
    /// Whether the total index is non-decreasing along the certified rows.
    pub non_decreasing: bool,
    pub certified_rows: usize,
    pub failed_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub params: SweepParams,
    pub rows: Vec<SweepRow>,
    pub summary: Vec<BranchSummary>,
    pub settings: Settings,
    pub constants: Constants,
}

impl SweepReport {
    pub fn all_certified(&self) -> bool {
        self.rows.iter().all(|r| r.status == RowStatus::Certified)
    }
}

pub fn summarize(branch: Branch, rows: &[SweepRow]) -> BranchSummary {
    let mine: Vec<&SweepRow> = rows.iter().filter(|r| r.branch == branch).collect();
    let certified: Vec<&SweepRow> = mine.iter().copied().filter(|r| r.status == RowStatus::Certified).collect();
    let totals: Vec<u64> = certified.iter().filter_map(|r| r.total_morse_index).collect();
    BranchSummary {
        branch,
        alpha_bar: certified
            .iter()
            .find(|r| r.total_morse_index.is_some_and(|t| t > 1))
            .map(|r| r.alpha),
        non_decreasing: totals.windows(2).all(|w| w[0] <= w[1]),
        certified_rows: certified.len(),
        failed_rows: mine.len() - certified.len(),
    }
}

/// Runs every `(alpha, branch)` pair in parallel; rows are sorted by alpha.
pub fn sweep(params: &SweepParams, settings: &Settings) -> Result<SweepReport> {
    params.validate()?;
    let mut jobs: Vec<(f64, Branch)> = params
        .alphas
        .iter()
        .flat_map(|&a| params.branches.iter().map(move |&b| (a, b)))
        .collect();
    jobs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    jobs.dedup();
    let rows: Vec<SweepRow> = jobs
        .par_iter()
        .map(|&(a, b)| sweep_row(params, a, b, settings))
        .collect();
    let mut branches = params.branches.clone();
    branches.sort();
    branches.dedup();
    let summary = branches.iter().map(|&b| summarize(b, &rows)).collect();
    Ok(SweepReport {
        params: params.clone(),
        rows,
        summary,
        settings: *settings,
        constants: Constants::default(),
    })
}

#[derive(Serialize)]
struct SweepCsvRow<'a> {
    alpha: f64,
    branch: String,
    status: RowStatus,
    amplitude: Option<f64>,
    energy: Option<f64>,
    negatives: String,
    total_morse_index: Option<u64>,
    pohozaev_slack: Option<f64>,
    transformed_residual: Option<f64>,
    residual: Option<f64>,
    reason: &'a str,
}

/// Writes `sweep.json` and `sweep.csv` into `out`.
pub fn write_sweep(report: &SweepReport, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    write_json(&out.join("sweep.json"), report)?;
    let mut w = csv::Writer::from_path(out.join("sweep.csv"))?;
    for r in &report.rows {
        w.serialize(SweepCsvRow {
            alpha: r.alpha,
            branch: r.branch.to_string(),
            status: r.status,
            amplitude: r.amplitude,
            energy: r.energy,
            negatives: r
                .per_ell
                .iter()
                .map(|s| s.negatives.to_string())
                .collect::<Vec<_>>()
                .join(";"),
            total_morse_index: r.total_morse_index,
            pohozaev_slack: r.pohozaev_slack,
            transformed_residual: r.transformed_residual,
            residual: r.residual,
            reason: r.reason.as_deref().unwrap_or(""),
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn run_sweep(params: &SweepParams, settings: &Settings, out: &Path) -> Result<bool> {
    let report = sweep(params, settings)?;
    write_sweep(&report, out)?;
    Ok(report.all_certified())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowResult {
    pub a: f64,
    pub b: f64,
    pub q_min: f64,
    pub q_direct: f64,
    pub norm_direct: f64,
    pub residual: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleReport {
    pub params: LiouvilleParams,
    pub trivial: bool,
    pub horizon: f64,
    pub steps: usize,
    pub energy_drift: f64,
    pub windows: Vec<WindowResult>,
    pub all_unstable: bool,
    pub explanation: String,
    pub settings: Settings,
}

/// Integrates the half-line trajectory of the given energy and computes a
/// Dirichlet witness on every window; writes `liouville.json`,
/// `windows.csv`, `trajectory.csv` and `witness_<i>.csv`.
pub fn run_liouville(params: &LiouvilleParams, settings: &Settings, out: &Path) -> Result<bool> {
    params.validate()?;
    let last_end = params
        .window_starts
        .iter()
        .fold(0.0f64, |m, &a| m.max(a + params.window_length));
    let horizon = settings.horizon.unwrap_or(last_end + 1.0);
    if horizon < last_end {
        return Err(Error::InvalidInput(format!("horizon {horizon} ends before the last window {last_end}")));
    }
    let steps = settings.grid.max((100.0 * horizon).ceil() as usize).max(1000);
    fs::create_dir_all(out)?;
    let mut report = LiouvilleReport {
        params: params.clone(),
        trivial: params.energy == 0.0,
        horizon,
        steps,
        energy_drift: 0.0,
        windows: vec![],
        all_unstable: true,
        explanation: String::new(),
        settings: *settings,
    };
    if report.trivial {
        report.explanation = "trivial: zero energy gives the zero solution".into();
        write_json(&out.join("liouville.json"), &report)?;
        return Ok(true);
    }
    let speed = (2.0 * params.energy).sqrt();
    let norm = params.direction[0].hypot(params.direction[1]);
    let init = [
        0.0,
        0.0,
        speed * params.direction[0] / norm,
        speed * params.direction[1] / norm,
    ];
    let traj = integrate_limit_system(&params.f, params.scale, Interval::HalfLine, init, horizon, steps)?;
    let energy = energy_of(&traj);
    report.energy_drift = energy.iter().map(|e| (e - energy[0]).abs()).fold(0.0, f64::max);
    let witnesses = params
        .window_starts
        .par_iter()
        .map(|&a| instability_witness(&traj, (a, a + params.window_length), settings.mesh))
        .collect::<Result<Vec<_>>>()?;
    for (i, w) in witnesses.iter().enumerate() {
        let last = w.nodes.len() - 1;
        let rows = w.nodes.iter().enumerate().map(|(j, &t)| {
            let x = if j == 0 || j == last { Vec2::zeros() } else { w.phi[j - 1] };
            vec![t, x[0], x[1]]
        });
        write_columns(&out.join(format!("witness_{i}.csv")), &["t", "phi_u", "phi_v"], rows)?;
        report.windows.push(WindowResult {
            a: w.window.0,
            b: w.window.1,
            q_min: w.q_min,
            q_direct: w.q_direct,
            norm_direct: w.norm_direct,
            residual: w.residual,
            certified: w.is_certified(),
        });
    }
    write_columns(
        &out.join("windows.csv"),
        &["a", "b", "q_min", "q_direct", "certified"],
        report
            .windows
            .iter()
            .map(|w| vec![w.a, w.b, w.q_min, w.q_direct, if w.certified { 1.0 } else { 0.0 }]),
    )?;
    write_columns(
        &out.join("trajectory.csv"),
        &["t", "u", "v", "du", "dv", "energy"],
        (0..traj.len()).map(|i| vec![traj.tgrid[i], traj.u[i], traj.v[i], traj.du[i], traj.dv[i], energy[i]]),
    )?;
    report.all_unstable = report.windows.iter().all(|w| w.certified);
    report.explanation = if report.all_unstable {
        "every window carries a negative direction of the second variation".into()
    } else {
        let stable: Vec<String> = report
            .windows
            .iter()
            .filter(|w| !w.certified)
            .map(|w| format!("[{}, {}] (q_min = {:.4e})", w.a, w.b, w.q_min))
            .collect();
        format!(
            "no negative direction on {}; the Dirichlet energy of a short window dominates the bounded potential",
            stable.join(", ")
        )
    };
    write_json(&out.join("liouville.json"), &report)?;
    Ok(report.all_unstable)
}
