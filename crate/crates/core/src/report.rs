//! Columnar CSV files with JSON headers.

use crate::error::{Error, Result};
use crate::radial::{Branch, ProblemParams, RadialProfile, IVP_ATOL, IVP_RTOL, START_RADIUS};
use crate::spectral::ZERO_BAND;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

/// Numerical settings shared by all commands; recorded in every header.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub grid: usize,
    pub tol: f64,
    pub mesh: usize,
    /// Half-line horizon; `None` selects the default for each problem.
    #[serde(rename = "T")]
    pub horizon: Option<f64>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            grid: crate::radial::DEFAULT_GRID,
            tol: crate::radial::DEFAULT_TOL,
            mesh: crate::spectral::DEFAULT_MESH,
            horizon: None,
        }
    }
}

/// Fixed constants of the solvers, echoed for reproducibility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub start_radius: f64,
    pub ivp_rtol: f64,
    pub ivp_atol: f64,
    pub zero_band: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            start_radius: START_RADIUS,
            ivp_rtol: IVP_RTOL,
            ivp_atol: IVP_ATOL,
            zero_band: ZERO_BAND,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileHeader {
    pub params: ProblemParams,
    pub branch: Branch,
    pub amplitude: (f64, f64),
    pub residual: f64,
    pub energy: f64,
    pub interior_zeros: usize,
    pub settings: Settings,
    pub constants: Constants,
}

#[derive(Debug, Serialize, Deserialize)]
struct ProfileRow {
    r: f64,
    u: f64,
    v: f64,
    du: f64,
    dv: f64,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes `rows` to a CSV file with the given header line.
pub fn write_columns(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_sibling(json_path: &Path) -> PathBuf {
    json_path.with_extension("csv")
}

/// Writes `<dir>/<stem>.json` and `<dir>/<stem>.csv`; returns the JSON path.
pub fn write_profile(dir: &Path, stem: &str, profile: &RadialProfile, header: &ProfileHeader) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let json = dir.join(format!("{stem}.json"));
    let mut w = csv::Writer::from_path(csv_sibling(&json))?;
    for i in 0..profile.len() {
        w.serialize(ProfileRow {
            r: profile.grid[i],
            u: profile.u[i],
            v: profile.v[i],
            du: profile.du[i],
            dv: profile.dv[i],
        })?;
    }
    w.flush()?;
    write_json(&json, header)?;
    Ok(json)
}

/// Reads a profile written by [`write_profile`] from its JSON header path.
pub fn read_profile(json_path: &Path) -> Result<(ProfileHeader, RadialProfile)> {
    let header: ProfileHeader = read_json(json_path)?;
    header.params.validate()?;
    let mut rdr = csv::Reader::from_path(csv_sibling(json_path))?;
    let rows: Vec<ProfileRow> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
    if rows.len() < 101 {
        return Err(Error::InvalidInput(format!("profile has only {} samples", rows.len())));
    }
    let m = rows.len() - 1;
    for (i, row) in rows.iter().enumerate() {
        if (row.r - i as f64 / m as f64).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("profile grid is not uniform on [0, 1] at row {i}")));
        }
    }
    let pick = |f: fn(&ProfileRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let u = pick(|r| r.u);
    let v = pick(|r| r.v);
    let profile = RadialProfile {
        params: header.params,
        grid: (0..=m).map(|i| i as f64 / m as f64).collect(),
        amplitude: (u[0], v[0]),
        u,
        v,
        du: pick(|r| r.du),
        dv: pick(|r| r.dv),
    };
    Ok((header, profile))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{residual, shoot_positive};

    #[test]
    fn profile_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let params = ProblemParams::scalar(3, 0.0, 0.0, 4.0).unwrap();
        let prof = shoot_positive(&params, 1e-10).unwrap();
        let header = ProfileHeader {
            params,
            branch: Branch::Positive,
            amplitude: prof.amplitude,
            residual: residual(&prof),
            energy: 0.0,
            interior_zeros: 0,
            settings: Settings::default(),
            constants: Constants::default(),
        };
        let path = write_profile(dir.path(), "profile", &prof, &header).unwrap();
        let (h, back) = read_profile(&path).unwrap();
        assert_eq!(h, header);
        assert_eq!(back.u, prof.u);
        assert_eq!(back.dv, prof.dv);
        assert_eq!(back.grid, prof.grid);
    }

    #[test]
    fn rejects_non_uniform_grid() {
        let dir = tempfile::tempdir().unwrap();
        let params = ProblemParams::scalar(3, 0.0, 0.0, 4.0).unwrap();
        let mut prof = shoot_positive(&params, 1e-10).unwrap();
        prof.grid[5] += 1e-3;
        let header = ProfileHeader {
            params,
            branch: Branch::Positive,
            amplitude: prof.amplitude,
            residual: 0.0,
            energy: 0.0,
            interior_zeros: 0,
            settings: Settings::default(),
            constants: Constants::default(),
        };
        let path = write_profile(dir.path(), "p", &prof, &header).unwrap();
        assert!(matches!(read_profile(&path), Err(Error::InvalidInput(_))));
    }
}
