//! Run configuration: defaults, key-value config files, and validation.
//!
//! The config file format is a flat `key = value` list with `#` comments;
//! command-line flags override file values. Keys accept `-` or `_`
//! interchangeably.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

use crate::grid::Grid;
use crate::interferometer::{InterferometerParams, SMALL_KX_WINDOW};
use crate::wavefunction::Wavefunction;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    Single,
    Ensemble,
    Verify,
    DumpOperators,
}

impl std::str::FromStr for RunMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(RunMode::Single),
            "ensemble" => Ok(RunMode::Ensemble),
            "verify" => Ok(RunMode::Verify),
            "dump-operators" | "dump_operators" => Ok(RunMode::DumpOperators),
            other => Err(Error::Config {
                key: "mode".into(),
                reason: format!(
                    "unknown mode \"{other}\" (single, ensemble, verify, dump-operators)"
                ),
            }),
        }
    }
}

/// Initial-state family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Psi0Family {
    /// Gaussian wavepacket centered at `x0` with width `sigma0` and boost `p0`.
    Gaussian,
    /// Lobes at `-x0` and `+x0` of width `sigma0` with masses
    /// `1 - weight_plus` and `weight_plus`, both boosted by `p0`.
    TwoLobe,
}

impl std::str::FromStr for Psi0Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Psi0Family::Gaussian),
            "two-lobe" | "two_lobe" => Ok(Psi0Family::TwoLobe),
            other => Err(Error::Config {
                key: "psi0".into(),
                reason: format!("unknown family \"{other}\" (gaussian, two-lobe)"),
            }),
        }
    }
}

/// Statistical-test thresholds; the defaults are conventional choices
/// (4-sigma bands, chi-square at the 1% level, 10% on variance ratios).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances {
    pub z_threshold: f64,
    pub chi_square_alpha: f64,
    pub variance_rel_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            z_threshold: 4.0,
            chi_square_alpha: 0.01,
            variance_rel_tol: 0.10,
        }
    }
}

/// Every physical and numerical parameter of a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    /// Photon wavenumber.
    pub k: f64,
    /// Photons per trajectory (N).
    pub n_photons: usize,
    pub grid_points: usize,
    /// Grid spans `[-x_max, x_max]`.
    pub x_max: f64,
    pub psi0: Psi0Family,
    pub x0: f64,
    pub sigma0: f64,
    pub p0: f64,
    /// Mass of the `+x0` lobe (two-lobe family only).
    pub weight_plus: f64,
    pub m_trajectories: usize,
    pub master_seed: u64,
    /// Worker threads for ensembles; 0 means one per CPU.
    pub threads: usize,
    pub out_dir: PathBuf,
    pub use_exact_operators: bool,
    /// Require the initial support to fit the small-kx window, so the
    /// Gaussian-approximation consistency checks are meaningful.
    pub gaussian_checks: bool,
    pub tolerances: Tolerances,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            k: 1.0,
            n_photons: 10_000,
            grid_points: 4096,
            x_max: FRAC_PI_8,
            psi0: Psi0Family::Gaussian,
            x0: 0.0,
            sigma0: 0.02,
            p0: 0.0,
            weight_plus: 0.7,
            m_trajectories: 1000,
            master_seed: 42,
            threads: 0,
            out_dir: PathBuf::from("out"),
            use_exact_operators: true,
            gaussian_checks: true,
            tolerances: Tolerances::default(),
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| Error::Config {
        key: key.into(),
        reason: format!("cannot parse \"{value}\": {e}"),
    })
}

impl SimConfig {
    /// Load a flat `key = value` file over the defaults.
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut config = Self::default();
        config.merge_file(path)?;
        Ok(config)
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        for raw_line in text.lines() {
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = match line.split_once('=') {
                Some((k, v)) => (k.trim(), v.trim()),
                None => {
                    return Err(Error::Config {
                        key: line.split_whitespace().next().unwrap_or(line).into(),
                        reason: "missing value (expected key = value)".into(),
                    })
                }
            };
            if value.is_empty() {
                return Err(Error::Config {
                    key: key.into(),
                    reason: "missing value".into(),
                });
            }
            self.set(key, value)?;
        }
        Ok(())
    }

    /// Apply one `key = value` assignment; keys match the CLI flag names
    /// with either separator.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let canonical = key.replace('-', "_");
        match canonical.as_str() {
            "k" => self.k = parse_value(key, value)?,
            "n_photons" => self.n_photons = parse_value(key, value)?,
            "grid_points" => self.grid_points = parse_value(key, value)?,
            "x_max" => self.x_max = parse_value(key, value)?,
            "psi0" => self.psi0 = value.parse()?,
            "x0" => self.x0 = parse_value(key, value)?,
            "sigma0" => self.sigma0 = parse_value(key, value)?,
            "p0" => self.p0 = parse_value(key, value)?,
            "weight_plus" => self.weight_plus = parse_value(key, value)?,
            "trajectories" => self.m_trajectories = parse_value(key, value)?,
            "seed" => self.master_seed = parse_value(key, value)?,
            "threads" => self.threads = parse_value(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "exact_operators" => self.use_exact_operators = parse_value(key, value)?,
            "gaussian_checks" => self.gaussian_checks = parse_value(key, value)?,
            "z_threshold" => self.tolerances.z_threshold = parse_value(key, value)?,
            "chi_square_alpha" => self.tolerances.chi_square_alpha = parse_value(key, value)?,
            "variance_rel_tol" => self.tolerances.variance_rel_tol = parse_value(key, value)?,
            _ => {
                return Err(Error::Config {
                    key: key.into(),
                    reason: "unknown key".into(),
                })
            }
        }
        Ok(())
    }

    /// Check every cross-parameter constraint.
    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0) || !self.k.is_finite() {
            return Err(Error::Config {
                key: "k".into(),
                reason: format!("must be a positive finite wavenumber, got {}", self.k),
            });
        }
        if self.n_photons < 1 {
            return Err(Error::Config {
                key: "n_photons".into(),
                reason: "need at least one photon".into(),
            });
        }
        if self.m_trajectories < 1 {
            return Err(Error::Config {
                key: "trajectories".into(),
                reason: "need at least one trajectory".into(),
            });
        }
        if !(self.x_max > 0.0) {
            return Err(Error::Config {
                key: "x_max".into(),
                reason: format!("must be positive, got {}", self.x_max),
            });
        }
        if self.grid_points < Grid::MIN_POINTS {
            return Err(Error::Config {
                key: "grid_points".into(),
                reason: format!("need at least {}", Grid::MIN_POINTS),
            });
        }
        // single-branch closed form requires k |x| < pi/4 everywhere
        if self.k * self.x_max >= FRAC_PI_4 {
            return Err(Error::BranchViolation {
                kx_max: self.k * self.x_max,
            });
        }
        if !(0.0..=1.0).contains(&self.weight_plus) {
            return Err(Error::Config {
                key: "weight_plus".into(),
                reason: format!("must lie in [0, 1], got {}", self.weight_plus),
            });
        }
        if self.psi0 == Psi0Family::TwoLobe && !(self.x0 > 0.0) {
            return Err(Error::Config {
                key: "x0".into(),
                reason: "two-lobe states need a positive lobe offset x0".into(),
            });
        }
        if !(self.sigma0 > 0.0) {
            return Err(Error::Config {
                key: "sigma0".into(),
                reason: format!("must be positive, got {}", self.sigma0),
            });
        }
        if self.gaussian_checks {
            let support = self.k * (self.x0.abs() + 5.0 * self.sigma0);
            if support > SMALL_KX_WINDOW * (1.0 + 1e-9) {
                return Err(Error::Config {
                    key: "sigma0".into(),
                    reason: format!(
                        "k (|x0| + 5 sigma0) = {support:.4} exceeds the small-kx window \
                         {SMALL_KX_WINDOW}; widen the window off or shrink the state \
                         (gaussian_checks = false disables this constraint)"
                    ),
                });
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::symmetric(self.x_max, self.grid_points)
    }

    pub fn initial_state(&self) -> Result<Wavefunction> {
        let grid = self.grid()?;
        match self.psi0 {
            Psi0Family::Gaussian => Wavefunction::gaussian(grid, self.x0, self.sigma0, self.p0),
            Psi0Family::TwoLobe => Wavefunction::two_lobe(
                grid,
                self.x0,
                self.sigma0,
                self.weight_plus,
                self.p0,
                self.p0,
            ),
        }
    }

    pub fn interferometer_params(&self) -> InterferometerParams {
        InterferometerParams {
            k: self.k,
            use_exact_operators: self.use_exact_operators,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let config = SimConfig::default();
        config.validate().unwrap();
        let psi0 = config.initial_state().unwrap();
        assert!((psi0.norm_squared() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn file_values_and_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(
            &path,
            "# comment\nk = 2.0\nn-photons = 500\npsi0 = two-lobe\nx0 = 0.01\n\
             weight_plus = 0.3  # inline comment\n",
        )
        .unwrap();
        let mut config = SimConfig::from_file(&path).unwrap();
        assert_eq!(config.k, 2.0);
        assert_eq!(config.n_photons, 500);
        assert_eq!(config.psi0, Psi0Family::TwoLobe);
        assert_eq!(config.weight_plus, 0.3);
        // flag-style override wins
        config.set("k", "1.5").unwrap();
        assert_eq!(config.k, 1.5);
    }

    #[test]
    fn bad_values_name_the_key() {
        let mut config = SimConfig::default();
        let err = config.set("k", "fast").unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "k"), "{err}");
        let err = config.set("warp", "9").unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "warp"));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "k =\n").unwrap();
        let err = SimConfig::from_file(&path).unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "k"), "{err}");
        std::fs::write(&path, "k\n").unwrap();
        let err = SimConfig::from_file(&path).unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "k"), "{err}");
    }

    #[test]
    fn branch_bound_is_validated() {
        let mut config = SimConfig::default();
        config.x_max = 1.0; // k x_max = 1.0 > pi/4
        assert!(matches!(
            config.validate(),
            Err(Error::BranchViolation { .. })
        ));
    }

    #[test]
    fn small_kx_window_is_enforced_when_checks_are_on() {
        let mut config = SimConfig {
            sigma0: 0.05, // 5 sigma = 0.25 > 0.1
            ..SimConfig::default()
        };
        assert!(config.validate().is_err());
        config.gaussian_checks = false;
        config.validate().unwrap();
    }

    #[test]
    fn mode_strings_round_trip() {
        for (s, mode) in [
            ("single", RunMode::Single),
            ("ensemble", RunMode::Ensemble),
            ("verify", RunMode::Verify),
            ("dump-operators", RunMode::DumpOperators),
        ] {
            assert_eq!(s.parse::<RunMode>().unwrap(), mode);
        }
        assert!("both".parse::<RunMode>().is_err());
    }
}
