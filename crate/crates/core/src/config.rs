//! Run configuration shared by all subcommands.
//!
//! A config file is TOML. Anything left out gets a per-command default during
//! [`RunConfig::resolve`], and the resolved config is what output headers echo.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::front::FrontTolerances;
use crate::linear::{linear_spreading_speed, m_star, migration_cap};
use crate::model::{LinearParams, Params, RationalSpeed};
use crate::regions::c_bounds_with;
use crate::roots::RootTolerances;
use crate::sim::SimConfig;
use crate::spectral::{ScanTolerances, WeightedSpace, MIN_K_SAMPLES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    Staircase,
    Regions,
    Compare,
    Front,
    Slin,
    Spectrum,
    Widths,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Staircase,
        Command::Regions,
        Command::Compare,
        Command::Front,
        Command::Slin,
        Command::Spectrum,
        Command::Widths,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Staircase => "staircase",
            Command::Regions => "regions",
            Command::Compare => "compare",
            Command::Front => "front",
            Command::Slin => "slin",
            Command::Spectrum => "spectrum",
            Command::Widths => "widths",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamBlock {
    pub r: Option<f64>,
    pub m: Option<f64>,
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpeedBlock {
    pub p: Option<u32>,
    pub q: Option<u32>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridBlock {
    pub m_min: Option<f64>,
    pub m_max: Option<f64>,
    pub m_count: Option<usize>,
    pub c_min: Option<f64>,
    pub c_max: Option<f64>,
    pub c_count: Option<usize>,
    pub q_max: Option<u32>,
    pub k_count: Option<usize>,
    pub gamma_count: Option<usize>,
    /// Weight rate for the spectrum curve.
    pub weight: Option<f64>,
}

/// Every numerical tolerance, flattened so each can be overridden by name.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub residual: f64,
    pub count_slack: f64,
    pub modulus_gap: f64,
    pub pairing: f64,
    pub zeta_identity: f64,
    pub zeta_separation: f64,
    pub coefficient_agreement: f64,
    pub imag_residue: f64,
    pub normalization: f64,
    pub radius_slack: f64,
    pub separation: f64,
    /// Speed classification; defaults to half the simulation's resolution.
    pub classify: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        let front = FrontTolerances::default();
        let scan = ScanTolerances::default();
        let roots = front.roots;
        Self {
            residual: roots.residual,
            count_slack: roots.count_slack,
            modulus_gap: roots.modulus_gap,
            pairing: roots.pairing,
            zeta_identity: roots.zeta_identity,
            zeta_separation: front.zeta_separation,
            coefficient_agreement: front.coefficient_agreement,
            imag_residue: front.imag_residue,
            normalization: front.normalization,
            radius_slack: scan.radius_slack,
            separation: scan.separation,
            classify: None,
        }
    }
}

impl Tolerances {
    pub fn roots(&self) -> RootTolerances {
        RootTolerances {
            residual: self.residual,
            count_slack: self.count_slack,
            modulus_gap: self.modulus_gap,
            pairing: self.pairing,
            zeta_identity: self.zeta_identity,
        }
    }

    pub fn front(&self) -> FrontTolerances {
        FrontTolerances {
            roots: self.roots(),
            zeta_separation: self.zeta_separation,
            coefficient_agreement: self.coefficient_agreement,
            imag_residue: self.imag_residue,
            normalization: self.normalization,
        }
    }

    pub fn scan(&self) -> ScanTolerances {
        ScanTolerances {
            roots: self.roots(),
            radius_slack: self.radius_slack,
            separation: self.separation,
        }
    }

    /// Set a tolerance by its name, as used in `--tol-<name>`.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name.replace('-', "_").as_str() {
            "residual" => &mut self.residual,
            "count_slack" => &mut self.count_slack,
            "modulus_gap" => &mut self.modulus_gap,
            "pairing" => &mut self.pairing,
            "zeta_identity" => &mut self.zeta_identity,
            "zeta_separation" => &mut self.zeta_separation,
            "coefficient_agreement" => &mut self.coefficient_agreement,
            "imag_residue" => &mut self.imag_residue,
            "normalization" => &mut self.normalization,
            "radius_slack" => &mut self.radius_slack,
            "separation" => &mut self.separation,
            "classify" => {
                self.classify = Some(value);
                return Ok(());
            }
            other => return Err(Error::Config(format!("unknown tolerance '{other}'"))),
        };
        *slot = value;
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        let named = [
            ("residual", self.residual),
            ("count_slack", self.count_slack),
            ("modulus_gap", self.modulus_gap),
            ("pairing", self.pairing),
            ("zeta_identity", self.zeta_identity),
            ("zeta_separation", self.zeta_separation),
            ("coefficient_agreement", self.coefficient_agreement),
            ("imag_residue", self.imag_residue),
            ("normalization", self.normalization),
            ("radius_slack", self.radius_slack),
            ("separation", self.separation),
            ("classify", self.classify.unwrap_or(1.0)),
        ];
        match named.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            Some((name, v)) => Err(Error::Config(format!(
                "tolerance {name} = {v} must be positive"
            ))),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub params: ParamBlock,
    pub speed: SpeedBlock,
    pub grid: GridBlock,
    pub sim: SimConfig,
    pub tolerances: Tolerances,
}

pub const DEFAULT_OUT_DIR: &str = "vlock-out";

fn require<T>(value: Option<T>, name: &str, cmd: Command) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("`{cmd}` needs {name}")))
}

fn check_range(name: &str, lo: f64, hi: f64) -> Result<()> {
    if lo < hi && lo.is_finite() && hi.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} range [{lo}, {hi}] is empty")))
    }
}

fn check_count(name: &str, n: usize, min: usize) -> Result<()> {
    if n >= min {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{name} = {n} must be at least {min}"
        )))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config is always representable as TOML")
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }

    pub fn linear_params(&self, cmd: Command) -> Result<LinearParams> {
        LinearParams::new(
            require(self.params.r, "r", cmd)?,
            require(self.params.m, "m", cmd)?,
        )
    }

    pub fn rational_speed(&self, cmd: Command) -> Result<RationalSpeed> {
        RationalSpeed::new(
            require(self.speed.p, "p", cmd)?,
            require(self.speed.q, "q", cmd)?,
        )
    }

    pub fn r(&self, cmd: Command) -> Result<f64> {
        let r = require(self.params.r, "r", cmd)?;
        LinearParams::new(r, 0.0)?;
        Ok(r)
    }

    /// Fill command defaults and validate everything the command will use.
    pub fn resolve(&self, cmd: Command) -> Result<RunConfig> {
        let mut cfg = self.clone();
        cfg.out
            .get_or_insert_with(|| PathBuf::from(DEFAULT_OUT_DIR));
        cfg.tolerances.validate()?;
        if cfg.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        let g = &mut cfg.grid;
        match cmd {
            Command::Staircase => {
                let r = self.r(cmd)?;
                let c = require(self.params.c, "c", cmd)?;
                let m_min = *g.m_min.get_or_insert(0.01);
                let m_max = *g.m_max.get_or_insert(0.9);
                let m_count = *g.m_count.get_or_insert(200);
                check_range("m", m_min, m_max)?;
                check_count("m_count", m_count, 2)?;
                Params::new(r, m_min, c)?;
                Params::new(r, m_max, c)?;
                cfg.sim.validate()?;
                cfg.tolerances
                    .classify
                    .get_or_insert(cfg.sim.default_tolerance());
            }
            Command::Regions => {
                self.r(cmd)?;
                let q_max = *g.q_max.get_or_insert(5);
                check_count("q_max", q_max as usize, 2)?;
                check_count("m_count", *g.m_count.get_or_insert(100), 2)?;
            }
            Command::Compare => {
                let r = self.r(cmd)?;
                let speed = self.rational_speed(cmd)?;
                let m_count = *g.m_count.get_or_insert(20);
                let c_count = *g.c_count.get_or_insert(20);
                check_count("m_count", m_count, 2)?;
                check_count("c_count", c_count, 2)?;
                let ms = m_star(r, speed)?.m;
                let cap = migration_cap(r) * (1.0 - 1e-9);
                let m_min = *g.m_min.get_or_insert(0.1 * ms);
                let m_max = *g.m_max.get_or_insert((1.5 * ms).min(cap));
                check_range("m", m_min, m_max)?;
                if g.c_min.is_none() || g.c_max.is_none() {
                    let (lo, hi) =
                        band_extent(r, speed, m_min, m_max, m_count, &cfg.tolerances.front())?;
                    g.c_min.get_or_insert(0.5 * lo);
                    g.c_max.get_or_insert((1.5 * hi).min(1.0 / r));
                }
                let (c_min, c_max) = (g.c_min.unwrap_or_default(), g.c_max.unwrap_or_default());
                check_range("c", c_min, c_max)?;
                Params::new(r, m_min, c_min)?;
                Params::new(r, m_max, c_max)?;
                cfg.sim.validate()?;
                cfg.tolerances
                    .classify
                    .get_or_insert(cfg.sim.default_tolerance());
            }
            Command::Front => {
                let lp = self.linear_params(cmd)?;
                let speed = self.rational_speed(cmd)?;
                let c = match self.params.c {
                    Some(c) => c,
                    None => {
                        let b = c_bounds_with(&lp, speed, &cfg.tolerances.front())?;
                        0.5 * (b.c_min + b.c_max)
                    }
                };
                lp.with_threshold(c)?;
                cfg.params.c = Some(c);
            }
            Command::Slin => {
                let lp = self.linear_params(cmd)?;
                linear_spreading_speed(&lp)?;
                let cap = migration_cap(lp.r()) * (1.0 - 1e-9);
                let m_min = *g.m_min.get_or_insert(1e-3);
                let m_max = *g.m_max.get_or_insert(cap);
                check_range("m", m_min, m_max)?;
                LinearParams::new(lp.r(), m_max)?.require_front_regime()?;
                check_count("m_count", *g.m_count.get_or_insert(100), 2)?;
                check_count("gamma_count", *g.gamma_count.get_or_insert(500), 2)?;
            }
            Command::Spectrum => {
                let lp = self.linear_params(cmd)?;
                let speed = self.rational_speed(cmd)?;
                check_count("k_count", *g.k_count.get_or_insert(256), MIN_K_SAMPLES)?;
                let weight = match g.weight {
                    Some(w) => w,
                    None => {
                        WeightedSpace::between(&crate::linear::decay_rates_for_speed(&lp, speed)?)?
                            .weight_rate()
                    }
                };
                WeightedSpace::new(weight)?;
                g.weight = Some(weight);
            }
            Command::Widths => {
                let r = self.r(cmd)?;
                self.rational_speed(cmd)?;
                let m_min = *g.m_min.get_or_insert(1e-4);
                let m_max = *g.m_max.get_or_insert(1e-2);
                check_range("m", m_min, m_max)?;
                check_count("m_count", *g.m_count.get_or_insert(12), 4)?;
                LinearParams::new(r, m_max)?;
            }
        }
        Ok(cfg)
    }
}

/// Smallest `c_min` and largest `c_max` over an `m` grid, skipping points
/// outside the band.
fn band_extent(
    r: f64,
    speed: RationalSpeed,
    m_min: f64,
    m_max: f64,
    count: usize,
    tol: &FrontTolerances,
) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..count {
        let m = m_min + (m_max - m_min) * i as f64 / (count - 1) as f64;
        if let Ok(b) = LinearParams::new(r, m).and_then(|lp| c_bounds_with(&lp, speed, tol)) {
            lo = lo.min(b.c_min);
            hi = hi.max(b.c_max);
        }
    }
    if lo < hi {
        Ok((lo, hi))
    } else {
        Err(Error::Config(format!(
            "no grid point in [{m_min}, {m_max}] lies inside the {speed} band"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_blocks() {
        let cfg = RunConfig::from_toml(
            r#"
            out = "here"
            [params]
            r = 1.3
            m = 0.1
            [speed]
            p = 2
            q = 5
            [sim]
            lattice_size = 300
            [tolerances]
            residual = 1e-8
            "#,
        )
        .unwrap();
        assert_eq!(cfg.params.r, Some(1.3));
        assert_eq!(cfg.speed.q, Some(5));
        assert_eq!(cfg.sim.lattice_size, 300);
        assert_eq!(cfg.sim.measure_generations, 10_000);
        assert_eq!(cfg.tolerances.residual, 1e-8);
        assert_eq!(cfg.tolerances.pairing, 1e-9);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(RunConfig::from_toml("[params]\nrr = 1.0").is_err());
    }

    #[test]
    fn resolved_config_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.params.r = Some(1.2);
        cfg.params.c = Some(0.4);
        let resolved = cfg.resolve(Command::Staircase).unwrap();
        assert_eq!(resolved.grid.m_count, Some(200));
        assert_eq!(resolved.tolerances.classify, Some(5e-5));
        let back = RunConfig::from_toml(&resolved.to_toml()).unwrap();
        assert_eq!(back, resolved);
    }

    #[test]
    fn validation_happens_before_work() {
        let mut cfg = RunConfig::default();
        cfg.params.r = Some(1.2);
        cfg.params.c = Some(0.95);
        assert!(cfg.resolve(Command::Staircase).is_err());
        cfg.params.c = Some(0.4);
        cfg.sim.lattice_size = 10;
        assert!(cfg.resolve(Command::Staircase).is_err());
        assert!(RunConfig::default().resolve(Command::Front).is_err());
    }

    #[test]
    fn tolerance_override_by_name() {
        let mut t = Tolerances::default();
        t.set("modulus-gap", 1e-6).unwrap();
        t.set("classify", 1e-3).unwrap();
        assert_eq!(t.modulus_gap, 1e-6);
        assert_eq!(t.classify, Some(1e-3));
        assert!(t.set("nope", 1.0).is_err());
        t.set("residual", -1.0).unwrap();
        assert!(t.validate().is_err());
    }

    #[test]
    fn front_defaults_threshold_to_band_middle() {
        let cfg = RunConfig {
            params: ParamBlock {
                r: Some(1.3),
                m: Some(0.1),
                c: None,
            },
            speed: SpeedBlock {
                p: Some(1),
                q: Some(3),
            },
            ..RunConfig::default()
        };
        let resolved = cfg.resolve(Command::Front).unwrap();
        let c = resolved.params.c.unwrap();
        assert!(c > 0.12 && c < 0.25, "{c}");
    }
}
