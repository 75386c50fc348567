//! TOML experiment configuration.

use std::path::Path;

use dustflow::blowup::{BlowupSearch, DEFAULT_DELTA};
use dustflow::data::{DensityProfile, InitialData, VelocityProfile};
use dustflow::oracle::{Geometry, OracleConfig, Reconstruction};
use dustflow::scale::ScaleFactor;
use dustflow::spherical::RateFitOptions;
use serde::Deserialize;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: Option<u64>,
    pub scale: ScaleConfig,
    pub data: DataConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub blowup: BlowupConfig,
    #[serde(default)]
    pub oracle: OracleToml,
    #[serde(default)]
    pub spherical: SphericalConfig,
    #[serde(default)]
    pub thresholds: ThresholdsConfig,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScaleConfig {
    PowerLaw {
        l: f64,
    },
    Exponential {
        #[serde(default = "one")]
        rate: f64,
    },
    Constant,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub dim: usize,
    pub epsilon: f64,
    #[serde(default = "one")]
    pub light_speed: f64,
    pub velocity: VelocityConfig,
    #[serde(default)]
    pub density: DensityConfig,
    #[serde(default)]
    pub allow_large_epsilon: bool,
    #[serde(default)]
    pub norm_box: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum VelocityConfig {
    Zero,
    Linear {
        slope: f64,
    },
    Arctan {
        #[serde(default = "minus_one")]
        sign: f64,
        #[serde(default)]
        delta: f64,
    },
    Gaussian {
        amplitude: f64,
        width: f64,
    },
    Sine {
        amplitude: f64,
        wavenumber: f64,
    },
    Sum {
        parts: Vec<VelocityConfig>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensityConfig {
    Constant { value: f64 },
    Gaussian { amplitude: f64, width: f64, background: f64 },
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig::Constant { value: 1.0 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub times: Vec<f64>,
    pub labels: Vec<Vec<f64>>,
    /// Extra labels drawn uniformly from `label_box` with the run seed.
    pub random_labels: usize,
    pub label_box: [f64; 2],
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self { times: vec![0.0, 1.0], labels: Vec::new(), random_labels: 0, label_box: [-5.0, 5.0] }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub epsilons: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlowupConfig {
    pub t_max: f64,
    #[serde(rename = "box")]
    pub label_box: [f64; 2],
    pub points: usize,
}

impl Default for BlowupConfig {
    fn default() -> Self {
        let d = BlowupSearch::default();
        Self { t_max: d.t_max, label_box: [d.box_lo, d.box_hi], points: d.points_per_axis }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleToml {
    #[serde(rename = "N")]
    pub n_cells: usize,
    /// Grid sizes to run side by side; overrides `N` when non-empty.
    pub levels: Vec<usize>,
    pub x_lo: f64,
    pub x_hi: f64,
    pub cfl: f64,
    pub t_end: f64,
    pub reconstruction: String,
    pub geometry: String,
    pub snapshots: usize,
    pub space_dim: Option<usize>,
    pub radial_curvature: bool,
    pub monitor_factor: f64,
    pub write_snapshots: bool,
}

impl Default for OracleToml {
    fn default() -> Self {
        let d = OracleConfig::default();
        Self {
            n_cells: d.n_cells,
            levels: Vec::new(),
            x_lo: d.x_lo,
            x_hi: d.x_hi,
            cfl: d.cfl,
            t_end: d.t_end,
            reconstruction: "none".into(),
            geometry: "planar".into(),
            snapshots: d.snapshots,
            space_dim: None,
            radial_curvature: false,
            monitor_factor: d.monitor_factor,
            write_snapshots: true,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SphericalConfig {
    pub n: usize,
    /// Labels to fit; the first-blowing label in `[0, r_max]` when empty.
    pub alphas: Vec<f64>,
    pub r_max: f64,
    pub t_max: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    pub per_decade: usize,
    pub min_r_squared: f64,
}

impl Default for SphericalConfig {
    fn default() -> Self {
        let d = RateFitOptions::default();
        Self {
            n: 3,
            alphas: Vec::new(),
            r_max: 5.0,
            t_max: 1e8,
            tau_min: d.tau_min,
            tau_max: d.tau_max,
            per_decade: d.per_decade,
            min_r_squared: d.min_r_squared,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdsConfig {
    pub delta: f64,
}

impl Default for ThresholdsConfig {
    fn default() -> Self {
        Self { delta: DEFAULT_DELTA }
    }
}

fn one() -> f64 {
    1.0
}

fn minus_one() -> f64 {
    -1.0
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn scale(&self) -> Result<ScaleFactor, CliError> {
        let s = match self.scale {
            ScaleConfig::PowerLaw { l } => ScaleFactor::power_law(l),
            ScaleConfig::Exponential { rate } => ScaleFactor::exponential(rate),
            ScaleConfig::Constant => Ok(ScaleFactor::constant()),
        };
        Ok(s?)
    }

    pub fn data(&self) -> Result<InitialData, CliError> {
        let d = &self.data;
        let mut b = InitialData::builder(d.dim)
            .light_speed(d.light_speed)
            .epsilon(d.epsilon)
            .velocity(d.velocity.to_profile())
            .density(d.density.to_profile());
        if let Some([lo, hi]) = d.norm_box {
            b = b.norm_box(lo, hi);
        }
        if d.allow_large_epsilon {
            b = b.allow_large_epsilon();
        }
        Ok(b.build()?)
    }

    pub fn blowup_search(&self) -> BlowupSearch {
        let b = &self.blowup;
        BlowupSearch { delta: self.thresholds.delta, ..BlowupSearch::default() }
            .with_t_max(b.t_max)
            .with_box(b.label_box[0], b.label_box[1])
            .with_points(b.points)
    }

    /// One solver configuration per grid level.
    pub fn oracle_levels(&self) -> Result<Vec<OracleConfig>, CliError> {
        let o = &self.oracle;
        let reconstruction = match o.reconstruction.as_str() {
            "none" => Reconstruction::None,
            "minmod" => Reconstruction::Minmod,
            other => return Err(CliError::Config(format!("unknown reconstruction {other:?}"))),
        };
        let geometry = match o.geometry.as_str() {
            "planar" => Geometry::Planar,
            "radial" => Geometry::Radial,
            other => return Err(CliError::Config(format!("unknown geometry {other:?}"))),
        };
        let levels = if o.levels.is_empty() { vec![o.n_cells] } else { o.levels.clone() };
        levels
            .into_iter()
            .map(|n_cells| {
                let cfg = OracleConfig {
                    n_cells,
                    x_lo: o.x_lo,
                    x_hi: o.x_hi,
                    cfl: o.cfl,
                    t_end: o.t_end,
                    reconstruction,
                    geometry,
                    snapshots: o.snapshots,
                    monitor_factor: o.monitor_factor,
                    space_dim: o.space_dim.unwrap_or(self.data.dim),
                    radial_curvature: o.radial_curvature,
                    ..OracleConfig::default()
                };
                cfg.validate()?;
                Ok(cfg)
            })
            .collect()
    }

    pub fn rate_fit_options(&self) -> RateFitOptions {
        let s = &self.spherical;
        RateFitOptions {
            tau_min: s.tau_min,
            tau_max: s.tau_max,
            per_decade: s.per_decade,
            min_r_squared: s.min_r_squared,
            ..RateFitOptions::default()
        }
    }
}

impl VelocityConfig {
    fn to_profile(&self) -> VelocityProfile {
        match self {
            VelocityConfig::Zero => VelocityProfile::Zero,
            VelocityConfig::Linear { slope } => VelocityProfile::Linear { slope: *slope },
            VelocityConfig::Arctan { sign, delta } => VelocityProfile::Arctan { delta: *delta, sign: *sign },
            VelocityConfig::Gaussian { amplitude, width } => {
                VelocityProfile::Gaussian { amplitude: *amplitude, width: *width }
            }
            VelocityConfig::Sine { amplitude, wavenumber } => {
                VelocityProfile::Sine { amplitude: *amplitude, wavenumber: *wavenumber }
            }
            VelocityConfig::Sum { parts } => VelocityProfile::Sum(parts.iter().map(|p| p.to_profile()).collect()),
        }
    }
}

impl DensityConfig {
    fn to_profile(&self) -> DensityProfile {
        match *self {
            DensityConfig::Constant { value } => DensityProfile::Constant { value },
            DensityConfig::Gaussian { amplitude, width, background } => {
                DensityProfile::Gaussian { amplitude, width, background }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1
[scale]
kind = "constant"
[data]
dim = 1
epsilon = 0.1
velocity = { profile = "zero" }
"#;

    #[test]
    fn minimal_config_parses() {
        let cfg = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.data.dim, 1);
        assert_eq!(cfg.blowup.points, 41);
        assert!(cfg.data().is_ok());
        assert!(cfg.scale().is_ok());
    }

    #[test]
    fn wrong_schema_and_unknown_keys_are_rejected() {
        let bad = MINIMAL.replace("schema_version = 1", "schema_version = 7");
        assert!(matches!(ExperimentConfig::parse(&bad), Err(CliError::Config(_))));
        let extra = format!("{MINIMAL}\nbogus = 3\n");
        assert!(matches!(ExperimentConfig::parse(&extra), Err(CliError::Config(_))));
    }

    #[test]
    fn oracle_keys() {
        let text = format!("{MINIMAL}\n[oracle]\nN = 123\nreconstruction = \"minmod\"\n");
        let cfg = ExperimentConfig::parse(&text).unwrap();
        let levels = cfg.oracle_levels().unwrap();
        assert_eq!(levels.len(), 1);
        assert_eq!(levels[0].n_cells, 123);
        assert_eq!(levels[0].reconstruction, Reconstruction::Minmod);
    }
}
